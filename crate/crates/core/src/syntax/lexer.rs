use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    Chan(String),
    Punct(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Chan(c) => write!(f, "`'{c}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

// longest first
const PUNCT: &[&str] = &[
    "-o", "::", "=>", "<=", ">=", "==", "!=", "&&", "||", "<|", "|>", "{", "}", "(", ")", "[", "]", "|", ";", ":",
    ",", ".", "=", "<", ">", "+", "*", "&", "!", "@",
];

fn chan_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '#' | '%' | '~')
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let bump = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                bump(&mut i, &mut line, &mut col, ch);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: l0, col: c0 });
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                let ch = chars[i];
                bump(&mut i, &mut line, &mut col, ch);
            }
            push(&mut out, Tok::Ident(s));
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                let ch = chars[i];
                bump(&mut i, &mut line, &mut col, ch);
            }
            let n = s.parse().map_err(|_| ParseError::new(l0, c0, format!("number `{s}` is too large")))?;
            push(&mut out, Tok::Num(n));
        } else if c == '\'' {
            bump(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            while i < chars.len() && chan_char(chars[i]) {
                s.push(chars[i]);
                let ch = chars[i];
                bump(&mut i, &mut line, &mut col, ch);
            }
            if s.is_empty() {
                return Err(ParseError::new(l0, c0, "empty channel literal".into()));
            }
            push(&mut out, Tok::Chan(s));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                return Err(ParseError::new(l0, c0, format!("unexpected character `{c}`")));
            };
            for ch in p.chars() {
                bump(&mut i, &mut line, &mut col, ch);
            }
            push(&mut out, Tok::Punct(p));
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = lex("A -o{t | t <= 3}\n  'x // note\n  ;").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|s| s.tok.clone()).collect();
        assert_eq!(kinds[1], Tok::Punct("-o"));
        assert_eq!(kinds[6], Tok::Punct("<="));
        assert_eq!(kinds[9], Tok::Chan("x".into()));
        assert_eq!((toks[9].line, toks[9].col), (2, 3));
        assert_eq!((toks[10].line, toks[10].col), (3, 3));
        assert!(lex("a $ b").unwrap_err().to_string().starts_with("1:3"));
    }
}
