//! Concrete syntax: predicates, session types, process terms, spec files,
//! and the certificate document format.

mod cert;
mod lexer;
mod spec;

pub use cert::{ct_from_json, ct_to_json, CertError, ObjReader};
pub use spec::{Item, ProcDef, Provider, RunDef, SpecFile, TypeDef};

use crate::beacon::Window;
use crate::lts::{Channel, Sel};
use crate::proc::{Sym, Term};
use crate::types::{ident, Cmp, Conn, Ident, Pred, SessionType, TExpr, TPred};
use lexer::{lex, Spanned, Tok};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, col: usize, msg: String) -> Self {
        ParseError { line, col, msg }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

const KEYWORDS: &[&str] = &[
    "fwd", "let", "send", "recv", "case", "select", "pi1", "pi2", "true", "false", "type", "proc", "run", "with",
    "channel", "horizon", "beacon", "inf",
];

/// Type aliases in scope; expanded textually at each use.
pub type Aliases = BTreeMap<String, SessionType>;

pub(crate) struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ParseError::new(s.line, s.col, msg.into()))
    }

    fn unexpected<T>(&self, what: &str) -> PResult<T> {
        self.err(format!("expected {what}, found {}", self.peek()))
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    pub(crate) fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected("a name"),
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        self.name().map(|s| ident(&s))
    }

    pub(crate) fn num(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(n)
            }
            _ => self.unexpected("a number"),
        }
    }

    pub(crate) fn chan(&mut self) -> PResult<Channel> {
        match self.peek().clone() {
            Tok::Chan(c) => {
                self.advance();
                Ok(Channel::new(&c))
            }
            _ => self.unexpected("a channel literal"),
        }
    }


    // ---- time expressions and predicates

    pub(crate) fn texpr(&mut self) -> PResult<TExpr> {
        let mut e = match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                TExpr::lit(n)
            }
            Tok::Ident(_) => TExpr::var(&self.ident()?),
            _ => return self.unexpected("a time expression"),
        };
        while self.eat("+") {
            match self.peek().clone() {
                Tok::Num(n) => {
                    self.advance();
                    e = e.plus(n);
                }
                Tok::Ident(_) if e.var.is_none() => {
                    let v = self.ident()?;
                    e = TExpr::var(&v).plus(e.k);
                }
                _ => return self.unexpected("a number"),
            }
        }
        Ok(e)
    }

    pub(crate) fn pred(&mut self) -> PResult<Pred> {
        let a = self.pred_and()?;
        if self.eat("||") {
            Ok(Pred::or(a, self.pred()?))
        } else {
            Ok(a)
        }
    }

    fn pred_and(&mut self) -> PResult<Pred> {
        let a = self.pred_unary()?;
        if self.eat("&&") {
            Ok(Pred::and(a, self.pred_and()?))
        } else {
            Ok(a)
        }
    }

    fn pred_unary(&mut self) -> PResult<Pred> {
        if self.eat("!") {
            return Ok(Pred::not(self.pred_unary()?));
        }
        if self.eat("(") {
            let p = self.pred()?;
            self.expect(")")?;
            return Ok(p);
        }
        if self.eat_kw("true") {
            return Ok(Pred::True);
        }
        if self.eat_kw("false") {
            return Ok(Pred::False);
        }
        // a chain `e1 op e2 op e3 ...` is a conjunction of neighbours
        let mut lhs = self.texpr()?;
        let mut atoms = Vec::new();
        while let Tok::Punct(op @ ("<=" | "<" | "==" | ">=" | ">" | "!=")) = *self.peek() {
            self.advance();
            let rhs = self.texpr()?;
            atoms.push(match op {
                "<=" => Pred::atom(lhs, Cmp::Le, rhs.clone()),
                "<" => Pred::atom(lhs, Cmp::Lt, rhs.clone()),
                "==" => Pred::atom(lhs, Cmp::Eq, rhs.clone()),
                ">=" => Pred::atom(rhs.clone(), Cmp::Le, lhs),
                ">" => Pred::atom(rhs.clone(), Cmp::Lt, lhs),
                _ => Pred::not(Pred::atom(lhs, Cmp::Eq, rhs.clone())),
            });
            lhs = rhs;
        }
        if atoms.is_empty() {
            return self.unexpected("a comparison");
        }
        let last = atoms.pop().expect("nonempty");
        Ok(atoms.into_iter().rev().fold(last, |acc, a| Pred::and(a, acc)))
    }

    pub(crate) fn tpred(&mut self) -> PResult<TPred> {
        self.expect("{")?;
        let b = self.ident()?;
        self.expect("|")?;
        let p = self.pred()?;
        self.expect("}")?;
        Ok(TPred { binder: b, pred: p })
    }

    fn at(&mut self) -> PResult<TExpr> {
        self.expect("{")?;
        let e = self.texpr()?;
        self.expect("}")?;
        Ok(e)
    }

    /// After `{`: a name followed by `|` opens a temporal predicate.
    fn brace_is_tpred(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(_)) && matches!(self.peek_at(2), Tok::Punct("|"))
    }

    // ---- session types

    pub(crate) fn session_type(&mut self, env: &Aliases) -> PResult<SessionType> {
        let a = self.type_prim(env)?;
        let conn = match self.peek() {
            Tok::Punct("-o") => Conn::Lolli,
            Tok::Punct("*") => Conn::Tensor,
            Tok::Punct("&") => Conn::With,
            Tok::Punct("+") => Conn::Plus,
            _ => return Ok(a),
        };
        self.advance();
        let tp = self.tpred()?;
        let b = self.session_type(env)?;
        Ok(SessionType::bin(conn, a, b, tp))
    }

    fn type_prim(&mut self, env: &Aliases) -> PResult<SessionType> {
        match self.peek().clone() {
            Tok::Num(1) => {
                self.advance();
                Ok(SessionType::one(self.tpred()?))
            }
            Tok::Punct("(") => {
                self.advance();
                let a = self.session_type(env)?;
                self.expect(")")?;
                Ok(a)
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => match env.get(&s) {
                Some(a) => {
                    self.advance();
                    Ok(a.clone())
                }
                None => self.err(format!("unknown type `{s}`")),
            },
            _ => self.unexpected("a session type"),
        }
    }

    // ---- terms

    fn sym(&mut self) -> PResult<Sym> {
        match self.peek() {
            Tok::Chan(_) => Ok(Sym::Chan(self.chan()?)),
            _ => Ok(Sym::Var(self.ident()?)),
        }
    }

    fn sel(&mut self) -> PResult<Sel> {
        if self.eat_kw("pi1") {
            Ok(Sel::P1)
        } else if self.eat_kw("pi2") {
            Ok(Sel::P2)
        } else {
            self.unexpected("`pi1` or `pi2`")
        }
    }

    fn branches(&mut self, env: &Aliases) -> PResult<(Box<Term>, Box<Term>)> {
        self.expect("(")?;
        self.expect_kw("pi1")?;
        self.expect("=>")?;
        let l = self.term(env)?;
        self.expect("|")?;
        self.expect_kw("pi2")?;
        self.expect("=>")?;
        let r = self.term(env)?;
        self.expect(")")?;
        Ok((Box::new(l), Box::new(r)))
    }

    fn binder_body(&mut self, env: &Aliases) -> PResult<(Ident, Box<Term>)> {
        self.expect("(")?;
        let x = self.ident()?;
        self.expect("=>")?;
        let m = self.term(env)?;
        self.expect(")")?;
        Ok((x, Box::new(m)))
    }

    fn then(&mut self, env: &Aliases) -> PResult<Box<Term>> {
        self.expect(";")?;
        Ok(Box::new(self.term(env)?))
    }

    pub(crate) fn term(&mut self, env: &Aliases) -> PResult<Term> {
        if self.eat("(") {
            let m = self.term(env)?;
            self.expect(")")?;
            return Ok(m);
        }
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            Tok::Chan(_) => String::new(),
            _ => return self.unexpected("a process term"),
        };
        match kw.as_str() {
            "fwd" => {
                self.advance();
                let at = self.at()?;
                self.expect("(")?;
                let src = self.sym()?;
                self.expect(")")?;
                Ok(Term::Fwd { at, src })
            }
            "let" => {
                self.advance();
                let at = self.at()?;
                let var = self.ident()?;
                self.expect(":")?;
                let ty = self.session_type(env)?;
                self.expect("=")?;
                let def = Box::new(self.term(env)?);
                let def_ty = if self.eat("::") { Some(self.session_type(env)?) } else { None };
                let body = self.then(env)?;
                Ok(Term::Let { at, var, ty, def_ty, def, body })
            }
            "send" => {
                self.advance();
                if self.brace_is_tpred() {
                    let tp = self.tpred()?;
                    self.expect("(")?;
                    if self.eat(")") {
                        return Ok(Term::SendClose { tp });
                    }
                    let arg = Box::new(self.term(env)?);
                    self.expect(")")?;
                    let body = self.then(env)?;
                    Ok(Term::SendChanR { tp, arg, body })
                } else {
                    let at = self.at()?;
                    let subj = self.sym()?;
                    self.expect("(")?;
                    let arg = Box::new(self.term(env)?);
                    self.expect(")")?;
                    let body = self.then(env)?;
                    Ok(Term::SendChan { at, subj, arg, body })
                }
            }
            "recv" => {
                self.advance();
                if self.brace_is_tpred() {
                    let tp = self.tpred()?;
                    let (var, body) = self.binder_body(env)?;
                    Ok(Term::RecvChan { tp, var, body })
                } else {
                    let at = self.at()?;
                    let subj = self.sym()?;
                    if self.is("(") && matches!(self.peek_at(1), Tok::Punct(")")) {
                        self.advance();
                        self.advance();
                        let body = self.then(env)?;
                        return Ok(Term::RecvClose { at, subj, body });
                    }
                    let (var, body) = self.binder_body(env)?;
                    Ok(Term::RecvChanR { at, subj, var, body })
                }
            }
            "case" => {
                self.advance();
                if self.brace_is_tpred() {
                    let tp = self.tpred()?;
                    let (left, right) = self.branches(env)?;
                    Ok(Term::RecvSel { tp, left, right })
                } else {
                    let at = self.at()?;
                    let subj = self.sym()?;
                    let (left, right) = self.branches(env)?;
                    Ok(Term::RecvSelR { at, subj, left, right })
                }
            }
            "select" => {
                self.advance();
                let tp = self.tpred()?;
                self.expect("(")?;
                let sel = self.sel()?;
                self.expect(")")?;
                let body = self.then(env)?;
                Ok(Term::SendSelR { tp, sel, body })
            }
            _ => {
                let subj = self.sym()?;
                if !self.is(".") {
                    return self.unexpected("`.select` after a channel");
                }
                self.advance();
                self.expect_kw("select")?;
                let at = self.at()?;
                self.expect("(")?;
                let sel = self.sel()?;
                self.expect(")")?;
                let body = self.then(env)?;
                Ok(Term::SendSel { at, subj, sel, body })
            }
        }
    }

    pub(crate) fn window(&mut self) -> PResult<Window> {
        self.expect_kw("beacon")?;
        self.expect("(")?;
        let lo = self.num()?;
        self.expect(",")?;
        let hi = if self.eat_kw("inf") { None } else { Some(self.num()?) };
        self.expect(")")?;
        if hi.is_some_and(|h| h < lo) {
            return self.err("empty beacon window");
        }
        Ok(Window::new(lo, hi))
    }
}

fn whole<T>(src: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<T> {
    let mut p = Parser::new(src)?;
    let v = f(&mut p)?;
    p.finish()?;
    Ok(v)
}

pub fn parse_texpr(src: &str) -> Result<TExpr, ParseError> {
    whole(src, |p| p.texpr())
}

pub fn parse_pred(src: &str) -> Result<Pred, ParseError> {
    whole(src, |p| p.pred())
}

pub fn parse_type(src: &str) -> Result<SessionType, ParseError> {
    parse_type_in(src, &Aliases::new())
}

pub fn parse_type_in(src: &str, env: &Aliases) -> Result<SessionType, ParseError> {
    whole(src, |p| p.session_type(env))
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    parse_term_in(src, &Aliases::new())
}

pub fn parse_term_in(src: &str, env: &Aliases) -> Result<Term, ParseError> {
    whole(src, |p| p.term(env))
}

pub fn parse_window(src: &str) -> Result<Window, ParseError> {
    whole(src, |p| p.window())
}

/// Reference inhabitants: `{since} give A; owe 'c : B; ...`.
pub(crate) fn parse_canon_parts(src: &str) -> Result<(u64, SessionType, Vec<(Channel, SessionType)>), ParseError> {
    whole(src, |p| {
        p.expect("{")?;
        let since = p.num()?;
        p.expect("}")?;
        if p.name()? != "give" {
            return p.err("expected `give`");
        }
        let env = Aliases::new();
        let give = p.session_type(&env)?;
        let mut owe = vec![];
        while p.eat(";") {
            if p.name()? != "owe" {
                return p.err("expected `owe`");
            }
            let c = p.chan()?;
            p.expect(":")?;
            owe.push((c, p.session_type(&env)?));
        }
        Ok((since, give, owe))
    })
}

/// The retyping query form `A |> B @ T` (cut) or `A <| B @ T` (forward).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetypeQuery {
    pub cut: bool,
    pub left: SessionType,
    pub right: SessionType,
    pub time: TExpr,
}

pub fn parse_retype_query(src: &str, env: &Aliases) -> Result<RetypeQuery, ParseError> {
    whole(src, |p| {
        let left = p.session_type(env)?;
        let cut = if p.eat("|>") {
            true
        } else if p.eat("<|") {
            false
        } else {
            return p.unexpected("`|>` or `<|`");
        };
        let right = p.session_type(env)?;
        p.expect("@")?;
        let time = p.texpr()?;
        Ok(RetypeQuery { cut, left, right, time })
    })
}
