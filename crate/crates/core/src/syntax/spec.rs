//! Spec files: type aliases, process declarations and run directives.

use super::{Aliases, PResult, ParseError, Parser};
use crate::beacon::Window;
use crate::proc::{Ctx, Term};
use crate::types::{HypSet, Ident, Pred, SessionType, TExpr};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub ty: SessionType,
}

/// `proc name (gvars ; hyps ; x : A, ...) @ T :: A = M;`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcDef {
    pub name: String,
    pub gvars: Vec<Ident>,
    pub hyps: Vec<Pred>,
    pub ctx: Vec<(Ident, SessionType)>,
    pub time: TExpr,
    pub ty: SessionType,
    pub body: Term,
}

impl ProcDef {
    pub fn hypset(&self) -> HypSet {
        HypSet::from_parts(self.gvars.iter().cloned(), self.hyps.iter().cloned())
    }

    pub fn context(&self) -> Ctx {
        self.ctx.iter().cloned().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provider {
    Beacon(Window),
    Proc(String),
}

/// `run name with x = beacon(2, 6), y = other channel a horizon 40;`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunDef {
    pub target: String,
    pub with: Vec<(Ident, Provider)>,
    pub channel: Option<String>,
    pub horizon: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Type(TypeDef),
    Proc(ProcDef),
    Run(RunDef),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecFile {
    pub items: Vec<Item>,
}

impl SpecFile {
    pub fn parse(src: &str) -> Result<SpecFile, ParseError> {
        let mut p = Parser::new(src)?;
        let mut env = Aliases::new();
        let mut items = Vec::new();
        let mut names = std::collections::BTreeSet::new();
        while !p.at_end() {
            let item = p.item(&env)?;
            match &item {
                Item::Type(d) => {
                    env.insert(d.name.clone(), d.ty.clone());
                }
                Item::Proc(d) if !names.insert(d.name.clone()) => {
                    return p.err(format!("process `{}` declared twice", d.name));
                }
                _ => {}
            }
            items.push(item);
        }
        Ok(SpecFile { items })
    }

    pub fn procs(&self) -> impl Iterator<Item = &ProcDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Proc(d) => Some(d),
            _ => None,
        })
    }

    pub fn runs(&self) -> impl Iterator<Item = &RunDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Run(r) => Some(r),
            _ => None,
        })
    }

    pub fn proc_named(&self, name: &str) -> Option<&ProcDef> {
        self.procs().find(|d| d.name == name)
    }

    pub fn aliases(&self) -> Aliases {
        self.items
            .iter()
            .filter_map(|i| match i {
                Item::Type(d) => Some((d.name.clone(), d.ty.clone())),
                _ => None,
            })
            .collect()
    }
}

impl Parser {
    fn item(&mut self, env: &Aliases) -> PResult<Item> {
        if self.eat_kw("type") {
            let name = self.name()?;
            self.expect("=")?;
            let ty = self.session_type(env)?;
            self.expect(";")?;
            return Ok(Item::Type(TypeDef { name, ty }));
        }
        if self.eat_kw("proc") {
            let name = self.name()?;
            let (mut gvars, mut hyps, mut ctx) = (vec![], vec![], vec![]);
            if self.eat("(") {
                gvars = self.sep_until(";", |p| p.ident())?;
                self.expect(";")?;
                hyps = self.sep_until(";", |p| p.pred())?;
                self.expect(";")?;
                ctx = self.sep_until(")", |p| {
                    let x = p.ident()?;
                    p.expect(":")?;
                    Ok((x, p.session_type(env)?))
                })?;
                self.expect(")")?;
            }
            self.expect("@")?;
            let time = self.texpr()?;
            self.expect("::")?;
            let ty = self.session_type(env)?;
            self.expect("=")?;
            let body = self.term(env)?;
            self.expect(";")?;
            return Ok(Item::Proc(ProcDef { name, gvars, hyps, ctx, time, ty, body }));
        }
        if self.eat_kw("run") {
            let target = self.name()?;
            let mut with = vec![];
            if self.eat_kw("with") {
                loop {
                    let x = self.ident()?;
                    self.expect("=")?;
                    let prov = if self.is_kw("beacon") { Provider::Beacon(self.window()?) } else { Provider::Proc(self.name()?) };
                    with.push((x, prov));
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            let channel = if self.eat_kw("channel") { Some(self.name()?) } else { None };
            let horizon = if self.eat_kw("horizon") { Some(self.num()?) } else { None };
            self.expect(";")?;
            return Ok(Item::Run(RunDef { target, with, channel, horizon }));
        }
        self.unexpected("`type`, `proc` or `run`")
    }

    fn sep_until<T>(&mut self, stop: &str, mut f: impl FnMut(&mut Parser) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = vec![];
        if self.is(stop) {
            return Ok(out);
        }
        loop {
            out.push(f(self)?);
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for ProcDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "proc {}", self.name)?;
        if !(self.gvars.is_empty() && self.hyps.is_empty() && self.ctx.is_empty()) {
            let ctx: Vec<String> = self.ctx.iter().map(|(x, a)| format!("{x} : {a}")).collect();
            write!(f, " ({} ; {} ; {})", join(&self.gvars), join(&self.hyps), ctx.join(", "))?;
        }
        write!(f, " @ {} :: {}\n  = {};", self.time, self.ty, self.body)
    }
}

impl fmt::Display for RunDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run {}", self.target)?;
        if !self.with.is_empty() {
            let w: Vec<String> = self
                .with
                .iter()
                .map(|(x, p)| match p {
                    Provider::Beacon(w) => format!("{x} = {w}"),
                    Provider::Proc(n) => format!("{x} = {n}"),
                })
                .collect();
            write!(f, " with {}", w.join(", "))?;
        }
        if let Some(c) = &self.channel {
            write!(f, " channel {c}")?;
        }
        if let Some(h) = self.horizon {
            write!(f, " horizon {h}")?;
        }
        f.write_str(";")
    }
}

impl fmt::Display for SpecFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            match item {
                Item::Type(d) => writeln!(f, "type {} = {};", d.name, d.ty)?,
                Item::Proc(d) => writeln!(f, "{d}")?,
                Item::Run(r) => writeln!(f, "{r}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "
        // a delayed closer and its client
        type Close3 = 1{t | t == 3};
        proc closer @ 0 :: Close3 = send{t | t == 3}();
        proc client (t0 ; t0 <= 2 ; x : 1{t | t == t0 + 1}) @ t0 :: 1{t | t == t0 + 5}
          = recv{t0 + 1} x(); send{t | t == t0 + 5}();
        run client with x = beacon(1, 4) channel out horizon 20;
        run closer;
    ";

    #[test]
    fn parses_and_round_trips() {
        let f = SpecFile::parse(SRC).unwrap();
        assert_eq!(f.procs().count(), 2);
        let client = f.proc_named("client").unwrap();
        assert_eq!(client.gvars.len(), 1);
        assert_eq!(client.ctx[0].0.as_ref(), "x");
        let run = f.runs().next().unwrap();
        assert_eq!(run.with[0].1, Provider::Beacon(Window::new(1, Some(4))));
        assert_eq!(run.horizon, Some(20));
        let printed = f.to_string();
        assert_eq!(SpecFile::parse(&printed).unwrap(), f);
    }

    #[test]
    fn errors_carry_positions() {
        let e = SpecFile::parse("type A = 1{t | t == 3};\nproc p @ 0 :: B = fwd{0}(x);").unwrap_err();
        assert_eq!((e.line, e.col), (2, 15));
        assert!(e.msg.contains("unknown type"));
        let e = SpecFile::parse("proc p @ 0 :: 1{t | true} = send{t | true}();\nproc p @ 0 :: 1{t | true} = send{t | true}();")
            .unwrap_err();
        assert!(e.msg.contains("twice"));
    }
}
