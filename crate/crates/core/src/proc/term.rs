//! Process terms, channel substitution, and time substitution.

use crate::lts::{Channel, Sel};
use crate::types::{fresh_ident, Ident, SessionType, TExpr, TPred};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A subject: a term variable or, after substitution, a channel.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Var(Ident),
    Chan(Channel),
}

impl Sym {
    pub fn var(&self) -> Option<&Ident> {
        match self {
            Sym::Var(x) => Some(x),
            Sym::Chan(_) => None,
        }
    }

    fn subst(&self, s: &Subst) -> Sym {
        match self {
            Sym::Var(x) => s.get(x).map(|c| Sym::Chan(c.clone())).unwrap_or_else(|| self.clone()),
            Sym::Chan(_) => self.clone(),
        }
    }

    fn rename(&self, from: &Channel, to: &Channel) -> Sym {
        match self {
            Sym::Chan(c) if c == from => Sym::Chan(to.clone()),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Var(x) => write!(f, "{x}"),
            Sym::Chan(c) => write!(f, "'{c}"),
        }
    }
}

pub type Subst = BTreeMap<Ident, Channel>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Fwd { at: TExpr, src: Sym },
    /// `let x : ty = def; body`; `def_ty` is the type `def` provides when it
    /// differs from the type `x` is used at.
    Let { at: TExpr, var: Ident, ty: SessionType, def_ty: Option<SessionType>, def: Box<Term>, body: Box<Term> },
    SendClose { tp: TPred },
    RecvClose { at: TExpr, subj: Sym, body: Box<Term> },
    RecvChan { tp: TPred, var: Ident, body: Box<Term> },
    SendChan { at: TExpr, subj: Sym, arg: Box<Term>, body: Box<Term> },
    SendChanR { tp: TPred, arg: Box<Term>, body: Box<Term> },
    RecvChanR { at: TExpr, subj: Sym, var: Ident, body: Box<Term> },
    RecvSel { tp: TPred, left: Box<Term>, right: Box<Term> },
    SendSel { at: TExpr, subj: Sym, sel: Sel, body: Box<Term> },
    SendSelR { tp: TPred, sel: Sel, body: Box<Term> },
    RecvSelR { at: TExpr, subj: Sym, left: Box<Term>, right: Box<Term> },
}

fn bx(t: Term) -> Box<Term> {
    Box::new(t)
}

fn minus(s: &Subst, x: &Ident) -> Subst {
    let mut s = s.clone();
    s.remove(x);
    s
}

impl Term {
    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut s = BTreeSet::new();
        self.collect_free(&mut s);
        s
    }

    fn collect_free(&self, s: &mut BTreeSet<Ident>) {
        let sym = |x: &Sym, s: &mut BTreeSet<Ident>| {
            if let Sym::Var(v) = x {
                s.insert(v.clone());
            }
        };
        let under = |x: &Ident, m: &Term, s: &mut BTreeSet<Ident>| {
            let mut inner = m.free_vars();
            inner.remove(x);
            s.extend(inner);
        };
        match self {
            Term::Fwd { src, .. } => sym(src, s),
            Term::Let { var, def, body, .. } => {
                def.collect_free(s);
                under(var, body, s);
            }
            Term::SendClose { .. } => {}
            Term::RecvClose { subj, body, .. } => {
                sym(subj, s);
                body.collect_free(s);
            }
            Term::RecvChan { var, body, .. } => under(var, body, s),
            Term::SendChan { subj, arg, body, .. } => {
                sym(subj, s);
                arg.collect_free(s);
                body.collect_free(s);
            }
            Term::SendChanR { arg, body, .. } => {
                arg.collect_free(s);
                body.collect_free(s);
            }
            Term::RecvChanR { subj, var, body, .. } => {
                sym(subj, s);
                under(var, body, s);
            }
            Term::RecvSel { left, right, .. } => {
                left.collect_free(s);
                right.collect_free(s);
            }
            Term::SendSel { subj, body, .. } => {
                sym(subj, s);
                body.collect_free(s);
            }
            Term::SendSelR { body, .. } => body.collect_free(s),
            Term::RecvSelR { subj, left, right, .. } => {
                sym(subj, s);
                left.collect_free(s);
                right.collect_free(s);
            }
        }
    }

    /// Channel names occurring in the term.
    pub fn channels(&self) -> BTreeSet<Channel> {
        let mut out = BTreeSet::new();
        self.visit_syms(&mut |s| {
            if let Sym::Chan(c) = s {
                out.insert(c.clone());
            }
        });
        out
    }

    fn visit_syms(&self, f: &mut dyn FnMut(&Sym)) {
        match self {
            Term::Fwd { src, .. } => f(src),
            Term::SendClose { .. } => {}
            Term::Let { def, body, .. } => {
                def.visit_syms(f);
                body.visit_syms(f);
            }
            Term::RecvClose { subj, body, .. } | Term::SendSel { subj, body, .. } | Term::RecvChanR { subj, body, .. } => {
                f(subj);
                body.visit_syms(f);
            }
            Term::RecvChan { body, .. } | Term::SendSelR { body, .. } => body.visit_syms(f),
            Term::SendChan { subj, arg, body, .. } => {
                f(subj);
                arg.visit_syms(f);
                body.visit_syms(f);
            }
            Term::SendChanR { arg, body, .. } => {
                arg.visit_syms(f);
                body.visit_syms(f);
            }
            Term::RecvSel { left, right, .. } => {
                left.visit_syms(f);
                right.visit_syms(f);
            }
            Term::RecvSelR { subj, left, right, .. } => {
                f(subj);
                left.visit_syms(f);
                right.visit_syms(f);
            }
        }
    }

    /// `σ̂(M)`. Bound variables are removed from `σ` below their binder.
    pub fn subst(&self, s: &Subst) -> Term {
        match self {
            Term::Fwd { at, src } => Term::Fwd { at: at.clone(), src: src.subst(s) },
            Term::Let { at, var, ty, def_ty, def, body } => Term::Let {
                at: at.clone(),
                var: var.clone(),
                ty: ty.clone(),
                def_ty: def_ty.clone(),
                def: bx(def.subst(s)),
                body: bx(body.subst(&minus(s, var))),
            },
            Term::SendClose { .. } => self.clone(),
            Term::RecvClose { at, subj, body } => {
                let inner = match subj {
                    Sym::Var(x) => minus(s, x),
                    Sym::Chan(_) => s.clone(),
                };
                Term::RecvClose { at: at.clone(), subj: subj.subst(s), body: bx(body.subst(&inner)) }
            }
            Term::RecvChan { tp, var, body } => {
                Term::RecvChan { tp: tp.clone(), var: var.clone(), body: bx(body.subst(&minus(s, var))) }
            }
            Term::SendChan { at, subj, arg, body } => Term::SendChan {
                at: at.clone(),
                subj: subj.subst(s),
                arg: bx(arg.subst(s)),
                body: bx(body.subst(s)),
            },
            Term::SendChanR { tp, arg, body } => {
                Term::SendChanR { tp: tp.clone(), arg: bx(arg.subst(s)), body: bx(body.subst(s)) }
            }
            Term::RecvChanR { at, subj, var, body } => Term::RecvChanR {
                at: at.clone(),
                subj: subj.subst(s),
                var: var.clone(),
                body: bx(body.subst(&minus(s, var))),
            },
            Term::RecvSel { tp, left, right } => {
                Term::RecvSel { tp: tp.clone(), left: bx(left.subst(s)), right: bx(right.subst(s)) }
            }
            Term::SendSel { at, subj, sel, body } => {
                Term::SendSel { at: at.clone(), subj: subj.subst(s), sel: *sel, body: bx(body.subst(s)) }
            }
            Term::SendSelR { tp, sel, body } => Term::SendSelR { tp: tp.clone(), sel: *sel, body: bx(body.subst(s)) },
            Term::RecvSelR { at, subj, left, right } => Term::RecvSelR {
                at: at.clone(),
                subj: subj.subst(s),
                left: bx(left.subst(s)),
                right: bx(right.subst(s)),
            },
        }
    }

    /// Renames a channel everywhere.
    pub fn rename_chan(&self, from: &Channel, to: &Channel) -> Term {
        self.map_syms(&|s| s.rename(from, to))
    }

    fn map_syms(&self, f: &dyn Fn(&Sym) -> Sym) -> Term {
        let m = |t: &Term| bx(t.map_syms(f));
        match self {
            Term::Fwd { at, src } => Term::Fwd { at: at.clone(), src: f(src) },
            Term::Let { at, var, ty, def_ty, def, body } => Term::Let {
                at: at.clone(),
                var: var.clone(),
                ty: ty.clone(),
                def_ty: def_ty.clone(),
                def: m(def),
                body: m(body),
            },
            Term::SendClose { .. } => self.clone(),
            Term::RecvClose { at, subj, body } => Term::RecvClose { at: at.clone(), subj: f(subj), body: m(body) },
            Term::RecvChan { tp, var, body } => Term::RecvChan { tp: tp.clone(), var: var.clone(), body: m(body) },
            Term::SendChan { at, subj, arg, body } => {
                Term::SendChan { at: at.clone(), subj: f(subj), arg: m(arg), body: m(body) }
            }
            Term::SendChanR { tp, arg, body } => Term::SendChanR { tp: tp.clone(), arg: m(arg), body: m(body) },
            Term::RecvChanR { at, subj, var, body } => {
                Term::RecvChanR { at: at.clone(), subj: f(subj), var: var.clone(), body: m(body) }
            }
            Term::RecvSel { tp, left, right } => Term::RecvSel { tp: tp.clone(), left: m(left), right: m(right) },
            Term::SendSel { at, subj, sel, body } => Term::SendSel { at: at.clone(), subj: f(subj), sel: *sel, body: m(body) },
            Term::SendSelR { tp, sel, body } => Term::SendSelR { tp: tp.clone(), sel: *sel, body: m(body) },
            Term::RecvSelR { at, subj, left, right } => {
                Term::RecvSelR { at: at.clone(), subj: f(subj), left: m(left), right: m(right) }
            }
        }
    }

    /// Time variables occurring anywhere, bound or free.
    pub fn time_vars(&self) -> BTreeSet<Ident> {
        let mut s = BTreeSet::new();
        self.collect_time_vars(&mut s);
        s
    }

    fn collect_time_vars(&self, s: &mut BTreeSet<Ident>) {
        let tp = |p: &TPred, s: &mut BTreeSet<Ident>| {
            s.insert(p.binder.clone());
            s.extend(p.pred.vars());
        };
        let ex = |e: &TExpr, s: &mut BTreeSet<Ident>| s.extend(e.var.iter().cloned());
        match self {
            Term::Fwd { at, .. } => ex(at, s),
            Term::Let { at, ty, def_ty, def, body, .. } => {
                ex(at, s);
                s.extend(ty.all_vars());
                if let Some(d) = def_ty {
                    s.extend(d.all_vars());
                }
                def.collect_time_vars(s);
                body.collect_time_vars(s);
            }
            Term::SendClose { tp: p } => tp(p, s),
            Term::RecvClose { at, body, .. } | Term::RecvChanR { at, body, .. } | Term::SendSel { at, body, .. } => {
                ex(at, s);
                body.collect_time_vars(s);
            }
            Term::RecvChan { tp: p, body, .. } | Term::SendSelR { tp: p, body, .. } => {
                tp(p, s);
                body.collect_time_vars(s);
            }
            Term::SendChan { at, arg, body, .. } => {
                ex(at, s);
                arg.collect_time_vars(s);
                body.collect_time_vars(s);
            }
            Term::SendChanR { tp: p, arg, body } => {
                tp(p, s);
                arg.collect_time_vars(s);
                body.collect_time_vars(s);
            }
            Term::RecvSel { tp: p, left, right } => {
                tp(p, s);
                left.collect_time_vars(s);
                right.collect_time_vars(s);
            }
            Term::RecvSelR { at, left, right, .. } => {
                ex(at, s);
                left.collect_time_vars(s);
                right.collect_time_vars(s);
            }
        }
    }

    /// `M[e/v]` on time variables, avoiding capture by right-rule binders.
    pub fn subst_time(&self, v: &Ident, e: &TExpr) -> Term {
        let ex = |x: &TExpr| x.subst(v, e);
        let go = |t: &Term| bx(t.subst_time(v, e));
        // A right-rule binder scopes over its predicate and continuations.
        let under = |tp: &TPred, conts: &[&Term]| -> (TPred, Vec<Box<Term>>) {
            if &tp.binder == v {
                return (tp.clone(), conts.iter().map(|t| bx((*t).clone())).collect());
            }
            let clash = e.var.as_ref() == Some(&tp.binder);
            let (tp, conts): (TPred, Vec<Term>) = if clash {
                let mut avoid: BTreeSet<Ident> = conts.iter().flat_map(|t| t.time_vars()).collect();
                avoid.extend(tp.pred.vars());
                avoid.insert(v.clone());
                let b = fresh_ident(&tp.binder, &avoid);
                let be = TExpr::var(&b);
                (
                    TPred { binder: b, pred: tp.at(&be) },
                    conts.iter().map(|t| t.subst_time(&tp.binder, &be)).collect(),
                )
            } else {
                (tp.clone(), conts.iter().map(|t| (*t).clone()).collect())
            };
            let tp2 = TPred { binder: tp.binder.clone(), pred: tp.pred.subst(v, e) };
            (tp2, conts.iter().map(|t| bx(t.subst_time(v, e))).collect())
        };
        match self {
            Term::Fwd { at, src } => Term::Fwd { at: ex(at), src: src.clone() },
            Term::Let { at, var, ty, def_ty, def, body } => Term::Let {
                at: ex(at),
                var: var.clone(),
                ty: ty.subst(v, e),
                def_ty: def_ty.as_ref().map(|d| d.subst(v, e)),
                def: go(def),
                body: go(body),
            },
            Term::SendClose { tp } => Term::SendClose { tp: under(tp, &[]).0 },
            Term::RecvClose { at, subj, body } => Term::RecvClose { at: ex(at), subj: subj.clone(), body: go(body) },
            Term::RecvChan { tp, var, body } => {
                let (tp, mut c) = under(tp, &[body]);
                Term::RecvChan { tp, var: var.clone(), body: c.remove(0) }
            }
            Term::SendChan { at, subj, arg, body } => {
                Term::SendChan { at: ex(at), subj: subj.clone(), arg: go(arg), body: go(body) }
            }
            Term::SendChanR { tp, arg, body } => {
                let (tp, mut c) = under(tp, &[arg, body]);
                let body = c.remove(1);
                Term::SendChanR { tp, arg: c.remove(0), body }
            }
            Term::RecvChanR { at, subj, var, body } => {
                Term::RecvChanR { at: ex(at), subj: subj.clone(), var: var.clone(), body: go(body) }
            }
            Term::RecvSel { tp, left, right } => {
                let (tp, mut c) = under(tp, &[left, right]);
                let right = c.remove(1);
                Term::RecvSel { tp, left: c.remove(0), right }
            }
            Term::SendSel { at, subj, sel, body } => Term::SendSel { at: ex(at), subj: subj.clone(), sel: *sel, body: go(body) },
            Term::SendSelR { tp, sel, body } => {
                let (tp, mut c) = under(tp, &[body]);
                Term::SendSelR { tp, sel: *sel, body: c.remove(0) }
            }
            Term::RecvSelR { at, subj, left, right } => {
                Term::RecvSelR { at: ex(at), subj: subj.clone(), left: go(left), right: go(right) }
            }
        }
    }

    /// The time-variable binder of a right-rule head, if any.
    pub fn head_tpred(&self) -> Option<&TPred> {
        match self {
            Term::SendClose { tp }
            | Term::RecvChan { tp, .. }
            | Term::SendChanR { tp, .. }
            | Term::RecvSel { tp, .. }
            | Term::SendSelR { tp, .. } => Some(tp),
            _ => None,
        }
    }

    /// The annotation of a left-rule, Cut or Fwd head.
    pub fn head_time(&self) -> Option<&TExpr> {
        match self {
            Term::Fwd { at, .. }
            | Term::Let { at, .. }
            | Term::RecvClose { at, .. }
            | Term::SendChan { at, .. }
            | Term::RecvChanR { at, .. }
            | Term::SendSel { at, .. }
            | Term::RecvSelR { at, .. } => Some(at),
            _ => None,
        }
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        1 + match self {
            Term::Fwd { .. } | Term::SendClose { .. } => 0,
            Term::Let { def, body, .. } | Term::SendChan { arg: def, body, .. } | Term::SendChanR { arg: def, body, .. } => {
                def.size() + body.size()
            }
            Term::RecvSel { left, right, .. } | Term::RecvSelR { left, right, .. } => left.size() + right.size(),
            Term::RecvClose { body, .. }
            | Term::RecvChan { body, .. }
            | Term::RecvChanR { body, .. }
            | Term::SendSel { body, .. }
            | Term::SendSelR { body, .. } => body.size(),
        }
    }
}

fn sel_name(s: Sel) -> &'static str {
    match s {
        Sel::P1 => "pi1",
        Sel::P2 => "pi2",
    }
}

/// Concrete syntax; reparses to the same term.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Fwd { at, src } => write!(f, "fwd{{{at}}}({src})"),
            Term::Let { at, var, ty, def_ty, def, body } => {
                write!(f, "let{{{at}}} {var} : {ty} = {def}")?;
                if let Some(d) = def_ty {
                    write!(f, " :: {d}")?;
                }
                write!(f, "; {body}")
            }
            Term::SendClose { tp } => write!(f, "send{tp}()"),
            Term::RecvClose { at, subj, body } => write!(f, "recv{{{at}}} {subj}(); {body}"),
            Term::RecvChan { tp, var, body } => write!(f, "recv{tp}({var} => {body})"),
            Term::SendChan { at, subj, arg, body } => write!(f, "send{{{at}}} {subj}({arg}); {body}"),
            Term::SendChanR { tp, arg, body } => write!(f, "send{tp}({arg}); {body}"),
            Term::RecvChanR { at, subj, var, body } => write!(f, "recv{{{at}}} {subj}({var} => {body})"),
            Term::RecvSel { tp, left, right } => write!(f, "case{tp}(pi1 => {left} | pi2 => {right})"),
            Term::SendSel { at, subj, sel, body } => write!(f, "{subj}.select{{{at}}}({}); {body}", sel_name(*sel)),
            Term::SendSelR { tp, sel, body } => write!(f, "select{tp}({}); {body}", sel_name(*sel)),
            Term::RecvSelR { at, subj, left, right } => {
                write!(f, "case{{{at}}} {subj}(pi1 => {left} | pi2 => {right})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ident, Cmp, Pred};

    fn var(s: &str) -> Sym {
        Sym::Var(ident(s))
    }

    fn t(k: u64) -> TExpr {
        TExpr::lit(k)
    }

    fn close3() -> Term {
        Term::SendClose { tp: TPred::new("t", Pred::atom(TExpr::var(&ident("t")), Cmp::Eq, t(3))) }
    }

    fn sub(pairs: &[(&str, &str)]) -> Subst {
        pairs.iter().map(|(x, c)| (ident(x), Channel::new(c))).collect()
    }

    #[test]
    fn fwd_and_close() {
        let m = Term::Fwd { at: t(1), src: var("x") };
        assert_eq!(m.subst(&sub(&[("x", "b")])), Term::Fwd { at: t(1), src: Sym::Chan(Channel::new("b")) });
        assert_eq!(close3().subst(&sub(&[("x", "b")])), close3());
    }

    #[test]
    fn binders_shadow() {
        // recv{T} x(y => fwd(y)) with y in σ: y is rebound, x is not
        let m = Term::RecvChanR { at: t(1), subj: var("x"), var: ident("y"), body: bx(Term::SendSel {
            at: t(2),
            subj: var("x"),
            sel: Sel::P1,
            body: bx(Term::Fwd { at: t(2), src: var("y") }),
        }) };
        let s = sub(&[("x", "a"), ("y", "b")]);
        let out = m.subst(&s);
        assert!(out.free_vars().is_empty());
        assert_eq!(out.channels(), [Channel::new("a")].into_iter().collect());
        let l = Term::Let { at: t(0), var: ident("x"), ty: SessionType::one(TPred::new("t", Pred::True)), def_ty: None, def: bx(Term::Fwd { at: t(0), src: var("x") }), body: bx(Term::Fwd { at: t(0), src: var("x") }) };
        let Term::Let { def, body, .. } = l.subst(&s) else { panic!() };
        assert_eq!(def.free_vars(), BTreeSet::new());
        assert_eq!(body.free_vars(), [ident("x")].into_iter().collect());
    }

    #[test]
    fn time_substitution_respects_binders() {
        let v = ident("u");
        let body = Term::SendSelR { tp: TPred::new("t", Pred::le(TExpr::var(&v), TExpr::var(&ident("t")))), sel: Sel::P2, body: bx(close3()) };
        let m = body.subst_time(&v, &TExpr::var(&ident("t")));
        let Term::SendSelR { tp, .. } = &m else { panic!() };
        assert_ne!(tp.binder, ident("t"));
        assert_eq!(tp.pred, Pred::le(TExpr::var(&ident("t")), TExpr::var(&tp.binder)));
        // shadowed
        let n = body.subst_time(&ident("t"), &t(9));
        assert_eq!(n, body);
    }

    #[test]
    fn renders_concrete_syntax() {
        let m = Term::RecvClose { at: TExpr::var(&ident("t1")).plus(2), subj: var("x"), body: bx(close3()) };
        assert_eq!(m.to_string(), "recv{t1 + 2} x(); send{t | t == 3}()");
        let s = Term::SendSel { at: t(4), subj: Sym::Chan(Channel::fresh(2)), sel: Sel::P2, body: bx(close3()) };
        assert_eq!(s.to_string(), "'#2.select{4}(pi2); send{t | t == 3}()");
    }
}
