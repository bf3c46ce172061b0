//! Timed session types, temporal predicates over a difference-logic
//! fragment, formation, entailment, and retyping.

mod entail;
mod retype;

pub use entail::{entails, find_model, satisfiable, HypSet, Obligation, Valuation};
pub use retype::{retype_cut, retype_fwd, RetypeError};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub type Ident = Arc<str>;

pub fn ident(s: &str) -> Ident {
    Arc::from(s)
}

/// `var + k`, `k`, or `var`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TExpr {
    pub var: Option<Ident>,
    pub k: u64,
}

impl TExpr {
    pub fn lit(k: u64) -> Self {
        TExpr { var: None, k }
    }

    pub fn var(v: &Ident) -> Self {
        TExpr { var: Some(v.clone()), k: 0 }
    }

    pub fn plus(&self, k: u64) -> Self {
        TExpr { var: self.var.clone(), k: self.k + k }
    }

    pub fn as_lit(&self) -> Option<u64> {
        match self.var {
            None => Some(self.k),
            Some(_) => None,
        }
    }

    pub fn subst(&self, v: &Ident, e: &TExpr) -> TExpr {
        match &self.var {
            Some(x) if x == v => e.plus(self.k),
            _ => self.clone(),
        }
    }

    pub fn eval(&self, val: &dyn Fn(&Ident) -> Option<u64>) -> Option<u64> {
        match &self.var {
            None => Some(self.k),
            Some(x) => val(x).map(|n| n + self.k),
        }
    }
}

impl fmt::Display for TExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.var, self.k) {
            (None, k) => write!(f, "{k}"),
            (Some(v), 0) => write!(f, "{v}"),
            (Some(v), k) => write!(f, "{v} + {k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "==",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    True,
    False,
    Atom(TExpr, Cmp, TExpr),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

impl Pred {
    pub fn atom(a: TExpr, c: Cmp, b: TExpr) -> Pred {
        Pred::Atom(a, c, b)
    }

    pub fn le(a: TExpr, b: TExpr) -> Pred {
        Pred::Atom(a, Cmp::Le, b)
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Pred) -> Pred {
        Pred::Not(Box::new(a))
    }

    pub fn conj(ps: impl IntoIterator<Item = Pred>) -> Pred {
        ps.into_iter().reduce(Pred::and).unwrap_or(Pred::True)
    }

    pub fn vars(&self) -> BTreeSet<Ident> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    fn collect_vars(&self, s: &mut BTreeSet<Ident>) {
        match self {
            Pred::True | Pred::False => {}
            Pred::Atom(a, _, b) => {
                s.extend(a.var.iter().cloned());
                s.extend(b.var.iter().cloned());
            }
            Pred::And(a, b) | Pred::Or(a, b) => {
                a.collect_vars(s);
                b.collect_vars(s);
            }
            Pred::Not(a) => a.collect_vars(s),
        }
    }

    pub fn subst(&self, v: &Ident, e: &TExpr) -> Pred {
        match self {
            Pred::True | Pred::False => self.clone(),
            Pred::Atom(a, c, b) => Pred::Atom(a.subst(v, e), *c, b.subst(v, e)),
            Pred::And(a, b) => Pred::and(a.subst(v, e), b.subst(v, e)),
            Pred::Or(a, b) => Pred::or(a.subst(v, e), b.subst(v, e)),
            Pred::Not(a) => Pred::not(a.subst(v, e)),
        }
    }

    /// Truth value under a valuation; `None` if a variable is unassigned.
    pub fn eval(&self, val: &dyn Fn(&Ident) -> Option<u64>) -> Option<bool> {
        Some(match self {
            Pred::True => true,
            Pred::False => false,
            Pred::Atom(a, c, b) => {
                let (x, y) = (a.eval(val)?, b.eval(val)?);
                match c {
                    Cmp::Le => x <= y,
                    Cmp::Lt => x < y,
                    Cmp::Eq => x == y,
                }
            }
            Pred::And(a, b) => a.eval(val)? && b.eval(val)?,
            Pred::Or(a, b) => a.eval(val)? || b.eval(val)?,
            Pred::Not(a) => !a.eval(val)?,
        })
    }

    /// Value of a predicate whose only free variable is `v`, at `v = t`.
    pub fn holds_at(&self, v: &Ident, t: u64) -> Option<bool> {
        self.eval(&|x| (x == v).then_some(t))
    }

    fn prec(&self) -> u8 {
        match self {
            Pred::Or(..) => 0,
            Pred::And(..) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, p: &Pred, min: u8| {
            if p.prec() < min {
                write!(f, "({p})")
            } else {
                write!(f, "{p}")
            }
        };
        match self {
            Pred::True => f.write_str("true"),
            Pred::False => f.write_str("false"),
            Pred::Atom(a, c, b) => write!(f, "{a} {c} {b}"),
            Pred::And(a, b) => {
                paren(f, a, 2)?;
                f.write_str(" && ")?;
                paren(f, b, 1)
            }
            Pred::Or(a, b) => {
                paren(f, a, 1)?;
                f.write_str(" || ")?;
                paren(f, b, 0)
            }
            Pred::Not(a) => match **a {
                Pred::True | Pred::False | Pred::Not(_) => write!(f, "!{a}"),
                _ => write!(f, "!({a})"),
            },
        }
    }
}

/// A binder with its predicate, `t.p`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TPred {
    pub binder: Ident,
    pub pred: Pred,
}

impl TPred {
    pub fn new(binder: &str, pred: Pred) -> Self {
        TPred { binder: ident(binder), pred }
    }

    /// `p[e/t]`.
    pub fn at(&self, e: &TExpr) -> Pred {
        self.pred.subst(&self.binder, e)
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut s = self.pred.vars();
        s.remove(&self.binder);
        s
    }

    /// Equal up to renaming the binder.
    pub fn alpha_eq(&self, other: &TPred) -> bool {
        if self.binder == other.binder {
            return self.pred == other.pred;
        }
        let mut avoid = self.pred.vars();
        avoid.extend(other.pred.vars());
        let v = fresh_ident("t", &avoid);
        self.at(&TExpr::var(&v)) == other.at(&TExpr::var(&v))
    }
}

impl TPred {
    /// First instants `>= since` of the maximal runs of time on which this
    /// closed predicate holds.
    pub fn onsets_from(&self, since: u64) -> Vec<u64> {
        let holds = |c: u64| self.pred.holds_at(&self.binder, c) == Some(true);
        let mut cands: BTreeSet<u64> = [since].into_iter().collect();
        collect_breaks(&self.pred, &mut cands);
        cands.into_iter().filter(|&c| c >= since && holds(c) && (c == since || !holds(c - 1))).collect()
    }
}

fn collect_breaks(p: &Pred, out: &mut BTreeSet<u64>) {
    match p {
        Pred::Atom(a, _, b) => {
            for d in [b.k as i128 - a.k as i128, a.k as i128 - b.k as i128] {
                for e in [d, d + 1] {
                    if e >= 0 {
                        out.insert(e as u64);
                    }
                }
            }
        }
        Pred::And(a, b) | Pred::Or(a, b) => {
            collect_breaks(a, out);
            collect_breaks(b, out);
        }
        Pred::Not(a) => collect_breaks(a, out),
        Pred::True | Pred::False => {}
    }
}

impl fmt::Display for TPred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{} | {}}}", self.binder, self.pred)
    }
}

/// A name based on `base` not in `avoid`.
pub fn fresh_ident(base: &str, avoid: &BTreeSet<Ident>) -> Ident {
    let stem = base.split('_').next().unwrap_or(base);
    if !avoid.contains(base) {
        return ident(base);
    }
    (1..).map(|k| ident(&format!("{stem}_{k}"))).find(|v| !avoid.contains(v)).expect("unbounded supply")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Conn {
    Lolli,
    Tensor,
    With,
    Plus,
}

impl Conn {
    pub fn symbol(self) -> &'static str {
        match self {
            Conn::Lolli => "-o",
            Conn::Tensor => "*",
            Conn::With => "&",
            Conn::Plus => "+",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SessionType {
    One(TPred),
    Bin(Conn, Box<SessionType>, Box<SessionType>, TPred),
}

impl SessionType {
    pub fn one(tp: TPred) -> Self {
        SessionType::One(tp)
    }

    pub fn bin(c: Conn, a: SessionType, b: SessionType, tp: TPred) -> Self {
        SessionType::Bin(c, Box::new(a), Box::new(b), tp)
    }

    pub fn tpred(&self) -> &TPred {
        match self {
            SessionType::One(tp) | SessionType::Bin(_, _, _, tp) => tp,
        }
    }

    pub fn conn_name(&self) -> &'static str {
        match self {
            SessionType::One(_) => "1",
            SessionType::Bin(c, ..) => c.symbol(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SessionType::One(_) => 1,
            SessionType::Bin(_, a, b, _) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        match self {
            SessionType::One(tp) => tp.free_vars(),
            SessionType::Bin(_, a, b, tp) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s.remove(&tp.binder);
                s.extend(tp.free_vars());
                s
            }
        }
    }

    /// Every variable mentioned, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Ident> {
        match self {
            SessionType::One(tp) => {
                let mut s = tp.pred.vars();
                s.insert(tp.binder.clone());
                s
            }
            SessionType::Bin(_, a, b, tp) => {
                let mut s = a.all_vars();
                s.extend(b.all_vars());
                s.extend(tp.pred.vars());
                s.insert(tp.binder.clone());
                s
            }
        }
    }

    /// Capture-avoiding `A[e/v]`.
    pub fn subst(&self, v: &Ident, e: &TExpr) -> SessionType {
        let tp = self.tpred();
        if &tp.binder == v {
            return self.clone();
        }
        let (binder, renamed) = match &e.var {
            Some(x) if *x == tp.binder => {
                let mut avoid = self.all_vars();
                avoid.insert(v.clone());
                let b = fresh_ident(&tp.binder, &avoid);
                (b.clone(), Some(b))
            }
            _ => (tp.binder.clone(), None),
        };
        let rebind = |p: &Pred| match &renamed {
            Some(b) => p.subst(&tp.binder, &TExpr::var(b)),
            None => p.clone(),
        };
        let rebind_ty = |a: &SessionType| match &renamed {
            Some(b) => a.subst(&tp.binder, &TExpr::var(b)),
            None => a.clone(),
        };
        let tp2 = TPred { binder, pred: rebind(&tp.pred).subst(v, e) };
        match self {
            SessionType::One(_) => SessionType::One(tp2),
            SessionType::Bin(c, a, b, _) => {
                SessionType::bin(*c, rebind_ty(a).subst(v, e), rebind_ty(b).subst(v, e), tp2)
            }
        }
    }

    /// Renames the top binder to `v`, adjusting the predicate and components.
    pub fn with_binder(&self, v: &Ident) -> SessionType {
        let tp = self.tpred();
        if &tp.binder == v {
            return self.clone();
        }
        let e = TExpr::var(v);
        let tp2 = TPred { binder: v.clone(), pred: tp.at(&e) };
        match self {
            SessionType::One(_) => SessionType::One(tp2),
            SessionType::Bin(c, a, b, _) => {
                SessionType::bin(*c, a.subst(&tp.binder, &e), b.subst(&tp.binder, &e), tp2)
            }
        }
    }

    /// Components with the top binder replaced by `e`.
    pub fn parts_at(&self, e: &TExpr) -> Option<(SessionType, SessionType)> {
        match self {
            SessionType::One(_) => None,
            SessionType::Bin(_, a, b, tp) => Some((a.subst(&tp.binder, e), b.subst(&tp.binder, e))),
        }
    }

    fn is_bin(&self) -> bool {
        matches!(self, SessionType::Bin(..))
    }
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionType::One(tp) => write!(f, "1{tp}"),
            SessionType::Bin(c, a, b, tp) => {
                if a.is_bin() {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {}{} {}", c.symbol(), tp, b)
            }
        }
    }
}

/// `G ⊢ A type`: every predicate is scoped in `G` plus the enclosing binders.
pub fn check_formation(gctx: &BTreeSet<Ident>, a: &SessionType) -> bool {
    formation_error(gctx, a).is_none()
}

pub fn formation_error(gctx: &BTreeSet<Ident>, a: &SessionType) -> Option<String> {
    let tp = a.tpred();
    let mut inner = gctx.clone();
    inner.insert(tp.binder.clone());
    if let Some(v) = tp.pred.vars().into_iter().find(|v| !inner.contains(v)) {
        return Some(format!("time variable `{v}` is not in scope in {a}"));
    }
    match a {
        SessionType::One(_) => None,
        SessionType::Bin(_, x, y, _) => formation_error(&inner, x).or_else(|| formation_error(&inner, y)),
    }
}

/// The top-level predicate with the binder replaced by `t`.
pub fn prop_of(a: &SessionType, t: &TExpr) -> Pred {
    a.tpred().at(t)
}
