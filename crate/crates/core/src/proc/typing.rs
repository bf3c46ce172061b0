//! The linear sequent-calculus type checker and an independent validator
//! for its derivations.

use super::term::{Sym, Term};
use crate::lts::Sel;
use crate::types::{
    formation_error, fresh_ident, retype_cut, retype_fwd, Conn, HypSet, Ident, Obligation, Pred, RetypeError,
    SessionType, TExpr, TPred,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Ctx = BTreeMap<Ident, SessionType>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Cut,
    Fwd,
    OneRight,
    OneLeft,
    LolliRight,
    LolliLeft,
    TensorRight,
    TensorLeft,
    WithRight,
    WithLeft,
    PlusRight,
    PlusLeft,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::Cut,
        Rule::Fwd,
        Rule::OneRight,
        Rule::OneLeft,
        Rule::LolliRight,
        Rule::LolliLeft,
        Rule::TensorRight,
        Rule::TensorLeft,
        Rule::WithRight,
        Rule::WithLeft,
        Rule::PlusRight,
        Rule::PlusLeft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Cut => "Cut",
            Rule::Fwd => "Fwd",
            Rule::OneRight => "1-Right",
            Rule::OneLeft => "1-Left",
            Rule::LolliRight => "-o-Right",
            Rule::LolliLeft => "-o-Left",
            Rule::TensorRight => "*-Right",
            Rule::TensorLeft => "*-Left",
            Rule::WithRight => "&-Right",
            Rule::WithLeft => "&-Left",
            Rule::PlusRight => "+-Right",
            Rule::PlusLeft => "+-Left",
        }
    }

    /// The rule whose conclusion has this term head.
    pub fn of(term: &Term) -> Rule {
        match term {
            Term::Fwd { .. } => Rule::Fwd,
            Term::Let { .. } => Rule::Cut,
            Term::SendClose { .. } => Rule::OneRight,
            Term::RecvClose { .. } => Rule::OneLeft,
            Term::RecvChan { .. } => Rule::LolliRight,
            Term::SendChan { .. } => Rule::LolliLeft,
            Term::SendChanR { .. } => Rule::TensorRight,
            Term::RecvChanR { .. } => Rule::TensorLeft,
            Term::RecvSel { .. } => Rule::WithRight,
            Term::SendSel { .. } => Rule::WithLeft,
            Term::SendSelR { .. } => Rule::PlusRight,
            Term::RecvSelR { .. } => Rule::PlusLeft,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `G; F | Γ ⊢ M @ T :: A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub hyps: HypSet,
    pub ctx: Ctx,
    pub term: Term,
    pub time: TExpr,
    pub ty: SessionType,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx: Vec<String> = self.ctx.iter().map(|(x, a)| format!("{x} : {a}")).collect();
        write!(f, "{} | {} |- {} @ {} :: {}", self.hyps, ctx.join(", "), self.term, self.time, self.ty)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub judgment: Judgment,
    /// The time variable introduced by a right rule.
    pub binder: Option<Ident>,
    pub obligations: Vec<Obligation>,
    /// Obligations of the retyping premise of `Cut` and `Fwd`.
    pub retyping: Option<Vec<Obligation>>,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    /// Rules used anywhere in the tree.
    pub fn rules(&self) -> BTreeSet<Rule> {
        let mut s = BTreeSet::new();
        self.walk(&mut |d| {
            s.insert(d.rule);
        });
        s
    }

    pub fn walk(&self, f: &mut dyn FnMut(&Derivation)) {
        f(self);
        for p in &self.premises {
            p.walk(f);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    /// Indented rendering, one judgment per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_into(0, &mut out);
        out
    }

    fn dump_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        out.push_str(&format!("{pad}[{}] {}\n", self.rule, self.judgment));
        for o in self.obligations.iter().chain(self.retyping.iter().flatten()) {
            out.push_str(&format!("{pad}    by {o}\n"));
        }
        for p in &self.premises {
            p.dump_into(depth + 1, out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("linearity: {0}")]
    Linearity(String),
    #[error("shape: {0}")]
    Shape(String),
    #[error("{rule}: obligation fails: {obligation}")]
    Entail { rule: Rule, obligation: Obligation },
    #[error("{rule}: {error}")]
    Retype { rule: Rule, error: RetypeError },
    #[error("scope: {0}")]
    Scope(String),
}

/// A type error with the chain of rule instances leading to it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{error}")]
pub struct CheckError {
    pub error: TypeError,
    pub trail: Vec<String>,
}

impl CheckError {
    fn new(error: TypeError) -> Self {
        CheckError { error, trail: vec![] }
    }

    /// The trail followed by the error, one item per line.
    pub fn report(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.trail.iter().enumerate() {
            s.push_str(&format!("{}in {t}\n", "  ".repeat(i)));
        }
        s.push_str(&format!("{}{}", "  ".repeat(self.trail.len()), self.error));
        s
    }
}

impl From<TypeError> for CheckError {
    fn from(e: TypeError) -> Self {
        CheckError::new(e)
    }
}

/// Checks `G; F | Γ ⊢ M @ T :: A`.
pub fn typecheck(h: &HypSet, ctx: &Ctx, term: &Term, time: &TExpr, ty: &SessionType) -> Result<Derivation, CheckError> {
    if let Some(e) = formation_error(&h.gvars, ty) {
        return Err(TypeError::Scope(e).into());
    }
    for (x, a) in ctx {
        if let Some(e) = formation_error(&h.gvars, a) {
            return Err(TypeError::Scope(format!("binding {x}: {e}")).into());
        }
    }
    if let Some(v) = time.var.as_ref().filter(|v| !h.gvars.contains(*v)) {
        return Err(TypeError::Scope(format!("time variable `{v}` is not in scope")).into());
    }
    for p in &h.hyps {
        if let Some(v) = p.vars().into_iter().find(|v| !h.gvars.contains(v)) {
            return Err(TypeError::Scope(format!("hypothesis {p} mentions `{v}` outside G")).into());
        }
    }
    if let Some(x) = term.free_vars().into_iter().find(|x| !ctx.contains_key(x)) {
        return Err(TypeError::Linearity(format!("`{x}` is free in the term but not bound in the context")).into());
    }
    check(Judgment { hyps: h.clone(), ctx: ctx.clone(), term: term.clone(), time: time.clone(), ty: ty.clone() })
}

fn shape(s: String) -> CheckError {
    TypeError::Shape(s).into()
}

fn linear(s: String) -> CheckError {
    TypeError::Linearity(s).into()
}

fn discharge(rule: Rule, hyps: &HypSet, goal: Pred, out: &mut Vec<Obligation>) -> Result<(), CheckError> {
    let ob = Obligation::new(hyps, goal);
    if !ob.holds() {
        return Err(TypeError::Entail { rule, obligation: ob }.into());
    }
    out.push(ob);
    Ok(())
}

fn subject(rule: Rule, s: &Sym, ctx: &Ctx) -> Result<(Ident, SessionType), CheckError> {
    match s {
        Sym::Var(x) => match ctx.get(x) {
            Some(a) => Ok((x.clone(), a.clone())),
            None => Err(linear(format!("{rule}: `{x}` is not available (unbound or already consumed)"))),
        },
        Sym::Chan(c) => Err(shape(format!("{rule}: subject is the channel '{c}, expected a variable"))),
    }
}

fn scoped_time(h: &HypSet, e: &TExpr) -> Result<(), CheckError> {
    match &e.var {
        Some(v) if !h.gvars.contains(v) => Err(TypeError::Scope(format!("time variable `{v}` is not in scope")).into()),
        _ => Ok(()),
    }
}

/// Splits `ctx` into the bindings `m` uses and the rest.
fn split(ctx: &Ctx, m: &Term, other: &BTreeSet<Ident>) -> Result<(Ctx, Ctx), CheckError> {
    let used = m.free_vars();
    if let Some(x) = used.intersection(other).next() {
        return Err(linear(format!("`{x}` is used by both sides of a split")));
    }
    let mut left = Ctx::new();
    let mut right = ctx.clone();
    for x in used {
        match right.remove(&x) {
            Some(a) => {
                left.insert(x, a);
            }
            None => return Err(linear(format!("`{x}` is not available (unbound or already consumed)"))),
        }
    }
    Ok((left, right))
}

fn bind(ctx: &Ctx, x: &Ident, a: SessionType) -> Result<Ctx, CheckError> {
    if ctx.contains_key(x) {
        return Err(linear(format!("`{x}` is rebound while still in use")));
    }
    let mut c = ctx.clone();
    c.insert(x.clone(), a);
    Ok(c)
}

fn conn_of(rule: Rule) -> Option<Conn> {
    match rule {
        Rule::LolliRight | Rule::LolliLeft => Some(Conn::Lolli),
        Rule::TensorRight | Rule::TensorLeft => Some(Conn::Tensor),
        Rule::WithRight | Rule::WithLeft => Some(Conn::With),
        Rule::PlusRight | Rule::PlusLeft => Some(Conn::Plus),
        _ => None,
    }
}

fn head_matches(rule: Rule, a: &SessionType) -> bool {
    match a {
        SessionType::One(_) => matches!(rule, Rule::OneRight | Rule::OneLeft),
        SessionType::Bin(c, ..) => conn_of(rule) == Some(*c),
    }
}

/// Everything a fresh right-rule binder must avoid.
fn binder_avoid(j: &Judgment) -> BTreeSet<Ident> {
    let mut avoid = j.hyps.gvars.clone();
    for p in &j.hyps.hyps {
        avoid.extend(p.vars());
    }
    avoid.extend(j.time.var.iter().cloned());
    for a in j.ctx.values() {
        avoid.extend(a.free_vars());
    }
    avoid.extend(j.ty.free_vars());
    avoid
}

struct RightSetup {
    v: Ident,
    /// `G, v; F, p[v]`.
    hp: HypSet,
    /// `G, v; F, p[v], T <= v`, for the premises.
    inner: HypSet,
    parts: Option<(SessionType, SessionType)>,
    tp: TPred,
}

/// Obligations making a term predicate interchangeable with the type's
/// under `G, v; F`. Empty when the two agree syntactically.
fn agreement(h: &HypSet, v: &Ident, term: &TPred, ty: &TPred) -> Vec<(HypSet, Pred)> {
    let ve = TExpr::var(v);
    let (pm, pa) = (term.at(&ve), ty.at(&ve));
    if pm == pa {
        return vec![];
    }
    let hv = h.with_var(v);
    vec![(hv.with_hyp(pm.clone()), pa.clone()), (hv.with_hyp(pa), pm)]
}

fn right_setup(rule: Rule, j: &Judgment, tp: &TPred, v: &Ident, out: &mut Vec<Obligation>) -> Result<RightSetup, CheckError> {
    if !head_matches(rule, &j.ty) {
        return Err(shape(format!("{rule}: term does not match type {}", j.ty)));
    }
    for (hyps, goal) in agreement(&j.hyps, v, tp, j.ty.tpred()) {
        discharge(rule, &hyps, goal, out)?;
    }
    let ve = TExpr::var(v);
    let p = j.ty.tpred().at(&ve);
    let hp = j.hyps.with_var(v).with_hyp(p);
    let inner = hp.with_hyp(Pred::le(j.time.clone(), ve.clone()));
    Ok(RightSetup { v: v.clone(), hp, inner, parts: j.ty.parts_at(&ve), tp: tp.clone() })
}

fn choose_binder(j: &Judgment, tp: &TPred) -> Ident {
    let mut avoid = binder_avoid(j);
    if !avoid.contains(&tp.binder) {
        return tp.binder.clone();
    }
    avoid.extend(j.term.time_vars());
    fresh_ident(&tp.binder, &avoid)
}

fn left_obligations(rule: Rule, j: &Judgment, at: &TExpr, tp: &TPred, out: &mut Vec<Obligation>) -> Result<(), CheckError> {
    discharge(rule, &j.hyps, Pred::le(j.time.clone(), at.clone()), out)?;
    discharge(rule, &j.hyps, tp.at(at), out)
}

fn sub(hyps: &HypSet, ctx: Ctx, term: &Term, time: &TExpr, ty: &SessionType) -> Judgment {
    Judgment { hyps: hyps.clone(), ctx, term: term.clone(), time: time.clone(), ty: ty.clone() }
}

fn check(j: Judgment) -> Result<Derivation, CheckError> {
    let rule = Rule::of(&j.term);
    let label = format!("{rule} at {}", head_text(&j.term));
    check_node(rule, j).map_err(|mut e| {
        e.trail.insert(0, label);
        e
    })
}

fn head_text(t: &Term) -> String {
    let s = t.to_string();
    let cut = s.find(';').map(|i| i + 1).unwrap_or(s.len()).min(60);
    let mut end = cut;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    if end < s.len() {
        format!("{} ...", &s[..end])
    } else {
        s
    }
}

fn check_node(rule: Rule, j: Judgment) -> Result<Derivation, CheckError> {
    let mut obligations = Vec::new();
    let mut retyping = None;
    let mut binder = None;
    let mut premises: Vec<Judgment> = Vec::new();
    let h = &j.hyps;
    match &j.term {
        Term::Fwd { at, src } => {
            if *at != j.time {
                return Err(shape(format!("Fwd: annotation {at} differs from the current time {}", j.time)));
            }
            let (x, a) = subject(rule, src, &j.ctx)?;
            if let Some(y) = j.ctx.keys().find(|y| **y != x) {
                return Err(linear(format!("Fwd: binding `{y}` is never used")));
            }
            let obs = retype_fwd(h, &a, &j.ty, &j.time).map_err(|error| TypeError::Retype { rule, error })?;
            retyping = Some(obs);
        }
        Term::Let { at, var, ty, def_ty, def, body } => {
            if *at != j.time {
                return Err(shape(format!("Cut: annotation {at} differs from the current time {}", j.time)));
            }
            for a in std::iter::once(ty).chain(def_ty) {
                if let Some(e) = formation_error(&h.gvars, a) {
                    return Err(TypeError::Scope(e).into());
                }
            }
            let provided = def_ty.as_ref().unwrap_or(ty);
            let mut other = body.free_vars();
            other.remove(var);
            let (g1, g2) = split(&j.ctx, def, &other)?;
            let g2 = bind(&g2, var, ty.clone())?;
            let obs = retype_cut(h, provided, ty, &j.time).map_err(|error| TypeError::Retype { rule, error })?;
            retyping = Some(obs);
            premises.push(sub(h, g1, def, &j.time, provided));
            premises.push(sub(h, g2, body, &j.time, &j.ty));
        }
        Term::SendClose { tp } => {
            let v = choose_binder(&j, tp);
            let rs = right_setup(rule, &j, tp, &v, &mut obligations)?;
            if let Some(y) = j.ctx.keys().next() {
                return Err(linear(format!("1-Right: binding `{y}` is never used")));
            }
            discharge(rule, &rs.hp, Pred::le(j.time.clone(), TExpr::var(&v)), &mut obligations)?;
            binder = Some(v);
        }
        Term::RecvClose { at, subj, body } => {
            scoped_time(h, at)?;
            let (x, a) = subject(rule, subj, &j.ctx)?;
            let SessionType::One(tp) = &a else {
                return Err(shape(format!("1-Left: `{x}` has type {a}")));
            };
            left_obligations(rule, &j, at, tp, &mut obligations)?;
            let mut ctx = j.ctx.clone();
            ctx.remove(&x);
            premises.push(sub(h, ctx, body, at, &j.ty));
        }
        Term::RecvChan { tp, .. } | Term::SendChanR { tp, .. } | Term::RecvSel { tp, .. } | Term::SendSelR { tp, .. } => {
            let v = choose_binder(&j, tp);
            let rs = right_setup(rule, &j, tp, &v, &mut obligations)?;
            discharge(rule, &rs.hp, Pred::le(j.time.clone(), TExpr::var(&v)), &mut obligations)?;
            premises = right_premises(rule, &j, &rs)?;
            binder = Some(v);
        }
        Term::SendChan { at, subj, arg, body } => {
            scoped_time(h, at)?;
            let (x, a) = subject(rule, subj, &j.ctx)?;
            let (tp, a1, a2) = left_parts(rule, &x, &a, at)?;
            left_obligations(rule, &j, at, &tp, &mut obligations)?;
            let mut rest = j.ctx.clone();
            rest.remove(&x);
            if arg.free_vars().contains(&x) {
                return Err(linear(format!("-o-Left: `{x}` is used inside the channel it sends")));
            }
            let mut other = body.free_vars();
            other.remove(&x);
            let (g1, g2) = split(&rest, arg, &other)?;
            let g2 = bind(&g2, &x, a2)?;
            premises.push(sub(h, g1, arg, at, &a1));
            premises.push(sub(h, g2, body, at, &j.ty));
        }
        Term::RecvChanR { at, subj, var, body } => {
            scoped_time(h, at)?;
            let (x, a) = subject(rule, subj, &j.ctx)?;
            let (tp, a1, a2) = left_parts(rule, &x, &a, at)?;
            left_obligations(rule, &j, at, &tp, &mut obligations)?;
            if *var == x {
                return Err(linear(format!("*-Left: received channel reuses the name `{x}`")));
            }
            let mut ctx = j.ctx.clone();
            ctx.remove(&x);
            let ctx = bind(&bind(&ctx, var, a1)?, &x, a2)?;
            premises.push(sub(h, ctx, body, at, &j.ty));
        }
        Term::SendSel { at, subj, sel, body } => {
            scoped_time(h, at)?;
            let (x, a) = subject(rule, subj, &j.ctx)?;
            let (tp, a1, a2) = left_parts(rule, &x, &a, at)?;
            left_obligations(rule, &j, at, &tp, &mut obligations)?;
            let mut ctx = j.ctx.clone();
            ctx.insert(x, if *sel == Sel::P1 { a1 } else { a2 });
            premises.push(sub(h, ctx, body, at, &j.ty));
        }
        Term::RecvSelR { at, subj, left, right } => {
            scoped_time(h, at)?;
            let (x, a) = subject(rule, subj, &j.ctx)?;
            let (tp, a1, a2) = left_parts(rule, &x, &a, at)?;
            left_obligations(rule, &j, at, &tp, &mut obligations)?;
            for (m, ai) in [(left, a1), (right, a2)] {
                let mut ctx = j.ctx.clone();
                ctx.insert(x.clone(), ai);
                premises.push(sub(h, ctx, m, at, &j.ty));
            }
        }
    }
    let premises = premises.into_iter().map(check).collect::<Result<Vec<_>, _>>()?;
    Ok(Derivation { rule, judgment: j, binder, obligations, retyping, premises })
}

/// The principal type of a left rule, checked against the rule and split at
/// `at`.
fn left_parts(rule: Rule, x: &Ident, a: &SessionType, at: &TExpr) -> Result<(TPred, SessionType, SessionType), CheckError> {
    if !head_matches(rule, a) {
        return Err(shape(format!("{rule}: `{x}` has type {a}")));
    }
    let (a1, a2) = a.parts_at(at).expect("binary");
    Ok((a.tpred().clone(), a1, a2))
}

/// Premises of a right rule, given the chosen binder.
fn right_premises(rule: Rule, j: &Judgment, rs: &RightSetup) -> Result<Vec<Judgment>, CheckError> {
    let ve = TExpr::var(&rs.v);
    let cont = |m: &Term| m.subst_time(&rs.tp.binder, &ve);
    let (a1, a2) = rs.parts.clone().expect("binary type");
    let mut out = Vec::new();
    match &j.term {
        Term::RecvChan { var, body, .. } => {
            let ctx = bind(&j.ctx, var, a1)?;
            out.push(sub(&rs.inner, ctx, &cont(body), &ve, &a2));
        }
        Term::SendChanR { arg, body, .. } => {
            let (arg, body) = (cont(arg), cont(body));
            let (g1, g2) = split(&j.ctx, &arg, &body.free_vars())?;
            out.push(sub(&rs.inner, g1, &arg, &ve, &a1));
            out.push(sub(&rs.inner, g2, &body, &ve, &a2));
        }
        Term::RecvSel { left, right, .. } => {
            out.push(sub(&rs.inner, j.ctx.clone(), &cont(left), &ve, &a1));
            out.push(sub(&rs.inner, j.ctx.clone(), &cont(right), &ve, &a2));
        }
        Term::SendSelR { sel, body, .. } => {
            let ai = if *sel == Sel::P1 { a1 } else { a2 };
            out.push(sub(&rs.inner, j.ctx.clone(), &cont(body), &ve, &ai));
        }
        _ => unreachable!("{rule} is not a binary right rule"),
    }
    Ok(out)
}

pub fn validate_derivation(d: &Derivation) -> bool {
    check_derivation(d).is_ok()
}

/// Re-checks every node against its rule schema. Context splits are taken
/// from the premises and only checked for being a partition.
pub fn check_derivation(d: &Derivation) -> Result<(), String> {
    check_schema(d).map_err(|e| format!("{} at {}: {e}", d.rule, head_text(&d.judgment.term)))?;
    for p in &d.premises {
        check_derivation(p)?;
    }
    Ok(())
}

fn ensure(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

fn premise_is(p: &Derivation, hyps: &HypSet, ctx: &Ctx, term: &Term, time: &TExpr, ty: &SessionType) -> Result<(), String> {
    let j = &p.judgment;
    ensure(j.hyps == *hyps, "premise hypotheses")?;
    ensure(j.ctx == *ctx, "premise context")?;
    ensure(j.term == *term, "premise term")?;
    ensure(j.time == *time, "premise time")?;
    ensure(j.ty == *ty, "premise type")
}

fn entailed(hyps: &HypSet, goal: Pred) -> Result<Obligation, String> {
    let ob = Obligation::new(hyps, goal);
    if ob.holds() {
        Ok(ob)
    } else {
        Err(format!("obligation does not hold: {ob}"))
    }
}

fn disjoint_union(a: &Ctx, b: &Ctx, whole: &Ctx) -> Result<(), String> {
    ensure(a.keys().all(|k| !b.contains_key(k)), "context split is not disjoint")?;
    let mut u = a.clone();
    u.extend(b.clone());
    ensure(u == *whole, "context split does not cover the context")
}

fn var_subject(s: &Sym, ctx: &Ctx) -> Result<(Ident, SessionType), String> {
    let x = s.var().ok_or("subject is not a variable")?;
    let a = ctx.get(x).ok_or("subject is not in the context")?;
    Ok((x.clone(), a.clone()))
}

fn check_schema(d: &Derivation) -> Result<(), String> {
    let j = &d.judgment;
    let h = &j.hyps;
    ensure(d.rule == Rule::of(&j.term), "rule does not match the term")?;
    let n = d.premises.len();
    let mut obs: Vec<Obligation> = Vec::new();
    let mut retype: Option<Vec<Obligation>> = None;
    match &j.term {
        Term::Fwd { at, src } => {
            ensure(*at == j.time && n == 0, "forward shape")?;
            let (x, a) = var_subject(src, &j.ctx)?;
            ensure(j.ctx.len() == 1 && j.ctx.contains_key(&x), "forward context must be exactly the forwarded variable")?;
            retype = Some(retype_fwd(h, &a, &j.ty, at).map_err(|e| e.to_string())?);
        }
        Term::Let { at, var, ty, def_ty, def, body } => {
            ensure(*at == j.time && n == 2, "cut shape")?;
            let provided = def_ty.as_ref().unwrap_or(ty);
            let (p1, p2) = (&d.premises[0], &d.premises[1]);
            let mut g2 = p2.judgment.ctx.clone();
            ensure(g2.remove(var).as_ref() == Some(ty), "cut variable binding")?;
            disjoint_union(&p1.judgment.ctx, &g2, &j.ctx)?;
            ensure(!j.ctx.contains_key(var), "cut variable shadows a live binding")?;
            premise_is(p1, h, &p1.judgment.ctx, def, at, provided)?;
            premise_is(p2, h, &p2.judgment.ctx, body, at, &j.ty)?;
            retype = Some(retype_cut(h, provided, ty, at).map_err(|e| e.to_string())?);
        }
        Term::SendClose { tp } => {
            ensure(n == 0 && j.ctx.is_empty(), "1-Right needs an empty context")?;
            let v = fresh_binder(d, j)?;
            ensure(matches!(j.ty, SessionType::One(_)), "type is not 1")?;
            let ve = TExpr::var(&v);
            for (hyps, goal) in agreement(h, &v, tp, j.ty.tpred()) {
                obs.push(entailed(&hyps, goal)?);
            }
            let hp = h.with_var(&v).with_hyp(j.ty.tpred().at(&ve));
            obs.push(entailed(&hp, Pred::le(j.time.clone(), ve))?);
        }
        Term::RecvChan { tp, .. } | Term::SendChanR { tp, .. } | Term::RecvSel { tp, .. } | Term::SendSelR { tp, .. } => {
            let v = fresh_binder(d, j)?;
            let ve = TExpr::var(&v);
            ensure(head_matches(d.rule, &j.ty), "type connective does not match the rule")?;
            for (hyps, goal) in agreement(h, &v, tp, j.ty.tpred()) {
                obs.push(entailed(&hyps, goal)?);
            }
            let hp = h.with_var(&v).with_hyp(j.ty.tpred().at(&ve));
            obs.push(entailed(&hp, Pred::le(j.time.clone(), ve.clone()))?);
            let inner = hp.with_hyp(Pred::le(j.time.clone(), ve.clone()));
            let (a1, a2) = j.ty.parts_at(&ve).ok_or("type is not binary")?;
            let cont = |m: &Term| m.subst_time(&tp.binder, &ve);
            match &j.term {
                Term::RecvChan { var, body, .. } => {
                    ensure(n == 1 && !j.ctx.contains_key(var), "-o-Right shape")?;
                    let mut ctx = j.ctx.clone();
                    ctx.insert(var.clone(), a1);
                    premise_is(&d.premises[0], &inner, &ctx, &cont(body), &ve, &a2)?;
                }
                Term::SendChanR { arg, body, .. } => {
                    ensure(n == 2, "*-Right shape")?;
                    let (c1, c2) = (&d.premises[0].judgment.ctx, &d.premises[1].judgment.ctx);
                    disjoint_union(c1, c2, &j.ctx)?;
                    premise_is(&d.premises[0], &inner, c1, &cont(arg), &ve, &a1)?;
                    premise_is(&d.premises[1], &inner, c2, &cont(body), &ve, &a2)?;
                }
                Term::RecvSel { left, right, .. } => {
                    ensure(n == 2, "&-Right shape")?;
                    premise_is(&d.premises[0], &inner, &j.ctx, &cont(left), &ve, &a1)?;
                    premise_is(&d.premises[1], &inner, &j.ctx, &cont(right), &ve, &a2)?;
                }
                Term::SendSelR { sel, body, .. } => {
                    ensure(n == 1, "+-Right shape")?;
                    let ai = if *sel == Sel::P1 { a1 } else { a2 };
                    premise_is(&d.premises[0], &inner, &j.ctx, &cont(body), &ve, &ai)?;
                }
                _ => unreachable!(),
            }
        }
        Term::RecvClose { at, subj, body } => {
            ensure(n == 1, "1-Left shape")?;
            let (x, a) = var_subject(subj, &j.ctx)?;
            let SessionType::One(tp) = &a else { return Err("subject type is not 1".into()) };
            obs.push(entailed(h, Pred::le(j.time.clone(), at.clone()))?);
            obs.push(entailed(h, tp.at(at))?);
            let mut ctx = j.ctx.clone();
            ctx.remove(&x);
            premise_is(&d.premises[0], h, &ctx, body, at, &j.ty)?;
        }
        Term::SendChan { at, subj, .. }
        | Term::RecvChanR { at, subj, .. }
        | Term::SendSel { at, subj, .. }
        | Term::RecvSelR { at, subj, .. } => {
            let (x, a) = var_subject(subj, &j.ctx)?;
            ensure(head_matches(d.rule, &a), "subject type does not match the rule")?;
            obs.push(entailed(h, Pred::le(j.time.clone(), at.clone()))?);
            obs.push(entailed(h, a.tpred().at(at))?);
            let (a1, a2) = a.parts_at(at).ok_or("subject type is not binary")?;
            let mut rest = j.ctx.clone();
            rest.remove(&x);
            let with = |c: &Ctx, k: &Ident, t: SessionType| {
                let mut c = c.clone();
                c.insert(k.clone(), t);
                c
            };
            match &j.term {
                Term::SendChan { arg, body, .. } => {
                    ensure(n == 2, "-o-Left shape")?;
                    let c1 = &d.premises[0].judgment.ctx;
                    let mut c2 = d.premises[1].judgment.ctx.clone();
                    ensure(c2.remove(&x).as_ref() == Some(&a2), "continuation binding of the subject")?;
                    disjoint_union(c1, &c2, &rest)?;
                    premise_is(&d.premises[0], h, c1, arg, at, &a1)?;
                    premise_is(&d.premises[1], h, &with(&c2, &x, a2), body, at, &j.ty)?;
                }
                Term::RecvChanR { var, body, .. } => {
                    ensure(n == 1 && *var != x && !rest.contains_key(var), "*-Left shape")?;
                    let ctx = with(&with(&rest, var, a1), &x, a2);
                    premise_is(&d.premises[0], h, &ctx, body, at, &j.ty)?;
                }
                Term::SendSel { sel, body, .. } => {
                    ensure(n == 1, "&-Left shape")?;
                    let ai = if *sel == Sel::P1 { a1 } else { a2 };
                    premise_is(&d.premises[0], h, &with(&rest, &x, ai), body, at, &j.ty)?;
                }
                Term::RecvSelR { left, right, .. } => {
                    ensure(n == 2, "+-Left shape")?;
                    premise_is(&d.premises[0], h, &with(&rest, &x, a1), left, at, &j.ty)?;
                    premise_is(&d.premises[1], h, &with(&rest, &x, a2), right, at, &j.ty)?;
                }
                _ => unreachable!(),
            }
        }
    }
    ensure(d.obligations == obs, "recorded obligations differ from the rule's")?;
    ensure(d.retyping == retype, "recorded retyping premise differs from the rule's")
}

/// The recorded right-rule binder, which must be new to the conclusion.
fn fresh_binder(d: &Derivation, j: &Judgment) -> Result<Ident, String> {
    let v = d.binder.clone().ok_or("right rule without a binder")?;
    ensure(!binder_avoid(j).contains(&v), "binder is not fresh")?;
    let tp = j.term.head_tpred().expect("right rule");
    if v != tp.binder {
        let mut free = j.term.time_vars();
        free.remove(&tp.binder);
        ensure(!free.contains(&v), "binder captures a variable of the term")?;
    }
    Ok(v)
}
