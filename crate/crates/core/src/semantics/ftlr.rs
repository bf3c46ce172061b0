//! Witnesses for well-typed terms, adequacy, closure and retyping checks.

use super::canon::canon_provider;
use super::compl::{apply_compl, related, subst_of, ComplConfig};
use super::relation::{CheckBudget, Checker, Mode, Verdict};
use super::run::{can_close, ct_run, simulate, RunError};
use crate::lts::{Channel, NamelessConfig};
use crate::proc::{closed_obj, validate_derivation, Ctx, Derivation, Term};
use crate::time::FinTime;
use crate::trajectory::{ct_concat, ct_partition_after, ct_partition_before, probes_for, validate_ct, Ct};
use crate::types::{find_model, retype_cut, retype_fwd, HypSet, SessionType, TExpr, Valuation};
use crate::time::Fin;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FtlrError {
    #[error("derivation does not validate")]
    Invalid,
    #[error("hypotheses have no model")]
    NoModel,
    #[error("valuation violates the hypotheses")]
    BadValuation,
    #[error("judgment still mentions `{0}` after instantiation")]
    Open(String),
    #[error("environment is not related to the context: {0}")]
    Unrelated(String),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("witness starts at {got} rather than {want}")]
    Start { got: String, want: String },
}

/// A judgment with every time variable replaced by its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closed {
    pub term: Term,
    pub ctx: Ctx,
    pub time: FinTime,
    pub ty: SessionType,
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub judgment: Closed,
    pub delta: ComplConfig,
    pub start: NamelessConfig,
    pub w: Ct,
}

/// The valuation used when none is given: a small model of the hypotheses.
pub fn default_valuation(h: &HypSet) -> Result<Valuation, FtlrError> {
    if h.gvars.is_empty() {
        return Ok(Valuation::new());
    }
    find_model(h).ok_or(FtlrError::NoModel)
}

pub fn close_judgment(d: &Derivation, val: &Valuation) -> Result<Closed, FtlrError> {
    let j = &d.judgment;
    let h = j.hyps.instantiate(val);
    if !h.gvars.is_empty() {
        return Err(FtlrError::Open(h.gvars.iter().next().unwrap().to_string()));
    }
    if !h.satisfiable() {
        return Err(FtlrError::BadValuation);
    }
    let lit = |e: &TExpr| val.iter().fold(e.clone(), |e, (v, n)| e.subst(v, &TExpr::lit(*n)));
    let time = lit(&j.time).as_lit().ok_or_else(|| FtlrError::Open(j.time.to_string()))?;
    let sub = |a: &SessionType| val.iter().fold(a.clone(), |a, (v, n)| a.subst(v, &TExpr::lit(*n)));
    let term = val.iter().fold(j.term.clone(), |m, (v, n)| m.subst_time(v, &TExpr::lit(*n)));
    Ok(Closed { term, ctx: j.ctx.iter().map(|(x, a)| (x.clone(), sub(a))).collect(), time, ty: sub(&j.ty) })
}

/// One reference provider per context entry, on a channel named after the
/// variable and distinct from the term's own channels.
pub fn canonical_compl(j: &Closed, horizon: FinTime) -> Result<ComplConfig, RunError> {
    let mut used: BTreeSet<Channel> = j.term.channels();
    let mut delta = ComplConfig::new();
    for (x, a) in &j.ctx {
        let mut c = Channel::new(x);
        let mut k = 1;
        while used.contains(&c) {
            c = Channel::new(&format!("{x}_{k}"));
            k += 1;
        }
        used.insert(c.clone());
        let w = ct_run(&NamelessConfig::lone(canon_provider(j.time, a)), j.time, horizon)?;
        delta.insert(x.clone(), (c, w));
    }
    Ok(delta)
}

/// Closes the term with `delta` and runs it from the judgment's time. The
/// start of the result is `apply_compl(delta, term[subst_of(delta)])`.
pub fn ftlr_witness(d: &Derivation, val: &Valuation, delta: Option<ComplConfig>, b: &CheckBudget) -> Result<Witness, FtlrError> {
    if !validate_derivation(d) {
        return Err(FtlrError::Invalid);
    }
    let j = close_judgment(d, val)?;
    let delta = match delta {
        Some(delta) => delta,
        None => canonical_compl(&j, b.horizon)?,
    };
    let mut ck = Checker::new(*b);
    if let v @ Verdict::Fail(_) = related(&delta, &j.ctx, j.time, &mut ck) {
        return Err(FtlrError::Unrelated(v.to_string()));
    }
    let root = closed_obj(j.term.subst(&subst_of(&delta)));
    let start = apply_compl(&delta, &root);
    let w = ct_run(&start, j.time, b.horizon)?;
    if w.start != start {
        return Err(FtlrError::Start { got: w.start.to_string(), want: start.to_string() });
    }
    Ok(Witness { judgment: j, delta, start, w })
}

impl Witness {
    /// `validate_ct` at fresh probes, and provider-mode membership.
    pub fn check(&self, b: &CheckBudget) -> Verdict {
        match validate_ct(&self.w, &probes_for(&self.w, b.probes)) {
            Ok(true) => {}
            Ok(false) => return Verdict::Fail("witness does not validate".into()),
            Err(e) => return Verdict::Fail(format!("witness does not validate: {e}")),
        }
        Checker::new(*b).term_member(&self.w, &self.judgment.ty, self.judgment.time, Mode::NoStar)
    }
}

/// A closed program of unit type closes its channel at every allowed
/// instant in the horizon, both along the witness and in the tick-by-tick
/// simulator.
pub fn adequacy(d: &Derivation, val: &Valuation, b: &CheckBudget) -> Result<Verdict, FtlrError> {
    let wit = ftlr_witness(d, val, None, b)?;
    let j = &wit.judgment;
    let SessionType::One(tp) = &j.ty else {
        return Ok(Verdict::Fail(format!("type {} is not a unit", j.ty)));
    };
    if !j.ctx.is_empty() {
        return Ok(Verdict::Fail("context is not empty".into()));
    }
    if wit.start != NamelessConfig::lone(closed_obj(j.term.clone())) {
        return Ok(Verdict::Fail("witness does not start from the program alone".into()));
    }
    let a = Channel::new("a");
    let sim = simulate(&wit.start.instantiate(&a), j.time, b.horizon)?;
    let mut acc = Verdict::Pass;
    for t in j.time..=b.horizon {
        if tp.pred.holds_at(&tp.binder, t) != Some(true) {
            continue;
        }
        let by_witness = wit.w.sample(t).is_some_and(|nc| can_close(&nc.instantiate(&a), &a, t));
        let by_sim = can_close(&sim[(t - j.time) as usize], &a, t);
        match (by_witness, by_sim) {
            (true, true) => {}
            (w, s) => {
                acc = acc.and(Verdict::Fail(format!("at {t}: witness closes {w}, simulator closes {s}")));
                break;
            }
        }
    }
    if let Some(o) = tp.onsets_from(b.horizon + 1).first() {
        acc = acc.and(Verdict::Inconclusive(format!("close allowed beyond horizon, first at {o}")));
    }
    Ok(acc)
}

/// Prefixing keeps provider-mode membership: if `w2` is a member at `t2`
/// then so is `w1 ++ w2` at `t`.
pub fn backwards_closure(w1: &Ct, w2: &Ct, ty: &SessionType, t: FinTime, b: &CheckBudget) -> Verdict {
    let mut ck = Checker::new(*b);
    if !ck.term_member(w2, ty, w2.lo, Mode::NoStar).is_pass() {
        return Verdict::Pass;
    }
    match ct_concat(w1, w2) {
        Ok(w) => ck.term_member(&w, ty, t, Mode::NoStar).within("backwards closure"),
        Err(e) => Verdict::Fail(format!("concat: {e}")),
    }
}

/// Dropping a prefix keeps client-mode membership.
pub fn forwards_closure(w: &Ct, ty: &SessionType, t: FinTime, t2: FinTime, b: &CheckBudget) -> Verdict {
    let mut ck = Checker::new(*b);
    if !ck.term_member(w, ty, t, Mode::Star).is_pass() {
        return Verdict::Pass;
    }
    match ct_partition_after(w, t2) {
        Ok(w2) => ck.term_member(&w2, ty, t2, Mode::Star).within("forwards closure"),
        Err(e) => Verdict::Fail(format!("partition: {e}")),
    }
}

/// Both closure properties at every change point of `w` in the horizon.
pub fn closure_tests(w: &Ct, ty: &SessionType, t: FinTime, b: &CheckBudget) -> Verdict {
    let mut cuts: BTreeSet<FinTime> = w.ntraj.breakpoints().filter(|&s| s > w.lo && s <= b.horizon).collect();
    cuts.insert(w.lo + 1);
    Verdict::all(cuts.into_iter().flat_map(|s| {
        let back = match (ct_partition_before(w, Fin(s)), ct_partition_after(w, s)) {
            (Ok(w1), Ok(w2)) => backwards_closure(&w1, &w2, ty, t, b),
            (Err(e), _) | (_, Err(e)) => Verdict::Fail(format!("split at {s}: {e}")),
        };
        [back.within(format!("split at {s}")), forwards_closure(w, ty, t, s, b).within(format!("split at {s}"))]
    }))
}

/// Semantic content of a retyping. For a cut, provider members of `a` are
/// client members of `b`; for a forward, client members of `a` are
/// provider members of `b`. Vacuous when the retyping does not hold.
pub fn semantic_retype_test(cut: bool, a: &SessionType, b_ty: &SessionType, t: FinTime, w: &Ct, b: &CheckBudget) -> Verdict {
    let h = HypSet::new();
    let holds = if cut { retype_cut(&h, a, b_ty, &TExpr::lit(t)) } else { retype_fwd(&h, a, b_ty, &TExpr::lit(t)) };
    if !holds.is_ok_and(|obs| obs.iter().all(|o| o.holds())) {
        return Verdict::Pass;
    }
    let (from, to) = if cut { (Mode::NoStar, Mode::Star) } else { (Mode::Star, Mode::NoStar) };
    let mut ck = Checker::new(*b);
    if !ck.term_member(w, a, t, from).is_pass() {
        return Verdict::Pass;
    }
    ck.term_member(w, b_ty, t, to).within(if cut { "cut retyping" } else { "forward retyping" })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proc::typecheck;
    use crate::syntax::{parse_term, parse_type};
    use crate::types::ident;

    fn derive(ctx: &[(&str, &str)], m: &str, t: u64, a: &str) -> Derivation {
        let ctx: Ctx = ctx.iter().map(|(x, a)| (ident(x), parse_type(a).unwrap())).collect();
        typecheck(&HypSet::new(), &ctx, &parse_term(m).unwrap(), &TExpr::lit(t), &parse_type(a).unwrap()).unwrap()
    }

    #[test]
    fn closer_witness() {
        let b = CheckBudget::with_horizon(10);
        let d = derive(&[], "send{t | t == 3}()", 0, "1{t | t == 3}");
        let wit = ftlr_witness(&d, &Valuation::new(), None, &b).unwrap();
        assert_eq!(wit.w.step_to, 3);
        assert_eq!(wit.check(&b), Verdict::Pass);
        assert_eq!(adequacy(&d, &Valuation::new(), &b).unwrap(), Verdict::Pass);
        assert_eq!(closure_tests(&wit.w, &wit.judgment.ty, 0, &b), Verdict::Pass);
    }

    #[test]
    fn client_exchanges_close() {
        let b = CheckBudget::with_horizon(12);
        let d = derive(&[("x", "1{t | t == 3}")], "recv{3} x(); send{t | t == 5}()", 0, "1{t | t == 5}");
        let wit = ftlr_witness(&d, &Valuation::new(), None, &b).unwrap();
        assert_eq!(wit.start.rest.len(), 1);
        assert_eq!(wit.w.step_to, 5);
        assert!(wit.w.sample(3).unwrap().rest.is_empty());
        assert_eq!(wit.check(&b), Verdict::Pass);
    }

    #[test]
    fn retyping_is_semantic() {
        let b = CheckBudget::with_horizon(12);
        let exact = parse_type("1{t | t == 4}").unwrap();
        let wide = parse_type("1{t | t <= 10}").unwrap();
        let d = derive(&[], "send{t | t <= 10}()", 0, "1{t | t <= 10}");
        let w = ftlr_witness(&d, &Valuation::new(), None, &b).unwrap().w;
        assert_eq!(Checker::new(b).term_member(&w, &wide, 0, Mode::NoStar), Verdict::Pass);
        assert_eq!(semantic_retype_test(true, &wide, &exact, 0, &w, &b), Verdict::Pass);
        assert_eq!(semantic_retype_test(true, &wide, &wide, 0, &w, &b), Verdict::Pass);
        // no retyping, nothing to check
        assert_eq!(semantic_retype_test(true, &exact, &wide, 0, &w, &b), Verdict::Pass);
        // a provider only ready at 4 is not a client-mode member of the wide type's provider view
        let d = derive(&[], "send{t | t == 4}()", 0, "1{t | t == 4}");
        let w4 = ftlr_witness(&d, &Valuation::new(), None, &b).unwrap().w;
        assert!(Checker::new(b).term_member(&w4, &wide, 0, Mode::NoStar).is_fail());
    }
}
