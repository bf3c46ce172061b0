//! The acceptance properties, each as a function that either summarises
//! what it checked or reports the first counterexample.

use super::*;
use std::collections::{BTreeMap, BTreeSet};
use timedsess::lts::{
    ms_concat, ms_frame, ms_interleave, ms_step_t_right, validate_multistep, NamelessConfig,
};
use timedsess::proc::{validate_derivation, Rule, Subst, Term, TypeError};
use timedsess::semantics::{
    adequacy, apply_compl, can_close, closure_tests, ct_interleave_compl, ct_run, default_valuation, ftlr_witness,
    simulate, subst_of, CheckBudget, Checker, ComplConfig, Mode, Verdict, Witness,
};
use timedsess::syntax::parse_pred;
use timedsess::trajectory::{
    interleave_traj, probes_for, r_concat, r_frame, r_interleave, r_partition, realized_implies_lt, validate_ct,
    validate_realization, Ct,
};
use timedsess::types::{Pred, SessionType, Valuation};

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

// ------------------------------------------------------------ trajectories

/// Concatenation, extension, partition and the interleave commuting
/// equations, each as structural equality and as equality of graphs.
pub fn trajectory_laws(cases: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    for case in 0..cases {
        let lo = r.gen_range(0..40);

        // associativity
        let b = lo + r.gen_range(1..=4);
        let c = b + r.gen_range(1..=4);
        let hi = hi_after(&mut r, c);
        let (s1, s2, s3) = (rand_traj_on(&mut r, lo, Fin(b), 6), rand_traj_on(&mut r, b, Fin(c), 6), rand_traj_on(&mut r, c, hi, 6));
        let left = ok(s1.concat(&s2).and_then(|x| x.concat(&s3)), "concat")?;
        let right = ok(s2.concat(&s3).and_then(|x| s1.concat(&x)), "concat")?;
        ensure!(left == right && same_graph(&left, &right), "case {case}: concat is not associative");
        for (t, v) in graph(&left) {
            let want = if t < b { &s1 } else if t < c { &s2 } else { &s3 }.sample(t).unwrap();
            ensure!(&v == want, "case {case}: concat differs from its pieces at {t}");
        }

        // extension
        let t1 = lo + r.gen_range(0..6);
        let h = rand_hi(&mut r, t1);
        let s = rand_traj_on(&mut r, t1, h, 6);
        let omega = rand_cfg(&mut r);
        ensure!(ok(Traj::extend(omega.clone(), t1, &s), "extend")? == s, "case {case}: extension to its own start is not the identity");
        let t0 = t1 - r.gen_range(0..=t1.min(6));
        let e = ok(Traj::extend(omega.clone(), t0, &s), "extend")?;
        ensure!(e.lo() == t0 && e.hi() == s.hi(), "case {case}: extension has the wrong interval");
        for (t, v) in graph(&e) {
            let want = if t >= t1 { s.sample(t).unwrap() } else { &omega };
            ensure!(&v == want, "case {case}: extension differs at {t}");
        }

        // before ++ after
        if let Some(top) = match s.hi() {
            Fin(h) => (h > s.lo() + 1).then_some(h),
            Inf => Some(s.lo() + 12),
        } {
            let t = r.gen_range(s.lo() + 1..top);
            let before = ok(s.partition_before(t), "before")?;
            let after = ok(s.partition_after(t), "after")?;
            let whole = ok(before.concat(&after), "concat")?;
            ensure!(whole == s && same_graph(&whole, &s), "case {case}: before ++ after is not the identity at {t}");
        }

        // interleave
        let t = r.gen_range(0..20);
        let ta = t + r.gen_range(0..5);
        let tb = t + r.gen_range(0..5);
        let end = hi_after(&mut r, ta.max(tb));
        let sa = rand_traj_on(&mut r, ta, end, 6);
        let sb = rand_traj_on(&mut r, tb, end, 6);
        let (o1, o2) = (rand_cfg(&mut r), rand_cfg(&mut r));
        let konst = |c: &Configuration, from: FinTime| Traj::constant(c.clone(), from, end).unwrap();
        let ext = |c: &Configuration, from: FinTime, s: &Trajectory| Traj::extend(c.clone(), from, s).unwrap();
        let il = |x: &Trajectory, y: &Trajectory| -> Result<Trajectory, String> {
            let z = ok(interleave_traj(x, y), "interleave")?;
            for (u, v) in graph(&z) {
                ensure!(v == x.sample(u).unwrap().union(y.sample(u).unwrap()), "interleave is not pointwise union at {u}");
            }
            Ok(z)
        };
        let both = o1.union(&o2);
        // (1) constant on the left
        let l = il(&konst(&o1, t), &ext(&o2, t, &sa))?;
        let rr = ext(&both, t, &il(&konst(&o1, ta), &ext(&o2, ta, &sa))?);
        ensure!(l == rr && same_graph(&l, &rr), "case {case}: interleave law 1");
        // (2) constant on the right
        let l = il(&ext(&o2, t, &sa), &konst(&o1, t))?;
        let rr = ext(&o2.union(&o1), t, &il(&ext(&o2, ta, &sa), &konst(&o1, ta))?);
        ensure!(l == rr && same_graph(&l, &rr), "case {case}: interleave law 2");
        // (3) and (4): the earlier start decides the shape
        let l = il(&ext(&o1, t, &sa), &ext(&o2, t, &sb))?;
        let rr = if ta <= tb {
            ext(&both, t, &il(&sa, &ext(&o2, ta, &sb))?)
        } else {
            ext(&both, t, &il(&ext(&o1, tb, &sa), &sb)?)
        };
        ensure!(l == rr && same_graph(&l, &rr), "case {case}: interleave law {}", if ta <= tb { 3 } else { 4 });
    }
    Ok(format!("{cases} cases"))
}

// --------------------------------------------------------------- multisteps

fn valid_ms(m: &Multistep, what: &str) -> Result<(), String> {
    ensure!(validate_multistep(m), "{what}: does not validate");
    ensure!(m.start_time() <= m.end_time(), "{what}: starts after it ends");
    Ok(())
}

/// Frame, concat, idle extension and interleave on random runs, with the
/// endpoints each is meant to have.
pub fn multistep_laws(cases: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut silent = 0usize;
    for case in 0..cases {
        let t0 = r.gen_range(0..10);
        let a = rand_run(&mut r, "l", t0, 6);
        valid_ms(&a, &format!("case {case}: generated run"))?;
        silent += a.steps().count();

        let frame = rand_run_cfg(&mut r, "f", t0);
        let m = ms_frame(&a, &frame);
        valid_ms(&m, &format!("case {case}: frame"))?;
        ensure!(
            m.start() == (&a.start_cfg().union(&frame), a.start_time()) && m.last == (a.end_cfg().union(&frame), a.end_time()),
            "case {case}: frame endpoints"
        );

        let gap = r.gen_range(0..3);
        let b = rand_run_from(&mut r, a.end_cfg().clone(), a.end_time() + gap, 6);
        let m = ok(ms_concat(&a, &b), "concat")?;
        valid_ms(&m, &format!("case {case}: concat"))?;
        ensure!(m.start() == a.start() && m.last == b.last, "case {case}: concat endpoints");

        let t = a.end_time() + r.gen_range(0..5);
        let m = ok(ms_step_t_right(&a, t), "stepT-right")?;
        valid_ms(&m, &format!("case {case}: stepT-right"))?;
        ensure!(m.start() == a.start() && m.last == (a.end_cfg().clone(), t), "case {case}: stepT-right endpoints");

        let tb = r.gen_range(0..10);
        let b = rand_run(&mut r, "r", tb, 6);
        let m = ms_interleave(&a, &b);
        valid_ms(&m, &format!("case {case}: interleave"))?;
        ensure!(m.start_time() == a.start_time().min(b.start_time()), "case {case}: interleave start time");
        ensure!(m.end_time() == a.end_time().max(b.end_time()), "case {case}: interleave end time");
        ensure!(m.start_cfg() == &a.start_cfg().union(b.start_cfg()), "case {case}: interleave start configuration");
        ensure!(m.end_cfg() == &a.end_cfg().union(b.end_cfg()), "case {case}: interleave end configuration");
    }
    Ok(format!("{cases} cases, {silent} silent steps in the generated runs"))
}

// ------------------------------------------------------------- realizations

fn valid_r(x: &Realization, what: &str) -> Result<(), String> {
    ensure!(validate_realization(x), "{what}: does not validate");
    ensure!(realized_implies_lt(x), "{what}: strict advance fails");
    Ok(())
}

pub fn realization_laws(cases: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut checked = 0usize;
    for case in 0..cases {
        let t0 = r.gen_range(0..10);
        let sigma = rand_run(&mut r, "l", t0, 6);
        let end = sigma.end_time();
        let r1 = realization_of(&sigma, hi_after(&mut r, end));
        valid_r(&r1, &format!("case {case}: generated"))?;

        let frame = rand_run_cfg(&mut r, "f", t0);
        let x = ok(r_frame(&r1, &frame), "frame")?;
        valid_r(&x, &format!("case {case}: frame"))?;
        ensure!(x.subject() == &r1.subject().map(|c| c.union(&frame)), "case {case}: frame subject");

        let mid = end + r.gen_range(1..4);
        let first = realization_of(&sigma, Fin(mid));
        let tail = rand_run_from(&mut r, sigma.end_cfg().clone(), mid, 6);
        let second = realization_of(&tail, hi_after(&mut r, tail.end_time()));
        let x = ok(r_concat(&first, &second), "concat")?;
        valid_r(&x, &format!("case {case}: concat"))?;
        ensure!(x.subject() == &first.subject().concat(second.subject()).unwrap(), "case {case}: concat subject");

        let top = match r1.subject().hi() {
            Fin(h) => h,
            Inf => end + 8,
        };
        let t = r.gen_range(r1.subject().lo()..top);
        let (before, after) = ok(r_partition(&r1, t), "partition")?;
        valid_r(&after, &format!("case {case}: partition after {t}"))?;
        ensure!(after.subject() == &r1.subject().partition_after(t).unwrap(), "case {case}: partition after subject");
        if let Some(before) = before {
            valid_r(&before, &format!("case {case}: partition before {t}"))?;
            ensure!(
                &before.subject().concat(after.subject()).unwrap() == r1.subject(),
                "case {case}: the two pieces do not rebuild the subject"
            );
            ensure!(Some(before.sigma.end_cfg()) == r1.subject().sample_before(t), "case {case}: before piece ends off the trajectory");
        }

        let other = rand_run(&mut r, "r", t0, 6);
        let hi = hi_after(&mut r, end.max(other.end_time()));
        let (q1, q2) = (realization_of(&sigma, hi), realization_of(&other, hi));
        let x = ok(r_interleave(&q1, &q2), "interleave")?;
        valid_r(&x, &format!("case {case}: interleave"))?;
        ensure!(x.subject() == &interleave_traj(q1.subject(), q2.subject()).unwrap(), "case {case}: interleave subject");
        checked += 5;
    }
    Ok(format!("{cases} cases, {checked} derived realizations"))
}

// --------------------------------------------------------------- entailment

/// Valuations per variable in the oracle's box.
pub const BOX: u64 = 46;

fn hyp_pool() -> Vec<&'static str> {
    vec![
        "x <= y",
        "y < z",
        "x + 3 <= z",
        "x == 5",
        "y <= 7",
        "z == y + 2",
        "4 <= x",
        "y + 15 <= z",
        "z <= 12",
        "x == z",
        "x < 2 || y == x + 1",
        "!(x <= y)",
    ]
}

fn goal_pool() -> Vec<String> {
    let terms = ["x", "y", "z", ""];
    let mut out = Vec::new();
    for u in terms {
        for v in terms {
            if u == v {
                continue;
            }
            for c in [0u64, 1, 15] {
                let lhs = match (u, c) {
                    ("", c) => c.to_string(),
                    (u, 0) => u.to_string(),
                    (u, c) => format!("{u} + {c}"),
                };
                let rhs = if v.is_empty() { "0".to_string() } else { v.to_string() };
                for op in ["<=", "<", "=="] {
                    out.push(format!("{lhs} {op} {rhs}"));
                }
            }
        }
    }
    out.extend(["!(x == y)", "x <= y || y <= x", "x < y && y < z", "x == 5 || z < x"].map(String::from));
    out
}

/// The valuations of `x, y, z` in the box that satisfy `p`.
fn truth_table(p: &Pred) -> Vec<u64> {
    let n = (BOX * BOX * BOX) as usize;
    let mut bits = vec![0u64; n.div_ceil(64)];
    let mut i = 0usize;
    for a in 0..BOX {
        for b in 0..BOX {
            for c in 0..BOX {
                let val = |v: &timedsess::types::Ident| match &**v {
                    "x" => Some(a),
                    "y" => Some(b),
                    "z" => Some(c),
                    _ => None,
                };
                if p.eval(&val).expect("closed over x, y, z") {
                    bits[i / 64] |= 1 << (i % 64);
                }
                i += 1;
            }
        }
    }
    bits
}

/// Compares `entails` with the box oracle on every goal against every set
/// of at most three hypotheses.
pub fn entailment_grid() -> Result<(usize, usize), String> {
    let hyps: Vec<Pred> = hyp_pool().into_iter().map(|s| parse_pred(s).unwrap()).collect();
    let goals: Vec<Pred> = goal_pool().iter().map(|s| parse_pred(s).unwrap()).collect();
    let htab: Vec<Vec<u64>> = hyps.iter().map(truth_table).collect();
    let gtab: Vec<Vec<u64>> = goals.iter().map(truth_table).collect();
    let words = htab[0].len();
    let full = {
        let mut v = vec![u64::MAX; words];
        let n = (BOX * BOX * BOX) as usize;
        if !n.is_multiple_of(64) {
            v[words - 1] = (1u64 << (n % 64)) - 1;
        }
        v
    };
    let mut subsets: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..hyps.len() {
        subsets.push(vec![i]);
        for j in i + 1..hyps.len() {
            subsets.push(vec![i, j]);
            for k in j + 1..hyps.len() {
                subsets.push(vec![i, j, k]);
            }
        }
    }
    let vars = ["x", "y", "z"].map(ident);
    let (mut n, mut bad) = (0, 0);
    let mut first = None;
    for sub in &subsets {
        let mut sat = full.clone();
        for &i in sub {
            for (w, h) in sat.iter_mut().zip(&htab[i]) {
                *w &= h;
            }
        }
        let hs = HypSet::from_parts(vars.iter().cloned(), sub.iter().map(|&i| hyps[i].clone()));
        for (g, gt) in goals.iter().zip(&gtab) {
            let oracle = sat.iter().zip(gt).all(|(s, g)| s & !g == 0);
            n += 1;
            if hs.entails(g) != oracle {
                bad += 1;
                first.get_or_insert_with(|| format!("{hs} |- {g}: oracle says {oracle}"));
            }
        }
    }
    match first {
        None => Ok((n, bad)),
        Some(f) => Err(format!("{bad} of {n} instances disagree, first: {f}")),
    }
}

// -------------------------------------------------------------- type system

pub const SENSOR: &str = "1{t | true} -o{t1 | t0 <= t1 && t1 <= t0 + 15} (1{t | t2 <= t} *{t2 | t2 == t1 + 10} 1{t3 | t2 <= t3})";

pub fn type_system() -> Outcome {
    let programs = corpus();
    let sensor = programs.iter().find(|p| p.def.name == "sensor").ok_or("no sensor program")?;
    ensure!(sensor.def.ty == parse_type(SENSOR).unwrap(), "sensor program has type {}", sensor.def.ty);
    ensure!(sensor.def.gvars == vec![ident("t0")] && sensor.def.time == TExpr::var(&ident("t0")), "sensor is not checked at t0");

    let (_, src) = rejected().into_iter().find(|(f, _)| f.contains("off_by_one")).ok_or("no timing mutant")?;
    let spec = ok(SpecFile::parse(&src), "mutant")?;
    let d = spec.procs().next().ok_or("mutant has no process")?;
    let err = match typecheck(&d.hypset(), &d.context(), &d.body, &d.time, &d.ty) {
        Ok(_) => return Err("the timing mutant type checks".into()),
        Err(e) => e,
    };
    let TypeError::Entail { rule, obligation } = &err.error else {
        return Err(format!("mutant rejected for another reason: {}", err.report()));
    };
    ensure!(*rule == Rule::TensorRight, "mutant rejected at {rule}");
    ensure!(obligation.goal == parse_pred("t2 == t1 + 10").unwrap(), "mutant rejected at {obligation}");
    ensure!(obligation.hyps.hyps.contains(&parse_pred("t2 == t1 + 9").unwrap()), "mutant obligation lacks its premise: {obligation}");

    for (f, src) in rejected() {
        let spec = ok(SpecFile::parse(&src), &f)?;
        ensure!(spec.procs().any(|d| derive(d).is_err()), "{f} is accepted");
    }

    ensure!(programs.len() >= 20, "corpus has only {} programs", programs.len());
    let mut rules = BTreeSet::new();
    let (mut cut, mut fwd) = (0, 0);
    for p in &programs {
        ensure!(validate_derivation(&p.der), "{} does not re-validate", p.label());
        p.der.walk(&mut |n| {
            rules.insert(n.rule);
            let nontrivial = n.retyping.as_ref().is_some_and(|obs| obs.iter().any(|o| !o.hyps.hyps.contains(&o.goal)));
            let changed = match &n.judgment.term {
                Term::Let { ty, def_ty: Some(p), .. } => p != ty,
                Term::Fwd { .. } => n.judgment.ctx.values().next() != Some(&n.judgment.ty),
                _ => false,
            };
            if nontrivial && changed {
                match n.rule {
                    Rule::Cut => cut += 1,
                    Rule::Fwd => fwd += 1,
                    _ => {}
                }
            }
        });
    }
    let missing: Vec<_> = Rule::ALL.iter().filter(|r| !rules.contains(r)).collect();
    ensure!(missing.is_empty(), "rules never used: {missing:?}");
    ensure!(cut > 0 && fwd > 0, "retyping coverage: {cut} cuts, {fwd} forwards with a changed type");
    Ok(format!("{} programs re-validated, all 12 rules, {cut} cut and {fwd} forward retypings", programs.len()))
}

// ------------------------------------------------------------- substitution

fn chan(k: usize) -> timedsess::lts::Channel {
    timedsess::lts::Channel::new(&format!("k{k}"))
}

/// Names a term binds, which a substitution must leave alone.
fn bound_names(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    for w in src.split(|c: char| !c.is_alphanumeric()) {
        if ["x", "y", "z"].iter().any(|p| w.starts_with(p)) && w.len() > 1 && w[1..].chars().all(|c| c.is_ascii_digit()) {
            out.push(w.to_string());
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn substitution_laws(cases: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut rules = BTreeSet::new();
    let mut binders_hit = 0;
    for case in 0..cases {
        let (g, d) = rand_typed(&mut r);
        d.walk(&mut |n| {
            rules.insert(n.rule);
        });
        let m = parse_term(&g.term).unwrap();
        let free: Vec<String> = g.ctx.iter().map(|(x, _)| x.clone()).collect();
        let bound = bound_names(&g.term);
        let mut names: Vec<String> = free.iter().chain(&bound).cloned().collect();
        names.push("w9".into());

        // composition
        let x = names.choose(&mut r).unwrap().clone();
        let mut sigma = Subst::new();
        for (i, y) in names.iter().enumerate() {
            if *y != x && r.gen_bool(0.6) {
                sigma.insert(ident(y), chan(i));
            }
        }
        let b = chan(99);
        let single: Subst = [(ident(&x), b.clone())].into_iter().collect();
        let mut joint = sigma.clone();
        joint.insert(ident(&x), b);
        ensure!(m.subst(&sigma).subst(&single) == m.subst(&joint), "case {case}: composition fails for {x} in {}", g.term);

        // discard
        let sigma: Subst = free.iter().enumerate().map(|(i, y)| (ident(y), chan(i))).collect();
        let mut wider = sigma.clone();
        for (i, y) in bound.iter().chain(std::iter::once(&"w9".to_string())).enumerate() {
            if !sigma.contains_key(&ident(y)) && r.gen_bool(0.7) {
                wider.insert(ident(y), chan(50 + i));
                binders_hit += bound.contains(y) as usize;
            }
        }
        ensure!(m.subst(&wider) == m.subst(&sigma), "case {case}: discard fails in {}", g.term);
        ensure!(m.subst(&sigma).free_vars().is_empty(), "case {case}: substitution leaves free variables");
    }
    Ok(format!("{cases} cases each, generated terms use {} rules, {binders_hit} discarded bound names", rules.len()))
}

/// Insertion, deletion and union laws of `apply_compl` and `subst_of`, and
/// the start equation of `ct_interleave_compl`.
pub fn compl_laws(cases: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let entry = |r: &mut ChaCha8Rng, k: usize| -> (timedsess::lts::Channel, Ct) {
        let lo = r.gen_range(0..4);
        let obj = if r.gen_bool(0.5) {
            beacon_obj(Window::new(lo + r.gen_range(0..5), Some(lo + 6)))
        } else {
            let ty = parse_type(&format!("1{{t | t == {}}}", lo + r.gen_range(0..5))).unwrap();
            timedsess::semantics::canon_provider(lo, &ty)
        };
        let _ = lo;
        (chan(k), ct_run(&NamelessConfig::lone(obj), 0, 20).unwrap())
    };
    let root = closed_obj(parse_term("send{t | t == 7}()").unwrap());
    for case in 0..cases {
        let mut delta = ComplConfig::new();
        let mut other = ComplConfig::new();
        for k in 0..r.gen_range(0..4) {
            let e = entry(&mut r, k);
            delta.insert(ident(&format!("v{k}")), e);
        }
        for k in 4..4 + r.gen_range(0..3) {
            let e = entry(&mut r, k);
            other.insert(ident(&format!("v{k}")), e);
        }
        let starts = |d: &ComplConfig| {
            d.values().fold(Configuration::empty(), |acc, (c, w)| acc.union(&w.start.instantiate(c)))
        };
        let base = apply_compl(&delta, &root);
        ensure!(base.root == root && base.rest.equal(&starts(&delta)), "case {case}: apply_compl is not the union of starts");

        // insertion
        let (x, e) = (ident("new"), entry(&mut r, 9));
        let mut ins = delta.clone();
        ins.insert(x.clone(), e.clone());
        ensure!(apply_compl(&ins, &root).rest.equal(&base.rest.union(&e.1.start.instantiate(&e.0))), "case {case}: insertion");
        let mut s = subst_of(&delta);
        s.insert(x.clone(), e.0.clone());
        ensure!(subst_of(&ins) == s, "case {case}: subst_of insertion");

        // deletion
        if let Some(y) = delta.keys().next().cloned() {
            let mut del = delta.clone();
            let (c, w) = del.remove(&y).unwrap();
            ensure!(apply_compl(&del, &root).rest.union(&w.start.instantiate(&c)).equal(&base.rest), "case {case}: deletion");
            let mut s = subst_of(&delta);
            s.remove(&y);
            ensure!(subst_of(&del) == s, "case {case}: subst_of deletion");
        }

        // union
        let mut both = delta.clone();
        both.extend(other.clone());
        ensure!(
            apply_compl(&both, &root).rest.equal(&base.rest.union(&apply_compl(&other, &root).rest)),
            "case {case}: union"
        );
        let mut s = subst_of(&delta);
        s.extend(subst_of(&other));
        ensure!(subst_of(&both) == s, "case {case}: subst_of union");

        // interleaving the environment into a run of the root
        let w = ct_run(&NamelessConfig::lone(root.clone()), 0, 20).unwrap();
        let folded = ok(ct_interleave_compl(&w, &both), "interleave")?;
        ensure!(folded.start == apply_compl(&both, &root), "case {case}: start equation of the fold");
        ensure!(validate_ct(&folded, &probes_for(&folded, 3)).unwrap_or(false), "case {case}: fold does not validate");
    }
    Ok(format!("{cases} cases"))
}

// ------------------------------------------------------------------- FTLR

pub fn budget() -> CheckBudget {
    let mut b = CheckBudget::with_horizon(50);
    b.probes = 3;
    b
}

/// An unchecked verdict is acceptable only when it says the obligation lies
/// past the horizon.
pub fn beyond_horizon(v: &Verdict) -> bool {
    match v {
        Verdict::Inconclusive(m) => m.contains("beyond horizon") || m.contains("beyond the horizon"),
        _ => false,
    }
}

fn witness_of(p: &Program, b: &CheckBudget) -> Result<(Valuation, Witness), String> {
    let val = ok(default_valuation(&p.der.judgment.hyps), &p.label())?;
    let wit = ok(ftlr_witness(&p.der, &val, None, b), &p.label())?;
    Ok((val, wit))
}

pub fn ftlr_suite(b: &CheckBudget) -> Outcome {
    let (mut pass, mut open) = (0, 0);
    for p in corpus() {
        let (_, wit) = witness_of(&p, b)?;
        let j = &wit.judgment;
        let root = closed_obj(j.term.subst(&subst_of(&wit.delta)));
        let want = apply_compl(&wit.delta, &root);
        ensure!(wit.w.start.root == want.root && wit.w.start.rest.equal(&want.rest), "{}: start equation fails", p.label());
        let probes = probes_for(&wit.w, b.probes);
        ensure!(probes.len() == 3, "{}: not enough probes", p.label());
        ensure!(validate_ct(&wit.w, &probes).unwrap_or(false), "{}: witness does not validate", p.label());
        let v = Checker::new(*b).term_member(&wit.w, &j.ty, j.time, Mode::NoStar);
        match &v {
            Verdict::Pass => pass += 1,
            v if beyond_horizon(v) => open += 1,
            v => return Err(format!("{}: {v}", p.label())),
        }
    }
    Ok(format!("{pass} pass, {open} inconclusive beyond the horizon"))
}

/// Both paths agree that `a` can close at each allowed instant.
pub fn monitor(wit: &Witness, b: &CheckBudget) -> Result<usize, String> {
    let SessionType::One(tp) = &wit.judgment.ty else { return Err("not a unit".into()) };
    let a = timedsess::lts::Channel::new("a");
    let sim = ok(simulate(&wit.start.instantiate(&a), wit.judgment.time, b.horizon), "simulate")?;
    let mut n = 0;
    for t in wit.judgment.time..=b.horizon {
        if tp.pred.holds_at(&tp.binder, t) != Some(true) {
            continue;
        }
        let by_witness = wit.w.sample(t).is_some_and(|nc| can_close(&nc.instantiate(&a), &a, t));
        let by_sim = can_close(&sim[(t - wit.judgment.time) as usize], &a, t);
        ensure!(by_witness && by_sim, "at {t}: witness closes {by_witness}, simulator closes {by_sim}");
        n += 1;
    }
    Ok(n)
}

pub fn adequacy_suite(b: &CheckBudget) -> Outcome {
    let (mut programs, mut instants) = (0, 0);
    for p in corpus() {
        if !(p.def.ctx.is_empty() && matches!(p.def.ty, SessionType::One(_))) {
            continue;
        }
        let (val, wit) = witness_of(&p, b)?;
        let v = ok(adequacy(&p.der, &val, b), &p.label())?;
        ensure!(v.is_pass() || beyond_horizon(&v), "{}: {v}", p.label());
        instants += monitor(&wit, b).map_err(|e| format!("{}: {e}", p.label()))?;
        programs += 1;
    }
    ensure!(programs > 0, "no closed unit programs");

    // a beacon provider for a typed client
    let waiter = corpus().into_iter().find(|p| p.def.name == "waiter").ok_or("no beacon client")?;
    let beacon = NamelessConfig::lone(beacon_obj(Window::new(2, Some(6))));
    let delta: ComplConfig = [(ident("x"), (timedsess::lts::Channel::new("x"), ct_run(&beacon, 0, b.horizon).unwrap()))].into_iter().collect();
    let wit = ok(ftlr_witness(&waiter.der, &BTreeMap::new(), Some(delta), b), "beacon client")?;
    ensure!(wit.start.rest.to_vec().iter().any(|p| p.to_string().contains("beacon")), "beacon client: no beacon in the start");
    let n = monitor(&wit, b).map_err(|e| format!("beacon client: {e}"))?;
    ensure!(n > 0, "beacon client: no allowed instant in the horizon");
    let run = timedsess::cli::run(&std::fs::read_to_string(corpus_dir().join("beacon_client.tsess")).unwrap(), &Default::default(), b.horizon);
    ensure!(run.code == 0 && run.out.contains("a can close at 6"), "beacon client run:\n{}", run.out);
    Ok(format!("{programs} closed programs, {instants} instants, beacon client closes at {n} instant(s)"))
}

pub fn closure_suite(b: &CheckBudget) -> Outcome {
    let (mut pass, mut open) = (0, 0);
    for p in corpus() {
        let (_, wit) = witness_of(&p, b)?;
        let v = closure_tests(&wit.w, &wit.judgment.ty, wit.judgment.time, b);
        match &v {
            Verdict::Pass => pass += 1,
            v if beyond_horizon(v) => open += 1,
            v => return Err(format!("{}: {v}", p.label())),
        }
    }
    Ok(format!("{pass} pass, {open} inconclusive beyond the horizon"))
}
