//! Commands behind the `timedsess` binary. Each returns a report whose code
//! is 0 for pass, 1 for fail, 2 for inconclusive and 3 for bad input.

use crate::beacon::beacon_obj;
use crate::lts::{proc, Channel, Configuration, MsNode, NamelessConfig, StepCert, StepRule};
use crate::proc::{closed_obj, typecheck, Derivation, Subst};
use crate::semantics::{
    adequacy, can_close, canon_provider, close_judgment, closure_tests, ct_run, default_valuation, ftlr_witness, schedule,
    semantic_retype_test, simulate, CheckBudget, Checker, Mode, Verdict,
};
use crate::syntax::{ct_from_json, ct_to_json, parse_retype_query, parse_type_in, Aliases, CertError, ObjReader, ProcDef, Provider, SpecFile};
use crate::time::{FinTime, Inf};
use crate::trajectory::{check_ct, ct_of_run, probes_for};
use crate::types::{retype_cut, retype_fwd, HypSet, SessionType, Valuation};
use std::fmt::Write;

pub const PASS: i32 = 0;
pub const FAIL: i32 = 1;
pub const INCONCLUSIVE: i32 = 2;
pub const BAD_INPUT: i32 = 3;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub out: String,
    /// A file body the caller asked for, such as a run trace.
    pub artifact: Option<String>,
}

impl Report {
    fn new(code: i32, out: String) -> Self {
        Report { code, out, artifact: None }
    }

    fn bad(msg: impl std::fmt::Display) -> Self {
        Report::new(BAD_INPUT, format!("error: {msg}\n"))
    }

    fn verdict(out: String, v: &Verdict) -> Self {
        Report::new(v.code(), format!("{out}{v}\n"))
    }
}

fn parse_spec(src: &str) -> Result<SpecFile, Report> {
    SpecFile::parse(src).map_err(|e| Report::bad(format!("parse error at {e}")))
}

fn derive(d: &ProcDef) -> Result<Derivation, String> {
    typecheck(&d.hypset(), &d.context(), &d.body, &d.time, &d.ty).map_err(|e| e.report())
}

/// Type checks every process; `dump` prints each derivation.
pub fn check(src: &str, dump: bool) -> Report {
    let spec = match parse_spec(src) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let mut out = String::new();
    let mut code = PASS;
    for d in spec.procs() {
        match derive(d) {
            Ok(der) => {
                let rules: Vec<String> = der.rules().iter().map(|r| r.to_string()).collect();
                writeln!(out, "ok    {} [{}]", d.name, rules.join(" ")).unwrap();
                if dump {
                    out.push_str(&der.dump());
                }
            }
            Err(report) => {
                code = FAIL;
                writeln!(out, "FAIL  {}", d.name).unwrap();
                for line in report.lines() {
                    writeln!(out, "      {line}").unwrap();
                }
            }
        }
    }
    Report::new(code, out)
}

#[derive(Clone, Debug, Default)]
pub struct RunOpts {
    /// Index or target name of the run directive; the first one by default.
    pub run: Option<String>,
    pub horizon: Option<FinTime>,
    pub channel: Option<String>,
    pub trace: bool,
}

fn describe(s: &StepCert) -> String {
    match &s.rule {
        StepRule::Frame { inner, .. } => describe(inner),
        StepRule::Comm { send, .. } => format!("comm  {}", send.action),
        StepRule::Fwd { target, forwarder, .. } => format!("fwd   {forwarder} takes over {target}"),
        StepRule::Obj { provider, .. } => format!("local {provider}"),
    }
}

fn fresh_chan(base: &str, used: &mut std::collections::BTreeSet<Channel>) -> Channel {
    let mut c = Channel::new(base);
    let mut k = 1;
    while used.contains(&c) {
        c = Channel::new(&format!("{base}_{k}"));
        k += 1;
    }
    used.insert(c.clone());
    c
}

/// A closed process from the spec file, at its default valuation.
fn closed_proc(spec: &SpecFile, name: &str) -> Result<(Derivation, Valuation), Report> {
    let d = spec.proc_named(name).ok_or_else(|| Report::bad(format!("no process `{name}`")))?;
    let der = derive(d).map_err(|r| Report::new(FAIL, format!("FAIL  {name}\n{r}\n")))?;
    let val = default_valuation(&d.hypset()).map_err(Report::bad)?;
    Ok((der, val))
}

/// Runs a directive with the earliest-enabled scheduler.
pub fn run(src: &str, opts: &RunOpts, default_horizon: FinTime) -> Report {
    let spec = match parse_spec(src) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let runs: Vec<_> = spec.runs().collect();
    let rd = match &opts.run {
        None => runs.first().copied(),
        Some(k) => match k.parse::<usize>() {
            Ok(i) => runs.get(i).copied(),
            Err(_) => runs.iter().copied().find(|r| &r.target == k),
        },
    };
    let Some(rd) = rd else { return Report::bad("no such run directive") };
    let horizon = opts.horizon.or(rd.horizon).unwrap_or(default_horizon);
    let (der, val) = match closed_proc(&spec, &rd.target) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let j = match close_judgment(&der, &val) {
        Ok(j) => j,
        Err(e) => return Report::bad(e),
    };

    let mut used = j.term.channels();
    let a = fresh_chan(opts.channel.as_deref().or(rd.channel.as_deref()).unwrap_or("a"), &mut used);
    let mut cfg = Configuration::empty();
    let mut subst = Subst::new();
    for x in j.ctx.keys() {
        let Some((_, prov)) = rd.with.iter().find(|(y, _)| y == x) else {
            return Report::bad(format!("no provider for `{x}`"));
        };
        let c = fresh_chan(x, &mut used);
        let obj = match prov {
            Provider::Beacon(w) => beacon_obj(*w),
            Provider::Proc(name) => {
                let (pd, pv) = match closed_proc(&spec, name) {
                    Ok(x) => x,
                    Err(r) => return r,
                };
                match close_judgment(&pd, &pv) {
                    Ok(pj) if pj.ctx.is_empty() => closed_obj(pj.term),
                    Ok(_) => return Report::bad(format!("provider `{name}` is not closed")),
                    Err(e) => return Report::bad(e),
                }
            }
        };
        cfg.insert(proc(&c, &obj));
        subst.insert(x.clone(), c);
    }
    let root = closed_obj(j.term.subst(&subst));
    cfg.insert(proc(&a, &root));

    let mut out = String::new();
    writeln!(out, "run {} on {a} from {} to {horizon}", rd.target, j.time).unwrap();
    let r = match schedule(&cfg, j.time, horizon) {
        Ok(r) => r,
        Err(e) => return Report::new(FAIL, format!("{out}error: {e}\n")),
    };
    for n in &r.sigma.nodes {
        match n {
            MsNode::StepC { step } => writeln!(out, "{:>5}  {}", step.time, describe(step)).unwrap(),
            MsNode::StepT { from, to, .. } => writeln!(out, "{:>5}  idle  until {to}", from).unwrap(),
        }
    }
    let (last, t_end) = &r.sigma.last;
    writeln!(out, "{t_end:>5}  now   {}", crate::lts::show_cfg(last)).unwrap();

    let artifact = if opts.trace {
        let hole = Channel::hole();
        match ct_of_run(r.sigma.rename(&a, &hole), Inf) {
            Ok(w) => Some(ct_to_json(&w)),
            Err(e) => return Report::bad(format!("trace: {e}")),
        }
    } else {
        None
    };

    let code = match &j.ty {
        SessionType::One(tp) => {
            let sim = match simulate(&cfg, j.time, horizon) {
                Ok(s) => s,
                Err(e) => return Report::new(FAIL, format!("{out}error: {e}\n")),
            };
            let allowed = |t: FinTime| tp.pred.holds_at(&tp.binder, t) == Some(true);
            let fires = (j.time..=horizon).find(|&t| allowed(t) && can_close(&sim[(t - j.time) as usize], &a, t));
            match fires {
                Some(t) => {
                    writeln!(out, "{a} can close at {t}").unwrap();
                    PASS
                }
                None => match tp.onsets_from(horizon + 1).first() {
                    Some(o) => {
                        writeln!(out, "inconclusive: {a} may close at {o}, past the horizon").unwrap();
                        INCONCLUSIVE
                    }
                    None => {
                        writeln!(out, "stuck: {a} cannot close at any allowed instant").unwrap();
                        FAIL
                    }
                },
            }
        }
        _ => match r.pending {
            Some(p) => {
                writeln!(out, "inconclusive: next event at {p}, past the horizon").unwrap();
                INCONCLUSIVE
            }
            None => PASS,
        },
    };
    Report { code, out, artifact }
}

fn pick<'a>(spec: &'a SpecFile, name: Option<&str>) -> Result<&'a ProcDef, Report> {
    match name {
        Some(n) => spec.proc_named(n).ok_or_else(|| Report::bad(format!("no process `{n}`"))),
        None => {
            let all: Vec<_> = spec.procs().collect();
            match all.as_slice() {
                [d] => Ok(d),
                _ => Err(Report::bad("several processes; pick one with --proc")),
            }
        }
    }
}

/// The witness certificate of one process, as JSON.
pub fn witness(src: &str, name: Option<&str>, val: Option<&Valuation>, b: &CheckBudget) -> Report {
    let spec = match parse_spec(src) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let d = match pick(&spec, name) {
        Ok(d) => d,
        Err(r) => return r,
    };
    let der = match derive(d) {
        Ok(x) => x,
        Err(r) => return Report::new(FAIL, format!("FAIL  {}\n{r}\n", d.name)),
    };
    let val = match val {
        Some(v) => v.clone(),
        None => match default_valuation(&d.hypset()) {
            Ok(v) => v,
            Err(e) => return Report::bad(e),
        },
    };
    match ftlr_witness(&der, &val, None, b) {
        Ok(w) => Report::new(PASS, ct_to_json(&w.w)),
        Err(e) => Report::new(FAIL, format!("error: {e}\n")),
    }
}

fn read_cert(json: &str) -> Result<crate::trajectory::Ct, Report> {
    ct_from_json(json, &ObjReader::default()).map_err(|e| match e {
        CertError::Json(_) => Report::bad(e),
        e => Report::new(FAIL, format!("fail: {e}\n")),
    })
}

/// Re-checks a certificate at `probes` fresh names.
pub fn validate(json: &str, probes: u64) -> Report {
    let w = match read_cert(json) {
        Ok(w) => w,
        Err(r) => return r,
    };
    match check_ct(&w, &probes_for(&w, probes)) {
        Ok(Ok(())) => Report::new(PASS, format!("valid on [{}, {}) with {probes} probes\n", w.lo, w.hi)),
        Ok(Err(m)) => Report::new(FAIL, format!("fail: {m}\n")),
        Err(e) => Report::new(FAIL, format!("fail: {e}\n")),
    }
}

/// Membership of a certified trajectory in a type.
pub fn semcheck(json: &str, ty: &str, env: &Aliases, time: Option<FinTime>, mode: Mode, b: &CheckBudget) -> Report {
    let w = match read_cert(json) {
        Ok(w) => w,
        Err(r) => return r,
    };
    let ty = match parse_type_in(ty, env) {
        Ok(t) => t,
        Err(e) => return Report::bad(format!("type: {e}")),
    };
    if !ty.free_vars().is_empty() {
        return Report::bad(format!("type {ty} is not closed"));
    }
    let t = time.unwrap_or(w.lo);
    let v = Checker::new(*b).term_member(&w, &ty, t, mode);
    Report::verdict(format!("{ty} {mode} at {t}: "), &v)
}

/// Every process: witness, membership, adequacy for closed units, and
/// the closure properties.
pub fn semcheck_spec(src: &str, name: Option<&str>, b: &CheckBudget) -> Report {
    let spec = match parse_spec(src) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let procs: Vec<&ProcDef> = match name {
        Some(_) => match pick(&spec, name) {
            Ok(d) => vec![d],
            Err(r) => return r,
        },
        None => spec.procs().collect(),
    };
    let mut out = String::new();
    let mut total = Verdict::Pass;
    for d in procs {
        let v = semcheck_one(d, b);
        writeln!(out, "{:<5} {}: {v}", ["ok", "FAIL", "?"][v.code() as usize], d.name).unwrap();
        total = total.and(v);
    }
    Report::new(total.code(), out)
}

fn semcheck_one(d: &ProcDef, b: &CheckBudget) -> Verdict {
    let der = match derive(d) {
        Ok(x) => x,
        Err(r) => return Verdict::Fail(r),
    };
    let val = match default_valuation(&d.hypset()) {
        Ok(v) => v,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let wit = match ftlr_witness(&der, &val, None, b) {
        Ok(w) => w,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let mut v = wit.check(b).within("membership");
    if matches!(wit.judgment.ty, SessionType::One(_)) && wit.judgment.ctx.is_empty() {
        v = v.and(match adequacy(&der, &val, b) {
            Ok(a) => a.within("adequacy"),
            Err(e) => Verdict::Fail(format!("adequacy: {e}")),
        });
    }
    v.and(closure_tests(&wit.w, &wit.judgment.ty, wit.judgment.time, b))
}

/// `A |> B @ T` (cut) or `A <| B @ T` (forward): the syntactic judgment
/// with its obligations, then the semantic check on a reference provider.
pub fn retype(query: &str, env: &Aliases, b: &CheckBudget) -> Report {
    let q = match parse_retype_query(query, env) {
        Ok(q) => q,
        Err(e) => return Report::bad(format!("parse error at {e}")),
    };
    let h = HypSet::new();
    let res = if q.cut { retype_cut(&h, &q.left, &q.right, &q.time) } else { retype_fwd(&h, &q.left, &q.right, &q.time) };
    let mut out = String::new();
    let obs = match res {
        Ok(obs) => obs,
        Err(e) => return Report::new(FAIL, format!("does not retype: {e}\n")),
    };
    for o in &obs {
        writeln!(out, "{}  {o}", if o.holds() { "holds" } else { "FAILS" }).unwrap();
    }
    if obs.iter().any(|o| !o.holds()) {
        return Report::new(FAIL, out);
    }
    let Some(t) = q.time.as_lit() else {
        out.push_str("retypes; semantic check needs a literal time\n");
        return Report::new(PASS, out);
    };
    if !(q.left.free_vars().is_empty() && q.right.free_vars().is_empty()) {
        out.push_str("retypes; semantic check needs closed types\n");
        return Report::new(PASS, out);
    }
    let w = match ct_run(&NamelessConfig::lone(canon_provider(t, &q.left)), t, b.horizon) {
        Ok(w) => w,
        Err(e) => return Report::new(FAIL, format!("{out}error: {e}\n")),
    };
    let v = semantic_retype_test(q.cut, &q.left, &q.right, t, &w, b);
    Report::verdict(format!("{out}semantic: "), &v)
}

/// Parses `x=3,y=4`.
pub fn parse_valuation(s: &str) -> Result<Valuation, String> {
    let mut v = Valuation::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (x, n) = part.split_once('=').ok_or_else(|| format!("expected `var=value`, got `{part}`"))?;
        let n: u64 = n.trim().parse().map_err(|_| format!("`{}` is not a natural number", n.trim()))?;
        v.insert(crate::types::ident(x.trim()), n);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = "
        proc closer @ 0 :: 1{t | t == 3} = send{t | t == 3}();
        proc client (; ; x : 1{t | t == 3}) @ 0 :: 1{t | t == 5} = recv{3} x(); send{t | t == 5}();
        run client with x = closer;
        run client with x = beacon(2, 6) horizon 4;
    ";

    #[test]
    fn check_and_run() {
        let r = check(SPEC, false);
        assert_eq!(r.code, PASS, "{}", r.out);
        assert!(r.out.contains("ok    client"));
        let r = run(SPEC, &RunOpts { trace: true, ..Default::default() }, 50);
        assert_eq!(r.code, PASS, "{}", r.out);
        assert!(r.out.contains("comm  x!()"), "{}", r.out);
        assert!(r.out.contains("a can close at 5"));
        let v = validate(r.artifact.as_deref().unwrap(), 3);
        assert_eq!(v.code, PASS, "{}", v.out);
        let short = run(SPEC, &RunOpts { run: Some("1".into()), ..Default::default() }, 50);
        assert_eq!(short.code, INCONCLUSIVE, "{}", short.out);
    }

    #[test]
    fn witness_pipeline() {
        let b = CheckBudget::with_horizon(20);
        let w = witness(SPEC, Some("client"), None, &b);
        assert_eq!(w.code, PASS, "{}", w.out);
        assert_eq!(validate(&w.out, 3).code, PASS);
        let s = semcheck(&w.out, "1{t | t == 5}", &Aliases::new(), None, Mode::NoStar, &b);
        assert_eq!(s.code, PASS, "{}", s.out);
        let s = semcheck(&w.out, "1{t | t == 6}", &Aliases::new(), None, Mode::NoStar, &b);
        assert_eq!(s.code, FAIL, "{}", s.out);
        let s = semcheck(&w.out, "1{t | 60 <= t}", &Aliases::new(), None, Mode::NoStar, &b);
        assert_eq!(s.code, INCONCLUSIVE, "{}", s.out);
        let tampered = w.out.replacen("t == 5", "t == 4", 1);
        assert_eq!(validate(&tampered, 3).code, FAIL);
        assert_eq!(validate("{", 3).code, BAD_INPUT);
        assert_eq!(semcheck_spec(SPEC, None, &b).code, PASS);
    }

    #[test]
    fn retype_queries() {
        let b = CheckBudget::with_horizon(20);
        let r = retype("1{t | t <= 10} |> 1{t | t == 4} @ 0", &Aliases::new(), &b);
        assert_eq!(r.code, PASS, "{}", r.out);
        assert!(r.out.ends_with("semantic: pass\n"), "{}", r.out);
        assert_eq!(retype("1{t | t == 4} |> 1{t | t <= 10} @ 0", &Aliases::new(), &b).code, FAIL);
        assert_eq!(retype("1{t | t <= 10} <| 1{t | t == 4} @ 0", &Aliases::new(), &b).code, PASS);
        assert_eq!(retype("1{t | t == 4} <| 1{t | t <= 10} @ 0", &Aliases::new(), &b).code, FAIL);
        assert_eq!(retype("1{t | t == 4} |> @ 0", &Aliases::new(), &b).code, BAD_INPUT);
        assert_eq!(parse_valuation("t0=3, t1 = 4").unwrap().len(), 2);
        assert!(parse_valuation("t0").is_err());
    }
}
