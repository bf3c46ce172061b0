//! The logical relation as a bounded, three-valued membership checker.

use super::canon::canon_provider;
use super::run::{can_close, ct_run, RunError};
use crate::beacon::{beacon_obj, Window};
use crate::lts::{
    enabled_steps, enabled_steps_with, Action, Channel, Configuration, Dir, EnumOpts, Fresh, NamelessConfig,
    Payload, Sel,
};
use crate::time::FinTime;
use crate::trajectory::Ct;
use crate::types::{Conn, SessionType, TExpr};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Client (`Star`) or provider (`NoStar`) reading of a type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Star,
    NoStar,
}

impl Mode {
    pub fn invert(self) -> Mode {
        match self {
            Mode::Star => Mode::NoStar,
            Mode::NoStar => Mode::Star,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Star => "*",
            Mode::NoStar => "-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckBudget {
    /// Last instant examined.
    pub horizon: FinTime,
    /// Fresh names the root is probed at.
    pub probes: u64,
    /// Candidate inputs tried per `-o`.
    pub input_families: usize,
    /// Nesting bound on value/term alternation.
    pub depth: usize,
}

impl Default for CheckBudget {
    fn default() -> Self {
        CheckBudget { horizon: 50, probes: 3, input_families: 3, depth: 8 }
    }
}

impl CheckBudget {
    pub fn with_horizon(horizon: FinTime) -> Self {
        CheckBudget { horizon, ..Default::default() }
    }
}

/// `Fail` is a definite counterexample within the budget; `Inconclusive`
/// names an obligation the budget did not reach.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
    Inconclusive(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    /// Conjunction: a failure wins, then an unchecked obligation.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (f @ Verdict::Fail(_), _) | (_, f @ Verdict::Fail(_)) => f,
            (i @ Verdict::Inconclusive(_), _) | (_, i @ Verdict::Inconclusive(_)) => i,
            _ => Verdict::Pass,
        }
    }

    /// Disjunction: a pass wins, then an unchecked obligation.
    pub fn or(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Pass, _) | (_, Verdict::Pass) => Verdict::Pass,
            (i @ Verdict::Inconclusive(_), _) | (_, i @ Verdict::Inconclusive(_)) => i,
            (f, _) => f,
        }
    }

    pub fn all(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut acc = Verdict::Pass;
        for v in vs {
            acc = acc.and(v);
            if acc.is_fail() {
                break;
            }
        }
        acc
    }

    pub fn within(self, ctx: impl fmt::Display) -> Verdict {
        match self {
            Verdict::Pass => Verdict::Pass,
            Verdict::Fail(m) => Verdict::Fail(format!("{ctx}: {m}")),
            Verdict::Inconclusive(m) => Verdict::Inconclusive(format!("{ctx}: {m}")),
        }
    }

    /// 0 pass, 1 fail, 2 inconclusive.
    pub fn code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail(_) => 1,
            Verdict::Inconclusive(_) => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail(m) => write!(f, "fail: {m}"),
            Verdict::Inconclusive(m) => write!(f, "inconclusive: {m}"),
        }
    }
}

fn run_failed(e: RunError) -> Verdict {
    Verdict::Inconclusive(format!("run: {e}"))
}

/// The processes reachable from the provider of `c`, and everything else.
pub fn split_at(cfg: &Configuration, c: &Channel) -> (Configuration, Configuration) {
    let mut reach: BTreeSet<Channel> = [c.clone()].into_iter().collect();
    let mut mine = vec![false; cfg.len()];
    let procs = cfg.to_vec();
    loop {
        let mut grew = false;
        for (i, p) in procs.iter().enumerate() {
            if !mine[i] && reach.contains(p.provider()) {
                mine[i] = true;
                grew = true;
                reach.extend(p.channels());
            }
        }
        if !grew {
            break;
        }
    }
    let (a, b): (Vec<_>, Vec<_>) = procs.into_iter().zip(mine).partition(|(_, m)| *m);
    (
        Configuration::from_vec(a.into_iter().map(|(p, _)| p).collect()),
        Configuration::from_vec(b.into_iter().map(|(p, _)| p).collect()),
    )
}

type Key = (NamelessConfig, SessionType, FinTime, Mode);

/// Memoizing checker for one budget.
pub struct Checker {
    pub budget: CheckBudget,
    memo: HashMap<Key, Verdict>,
}

impl Checker {
    pub fn new(budget: CheckBudget) -> Self {
        Checker { budget, memo: HashMap::new() }
    }

    fn probes(&self, nc: &NamelessConfig) -> Vec<Channel> {
        let used = nc.channels();
        (0..).map(Channel::probe).filter(|c| !used.contains(c)).take(self.budget.probes.max(1) as usize).collect()
    }

    pub fn value_member(&mut self, nc: &NamelessConfig, ty: &SessionType, t: FinTime, d: Mode) -> Verdict {
        self.value_at(nc, ty, t, d, self.budget.depth)
    }

    pub fn term_member(&mut self, w: &Ct, ty: &SessionType, t: FinTime, d: Mode) -> Verdict {
        self.term_at(w, ty, t, d, self.budget.depth)
    }

    fn term_at(&mut self, w: &Ct, ty: &SessionType, t: FinTime, d: Mode, depth: usize) -> Verdict {
        let tp = ty.tpred();
        let h = self.budget.horizon;
        let mut acc = Verdict::Pass;
        for t2 in 0..=h {
            if tp.pred.holds_at(&tp.binder, t2) != Some(true) {
                continue;
            }
            if t2 < t {
                match d {
                    Mode::Star => continue,
                    Mode::NoStar => {
                        return Verdict::Fail(format!("{ty} {d} at {t}: allowed instant {t2} precedes {t}"));
                    }
                }
            }
            let Some(nc) = w.sample(t2) else {
                return Verdict::Fail(format!("{ty} {d} at {t}: trajectory undefined at {t2}"));
            };
            let nc = nc.clone();
            acc = acc.and(self.value_at(&nc, ty, t2, d, depth).within(format!("{} {d} at {t2}", ty.conn_name())));
            if acc.is_fail() {
                return acc;
            }
        }
        if let Some(o) = tp.onsets_from(h + 1).first() {
            acc = acc.and(Verdict::Inconclusive(format!("{ty} holds beyond horizon {h}, first unchecked instant {o}")));
        }
        acc
    }

    fn value_at(&mut self, nc: &NamelessConfig, ty: &SessionType, t: FinTime, d: Mode, depth: usize) -> Verdict {
        if depth == 0 {
            return Verdict::Inconclusive(format!("depth budget exhausted at {ty}"));
        }
        let key = (nc.clone(), ty.clone(), t, d);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let probes = self.probes(nc);
        let a = &probes[0];
        let mut v = self.clause(nc, a, ty, t, d, depth);
        if !v.is_fail() {
            v = v.and(uniform(nc, &probes, t));
        }
        self.memo.insert(key, v.clone());
        v
    }

    fn clause(&mut self, nc: &NamelessConfig, a: &Channel, ty: &SessionType, t: FinTime, d: Mode, depth: usize) -> Verdict {
        let cfg = nc.instantiate(a);
        let (conn, a1, a2) = match ty {
            SessionType::One(_) => {
                return if can_close(&cfg, a, t) {
                    Verdict::Pass
                } else {
                    Verdict::Fail(format!("no {a}!() step to an empty configuration at {t}"))
                };
            }
            SessionType::Bin(conn, ..) => {
                let (a1, a2) = ty.parts_at(&TExpr::lit(t)).expect("binary type");
                (*conn, a1, a2)
            }
        };
        let steps = enabled_steps(&cfg, t);
        let on = |dir: Dir, p: &Payload| Action::Dir(a.clone(), dir, p.clone());
        match conn {
            Conn::Tensor => {
                let mut acc = Verdict::Fail(format!("no {a}!c step at {t}"));
                for s in &steps {
                    let Action::Dir(b, Dir::Send, Payload::Chan(c)) = &s.action else { continue };
                    if b != a {
                        continue;
                    }
                    let (mine, rest) = split_at(&s.target, c);
                    let (Some(n1), Some(n2)) = (NamelessConfig::abstract_at(&mine, c), NamelessConfig::abstract_at(&rest, a))
                    else {
                        acc = acc.or(Verdict::Fail(format!("{a}!{c} at {t}: target does not split")));
                        continue;
                    };
                    let v = self
                        .cont(&n1, &a1, t, d, depth)
                        .within(format!("sent {c}"))
                        .and(self.cont(&n2, &a2, t, d, depth).within("continuation"));
                    acc = acc.or(v.within(format!("{a}!{c} at {t}")));
                    if acc.is_pass() {
                        break;
                    }
                }
                acc
            }
            Conn::Lolli => {
                let inputs = self.inputs(&a1, t, d.invert());
                if inputs.is_empty() {
                    return Verdict::Inconclusive(format!("no admissible input of {a1} at {t}"));
                }
                let mut acc = Verdict::Pass;
                for (label, w1, known) in inputs {
                    let mut fresh = Fresh::starting_after(&cfg);
                    for ch in w1.start.channels() {
                        fresh.avoid(&ch);
                    }
                    let c = fresh.next();
                    let opts = EnumOpts { fresh_floor: fresh.floor(), extra_payloads: vec![c.clone()] };
                    let want = on(Dir::Recv, &Payload::Chan(c.clone()));
                    let mut v = Verdict::Fail(format!("no {a}?{c} step at {t}"));
                    for s in enabled_steps_with(&cfg, t, &opts).into_iter().filter(|s| s.action == want) {
                        let joined = s.target.union(&w1.start.instantiate(&c));
                        let Some(n2) = NamelessConfig::abstract_at(&joined, a) else { continue };
                        v = v.or(self.cont(&n2, &a2, t, d, depth));
                        if v.is_pass() {
                            break;
                        }
                    }
                    // a failure against an input not known to be admissible proves nothing
                    if let (Verdict::Fail(_), Verdict::Inconclusive(why)) = (&v, &known) {
                        v = Verdict::Inconclusive(why.clone());
                    }
                    acc = acc.and(v.within(format!("input {label} as {c}")));
                    if acc.is_fail() {
                        break;
                    }
                }
                acc
            }
            Conn::With | Conn::Plus => {
                let dir = if conn == Conn::With { Dir::Recv } else { Dir::Send };
                let mut per_branch = Vec::new();
                for (sel, ai) in [(Sel::P1, &a1), (Sel::P2, &a2)] {
                    let want = on(dir, &Payload::Sel(sel));
                    let mut v = Verdict::Fail(format!("no {want} step at {t}"));
                    for s in steps.iter().filter(|s| s.action == want) {
                        let Some(n2) = NamelessConfig::abstract_at(&s.target, a) else { continue };
                        v = v.or(self.cont(&n2, ai, t, d, depth));
                        if v.is_pass() {
                            break;
                        }
                    }
                    per_branch.push(v.within(format!("{want}")));
                }
                let [v1, v2]: [Verdict; 2] = per_branch.try_into().expect("two branches");
                if conn == Conn::With {
                    v1.and(v2)
                } else {
                    v1.or(v2)
                }
            }
        }
    }

    fn cont(&mut self, nc: &NamelessConfig, ty: &SessionType, t: FinTime, d: Mode, depth: usize) -> Verdict {
        match ct_run(nc, t, self.budget.horizon) {
            Ok(w) => self.term_at(&w, ty, t, d, depth - 1),
            Err(e) => run_failed(e),
        }
    }

    /// Candidate inhabitants of `ty` at `t` in mode `d`: a reference
    /// provider, and beacons at the first allowed instants when `ty` is a
    /// unit. Candidates that fail are dropped; the rest keep their verdict.
    pub fn inputs(&mut self, ty: &SessionType, t: FinTime, d: Mode) -> Vec<(String, Ct, Verdict)> {
        let mut cands = vec![(format!("canon {ty}"), NamelessConfig::lone(canon_provider(t, ty)))];
        if let SessionType::One(tp) = ty {
            let mut onsets = tp.onsets_from(t).into_iter();
            while cands.len() < self.budget.input_families {
                let Some(o) = onsets.next() else { break };
                let w = Window::new(o, Some(o));
                cands.push((w.to_string(), NamelessConfig::lone(beacon_obj(w))));
            }
        }
        let mut out = Vec::new();
        for (label, nc) in cands.into_iter().take(self.budget.input_families.max(1)) {
            let Ok(w) = ct_run(&nc, t, self.budget.horizon) else { continue };
            let v = self.term_member(&w, ty, t, d);
            if !v.is_fail() {
                out.push((label, w, v));
            }
        }
        out
    }
}

/// The visible steps at each probe are renamings of each other.
fn uniform(nc: &NamelessConfig, probes: &[Channel], t: FinTime) -> Verdict {
    let shape = |a: &Channel| -> BTreeSet<(Action, Configuration)> {
        let cfg = nc.instantiate(a);
        enabled_steps(&cfg, t)
            .into_iter()
            .filter(|s| matches!(&s.action, Action::Dir(b, ..) if b == a))
            .map(|s| {
                let hole = Channel::hole();
                (s.action.rename(a, &hole), crate::lts::rename_cfg(&s.target, a, &hole))
            })
            .collect()
    };
    let first = shape(&probes[0]);
    for p in &probes[1..] {
        if shape(p) != first {
            return Verdict::Fail(format!("behaviour at {p} differs from {}", probes[0]));
        }
    }
    Verdict::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::AtomicProc;
    use crate::proc::closed_obj;
    use crate::syntax::{parse_term, parse_type};
    use crate::trajectory::ct_refl;
    use crate::time::Inf;

    fn nc(s: &str) -> NamelessConfig {
        NamelessConfig::lone(closed_obj(parse_term(s).unwrap()))
    }

    fn ty(s: &str) -> SessionType {
        parse_type(s).unwrap()
    }

    #[test]
    fn unit_values() {
        let mut ck = Checker::new(CheckBudget::with_horizon(10));
        let p = nc("send{t | t == 3}()");
        let a = ty("1{t | t == 3}");
        assert_eq!(ck.value_member(&p, &a, 3, Mode::NoStar), Verdict::Pass);
        assert!(ck.value_member(&p, &a, 2, Mode::NoStar).is_fail());
        let w = ct_refl(&p, 0, Inf).unwrap();
        assert_eq!(ck.term_member(&w, &a, 0, Mode::NoStar), Verdict::Pass);
        assert_eq!(ck.term_member(&w, &ty("1{t | t == 3 && t == 4}"), 0, Mode::NoStar), Verdict::Pass);
        let late = ck.term_member(&w, &ty("1{t | 100 <= t}"), 0, Mode::NoStar);
        assert!(matches!(late, Verdict::Inconclusive(ref m) if m.contains("first unchecked instant 100")), "{late}");
    }

    #[test]
    fn provider_must_not_allow_the_past() {
        let mut ck = Checker::new(CheckBudget::with_horizon(10));
        let w = ct_refl(&nc("send{t | true}()"), 0, Inf).unwrap();
        let a = ty("1{t | true}");
        assert_eq!(ck.term_member(&w, &a, 0, Mode::NoStar), Verdict::Inconclusive("1{t | true} holds beyond horizon 10, first unchecked instant 11".into()));
        assert!(ck.term_member(&w, &a, 4, Mode::NoStar).is_fail());
        assert!(!ck.term_member(&w, &a, 4, Mode::Star).is_fail());
    }

    #[test]
    fn with_needs_both_branches() {
        let mut ck = Checker::new(CheckBudget::with_horizon(10));
        let a = ty("1{s | s == 4} &{t | t == 2} 1{s | s == 4}");
        let both = nc("case{t | t == 2}(pi1 => send{s | s == 4}() | pi2 => send{s | s == 4}())");
        assert_eq!(ck.value_member(&both, &a, 2, Mode::NoStar), Verdict::Pass);
        let plus = ty("1{s | s == 4} +{t | t == 2} 1{s | s == 4}");
        let left = nc("select{t | t == 2}(pi1); send{s | s == 4}()");
        assert_eq!(ck.value_member(&left, &plus, 2, Mode::NoStar), Verdict::Pass);
        // a selector is not a brancher
        let v = ck.value_member(&left, &a, 2, Mode::NoStar);
        assert!(matches!(v, Verdict::Fail(ref m) if m.contains("pi1")), "{v}");
    }

    #[test]
    fn tensor_and_lolli() {
        let mut ck = Checker::new(CheckBudget::with_horizon(12));
        let a = ty("1{s | s == 5} *{t | t == 1} 1{s | s == 6}");
        let p = nc("send{t | t == 1}(send{s | s == 5}()); send{s | s == 6}()");
        let w = ct_refl(&p, 0, Inf).unwrap();
        assert_eq!(ck.term_member(&w, &a, 0, Mode::NoStar), Verdict::Pass);
        let bad = ty("1{s | s == 5} *{t | t == 1} 1{s | s == 7}");
        assert!(ck.term_member(&w, &bad, 0, Mode::NoStar).is_fail());

        let l = ty("1{s | s == 3} -o{t | t == 1} 1{s | s == 6}");
        let q = nc("recv{t | t == 1}(y => recv{3} y(); send{s | s == 6}())");
        let w = ct_refl(&q, 0, Inf).unwrap();
        assert_eq!(ck.term_member(&w, &l, 0, Mode::NoStar), Verdict::Pass);
        // waits at the wrong instant
        let q = nc("recv{t | t == 1}(y => recv{4} y(); send{s | s == 6}())");
        let w = ct_refl(&q, 0, Inf).unwrap();
        assert!(ck.term_member(&w, &l, 0, Mode::NoStar).is_fail());
    }

    #[test]
    fn split_follows_usage() {
        let x = Channel::new("x");
        let y = Channel::new("y");
        let a = Channel::new("a");
        let o = |s: &str| closed_obj(parse_term(s).unwrap());
        let cfg = Configuration::from_vec(vec![
            AtomicProc::Proc(x.clone(), o("recv{2} 'y(); send{t | true}()")),
            AtomicProc::Proc(y.clone(), o("send{t | t == 2}()")),
            AtomicProc::Proc(a.clone(), o("recv{3} 'x(); send{t | true}()")),
        ]);
        let (mine, rest) = split_at(&cfg, &x);
        assert_eq!(mine.len(), 2);
        assert_eq!(rest.len(), 1);
    }
}
