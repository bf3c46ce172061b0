//! Computable trajectories: a nameless trajectory together with, for every
//! provider name, a run that realizes it.
//!
//! The per-channel data is stored once, as a template whose provider is the
//! placeholder channel; evaluating at `a` renames the placeholder to `a`.

use super::*;
use crate::lts::{validate_step, Action, MsNode, Multistep, StepCert};
use crate::time::Inf;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ct {
    pub lo: FinTime,
    pub hi: Time,
    pub start: NamelessConfig,
    pub end: NamelessConfig,
    pub ntraj: NamelessTrajectory,
    pub step_to: FinTime,
    /// Realization at the placeholder channel.
    pub template: Realization,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CtError {
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error(transparent)]
    Traj(#[from] TrajError),
    #[error("endpoint mismatch: {0}")]
    Endpoint(String),
    #[error("step family is not uniform in the channel name")]
    NonUniform,
    #[error("invalid step: {0}")]
    Step(String),
    #[error("probe set must be nonempty and fresh")]
    Probes,
    #[error("placeholder is not a process provider in {0}")]
    Nameless(String),
}

fn abstract_hole(cfg: &Configuration) -> Result<NamelessConfig, CtError> {
    NamelessConfig::abstract_at(cfg, &Channel::hole()).ok_or_else(|| CtError::Nameless(crate::lts::show_cfg(cfg)))
}

impl Ct {
    fn from_template(template: Realization, end_hi: Time) -> Result<Ct, CtError> {
        let s = template.subject();
        let start = abstract_hole(template.sigma.start_cfg())?;
        let end = abstract_hole(template.sigma.end_cfg())?;
        let ntraj = nameless_traj(s)?;
        debug_assert_eq!(s.hi(), end_hi);
        Ok(Ct { lo: s.lo(), hi: s.hi(), start, end, ntraj, step_to: template.sigma.end_time(), template })
    }

    pub fn steps(&self, a: &Channel) -> Multistep {
        self.template.sigma.rename(&Channel::hole(), a)
    }

    pub fn realize(&self, a: &Channel) -> Realization {
        self.template.rename(&Channel::hole(), a)
    }

    /// `w[t]`: the nameless configuration at `t`.
    pub fn sample(&self, t: FinTime) -> Option<&NamelessConfig> {
        self.ntraj.sample(t)
    }

    pub fn channels(&self) -> std::collections::BTreeSet<Channel> {
        let mut s = std::collections::BTreeSet::new();
        for (_, n) in self.ntraj.segments() {
            s.extend(n.channels());
        }
        s.extend(self.start.channels());
        s.extend(self.end.channels());
        for sub in &self.template.subjects {
            for (_, c) in sub.segments() {
                s.extend(crate::lts::cfg_channels(c));
            }
        }
        for n in &self.template.sigma.nodes {
            if let MsNode::StepC { step } = n {
                s.extend(crate::lts::cfg_channels(&step.source));
                s.extend(crate::lts::cfg_channels(&step.target));
            }
        }
        s.remove(&Channel::hole());
        s
    }

    /// Silent steps at `lo` that open the run, and the remainder that starts
    /// after them.
    pub fn split_leading(&self) -> (Vec<StepCert>, Ct) {
        let mut steps = Vec::new();
        let mut k = 0;
        for n in &self.template.sigma.nodes {
            match n {
                MsNode::StepC { step } if step.time == self.lo => {
                    steps.push(step.clone());
                    k += 1;
                }
                _ => break,
            }
        }
        let template = Realization {
            sigma: Multistep { nodes: self.template.sigma.nodes[k..].to_vec(), last: self.template.sigma.last.clone() },
            subjects: self.template.subjects[k..].to_vec(),
        };
        let start = abstract_hole(template.sigma.start_cfg()).expect("run stays rooted at the placeholder");
        (steps, Ct { start, template, ..self.clone() })
    }
}

fn nameless_traj(s: &Trajectory) -> Result<NamelessTrajectory, CtError> {
    let segs = s
        .segments()
        .iter()
        .map(|(t, c)| abstract_hole(c).map(|n| (*t, n)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Traj::from_segments(s.lo(), s.hi(), segs)?)
}

pub fn ct_refl(nc: &NamelessConfig, lo: FinTime, hi: Time) -> Result<Ct, CtError> {
    let r = Realization::refl(nc.instantiate(&Channel::hole()), lo, hi)?;
    Ct::from_template(r, hi)
}

pub fn ct_concat(w1: &Ct, w2: &Ct) -> Result<Ct, CtError> {
    if w1.end != w2.start {
        return Err(CtError::Endpoint(format!("end {} vs start {}", w1.end, w2.start)));
    }
    let r = r_concat(&w1.template, &w2.template)?;
    Ct::from_template(r, w2.hi)
}

/// Restriction to `[lo, t)`. At `t = inf` this is the identity.
pub fn ct_partition_before(w: &Ct, t: Time) -> Result<Ct, CtError> {
    let Fin(t) = t else { return Ok(w.clone()) };
    let (before, _) = r_partition(&w.template, t)?;
    let before = before.ok_or(TrajError::Empty(w.lo, Fin(t)))?;
    Ct::from_template(before, Fin(t))
}

/// Restriction to `[t, hi)`; steps firing exactly at `t` stay in this piece.
pub fn ct_partition_after(w: &Ct, t: FinTime) -> Result<Ct, CtError> {
    let (_, after) = r_partition(&w.template, t)?;
    Ct::from_template(after, w.hi)
}

fn family_template(family: &dyn Fn(&Channel) -> StepCert) -> Result<StepCert, CtError> {
    let hole = Channel::hole();
    let u = family(&hole);
    for k in [1, 2] {
        let p = Channel::probe(k);
        if family(&p) != u.rename(&hole, &p) {
            return Err(CtError::NonUniform);
        }
    }
    if u.action != Action::Eps {
        return Err(CtError::Step("a trajectory step must be silent".into()));
    }
    crate::lts::check_step(&u).map_err(CtError::Step)?;
    Ok(u)
}

/// A single silent step at `T`, then idle until `hi`.
pub fn ct_step(family: &dyn Fn(&Channel) -> StepCert, hi: Time) -> Result<Ct, CtError> {
    let u = family_template(family)?;
    let tail = Realization::refl(u.target.clone(), u.time, hi)?;
    let mut sigma = tail.sigma.clone();
    sigma.nodes.insert(0, MsNode::StepC { step: u });
    let r = Realization { sigma, subjects: vec![tail.subject().clone(), tail.subject().clone()] };
    Ct::from_template(r, hi)
}

/// Prefixes `w` with a silent step that ends in `w`'s start at `w.lo`.
pub fn ct_cons(family: &dyn Fn(&Channel) -> StepCert, w: &Ct) -> Result<Ct, CtError> {
    let u = family_template(family)?;
    if u.time != w.lo || u.target != w.start.instantiate(&Channel::hole()) {
        return Err(CtError::Endpoint("step does not lead into the trajectory".into()));
    }
    let mut t = w.template.clone();
    t.sigma.nodes.insert(0, MsNode::StepC { step: u });
    t.subjects.insert(0, w.template.subject().clone());
    Ct::from_template(t, w.hi)
}

/// The computable trajectory of a run of the placeholder-rooted
/// configuration, idle from the run's end up to `hi`. Steps taken at one
/// instant may pass through configurations that are not rooted at the
/// placeholder; only the value at the end of each instant is sampled.
pub fn ct_of_run(sigma: Multistep, hi: Time) -> Result<Ct, CtError> {
    crate::lts::check_multistep(&sigma).map_err(CtError::Step)?;
    let mut segs: Vec<(FinTime, Configuration)> = sigma
        .nodes
        .iter()
        .filter_map(|n| match n {
            MsNode::StepT { cfg, from, .. } => Some((*from, cfg.clone())),
            MsNode::StepC { .. } => None,
        })
        .collect();
    segs.push((sigma.last.1, sigma.last.0.clone()));
    let lo = sigma.start_time();
    let subject = Traj::from_segments(lo, hi, segs)?;
    let r = Realization::from_run(sigma, &subject)?;
    Ct::from_template(r, hi)
}

fn complementary(recv: &StepCert, send: &StepCert) -> Result<(), CtError> {
    use crate::lts::Dir;
    match (&recv.action, &send.action) {
        (Action::Dir(a, Dir::Recv, p), Action::Dir(b, Dir::Send, q)) if a == b && p == q && recv.time == send.time => {
            Ok(())
        }
        _ => Err(CtError::Step(format!("{} and {} are not complementary", recv.action, send.action))),
    }
}

/// The rooted side receives (`u1`), a named configuration sends (`u2`).
pub fn ct_comm_recv(u1: &dyn Fn(&Channel) -> StepCert, u2: &StepCert, hi: Time) -> Result<Ct, CtError> {
    complementary(&u1(&Channel::hole()), u2)?;
    if !validate_step(u2) {
        return Err(CtError::Step("sender step does not validate".into()));
    }
    ct_step(&|a| StepCert::comm(u2.clone(), u1(a)), hi)
}

/// The rooted side sends (`u1`), a named configuration receives (`u2`).
pub fn ct_comm_send(u1: &dyn Fn(&Channel) -> StepCert, u2: &StepCert, hi: Time) -> Result<Ct, CtError> {
    complementary(u2, &u1(&Channel::hole()))?;
    if !validate_step(u2) {
        return Err(CtError::Step("receiver step does not validate".into()));
    }
    ct_step(&|a| StepCert::comm(u1(a), u2.clone()), hi)
}

pub fn ct_frame(w: &Ct, frame: &Configuration) -> Result<Ct, CtError> {
    let r = r_frame(&w.template, frame)?;
    Ct::from_template(r, w.hi)
}

/// `w` named at `a`, next to an idle nameless configuration that keeps the root.
pub fn ct_frame_nameless(w: &Ct, nc: &NamelessConfig, a: &Channel) -> Result<Ct, CtError> {
    ct_interleave(w, &ct_refl(nc, w.lo, w.hi)?, a)
}

/// Pointwise `w1[t][a] ⊎ w2[t]`; the root comes from `w2`.
pub fn ct_interleave(w1: &Ct, w2: &Ct, a: &Channel) -> Result<Ct, CtError> {
    if w1.lo != w2.lo || w1.hi != w2.hi {
        return Err(TrajError::Interval(format!("[{}, {}) vs [{}, {})", w1.lo, w1.hi, w2.lo, w2.hi)).into());
    }
    let r = r_interleave(&w1.realize(a), &w2.template)?;
    Ct::from_template(r, w2.hi)
}

/// Checks the invariants at each probe channel.
pub fn validate_ct(w: &Ct, probes: &[Channel]) -> Result<bool, CtError> {
    Ok(check_ct(w, probes)?.is_ok())
}

/// Like `validate_ct`, with a reason on failure.
pub fn check_ct(w: &Ct, probes: &[Channel]) -> Result<Result<(), String>, CtError> {
    if probes.is_empty() {
        return Err(CtError::Probes);
    }
    let names = w.channels();
    if probes.iter().any(|p| names.contains(p) || *p == Channel::hole()) {
        return Err(CtError::Probes);
    }
    Ok(check_ct_inner(w, probes))
}

fn check_ct_inner(w: &Ct, probes: &[Channel]) -> Result<(), String> {
    if !Fin(w.lo).lt(w.hi) {
        return Err("empty interval".into());
    }
    if w.hi.lt(Fin(w.step_to)) {
        return Err("run ends after the interval".into());
    }
    if w.ntraj.lo() != w.lo || w.ntraj.hi() != w.hi {
        return Err("trajectory interval differs".into());
    }
    for a in probes {
        let r = w.realize(a);
        if r.sigma.start() != (&w.start.instantiate(a), w.lo) {
            return Err(format!("at {a}: run does not start at the start configuration"));
        }
        if r.sigma.last != (w.end.instantiate(a), w.step_to) {
            return Err(format!("at {a}: run does not end at the end configuration"));
        }
        check_realization(&r).map_err(|e| format!("at {a}: {e}"))?;
        if r.subject() != &w.ntraj.instantiate(a) {
            return Err(format!("at {a}: realized trajectory differs from the nameless one"));
        }
    }
    Ok(())
}

/// Fresh probe names for `w`.
pub fn probes_for(w: &Ct, n: u64) -> Vec<Channel> {
    let names = w.channels();
    (1..).map(Channel::probe).filter(|p| !names.contains(p)).take(n as usize).collect()
}

/// A constant trajectory to infinity.
pub fn ct_const_inf(nc: &NamelessConfig, lo: FinTime) -> Ct {
    ct_refl(nc, lo, Inf).expect("nonempty interval")
}
