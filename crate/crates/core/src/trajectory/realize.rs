//! Realization certificates: a trajectory paired with a multistep that
//! produces it.
//!
//! The certificate mirrors the multistep: node `i` of `sigma` is matched by
//! `subjects[i]` (`RStepT` for an idle node, `RStepC` for a silent step) and the
//! closing `Refl` by the last subject (`RRefl`).

use super::*;
use crate::lts::{
    check_multistep, ms_concat, ms_frame, ms_interleave, MsError, MsNode, Multistep,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub sigma: Multistep,
    pub subjects: Vec<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RealizeError {
    #[error(transparent)]
    Traj(#[from] TrajError),
    #[error(transparent)]
    Ms(#[from] MsError),
    #[error("not composable: {0}")]
    Compose(String),
}

/// Per-node rule tag, as used in the text format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RRule {
    Refl,
    StepT,
    StepC,
}

impl Realization {
    /// RRefl: the constant trajectory on `[t, hi)` with the reflexive run.
    pub fn refl(cfg: Configuration, t: FinTime, hi: Time) -> Result<Self, RealizeError> {
        let s = Traj::constant(cfg.clone(), t, hi)?;
        Ok(Realization { sigma: Multistep::refl(cfg, t), subjects: vec![s] })
    }

    /// Pairs `sigma` with `subject`, giving each node the restriction of the
    /// subject from the node's entry time. Callers validate the result.
    pub fn from_run(sigma: Multistep, subject: &Trajectory) -> Result<Self, RealizeError> {
        let mut subjects = Vec::with_capacity(sigma.nodes.len() + 1);
        let mut cache: Option<(FinTime, Trajectory)> = None;
        let entries = sigma
            .nodes
            .iter()
            .map(|n| match n {
                MsNode::StepT { from, .. } => *from,
                MsNode::StepC { step } => step.time,
            })
            .chain(std::iter::once(sigma.last.1));
        for t in entries {
            let s = match &cache {
                Some((t0, s)) if *t0 == t => s.clone(),
                _ => {
                    let s = subject.partition_after(t)?;
                    cache = Some((t, s.clone()));
                    s
                }
            };
            subjects.push(s);
        }
        Ok(Realization { sigma, subjects })
    }

    pub fn subject(&self) -> &Trajectory {
        &self.subjects[0]
    }

    pub fn rules(&self) -> Vec<RRule> {
        let mut v: Vec<RRule> = self
            .sigma
            .nodes
            .iter()
            .map(|n| match n {
                MsNode::StepT { .. } => RRule::StepT,
                MsNode::StepC { .. } => RRule::StepC,
            })
            .collect();
        v.push(RRule::Refl);
        v
    }

    pub fn rename(&self, from: &Channel, to: &Channel) -> Realization {
        Realization {
            sigma: self.sigma.rename(from, to),
            subjects: self.subjects.iter().map(|s| s.rename(from, to)).collect(),
        }
    }
}

pub fn validate_realization(r: &Realization) -> bool {
    check_realization(r).is_ok()
}

pub fn check_realization(r: &Realization) -> Result<(), String> {
    let n = r.sigma.nodes.len();
    if r.subjects.len() != n + 1 {
        return Err("one subject per node expected".into());
    }
    check_multistep(&r.sigma)?;
    let last = &r.subjects[n];
    let (cfg, t) = &r.sigma.last;
    if last.segments().len() != 1 || last.lo() != *t || &last.segments()[0].1 != cfg {
        return Err("RRefl: subject is not the constant trajectory of the final configuration".into());
    }
    for i in (0..n).rev() {
        let here = &r.subjects[i];
        let next = &r.subjects[i + 1];
        match &r.sigma.nodes[i] {
            MsNode::StepT { cfg, from, .. } => {
                let ext = Traj::extend(cfg.clone(), *from, next).map_err(|e| format!("RStepT at node {i}: {e}"))?;
                if &ext != here {
                    return Err(format!("RStepT at node {i}: subject is not the extension of its premise"));
                }
            }
            MsNode::StepC { .. } => {
                if here != next {
                    return Err(format!("RStepC at node {i}: subject changed"));
                }
            }
        }
    }
    Ok(())
}

/// The two strict-advance lemmas: the realized interval is nonempty, and the
/// run starts (and ends) strictly before the trajectory does.
pub fn realized_implies_lt(r: &Realization) -> bool {
    let s = r.subject();
    Fin(s.lo()).lt(s.hi()) && Fin(r.sigma.start_time()).lt(s.hi()) && Fin(r.sigma.end_time()).lt(s.hi())
}

pub fn r_frame(r: &Realization, frame: &Configuration) -> Result<Realization, RealizeError> {
    let sigma = ms_frame(&r.sigma, frame);
    let subjects = r.subjects.iter().map(|s| s.map(|c| c.union(frame))).collect();
    Ok(Realization { sigma, subjects })
}

pub fn r_concat(r1: &Realization, r2: &Realization) -> Result<Realization, RealizeError> {
    let s = r1.subject().concat(r2.subject())?;
    if r1.sigma.end_cfg() != r2.sigma.start_cfg() {
        return Err(RealizeError::Compose("first run does not end where the second starts".into()));
    }
    let sigma = ms_concat(&r1.sigma, &r2.sigma)?;
    let mut subjects: Vec<Trajectory> = Vec::with_capacity(sigma.nodes.len() + 1);
    for s1 in &r1.subjects {
        subjects.push(s1.concat(r2.subject())?);
    }
    subjects.extend(r2.subjects.iter().cloned());
    debug_assert_eq!(subjects[0], s);
    Ok(Realization { sigma, subjects })
}

/// Splits at `t`. Steps firing exactly at `t` go to the later piece, so the
/// earlier piece ends in the configuration in force just before `t`. The
/// earlier piece is absent when `t` is the start of the trajectory.
pub fn r_partition(r: &Realization, t: FinTime) -> Result<(Option<Realization>, Realization), RealizeError> {
    let s = r.subject();
    if !s.contains(t) {
        return Err(TrajError::Range(t, s.lo(), s.hi()).into());
    }
    let n = r.sigma.nodes.len();
    let k = r
        .sigma
        .nodes
        .iter()
        .position(|node| match node {
            MsNode::StepT { to, .. } => *to >= t,
            MsNode::StepC { step } => step.time >= t,
        })
        .unwrap_or(n);

    let (split_cfg, split_from) = match r.sigma.nodes.get(k) {
        Some(MsNode::StepT { cfg, from, .. }) => (cfg.clone(), *from),
        Some(MsNode::StepC { step }) => (step.source.clone(), step.time),
        None => r.sigma.last.clone(),
    };

    let before = if t > s.lo() {
        if split_from >= t {
            return Err(RealizeError::Compose("partition point precedes the run".into()));
        }
        let sigma = Multistep { nodes: r.sigma.nodes[..k].to_vec(), last: (split_cfg.clone(), split_from) };
        let subjects = r.subjects[..=k].iter().map(|x| x.partition_before(t)).collect::<Result<Vec<_>, _>>()?;
        Some(Realization { sigma, subjects })
    } else {
        None
    };

    let after = match r.sigma.nodes.get(k) {
        Some(MsNode::StepT { cfg, to, .. }) => {
            let mut nodes = Vec::new();
            let mut subjects = Vec::new();
            if t < *to {
                nodes.push(MsNode::StepT { cfg: cfg.clone(), from: t, to: *to });
                subjects.push(r.subjects[k].partition_after(t)?);
            }
            nodes.extend(r.sigma.nodes[k + 1..].iter().cloned());
            subjects.extend(r.subjects[k + 1..].iter().cloned());
            Realization { sigma: Multistep { nodes, last: r.sigma.last.clone() }, subjects }
        }
        Some(MsNode::StepC { .. }) => Realization {
            sigma: Multistep { nodes: r.sigma.nodes[k..].to_vec(), last: r.sigma.last.clone() },
            subjects: r.subjects[k..].to_vec(),
        },
        None => Realization::refl(split_cfg, t, s.hi())?,
    };
    Ok((before, after))
}

/// Parallel composition of two realizations over the same interval.
pub fn r_interleave(r1: &Realization, r2: &Realization) -> Result<Realization, RealizeError> {
    let s = interleave_traj(r1.subject(), r2.subject())?;
    let sigma = ms_interleave(&r1.sigma, &r2.sigma);
    Realization::from_run(sigma, &s)
}
