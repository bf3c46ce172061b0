//! Deterministic earliest-enabled scheduling of configurations.

use crate::lts::{enabled_steps, Action, Channel, Configuration, Dir, MsNode, Multistep, NamelessConfig, Payload};
use crate::time::{FinTime, Time};
use crate::trajectory::{ct_of_run, Ct, CtError, Trajectory, Traj};

/// Bound on silent steps per run, against divergence.
pub const MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("more than {MAX_STEPS} silent steps")]
    Diverges,
    #[error(transparent)]
    Ct(#[from] CtError),
}

#[derive(Clone, Debug)]
pub struct Run {
    pub sigma: Multistep,
    pub traj: Trajectory,
    /// The next instant something could happen, when it lies past the horizon.
    pub pending: Option<FinTime>,
}

fn next_wake(cfg: &Configuration, after: FinTime) -> Option<FinTime> {
    use crate::lts::AtomicProc;
    cfg.distinct()
        .filter_map(|(p, _)| match p {
            AtomicProc::Proc(_, o) => o.wake_times().into_iter().find(|&w| w > after),
            AtomicProc::Fwd(..) => None,
        })
        .min()
}

/// Takes silent steps at each instant until none is enabled, always the
/// first in canonical order, then idles to the earliest wake time of any
/// object. Stops at the first wake time past `horizon`.
pub fn schedule(start: &Configuration, lo: FinTime, horizon: FinTime) -> Result<Run, RunError> {
    let mut cfg = start.clone();
    let mut t = lo;
    let mut nodes = Vec::new();
    let mut steps = 0;
    let pending = loop {
        while let Some(s) = enabled_steps(&cfg, t).into_iter().find(|s| s.action == Action::Eps) {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(RunError::Diverges);
            }
            cfg = s.target.clone();
            nodes.push(MsNode::StepC { step: s.cert });
        }
        match next_wake(&cfg, t) {
            Some(n) if n <= horizon => {
                nodes.push(MsNode::StepT { cfg: cfg.clone(), from: t, to: n });
                t = n;
            }
            other => break other,
        }
    };
    let sigma = Multistep { nodes, last: (cfg, t) };
    let mut segs: Vec<(FinTime, Configuration)> = sigma
        .nodes
        .iter()
        .filter_map(|n| match n {
            MsNode::StepT { cfg, from, .. } => Some((*from, cfg.clone())),
            MsNode::StepC { .. } => None,
        })
        .collect();
    segs.push((sigma.last.1, sigma.last.0.clone()));
    let traj = Traj::from_segments(lo, Time::Inf, segs).map_err(CtError::from)?;
    Ok(Run { sigma, traj, pending })
}

/// The canonical run of a nameless configuration as a computable trajectory
/// over `[lo, ∞)`.
pub fn ct_run(start: &NamelessConfig, lo: FinTime, horizon: FinTime) -> Result<Ct, RunError> {
    let run = schedule(&start.instantiate(&Channel::hole()), lo, horizon)?;
    Ok(ct_of_run(run.sigma, Time::Inf)?)
}

/// An independent, naive simulator: every instant in `[lo, horizon]` is
/// visited and silent steps are taken until none is enabled. Returns the
/// configuration at the end of each instant.
pub fn simulate(start: &Configuration, lo: FinTime, horizon: FinTime) -> Result<Vec<Configuration>, RunError> {
    let mut cfg = start.clone();
    let mut out = Vec::new();
    let mut steps = 0;
    for t in lo..=horizon {
        loop {
            let eps: Vec<_> = enabled_steps(&cfg, t).into_iter().filter(|s| s.action == Action::Eps).collect();
            let Some(s) = eps.into_iter().next() else { break };
            steps += 1;
            if steps > MAX_STEPS {
                return Err(RunError::Diverges);
            }
            cfg = s.target;
        }
        out.push(cfg.clone());
    }
    Ok(out)
}

/// Whether `cfg` can close `a` at `t`, leaving nothing behind.
pub fn can_close(cfg: &Configuration, a: &Channel, t: FinTime) -> bool {
    enabled_steps(cfg, t)
        .iter()
        .any(|s| s.action == Action::Dir(a.clone(), Dir::Send, Payload::Close) && s.target.is_empty())
}
