//! Multistep certificates: sequences of time advances and silent steps.
//!
//! A derivation is kept as the list of its `StepT`/`StepC` nodes followed by
//! the closing `Refl`. Every rule has a single sub-derivation, so this is the
//! same tree laid out flat.

use super::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MsNode {
    /// Idle from `from` to `to` in `cfg`.
    StepT { cfg: Configuration, from: FinTime, to: FinTime },
    /// A silent step at `step.time`.
    StepC { step: StepCert },
}

impl MsNode {
    fn entry(&self) -> (&Configuration, FinTime) {
        match self {
            MsNode::StepT { cfg, from, .. } => (cfg, *from),
            MsNode::StepC { step } => (&step.source, step.time),
        }
    }

    fn exit(&self) -> (&Configuration, FinTime) {
        match self {
            MsNode::StepT { cfg, to, .. } => (cfg, *to),
            MsNode::StepC { step } => (&step.target, step.time),
        }
    }

    fn framed(&self, frame: &Configuration) -> MsNode {
        match self {
            MsNode::StepT { cfg, from, to } => MsNode::StepT { cfg: cfg.union(frame), from: *from, to: *to },
            MsNode::StepC { step } => MsNode::StepC { step: step.clone().framed(frame) },
        }
    }

    pub fn rename(&self, from_c: &Channel, to_c: &Channel) -> MsNode {
        match self {
            MsNode::StepT { cfg, from, to } => MsNode::StepT { cfg: rename_cfg(cfg, from_c, to_c), from: *from, to: *to },
            MsNode::StepC { step } => MsNode::StepC { step: step.rename(from_c, to_c) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multistep {
    pub nodes: Vec<MsNode>,
    /// The closing `Refl`.
    pub last: (Configuration, FinTime),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MsError {
    #[error("endpoint mismatch: {0}")]
    Endpoint(String),
    #[error("time order violated: {0}")]
    Order(String),
}

impl Multistep {
    pub fn refl(cfg: Configuration, time: FinTime) -> Self {
        Multistep { nodes: vec![], last: (cfg, time) }
    }

    pub fn start(&self) -> (&Configuration, FinTime) {
        match self.nodes.first() {
            Some(n) => n.entry(),
            None => (&self.last.0, self.last.1),
        }
    }

    pub fn start_cfg(&self) -> &Configuration {
        self.start().0
    }

    pub fn start_time(&self) -> FinTime {
        self.start().1
    }

    pub fn end_cfg(&self) -> &Configuration {
        &self.last.0
    }

    pub fn end_time(&self) -> FinTime {
        self.last.1
    }

    /// Prepends a silent step.
    pub fn cons_step(mut self, step: StepCert) -> Self {
        self.nodes.insert(0, MsNode::StepC { step });
        self
    }

    pub fn steps(&self) -> impl Iterator<Item = &StepCert> {
        self.nodes.iter().filter_map(|n| match n {
            MsNode::StepC { step } => Some(step),
            _ => None,
        })
    }

    pub fn rename(&self, from: &Channel, to: &Channel) -> Multistep {
        Multistep {
            nodes: self.nodes.iter().map(|n| n.rename(from, to)).collect(),
            last: (rename_cfg(&self.last.0, from, to), self.last.1),
        }
    }
}

pub fn validate_multistep(ms: &Multistep) -> bool {
    check_multistep(ms).is_ok()
}

pub fn check_multistep(ms: &Multistep) -> Result<(), String> {
    for (i, n) in ms.nodes.iter().enumerate() {
        match n {
            MsNode::StepT { from, to, .. } if from > to => {
                return Err(format!("node {i}: idle interval runs backwards"));
            }
            MsNode::StepC { step } => {
                if step.action != Action::Eps {
                    return Err(format!("node {i}: visible step in a multistep"));
                }
                check_step(step).map_err(|e| format!("node {i}: {e}"))?;
            }
            _ => {}
        }
        let (ecfg, etime) = n.exit();
        let (ncfg, ntime) = match ms.nodes.get(i + 1) {
            Some(m) => m.entry(),
            None => (&ms.last.0, ms.last.1),
        };
        if ecfg != ncfg || etime != ntime {
            return Err(format!("node {i}: does not meet its successor"));
        }
    }
    Ok(())
}

/// Runs `ms` alongside an inert `frame`.
pub fn ms_frame(ms: &Multistep, frame: &Configuration) -> Multistep {
    Multistep {
        nodes: ms.nodes.iter().map(|n| n.framed(frame)).collect(),
        last: (ms.last.0.union(frame), ms.last.1),
    }
}

/// Sequential composition, idling in between if `b` starts later than `a`
/// ends.
pub fn ms_concat(a: &Multistep, b: &Multistep) -> Result<Multistep, MsError> {
    if a.end_cfg() != b.start_cfg() {
        return Err(MsError::Endpoint("first run does not end where the second starts".into()));
    }
    if a.end_time() > b.start_time() {
        return Err(MsError::Order(format!("{} > {}", a.end_time(), b.start_time())));
    }
    let mut nodes = a.nodes.clone();
    if a.end_time() < b.start_time() {
        nodes.push(MsNode::StepT { cfg: a.last.0.clone(), from: a.end_time(), to: b.start_time() });
    }
    nodes.extend(b.nodes.iter().cloned());
    Ok(Multistep { nodes, last: b.last.clone() })
}

/// Extends the final idle period to `t`.
pub fn ms_step_t_right(ms: &Multistep, t: FinTime) -> Result<Multistep, MsError> {
    if ms.end_time() > t {
        return Err(MsError::Order(format!("{} > {t}", ms.end_time())));
    }
    let mut out = ms.clone();
    if ms.end_time() < t {
        out.nodes.push(MsNode::StepT { cfg: ms.last.0.clone(), from: ms.end_time(), to: t });
        out.last.1 = t;
    }
    Ok(out)
}

struct Cursor<'a> {
    ms: &'a Multistep,
    pos: usize,
    cfg: Configuration,
    time: FinTime,
}

impl<'a> Cursor<'a> {
    fn new(ms: &'a Multistep) -> Self {
        let (c, t) = ms.start();
        Cursor { ms, pos: 0, cfg: c.clone(), time: t }
    }

    fn next(&self) -> Option<&'a MsNode> {
        self.ms.nodes.get(self.pos)
    }
}

/// Parallel composition of two independent runs. The result starts at the
/// earlier start time and ends at the later end time.
pub fn ms_interleave(a: &Multistep, b: &Multistep) -> Multistep {
    let mut out = Vec::new();
    let mut l = Cursor::new(a);
    let mut r = Cursor::new(b);
    let last = if l.time <= r.time {
        interleave_left(&mut l, &mut r, &mut out)
    } else {
        interleave_right(&mut l, &mut r, &mut out)
    };
    Multistep { nodes: out, last }
}

/// Requires the left run to be no later than the right one.
fn interleave_left(l: &mut Cursor, r: &mut Cursor, out: &mut Vec<MsNode>) -> (Configuration, FinTime) {
    loop {
        debug_assert!(l.time <= r.time);
        match l.next() {
            None => return drain(l, r, out),
            Some(MsNode::StepT { to, .. }) => {
                let to = *to;
                l.pos += 1;
                if to <= r.time {
                    push_idle(out, l.cfg.union(&r.cfg), l.time, to);
                    l.time = to;
                } else {
                    push_idle(out, l.cfg.union(&r.cfg), l.time, r.time);
                    l.time = to;
                    return interleave_right(l, r, out);
                }
            }
            Some(MsNode::StepC { step }) => {
                l.pos += 1;
                out.push(MsNode::StepC { step: step.clone().framed(&r.cfg) });
                l.cfg = step.target.clone();
            }
        }
    }
}

/// Mirror image of `interleave_left`.
fn interleave_right(l: &mut Cursor, r: &mut Cursor, out: &mut Vec<MsNode>) -> (Configuration, FinTime) {
    loop {
        debug_assert!(r.time <= l.time);
        match r.next() {
            None => return drain(r, l, out),
            Some(MsNode::StepT { to, .. }) => {
                let to = *to;
                r.pos += 1;
                if to <= l.time {
                    push_idle(out, l.cfg.union(&r.cfg), r.time, to);
                    r.time = to;
                } else {
                    push_idle(out, l.cfg.union(&r.cfg), r.time, l.time);
                    r.time = to;
                    return interleave_left(l, r, out);
                }
            }
            Some(MsNode::StepC { step }) => {
                r.pos += 1;
                out.push(MsNode::StepC { step: step.clone().framed(&l.cfg) });
                r.cfg = step.target.clone();
            }
        }
    }
}

/// `done` has no nodes left; idle up to `other` and replay the rest of it.
fn drain(done: &mut Cursor, other: &mut Cursor, out: &mut Vec<MsNode>) -> (Configuration, FinTime) {
    push_idle(out, done.cfg.union(&other.cfg), done.time, other.time);
    for n in &other.ms.nodes[other.pos..] {
        out.push(n.framed(&done.cfg));
    }
    (other.ms.last.0.union(&done.cfg), other.ms.last.1.max(done.time))
}

fn push_idle(out: &mut Vec<MsNode>, cfg: Configuration, from: FinTime, to: FinTime) {
    if from < to {
        out.push(MsNode::StepT { cfg, from, to });
    }
}
