//! Single-step certificates, their validator, and enumeration of the steps
//! enabled in a configuration at an instant.

use super::*;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// An object-level step of `Proc(provider, obj)`; `fresh` is the name the
    /// object was offered for allocation.
    Obj { provider: Channel, obj: NamelessObj, fresh: Channel },
    Frame { inner: Box<StepCert>, frame: Configuration },
    /// `{Proc(target, obj), Fwd(forwarder, target)}` collapses to
    /// `{Proc(forwarder, obj)}`.
    Fwd { target: Channel, obj: NamelessObj, forwarder: Channel },
    Comm { send: Box<StepCert>, recv: Box<StepCert> },
}

/// A derivation of `source --action@time--> target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepCert {
    pub rule: StepRule,
    pub action: Action,
    pub time: FinTime,
    pub source: Configuration,
    pub target: Configuration,
}

impl StepCert {
    pub fn obj(provider: &Channel, obj: &NamelessObj, fresh: &Channel, action: Action, time: FinTime, target: Configuration) -> StepCert {
        StepCert {
            rule: StepRule::Obj { provider: provider.clone(), obj: obj.clone(), fresh: fresh.clone() },
            action,
            time,
            source: Configuration::singleton(proc(provider, obj)),
            target,
        }
    }

    /// Wraps in a frame; an empty frame is a no-op and nested frames merge.
    pub fn framed(self, frame: &Configuration) -> StepCert {
        if frame.is_empty() {
            return self;
        }
        let source = self.source.union(frame);
        let target = self.target.union(frame);
        let action = self.action.clone();
        let time = self.time;
        let (inner, frame) = match self.rule {
            StepRule::Frame { inner, frame: f0 } => (inner, f0.union(frame)),
            rule => (
                Box::new(StepCert { rule, action: action.clone(), time, source: self.source, target: self.target }),
                frame.clone(),
            ),
        };
        StepCert { rule: StepRule::Frame { inner, frame }, action, time, source, target }
    }

    pub fn comm(send: StepCert, recv: StepCert) -> StepCert {
        let source = send.source.union(&recv.source);
        let target = send.target.union(&recv.target);
        let time = send.time;
        StepCert { rule: StepRule::Comm { send: Box::new(send), recv: Box::new(recv) }, action: Action::Eps, time, source, target }
    }

    pub fn fwd(target: &Channel, obj: &NamelessObj, forwarder: &Channel, time: FinTime) -> StepCert {
        StepCert {
            rule: StepRule::Fwd { target: target.clone(), obj: obj.clone(), forwarder: forwarder.clone() },
            action: Action::Eps,
            time,
            source: Configuration::from_vec(vec![proc(target, obj), AtomicProc::Fwd(forwarder.clone(), target.clone())]),
            target: Configuration::singleton(proc(forwarder, obj)),
        }
    }

    pub fn rename(&self, from: &Channel, to: &Channel) -> StepCert {
        let r = |c: &Channel| if c == from { to.clone() } else { c.clone() };
        let rule = match &self.rule {
            StepRule::Obj { provider, obj, fresh } => {
                StepRule::Obj { provider: r(provider), obj: obj.rename(from, to), fresh: r(fresh) }
            }
            StepRule::Frame { inner, frame } => {
                StepRule::Frame { inner: Box::new(inner.rename(from, to)), frame: rename_cfg(frame, from, to) }
            }
            StepRule::Fwd { target, obj, forwarder } => {
                StepRule::Fwd { target: r(target), obj: obj.rename(from, to), forwarder: r(forwarder) }
            }
            StepRule::Comm { send, recv } => {
                StepRule::Comm { send: Box::new(send.rename(from, to)), recv: Box::new(recv.rename(from, to)) }
            }
        };
        StepCert {
            rule,
            action: self.action.rename(from, to),
            time: self.time,
            source: rename_cfg(&self.source, from, to),
            target: rename_cfg(&self.target, from, to),
        }
    }
}

pub fn validate_step(cert: &StepCert) -> bool {
    check_step(cert).is_ok()
}

/// Recursive check of a step certificate; the error names the first failing
/// node.
pub fn check_step(cert: &StepCert) -> Result<(), String> {
    match &cert.rule {
        StepRule::Obj { provider, obj, fresh } => {
            if cert.source != Configuration::singleton(proc(provider, obj)) {
                return Err("object step: source is not the stepping object".into());
            }
            let payloads = match &cert.action {
                Action::Dir(_, Dir::Recv, Payload::Chan(c)) => vec![c.clone()],
                _ => vec![],
            };
            let aux = StepAux { fresh: fresh.clone(), payloads };
            let rows = obj.step(provider, cert.time, &aux);
            if rows.iter().any(|(a, t)| *a == cert.action && *t == cert.target) {
                Ok(())
            } else {
                Err(format!("object step: {} --{}@{}--> not produced by the object", obj, cert.action, cert.time))
            }
        }
        StepRule::Frame { inner, frame } => {
            check_step(inner)?;
            if inner.action != cert.action || inner.time != cert.time {
                return Err("frame: label or time differs from premise".into());
            }
            if inner.source.union(frame) != cert.source {
                return Err("frame: source is not premise source plus frame".into());
            }
            if inner.target.union(frame) != cert.target {
                return Err("frame: target is not premise target plus frame".into());
            }
            Ok(())
        }
        StepRule::Fwd { target, obj, forwarder } => {
            let expect = StepCert::fwd(target, obj, forwarder, cert.time);
            if cert.action != Action::Eps || cert.source != expect.source || cert.target != expect.target {
                return Err("forward collapse: endpoints do not match".into());
            }
            Ok(())
        }
        StepRule::Comm { send, recv } => {
            check_step(send)?;
            check_step(recv)?;
            match (&send.action, &recv.action) {
                (Action::Dir(a, Dir::Send, p), Action::Dir(b, Dir::Recv, q)) if a == b && p == q => {}
                _ => return Err("communication: premises are not a matching send/receive pair".into()),
            }
            if send.time != cert.time || recv.time != cert.time {
                return Err("communication: premises at different instants".into());
            }
            if cert.action != Action::Eps {
                return Err("communication: conclusion must be silent".into());
            }
            if send.source.union(&recv.source) != cert.source || send.target.union(&recv.target) != cert.target {
                return Err("communication: endpoints are not the union of the premises".into());
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnabledStep {
    pub action: Action,
    pub target: Configuration,
    pub cert: StepCert,
}

/// Knobs for enumeration: a lower bound for generated names and extra
/// candidate channels offered to channel-carrying receives.
#[derive(Clone, Debug, Default)]
pub struct EnumOpts {
    pub fresh_floor: u64,
    pub extra_payloads: Vec<Channel>,
}

pub fn enabled_steps(cfg: &Configuration, time: FinTime) -> Vec<EnabledStep> {
    enabled_steps_with(cfg, time, &EnumOpts::default())
}

/// All `(action, target)` pairs derivable from `cfg` at `time`, each with one
/// certificate, in canonical order. Visible steps come from single objects;
/// silent steps come from objects, forward collapses, and send/receive pairs.
pub fn enabled_steps_with(cfg: &Configuration, time: FinTime, opts: &EnumOpts) -> Vec<EnabledStep> {
    let mut fresh = Fresh::new();
    fresh.next = fresh.next.max(opts.fresh_floor);
    fresh.avoid_cfg(cfg);
    let fresh_name = fresh.peek();

    let procs: Vec<(AtomicProc, usize)> = cfg.distinct().map(|(p, n)| (p.clone(), n)).collect();

    // Candidate payloads for channel receives: channels sent by someone here,
    // plus caller-supplied names.
    let base_aux = StepAux { fresh: fresh_name.clone(), payloads: vec![] };
    let mut sends: Vec<Vec<(Action, Configuration)>> = Vec::with_capacity(procs.len());
    let mut payloads: BTreeSet<Channel> = opts.extra_payloads.iter().cloned().collect();
    for (p, _) in &procs {
        let rows = match p {
            AtomicProc::Proc(c, o) => o.step(c, time, &base_aux),
            AtomicProc::Fwd(..) => vec![],
        };
        for (a, _) in &rows {
            if let Action::Dir(_, Dir::Send, Payload::Chan(c)) = a {
                payloads.insert(c.clone());
            }
        }
        sends.push(rows);
    }
    let aux = StepAux { fresh: fresh_name, payloads: payloads.into_iter().collect() };

    let mut rows: Vec<Vec<(Action, Configuration)>> = Vec::with_capacity(procs.len());
    for (i, (p, _)) in procs.iter().enumerate() {
        rows.push(match p {
            AtomicProc::Proc(c, o) if !aux.payloads.is_empty() => o.step(c, time, &aux),
            _ => std::mem::take(&mut sends[i]),
        });
    }

    let mut out: BTreeMap<(Action, Configuration), StepCert> = BTreeMap::new();
    let mut add = |cert: StepCert| {
        out.entry((cert.action.clone(), cert.target.clone())).or_insert(cert);
    };

    for (i, (p, _)) in procs.iter().enumerate() {
        let AtomicProc::Proc(c, o) = p else { continue };
        let rest = cfg.without(p).expect("present");
        for (a, t) in &rows[i] {
            add(StepCert::obj(c, o, &aux.fresh, a.clone(), time, t.clone()).framed(&rest));
        }
    }

    for (p, _) in &procs {
        let AtomicProc::Fwd(b, a) = p else { continue };
        for (q, _) in &procs {
            let AtomicProc::Proc(c, o) = q else { continue };
            if c != a {
                continue;
            }
            let core = StepCert::fwd(a, o, b, time);
            let rest = cfg.without_all(&core.source).expect("present");
            add(core.framed(&rest));
        }
    }

    for (i, (p, np)) in procs.iter().enumerate() {
        let AtomicProc::Proc(c1, o1) = p else { continue };
        for (a1, t1) in &rows[i] {
            let Action::Dir(ch, Dir::Send, pay) = a1 else { continue };
            for (j, (q, nq)) in procs.iter().enumerate() {
                let AtomicProc::Proc(c2, o2) = q else { continue };
                if i == j && *np < 2 {
                    continue;
                }
                let _ = nq;
                for (a2, t2) in &rows[j] {
                    if *a2 != Action::recv(ch, pay.clone()) {
                        continue;
                    }
                    let send = StepCert::obj(c1, o1, &aux.fresh, a1.clone(), time, t1.clone());
                    let recv = StepCert::obj(c2, o2, &aux.fresh, a2.clone(), time, t2.clone());
                    let core = StepCert::comm(send, recv);
                    let rest = cfg.without_all(&core.source).expect("present");
                    add(core.framed(&rest));
                }
            }
        }
    }

    out.into_iter().map(|((action, target), cert)| EnabledStep { action, target, cert }).collect()
}
