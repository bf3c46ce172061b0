//! Computable-trajectory certificates as JSON documents.
//!
//! The realization derivation is stored flat, one entry per node, each
//! pairing its subject trajectory with the multistep node it realizes.
//! Objects are stored as `(lang, text)` and re-read through an
//! [`ObjReader`], so certificates stay checkable without the code that
//! produced them.

use crate::lts::{Action, AtomicProc, Channel, Configuration, Dir, MsNode, Multistep, NamelessConfig, NamelessObj, Payload, Sel, StepCert, StepRule};
use crate::time::{FinTime, Time};
use crate::trajectory::{Ct, Realization, Traj};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const FORMAT: &str = "timedsess-ct/1";

#[derive(Debug, thiserror::Error)]
pub enum CertError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format `{0}`")]
    Format(String),
    #[error("unknown object language `{0}`")]
    Lang(String),
    #[error("object text does not parse: {0}")]
    Obj(String),
    #[error("ill-formed certificate: {0}")]
    Shape(String),
}

type ObjParser = Box<dyn Fn(&str) -> Result<NamelessObj, String> + Send + Sync>;

/// Language id to object parser.
pub struct ObjReader {
    langs: BTreeMap<String, ObjParser>,
}

impl Default for ObjReader {
    fn default() -> Self {
        let mut r = ObjReader { langs: BTreeMap::new() };
        r.register("timed", |s| {
            let m = super::parse_term(s).map_err(|e| e.to_string())?;
            if let Some(x) = m.free_vars().into_iter().next() {
                return Err(format!("free variable `{x}`"));
            }
            Ok(crate::proc::closed_obj(m))
        });
        r.register("beacon", |s| Ok(crate::beacon::beacon_obj(super::parse_window(s).map_err(|e| e.to_string())?)));
        r.register("canon", crate::semantics::parse_canon);
        r
    }
}

impl ObjReader {
    pub fn register(&mut self, lang: &str, f: impl Fn(&str) -> Result<NamelessObj, String> + Send + Sync + 'static) {
        self.langs.insert(lang.to_string(), Box::new(f));
    }

    pub fn read(&self, lang: &str, text: &str) -> Result<NamelessObj, CertError> {
        let f = self.langs.get(lang).ok_or_else(|| CertError::Lang(lang.to_string()))?;
        let o = f(text).map_err(CertError::Obj)?;
        if o.lang() != lang || o.text() != text {
            return Err(CertError::Obj(format!("`{text}` is not in canonical form")));
        }
        Ok(o)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TimeW {
    Fin(FinTime),
    Inf(String),
}

#[derive(Serialize, Deserialize)]
struct ObjW {
    lang: String,
    text: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum AtomW {
    Proc { chan: String, lang: String, text: String },
    Fwd { chan: String, target: String },
}

#[derive(Serialize, Deserialize)]
struct NcW {
    rest: Vec<AtomW>,
    root: ObjW,
}

#[derive(Serialize, Deserialize)]
struct SegW<C> {
    at: FinTime,
    cfg: C,
}

#[derive(Serialize, Deserialize)]
struct TrajW<C> {
    lo: FinTime,
    hi: TimeW,
    segments: Vec<SegW<C>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PayloadW {
    Close,
    Pi1,
    Pi2,
    Chan { chan: String },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "dir", rename_all = "lowercase")]
enum ActionW {
    Eps,
    Send { chan: String, payload: PayloadW },
    Recv { chan: String, payload: PayloadW },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "rule")]
enum StepRuleW {
    #[serde(rename = "OBJSTEP")]
    Obj { provider: String, obj: ObjW, fresh: String },
    #[serde(rename = "FRAME")]
    Frame { inner: Box<StepW>, frame: Vec<AtomW> },
    #[serde(rename = "FWDSTEP")]
    Fwd { target: String, obj: ObjW, forwarder: String },
    #[serde(rename = "COMM")]
    Comm { send: Box<StepW>, recv: Box<StepW> },
}

#[derive(Serialize, Deserialize)]
struct StepW {
    time: FinTime,
    action: ActionW,
    source: Vec<AtomW>,
    target: Vec<AtomW>,
    by: StepRuleW,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "node")]
enum MsW {
    #[serde(rename = "REFL")]
    Refl { cfg: Vec<AtomW>, time: FinTime },
    #[serde(rename = "STEPT")]
    StepT { cfg: Vec<AtomW>, from: FinTime, to: FinTime },
    #[serde(rename = "STEPC")]
    StepC { step: StepW },
}

#[derive(Serialize, Deserialize)]
struct RNodeW {
    rule: String,
    subject: TrajW<Vec<AtomW>>,
    sigma: MsW,
}

#[derive(Serialize, Deserialize)]
struct CtW {
    format: String,
    lo: FinTime,
    hi: TimeW,
    step_to: FinTime,
    start: NcW,
    end: NcW,
    ntraj: TrajW<NcW>,
    realization: Vec<RNodeW>,
}

// ---- writing

fn time_w(t: Time) -> TimeW {
    match t {
        Time::Fin(k) => TimeW::Fin(k),
        Time::Inf => TimeW::Inf("inf".into()),
    }
}

fn obj_w(o: &NamelessObj) -> ObjW {
    ObjW { lang: o.lang().to_string(), text: o.text().to_string() }
}

fn cfg_w(c: &Configuration) -> Vec<AtomW> {
    c.to_vec()
        .iter()
        .map(|p| match p {
            AtomicProc::Proc(c, o) => AtomW::Proc { chan: c.to_string(), lang: o.lang().to_string(), text: o.text().to_string() },
            AtomicProc::Fwd(a, b) => AtomW::Fwd { chan: a.to_string(), target: b.to_string() },
        })
        .collect()
}

fn nc_w(n: &NamelessConfig) -> NcW {
    NcW { rest: cfg_w(&n.rest), root: obj_w(&n.root) }
}

fn traj_w<C: Clone + Eq, D>(s: &Traj<C>, f: impl Fn(&C) -> D) -> TrajW<D> {
    TrajW {
        lo: s.lo(),
        hi: time_w(s.hi()),
        segments: s.segments().iter().map(|(t, c)| SegW { at: *t, cfg: f(c) }).collect(),
    }
}

fn payload_w(p: &Payload) -> PayloadW {
    match p {
        Payload::Close => PayloadW::Close,
        Payload::Sel(Sel::P1) => PayloadW::Pi1,
        Payload::Sel(Sel::P2) => PayloadW::Pi2,
        Payload::Chan(c) => PayloadW::Chan { chan: c.to_string() },
    }
}

fn step_w(s: &StepCert) -> StepW {
    let action = match &s.action {
        Action::Eps => ActionW::Eps,
        Action::Dir(c, Dir::Send, p) => ActionW::Send { chan: c.to_string(), payload: payload_w(p) },
        Action::Dir(c, Dir::Recv, p) => ActionW::Recv { chan: c.to_string(), payload: payload_w(p) },
    };
    let by = match &s.rule {
        StepRule::Obj { provider, obj, fresh } => {
            StepRuleW::Obj { provider: provider.to_string(), obj: obj_w(obj), fresh: fresh.to_string() }
        }
        StepRule::Frame { inner, frame } => StepRuleW::Frame { inner: Box::new(step_w(inner)), frame: cfg_w(frame) },
        StepRule::Fwd { target, obj, forwarder } => {
            StepRuleW::Fwd { target: target.to_string(), obj: obj_w(obj), forwarder: forwarder.to_string() }
        }
        StepRule::Comm { send, recv } => StepRuleW::Comm { send: Box::new(step_w(send)), recv: Box::new(step_w(recv)) },
    };
    StepW { time: s.time, action, source: cfg_w(&s.source), target: cfg_w(&s.target), by }
}

pub fn ct_to_json(w: &Ct) -> String {
    let r = &w.template;
    let mut realization = Vec::with_capacity(r.subjects.len());
    for (i, subj) in r.subjects.iter().enumerate() {
        let (rule, sigma) = match r.sigma.nodes.get(i) {
            Some(MsNode::StepT { cfg, from, to }) => ("RSTEPT", MsW::StepT { cfg: cfg_w(cfg), from: *from, to: *to }),
            Some(MsNode::StepC { step }) => ("RSTEPC", MsW::StepC { step: step_w(step) }),
            None => ("RREFL", MsW::Refl { cfg: cfg_w(&r.sigma.last.0), time: r.sigma.last.1 }),
        };
        realization.push(RNodeW { rule: rule.into(), subject: traj_w(subj, cfg_w), sigma });
    }
    let doc = CtW {
        format: FORMAT.into(),
        lo: w.lo,
        hi: time_w(w.hi),
        step_to: w.step_to,
        start: nc_w(&w.start),
        end: nc_w(&w.end),
        ntraj: traj_w(&w.ntraj, nc_w),
        realization,
    };
    serde_json::to_string_pretty(&doc).expect("certificate serializes") + "\n"
}

// ---- reading

fn time_r(t: TimeW) -> Result<Time, CertError> {
    match t {
        TimeW::Fin(k) => Ok(Time::Fin(k)),
        TimeW::Inf(s) if s == "inf" => Ok(Time::Inf),
        TimeW::Inf(s) => Err(CertError::Shape(format!("`{s}` is not a time"))),
    }
}

struct Reader<'a> {
    objs: &'a ObjReader,
}

impl Reader<'_> {
    fn obj(&self, o: ObjW) -> Result<NamelessObj, CertError> {
        self.objs.read(&o.lang, &o.text)
    }

    fn cfg(&self, atoms: Vec<AtomW>) -> Result<Configuration, CertError> {
        let mut out = Vec::with_capacity(atoms.len());
        for a in atoms {
            out.push(match a {
                AtomW::Proc { chan, lang, text } => AtomicProc::Proc(Channel::new(&chan), self.objs.read(&lang, &text)?),
                AtomW::Fwd { chan, target } => AtomicProc::Fwd(Channel::new(&chan), Channel::new(&target)),
            });
        }
        Ok(Configuration::from_vec(out))
    }

    fn nc(&self, n: NcW) -> Result<NamelessConfig, CertError> {
        Ok(NamelessConfig::new(self.cfg(n.rest)?, self.obj(n.root)?))
    }

    fn traj<C: Clone + Eq, D>(&self, t: TrajW<D>, f: impl Fn(&Self, D) -> Result<C, CertError>) -> Result<Traj<C>, CertError> {
        let hi = time_r(t.hi)?;
        let segs = t.segments.into_iter().map(|s| Ok((s.at, f(self, s.cfg)?))).collect::<Result<Vec<_>, CertError>>()?;
        let n = segs.len();
        let tr = Traj::from_segments(t.lo, hi, segs).map_err(|e| CertError::Shape(e.to_string()))?;
        if tr.segments().len() != n {
            return Err(CertError::Shape("adjacent segments must differ".into()));
        }
        Ok(tr)
    }

    fn payload(&self, p: PayloadW) -> Payload {
        match p {
            PayloadW::Close => Payload::Close,
            PayloadW::Pi1 => Payload::Sel(Sel::P1),
            PayloadW::Pi2 => Payload::Sel(Sel::P2),
            PayloadW::Chan { chan } => Payload::Chan(Channel::new(&chan)),
        }
    }

    fn step(&self, s: StepW) -> Result<StepCert, CertError> {
        let action = match s.action {
            ActionW::Eps => Action::Eps,
            ActionW::Send { chan, payload } => Action::send(&Channel::new(&chan), self.payload(payload)),
            ActionW::Recv { chan, payload } => Action::recv(&Channel::new(&chan), self.payload(payload)),
        };
        let rule = match s.by {
            StepRuleW::Obj { provider, obj, fresh } => {
                StepRule::Obj { provider: Channel::new(&provider), obj: self.obj(obj)?, fresh: Channel::new(&fresh) }
            }
            StepRuleW::Frame { inner, frame } => StepRule::Frame { inner: Box::new(self.step(*inner)?), frame: self.cfg(frame)? },
            StepRuleW::Fwd { target, obj, forwarder } => {
                StepRule::Fwd { target: Channel::new(&target), obj: self.obj(obj)?, forwarder: Channel::new(&forwarder) }
            }
            StepRuleW::Comm { send, recv } => {
                StepRule::Comm { send: Box::new(self.step(*send)?), recv: Box::new(self.step(*recv)?) }
            }
        };
        Ok(StepCert { rule, action, time: s.time, source: self.cfg(s.source)?, target: self.cfg(s.target)? })
    }
}

/// Reads a certificate. Only the document shape is checked here; whether
/// the certificate is sound is up to `validate_ct`.
pub fn ct_from_json(src: &str, objs: &ObjReader) -> Result<Ct, CertError> {
    let doc: CtW = serde_json::from_str(src)?;
    if doc.format != FORMAT {
        return Err(CertError::Format(doc.format));
    }
    let rd = Reader { objs };
    let n = doc.realization.len();
    let mut nodes = Vec::with_capacity(n.saturating_sub(1));
    let mut subjects = Vec::with_capacity(n);
    let mut last = None;
    for (i, node) in doc.realization.into_iter().enumerate() {
        subjects.push(rd.traj(node.subject, |r, c| r.cfg(c))?);
        match (node.rule.as_str(), node.sigma, i + 1 == n) {
            ("RSTEPT", MsW::StepT { cfg, from, to }, false) => nodes.push(MsNode::StepT { cfg: rd.cfg(cfg)?, from, to }),
            ("RSTEPC", MsW::StepC { step }, false) => nodes.push(MsNode::StepC { step: rd.step(step)? }),
            ("RREFL", MsW::Refl { cfg, time }, true) => last = Some((rd.cfg(cfg)?, time)),
            (rule, _, _) => return Err(CertError::Shape(format!("node {i}: unexpected `{rule}` here"))),
        }
    }
    let last = last.ok_or_else(|| CertError::Shape("realization must end in RREFL".into()))?;
    Ok(Ct {
        lo: doc.lo,
        hi: time_r(doc.hi)?,
        start: rd.nc(doc.start)?,
        end: rd.nc(doc.end)?,
        ntraj: rd.traj(doc.ntraj, |r, c| r.nc(c))?,
        step_to: doc.step_to,
        template: Realization { sigma: Multistep { nodes, last }, subjects },
    })
}
