//! Timed labelled transition system: channels, actions, atomic processes,
//! configurations, and the single-step and multistep relations.

mod multistep;
mod step;

pub use multistep::{
    check_multistep, ms_concat, ms_frame, ms_interleave, ms_step_t_right, validate_multistep,
    MsError, MsNode, Multistep,
};
pub use step::{
    check_step, enabled_steps, enabled_steps_with, validate_step, EnabledStep, EnumOpts, StepCert,
    StepRule,
};

use crate::multiset::FMSet;
use crate::time::FinTime;
use std::any::Any;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;
use std::sync::Arc;

/// A channel name. User channels are identifiers; generated names live in
/// disjoint namespaces (`#k` fresh, `%` template placeholder, `~k` probes).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel(Arc<str>);

impl Channel {
    pub fn new(name: &str) -> Self {
        Channel(Arc::from(name))
    }

    pub fn fresh(k: u64) -> Self {
        Channel::new(&format!("#{k}"))
    }

    /// Placeholder channel used by channel-parametric templates.
    pub fn hole() -> Self {
        Channel::new("%")
    }

    pub fn probe(k: u64) -> Self {
        Channel::new(&format!("~{k}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Index of a `#k` name.
    pub fn fresh_index(&self) -> Option<u64> {
        self.0.strip_prefix('#').and_then(|s| s.parse().ok())
    }

    pub fn is_generated(&self) -> bool {
        matches!(self.0.chars().next(), Some('#' | '%' | '~'))
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Deterministic source of `#k` names.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    next: u64,
}

impl Fresh {
    pub fn new() -> Self {
        Fresh { next: 1 }
    }

    pub fn starting_after(cfg: &Configuration) -> Self {
        let mut f = Fresh::new();
        f.avoid_cfg(cfg);
        f
    }

    pub fn floor(&self) -> u64 {
        self.next
    }

    pub fn next(&mut self) -> Channel {
        let c = Channel::fresh(self.next);
        self.next += 1;
        c
    }

    /// Name that `next` would return, without consuming it.
    pub fn peek(&self) -> Channel {
        Channel::fresh(self.next)
    }

    pub fn avoid(&mut self, c: &Channel) {
        if let Some(k) = c.fresh_index() {
            self.next = self.next.max(k + 1);
        }
    }

    pub fn avoid_cfg(&mut self, cfg: &Configuration) {
        for c in cfg_channels(cfg) {
            self.avoid(&c);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sel {
    P1,
    P2,
}

impl fmt::Display for Sel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sel::P1 => "pi1",
            Sel::P2 => "pi2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    Sel(Sel),
    Close,
    Chan(Channel),
}

impl Payload {
    pub fn rename(&self, from: &Channel, to: &Channel) -> Payload {
        match self {
            Payload::Chan(c) if c == from => Payload::Chan(to.clone()),
            p => p.clone(),
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Sel(s) => write!(f, "{s}"),
            Payload::Close => f.write_str("()"),
            Payload::Chan(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Send,
    Recv,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Eps,
    Dir(Channel, Dir, Payload),
}

impl Action {
    pub fn send(c: &Channel, p: Payload) -> Action {
        Action::Dir(c.clone(), Dir::Send, p)
    }

    pub fn recv(c: &Channel, p: Payload) -> Action {
        Action::Dir(c.clone(), Dir::Recv, p)
    }

    pub fn rename(&self, from: &Channel, to: &Channel) -> Action {
        match self {
            Action::Eps => Action::Eps,
            Action::Dir(c, d, p) => {
                let c = if c == from { to.clone() } else { c.clone() };
                Action::Dir(c, *d, p.rename(from, to))
            }
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Eps => f.write_str("eps"),
            Action::Dir(c, Dir::Send, p) => write!(f, "{c}!{p}"),
            Action::Dir(c, Dir::Recv, p) => write!(f, "{c}?{p}"),
        }
    }
}

/// Extra inputs to an object-level step: the name to use for anything the
/// step allocates, and candidate channels for channel-carrying receives.
#[derive(Clone, Debug)]
pub struct StepAux {
    pub fresh: Channel,
    pub payloads: Vec<Channel>,
}

/// A process language: a term domain with a timed object-level step
/// relation, enumerated per provider channel and instant.
pub trait ProcessLanguage: Send + Sync + 'static {
    type Term: Clone + fmt::Debug + Send + Sync + 'static;
    const ID: &'static str;

    /// Canonical text; must be injective on terms.
    fn render(term: &Self::Term) -> String;

    fn step(
        term: &Self::Term,
        provider: &Channel,
        time: FinTime,
        aux: &StepAux,
    ) -> Vec<(Action, Configuration)>;

    /// Channel names occurring in the term.
    fn channels(term: &Self::Term) -> BTreeSet<Channel>;

    fn rename(term: &Self::Term, from: &Channel, to: &Channel) -> Self::Term;

    /// Instants at which the object may initiate a step on its own. Objects
    /// that only react to a partner report none.
    fn wake_times(term: &Self::Term) -> Vec<FinTime>;
}

trait DynObj: Send + Sync {
    fn step(&self, provider: &Channel, time: FinTime, aux: &StepAux) -> Vec<(Action, Configuration)>;
    fn channels(&self) -> BTreeSet<Channel>;
    fn rename(&self, from: &Channel, to: &Channel) -> NamelessObj;
    fn wake_times(&self) -> Vec<FinTime>;
    fn as_any(&self) -> &dyn Any;
}

struct Wrap<L: ProcessLanguage>(L::Term, PhantomData<L>);

impl<L: ProcessLanguage> DynObj for Wrap<L> {
    fn step(&self, provider: &Channel, time: FinTime, aux: &StepAux) -> Vec<(Action, Configuration)> {
        L::step(&self.0, provider, time, aux)
    }
    fn channels(&self) -> BTreeSet<Channel> {
        L::channels(&self.0)
    }
    fn rename(&self, from: &Channel, to: &Channel) -> NamelessObj {
        NamelessObj::new::<L>(L::rename(&self.0, from, to))
    }
    fn wake_times(&self) -> Vec<FinTime> {
        L::wake_times(&self.0)
    }
    fn as_any(&self) -> &dyn Any {
        &self.0
    }
}

/// A channel-polymorphic object of some process language. Identity is the
/// language id plus the canonical rendering of the term.
#[derive(Clone)]
pub struct NamelessObj {
    lang: &'static str,
    text: Arc<str>,
    inner: Arc<dyn DynObj>,
}

impl NamelessObj {
    pub fn new<L: ProcessLanguage>(term: L::Term) -> Self {
        let text = Arc::from(L::render(&term));
        NamelessObj { lang: L::ID, text, inner: Arc::new(Wrap::<L>(term, PhantomData)) }
    }

    pub fn lang(&self) -> &'static str {
        self.lang
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn downcast<L: ProcessLanguage>(&self) -> Option<&L::Term> {
        if self.lang != L::ID {
            return None;
        }
        self.inner.as_any().downcast_ref::<L::Term>()
    }

    pub fn step(&self, provider: &Channel, time: FinTime, aux: &StepAux) -> Vec<(Action, Configuration)> {
        self.inner.step(provider, time, aux)
    }

    pub fn channels(&self) -> BTreeSet<Channel> {
        self.inner.channels()
    }

    pub fn rename(&self, from: &Channel, to: &Channel) -> NamelessObj {
        if !self.channels().contains(from) {
            return self.clone();
        }
        self.inner.rename(from, to)
    }

    pub fn wake_times(&self) -> Vec<FinTime> {
        self.inner.wake_times()
    }
}

impl PartialEq for NamelessObj {
    fn eq(&self, other: &Self) -> bool {
        self.lang == other.lang && self.text == other.text
    }
}

impl Eq for NamelessObj {}

impl PartialOrd for NamelessObj {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NamelessObj {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.lang, &*self.text).cmp(&(other.lang, &*other.text))
    }
}

impl Hash for NamelessObj {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.lang.hash(state);
        self.text.hash(state);
    }
}

impl fmt::Debug for NamelessObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lang, self.text)
    }
}

impl fmt::Display for NamelessObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lang, self.text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicProc {
    Proc(Channel, NamelessObj),
    /// `Fwd(a, b)`: provides `a` by forwarding whatever provides `b`.
    Fwd(Channel, Channel),
}

impl AtomicProc {
    pub fn provider(&self) -> &Channel {
        match self {
            AtomicProc::Proc(c, _) | AtomicProc::Fwd(c, _) => c,
        }
    }

    pub fn channels(&self) -> BTreeSet<Channel> {
        match self {
            AtomicProc::Proc(c, o) => {
                let mut s = o.channels();
                s.insert(c.clone());
                s
            }
            AtomicProc::Fwd(a, b) => [a.clone(), b.clone()].into_iter().collect(),
        }
    }

    pub fn rename(&self, from: &Channel, to: &Channel) -> AtomicProc {
        let r = |c: &Channel| if c == from { to.clone() } else { c.clone() };
        match self {
            AtomicProc::Proc(c, o) => AtomicProc::Proc(r(c), o.rename(from, to)),
            AtomicProc::Fwd(a, b) => AtomicProc::Fwd(r(a), r(b)),
        }
    }
}

impl fmt::Display for AtomicProc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicProc::Proc(c, o) => write!(f, "proc({c}, {o})"),
            AtomicProc::Fwd(a, b) => write!(f, "fwd({a}, {b})"),
        }
    }
}

pub type Configuration = FMSet<AtomicProc>;

pub fn proc(c: &Channel, o: &NamelessObj) -> AtomicProc {
    AtomicProc::Proc(c.clone(), o.clone())
}

pub fn cfg_channels(cfg: &Configuration) -> BTreeSet<Channel> {
    let mut s = BTreeSet::new();
    for (p, _) in cfg.distinct() {
        s.extend(p.channels());
    }
    s
}

pub fn rename_cfg(cfg: &Configuration, from: &Channel, to: &Channel) -> Configuration {
    cfg.map(|p| p.rename(from, to))
}

pub fn show_cfg(cfg: &Configuration) -> String {
    let parts: Vec<String> = cfg.to_vec().iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

/// A configuration with a distinguished root object awaiting a provider name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NamelessConfig {
    pub rest: Configuration,
    pub root: NamelessObj,
}

impl NamelessConfig {
    pub fn new(rest: Configuration, root: NamelessObj) -> Self {
        NamelessConfig { rest, root }
    }

    pub fn lone(root: NamelessObj) -> Self {
        NamelessConfig { rest: Configuration::empty(), root }
    }

    /// `rest ⊎ {Proc(a, root)}`.
    pub fn instantiate(&self, a: &Channel) -> Configuration {
        let mut c = self.rest.clone();
        c.insert(proc(a, &self.root));
        c
    }

    /// Left union with a named configuration; the root is kept.
    pub fn with_rest(&self, extra: &Configuration) -> NamelessConfig {
        NamelessConfig { rest: extra.union(&self.rest), root: self.root.clone() }
    }

    pub fn rename(&self, from: &Channel, to: &Channel) -> NamelessConfig {
        NamelessConfig { rest: rename_cfg(&self.rest, from, to), root: self.root.rename(from, to) }
    }

    pub fn channels(&self) -> BTreeSet<Channel> {
        let mut s = cfg_channels(&self.rest);
        s.extend(self.root.channels());
        s
    }

    /// Inverse of `instantiate`: requires exactly one process provided at `a`.
    pub fn abstract_at(cfg: &Configuration, a: &Channel) -> Option<NamelessConfig> {
        let mut found = None;
        for (p, n) in cfg.distinct() {
            if p.provider() == a {
                if n > 1 || found.is_some() {
                    return None;
                }
                match p {
                    AtomicProc::Proc(_, o) => found = Some(p.clone()).map(|p| (p, o.clone())),
                    AtomicProc::Fwd(..) => return None,
                }
            }
        }
        let (p, root) = found?;
        Some(NamelessConfig { rest: cfg.without(&p)?, root })
    }
}

impl fmt::Display for NamelessConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", show_cfg(&self.rest), self.root)
    }
}


#[cfg(test)]
mod tests {
    use super::testlang::*;
    use super::*;

    #[test]
    fn instantiate_examples() {
        let p = obj(Toy::Close(3));
        let q = proc(&ch("b"), &obj(Toy::Tick(1)));
        let a = ch("a");
        assert_eq!(NamelessConfig::lone(p.clone()).instantiate(&a), Configuration::singleton(proc(&a, &p)));
        let nc = NamelessConfig::new(Configuration::singleton(q.clone()), p.clone());
        assert_eq!(nc.instantiate(&a), Configuration::from_vec(vec![q.clone(), proc(&a, &p)]));
        let extra = Configuration::singleton(proc(&ch("c"), &obj(Toy::Done)));
        assert_eq!(nc.with_rest(&extra).instantiate(&a), extra.union(&nc.instantiate(&a)));
        assert_eq!(NamelessConfig::abstract_at(&nc.instantiate(&a), &a), Some(nc));
    }

    #[test]
    fn fresh_names_avoid_config() {
        let cfg = Configuration::from_vec(vec![AtomicProc::Fwd(Channel::fresh(4), ch("a"))]);
        let mut f = Fresh::starting_after(&cfg);
        assert_eq!(f.next(), Channel::fresh(5));
        assert!(!cfg_channels(&cfg).contains(&f.next()));
    }
}
