//! Generators and corpus loading shared by the integration tests.
#![allow(dead_code)]

pub mod laws;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use timedsess::beacon::{beacon_obj, Window};
use timedsess::lts::{enabled_steps, proc, Action, AtomicProc, Channel, Configuration, MsNode, Multistep};
use timedsess::proc::{closed_obj, typecheck, Ctx, Derivation};
use timedsess::syntax::{parse_term, parse_type, ProcDef, SpecFile};
use timedsess::time::{Fin, FinTime, Inf, Time};
use timedsess::trajectory::{Realization, Traj, Trajectory};
use timedsess::types::{ident, HypSet, TExpr};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- corpus

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn tsess_files(dir: PathBuf) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "tsess"))
        .collect();
    v.sort();
    v
}

pub struct Program {
    pub file: String,
    pub def: ProcDef,
    pub der: Derivation,
}

impl Program {
    pub fn label(&self) -> String {
        format!("{}:{}", self.file, self.def.name)
    }
}

pub fn derive(d: &ProcDef) -> Result<Derivation, String> {
    typecheck(&d.hypset(), &d.context(), &d.body, &d.time, &d.ty).map_err(|e| e.report())
}

/// Every process of every accepted corpus file, type checked.
pub fn corpus() -> Vec<Program> {
    let mut out = Vec::new();
    for path in tsess_files(corpus_dir()) {
        let file = path.file_name().unwrap().to_string_lossy().into_owned();
        let spec = SpecFile::parse(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{file}: {e}"));
        for def in spec.procs() {
            let der = derive(def).unwrap_or_else(|e| panic!("{file}:{}:\n{e}", def.name));
            out.push(Program { file: file.clone(), def: def.clone(), der });
        }
    }
    out
}

/// The rejected corpus: file name and source.
pub fn rejected() -> Vec<(String, String)> {
    tsess_files(corpus_dir().join("rejected"))
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

// ---------------------------------------------------------- configurations

/// A small configuration of forwarders over a few names; cheap to compare
/// and enough to tell trajectory values apart.
pub fn rand_cfg(r: &mut ChaCha8Rng) -> Configuration {
    let names = ["p", "q", "r", "s"];
    let n = r.gen_range(0..=3);
    Configuration::from_vec(
        (0..n)
            .map(|_| AtomicProc::Fwd(Channel::new(names.choose(r).unwrap()), Channel::new(names.choose(r).unwrap())))
            .collect(),
    )
}

/// A piecewise trajectory on `[lo, hi)` with at most `max_segs` pieces.
pub fn rand_traj_on(r: &mut ChaCha8Rng, lo: FinTime, hi: Time, max_segs: usize) -> Trajectory {
    let top = match hi {
        Fin(h) => h,
        Inf => lo.max(50) + 1,
    };
    let n = if lo + 1 < top { r.gen_range(0..max_segs) } else { 0 };
    let mut cuts: Vec<FinTime> = (0..n).map(|_| r.gen_range(lo + 1..top)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let segs = std::iter::once(lo).chain(cuts).map(|t| (t, rand_cfg(r))).collect();
    Traj::from_segments(lo, hi, segs).unwrap()
}

/// Interval end: finite in `lo + 1..=50` or, one time in four, infinite.
pub fn rand_hi(r: &mut ChaCha8Rng, lo: FinTime) -> Time {
    if r.gen_ratio(1, 4) {
        Inf
    } else {
        Fin(r.gen_range(lo + 1..=lo.max(49) + 1))
    }
}

/// The value of `s` at every integer instant of its domain, up to the
/// point where it is constant.
pub fn graph(s: &Trajectory) -> Vec<(FinTime, Configuration)> {
    let end = match s.hi() {
        Fin(h) => h,
        Inf => 64,
    };
    (s.lo()..end).map(|t| (t, s.sample(t).expect("in domain").clone())).collect()
}

pub fn same_graph(a: &Trajectory, b: &Trajectory) -> bool {
    a.lo() == b.lo() && a.hi() == b.hi() && graph(a) == graph(b)
}

// ------------------------------------------------------------------ runs

pub fn timed(src: &str) -> timedsess::lts::NamelessObj {
    closed_obj(parse_term(src).unwrap_or_else(|e| panic!("{src}: {e}")))
}

/// A few independent exchanges, named under `prefix`. Each is a provider
/// that closes at `k` (a timed closer or a beacon), possibly behind a
/// forwarder, and a client that receives the close at `k`.
pub fn rand_run_cfg(r: &mut ChaCha8Rng, prefix: &str, t0: FinTime) -> Configuration {
    let mut cfg = Configuration::empty();
    for i in 0..r.gen_range(1..=3) {
        let k = t0 + r.gen_range(0..6);
        let m = k + r.gen_range(0..4);
        let c = Channel::new(&format!("{prefix}c{i}"));
        let d = Channel::new(&format!("{prefix}d{i}"));
        let provider = if r.gen_bool(0.5) { timed(&format!("send{{t | t == {k}}}()")) } else { beacon_obj(Window::new(k, Some(k + 1))) };
        cfg.insert(proc(&c, &provider));
        let listen = if r.gen_bool(0.3) {
            let e = Channel::new(&format!("{prefix}e{i}"));
            cfg.insert(AtomicProc::Fwd(e.clone(), c));
            e
        } else {
            c
        };
        cfg.insert(proc(&d, &timed(&format!("recv{{{k}}} '{}(); send{{t | t == {m}}}()", listen.name()))));
    }
    cfg
}

/// A random valid multistep of at most `depth` nodes from `cfg` at `t`:
/// silent steps when some are enabled, idling otherwise.
pub fn rand_run_from(r: &mut ChaCha8Rng, cfg: Configuration, t: FinTime, depth: usize) -> Multistep {
    let mut cfg = cfg;
    let mut t = t;
    let mut nodes = Vec::new();
    for _ in 0..r.gen_range(0..=depth) {
        let silent: Vec<_> = enabled_steps(&cfg, t).into_iter().filter(|s| s.action == Action::Eps).collect();
        if !silent.is_empty() && r.gen_ratio(3, 4) {
            let s = silent.choose(r).unwrap();
            cfg = s.target.clone();
            nodes.push(MsNode::StepC { step: s.cert.clone() });
        } else {
            let to = t + r.gen_range(1..=3);
            nodes.push(MsNode::StepT { cfg: cfg.clone(), from: t, to });
            t = to;
        }
    }
    Multistep { nodes, last: (cfg, t) }
}

pub fn rand_run(r: &mut ChaCha8Rng, prefix: &str, t0: FinTime, depth: usize) -> Multistep {
    let cfg = rand_run_cfg(r, prefix, t0);
    rand_run_from(r, cfg, t0, depth)
}

/// The trajectory a run traces, idle after its end until `hi`.
pub fn traced(sigma: &Multistep, hi: Time) -> Trajectory {
    let mut segs: Vec<(FinTime, Configuration)> = sigma
        .nodes
        .iter()
        .filter_map(|n| match n {
            MsNode::StepT { cfg, from, .. } => Some((*from, cfg.clone())),
            MsNode::StepC { .. } => None,
        })
        .collect();
    segs.push((sigma.last.1, sigma.last.0.clone()));
    Traj::from_segments(sigma.start_time(), hi, segs).unwrap()
}

pub fn realization_of(sigma: &Multistep, hi: Time) -> Realization {
    Realization::from_run(sigma.clone(), &traced(sigma, hi)).unwrap()
}

/// An interval end strictly after `t`.
pub fn hi_after(r: &mut ChaCha8Rng, t: FinTime) -> Time {
    if r.gen_ratio(1, 4) {
        Inf
    } else {
        Fin(t + r.gen_range(1..=4))
    }
}

// ------------------------------------------------------- well-typed terms

/// How a context variable is consumed.
#[derive(Clone, Debug)]
enum Use {
    /// `1{s | s == c}`
    Unit(u64),
    /// `1{s | s == c1} * {t | t == c} 1{s | s == c2}`, and likewise.
    Tensor(u64, u64, u64),
    With(u64, u64, u64),
    Plus(u64, u64, u64),
    /// `1{s | s == arg} -o{t | t == c} 1{s | s == res}`
    Lolli(u64, u64, u64),
}

impl Use {
    fn ty(&self) -> String {
        let one = |k: u64| format!("1{{s | s == {k}}}");
        match *self {
            Use::Unit(c) => one(c),
            Use::Tensor(c, a, b) => format!("{} *{{t | t == {c}}} {}", one(a), one(b)),
            Use::With(c, a, b) => format!("{} &{{t | t == {c}}} {}", one(a), one(b)),
            Use::Plus(c, a, b) => format!("{} +{{t | t == {c}}} {}", one(a), one(b)),
            Use::Lolli(c, a, b) => format!("{} -o{{t | t == {c}}} {}", one(a), one(b)),
        }
    }

    fn first(&self) -> u64 {
        match *self {
            Use::Unit(c) | Use::Tensor(c, ..) | Use::With(c, ..) | Use::Plus(c, ..) | Use::Lolli(c, ..) => c,
        }
    }
}

struct TermGen<'a> {
    r: &'a mut ChaCha8Rng,
    next: u32,
}

/// A generated term with its context, time and type, all as source text.
#[derive(Clone, Debug)]
pub struct Generated {
    pub ctx: Vec<(String, String)>,
    pub time: u64,
    pub term: String,
    pub ty: String,
}

impl Generated {
    pub fn derive(&self) -> Result<Derivation, String> {
        let ctx: Ctx = self.ctx.iter().map(|(x, a)| (ident(x), parse_type(a).unwrap())).collect();
        let m = parse_term(&self.term).map_err(|e| format!("{}: {e}", self.term))?;
        let a = parse_type(&self.ty).map_err(|e| format!("{}: {e}", self.ty))?;
        typecheck(&HypSet::new(), &ctx, &m, &TExpr::lit(self.time), &a).map_err(|e| e.report())
    }
}

impl TermGen<'_> {
    fn name(&mut self, base: &str) -> String {
        self.next += 1;
        format!("{base}{}", self.next)
    }

    fn rand_use(&mut self, now: u64) -> Use {
        let c = now + self.r.gen_range(0..4);
        let a = c + self.r.gen_range(0..4);
        let b = c + self.r.gen_range(0..4);
        match self.r.gen_range(0..6) {
            0 => Use::Tensor(c, a, b),
            1 => Use::With(c, a, b),
            2 => Use::Plus(c, a, a),
            3 => Use::Lolli(c, a, a.max(b)),
            _ => Use::Unit(c),
        }
    }

    /// A term over `ctx` at time `at` (an expression whose value is `now`),
    /// and the type it provides.
    fn term(&mut self, mut ctx: Vec<(String, Use)>, at: &str, now: u64, depth: u32) -> (String, String) {
        // consume the earliest variable first so every left rule is on time
        ctx.sort_by_key(|(_, u)| u.first());
        let consume = !ctx.is_empty() && (depth == 0 || self.r.gen_ratio(1, 2));
        if consume {
            if ctx.len() == 1 && matches!(ctx[0].1, Use::Unit(_)) && self.r.gen_ratio(1, 4) {
                let (x, u) = &ctx[0];
                return (format!("fwd{{{at}}}({x})"), u.ty());
            }
            let (x, u) = ctx.remove(0);
            return match u {
                Use::Unit(c) => {
                    let (m, a) = self.term(ctx, &c.to_string(), c, depth);
                    (format!("recv{{{c}}} {x}(); {m}"), a)
                }
                Use::Tensor(c, a, b) => {
                    let y = self.name("y");
                    ctx.push((y.clone(), Use::Unit(a)));
                    ctx.push((x.clone(), Use::Unit(b)));
                    let (m, ty) = self.term(ctx, &c.to_string(), c, depth);
                    (format!("recv{{{c}}} {x}({y} => {m})"), ty)
                }
                Use::With(c, a, b) => {
                    let (sel, k) = if self.r.gen_bool(0.5) { ("pi1", a) } else { ("pi2", b) };
                    ctx.push((x.clone(), Use::Unit(k)));
                    let (m, ty) = self.term(ctx, &c.to_string(), c, depth);
                    (format!("{x}.select{{{c}}}({sel}); {m}"), ty)
                }
                Use::Plus(c, a, _) => {
                    // both branches continue alike, so the shared tail is generated once
                    let (m, ty) = self.term(ctx, &a.to_string(), a, depth);
                    (format!("case{{{c}}} {x}(pi1 => recv{{{a}}} {x}(); {m} | pi2 => recv{{{a}}} {x}(); {m})"), ty)
                }
                Use::Lolli(c, a, b) => {
                    ctx.push((x.clone(), Use::Unit(b)));
                    let (m, ty) = self.term(ctx, &c.to_string(), c, depth);
                    (format!("send{{{c}}} {x}(send{{s | s == {a}}}()); {m}"), ty)
                }
            };
        }
        if depth == 0 || self.r.gen_ratio(1, 5) {
            let k = now + self.r.gen_range(0..4);
            return (format!("send{{w | w == {k}}}()"), format!("1{{w | w == {k}}}"));
        }
        let v = self.name("t");
        let k = now + self.r.gen_range(0..3);
        let guard = format!("{{{v} | {v} == {k}}}");
        match self.r.gen_range(0..5) {
            0 => {
                let x = self.name("x");
                let u = self.rand_use(k);
                let uty = u.ty();
                ctx.push((x.clone(), u));
                let (m, b) = self.term(ctx, &v, k, depth - 1);
                (format!("recv{guard}({x} => {m})"), format!("({uty}) -o{guard} ({b})"))
            }
            1 => {
                let (left, right): (Vec<_>, Vec<_>) = ctx.into_iter().partition(|_| self.r.gen_bool(0.5));
                let (m1, a1) = self.term(left, &v, k, depth - 1);
                let (m2, a2) = self.term(right, &v, k, depth - 1);
                (format!("send{guard}({m1}); {m2}"), format!("({a1}) *{guard} ({a2})"))
            }
            2 => {
                let (m1, a1) = self.term(ctx.clone(), &v, k, depth - 1);
                let (m2, a2) = self.term(ctx, &v, k, depth - 1);
                (format!("case{guard}(pi1 => {m1} | pi2 => {m2})"), format!("({a1}) &{guard} ({a2})"))
            }
            3 => {
                let (m, a) = self.term(ctx, &v, k, depth - 1);
                let other = format!("1{{w | w == {}}}", k + 1);
                if self.r.gen_bool(0.5) {
                    (format!("select{guard}(pi1); {m}"), format!("({a}) +{guard} ({other})"))
                } else {
                    (format!("select{guard}(pi2); {m}"), format!("({other}) +{guard} ({a})"))
                }
            }
            _ => {
                // a cut at the current time; the cut variable joins the context
                let z = self.name("z");
                let u = self.rand_use(now);
                let def = provider_of(&u);
                let uty = u.ty();
                ctx.push((z.clone(), u));
                let (m, a) = self.term(ctx, at, now, depth - 1);
                (format!("let{{{at}}} {z} : {uty} = {def}; {m}"), a)
            }
        }
    }
}

/// A closed term providing the type of `u` at a time no later than its
/// first exchange.
fn provider_of(u: &Use) -> String {
    let close = |k: u64| format!("send{{s | s == {k}}}()");
    match *u {
        Use::Unit(c) => close(c),
        Use::Tensor(c, a, b) => format!("send{{t | t == {c}}}({}); {}", close(a), close(b)),
        Use::With(c, a, b) => format!("case{{t | t == {c}}}(pi1 => {} | pi2 => {})", close(a), close(b)),
        Use::Plus(c, a, _) => format!("select{{t | t == {c}}}(pi1); {}", close(a)),
        Use::Lolli(c, a, b) => format!("recv{{t | t == {c}}}(y => recv{{{a}}} y(); {})", close(b)),
    }
}

/// A random well-typed term. Candidates the checker rejects are redrawn;
/// the generator is only a source of shapes, the checker is the judge.
pub fn rand_typed(r: &mut ChaCha8Rng) -> (Generated, Derivation) {
    loop {
        let time = r.gen_range(0..5);
        let mut g = TermGen { r, next: 0 };
        let ctx: Vec<(String, Use)> = (0..g.r.gen_range(0..=2)).map(|i| (format!("v{i}"), g.rand_use(time))).collect();
        let depth = g.r.gen_range(1..=3);
        let (term, ty) = g.term(ctx.clone(), &time.to_string(), time, depth);
        let gen = Generated { ctx: ctx.iter().map(|(x, u)| (x.clone(), u.ty())).collect(), time, term, ty };
        if let Ok(d) = gen.derive() {
            return (gen, d);
        }
    }
}
