//! Entailment over natural-valued time variables.
//!
//! Atoms are difference constraints `x - y <= c`. Disjunctions are split
//! lazily and each branch is closed with Floyd-Warshall; a branch is
//! consistent iff its constraint graph has no negative cycle.

use super::{Cmp, Ident, Pred, TExpr};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// `G; F`: time variables in scope and hypotheses over them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HypSet {
    pub gvars: BTreeSet<Ident>,
    pub hyps: Vec<Pred>,
}

pub type Valuation = BTreeMap<Ident, u64>;

impl HypSet {
    pub fn new() -> Self {
        HypSet::default()
    }

    pub fn from_parts(gvars: impl IntoIterator<Item = Ident>, hyps: impl IntoIterator<Item = Pred>) -> Self {
        HypSet { gvars: gvars.into_iter().collect(), hyps: hyps.into_iter().collect() }
    }

    pub fn with_var(&self, v: &Ident) -> Self {
        let mut h = self.clone();
        h.gvars.insert(v.clone());
        h
    }

    pub fn with_hyp(&self, p: Pred) -> Self {
        let mut h = self.clone();
        if p != Pred::True && !h.hyps.contains(&p) {
            h.hyps.push(p);
        }
        h
    }

    pub fn entails(&self, goal: &Pred) -> bool {
        entails(self, goal)
    }

    pub fn satisfiable(&self) -> bool {
        satisfiable(self)
    }

    /// Replaces every time variable with its value.
    pub fn instantiate(&self, val: &Valuation) -> HypSet {
        let hyps = self.hyps.iter().map(|p| instantiate_pred(p, val)).collect();
        HypSet { gvars: self.gvars.iter().filter(|v| !val.contains_key(*v)).cloned().collect(), hyps }
    }
}

pub(crate) fn instantiate_pred(p: &Pred, val: &Valuation) -> Pred {
    val.iter().fold(p.clone(), |p, (v, n)| p.subst(v, &TExpr::lit(*n)))
}

impl fmt::Display for HypSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<&str> = self.gvars.iter().map(|v| &**v).collect();
        let h: Vec<String> = self.hyps.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}; {{{}}}", g.join(", "), h.join(", "))
    }
}

/// A named entailment check recorded by the type checker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub hyps: HypSet,
    pub goal: Pred,
}

impl Obligation {
    pub fn new(hyps: &HypSet, goal: Pred) -> Self {
        Obligation { hyps: hyps.clone(), goal }
    }

    pub fn holds(&self) -> bool {
        entails(&self.hyps, &self.goal)
    }
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.hyps, self.goal)
    }
}

/// `x - y <= c`, with `None` standing for the constant zero.
#[derive(Clone, Debug)]
struct Diff {
    x: Option<Ident>,
    y: Option<Ident>,
    c: i128,
}

/// `a + s <= b`, as a difference constraint.
fn le_shift(a: &TExpr, s: i128, b: &TExpr) -> Diff {
    Diff { x: a.var.clone(), y: b.var.clone(), c: b.k as i128 - a.k as i128 - s }
}

enum Lits {
    One(Vec<Diff>),
    Either(Pred, Pred),
}

fn literal(a: &TExpr, c: Cmp, b: &TExpr, positive: bool) -> Lits {
    match (c, positive) {
        (Cmp::Le, true) => Lits::One(vec![le_shift(a, 0, b)]),
        (Cmp::Lt, true) => Lits::One(vec![le_shift(a, 1, b)]),
        (Cmp::Eq, true) => Lits::One(vec![le_shift(a, 0, b), le_shift(b, 0, a)]),
        (Cmp::Le, false) => Lits::One(vec![le_shift(b, 1, a)]),
        (Cmp::Lt, false) => Lits::One(vec![le_shift(b, 0, a)]),
        (Cmp::Eq, false) => Lits::Either(
            Pred::atom(a.clone(), Cmp::Lt, b.clone()),
            Pred::atom(b.clone(), Cmp::Lt, a.clone()),
        ),
    }
}

/// Searches for a consistent branch of the conjunction of `goals`; returns
/// the least model of the first one found.
fn search(mut goals: Vec<(Pred, bool)>, mut lits: Vec<Diff>) -> Option<Valuation> {
    while let Some((p, pos)) = goals.pop() {
        match (p, pos) {
            (Pred::True, true) | (Pred::False, false) => {}
            (Pred::True, false) | (Pred::False, true) => return None,
            (Pred::Not(a), pos) => goals.push((*a, !pos)),
            (Pred::And(a, b), true) | (Pred::Or(a, b), false) => {
                goals.push((*a, pos));
                goals.push((*b, pos));
            }
            (Pred::Or(a, b), true) | (Pred::And(a, b), false) => {
                let mut left = goals.clone();
                left.push((*a, pos));
                if let Some(m) = search(left, lits.clone()) {
                    return Some(m);
                }
                goals.push((*b, pos));
            }
            (Pred::Atom(a, c, b), pos) => match literal(&a, c, &b, pos) {
                Lits::One(ds) => {
                    lits.extend(ds);
                    if !consistent(&lits) {
                        return None;
                    }
                }
                Lits::Either(l, r) => {
                    let mut left = goals.clone();
                    left.push((l, true));
                    if let Some(m) = search(left, lits.clone()) {
                        return Some(m);
                    }
                    goals.push((r, true));
                }
            },
        }
    }
    least_model(&lits)
}

fn consistent(lits: &[Diff]) -> bool {
    closure(lits).is_some()
}

type Closure = (Vec<Option<Ident>>, Vec<Vec<Option<i128>>>);

/// All-pairs shortest paths; `None` on a negative cycle. Node 0 is zero,
/// and every variable is at least zero.
fn closure(lits: &[Diff]) -> Option<Closure> {
    let mut nodes: Vec<Option<Ident>> = vec![None];
    let index = |v: &Option<Ident>, nodes: &mut Vec<Option<Ident>>| match nodes.iter().position(|n| n == v) {
        Some(i) => i,
        None => {
            nodes.push(v.clone());
            nodes.len() - 1
        }
    };
    let mut edges = Vec::new();
    for d in lits {
        let x = index(&d.x, &mut nodes);
        let y = index(&d.y, &mut nodes);
        edges.push((y, x, d.c));
    }
    let n = nodes.len();
    let mut dist = vec![vec![None; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = Some(0i128);
        if i > 0 {
            row[0] = Some(0);
        }
    }
    for (from, to, c) in edges {
        let e = &mut dist[from][to];
        *e = Some(e.map_or(c, |old| old.min(c)));
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = dist[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = dist[k][j] {
                    let via = ik + kj;
                    if dist[i][j].is_none_or(|d| via < d) {
                        dist[i][j] = Some(via);
                    }
                }
            }
        }
    }
    if (0..n).any(|i| dist[i][i].unwrap_or(0) < 0) {
        return None;
    }
    Some((nodes, dist))
}

/// The pointwise least solution: each variable gets minus its distance to
/// zero.
fn least_model(lits: &[Diff]) -> Option<Valuation> {
    let (nodes, dist) = closure(lits)?;
    let mut m = Valuation::new();
    for (i, v) in nodes.iter().enumerate().skip(1) {
        let d = dist[i][0].expect("every variable reaches zero");
        m.insert(v.clone().expect("non-zero node"), (-d) as u64);
    }
    Some(m)
}

/// A valuation of `G` satisfying every hypothesis, if one exists.
pub fn find_model(h: &HypSet) -> Option<Valuation> {
    let goals = h.hyps.iter().rev().map(|p| (p.clone(), true)).collect();
    let mut m = search(goals, vec![])?;
    for v in &h.gvars {
        m.entry(v.clone()).or_insert(0);
    }
    Some(m)
}

pub fn satisfiable(h: &HypSet) -> bool {
    find_model(h).is_some()
}

fn cache() -> &'static Mutex<HashMap<(Vec<Pred>, Pred), bool>> {
    static CACHE: OnceLock<Mutex<HashMap<(Vec<Pred>, Pred), bool>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `G; F ⊢ goal`: every valuation satisfying `F` satisfies `goal`.
pub fn entails(h: &HypSet, goal: &Pred) -> bool {
    let mut key_hyps = h.hyps.clone();
    key_hyps.sort();
    key_hyps.dedup();
    let key = (key_hyps, goal.clone());
    if let Some(r) = cache().lock().expect("cache poisoned").get(&key) {
        return *r;
    }
    let mut goals: Vec<(Pred, bool)> = vec![(goal.clone(), false)];
    goals.extend(h.hyps.iter().rev().map(|p| (p.clone(), true)));
    let r = search(goals, vec![]).is_none();
    cache().lock().expect("cache poisoned").insert(key, r);
    r
}
