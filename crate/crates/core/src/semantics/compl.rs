//! Complementary configurations: closing environments for open terms.

use super::relation::{Checker, Mode, Verdict};
use crate::lts::{Configuration, NamelessConfig, NamelessObj};
use crate::proc::{Ctx, Subst};
use crate::time::FinTime;
use crate::trajectory::{ct_interleave, Ct, CtError};
use crate::lts::Channel;
use crate::types::Ident;
use std::collections::BTreeMap;

/// Each free variable mapped to the channel that replaces it and a
/// trajectory providing that channel.
pub type ComplConfig = BTreeMap<Ident, (Channel, Ct)>;

/// `(⊎ start(w)[c], root)` over the entries of `delta`.
pub fn apply_compl(delta: &ComplConfig, root: &NamelessObj) -> NamelessConfig {
    let mut rest = Configuration::empty();
    for (c, w) in delta.values() {
        rest = rest.union(&w.start.instantiate(c));
    }
    NamelessConfig::new(rest, root.clone())
}

pub fn subst_of(delta: &ComplConfig) -> Subst {
    delta.iter().map(|(x, (c, _))| (x.clone(), c.clone())).collect()
}

/// Folds `ct_interleave` over `delta` in key order, the root staying with `w`.
pub fn ct_interleave_compl(w: &Ct, delta: &ComplConfig) -> Result<Ct, CtError> {
    let mut acc = w.clone();
    for (c, wx) in delta.values() {
        acc = ct_interleave(wx, &acc, c)?;
    }
    Ok(acc)
}

/// Splits `delta` along a disjoint decomposition of its context.
pub fn split_compl(delta: &ComplConfig, left: &Ctx, right: &Ctx) -> Result<(ComplConfig, ComplConfig), String> {
    if let Some(x) = left.keys().find(|x| right.contains_key(*x)) {
        return Err(format!("`{x}` is on both sides"));
    }
    let mut d1 = ComplConfig::new();
    let mut d2 = ComplConfig::new();
    for (x, e) in delta {
        if left.contains_key(x) {
            d1.insert(x.clone(), e.clone());
        } else if right.contains_key(x) {
            d2.insert(x.clone(), e.clone());
        } else {
            return Err(format!("`{x}` is in neither context"));
        }
    }
    for x in left.keys().chain(right.keys()) {
        if !delta.contains_key(x) {
            return Err(format!("`{x}` has no entry"));
        }
    }
    Ok((d1, d2))
}

/// Same domain as `ctx`, and each trajectory a client-mode inhabitant of
/// its type at `t`. Only failures count against relatedness.
pub fn related(delta: &ComplConfig, ctx: &Ctx, t: FinTime, ck: &mut Checker) -> Verdict {
    if !delta.keys().eq(ctx.keys()) {
        return Verdict::Fail("domain differs from the context".into());
    }
    let mut names = std::collections::BTreeSet::new();
    Verdict::all(ctx.iter().map(|(x, a)| {
        let (c, w) = &delta[x];
        if !names.insert(c.clone()) {
            return Verdict::Fail(format!("channel {c} used twice"));
        }
        if w.lo != t {
            return Verdict::Fail(format!("`{x}` starts at {} rather than {t}", w.lo));
        }
        ck.term_member(w, a, t, Mode::Star).within(format!("`{x}` at {c}"))
    }))
}
