//! Finite multisets in canonical form.

use std::collections::BTreeMap;
use std::fmt;

/// A finite multiset kept as a sorted element/multiplicity map, so two
/// multisets are equal exactly when their canonical forms are.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FMSet<X: Ord> {
    counts: BTreeMap<X, usize>,
}

impl<X: Ord> Default for FMSet<X> {
    fn default() -> Self {
        FMSet { counts: BTreeMap::new() }
    }
}

impl<X: Ord + Clone> FMSet<X> {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(x: X) -> Self {
        let mut m = Self::empty();
        m.insert(x);
        m
    }

    pub fn from_vec(xs: Vec<X>) -> Self {
        let mut m = Self::empty();
        for x in xs {
            m.insert(x);
        }
        m
    }

    pub fn insert(&mut self, x: X) {
        *self.counts.entry(x).or_insert(0) += 1;
    }

    /// Disjoint union: multiplicities add.
    pub fn union(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (x, n) in &other.counts {
            *m.counts.entry(x.clone()).or_insert(0) += n;
        }
        m
    }

    pub fn map<Y: Ord + Clone>(&self, f: impl Fn(&X) -> Y) -> FMSet<Y> {
        let mut m = FMSet::empty();
        for (x, n) in &self.counts {
            *m.counts.entry(f(x)).or_insert(0) += n;
        }
        m
    }

    pub fn equal(&self, other: &Self) -> bool {
        self == other
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, x: &X) -> usize {
        self.counts.get(x).copied().unwrap_or(0)
    }

    /// Elements in canonical order, repeated by multiplicity.
    pub fn to_vec(&self) -> Vec<X> {
        let mut v = Vec::with_capacity(self.len());
        for (x, n) in &self.counts {
            for _ in 0..*n {
                v.push(x.clone());
            }
        }
        v
    }

    pub fn distinct(&self) -> impl Iterator<Item = (&X, usize)> {
        self.counts.iter().map(|(x, n)| (x, *n))
    }

    /// The multiset with one copy of `x` removed, if present.
    pub fn without(&self, x: &X) -> Option<Self> {
        let n = *self.counts.get(x)?;
        let mut m = self.clone();
        if n == 1 {
            m.counts.remove(x);
        } else {
            m.counts.insert(x.clone(), n - 1);
        }
        Some(m)
    }

    /// Removes every element of `sub` (with multiplicity); `None` if `sub`
    /// is not contained in `self`.
    pub fn without_all(&self, sub: &Self) -> Option<Self> {
        let mut m = self.clone();
        for (x, n) in &sub.counts {
            let have = m.counts.get(x).copied().unwrap_or(0);
            if have < *n {
                return None;
            }
            if have == *n {
                m.counts.remove(x);
            } else {
                m.counts.insert(x.clone(), have - n);
            }
        }
        Some(m)
    }
}

impl<X: Ord + Clone> FromIterator<X> for FMSet<X> {
    fn from_iter<I: IntoIterator<Item = X>>(iter: I) -> Self {
        let mut m = Self::empty();
        for x in iter {
            m.insert(x);
        }
        m
    }
}

impl<X: Ord + Clone + fmt::Debug> fmt::Debug for FMSet<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.to_vec()).finish()
    }
}
