//! Piecewise-constant trajectories over half-open intervals `[lo, hi)`.

mod computable;
mod realize;

pub use computable::*;
pub use realize::*;

use crate::lts::{Channel, Configuration, NamelessConfig};
use crate::time::{Fin, FinTime, Time};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrajError {
    #[error("empty interval [{0}, {1})")]
    Empty(FinTime, Time),
    #[error("interval mismatch: {0}")]
    Interval(String),
    #[error("time {0} out of range [{1}, {2})")]
    Range(FinTime, FinTime, Time),
}

/// A trajectory in canonical form: segment starts strictly increase, the
/// first equals `lo`, all lie below `hi`, and adjacent values differ. Graph
/// equality is therefore structural equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traj<C> {
    lo: FinTime,
    hi: Time,
    segs: Vec<(FinTime, C)>,
}

pub type Trajectory = Traj<Configuration>;
pub type NamelessTrajectory = Traj<NamelessConfig>;

impl<C: Clone + Eq> Traj<C> {
    pub fn constant(c: C, lo: FinTime, hi: Time) -> Result<Self, TrajError> {
        if !Fin(lo).lt(hi) {
            return Err(TrajError::Empty(lo, hi));
        }
        Ok(Traj { lo, hi, segs: vec![(lo, c)] })
    }

    /// Builds from arbitrary `(start, value)` pieces; merges equal neighbours.
    pub fn from_segments(lo: FinTime, hi: Time, segs: Vec<(FinTime, C)>) -> Result<Self, TrajError> {
        if !Fin(lo).lt(hi) {
            return Err(TrajError::Empty(lo, hi));
        }
        if segs.first().map(|s| s.0) != Some(lo) {
            return Err(TrajError::Interval("first segment must start at lo".into()));
        }
        for w in segs.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(TrajError::Interval("segment starts must increase".into()));
            }
        }
        if let Some((t, _)) = segs.last() {
            if !Fin(*t).lt(hi) {
                return Err(TrajError::Interval("segment starts at or after hi".into()));
            }
        }
        Ok(Traj { lo, hi, segs: canonical(segs) })
    }

    pub fn lo(&self) -> FinTime {
        self.lo
    }

    pub fn hi(&self) -> Time {
        self.hi
    }

    pub fn segments(&self) -> &[(FinTime, C)] {
        &self.segs
    }

    pub fn contains(&self, t: FinTime) -> bool {
        self.lo <= t && Fin(t).lt(self.hi)
    }

    pub fn sample(&self, t: FinTime) -> Option<&C> {
        if !self.contains(t) {
            return None;
        }
        let i = self.segs.partition_point(|(s, _)| *s <= t);
        Some(&self.segs[i - 1].1)
    }

    /// Value in force just before `t`, for `lo < t <= hi`.
    pub fn sample_before(&self, t: FinTime) -> Option<&C> {
        if t <= self.lo || Time::Fin(t - 1) >= self.hi {
            return None;
        }
        self.sample(t - 1)
    }

    /// Instants in `(lo, hi)` where the value changes.
    pub fn breakpoints(&self) -> impl Iterator<Item = FinTime> + '_ {
        self.segs.iter().skip(1).map(|(t, _)| *t)
    }

    pub fn concat(&self, other: &Self) -> Result<Self, TrajError> {
        if self.hi != Fin(other.lo) {
            return Err(TrajError::Interval(format!("{} != {}", self.hi, other.lo)));
        }
        let mut segs = self.segs.clone();
        segs.extend(other.segs.iter().cloned());
        Ok(Traj { lo: self.lo, hi: other.hi, segs: canonical(segs) })
    }

    /// `c` on `[t, lo)`, then `self`.
    pub fn extend(c: C, t: FinTime, s: &Self) -> Result<Self, TrajError> {
        if t > s.lo {
            return Err(TrajError::Range(t, 0, Fin(s.lo)));
        }
        if t == s.lo {
            return Ok(s.clone());
        }
        Traj::constant(c, t, Fin(s.lo))?.concat(s)
    }

    /// Restriction to `[lo, t)`; requires `lo < t <= hi`.
    pub fn partition_before(&self, t: FinTime) -> Result<Self, TrajError> {
        if t <= self.lo || self.hi.lt(Fin(t)) {
            return Err(TrajError::Range(t, self.lo, self.hi));
        }
        let segs = self.segs.iter().filter(|(s, _)| *s < t).cloned().collect();
        Ok(Traj { lo: self.lo, hi: Fin(t), segs })
    }

    /// Restriction to `[t, hi)`; requires `lo <= t < hi`.
    pub fn partition_after(&self, t: FinTime) -> Result<Self, TrajError> {
        let v = self.sample(t).ok_or(TrajError::Range(t, self.lo, self.hi))?.clone();
        let mut segs = vec![(t, v)];
        segs.extend(self.segs.iter().filter(|(s, _)| *s > t).cloned());
        Ok(Traj { lo: t, hi: self.hi, segs })
    }

    /// Pointwise combination of two trajectories over the same interval.
    pub fn zip_with<D: Clone + Eq, E: Clone + Eq>(
        &self,
        other: &Traj<D>,
        f: impl Fn(&C, &D) -> E,
    ) -> Result<Traj<E>, TrajError> {
        if self.lo != other.lo || self.hi != other.hi {
            return Err(TrajError::Interval(format!(
                "[{}, {}) vs [{}, {})",
                self.lo, self.hi, other.lo, other.hi
            )));
        }
        let mut starts: Vec<FinTime> = self.segs.iter().map(|s| s.0).chain(other.segs.iter().map(|s| s.0)).collect();
        starts.sort_unstable();
        starts.dedup();
        let segs = starts
            .into_iter()
            .map(|t| (t, f(self.sample(t).expect("in range"), other.sample(t).expect("in range"))))
            .collect();
        Ok(Traj { lo: self.lo, hi: self.hi, segs: canonical(segs) })
    }

    pub fn map<D: Clone + Eq>(&self, f: impl Fn(&C) -> D) -> Traj<D> {
        let segs = self.segs.iter().map(|(t, c)| (*t, f(c))).collect();
        Traj { lo: self.lo, hi: self.hi, segs: canonical(segs) }
    }
}

fn canonical<C: Eq>(segs: Vec<(FinTime, C)>) -> Vec<(FinTime, C)> {
    let mut out: Vec<(FinTime, C)> = Vec::with_capacity(segs.len());
    for (t, c) in segs {
        if out.last().map(|(_, d)| *d == c).unwrap_or(false) {
            continue;
        }
        out.push((t, c));
    }
    out
}

pub fn const_traj(c: Configuration, lo: FinTime, hi: Time) -> Result<Trajectory, TrajError> {
    Traj::constant(c, lo, hi)
}

pub fn interleave_traj(s1: &Trajectory, s2: &Trajectory) -> Result<Trajectory, TrajError> {
    s1.zip_with(s2, |a, b| a.union(b))
}

impl Traj<Configuration> {
    pub fn rename(&self, from: &Channel, to: &Channel) -> Trajectory {
        self.map(|c| crate::lts::rename_cfg(c, from, to))
    }
}

impl Traj<NamelessConfig> {
    pub fn instantiate(&self, a: &Channel) -> Trajectory {
        self.map(|n| n.instantiate(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::Inf;

    fn t(segs: &[(FinTime, u32)], hi: Time) -> Traj<u32> {
        Traj::from_segments(segs[0].0, hi, segs.to_vec()).unwrap()
    }

    #[test]
    fn constant_samples() {
        let c = Traj::constant(7u32, 0, Fin(5)).unwrap();
        assert_eq!(c.sample(4), Some(&7));
        assert_eq!(c.sample(5), None);
        assert_eq!(Traj::constant(7u32, 0, Inf).unwrap().sample(1_000_000), Some(&7));
        assert!(Traj::constant(7u32, 3, Fin(3)).is_err());
    }

    #[test]
    fn concat_boundary_goes_right() {
        let a = Traj::constant(1u32, 0, Fin(5)).unwrap();
        let b = Traj::constant(2u32, 5, Fin(10)).unwrap();
        let ab = a.concat(&b).unwrap();
        assert_eq!(ab.sample(4), Some(&1));
        assert_eq!(ab.sample(5), Some(&2));
        assert!(b.concat(&a).is_err());
    }

    #[test]
    fn extend_and_partition() {
        let s = t(&[(3, 1), (4, 2)], Fin(5));
        assert_eq!(Traj::extend(9, 3, &s).unwrap(), s);
        assert_eq!(Traj::extend(9, 0, &s).unwrap().sample(1), Some(&9));
        assert!(Traj::extend(9, 4, &s).is_err());
        let c = Traj::constant(1u32, 0, Fin(10)).unwrap();
        assert_eq!(c.partition_before(4).unwrap().hi(), Fin(4));
        let s = t(&[(0, 1), (3, 2), (7, 1)], Inf);
        for k in 1..12 {
            let b = s.partition_before(k).unwrap();
            let a = s.partition_after(k).unwrap();
            assert_eq!(b.concat(&a).unwrap(), s);
            assert_eq!(a.sample(k), s.sample(k));
        }
    }

    #[test]
    fn canonical_merging() {
        let s = t(&[(0, 1), (2, 1), (4, 2)], Fin(6));
        assert_eq!(s.segments().len(), 2);
        let z = s.zip_with(&t(&[(0, 5), (4, 6)], Fin(6)), |a, b| a + b).unwrap();
        assert_eq!(z.segments(), &[(0, 6), (4, 8)]);
    }
}
