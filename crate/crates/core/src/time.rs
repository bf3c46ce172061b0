//! Time domain: natural-number ticks extended with a point at infinity.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A finite instant. Naturals are the concrete model of finite time here.
pub type FinTime = u64;

/// A finite instant or infinity. The derived order places `Inf` above
/// every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Time {
    Fin(FinTime),
    Inf,
}

pub use Time::{Fin, Inf};

impl Time {
    /// Strict order: `Fin a < Fin b` iff `a < b`, every finite value is below
    /// `Inf`, and `Inf` is not below itself.
    pub fn lt(self, other: Time) -> bool {
        matches!(self.cmp(&other), Ordering::Less)
    }

    /// `a <= b` defined as "not b < a".
    pub fn le(self, other: Time) -> bool {
        !other.lt(self)
    }

    pub fn min(self, other: Time) -> Time {
        if other.lt(self) {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Time) -> Time {
        if self.lt(other) {
            other
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Fin(_))
    }

    pub fn finite(self) -> Option<FinTime> {
        match self {
            Fin(t) => Some(t),
            Inf => None,
        }
    }

    /// Adds a natural constant; infinity absorbs it.
    pub fn plus(self, k: u64) -> Time {
        match self {
            Fin(t) => Fin(t.saturating_add(k)),
            Inf => Inf,
        }
    }
}

impl From<FinTime> for Time {
    fn from(t: FinTime) -> Self {
        Fin(t)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(t) => write!(f, "{t}"),
            Inf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid time literal `{0}`")]
pub struct ParseTimeError(pub String);

impl FromStr for Time {
    type Err = ParseTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Inf);
        }
        s.parse::<u64>()
            .map(Fin)
            .map_err(|_| ParseTimeError(s.to_string()))
    }
}
