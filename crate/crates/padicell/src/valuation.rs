//! The value group Z together with the distinguished element at infinity.

use std::cmp::Ordering;
use std::fmt;

/// A valuation: an integer, or infinity (reserved for zero elements).
/// Infinity is above every integer, absorbs addition, and is the identity
/// for `min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinity)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    /// Finite value, panicking on infinity. For call sites that have already
    /// excluded zero.
    pub fn expect_finite(self) -> i64 {
        self.finite().expect("valuation is infinite")
    }

    pub fn min(self, other: Valuation) -> Valuation {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinity, Valuation::Infinity) => Ordering::Equal,
            (Valuation::Infinity, _) => Ordering::Greater,
            (_, Valuation::Infinity) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinity,
        }
    }
}

impl From<i64> for Valuation {
    fn from(v: i64) -> Self {
        Valuation::Finite(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "INF"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_and_dominates() {
        let inf = Valuation::Infinity;
        let two = Valuation::Finite(2);
        assert_eq!(inf + two, inf);
        assert_eq!(two + Valuation::Finite(3), Valuation::Finite(5));
        assert!(inf > two);
        assert_eq!(inf.min(two), two);
        assert_eq!(inf.min(inf), inf);
    }
}
