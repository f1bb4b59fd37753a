//! Polynomials over Q: a dense form for root lifting, and a split form
//! (unit times a product of linear factors) for cell decomposition.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::{rat_pow, rat_valuation, render_rat, Rat};
use crate::valuation::Valuation;

/// Dense polynomial with exact rational coefficients; index = degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rat>,
    prime: u64,
}

impl Poly {
    /// Leading zeros are trimmed; the zero polynomial keeps one coefficient.
    pub fn new(mut coeffs: Vec<Rat>, prime: u64) -> Self {
        while coeffs.len() > 1 && coeffs.last().map(Rat::is_zero) == Some(true) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Rat::zero());
        }
        Poly { coeffs, prime }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![Rat::zero()], self.prime);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rat::from_integer(i.into()))
            .collect();
        Poly::new(coeffs, self.prime)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && self.degree() > 0 {
                continue;
            }
            let negative = c < &Rat::zero();
            let mag = if negative { -c } else { c.clone() };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", render_rat(&mag))?,
                1 if mag.is_one() => write!(f, "t")?,
                1 => write!(f, "{}*t", render_rat(&mag))?,
                _ if mag.is_one() => write!(f, "t^{i}")?,
                _ => write!(f, "{}*t^{i}", render_rat(&mag))?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A polynomial split over Q: f(t) = c * prod (t - root_i)^mult_i with
/// pairwise distinct roots and c != 0. Degree zero (no factors) is allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPoly {
    unit: Rat,
    factors: Vec<(Rat, u32)>,
}

impl SplitPoly {
    pub fn new(unit: Rat, mut factors: Vec<(Rat, u32)>) -> Result<Self> {
        if unit.is_zero() {
            return Err(Error::UnsupportedPolynomial(
                "unit coefficient must be nonzero".into(),
            ));
        }
        // merge repeated roots, keep deterministic order
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rat, u32)> = Vec::new();
        for (root, mult) in factors {
            if mult == 0 {
                continue;
            }
            match merged.last_mut() {
                Some((r, m)) if *r == root => *m += mult,
                _ => merged.push((root, mult)),
            }
        }
        Ok(SplitPoly {
            unit,
            factors: merged,
        })
    }

    pub fn constant(c: Rat) -> Result<Self> {
        SplitPoly::new(c, vec![])
    }

    /// The monomial t.
    pub fn var() -> Self {
        SplitPoly {
            unit: Rat::one(),
            factors: vec![(Rat::zero(), 1)],
        }
    }

    /// t - r.
    pub fn linear(r: Rat) -> Self {
        SplitPoly {
            unit: Rat::one(),
            factors: vec![(r, 1)],
        }
    }

    pub fn unit(&self) -> &Rat {
        &self.unit
    }

    pub fn factors(&self) -> &[(Rat, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, m)| m).sum()
    }

    pub fn roots(&self) -> impl Iterator<Item = &Rat> {
        self.factors.iter().map(|(r, _)| r)
    }

    pub fn multiplicity_at(&self, root: &Rat) -> u32 {
        self.factors
            .iter()
            .find(|(r, _)| r == root)
            .map(|(_, m)| *m)
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = self.unit.clone();
        for (root, mult) in &self.factors {
            let d = x - root;
            if d.is_zero() {
                return Rat::zero();
            }
            acc *= rat_pow(&d, *mult as i64);
        }
        acc
    }

    /// Exact p-adic valuation of f(x), INF when x is a root.
    pub fn valuation_at(&self, x: &Rat, p: u64) -> Valuation {
        let mut v = rat_valuation(&self.unit, p).expect("unit is nonzero");
        for (root, mult) in &self.factors {
            let d = x - root;
            match rat_valuation(&d, p) {
                None => return Valuation::Infinity,
                Some(dv) => v += dv * *mult as i64,
            }
        }
        Valuation::Finite(v)
    }

    /// Scale by a nonzero rational.
    pub fn scale(&self, c: &Rat) -> Result<Self> {
        SplitPoly::new(&self.unit * c, self.factors.clone())
    }
}

impl fmt::Display for SplitPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "{}", render_rat(&self.unit));
        }
        if !self.unit.is_one() {
            write!(f, "{}*", render_rat(&self.unit))?;
        }
        for (i, (root, mult)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if root.is_zero() {
                write!(f, "(t)")?;
            } else if root.numer() < &num_bigint::BigInt::zero() {
                write!(f, "(t+{})", render_rat(&-root))?;
            } else {
                write!(f, "(t-{})", render_rat(root))?;
            }
            if *mult > 1 {
                write!(f, "^{mult}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i64};

    #[test]
    fn dense_eval_and_derivative() {
        // t^2 - 6
        let f = Poly::new(vec![rat_i64(-6), rat_i64(0), rat_i64(1)], 5);
        assert_eq!(f.eval(&rat_i64(4)), rat_i64(10));
        let d = f.derivative();
        assert_eq!(d.coeffs(), &[rat_i64(0), rat_i64(2)]);
    }

    #[test]
    fn split_poly_merges_repeated_roots() {
        let f = SplitPoly::new(
            rat_i64(1),
            vec![(rat_i64(1), 1), (rat_i64(0), 1), (rat_i64(1), 2)],
        )
        .unwrap();
        assert_eq!(f.factors().len(), 2);
        assert_eq!(f.multiplicity_at(&rat_i64(1)), 3);
        assert_eq!(f.degree(), 4);
    }

    #[test]
    fn split_eval_and_valuation() {
        // 3/2 * t^2 * (t-1)
        let f = SplitPoly::new(rat(3, 2), vec![(rat_i64(0), 2), (rat_i64(1), 1)]).unwrap();
        assert_eq!(f.eval(&rat_i64(2)), rat_i64(6));
        // v_2(3/2) + 2*v_2(2) + v_2(1) = -1 + 2 + 0
        assert_eq!(f.valuation_at(&rat_i64(2), 2), Valuation::Finite(1));
        assert_eq!(f.valuation_at(&rat_i64(1), 2), Valuation::Infinity);
        assert_eq!(f.valuation_at(&rat_i64(0), 2), Valuation::Infinity);
    }

    #[test]
    fn zero_unit_is_rejected() {
        assert!(SplitPoly::constant(Rat::zero()).is_err());
    }
}
