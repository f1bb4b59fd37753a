//! Finite-precision p-adic numbers: an exact zero, or p^val * unit with the
//! unit known modulo p^precision.
//!
//! Precision bookkeeping follows one rule: a value is "known modulo
//! p^(val + precision)". Addition works at the minimum known modulus and
//! subtracts whatever leading digits cancel; multiplication and inversion
//! keep the minimum unit precision. A result whose known digits all vanish
//! is a precision-exhausted error, never a guessed zero.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rat::{int_valuation, mod_inverse, rat_mod_pk, rat_valuation, Rat};
use crate::valuation::Valuation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicNumber {
    prime: u64,
    kind: PAdicKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PAdicKind {
    ExactZero,
    Approx {
        val: i64,
        /// Unit part in [1, p^precision), coprime to p.
        unit: BigUint,
        /// Number of known base-p digits of the unit, >= 1.
        precision: u32,
    },
}

fn pk(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

impl PAdicNumber {
    pub fn zero(prime: u64) -> Self {
        PAdicNumber {
            prime,
            kind: PAdicKind::ExactZero,
        }
    }

    /// Build from explicit digits. The unit is reduced modulo p^precision and
    /// must stay coprime to p after reduction.
    pub fn from_digits(prime: u64, val: i64, unit: BigUint, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::PrecisionExhausted("zero-digit unit".into()));
        }
        let m = pk(prime, precision);
        let unit = unit % &m;
        if (&unit % prime).is_zero() {
            return Err(Error::PrecisionExhausted(
                "unit part divisible by p: valuation not determined".into(),
            ));
        }
        Ok(PAdicNumber {
            prime,
            kind: PAdicKind::Approx {
                val,
                unit,
                precision,
            },
        })
    }

    /// Truncate an exact rational to `precision` known unit digits.
    pub fn from_rational(prime: u64, x: &Rat, precision: u32) -> Result<Self> {
        match rat_valuation(x, prime) {
            None => Ok(PAdicNumber::zero(prime)),
            Some(v) => {
                let unit = rat_mod_pk(&crate::rat::unit_part(x, prime), prime, precision);
                PAdicNumber::from_digits(prime, v, unit, precision)
            }
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn kind(&self) -> &PAdicKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PAdicKind::ExactZero)
    }

    pub fn valuation(&self) -> Valuation {
        match &self.kind {
            PAdicKind::ExactZero => Valuation::Infinity,
            PAdicKind::Approx { val, .. } => Valuation::Finite(*val),
        }
    }

    pub fn precision(&self) -> Option<u32> {
        match &self.kind {
            PAdicKind::ExactZero => None,
            PAdicKind::Approx { precision, .. } => Some(*precision),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.kind {
            PAdicKind::ExactZero => None,
            PAdicKind::Approx { unit, .. } => Some(unit),
        }
    }

    /// The canonical rational representative p^val * unit.
    pub fn representative(&self) -> Rat {
        match &self.kind {
            PAdicKind::ExactZero => Rat::zero(),
            PAdicKind::Approx { val, unit, .. } => {
                let u = Rat::from_integer(BigInt::from(unit.clone()));
                u * crate::rat::p_pow(self.prime, *val)
            }
        }
    }

    /// Equality at precision m: same valuation and units congruent modulo
    /// p^min(m, both precisions).
    pub fn eq_at_precision(&self, other: &Self, m: u32) -> bool {
        if self.prime != other.prime {
            return false;
        }
        match (&self.kind, &other.kind) {
            (PAdicKind::ExactZero, PAdicKind::ExactZero) => true,
            (
                PAdicKind::Approx {
                    val: v1,
                    unit: u1,
                    precision: n1,
                },
                PAdicKind::Approx {
                    val: v2,
                    unit: u2,
                    precision: n2,
                },
            ) => {
                if v1 != v2 {
                    return false;
                }
                let k = m.min(*n1).min(*n2);
                let modulus = pk(self.prime, k);
                u1 % &modulus == u2 % &modulus
            }
            _ => false,
        }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::FieldMismatch(format!(
                "Q_{} and Q_{}",
                self.prime, other.prime
            )));
        }
        Ok(())
    }

    /// Sum, with the known-modulus rule. Digits lost to leading cancellation
    /// reduce the output precision; total cancellation is an error.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        match (&self.kind, &other.kind) {
            (PAdicKind::ExactZero, _) => Ok(other.clone()),
            (_, PAdicKind::ExactZero) => Ok(self.clone()),
            (
                PAdicKind::Approx {
                    val: v1,
                    unit: u1,
                    precision: n1,
                },
                PAdicKind::Approx {
                    val: v2,
                    unit: u2,
                    precision: n2,
                },
            ) => {
                let known = (*v1 + *n1 as i64).min(*v2 + *n2 as i64);
                let m = (*v1).min(*v2);
                // digits of the sum shifted down by p^m, known modulo p^(known-m)
                let width = u32::try_from(known - m).expect("positive width");
                let modulus = pk(self.prime, width);
                let a = u1 * pk(self.prime, (v1 - m) as u32) % &modulus;
                let b = u2 * pk(self.prime, (v2 - m) as u32) % &modulus;
                let w = (a + b) % &modulus;
                Self::normalize_shifted(self.prime, m, w, width)
            }
        }
    }

    /// Add an exact rational (known to unlimited precision) to this value.
    pub fn add_rational(&self, x: &Rat) -> Result<Self> {
        match &self.kind {
            PAdicKind::ExactZero => PAdicNumber::from_rational(self.prime, x, 32)
                .or_else(|_| Ok(PAdicNumber::zero(self.prime))),
            PAdicKind::Approx {
                val,
                unit,
                precision,
            } => {
                let known = *val + *precision as i64;
                let xv = rat_valuation(x, self.prime);
                let m = match xv {
                    None => return Ok(self.clone()),
                    Some(v) if v >= known => return Ok(self.clone()),
                    Some(v) => v.min(*val),
                };
                let width = u32::try_from(known - m).expect("positive width");
                let modulus = pk(self.prime, width);
                let a = unit * pk(self.prime, (val - m) as u32) % &modulus;
                let shifted = x * crate::rat::p_pow(self.prime, -m);
                let b = rat_mod_pk(&shifted, self.prime, width);
                let w = (a + b) % &modulus;
                Self::normalize_shifted(self.prime, m, w, width)
            }
        }
    }

    fn normalize_shifted(prime: u64, base_val: i64, w: BigUint, width: u32) -> Result<Self> {
        if w.is_zero() {
            return Err(Error::PrecisionExhausted(
                "all known digits cancelled in addition".into(),
            ));
        }
        let c = int_valuation(&BigInt::from(w.clone()), prime);
        let unit = w / pk(prime, c as u32);
        let precision = width - c as u32;
        PAdicNumber::from_digits(prime, base_val + c, unit, precision)
    }

    pub fn neg(&self) -> Self {
        match &self.kind {
            PAdicKind::ExactZero => self.clone(),
            PAdicKind::Approx {
                val,
                unit,
                precision,
            } => {
                let m = pk(self.prime, *precision);
                PAdicNumber {
                    prime: self.prime,
                    kind: PAdicKind::Approx {
                        val: *val,
                        unit: &m - unit,
                        precision: *precision,
                    },
                }
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        match (&self.kind, &other.kind) {
            (PAdicKind::ExactZero, _) | (_, PAdicKind::ExactZero) => {
                Ok(PAdicNumber::zero(self.prime))
            }
            (
                PAdicKind::Approx {
                    val: v1,
                    unit: u1,
                    precision: n1,
                },
                PAdicKind::Approx {
                    val: v2,
                    unit: u2,
                    precision: n2,
                },
            ) => {
                let precision = (*n1).min(*n2);
                let modulus = pk(self.prime, precision);
                PAdicNumber::from_digits(self.prime, v1 + v2, u1 * u2 % modulus, precision)
            }
        }
    }

    /// Multiply by an exact nonzero rational; unit precision is preserved.
    pub fn mul_rational(&self, x: &Rat) -> Result<Self> {
        match &self.kind {
            PAdicKind::ExactZero => Ok(self.clone()),
            PAdicKind::Approx {
                val,
                unit,
                precision,
            } => match rat_valuation(x, self.prime) {
                None => Ok(PAdicNumber::zero(self.prime)),
                Some(xv) => {
                    let xu = rat_mod_pk(
                        &crate::rat::unit_part(x, self.prime),
                        self.prime,
                        *precision,
                    );
                    let modulus = pk(self.prime, *precision);
                    PAdicNumber::from_digits(self.prime, val + xv, unit * xu % modulus, *precision)
                }
            },
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.kind {
            PAdicKind::ExactZero => Err(Error::DivisionByZero),
            PAdicKind::Approx {
                val,
                unit,
                precision,
            } => {
                let modulus = BigInt::from(pk(self.prime, *precision));
                let inv = mod_inverse(&BigInt::from(unit.clone()), &modulus)
                    .expect("unit is invertible mod p^N");
                PAdicNumber::from_digits(self.prime, -val, inv.to_biguint().unwrap(), *precision)
            }
        }
    }

    /// Residue of the unit part modulo p (first digit).
    pub fn leading_digit(&self) -> Option<u64> {
        self.unit().map(|u| (u % self.prime).to_u64().unwrap())
    }
}

impl fmt::Display for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PAdicKind::ExactZero => write!(f, "0"),
            PAdicKind::Approx {
                val,
                unit,
                precision,
            } => write!(
                f,
                "{}^{} * {} + O({}^{})",
                self.prime,
                val,
                unit,
                self.prime,
                *val + *precision as i64
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i64};
    use num_traits::One;

    #[test]
    fn from_rational_splits_valuation_and_unit() {
        let x = PAdicNumber::from_rational(2, &rat_i64(12), 4).unwrap();
        assert_eq!(x.valuation(), Valuation::Finite(2));
        assert_eq!(x.unit().unwrap(), &BigUint::from(3u32));
    }

    #[test]
    fn addition_tracks_cancellation() {
        // 1 + (p - 1) = p: one digit of cancellation
        let p = 5;
        let a = PAdicNumber::from_rational(p, &rat_i64(2), 6).unwrap();
        let b = PAdicNumber::from_rational(p, &rat_i64(3), 6).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.valuation(), Valuation::Finite(1));
        assert_eq!(s.precision(), Some(5));
        assert_eq!(s.unit().unwrap(), &BigUint::from(1u32));
    }

    #[test]
    fn total_cancellation_is_an_error() {
        let p = 5;
        let a = PAdicNumber::from_rational(p, &rat_i64(7), 4).unwrap();
        let b = a.neg();
        assert!(matches!(a.add(&b), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn mul_and_inv_preserve_min_precision() {
        let p = 3;
        let a = PAdicNumber::from_rational(p, &rat_i64(6), 5).unwrap();
        let b = PAdicNumber::from_rational(p, &rat(1, 3), 3).unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.valuation(), Valuation::Finite(0));
        assert_eq!(prod.precision(), Some(3));
        assert_eq!(prod.unit().unwrap(), &BigUint::from(2u32));

        let inv = a.inv().unwrap();
        let one = a.mul(&inv).unwrap();
        assert_eq!(one.valuation(), Valuation::Finite(0));
        assert_eq!(one.unit().unwrap(), &BigUint::one());
    }

    #[test]
    fn eq_at_precision_compares_known_digits() {
        let p = 5;
        let a = PAdicNumber::from_rational(p, &rat_i64(7), 4).unwrap();
        let b = PAdicNumber::from_rational(p, &rat_i64(7 + 125), 4).unwrap();
        assert!(a.eq_at_precision(&b, 3));
        assert!(!a.eq_at_precision(&b, 4));
    }
}
