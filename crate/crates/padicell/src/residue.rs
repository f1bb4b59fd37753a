//! Residue fields k = R/M and their elements: F_p for Q_p and F_p((t)),
//! the rationals themselves for Q((t)).

use std::fmt;

use crate::error::{Error, Result};
use crate::rat::{mod_inverse, render_rat, Rat};
use num_bigint::BigInt;
use num_traits::Zero;

/// Descriptor of the residue field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidueField {
    Fp(u64),
    Q,
}

impl fmt::Display for ResidueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueField::Fp(p) => write!(f, "F_{p}"),
            ResidueField::Q => write!(f, "Q"),
        }
    }
}

/// An element of a residue field. For F_p the value is kept in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResidueElement {
    Fp { p: u64, value: u64 },
    Q(Rat),
}

impl ResidueElement {
    pub fn fp(p: u64, value: i64) -> Self {
        ResidueElement::Fp {
            p,
            value: value.rem_euclid(p as i64) as u64,
        }
    }

    pub fn q(value: Rat) -> Self {
        ResidueElement::Q(value)
    }

    pub fn zero(field: ResidueField) -> Self {
        match field {
            ResidueField::Fp(p) => ResidueElement::Fp { p, value: 0 },
            ResidueField::Q => ResidueElement::Q(Rat::zero()),
        }
    }

    pub fn field(&self) -> ResidueField {
        match self {
            ResidueElement::Fp { p, .. } => ResidueField::Fp(*p),
            ResidueElement::Q(_) => ResidueField::Q,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ResidueElement::Fp { value, .. } => *value == 0,
            ResidueElement::Q(v) => v.is_zero(),
        }
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field() != other.field() {
            return Err(Error::FieldMismatch(format!(
                "residue fields {} and {}",
                self.field(),
                other.field()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(match (self, other) {
            (ResidueElement::Fp { p, value: a }, ResidueElement::Fp { value: b, .. }) => {
                ResidueElement::Fp {
                    p: *p,
                    value: (a + b) % p,
                }
            }
            (ResidueElement::Q(a), ResidueElement::Q(b)) => ResidueElement::Q(a + b),
            _ => unreachable!(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(match (self, other) {
            (ResidueElement::Fp { p, value: a }, ResidueElement::Fp { value: b, .. }) => {
                ResidueElement::Fp {
                    p: *p,
                    value: ((*a as u128 * *b as u128) % *p as u128) as u64,
                }
            }
            (ResidueElement::Q(a), ResidueElement::Q(b)) => ResidueElement::Q(a * b),
            _ => unreachable!(),
        })
    }

    pub fn neg(&self) -> Self {
        match self {
            ResidueElement::Fp { p, value } => ResidueElement::Fp {
                p: *p,
                value: if *value == 0 { 0 } else { p - value },
            },
            ResidueElement::Q(v) => ResidueElement::Q(-v),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            ResidueElement::Fp { p, value } => {
                let inv = mod_inverse(&BigInt::from(*value), &BigInt::from(*p))
                    .expect("nonzero residue is invertible");
                ResidueElement::Fp {
                    p: *p,
                    value: u64::try_from(inv).unwrap(),
                }
            }
            ResidueElement::Q(v) => ResidueElement::Q(v.recip()),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueElement::Fp { value, .. } => write!(f, "{value}"),
            ResidueElement::Q(v) => write!(f, "{}", render_rat(v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_arithmetic() {
        let a = ResidueElement::fp(5, 3);
        let b = ResidueElement::fp(5, 4);
        assert_eq!(a.add(&b).unwrap(), ResidueElement::fp(5, 2));
        assert_eq!(a.mul(&b).unwrap(), ResidueElement::fp(5, 2));
        assert_eq!(a.neg(), ResidueElement::fp(5, 2));
        assert_eq!(a.inv().unwrap(), ResidueElement::fp(5, 2));
        assert!(ResidueElement::fp(5, 0).inv().is_err());
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = ResidueElement::fp(5, 3);
        let b = ResidueElement::fp(7, 3);
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn negative_representatives_normalize() {
        assert_eq!(ResidueElement::fp(5, -1), ResidueElement::fp(5, 4));
    }
}
