//! Truncated formal Laurent series over F_p or Q.
//!
//! A nonzero series stores its t-adic valuation and the known coefficients
//! of t^val .. t^(val+N-1), with the leading coefficient nonzero. All digits
//! below the valuation are known zeros, so a series is "known modulo
//! t^(val+N)". Binary operations report the precision the inputs permit.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::{rat_valuation, Rat};
use crate::residue::{ResidueElement, ResidueField};
use crate::valuation::Valuation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    field: ResidueField,
    kind: SeriesKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesKind {
    ExactZero,
    Approx {
        val: i64,
        /// coeffs[i] is the coefficient of t^(val+i); coeffs[0] != 0.
        coeffs: Vec<ResidueElement>,
    },
}

impl LaurentSeries {
    pub fn zero(field: ResidueField) -> Self {
        LaurentSeries {
            field,
            kind: SeriesKind::ExactZero,
        }
    }

    /// Build from (exponent, rational coefficient) terms, known modulo
    /// t^known_until. Terms at or above known_until are rejected.
    pub fn from_terms(field: ResidueField, terms: &[(i64, Rat)], known_until: i64) -> Result<Self> {
        let mut reduced: Vec<(i64, ResidueElement)> = Vec::new();
        for (e, c) in terms {
            if *e >= known_until {
                return Err(Error::InvalidArgument(format!(
                    "term t^{e} at or beyond the known window t^{known_until}"
                )));
            }
            let r = reduce_rat(field, c)?;
            reduced.push((*e, r));
        }
        reduced.sort_by_key(|(e, _)| *e);
        let min_e = reduced.iter().map(|(e, _)| *e).min().unwrap_or(0);
        let mut coeffs =
            vec![ResidueElement::zero(field); usize::try_from(known_until - min_e).unwrap()];
        for (e, c) in reduced {
            let idx = usize::try_from(e - min_e).unwrap();
            coeffs[idx] = coeffs[idx].add(&c)?;
        }
        Self::normalized(field, min_e, coeffs, "all coefficients vanished")
    }

    fn normalized(
        field: ResidueField,
        val: i64,
        mut coeffs: Vec<ResidueElement>,
        exhausted_msg: &str,
    ) -> Result<Self> {
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Err(Error::PrecisionExhausted(exhausted_msg.into())),
            Some(0) => Ok(LaurentSeries {
                field,
                kind: SeriesKind::Approx { val, coeffs },
            }),
            Some(k) => {
                coeffs.drain(..k);
                Ok(LaurentSeries {
                    field,
                    kind: SeriesKind::Approx {
                        val: val + k as i64,
                        coeffs,
                    },
                })
            }
        }
    }

    pub fn field(&self) -> ResidueField {
        self.field
    }

    pub fn kind(&self) -> &SeriesKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SeriesKind::ExactZero)
    }

    pub fn valuation(&self) -> Valuation {
        match &self.kind {
            SeriesKind::ExactZero => Valuation::Infinity,
            SeriesKind::Approx { val, .. } => Valuation::Finite(*val),
        }
    }

    pub fn precision(&self) -> Option<usize> {
        match &self.kind {
            SeriesKind::ExactZero => None,
            SeriesKind::Approx { coeffs, .. } => Some(coeffs.len()),
        }
    }

    /// Exponent below which every coefficient is known (val + precision).
    fn known_until(&self) -> Option<i64> {
        match &self.kind {
            SeriesKind::ExactZero => None,
            SeriesKind::Approx { val, coeffs } => Some(val + coeffs.len() as i64),
        }
    }

    /// Coefficient of t^e for e < known_until (zero below the valuation).
    pub fn coeff_at(&self, e: i64) -> ResidueElement {
        match &self.kind {
            SeriesKind::ExactZero => ResidueElement::zero(self.field),
            SeriesKind::Approx { val, coeffs } => {
                if e < *val {
                    ResidueElement::zero(self.field)
                } else {
                    let idx = usize::try_from(e - val).expect("coefficient in known window");
                    coeffs
                        .get(idx)
                        .cloned()
                        .expect("coefficient in known window")
                }
            }
        }
    }

    pub fn leading_coeff(&self) -> Option<&ResidueElement> {
        match &self.kind {
            SeriesKind::ExactZero => None,
            SeriesKind::Approx { coeffs, .. } => coeffs.first(),
        }
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(format!(
                "{}((t)) and {}((t))",
                self.field, other.field
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        match (&self.kind, &other.kind) {
            (SeriesKind::ExactZero, _) => Ok(other.clone()),
            (_, SeriesKind::ExactZero) => Ok(self.clone()),
            (SeriesKind::Approx { val: v1, .. }, SeriesKind::Approx { val: v2, .. }) => {
                let until = self
                    .known_until()
                    .unwrap()
                    .min(other.known_until().unwrap());
                let start = (*v1).min(*v2);
                if start >= until {
                    // one input is entirely beyond the other's known window
                    return if v1 < v2 {
                        Ok(self.clone())
                    } else {
                        Ok(other.clone())
                    };
                }
                let mut coeffs = Vec::with_capacity(usize::try_from(until - start).unwrap());
                for e in start..until {
                    coeffs.push(self.coeff_at(e).add(&other.coeff_at(e))?);
                }
                Self::normalized(
                    self.field,
                    start,
                    coeffs,
                    "all known coefficients cancelled in addition",
                )
            }
        }
    }

    pub fn neg(&self) -> Self {
        match &self.kind {
            SeriesKind::ExactZero => self.clone(),
            SeriesKind::Approx { val, coeffs } => LaurentSeries {
                field: self.field,
                kind: SeriesKind::Approx {
                    val: *val,
                    coeffs: coeffs.iter().map(|c| c.neg()).collect(),
                },
            },
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        match (&self.kind, &other.kind) {
            (SeriesKind::ExactZero, _) | (_, SeriesKind::ExactZero) => {
                Ok(LaurentSeries::zero(self.field))
            }
            (
                SeriesKind::Approx {
                    val: v1,
                    coeffs: c1,
                },
                SeriesKind::Approx {
                    val: v2,
                    coeffs: c2,
                },
            ) => {
                let n = c1.len().min(c2.len());
                let mut coeffs = vec![ResidueElement::zero(self.field); n];
                for (i, a) in c1.iter().take(n).enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in c2.iter().take(n - i).enumerate() {
                        coeffs[i + j] = coeffs[i + j].add(&a.mul(b)?)?;
                    }
                }
                // leading coefficients are nonzero in a field, so no renormalization
                Ok(LaurentSeries {
                    field: self.field,
                    kind: SeriesKind::Approx {
                        val: v1 + v2,
                        coeffs,
                    },
                })
            }
        }
    }

    /// Scale by a nonzero rational constant (valuation-0 in t).
    pub fn scale(&self, c: &Rat) -> Result<Self> {
        let r = reduce_rat(self.field, c)?;
        if r.is_zero() {
            return Ok(LaurentSeries::zero(self.field));
        }
        match &self.kind {
            SeriesKind::ExactZero => Ok(self.clone()),
            SeriesKind::Approx { val, coeffs } => {
                let coeffs: Result<Vec<_>> = coeffs.iter().map(|x| x.mul(&r)).collect();
                Ok(LaurentSeries {
                    field: self.field,
                    kind: SeriesKind::Approx {
                        val: *val,
                        coeffs: coeffs?,
                    },
                })
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.kind {
            SeriesKind::ExactZero => Err(Error::DivisionByZero),
            SeriesKind::Approx { val, coeffs } => {
                let n = coeffs.len();
                let b0 = coeffs[0].inv()?;
                let mut out = vec![ResidueElement::zero(self.field); n];
                out[0] = b0.clone();
                for k in 1..n {
                    // b_k = -b0 * sum_{i=1..k} a_i b_{k-i}
                    let mut acc = ResidueElement::zero(self.field);
                    for i in 1..=k {
                        if coeffs[i].is_zero() || out[k - i].is_zero() {
                            continue;
                        }
                        acc = acc.add(&coeffs[i].mul(&out[k - i])?)?;
                    }
                    out[k] = b0.mul(&acc)?.neg();
                }
                Ok(LaurentSeries {
                    field: self.field,
                    kind: SeriesKind::Approx {
                        val: -val,
                        coeffs: out,
                    },
                })
            }
        }
    }
}

/// Image of an exact rational in the residue field: the reduction mod p for
/// F_p (denominator must be coprime to p), the rational itself for Q.
pub fn reduce_rat(field: ResidueField, c: &Rat) -> Result<ResidueElement> {
    match field {
        ResidueField::Q => Ok(ResidueElement::q(c.clone())),
        ResidueField::Fp(p) => {
            if c.is_zero() {
                return Ok(ResidueElement::fp(p, 0));
            }
            match rat_valuation(c, p) {
                Some(v) if v < 0 => Err(Error::NotRepresentable(crate::rat::render_rat(c), p)),
                Some(v) if v > 0 => Ok(ResidueElement::fp(p, 0)),
                _ => {
                    let r = crate::rat::rat_mod_pk(c, p, 1);
                    Ok(ResidueElement::Fp {
                        p,
                        value: num_traits::ToPrimitive::to_u64(&r).unwrap(),
                    })
                }
            }
        }
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SeriesKind::ExactZero => write!(f, "0"),
            SeriesKind::Approx { val, coeffs } => {
                let mut first = true;
                for (i, c) in coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    let e = val + i as i64;
                    let one = match c {
                        ResidueElement::Fp { value, .. } => *value == 1,
                        ResidueElement::Q(v) => num_traits::One::is_one(v),
                    };
                    match (e, one) {
                        (0, _) => write!(f, "{c}")?,
                        (1, true) => write!(f, "t")?,
                        (1, false) => write!(f, "{c}*t")?,
                        (_, true) => write!(f, "t^{e}")?,
                        (_, false) => write!(f, "{c}*t^{e}")?,
                    }
                }
                if first {
                    write!(f, "0")?;
                }
                write!(f, " + O(t^{})", val + coeffs.len() as i64)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_i64;
    use num_traits::One;

    fn f5() -> ResidueField {
        ResidueField::Fp(5)
    }

    #[test]
    fn construction_normalizes_leading_zeros() {
        let s = LaurentSeries::from_terms(f5(), &[(2, rat_i64(10)), (3, rat_i64(4))], 6).unwrap();
        assert_eq!(s.valuation(), Valuation::Finite(3));
        assert_eq!(s.precision(), Some(3));
    }

    #[test]
    fn geometric_series_inverse() {
        // 1/(1+t) = 1 + 4t + t^2 (mod t^3) over F_5
        let s = LaurentSeries::from_terms(f5(), &[(0, rat_i64(1)), (1, rat_i64(1))], 3).unwrap();
        let inv = s.inv().unwrap();
        assert_eq!(inv.coeff_at(0), ResidueElement::fp(5, 1));
        assert_eq!(inv.coeff_at(1), ResidueElement::fp(5, 4));
        assert_eq!(inv.coeff_at(2), ResidueElement::fp(5, 1));
        let prod = s.mul(&inv).unwrap();
        assert_eq!(prod.valuation(), Valuation::Finite(0));
        assert_eq!(prod.coeff_at(0), ResidueElement::fp(5, 1));
        assert_eq!(prod.coeff_at(1), ResidueElement::fp(5, 0));
        assert_eq!(prod.coeff_at(2), ResidueElement::fp(5, 0));
    }

    #[test]
    fn addition_cancellation_reduces_precision() {
        let a = LaurentSeries::from_terms(f5(), &[(0, rat_i64(2)), (1, rat_i64(1))], 4).unwrap();
        let b = LaurentSeries::from_terms(f5(), &[(0, rat_i64(3)), (1, rat_i64(1))], 4).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.valuation(), Valuation::Finite(1));
        assert_eq!(s.coeff_at(1), ResidueElement::fp(5, 2));
        // total cancellation errors out
        let c = a.neg();
        assert!(matches!(a.add(&c), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn rational_coefficients_over_q() {
        let a = LaurentSeries::from_terms(ResidueField::Q, &[(-1, rat_i64(1)), (0, rat_i64(3))], 2)
            .unwrap();
        assert_eq!(a.valuation(), Valuation::Finite(-1));
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.valuation(), Valuation::Finite(-2));
        assert_eq!(sq.coeff_at(-2), ResidueElement::q(Rat::one()));
        assert_eq!(sq.coeff_at(-1), ResidueElement::q(rat_i64(6)));
    }

    #[test]
    fn fp_embedding_rejects_p_in_denominator() {
        assert!(reduce_rat(f5(), &crate::rat::rat(1, 5)).is_err());
        assert_eq!(
            reduce_rat(f5(), &crate::rat::rat(5, 3)).unwrap(),
            ResidueElement::fp(5, 0)
        );
    }
}
