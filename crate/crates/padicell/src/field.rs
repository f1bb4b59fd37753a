//! One carrier for elements of the supported valued fields, with the core
//! operations: valuation, residue, angular component, field arithmetic, and
//! restricted division.
//!
//! Elements constructed from rationals stay exact: their valuation, residue
//! and angular component never raise precision errors. Approximate p-adic
//! and Laurent values carry explicit precision and follow the precision
//! contract of their modules. Binary operations require matching field
//! contexts; a mismatch is an error, never a coercion.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::laurent::{reduce_rat, LaurentSeries};
use crate::padic::PAdicNumber;
use crate::rat::{rat_valuation, render_rat, unit_part, Rat};
use crate::residue::{ResidueElement, ResidueField};
use crate::valuation::Valuation;

/// Which valued field an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldContext {
    /// Q_p with the p-adic valuation; uniformizer p.
    PAdic(u64),
    /// F_p((t)) with the t-adic valuation; uniformizer t.
    LaurentFp(u64),
    /// Q((t)) with the t-adic valuation; uniformizer t.
    LaurentQ,
}

impl FieldContext {
    pub fn residue_field(self) -> ResidueField {
        match self {
            FieldContext::PAdic(p) => ResidueField::Fp(p),
            FieldContext::LaurentFp(p) => ResidueField::Fp(p),
            FieldContext::LaurentQ => ResidueField::Q,
        }
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldContext::PAdic(p) => write!(f, "Q_{p}"),
            FieldContext::LaurentFp(p) => write!(f, "F_{p}((t))"),
            FieldContext::LaurentQ => write!(f, "Q((t))"),
        }
    }
}

/// Arithmetic operations exposed through `FieldElement::arith`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    Inv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldElement {
    /// An exact rational embedded in the field named by the context.
    Exact {
        context: FieldContext,
        value: Rat,
    },
    PAdic(PAdicNumber),
    Laurent {
        context: FieldContext,
        series: LaurentSeries,
    },
}

impl FieldElement {
    /// Embed an exact rational. For F_p((t)) the denominator must be coprime
    /// to p, since 1/p has no image in F_p.
    pub fn exact(context: FieldContext, value: Rat) -> Result<Self> {
        if let FieldContext::LaurentFp(p) = context {
            if !value.is_zero() && rat_valuation(&value, p).unwrap() < 0 {
                return Err(Error::NotRepresentable(render_rat(&value), p));
            }
        }
        Ok(FieldElement::Exact { context, value })
    }

    pub fn zero(context: FieldContext) -> Self {
        FieldElement::Exact {
            context,
            value: Rat::zero(),
        }
    }

    pub fn padic(x: PAdicNumber) -> Self {
        FieldElement::PAdic(x)
    }

    /// Wrap a Laurent series; the context fixes the residue field.
    pub fn laurent(context: FieldContext, series: LaurentSeries) -> Result<Self> {
        let ok = matches!(
            (context, series.field()),
            (FieldContext::LaurentFp(p), ResidueField::Fp(q)) if p == q
        ) || matches!(
            (context, series.field()),
            (FieldContext::LaurentQ, ResidueField::Q)
        );
        if !ok {
            return Err(Error::FieldMismatch(format!(
                "series over {} in context {}",
                series.field(),
                context
            )));
        }
        Ok(FieldElement::Laurent { context, series })
    }

    pub fn context(&self) -> FieldContext {
        match self {
            FieldElement::Exact { context, .. } => *context,
            FieldElement::PAdic(x) => FieldContext::PAdic(x.prime()),
            FieldElement::Laurent { context, .. } => *context,
        }
    }

    fn check_context(&self, other: &Self) -> Result<FieldContext> {
        let (a, b) = (self.context(), other.context());
        if a != b {
            return Err(Error::FieldMismatch(format!("{a} and {b}")));
        }
        Ok(a)
    }

    /// True when the element is zero in its field. An exact rational may be
    /// nonzero in Q yet zero in F_p((t)) (e.g. 5 in F_5((t))).
    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Exact { context, value } => match context {
                FieldContext::PAdic(_) | FieldContext::LaurentQ => value.is_zero(),
                FieldContext::LaurentFp(p) => {
                    value.is_zero() || rat_valuation(value, *p).unwrap() > 0
                }
            },
            FieldElement::PAdic(x) => x.is_zero(),
            FieldElement::Laurent { series, .. } => series.is_zero(),
        }
    }

    /// The valuation map. INF exactly for zero; approximate inputs always
    /// carry a determined valuation by construction.
    pub fn valuation(&self) -> Result<Valuation> {
        Ok(match self {
            FieldElement::Exact { context, value } => match context {
                FieldContext::PAdic(p) => match rat_valuation(value, *p) {
                    None => Valuation::Infinity,
                    Some(v) => Valuation::Finite(v),
                },
                // a rational constant in k((t)) is either zero or a unit
                FieldContext::LaurentQ => {
                    if value.is_zero() {
                        Valuation::Infinity
                    } else {
                        Valuation::Finite(0)
                    }
                }
                FieldContext::LaurentFp(_) => {
                    if self.is_zero() {
                        Valuation::Infinity
                    } else {
                        Valuation::Finite(0)
                    }
                }
            },
            FieldElement::PAdic(x) => x.valuation(),
            FieldElement::Laurent { series, .. } => series.valuation(),
        })
    }

    /// Projection R -> R/M. Errors on negative valuation.
    pub fn residue(&self) -> Result<ResidueElement> {
        let v = self.valuation()?;
        if let Valuation::Finite(v) = v {
            if v < 0 {
                return Err(Error::NotInValuationRing(v));
            }
        }
        let field = self.context().residue_field();
        if v != Valuation::Finite(0) {
            return Ok(ResidueElement::zero(field));
        }
        Ok(match self {
            FieldElement::Exact { context, value } => match context {
                FieldContext::PAdic(p) => reduce_rat(ResidueField::Fp(*p), value)?,
                FieldContext::LaurentQ => ResidueElement::q(value.clone()),
                FieldContext::LaurentFp(p) => reduce_rat(ResidueField::Fp(*p), value)?,
            },
            FieldElement::PAdic(x) => {
                ResidueElement::fp(x.prime(), x.leading_digit().unwrap() as i64)
            }
            FieldElement::Laurent { series, .. } => series.coeff_at(0),
        })
    }

    /// Angular component: ac(0) = 0, otherwise the residue of x * pi^(-v(x))
    /// where pi is the uniformizer (p or t).
    pub fn ac(&self) -> Result<ResidueElement> {
        let field = self.context().residue_field();
        if self.is_zero() {
            return Ok(ResidueElement::zero(field));
        }
        Ok(match self {
            FieldElement::Exact { context, value } => match context {
                FieldContext::PAdic(p) => reduce_rat(ResidueField::Fp(*p), &unit_part(value, *p))?,
                FieldContext::LaurentQ => ResidueElement::q(value.clone()),
                FieldContext::LaurentFp(p) => reduce_rat(ResidueField::Fp(*p), value)?,
            },
            FieldElement::PAdic(x) => {
                ResidueElement::fp(x.prime(), x.leading_digit().unwrap() as i64)
            }
            FieldElement::Laurent { series, .. } => series.leading_coeff().unwrap().clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let ctx = self.check_context(other)?;
        match (self, other) {
            (FieldElement::Exact { value: a, .. }, FieldElement::Exact { value: b, .. }) => {
                FieldElement::exact(ctx, a + b)
            }
            (FieldElement::PAdic(x), FieldElement::PAdic(y)) => Ok(FieldElement::PAdic(x.add(y)?)),
            (FieldElement::Exact { value, .. }, FieldElement::PAdic(x))
            | (FieldElement::PAdic(x), FieldElement::Exact { value, .. }) => {
                if x.is_zero() {
                    FieldElement::exact(ctx, value.clone())
                } else {
                    Ok(FieldElement::PAdic(x.add_rational(value)?))
                }
            }
            (FieldElement::Laurent { series: a, .. }, FieldElement::Laurent { series: b, .. }) => {
                Ok(FieldElement::Laurent {
                    context: ctx,
                    series: a.add(b)?,
                })
            }
            (FieldElement::Exact { value, .. }, FieldElement::Laurent { series, .. })
            | (FieldElement::Laurent { series, .. }, FieldElement::Exact { value, .. }) => {
                if series.is_zero() {
                    return FieldElement::exact(ctx, value.clone());
                }
                let until = series.valuation().expect_finite() + series.precision().unwrap() as i64;
                if until <= 0 {
                    // the constant sits beyond the known window
                    return Ok(FieldElement::Laurent {
                        context: ctx,
                        series: series.clone(),
                    });
                }
                let constant =
                    LaurentSeries::from_terms(ctx.residue_field(), &[(0, value.clone())], until);
                match constant {
                    Ok(c) => Ok(FieldElement::Laurent {
                        context: ctx,
                        series: c.add(series)?,
                    }),
                    // the constant reduces to zero in the residue field
                    Err(Error::PrecisionExhausted(_)) => Ok(FieldElement::Laurent {
                        context: ctx,
                        series: series.clone(),
                    }),
                    Err(e) => Err(e),
                }
            }
            _ => unreachable!("context check rules out mixed p-adic/Laurent"),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            FieldElement::Exact { context, value } => FieldElement::Exact {
                context: *context,
                value: -value,
            },
            FieldElement::PAdic(x) => FieldElement::PAdic(x.neg()),
            FieldElement::Laurent { context, series } => FieldElement::Laurent {
                context: *context,
                series: series.neg(),
            },
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let ctx = self.check_context(other)?;
        match (self, other) {
            (FieldElement::Exact { value: a, .. }, FieldElement::Exact { value: b, .. }) => {
                FieldElement::exact(ctx, a * b)
            }
            (FieldElement::PAdic(x), FieldElement::PAdic(y)) => Ok(FieldElement::PAdic(x.mul(y)?)),
            (FieldElement::Exact { value, .. }, FieldElement::PAdic(x))
            | (FieldElement::PAdic(x), FieldElement::Exact { value, .. }) => {
                if value.is_zero() {
                    Ok(FieldElement::zero(ctx))
                } else {
                    Ok(FieldElement::PAdic(x.mul_rational(value)?))
                }
            }
            (FieldElement::Laurent { series: a, .. }, FieldElement::Laurent { series: b, .. }) => {
                Ok(FieldElement::Laurent {
                    context: ctx,
                    series: a.mul(b)?,
                })
            }
            (FieldElement::Exact { value, .. }, FieldElement::Laurent { series, .. })
            | (FieldElement::Laurent { series, .. }, FieldElement::Exact { value, .. }) => {
                Ok(FieldElement::Laurent {
                    context: ctx,
                    series: series.scale(value)?,
                })
            }
            _ => unreachable!("context check rules out mixed p-adic/Laurent"),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self {
            FieldElement::Exact { context, value } => FieldElement::exact(*context, value.recip()),
            FieldElement::PAdic(x) => Ok(FieldElement::PAdic(x.inv()?)),
            FieldElement::Laurent { context, series } => Ok(FieldElement::Laurent {
                context: *context,
                series: series.inv()?,
            }),
        }
    }

    /// Restricted division: x/y when v(x) >= v(y) and y != 0, otherwise 0.
    /// Total by construction.
    pub fn restricted_div(&self, other: &Self) -> Result<Self> {
        let ctx = self.check_context(other)?;
        if other.is_zero() {
            return Ok(FieldElement::zero(ctx));
        }
        let vx = self.valuation()?;
        let vy = other.valuation()?;
        if vx >= vy {
            self.mul(&other.inv()?)
        } else {
            Ok(FieldElement::zero(ctx))
        }
    }

    /// Uniform entry point used by the CLI.
    pub fn arith(op: ArithOp, x: &FieldElement, y: Option<&FieldElement>) -> Result<FieldElement> {
        match op {
            ArithOp::Add => {
                x.add(y.ok_or_else(|| Error::InvalidArgument("ADD needs two operands".into()))?)
            }
            ArithOp::Mul => {
                x.mul(y.ok_or_else(|| Error::InvalidArgument("MUL needs two operands".into()))?)
            }
            ArithOp::Neg => Ok(x.neg()),
            ArithOp::Inv => x.inv(),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Exact { value, .. } => write!(f, "{}", render_rat(value)),
            FieldElement::PAdic(x) => write!(f, "{x}"),
            FieldElement::Laurent { series, .. } => write!(f, "{series}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i64};

    fn q(p: u64, n: i64, d: i64) -> FieldElement {
        FieldElement::exact(FieldContext::PAdic(p), rat(n, d)).unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(q(2, 12, 1).valuation().unwrap(), Valuation::Finite(2));
        assert_eq!(q(7, 0, 1).valuation().unwrap(), Valuation::Infinity);
        assert_eq!(q(5, 5, 3).valuation().unwrap(), Valuation::Finite(1));
    }

    #[test]
    fn residue_examples() {
        assert_eq!(q(5, 12, 1).residue().unwrap(), ResidueElement::fp(5, 2));
        assert!(matches!(
            q(3, 1, 3).residue(),
            Err(Error::NotInValuationRing(-1))
        ));
        let s =
            LaurentSeries::from_terms(ResidueField::Fp(5), &[(0, rat_i64(3)), (1, rat_i64(1))], 4)
                .unwrap();
        let x = FieldElement::laurent(FieldContext::LaurentFp(5), s).unwrap();
        assert_eq!(x.residue().unwrap(), ResidueElement::fp(5, 3));
    }

    #[test]
    fn ac_examples() {
        assert_eq!(q(2, 0, 1).ac().unwrap(), ResidueElement::fp(2, 0));
        assert_eq!(q(2, 12, 1).ac().unwrap(), ResidueElement::fp(2, 1));
        let s =
            LaurentSeries::from_terms(ResidueField::Fp(5), &[(-2, rat_i64(3)), (1, rat_i64(1))], 4)
                .unwrap();
        let x = FieldElement::laurent(FieldContext::LaurentFp(5), s).unwrap();
        assert_eq!(x.ac().unwrap(), ResidueElement::fp(5, 3));
    }

    #[test]
    fn arith_examples() {
        let sum = q(5, 2, 1).add(&q(5, 3, 1)).unwrap();
        assert_eq!(sum.valuation().unwrap(), Valuation::Finite(1));
        let one = q(3, 3, 1).mul(&q(3, 1, 3)).unwrap();
        assert_eq!(one, q(3, 1, 1));
        assert!(matches!(
            FieldElement::zero(FieldContext::PAdic(3)).inv(),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn restricted_div_branches() {
        // first branch: v(9) >= v(3)
        assert_eq!(q(3, 9, 1).restricted_div(&q(3, 3, 1)).unwrap(), q(3, 3, 1));
        // else branch: v(1) < v(3)
        assert!(q(3, 1, 1).restricted_div(&q(3, 3, 1)).unwrap().is_zero());
        // y = 0
        assert!(q(3, 7, 1)
            .restricted_div(&FieldElement::zero(FieldContext::PAdic(3)))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn arith_dispatch() {
        let two = q(5, 2, 1);
        let three = q(5, 3, 1);
        let sum = FieldElement::arith(ArithOp::Add, &two, Some(&three)).unwrap();
        assert_eq!(sum.valuation().unwrap(), Valuation::Finite(1));
        let neg = FieldElement::arith(ArithOp::Neg, &two, None).unwrap();
        assert_eq!(neg, q(5, -2, 1));
        assert!(FieldElement::arith(ArithOp::Mul, &two, None).is_err());
        let inv = FieldElement::arith(ArithOp::Inv, &two, None).unwrap();
        assert_eq!(inv, q(5, 1, 2));
    }

    #[test]
    fn context_mismatch_is_an_error() {
        assert!(q(3, 1, 1).add(&q(5, 1, 1)).is_err());
        let lf = FieldElement::exact(FieldContext::LaurentFp(5), rat_i64(1)).unwrap();
        assert!(q(5, 1, 1).add(&lf).is_err());
    }

    #[test]
    fn exact_rational_zero_in_fp_laurent() {
        // 5/3 is zero in F_5((t)), so its valuation is INF and inv fails
        let x = FieldElement::exact(FieldContext::LaurentFp(5), rat(5, 3)).unwrap();
        assert!(x.is_zero());
        assert_eq!(x.valuation().unwrap(), Valuation::Infinity);
        assert!(matches!(x.inv(), Err(Error::DivisionByZero)));
        // 1/5 is not representable at all
        assert!(FieldElement::exact(FieldContext::LaurentFp(5), rat(1, 5)).is_err());
    }

    #[test]
    fn mixed_exact_and_approx_padic() {
        let p = 5;
        let a = PAdicNumber::from_rational(p, &rat_i64(7), 4).unwrap();
        let x = FieldElement::padic(a);
        let e = FieldElement::exact(FieldContext::PAdic(p), rat_i64(3)).unwrap();
        let s = x.add(&e).unwrap();
        assert_eq!(s.valuation().unwrap(), Valuation::Finite(1));
        let prod = x.mul(&e).unwrap();
        assert_eq!(prod.valuation().unwrap(), Valuation::Finite(0));
    }
}
