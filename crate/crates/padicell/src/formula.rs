//! Quantifier-free formulas over one variable: norm comparisons between
//! split polynomials, power-predicate atoms, zero tests, and the boolean
//! connectives.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::SplitPoly;
use crate::rat::Rat;
use crate::valuation::Valuation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QFFormula {
    /// |f(t)| < |g(t)|
    AbsLt(SplitPoly, SplitPoly),
    /// |f(t)| <= |g(t)|
    AbsLe(SplitPoly, SplitPoly),
    /// f(t) is a nonzero m-th power
    Pow(u64, SplitPoly),
    /// f(t) = 0
    EqZero(SplitPoly),
    And(Box<QFFormula>, Box<QFFormula>),
    Or(Box<QFFormula>, Box<QFFormula>),
    Not(Box<QFFormula>),
}

impl QFFormula {
    pub fn and(a: QFFormula, b: QFFormula) -> QFFormula {
        QFFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: QFFormula, b: QFFormula) -> QFFormula {
        QFFormula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: QFFormula) -> QFFormula {
        QFFormula::Not(Box::new(a))
    }

    /// All polynomials appearing in atoms, in first-occurrence order,
    /// structurally deduplicated.
    pub fn polynomials(&self) -> Vec<SplitPoly> {
        let mut out: Vec<SplitPoly> = Vec::new();
        self.collect_polys(&mut out);
        out
    }

    fn collect_polys(&self, out: &mut Vec<SplitPoly>) {
        let mut push = |f: &SplitPoly| {
            if !out.contains(f) {
                out.push(f.clone());
            }
        };
        match self {
            QFFormula::AbsLt(f, g) | QFFormula::AbsLe(f, g) => {
                push(f);
                push(g);
            }
            QFFormula::Pow(_, f) | QFFormula::EqZero(f) => push(f),
            QFFormula::And(a, b) | QFFormula::Or(a, b) => {
                a.collect_polys(out);
                b.collect_polys(out);
            }
            QFFormula::Not(a) => a.collect_polys(out),
        }
    }

    /// Least common multiple of the power-atom moduli (1 when none).
    pub fn coset_modulus(&self) -> u64 {
        match self {
            QFFormula::Pow(m, _) => *m,
            QFFormula::AbsLt(..) | QFFormula::AbsLe(..) | QFFormula::EqZero(_) => 1,
            QFFormula::And(a, b) | QFFormula::Or(a, b) => {
                num_integer::Integer::lcm(&a.coset_modulus(), &b.coset_modulus())
            }
            QFFormula::Not(a) => a.coset_modulus(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            QFFormula::Pow(m, _) if *m < 1 => Err(Error::InvalidArgument(
                "power predicate index must be >= 1".into(),
            )),
            QFFormula::And(a, b) | QFFormula::Or(a, b) => {
                a.validate()?;
                b.validate()
            }
            QFFormula::Not(a) => a.validate(),
            _ => Ok(()),
        }
    }

    /// Direct evaluation at an exact rational point. The power predicate is
    /// injected so callers can choose the symbolic or the oracle test.
    pub fn eval_at_with<F>(&self, t: &Rat, p: u64, power_test: &F) -> bool
    where
        F: Fn(&Rat, u64) -> bool,
    {
        match self {
            QFFormula::AbsLt(f, g) => f.valuation_at(t, p) > g.valuation_at(t, p),
            QFFormula::AbsLe(f, g) => f.valuation_at(t, p) >= g.valuation_at(t, p),
            QFFormula::Pow(m, f) => {
                let y = f.eval(t);
                !y.is_zero() && power_test(&y, *m)
            }
            QFFormula::EqZero(f) => f.valuation_at(t, p) == Valuation::Infinity,
            QFFormula::And(a, b) => {
                a.eval_at_with(t, p, power_test) && b.eval_at_with(t, p, power_test)
            }
            QFFormula::Or(a, b) => {
                a.eval_at_with(t, p, power_test) || b.eval_at_with(t, p, power_test)
            }
            QFFormula::Not(a) => !a.eval_at_with(t, p, power_test),
        }
    }

    /// Direct evaluation with the crate's own power predicate.
    pub fn eval_at(&self, t: &Rat, p: u64) -> bool {
        self.eval_at_with(t, p, &|x, m| crate::hensel::is_nth_power(x, m, p))
    }
}

impl fmt::Display for QFFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: ! > & > |
        fn go(node: &QFFormula, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
            let prec = match node {
                QFFormula::Or(..) => 0,
                QFFormula::And(..) => 1,
                _ => 2,
            };
            let needs_parens = prec < level;
            if needs_parens {
                write!(f, "(")?;
            }
            match node {
                QFFormula::AbsLt(a, b) => write!(f, "abs({a}) < abs({b})")?,
                QFFormula::AbsLe(a, b) => write!(f, "abs({a}) <= abs({b})")?,
                QFFormula::Pow(m, a) => write!(f, "pow({m}, {a})")?,
                QFFormula::EqZero(a) => write!(f, "{a} = 0")?,
                QFFormula::And(a, b) => {
                    go(a, f, 1)?;
                    write!(f, " & ")?;
                    go(b, f, 2)?;
                }
                QFFormula::Or(a, b) => {
                    go(a, f, 0)?;
                    write!(f, " | ")?;
                    go(b, f, 1)?;
                }
                QFFormula::Not(a) => {
                    write!(f, "!")?;
                    go(a, f, 3)?;
                }
            }
            if needs_parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_i64;
    use num_traits::One;

    #[test]
    fn atoms_evaluate_exactly() {
        let t = SplitPoly::var();
        let one = SplitPoly::constant(Rat::one()).unwrap();
        // |t| < |1| at t = 5 over Q_5
        let phi = QFFormula::AbsLt(t.clone(), one.clone());
        assert!(phi.eval_at(&rat_i64(5), 5));
        assert!(!phi.eval_at(&rat_i64(3), 5));
        // |0| < |1| holds, |1| < |0| does not
        let at_zero = QFFormula::AbsLt(t.clone(), one.clone());
        assert!(at_zero.eval_at(&Rat::zero(), 5));
        let rev = QFFormula::AbsLt(one.clone(), t.clone());
        assert!(!rev.eval_at(&Rat::zero(), 5));
        // pow on zero input is false
        let pow = QFFormula::Pow(2, t.clone());
        assert!(!pow.eval_at(&Rat::zero(), 5));
        assert!(pow.eval_at(&rat_i64(9), 5));
        assert!(!pow.eval_at(&rat_i64(5), 5));
        // zero test
        let z = QFFormula::EqZero(SplitPoly::linear(rat_i64(1)));
        assert!(z.eval_at(&rat_i64(1), 5));
        assert!(!z.eval_at(&rat_i64(2), 5));
    }

    #[test]
    fn poly_collection_dedups() {
        let t = SplitPoly::var();
        let phi = QFFormula::and(
            QFFormula::Pow(2, t.clone()),
            QFFormula::not(QFFormula::Pow(3, t.clone())),
        );
        assert_eq!(phi.polynomials().len(), 1);
        assert_eq!(phi.coset_modulus(), 6);
    }

    #[test]
    fn display_respects_precedence() {
        let t = SplitPoly::var();
        let one = SplitPoly::constant(Rat::one()).unwrap();
        let phi = QFFormula::or(
            QFFormula::and(
                QFFormula::AbsLt(t.clone(), one.clone()),
                QFFormula::Pow(2, t.clone()),
            ),
            QFFormula::not(QFFormula::EqZero(t.clone())),
        );
        assert_eq!(
            phi.to_string(),
            "abs((t)) < abs(1) & pow(2, (t)) | !((t) = 0)"
        );
    }
}
