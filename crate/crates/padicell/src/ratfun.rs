//! Polynomials and rational functions in the formal variable T, with exact
//! rational coefficients. T stands for p^(-s) in the zeta-function surface;
//! here it is purely formal. Rational functions stay reduced (gcd 1) with a
//! monic denominator.

use std::fmt;

use num_traits::{One, Zero};

use crate::rat::{render_rat, Rat};

/// Dense polynomial in T, coefficients ascending by degree, no trailing
/// zeros (the zero polynomial is the empty list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyT(Vec<Rat>);

impl PolyT {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map(Rat::is_zero) == Some(true) {
            coeffs.pop();
        }
        PolyT(coeffs)
    }

    pub fn zero() -> Self {
        PolyT(Vec::new())
    }

    pub fn one() -> Self {
        PolyT(vec![Rat::one()])
    }

    pub fn constant(c: Rat) -> Self {
        PolyT::new(vec![c])
    }

    /// c * T^k
    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return PolyT::zero();
        }
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        PolyT(coeffs)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.0.last()
    }

    pub fn add(&self, other: &PolyT) -> PolyT {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        PolyT::new(out)
    }

    pub fn neg(&self) -> PolyT {
        PolyT(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &PolyT) -> PolyT {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PolyT) -> PolyT {
        if self.is_zero() || other.is_zero() {
            return PolyT::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyT::new(out)
    }

    pub fn scale(&self, c: &Rat) -> PolyT {
        if c.is_zero() {
            return PolyT::zero();
        }
        PolyT(self.0.iter().map(|x| x * c).collect())
    }

    /// Euclidean division; divisor must be nonzero.
    pub fn div_rem(&self, divisor: &PolyT) -> (PolyT, PolyT) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dlead = divisor.leading().unwrap();
        let dd = divisor.0.len() - 1;
        let mut rem = self.0.clone();
        let mut quo = vec![Rat::zero(); self.0.len().saturating_sub(dd)];
        while rem.len() > dd {
            let shift = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() / dlead;
            if factor.is_zero() {
                rem.pop();
                continue;
            }
            for (i, c) in divisor.0.iter().enumerate() {
                let idx = shift + i;
                let sub = c * &factor;
                rem[idx] -= sub;
            }
            quo[shift] = factor;
            // the leading term cancels exactly
            debug_assert!(rem.last().unwrap().is_zero());
            rem.pop();
        }
        (PolyT::new(quo), PolyT::new(rem))
    }

    pub fn gcd(&self, other: &PolyT) -> PolyT {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        // normalize monic
        match a.leading() {
            None => a,
            Some(l) => {
                let inv = l.recip();
                a.scale(&inv)
            }
        }
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Render with the variable name T.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = match i {
                0 => render_rat(c),
                _ => {
                    let var = if i == 1 {
                        "T".to_string()
                    } else {
                        format!("T^{i}")
                    };
                    if c.is_one() {
                        var
                    } else if (-c).is_one() {
                        format!("-{var}")
                    } else if c.numer().is_one() {
                        format!("{var}/{}", c.denom())
                    } else if (-c.numer()).is_one() {
                        format!("-{var}/{}", c.denom())
                    } else {
                        format!("{}*{var}", render_rat(c))
                    }
                }
            };
            parts.push(term);
        }
        let mut out = String::new();
        for (i, term) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(term);
            } else if let Some(rest) = term.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(term);
            }
        }
        out
    }
}

/// A reduced rational function in T with monic denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunctionT {
    num: PolyT,
    den: PolyT,
}

impl RationalFunctionT {
    pub fn new(num: PolyT, den: PolyT) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut out = RationalFunctionT { num, den };
        out.reduce();
        out
    }

    pub fn zero() -> Self {
        RationalFunctionT {
            num: PolyT::zero(),
            den: PolyT::one(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        RationalFunctionT {
            num: PolyT::constant(c),
            den: PolyT::one(),
        }
    }

    pub fn num(&self) -> &PolyT {
        &self.num
    }

    pub fn den(&self) -> &PolyT {
        &self.den
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = PolyT::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree() > Some(0) || g.degree() == Some(0) {
            let (n, rn) = self.num.div_rem(&g);
            let (d, rd) = self.den.div_rem(&g);
            debug_assert!(rn.is_zero() && rd.is_zero());
            self.num = n;
            self.den = d;
        }
        // monic denominator
        let lead = self.den.leading().expect("nonzero denominator").clone();
        if !lead.is_one() {
            let inv = lead.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalFunctionT::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        RationalFunctionT::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RationalFunctionT::new(self.num.scale(c), self.den.clone())
    }

    /// Evaluate at a rational T-value; the denominator must not vanish.
    pub fn evaluate(&self, x: &Rat) -> Rat {
        let d = self.den.eval(x);
        assert!(!d.is_zero(), "pole at T = {}", render_rat(x));
        self.num.eval(x) / d
    }

    /// Human form with the denominator normalized to constant term 1 when
    /// possible (e.g. (4/5)/(1 - T/5)); falls back to the monic form.
    pub fn render(&self) -> String {
        if self.num.is_zero() {
            return "0".to_string();
        }
        let c0 = self.den.coeffs().first().cloned().unwrap_or_else(Rat::zero);
        let (num, den) = if c0.is_zero() {
            (self.num.clone(), self.den.clone())
        } else {
            let inv = c0.recip();
            (self.num.scale(&inv), self.den.scale(&inv))
        };
        if den.degree() == Some(0) {
            return num.render();
        }
        let plain = num.render();
        let num_s = if plain.chars().all(|c| c.is_ascii_digit()) {
            plain
        } else {
            format!("({plain})")
        };
        format!("{}/({})", num_s, den.render())
    }
}

impl fmt::Display for RationalFunctionT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i64};

    #[test]
    fn division_and_gcd() {
        // (T^2 - 1) / (T - 1) = T + 1
        let num = PolyT::new(vec![rat_i64(-1), rat_i64(0), rat_i64(1)]);
        let den = PolyT::new(vec![rat_i64(-1), rat_i64(1)]);
        let (q, r) = num.div_rem(&den);
        assert!(r.is_zero());
        assert_eq!(q, PolyT::new(vec![rat_i64(1), rat_i64(1)]));
        let g = num.gcd(&den);
        assert_eq!(g, den);
    }

    #[test]
    fn reduction_and_monic_normalization() {
        // (2T^2 - 2) / (4T - 4) = (T + 1)/2
        let f = RationalFunctionT::new(
            PolyT::new(vec![rat_i64(-2), rat_i64(0), rat_i64(2)]),
            PolyT::new(vec![rat_i64(-4), rat_i64(4)]),
        );
        assert_eq!(f.num(), &PolyT::new(vec![rat(1, 2), rat(1, 2)]));
        assert_eq!(f.den(), &PolyT::one());
    }

    #[test]
    fn arithmetic_and_eval() {
        // 1/(1 - T) + T/(1 - T) = (1 + T)/(1 - T)
        let a = RationalFunctionT::new(PolyT::one(), PolyT::new(vec![rat_i64(1), rat_i64(-1)]));
        let b = RationalFunctionT::new(
            PolyT::monomial(Rat::one(), 1),
            PolyT::new(vec![rat_i64(1), rat_i64(-1)]),
        );
        let s = a.add(&b);
        assert_eq!(s.evaluate(&rat(1, 2)), rat_i64(3));
    }

    #[test]
    fn rendering_normalizes_constant_term() {
        // (4/5) / (1 - T/5): monic internal form is (-4)/(T - 5)
        let f = RationalFunctionT::new(
            PolyT::constant(rat(4, 5)),
            PolyT::new(vec![rat_i64(1), rat(-1, 5)]),
        );
        assert_eq!(f.den(), &PolyT::new(vec![rat_i64(-5), rat_i64(1)]));
        assert_eq!(f.render(), "(4/5)/(1 - T/5)");
    }
}
