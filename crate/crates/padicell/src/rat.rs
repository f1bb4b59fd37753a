//! Exact rational helpers: p-adic valuation and unit part of a rational,
//! integer powers of p, and the `a/b` rendering used everywhere.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Number of times `p` divides the integer `n` (n != 0).
pub fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

/// p-adic valuation of a rational, `None` for zero.
pub fn rat_valuation(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
}

/// The unit part `x * p^(-v(x))`, a rational with numerator and denominator
/// coprime to p. Panics on zero.
pub fn unit_part(x: &Rat, p: u64) -> Rat {
    let v = rat_valuation(x, p).expect("unit_part of zero");
    x * p_pow(p, -v)
}

/// p^k as an exact rational, for any integer k.
pub fn p_pow(p: u64, k: i64) -> Rat {
    let pk = BigInt::from(p).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rat::from_integer(pk)
    } else {
        Rat::new(BigInt::one(), pk)
    }
}

/// x^k for integer k; requires x != 0 when k < 0.
pub fn rat_pow(x: &Rat, k: i64) -> Rat {
    if k == 0 {
        return Rat::one();
    }
    let mut base = if k < 0 { x.recip() } else { x.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = Rat::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            let sq = &base * &base;
            base = sq;
        }
    }
    acc
}

/// Residue of a p-integral rational modulo p^k, as an integer in `[0, p^k)`.
/// Requires the denominator to be coprime to p.
pub fn rat_mod_pk(x: &Rat, p: u64, k: u32) -> BigUint {
    let modulus = BigInt::from(p).pow(k);
    let num = num_integer::Integer::mod_floor(x.numer(), &modulus);
    let den = num_integer::Integer::mod_floor(x.denom(), &modulus);
    let den_inv = mod_inverse(&den, &modulus).expect("denominator not coprime to p");
    let r = num_integer::Integer::mod_floor(&(num * den_inv), &modulus);
    r.to_biguint().unwrap()
}

/// Inverse of `a` modulo `m`, if gcd(a, m) = 1.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = num_integer::Integer::extended_gcd(a, m);
    if e.gcd.is_one() {
        Some(num_integer::Integer::mod_floor(&e.x, m))
    } else {
        None
    }
}

/// Render in lowest terms as `a/b`, with `/b` omitted when b = 1.
pub fn render_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `a` or `a/b` into a rational. `offset` is the 1-based column of the
/// start of the text inside a larger input, used for error positions.
pub fn parse_rat(text: &str, offset: usize) -> crate::error::Result<Rat> {
    let text = text.trim();
    let (num_s, den_s) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let num: BigInt = num_s.parse().map_err(|_| {
        crate::error::Error::syntax(offset, format!("expected rational, got `{text}`"))
    })?;
    let den: BigInt = match den_s {
        Some(d) => d.parse().map_err(|_| {
            crate::error::Error::syntax(offset, format!("expected rational, got `{text}`"))
        })?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(crate::error::Error::syntax(offset, "zero denominator"));
    }
    Ok(Rat::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_of_integers_and_fractions() {
        assert_eq!(rat_valuation(&rat_i64(12), 2), Some(2));
        assert_eq!(rat_valuation(&rat(5, 3), 5), Some(1));
        assert_eq!(rat_valuation(&rat(1, 3), 3), Some(-1));
        assert_eq!(rat_valuation(&Rat::zero(), 7), None);
    }

    #[test]
    fn unit_parts() {
        assert_eq!(unit_part(&rat_i64(12), 2), rat_i64(3));
        assert_eq!(unit_part(&rat(5, 3), 5), rat(1, 3));
    }

    #[test]
    fn mod_pk() {
        assert_eq!(rat_mod_pk(&rat_i64(12), 5, 1), BigUint::from(2u32));
        // 1/3 mod 25: 3 * 17 = 51 = 2*25 + 1
        assert_eq!(rat_mod_pk(&rat(1, 3), 5, 2), BigUint::from(17u32));
    }

    #[test]
    fn rendering() {
        assert_eq!(render_rat(&rat(4, 2)), "2");
        assert_eq!(render_rat(&rat(-3, 6)), "-1/2");
        assert_eq!(parse_rat("4/5", 1).unwrap(), rat(4, 5));
        assert!(parse_rat("x", 3).is_err());
    }

    #[test]
    fn pow() {
        assert_eq!(p_pow(5, -2), rat(1, 25));
        assert_eq!(rat_pow(&rat(2, 3), -2), rat(9, 4));
    }
}
