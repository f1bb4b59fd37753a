//! Hensel lifting of approximate roots, and the power predicates P_n:
//! membership, coset representatives and the index of K^x modulo n-th
//! powers in Q_p.
//!
//! A unit u is an n-th power in Z_p^x exactly when its class modulo
//! p^(2 v_p(n) + 1) is the class of an n-th power of a unit: for f = y^n - u
//! and a candidate a with a^n = u mod p^(2 v_p(n) + 1), the Hensel condition
//! v(f(a)) > 2 v(f'(a)) = 2 v_p(n) holds, so the root lifts. All P_n
//! decisions therefore reduce to finite enumeration at that modulus.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::padic::PAdicNumber;
use crate::poly::Poly;
use crate::rat::{p_pow, rat_mod_pk, rat_valuation, render_rat, unit_part, Rat};

/// A representative of one coset of P_n in Q_p^x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetRep {
    pub representative: Rat,
    pub n: u64,
}

impl fmt::Display for CosetRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*P_{}", render_rat(&self.representative), self.n)
    }
}

/// Precomputed data for the pair (p, n): the set of n-th-power unit classes
/// modulo p^e with e = 2 v_p(n) + 1, and a representative for every unit
/// coset modulo that set.
pub struct CosetTable {
    pub p: u64,
    pub n: u64,
    /// Sufficient unit-test depth e(n, p) = 2 v_p(n) + 1.
    pub e: u32,
    pub pe: u64,
    /// Monotone list of the chosen (smallest) unit-coset representatives.
    pub unit_reps: Vec<u64>,
    /// rep_of[u] = chosen representative of u's coset, for units u mod p^e.
    rep_of: Vec<u64>,
}

impl CosetTable {
    fn build(p: u64, n: u64) -> CosetTable {
        assert!(n >= 1, "power predicate index must be >= 1");
        let vpn = if n == 0 { 0 } else { v_int(n, p) };
        let e = 2 * vpn + 1;
        let pe = p.checked_pow(e).expect("p^e fits in u64");
        assert!(pe < (1 << 40), "modulus p^e out of desk range");
        // the subgroup of n-th power unit classes mod p^e
        let mut powers: Vec<u64> = Vec::new();
        let mut seen = vec![false; pe as usize];
        for u in 1..pe {
            if u % p == 0 {
                continue;
            }
            let s = pow_mod(u, n, pe);
            if !seen[s as usize] {
                seen[s as usize] = true;
                powers.push(s);
            }
        }
        let mut rep_of = vec![0u64; pe as usize];
        let mut unit_reps = Vec::new();
        for u in 1..pe {
            if u % p == 0 || rep_of[u as usize] != 0 {
                continue;
            }
            unit_reps.push(u);
            for s in &powers {
                let c = mul_mod(u, *s, pe);
                rep_of[c as usize] = u;
            }
        }
        CosetTable {
            p,
            n,
            e,
            pe,
            unit_reps,
            rep_of,
        }
    }

    /// Class of the unit part of x modulo p^e.
    pub fn unit_class(&self, x: &Rat) -> u64 {
        let u = unit_part(x, self.p);
        let r = rat_mod_pk(&u, self.p, self.e);
        num_traits::ToPrimitive::to_u64(&r).unwrap()
    }

    /// Representative of the U_n-coset of the unit part of x.
    pub fn unit_rep(&self, x: &Rat) -> u64 {
        self.rep_of[self.unit_class(x) as usize]
    }

    /// Whether the unit part of x is an n-th power of a unit.
    pub fn unit_is_power(&self, x: &Rat) -> bool {
        self.unit_rep(x) == 1
    }

    pub fn unit_coset_count(&self) -> u64 {
        self.unit_reps.len() as u64
    }
}

fn v_int(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

type TableCache = Mutex<BTreeMap<(u64, u64), Arc<CosetTable>>>;

static TABLES: OnceLock<TableCache> = OnceLock::new();

/// Shared coset table for (p, n); built once, then read concurrently.
pub fn coset_table(p: u64, n: u64) -> Arc<CosetTable> {
    let lock = TABLES.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut map = lock.lock().unwrap();
    map.entry((p, n))
        .or_insert_with(|| Arc::new(CosetTable::build(p, n)))
        .clone()
}

/// Decide x in (Q_p^x)^n for a nonzero exact rational x.
pub fn is_nth_power(x: &Rat, n: u64, p: u64) -> bool {
    assert!(!x.is_zero(), "P_n is a predicate on K^x");
    if n == 1 {
        return true;
    }
    let v = rat_valuation(x, p).unwrap();
    if v.rem_euclid(n as i64) != 0 {
        return false;
    }
    coset_table(p, n).unit_is_power(x)
}

/// A complete, duplicate-free list of coset representatives of Q_p^x / P_n:
/// (unit class representative) * p^j for 0 <= j < n, unit representatives
/// ascending within each j.
pub fn coset_reps(p: u64, n: u64) -> Vec<CosetRep> {
    let table = coset_table(p, n);
    let mut out = Vec::new();
    for j in 0..n {
        for w in &table.unit_reps {
            out.push(CosetRep {
                representative: Rat::from_integer((*w).into()) * p_pow(p, j as i64),
                n,
            });
        }
    }
    out
}

/// The index [K^x : P_n] for K = Q_p.
pub fn power_index(p: u64, n: u64) -> u64 {
    n * coset_table(p, n).unit_coset_count()
}

/// The unique representative lambda from `coset_reps(p, n)` with
/// x in lambda * P_n.
pub fn coset_of(x: &Rat, n: u64, p: u64) -> CosetRep {
    assert!(!x.is_zero(), "coset of zero is undefined");
    let table = coset_table(p, n);
    let v = rat_valuation(x, p).unwrap();
    let j = v.rem_euclid(n as i64);
    let w = table.unit_rep(x);
    CosetRep {
        representative: Rat::from_integer(w.into()) * p_pow(p, j),
        n,
    }
}

/// Same coset test: x and y lie in one coset of P_n.
pub fn same_coset(x: &Rat, y: &Rat, n: u64, p: u64) -> bool {
    if n == 1 {
        return !x.is_zero() && !y.is_zero();
    }
    let table = coset_table(p, n);
    let vx = rat_valuation(x, p).expect("nonzero");
    let vy = rat_valuation(y, p).expect("nonzero");
    (vx - vy).rem_euclid(n as i64) == 0 && table.unit_rep(x) == table.unit_rep(y)
}

/// Least n such that the n-th power units U_n are contained in 1 + p^E R.
/// Coset conditions at this modulus pin the unit of an element modulo p^E.
pub fn pinning_modulus(p: u64, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    if p == 2 {
        match depth {
            1 => 1,
            2 => 2,
            d => 1 << (d - 2),
        }
    } else {
        (p - 1) * p.pow(depth - 1)
    }
}

/// The exact depth E with U_n = 1 + p^E R, when U_n has that form:
/// for odd p this needs (p-1) | n, for p = 2 it needs 2 | n.
pub fn pinning_depth(p: u64, n: u64) -> Option<u32> {
    if p == 2 {
        if n.is_multiple_of(2) {
            Some(v_int(n, 2) + 2)
        } else {
            None
        }
    } else if n.is_multiple_of(p - 1) {
        Some(v_int(n, p) + 1)
    } else {
        None
    }
}

/// Hensel lift: from an approximate root a of f with
/// v(f(a)) > 2 v(f'(a)), produce the unique root r with
/// v(r - a) > v(f'(a)), to `target_precision` known digits.
///
/// Newton steps run in exact rational arithmetic (reduced modulo a high
/// power of p to keep numbers small); the result is truncated at the end
/// and the congruence f(r) = 0 mod p^target is re-checked exactly.
pub fn hensel_lift(f: &Poly, a: &Rat, target_precision: u32) -> Result<PAdicNumber> {
    let p = f.prime();
    if f.degree() < 1 {
        return Err(Error::HenselConditionFailed(
            "constant polynomial has no roots to lift".into(),
        ));
    }
    let df = f.derivative();
    let fa = f.eval(a);
    let dfa = df.eval(a);
    if dfa.is_zero() {
        return Err(Error::HenselConditionFailed("f'(a) = 0".into()));
    }
    let e = rat_valuation(&dfa, p).unwrap();
    if !fa.is_zero() {
        let t0 = rat_valuation(&fa, p).unwrap();
        if t0 <= 2 * e {
            return Err(Error::HenselConditionFailed(format!(
                "v(f(a)) = {t0} is not above 2 v(f'(a)) = {}",
                2 * e
            )));
        }
    }

    // guard for coefficient denominators and the root's own valuation
    let coeff_dip = f
        .coeffs()
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| rat_valuation(c, p).unwrap())
        .min()
        .unwrap_or(0)
        .min(0)
        .unsigned_abs() as i64;
    let target = target_precision as i64;
    let thresh = target + e + coeff_dip + 6;
    let working = thresh + e + 12;

    let mut r = a.clone();
    for _ in 0..64 {
        let fr = f.eval(&r);
        if fr.is_zero() {
            break;
        }
        if rat_valuation(&fr, p).unwrap() >= thresh {
            break;
        }
        let dfr = df.eval(&r);
        if dfr.is_zero() {
            return Err(Error::HenselConditionFailed(
                "derivative vanished during iteration".into(),
            ));
        }
        r = &r - fr / dfr;
        r = reduce_mod_power(&r, p, working);
    }

    // truncate and verify the congruence exactly, widening if the root's
    // valuation or coefficient denominators eat into the target
    for extra in [0u32, 4, 8, 16, 32] {
        let digits = target_precision + extra;
        let cand = PAdicNumber::from_rational(p, &r, digits)?;
        let rep = cand.representative();
        let frep = f.eval(&rep);
        let ok = match rat_valuation(&frep, p) {
            None => true,
            Some(v) => v >= target,
        };
        if ok {
            return Ok(cand);
        }
    }
    Err(Error::HenselConditionFailed(
        "iteration did not reach the requested precision".into(),
    ))
}

/// Replace x by a p-adically congruent rational of small height:
/// x = p^v * u with u reduced modulo p^(m - v).
fn reduce_mod_power(x: &Rat, p: u64, m: i64) -> Rat {
    if x.is_zero() {
        return x.clone();
    }
    let v = rat_valuation(x, p).unwrap();
    if v >= m {
        return Rat::zero();
    }
    let width = u32::try_from(m - v).unwrap();
    let u = rat_mod_pk(&unit_part(x, p), p, width);
    Rat::from_integer(u.into()) * p_pow(p, v)
}
