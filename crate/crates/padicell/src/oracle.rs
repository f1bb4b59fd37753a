//! Brute-force ground truth: residue-ring enumeration for power classes,
//! membership, measure and partition questions, and truncated Riemann sums
//! for integrals.
//!
//! Nothing here calls into the symbolic modules it checks. Membership and
//! power decisions are recomputed from first principles (rational valuation
//! plus enumeration of n-th powers at the sufficient modulus), and measures
//! come from counting classes, with one scaling step for the geometric tail
//! of cells that are unbounded toward their center.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Mutex, OnceLock};

use num_traits::{ToPrimitive, Zero};

use crate::cells::Cell;
use crate::rat::{p_pow, rat_i64, rat_mod_pk, rat_valuation, unit_part, Rat};

/// The deterministic test grid: zero plus all p^v * u with v in
/// [v_lo, v_hi] and u a unit residue modulo p^depth.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub prime: u64,
    pub v_lo: i64,
    pub v_hi: i64,
    pub depth: u32,
}

impl SampleGrid {
    /// Defaults: valuation window [-4, 4]; residue depth 6 for p <= 5,
    /// 4 for larger primes.
    pub fn default_for(prime: u64) -> Self {
        SampleGrid {
            prime,
            v_lo: -4,
            v_hi: 4,
            depth: if prime <= 5 { 6 } else { 4 },
        }
    }

    /// A coarser grid for inner loops of quadratic checks.
    pub fn shallow(prime: u64, depth: u32) -> Self {
        SampleGrid {
            prime,
            v_lo: -4,
            v_hi: 4,
            depth,
        }
    }

    pub fn points(&self) -> Vec<Rat> {
        let p = self.prime;
        let pd = p.pow(self.depth);
        let mut out = vec![Rat::zero()];
        for v in self.v_lo..=self.v_hi {
            let scale = p_pow(p, v);
            for u in 1..pd {
                if u % p == 0 {
                    continue;
                }
                out.push(rat_i64(u as i64) * &scale);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        let pd = self.prime.pow(self.depth);
        let units = (pd - pd / self.prime) as usize;
        1 + units * (self.v_hi - self.v_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The set of classes modulo p^k that are n-th powers of units, by direct
/// enumeration of u^n mod p^k.
pub fn oracle_nth_power_classes(p: u64, n: u64, k: u32) -> BTreeSet<u64> {
    let pk = p.pow(k);
    let mut out = BTreeSet::new();
    for u in 1..pk {
        if u % p == 0 {
            continue;
        }
        let mut acc: u64 = 1;
        let mut base = u % pk;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = (acc as u128 * base as u128 % pk as u128) as u64;
            }
            base = (base as u128 * base as u128 % pk as u128) as u64;
            e >>= 1;
        }
        out.insert(acc);
    }
    out
}

fn sufficient_depth(p: u64, n: u64) -> u32 {
    let mut v = 0;
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    2 * v + 1
}

type ClassCache = Mutex<BTreeMap<(u64, u64), BTreeSet<u64>>>;

static CLASS_CACHE: OnceLock<ClassCache> = OnceLock::new();

fn cached_classes(p: u64, n: u64) -> BTreeSet<u64> {
    let lock = CLASS_CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut map = lock.lock().unwrap();
    map.entry((p, n))
        .or_insert_with(|| oracle_nth_power_classes(p, n, sufficient_depth(p, n)))
        .clone()
}

/// Independent n-th power test for a nonzero rational. P_1 is all of K^x.
pub fn oracle_is_nth_power(x: &Rat, n: u64, p: u64) -> bool {
    if n == 1 {
        return !x.is_zero();
    }
    let v = rat_valuation(x, p).expect("nonzero");
    if v.rem_euclid(n as i64) != 0 {
        return false;
    }
    let e = sufficient_depth(p, n);
    let u = rat_mod_pk(&unit_part(x, p), p, e).to_u64().unwrap();
    cached_classes(p, n).contains(&u)
}

/// Independent cell membership: window by direct rational valuation, coset
/// by the enumeration-based power test.
pub fn oracle_cell_contains(cell: &Cell, t: &Rat) -> bool {
    if cell.is_point() {
        return t == cell.center();
    }
    let d = t - cell.center();
    if d.is_zero() {
        return false;
    }
    let v = rat_valuation(&d, cell.prime()).unwrap();
    if let Some(hi) = cell.hi() {
        if v <= hi {
            return false;
        }
    }
    if let Some(lo) = cell.lo() {
        if v >= lo {
            return false;
        }
    }
    oracle_is_nth_power(&(d / cell.lambda()), cell.n(), cell.prime())
}

/// Measure by counting classes at depth k. Shells are enumerated one
/// valuation at a time; a cell open toward its center keeps a geometric
/// tail, which is counted over one coset period and closed with the scaling
/// identity mu(A intersect {v >= v0 + n}) = p^(-n) mu(A intersect {v >= v0}).
///
/// A (0)-cell reports p^(-k): the point-mass artifact of discretization.
pub fn oracle_measure(cell: &Cell, k: u32) -> Rat {
    let p = cell.prime();
    if cell.is_point() {
        return p_pow(p, -(k as i64));
    }
    let hi = cell
        .hi()
        .expect("oracle_measure needs a cell of finite measure (hi present)");
    let e_res = sufficient_depth(p, cell.n());
    let k = k as i64;
    assert!(
        k - e_res as i64 > hi,
        "depth k = {k} does not resolve the cell"
    );
    let mut total = Rat::zero();
    match cell.lo() {
        Some(lo) => {
            // every shell fits below the resolution: a pure count
            for v in (hi + 1)..lo {
                assert!(
                    k - v >= e_res as i64,
                    "depth k = {k} does not resolve shell {v}"
                );
                total += shell_count(cell, v, (k - v) as u32) * p_pow(p, -k);
            }
        }
        None => {
            let v_tail = k - e_res as i64; // first shell handled by scaling
            for v in (hi + 1)..v_tail {
                total += shell_count(cell, v, (k - v) as u32) * p_pow(p, -k);
            }
            // one period of the tail, then close the geometric series
            let n = cell.n() as i64;
            let mut period = Rat::zero();
            for v in v_tail..v_tail + n {
                period += shell_count(cell, v, e_res) * p_pow(p, -(v + e_res as i64));
            }
            total += period / (Rat::from_integer(1.into()) - p_pow(p, -n));
        }
    }
    total
}

/// Number of unit chunks u mod p^depth on the shell v(t - center) = v that
/// satisfy the coset condition.
fn shell_count(cell: &Cell, v: i64, depth: u32) -> Rat {
    let p = cell.prime();
    let pd = p.pow(depth);
    let scale = p_pow(p, v);
    let mut count = 0u64;
    for u in 1..pd {
        if u % p == 0 {
            continue;
        }
        let d = rat_i64(u as i64) * &scale;
        if oracle_is_nth_power(&(d / cell.lambda()), cell.n(), p) {
            count += 1;
        }
    }
    Rat::from_integer(count.into())
}

/// Truncated Riemann sum of f over a domain cell at depth k: every depth-k
/// class in the domain contributes f(representative) * p^(-k). When the
/// domain is open toward its center, the center's own class contributes
/// f(center) * p^(-k) (so constants integrate exactly to the full measure).
///
/// Work grows like p^k; keep k small enough that p^k stays in the millions.
pub fn oracle_integrate<F>(f: F, domain: &Cell, k: u32) -> Rat
where
    F: Fn(&Rat) -> Rat,
{
    let p = domain.prime();
    assert!(!domain.is_point(), "domain must be a (1)-cell");
    let hi = domain
        .hi()
        .expect("oracle_integrate needs a finite-measure domain");
    let k = k as i64;
    let v_stop = domain.lo().map(|lo| lo - 1).unwrap_or(k - 1).min(k - 1);
    let mut total = Rat::zero();
    let weight = p_pow(p, -k);
    for v in (hi + 1)..=v_stop {
        let depth = (k - v) as u32;
        let pd = p.pow(depth);
        let scale = p_pow(p, v);
        for u in 1..pd {
            if u % p == 0 {
                continue;
            }
            let d = rat_i64(u as i64) * &scale;
            if !oracle_is_nth_power(&(&d / domain.lambda()), domain.n(), p) {
                continue;
            }
            let t = domain.center() + d;
            total += f(&t) * &weight;
        }
    }
    if domain.lo().is_none() {
        // the center's class
        total += f(domain.center()) * &weight;
    }
    total
}

/// Truncated sum for integrands that depend only on v(t - center) inside
/// the domain: sum over shells v up to `shells_to` of the counted shell
/// measure times f(v). The tail beyond `shells_to` is dropped, so deep
/// truncation levels stay cheap (work is per shell, not per class).
pub fn oracle_integrate_shells<F>(f_of_valuation: F, domain: &Cell, shells_to: i64) -> Rat
where
    F: Fn(i64) -> Rat,
{
    let p = domain.prime();
    assert!(!domain.is_point(), "domain must be a (1)-cell");
    let hi = domain
        .hi()
        .expect("oracle_integrate_shells needs a finite-measure domain");
    let e_res = sufficient_depth(p, domain.n());
    let v_stop = domain
        .lo()
        .map(|lo| lo - 1)
        .unwrap_or(shells_to)
        .min(shells_to);
    let mut total = Rat::zero();
    for v in (hi + 1)..=v_stop {
        let count = shell_count(domain, v, e_res);
        if count.is_zero() {
            continue;
        }
        total += count * p_pow(p, -(v + e_res as i64)) * f_of_valuation(v);
    }
    total
}

/// Outcome of a partition or coverage check over a grid.
#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub ok: bool,
    /// Points covered the wrong number of times, with the observed count.
    pub violations: Vec<(Rat, usize)>,
    pub checked: usize,
}

/// Every grid point must lie in exactly one of the cells.
pub fn oracle_partition_check(cells: &[Cell], grid: &SampleGrid) -> PartitionReport {
    oracle_cover_check(cells, grid, |_| true)
}

/// Every grid point must lie in exactly one cell if pred holds there, and
/// in none otherwise. `oracle_partition_check` is the pred = true case.
pub fn oracle_cover_check<F>(cells: &[Cell], grid: &SampleGrid, pred: F) -> PartitionReport
where
    F: Fn(&Rat) -> bool,
{
    let mut violations = Vec::new();
    let points = grid.points();
    let checked = points.len();
    for t in points {
        let count = cells.iter().filter(|c| oracle_cell_contains(c, &t)).count();
        let expected = usize::from(pred(&t));
        if count != expected {
            violations.push((t, count));
            if violations.len() > 32 {
                break;
            }
        }
    }
    PartitionReport {
        ok: violations.is_empty(),
        violations,
        checked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::CellMeasure;
    use crate::rat::rat;
    use num_traits::One;

    #[test]
    fn power_classes_match_known_facts() {
        // odd squares are 1 mod 8
        let c = oracle_nth_power_classes(2, 2, 3);
        assert_eq!(c, BTreeSet::from([1]));
        // squares of units mod 25: ten classes
        let c = oracle_nth_power_classes(5, 2, 2);
        assert_eq!(c.len(), 10);
        assert!(c.contains(&6));
        // n = 1 gives every unit class
        let c = oracle_nth_power_classes(3, 1, 1);
        assert_eq!(c, BTreeSet::from([1, 2]));
    }

    #[test]
    fn oracle_measure_matches_cell_measure() {
        let m = Cell::maximal_ideal(5);
        assert_eq!(oracle_measure(&m, 3), rat(1, 5));
        let sq = Cell::new(Rat::zero(), None, Some(0), Rat::one(), 2, 5).unwrap();
        assert_eq!(oracle_measure(&sq, 6), rat(1, 60));
        assert_eq!(CellMeasure::Finite(oracle_measure(&sq, 6)), sq.measure());
        // point cell: discretization artifact
        assert_eq!(oracle_measure(&Cell::point(Rat::zero(), 5), 4), rat(1, 625));
    }

    #[test]
    fn depth_monotonicity() {
        let sq = Cell::new(Rat::zero(), None, Some(0), Rat::one(), 2, 5).unwrap();
        let a = oracle_measure(&sq, 5);
        let b = oracle_measure(&sq, 7);
        assert_eq!(a, b);
    }

    #[test]
    fn disjoint_union_is_additive() {
        let whole = Cell::maximal_ideal(3);
        let parts = whole.refine_by_coset(2).unwrap();
        let sum: Rat = parts.iter().map(|c| oracle_measure(c, 7)).sum();
        assert_eq!(sum, oracle_measure(&whole, 7));
    }

    #[test]
    fn constant_integrates_to_the_measure() {
        let r = Cell::unit_ball(5);
        assert_eq!(oracle_integrate(|_| Rat::one(), &r, 4), Rat::one());
        let m = Cell::maximal_ideal(3);
        assert_eq!(oracle_integrate(|_| Rat::one(), &m, 5), rat(1, 3));
    }

    #[test]
    fn truncated_valuation_integral_is_close() {
        // sum_k k 2^(-k-1) = 1, truncated at shell 30
        let r = Cell::unit_ball(2);
        let got = oracle_integrate_shells(rat_i64, &r, 30);
        let err = num_traits::Signed::abs(&(Rat::one() - got));
        assert!(err < p_pow(2, -25), "error {err}");
    }

    #[test]
    fn class_sum_matches_shell_sum_for_abs() {
        // |t| over R at modest depth, both oracle routes agree with 5/6
        let r = Cell::unit_ball(3);
        let classes = oracle_integrate(
            |t| {
                if t.is_zero() {
                    Rat::zero()
                } else {
                    p_pow(3, -rat_valuation(t, 3).unwrap())
                }
            },
            &r,
            8,
        );
        let shells = oracle_integrate_shells(|v| p_pow(3, -v), &r, 7);
        let exact = rat(3, 4); // (1 - 1/3)/(1 - 1/9)
        assert!(num_traits::Signed::abs(&(&classes - &exact)) < p_pow(3, -6));
        assert!(num_traits::Signed::abs(&(&shells - &exact)) < p_pow(3, -6));
    }

    #[test]
    fn partition_check_flags_duplicates() {
        let grid = SampleGrid::shallow(5, 2);
        let k_star = Cell::new(Rat::zero(), None, None, Rat::one(), 1, 5).unwrap();
        let good = oracle_cover_check(std::slice::from_ref(&k_star), &grid, |t| !t.is_zero());
        assert!(good.ok);
        let dup = oracle_cover_check(&[k_star.clone(), k_star], &grid, |t| !t.is_zero());
        assert!(!dup.ok);
        assert_eq!(dup.violations[0].1, 2);
    }
}
