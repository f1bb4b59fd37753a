//! One-variable cells: a center gamma, an open valuation window
//! hi < v(t - gamma) < lo (each bound optional), and a power coset
//! lambda * P_n. A (0)-cell (lambda = 0) is the single point {gamma}.
//!
//! Bounds are stored as valuations: with value group Z, only v(alpha) and
//! v(beta) of the norm bounds matter, and strict inequalities still express
//! valuation equalities because the group is discrete.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hensel::{coset_of, coset_reps, coset_table, same_coset};
use crate::rat::{p_pow, rat_valuation, render_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    center: Rat,
    /// When present: v(t - center) < lo, i.e. |t - center| > p^(-lo).
    lo: Option<i64>,
    /// When present: hi < v(t - center), i.e. |t - center| < p^(-hi).
    hi: Option<i64>,
    /// Coset datum; 0 makes the cell the point {center}.
    lambda: Rat,
    n: u64,
    prime: u64,
}

/// Haar measure of a cell, normalized so that mu(R) = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellMeasure {
    Finite(Rat),
    Infinite,
}

impl CellMeasure {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            CellMeasure::Finite(x) => Some(x),
            CellMeasure::Infinite => None,
        }
    }
}

impl fmt::Display for CellMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellMeasure::Finite(x) => write!(f, "{}", render_rat(x)),
            CellMeasure::Infinite => write!(f, "INFINITE"),
        }
    }
}

impl Cell {
    /// A (1)-cell. lambda must be nonzero; n >= 1.
    pub fn new(
        center: Rat,
        lo: Option<i64>,
        hi: Option<i64>,
        lambda: Rat,
        n: u64,
        prime: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCell("coset modulus n must be >= 1".into()));
        }
        if lambda.is_zero() && (lo.is_some() || hi.is_some()) {
            return Err(Error::InvalidCell(
                "a (0)-cell is a single point and carries no bounds".into(),
            ));
        }
        Ok(Cell {
            center,
            lo,
            hi,
            lambda,
            n,
            prime,
        })
    }

    /// The point cell {center}.
    pub fn point(center: Rat, prime: u64) -> Self {
        Cell {
            center,
            lo: None,
            hi: None,
            lambda: Rat::zero(),
            n: 1,
            prime,
        }
    }

    /// The valuation ring R = {v(t) >= 0} minus the origin, as a cell.
    pub fn unit_ball(prime: u64) -> Self {
        Cell::new(Rat::zero(), None, Some(-1), Rat::one(), 1, prime).unwrap()
    }

    /// The maximal ideal M = {v(t) > 0} minus the origin, as a cell.
    pub fn maximal_ideal(prime: u64) -> Self {
        Cell::new(Rat::zero(), None, Some(0), Rat::one(), 1, prime).unwrap()
    }

    pub fn center(&self) -> &Rat {
        &self.center
    }

    pub fn lo(&self) -> Option<i64> {
        self.lo
    }

    pub fn hi(&self) -> Option<i64> {
        self.hi
    }

    pub fn lambda(&self) -> &Rat {
        &self.lambda
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_point(&self) -> bool {
        self.lambda.is_zero()
    }

    /// Valuation of lambda; the admissible valuations of t - center are
    /// congruent to this modulo n.
    pub fn lambda_valuation(&self) -> Option<i64> {
        rat_valuation(&self.lambda, self.prime)
    }

    /// Exact membership test for a rational point.
    pub fn contains(&self, t: &Rat) -> bool {
        if self.is_point() {
            return *t == self.center;
        }
        let d = t - &self.center;
        if d.is_zero() {
            return false;
        }
        let v = rat_valuation(&d, self.prime).unwrap();
        if let Some(hi) = self.hi {
            if v <= hi {
                return false;
            }
        }
        if let Some(lo) = self.lo {
            if v >= lo {
                return false;
            }
        }
        same_coset(&d, &self.lambda, self.n, self.prime)
    }

    /// Smallest admissible valuation k > hi with k = v(lambda) mod n.
    fn first_admissible(&self) -> Option<i64> {
        let r = self.lambda_valuation()?.rem_euclid(self.n as i64);
        let hi = self.hi?;
        let base = hi + 1;
        let shift = (r - base).rem_euclid(self.n as i64);
        Some(base + shift)
    }

    /// A cell is empty exactly when no admissible valuation fits in the
    /// window. Only doubly bounded (1)-cells can be empty.
    pub fn is_empty(&self) -> bool {
        if self.is_point() {
            return false;
        }
        match (self.hi, self.lo) {
            (Some(_), Some(lo)) => match self.first_admissible() {
                Some(k0) => k0 >= lo,
                None => true,
            },
            // an unbounded window always reaches the coset's progression
            _ => false,
        }
    }

    /// Haar measure with mu(R) = 1. Each sphere {v(t - c) = k} has measure
    /// p^(-k) (1 - 1/p), of which the coset keeps one part in
    /// [Z_p^x : U_n] — read off the coset tables, not recomputed here.
    pub fn measure(&self) -> CellMeasure {
        if self.is_point() || self.is_empty() {
            return CellMeasure::Finite(Rat::zero());
        }
        let p = self.prime;
        if self.hi.is_none() {
            return CellMeasure::Infinite;
        }
        let unit_cosets = coset_table(p, self.n).unit_coset_count();
        let level = (Rat::one() - p_pow(p, -1)) / Rat::from_integer(unit_cosets.into());
        let k0 = self.first_admissible().expect("hi present");
        let step = p_pow(p, -(self.n as i64));
        match self.lo {
            None => {
                // geometric tail: sum_{j>=0} p^(-k0-jn)
                let head = p_pow(p, -k0);
                CellMeasure::Finite(level * head / (Rat::one() - step))
            }
            Some(lo) => {
                let last = lo - 1;
                let terms = (last - k0) / self.n as i64 + 1; // >= 1, cell nonempty
                let head = p_pow(p, -k0);
                let sum =
                    head * (Rat::one() - crate::rat::rat_pow(&step, terms)) / (Rat::one() - step);
                CellMeasure::Finite(level * sum)
            }
        }
    }

    /// Split into sub-cells with coset modulus lcm(n, m) and identical
    /// bounds; empty sub-cells are dropped. The union is the original cell
    /// and the measures add up exactly.
    pub fn refine_by_coset(&self, m: u64) -> Result<Vec<Cell>> {
        if self.is_point() {
            return Err(Error::InvalidCell(
                "refine_by_coset needs a (1)-cell (lambda != 0)".into(),
            ));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("coset modulus must be >= 1".into()));
        }
        let big = num_integer::Integer::lcm(&self.n, &m);
        if big == self.n {
            return Ok(vec![self.clone()]);
        }
        let mut out = Vec::new();
        for rep in coset_reps(self.prime, big) {
            if !same_coset(&rep.representative, &self.lambda, self.n, self.prime) {
                continue;
            }
            let cell = Cell::new(
                self.center.clone(),
                self.lo,
                self.hi,
                rep.representative,
                big,
                self.prime,
            )?;
            if !cell.is_empty() {
                out.push(cell);
            }
        }
        sort_cells(&mut out);
        Ok(out)
    }

    /// Same cell with lambda replaced by its canonical coset representative.
    pub fn canonicalized(&self) -> Cell {
        if self.is_point() {
            return self.clone();
        }
        let rep = coset_of(&self.lambda, self.n, self.prime);
        Cell {
            center: self.center.clone(),
            lo: self.lo,
            hi: self.hi,
            lambda: rep.representative,
            n: self.n,
            prime: self.prime,
        }
    }

    /// Canonical output order: center, then hi, then lo, then the coset's
    /// canonical representative ((0)-cells first among equal bounds).
    pub fn canonical_cmp(&self, other: &Cell) -> Ordering {
        fn opt_key(x: Option<i64>) -> (i8, i64) {
            match x {
                None => (0, 0),
                Some(v) => (1, v),
            }
        }
        self.center
            .cmp(&other.center)
            .then_with(|| opt_key(self.hi).cmp(&opt_key(other.hi)))
            .then_with(|| opt_key(self.lo).cmp(&opt_key(other.lo)))
            .then_with(|| {
                let la = if self.is_point() {
                    Rat::zero()
                } else {
                    coset_of(&self.lambda, self.n, self.prime).representative
                };
                let lb = if other.is_point() {
                    Rat::zero()
                } else {
                    coset_of(&other.lambda, other.n, other.prime).representative
                };
                la.cmp(&lb)
            })
            .then_with(|| self.n.cmp(&other.n))
    }
}

/// Sort a family into the canonical order used by every public surface.
pub fn sort_cells(cells: &mut [Cell]) {
    cells.sort_by(|a, b| a.canonical_cmp(b));
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{ t = {} }}", render_rat(&self.center));
        }
        let d = if self.center.is_zero() {
            "v(t)".to_string()
        } else {
            format!("v(t-{})", render_rat(&self.center))
        };
        write!(f, "{{ ")?;
        match (self.hi, self.lo) {
            (Some(h), Some(l)) => write!(f, "{h} < {d} < {l}")?,
            (Some(h), None) => write!(f, "{d} > {h}")?,
            (None, Some(l)) => write!(f, "{d} < {l}")?,
            (None, None) => write!(f, "{d} unbounded")?,
        }
        write!(
            f,
            ", t-{} in {}*P_{} }}",
            render_rat(&self.center),
            render_rat(&self.lambda),
            self.n
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_i64;

    fn cell(hi: Option<i64>, lo: Option<i64>, lambda: i64, n: u64, p: u64) -> Cell {
        Cell::new(Rat::zero(), lo, hi, rat_i64(lambda), n, p).unwrap()
    }

    #[test]
    fn membership_examples() {
        // {v(t) > 0, t in P_1} over Q_5
        let a = cell(Some(0), None, 1, 1, 5);
        assert!(!a.contains(&crate::rat::rat(1, 5)));
        assert!(a.contains(&rat_i64(5)));
        // the point cell
        let p = Cell::point(rat_i64(1), 5);
        assert!(p.contains(&rat_i64(1)));
        assert!(!p.contains(&rat_i64(2)));
    }

    #[test]
    fn emptiness_window_vs_coset() {
        // no integer k with 1 > k > 3
        let empty = cell(Some(3), Some(1), 1, 1, 5);
        assert!(empty.is_empty());
        // k = 2 is even inside (1, 3)
        let ok = cell(Some(1), Some(3), 1, 2, 5);
        assert!(!ok.is_empty());
        assert!(ok.contains(&rat_i64(25)));
        // k = 3 is odd inside (2, 4), lambda = 5 wants odd
        let ok2 = cell(Some(2), Some(4), 5, 2, 5);
        assert!(!ok2.is_empty());
        assert!(ok2.contains(&rat_i64(125)));
        // same window, lambda = 1 wants even: empty
        let bad = cell(Some(2), Some(4), 1, 2, 5);
        assert!(bad.is_empty());
    }

    #[test]
    fn measure_examples() {
        // mu(M) = 1/5
        let m = cell(Some(0), None, 1, 1, 5);
        assert_eq!(m.measure(), CellMeasure::Finite(crate::rat::rat(1, 5)));
        // squares with positive valuation: 1/60
        let sq = cell(Some(0), None, 1, 2, 5);
        assert_eq!(sq.measure(), CellMeasure::Finite(crate::rat::rat(1, 60)));
        // a point has measure zero
        assert_eq!(
            Cell::point(Rat::zero(), 5).measure(),
            CellMeasure::Finite(Rat::zero())
        );
        // unbounded |t| has infinite measure
        let all = cell(None, None, 1, 1, 5);
        assert_eq!(all.measure(), CellMeasure::Infinite);
        // R itself: hi = -1
        assert_eq!(
            Cell::unit_ball(5).measure(),
            CellMeasure::Finite(Rat::one())
        );
    }

    #[test]
    fn refinement_preserves_measure_and_partitions() {
        let a = cell(Some(0), None, 1, 1, 5);
        let parts = a.refine_by_coset(2).unwrap();
        assert_eq!(parts.len(), 4);
        let total: Rat = parts
            .iter()
            .map(|c| c.measure().finite().unwrap().clone())
            .sum();
        assert_eq!(CellMeasure::Finite(total), a.measure());
        // sample points land in exactly one part
        for k in 1..=4i64 {
            for u in 1..=24i64 {
                if u % 5 == 0 {
                    continue;
                }
                let t = rat_i64(u) * p_pow(5, k);
                assert!(a.contains(&t));
                let hits = parts.iter().filter(|c| c.contains(&t)).count();
                assert_eq!(hits, 1, "t = {t}");
            }
        }
        // identity refinements
        assert_eq!(a.refine_by_coset(1).unwrap(), vec![a.clone()]);
        let b = cell(Some(0), None, 1, 2, 5);
        assert_eq!(b.refine_by_coset(2).unwrap(), vec![b.clone()]);
    }

    #[test]
    fn point_cells_reject_bounds_and_refinement() {
        assert!(Cell::new(Rat::zero(), Some(1), None, Rat::zero(), 1, 5).is_err());
        assert!(Cell::point(Rat::zero(), 5).refine_by_coset(2).is_err());
    }

    #[test]
    fn bounded_window_measure_is_a_finite_sum() {
        // single shell v(t) = 1 over Q_3: measure 3^-1 * (2/3) = 2/9
        let shell = cell(Some(0), Some(2), 1, 1, 3);
        assert_eq!(shell.measure(), CellMeasure::Finite(crate::rat::rat(2, 9)));
    }
}
