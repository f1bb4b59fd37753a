//! The algebra of constructible functions in one variable, exact
//! integration against the Haar measure, and local zeta functions as
//! rational functions in T = p^(-s).
//!
//! A function is a finite sum of pieces q * v(t - gamma)^d * p^(-e v(t-gamma)),
//! each living on a cell. On a prepared cell every v(f_j(t)) is affine in
//! v(t - gamma), so the generators v(h(t)) and |h(t)| land in this piece
//! basis, and sums and products stay inside it after refining to a common
//! cell family. Integration is then shell-by-shell geometric summation in
//! closed form.

use std::fmt;

use num_traits::{One, Zero};

use crate::cells::{Cell, CellMeasure};
use crate::error::{Error, Result};
use crate::formula::QFFormula;
use crate::hensel::coset_table;
use crate::poly::SplitPoly;
use crate::prepare::{cell_formula, prepare, prepare_on, select, PreparedCell};
use crate::rat::{p_pow, rat_pow, rat_valuation, render_rat, Rat};
use crate::ratfun::{PolyT, RationalFunctionT};

/// One piece: q * v(t-gamma)^d * p^(-e v(t-gamma)) on `cell`.
/// On a (0)-cell the convention is d = e = 0 and the piece is the constant q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub cell: Cell,
    pub coeff: Rat,
    pub vpow: u32,
    pub pexp: i64,
}

/// Finite sum of pieces; the distinct cells of the pieces are pairwise
/// disjoint (several pieces may share one cell).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructibleFunction {
    prime: u64,
    pieces: Vec<Piece>,
}

/// Result of integration: an exact rational, or an explicit divergence
/// marker (never a silent zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Integral {
    Value(Rat),
    NonIntegrable,
}

impl Integral {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            Integral::Value(x) => Some(x),
            Integral::NonIntegrable => None,
        }
    }
}

impl fmt::Display for Integral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integral::Value(x) => write!(f, "{}", render_rat(x)),
            Integral::NonIntegrable => write!(f, "NON_INTEGRABLE"),
        }
    }
}

/// Monomials q * v^d * p^(-e v) sharing one cell.
type Monomials = Vec<(Rat, u32, i64)>;
type CellGroup = (Cell, Monomials);

/// Which generator to read off a preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// t -> v(f(t)) as a Q-valued function.
    V,
    /// t -> |f(t)| = p^(-v(f(t))).
    Abs,
}

impl ConstructibleFunction {
    pub fn zero(prime: u64) -> Self {
        ConstructibleFunction {
            prime,
            pieces: Vec::new(),
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    fn from_pieces(prime: u64, pieces: Vec<Piece>) -> Self {
        let mut cf = ConstructibleFunction { prime, pieces };
        cf.normalize();
        cf
    }

    fn normalize(&mut self) {
        self.pieces
            .retain(|p| !p.coeff.is_zero() && !p.cell.is_empty());
        self.pieces.sort_by(|a, b| {
            a.cell
                .canonical_cmp(&b.cell)
                .then(a.vpow.cmp(&b.vpow))
                .then(a.pexp.cmp(&b.pexp))
        });
        // coalesce identical (cell, d, e)
        let mut out: Vec<Piece> = Vec::new();
        for p in self.pieces.drain(..) {
            match out.last_mut() {
                Some(q) if q.cell == p.cell && q.vpow == p.vpow && q.pexp == p.pexp => {
                    q.coeff += p.coeff;
                }
                _ => out.push(p),
            }
        }
        out.retain(|p| !p.coeff.is_zero());
        self.pieces = out;
    }

    /// Pointwise value at an exact rational (0 outside every piece).
    pub fn evaluate(&self, t: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for p in &self.pieces {
            if !p.cell.contains(t) {
                continue;
            }
            if p.cell.is_point() {
                acc += &p.coeff;
            } else {
                let k = rat_valuation(&(t - p.cell.center()), self.prime).unwrap();
                acc += &p.coeff
                    * rat_pow(&crate::rat::rat_i64(k), p.vpow as i64)
                    * p_pow(self.prime, -p.pexp * k);
            }
        }
        acc
    }

    /// Read v(f) or |f| off a prepared family. Mode V rejects any supplied
    /// (0)-cell where f vanishes (the valuation is undefined there); mode
    /// Abs drops such cells (|f| = 0). Callers restricting to a domain pass
    /// the prepared cells of that domain.
    pub fn from_prepared(
        f: &SplitPoly,
        cells: &[PreparedCell],
        mode: Mode,
        prime: u64,
    ) -> Result<Self> {
        let mut pieces = Vec::new();
        for pc in cells {
            let j = pc
                .functions
                .iter()
                .position(|pf| &pf.poly == f)
                .ok_or_else(|| Error::InvalidArgument(format!("cells do not prepare {f}")))?;
            let data = &pc.functions[j];
            if pc.cell.is_point() {
                if data.shift.is_zero() {
                    match mode {
                        Mode::V => {
                            return Err(Error::ValuationOfZero(format!(
                                "f vanishes on the (0)-cell t = {}",
                                render_rat(pc.cell.center())
                            )))
                        }
                        Mode::Abs => continue,
                    }
                }
                let v = rat_valuation(&data.shift, prime).unwrap();
                let q = match mode {
                    Mode::V => crate::rat::rat_i64(v),
                    Mode::Abs => p_pow(prime, -v),
                };
                pieces.push(Piece {
                    cell: pc.cell.clone(),
                    coeff: q,
                    vpow: 0,
                    pexp: 0,
                });
                continue;
            }
            let (alpha, beta) = pc.affine_in_k(j).expect("(1)-cell");
            match mode {
                Mode::V => {
                    pieces.push(Piece {
                        cell: pc.cell.clone(),
                        coeff: crate::rat::rat_i64(alpha),
                        vpow: 0,
                        pexp: 0,
                    });
                    pieces.push(Piece {
                        cell: pc.cell.clone(),
                        coeff: crate::rat::rat_i64(beta),
                        vpow: 1,
                        pexp: 0,
                    });
                }
                Mode::Abs => pieces.push(Piece {
                    cell: pc.cell.clone(),
                    coeff: p_pow(prime, -alpha),
                    vpow: 0,
                    pexp: beta,
                }),
            }
        }
        Ok(ConstructibleFunction::from_pieces(prime, pieces))
    }

    /// |f|^s for a signed integer s, read off a prepared family.
    pub fn abs_power(f: &SplitPoly, cells: &[PreparedCell], s: i64, prime: u64) -> Result<Self> {
        let base = Self::from_prepared(f, cells, Mode::Abs, prime)?;
        let pieces = base
            .pieces
            .into_iter()
            .map(|p| {
                debug_assert_eq!(p.vpow, 0);
                Piece {
                    cell: p.cell,
                    coeff: rat_pow(&p.coeff, s),
                    vpow: 0,
                    pexp: p.pexp * s,
                }
            })
            .collect();
        Ok(ConstructibleFunction::from_pieces(prime, pieces))
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &Rat) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                cell: p.cell.clone(),
                coeff: &p.coeff * c,
                vpow: p.vpow,
                pexp: p.pexp,
            })
            .collect();
        ConstructibleFunction::from_pieces(self.prime, pieces)
    }

    /// Pointwise sum on the common refinement of the two cell families.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let overlay = Overlay::build(self, other)?;
        let mut pieces = Vec::new();
        overlay.for_each_region(|region, in_f, in_g| {
            if let Some(i) = in_f {
                pieces.extend(overlay.transport(&overlay.cells_f[i], region));
            }
            if let Some(j) = in_g {
                pieces.extend(overlay.transport(&overlay.cells_g[j], region));
            }
        })?;
        Ok(ConstructibleFunction::from_pieces(self.prime, pieces))
    }

    /// Pointwise product on the common refinement.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(ConstructibleFunction::zero(self.prime));
        }
        let overlay = Overlay::build(self, other)?;
        let mut pieces = Vec::new();
        overlay.for_each_region(|region, in_f, in_g| {
            let (Some(i), Some(j)) = (in_f, in_g) else {
                return;
            };
            let a = overlay.transport(&overlay.cells_f[i], region);
            let b = overlay.transport(&overlay.cells_g[j], region);
            for pa in &a {
                for pb in &b {
                    pieces.push(Piece {
                        cell: pa.cell.clone(),
                        coeff: &pa.coeff * &pb.coeff,
                        vpow: pa.vpow + pb.vpow,
                        pexp: pa.pexp + pb.pexp,
                    });
                }
            }
        })?;
        Ok(ConstructibleFunction::from_pieces(self.prime, pieces))
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::FieldMismatch(format!(
                "constructible functions over Q_{} and Q_{}",
                self.prime, other.prime
            )));
        }
        Ok(())
    }

    /// The distinct cells of this function, each with its monomials.
    fn groups(&self) -> Vec<CellGroup> {
        let mut out: Vec<CellGroup> = Vec::new();
        for p in &self.pieces {
            match out.iter_mut().find(|(c, _)| *c == p.cell) {
                Some((_, ms)) => ms.push((p.coeff.clone(), p.vpow, p.pexp)),
                None => out.push((p.cell.clone(), vec![(p.coeff.clone(), p.vpow, p.pexp)])),
            }
        }
        out
    }

    /// Replace every (1)-cell piece by its coset refinement; the function
    /// is unchanged pointwise.
    pub fn refine_cells(&self, m: u64) -> Result<Self> {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            if p.cell.is_point() {
                pieces.push(p.clone());
                continue;
            }
            for sub in p.cell.refine_by_coset(m)? {
                pieces.push(Piece {
                    cell: sub,
                    coeff: p.coeff.clone(),
                    vpow: p.vpow,
                    pexp: p.pexp,
                });
            }
        }
        Ok(ConstructibleFunction::from_pieces(self.prime, pieces))
    }

    /// Exact integral against the Haar measure (mu(R) = 1). A divergent
    /// piece makes the whole integral NON_INTEGRABLE.
    pub fn integrate(&self) -> Result<Integral> {
        let mut total = Rat::zero();
        for p in &self.pieces {
            match integrate_piece(p, self.prime)? {
                Integral::Value(x) => total += x,
                Integral::NonIntegrable => return Ok(Integral::NonIntegrable),
            }
        }
        Ok(Integral::Value(total))
    }
}

/// Closed form of sum_{j >= 0} j^i y^j for 0 <= i <= 4 and |y| < 1.
fn polylog_kernel(i: u32, y: &Rat) -> Result<Rat> {
    let one = Rat::one();
    let base = &one - y;
    Ok(match i {
        0 => &one / &base,
        1 => y / (&base * &base),
        2 => (y + y * y) / rat_pow(&base, 3),
        3 => {
            let y2 = y * y;
            let y3 = &y2 * y;
            (y + Rat::from_integer(4.into()) * y2 + y3) / rat_pow(&base, 4)
        }
        4 => {
            let y2 = y * y;
            let y3 = &y2 * y;
            let y4 = &y3 * y;
            (y + Rat::from_integer(11.into()) * &y2 + Rat::from_integer(11.into()) * &y3 + y4)
                / rat_pow(&base, 5)
        }
        d => return Err(Error::UnsupportedPiecePower(d)),
    })
}

fn integrate_piece(p: &Piece, prime: u64) -> Result<Integral> {
    if p.cell.is_point() || p.cell.is_empty() {
        return Ok(Integral::Value(Rat::zero()));
    }
    let cell = &p.cell;
    let n = cell.n() as i64;
    let unit_cosets = coset_table(prime, cell.n()).unit_coset_count();
    let level = (Rat::one() - p_pow(prime, -1)) / Rat::from_integer(unit_cosets.into());
    // measure of shell k is level * p^(-k); the piece weighs it by k^d x^k
    // extra with x = p^(-e), so each term is level * k^d * p^(-(1+e)k)
    let vl = cell.lambda_valuation().unwrap();
    let r = vl.rem_euclid(n);
    let x_exp = 1 + p.pexp; // term exponent: p^(-x_exp * k)

    match (cell.hi(), cell.lo()) {
        (Some(hi), Some(lo)) => {
            // finite window: direct summation
            let mut k = hi + 1 + (r - (hi + 1)).rem_euclid(n);
            let mut sum = Rat::zero();
            while k < lo {
                sum += rat_pow(&crate::rat::rat_i64(k), p.vpow as i64) * p_pow(prime, -x_exp * k);
                k += n;
            }
            Ok(Integral::Value(&p.coeff * level * sum))
        }
        (Some(hi), None) => {
            // shells k0, k0+n, ... toward the center
            let k0 = hi + 1 + (r - (hi + 1)).rem_euclid(n);
            geometric_tail(p, prime, level, k0, n, x_exp)
        }
        (None, Some(lo)) => {
            // shells k1, k1-n, ... outward
            let k1 = lo - 1 - ((lo - 1) - r).rem_euclid(n);
            geometric_tail(p, prime, level, k1, -n, x_exp)
        }
        (None, None) => Ok(Integral::NonIntegrable),
    }
}

/// sum over j >= 0 of (k0 + step j)^d p^(-x_exp (k0 + step j)), times the
/// level constant and the piece coefficient.
fn geometric_tail(
    p: &Piece,
    prime: u64,
    level: Rat,
    k0: i64,
    step: i64,
    x_exp: i64,
) -> Result<Integral> {
    let y = p_pow(prime, -x_exp * step);
    if y >= Rat::one() {
        return Ok(Integral::NonIntegrable);
    }
    let d = p.vpow;
    if d > 4 {
        return Err(Error::UnsupportedPiecePower(d));
    }
    // (k0 + step j)^d expanded in powers of j
    let mut sum = Rat::zero();
    for i in 0..=d {
        let binom = (0..i as i64).fold(Rat::one(), |acc, l| {
            acc * Rat::new((d as i64 - l).into(), (l + 1).into())
        });
        let coeff = binom
            * rat_pow(&crate::rat::rat_i64(k0), (d - i) as i64)
            * rat_pow(&crate::rat::rat_i64(step), i as i64);
        sum += coeff * polylog_kernel(i, &y)?;
    }
    let head = p_pow(prime, -x_exp * k0);
    Ok(Integral::Value(&p.coeff * level * head * sum))
}

// ---------------------------------------------------------------------------
// Common refinement of two cell families, built once per algebra operation.

struct Overlay {
    prime: u64,
    polys: Vec<SplitPoly>,
    prepared: Vec<PreparedCell>,
    formulas_f: Vec<QFFormula>,
    formulas_g: Vec<QFFormula>,
    cells_f: Vec<CellGroup>,
    cells_g: Vec<CellGroup>,
}

impl Overlay {
    fn build(f: &ConstructibleFunction, g: &ConstructibleFunction) -> Result<Overlay> {
        let prime = f.prime;
        let cells_f = f.groups();
        let cells_g = g.groups();
        let formulas_f: Result<Vec<_>> = cells_f.iter().map(|(c, _)| cell_formula(c)).collect();
        let formulas_g: Result<Vec<_>> = cells_g.iter().map(|(c, _)| cell_formula(c)).collect();
        let formulas_f = formulas_f?;
        let formulas_g = formulas_g?;

        let mut polys: Vec<SplitPoly> = Vec::new();
        let mut modulus = 1u64;
        for (c, _) in cells_f.iter().chain(cells_g.iter()) {
            let center_poly = if c.center().is_zero() {
                SplitPoly::var()
            } else {
                SplitPoly::linear(c.center().clone())
            };
            if !polys.contains(&center_poly) {
                polys.push(center_poly);
            }
            modulus = num_integer::Integer::lcm(&modulus, &c.n());
        }
        for phi in formulas_f.iter().chain(formulas_g.iter()) {
            for q in phi.polynomials() {
                if !polys.contains(&q) {
                    polys.push(q);
                }
            }
        }
        let prepared = prepare(&polys, prime, modulus)?;
        Ok(Overlay {
            prime,
            polys,
            prepared,
            formulas_f,
            formulas_g,
            cells_f,
            cells_g,
        })
    }

    /// Visit the disjoint regions of the overlay: every intersection
    /// A_i and B_j, then the leftovers of each family.
    fn for_each_region<V>(&self, mut visit: V) -> Result<()>
    where
        V: FnMut(&PreparedCell, Option<usize>, Option<usize>),
    {
        for (i, phi) in self.formulas_f.iter().enumerate() {
            for (j, psi) in self.formulas_g.iter().enumerate() {
                let both = QFFormula::and(phi.clone(), psi.clone());
                for region in select(&self.prepared, &self.polys, &both, self.prime)? {
                    visit(&region, Some(i), Some(j));
                }
            }
            // f-only leftover
            let mut others = phi.clone();
            for psi in &self.formulas_g {
                others = QFFormula::and(others, QFFormula::not(psi.clone()));
            }
            for region in select(&self.prepared, &self.polys, &others, self.prime)? {
                visit(&region, Some(i), None);
            }
        }
        for (j, psi) in self.formulas_g.iter().enumerate() {
            let mut others = psi.clone();
            for phi in &self.formulas_f {
                others = QFFormula::and(others, QFFormula::not(phi.clone()));
            }
            for region in select(&self.prepared, &self.polys, &others, self.prime)? {
                visit(&region, None, Some(j));
            }
        }
        Ok(())
    }

    /// Rewrite the monomials of a source cell in terms of the region's own
    /// center: v(t - gamma_src) is affine in v(t - gamma_region) there.
    fn transport(&self, source: &CellGroup, region: &PreparedCell) -> Vec<Piece> {
        let (src_cell, monomials) = source;
        let center_poly = if src_cell.center().is_zero() {
            SplitPoly::var()
        } else {
            SplitPoly::linear(src_cell.center().clone())
        };
        let idx = self
            .polys
            .iter()
            .position(|q| *q == center_poly)
            .expect("center poly prepared");
        let mut out = Vec::new();
        if region.cell.is_point() {
            // v(t - gamma_src) at the single point of the region
            let v = rat_valuation(&(region.cell.center() - src_cell.center()), self.prime)
                .expect("region point is off the source center");
            for (q, d, e) in monomials {
                let value =
                    q * rat_pow(&crate::rat::rat_i64(v), *d as i64) * p_pow(self.prime, -e * v);
                out.push(Piece {
                    cell: region.cell.clone(),
                    coeff: value,
                    vpow: 0,
                    pexp: 0,
                });
            }
            return out;
        }
        let (alpha, beta) = region.affine_in_k(idx).expect("(1)-cell");
        for (q, d, e) in monomials {
            // v_src^d p^(-e v_src) with v_src = alpha + beta k
            let scale = q * p_pow(self.prime, -e * alpha);
            for i in 0..=*d {
                let binom = (0..i as i64).fold(Rat::one(), |acc, l| {
                    acc * Rat::new((*d as i64 - l).into(), (l + 1).into())
                });
                let coeff = &scale
                    * binom
                    * rat_pow(&crate::rat::rat_i64(alpha), (*d - i) as i64)
                    * rat_pow(&crate::rat::rat_i64(beta), i as i64);
                out.push(Piece {
                    cell: region.cell.clone(),
                    coeff,
                    vpow: i,
                    pexp: e * beta,
                });
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Local zeta functions.

/// Z(T) with Z(p^(-s)) = integral over the domain of |f(t)|^s |dt|, as an
/// exact reduced rational function in T.
pub fn igusa_zeta(f: &SplitPoly, p: u64, domain: &Cell) -> Result<RationalFunctionT> {
    if domain.is_point() {
        return Ok(RationalFunctionT::zero());
    }
    if domain.measure() == CellMeasure::Infinite {
        return Err(Error::InfiniteDomain);
    }
    let prepared = prepare_on(std::slice::from_ref(f), p, 1, domain)?;
    let mut z = RationalFunctionT::zero();
    for pc in &prepared {
        if pc.cell.is_point() {
            continue; // measure zero
        }
        let (alpha, beta) = pc.affine_in_k(0).expect("(1)-cell");
        let cell = &pc.cell;
        let n = cell.n() as i64;
        let unit_cosets = coset_table(p, cell.n()).unit_coset_count();
        let level = (Rat::one() - p_pow(p, -1)) / Rat::from_integer(unit_cosets.into());
        let vl = cell.lambda_valuation().unwrap();
        let r = vl.rem_euclid(n);
        let hi = cell.hi().expect("finite-measure domain bounds every cell");
        let k0 = hi + 1 + (r - (hi + 1)).rem_euclid(n);
        match cell.lo() {
            Some(lo) => {
                let mut k = k0;
                while k < lo {
                    // level * p^(-k) * T^(alpha + beta k)
                    let term = tpow(alpha + beta * k).scale(&(&level * p_pow(p, -k)));
                    z = z.add(&term);
                    k += n;
                }
            }
            None => {
                // geometric: head/(1 - p^(-n) T^(beta n))
                let head = tpow(alpha + beta * k0).scale(&(&level * p_pow(p, -k0)));
                let geom = if beta == 0 {
                    RationalFunctionT::constant((Rat::one() - p_pow(p, -n)).recip())
                } else {
                    let mut den_coeffs = vec![Rat::one()];
                    den_coeffs.resize((beta * n) as usize + 1, Rat::zero());
                    *den_coeffs.last_mut().unwrap() = -p_pow(p, -n);
                    RationalFunctionT::new(PolyT::one(), PolyT::new(den_coeffs))
                };
                z = z.add(&head.mul(&geom));
            }
        }
    }
    Ok(z)
}

/// T^k for a signed exponent.
fn tpow(k: i64) -> RationalFunctionT {
    if k >= 0 {
        RationalFunctionT::new(PolyT::monomial(Rat::one(), k as usize), PolyT::one())
    } else {
        RationalFunctionT::new(PolyT::one(), PolyT::monomial(Rat::one(), (-k) as usize))
    }
}
