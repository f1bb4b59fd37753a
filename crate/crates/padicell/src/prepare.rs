//! Cell decomposition with preparation, for split polynomials in one
//! variable over Q_p, and decomposition of quantifier-free formulas into
//! cells.
//!
//! The construction is the classical swiss cheese. The roots of all input
//! polynomials form an ultrametric cluster tree; around each cluster the
//! space splits into
//!
//! - annuli between consecutive critical radii, where every root sits
//!   either strictly inside or strictly outside, so each |f_j| is monomial
//!   in |t - gamma| with exponent the total inside multiplicity;
//! - single boundary shells at the critical radii, split into unit classes
//!   deep enough to pin every residual unit (classes meeting another
//!   child's disc are dropped there — those points belong to that child);
//! - the children, recursively, and one (0)-cell per root.
//!
//! On every cell the data (h_j, a_j) satisfies
//! v(f_j(t)) = v(h_j) + a_j (v(t-gamma) - v(lambda))/n, and the residual
//! W_j(t) = f_j(t) * (h_j ((t-gamma)/lambda)^(a_j/n))^(-1) stays in the
//! certified coset u_j (1 + p^e R). Annulus shells too close to a critical
//! radius for the requested certificate depth are peeled off as unit-split
//! single shells, so the certificates hold with uniform depth.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::cells::Cell;
use crate::error::{Error, Result};
use crate::formula::QFFormula;
use crate::hensel::{is_nth_power, pinning_depth, pinning_modulus};
use crate::poly::SplitPoly;
use crate::rat::{p_pow, rat_pow, rat_valuation, Rat};
use crate::valuation::Valuation;

/// Per-function preparation data on one cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedFunction {
    /// The prepared input function.
    pub poly: SplitPoly,
    /// h_j: v(f_j(t)) = v(h_j) + a_j (v(t-gamma) - v(lambda))/n on the cell.
    /// On a (0)-cell this is f_j(gamma), possibly zero.
    pub shift: Rat,
    /// a_j, always a multiple of the cell's n.
    pub power: i64,
    /// u_j of the unit certificate u_j (1 + p^e R).
    pub unit_class: Rat,
    /// e of the unit certificate.
    pub cert_depth: u32,
}

/// A cell together with the preparation of every input function on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedCell {
    pub cell: Cell,
    /// Indexed like the `fs` argument of `prepare`.
    pub functions: Vec<PreparedFunction>,
}

impl PreparedCell {
    /// The valuation the preparation data predicts for f_j(t); t must lie
    /// in the cell.
    pub fn predicted_valuation(&self, j: usize, t: &Rat) -> Valuation {
        let f = &self.functions[j];
        if self.cell.is_point() {
            return match rat_valuation(&f.shift, self.cell.prime()) {
                None => Valuation::Infinity,
                Some(v) => Valuation::Finite(v),
            };
        }
        let k = rat_valuation(&(t - self.cell.center()), self.cell.prime())
            .expect("t is not the center of a (1)-cell");
        let vl = self.cell.lambda_valuation().expect("lambda nonzero");
        let n = self.cell.n() as i64;
        debug_assert_eq!((k - vl).rem_euclid(n), 0, "t not in the coset");
        let vh = rat_valuation(&f.shift, self.cell.prime()).expect("shift nonzero on a (1)-cell");
        Valuation::Finite(vh + f.power * ((k - vl) / n))
    }

    /// The residual W_j(t) = f_j(t) (h_j ((t-gamma)/lambda)^(a_j/n))^(-1),
    /// which the certificate places in u_j (1 + p^e R).
    pub fn unit_residual(&self, j: usize, t: &Rat) -> Rat {
        assert!(!self.cell.is_point(), "residuals live on (1)-cells");
        let data = &self.functions[j];
        let n = self.cell.n() as i64;
        assert_eq!(data.power.rem_euclid(n), 0);
        let s = data.power / n;
        let z = (t - self.cell.center()) / self.cell.lambda();
        data.poly.eval(t) / (&data.shift * rat_pow(&z, s))
    }

    /// Truth of the atom "f_j(t) in P_m" on this cell; constant by
    /// construction. Requires m to divide the cell's coset modulus, which
    /// prepare guarantees for every divisor of its coset_modulus argument.
    pub fn pow_atom(&self, j: usize, m: u64) -> bool {
        let f = &self.functions[j];
        if self.cell.is_point() {
            return !f.shift.is_zero() && is_nth_power(&f.shift, m, self.cell.prime());
        }
        assert!(
            self.cell.n().is_multiple_of(m),
            "power atom P_{m} is not decidable on a cell with n = {}",
            self.cell.n()
        );
        let value = &f.shift * &f.unit_class;
        is_nth_power(&value, m, self.cell.prime())
    }

    /// v(f_j(t)) as an affine function alpha + beta * v(t - gamma) on a
    /// (1)-cell; None on (0)-cells.
    pub fn affine_in_k(&self, j: usize) -> Option<(i64, i64)> {
        if self.cell.is_point() {
            return None;
        }
        let f = &self.functions[j];
        let n = self.cell.n() as i64;
        debug_assert_eq!(f.power.rem_euclid(n), 0);
        let beta = f.power / n;
        let vh = rat_valuation(&f.shift, self.cell.prime()).expect("shift nonzero");
        let vl = self.cell.lambda_valuation().expect("lambda nonzero");
        Some((vh - beta * vl, beta))
    }
}

/// Ultrametric cluster of roots. `diam` is the minimal pairwise valuation
/// (None for a singleton); children are the maximal sub-clusters at
/// threshold diam + 1.
struct Cluster {
    roots: Vec<Rat>,
    diam: Option<i64>,
    children: Vec<Cluster>,
}

fn build_cluster(mut roots: Vec<Rat>, p: u64) -> Cluster {
    roots.sort();
    if roots.len() == 1 {
        return Cluster {
            roots,
            diam: None,
            children: Vec::new(),
        };
    }
    let mut diam = i64::MAX;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let v = rat_valuation(&(&roots[i] - &roots[j]), p).expect("distinct roots");
            diam = diam.min(v);
        }
    }
    let mut groups: Vec<Vec<Rat>> = Vec::new();
    'outer: for r in roots.iter() {
        for g in groups.iter_mut() {
            let v = rat_valuation(&(r - &g[0]), p);
            if v.map(|v| v > diam) == Some(true) {
                g.push(r.clone());
                continue 'outer;
            }
        }
        groups.push(vec![r.clone()]);
    }
    let children = groups.into_iter().map(|g| build_cluster(g, p)).collect();
    Cluster {
        roots,
        diam: Some(diam),
        children,
    }
}

struct Builder<'a> {
    fs: &'a [SplitPoly],
    p: u64,
    /// Caller's coset modulus M; every (1)-cell gets n divisible by it.
    modulus: u64,
    /// Certificate depth 2 v_p(M) + 1 needed to decide P_m for all m | M.
    e_req: u32,
    /// Shell cells use this coset modulus: power conditions at it pin the
    /// unit of t - gamma modulo p^enum_depth.
    n_shell: u64,
    enum_depth: u32,
    out: Vec<PreparedCell>,
}

impl<'a> Builder<'a> {
    fn walk(&mut self, cluster: &Cluster, outer_level: Option<i64>, all_roots: &[Rat]) {
        let center = cluster.roots[0].clone();
        let in_set: BTreeSet<&Rat> = cluster.roots.iter().collect();
        let out_roots: Vec<&Rat> = all_roots.iter().filter(|r| !in_set.contains(*r)).collect();

        // slope = total multiplicity inside the cluster; shift collects the
        // unit and the frozen outside factors
        let slopes: Vec<i64> = self
            .fs
            .iter()
            .map(|f| {
                cluster
                    .roots
                    .iter()
                    .map(|r| f.multiplicity_at(r) as i64)
                    .sum()
            })
            .collect();
        let shifts: Vec<Rat> = self
            .fs
            .iter()
            .map(|f| {
                let mut h = f.unit().clone();
                for r in &out_roots {
                    let m = f.multiplicity_at(r);
                    if m > 0 {
                        h *= rat_pow(&(&center - *r), m as i64);
                    }
                }
                h
            })
            .collect();

        let d_out_max = out_roots
            .iter()
            .map(|r| rat_valuation(&(&center - *r), self.p).expect("distinct"))
            .max();
        let d_in_min = cluster.diam;

        let hi = outer_level.map(|l| l - 1);
        let lo = cluster.diam;
        self.emit_annulus(&center, hi, lo, &slopes, &shifts, d_out_max, d_in_min);

        match cluster.diam {
            None => {
                // leaf: the root itself
                let functions = self
                    .fs
                    .iter()
                    .map(|f| PreparedFunction {
                        poly: f.clone(),
                        shift: f.eval(&center),
                        power: 0,
                        unit_class: Rat::one(),
                        cert_depth: self.e_req,
                    })
                    .collect();
                self.out.push(PreparedCell {
                    cell: Cell::point(center, self.p),
                    functions,
                });
            }
            Some(d) => {
                // boundary shell at the splitting radius: drop the unit
                // classes that fall into another child's disc
                let own = cluster
                    .children
                    .iter()
                    .position(|c| c.roots.contains(&center))
                    .expect("center lies in one child");
                let mut excluded = Vec::new();
                for (i, child) in cluster.children.iter().enumerate() {
                    if i == own {
                        continue;
                    }
                    let diff = &child.roots[0] - &center;
                    debug_assert_eq!(rat_valuation(&diff, self.p), Some(d));
                    let unit = crate::rat::unit_part(&diff, self.p);
                    excluded.push(
                        num_traits::ToPrimitive::to_u64(&crate::rat::rat_mod_pk(&unit, self.p, 1))
                            .unwrap(),
                    );
                }
                self.emit_unit_split_shell(&center, d, &excluded);
                for child in &cluster.children {
                    self.walk(child, Some(d + 1), all_roots);
                }
            }
        }
    }

    /// Annulus around `center`: window hi < k < lo, every inside root
    /// strictly deeper, every outside root strictly shallower. Shells too
    /// close to a critical radius are peeled off as unit-split shells; the
    /// remaining core keeps certificates at depth e_req and is refined to
    /// the caller's coset modulus.
    #[allow(clippy::too_many_arguments)]
    fn emit_annulus(
        &mut self,
        center: &Rat,
        hi: Option<i64>,
        lo: Option<i64>,
        slopes: &[i64],
        shifts: &[Rat],
        d_out_max: Option<i64>,
        d_in_min: Option<i64>,
    ) {
        if let (Some(h), Some(l)) = (hi, lo) {
            if h + 1 >= l {
                return;
            }
        }
        let e = self.e_req as i64;
        // the deep-certificate core
        let core_hi = match d_out_max {
            Some(d) => Some(
                hi.expect("outside roots imply an outer bound")
                    .max(d + e - 1),
            ),
            None => hi,
        };
        let core_lo = match d_in_min {
            Some(d) => Some(
                lo.expect("inside roots imply an inner bound")
                    .min(d - e + 1),
            ),
            None => lo,
        };

        // peeled shells below the core
        if let (Some(h), Some(ch)) = (hi, core_hi) {
            if ch > h {
                let stop = match lo {
                    Some(l) => ch.min(l - 1),
                    None => ch,
                };
                for k in (h + 1)..=stop {
                    self.emit_unit_split_shell(center, k, &[]);
                }
            }
        }
        // peeled shells above the core
        if let (Some(l), Some(cl)) = (lo, core_lo) {
            if cl < l {
                let start = match hi {
                    Some(h) => (h + 1).max(cl),
                    None => cl,
                };
                // skip shells already peeled below the core
                let start = match (core_hi, hi) {
                    (Some(ch), Some(_)) => start.max(ch + 1),
                    _ => start,
                };
                for k in start..l {
                    self.emit_unit_split_shell(center, k, &[]);
                }
            }
        }

        // the core itself
        if let (Some(h), Some(l)) = (core_hi, core_lo) {
            if h + 1 >= l {
                return;
            }
        }
        let base = Cell::new(center.clone(), core_lo, core_hi, Rat::one(), 1, self.p)
            .expect("annulus core is a valid cell");
        for sub in base
            .refine_by_coset(self.modulus)
            .expect("core is a (1)-cell")
        {
            let lam = sub.lambda().clone();
            let n = sub.n() as i64;
            let functions = self
                .fs
                .iter()
                .zip(slopes.iter().zip(shifts))
                .map(|(f, (s, h))| PreparedFunction {
                    poly: f.clone(),
                    shift: h * rat_pow(&lam, *s),
                    power: s * n,
                    unit_class: Rat::one(),
                    cert_depth: self.e_req,
                })
                .collect();
            self.out.push(PreparedCell {
                cell: sub,
                functions,
            });
        }
    }

    /// One shell v(t - center) = k, split into unit classes modulo
    /// p^enum_depth; classes listed in `excluded` (by residue mod p) fall
    /// into a sibling's disc and are skipped.
    fn emit_unit_split_shell(&mut self, center: &Rat, k: i64, excluded: &[u64]) {
        let pe = self.p.pow(self.enum_depth);
        for u0 in 1..pe {
            if u0 % self.p == 0 || excluded.contains(&(u0 % self.p)) {
                continue;
            }
            let lambda = Rat::from_integer(u0.into()) * p_pow(self.p, k);
            let cell = Cell::new(
                center.clone(),
                Some(k + 1),
                Some(k - 1),
                lambda.clone(),
                self.n_shell,
                self.p,
            )
            .expect("shell cell is valid");
            let probe = center + &lambda;
            let functions = self
                .fs
                .iter()
                .map(|f| PreparedFunction {
                    poly: f.clone(),
                    shift: f.eval(&probe),
                    power: 0,
                    unit_class: Rat::one(),
                    cert_depth: self.enum_depth.max(self.e_req),
                })
                .collect();
            self.out.push(PreparedCell { cell, functions });
        }
    }
}

/// Partition K = Q_p into prepared cells for the given split polynomials.
/// Every (1)-cell's coset modulus is a multiple of `coset_modulus`, and the
/// certificates decide P_m for every m dividing it.
pub fn prepare(fs: &[SplitPoly], p: u64, coset_modulus: u64) -> Result<Vec<PreparedCell>> {
    if fs.is_empty() {
        return Err(Error::InvalidArgument(
            "prepare needs at least one polynomial".into(),
        ));
    }
    if coset_modulus == 0 {
        return Err(Error::InvalidArgument("coset modulus must be >= 1".into()));
    }
    let vpm = {
        let mut v = 0u32;
        let mut m = coset_modulus;
        while m.is_multiple_of(p) {
            m /= p;
            v += 1;
        }
        v
    };
    let e_req = 2 * vpm + 1;
    let n_shell = num_integer::Integer::lcm(&coset_modulus, &pinning_modulus(p, e_req));
    let enum_depth = pinning_depth(p, n_shell).unwrap_or(1);

    let mut roots: Vec<Rat> = Vec::new();
    for f in fs {
        for r in f.roots() {
            if !roots.contains(r) {
                roots.push(r.clone());
            }
        }
    }

    let mut builder = Builder {
        fs,
        p,
        modulus: coset_modulus,
        e_req,
        n_shell,
        enum_depth,
        out: Vec::new(),
    };

    if roots.is_empty() {
        // constants only: the origin and the punctured line around it
        let center = Rat::zero();
        let slopes = vec![0i64; fs.len()];
        let shifts: Vec<Rat> = fs.iter().map(|f| f.unit().clone()).collect();
        builder.emit_annulus(&center, None, None, &slopes, &shifts, None, None);
        let functions = fs
            .iter()
            .map(|f| PreparedFunction {
                poly: f.clone(),
                shift: f.eval(&center),
                power: 0,
                unit_class: Rat::one(),
                cert_depth: e_req,
            })
            .collect();
        builder.out.push(PreparedCell {
            cell: Cell::point(center, p),
            functions,
        });
    } else {
        let all = {
            let mut r = roots.clone();
            r.sort();
            r
        };
        let tree = build_cluster(roots, p);
        builder.walk(&tree, None, &all);
    }

    let mut out = builder.out;
    out.sort_by(|a, b| a.cell.canonical_cmp(&b.cell));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Formula decomposition: select the region where a formula holds from a
// prepared partition, cell by cell.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct JRange {
    lo: Option<i64>,
    hi: Option<i64>,
}

/// Truth of phi on the shell with index j of a prepared (1)-cell.
fn truth_at_shell(phi: &QFFormula, pc: &PreparedCell, fs: &[SplitPoly], j: i64, p: u64) -> bool {
    let vof = |f: &SplitPoly| -> (i64, i64) {
        let idx = fs.iter().position(|q| q == f).expect("prepared function");
        let data = &pc.functions[idx];
        let vh = rat_valuation(&data.shift, p).expect("nonzero on (1)-cells");
        (vh, data.power)
    };
    match phi {
        QFFormula::AbsLt(f, g) => {
            let (vf, af) = vof(f);
            let (vg, ag) = vof(g);
            vf + af * j > vg + ag * j
        }
        QFFormula::AbsLe(f, g) => {
            let (vf, af) = vof(f);
            let (vg, ag) = vof(g);
            vf + af * j >= vg + ag * j
        }
        QFFormula::Pow(m, f) => {
            let idx = fs.iter().position(|q| q == f).expect("prepared function");
            pc.pow_atom(idx, *m)
        }
        QFFormula::EqZero(_) => false,
        QFFormula::And(a, b) => truth_at_shell(a, pc, fs, j, p) && truth_at_shell(b, pc, fs, j, p),
        QFFormula::Or(a, b) => truth_at_shell(a, pc, fs, j, p) || truth_at_shell(b, pc, fs, j, p),
        QFFormula::Not(a) => !truth_at_shell(a, pc, fs, j, p),
    }
}

/// Shell indices where some norm comparison can change truth.
fn collect_breakpoints(
    phi: &QFFormula,
    pc: &PreparedCell,
    fs: &[SplitPoly],
    p: u64,
    out: &mut BTreeSet<i64>,
) {
    match phi {
        QFFormula::AbsLt(f, g) | QFFormula::AbsLe(f, g) => {
            let idx_f = fs.iter().position(|q| q == f).expect("prepared");
            let idx_g = fs.iter().position(|q| q == g).expect("prepared");
            let vf = rat_valuation(&pc.functions[idx_f].shift, p).expect("nonzero");
            let vg = rat_valuation(&pc.functions[idx_g].shift, p).expect("nonzero");
            let c0 = vf - vg;
            let c1 = pc.functions[idx_f].power - pc.functions[idx_g].power;
            if c1 != 0 {
                // both thresholds (>= 0 and >= 1): flip at ceil((t - c0)/c1)
                for thresh in [0i64, 1] {
                    let b = if c1 > 0 {
                        num_integer::Integer::div_ceil(&(thresh - c0), &c1)
                    } else {
                        num_integer::Integer::div_floor(&(thresh - c0), &c1) + 1
                    };
                    out.insert(b);
                }
            }
        }
        QFFormula::Pow(..) | QFFormula::EqZero(_) => {}
        QFFormula::And(a, b) | QFFormula::Or(a, b) => {
            collect_breakpoints(a, pc, fs, p, out);
            collect_breakpoints(b, pc, fs, p, out);
        }
        QFFormula::Not(a) => collect_breakpoints(a, pc, fs, p, out),
    }
}

fn shell_range(cell: &Cell) -> JRange {
    let vl = cell.lambda_valuation().expect("(1)-cell");
    let n = cell.n() as i64;
    let lo = cell
        .hi()
        .map(|h| num_integer::Integer::div_ceil(&(h + 1 - vl), &n));
    let hi = cell
        .lo()
        .map(|l| num_integer::Integer::div_floor(&(l - 1 - vl), &n));
    JRange { lo, hi }
}

/// Restrict a prepared partition to the set where phi holds. Function data
/// survives unchanged; only windows narrow. Runs of consecutive true shells
/// become one cell with bounds snapped one coset period outside the run.
pub fn select(
    prepared: &[PreparedCell],
    fs: &[SplitPoly],
    phi: &QFFormula,
    p: u64,
) -> Result<Vec<PreparedCell>> {
    let mut out = Vec::new();
    for pc in prepared {
        if pc.cell.is_point() {
            if phi.eval_at(pc.cell.center(), p) {
                out.push(pc.clone());
            }
            continue;
        }
        let range = shell_range(&pc.cell);
        if let (Some(a), Some(b)) = (range.lo, range.hi) {
            if a > b {
                continue;
            }
        }
        let mut bps = BTreeSet::new();
        collect_breakpoints(phi, pc, fs, p, &mut bps);
        // segment starts: the window start plus every breakpoint inside
        let mut starts: Vec<Option<i64>> = vec![range.lo];
        for b in bps {
            let above = range.lo.map(|a| b > a).unwrap_or(true);
            let below = range.hi.map(|h| b <= h).unwrap_or(true);
            if above && below {
                starts.push(Some(b));
            }
        }
        // evaluate each segment, coalescing consecutive true ones
        let mut run_start: Option<Option<i64>> = None;
        let mut last_end: Option<i64> = None;
        let segment_ends = starts
            .iter()
            .skip(1)
            .map(|s| Some(s.unwrap() - 1))
            .chain(std::iter::once(range.hi));
        for (seg_start, seg_end) in starts.clone().into_iter().zip(segment_ends) {
            let witness = seg_start.or(seg_end).unwrap_or(0);
            let truth = truth_at_shell(phi, pc, fs, witness, p);
            if truth {
                if run_start.is_none() {
                    run_start = Some(seg_start);
                }
                last_end = seg_end;
            }
            if !truth || seg_end == range.hi {
                if let Some(rs) = run_start.take() {
                    let end = if truth { seg_end } else { last_end };
                    out.push(narrowed(pc, rs, end));
                }
            }
        }
    }
    out.sort_by(|a, b| a.cell.canonical_cmp(&b.cell));
    Ok(out)
}

/// The sub-cell of pc covering shell indices [from, to] (None = unbounded),
/// with bounds snapped one coset period outside the kept run.
fn narrowed(pc: &PreparedCell, from: Option<i64>, to: Option<i64>) -> PreparedCell {
    let cell = &pc.cell;
    let vl = cell.lambda_valuation().expect("(1)-cell");
    let n = cell.n() as i64;
    let range = shell_range(cell);
    let hi = if from == range.lo {
        cell.hi()
    } else {
        Some(vl + n * from.expect("narrowed start") - n)
    };
    let lo = if to == range.hi {
        cell.lo()
    } else {
        Some(vl + n * to.expect("narrowed end") + n)
    };
    PreparedCell {
        cell: Cell::new(
            cell.center().clone(),
            lo,
            hi,
            cell.lambda().clone(),
            cell.n(),
            cell.prime(),
        )
        .expect("narrowed cell is valid"),
        functions: pc.functions.clone(),
    }
}

/// The set where phi holds, as pairwise disjoint cells in canonical order.
pub fn decompose(phi: &QFFormula, p: u64) -> Result<Vec<Cell>> {
    phi.validate()?;
    let fs = phi.polynomials();
    let prepared = prepare(&fs, p, phi.coset_modulus())?;
    let selected = select(&prepared, &fs, phi, p)?;
    let mut cells: Vec<Cell> = selected.into_iter().map(|pc| pc.cell).collect();
    crate::cells::sort_cells(&mut cells);
    Ok(cells)
}

/// A formula whose solution set is exactly the given cell.
pub fn cell_formula(cell: &Cell) -> Result<QFFormula> {
    let center_poly = if cell.center().is_zero() {
        SplitPoly::var()
    } else {
        SplitPoly::linear(cell.center().clone())
    };
    if cell.is_point() {
        return Ok(QFFormula::EqZero(center_poly));
    }
    let scaled = center_poly.scale(&cell.lambda().recip())?;
    let mut phi = QFFormula::Pow(cell.n(), scaled);
    if let Some(h) = cell.hi() {
        let bound = SplitPoly::constant(p_pow(cell.prime(), h))?;
        phi = QFFormula::and(QFFormula::AbsLt(center_poly.clone(), bound), phi);
    }
    if let Some(l) = cell.lo() {
        let bound = SplitPoly::constant(p_pow(cell.prime(), l))?;
        phi = QFFormula::and(QFFormula::AbsLt(bound, center_poly.clone()), phi);
    }
    Ok(phi)
}

/// Prepared cells covering exactly `domain`, preparing `fs` on each.
/// The returned functions are indexed like `fs` (the domain's own defining
/// polynomials are carried internally and stripped from the result).
pub fn prepare_on(
    fs: &[SplitPoly],
    p: u64,
    coset_modulus: u64,
    domain: &Cell,
) -> Result<Vec<PreparedCell>> {
    let phi = cell_formula(domain)?;
    let mut all = fs.to_vec();
    for q in phi.polynomials() {
        if !all.contains(&q) {
            all.push(q);
        }
    }
    let modulus = num_integer::Integer::lcm(&coset_modulus, &phi.coset_modulus());
    let prepared = prepare(&all, p, modulus)?;
    let selected = select(&prepared, &all, &phi, p)?;
    Ok(selected
        .into_iter()
        .map(|mut pc| {
            pc.functions.truncate(fs.len());
            pc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_cover_check, oracle_partition_check, SampleGrid};
    use crate::rat::rat_i64;

    fn grid(p: u64) -> SampleGrid {
        SampleGrid::shallow(p, 3)
    }

    fn check_partition(fs: &[SplitPoly], p: u64, modulus: u64) -> Vec<PreparedCell> {
        let prepared = prepare(fs, p, modulus).unwrap();
        let cells: Vec<Cell> = prepared.iter().map(|pc| pc.cell.clone()).collect();
        let report = oracle_partition_check(&cells, &grid(p));
        assert!(
            report.ok,
            "partition violated for {:?}: {:?}",
            fs.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            report.violations
        );
        // valuation identity at every grid point
        for t in grid(p).points() {
            for pc in &prepared {
                if !pc.cell.contains(&t) {
                    continue;
                }
                for (j, f) in fs.iter().enumerate() {
                    assert_eq!(
                        pc.predicted_valuation(j, &t),
                        f.valuation_at(&t, p),
                        "identity broken for f{} at t = {} in {}",
                        j,
                        t,
                        pc.cell
                    );
                }
            }
        }
        prepared
    }

    #[test]
    fn single_root_gives_two_cells() {
        let prepared = check_partition(&[SplitPoly::var()], 5, 1);
        assert_eq!(prepared.len(), 2);
        let one_cells: Vec<_> = prepared.iter().filter(|pc| !pc.cell.is_point()).collect();
        assert_eq!(one_cells.len(), 1);
        let pc = one_cells[0];
        assert_eq!(pc.cell.n(), 1);
        assert_eq!(pc.cell.hi(), None);
        assert_eq!(pc.cell.lo(), None);
        assert_eq!(pc.functions[0].shift, Rat::one());
        assert_eq!(pc.functions[0].power, 1);
    }

    #[test]
    fn two_roots_follow_the_worked_example() {
        // t(t-1) over Q_3: {0}, {1}, the two punctured discs, the far
        // annulus, and one boundary-shell cell with lambda = 2, n = 2
        let f = SplitPoly::new(rat_i64(1), vec![(rat_i64(0), 1), (rat_i64(1), 1)]).unwrap();
        let prepared = check_partition(std::slice::from_ref(&f), 3, 1);
        assert_eq!(prepared.len(), 6);

        let shell: Vec<_> = prepared
            .iter()
            .filter(|pc| pc.cell.hi() == Some(-1) && pc.cell.lo() == Some(1))
            .collect();
        assert_eq!(shell.len(), 1);
        assert_eq!(shell[0].cell.n(), 2);
        assert_eq!(shell[0].cell.lambda(), &rat_i64(2));
        assert_eq!(shell[0].functions[0].shift, rat_i64(2));
        assert_eq!(shell[0].functions[0].power, 0);

        let far: Vec<_> = prepared
            .iter()
            .filter(|pc| pc.cell.hi().is_none() && !pc.cell.is_point())
            .collect();
        assert_eq!(far.len(), 1);
        assert_eq!(far[0].functions[0].power, 2);
        assert_eq!(far[0].cell.lo(), Some(0));
    }

    #[test]
    fn joint_preparation_shares_cells() {
        let fs = vec![SplitPoly::var(), SplitPoly::linear(rat_i64(1))];
        let prepared = check_partition(&fs, 5, 1);
        // on the far annulus both functions have slope 1
        let far = prepared
            .iter()
            .find(|pc| pc.cell.hi().is_none() && !pc.cell.is_point())
            .unwrap();
        assert_eq!(far.functions[0].power, far.functions[1].power);
    }

    #[test]
    fn duplicated_input_gets_identical_data() {
        let f = SplitPoly::new(rat_i64(1), vec![(rat_i64(0), 2), (rat_i64(3), 1)]).unwrap();
        let prepared = check_partition(&[f.clone(), f], 3, 1);
        for pc in prepared {
            assert_eq!(pc.functions[0], pc.functions[1]);
        }
    }

    #[test]
    fn coset_modulus_refines_every_cell() {
        let prepared = check_partition(&[SplitPoly::var()], 5, 2);
        for pc in &prepared {
            if !pc.cell.is_point() {
                assert_eq!(pc.cell.n() % 2, 0);
            }
        }
        // K^x splits into the four square classes
        assert_eq!(prepared.len(), 5);
    }

    #[test]
    fn unit_certificates_hold_on_samples() {
        let f = SplitPoly::new(rat_i64(1), vec![(rat_i64(0), 1), (rat_i64(1), 1)]).unwrap();
        let prepared = prepare(std::slice::from_ref(&f), 3, 2).unwrap();
        for t in grid(3).points() {
            for pc in &prepared {
                if pc.cell.is_point() || !pc.cell.contains(&t) {
                    continue;
                }
                let w = pc.unit_residual(0, &t);
                let dev = &w / &pc.functions[0].unit_class - Rat::one();
                let ok = dev.is_zero()
                    || rat_valuation(&dev, 3).unwrap() >= pc.functions[0].cert_depth as i64;
                assert!(ok, "certificate broken at t = {t} in {}", pc.cell);
            }
        }
    }

    #[test]
    fn decompose_matches_direct_evaluation() {
        let t = SplitPoly::var();
        let one = SplitPoly::constant(Rat::one()).unwrap();
        let cases = vec![
            QFFormula::and(
                QFFormula::AbsLt(t.clone(), one.clone()),
                QFFormula::Pow(2, t.clone()),
            ),
            QFFormula::not(QFFormula::Pow(2, t.clone())),
            QFFormula::AbsLt(SplitPoly::linear(rat_i64(1)), t.clone()),
        ];
        for phi in cases {
            let cells = decompose(&phi, 5).unwrap();
            let report = oracle_cover_check(&cells, &grid(5), |x| phi.eval_at(x, 5));
            assert!(report.ok, "phi = {phi}: {:?}", report.violations);
        }
    }

    #[test]
    fn decompose_pinned_examples() {
        // |t| < 1 and t a square: one cell
        let t = SplitPoly::var();
        let one = SplitPoly::constant(Rat::one()).unwrap();
        let phi = QFFormula::and(
            QFFormula::AbsLt(t.clone(), one.clone()),
            QFFormula::Pow(2, t.clone()),
        );
        let cells = decompose(&phi, 5).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].hi(), Some(0));
        assert_eq!(cells[0].lo(), None);
        assert_eq!(cells[0].lambda(), &Rat::one());
        assert_eq!(cells[0].n(), 2);

        // non-squares: {0} plus three unbounded coset cells
        let neg = QFFormula::not(QFFormula::Pow(2, t.clone()));
        let cells = decompose(&neg, 5).unwrap();
        assert_eq!(cells.len(), 4);
        assert!(cells[0].is_point());
        let lambdas: Vec<_> = cells[1..].iter().map(|c| c.lambda().clone()).collect();
        assert_eq!(lambdas, vec![rat_i64(2), rat_i64(5), rat_i64(10)]);

        // |t - 1| < |t|: the disc around 1
        let phi3 = QFFormula::AbsLt(SplitPoly::linear(rat_i64(1)), t.clone());
        let cells = decompose(&phi3, 5).unwrap();
        assert_eq!(cells.len(), 2);
        assert!(cells[0].is_point());
        assert_eq!(cells[0].center(), &rat_i64(1));
        assert_eq!(cells[1].center(), &rat_i64(1));
        assert_eq!(cells[1].hi(), Some(0));
        assert_eq!(cells[1].n(), 1);
    }

    #[test]
    fn prepare_on_restricts_to_a_domain() {
        let fs = vec![SplitPoly::var()];
        let r = Cell::unit_ball(5);
        let on_r = prepare_on(&fs, 5, 1, &r).unwrap();
        let cells: Vec<Cell> = on_r.iter().map(|pc| pc.cell.clone()).collect();
        let report = oracle_cover_check(&cells, &grid(5), |t| {
            !t.is_zero() && rat_valuation(t, 5).unwrap() >= 0
        });
        assert!(report.ok, "{:?}", report.violations);
        for pc in &on_r {
            assert_eq!(pc.functions.len(), 1);
        }
    }

    #[test]
    fn constants_prepare_without_roots() {
        let c = SplitPoly::constant(rat_i64(6)).unwrap();
        let prepared = check_partition(&[c], 3, 1);
        assert_eq!(prepared.len(), 2);
    }
}
