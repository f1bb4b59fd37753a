//! Differential stress tests: randomized formulas decomposed into cells
//! must agree pointwise with direct evaluation, including power atoms
//! whose modulus shares a factor with p (the deep-certificate path).

use num_traits::{One, Zero};
use proptest::prelude::*;

use padicell::formula::QFFormula;
use padicell::oracle::{oracle_cover_check, oracle_is_nth_power, SampleGrid};
use padicell::poly::SplitPoly;
use padicell::prepare::{decompose, prepare};
use padicell::rat::{rat_i64, Rat};

fn poly_pool() -> Vec<SplitPoly> {
    vec![
        SplitPoly::var(),
        SplitPoly::linear(rat_i64(1)),
        SplitPoly::linear(rat_i64(-1)),
        SplitPoly::linear(rat_i64(3)),
        SplitPoly::constant(rat_i64(2)).unwrap(),
        SplitPoly::constant(Rat::one()).unwrap(),
        SplitPoly::new(Rat::one(), vec![(Rat::zero(), 1), (rat_i64(1), 1)]).unwrap(),
        SplitPoly::new(rat_i64(3), vec![(Rat::zero(), 2), (rat_i64(3), 1)]).unwrap(),
        SplitPoly::new(Rat::one(), vec![(rat_i64(1), 1), (rat_i64(-1), 2)]).unwrap(),
    ]
}

fn arb_poly() -> impl Strategy<Value = SplitPoly> {
    prop::sample::select(poly_pool())
}

fn arb_atom() -> impl Strategy<Value = QFFormula> {
    prop_oneof![
        (arb_poly(), arb_poly()).prop_map(|(f, g)| QFFormula::AbsLt(f, g)),
        (arb_poly(), arb_poly()).prop_map(|(f, g)| QFFormula::AbsLe(f, g)),
        (2u64..5, arb_poly()).prop_map(|(m, f)| QFFormula::Pow(m, f)),
        arb_poly().prop_map(QFFormula::EqZero),
    ]
}

fn arb_formula() -> impl Strategy<Value = QFFormula> {
    arb_atom().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| QFFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| QFFormula::or(a, b)),
            inner.prop_map(QFFormula::not),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_formulas_decompose_soundly(phi in arb_formula(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let cells = decompose(&phi, p).unwrap();
        let grid = SampleGrid::shallow(p, 3);
        let report = oracle_cover_check(&cells, &grid, |t| {
            phi.eval_at_with(t, p, &|x, m| oracle_is_nth_power(x, m, p))
        });
        prop_assert!(
            report.ok,
            "phi = {}, p = {}, violations = {:?}",
            phi,
            p,
            report.violations
        );
    }
}

#[test]
fn power_atoms_sharing_the_prime() {
    // P_m with p | m forces deep unit certificates and shell peeling
    let t = SplitPoly::var();
    let t_t1 = SplitPoly::new(Rat::one(), vec![(Rat::zero(), 1), (rat_i64(1), 1)]).unwrap();
    let cases: Vec<(QFFormula, u64)> = vec![
        (QFFormula::Pow(2, t.clone()), 2),
        (QFFormula::Pow(4, t.clone()), 2),
        (QFFormula::Pow(3, t.clone()), 3),
        (QFFormula::Pow(3, t_t1.clone()), 3),
        (QFFormula::Pow(4, t_t1.clone()), 2),
        (
            QFFormula::and(
                QFFormula::Pow(2, t_t1.clone()),
                QFFormula::not(QFFormula::Pow(4, t.clone())),
            ),
            2,
        ),
        (QFFormula::Pow(5, t_t1.clone()), 5),
    ];
    for (phi, p) in cases {
        let cells = decompose(&phi, p).unwrap();
        let grid = SampleGrid::shallow(p, if p == 2 { 6 } else { 4 });
        let report = oracle_cover_check(&cells, &grid, |t| {
            phi.eval_at_with(t, p, &|x, m| oracle_is_nth_power(x, m, p))
        });
        assert!(
            report.ok,
            "phi = {phi}, p = {p}, violations = {:?}",
            report.violations
        );
    }
}

#[test]
fn preparation_with_p_power_modulus() {
    // the valuation identity and the certificates must survive M = p
    for (p, m) in [(3u64, 3u64), (2, 4), (5, 5)] {
        let f = SplitPoly::new(Rat::one(), vec![(Rat::zero(), 1), (rat_i64(1), 1)]).unwrap();
        let prepared = prepare(&[f.clone()], p, m).unwrap();
        for pc in &prepared {
            if !pc.cell.is_point() {
                assert_eq!(pc.cell.n() % m, 0);
            }
        }
        let grid = SampleGrid::shallow(p, 4);
        for t in grid.points() {
            let hits: Vec<_> = prepared.iter().filter(|pc| pc.cell.contains(&t)).collect();
            assert_eq!(hits.len(), 1, "t = {t}, p = {p}, m = {m}");
            let pc = hits[0];
            assert_eq!(
                pc.predicted_valuation(0, &t),
                f.valuation_at(&t, p),
                "identity at t = {t}"
            );
            if !pc.cell.is_point() {
                // the certificate: residual in u (1 + p^e R)
                let w = pc.unit_residual(0, &t);
                let dev = &w / &pc.functions[0].unit_class - Rat::one();
                let ok = dev.is_zero()
                    || padicell::rat::rat_valuation(&dev, p).unwrap()
                        >= pc.functions[0].cert_depth as i64;
                assert!(ok, "certificate at t = {t} in {}", pc.cell);
            }
        }
    }
}

#[test]
fn rational_roots_and_centers() {
    // roots off the integer lattice exercise the cluster tree's metric
    let f = SplitPoly::new(
        rat_i64(2),
        vec![
            (padicell::rat::rat(1, 2), 1),
            (padicell::rat::rat(-1, 3), 2),
            (rat_i64(5), 1),
        ],
    )
    .unwrap();
    for p in [2u64, 3, 5] {
        let prepared = prepare(&[f.clone()], p, 1).unwrap();
        let grid = SampleGrid::shallow(p, 3);
        for t in grid.points() {
            let hits: Vec<_> = prepared.iter().filter(|pc| pc.cell.contains(&t)).collect();
            assert_eq!(hits.len(), 1, "t = {t}, p = {p}");
            assert_eq!(
                hits[0].predicted_valuation(0, &t),
                f.valuation_at(&t, p),
                "identity at t = {t}, p = {p}"
            );
        }
        // the roots themselves land in their point cells
        for root in f.roots() {
            let hits: Vec<_> = prepared
                .iter()
                .filter(|pc| pc.cell.contains(root))
                .collect();
            assert_eq!(hits.len(), 1);
            assert!(hits[0].cell.is_point());
        }
    }
}
