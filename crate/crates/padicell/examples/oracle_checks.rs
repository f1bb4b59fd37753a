//! The brute-force oracles: enumeration of power classes, class-counting
//! measures, truncated integral sums, and partition checking — the ground
//! truth behind every symbolic result in the crate.
//!
//! Run with: cargo run -p padicell --example oracle_checks

use num_traits::{One, Zero};
use padicell::oracle::{
    oracle_measure, oracle_nth_power_classes, oracle_partition_check, SampleGrid,
};
use padicell::rat::{render_rat, Rat};
use padicell::{prepare, Cell, CellMeasure, SplitPoly};

fn main() -> padicell::Result<()> {
    // odd squares are 1 mod 8
    let classes = oracle_nth_power_classes(2, 2, 3);
    println!("square unit classes mod 2^3: {classes:?}");
    let classes = oracle_nth_power_classes(5, 2, 2);
    println!("square unit classes mod 5^2: {} of 20", classes.len());

    // class-counting measure vs the closed form
    let sq = Cell::new(Rat::zero(), None, Some(0), Rat::one(), 2, 5)?;
    let counted = oracle_measure(&sq, 6);
    println!(
        "mu{{v(t) > 0, t square}} over Q_5: counted {} vs closed form {}",
        render_rat(&counted),
        sq.measure()
    );
    assert_eq!(CellMeasure::Finite(counted), sq.measure());

    // a preparation really is a partition
    let f = SplitPoly::new(
        Rat::one(),
        vec![(Rat::zero(), 1), (padicell::rat::rat_i64(1), 1)],
    )?;
    let prepared = prepare(&[f], 3, 1)?;
    let cells: Vec<Cell> = prepared.iter().map(|pc| pc.cell.clone()).collect();
    let report = oracle_partition_check(&cells, &SampleGrid::default_for(3));
    println!(
        "partition check for the preparation of t(t-1) over Q_3: {} ({} grid points)",
        if report.ok { "ok" } else { "FAILED" },
        report.checked
    );
    Ok(())
}
