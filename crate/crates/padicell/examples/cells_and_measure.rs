//! Cells: membership, emptiness, exact Haar measure, and refinement into
//! finer power cosets.
//!
//! Run with: cargo run -p padicell --example cells_and_measure

use num_traits::{One, Zero};
use padicell::{
    rat::{rat_i64, Rat},
    Cell,
};

fn main() -> padicell::Result<()> {
    // the maximal ideal M = {v(t) > 0}, minus the origin
    let m = Cell::maximal_ideal(5);
    println!("M as a cell: {m}");
    println!("  contains 5?   {}", m.contains(&rat_i64(5)));
    println!("  contains 1/5? {}", m.contains(&padicell::rat::rat(1, 5)));
    println!("  measure       {}", m.measure());

    // squares with positive valuation
    let sq = Cell::new(Rat::zero(), None, Some(0), Rat::one(), 2, 5)?;
    println!("{sq}: measure {}", sq.measure());

    // an empty window: no integer strictly between 1 and 3 reachable mod 2
    let empty = Cell::new(Rat::zero(), Some(4), Some(2), Rat::one(), 2, 5)?;
    println!("{empty}: empty = {}", empty.is_empty());

    // refinement splits into cosets of P_2, preserving total measure
    let whole = Cell::maximal_ideal(5);
    let parts = whole.refine_by_coset(2)?;
    println!("M refined by squares:");
    let mut total = Rat::zero();
    for c in &parts {
        let mu = c.measure();
        println!("  {c}: measure {mu}");
        total += mu.finite().unwrap().clone();
    }
    println!(
        "  total {}  (equals mu(M))",
        padicell::rat::render_rat(&total)
    );
    Ok(())
}
