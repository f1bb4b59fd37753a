//! Decompose the solution set of a quantifier-free formula into cells, and
//! verify the result against brute-force evaluation on the sample grid.
//!
//! Run with: cargo run -p padicell --example decompose_formula

use padicell::cli::parse_formula;
use padicell::oracle::{oracle_cover_check, oracle_is_nth_power, SampleGrid};
use padicell::prepare::decompose;

fn main() -> padicell::Result<()> {
    let p = 5;
    for text in [
        "abs(t) < abs(1) & pow(2, t)",
        "!pow(2,t)",
        "abs(t-1) < abs(t)",
        "pow(2, t*(t-1)) | t = 0",
    ] {
        let phi = parse_formula(text)?;
        let cells = decompose(&phi, p)?;
        println!("{{t : {phi}}} over Q_{p}:");
        for c in &cells {
            println!("  {c}");
        }
        let report = oracle_cover_check(&cells, &SampleGrid::shallow(p, 3), |t| {
            phi.eval_at_with(t, p, &|x, m| oracle_is_nth_power(x, m, p))
        });
        println!(
            "  grid check: {} ({} points)\n",
            if report.ok { "ok" } else { "FAILED" },
            report.checked
        );
    }
    Ok(())
}
