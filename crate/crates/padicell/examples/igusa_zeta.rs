//! Local zeta functions Z(T) = integral of |f(t)|^s over R, with T = p^(-s),
//! as exact rational functions, cross-checked against a brute-force class
//! sum and against exact integration at integer s.
//!
//! Run with: cargo run -p padicell --example igusa_zeta

use num_traits::Signed;
use padicell::constructible::igusa_zeta;
use padicell::oracle::oracle_integrate;
use padicell::rat::{p_pow, rat_i64, render_rat, Rat};
use padicell::valuation::Valuation;
use padicell::{Cell, SplitPoly};

fn main() -> padicell::Result<()> {
    let cases: Vec<(SplitPoly, u64)> = vec![
        (SplitPoly::var(), 5),
        (
            SplitPoly::new(
                Rat::from_integer(1.into()),
                vec![(Rat::from_integer(0.into()), 2)],
            )?,
            5,
        ),
        (
            SplitPoly::new(
                Rat::from_integer(1.into()),
                vec![(Rat::from_integer(0.into()), 1), (rat_i64(1), 1)],
            )?,
            3,
        ),
    ];
    for (f, p) in cases {
        let domain = Cell::unit_ball(p);
        let z = igusa_zeta(&f, p, &domain)?;
        println!("f = {f} over Q_{p}:  Z(T) = {}", z.render());
        for s in 1..=2i64 {
            let exact = z.evaluate(&p_pow(p, -s));
            let brute = oracle_integrate(
                |x| match f.valuation_at(x, p) {
                    Valuation::Infinity => Rat::from_integer(0.into()),
                    Valuation::Finite(v) => p_pow(p, -v * s),
                },
                &domain,
                8,
            );
            println!(
                "    s = {s}: Z(p^-s) = {}, class sum at depth 8 differs by {}",
                render_rat(&exact),
                render_rat(&(&exact - &brute).abs())
            );
        }
    }
    Ok(())
}
