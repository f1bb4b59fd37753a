//! Cell decomposition with preparation: partition Q_p into cells on which
//! every input polynomial has valuation affine in v(t - center), with
//! certified unit parts.
//!
//! Run with: cargo run -p padicell --example preparation

use num_traits::Zero;
use padicell::{
    prepare,
    rat::{rat_i64, render_rat, Rat},
    SplitPoly,
};

fn main() -> padicell::Result<()> {
    // f(t) = t (t - 1) over Q_3
    let f = SplitPoly::new(
        Rat::from_integer(1.into()),
        vec![(Rat::zero(), 1), (rat_i64(1), 1)],
    )?;
    println!("preparing f = {f} over Q_3\n");
    let prepared = prepare(std::slice::from_ref(&f), 3, 1)?;
    for pc in &prepared {
        println!("{}", pc.cell);
        for data in &pc.functions {
            println!(
                "    h = {}, a = {}, residual in {} (1 + 3^{} R)",
                render_rat(&data.shift),
                data.power,
                render_rat(&data.unit_class),
                data.cert_depth
            );
        }
    }

    // the valuation identity, spot-checked at a few points
    println!("\nv(f(t)) = v(h) + a (v(t-c) - v(lambda))/n, checked:");
    for t in [
        rat_i64(9),
        rat_i64(10),
        rat_i64(2),
        padicell::rat::rat(1, 3),
    ] {
        let pc = prepared.iter().find(|pc| pc.cell.contains(&t)).unwrap();
        println!(
            "  t = {:>4}: predicted {}, direct {}",
            render_rat(&t),
            pc.predicted_valuation(0, &t),
            f.valuation_at(&t, 3)
        );
    }

    // joint preparation shares one partition across several polynomials
    let g = SplitPoly::linear(rat_i64(-1));
    let joint = prepare(&[f, g], 3, 1)?;
    println!("\njoint preparation with g = (t+1): {} cells", joint.len());
    Ok(())
}
