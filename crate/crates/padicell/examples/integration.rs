//! Constructible functions and exact integration: building v(f) and |f|
//! from a preparation, pointwise algebra, closed-form integrals, and the
//! explicit divergence marker.
//!
//! Run with: cargo run -p padicell --example integration

use padicell::{
    prepare_on,
    rat::{rat_i64, render_rat},
    Cell, ConstructibleFunction, Integral, Mode, SplitPoly,
};

fn main() -> padicell::Result<()> {
    let p = 5;
    let t = SplitPoly::var();
    let r = Cell::unit_ball(p);

    // prepare t on the unit ball; drop the measure-zero point at 0
    let cells: Vec<_> = prepare_on(std::slice::from_ref(&t), p, 1, &r)?
        .into_iter()
        .filter(|pc| !pc.cell.is_point())
        .collect();

    let v = ConstructibleFunction::from_prepared(&t, &cells, Mode::V, p)?;
    println!("integral of v(t) over R   = {}", v.integrate()?); // 1/(p-1)

    let abs = ConstructibleFunction::from_prepared(&t, &cells, Mode::Abs, p)?;
    println!("integral of |t| over R    = {}", abs.integrate()?);

    let abs2 = ConstructibleFunction::abs_power(&t, &cells, 2, p)?;
    println!("integral of |t|^2 over R  = {}", abs2.integrate()?);

    // pointwise sums and products stay constructible
    let sum = v.add(&abs)?;
    println!(
        "integral of v(t) + |t|    = {}  (linearity: {} + {})",
        sum.integrate()?,
        v.integrate()?,
        abs.integrate()?
    );
    let prod = v.mul(&abs)?;
    println!("integral of v(t) |t|      = {}", prod.integrate()?);
    println!(
        "  value at t = 25: {}",
        render_rat(&prod.evaluate(&rat_i64(25)))
    );

    // divergence is explicit, never a silent zero
    let m = Cell::maximal_ideal(p);
    let m_cells = prepare_on(std::slice::from_ref(&t), p, 1, &m)?;
    let inv = ConstructibleFunction::abs_power(&t, &m_cells, -1, p)?;
    match inv.integrate()? {
        Integral::NonIntegrable => println!("integral of |t|^-1 over M = NON_INTEGRABLE"),
        Integral::Value(_) => unreachable!(),
    }
    Ok(())
}
