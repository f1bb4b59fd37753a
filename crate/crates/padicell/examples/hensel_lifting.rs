//! Lifting approximate polynomial roots with Hensel's lemma, including a
//! case that needs the general condition v(f(a)) > 2 v(f'(a)).
//!
//! Run with: cargo run -p padicell --example hensel_lifting

use padicell::{
    hensel_lift,
    rat::{rat_i64, rat_valuation},
    Poly,
};

fn main() -> padicell::Result<()> {
    // sqrt(6) in Q_5, starting from 1
    let f = Poly::new(vec![rat_i64(-6), rat_i64(0), rat_i64(1)], 5);
    let root = hensel_lift(&f, &rat_i64(1), 8)?;
    println!("sqrt(6) in Q_5  = {root}");
    let rep = root.representative();
    println!(
        "  check: v_5(f(r)) = {}",
        rat_valuation(&f.eval(&rep), 5).unwrap()
    );

    // cube root of 2 in Q_5
    let f = Poly::new(vec![rat_i64(-2), rat_i64(0), rat_i64(0), rat_i64(1)], 5);
    let root = hensel_lift(&f, &rat_i64(3), 8)?;
    println!("2^(1/3) in Q_5  = {root}");

    // sqrt(17) in Q_2: f'(1) = 2 is not a unit, but v(f(1)) = 4 > 2 v(f'(1))
    let f = Poly::new(vec![rat_i64(-17), rat_i64(0), rat_i64(1)], 2);
    let root = hensel_lift(&f, &rat_i64(1), 10)?;
    println!("sqrt(17) in Q_2 = {root}");

    // the precondition is checked: x^2 - 2 has no root near 1 in Q_5
    let f = Poly::new(vec![rat_i64(-2), rat_i64(0), rat_i64(1)], 5);
    match hensel_lift(&f, &rat_i64(1), 4) {
        Err(e) => println!("x^2 - 2 from a = 1 over Q_5: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
