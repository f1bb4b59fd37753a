//! Arithmetic in the supported valued fields: valuation, residue, angular
//! component, restricted division, and the precision contract for
//! approximate values.
//!
//! Run with: cargo run -p padicell --example valued_fields

use padicell::{
    rat::{rat, rat_i64},
    FieldContext, FieldElement, LaurentSeries, PAdicNumber, ResidueField,
};

fn main() -> padicell::Result<()> {
    // exact rationals embedded in Q_2
    let q2 = FieldContext::PAdic(2);
    let twelve = FieldElement::exact(q2, rat_i64(12))?;
    println!("v_2(12)        = {}", twelve.valuation()?);
    println!("ac_2(12)       = {}", twelve.ac()?);

    let q5 = FieldContext::PAdic(5);
    let x = FieldElement::exact(q5, rat(5, 3))?;
    println!("v_5(5/3)       = {}", x.valuation()?);
    println!(
        "residue_5(12)  = {}",
        FieldElement::exact(q5, rat_i64(12))?.residue()?
    );

    // restricted division is total: x/y when v(x) >= v(y), otherwise 0
    let q3 = FieldContext::PAdic(3);
    let nine = FieldElement::exact(q3, rat_i64(9))?;
    let three = FieldElement::exact(q3, rat_i64(3))?;
    let one = FieldElement::exact(q3, rat_i64(1))?;
    println!("D(9, 3) in Q_3 = {}", nine.restricted_div(&three)?);
    println!("D(1, 3) in Q_3 = {}", one.restricted_div(&three)?);

    // approximate p-adic numbers carry explicit precision
    let a = PAdicNumber::from_rational(5, &rat_i64(2), 6)?;
    let b = PAdicNumber::from_rational(5, &rat_i64(3), 6)?;
    let sum = a.add(&b)?;
    println!("2 + 3 in Q_5   = {sum}   (one digit lost to carry cancellation)");

    // Laurent series over F_5: 1/(1+t) to three known coefficients
    let f5t = FieldContext::LaurentFp(5);
    let s = LaurentSeries::from_terms(ResidueField::Fp(5), &[(0, rat_i64(1)), (1, rat_i64(1))], 3)?;
    let inv = FieldElement::laurent(f5t, s)?.inv()?;
    println!("1/(1+t) in F_5((t)) = {inv}");

    // a rational constant can be zero in F_p((t)) without being zero in Q
    let five_thirds = FieldElement::exact(f5t, rat(5, 3))?;
    println!(
        "5/3 in F_5((t)): zero = {}, valuation = {}",
        five_thirds.is_zero(),
        five_thirds.valuation()?
    );
    Ok(())
}
