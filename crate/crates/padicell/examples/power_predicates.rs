//! The power predicates P_n: membership, coset representatives of
//! K^x / P_n, and the finite indices.
//!
//! Run with: cargo run -p padicell --example power_predicates

use padicell::{coset_of, coset_reps, is_nth_power, power_index, rat::rat_i64};

fn main() {
    println!("17 a square in Q_2?  {}", is_nth_power(&rat_i64(17), 2, 2));
    println!("5 a square in Q_5?   {}", is_nth_power(&rat_i64(5), 2, 5));
    println!("9 a square in Q_5?   {}", is_nth_power(&rat_i64(9), 2, 5));

    for (p, n) in [(5u64, 2u64), (2, 2), (3, 3), (7, 2)] {
        let reps: Vec<String> = coset_reps(p, n)
            .iter()
            .map(|r| padicell::rat::render_rat(&r.representative))
            .collect();
        println!(
            "Q_{p}^x / P_{n}: index {} with representatives {{{}}}",
            power_index(p, n),
            reps.join(", ")
        );
    }

    // every nonzero element lands in exactly one coset
    for x in [rat_i64(50), rat_i64(-6), padicell::rat::rat(49, 5)] {
        let lam = coset_of(&x, 2, 5);
        println!(
            "{} lies in {} (mod squares of Q_5)",
            padicell::rat::render_rat(&x),
            lam
        );
    }
}
