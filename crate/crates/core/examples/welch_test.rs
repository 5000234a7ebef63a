//! Welch's t-test on two small samples, and the t distribution behind it.

use ecoroute::metrics::{student_t_cdf, welch_t};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = [2.1, 2.5, 2.8, 3.0, 3.2];
    let b = [3.9, 4.1, 4.5, 4.8, 5.0];
    let r = welch_t(&a, &b)?;
    println!(
        "t = {:.6}, df = {:.4}, two-sided p = {:.3e}",
        r.t, r.df, r.p
    );
    let swapped = welch_t(&b, &a)?;
    println!("swapped: t = {:.6}, p = {:.3e}", swapped.t, swapped.p);
    for t in [-2.0, 0.0, 1.0, 2.776] {
        println!("P(T <= {t:>6}) with 4 df = {:.6}", student_t_cdf(t, 4.0));
    }
    Ok(())
}
