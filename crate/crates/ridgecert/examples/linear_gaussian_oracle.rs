//! Exact losses on the linear-Gaussian benchmark against their
//! certificates. Everything on the left side of the table is closed
//! form, so this is the cleanest way to see how much slack the bounds
//! carry, and that the sharpened Hellinger bound stays within a factor
//! two of the naive tail in the deep-truncation limit.

use ridgecert::bounds::j_basic;
use ridgecert::lingauss::{
    exact_hellinger2, exact_kl, exponential_spectrum, LinGaussProblem,
};

fn main() -> ridgecert::Result<()> {
    let d = 16;
    let lam = exponential_spectrum(d, 0.7, 2.0)?;
    let p = LinGaussProblem::from_spectrum(&lam, None, 5)?;

    println!(
        "{:>3} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "r", "tail", "hell2", "1/4 J(tail)", "tail/4", "kl", "tail/2"
    );
    for r in 0..=d {
        let tail: f64 = lam[r..].iter().sum();
        let h2 = exact_hellinger2(&p, r)?;
        let bj = 0.25 * j_basic(0.5, tail)?;
        let kl = exact_kl(&p, r)?;
        println!(
            "{r:>3} {tail:>11.4e} {h2:>11.4e} {bj:>11.4e} {:>11.4e} {kl:>11.4e} {:>11.4e}",
            0.25 * tail,
            0.5 * tail
        );
    }

    // the improvement factor at the last truncation with mass left
    let tail: f64 = lam[d - 1..].iter().sum();
    let ratio = 0.25 * j_basic(0.5, tail)? / (0.25 * tail);
    println!("\nbound_j / bound_linear at r = d-1: {ratio:.4} (tends to 1/2)");
    Ok(())
}
