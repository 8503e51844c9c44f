//! The three majorized-loss families side by side: the basic curve, the
//! sharpened curve, and the data-free curve, with their critical points
//! and the vacuous plateau.

use ridgecert::bounds::{j_basic, j_datafree, j_improved, BoundFamily};

fn main() -> ridgecert::Result<()> {
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let ceiling = if alpha < 1.0 {
            format!("{:.3}", 1.0 / (alpha * (1.0 - alpha)))
        } else {
            "inf".to_string()
        };
        println!("alpha = {alpha} (plateau {ceiling})");
        match BoundFamily::Basic.critical(alpha)? {
            t if t.is_finite() => println!("  basic curve saturates at t = {t:.3}"),
            _ => println!("  basic curve never saturates"),
        }
        match BoundFamily::Improved.critical(alpha)? {
            t if t.is_finite() => println!("  improved curve saturates at t = {t:.3}"),
            _ => println!("  improved curve never saturates"),
        }

        println!("  {:>6} {:>12} {:>12} {:>12}", "t", "basic", "improved", "data-free");
        for t in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            println!(
                "  {t:>6} {:>12.5} {:>12.5} {:>12.5}",
                j_basic(alpha, t)?,
                j_improved(alpha, t)?,
                j_datafree(alpha, t)?,
            );
        }
        println!();
    }

    // the small-t regime is where certificates are useful: there the
    // improved curve wins by the factor it was built for
    let t = 0.01;
    for alpha in [0.75, 0.9] {
        let ratio = j_improved(alpha, t)? / j_basic(alpha, t)?;
        println!("alpha={alpha}: j_improved/j_basic at t={t} is {ratio:.4}");
    }
    Ok(())
}
