//! Numerical verification of the β-Sobolev inequalities behind every
//! certificate, on the 1-d standard Gaussian with Gauss-Hermite
//! quadrature. β = 1 is the log-Sobolev inequality, β = 2 the Poincaré
//! inequality; the exponential test function shows where log-Sobolev
//! is tight.

use ridgecert::bounds::sobolev_check_1d;
use ridgecert::quadrature::GaussHermite;

fn main() -> ridgecert::Result<()> {
    let cases: [(&str, fn(f64) -> f64, fn(f64) -> f64); 3] = [
        ("exp(x/2)", |x| (0.5 * x).exp(), |x| 0.5 * (0.5 * x).exp()),
        ("1 + x^2", |x| 1.0 + x * x, |x| 2.0 * x),
        ("cosh(x/2)", |x| (0.5 * x).cosh(), |x| 0.5 * (0.5 * x).sinh()),
    ];

    for beta in [1.0, 1.5, 2.0] {
        println!("beta = {beta}");
        for (name, f, df) in &cases {
            let (lhs, rhs) = sobolev_check_1d(beta, f, Some(df), 200)?;
            println!(
                "  f = {name:<10} entropy = {lhs:.8}  dirichlet/2 = {rhs:.8}  slack = {:+.2e}",
                rhs - lhs
            );
        }
        println!();
    }

    // the same check with finite-difference gradients costs accuracy but
    // no code
    let (lhs, rhs) = sobolev_check_1d(1.0, &|x: f64| (0.5 * x).exp(), None, 200)?;
    println!("log-Sobolev with FD gradient: {lhs:.10} <= {rhs:.10} (tight up to FD error)");

    // quadrature sanity: E[x^2] = 1 under the standard Gaussian
    let q = GaussHermite::new(64)?;
    let m2 = q.expect_standard_normal(|x| x * x)?;
    println!("Gauss-Hermite(64): E[x^2] = {m2:.12}");
    Ok(())
}
