//! Full pipeline on a synthetic target: estimate the diagnostic matrix
//! from an importance-sampled gradient batch, read off the principal
//! features, and certify how small the approximation error gets as
//! dimensions are added.

use ridgecert::bounds::{certify, BoundFamily};
use ridgecert::diagnostic::{eigh, estimate_h, select_features, tail_sum, GradientBatch};
use ridgecert::measures::{ReferenceMeasure, SobolevBudget, TargetModel};

fn main() -> ridgecert::Result<()> {
    // 6-dimensional reference, but the likelihood only really looks at
    // two directions: x0 + x1 and (weakly) x2.
    let d = 6;
    let target = TargetModel::new(
        d,
        |x| {
            let u = x[0] + x[1];
            -0.5 * u * u - 0.05 * x[2] * x[2]
        },
        |x| {
            let u = x[0] + x[1];
            let mut g = vec![0.0; 6];
            g[0] = -u;
            g[1] = -u;
            g[2] = -0.1 * x[2];
            g
        },
    );
    let mu = ReferenceMeasure::standard_gaussian(d);

    let batch = GradientBatch::from_target_samples(&target, &mu, 20_000, 42)?;
    let dm = estimate_h(&batch)?;
    println!("effective sample size: {:.0}", dm.n_eff);

    let spectrum = eigh(&dm)?;
    println!("spectrum:");
    for (k, lam) in spectrum.eigenvalues.iter().enumerate() {
        println!("  lambda_{k} = {lam:.6}");
    }

    // the reference is standard Gaussian, so both subspace Sobolev
    // constants are 1
    let budget = SobolevBudget::standard_gaussian();
    println!("\ncertified D_a(pi || pi_opt) upper bounds:");
    println!("{:>3} {:>12} {:>14} {:>14}", "r", "tail", "alpha=1/2", "alpha=1");
    for r in 0..=d {
        let tail = tail_sum(&spectrum, r)?;
        let half = certify(0.5, BoundFamily::Improved, &budget, &spectrum, r)?;
        let one = certify(1.0, BoundFamily::Improved, &budget, &spectrum, r)?;
        println!("{r:>3} {tail:>12.4e} {:>14.4e} {:>14.4e}", half.bound, one.bound);
    }

    // pick the smallest r whose KL certificate clears a target accuracy
    let tol = 1e-2;
    let r_star = (0..=d)
        .find(|&r| {
            certify(1.0, BoundFamily::Improved, &budget, &spectrum, r)
                .map(|c| c.bound <= tol)
                .unwrap_or(false)
        })
        .unwrap_or(d);
    let features = select_features(&spectrum, r_star)?;
    println!("\nsmallest certified rank for KL <= {tol}: r = {r_star}");
    println!("feature directions (rows):");
    for i in 0..features.r() {
        let col = features.u_r().col(i);
        let row: Vec<String> = col.iter().map(|v| format!("{v:+.3}")).collect();
        println!("  [{}]", row.join(", "));
    }
    Ok(())
}
