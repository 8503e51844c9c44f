//! Certified upper bounds on the divergence loss of feature truncation.
//!
//! Each bound family is a scalar function J(t) majorizing the attainable
//! D_α loss in terms of t = C·Σ_{k>r} λ_k, the Sobolev-weighted eigenvalue
//! tail of the diagnostic matrix. The families share a common shape: below
//! a critical argument they are smooth and increasing, at the critical
//! argument they clamp onto the vacuous ceiling 1/(α(1−α)) (the largest
//! value D_α can take for α < 1, so a saturated certificate states
//! nothing). The Pinsker family converts the α=1 certificate into a total
//! variation bound and has no ceiling.
//!
//! Also here: the 1-D β-Sobolev inequality checker used to validate the
//! functional-inequality machinery behind the certificates.

use crate::diagnostic::{tail_sum, Spectrum};
use crate::divergence::{phi_alpha, ALPHA_SNAP};
use crate::error::{Result, RidgeError};
use crate::measures::SobolevBudget;
use crate::profile::snap_alpha;
use crate::quadrature::GaussHermite;

/// The certificate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFamily {
    /// The basic majorant, extended to all α ∈ (0,1].
    Basic,
    /// The sharper majorant; coincides with Basic at α = ½.
    Improved,
    /// The data-free variant: Improved for α ∈ [⅔,1], linear t/(2α) below.
    DataFree,
    /// Total variation via Pinsker: √(t/2) on the α=1 certificate.
    PinskerTV,
}

/// Coefficient and exponent of the power-form branch (1/(α(α−1)))·
/// ((1−c·t)₊^e − 1). Returns None for the branches that are not of this
/// form (α = 1, the data-free linear branch, Pinsker).
fn power_branch(family: BoundFamily, alpha: f64) -> Option<(f64, f64)> {
    match family {
        BoundFamily::Basic => {
            if alpha > 0.5 {
                Some(((1.0 - alpha) / 2.0, alpha))
            } else {
                Some(((1.0 - alpha) / (4.0 * alpha), alpha))
            }
        }
        BoundFamily::Improved => {
            let e = alpha / (2.0 * (1.0 - alpha));
            if alpha > 0.5 {
                Some(((1.0 - alpha) * (1.0 - alpha), e))
            } else {
                Some(((1.0 - alpha) * (1.0 - alpha) / (2.0 * alpha), e))
            }
        }
        BoundFamily::DataFree => {
            if alpha >= 2.0 / 3.0 {
                power_branch(BoundFamily::Improved, alpha)
            } else {
                None
            }
        }
        BoundFamily::PinskerTV => None,
    }
}

impl BoundFamily {
    /// (J(t), saturated). Saturation means the (·)₊ clamp engaged, i.e.
    /// t reached the critical argument and the value sits on the ceiling.
    pub fn evaluate(&self, alpha: f64, t: f64) -> Result<(f64, bool)> {
        if !(t >= 0.0) {
            return Err(RidgeError::Domain(format!("bound argument must be >= 0, got {t}")));
        }
        if *self == BoundFamily::PinskerTV {
            return Ok(((0.5 * t).sqrt(), false));
        }
        let a = snap_alpha(alpha);
        if !(a > 0.0 && a <= 1.0) {
            return Err(RidgeError::Domain(format!(
                "alpha must lie in (0, 1] for {self:?}, got {alpha}"
            )));
        }
        if a == 1.0 {
            return Ok((0.5 * t, false));
        }
        match power_branch(*self, a) {
            None => Ok((t / (2.0 * a), false)), // data-free linear branch
            Some((c, e)) => {
                let ceiling = 1.0 / (a * (1.0 - a));
                if c * t >= 1.0 {
                    return Ok((ceiling, true));
                }
                // (1/(a(a-1)))((1-ct)^e - 1) = -expm1(e ln1p(-ct))/(a(1-a))
                let v = -(e * (-c * t).ln_1p()).exp_m1() / (a * (1.0 - a));
                Ok((v.min(ceiling), false))
            }
        }
    }

    /// The critical argument where the family saturates; infinite for
    /// branches that never do.
    pub fn critical(&self, alpha: f64) -> Result<f64> {
        if *self == BoundFamily::PinskerTV {
            return Ok(f64::INFINITY);
        }
        let a = snap_alpha(alpha);
        if !(a > 0.0 && a <= 1.0) {
            return Err(RidgeError::Domain(format!(
                "alpha must lie in (0, 1] for {self:?}, got {alpha}"
            )));
        }
        if a == 1.0 {
            return Ok(f64::INFINITY);
        }
        match power_branch(*self, a) {
            None => Ok(f64::INFINITY),
            Some((c, _)) => Ok(1.0 / c),
        }
    }
}

/// J_α(t), the basic majorant.
pub fn j_basic(alpha: f64, t: f64) -> Result<f64> {
    BoundFamily::Basic.evaluate(alpha, t).map(|(v, _)| v)
}

/// J♭_α(t), the improved majorant.
pub fn j_improved(alpha: f64, t: f64) -> Result<f64> {
    BoundFamily::Improved.evaluate(alpha, t).map(|(v, _)| v)
}

/// J^DF_α(t), the data-free majorant. The linear branch for α < ⅔ never
/// saturates and may legitimately exceed the α-divergence ceiling.
pub fn j_datafree(alpha: f64, t: f64) -> Result<f64> {
    BoundFamily::DataFree.evaluate(alpha, t).map(|(v, _)| v)
}

/// A certified bound on the divergence loss of keeping r features.
#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    pub alpha: f64,
    pub family: BoundFamily,
    /// The Sobolev constant used, C^sub_{min(1/α,2)} (or C₁ for Pinsker).
    pub c_sub: f64,
    /// Eigenvalue tail Σ_{k>r} λ_k.
    pub tail: f64,
    pub bound: f64,
    pub saturated: bool,
}

impl Certificate {
    /// Re-derives the bound from the stored fields; matches `bound`
    /// to 1e-14 by construction.
    pub fn recompute_bound(&self) -> Result<f64> {
        self.family
            .evaluate(self.alpha, self.c_sub * self.tail)
            .map(|(v, _)| v)
    }

    /// A certificate that states nothing: saturated on the divergence
    /// ceiling, or a total-variation bound at or above one.
    pub fn is_vacuous(&self) -> bool {
        match self.family {
            BoundFamily::PinskerTV => self.bound >= 1.0,
            _ => self.saturated,
        }
    }
}

/// Certifies the divergence loss of truncating to the top-r features:
/// bound = J_family(C^sub_{min(1/α,2)} · Σ_{k>r} λ_k).
pub fn certify(
    alpha: f64,
    family: BoundFamily,
    budget: &SobolevBudget,
    spec: &Spectrum,
    r: usize,
) -> Result<Certificate> {
    if family == BoundFamily::PinskerTV {
        return Err(RidgeError::Domain(
            "use certify_tv for the total-variation family".into(),
        ));
    }
    let a = snap_alpha(alpha);
    if !(a > 0.0 && a <= 1.0) {
        return Err(RidgeError::Domain(format!(
            "certification needs alpha in (0, 1], got {alpha}"
        )));
    }
    let beta = (1.0 / a).min(2.0);
    let c_sub = budget.c_beta_sub(beta)?;
    let tail = tail_sum(spec, r)?;
    let (bound, saturated) = family.evaluate(a, c_sub * tail)?;
    Ok(Certificate { alpha: a, family, c_sub, tail, bound, saturated })
}

/// Total-variation certificate via Pinsker on the α=1 bound:
/// TV ≤ √(½ C₁ Σ_{k>r} λ_k). Values above one are returned as-is and
/// flagged vacuous by [`Certificate::is_vacuous`].
pub fn certify_tv(budget: &SobolevBudget, spec: &Spectrum, r: usize) -> Result<Certificate> {
    let c_sub = budget.c1_sub;
    let tail = tail_sum(spec, r)?;
    let (bound, saturated) = BoundFamily::PinskerTV.evaluate(1.0, c_sub * tail)?;
    Ok(Certificate {
        alpha: 1.0,
        family: BoundFamily::PinskerTV,
        c_sub,
        tail,
        bound,
        saturated,
    })
}

/// Verifies the β-Sobolev inequality for the standard Gaussian (C = 1)
/// on one test function: returns (LHS, RHS) where
/// LHS = E[φ_β(f)] − φ_β(E[f]) and RHS = ½ E[f^β |(ln f)'|²], both by
/// Gauss-Hermite quadrature of the given order. A missing derivative is
/// replaced by central finite differences.
pub fn sobolev_check_1d(
    beta: f64,
    f: &dyn Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    quadrature_n: usize,
) -> Result<(f64, f64)> {
    if !(1.0 - ALPHA_SNAP..=2.0 + ALPHA_SNAP).contains(&beta) {
        return Err(RidgeError::Domain(format!(
            "beta must lie in [1, 2], got {beta}"
        )));
    }
    let q = GaussHermite::new(quadrature_n)?;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;

    let fd = |x: f64| {
        let h = 1e-5 * (1.0 + x.abs());
        (f(x + h) - f(x - h)) / (2.0 * h)
    };

    let mut e_phi = 0.0;
    let mut e_f = 0.0;
    let mut e_energy = 0.0;
    for (&node, &w) in q.nodes().iter().zip(q.weights()) {
        let x = sqrt2 * node;
        let fx = f(x);
        if !(fx > 0.0) || !fx.is_finite() {
            return Err(RidgeError::Domain(format!(
                "test function must be positive and finite, got f({x}) = {fx}"
            )));
        }
        let dx = match df {
            Some(g) => g(x),
            None => fd(x),
        };
        let wt = w * inv_sqrt_pi;
        e_phi += wt * phi_alpha(beta, fx)?;
        e_f += wt * fx;
        e_energy += wt * fx.powf(beta - 2.0) * dx * dx;
    }
    let lhs = e_phi - phi_alpha(beta, e_f)?;
    let rhs = 0.5 * e_energy;
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(RidgeError::Numerical(
            "Sobolev check produced non-finite quadrature values".into(),
        ));
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn spectrum(eigs: &[f64]) -> Spectrum {
        Spectrum {
            eigenvalues: eigs.to_vec(),
            eigenvectors: Mat::identity(eigs.len()),
        }
    }

    #[test]
    fn basic_bound_examples() {
        assert_eq!(j_basic(1.0, 3.0).unwrap(), 1.5);
        let want = 4.0 * (1.0 - (0.5f64).sqrt());
        assert!((j_basic(0.5, 2.0).unwrap() - want).abs() < 1e-14);
        let (v, sat) = BoundFamily::Basic.evaluate(0.5, 4.0).unwrap();
        assert_eq!(v, 4.0);
        assert!(sat);
        // just below critical: not saturated, below ceiling
        let (v, sat) = BoundFamily::Basic.evaluate(0.5, 4.0 - 1e-9).unwrap();
        assert!(!sat);
        assert!(v < 4.0);
        assert!(j_basic(0.0, 1.0).is_err());
        assert!(j_basic(1.2, 1.0).is_err());
        assert!(j_basic(0.5, -1.0).is_err());
    }

    #[test]
    fn improved_bound_examples() {
        let want = (16.0 / 3.0) * (1.0 - (15.0f64 / 16.0).powf(1.5));
        assert!((j_improved(0.75, 1.0).unwrap() - want).abs() < 1e-14);
        assert!(j_improved(0.75, 1.0).unwrap() < j_basic(0.75, 1.0).unwrap());
        assert!((j_basic(0.75, 1.0).unwrap() - 0.50825).abs() < 1e-4);
        assert_eq!(j_improved(1.0, 3.0).unwrap(), 1.5);
        let mut t = 0.0;
        while t <= 10.0 {
            assert_eq!(
                j_improved(0.5, t).unwrap(),
                j_basic(0.5, t).unwrap(),
                "families must coincide at alpha = 1/2, t = {t}"
            );
            t += 0.25;
        }
    }

    #[test]
    fn datafree_bound_examples() {
        assert_eq!(j_datafree(1.0, 3.0).unwrap(), 1.5);
        assert_eq!(j_datafree(0.5, 2.0).unwrap(), 2.0);
        // improved branch at alpha >= 2/3
        let a = 2.0 / 3.0;
        assert_eq!(j_datafree(a, 1.3).unwrap(), j_improved(a, 1.3).unwrap());
        // concavity of the 2/3 branch: second differences <= 0
        let h = 0.05;
        let mut t = h;
        while t < 15.0 {
            let s = j_datafree(a, t - h).unwrap() - 2.0 * j_datafree(a, t).unwrap()
                + j_datafree(a, t + h).unwrap();
            assert!(s <= 1e-9, "second difference {s} at t={t}");
            t += h;
        }
        // the linear branch never saturates and can pass the ceiling
        let (v, sat) = BoundFamily::DataFree.evaluate(0.2, 50.0).unwrap();
        assert!(!sat);
        assert!(v > 1.0 / (0.2 * 0.8));
    }

    #[test]
    fn monotone_and_plateaued() {
        for &alpha in &[0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let ceiling = if alpha < 1.0 { 1.0 / (alpha * (1.0 - alpha)) } else { f64::INFINITY };
            for family in [BoundFamily::Basic, BoundFamily::Improved] {
                let mut prev = 0.0;
                let mut t = 0.0;
                while t <= 20.0 {
                    let (v, _) = family.evaluate(alpha, t).unwrap();
                    assert!(v >= prev - 1e-12, "{family:?} alpha {alpha} t {t}");
                    assert!(v <= ceiling + 1e-12);
                    prev = v;
                    t += 0.1;
                }
            }
        }
    }

    #[test]
    fn ordering_flips_at_half() {
        for &alpha in &[0.55, 0.6, 0.75, 0.9, 0.99] {
            let mut t = 0.0;
            while t <= 20.0 {
                assert!(
                    j_improved(alpha, t).unwrap() <= j_basic(alpha, t).unwrap() + 1e-12,
                    "alpha {alpha} t {t}"
                );
                t += 0.25;
            }
        }
        for &alpha in &[0.1, 0.3, 0.45] {
            let mut t = 0.0;
            while t <= 20.0 {
                assert!(
                    j_basic(alpha, t).unwrap() <= j_improved(alpha, t).unwrap() + 1e-12,
                    "alpha {alpha} t {t}"
                );
                t += 0.25;
            }
        }
    }

    #[test]
    fn improved_approaches_the_kl_line() {
        for &t in &[0.5, 3.0, 10.0] {
            for &eps in &[1e-4, 1e-5, 1e-6] {
                let v = j_improved(1.0 - eps, t).unwrap();
                assert!(
                    (v - 0.5 * t).abs() < 100.0 * eps * (1.0 + t * t),
                    "eps {eps} t {t}: {v}"
                );
            }
        }
    }

    #[test]
    fn critical_points() {
        assert!((BoundFamily::Basic.critical(0.75).unwrap() - 8.0).abs() < 1e-12);
        assert!((BoundFamily::Basic.critical(0.5).unwrap() - 4.0).abs() < 1e-12);
        assert!((BoundFamily::Improved.critical(0.75).unwrap() - 16.0).abs() < 1e-12);
        assert!((BoundFamily::Improved.critical(0.5).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(BoundFamily::Basic.critical(1.0).unwrap(), f64::INFINITY);
        assert_eq!(BoundFamily::DataFree.critical(0.5).unwrap(), f64::INFINITY);
        assert_eq!(BoundFamily::PinskerTV.critical(0.3).unwrap(), f64::INFINITY);
        // saturation exactly at the critical argument
        for family in [BoundFamily::Basic, BoundFamily::Improved] {
            for &alpha in &[0.3, 0.5, 0.8] {
                let crit = family.critical(alpha).unwrap();
                assert!(family.evaluate(alpha, crit).unwrap().1);
                assert!(!family.evaluate(alpha, crit * (1.0 - 1e-12)).unwrap().1);
                let (v, _) = family.evaluate(alpha, crit).unwrap();
                assert_eq!(v, 1.0 / (alpha * (1.0 - alpha)));
            }
        }
    }

    #[test]
    fn certify_examples() {
        let budget = SobolevBudget::standard_gaussian();
        // tail = 0 at r = d
        let sp = spectrum(&[2.0, 1.0]);
        for family in [BoundFamily::Basic, BoundFamily::Improved, BoundFamily::DataFree] {
            for &alpha in &[0.25, 0.5, 1.0] {
                let c = certify(alpha, family, &budget, &sp, 2).unwrap();
                assert_eq!(c.bound, 0.0, "{family:?} alpha {alpha}");
                assert!(!c.saturated);
            }
        }
        // saturating configuration: tail 7 at alpha 1/2
        let sp = spectrum(&[3.0, 4.0]);
        let c = certify(0.5, BoundFamily::Basic, &budget, &sp, 0).unwrap();
        assert_eq!(c.tail, 7.0);
        assert_eq!(c.bound, 4.0);
        assert!(c.saturated);
        assert!(c.is_vacuous());
        // KL certificate
        let sp = spectrum(&[1.0, 0.2]);
        let c = certify(1.0, BoundFamily::Basic, &budget, &sp, 1).unwrap();
        assert!((c.bound - 0.1).abs() < 1e-15);
        assert!(!c.saturated);
        // recompute invariant
        for cert in [
            certify(0.5, BoundFamily::Basic, &budget, &spectrum(&[0.9, 0.4, 0.1]), 1).unwrap(),
            certify(0.8, BoundFamily::Improved, &budget, &spectrum(&[0.9, 0.4, 0.1]), 0).unwrap(),
        ] {
            assert!((cert.recompute_bound().unwrap() - cert.bound).abs() <= 1e-14);
        }
        // Pinsker family is rejected here
        assert!(certify(1.0, BoundFamily::PinskerTV, &budget, &sp, 0).is_err());
    }

    #[test]
    fn certify_uses_the_matched_sobolev_order() {
        // budget with c1 != c2: alpha = 1 picks beta = 1, alpha <= 1/2
        // picks beta = 2; both resolve to max(c1, c2) on [1,2].
        let budget = SobolevBudget::user_supplied(0.5, 2.0).unwrap();
        let sp = spectrum(&[1.0, 0.3]);
        let c = certify(1.0, BoundFamily::Basic, &budget, &sp, 1).unwrap();
        assert_eq!(c.c_sub, 2.0);
        assert!((c.bound - 0.3).abs() < 1e-15);
        let c = certify(0.4, BoundFamily::Basic, &budget, &sp, 1).unwrap();
        assert_eq!(c.c_sub, 2.0);
    }

    #[test]
    fn tv_certificate_examples() {
        let budget = SobolevBudget::standard_gaussian();
        let c = certify_tv(&budget, &spectrum(&[0.25, 0.25]), 0).unwrap();
        assert_eq!(c.bound, 0.5);
        assert!(!c.is_vacuous());
        let c = certify_tv(&budget, &spectrum(&[0.3, 0.5]), 2).unwrap();
        assert_eq!(c.bound, 0.0);
        let c = certify_tv(&budget, &spectrum(&[1.0, 1.0]), 0).unwrap();
        assert_eq!(c.bound, 1.0);
        assert!(c.is_vacuous());
        assert!(!c.saturated);
        assert!((c.recompute_bound().unwrap() - c.bound).abs() <= 1e-14);
    }

    #[test]
    fn sobolev_check_constant_function() {
        let (lhs, rhs) = sobolev_check_1d(1.5, &|_x| 2.0, None, 64).unwrap();
        assert!(lhs.abs() < 1e-10);
        assert!(rhs.abs() < 1e-18);
    }

    #[test]
    fn sobolev_check_lsi_is_tight_for_log_linear() {
        let f = |x: f64| (0.5 * x).exp();
        let df = |x: f64| 0.5 * (0.5 * x).exp();
        let (lhs, rhs) = sobolev_check_1d(1.0, &f, Some(&df), 200).unwrap();
        assert!(lhs.is_finite() && rhs.is_finite());
        assert!(lhs <= rhs + 1e-8);
        // equality case of the log-Sobolev inequality
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn sobolev_check_poincare_case() {
        let f = |x: f64| 1.0 + x * x;
        let df = |x: f64| 2.0 * x;
        let (lhs, rhs) = sobolev_check_1d(2.0, &f, Some(&df), 200).unwrap();
        // Var(1+x^2)/2 = 1 and E[(2x)^2]/2 = 2 under N(0,1)
        assert!((lhs - 1.0).abs() < 1e-10);
        assert!((rhs - 2.0).abs() < 1e-10);
        assert!(lhs <= rhs + 1e-8);
    }

    #[test]
    fn sobolev_check_finite_difference_fallback() {
        let f = |x: f64| (0.5 * x).cosh();
        let df = |x: f64| 0.5 * (0.5 * x).sinh();
        let (l1, r1) = sobolev_check_1d(1.5, &f, Some(&df), 200).unwrap();
        let (l2, r2) = sobolev_check_1d(1.5, &f, None, 200).unwrap();
        assert_eq!(l1, l2);
        assert!((r1 - r2).abs() < 1e-8);
        assert!(l1 <= r1 + 1e-8);
    }

    #[test]
    fn sobolev_check_rejects_bad_inputs() {
        assert!(sobolev_check_1d(0.9, &|_x| 1.0, None, 32).is_err());
        assert!(sobolev_check_1d(2.1, &|_x| 1.0, None, 32).is_err());
        assert!(sobolev_check_1d(1.5, &|x: f64| x, None, 32).is_err()); // goes negative
    }
}
