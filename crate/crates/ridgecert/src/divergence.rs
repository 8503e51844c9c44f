//! Amari α-divergences: the entropy function φ_α, φ-entropies, a
//! self-normalized Monte Carlo estimator of D_α between two unnormalized
//! targets over a common reference measure, and the exact closed form for
//! centered Gaussians used as a test oracle.
//!
//! All sampling-based estimation here is importance sampling from μ, never
//! from π: targets come as unnormalized weights ℓ, and self-normalization
//! removes both partition functions through the identity
//! ∫(dπ/dπ̃)^α dπ̃ = (Z̃^{α-1}/Z_π^α) E_μ[ℓ^α ℓ̃^{1-α}],
//! with all three μ-expectations estimated on one shared batch. Everything
//! is carried in log space; only max-shifted exponentials are ever formed,
//! so strongly concentrated likelihoods do not overflow.
//!
//! α snaps to the logarithmic branches within 1e-8 of 0 and 1.

use crate::error::{Result, RidgeError};
use crate::linalg::{self, Mat};
use crate::measures::{ReferenceMeasure, TargetModel};
use crate::numeric::{mean, mean_var, pairwise_sum};

/// Tolerance inside which alpha is treated as exactly 0 or 1.
pub const ALPHA_SNAP: f64 = 1e-8;

/// The α-divergence entropy function φ_α(t).
///
/// Branches: α=0 gives -ln t + t - 1, α=1 gives t ln t - t + 1, otherwise
/// (t^α - 1)/(α(α-1)) - (t-1)/(α-1). φ_α(1) = 0 and φ_α ≥ 0 on its domain
/// for every branch. t = 0 with α ≤ 0 evaluates to +inf, which is the
/// correct limit, not an error.
pub fn phi_alpha(alpha: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(RidgeError::Domain(format!("phi_alpha needs t >= 0, got {t}")));
    }
    if alpha.abs() < ALPHA_SNAP {
        if t == 0.0 {
            return Ok(f64::INFINITY);
        }
        return Ok(-t.ln() + t - 1.0);
    }
    if (alpha - 1.0).abs() < ALPHA_SNAP {
        if t == 0.0 {
            return Ok(1.0);
        }
        return Ok(t * t.ln() - t + 1.0);
    }
    Ok((t.powf(alpha) - 1.0) / (alpha * (alpha - 1.0)) - (t - 1.0) / (alpha - 1.0))
}

/// φ-entropy of f under a finite weighted measure:
/// Σ w_i φ_α(f_i) − φ_α(Σ w_i f_i). Nonnegative by Jensen.
pub fn phi_entropy(alpha: f64, f_values: &[f64], weights: &[f64]) -> Result<f64> {
    if f_values.len() != weights.len() {
        return Err(RidgeError::Dimension(
            "f_values and weights must have equal length".into(),
        ));
    }
    if f_values.is_empty() {
        return Err(RidgeError::Domain("phi_entropy of an empty vector".into()));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(RidgeError::Domain("weights must be nonnegative".into()));
    }
    let total = pairwise_sum(weights);
    if (total - 1.0).abs() > 1e-12 {
        return Err(RidgeError::Domain(format!(
            "weights must sum to 1 within 1e-12 (got {total})"
        )));
    }
    if f_values.iter().any(|&f| !(f >= 0.0)) {
        return Err(RidgeError::Domain("f_values must be nonnegative".into()));
    }
    let mut acc = 0.0;
    let mut fbar = 0.0;
    for (&f, &w) in f_values.iter().zip(weights) {
        if w > 0.0 {
            acc += w * phi_alpha(alpha, f)?;
        }
        fbar += w * f;
    }
    Ok(acc - phi_alpha(alpha, fbar)?)
}

/// Monte Carlo divergence estimate with a delta-method standard error.
#[derive(Debug, Clone, Copy)]
pub struct DivergenceEstimate {
    pub alpha: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl DivergenceEstimate {
    pub fn analytic(alpha: f64, value: f64) -> DivergenceEstimate {
        DivergenceEstimate {
            alpha,
            value,
            std_error: 0.0,
            n_samples: 0,
        }
    }
}

/// D_α(π‖π̃) for dπ ∝ e^{log ℓ} dμ and dπ̃ ∝ e^{profile_log} dμ, estimated
/// by self-normalized importance sampling from one μ-batch.
///
/// α must lie in (0,1]; α within 1e-8 of 1 uses the self-normalized KL
/// form. Non-finite log evaluations (NaN or +inf) abort with a count of the
/// offending samples; -inf values are legitimate zero-mass points. The
/// standard error comes from the nonparametric delta method on the three
/// batch means.
pub fn d_alpha_mc(
    alpha: f64,
    target: &TargetModel,
    profile_log: &dyn Fn(&[f64]) -> f64,
    mu: &ReferenceMeasure,
    n: usize,
    seed: u64,
) -> Result<DivergenceEstimate> {
    check_alpha_unit(alpha)?;
    let xs = mu.sample(n, seed)?;
    let mut ll = Vec::with_capacity(n);
    let mut lp = Vec::with_capacity(n);
    for i in 0..n {
        ll.push(target.log_l(xs.row(i)));
        lp.push(profile_log(xs.row(i)));
    }
    d_alpha_from_logs(alpha, &ll, &lp)
}

/// Core of [`d_alpha_mc`] on precomputed log values; exposed for callers
/// that share one batch across several estimates.
pub fn d_alpha_from_logs(alpha: f64, ll: &[f64], lp: &[f64]) -> Result<DivergenceEstimate> {
    check_alpha_unit(alpha)?;
    let n = ll.len();
    if n == 0 {
        return Err(RidgeError::Domain("empty sample batch".into()));
    }
    let rejected = ll
        .iter()
        .chain(lp.iter())
        .filter(|v| v.is_nan() || **v == f64::INFINITY)
        .count();
    if rejected > 0 {
        return Err(RidgeError::EstimatorFailure {
            context: "non-finite log values in divergence batch".into(),
            rejected,
        });
    }
    let s_b = max_finite(ll).ok_or_else(|| {
        RidgeError::DegenerateWeights("target weight is zero on the whole batch".into())
    })?;
    let s_c = max_finite(lp).ok_or_else(|| {
        RidgeError::DegenerateWeights("profile weight is zero on the whole batch".into())
    })?;

    if (alpha - 1.0).abs() < ALPHA_SNAP {
        // KL form: E_pi[log l - log l~] - (log Z_pi - log Z~), self-normalized.
        let b: Vec<f64> = ll.iter().map(|&v| (v - s_b).exp()).collect();
        let c: Vec<f64> = lp.iter().map(|&v| (v - s_c).exp()).collect();
        // pi puts zero mass where l = 0; those terms drop. A point with
        // positive target mass but zero profile mass sends KL to +inf.
        if ll
            .iter()
            .zip(lp.iter())
            .any(|(&l, &p)| l > f64::NEG_INFINITY && p == f64::NEG_INFINITY)
        {
            return Ok(DivergenceEstimate {
                alpha: 1.0,
                value: f64::INFINITY,
                std_error: f64::INFINITY,
                n_samples: n,
            });
        }
        let a: Vec<f64> = ll
            .iter()
            .zip(lp.iter())
            .zip(&b)
            .map(|((&l, &p), &bi)| if bi == 0.0 { 0.0 } else { bi * (l - p) })
            .collect();
        let (abar, bbar, cbar) = (mean(&a), mean(&b), mean(&c));
        let value = abar / bbar - ((bbar.ln() + s_b) - (cbar.ln() + s_c));
        let g = [1.0 / bbar, -abar / (bbar * bbar) - 1.0 / bbar, 1.0 / cbar];
        let var = delta_var(&[&a, &b, &c], &g);
        return Ok(DivergenceEstimate {
            alpha: 1.0,
            value,
            std_error: var.max(0.0).sqrt(),
            n_samples: n,
        });
    }

    // General branch. With shifted samples
    //   a_i = exp(alpha(ll-s_b) + (1-alpha)(lp-s_c)), b_i = exp(ll-s_b),
    //   c_i = exp(lp-s_c),
    // the statistic T = E[l^a l~^(1-a)] E[l~]^(a-1) E[l]^(-a) is exactly
    // A C^(a-1) B^(-a) of the shifted means: the shifts cancel.
    let a: Vec<f64> = ll
        .iter()
        .zip(lp.iter())
        .map(|(&l, &p)| {
            let e = alpha * (l - s_b) + (1.0 - alpha) * (p - s_c);
            e.exp()
        })
        .collect();
    let b: Vec<f64> = ll.iter().map(|&v| (v - s_b).exp()).collect();
    let c: Vec<f64> = lp.iter().map(|&v| (v - s_c).exp()).collect();
    let (abar, bbar, cbar) = (mean(&a), mean(&b), mean(&c));
    let log_t = abar.ln() + (alpha - 1.0) * cbar.ln() - alpha * bbar.ln();
    let t = log_t.exp();
    // (T - 1)/(alpha(alpha-1)) = -expm1(log T)/(alpha(1-alpha))
    let value = -log_t.exp_m1() / (alpha * (1.0 - alpha));
    let g = [
        t / abar,
        -alpha * t / bbar,
        (alpha - 1.0) * t / cbar,
    ];
    let var = delta_var(&[&a, &b, &c], &g);
    Ok(DivergenceEstimate {
        alpha,
        value,
        std_error: var.max(0.0).sqrt() / (alpha * (1.0 - alpha)),
        n_samples: n,
    })
}

/// KL(π_w‖π_z) with the weight pool decoupled from the value pool: the
/// importance weights come from lw, the integrand and the numerator
/// normalizer from lv. Meant for lw and lv being two independent
/// estimates of the same log-profile. Self-normalized weights evaluated
/// on their own pool carry no covariance with the values at the same
/// sample, which is what otherwise biases the nested α = 1 estimate by
/// O(1/n_inner).
pub(crate) fn kl_from_logs_split(
    lw: &[f64],
    lv: &[f64],
    lz: &[f64],
) -> Result<DivergenceEstimate> {
    let n = lw.len();
    if n == 0 || lv.len() != n || lz.len() != n {
        return Err(RidgeError::Dimension(
            "log batches disagree on sample count".into(),
        ));
    }
    let rejected = lw
        .iter()
        .chain(lv)
        .chain(lz)
        .filter(|v| v.is_nan() || **v == f64::INFINITY)
        .count();
    if rejected > 0 {
        return Err(RidgeError::EstimatorFailure {
            context: "non-finite log values in divergence batch".into(),
            rejected,
        });
    }
    let s_w = max_finite(lw).ok_or_else(|| {
        RidgeError::DegenerateWeights("weight pool is zero on the whole batch".into())
    })?;
    let s_v = max_finite(lv).ok_or_else(|| {
        RidgeError::DegenerateWeights("value pool is zero on the whole batch".into())
    })?;
    let s_z = max_finite(lz).ok_or_else(|| {
        RidgeError::DegenerateWeights("competitor is zero on the whole batch".into())
    })?;
    if lw.iter().zip(lz).any(|(&w, &z)| w > f64::NEG_INFINITY && z == f64::NEG_INFINITY) {
        return Ok(DivergenceEstimate {
            alpha: 1.0,
            value: f64::INFINITY,
            std_error: f64::INFINITY,
            n_samples: n,
        });
    }
    let vanished = lw
        .iter()
        .zip(lv)
        .filter(|(&w, &v)| w > f64::NEG_INFINITY && v == f64::NEG_INFINITY)
        .count();
    if vanished > 0 {
        // the two pools estimate the same conditional mean; one claiming
        // zero mass where the other has weight means n_inner is far too small
        return Err(RidgeError::EstimatorFailure {
            context: "value pool vanished where the weight pool has mass".into(),
            rejected: vanished,
        });
    }
    let w: Vec<f64> = lw.iter().map(|&x| (x - s_w).exp()).collect();
    let v: Vec<f64> = lv.iter().map(|&x| (x - s_v).exp()).collect();
    let z: Vec<f64> = lz.iter().map(|&x| (x - s_z).exp()).collect();
    let a: Vec<f64> = w
        .iter()
        .zip(lv.iter().zip(lz))
        .map(|(&wi, (&lvi, &lzi))| if wi == 0.0 { 0.0 } else { wi * (lvi - lzi) })
        .collect();
    let (abar, wbar, vbar, zbar) = (mean(&a), mean(&w), mean(&v), mean(&z));
    let value = abar / wbar - ((vbar.ln() + s_v) - (zbar.ln() + s_z));
    let g = [1.0 / wbar, -abar / (wbar * wbar), -1.0 / vbar, 1.0 / zbar];
    let var = delta_var(&[&a, &w, &v, &z], &g);
    Ok(DivergenceEstimate {
        alpha: 1.0,
        value,
        std_error: var.max(0.0).sqrt(),
        n_samples: n,
    })
}

fn check_alpha_unit(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0 + ALPHA_SNAP) || !alpha.is_finite() {
        return Err(RidgeError::Domain(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

fn max_finite(xs: &[f64]) -> Option<f64> {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (m > f64::NEG_INFINITY).then_some(m)
}

/// Delta-method variance of a smooth function of the sample means with
/// gradient g: the sample variance of the per-draw influence Σ_k g_k x_{k,i},
/// over n. Summing per draw keeps mathematically cancelling terms cancelling
/// bitwise (identical component arrays give exactly zero), where the expanded
/// quadratic form g' S g leaves rounding noise the size of its largest term.
fn delta_var(samples: &[&[f64]], g: &[f64]) -> f64 {
    let n = samples[0].len();
    let mut infl = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = 0.0;
        for (k, xs) in samples.iter().enumerate() {
            s += g[k] * xs[i];
        }
        infl.push(s);
    }
    let (_, var) = mean_var(&infl);
    var / n as f64
}

/// Exact D_α between N(0, cov_a) and N(0, cov_b), α in (0,1], plus a flag
/// marking the saturation fallback.
///
/// For α in (0,1) the α-integral ∫ p_a^α p_b^{1-α} has the closed form
/// |Σa|^{-α/2} |Σb|^{-(1-α)/2} |α Σa^{-1} + (1-α) Σb^{-1}|^{-1/2},
/// and D_α = (I_α - 1)/(α(α-1)). The mixture matrix is SPD for any SPD
/// inputs in this α range; if rounding ever breaks its factorization the
/// vacuous ceiling 1/(α(1-α)) is returned with the flag set.
pub fn gaussian_d_alpha_flagged(alpha: f64, cov_a: &Mat, cov_b: &Mat) -> Result<(f64, bool)> {
    check_alpha_unit(alpha)?;
    if !cov_a.is_square() || !cov_b.is_square() || cov_a.rows() != cov_b.rows() {
        return Err(RidgeError::Dimension(
            "covariances must be square with equal dimension".into(),
        ));
    }
    let d = cov_a.rows();
    let la = linalg::cholesky(cov_a)
        .map_err(|_| RidgeError::Domain("cov_a must be symmetric positive definite".into()))?;
    let lb = linalg::cholesky(cov_b)
        .map_err(|_| RidgeError::Domain("cov_b must be symmetric positive definite".into()))?;
    let ld_a = 2.0 * (0..d).map(|i| la.get(i, i).ln()).sum::<f64>();
    let ld_b = 2.0 * (0..d).map(|i| lb.get(i, i).ln()).sum::<f64>();

    if (alpha - 1.0).abs() < ALPHA_SNAP {
        // KL(N(0,Sa) || N(0,Sb)) = (tr(Sb^-1 Sa) - ln det(Sb^-1 Sa) - d)/2
        let mut tr = 0.0;
        for j in 0..d {
            let x = linalg::solve_cholesky(&lb, &cov_a.col(j));
            tr += x[j];
        }
        return Ok((0.5 * (tr - d as f64 - (ld_a - ld_b)), false));
    }

    let inv_a = linalg::spd_inverse(cov_a)?;
    let inv_b = linalg::spd_inverse(cov_b)?;
    let m = Mat::from_fn(d, d, |i, j| {
        alpha * inv_a.get(i, j) + (1.0 - alpha) * inv_b.get(i, j)
    });
    let ceiling = 1.0 / (alpha * (1.0 - alpha));
    let ld_m = match linalg::log_det_spd(&m) {
        Ok(v) => v,
        Err(_) => return Ok((ceiling, true)),
    };
    let log_i = -0.5 * (alpha * ld_a + (1.0 - alpha) * ld_b + ld_m);
    // (I - 1)/(alpha(alpha-1))
    Ok((-log_i.exp_m1() / (alpha * (1.0 - alpha)), false))
}

/// [`gaussian_d_alpha_flagged`] without the saturation flag.
pub fn gaussian_d_alpha(alpha: f64, cov_a: &Mat, cov_b: &Mat) -> Result<f64> {
    gaussian_d_alpha_flagged(alpha, cov_a, cov_b).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::stream_rng;
    use rand::Rng;

    #[test]
    fn split_kl_collapses_to_coupled_on_a_shared_pool() {
        // with lw == lv the decoupled estimator is the plain one
        let lm = [-0.3, 0.7, -1.2, 0.1, 0.4, -2.0];
        let lz = [0.1, -0.4, 0.2, -0.1, 0.0, -0.5];
        let coupled = d_alpha_from_logs(1.0, &lm, &lz).unwrap();
        let split = kl_from_logs_split(&lm, &lm, &lz).unwrap();
        assert_eq!(split.value, coupled.value);
        // the coupled path folds the shared pool's influence coefficient into
        // a single product, the split path sums two; that re-rounds by an ulp
        let se_gap = (split.std_error - coupled.std_error).abs();
        assert!(se_gap <= 1e-12 * coupled.std_error, "se gap {se_gap:e}");
    }

    #[test]
    fn split_kl_rejects_disagreeing_pools() {
        let lw = [0.0, -0.5, 0.3];
        let lv = [0.0, f64::NEG_INFINITY, 0.3];
        let lz = [0.0, 0.0, 0.0];
        let err = kl_from_logs_split(&lw, &lv, &lz);
        assert!(matches!(err, Err(RidgeError::EstimatorFailure { .. })));
        // zero competitor mass under positive weight is +inf, as in the
        // coupled form
        let inf = kl_from_logs_split(&lw, &lw, &[0.0, f64::NEG_INFINITY, 0.0]).unwrap();
        assert_eq!(inf.value, f64::INFINITY);
    }

    #[test]
    fn phi_alpha_branches() {
        for alpha in [0.0, 0.5, 1.0, 2.0, -1.0] {
            assert_eq!(phi_alpha(alpha, 1.0).unwrap(), 0.0, "alpha {alpha}");
        }
        assert!((phi_alpha(2.0, 3.0).unwrap() - 2.0).abs() < 1e-14);
        let e = std::f64::consts::E;
        assert!((phi_alpha(0.0, e).unwrap() - (e - 2.0)).abs() < 1e-14);
        // snapping near the log branches is continuous
        let a = phi_alpha(1.0, 2.5).unwrap();
        let b = phi_alpha(1.0 + 5e-9, 2.5).unwrap();
        assert_eq!(a, b);
        // limits at t = 0
        assert_eq!(phi_alpha(0.0, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(phi_alpha(-0.5, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(phi_alpha(1.0, 0.0).unwrap(), 1.0);
        assert!((phi_alpha(0.5, 0.0).unwrap() - 2.0).abs() < 1e-14); // 1/alpha
        assert!(phi_alpha(0.5, -0.1).is_err());
    }

    #[test]
    fn phi_alpha_nonnegative_on_grid() {
        for &alpha in &[-1.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
            let mut t = 0.05;
            while t < 5.0 {
                let v = phi_alpha(alpha, t).unwrap();
                assert!(v >= -1e-15, "phi_{alpha}({t}) = {v}");
                t += 0.05;
            }
        }
    }

    #[test]
    fn phi_entropy_examples() {
        let v = phi_entropy(0.7, &[2.0, 2.0, 2.0], &[0.2, 0.5, 0.3]).unwrap();
        assert!(v.abs() < 1e-14);
        let v = phi_entropy(2.0, &[0.0, 2.0], &[0.5, 0.5]).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        let v = phi_entropy(1.0, &[1.0, 1.0, 1.0], &[0.25, 0.5, 0.25]).unwrap();
        assert!(v.abs() < 1e-14);
        assert!(phi_entropy(1.0, &[1.0], &[0.5]).is_err());
        assert!(phi_entropy(1.0, &[1.0, 1.0], &[0.5]).is_err());
        // nonnegativity on pseudo-random inputs
        let mut rng = stream_rng(3);
        for _ in 0..50 {
            let f: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 3.0).collect();
            let raw: Vec<f64> = (0..6).map(|_| rng.random::<f64>() + 0.01).collect();
            let s: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let fix = 1.0 - w.iter().sum::<f64>();
            w[0] += fix;
            let v = phi_entropy(1.3, &f, &w).unwrap();
            assert!(v >= -1e-12);
        }
    }

    fn gaussian_target_1d(var: f64) -> TargetModel {
        // l(x) = exp(-x^2/2 * (1/var - 1)) turns N(0,1) into N(0,var)
        let k = 1.0 / var - 1.0;
        TargetModel::new(
            1,
            move |x| -0.5 * k * x[0] * x[0],
            move |x| vec![-k * x[0]],
        )
    }

    #[test]
    fn exact_ridge_gives_zero_with_zero_se() {
        let target = gaussian_target_1d(0.5);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let t2 = target.clone();
        let est = d_alpha_mc(0.5, &target, &move |x: &[f64]| t2.log_l(x), &mu, 2000, 9).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.std_error.abs() < 1e-12);
    }

    #[test]
    fn matches_gaussian_closed_form() {
        let target = gaussian_target_1d(0.5);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let n = 1_000_000;
        let est = d_alpha_mc(0.5, &target, &|_x: &[f64]| 0.0, &mu, n, 12).unwrap();
        let exact = gaussian_d_alpha(0.5, &Mat::diag(&[0.5]), &Mat::diag(&[1.0])).unwrap();
        assert!(
            (est.value - exact).abs() <= 3.0 * est.std_error,
            "{} vs {exact} (se {})",
            est.value,
            est.std_error
        );
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn kl_branch_matches_closed_form() {
        let target = gaussian_target_1d(0.5);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let est = d_alpha_mc(1.0, &target, &|_x: &[f64]| 0.0, &mu, 400_000, 4).unwrap();
        let exact = 0.5 * (2.0f64.ln() - 0.5);
        assert!((est.value - exact).abs() <= 3.0 * est.std_error);
        // nonnegativity holds by construction for the self-normalized form
        assert!(est.value >= 0.0);
    }

    #[test]
    fn duality_estimates_agree_at_half() {
        // D_1/2(pi || mu) == D_1/2(mu || pi); swap roles by exchanging the
        // log weights handed to the estimator.
        let target = gaussian_target_1d(0.5);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let fwd = d_alpha_mc(0.5, &target, &|_x: &[f64]| 0.0, &mu, 300_000, 5).unwrap();
        let flat = TargetModel::new(1, |_x| 0.0, |_x| vec![0.0]);
        let t2 = target.clone();
        let bwd = d_alpha_mc(0.5, &flat, &move |x: &[f64]| t2.log_l(x), &mu, 300_000, 6).unwrap();
        let se = (fwd.std_error.powi(2) + bwd.std_error.powi(2)).sqrt();
        assert!((fwd.value - bwd.value).abs() <= 3.0 * se);
    }

    #[test]
    fn se_scales_like_inverse_sqrt_n() {
        let target = gaussian_target_1d(0.6);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let mut ses = Vec::new();
        for (k, n) in [(0u64, 10_000usize), (1, 100_000), (2, 1_000_000)] {
            let est = d_alpha_mc(0.5, &target, &|_x: &[f64]| 0.0, &mu, n, 100 + k).unwrap();
            ses.push(est.std_error);
        }
        let r1 = ses[0] / ses[1];
        let r2 = ses[1] / ses[2];
        let root10 = 10f64.sqrt();
        for r in [r1, r2] {
            assert!(r > root10 / 2.0 && r < root10 * 2.0, "ratio {r}");
        }
    }

    #[test]
    fn estimator_failure_on_nan() {
        let target = TargetModel::new(1, |x| if x[0] > 0.0 { f64::NAN } else { 0.0 }, |_x| vec![0.0]);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let err = d_alpha_mc(0.5, &target, &|_x: &[f64]| 0.0, &mu, 100, 0);
        match err {
            Err(RidgeError::EstimatorFailure { rejected, .. }) => assert!(rejected > 0),
            other => panic!("expected estimator failure, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_when_target_mass_vanishes() {
        let target = TargetModel::new(1, |_x| f64::NEG_INFINITY, |_x| vec![0.0]);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let err = d_alpha_mc(0.5, &target, &|_x: &[f64]| 0.0, &mu, 50, 0);
        assert!(matches!(err, Err(RidgeError::DegenerateWeights(_))));
    }

    #[test]
    fn kl_infinite_when_profile_misses_mass() {
        let target = TargetModel::new(1, |_x| 0.0, |_x| vec![0.0]);
        let mu = ReferenceMeasure::standard_gaussian(1);
        let profile = |x: &[f64]| if x[0] > 0.0 { f64::NEG_INFINITY } else { 0.0 };
        let est = d_alpha_mc(1.0, &target, &profile, &mu, 100, 1).unwrap();
        assert_eq!(est.value, f64::INFINITY);
    }

    // --- Gaussian closed form: oracle validation -------------------------

    /// 1-D quadrature of the alpha-integral between N(0,va) and N(0,vb) on
    /// a Simpson grid wide enough that the tail is below 1e-14.
    fn alpha_integral_quadrature(alpha: f64, va: f64, vb: f64) -> f64 {
        let half_width = 12.0 * va.max(vb).sqrt();
        let n = 40_001; // odd for Simpson
        let h = 2.0 * half_width / (n - 1) as f64;
        let dens = |x: f64, v: f64| (-0.5 * x * x / v).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        let f = |x: f64| dens(x, va).powf(alpha) * dens(x, vb).powf(1.0 - alpha);
        let mut s = f(-half_width) + f(half_width);
        for i in 1..n - 1 {
            let x = -half_width + i as f64 * h;
            s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn closed_form_validated_against_quadrature() {
        for &(alpha, va, vb) in &[
            (0.5, 1.0, 0.25),
            (0.25, 0.5, 2.0),
            (0.75, 1.5, 0.7),
            (0.6, 3.0, 0.4),
        ] {
            let i_quad = alpha_integral_quadrature(alpha, va, vb);
            let d_quad = (i_quad - 1.0) / (alpha * (alpha - 1.0));
            let d = gaussian_d_alpha(alpha, &Mat::diag(&[va]), &Mat::diag(&[vb])).unwrap();
            assert!(
                (d - d_quad).abs() < 1e-8,
                "alpha={alpha} va={va} vb={vb}: {d} vs {d_quad}"
            );
        }
    }

    #[test]
    fn gaussian_closed_form_examples() {
        let i2 = Mat::identity(2);
        assert!(gaussian_d_alpha(0.5, &i2, &i2).unwrap().abs() < 1e-14);
        // alpha = 1/2 equals four times the squared Hellinger distance
        let a = Mat::diag(&[1.0]);
        let b = Mat::diag(&[0.25]);
        let d_half = gaussian_d_alpha(0.5, &a, &b).unwrap();
        let hell2 = {
            // 1 - det(Sa)^{1/4} det(Sb)^{1/4} / det((Sa+Sb)/2)^{1/2}
            let det_a: f64 = 1.0;
            let det_b: f64 = 0.25;
            let det_m: f64 = 0.625;
            1.0 - det_a.powf(0.25) * det_b.powf(0.25) / det_m.sqrt()
        };
        assert!((d_half - 4.0 * hell2).abs() < 1e-12);
        let kl = gaussian_d_alpha(1.0, &Mat::diag(&[0.5]), &Mat::diag(&[1.0])).unwrap();
        assert!((kl - 0.5 * (2.0f64.ln() - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn duality_and_ceiling_on_random_pairs() {
        let mut rng = stream_rng(42);
        for _ in 0..50 {
            let d = 1 + (rng.random::<u32>() % 4) as usize;
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let q = Mat::from_fn(d, d, |_, _| rng.random::<f64>() - 0.5);
                let spd = q.matmul(&q.transpose()).add(&Mat::identity(d).scale(0.3));
                spd
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            for &alpha in &[0.25, 0.5, 0.75] {
                let fwd = gaussian_d_alpha(alpha, &a, &b).unwrap();
                let bwd = gaussian_d_alpha(1.0 - alpha, &b, &a).unwrap();
                assert!(
                    (fwd - bwd).abs() <= 1e-12 * fwd.abs().max(1.0),
                    "duality broke: {fwd} vs {bwd}"
                );
                assert!(fwd >= 0.0);
                assert!(fwd <= 1.0 / (alpha * (1.0 - alpha)) + 1e-12);
            }
        }
    }
}
