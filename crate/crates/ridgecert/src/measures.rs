//! Target and reference measures.
//!
//! A target is specified by an unnormalized positive weight ℓ against a
//! reference measure μ: dπ ∝ ℓ dμ. Code in this crate only ever touches
//! log ℓ and ∇log ℓ, so the target type stores those two callbacks plus the
//! ambient dimension. The reference measure supports plain i.i.d. sampling
//! and, for Gaussian kinds, exact sampling conditioned on the coordinates
//! U_r^T x = θ_r of an orthonormal feature frame.
//!
//! Conditioning for a general Gaussian N(0,Σ) goes through the whitening
//! map: with S = Σ^{1/2} and W = S U_r = Q R (thin QR), the constraint
//! U_r^T S z = θ becomes Q^T z = R^{-T} θ on the whitened variable z, so
//! z = Q R^{-T} θ + Q_⊥ ξ with ξ standard normal, and x = S z. This reuses
//! the isotropic path instead of Schur-complement algebra on the affine
//! slice, and it is exact: U_r^T x = θ up to rounding.
//!
//! Every reference measure carries a `SobolevBudget`: certified subspace
//! φ-Sobolev constants consumed by the bounds module. For Gaussians these
//! are analytic (1 for the standard Gaussian, the largest eigenvalue of Σ
//! otherwise); custom measures must supply their own budget, either
//! directly or through the exp(osc B)/R perturbation rule.

use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use crate::diagnostic::FeatureSubspace;
use crate::error::{Result, RidgeError};
use crate::linalg::{self, Mat};
use crate::numeric;

pub type LogLikelihoodFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradLogLikelihoodFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type SamplerFn = Arc<dyn Fn(usize, u64) -> Mat + Send + Sync>;

/// Unnormalized target dπ ∝ ℓ dμ, given as log ℓ and ∇log ℓ.
#[derive(Clone)]
pub struct TargetModel {
    dim: usize,
    log_l: LogLikelihoodFn,
    grad_log_l: GradLogLikelihoodFn,
}

impl TargetModel {
    pub fn new(
        dim: usize,
        log_l: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad_log_l: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> TargetModel {
        TargetModel {
            dim,
            log_l: Arc::new(log_l),
            grad_log_l: Arc::new(grad_log_l),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn log_l(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.log_l)(x)
    }

    pub fn grad_log_l(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.grad_log_l)(x)
    }

    /// Largest deviation between the supplied gradient and a central finite
    /// difference of log ℓ at x with step h. Used by tests to enforce the
    /// consistency contract between the two callbacks.
    pub fn gradient_residual(&self, x: &[f64], h: f64) -> f64 {
        let g = self.grad_log_l(x);
        let mut worst = 0.0f64;
        let mut xp = x.to_vec();
        for i in 0..self.dim {
            xp[i] = x[i] + h;
            let fp = self.log_l(&xp);
            xp[i] = x[i] - h;
            let fm = self.log_l(&xp);
            xp[i] = x[i];
            worst = worst.max(((fp - fm) / (2.0 * h) - g[i]).abs());
        }
        worst
    }
}

/// Provenance of a Sobolev budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetSource {
    Analytic,
    /// Log-concave base with convexity parameter R, perturbed by a bounded
    /// potential B with oscillation osc_B; both constants are exp(osc_B)/R.
    BakryEmeryHolleyStroock {
        r: f64,
        osc_b: f64,
    },
    UserSupplied,
}

/// Certified subspace φ-Sobolev constants of a reference measure.
///
/// `c1_sub` certifies the β=1 (log-Sobolev) inequality, `c2_sub` the β=2
/// (Poincaré) inequality; intermediate and larger β are covered by the
/// interpolation / scaling rules in [`SobolevBudget::c_beta_sub`].
#[derive(Debug, Clone, Copy)]
pub struct SobolevBudget {
    pub c1_sub: f64,
    pub c2_sub: f64,
    pub source: BudgetSource,
}

impl SobolevBudget {
    pub fn user_supplied(c1_sub: f64, c2_sub: f64) -> Result<SobolevBudget> {
        if !(c1_sub >= 0.0 && c2_sub >= 0.0) || !c1_sub.is_finite() || !c2_sub.is_finite() {
            return Err(RidgeError::Domain(
                "Sobolev constants must be finite and nonnegative".into(),
            ));
        }
        Ok(SobolevBudget {
            c1_sub,
            c2_sub,
            source: BudgetSource::UserSupplied,
        })
    }

    pub fn standard_gaussian() -> SobolevBudget {
        SobolevBudget {
            c1_sub: 1.0,
            c2_sub: 1.0,
            source: BudgetSource::Analytic,
        }
    }

    /// Budget for a measure whose log density is an R-strongly-concave part
    /// plus a bounded perturbation B: both constants are exp(osc_B)/R.
    pub fn bakry_emery_holley_stroock(r: f64, osc_b: f64) -> Result<SobolevBudget> {
        if !(r > 0.0) || !(osc_b >= 0.0) {
            return Err(RidgeError::Domain(
                "need R > 0 and osc_B >= 0 for the perturbation rule".into(),
            ));
        }
        let c = osc_b.exp() / r;
        Ok(SobolevBudget {
            c1_sub: c,
            c2_sub: c,
            source: BudgetSource::BakryEmeryHolleyStroock { r, osc_b },
        })
    }

    /// Certified constant for the β-Sobolev inequality.
    ///
    /// β in [1,2] is covered by max(c1, c2); β > 2 by the scaling rule
    /// (β/2)·c2. β < 1 is a domain error: no such inequality holds even for
    /// the Gaussian measure.
    pub fn c_beta_sub(&self, beta: f64) -> Result<f64> {
        if !beta.is_finite() || beta < 1.0 {
            return Err(RidgeError::Domain(format!(
                "beta-Sobolev constants are only defined for beta >= 1 (got {beta})"
            )));
        }
        if beta <= 2.0 {
            Ok(self.c1_sub.max(self.c2_sub))
        } else {
            Ok(0.5 * beta * self.c2_sub)
        }
    }
}

#[derive(Clone)]
enum Kind {
    StandardGaussian,
    Gaussian {
        cov: Mat,
        chol: Mat,
        sqrt: Mat,
    },
    Custom {
        sampler: Option<SamplerFn>,
    },
}

/// Reference probability measure μ on R^d.
#[derive(Clone)]
pub struct ReferenceMeasure {
    dim: usize,
    kind: Kind,
    budget: SobolevBudget,
}

impl ReferenceMeasure {
    pub fn standard_gaussian(dim: usize) -> ReferenceMeasure {
        ReferenceMeasure {
            dim,
            kind: Kind::StandardGaussian,
            budget: SobolevBudget::standard_gaussian(),
        }
    }

    /// Centered Gaussian with SPD covariance. The budget is the analytic
    /// bound lambda_max(cov) for both constants.
    pub fn gaussian(cov: Mat) -> Result<ReferenceMeasure> {
        if !cov.is_square() {
            return Err(RidgeError::Dimension("covariance must be square".into()));
        }
        let chol = cholesky_or_domain(&cov)?;
        let sqrt = linalg::sym_sqrt(&cov)?;
        let (vals, _) = linalg::sym_eigh_desc(&cov)?;
        let lmax = vals[0];
        Ok(ReferenceMeasure {
            dim: cov.rows(),
            kind: Kind::Gaussian { cov, chol, sqrt },
            budget: SobolevBudget {
                c1_sub: lmax,
                c2_sub: lmax,
                source: BudgetSource::Analytic,
            },
        })
    }

    /// Opaque measure given by a sampler (optional) and a user-certified
    /// Sobolev budget. Conditional sampling is not available.
    pub fn custom(dim: usize, sampler: Option<SamplerFn>, budget: SobolevBudget) -> ReferenceMeasure {
        ReferenceMeasure {
            dim,
            kind: Kind::Custom { sampler },
            budget,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sobolev_budget(&self) -> &SobolevBudget {
        &self.budget
    }

    pub fn covariance(&self) -> Mat {
        match &self.kind {
            Kind::StandardGaussian => Mat::identity(self.dim),
            Kind::Gaussian { cov, .. } => cov.clone(),
            Kind::Custom { .. } => Mat::identity(self.dim),
        }
    }

    /// n i.i.d. draws, one per row. Deterministic in the seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Mat> {
        if n == 0 {
            return Err(RidgeError::Domain("need at least one sample".into()));
        }
        match &self.kind {
            Kind::StandardGaussian => Ok(normal_matrix(n, self.dim, seed)),
            Kind::Gaussian { chol, .. } => {
                let z = normal_matrix(n, self.dim, seed);
                // x_i = L z_i, row-wise: X = Z L^T
                Ok(z.matmul(&chol.transpose()))
            }
            Kind::Custom { sampler } => match sampler {
                Some(s) => {
                    let out = s(n, seed);
                    if out.rows() != n || out.cols() != self.dim {
                        return Err(RidgeError::Dimension(
                            "custom sampler returned wrong shape".into(),
                        ));
                    }
                    Ok(out)
                }
                None => Err(RidgeError::Unsupported(
                    "custom reference measure has no sampler".into(),
                )),
            },
        }
    }

    /// n draws from μ conditioned on U_r^T X = theta. Exact for Gaussian
    /// kinds; unsupported for custom measures.
    pub fn sample_conditional(
        &self,
        subspace: &FeatureSubspace,
        theta: &[f64],
        n: usize,
        seed: u64,
    ) -> Result<Mat> {
        if n == 0 {
            return Err(RidgeError::Domain("need at least one sample".into()));
        }
        if subspace.dim() != self.dim {
            return Err(RidgeError::Dimension(format!(
                "subspace lives in dimension {}, measure in {}",
                subspace.dim(),
                self.dim
            )));
        }
        let r = subspace.r();
        if theta.len() != r {
            return Err(RidgeError::Dimension(format!(
                "theta has length {}, expected r = {r}",
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(RidgeError::Domain("conditioning point must be finite".into()));
        }
        match &self.kind {
            Kind::StandardGaussian => {
                // x = U_r theta + U_perp xi
                let base = subspace.u_r().matvec(theta);
                let xi = normal_matrix(n, self.dim - r, seed);
                let mut out = Mat::zeros(n, self.dim);
                let u_perp = subspace.u_perp();
                for i in 0..n {
                    let tail = u_perp.matvec(xi.row(i));
                    for j in 0..self.dim {
                        out.set(i, j, base[j] + tail[j]);
                    }
                }
                Ok(out)
            }
            Kind::Gaussian { sqrt, .. } => {
                let w = sqrt.matmul(subspace.u_r());
                let (q, rmat) = if r > 0 {
                    linalg::qr_thin(&w)?
                } else {
                    (Mat::zeros(self.dim, 0), Mat::zeros(0, 0))
                };
                let q_perp = linalg::orthonormal_completion(&q)?;
                // Solve R^T eta = theta, then z = Q eta + Q_perp xi.
                let eta = if r > 0 {
                    upper_transpose_solve(&rmat, theta)
                } else {
                    Vec::new()
                };
                let base_z = if r > 0 { q.matvec(&eta) } else { vec![0.0; self.dim] };
                let xi = normal_matrix(n, self.dim - r, seed);
                let mut out = Mat::zeros(n, self.dim);
                for i in 0..n {
                    let mut z = base_z.clone();
                    if self.dim > r {
                        let tail = q_perp.matvec(xi.row(i));
                        for (zj, tj) in z.iter_mut().zip(&tail) {
                            *zj += tj;
                        }
                    }
                    let x = sqrt.matvec(&z);
                    for j in 0..self.dim {
                        out.set(i, j, x[j]);
                    }
                }
                Ok(out)
            }
            Kind::Custom { .. } => Err(RidgeError::Unsupported(
                "conditional sampling needs a Gaussian reference measure".into(),
            )),
        }
    }
}

fn cholesky_or_domain(cov: &Mat) -> Result<Mat> {
    linalg::cholesky(cov).map_err(|_| {
        RidgeError::Domain("Gaussian covariance must be symmetric positive definite".into())
    })
}

/// Solve R^T y = b for upper-triangular R (forward substitution on R^T).
fn upper_transpose_solve(r: &Mat, b: &[f64]) -> Vec<f64> {
    let n = r.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| r.get(k, i) * y[k]).sum();
        y[i] = (b[i] - s) / r.get(i, i);
    }
    y
}

/// n×d matrix of standard normals from one ChaCha stream.
pub(crate) fn normal_matrix(n: usize, d: usize, seed: u64) -> Mat {
    let mut rng = numeric::stream_rng(seed);
    let mut m = Mat::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            m.set(i, j, z);
        }
    }
    m
}
