//! Closed-form linear-Gaussian oracle. For the model y = Ax + ε with
//! ε ~ N(0, I), prior N(0, I), and the data realization fixed at y = 0,
//! everything downstream has an exact expression in the eigenpairs
//! (γ_k, u_k) of AᵀA:
//!
//!   posterior  Σ = (I + AᵀA)^{−1}
//!   diagnostic H = AᵀA(I + AᵀA)^{−1}AᵀA, eigenvalues λ_k = γ_k²/(1+γ_k)
//!   truncated-posterior KL and squared Hellinger losses in closed form.
//!
//! The inverse map γ_k = ½(λ_k + √λ_k √(λ_k+4)) lets a problem be
//! synthesized with any requested diagnostic spectrum, which is how the
//! certified bounds get stress-tested against exact losses.

use crate::diagnostic::DiagnosticMatrix;
use crate::error::{Result, RidgeError};
use crate::linalg::{qr_thin, Mat};
use crate::measures::{normal_matrix, ReferenceMeasure, TargetModel};
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone)]
pub struct LinGaussProblem {
    a: Mat,
    gamma: Vec<f64>,
    u: Mat,
    lambda: Vec<f64>,
}

fn lambda_of_gamma(g: f64) -> f64 {
    g * g / (1.0 + g)
}

impl LinGaussProblem {
    /// Problem with a given forward matrix; eigenstructure comes from
    /// AᵀA.
    pub fn from_matrix(a: Mat) -> Result<LinGaussProblem> {
        let gram = a.transpose().matmul(&a);
        let spec = crate::diagnostic::eigh(&DiagnosticMatrix {
            h: gram,
            n_eff: f64::INFINITY,
        })?;
        let gamma: Vec<f64> = spec.eigenvalues.iter().map(|&g| g.max(0.0)).collect();
        let lambda = gamma.iter().map(|&g| lambda_of_gamma(g)).collect();
        Ok(LinGaussProblem { a, gamma, u: spec.eigenvectors, lambda })
    }

    /// Synthesizes a square problem whose diagnostic matrix has exactly
    /// the requested eigenvalues: A = diag(√γ)Uᵀ with
    /// γ_k = ½(λ_k + √λ_k √(λ_k + 4)). The basis, if not supplied, is
    /// drawn Haar-like from a seeded QR factorization.
    pub fn from_spectrum(lambdas: &[f64], basis: Option<Mat>, seed: u64) -> Result<LinGaussProblem> {
        let d = lambdas.len();
        if d == 0 {
            return Err(RidgeError::Domain("spectrum must be nonempty".into()));
        }
        for w in lambdas.windows(2) {
            if w[1] > w[0] {
                return Err(RidgeError::Domain("spectrum must be non-increasing".into()));
            }
        }
        if lambdas.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(RidgeError::Domain("spectrum entries must be finite and >= 0".into()));
        }
        let u = match basis {
            Some(b) => {
                if b.rows() != d || b.cols() != d {
                    return Err(RidgeError::Dimension("basis must be d-by-d".into()));
                }
                let gram = b.transpose().matmul(&b).sub(&Mat::identity(d));
                if gram.frob_norm() > 1e-10 * (d as f64).sqrt() {
                    return Err(RidgeError::Domain("basis must be orthonormal".into()));
                }
                b
            }
            None => {
                let (q, _r) = qr_thin(&normal_matrix(d, d, seed))?;
                q
            }
        };
        let gamma: Vec<f64> = lambdas
            .iter()
            .map(|&l| 0.5 * (l + l.sqrt() * (l + 4.0).sqrt()))
            .collect();
        // A = diag(sqrt(gamma)) U^T
        let a = Mat::from_fn(d, d, |i, j| gamma[i].sqrt() * u.get(j, i));
        Ok(LinGaussProblem { a, gamma, u, lambda: lambdas.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn basis(&self) -> &Mat {
        &self.u
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// U diag(v) Uᵀ assembled symmetrically.
    fn in_basis(&self, v: &[f64]) -> Mat {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += self.u.get(i, k) * v[k] * self.u.get(j, k);
                }
                m.set(i, j, acc);
                m.set(j, i, acc);
            }
        }
        m
    }

    /// Posterior covariance (I + AᵀA)^{−1}.
    pub fn posterior_cov(&self) -> Mat {
        let v: Vec<f64> = self.gamma.iter().map(|&g| 1.0 / (1.0 + g)).collect();
        self.in_basis(&v)
    }

    /// The likelihood target at the oracle's data realization y = 0:
    /// log ℓ(x) = −½‖Ax‖².
    pub fn target_model(&self) -> TargetModel {
        let a1 = self.a.clone();
        let a2 = self.a.clone();
        TargetModel::new(
            self.dim(),
            move |x| {
                let ax = a1.matvec(x);
                -0.5 * ax.iter().map(|v| v * v).sum::<f64>()
            },
            move |x| {
                let ax = a2.matvec(x);
                let atax = a2.tr_matvec(&ax);
                atax.iter().map(|v| -v).collect()
            },
        )
    }

    /// The prior as a reference measure.
    pub fn reference(&self) -> ReferenceMeasure {
        ReferenceMeasure::standard_gaussian(self.dim())
    }
}

/// λ_k ∝ k^{−exponent}, scaled so the eigenvalue sum equals `trace`.
pub fn algebraic_spectrum(d: usize, exponent: f64, trace: f64) -> Result<Vec<f64>> {
    if d == 0 || !(exponent > 0.0) || !(trace >= 0.0) {
        return Err(RidgeError::Domain(
            "need d >= 1, exponent > 0, trace >= 0".into(),
        ));
    }
    let raw: Vec<f64> = (1..=d).map(|k| (k as f64).powf(-exponent)).collect();
    let s = pairwise_sum(&raw);
    Ok(raw.into_iter().map(|v| v * trace / s).collect())
}

/// λ_k ∝ ratio^k, ratio ∈ (0,1), scaled so the eigenvalue sum equals
/// `trace`.
pub fn exponential_spectrum(d: usize, ratio: f64, trace: f64) -> Result<Vec<f64>> {
    if d == 0 || !(ratio > 0.0 && ratio < 1.0) || !(trace >= 0.0) {
        return Err(RidgeError::Domain(
            "need d >= 1, ratio in (0,1), trace >= 0".into(),
        ));
    }
    let raw: Vec<f64> = (1..=d).map(|k| ratio.powi(k as i32)).collect();
    let s = pairwise_sum(&raw);
    Ok(raw.into_iter().map(|v| v * trace / s).collect())
}

/// Exact diagnostic matrix H = U diag(λ) Uᵀ. Exact computation, so
/// n_eff is reported as infinite.
pub fn exact_h(p: &LinGaussProblem) -> DiagnosticMatrix {
    DiagnosticMatrix {
        h: p.in_basis(&p.lambda),
        n_eff: f64::INFINITY,
    }
}

fn check_rank(p: &LinGaussProblem, r: usize) -> Result<()> {
    if r > p.dim() {
        return Err(RidgeError::Domain(format!(
            "rank {r} exceeds dimension {}",
            p.dim()
        )));
    }
    Ok(())
}

/// KL divergence of the truncated posterior:
/// D_KL(π‖π^opt_r) = ½ Σ_{k>r} (ln(1+γ_k) − γ_k/(1+γ_k)).
pub fn exact_kl(p: &LinGaussProblem, r: usize) -> Result<f64> {
    check_rank(p, r)?;
    let terms: Vec<f64> = p.gamma[r..]
        .iter()
        .map(|&g| g.ln_1p() - g / (1.0 + g))
        .collect();
    Ok(0.5 * pairwise_sum(&terms))
}

/// Squared Hellinger distance of the truncated posterior:
/// 1 − (Π_{k>r} (1+γ_k)/(1+γ_k/2)²)^{1/4}.
pub fn exact_hellinger2(p: &LinGaussProblem, r: usize) -> Result<f64> {
    check_rank(p, r)?;
    // log-domain product: each factor is (1+g)/(1+g/2)^2 <= 1
    let logs: Vec<f64> = p.gamma[r..]
        .iter()
        .map(|&g| g.ln_1p() - 2.0 * (g / 2.0).ln_1p())
        .collect();
    let v = -(0.25 * pairwise_sum(&logs)).exp_m1();
    Ok(v.clamp(0.0, 1.0))
}

/// Covariance of the best rank-r posterior approximation:
/// U diag((1+γ_k)^{−1} for k ≤ r, 1 for k > r) Uᵀ. The same matrix is
/// optimal for every divergence order α ≠ 0.
pub fn optimal_covariance(p: &LinGaussProblem, r: usize) -> Result<Mat> {
    check_rank(p, r)?;
    let v: Vec<f64> = p
        .gamma
        .iter()
        .enumerate()
        .map(|(k, &g)| if k < r { 1.0 / (1.0 + g) } else { 1.0 })
        .collect();
    Ok(p.in_basis(&v))
}
