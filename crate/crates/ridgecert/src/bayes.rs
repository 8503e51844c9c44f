//! Data-free feature detection for Bayesian inverse problems.
//!
//! Before any data arrive, the expected informativeness of each direction
//! is captured by averaging the Fisher information of the observation
//! model over the prior:
//!
//!   H_DF = E_μ[ I(x) ],   I(x) = ∇G(x)ᵀ Γ^{−1} ∇G(x)
//!
//! for Gaussian noise. The leading eigenvectors of H_DF give a single
//! feature subspace whose truncation error is certified in expectation
//! over the data, with the data-free bound family.

use std::sync::Arc;

use crate::bounds::{certify, BoundFamily, Certificate};
use crate::diagnostic::{DiagnosticMatrix, FeatureSubspace, Spectrum};
use crate::divergence::DivergenceEstimate;
use crate::error::{Result, RidgeError};
use crate::linalg::{self, Mat};
use crate::measures::{normal_matrix, ReferenceMeasure, SobolevBudget, TargetModel};
use crate::numeric::{mean_var, mix_seed};
use crate::profile::{d_alpha_opt, ProfileSpec};

pub type ForwardFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ForwardJacFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;
pub type FisherFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;

/// The statistical model for the observations.
#[derive(Clone)]
pub enum NoiseFamily {
    /// y = G(x) + ε, ε ~ N(0, Γ): Fisher information in closed form.
    GaussianNoise,
    /// Any other model via a user-supplied Fisher information callback;
    /// supports only the data-free path (no likelihoods, no data draws).
    UserFisher(FisherFn),
}

/// A Bayesian inverse problem: prior, forward map, and noise model.
#[derive(Clone)]
pub struct BayesModel {
    prior: ReferenceMeasure,
    forward: ForwardFn,
    forward_jac: ForwardJacFn,
    noise_chol: Mat,
    family: NoiseFamily,
    data_dim: usize,
}

impl BayesModel {
    /// Gaussian-noise model. Fails if the noise covariance is not SPD.
    pub fn gaussian_noise(
        prior: ReferenceMeasure,
        forward: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        forward_jac: impl Fn(&[f64]) -> Mat + Send + Sync + 'static,
        noise_cov: Mat,
    ) -> Result<BayesModel> {
        if !noise_cov.is_square() {
            return Err(RidgeError::Dimension("noise covariance must be square".into()));
        }
        let data_dim = noise_cov.rows();
        let noise_chol = linalg::cholesky(&noise_cov)
            .map_err(|_| RidgeError::Domain("noise covariance must be SPD".into()))?;
        Ok(BayesModel {
            prior,
            forward: Arc::new(forward),
            forward_jac: Arc::new(forward_jac),
            noise_chol,
            family: NoiseFamily::GaussianNoise,
            data_dim,
        })
    }

    /// Non-Gaussian model known only through its Fisher information.
    pub fn with_fisher(
        prior: ReferenceMeasure,
        fisher: impl Fn(&[f64]) -> Mat + Send + Sync + 'static,
    ) -> BayesModel {
        BayesModel {
            prior,
            forward: Arc::new(|_x: &[f64]| Vec::new()),
            forward_jac: Arc::new(move |_x: &[f64]| Mat::zeros(0, 0)),
            noise_chol: Mat::zeros(0, 0),
            family: NoiseFamily::UserFisher(Arc::new(fisher)),
            data_dim: 0,
        }
    }

    pub fn prior(&self) -> &ReferenceMeasure {
        &self.prior
    }

    pub fn state_dim(&self) -> usize {
        self.prior.dim()
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (self.forward)(x)
    }

    pub fn forward_jac(&self, x: &[f64]) -> Mat {
        (self.forward_jac)(x)
    }

    /// Max deviation between the supplied Jacobian and central finite
    /// differences of the forward map at x, step h.
    pub fn jacobian_residual(&self, x: &[f64], h: f64) -> f64 {
        let d = x.len();
        let jac = self.forward_jac(x);
        let mut worst: f64 = 0.0;
        for j in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let gp = self.forward(&xp);
            let gm = self.forward(&xm);
            for i in 0..gp.len() {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                worst = worst.max((fd - jac.get(i, j)).abs());
            }
        }
        worst
    }

    fn require_gaussian(&self, op: &str) -> Result<()> {
        match self.family {
            NoiseFamily::GaussianNoise => Ok(()),
            NoiseFamily::UserFisher(_) => Err(RidgeError::Unsupported(format!(
                "{op} needs the Gaussian noise family"
            ))),
        }
    }

    /// log ℓ^y(x) = −½ (y − G(x))ᵀ Γ^{−1} (y − G(x)), the unnormalized
    /// log-likelihood of state x for data y.
    pub fn log_likelihood(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.require_gaussian("log_likelihood")?;
        let g = self.forward(x);
        if g.len() != y.len() || y.len() != self.data_dim {
            return Err(RidgeError::Dimension("data dimension mismatch".into()));
        }
        let r: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - b).collect();
        let w = linalg::solve_lower(&self.noise_chol, &r);
        Ok(-0.5 * w.iter().map(|v| v * v).sum::<f64>())
    }

    /// ∇_x log ℓ^y(x) = ∇G(x)ᵀ Γ^{−1} (y − G(x)).
    pub fn grad_log_likelihood(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.require_gaussian("grad_log_likelihood")?;
        let g = self.forward(x);
        let r: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - b).collect();
        let s = linalg::solve_cholesky(&self.noise_chol, &r);
        Ok(self.forward_jac(x).tr_matvec(&s))
    }

    /// One draw y | x from the observation model.
    pub fn sample_data(&self, x: &[f64], seed: u64) -> Result<Vec<f64>> {
        self.require_gaussian("sample_data")?;
        let z = normal_matrix(1, self.data_dim, seed);
        let g = self.forward(x);
        let mut y = g;
        for i in 0..self.data_dim {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.noise_chol.get(i, j) * z.get(0, j);
            }
            y[i] += acc;
        }
        Ok(y)
    }

    /// The posterior target for a fixed data realization, as consumed by
    /// the sampling-based modules.
    pub fn target_for_data(&self, y: &[f64]) -> Result<TargetModel> {
        self.require_gaussian("target_for_data")?;
        if y.len() != self.data_dim {
            return Err(RidgeError::Dimension("data dimension mismatch".into()));
        }
        let m1 = self.clone();
        let m2 = self.clone();
        let y1 = y.to_vec();
        let y2 = y.to_vec();
        Ok(TargetModel::new(
            self.state_dim(),
            move |x| m1.log_likelihood(x, &y1).unwrap_or(f64::NAN),
            move |x| {
                m2.grad_log_likelihood(x, &y2)
                    .unwrap_or_else(|_| vec![f64::NAN; x.len()])
            },
        ))
    }
}

/// Fisher information of the observation model at state x.
pub fn fisher_info(model: &BayesModel, x: &[f64]) -> Result<Mat> {
    if x.len() != model.state_dim() {
        return Err(RidgeError::Dimension("state dimension mismatch".into()));
    }
    match &model.family {
        NoiseFamily::UserFisher(f) => {
            let i = f(x);
            if !i.is_square() || i.rows() != model.state_dim() {
                return Err(RidgeError::Dimension(
                    "fisher callback must return a d-by-d matrix".into(),
                ));
            }
            Ok(i.symmetrized())
        }
        NoiseFamily::GaussianNoise => {
            let jac = model.forward_jac(x);
            if jac.rows() != model.data_dim() || jac.cols() != model.state_dim() {
                return Err(RidgeError::Dimension(
                    "forward Jacobian must be m-by-d".into(),
                ));
            }
            let d = jac.cols();
            // K = Gamma^{-1} J column by column through the factor
            let mut k = Mat::zeros(jac.rows(), d);
            for j in 0..d {
                let col = linalg::solve_cholesky(&model.noise_chol, &jac.col(j));
                for i in 0..jac.rows() {
                    k.set(i, j, col[i]);
                }
            }
            Ok(jac.transpose().matmul(&k).symmetrized())
        }
    }
}

/// The data-free diagnostic matrix H_DF = (1/n) Σ I(x_i) over prior
/// draws. Plain unweighted Monte Carlo; n_eff = n.
pub fn estimate_h_df(model: &BayesModel, n: usize, seed: u64) -> Result<DiagnosticMatrix> {
    if n == 0 {
        return Err(RidgeError::Domain("n must be >= 1".into()));
    }
    let d = model.state_dim();
    let xs = model.prior().sample(n, seed)?;
    let mut acc = Mat::zeros(d, d);
    for i in 0..n {
        let fi = fisher_info(model, xs.row(i))?;
        for a in 0..d {
            for b in a..d {
                acc.set(a, b, acc.get(a, b) + fi.get(a, b));
            }
        }
    }
    let inv = 1.0 / n as f64;
    let mut h = Mat::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let v = acc.get(a, b) * inv;
            h.set(a, b, v);
            h.set(b, a, v);
        }
    }
    if !h.all_finite() {
        return Err(RidgeError::Numerical(
            "data-free diagnostic matrix has non-finite entries".into(),
        ));
    }
    Ok(DiagnosticMatrix { h, n_eff: n as f64 })
}

/// Expectation-over-data certificate on the truncation loss:
/// E_Y[D_α(π^Y‖π^{Y,opt}_{α,r})] ≤ J^DF_α(C^sub_{min(1/α,2)} Σ_{k>r} λ_k(H_DF)).
pub fn certify_datafree(
    alpha: f64,
    budget: &SobolevBudget,
    spec_of_h_df: &Spectrum,
    r: usize,
) -> Result<Certificate> {
    certify(alpha, BoundFamily::DataFree, budget, spec_of_h_df, r)
}

/// Direct Monte Carlo estimate of the averaged divergence: draws
/// (x, y) from the joint prior-predictive, then for each realization
/// estimates D_α(π^y‖π^{y,opt}_{α,r}) with a √n_mc by √n_mc nested
/// budget, and averages. The standard error is the spread of the
/// per-realization estimates (their individual MC noise is independent
/// across realizations and therefore included).
pub fn averaged_divergence_mc(
    model: &BayesModel,
    alpha: f64,
    subspace: &FeatureSubspace,
    n_data: usize,
    n_mc: usize,
    seed: u64,
) -> Result<DivergenceEstimate> {
    model.require_gaussian("averaged_divergence_mc")?;
    if n_data == 0 {
        return Err(RidgeError::Domain("n_data must be >= 1".into()));
    }
    let side = (n_mc as f64).sqrt().round().max(1.0) as usize;
    let xs = model.prior().sample(n_data, mix_seed(seed, 0xA0))?;
    let mut values = Vec::with_capacity(n_data);
    for k in 0..n_data {
        let y = model.sample_data(xs.row(k), mix_seed(seed, 0xB0 + k as u64))?;
        let target = model.target_for_data(&y)?;
        let spec = ProfileSpec::new(
            alpha,
            subspace.clone(),
            side,
            mix_seed(seed, 0xC0 + k as u64),
        )?;
        let d = d_alpha_opt(&target, model.prior(), &spec, side)?;
        values.push(d.value);
    }
    let (m, var) = mean_var(&values);
    let se = if n_data > 1 { (var / n_data as f64).sqrt() } else { f64::INFINITY };
    Ok(DivergenceEstimate {
        alpha,
        value: m,
        std_error: se,
        n_samples: n_data,
    })
}
