//! Gradient-based detection of the few directions a likelihood actually
//! depends on, with certified bounds on the approximation error of
//! ignoring the rest.
//!
//! The workflow: collect score gradients ∇log ℓ into a [`GradientBatch`],
//! form the diagnostic matrix H = E[∇log ℓ ∇log ℓᵀ], take its leading
//! eigenvectors as the feature subspace U_r, and certify the divergence
//! loss of the best reduced target supported on those features by
//! J(C · Σ_{k>r} λ_k), where C is a subspace Sobolev constant of the
//! reference measure and the λ_k are the trailing eigenvalues. The loss
//! is measured in the Amari α-divergence family, α ∈ (0, 1]; α = 1 is
//! KL and α = ½ is four times squared Hellinger.
//!
//! What lives where:
//! - [`measures`]: reference measures, conditional sampling, Sobolev
//!   constant budgets; target models as log-likelihood callbacks.
//! - [`diagnostic`]: gradient batches (CSV/binary), the estimated H,
//!   spectra, feature selection, eigenvalue tails.
//! - [`divergence`]: α-divergences, Monte Carlo and Gaussian closed
//!   forms.
//! - [`profile`]: the optimal reduced target (conditional power mean of
//!   ℓ), its normalizing ratio, the Pythagorean identity, and the
//!   quasi-optimality sandwich.
//! - [`bounds`]: the certificate families J, J♭, J^DF, Pinsker TV, and
//!   the 1-D β-Sobolev checker.
//! - [`bayes`]: the data-free path for Bayesian inverse problems
//!   (Fisher information averaged over the prior).
//! - [`lingauss`]: the exact linear-Gaussian oracle used to validate
//!   everything end to end.
//! - [`quadrature`], [`linalg`], [`numeric`]: Gauss-Hermite rules and
//!   the self-contained dense linear algebra and summation kernels.
//!
//! Every sampling operation takes an explicit seed and is deterministic
//! for a fixed seed; estimators report delta-method standard errors.

pub mod bayes;
pub mod bounds;
pub mod commands;
pub mod config;
pub mod diagnostic;
pub mod divergence;
pub mod error;
pub mod lingauss;
pub mod linalg;
pub mod measures;
pub mod numeric;
pub mod profile;
pub mod quadrature;

pub use bayes::{averaged_divergence_mc, certify_datafree, estimate_h_df, fisher_info, BayesModel};
pub use bounds::{certify, certify_tv, j_basic, j_datafree, j_improved, sobolev_check_1d, BoundFamily, Certificate};
pub use diagnostic::{
    effective_rank, eigh, estimate_h, estimate_h_phi, generalized_eig, select_features, tail_sum,
    DiagnosticMatrix, FeatureSubspace, GradientBatch, Spectrum,
};
pub use divergence::{
    d_alpha_mc, gaussian_d_alpha, phi_alpha, phi_entropy, DivergenceEstimate,
};
pub use error::{Result, RidgeError};
pub use lingauss::{
    algebraic_spectrum, exact_h, exact_hellinger2, exact_kl, exponential_spectrum,
    optimal_covariance, LinGaussProblem,
};
pub use linalg::Mat;
pub use measures::{ReferenceMeasure, SobolevBudget, TargetModel};
pub use profile::{
    d_alpha_opt, eval_profile, pythagorean_residual, quasi_optimality_gap, z_ratio, Estimate,
    ProfileSpec, PythagoreanReport, QuasiOptimality, ReducedMeasure,
};
pub use quadrature::GaussHermite;
