//! Diagnostic matrices from gradient samples, their spectra, and feature
//! subspace selection.
//!
//! The central object is H = E_π[∇log ℓ ∇log ℓᵀ], estimated from a batch of
//! gradients by self-normalized importance weighting: a batch drawn from
//! the reference measure carries log_weights = log ℓ(x_i), a batch already
//! distributed like the target carries zero log weights. Both conventions
//! go through the same estimator, which only ever sees softmax(log_weights).
//! Which integration measure is preferable is an open modelling question,
//! so the batch constructors expose both and neither is canonical.
//!
//! Rank-r feature frames are the leading eigenvector blocks of H. The
//! eigendecomposition is done in-repo (cyclic Jacobi, see `linalg`), with
//! descending order, normalized signs, deterministic tie-breaking, and a
//! residual self-check, so the subspace and the certificate tails derived
//! from a given batch are bit-reproducible.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, RidgeError};
use crate::linalg::{self, Mat};
use crate::measures::{ReferenceMeasure, TargetModel};
use crate::numeric::pairwise_sum;

/// Sampled gradients of log ℓ with log importance weights.
#[derive(Debug, Clone)]
pub struct GradientBatch {
    points: Mat,
    grads: Mat,
    log_weights: Vec<f64>,
}

impl GradientBatch {
    /// Points and gradients must be finite; log weights may be -inf (zero
    /// weight) but not NaN or +inf.
    pub fn new(points: Mat, grads: Mat, log_weights: Vec<f64>) -> Result<GradientBatch> {
        let n = points.rows();
        if n == 0 {
            return Err(RidgeError::Domain("batch needs at least one sample".into()));
        }
        if grads.rows() != n || grads.cols() != points.cols() || log_weights.len() != n {
            return Err(RidgeError::Dimension(
                "points, grads and log_weights disagree on n or d".into(),
            ));
        }
        if !points.all_finite() || !grads.all_finite() {
            return Err(RidgeError::Domain(
                "points and gradients must be finite".into(),
            ));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(RidgeError::Domain(
                "log weights must not be NaN or +inf".into(),
            ));
        }
        Ok(GradientBatch {
            points,
            grads,
            log_weights,
        })
    }

    /// Batch whose points are already distributed like the target.
    pub fn unweighted(points: Mat, grads: Mat) -> Result<GradientBatch> {
        let n = points.rows();
        GradientBatch::new(points, grads, vec![0.0; n])
    }

    /// Draw n reference samples and record ∇log ℓ with log ℓ as weight, so
    /// that the weighted batch integrates against the target measure.
    pub fn from_target_samples(
        target: &TargetModel,
        mu: &ReferenceMeasure,
        n: usize,
        seed: u64,
    ) -> Result<GradientBatch> {
        let points = mu.sample(n, seed)?;
        let d = points.cols();
        let mut grads = Mat::zeros(n, d);
        let mut log_weights = Vec::with_capacity(n);
        for i in 0..n {
            let x = points.row(i);
            let g = target.grad_log_l(x);
            for j in 0..d {
                grads.set(i, j, g[j]);
            }
            log_weights.push(target.log_l(x));
        }
        GradientBatch::new(points, grads, log_weights)
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Mat {
        &self.points
    }

    pub fn grads(&self) -> &Mat {
        &self.grads
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// CSV with header `x_1,..,x_d,g_1,..,g_d,log_w`, one row per sample,
    /// floats printed with 17 significant digits (round-trip exact).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.dim();
        let mut header = Vec::with_capacity(2 * d + 1);
        for j in 1..=d {
            header.push(format!("x_{j}"));
        }
        for j in 1..=d {
            header.push(format!("g_{j}"));
        }
        header.push("log_w".to_string());
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n() {
            let mut fields = Vec::with_capacity(2 * d + 1);
            for v in self.points.row(i) {
                fields.push(fmt_float(*v));
            }
            for v in self.grads.row(i) {
                fields.push(fmt_float(*v));
            }
            fields.push(fmt_float(self.log_weights[i]));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<GradientBatch> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| RidgeError::Config("empty gradient batch file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 3 || cols.len() % 2 == 0 {
            return Err(RidgeError::Config(format!(
                "gradient batch header must have 2d+1 columns, got {}",
                cols.len()
            )));
        }
        let d = (cols.len() - 1) / 2;
        for j in 0..d {
            if cols[j] != format!("x_{}", j + 1) || cols[d + j] != format!("g_{}", j + 1) {
                return Err(RidgeError::Config(format!(
                    "unexpected gradient batch column name {:?}",
                    cols[j.min(d + j)]
                )));
            }
        }
        if cols[2 * d] != "log_w" {
            return Err(RidgeError::Config(
                "last gradient batch column must be log_w".into(),
            ));
        }
        let mut points_rows = Vec::new();
        let mut grads_rows = Vec::new();
        let mut log_weights = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 * d + 1 {
                return Err(RidgeError::Config(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    2 * d + 1
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| RidgeError::Config(format!("unparseable float {s:?}")))
            };
            let mut x = Vec::with_capacity(d);
            let mut g = Vec::with_capacity(d);
            for j in 0..d {
                x.push(parse(fields[j])?);
                g.push(parse(fields[d + j])?);
            }
            log_weights.push(parse(fields[2 * d])?);
            points_rows.push(x);
            grads_rows.push(g);
        }
        if points_rows.is_empty() {
            return Err(RidgeError::Config("gradient batch file has no rows".into()));
        }
        GradientBatch::new(
            Mat::from_rows(&points_rows)?,
            Mat::from_rows(&grads_rows)?,
            log_weights,
        )
    }

    /// Raw little-endian format: 16-byte header (magic `RCGB`, u32 n,
    /// u32 d, 4 reserved zero bytes) followed by n records of
    /// x_1..x_d, g_1..g_d, log_w as f64.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(b"RCGB")?;
        out.write_all(&(self.n() as u32).to_le_bytes())?;
        out.write_all(&(self.dim() as u32).to_le_bytes())?;
        out.write_all(&[0u8; 4])?;
        for i in 0..self.n() {
            for v in self.points.row(i) {
                out.write_all(&v.to_le_bytes())?;
            }
            for v in self.grads.row(i) {
                out.write_all(&v.to_le_bytes())?;
            }
            out.write_all(&self.log_weights[i].to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<GradientBatch> {
        let mut buf = Vec::new();
        input.read_to_end(&mut buf)?;
        if buf.len() < 16 || &buf[0..4] != b"RCGB" {
            return Err(RidgeError::Config(
                "not a gradient batch binary file (bad magic)".into(),
            ));
        }
        let n = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
        let d = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
        let expect = 16 + n * (2 * d + 1) * 8;
        if buf.len() != expect {
            return Err(RidgeError::Config(format!(
                "gradient batch binary length {} does not match header (expected {expect})",
                buf.len()
            )));
        }
        let mut off = 16;
        let mut next = || {
            let v = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
            off += 8;
            v
        };
        let mut points = Mat::zeros(n, d);
        let mut grads = Mat::zeros(n, d);
        let mut log_weights = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..d {
                points.set(i, j, next());
            }
            for j in 0..d {
                grads.set(i, j, next());
            }
            log_weights.push(next());
        }
        GradientBatch::new(points, grads, log_weights)
    }

    pub fn read_path(path: &Path) -> Result<GradientBatch> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(b"RCGB") {
            GradientBatch::read_binary(&bytes[..])
        } else {
            GradientBatch::read_csv(&bytes[..])
        }
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Weighted second-moment matrix of the gradients plus the effective sample
/// size of the weights.
#[derive(Debug, Clone)]
pub struct DiagnosticMatrix {
    pub h: Mat,
    pub n_eff: f64,
}

/// Eigenvalues (descending) and eigenvectors (columns) of a diagnostic
/// matrix. Produced by [`eigh`] with orthonormal columns; produced by
/// [`generalized_eig`] with Σ^{-1}-orthonormal columns instead.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

/// Orthonormal feature frame U_r together with an orthonormal completion.
#[derive(Debug, Clone)]
pub struct FeatureSubspace {
    u_r: Mat,
    u_perp: Mat,
}

impl FeatureSubspace {
    /// Build from a d×r matrix with orthonormal columns; the complement is
    /// completed deterministically from the standard basis.
    pub fn from_basis(u_r: Mat) -> Result<FeatureSubspace> {
        let d = u_r.rows();
        let r = u_r.cols();
        if r > d {
            return Err(RidgeError::Dimension("more features than dimensions".into()));
        }
        if r > 0 {
            let gram = u_r.transpose().matmul(&u_r);
            let err = gram.sub(&Mat::identity(r)).frob_norm();
            if err > 1e-10 {
                return Err(RidgeError::Domain(format!(
                    "feature frame is not orthonormal (deviation {err:.2e})"
                )));
            }
        }
        let u_perp = linalg::orthonormal_completion(&u_r)?;
        Ok(FeatureSubspace { u_r, u_perp })
    }

    pub fn dim(&self) -> usize {
        self.u_r.rows()
    }

    pub fn r(&self) -> usize {
        self.u_r.cols()
    }

    pub fn u_r(&self) -> &Mat {
        &self.u_r
    }

    pub fn u_perp(&self) -> &Mat {
        &self.u_perp
    }

    /// θ_r = U_r^T x.
    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        self.u_r.tr_matvec(x)
    }
}

/// H = Σ w̃_i g_i g_iᵀ with w̃ = softmax(log_weights).
///
/// Accumulates the upper triangle and mirrors it, so the result is
/// symmetric exactly. n_eff is the Kish effective sample size 1/Σ w̃².
pub fn estimate_h(batch: &GradientBatch) -> Result<DiagnosticMatrix> {
    let weights = normalized_weights(batch.log_weights())?;
    Ok(weighted_second_moment(batch.grads(), &weights))
}

/// Softmax with -inf entries mapped to zero weight. Subtract-max then
/// divide-by-sum, not exp(w - logsumexp): the latter re-rounds the log
/// normalizer into each exponent and loses exact shift invariance.
fn normalized_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    let m = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Err(RidgeError::DegenerateWeights(
            "all log weights are -inf".into(),
        ));
    }
    let e: Vec<f64> = log_weights.iter().map(|&w| (w - m).exp()).collect();
    let s = pairwise_sum(&e);
    Ok(e.iter().map(|&x| x / s).collect())
}

fn weighted_second_moment(grads: &Mat, weights: &[f64]) -> DiagnosticMatrix {
    let d = grads.cols();
    let n = grads.rows();
    let mut h = Mat::zeros(d, d);
    for i in 0..n {
        let w = weights[i];
        if w == 0.0 {
            continue;
        }
        let g = grads.row(i);
        for a in 0..d {
            let wga = w * g[a];
            for b in a..d {
                let v = h.get(a, b) + wga * g[b];
                h.set(a, b, v);
            }
        }
    }
    for a in 0..d {
        for b in (a + 1)..d {
            h.set(b, a, h.get(a, b));
        }
    }
    let sq: Vec<f64> = weights.iter().map(|w| w * w).collect();
    let n_eff = 1.0 / pairwise_sum(&sq);
    DiagnosticMatrix { h, n_eff }
}

/// Transformed diagnostic matrix H(Φ) = Σ w̃_i (J_i g_i)(J_i g_i)ᵀ where
/// J_i = ∇Φ(x_i)^{-T} is supplied by the callback.
pub fn estimate_h_phi(
    batch: &GradientBatch,
    jacobian_inv_t: impl Fn(&[f64]) -> Result<Mat>,
) -> Result<DiagnosticMatrix> {
    let weights = normalized_weights(batch.log_weights())?;
    let d = batch.dim();
    let mut mapped = Mat::zeros(batch.n(), d);
    for i in 0..batch.n() {
        let j = jacobian_inv_t(batch.points().row(i))?;
        if j.rows() != d || j.cols() != d {
            return Err(RidgeError::Dimension(
                "jacobian callback returned wrong shape".into(),
            ));
        }
        let g = j.matvec(batch.grads().row(i));
        for (jj, v) in g.iter().enumerate() {
            mapped.set(i, jj, *v);
        }
    }
    Ok(weighted_second_moment(&mapped, &weights))
}

/// Symmetric eigendecomposition of a diagnostic matrix with the crate's
/// ordering conventions; validates reconstruction, orthonormality and
/// near-positive-semidefiniteness.
pub fn eigh(h: &DiagnosticMatrix) -> Result<Spectrum> {
    let (vals, vecs) = linalg::sym_eigh_desc(&h.h)?;
    let lmax = vals.first().copied().unwrap_or(0.0);
    if let Some(&lmin) = vals.last() {
        if lmin < -1e-10 * lmax.abs().max(1e-300) && lmin < -1e-12 {
            return Err(RidgeError::Numerical(format!(
                "diagnostic matrix is not PSD (eigenvalue {lmin:.3e})"
            )));
        }
    }
    Ok(Spectrum {
        eigenvalues: vals,
        eigenvectors: vecs,
    })
}

/// Leading-r eigenvector frame of a spectrum.
pub fn select_features(spec: &Spectrum, r: usize) -> Result<FeatureSubspace> {
    let d = spec.eigenvalues.len();
    if r > d {
        return Err(RidgeError::Domain(format!("r = {r} exceeds dimension {d}")));
    }
    Ok(FeatureSubspace {
        u_r: spec.eigenvectors.col_block(0, r),
        u_perp: spec.eigenvectors.col_block(r, d),
    })
}

/// Σ_{k>r} λ_k, clamped at zero.
pub fn tail_sum(spec: &Spectrum, r: usize) -> Result<f64> {
    let d = spec.eigenvalues.len();
    if r > d {
        return Err(RidgeError::Domain(format!("r = {r} exceeds dimension {d}")));
    }
    Ok(pairwise_sum(&spec.eigenvalues[r..]).max(0.0))
}

/// trace(H) / ||H||_sp, the effective rank; in [1, rank].
pub fn effective_rank(h: &DiagnosticMatrix) -> Result<f64> {
    let spec = eigh(h)?;
    let lmax = spec.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if lmax <= 0.0 {
        return Err(RidgeError::Domain(
            "effective rank of the zero matrix is undefined".into(),
        ));
    }
    Ok(h.h.trace() / lmax)
}

/// Generalized eigenpairs of H v = λ Σ^{-1} v, via the symmetric problem
/// Σ^{1/2} H Σ^{1/2} w = λ w with v = Σ^{1/2} w. Returned eigenvectors are
/// Σ^{-1}-orthonormal.
pub fn generalized_eig(h: &DiagnosticMatrix, sigma: &Mat) -> Result<Spectrum> {
    if !sigma.is_square() || sigma.rows() != h.h.rows() {
        return Err(RidgeError::Dimension(
            "Sigma must be square and match H".into(),
        ));
    }
    linalg::cholesky(sigma)
        .map_err(|_| RidgeError::Domain("Sigma must be symmetric positive definite".into()))?;
    let s = linalg::sym_sqrt(sigma)?;
    let m = s.matmul(&h.h).matmul(&s).symmetrized();
    let (vals, w) = linalg::sym_eigh_desc(&m)?;
    let v = s.matmul(&w);
    Ok(Spectrum {
        eigenvalues: vals,
        eigenvectors: v,
    })
}
