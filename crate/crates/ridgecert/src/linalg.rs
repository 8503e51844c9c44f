//! Dense row-major matrices and the few factorizations the crate needs:
//! cyclic Jacobi eigendecomposition for symmetric matrices, Cholesky,
//! thin QR, orthonormal completion and a symmetric PSD square root.
//!
//! Everything here is deliberately self-contained. The matrices that show
//! up in practice are small (parameter dimensions up to a few hundred), and
//! keeping the eigensolver in-repo makes its ordering and tie-breaking
//! rules part of the crate's contract: eigenvalues are reported in
//! descending order, eigenvector signs are normalized, and exact ties are
//! resolved by lexicographic comparison of the eigenvectors, so repeated
//! runs see the same spectrum in the same order.

use crate::error::{Result, RidgeError};

/// Dense matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(d: &[f64]) -> Mat {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
        if rows.is_empty() {
            return Err(RidgeError::Dimension("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(RidgeError::Dimension("ragged rows".into()));
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// self^T x without forming the transpose.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec shape mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j) * xi;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|&v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Replace by (A + A^T)/2. Only meaningful for square matrices.
    pub fn symmetrized(&self) -> Mat {
        assert!(self.is_square());
        Mat::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i))
        })
    }

    /// Columns j0..j1 (exclusive) as a new matrix.
    pub fn col_block(&self, j0: usize, j1: usize) -> Mat {
        assert!(j0 <= j1 && j1 <= self.cols);
        Mat::from_fn(self.rows, j1 - j0, |i, j| self.get(i, j0 + j))
    }

    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Maximum number of cyclic Jacobi sweeps before giving up. Convergence is
/// quadratic once rotations become small; well-conditioned symmetric input
/// of dimension a few hundred settles in well under twenty sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, v)` with eigenvectors in the columns of `v`, in
/// no particular order; see [`sym_eigh_desc`] for the sorted, sign-fixed
/// variant everything else in the crate uses. The input is symmetrized
/// before iterating, so tiny asymmetries from accumulation are tolerated.
pub fn jacobi_eigh(a: &Mat, max_sweeps: usize) -> Result<(Vec<f64>, Mat)> {
    if !a.is_square() {
        return Err(RidgeError::Dimension("eigh expects a square matrix".into()));
    }
    if !a.all_finite() {
        return Err(RidgeError::Domain("eigh input has non-finite entries".into()));
    }
    let n = a.rows();
    let mut w = a.symmetrized();
    let mut v = Mat::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| w.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += w.get(p, q).abs();
            }
        }
        if off == 0.0 {
            return Ok((d, v));
        }
        let tresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = w.get(p, q);
                let g = 100.0 * apq.abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    w.set(p, q, 0.0);
                } else if apq.abs() > tresh {
                    let h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        apq / h
                    } else {
                        let theta = 0.5 * h / apq;
                        let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            t = -t;
                        }
                        t
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    w.set(p, q, 0.0);
                    let rot = |m: &mut Mat, i: usize, j: usize, k: usize, l: usize| {
                        let g = m.get(i, j);
                        let h = m.get(k, l);
                        m.set(i, j, g - s * (h + g * tau));
                        m.set(k, l, h + s * (g - h * tau));
                    };
                    for j in 0..p {
                        rot(&mut w, j, p, j, q);
                    }
                    for j in (p + 1)..q {
                        rot(&mut w, p, j, j, q);
                    }
                    for j in (q + 1)..n {
                        rot(&mut w, p, j, q, j);
                    }
                    for j in 0..n {
                        rot(&mut v, j, p, j, q);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    Err(RidgeError::Numerical(format!(
        "jacobi eigensolver did not converge within {max_sweeps} sweeps"
    )))
}

/// Sorted symmetric eigendecomposition: eigenvalues descending, each
/// eigenvector's first component of magnitude > 1e-12 made positive, exact
/// eigenvalue ties broken by lexicographically larger eigenvector first.
///
/// The reconstruction V diag(w) V^T is checked against the input to
/// 1e-8 * max(1, ||A||_F) and the columns of V for orthonormality to 1e-10;
/// failure of either check is reported as a numerical error rather than
/// returned silently.
pub fn sym_eigh_desc(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let (d, v) = jacobi_eigh(a, JACOBI_MAX_SWEEPS)?;
    let n = d.len();

    let mut cols: Vec<(f64, Vec<f64>)> = (0..n).map(|k| (d[k], v.col(k))).collect();
    for (_, col) in cols.iter_mut() {
        if let Some(&lead) = col.iter().find(|x| x.abs() > 1e-12) {
            if lead < 0.0 {
                for x in col.iter_mut() {
                    *x = -*x;
                }
            }
        }
    }
    cols.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| b.1.partial_cmp(&a.1).unwrap())
    });

    let vals: Vec<f64> = cols.iter().map(|c| c.0).collect();
    let vecs = Mat::from_fn(n, n, |i, j| cols[j].1[i]);

    // Self-validation: orthonormality and reconstruction residual.
    let vtv = vecs.transpose().matmul(&vecs);
    let ortho_err = vtv.sub(&Mat::identity(n)).frob_norm();
    if ortho_err > 1e-10 * (n as f64).sqrt().max(1.0) {
        return Err(RidgeError::Numerical(format!(
            "eigenvector basis lost orthonormality (deviation {ortho_err:.2e})"
        )));
    }
    let recon = vecs.matmul(&Mat::diag(&vals)).matmul(&vecs.transpose());
    let resid = recon.sub(&a.symmetrized()).frob_norm();
    let scale = a.frob_norm().max(1.0);
    if resid > 1e-8 * scale {
        return Err(RidgeError::Numerical(format!(
            "eigendecomposition residual {resid:.2e} exceeds 1e-8 * {scale:.2e}"
        )));
    }
    Ok((vals, vecs))
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    if !a.is_square() {
        return Err(RidgeError::Dimension("cholesky expects a square matrix".into()));
    }
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(RidgeError::Numerical(format!(
                        "matrix is not positive definite (pivot {s:.3e} at {i})"
                    )));
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve L y = b for lower-triangular L.
pub fn solve_lower(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l.get(i, k) * y[k]).sum();
        y[i] = (b[i] - s) / l.get(i, i);
    }
    y
}

/// Solve L^T x = b for lower-triangular L.
pub fn solve_lower_transpose(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l.get(k, i) * x[k]).sum();
        x[i] = (b[i] - s) / l.get(i, i);
    }
    x
}

/// Solve (L L^T) x = b.
pub fn solve_cholesky(l: &Mat, b: &[f64]) -> Vec<f64> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

/// Inverse of an SPD matrix from its Cholesky factor.
pub fn spd_inverse(a: &Mat) -> Result<Mat> {
    let l = cholesky(a)?;
    let n = a.rows();
    let mut inv = Mat::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let x = solve_cholesky(&l, &e);
        for i in 0..n {
            inv.set(i, j, x[i]);
        }
    }
    Ok(inv.symmetrized())
}

/// log det A for SPD A via Cholesky.
pub fn log_det_spd(a: &Mat) -> Result<f64> {
    let l = cholesky(a)?;
    Ok(2.0 * (0..a.rows()).map(|i| l.get(i, i).ln()).sum::<f64>())
}

/// Thin QR of a full-column-rank matrix by twice-iterated modified
/// Gram-Schmidt. Returns (Q, R) with Q orthonormal columns and R upper
/// triangular with positive diagonal.
pub fn qr_thin(a: &Mat) -> Result<(Mat, Mat)> {
    let (m, n) = (a.rows(), a.cols());
    if n > m {
        return Err(RidgeError::Dimension("qr_thin needs rows >= cols".into()));
    }
    let mut q = Mat::zeros(m, n);
    let mut r = Mat::zeros(n, n);
    for k in 0..n {
        let mut v = a.col(k);
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for j in 0..k {
                let qj = q.col(j);
                let proj: f64 = qj.iter().zip(&v).map(|(a, b)| a * b).sum();
                r.set(j, k, r.get(j, k) + proj);
                for (vi, qi) in v.iter_mut().zip(&qj) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale.max(1.0) {
            return Err(RidgeError::Numerical(format!(
                "qr_thin: column {k} is numerically dependent on earlier columns"
            )));
        }
        r.set(k, k, norm);
        for i in 0..m {
            q.set(i, k, v[i] / norm);
        }
    }
    Ok((q, r))
}

/// Extend a matrix with orthonormal columns to a full orthonormal basis,
/// returning the d-r new columns. Deterministic: standard basis vectors are
/// tried in index order and accepted when their residual against the
/// accumulated basis stays above a fixed threshold.
pub fn orthonormal_completion(q: &Mat) -> Result<Mat> {
    let d = q.rows();
    let r = q.cols();
    if r > d {
        return Err(RidgeError::Dimension("more columns than rows".into()));
    }
    let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(d - r);
    for i in 0..d {
        if accepted.len() == d - r {
            break;
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for _pass in 0..2 {
            for j in 0..r {
                let qj = q.col(j);
                let proj: f64 = qj.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(&qj) {
                    *vi -= proj * qi;
                }
            }
            for u in &accepted {
                let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            accepted.push(v);
        }
    }
    if accepted.len() != d - r {
        return Err(RidgeError::Numerical(
            "orthonormal completion ran out of candidate directions".into(),
        ));
    }
    Ok(Mat::from_fn(d, d - r, |i, j| accepted[j][i]))
}

/// Symmetric PSD square root via eigendecomposition. Eigenvalues below
/// -1e-10 * max(1, lambda_max) are rejected; small negative rounding noise
/// is clamped to zero.
pub fn sym_sqrt(a: &Mat) -> Result<Mat> {
    let (vals, vecs) = sym_eigh_desc(a)?;
    let lmax = vals.first().copied().unwrap_or(0.0).max(0.0);
    let tol = 1e-10 * lmax.max(1.0);
    let mut roots = Vec::with_capacity(vals.len());
    for &v in &vals {
        if v < -tol {
            return Err(RidgeError::Numerical(format!(
                "matrix has a negative eigenvalue {v:.3e}; no PSD square root"
            )));
        }
        roots.push(v.max(0.0).sqrt());
    }
    Ok(vecs.matmul(&Mat::diag(&roots)).matmul(&vecs.transpose()))
}
