//! Gauss-Hermite quadrature built by the Golub-Welsch method on the
//! in-repo Jacobi eigensolver, used for high-accuracy 1-D Gaussian
//! expectations (functional-inequality checks, oracle validation).

use crate::error::{Result, RidgeError};
use crate::linalg::{jacobi_eigh, Mat, JACOBI_MAX_SWEEPS};

/// Nodes and weights of the n-point Gauss-Hermite rule in the physicists'
/// convention: ∫ g(x) e^{-x²} dx ≈ Σ w_i g(x_i), exact for polynomials of
/// degree ≤ 2n-1. Nodes are in ascending order.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub-Welsch: the rule is the eigendecomposition of the Jacobi
    /// matrix of the orthonormal Hermite recurrence, which is tridiagonal
    /// with zero diagonal and off-diagonal entries sqrt(k/2). Nodes are
    /// the eigenvalues, weights sqrt(pi) times the squared first component
    /// of each normalized eigenvector.
    pub fn new(n: usize) -> Result<GaussHermite> {
        if n == 0 {
            return Err(RidgeError::Domain("quadrature order must be >= 1".into()));
        }
        let mut j = Mat::zeros(n, n);
        for k in 1..n {
            let b = (k as f64 / 2.0).sqrt();
            j.set(k - 1, k, b);
            j.set(k, k - 1, b);
        }
        let (eigs, vecs) = jacobi_eigh(&j, JACOBI_MAX_SWEEPS)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigs[a].total_cmp(&eigs[b]));
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &i in &order {
            nodes.push(eigs[i]);
            let v0 = vecs.get(0, i);
            weights.push(sqrt_pi * v0 * v0);
        }
        if !nodes.iter().all(|x| x.is_finite()) || !weights.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(RidgeError::Numerical(
                "Gauss-Hermite construction produced non-finite nodes or weights".into(),
            ));
        }
        Ok(GaussHermite { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// E[g(X)] for X ~ N(0,1): substitute x = sqrt(2) t in the e^{-x²}
    /// rule and divide by sqrt(pi).
    pub fn expect_standard_normal(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(sqrt2 * x);
        }
        let v = acc / std::f64::consts::PI.sqrt();
        if !v.is_finite() {
            return Err(RidgeError::Numerical(
                "quadrature expectation is non-finite".into(),
            ));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule_is_evaluation_at_zero() {
        let q = GaussHermite::new(1).unwrap();
        assert!(q.nodes()[0].abs() < 1e-14);
        assert!((q.expect_standard_normal(|x| 3.0 + x).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments_are_exact() {
        let q = GaussHermite::new(20).unwrap();
        let expect = |k: i32| q.expect_standard_normal(|x| x.powi(k)).unwrap();
        // E[x^{2m}] = (2m-1)!!
        for (k, want) in [(0, 1.0), (2, 1.0), (4, 3.0), (6, 15.0), (8, 105.0)] {
            assert!(
                (expect(k) - want).abs() < 1e-11 * want.max(1.0),
                "moment {k}: {} vs {want}",
                expect(k)
            );
        }
        for k in [1, 3, 5, 7] {
            assert!(expect(k).abs() < 1e-12, "odd moment {k} = {}", expect(k));
        }
    }

    #[test]
    fn exponential_moment() {
        let q = GaussHermite::new(40).unwrap();
        let got = q.expect_standard_normal(|x| x.exp()).unwrap();
        assert!((got - (0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_sqrt_pi_and_nodes_are_symmetric() {
        for n in [5, 32, 200] {
            let q = GaussHermite::new(n).unwrap();
            let sum: f64 = q.weights().iter().sum();
            assert!((sum - std::f64::consts::PI.sqrt()).abs() < 1e-12, "n={n}");
            for i in 0..n {
                assert!(
                    (q.nodes()[i] + q.nodes()[n - 1 - i]).abs() < 1e-10,
                    "n={n} node {i}"
                );
                if i > 0 {
                    assert!(q.nodes()[i] > q.nodes()[i - 1]);
                }
                assert!(q.weights()[i] >= 0.0);
            }
        }
    }

    #[test]
    fn high_order_rule_stays_accurate() {
        let q = GaussHermite::new(200).unwrap();
        assert!((q.expect_standard_normal(|x| x * x).unwrap() - 1.0).abs() < 1e-10);
        // An entire function with fast-growing tails still integrates
        // cleanly: E[cosh(x/2)] = e^{1/8}.
        let got = q.expect_standard_normal(|x| (x / 2.0).cosh()).unwrap();
        assert!((got - (0.125f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn rejects_order_zero_and_nonfinite_integrands() {
        assert!(GaussHermite::new(0).is_err());
        let q = GaussHermite::new(8).unwrap();
        assert!(q.expect_standard_normal(|_x| f64::NAN).is_err());
    }
}
