//! Gauss quadrature rules for ultraspherical weights.
//!
//! The polar direction of the round sphere S^n carries the measure
//! `(1 - t^2)^{(n-2)/2} dt` after the substitution `t = cos(theta)`.  That is
//! the Gegenbauer (ultraspherical) weight `(1 - t^2)^{lambda - 1/2}` with
//! `lambda = (n - 1)/2`, so an M-point Gauss rule for it integrates
//! polynomial integrands of degree `2M - 1` exactly -- for *every* dimension,
//! including odd n where the weight is not itself a polynomial.
//!
//! Nodes and weights come from the Golub-Welsch construction: the nodes are
//! the eigenvalues of the symmetric tridiagonal Jacobi matrix of the monic
//! three-term recurrence, and the weights are Christoffel numbers
//! `w_i = 1 / sum_k ptilde_k(x_i)^2` built from the orthonormal recurrence.
//! Only eigenvalues are needed, so we use a plain implicit-shift QL sweep
//! rather than a full eigendecomposition.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// A one-dimensional quadrature rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    /// Nodes, strictly increasing, strictly inside (-1, 1).
    pub nodes: Vec<f64>,
    /// Positive weights; they sum to the total mass of the weight function.
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Integrate sampled values against the rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Total mass of the weight `(1 - t^2)^{lambda - 1/2}` over [-1, 1]:
/// `sqrt(pi) * Gamma(lambda + 1/2) / Gamma(lambda + 1)`.
pub fn gegenbauer_mass(lambda: f64) -> f64 {
    (0.5 * std::f64::consts::PI.ln() + ln_gamma(lambda + 0.5) - ln_gamma(lambda + 1.0)).exp()
}

/// Recurrence coefficient `beta_k` of the *monic* ultraspherical polynomials:
/// `pi_{k+1} = t pi_k - beta_k pi_{k-1}` (the symmetric weight kills the
/// `alpha_k` terms).
fn monic_beta(lambda: f64, k: usize) -> f64 {
    let k = k as f64;
    k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0))
}

/// M-point Gauss rule for the weight `(1 - t^2)^{lambda - 1/2}` on [-1, 1].
///
/// Requires `lambda > 0` and `m >= 1`.
pub fn gauss_gegenbauer(lambda: f64, m: usize) -> Result<GaussRule> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "Gegenbauer parameter must be positive and finite, got {lambda}"
        )));
    }
    if m == 0 {
        return Err(Error::invalid("quadrature rule needs at least one node"));
    }

    // Jacobi matrix: zero diagonal, off-diagonal sqrt(beta_k).
    let diag = vec![0.0; m];
    let mut off = vec![0.0; m];
    for k in 1..m {
        off[k - 1] = monic_beta(lambda, k).sqrt();
    }
    let mut nodes = tridiag_eigenvalues(diag, off)?;
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));

    // The spectrum is symmetric about 0; enforce that exactly to remove
    // rounding noise (it also zeroes all odd moments exactly).
    for i in 0..m / 2 {
        let v = 0.5 * (nodes[i] - nodes[m - 1 - i]);
        nodes[i] = v;
        nodes[m - 1 - i] = -v;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }

    let mass = gegenbauer_mass(lambda);
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / orthonormal_sq_sum(lambda, m, mass, x))
        .collect();

    // Symmetrize weights as well.
    let mut weights = weights;
    for i in 0..m / 2 {
        let v = 0.5 * (weights[i] + weights[m - 1 - i]);
        weights[i] = v;
        weights[m - 1 - i] = v;
    }

    Ok(GaussRule { nodes, weights })
}

/// Gauss-Legendre rule (`lambda = 1/2`, constant weight 1).
pub fn gauss_legendre(m: usize) -> Result<GaussRule> {
    gauss_gegenbauer(0.5, m)
}

/// `sum_{k<m} ptilde_k(x)^2` for the orthonormal ultraspherical family.
fn orthonormal_sq_sum(lambda: f64, m: usize, mass: f64, x: f64) -> f64 {
    // ptilde_0 = 1/sqrt(mass); b_{k+1} ptilde_{k+1} = x ptilde_k - b_k ptilde_{k-1}.
    let mut prev = 0.0;
    let mut cur = 1.0 / mass.sqrt();
    let mut sum = cur * cur;
    let mut b_k = 0.0;
    for k in 0..m - 1 {
        let b_next = monic_beta(lambda, k + 1).sqrt();
        let next = (x * cur - b_k * prev) / b_next;
        sum += next * next;
        prev = cur;
        cur = next;
        b_k = b_next;
    }
    sum
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.
///
/// `diag` has length M; `off[i]` couples rows i and i+1 (`off[M-1]` is
/// scratch).  Both are consumed.  O(M^2) total, no eigenvectors.
fn tridiag_eigenvalues(mut diag: Vec<f64>, mut off: Vec<f64>) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(diag);
    }
    debug_assert_eq!(off.len(), n);
    off[n - 1] = 0.0;

    for l in 0..n {
        let mut iterations = 0;
        'ql: loop {
            // First negligible subdiagonal entry at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 64 {
                return Err(Error::no_convergence(
                    "implicit QL exceeded 64 sweeps on one eigenvalue",
                ));
            }

            // Wilkinson-style shift from the leading 2x2 block.
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    // Deflation mid-sweep: drop the shift and restart.
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    continue 'ql;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                f = (diag[i] - g) * s + 2.0 * c * b;
                p = s * f;
                diag[i + 1] = g + p;
                g = c * f - b;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(diag)
}
