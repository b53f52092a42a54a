//! The standard bubble family and the prescribed-curvature functional.
//!
//! Bubbles are the extremals of the conformal Sobolev inequality: with
//! `qp = (n - 2 sigma)/2` and `cbar = c(n, sigma)^{(n - 2 sigma)/(4 sigma)}`,
//!
//! ```text
//!     delta_{a,lambda}(x) = cbar * ( lambda / A )^{qp},
//!     A = 1 + ((lambda^2 - 1)/2) * (1 - cos d(x, a)),
//! ```
//!
//! normalized so that `P_sigma delta = delta^{(n+2s)/(n-2s)}` exactly.  Then
//! `||delta||_{H^sigma}^2 = integral delta^{2n/(n-2s)} = E(n, sigma)` for
//! every (a, lambda), and the functional
//!
//! ```text
//!     J_K(u) = ||u||_{H^sigma}^2 / ( integral K u_+^{2n/(n-2s)} )^{(n-2s)/n}
//! ```
//!
//! evaluated on a single bubble tends to `S(n, sigma) / K(a)^{(n-2s)/n}` as
//! lambda grows.  The pairwise interaction of two bubbles is measured by
//! [`epsilon_ij`].

pub mod expansion;
pub mod represent;
pub mod vbar;

use crate::error::{Error, Result};
use crate::spectral::{
    c_nsigma, critical_exponent, hsigma_norm_sq, validate_sigma, SpectralField, Transform,
};
use crate::sphere::{QuadratureGrid, SpherePoint};
use serde::{Deserialize, Serialize};

/// One bubble: center on the sphere, concentration lambda >= 1, and an
/// amplitude multiplier (1 for the standard bubble).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleParams {
    pub center: SpherePoint,
    pub lambda: f64,
    pub alpha: f64,
}

impl BubbleParams {
    pub fn standard(center: SpherePoint, lambda: f64) -> BubbleParams {
        BubbleParams {
            center,
            lambda,
            alpha: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "bubble concentration must satisfy lambda >= 1, got {}",
                self.lambda
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::invalid(format!(
                "bubble amplitude must be positive and finite, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Normalizing amplitude `cbar = c(n, sigma)^{(n-2s)/(4s)}`; the lambda = 1
/// bubble is the constant cbar, and this is the unique choice making
/// `P_sigma delta = delta^{(n+2s)/(n-2s)}` hold.
pub fn bubble_coefficient(n: usize, sigma: f64) -> Result<f64> {
    let c = c_nsigma(n, sigma)?;
    Ok(c.powf((n as f64 - 2.0 * sigma) / (4.0 * sigma)))
}

/// Pointwise bubble value (amplitude included).
pub fn bubble_value(n: usize, sigma: f64, b: &BubbleParams, x: &SpherePoint) -> Result<f64> {
    let cbar = bubble_coefficient(n, sigma)?;
    b.validate()?;
    Ok(bubble_value_raw(n, sigma, cbar, b, x))
}

#[inline]
fn profile_exponent(n: usize, sigma: f64) -> f64 {
    (n as f64 - 2.0 * sigma) / 2.0
}

#[inline]
pub(crate) fn bubble_value_raw(
    n: usize,
    sigma: f64,
    cbar: f64,
    b: &BubbleParams,
    x: &SpherePoint,
) -> f64 {
    let qp = profile_exponent(n, sigma);
    let s = x.one_minus_cos(&b.center); // 1 - cos d, stable near the center
    let a = 1.0 + 0.5 * (b.lambda * b.lambda - 1.0) * s;
    b.alpha * cbar * (b.lambda / a).powf(qp)
}

/// Derivative of the bubble with respect to log(lambda), pointwise.
#[inline]
pub(crate) fn bubble_dlnlambda_raw(
    n: usize,
    sigma: f64,
    cbar: f64,
    b: &BubbleParams,
    x: &SpherePoint,
) -> f64 {
    let qp = profile_exponent(n, sigma);
    let s = x.one_minus_cos(&b.center);
    let a = 1.0 + 0.5 * (b.lambda * b.lambda - 1.0) * s;
    // d delta / d ln lambda = qp * delta * (1 - lambda^2 s / A).
    b.alpha * cbar * (b.lambda / a).powf(qp) * qp * (1.0 - b.lambda * b.lambda * s / a)
}

/// Derivative of the bubble along a unit tangent direction `eta` at the
/// center (ambient coordinates), pointwise.
#[inline]
pub(crate) fn bubble_dcenter_raw(
    n: usize,
    sigma: f64,
    cbar: f64,
    b: &BubbleParams,
    x: &SpherePoint,
    eta: &[f64],
) -> f64 {
    let qp = profile_exponent(n, sigma);
    let s = x.one_minus_cos(&b.center);
    let a = 1.0 + 0.5 * (b.lambda * b.lambda - 1.0) * s;
    let xdot: f64 = x.coords().iter().zip(eta).map(|(c, e)| c * e).sum();
    // d/d a [1 - <x, a>] along eta is -<x, eta>; chain rule through A^{-qp}.
    b.alpha
        * cbar
        * b.lambda.powf(qp)
        * qp
        * 0.5
        * (b.lambda * b.lambda - 1.0)
        * xdot
        * a.powf(-qp - 1.0)
}

/// Sample a sum of bubbles on a grid.
pub fn bubble_samples(
    n: usize,
    sigma: f64,
    grid: &QuadratureGrid,
    bubbles: &[BubbleParams],
) -> Result<Vec<f64>> {
    validate_sigma(n, sigma)?;
    if grid.n != n {
        return Err(Error::mismatch(format!(
            "grid lives on S^{}, bubbles on S^{}",
            grid.n, n
        )));
    }
    let cbar = bubble_coefficient(n, sigma)?;
    for b in bubbles {
        b.validate()?;
        if b.center.dim() != n {
            return Err(Error::mismatch("bubble center has wrong dimension"));
        }
    }
    let mut out = vec![0.0; grid.len()];
    for b in bubbles {
        for (o, p) in out.iter_mut().zip(&grid.points) {
            *o += bubble_value_raw(n, sigma, cbar, b, p);
        }
    }
    Ok(out)
}

/// Project a sum of bubbles onto the spectral basis of a transform.
///
/// On zonal transforms every bubble center must lie on the symmetry axis
/// (north or south pole); anything else cannot be represented and is
/// rejected.
pub fn bubble_spectral(
    tf: &Transform,
    sigma: f64,
    bubbles: &[BubbleParams],
) -> Result<SpectralField> {
    if tf.is_zonal() {
        for b in bubbles {
            let axis = b.center.coords()[tf.n()].abs();
            if (axis - 1.0).abs() > 1e-10 {
                return Err(Error::unsupported(
                    "zonal transforms can only hold bubbles centered at the poles; \
                     use a full grid for off-axis centers",
                ));
            }
        }
    }
    let samples = bubble_samples(tf.n(), sigma, tf.grid(), bubbles)?;
    tf.forward(&samples)
}

/// Interaction strength of two bubbles:
/// `eps_ij = ( li/lj + lj/li + li*lj*d^2 )^{-(n-2s)/2}`, d the geodesic
/// distance of the centers.  Symmetric, bounded by `2^{-(n-2s)/2}`, and
/// `<delta_i, delta_j>_{H^sigma} ~ c_1 eps_ij` when small.
pub fn epsilon_ij(n: usize, sigma: f64, bi: &BubbleParams, bj: &BubbleParams) -> Result<f64> {
    validate_sigma(n, sigma)?;
    bi.validate()?;
    bj.validate()?;
    let d = bi.center.geodesic_distance(&bj.center);
    let r = bi.lambda / bj.lambda;
    let base = r + 1.0 / r + bi.lambda * bj.lambda * d * d;
    Ok(base.powf(-profile_exponent(n, sigma)))
}

/// Numerator, denominator and value of the curvature functional, for reuse
/// by flows and diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct FunctionalParts {
    /// `||u||_{H^sigma}^2`.
    pub energy: f64,
    /// `integral K u_+^p`.
    pub curvature_integral: f64,
    /// Fraction of grid mass where u < 0 (diagnostic for flows).
    pub negative_mass_fraction: f64,
    pub value: f64,
}

/// Curvature functional with an arbitrary exponent (the critical one is
/// `2n/(n-2s)`; subcritical continuation lowers it).
/// Common validation for functional/gradient evaluations.
pub(crate) fn validate_functional_inputs(
    tf: &Transform,
    k_samples: &[f64],
    sigma: f64,
    exponent: f64,
) -> Result<()> {
    validate_sigma(tf.n(), sigma)?;
    if k_samples.len() != tf.grid().len() {
        return Err(Error::mismatch(
            "curvature samples do not match the grid size",
        ));
    }
    if !(exponent > 2.0) {
        return Err(Error::invalid(format!(
            "functional exponent must exceed 2, got {exponent}"
        )));
    }
    if let Some(bad) = k_samples.iter().find(|k| !(**k > 0.0)) {
        return Err(Error::invalid(format!(
            "prescribed curvature must be strictly positive at every node, found {bad}"
        )));
    }
    Ok(())
}

pub fn functional_jk_exponent(
    tf: &Transform,
    u: &SpectralField,
    k_samples: &[f64],
    sigma: f64,
    exponent: f64,
) -> Result<FunctionalParts> {
    validate_functional_inputs(tf, k_samples, sigma, exponent)?;
    let energy = hsigma_norm_sq(u, sigma)?;
    let samples = tf.inverse(u)?;
    functional_parts_from_samples(tf, &samples, k_samples, exponent, energy, u.l2_norm())
}

/// Shared tail of the functional evaluation, reused by the flow gradient so
/// one inverse transform serves both the level and the descent direction.
pub(crate) fn functional_parts_from_samples(
    tf: &Transform,
    samples: &[f64],
    k_samples: &[f64],
    exponent: f64,
    energy: f64,
    l2_norm: f64,
) -> Result<FunctionalParts> {
    let mut integral = 0.0;
    let mut neg = 0.0;
    let mut total = 0.0;
    for ((&w, &s), &k) in tf.grid().weights.iter().zip(samples).zip(k_samples) {
        total += w;
        if s > 0.0 {
            integral += w * k * s.powf(exponent);
        } else {
            neg += w;
        }
    }
    // The functional is undefined when the positive part carries no
    // curvature mass (e.g. u <= 0): refuse rather than divide by ~0.
    let scale = l2_norm.powf(exponent).max(f64::MIN_POSITIVE);
    if !(integral > 1e-14 * scale) {
        return Err(Error::degenerate(
            "curvature integral of the positive part is (near) zero; \
             the functional is undefined there",
        ));
    }
    Ok(FunctionalParts {
        energy,
        curvature_integral: integral,
        negative_mass_fraction: neg / total,
        value: energy / integral.powf(2.0 / exponent),
    })
}

/// Critical-exponent curvature functional `J_K`.
pub fn functional_jk(
    tf: &Transform,
    u: &SpectralField,
    k_samples: &[f64],
    sigma: f64,
) -> Result<FunctionalParts> {
    let p = critical_exponent(tf.n(), sigma)?;
    functional_jk_exponent(tf, u, k_samples, sigma, p)
}
