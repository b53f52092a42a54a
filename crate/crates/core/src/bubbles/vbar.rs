//! Minimal remainder orthogonal to the bubble manifold.
//!
//! For a fixed configuration `u0 = sum_i alpha_i delta_i`, minimize
//! `J_K(u0 + v)` over remainders v in the H^sigma-orthogonal complement of
//! the span of every bubble together with its concentration and center
//! derivatives, restricted to a trust ball `||v|| <= radius`.  The second
//! variation of the functional is coercive on the complement, so inside the
//! ball the problem is strictly convex and the minimizer `vbar` is the
//! well-defined local correction of the configuration.  The ball matters:
//! the unconstrained complement still reaches far-away configurations
//! (e.g. a fresh bubble at a distant curvature maximum), and an
//! unrestricted descent happily slides there.  A run that ends pinned to
//! the ball boundary is reported as such and means "no small remainder",
//! not a failure of the descent.
//!
//! The size of the interior minimizer is governed by the curvature gradient
//! at the centers: `||vbar|| ~ |grad K(a)| / lambda` when the gradient
//! survives, with faster decay when every center is a critical point of K.

use super::represent::project_columns;
use super::{bubble_coefficient, bubble_spectral, BubbleParams};
use crate::error::Result;
use crate::flow::gradient_jk;
use crate::spectral::{critical_exponent, hsigma_inner, hsigma_norm_sq, SpectralField, Transform};

#[derive(Debug, Clone, Copy)]
pub struct VbarOptions {
    pub max_iterations: usize,
    /// Stop when the projected gradient norm falls below this.
    pub tolerance: f64,
    /// Trust-ball radius in H^sigma; `None` defaults to `0.3 ||u0||`.
    pub trust_radius: Option<f64>,
}

impl Default for VbarOptions {
    fn default() -> Self {
        VbarOptions {
            max_iterations: 500,
            tolerance: 1e-8,
            trust_radius: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VbarResult {
    pub vbar: SpectralField,
    /// H^sigma norm of the remainder.
    pub norm: f64,
    pub level_before: f64,
    pub level_after: f64,
    pub iterations: usize,
    /// Projected gradient reached the tolerance at an interior point.
    pub converged: bool,
    /// The minimizer is pinned to the trust-ball boundary: the functional
    /// keeps decreasing beyond the ball and no small remainder exists.
    pub boundary: bool,
}

/// H^sigma-orthonormal basis of the bubble/derivative span.  Center
/// derivatives only exist on full grids; in the zonal subspace they vanish
/// identically.  Nearly dependent directions (e.g. coinciding bubbles) are
/// dropped rather than kept as noise.
fn orthonormal_span(
    tf: &Transform,
    sigma: f64,
    bubbles: &[BubbleParams],
) -> Result<Vec<SpectralField>> {
    let cbar = bubble_coefficient(tf.n(), sigma)?;
    let with_center = !tf.is_zonal();
    let mut basis: Vec<SpectralField> = Vec::new();
    for b in bubbles {
        let cols = project_columns(tf, sigma, cbar, b, with_center)?;
        let mut all = vec![cols.value, cols.dlnlambda];
        all.extend(cols.dcenter);
        for mut c in all {
            // Two Gram-Schmidt passes keep the basis orthonormal to
            // roundoff.
            for _ in 0..2 {
                for q in &basis {
                    let ip = hsigma_inner(&c, q, sigma)?;
                    c.axpy(-ip, q)?;
                }
            }
            let norm = hsigma_norm_sq(&c, sigma)?.sqrt();
            if norm > 1e-10 {
                c.scale(1.0 / norm);
                basis.push(c);
            }
        }
    }
    Ok(basis)
}

fn project_out(v: &mut SpectralField, basis: &[SpectralField], sigma: f64) -> Result<()> {
    for q in basis {
        let ip = hsigma_inner(v, q, sigma)?;
        v.axpy(-ip, q)?;
    }
    Ok(())
}

/// Minimize the functional over the trust ball in the orthogonal
/// complement with Barzilai-Borwein projected descent.  The line search is
/// nonmonotone with a roundoff slack: near the minimum the true descent per
/// step drops below the floating-point resolution of the level itself, and
/// a strict Armijo rule would stall long before the gradient tolerance.
pub fn vbar_minimize(
    tf: &Transform,
    sigma: f64,
    bubbles: &[BubbleParams],
    k_samples: &[f64],
    options: &VbarOptions,
) -> Result<VbarResult> {
    let q = critical_exponent(tf.n(), sigma)?;
    let u0 = bubble_spectral(tf, sigma, bubbles)?;
    let basis = orthonormal_span(tf, sigma, bubbles)?;
    let radius = match options.trust_radius {
        Some(r) => r,
        None => 0.3 * hsigma_norm_sq(&u0, sigma)?.sqrt(),
    };

    let (parts0, g0) = gradient_jk(tf, &u0, k_samples, sigma, q)?;
    let level_before = parts0.value;
    let mut level = level_before;
    let mut v = u0.zeros_like();
    let mut g = g0;
    project_out(&mut g, &basis, sigma)?;

    let mut recent: Vec<f64> = vec![level];
    let mut prev: Option<(SpectralField, SpectralField)> = None;
    let mut step = 0.25;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        let gnorm2 = hsigma_norm_sq(&g, sigma)?;
        let gnorm = gnorm2.sqrt();
        if gnorm < options.tolerance {
            converged = true;
            break;
        }
        if let Some((pv, pg)) = &prev {
            let mut dv = v.clone();
            dv.axpy(-1.0, pv)?;
            let mut dg = g.clone();
            dg.axpy(-1.0, pg)?;
            let num = hsigma_norm_sq(&dv, sigma)?;
            let den = hsigma_inner(&dv, &dg, sigma)?;
            if den > 1e-300 {
                step = (num / den).clamp(1e-8, 1e4);
            }
        }
        let fref = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-13 * fref.abs().max(1.0);
        let mut accepted = false;
        let mut s = step;
        for _ in 0..30 {
            let mut vt = v.clone();
            vt.axpy(-s, &g)?;
            project_out(&mut vt, &basis, sigma)?;
            let vt_norm = hsigma_norm_sq(&vt, sigma)?.sqrt();
            if vt_norm > radius {
                vt.scale(radius / vt_norm);
            }
            let mut ut = u0.clone();
            ut.axpy(1.0, &vt)?;
            if let Ok((pt, gt_raw)) = gradient_jk(tf, &ut, k_samples, sigma, q) {
                if pt.value <= fref - 1e-4 * s * gnorm2 + slack {
                    let mut gt = gt_raw;
                    project_out(&mut gt, &basis, sigma)?;
                    prev = Some((v.clone(), g.clone()));
                    v = vt;
                    g = gt;
                    level = pt.value;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
        recent.push(level);
        if recent.len() > 5 {
            recent.remove(0);
        }
        iterations += 1;
    }

    if !converged {
        converged = hsigma_norm_sq(&g, sigma)?.sqrt() < options.tolerance;
    }
    let norm = hsigma_norm_sq(&v, sigma)?.sqrt();
    let boundary = norm >= 0.999 * radius;
    Ok(VbarResult {
        vbar: v,
        norm,
        level_before,
        level_after: level,
        iterations,
        converged: converged && !boundary,
        boundary,
    })
}
