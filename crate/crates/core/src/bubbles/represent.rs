//! Nearest bubble-sum representation of a field.
//!
//! Given u (normalized internally to unit H^sigma norm) and a bubble count
//! p, finds parameters minimizing `||u - sum_i alpha_i delta_i||_{H^sigma}`
//! by damped Gauss-Newton over (log alpha_i, log lambda_i, center_i).  At a
//! minimizer the remainder v is H^sigma-orthogonal to the span of every
//! bubble and its lambda- and center-derivatives — the first-order
//! conditions are exactly that orthogonality — so the fit doubles as the
//! entry check for the neighborhoods of bubble towers the flow tracks.

use crate::bubbles::{
    bubble_coefficient, bubble_dcenter_raw, bubble_dlnlambda_raw, bubble_value_raw, epsilon_ij,
    functional_jk, BubbleParams,
};
use crate::error::{Error, Result};
use crate::spectral::{hsigma_inner, hsigma_norm_sq, validate_sigma, SpectralField, Transform};
use crate::sphere::SpherePoint;
use nalgebra::{DMatrix, DVector};

/// Knobs for the Gauss-Newton fit.
#[derive(Debug, Clone, Copy)]
pub struct RepresentOptions {
    pub max_iterations: usize,
    /// Stop when the worst normalized first-order residual drops below this.
    pub tolerance: f64,
}

impl Default for RepresentOptions {
    fn default() -> Self {
        RepresentOptions {
            max_iterations: 200,
            tolerance: 1e-10,
        }
    }
}

/// Outcome of a representation attempt.  `converged == false` is an
/// outcome, not an error: the best iterate found is still attached.
#[derive(Debug, Clone)]
pub struct RepresentationResult {
    /// Fitted bubbles; amplitudes refer to the unit-norm field `u / scale`.
    pub bubbles: Vec<BubbleParams>,
    /// The H^sigma norm of the input that was divided out.
    pub scale: f64,
    /// Remainder `v = u/scale - sum alpha_i delta_i` (projected).
    pub remainder: SpectralField,
    pub remainder_norm: f64,
    /// Worst |<v, w>| / ||w|| over the bubble-derivative span (unit input).
    pub v0_residual: f64,
    /// Pairwise interactions eps_ij for i < j, row-major.
    pub interactions: Vec<f64>,
    /// |J_K(u)^{n/(n-2s)} alpha_i^{4s/(n-2s)} K(a_i) - 1| per bubble; small
    /// values mean the configuration sits in the neighborhood-at-infinity
    /// carved out by K.
    pub membership: Vec<f64>,
    /// J_K of the (unit-normalized) input.
    pub functional: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected bubble and derivative fields for one bubble at unit amplitude.
pub(crate) struct Columns {
    pub(crate) value: SpectralField,
    pub(crate) dlnlambda: SpectralField,
    pub(crate) dcenter: Vec<SpectralField>,
}

pub(crate) fn project_columns(
    tf: &Transform,
    sigma: f64,
    cbar: f64,
    b: &BubbleParams,
    with_center: bool,
) -> Result<Columns> {
    let n = tf.n();
    let unit = BubbleParams {
        center: b.center.clone(),
        lambda: b.lambda,
        alpha: 1.0,
    };
    let grid = tf.grid();
    let mut val = vec![0.0; grid.len()];
    let mut dl = vec![0.0; grid.len()];
    for ((v, d), p) in val.iter_mut().zip(dl.iter_mut()).zip(&grid.points) {
        *v = bubble_value_raw(n, sigma, cbar, &unit, p);
        *d = bubble_dlnlambda_raw(n, sigma, cbar, &unit, p);
    }
    let mut dcenter = Vec::new();
    if with_center {
        for eta in unit.center.tangent_basis() {
            let mut dc = vec![0.0; grid.len()];
            for (d, p) in dc.iter_mut().zip(&grid.points) {
                *d = bubble_dcenter_raw(n, sigma, cbar, &unit, p, &eta);
            }
            dcenter.push(tf.forward(&dc)?);
        }
    }
    Ok(Columns {
        value: tf.forward(&val)?,
        dlnlambda: tf.forward(&dl)?,
        dcenter,
    })
}

fn nearest_pole(n: usize, p: &SpherePoint) -> SpherePoint {
    if p.coords()[n] >= 0.0 {
        SpherePoint::north_pole(n)
    } else {
        SpherePoint::south_pole(n)
    }
}

fn antipode(p: &SpherePoint) -> SpherePoint {
    let flipped: Vec<f64> = p.coords().iter().map(|c| -c).collect();
    SpherePoint::from_unnormalized(flipped).expect("antipode of a unit vector is a unit vector")
}

/// Greedy initialization: repeatedly take the largest remaining sample,
/// place a bubble there with the concentration matching the peak height,
/// and subtract its projection-free samples.
fn initialize(
    tf: &Transform,
    sigma: f64,
    cbar: f64,
    samples: &[f64],
    count: usize,
    energy: f64,
) -> Vec<BubbleParams> {
    let n = tf.n();
    let qp = (n as f64 - 2.0 * sigma) / 2.0;
    let alpha_guess = 1.0 / ((count as f64) * energy).sqrt();
    let mut residual = samples.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (imax, vmax) = residual
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i, *v))
            .unwrap_or((0, 0.0));
        let center = if tf.is_zonal() {
            nearest_pole(n, &tf.grid().points[imax])
        } else {
            tf.grid().points[imax].clone()
        };
        let lambda = (vmax.max(1e-12) / (cbar * alpha_guess))
            .powf(1.0 / qp)
            .clamp(1.05, 1e6);
        let b = BubbleParams {
            center,
            lambda,
            alpha: alpha_guess,
        };
        for (r, p) in residual.iter_mut().zip(&tf.grid().points) {
            *r -= bubble_value_raw(n, sigma, cbar, &b, p);
        }
        out.push(b);
    }
    out
}

/// Fit `count` bubbles to `u`.  `k` is the prescribed curvature, used only
/// for the membership diagnostics (the fit itself is metric, K-free).
pub fn optimal_representation(
    tf: &Transform,
    sigma: f64,
    u: &SpectralField,
    count: usize,
    k: &dyn Fn(&SpherePoint) -> f64,
    options: &RepresentOptions,
) -> Result<RepresentationResult> {
    validate_sigma(tf.n(), sigma)?;
    if count == 0 {
        return Err(Error::invalid("representation needs at least one bubble"));
    }
    let n = tf.n();
    let cbar = bubble_coefficient(n, sigma)?;
    let energy = crate::spectral::bubble_energy(n, sigma)?;
    let scale = hsigma_norm_sq(u, sigma)?.sqrt();
    if !(scale > 1e-300) {
        return Err(Error::degenerate("cannot represent the zero field"));
    }
    let unit = u.scaled(1.0 / scale);
    let samples = tf.inverse(&unit)?;
    let with_center = !tf.is_zonal();
    let per_bubble = if with_center { 2 + n } else { 2 };

    let mut bubbles = initialize(tf, sigma, cbar, &samples, count, energy);

    // One exact linear solve for the amplitudes at the initial shapes: the
    // model is linear in alpha, so this removes the worst of the greedy
    // estimate before Gauss-Newton starts.
    {
        let vals: Result<Vec<SpectralField>> = bubbles
            .iter()
            .map(|b| Ok(project_columns(tf, sigma, cbar, b, false)?.value))
            .collect();
        let vals = vals?;
        let mut gram = DMatrix::zeros(count, count);
        let mut rhs = DVector::zeros(count);
        for i in 0..count {
            for j in 0..count {
                gram[(i, j)] = hsigma_inner(&vals[i], &vals[j], sigma)?;
            }
            rhs[i] = hsigma_inner(&vals[i], &unit, sigma)?;
        }
        if let Some(sol) = gram.clone().cholesky().map(|c| c.solve(&rhs)) {
            for (b, a) in bubbles.iter_mut().zip(sol.iter()) {
                b.alpha = a.max(1e-6 / (count as f64 * energy).sqrt());
            }
        }
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut history_best = f64::INFINITY;

    // Residual of the current iterate, plus its Jacobian columns.
    let build = |bubbles: &[BubbleParams]| -> Result<(Vec<SpectralField>, SpectralField)> {
        let mut cols = Vec::with_capacity(count * per_bubble);
        let mut model = unit.zeros_like();
        for b in bubbles {
            let c = project_columns(tf, sigma, cbar, b, with_center)?;
            model.axpy(b.alpha, &c.value)?;
            cols.push(c.value.scaled(b.alpha)); // d model / d ln alpha
            cols.push(c.dlnlambda.scaled(b.alpha)); // d model / d ln lambda
            for dc in &c.dcenter {
                cols.push(dc.scaled(b.alpha / b.lambda)); // lambda-scaled center step
            }
        }
        let mut r = unit.clone();
        r.axpy(-1.0, &model)?;
        Ok((cols, r))
    };

    let model_residual_sq = |bubbles: &[BubbleParams]| -> Result<f64> {
        let mut model = unit.zeros_like();
        for b in bubbles {
            let c = project_columns(tf, sigma, cbar, b, false)?;
            model.axpy(b.alpha, &c.value)?;
        }
        let mut r = unit.clone();
        r.axpy(-1.0, &model)?;
        hsigma_norm_sq(&r, sigma)
    };

    let apply_step = |bubbles: &[BubbleParams], delta: &DVector<f64>, t: f64| -> Vec<BubbleParams> {
        let mut out = Vec::with_capacity(count);
        for (bi, b) in bubbles.iter().enumerate() {
            let base = bi * per_bubble;
            let da = (t * delta[base]).clamp(-2.0, 2.0);
            let dl = (t * delta[base + 1]).clamp(-2.0, 2.0);
            let alpha = (b.alpha.ln() + da).exp();
            let lambda = (b.lambda.ln() + dl).exp().clamp(1e-3, 1e9);
            let center = if with_center {
                let etas = b.center.tangent_basis();
                let mut step = vec![0.0; n + 1];
                for (j, eta) in etas.iter().enumerate() {
                    let dy = (t * delta[base + 2 + j]).clamp(-2.0, 2.0) / b.lambda;
                    for (scomp, e) in step.iter_mut().zip(eta) {
                        *scomp += dy * e;
                    }
                }
                b.center.exp_map(&step).unwrap_or_else(|_| b.center.clone())
            } else {
                b.center.clone()
            };
            out.push(BubbleParams {
                center,
                lambda,
                alpha,
            });
        }
        out
    };

    let dim = count * per_bubble;
    let mut rnorm2 = model_residual_sq(&bubbles)?;
    while iterations < options.max_iterations {
        iterations += 1;
        let (cols, r) = build(&bubbles)?;
        // First-order condition: the residual is orthogonal to every column.
        let mut foc: f64 = 0.0;
        let mut rhs = DVector::zeros(dim);
        for (i, c) in cols.iter().enumerate() {
            let ip = hsigma_inner(c, &r, sigma)?;
            rhs[i] = ip;
            let cn = hsigma_norm_sq(c, sigma)?.sqrt();
            if cn > 1e-300 {
                foc = foc.max(ip.abs() / cn);
            }
        }
        if foc < options.tolerance {
            converged = true;
            break;
        }
        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let ip = hsigma_inner(&cols[i], &cols[j], sigma)?;
                gram[(i, j)] = ip;
                gram[(j, i)] = ip;
            }
        }
        // Ridge escalation keeps the solve meaningful when columns collapse
        // (e.g. two bubbles merging).
        let mut delta = None;
        let trace = gram.trace().max(1e-300);
        for ridge in [0.0, 1e-12, 1e-8, 1e-4, 1e-1] {
            let mut g = gram.clone();
            for i in 0..dim {
                g[(i, i)] += ridge * trace / dim as f64;
            }
            if let Some(ch) = g.cholesky() {
                delta = Some(ch.solve(&rhs));
                break;
            }
        }
        let delta = match delta {
            Some(d) => d,
            None => break,
        };
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..12 {
            let trial = apply_step(&bubbles, &delta, t);
            let trial_r = model_residual_sq(&trial)?;
            if trial_r < rnorm2 {
                bubbles = trial;
                rnorm2 = trial_r;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break; // stalled: no direction of decrease at this resolution
        }
        if rnorm2 < history_best {
            history_best = rnorm2;
        }
    }

    // Normalize lambda >= 1 through the exact inversion identity
    // delta_{a,lambda} = delta_{-a,1/lambda}.
    for b in bubbles.iter_mut() {
        if b.lambda < 1.0 {
            b.center = antipode(&b.center);
            b.lambda = 1.0 / b.lambda;
        }
    }

    // Final report at the accepted iterate.
    let (cols, remainder) = build(&bubbles)?;
    let remainder_norm = hsigma_norm_sq(&remainder, sigma)?.sqrt();
    let mut v0_residual: f64 = 0.0;
    for c in &cols {
        let cn = hsigma_norm_sq(c, sigma)?.sqrt();
        if cn > 1e-300 {
            v0_residual = v0_residual.max(hsigma_inner(c, &remainder, sigma)?.abs() / cn);
        }
    }
    if !converged && v0_residual < options.tolerance {
        converged = true;
    }
    let mut interactions = Vec::new();
    for i in 0..count {
        for j in (i + 1)..count {
            interactions.push(epsilon_ij(n, sigma, &bubbles[i], &bubbles[j])?);
        }
    }
    let k_samples = tf.grid().sample(|p| k(p));
    let functional = functional_jk(tf, &unit, &k_samples, sigma)?.value;
    let expo_j = n as f64 / (n as f64 - 2.0 * sigma);
    let expo_a = 4.0 * sigma / (n as f64 - 2.0 * sigma);
    let membership = bubbles
        .iter()
        .map(|b| (functional.powf(expo_j) * b.alpha.powf(expo_a) * k(&b.center) - 1.0).abs())
        .collect();

    Ok(RepresentationResult {
        bubbles,
        scale,
        remainder,
        remainder_norm,
        v0_residual,
        interactions,
        membership,
        functional,
        iterations,
        converged,
    })
}
