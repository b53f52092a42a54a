//! Descent flow of the curvature functional on the unit sphere of H^sigma.
//!
//! The flow direction is the H^sigma-metric gradient of J_K (steepest
//! descent preconditioned by P_sigma), the iterate is renormalized to unit
//! norm after every step, and an Armijo backtracking line search makes the
//! level history monotone by construction.  Because the discrete bubble
//! family saturates at concentrations comparable to the spectral degree,
//! a vanishing gradient alone cannot distinguish genuine critical points
//! from truncated blow-up: every run keeps fitting bubble sums to the
//! iterate and classifies persistent concentration growth as
//! `Concentrated` rather than `Converged`.

use crate::bubbles::represent::{optimal_representation, RepresentOptions, RepresentationResult};
use crate::bubbles::{
    functional_jk_exponent, functional_parts_from_samples, validate_functional_inputs,
    FunctionalParts,
};
use crate::error::{Error, Result};
use crate::spectral::{
    apply_psigma, apply_psigma_inverse, critical_exponent, hsigma_inner, hsigma_norm_sq,
    validate_sigma, SpectralField, Transform,
};
use crate::sphere::SpherePoint;
use serde::{Deserialize, Serialize};

/// Terminal state of a flow run.  `MaxIterations` is an outcome, not an
/// error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    Concentrated,
    MaxIterations,
}

/// One periodic bubble-fit observation along the flow.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConcentrationCheck {
    pub step: usize,
    /// Largest fitted concentration among the bubbles of the best fit.
    pub lambda: f64,
    /// H^sigma norm of the fit remainder (unit-norm iterate).
    pub remainder: f64,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub status: FlowStatus,
    /// Final iterate, unit H^sigma norm.
    pub field: SpectralField,
    pub level_history: Vec<f64>,
    pub gradient_norm_history: Vec<f64>,
    pub checks: Vec<ConcentrationCheck>,
    /// Bubble fit of the final iterate when the run concentrated.
    pub fit: Option<RepresentationResult>,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub max_steps: usize,
    pub gradient_tolerance: f64,
    /// Period of the bubble-fit concentration checks (0 disables them).
    pub check_every: usize,
    /// Largest bubble count tried by the periodic fits.
    pub max_bubbles: usize,
    /// Concentration considered "blown up"; `None` picks a resolution-aware
    /// default.
    pub lambda_threshold: Option<f64>,
    /// Fit remainder below which the iterate counts as bubble-shaped.
    pub remainder_threshold: f64,
    /// Allowed consecutive steps with > 1% negative mass before aborting.
    pub negative_mass_patience: usize,
    pub initial_step: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            max_steps: 2000,
            gradient_tolerance: 1e-8,
            check_every: 25,
            max_bubbles: 2,
            lambda_threshold: None,
            remainder_threshold: 0.1,
            negative_mass_patience: 25,
            initial_step: 1.0,
        }
    }
}

/// The truncated bubble family cannot concentrate past lambda ~ degree: the
/// projected profile stops changing and the gradient vanishes there.  The
/// detector must therefore trip well below the degree; a fixed astronomical
/// cutoff would never fire at practical resolutions.
fn lambda_threshold_for(options: &FlowOptions, lmax: usize) -> f64 {
    options
        .lambda_threshold
        .unwrap_or_else(|| (0.3 * lmax as f64).max(8.0).min(1e3))
}

/// Level and H^sigma gradient of the exponent-`e` functional at u.
/// `<g, h>_{H^sigma}` is the directional derivative of the functional:
/// `g = (2 / D^{2/e}) (u - (A/D) P_sigma^{-1}(K u_+^{e-1}))` with
/// `A = ||u||^2`, `D = integral K u_+^e`.
pub fn gradient_jk(
    tf: &Transform,
    u: &SpectralField,
    k_samples: &[f64],
    sigma: f64,
    exponent: f64,
) -> Result<(FunctionalParts, SpectralField)> {
    validate_functional_inputs(tf, k_samples, sigma, exponent)?;
    let energy = hsigma_norm_sq(u, sigma)?;
    let samples = tf.inverse(u)?;
    let parts =
        functional_parts_from_samples(tf, &samples, k_samples, exponent, energy, u.l2_norm())?;
    // Positive part floored before the power so discrete iterates straddling
    // zero stay differentiable.
    let w: Vec<f64> = samples
        .iter()
        .zip(k_samples)
        .map(|(&s, &k)| k * (s.max(0.0) + 1e-14).powf(exponent - 1.0))
        .collect();
    let nonlinear = apply_psigma_inverse(&tf.forward(&w)?, sigma)?;
    let (a, d) = (parts.energy, parts.curvature_integral);
    let mut g = u.clone();
    g.axpy(-a / d, &nonlinear)?;
    g.scale(2.0 / d.powf(2.0 / exponent));
    Ok((parts, g))
}

/// Project a gradient onto the H^sigma-tangent space of the unit sphere at
/// u (scale invariance makes the normal component ~ 0 already).
pub fn tangential_projection(
    g: &SpectralField,
    u: &SpectralField,
    sigma: f64,
) -> Result<SpectralField> {
    let uu = hsigma_norm_sq(u, sigma)?;
    if !(uu > 1e-300) {
        return Err(Error::degenerate("cannot project at the zero field"));
    }
    let gu = hsigma_inner(g, u, sigma)?;
    let mut t = g.clone();
    t.axpy(-gu / uu, u)?;
    Ok(t)
}

fn representation_check(
    tf: &Transform,
    sigma: f64,
    u: &SpectralField,
    k_point: Option<&dyn Fn(&SpherePoint) -> f64>,
    max_bubbles: usize,
) -> Result<RepresentationResult> {
    let rep_opts = RepresentOptions {
        max_iterations: 80,
        tolerance: 1e-9,
    };
    let fallback = |_: &SpherePoint| 1.0;
    let kf: &dyn Fn(&SpherePoint) -> f64 = match k_point {
        Some(f) => f,
        None => &fallback,
    };
    let mut best = optimal_representation(tf, sigma, u, 1, kf, &rep_opts)?;
    if best.remainder_norm > 0.33 {
        for p in 2..=max_bubbles {
            let cand = optimal_representation(tf, sigma, u, p, kf, &rep_opts)?;
            if cand.remainder_norm < best.remainder_norm {
                best = cand;
            }
        }
    }
    Ok(best)
}

fn max_lambda(rep: &RepresentationResult) -> f64 {
    rep.bubbles.iter().map(|b| b.lambda).fold(0.0, f64::max)
}

/// Blow-up rule: concentration above threshold and growing across the last
/// three checks while the fit remainder shrinks below its threshold.
fn concentration_detected(checks: &[ConcentrationCheck], thr_lambda: f64, thr_v: f64) -> bool {
    if checks.len() < 3 {
        return false;
    }
    let [a, b, c] = [
        checks[checks.len() - 3],
        checks[checks.len() - 2],
        checks[checks.len() - 1],
    ];
    c.lambda > thr_lambda
        && c.lambda > b.lambda
        && b.lambda > a.lambda
        && c.remainder < thr_v
        && c.remainder <= b.remainder
        && b.remainder <= a.remainder
}

/// Run the descent flow from `u0` with the given functional exponent (the
/// critical one for the geometric problem; smaller for subcritical
/// continuation).  `k_point` feeds the membership diagnostics of the
/// periodic bubble fits when available.
pub fn flow_run(
    tf: &Transform,
    sigma: f64,
    u0: &SpectralField,
    k_samples: &[f64],
    exponent: f64,
    k_point: Option<&dyn Fn(&SpherePoint) -> f64>,
    options: &FlowOptions,
) -> Result<FlowResult> {
    validate_functional_inputs(tf, k_samples, sigma, exponent)?;
    let norm0 = hsigma_norm_sq(u0, sigma)?.sqrt();
    if !(norm0 > 1e-300) {
        return Err(Error::degenerate("flow needs a nonzero starting field"));
    }
    let mut u = u0.scaled(1.0 / norm0);
    let thr_lambda = lambda_threshold_for(options, u0.lmax);
    let mut level_history = Vec::new();
    let mut gradient_norm_history = Vec::new();
    let mut checks = Vec::new();
    let mut fit = None;
    let mut step_size = options.initial_step;
    let mut neg_streak = 0usize;
    let mut steps = 0usize;
    let status;

    loop {
        let (parts, g) = gradient_jk(tf, &u, k_samples, sigma, exponent)?;
        if parts.negative_mass_fraction > 0.01 {
            neg_streak += 1;
        } else {
            neg_streak = 0;
        }
        if neg_streak > options.negative_mass_patience {
            return Err(Error::degenerate(format!(
                "flow is leaving the positive cone: negative mass fraction \
                 {:.3} persisted beyond {} steps",
                parts.negative_mass_fraction, options.negative_mass_patience
            )));
        }
        let gt = tangential_projection(&g, &u, sigma)?;
        let gnorm2 = hsigma_norm_sq(&gt, sigma)?;
        let gnorm = gnorm2.sqrt();
        level_history.push(parts.value);
        gradient_norm_history.push(gnorm);

        if gnorm < options.gradient_tolerance {
            // Stationary: decide converged vs silently saturated blow-up.
            let rep = representation_check(tf, sigma, &u, k_point, options.max_bubbles)?;
            let lam = max_lambda(&rep);
            checks.push(ConcentrationCheck {
                step: steps,
                lambda: lam,
                remainder: rep.remainder_norm,
            });
            if lam > thr_lambda && rep.remainder_norm < options.remainder_threshold {
                status = FlowStatus::Concentrated;
                fit = Some(rep);
            } else {
                status = FlowStatus::Converged;
            }
            break;
        }
        if steps >= options.max_steps {
            status = FlowStatus::MaxIterations;
            break;
        }
        if options.check_every > 0 && steps > 0 && steps % options.check_every == 0 {
            let rep = representation_check(tf, sigma, &u, k_point, options.max_bubbles)?;
            checks.push(ConcentrationCheck {
                step: steps,
                lambda: max_lambda(&rep),
                remainder: rep.remainder_norm,
            });
            if concentration_detected(&checks, thr_lambda, options.remainder_threshold) {
                status = FlowStatus::Concentrated;
                fit = Some(rep);
                break;
            }
        }

        let mut accepted = false;
        let mut s = step_size;
        for _ in 0..40 {
            let mut trial = u.clone();
            trial.axpy(-s, &gt)?;
            let tn = hsigma_norm_sq(&trial, sigma)?.sqrt();
            if tn > 1e-300 {
                trial.scale(1.0 / tn);
                if let Ok(p2) = functional_jk_exponent(tf, &trial, k_samples, sigma, exponent) {
                    if p2.value <= parts.value - 1e-4 * s * gnorm2 {
                        u = trial;
                        accepted = true;
                        step_size = (s * 1.8).min(1e3);
                        break;
                    }
                }
            }
            s *= 0.5;
            if s < 1e-18 {
                break;
            }
        }
        if !accepted {
            // No descent direction left at this resolution.
            status = if gnorm < options.gradient_tolerance {
                FlowStatus::Converged
            } else {
                FlowStatus::MaxIterations
            };
            break;
        }
        steps += 1;
    }

    Ok(FlowResult {
        status,
        field: u,
        level_history,
        gradient_norm_history,
        checks,
        fit,
        steps,
    })
}

/// The unit-constant start used by continuation when no warm start exists.
pub fn constant_start(tf: &Transform) -> Result<SpectralField> {
    let ones = vec![1.0; tf.grid().len()];
    tf.forward(&ones)
}

/// Solve the subcritical problem with exponent `2n/(n-2s) - eps`.
pub fn subcritical_solve(
    tf: &Transform,
    sigma: f64,
    k_samples: &[f64],
    eps: f64,
    u0: Option<&SpectralField>,
    options: &FlowOptions,
) -> Result<FlowResult> {
    let q = critical_exponent(tf.n(), sigma)?;
    if !(eps > 0.0 && eps < q - 2.0) {
        return Err(Error::invalid(format!(
            "subcritical shift must lie in (0, {:.6}), got {eps}",
            q - 2.0
        )));
    }
    let start = match u0 {
        Some(u) => u.clone(),
        None => constant_start(tf)?,
    };
    flow_run(tf, sigma, &start, k_samples, q - eps, None, options)
}

/// Peak-to-mean ratio of the field samples; grows along branches that
/// approach concentration.
pub fn max_mean_ratio(tf: &Transform, u: &SpectralField) -> Result<f64> {
    let samples = tf.inverse(u)?;
    let mut mx = f64::NEG_INFINITY;
    let mut mass = 0.0;
    let mut vol = 0.0;
    for (&w, &s) in tf.grid().weights.iter().zip(&samples) {
        mx = mx.max(s);
        mass += w * s;
        vol += w;
    }
    let mean = mass / vol;
    if !(mean.abs() > 1e-300) {
        return Err(Error::degenerate("mean of the field vanishes"));
    }
    Ok(mx / mean)
}

/// One solved point along a subcritical continuation branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchRecord {
    pub eps: f64,
    pub level: f64,
    pub max_mean_ratio: f64,
    pub steps: usize,
    pub status: FlowStatus,
}

/// Geometric continuation `eps_start -> eps_end` (factor in (0,1)), warm
/// starting every solve from the previous solution.  Returns the branch
/// records and the last solution.
pub fn subcritical_branch(
    tf: &Transform,
    sigma: f64,
    k_samples: &[f64],
    eps_start: f64,
    eps_end: f64,
    factor: f64,
    options: &FlowOptions,
) -> Result<(Vec<BranchRecord>, SpectralField)> {
    if !(eps_end > 0.0 && eps_end <= eps_start) || !(factor > 0.0 && factor < 1.0) {
        return Err(Error::invalid(
            "continuation needs 0 < eps_end <= eps_start and factor in (0,1)",
        ));
    }
    let mut eps = eps_start;
    let mut warm: Option<SpectralField> = None;
    let mut records = Vec::new();
    loop {
        let r = subcritical_solve(tf, sigma, k_samples, eps, warm.as_ref(), options)?;
        records.push(BranchRecord {
            eps,
            level: *r.level_history.last().expect("nonempty history"),
            max_mean_ratio: max_mean_ratio(tf, &r.field)?,
            steps: r.steps,
            status: r.status,
        });
        warm = Some(r.field);
        if eps <= eps_end * (1.0 + 1e-12) {
            break;
        }
        eps = (eps * factor).max(eps_end);
    }
    Ok((records, warm.expect("at least one solve")))
}

/// Raw and normalized Kazdan-Warner pairing of u with the conformal field
/// of the coordinate `xi_j` (j counted 1..=n+1): the integral of the j-th
/// component of the tangential curvature gradient against `u_+^{2n/(n-2s)}`.
/// Any genuine critical-exponent solution annihilates it, so it serves as a
/// solver-independent quality gate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KazdanWarner {
    pub raw: f64,
    pub normalized: f64,
}

pub fn kazdan_warner_integral(
    tf: &Transform,
    u: &SpectralField,
    sigma: f64,
    k_gradient: &dyn Fn(&SpherePoint) -> Vec<f64>,
    j: usize,
) -> Result<KazdanWarner> {
    let n = tf.n();
    validate_sigma(n, sigma)?;
    if j == 0 || j > n + 1 {
        return Err(Error::invalid(format!(
            "coordinate index must lie in 1..={}, got {j}",
            n + 1
        )));
    }
    let q = critical_exponent(n, sigma)?;
    let samples = tf.inverse(u)?;
    let mut raw = 0.0;
    let mut mass = 0.0;
    let mut gmax: f64 = 0.0;
    for ((&w, &s), p) in tf
        .grid()
        .weights
        .iter()
        .zip(&samples)
        .zip(&tf.grid().points)
    {
        let g = k_gradient(p);
        if g.len() != n + 1 {
            return Err(Error::mismatch(
                "curvature gradient must be an ambient vector",
            ));
        }
        let x = p.coords();
        let gx: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
        let gt_j = g[j - 1] - gx * x[j - 1];
        let gt_norm2: f64 = g
            .iter()
            .zip(x)
            .map(|(a, b)| {
                let t = a - gx * b;
                t * t
            })
            .sum();
        gmax = gmax.max(gt_norm2.sqrt());
        if s > 0.0 {
            let up = s.powf(q);
            raw += w * gt_j * up;
            mass += w * up;
        }
    }
    let normalized = if gmax > 0.0 && mass > 0.0 {
        raw / (mass * gmax)
    } else {
        0.0
    };
    Ok(KazdanWarner { raw, normalized })
}

/// Relative Euler-Lagrange residual `||P_sigma u - mu K u_+^{e-1}|| /
/// ||P_sigma u||` with the multiplier mu fitted by least squares.
/// Returns (residual, mu).
pub fn euler_lagrange_residual(
    tf: &Transform,
    u: &SpectralField,
    k_samples: &[f64],
    sigma: f64,
    exponent: f64,
) -> Result<(f64, f64)> {
    validate_functional_inputs(tf, k_samples, sigma, exponent)?;
    let pu = apply_psigma(u, sigma)?;
    let samples = tf.inverse(u)?;
    let w: Vec<f64> = samples
        .iter()
        .zip(k_samples)
        .map(|(&s, &k)| k * s.max(0.0).powf(exponent - 1.0))
        .collect();
    let f = tf.forward(&w)?;
    let ff = f.l2_inner(&f)?;
    let pnorm = pu.l2_norm();
    if !(pnorm > 1e-300) || !(ff > 1e-300) {
        return Err(Error::degenerate(
            "Euler-Lagrange residual undefined for vanishing fields",
        ));
    }
    let mu = pu.l2_inner(&f)? / ff;
    let mut r = pu.clone();
    r.axpy(-mu, &f)?;
    Ok((r.l2_norm() / pnorm, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::{bubble_spectral, BubbleParams};
    use crate::spectral::beckner_constant;
    use crate::sphere::GridMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn monotone(levels: &[f64]) -> bool {
        levels.windows(2).all(|w| w[1] <= w[0] + 1e-15)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 24, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let k_samples = tf.grid().sample(|p| 1.5 + 0.5 * p.coords()[n]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut u = constant_start(&tf).unwrap();
        let bump = tf.random_field(&mut rng, 12, 0.8);
        u.axpy(0.3 / hsigma_norm_sq(&bump, sigma).unwrap().sqrt(), &bump)
            .unwrap();
        let (_, g) = gradient_jk(&tf, &u, &k_samples, sigma, q).unwrap();
        for seed in 0..5 {
            let mut hrng = ChaCha8Rng::seed_from_u64(100 + seed);
            let h = tf.random_field(&mut hrng, 12, 0.8);
            let t = 1e-5;
            let mut up = u.clone();
            up.axpy(t, &h).unwrap();
            let mut um = u.clone();
            um.axpy(-t, &h).unwrap();
            let jp = functional_jk_exponent(&tf, &up, &k_samples, sigma, q)
                .unwrap()
                .value;
            let jm = functional_jk_exponent(&tf, &um, &k_samples, sigma, q)
                .unwrap()
                .value;
            let fd = (jp - jm) / (2.0 * t);
            let an = hsigma_inner(&g, &h, sigma).unwrap();
            assert!(
                (an - fd).abs() <= 1e-6 * fd.abs().max(1e-12),
                "seed {seed}: analytic {an:.12e} vs fd {fd:.12e}"
            );
        }
        // Homogeneity: the tangential projection removes the u-component.
        let gt = tangential_projection(&g, &u, sigma).unwrap();
        let cos = hsigma_inner(&gt, &u, sigma).unwrap()
            / (hsigma_norm_sq(&gt, sigma).unwrap().sqrt() * hsigma_norm_sq(&u, sigma).unwrap().sqrt());
        assert!(cos.abs() < 1e-10, "tangency violated: {cos:.3e}");
    }

    #[test]
    fn gradient_vanishes_at_known_critical_points() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 64, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let ones = vec![1.0; tf.grid().len()];
        let k = ones.clone();
        let u = tf.forward(&ones).unwrap();
        let (_, g) = gradient_jk(&tf, &u, &k, sigma, q).unwrap();
        assert!(hsigma_norm_sq(&g, sigma).unwrap().sqrt() < 1e-10);
        let b = BubbleParams::standard(SpherePoint::north_pole(n), 4.0);
        let ub = bubble_spectral(&tf, sigma, &[b]).unwrap();
        let (_, gb) = gradient_jk(&tf, &ub, &k, sigma, q).unwrap();
        // Truncation floor only: exp(-2L/lambda) is ~ 1e-14 here.
        assert!(hsigma_norm_sq(&gb, sigma).unwrap().sqrt() < 1e-9);
    }

    #[test]
    fn flow_converges_for_constant_curvature() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 24, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let k = vec![1.0; tf.grid().len()];
        let u0 = tf.forward(&tf.grid().sample(|p| 1.0 + 0.1 * p.coords()[n])).unwrap();
        let r = flow_run(&tf, sigma, &u0, &k, q, None, &FlowOptions::default()).unwrap();
        assert_eq!(r.status, FlowStatus::Converged, "history: {:?}", r.checks);
        assert!(monotone(&r.level_history));
        let s = beckner_constant(n, sigma).unwrap();
        let last = *r.level_history.last().unwrap();
        assert!(
            (last - s).abs() < 1e-6 * s,
            "level {last:.12} vs sharp constant {s:.12}"
        );
    }

    #[test]
    fn flow_concentrates_for_linear_curvature() {
        // K = xi_4 + 2 admits no solution; the flow must blow up and say so.
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 32, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let k = tf.grid().sample(|p| 2.0 + p.coords()[n]);
        let u0 = constant_start(&tf).unwrap();
        let opts = FlowOptions {
            max_steps: 4000,
            ..FlowOptions::default()
        };
        let r = flow_run(&tf, sigma, &u0, &k, q, None, &opts).unwrap();
        assert_eq!(r.status, FlowStatus::Concentrated, "checks: {:?}", r.checks);
        assert!(monotone(&r.level_history));
        let fit = r.fit.expect("concentrated run attaches its bubble fit");
        assert!(fit.bubbles[0].lambda > 8.0, "lambda {}", fit.bubbles[0].lambda);
        // Blow-up happens at the curvature maximum (north pole).
        assert!(fit.bubbles[0].center.coords()[n] > 0.99);
    }

    #[test]
    fn level_histories_are_scale_equivariant() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 16, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let k = tf.grid().sample(|p| 1.3 + 0.3 * p.coords()[n]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut u0 = constant_start(&tf).unwrap();
        let bump = tf.random_field(&mut rng, 8, 0.7);
        u0.axpy(0.05, &bump).unwrap();
        let opts = FlowOptions {
            max_steps: 40,
            check_every: 0,
            ..FlowOptions::default()
        };
        let r1 = flow_run(&tf, sigma, &u0, &k, q, None, &opts).unwrap();
        let r2 = flow_run(&tf, sigma, &u0.scaled(3.7), &k, q, None, &opts).unwrap();
        assert_eq!(r1.level_history.len(), r2.level_history.len());
        for (a, b) in r1.level_history.iter().zip(&r2.level_history) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn persistent_negative_mass_aborts_the_flow() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 16, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let k = vec![1.0; tf.grid().len()];
        // Roughly half the sphere negative; a frozen flow cannot heal it.
        let u0 = tf.forward(&tf.grid().sample(|p| p.coords()[n] - 0.2)).unwrap();
        let opts = FlowOptions {
            negative_mass_patience: 2,
            initial_step: 1e-9,
            max_steps: 10,
            ..FlowOptions::default()
        };
        match flow_run(&tf, sigma, &u0, &k, q, None, &opts) {
            Err(Error::Degenerate(msg)) => assert!(msg.contains("cone"), "{msg}"),
            other => panic!("expected cone-exit error, got {other:?}"),
        }
    }

    #[test]
    fn subcritical_constant_curvature_returns_the_constant() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 16, GridMode::Zonal).unwrap();
        let k = vec![1.0; tf.grid().len()];
        let r = subcritical_solve(&tf, sigma, &k, 0.2, None, &FlowOptions::default()).unwrap();
        assert_eq!(r.status, FlowStatus::Converged);
        let ratio = max_mean_ratio(&tf, &r.field).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn subcritical_branch_sharpens_and_warm_start_saves_steps() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 24, GridMode::Zonal).unwrap();
        let k = tf.grid().sample(|p| 2.0 + p.coords()[n]);
        let opts = FlowOptions {
            gradient_tolerance: 1e-7,
            check_every: 0,
            max_steps: 6000,
            ..FlowOptions::default()
        };
        let (branch, _) = subcritical_branch(&tf, sigma, &k, 0.25, 0.0625, 0.5, &opts).unwrap();
        assert_eq!(branch.len(), 3);
        assert!(
            branch.windows(2).all(|w| w[1].max_mean_ratio > w[0].max_mean_ratio),
            "ratios {:?}",
            branch.iter().map(|b| b.max_mean_ratio).collect::<Vec<_>>()
        );
        // Warm starting at eps = 0.25 from the eps = 0.35 solution beats a
        // cold start from the constant.
        let prev = subcritical_solve(&tf, sigma, &k, 0.35, None, &opts).unwrap();
        let warm = subcritical_solve(&tf, sigma, &k, 0.25, Some(&prev.field), &opts).unwrap();
        let cold = subcritical_solve(&tf, sigma, &k, 0.25, None, &opts).unwrap();
        assert!(
            warm.steps < cold.steps,
            "warm {} vs cold {}",
            warm.steps,
            cold.steps
        );
    }

    #[test]
    fn kazdan_warner_vanishes_exactly_for_constant_curvature() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 24, GridMode::Zonal).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut u = constant_start(&tf).unwrap();
        let bump = tf.random_field(&mut rng, 10, 0.6);
        u.axpy(0.2, &bump).unwrap();
        let zero_grad = |_: &SpherePoint| vec![0.0; n + 1];
        for j in 1..=n + 1 {
            let kw = kazdan_warner_integral(&tf, &u, sigma, &zero_grad, j).unwrap();
            assert_eq!(kw.raw, 0.0);
            assert_eq!(kw.normalized, 0.0);
        }
    }

    #[test]
    fn kazdan_warner_detects_the_linear_obstruction() {
        // K = xi_4 + 2, bubble at the north pole: the pairing with xi_4 is
        // strictly positive (the classical nonexistence mechanism).
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 48, GridMode::Zonal).unwrap();
        let b = BubbleParams::standard(SpherePoint::north_pole(n), 4.0);
        let u = bubble_spectral(&tf, sigma, &[b]).unwrap();
        let grad = |_: &SpherePoint| {
            let mut g = vec![0.0; n + 1];
            g[n] = 1.0;
            g
        };
        let kw = kazdan_warner_integral(&tf, &u, sigma, &grad, n + 1).unwrap();
        assert!(kw.raw > 1e-3, "{kw:?}");
        assert!(kw.normalized > 1e-3);
        assert!(matches!(
            kazdan_warner_integral(&tf, &u, sigma, &grad, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn euler_lagrange_residual_is_small_for_bubbles() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 64, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let k = vec![1.0; tf.grid().len()];
        let b = BubbleParams::standard(SpherePoint::north_pole(n), 3.0);
        let u = bubble_spectral(&tf, sigma, &[b]).unwrap();
        let (res, mu) = euler_lagrange_residual(&tf, &u, &k, sigma, q).unwrap();
        assert!(res < 1e-6, "residual {res:.3e}");
        assert!((mu - 1.0).abs() < 1e-3, "mu {mu}");
    }

    #[test]
    fn flow_rejects_bad_inputs() {
        let (n, sigma) = (3, 0.25);
        let tf = Transform::new(n, 8, GridMode::Zonal).unwrap();
        let q = critical_exponent(n, sigma).unwrap();
        let k = vec![1.0; tf.grid().len()];
        let zero = SpectralField::zeros(n, 8, true);
        assert!(matches!(
            flow_run(&tf, sigma, &zero, &k, q, None, &FlowOptions::default()),
            Err(Error::Degenerate(_))
        ));
        let u = constant_start(&tf).unwrap();
        assert!(matches!(
            subcritical_solve(&tf, sigma, &k, 99.0, Some(&u), &FlowOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
    }
}
