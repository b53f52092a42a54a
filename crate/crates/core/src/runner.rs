//! Command execution: turns a parsed config into artifacts on disk.
//!
//! Exit-code contract (also used by the CLI):
//!
//! * 0 — success, including "the flow concentrated": a valid scientific
//!   outcome;
//! * 1 — negative scientific outcome (verdict false, calibration outside
//!   tolerance, iteration cap hit) — the artifacts are still written;
//! * 2 — configuration error;
//! * 3 — numerical failure (solver breakdown, or a "converged" flow that
//!   violates the balance identity for conformal coordinate fields).

use crate::config::{GridChoice, KSpec, RunConfig};
use crate::error::{Error, Result};
use crate::flow::{
    constant_start, flow_run, kazdan_warner_integral, subcritical_solve, FlowOptions, FlowResult,
    FlowStatus,
};
use crate::kfunc::{
    differentials, AxisQuadraticK, ConstantK, KFunction, LinearK, SpectralK, FD_GRADIENT_STEP,
    FD_HESSIAN_STEP,
};
use crate::morse::{existence_verdict, find_critical_points, FindOptions};
use crate::report::{read_field, write_csv, write_field, write_json_report, RunMeta};
use crate::spectral::{
    apply_psigma, critical_exponent, psigma_eigenvalue, SpectralField, Transform,
};
use crate::sphere::{GridMode, SpherePoint};
use crate::bubbles::{bubble_spectral, BubbleParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Normalized balance-identity threshold above which a "converged" flow is
/// treated as a numerical failure.
const KW_GATE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    BubbleResidual,
    ExpansionVerify,
    Flow,
    Existence,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::BubbleResidual => "bubble-residual",
            CommandKind::ExpansionVerify => "expansion-verify",
            CommandKind::Flow => "flow",
            CommandKind::Existence => "existence",
        }
    }

    pub fn from_name(name: &str) -> Option<CommandKind> {
        [
            CommandKind::Spectrum,
            CommandKind::BubbleResidual,
            CommandKind::ExpansionVerify,
            CommandKind::Flow,
            CommandKind::Existence,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub exit_code: i32,
    /// One-line outcome for the terminal.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Map an error to the exit-code contract.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}

fn build_transform(cfg: &RunConfig) -> Result<Transform> {
    let mode = match cfg.grid {
        GridChoice::Zonal => GridMode::Zonal,
        GridChoice::Full => GridMode::Full,
    };
    Transform::new(cfg.n, cfg.lmax, mode)
}

/// Curvature file contents adapted to the point-function interface.
struct FileK {
    tf: Transform,
    field: SpectralField,
}

impl KFunction for FileK {
    fn value(&self, p: &SpherePoint) -> f64 {
        SpectralK {
            tf: &self.tf,
            field: &self.field,
        }
        .value(p)
    }
}

fn k_function(cfg: &RunConfig) -> Result<Box<dyn KFunction>> {
    Ok(match &cfg.curvature {
        KSpec::Constant { value } => Box::new(ConstantK(*value)),
        KSpec::Linear {
            offset,
            amplitude,
            axis,
        } => {
            let mut direction = vec![0.0; cfg.n + 1];
            direction[axis - 1] = *amplitude;
            Box::new(LinearK {
                offset: *offset,
                direction,
            })
        }
        KSpec::TwoPeak {
            amplitude,
            axis,
            center,
        } => {
            let c = center.unwrap_or(1.0 / (cfg.n as f64 + 1.0));
            Box::new(AxisQuadraticK {
                base: 1.0 - amplitude * c,
                amp: *amplitude,
                axis: axis - 1,
            })
        }
        KSpec::File { path } => {
            let (field, _) = read_field(path)?;
            if field.n != cfg.n {
                return Err(Error::mismatch(format!(
                    "curvature file is on S^{}, config says S^{}",
                    field.n, cfg.n
                )));
            }
            let tf = Transform::new(
                field.n,
                field.lmax,
                if field.mode_zonal {
                    GridMode::Zonal
                } else {
                    GridMode::Full
                },
            )?;
            Box::new(FileK { tf, field })
        }
    })
}

/// Global curvature bounds: closed-form for the builtin families, sampled
/// on the field's own grid for file input.
fn k_bounds(cfg: &RunConfig, kf: &dyn KFunction) -> Result<(f64, f64)> {
    let (lo, hi) = match &cfg.curvature {
        KSpec::Constant { value } => (*value, *value),
        KSpec::Linear {
            offset, amplitude, ..
        } => (offset - amplitude.abs(), offset + amplitude.abs()),
        KSpec::TwoPeak {
            amplitude, center, ..
        } => {
            let c = center.unwrap_or(1.0 / (cfg.n as f64 + 1.0));
            let (a, b) = (1.0 + amplitude * (0.0 - c), 1.0 + amplitude * (1.0 - c));
            (a.min(b), a.max(b))
        }
        KSpec::File { .. } => {
            let tf = build_transform(cfg)?;
            let values = tf.grid().sample(|p| kf.value(p));
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if !(lo > 0.0) {
        return Err(Error::invalid(format!(
            "curvature must be strictly positive; minimum is {lo}"
        )));
    }
    Ok((hi, lo))
}

fn run_spectrum(cfg: &RunConfig, meta: &RunMeta, out: &Path) -> Result<RunOutput> {
    let mut rows = Vec::new();
    for k in 0..=cfg.spectrum.k_max {
        rows.push(vec![k as f64, psigma_eigenvalue(cfg.n, cfg.sigma, k)?]);
    }
    let path = out.join("spectrum.csv");
    write_csv(&path, meta, &["k", "eigenvalue"], &rows)?;
    Ok(RunOutput {
        exit_code: 0,
        summary: format!(
            "{} eigenvalues of the order-{} operator on S^{}; c(n,sigma) = {:.12}",
            rows.len(),
            2.0 * cfg.sigma,
            cfg.n,
            rows[0][1]
        ),
        artifacts: vec![path],
    })
}

fn run_bubble_residual(cfg: &RunConfig, meta: &RunMeta, out: &Path) -> Result<RunOutput> {
    let q1 = critical_exponent(cfg.n, cfg.sigma)? - 1.0;
    let mut rows = Vec::new();
    for &degree in &cfg.residual.degrees {
        let tf = Transform::new(cfg.n, degree, GridMode::Zonal)?;
        let b = BubbleParams::standard(SpherePoint::north_pole(cfg.n), cfg.residual.lambda);
        let u = bubble_spectral(&tf, cfg.sigma, &[b])?;
        let lhs = apply_psigma(&u, cfg.sigma)?;
        let rhs = tf.map_pointwise(&u, |v| v.max(0.0).powf(q1))?;
        let mut diff = lhs.clone();
        diff.axpy(-1.0, &rhs)?;
        rows.push(vec![degree as f64, diff.l2_norm() / rhs.l2_norm()]);
    }
    let path = out.join("residual.csv");
    write_csv(&path, meta, &["lmax", "residual"], &rows)?;
    let first = rows.first().map(|r| r[1]).unwrap_or(f64::NAN);
    let last = rows.last().map(|r| r[1]).unwrap_or(f64::NAN);
    Ok(RunOutput {
        exit_code: 0,
        summary: format!(
            "bubble residual at lambda = {}: {first:.3e} -> {last:.3e} over {} degrees",
            cfg.residual.lambda,
            rows.len()
        ),
        artifacts: vec![path],
    })
}

#[derive(Serialize)]
struct ExpansionCheck {
    name: String,
    value: f64,
    bound: String,
    pass: bool,
}

fn run_expansion_verify(cfg: &RunConfig, meta: &RunMeta, out: &Path) -> Result<RunOutput> {
    let constants = crate::bubbles::expansion::calibrate_constants(
        cfg.n,
        cfg.sigma,
        cfg.expansion.degree,
    )?;
    let d = constants
        .diagnostics
        .clone()
        .ok_or_else(|| Error::degenerate("calibration returned no diagnostics"))?;
    let checks = vec![
        ExpansionCheck {
            name: "single_bubble_slope".into(),
            value: d.single_slope,
            bound: "-2 +- 0.2".into(),
            pass: (d.single_slope + 2.0).abs() <= 0.2,
        },
        ExpansionCheck {
            name: "c2_center_agreement".into(),
            value: d.c2_spread,
            bound: "< 0.05".into(),
            pass: d.c2_spread < 0.05,
        },
        ExpansionCheck {
            name: "c2_fit_residual".into(),
            value: d.c2_fit_residual,
            bound: "< 0.05".into(),
            pass: d.c2_fit_residual < 0.05,
        },
        ExpansionCheck {
            name: "interaction_fit_residual".into(),
            value: d.c01_fit_residual,
            bound: "< 0.05".into(),
            pass: d.c01_fit_residual < 0.05,
        },
        ExpansionCheck {
            name: "pair_slope".into(),
            value: d.pair_slope,
            bound: format!("{} +- 10%", d.pair_slope_target),
            pass: (d.pair_slope - d.pair_slope_target).abs()
                <= 0.1 * d.pair_slope_target.abs(),
        },
    ];
    #[derive(Serialize)]
    struct Payload {
        constants: crate::bubbles::expansion::ExpansionConstants,
        checks: Vec<ExpansionCheck>,
        all_pass: bool,
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    let payload = Payload {
        constants,
        checks,
        all_pass,
    };
    let path = out.join("expansion.json");
    write_json_report(&path, meta, &payload)?;
    Ok(RunOutput {
        exit_code: if all_pass { 0 } else { 1 },
        summary: if all_pass {
            format!(
                "expansion constants verified: c2 = {:.6}, c01 = {:.6}",
                payload.constants.c2, payload.constants.c01
            )
        } else {
            format!("expansion checks outside tolerance: {}", failed.join(", "))
        },
        artifacts: vec![path],
    })
}

#[derive(Serialize)]
struct FittedBubble {
    center: Vec<f64>,
    lambda: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct KwRow {
    j: usize,
    raw: f64,
    normalized: f64,
}

#[derive(Serialize)]
struct FlowReport {
    status: FlowStatus,
    steps: usize,
    exponent: f64,
    final_level: f64,
    final_gradient_norm: f64,
    /// Level history non-increasing (up to rounding slack).
    monotone_level: bool,
    bubbles: Vec<FittedBubble>,
    remainder_norm: Option<f64>,
    kazdan_warner: Vec<KwRow>,
    /// `None` when the flow did not converge (the identity only binds
    /// solutions).
    kazdan_warner_pass: Option<bool>,
}

fn flow_trace_rows(r: &FlowResult) -> Vec<Vec<f64>> {
    r.level_history
        .iter()
        .zip(&r.gradient_norm_history)
        .enumerate()
        .map(|(i, (&l, &g))| vec![i as f64, l, g])
        .collect()
}

fn run_flow(cfg: &RunConfig, meta: &RunMeta, out: &Path) -> Result<RunOutput> {
    let tf = build_transform(cfg)?;
    let kf = k_function(cfg)?;
    let k_samples = tf.grid().sample(|p| kf.value(p));
    let options = FlowOptions {
        max_steps: cfg.flow.max_steps,
        gradient_tolerance: cfg.flow.gradient_tolerance,
        check_every: cfg.flow.check_every,
        max_bubbles: cfg.flow.max_bubbles,
        ..FlowOptions::default()
    };

    let mut u0 = constant_start(&tf)?;
    if cfg.flow.perturbation > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let noise = tf.random_field(&mut rng, 6.min(cfg.lmax), 1.0);
        u0.axpy(cfg.flow.perturbation, &noise)?;
    }

    let result = match cfg.flow.subcritical_eps {
        Some(eps) => subcritical_solve(&tf, cfg.sigma, &k_samples, eps, Some(&u0), &options)?,
        None => {
            let q = critical_exponent(cfg.n, cfg.sigma)?;
            let point_k = |p: &SpherePoint| kf.value(p);
            flow_run(&tf, cfg.sigma, &u0, &k_samples, q, Some(&point_k), &options)?
        }
    };

    // Balance identity for solutions: for every ambient coordinate j the
    // weighted tangential-gradient integral must vanish.
    let mut kazdan_warner = Vec::new();
    let mut kazdan_warner_pass = None;
    if result.status == FlowStatus::Converged {
        let grad = |p: &SpherePoint| -> Vec<f64> {
            match kf.ambient_gradient(p) {
                Some(g) => g,
                None => differentials(kf.as_ref(), p, FD_GRADIENT_STEP, FD_HESSIAN_STEP)
                    .map(|d| d.gradient)
                    .unwrap_or_else(|_| vec![0.0; cfg.n + 1]),
            }
        };
        let mut pass = true;
        for j in 1..=cfg.n + 1 {
            let kw = kazdan_warner_integral(&tf, &result.field, cfg.sigma, &grad, j)?;
            pass &= kw.normalized.abs() < KW_GATE;
            kazdan_warner.push(KwRow {
                j,
                raw: kw.raw,
                normalized: kw.normalized,
            });
        }
        kazdan_warner_pass = Some(pass);
    }

    let monotone_level = result
        .level_history
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let (bubbles, remainder_norm) = match &result.fit {
        Some(fit) => (
            fit.bubbles
                .iter()
                .map(|b| FittedBubble {
                    center: b.center.coords().to_vec(),
                    lambda: b.lambda,
                    alpha: b.alpha,
                })
                .collect(),
            Some(fit.remainder_norm),
        ),
        None => (Vec::new(), None),
    };
    let report = FlowReport {
        status: result.status,
        steps: result.steps,
        exponent: cfg
            .flow
            .subcritical_eps
            .map(|e| critical_exponent(cfg.n, cfg.sigma).unwrap() - e)
            .unwrap_or(critical_exponent(cfg.n, cfg.sigma)?),
        final_level: *result.level_history.last().unwrap_or(&f64::NAN),
        final_gradient_norm: *result.gradient_norm_history.last().unwrap_or(&f64::NAN),
        monotone_level,
        bubbles,
        remainder_norm,
        kazdan_warner,
        kazdan_warner_pass,
    };

    let json = out.join("flow_result.json");
    write_json_report(&json, meta, &report)?;
    let trace = out.join("flow_trace.csv");
    write_csv(
        &trace,
        meta,
        &["step", "level", "gradient_norm"],
        &flow_trace_rows(&result),
    )?;
    let field_path = out.join("flow_field.coeffs");
    write_field(&field_path, &result.field, cfg.sigma)?;

    let (exit_code, summary) = match result.status {
        FlowStatus::Converged => {
            if kazdan_warner_pass == Some(false) {
                (
                    3,
                    format!(
                        "flow converged in {} steps but violates the balance \
                         identity (worst normalized integral {:.3e})",
                        result.steps,
                        report
                            .kazdan_warner
                            .iter()
                            .map(|r| r.normalized.abs())
                            .fold(0.0, f64::max)
                    ),
                )
            } else {
                (
                    0,
                    format!(
                        "flow converged in {} steps at level {:.9}",
                        result.steps, report.final_level
                    ),
                )
            }
        }
        FlowStatus::Concentrated => (
            0,
            format!(
                "flow concentrated after {} steps: {} bubble(s), largest lambda {:.2}",
                result.steps,
                report.bubbles.len(),
                report
                    .bubbles
                    .iter()
                    .map(|b| b.lambda)
                    .fold(0.0, f64::max)
            ),
        ),
        FlowStatus::MaxIterations => (
            1,
            format!(
                "flow stopped at the {}-step cap with gradient norm {:.3e}",
                result.steps, report.final_gradient_norm
            ),
        ),
    };
    Ok(RunOutput {
        exit_code,
        summary,
        artifacts: vec![json, trace, field_path],
    })
}

fn run_existence(cfg: &RunConfig, meta: &RunMeta, out: &Path) -> Result<RunOutput> {
    cfg.existence_sigma_check()?;
    let kf = k_function(cfg)?;
    let options = FindOptions {
        starts: cfg.existence.starts,
        seed: cfg.seed,
        policy: cfg.existence.policy,
        ..FindOptions::default()
    };
    let records = find_critical_points(kf.as_ref(), cfg.n, &options)?;
    let (k_max, k_min) = k_bounds(cfg, kf.as_ref())?;
    let report = existence_verdict(&records, k_max, k_min, cfg.n, cfg.sigma)?;

    let json = out.join("existence.json");
    write_json_report(&json, meta, &report)?;
    let mut columns: Vec<String> = (1..=cfg.n + 1).map(|i| format!("x{i}")).collect();
    columns.extend(
        ["k", "laplacian", "morse_index", "in_k_plus", "degenerate"]
            .iter()
            .map(|s| s.to_string()),
    );
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<f64>> = report
        .critical_points
        .iter()
        .map(|r| {
            let mut row = r.location.coords().to_vec();
            row.extend([
                r.k_value,
                r.laplacian,
                r.morse_index as f64,
                if r.in_k_plus { 1.0 } else { 0.0 },
                if r.degenerate { 1.0 } else { 0.0 },
            ]);
            row
        })
        .collect();
    let csv = out.join("critical_points.csv");
    write_csv(&csv, meta, &column_refs, &rows)?;

    let summary = format!(
        "{} critical point(s), {} admissible; ratio {:.6}; two-point verdict {}, \
         counting verdict {} (A1 = {}); solution expected: {}",
        report.critical_points.len(),
        report.k_plus_size,
        report.pinching_ratio,
        report.verdict_two_point.holds,
        report.verdict_counting.holds,
        report.a1,
        report.solution_expected
    );
    Ok(RunOutput {
        exit_code: if report.solution_expected { 0 } else { 1 },
        summary,
        artifacts: vec![json, csv],
    })
}

/// Execute a command, writing artifacts into `out_dir` (created if absent).
pub fn run_command(
    kind: CommandKind,
    cfg: &RunConfig,
    config_digest: &str,
    out_dir: &Path,
) -> Result<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let meta = RunMeta {
        command: kind.name().to_string(),
        config_digest: config_digest.to_string(),
        seed: cfg.seed,
    };
    match kind {
        CommandKind::Spectrum => run_spectrum(cfg, &meta, out_dir),
        CommandKind::BubbleResidual => run_bubble_residual(cfg, &meta, out_dir),
        CommandKind::ExpansionVerify => run_expansion_verify(cfg, &meta, out_dir),
        CommandKind::Flow => run_flow(cfg, &meta, out_dir),
        CommandKind::Existence => run_existence(cfg, &meta, out_dir),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{config_digest, parse_config};

    fn run(text: &str, kind: CommandKind, dir: &Path) -> Result<RunOutput> {
        let cfg = parse_config(text)?;
        run_command(kind, &cfg, &config_digest(text), dir)
    }

    #[test]
    fn spectrum_writes_the_eigenvalue_table() {
        let dir = tempfile::tempdir().unwrap();
        let text = "n = 3\nsigma = 0.25\nseed = 9\n";
        let out = run(text, CommandKind::Spectrum, dir.path()).unwrap();
        assert_eq!(out.exit_code, 0);
        let csv = std::fs::read_to_string(&out.artifacts[0]).unwrap();
        assert!(csv.contains(&format!("# config_digest = {}", config_digest(text))));
        assert!(csv.contains("# seed = 9"));
        let data_rows: Vec<&str> = csv
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with('k'))
            .collect();
        assert_eq!(data_rows.len(), 11);
        let first: f64 = data_rows[0].split(',').nth(1).unwrap().parse().unwrap();
        let c = psigma_eigenvalue(3, 0.25, 0).unwrap();
        assert!((first - c).abs() < 1e-14);
        // Determinism: a second run reproduces the bytes.
        let again = run(text, CommandKind::Spectrum, dir.path()).unwrap();
        assert_eq!(csv, std::fs::read_to_string(&again.artifacts[0]).unwrap());
    }

    #[test]
    fn bubble_residual_sweep_decays() {
        let dir = tempfile::tempdir().unwrap();
        let text = "n = 3\nsigma = 0.25\n[bubble-residual]\nlambda = 2\ndegrees = 16, 32\n";
        let out = run(text, CommandKind::BubbleResidual, dir.path()).unwrap();
        assert_eq!(out.exit_code, 0);
        let csv = std::fs::read_to_string(&out.artifacts[0]).unwrap();
        let vals: Vec<f64> = csv
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with('l'))
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(vals.len(), 2);
        assert!(vals[1] < vals[0] / 10.0, "{vals:?}");
    }

    #[test]
    fn subcritical_flow_with_constant_curvature_converges() {
        let dir = tempfile::tempdir().unwrap();
        let text = "n = 3\nsigma = 0.25\nlmax = 16\nseed = 3\n\
                    [flow]\nsubcritical_eps = 0.2\nmax_steps = 4000\n\
                    gradient_tolerance = 1e-7\nperturbation = 0.05\n";
        let out = run(text, CommandKind::Flow, dir.path()).unwrap();
        assert_eq!(out.exit_code, 0, "{}", out.summary);
        let json = std::fs::read_to_string(&out.artifacts[0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["report"]["status"], "converged");
        assert_eq!(v["report"]["kazdan_warner_pass"], true);
        assert_eq!(v["report"]["monotone_level"], true);
        let kw = v["report"]["kazdan_warner"].as_array().unwrap();
        assert_eq!(kw.len(), 4);
        for row in kw {
            assert!(row["normalized"].as_f64().unwrap().abs() < 1e-10);
        }
        // Field artifact reads back on the right discretization.
        let (field, sigma) = read_field(&out.artifacts[2]).unwrap();
        assert_eq!(field.lmax, 16);
        assert!((sigma - 0.25).abs() < 1e-15);
        // Trace rows cover every recorded level.
        let trace = std::fs::read_to_string(&out.artifacts[1]).unwrap();
        let rows = trace
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with('s'))
            .count();
        assert!(rows > 2);
    }

    #[test]
    fn critical_flow_with_tilted_curvature_concentrates() {
        let dir = tempfile::tempdir().unwrap();
        let text = "n = 3\nsigma = 0.25\nlmax = 32\nseed = 1\n\
                    [curvature]\nfamily = linear\noffset = 2\namplitude = 1\n\
                    [flow]\nmax_steps = 4000\nperturbation = 0.01\n";
        let out = run(text, CommandKind::Flow, dir.path()).unwrap();
        assert_eq!(out.exit_code, 0, "{}", out.summary);
        let json = std::fs::read_to_string(&out.artifacts[0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["report"]["status"], "concentrated");
        let bubbles = v["report"]["bubbles"].as_array().unwrap();
        assert!(!bubbles.is_empty());
        // Mass moves toward the curvature maximum at the north pole.
        let top = &bubbles[0]["center"].as_array().unwrap()[3];
        assert!(top.as_f64().unwrap() > 0.9, "{json}");
    }

    #[test]
    fn existence_verdicts_map_to_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        // Single admissible maximum: verdict false, exit 1.
        let text = "n = 3\nsigma = 0.25\nseed = 2\n\
                    [curvature]\nfamily = linear\noffset = 2\namplitude = 1\n\
                    [existence]\nstarts = 40\n";
        let out = run(text, CommandKind::Existence, dir.path()).unwrap();
        assert_eq!(out.exit_code, 1, "{}", out.summary);
        let json = std::fs::read_to_string(&out.artifacts[0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["report"]["solution_expected"], false);
        assert_eq!(v["report"]["k_plus_size"], 1);
        let csv = std::fs::read_to_string(&out.artifacts[1]).unwrap();
        assert!(csv.lines().any(|l| l.starts_with("x1,")), "{csv}");

        // Two-peak family with tiny pinching: both verdicts hold, exit 0.
        let text = "n = 3\nsigma = 0.25\nseed = 2\n\
                    [curvature]\nfamily = two-peak\namplitude = 0.005\n\
                    [existence]\nstarts = 40\ndegenerate_policy = flag\n";
        let out = run(text, CommandKind::Existence, dir.path()).unwrap();
        assert_eq!(out.exit_code, 0, "{}", out.summary);
        let json = std::fs::read_to_string(&out.artifacts[0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["report"]["solution_expected"], true);
        assert_eq!(v["report"]["a1"], 2);
    }

    #[test]
    fn runtime_config_errors_use_exit_code_two() {
        let dir = tempfile::tempdir().unwrap();
        // sigma fine for the operator, outside the existence range; no
        // [existence] section so parsing passes and the runner must catch it.
        let text = "n = 3\nsigma = 0.6\n";
        let err = run(text, CommandKind::Existence, dir.path()).unwrap_err();
        assert_eq!(exit_code_for_error(&err), 2);
        assert!(err.to_string().contains("(n-2)/2"), "{err}");
        let numerical = Error::no_convergence("x");
        assert_eq!(exit_code_for_error(&numerical), 3);
    }

    #[test]
    fn command_names_round_trip() {
        for kind in [
            CommandKind::Spectrum,
            CommandKind::BubbleResidual,
            CommandKind::ExpansionVerify,
            CommandKind::Flow,
            CommandKind::Existence,
        ] {
            assert_eq!(CommandKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(CommandKind::from_name("nope"), None);
    }
}
