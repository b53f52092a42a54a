//! Run configuration: line-oriented `key = value` text with one `[section]`
//! per command.
//!
//! Parsing never stops at the first problem — every error in the file is
//! collected and returned together ([`Error::Config`]), each tagged with its
//! line number, so a bad config can be fixed in one pass.
//!
//! ```text
//! # global keys first
//! n = 3
//! sigma = 0.25
//! lmax = 48
//! grid = zonal            # or: full  (n = 2, 3 only)
//! seed = 7
//!
//! [curvature]
//! family = two-peak       # constant | linear | two-peak | file
//! amplitude = 0.005
//!
//! [flow]
//! max_steps = 4000
//! ```

use crate::error::{Error, Result};
use crate::morse::DegeneratePolicy;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridChoice {
    Zonal,
    Full,
}

/// Builtin curvature families plus a harmonic coefficient file.
#[derive(Debug, Clone, PartialEq)]
pub enum KSpec {
    Constant {
        value: f64,
    },
    /// `offset + amplitude * xi_axis`.
    Linear {
        offset: f64,
        amplitude: f64,
        axis: usize,
    },
    /// `1 + amplitude * (xi_axis^2 - center)`; `center = None` subtracts the
    /// spherical mean `1/(n+1)`, making the perturbation mean-free.
    TwoPeak {
        amplitude: f64,
        axis: usize,
        center: Option<f64>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct SpectrumConfig {
    /// Largest harmonic degree tabulated.
    pub k_max: usize,
}

#[derive(Debug, Clone)]
pub struct ResidualConfig {
    pub lambda: f64,
    /// Truncation degrees of the convergence sweep.
    pub degrees: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExpansionConfig {
    /// Spectral degree of the calibration transform.
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct FlowSection {
    pub max_steps: usize,
    pub gradient_tolerance: f64,
    pub check_every: usize,
    pub max_bubbles: usize,
    /// Shift below the critical exponent; `None` runs the critical flow.
    pub subcritical_eps: Option<f64>,
    /// Size of the random perturbation added to the constant start.
    pub perturbation: f64,
}

#[derive(Debug, Clone)]
pub struct ExistenceConfig {
    /// Largest blow-up configuration size enumerated.
    pub p_max: usize,
    pub policy: DegeneratePolicy,
    /// Random Newton starts beyond the axis poles.
    pub starts: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub sigma: f64,
    pub lmax: usize,
    pub grid: GridChoice,
    pub seed: u64,
    /// Output directory; the CLI `--out` flag overrides it.
    pub out_dir: Option<PathBuf>,
    pub curvature: KSpec,
    pub spectrum: SpectrumConfig,
    pub residual: ResidualConfig,
    pub expansion: ExpansionConfig,
    pub flow: FlowSection,
    pub existence: ExistenceConfig,
}

impl RunConfig {
    /// The existence analysis needs the stricter range
    /// `sigma in (0, (n-2)/2)`; the rest of the laboratory only needs
    /// `(0, n/2)`.
    pub fn existence_sigma_check(&self) -> Result<()> {
        let bound = (self.n as f64 - 2.0) / 2.0;
        if !(self.sigma > 0.0 && self.sigma < bound) {
            return Err(Error::Config(vec![format!(
                "sigma = {} is outside the existence range (0, (n-2)/2) = (0, {})",
                self.sigma, bound
            )]));
        }
        Ok(())
    }
}

/// SHA-256 of the raw config text, embedded in every output artifact.
pub fn config_digest(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    format!("{:x}", h.finalize())
}

const SECTIONS: [&str; 6] = [
    "curvature",
    "spectrum",
    "bubble-residual",
    "expansion-verify",
    "flow",
    "existence",
];

type Entries = BTreeMap<(String, String), (usize, String)>;

/// Split the text into `(section, key) -> (line, value)`, recording syntax
/// and duplicate-key errors.
fn tokenize(text: &str, errors: &mut Vec<String>) -> (Entries, BTreeSet<String>) {
    let mut entries = Entries::new();
    let mut present = BTreeSet::new();
    let mut section = String::new();
    let mut section_ok = true;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            match name.strip_suffix(']') {
                Some(name) if SECTIONS.contains(&name) => {
                    section = name.to_string();
                    section_ok = true;
                    present.insert(section.clone());
                }
                Some(name) => {
                    errors.push(format!(
                        "line {lineno}: unknown section [{name}] (expected one of {})",
                        SECTIONS.join(", ")
                    ));
                    section_ok = false;
                }
                None => {
                    errors.push(format!("line {lineno}: unterminated section header"));
                    section_ok = false;
                }
            }
            continue;
        }
        let Some(eq) = line.find('=') else {
            errors.push(format!("line {lineno}: expected `key = value`, got '{line}'"));
            continue;
        };
        if !section_ok {
            continue; // already complained about the section itself
        }
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if key.is_empty() {
            errors.push(format!("line {lineno}: empty key"));
            continue;
        }
        let slot = (section.clone(), key.clone());
        if let Some((first, _)) = entries.get(&slot) {
            let place = if section.is_empty() {
                String::new()
            } else {
                format!(" in [{section}]")
            };
            errors.push(format!(
                "line {lineno}: duplicate key '{key}'{place} (first set at line {first})"
            ));
            continue;
        }
        entries.insert(slot, (lineno, value));
    }
    (entries, present)
}

/// Typed extraction over the tokenized entries; every take marks its key as
/// consumed so leftovers can be reported as unknown.
struct Extractor {
    entries: Entries,
    used: BTreeSet<(String, String)>,
    errors: Vec<String>,
}

impl Extractor {
    fn raw(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        let slot = (section.to_string(), key.to_string());
        self.used.insert(slot.clone());
        self.entries.get(&slot).cloned()
    }

    fn parse<T: std::str::FromStr>(&mut self, section: &str, key: &str, kind: &str) -> Option<(usize, T)> {
        let (line, value) = self.raw(section, key)?;
        match value.parse::<T>() {
            Ok(v) => Some((line, v)),
            Err(_) => {
                self.errors.push(format!(
                    "line {line}: key '{key}': expected {kind}, got '{value}'"
                ));
                None
            }
        }
    }

    fn f64(&mut self, section: &str, key: &str) -> Option<(usize, f64)> {
        self.parse(section, key, "a number")
    }

    fn usize(&mut self, section: &str, key: &str) -> Option<(usize, usize)> {
        self.parse(section, key, "a nonnegative integer")
    }

    fn u64(&mut self, section: &str, key: &str) -> Option<(usize, u64)> {
        self.parse(section, key, "a nonnegative integer")
    }

    fn string(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.raw(section, key)
    }

    fn usize_list(&mut self, section: &str, key: &str) -> Option<(usize, Vec<usize>)> {
        let (line, value) = self.raw(section, key)?;
        let mut out = Vec::new();
        for part in value.split(',') {
            match part.trim().parse::<usize>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.errors.push(format!(
                        "line {line}: key '{key}': expected a comma-separated \
                         integer list, got '{value}'"
                    ));
                    return None;
                }
            }
        }
        Some((line, out))
    }

    fn err(&mut self, line: usize, msg: impl std::fmt::Display) {
        self.errors.push(format!("line {line}: {msg}"));
    }

    fn sweep_unknown(&mut self) {
        for ((section, key), (line, _)) in &self.entries {
            if !self.used.contains(&(section.clone(), key.clone())) {
                let place = if section.is_empty() {
                    "at top level".to_string()
                } else {
                    format!("in [{section}]")
                };
                self.errors
                    .push(format!("line {line}: unknown key '{key}' {place}"));
            }
        }
    }
}

fn parse_curvature(ex: &mut Extractor, n: Option<usize>) -> KSpec {
    let family = ex.string("curvature", "family");
    let axis_of = |ex: &mut Extractor, default: usize| -> usize {
        match ex.usize("curvature", "axis") {
            Some((line, a)) => {
                if let Some(n) = n {
                    if a < 1 || a > n + 1 {
                        ex.err(
                            line,
                            format!("axis must be an ambient coordinate in 1..={}", n + 1),
                        );
                        return default;
                    }
                }
                a
            }
            None => default,
        }
    };
    let default_axis = n.map(|n| n + 1).unwrap_or(1);
    match family.as_ref().map(|(_, f)| f.as_str()) {
        None | Some("constant") => {
            let value = match ex.f64("curvature", "value") {
                Some((line, v)) => {
                    if !(v > 0.0) {
                        ex.err(line, "constant curvature must be positive");
                    }
                    v
                }
                None => 1.0,
            };
            KSpec::Constant { value }
        }
        Some("linear") => {
            let offset = ex.f64("curvature", "offset").map(|(_, v)| v).unwrap_or(2.0);
            let (aline, amplitude) = ex
                .f64("curvature", "amplitude")
                .unwrap_or((0, 1.0));
            if offset - amplitude.abs() <= 0.0 {
                let line = aline.max(1);
                ex.err(
                    line,
                    format!(
                        "linear curvature {offset} + {amplitude}*xi dips to \
                         {:.6} <= 0; it must stay positive",
                        offset - amplitude.abs()
                    ),
                );
            }
            KSpec::Linear {
                offset,
                amplitude,
                axis: axis_of(ex, default_axis),
            }
        }
        Some("two-peak") => {
            let (aline, amplitude) = ex
                .f64("curvature", "amplitude")
                .unwrap_or((0, 0.005));
            let center = ex.f64("curvature", "center").map(|(_, v)| v);
            // K = 1 + a (x - c) over x in [0, 1] stays positive iff both
            // endpoints do.
            let c = center.unwrap_or(0.5);
            if 1.0 + amplitude * (0.0 - c) <= 0.0 || 1.0 + amplitude * (1.0 - c) <= 0.0 {
                ex.err(aline.max(1), "two-peak curvature must stay positive");
            }
            KSpec::TwoPeak {
                amplitude,
                axis: axis_of(ex, default_axis),
                center,
            }
        }
        Some("file") => {
            let path = match ex.string("curvature", "file") {
                Some((line, p)) => {
                    let path = PathBuf::from(&p);
                    if std::fs::File::open(&path).is_err() {
                        ex.err(line, format!("curvature file '{p}' is not readable"));
                    }
                    path
                }
                None => {
                    ex.errors
                        .push("curvature family 'file' needs a `file = <path>` key".into());
                    PathBuf::new()
                }
            };
            KSpec::File { path }
        }
        Some(other) => {
            let line = family.as_ref().map(|(l, _)| *l).unwrap_or(1);
            ex.err(
                line,
                format!(
                    "unknown curvature family '{other}' (expected constant, \
                     linear, two-peak, file)"
                ),
            );
            KSpec::Constant { value: 1.0 }
        }
    }
}

/// Parse and validate a config; on any problem returns [`Error::Config`]
/// carrying **all** messages.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut errors = Vec::new();
    let (entries, present) = tokenize(text, &mut errors);
    let mut ex = Extractor {
        entries,
        used: BTreeSet::new(),
        errors,
    };

    let n = match ex.usize("", "n") {
        Some((line, n)) => {
            if n < 2 {
                ex.err(line, format!("dimension n must be >= 2, got {n}"));
                None
            } else {
                Some(n)
            }
        }
        None => {
            if !ex.errors.iter().any(|e| e.contains("'n'")) {
                ex.errors.push("missing required key 'n'".into());
            }
            None
        }
    };
    let sigma = match ex.f64("", "sigma") {
        Some((line, s)) => {
            if let Some(n) = n {
                let bound = n as f64 / 2.0;
                if !(s > 0.0 && s < bound) {
                    ex.err(
                        line,
                        format!("sigma must lie in (0, n/2) = (0, {bound}), got {s}"),
                    );
                }
            }
            Some(s)
        }
        None => {
            if !ex.errors.iter().any(|e| e.contains("'sigma'")) {
                ex.errors.push("missing required key 'sigma'".into());
            }
            None
        }
    };
    let lmax = match ex.usize("", "lmax") {
        Some((line, l)) => {
            if l < 4 {
                ex.err(line, format!("truncation degree lmax must be >= 4, got {l}"));
            }
            l
        }
        None => 32,
    };
    let grid = match ex.string("", "grid") {
        Some((line, g)) => match g.as_str() {
            "zonal" => GridChoice::Zonal,
            "full" => {
                if let Some(n) = n {
                    if n != 2 && n != 3 {
                        ex.err(line, "full grids exist only for n = 2 and n = 3");
                    }
                }
                GridChoice::Full
            }
            other => {
                ex.err(line, format!("grid must be 'zonal' or 'full', got '{other}'"));
                GridChoice::Zonal
            }
        },
        None => GridChoice::Zonal,
    };
    let seed = ex.u64("", "seed").map(|(_, s)| s).unwrap_or(0);
    let out_dir = ex.string("", "out").map(|(_, p)| PathBuf::from(p));

    let curvature = parse_curvature(&mut ex, n);

    let spectrum = SpectrumConfig {
        k_max: ex.usize("spectrum", "k_max").map(|(_, v)| v).unwrap_or(10),
    };

    let lambda = match ex.f64("bubble-residual", "lambda") {
        Some((line, l)) => {
            if !(l >= 1.0) {
                ex.err(line, format!("concentration lambda must be >= 1, got {l}"));
            }
            l
        }
        None => 2.0,
    };
    let degrees = match ex.usize_list("bubble-residual", "degrees") {
        Some((line, d)) => {
            if d.is_empty() || d.windows(2).any(|w| w[0] >= w[1]) {
                ex.err(line, "degrees must be a strictly increasing list");
            }
            d
        }
        None => vec![16, 24, 32, 48, 64],
    };
    let residual = ResidualConfig { lambda, degrees };

    let expansion = ExpansionConfig {
        degree: ex
            .usize("expansion-verify", "degree")
            .map(|(_, v)| v)
            .unwrap_or(180),
    };

    let subcritical_eps = match ex.f64("flow", "subcritical_eps") {
        Some((line, e)) => {
            if let (Some(n), Some(s)) = (n, sigma) {
                let qm2 = 4.0 * s / (n as f64 - 2.0 * s);
                if !(e > 0.0 && e < qm2) {
                    ex.err(
                        line,
                        format!(
                            "subcritical_eps must lie in (0, q-2) = (0, {qm2:.6}), got {e}"
                        ),
                    );
                }
            }
            Some(e)
        }
        None => None,
    };
    let flow = FlowSection {
        max_steps: ex.usize("flow", "max_steps").map(|(_, v)| v).unwrap_or(2000),
        gradient_tolerance: ex
            .f64("flow", "gradient_tolerance")
            .map(|(_, v)| v)
            .unwrap_or(1e-8),
        check_every: ex.usize("flow", "check_every").map(|(_, v)| v).unwrap_or(25),
        max_bubbles: ex.usize("flow", "max_bubbles").map(|(_, v)| v).unwrap_or(2),
        subcritical_eps,
        perturbation: match ex.f64("flow", "perturbation") {
            Some((line, p)) => {
                if p < 0.0 {
                    ex.err(line, "perturbation must be >= 0");
                }
                p
            }
            None => 0.01,
        },
    };

    let policy = match ex.string("existence", "degenerate_policy") {
        Some((line, p)) => match p.as_str() {
            "reject" => DegeneratePolicy::Reject,
            "flag" => DegeneratePolicy::Flag,
            other => {
                ex.err(
                    line,
                    format!("degenerate_policy must be 'reject' or 'flag', got '{other}'"),
                );
                DegeneratePolicy::Reject
            }
        },
        None => DegeneratePolicy::Reject,
    };
    let existence = ExistenceConfig {
        p_max: match ex.usize("existence", "p_max") {
            Some((line, p)) => {
                if p == 0 {
                    ex.err(line, "p_max must be >= 1");
                }
                p.max(1)
            }
            None => 3,
        },
        policy,
        starts: ex.usize("existence", "starts").map(|(_, v)| v).unwrap_or(200),
    };

    // The stricter sigma range applies as soon as the config opts into the
    // existence analysis.
    if present.contains("existence") {
        if let (Some(n), Some(s)) = (n, sigma) {
            let bound = (n as f64 - 2.0) / 2.0;
            if !(s > 0.0 && s < bound) {
                ex.errors.push(format!(
                    "sigma = {s} is outside the existence range (0, (n-2)/2) = (0, {bound})"
                ));
            }
        }
    }

    ex.sweep_unknown();
    if !ex.errors.is_empty() {
        return Err(Error::Config(ex.errors));
    }
    Ok(RunConfig {
        n: n.expect("validated above"),
        sigma: sigma.expect("validated above"),
        lmax,
        grid,
        seed,
        out_dir,
        curvature,
        spectrum,
        residual,
        expansion,
        flow,
        existence,
    })
}
