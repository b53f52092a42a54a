//! Artifact emission: spectral-field files, CSV sweep data and JSON
//! reports.
//!
//! Every artifact embeds the SHA-256 digest of the config text and the
//! random seed, so a result file alone identifies the run that produced
//! it.  All writers are deterministic: the same field/rows produce
//! byte-identical files.
//!
//! Field file format (line-oriented, language-neutral):
//!
//! ```text
//! n sigma L zonal          <- header: 3 0.25 48 1
//! <coefficient>            <- one per line, degree-major order
//! ...
//! ```
//!
//! The coefficient order is exactly the in-memory layout of
//! [`SpectralField`]: degree blocks `k = 0..=L`, one entry per block for
//! zonal fields, the full harmonic block otherwise.

use crate::error::{Error, Result};
use crate::spectral::{coeff_len, SpectralField};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// Run identity stamped into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
}

/// Write a field with its order parameter to the documented format.
pub fn write_field(path: &Path, field: &SpectralField, sigma: f64) -> Result<()> {
    let mut text = String::new();
    let zonal = if field.mode_zonal { 1 } else { 0 };
    writeln!(text, "{} {} {} {}", field.n, sigma, field.lmax, zonal).unwrap();
    for c in &field.coeffs {
        writeln!(text, "{c:e}").unwrap();
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Read a field file back; returns the field and the sigma recorded in the
/// header.
pub fn read_field(path: &Path) -> Result<(SpectralField, f64)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid(format!("{}: empty field file", path.display())))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::invalid(format!(
            "{}: field header must be `n sigma L zonal`, got '{header}'",
            path.display()
        )));
    }
    let bad = |what: &str| Error::invalid(format!("{}: bad {what} in field header", path.display()));
    let n: usize = parts[0].parse().map_err(|_| bad("n"))?;
    let sigma: f64 = parts[1].parse().map_err(|_| bad("sigma"))?;
    let lmax: usize = parts[2].parse().map_err(|_| bad("L"))?;
    let zonal = match parts[3] {
        "0" => false,
        "1" => true,
        _ => return Err(bad("zonal flag")),
    };
    let mut coeffs = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        coeffs.push(line.parse::<f64>().map_err(|_| {
            Error::invalid(format!(
                "{}: line {}: not a coefficient: '{line}'",
                path.display(),
                i + 2
            ))
        })?);
    }
    let expect = coeff_len(n, lmax, zonal);
    if coeffs.len() != expect {
        return Err(Error::mismatch(format!(
            "{}: header promises {expect} coefficients, file holds {}",
            path.display(),
            coeffs.len()
        )));
    }
    Ok((
        SpectralField {
            n,
            lmax,
            mode_zonal: zonal,
            coeffs,
        },
        sigma,
    ))
}

/// Write a CSV file: `# key = value` meta comments, a column-name line,
/// then one row per record.
pub fn write_csv(path: &Path, meta: &RunMeta, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::mismatch(format!(
                "CSV row with {} fields under {} columns",
                row.len(),
                columns.len()
            )));
        }
    }
    let mut text = String::new();
    writeln!(text, "# command = {}", meta.command).unwrap();
    writeln!(text, "# config_digest = {}", meta.config_digest).unwrap();
    writeln!(text, "# seed = {}", meta.seed).unwrap();
    writeln!(text, "{}", columns.join(",")).unwrap();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(text, "{}", cells.join(",")).unwrap();
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Write a JSON report wrapping the payload with the run identity.
pub fn write_json_report<T: Serialize>(path: &Path, meta: &RunMeta, payload: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Wrapper<'a, T> {
        command: &'a str,
        config_digest: &'a str,
        seed: u64,
        report: &'a T,
    }
    let text = serde_json::to_string_pretty(&Wrapper {
        command: &meta.command,
        config_digest: &meta.config_digest,
        seed: meta.seed,
        report: payload,
    })?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}
