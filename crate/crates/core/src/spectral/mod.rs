//! Spectral representation of functions on S^n and the conformal fractional
//! operator `P_sigma`.
//!
//! `P_sigma` acts diagonally on spherical harmonics of degree k with
//! eigenvalue
//!
//! ```text
//!     lambda_k(n, sigma) = Gamma(k + n/2 + sigma) / Gamma(k + n/2 - sigma),
//! ```
//!
//! valid for `0 < sigma < n/2` (all eigenvalues positive, growing like
//! `k^{2 sigma}`).  A [`Transform`] couples a quadrature grid with a
//! quadrature-orthonormalized harmonic basis, giving exact (machine
//! precision) analysis/synthesis for band-limited data and exact Parseval
//! identities; coefficient-space fields are [`SpectralField`]s.

mod basis;

use crate::error::{Error, Result};
use crate::gauss::GaussRule;
use crate::sphere::{build_grid, GridMode, GridShape, QuadratureGrid, SpherePoint};
use basis::{S2Engine, S3Engine, ZonalEngine};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

pub use basis::{s2_offset, s3_offset};

/// Largest zonal truncation degree accepted (memory/time guard).
pub const MAX_ZONAL_DEGREE: usize = 2048;
/// Largest full-grid truncation degree on S^2.
pub const MAX_S2_DEGREE: usize = 256;
/// Largest full-grid truncation degree on S^3.
pub const MAX_S3_DEGREE: usize = 48;

/// Check `0 < sigma < n/2` (the admissible order range of the operator
/// family and of every exponent derived from it).
pub fn validate_sigma(n: usize, sigma: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("dimension must be >= 2, got {n}")));
    }
    if !(sigma > 0.0 && sigma < n as f64 / 2.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!(
            "sigma must lie in (0, n/2) = (0, {}), got {sigma}",
            n as f64 / 2.0
        )));
    }
    Ok(())
}

/// Eigenvalue of `P_sigma` on degree-k spherical harmonics.
pub fn psigma_eigenvalue(n: usize, sigma: f64, k: usize) -> Result<f64> {
    validate_sigma(n, sigma)?;
    let half = n as f64 / 2.0;
    let kf = k as f64;
    Ok((ln_gamma(kf + half + sigma) - ln_gamma(kf + half - sigma)).exp())
}

/// The constant `c(n, sigma) = Gamma(n/2 + sigma) / Gamma(n/2 - sigma)`,
/// i.e. the k = 0 eigenvalue: `P_sigma` of a constant is that constant times
/// `c(n, sigma)`, so constants solve the problem with K = 1.
pub fn c_nsigma(n: usize, sigma: f64) -> Result<f64> {
    psigma_eigenvalue(n, sigma, 0)
}

/// Sharp constant of the conformal Sobolev (Beckner) inequality on S^n:
/// `S(n, sigma) = omega_n^{2 sigma / n} * c(n, sigma)`.  Constant functions
/// attain it.
pub fn beckner_constant(n: usize, sigma: f64) -> Result<f64> {
    Ok(crate::sphere::omega_n(n).powf(2.0 * sigma / n as f64) * c_nsigma(n, sigma)?)
}

/// Self-energy of one standard bubble: `E(n, sigma) = S^{n/(2 sigma)}
/// = c(n, sigma)^{n/(2 sigma)} * omega_n`.  Energy levels of configurations
/// of ell bubbles scale like `(ell E)^{2 sigma / n}`.
pub fn bubble_energy(n: usize, sigma: f64) -> Result<f64> {
    Ok(c_nsigma(n, sigma)?.powf(n as f64 / (2.0 * sigma)) * crate::sphere::omega_n(n))
}

/// Critical Sobolev exponent `2n / (n - 2 sigma)`.
pub fn critical_exponent(n: usize, sigma: f64) -> Result<f64> {
    validate_sigma(n, sigma)?;
    Ok(2.0 * n as f64 / (n as f64 - 2.0 * sigma))
}

/// A function on S^n in harmonic coefficients, tied to a grid mode and
/// truncation degree.  Coefficients are grouped by degree; see
/// [`SpectralField::degree_range`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub n: usize,
    pub lmax: usize,
    pub mode_zonal: bool,
    pub coeffs: Vec<f64>,
}

/// Number of coefficients for a given layout.
pub fn coeff_len(n: usize, lmax: usize, zonal: bool) -> usize {
    if zonal {
        lmax + 1
    } else if n == 2 {
        s2_offset(lmax + 1)
    } else {
        s3_offset(lmax + 1)
    }
}

impl SpectralField {
    pub fn zeros(n: usize, lmax: usize, zonal: bool) -> SpectralField {
        SpectralField {
            n,
            lmax,
            mode_zonal: zonal,
            coeffs: vec![0.0; coeff_len(n, lmax, zonal)],
        }
    }

    /// A zero field with the same shape as this one.
    pub fn zeros_like(&self) -> SpectralField {
        SpectralField::zeros(self.n, self.lmax, self.mode_zonal)
    }

    /// Coefficient indices of the degree-k harmonic block.
    pub fn degree_range(&self, k: usize) -> std::ops::Range<usize> {
        if self.mode_zonal {
            k..k + 1
        } else if self.n == 2 {
            s2_offset(k)..s2_offset(k + 1)
        } else {
            s3_offset(k)..s3_offset(k + 1)
        }
    }

    fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.n != other.n || self.lmax != other.lmax || self.mode_zonal != other.mode_zonal {
            return Err(Error::mismatch(format!(
                "fields live on different discretizations: (n={}, lmax={}, zonal={}) vs (n={}, lmax={}, zonal={})",
                self.n, self.lmax, self.mode_zonal, other.n, other.lmax, other.mode_zonal
            )));
        }
        Ok(())
    }

    /// Plain coefficient dot product = L^2(S^n) inner product (the basis is
    /// orthonormal).
    pub fn l2_inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        Ok(())
    }

    /// Mean value over the sphere (projection onto the constant mode).
    pub fn mean(&self) -> f64 {
        self.coeffs[0] / crate::sphere::omega_n(self.n).sqrt()
    }
}

/// Apply `P_sigma` in coefficient space.
pub fn apply_psigma(u: &SpectralField, sigma: f64) -> Result<SpectralField> {
    let mut out = u.clone();
    for k in 0..=u.lmax {
        let lam = psigma_eigenvalue(u.n, sigma, k)?;
        for c in &mut out.coeffs[u.degree_range(k)] {
            *c *= lam;
        }
    }
    Ok(out)
}

/// Apply `P_sigma^{-1}` in coefficient space (all eigenvalues positive).
pub fn apply_psigma_inverse(u: &SpectralField, sigma: f64) -> Result<SpectralField> {
    let mut out = u.clone();
    for k in 0..=u.lmax {
        let lam = psigma_eigenvalue(u.n, sigma, k)?;
        for c in &mut out.coeffs[u.degree_range(k)] {
            *c /= lam;
        }
    }
    Ok(out)
}

/// The H^sigma inner product `<u, P_sigma v>` (symmetric, positive
/// definite for `0 < sigma < n/2`).
pub fn hsigma_inner(u: &SpectralField, v: &SpectralField, sigma: f64) -> Result<f64> {
    u.check_compatible(v)?;
    let mut acc = 0.0;
    for k in 0..=u.lmax {
        let lam = psigma_eigenvalue(u.n, sigma, k)?;
        let r = u.degree_range(k);
        let block: f64 = u.coeffs[r.clone()]
            .iter()
            .zip(&v.coeffs[r])
            .map(|(a, b)| a * b)
            .sum();
        acc += lam * block;
    }
    Ok(acc)
}

/// `<u, P_sigma u>` -- the squared H^sigma norm.
pub fn hsigma_norm_sq(u: &SpectralField, sigma: f64) -> Result<f64> {
    hsigma_inner(u, u, sigma)
}

/// Grid + orthonormal basis + transforms between samples and coefficients.
pub struct Transform {
    grid: QuadratureGrid,
    engine: Engine,
}

enum Engine {
    Zonal(ZonalEngine),
    S2(S2Engine),
    S3(S3Engine),
}

impl Transform {
    /// Build a transform for S^n at truncation degree `lmax`.
    ///
    /// The underlying grid oversamples by a factor of two (products of two
    /// resolved harmonics are integrated exactly), which also beats down
    /// aliasing from the pointwise nonlinearities used elsewhere.
    pub fn new(n: usize, lmax: usize, mode: GridMode) -> Result<Transform> {
        if lmax == 0 {
            return Err(Error::invalid("truncation degree must be >= 1"));
        }
        let cap = match (mode, n) {
            (GridMode::Zonal, _) => MAX_ZONAL_DEGREE,
            (GridMode::Full, 2) => MAX_S2_DEGREE,
            _ => MAX_S3_DEGREE,
        };
        if lmax > cap {
            return Err(Error::invalid(format!(
                "truncation degree {lmax} exceeds the supported maximum {cap} for this grid mode"
            )));
        }
        let grid = build_grid(n, lmax, mode)?;
        let engine = match &grid.shape {
            GridShape::Zonal { polar } => Engine::Zonal(ZonalEngine::new(
                polar,
                crate::sphere::omega_n(n - 1),
                (n as f64 - 1.0) / 2.0,
                lmax,
            )),
            GridShape::Sphere2 { polar, azimuth } => {
                Engine::S2(S2Engine::new(polar, *azimuth, lmax))
            }
            GridShape::Sphere3 {
                polar1,
                polar2,
                azimuth,
            } => Engine::S3(S3Engine::new(polar1, polar2, *azimuth, lmax)),
        };
        Ok(Transform { grid, engine })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn lmax(&self) -> usize {
        self.grid.degree
    }

    pub fn is_zonal(&self) -> bool {
        self.grid.mode == GridMode::Zonal
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn coeff_len(&self) -> usize {
        match &self.engine {
            Engine::Zonal(e) => e.coeff_len(),
            Engine::S2(e) => e.coeff_len(),
            Engine::S3(e) => e.coeff_len(),
        }
    }

    fn check_field(&self, u: &SpectralField) -> Result<()> {
        if u.n != self.n() || u.lmax != self.lmax() || u.mode_zonal != self.is_zonal() {
            return Err(Error::mismatch(format!(
                "field (n={}, lmax={}, zonal={}) does not match transform (n={}, lmax={}, zonal={})",
                u.n, u.lmax, u.mode_zonal, self.n(), self.lmax(), self.is_zonal()
            )));
        }
        Ok(())
    }

    /// Project grid samples onto the harmonic basis (exact for band-limited
    /// data; L^2-orthogonal projection otherwise).
    pub fn forward(&self, samples: &[f64]) -> Result<SpectralField> {
        if samples.len() != self.grid.len() {
            return Err(Error::mismatch(format!(
                "sample vector has length {}, grid has {} nodes",
                samples.len(),
                self.grid.len()
            )));
        }
        let mut field = SpectralField::zeros(self.n(), self.lmax(), self.is_zonal());
        match &self.engine {
            Engine::Zonal(e) => e.forward(samples, &mut field.coeffs),
            Engine::S2(e) => e.forward(samples, &mut field.coeffs),
            Engine::S3(e) => e.forward(samples, &mut field.coeffs),
        }
        Ok(field)
    }

    /// Synthesize grid samples from coefficients.
    pub fn inverse(&self, u: &SpectralField) -> Result<Vec<f64>> {
        self.check_field(u)?;
        let mut samples = vec![0.0; self.grid.len()];
        match &self.engine {
            Engine::Zonal(e) => e.inverse(&u.coeffs, &mut samples),
            Engine::S2(e) => e.inverse(&u.coeffs, &mut samples),
            Engine::S3(e) => e.inverse(&u.coeffs, &mut samples),
        }
        Ok(samples)
    }

    /// Evaluate a field at an arbitrary point of the sphere.
    pub fn eval(&self, u: &SpectralField, p: &SpherePoint) -> Result<f64> {
        self.check_field(u)?;
        if p.dim() != self.n() {
            return Err(Error::mismatch(format!(
                "point lives on S^{}, transform on S^{}",
                p.dim(),
                self.n()
            )));
        }
        let c = p.coords();
        Ok(match &self.engine {
            Engine::Zonal(e) => e.eval(&u.coeffs, c[self.n()]),
            Engine::S2(e) => {
                let t = c[2].clamp(-1.0, 1.0);
                let phi = c[1].atan2(c[0]);
                let mut vals = vec![0.0; e.coeff_len()];
                e.eval_all(t, phi, &mut vals);
                vals.iter().zip(&u.coeffs).map(|(v, c)| v * c).sum()
            }
            Engine::S3(e) => {
                let t1 = c[3].clamp(-1.0, 1.0);
                let s1 = (1.0 - t1 * t1).max(0.0).sqrt();
                let (t2, phi) = if s1 < 1e-14 {
                    (1.0, 0.0) // inner direction irrelevant at the poles
                } else {
                    ((c[2] / s1).clamp(-1.0, 1.0), c[1].atan2(c[0]))
                };
                e.eval(&u.coeffs, t1, t2, phi)
            }
        })
    }

    /// Apply a pointwise map on grid values and project back:
    /// `u -> Proj[f(u(x))]`.
    pub fn map_pointwise(&self, u: &SpectralField, f: impl Fn(f64) -> f64) -> Result<SpectralField> {
        let mut samples = self.inverse(u)?;
        for s in samples.iter_mut() {
            *s = f(*s);
        }
        self.forward(&samples)
    }

    /// Integral of `|u|^p` over the sphere, evaluated on the grid.
    pub fn lp_integral(&self, u: &SpectralField, p: f64) -> Result<f64> {
        let samples = self.inverse(u)?;
        Ok(self
            .grid
            .weights
            .iter()
            .zip(&samples)
            .map(|(w, s)| w * s.abs().powf(p))
            .sum())
    }

    /// Sobolev quotient `||u||_{H^sigma}^2 / (integral |u|^{2n/(n-2s)})^{(n-2s)/n}`.
    ///
    /// Constants give exactly the sharp constant `S(n, sigma)`; every
    /// nonzero field gives at least it (within discretization error).
    pub fn yamabe_quotient(&self, u: &SpectralField, sigma: f64) -> Result<f64> {
        validate_sigma(self.n(), sigma)?;
        let p = critical_exponent(self.n(), sigma)?;
        let denom = self.lp_integral(u, p)?;
        if denom <= 1e-300 {
            return Err(Error::degenerate(
                "Sobolev quotient of the zero field is undefined",
            ));
        }
        Ok(hsigma_norm_sq(u, sigma)? / denom.powf(1.0 / (p / 2.0)))
    }

    /// Band-limited random field with independent N(0,1)-ish coefficients
    /// damped by `decay^k` per degree; deterministic given the RNG.
    pub fn random_field(
        &self,
        rng: &mut impl rand::Rng,
        max_degree: usize,
        decay: f64,
    ) -> SpectralField {
        let mut u = SpectralField::zeros(self.n(), self.lmax(), self.is_zonal());
        let top = max_degree.min(self.lmax());
        for k in 0..=top {
            let damp = decay.powi(k as i32);
            let r = u.degree_range(k);
            for c in &mut u.coeffs[r] {
                *c = damp * (rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        u
    }

    /// Polar rule of the underlying grid (exposed for diagnostics).
    pub fn polar_rule(&self) -> &GaussRule {
        match &self.grid.shape {
            GridShape::Zonal { polar } => polar,
            GridShape::Sphere2 { polar, .. } => polar,
            GridShape::Sphere3 { polar1, .. } => polar1,
        }
    }
}
