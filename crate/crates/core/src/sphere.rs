//! Geometry of the round sphere S^n and its quadrature grids.
//!
//! Points are unit vectors in R^{n+1}.  The distinguished axis is the last
//! coordinate: `xi_{n+1} = cos(theta)` where theta is the polar angle from
//! the north pole.  Axially symmetric ("zonal") grids exist for every
//! n >= 2; full tensor-product grids are provided for n = 2 and n = 3.
//!
//! Grid weights always sum to the sphere area `omega_n`, and the polar
//! directions use Gauss rules for the exact surface measure, so products of
//! spherical harmonics up to the design degree are integrated exactly.

use crate::error::{Error, Result};
use crate::gauss::{gauss_gegenbauer, gegenbauer_mass, GaussRule};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// A point on S^n, stored as a unit vector in R^{n+1}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;
    fn try_from(coords: Vec<f64>) -> Result<Self> {
        SpherePoint::new(coords)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Vec<f64> {
        p.coords
    }
}

impl SpherePoint {
    /// Wrap ambient coordinates, requiring them to be unit length within 1e-9
    /// (they are then renormalized exactly).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::invalid(
                "a sphere point needs at least 3 ambient coordinates (n >= 2)",
            ));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && (norm - 1.0).abs() <= 1e-9) {
            return Err(Error::invalid(format!(
                "sphere point must be a unit vector; |x| = {norm}"
            )));
        }
        let coords = coords.into_iter().map(|c| c / norm).collect();
        Ok(SpherePoint { coords })
    }

    /// Normalize arbitrary nonzero ambient coordinates onto the sphere.
    pub fn from_unnormalized(coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-14 {
            return Err(Error::degenerate(
                "cannot normalize a (near-)zero vector onto the sphere",
            ));
        }
        SpherePoint::new(coords.into_iter().map(|c| c / norm).collect())
    }

    /// Sphere dimension n (= ambient dimension - 1).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `1 - cos d(a, b)`, computed as `|a - b|^2 / 2`.  Stable near d = 0
    /// where the cosine formula loses all precision.
    pub fn one_minus_cos(&self, other: &SpherePoint) -> f64 {
        0.5 * self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }

    /// Geodesic distance in [0, pi].
    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        (1.0 - self.one_minus_cos(other)).clamp(-1.0, 1.0).acos()
    }

    /// North pole (0, ..., 0, 1) of S^n.
    pub fn north_pole(n: usize) -> SpherePoint {
        let mut coords = vec![0.0; n + 1];
        coords[n] = 1.0;
        SpherePoint { coords }
    }

    /// South pole (0, ..., 0, -1) of S^n.
    pub fn south_pole(n: usize) -> SpherePoint {
        let mut coords = vec![0.0; n + 1];
        coords[n] = -1.0;
        SpherePoint { coords }
    }

    /// Point on the meridian in the (e_1, e_{n+1}) plane at polar angle theta:
    /// (sin theta, 0, ..., 0, cos theta).
    pub fn meridian(n: usize, theta: f64) -> SpherePoint {
        let mut coords = vec![0.0; n + 1];
        coords[0] = theta.sin();
        coords[n] = theta.cos();
        SpherePoint { coords }
    }

    /// Orthonormal basis of the tangent space at this point (n vectors in
    /// R^{n+1}).  Built from the Householder reflection exchanging the last
    /// coordinate axis with the point.
    pub fn tangent_basis(&self) -> Vec<Vec<f64>> {
        let d = self.coords.len();
        let n = d - 1;
        // v = x -+ e_last, whichever is larger, for stability.
        let sign = if self.coords[n] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = self.coords.clone();
        v[n] += sign; // v = x + sign*e_last, |v|^2 = 2(1 + sign*x_last) >= 2
        let vv: f64 = v.iter().map(|c| c * c).sum();
        let mut basis = Vec::with_capacity(n);
        for i in 0..n {
            // column i of H = I - 2 v v^T / |v|^2
            let scale = 2.0 * v[i] / vv;
            let mut col: Vec<f64> = v.iter().map(|&vj| -scale * vj).collect();
            col[i] += 1.0;
            basis.push(col);
        }
        basis
    }

    /// Riemannian exponential map: walk from this point along tangent vector
    /// `v` (given in ambient coordinates, assumed orthogonal to the point).
    pub fn exp_map(&self, v: &[f64]) -> Result<SpherePoint> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return SpherePoint::from_unnormalized(
                self.coords
                    .iter()
                    .zip(v)
                    .map(|(x, dv)| x + dv)
                    .collect(),
            );
        }
        let (s, c) = (norm.sin() / norm, norm.cos());
        SpherePoint::from_unnormalized(
            self.coords
                .iter()
                .zip(v)
                .map(|(x, dv)| c * x + s * dv)
                .collect(),
        )
    }

    /// Random uniform point on S^n (Gaussian direction via Box-Muller).
    pub fn random(n: usize, rng: &mut impl rand::Rng) -> SpherePoint {
        loop {
            let mut coords = Vec::with_capacity(n + 1);
            while coords.len() < n + 1 {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let r = (-2.0 * u1.ln()).sqrt();
                coords.push(r * (2.0 * PI * u2).cos());
                if coords.len() < n + 1 {
                    coords.push(r * (2.0 * PI * u2).sin());
                }
            }
            if let Ok(p) = SpherePoint::from_unnormalized(coords) {
                return p;
            }
        }
    }
}

/// Surface area of S^n: `2 pi^{(n+1)/2} / Gamma((n+1)/2)`.
pub fn omega_n(n: usize) -> f64 {
    let half = (n as f64 + 1.0) / 2.0;
    (std::f64::consts::LN_2.mul_add(0.0, 2.0f64.ln()) + half * PI.ln() - ln_gamma(half)).exp()
}

/// Inverse stereographic projection from the north pole:
/// `x in R^n  ->  (2x, |x|^2 - 1) / (1 + |x|^2)`.
pub fn stereographic_inverse(x: &[f64]) -> Result<SpherePoint> {
    if x.len() < 2 {
        return Err(Error::invalid("stereographic chart needs n >= 2"));
    }
    let r2: f64 = x.iter().map(|c| c * c).sum();
    let denom = 1.0 + r2;
    let mut coords: Vec<f64> = x.iter().map(|&c| 2.0 * c / denom).collect();
    coords.push((r2 - 1.0) / denom);
    SpherePoint::new(coords)
}

/// Conformal volume density of the inverse stereographic chart:
/// `(2 / (1 + |x|^2))^n`, so that `omega_n = integral of this over R^n`.
pub fn stereographic_jacobian(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|c| c * c).sum();
    (2.0 / (1.0 + r2)).powi(x.len() as i32)
}

/// Whether a grid resolves only axially symmetric functions or everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// Functions of the polar angle only; available for every n >= 2.
    Zonal,
    /// Full grid on S^2 or S^3.
    Full,
}

/// Internal structure of a grid, kept so transforms can factor through the
/// product form instead of treating nodes as an unstructured cloud.
#[derive(Debug, Clone)]
pub enum GridShape {
    /// Meridian nodes at t = cos(theta); any n.
    Zonal { polar: GaussRule },
    /// S^2: polar rule x uniform azimuth.
    Sphere2 { polar: GaussRule, azimuth: usize },
    /// S^3: outer polar rule x S^2 grid.
    Sphere3 {
        polar1: GaussRule,
        polar2: GaussRule,
        azimuth: usize,
    },
}

/// Quadrature grid on S^n: flattened nodes with positive weights summing to
/// `omega_n`, plus the product structure used by spectral transforms.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub n: usize,
    pub mode: GridMode,
    /// Maximum harmonic degree the grid is designed to resolve: products of
    /// two harmonics of degree <= `degree` are integrated exactly.
    pub degree: usize,
    pub points: Vec<SpherePoint>,
    pub weights: Vec<f64>,
    pub shape: GridShape,
}

impl QuadratureGrid {
    /// Integrate point samples against the grid weights.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sample a scalar function at every node.
    pub fn sample(&self, f: impl Fn(&SpherePoint) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }
}

/// Polar node count used for truncation degree `l` (Gauss rules of this size
/// integrate polynomial degree `4l + 3`, comfortably past the `2l` needed).
pub(crate) fn polar_nodes_for(l: usize) -> usize {
    2 * l + 2
}

/// Azimuth node count used for truncation degree `l` (uniform rule is exact
/// for trigonometric order < this count; products need `2l`).
pub(crate) fn azimuth_nodes_for(l: usize) -> usize {
    4 * l + 4
}

/// Build a quadrature grid on S^n resolving harmonics up to `degree`.
///
/// Zonal grids exist for all n >= 2; full grids for n = 2 and n = 3 only
/// (for larger n use `GridMode::Zonal`, which is enough for axially
/// symmetric data).
pub fn build_grid(n: usize, degree: usize, mode: GridMode) -> Result<QuadratureGrid> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "sphere dimension must be >= 2, got {n}"
        )));
    }
    match mode {
        GridMode::Zonal => build_zonal_grid(n, degree),
        GridMode::Full => match n {
            2 => build_s2_grid(degree),
            3 => build_s3_grid(degree),
            _ => Err(Error::unsupported(format!(
                "full grids are implemented for n = 2 and n = 3 only (got n = {n}); \
                 axially symmetric problems on S^{n} can use GridMode::Zonal"
            ))),
        },
    }
}

fn build_zonal_grid(n: usize, degree: usize) -> Result<QuadratureGrid> {
    let m = polar_nodes_for(degree);
    let lambda = (n as f64 - 1.0) / 2.0;
    let polar = gauss_gegenbauer(lambda, m)?;
    let ring = omega_n(n - 1); // area of the latitude ring factor S^{n-1}
    let mut points = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    // Nodes ascend in t = cos(theta), i.e. from south to north.
    for (&t, &w) in polar.nodes.iter().zip(&polar.weights) {
        let sin_theta = (1.0 - t * t).max(0.0).sqrt();
        let mut coords = vec![0.0; n + 1];
        coords[0] = sin_theta;
        coords[n] = t;
        points.push(SpherePoint { coords });
        weights.push(ring * w);
    }
    Ok(QuadratureGrid {
        n,
        mode: GridMode::Zonal,
        degree,
        points,
        weights,
        shape: GridShape::Zonal { polar },
    })
}

fn build_s2_grid(degree: usize) -> Result<QuadratureGrid> {
    let m_t = polar_nodes_for(degree);
    let m_phi = azimuth_nodes_for(degree);
    let polar = gauss_gegenbauer(0.5, m_t)?; // weight 1 in t = cos(theta)
    let dphi = 2.0 * PI / m_phi as f64;
    let mut points = Vec::with_capacity(m_t * m_phi);
    let mut weights = Vec::with_capacity(m_t * m_phi);
    for (&t, &wt) in polar.nodes.iter().zip(&polar.weights) {
        let st = (1.0 - t * t).max(0.0).sqrt();
        for j in 0..m_phi {
            let phi = dphi * j as f64;
            points.push(SpherePoint {
                coords: vec![st * phi.cos(), st * phi.sin(), t],
            });
            weights.push(wt * dphi);
        }
    }
    Ok(QuadratureGrid {
        n: 2,
        mode: GridMode::Full,
        degree,
        points,
        weights,
        shape: GridShape::Sphere2 {
            polar,
            azimuth: m_phi,
        },
    })
}

fn build_s3_grid(degree: usize) -> Result<QuadratureGrid> {
    let m1 = polar_nodes_for(degree);
    let m2 = polar_nodes_for(degree);
    let m_phi = azimuth_nodes_for(degree);
    let polar1 = gauss_gegenbauer(1.0, m1)?; // weight (1 - t^2)^{1/2}
    let polar2 = gauss_gegenbauer(0.5, m2)?;
    let dphi = 2.0 * PI / m_phi as f64;
    let mut points = Vec::with_capacity(m1 * m2 * m_phi);
    let mut weights = Vec::with_capacity(m1 * m2 * m_phi);
    for (&t1, &w1) in polar1.nodes.iter().zip(&polar1.weights) {
        let s1 = (1.0 - t1 * t1).max(0.0).sqrt();
        for (&t2, &w2) in polar2.nodes.iter().zip(&polar2.weights) {
            let s2 = (1.0 - t2 * t2).max(0.0).sqrt();
            for j in 0..m_phi {
                let phi = dphi * j as f64;
                points.push(SpherePoint {
                    coords: vec![s1 * s2 * phi.cos(), s1 * s2 * phi.sin(), s1 * t2, t1],
                });
                weights.push(w1 * w2 * dphi);
            }
        }
    }
    Ok(QuadratureGrid {
        n: 3,
        mode: GridMode::Full,
        degree,
        points,
        weights,
        shape: GridShape::Sphere3 {
            polar1,
            polar2,
            azimuth: m_phi,
        },
    })
}

/// Mass of the polar weight for S^n, `integral (1-t^2)^{(n-2)/2} dt`; the
/// identity `omega_n = omega_{n-1} * polar_mass(n)` ties ring and polar
/// factors together.
pub fn polar_mass(n: usize) -> f64 {
    gegenbauer_mass((n as f64 - 1.0) / 2.0)
}
