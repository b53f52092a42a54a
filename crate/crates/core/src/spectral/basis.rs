//! Recurrence evaluation and quadrature-normalized basis engines.
//!
//! All bases are normalized against the grid quadrature itself (each basis
//! function has unit discrete L^2 norm).  Pairwise orthogonality then holds
//! to machine precision because the grids integrate products of harmonics up
//! to the design degree exactly, so no closed-form normalization constants
//! are ever needed -- eliminating a classic source of convention bugs.
//!
//! Stability notes: associated Legendre functions use the fully normalized
//! three-term recurrence (values stay O(sqrt(l)), good to degree thousands);
//! the ultraspherical factors of the S^3 basis are evaluated as
//! `(sin theta)^j * C_{k-j}^{(j+1)}(cos theta)`, whose two factors stay well
//! inside f64 range for every supported truncation.

use crate::gauss::GaussRule;

/// Values `C_0^{(lambda)}(t) .. C_{lmax}^{(lambda)}(t)` of the Gegenbauer
/// polynomials, by the standard recurrence.
pub(crate) fn gegenbauer_row(lambda: f64, lmax: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if lmax == 0 {
        return;
    }
    out.push(2.0 * lambda * t);
    for k in 1..lmax {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda) * t * out[k] - (kf + 2.0 * lambda - 1.0) * out[k - 1])
            / (kf + 1.0);
        out.push(next);
    }
}

/// Fully normalized associated Legendre values for fixed order m:
/// entries for degrees `l = m ..= lmax` (so `out[l - m]` is degree l).
/// `s = sqrt(1 - t^2)` is passed separately for accuracy near the poles.
pub(crate) fn alf_row(lmax: usize, m: usize, t: f64, s: f64, out: &mut Vec<f64>) {
    out.clear();
    // Seed: diagonal term prod_{i=1..m} s * sqrt((2i-1)/(2i)); O(1) by design.
    let mut pmm = 1.0;
    for i in 1..=m {
        pmm *= s * ((2 * i - 1) as f64 / (2 * i) as f64).sqrt();
    }
    out.push(pmm);
    if lmax == m {
        return;
    }
    let mut prev = pmm;
    let mut cur = ((2 * m + 3) as f64).sqrt() * t * pmm;
    out.push(cur);
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let mf = m as f64;
        let a = (((2.0 * lf - 1.0) * (2.0 * lf + 1.0)) / ((lf - mf) * (lf + mf))).sqrt();
        let b = (((2.0 * lf + 1.0) * ((lf - 1.0) * (lf - 1.0) - mf * mf))
            / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
            .sqrt();
        let next = a * t * cur - b * prev;
        out.push(next);
        prev = cur;
        cur = next;
    }
}

/// Coefficient layout helpers.  Degree-k block sizes: 1 (zonal), 2k+1 (S^2),
/// (k+1)^2 (S^3).
pub fn s2_offset(k: usize) -> usize {
    k * k
}

pub fn s3_offset(k: usize) -> usize {
    k * (k + 1) * (2 * k + 1) / 6
}

// ---------------------------------------------------------------------------
// Zonal engine: functions of the polar angle on S^n, any n >= 2.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) struct ZonalEngine {
    pub lmax: usize,
    lambda: f64,
    /// Full surface weights (ring area folded in), one per polar node.
    weights: Vec<f64>,
    /// Normalized basis values `z[k][i]`.
    z: Vec<Vec<f64>>,
    /// Divisors from raw Gegenbauer values to normalized ones.
    norms: Vec<f64>,
}

impl ZonalEngine {
    pub fn new(polar: &GaussRule, ring_area: f64, lambda: f64, lmax: usize) -> Self {
        let m = polar.nodes.len();
        let weights: Vec<f64> = polar.weights.iter().map(|w| w * ring_area).collect();
        let mut z = vec![vec![0.0; m]; lmax + 1];
        let mut row = Vec::new();
        for (i, &t) in polar.nodes.iter().enumerate() {
            gegenbauer_row(lambda, lmax, t, &mut row);
            for k in 0..=lmax {
                z[k][i] = row[k];
            }
        }
        let mut norms = Vec::with_capacity(lmax + 1);
        for zk in z.iter_mut() {
            let nrm = zk
                .iter()
                .zip(&weights)
                .map(|(v, w)| w * v * v)
                .sum::<f64>()
                .sqrt();
            for v in zk.iter_mut() {
                *v /= nrm;
            }
            norms.push(nrm);
        }
        ZonalEngine {
            lmax,
            lambda,
            weights,
            z,
            norms,
        }
    }

    pub fn coeff_len(&self) -> usize {
        self.lmax + 1
    }

    pub fn forward(&self, samples: &[f64], coeffs: &mut [f64]) {
        for (k, zk) in self.z.iter().enumerate() {
            coeffs[k] = zk
                .iter()
                .zip(samples)
                .zip(&self.weights)
                .map(|((z, f), w)| w * z * f)
                .sum();
        }
    }

    pub fn inverse(&self, coeffs: &[f64], samples: &mut [f64]) {
        samples.fill(0.0);
        for (k, zk) in self.z.iter().enumerate() {
            let c = coeffs[k];
            if c != 0.0 {
                for (s, z) in samples.iter_mut().zip(zk) {
                    *s += c * z;
                }
            }
        }
    }

    /// Evaluate a coefficient vector at polar coordinate t = cos(theta).
    pub fn eval(&self, coeffs: &[f64], t: f64) -> f64 {
        let mut row = Vec::with_capacity(self.lmax + 1);
        gegenbauer_row(self.lambda, self.lmax, t, &mut row);
        row.iter()
            .zip(coeffs)
            .zip(&self.norms)
            .map(|((r, c), n)| c * r / n)
            .sum()
    }
}

// ---------------------------------------------------------------------------
// S^2 engine: tensor of a polar Gauss-Legendre rule and a uniform azimuth.
// Also serves as the inner angular factor of the S^3 engine.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) struct S2Engine {
    pub lmax: usize,
    pub mt: usize,
    pub mphi: usize,
    w2: Vec<f64>,
    /// Normalized polar tables `theta[m][j - m][i]` for degrees j = m..lmax.
    theta: Vec<Vec<Vec<f64>>>,
    /// Divisors from raw `alf_row` values to normalized tables.
    norms: Vec<Vec<f64>>,
    cosm: Vec<Vec<f64>>,
    sinm: Vec<Vec<f64>>,
    dphi: f64,
}

impl S2Engine {
    pub fn new(polar: &GaussRule, mphi: usize, lmax: usize) -> Self {
        let mt = polar.nodes.len();
        let dphi = 2.0 * std::f64::consts::PI / mphi as f64;
        let w2 = polar.weights.clone();
        let mut theta = Vec::with_capacity(lmax + 1);
        let mut norms = Vec::with_capacity(lmax + 1);
        let mut row = Vec::new();
        for m in 0..=lmax {
            // Azimuthal mass of cos^2/sin^2 on the uniform grid.
            let cm = if m == 0 {
                2.0 * std::f64::consts::PI
            } else {
                std::f64::consts::PI
            };
            let mut tables = vec![vec![0.0; mt]; lmax - m + 1];
            for (i, &t) in polar.nodes.iter().enumerate() {
                let s = (1.0 - t * t).max(0.0).sqrt();
                alf_row(lmax, m, t, s, &mut row);
                for (jm, val) in row.iter().enumerate() {
                    tables[jm][i] = *val;
                }
            }
            let mut mnorms = Vec::with_capacity(lmax - m + 1);
            for tab in tables.iter_mut() {
                // Normalize so the full basis function T * cos(m phi) has
                // unit discrete norm: sum w2 T^2 = 1 / cm.
                let nrm = (cm
                    * tab
                        .iter()
                        .zip(&w2)
                        .map(|(v, w)| w * v * v)
                        .sum::<f64>())
                .sqrt();
                for v in tab.iter_mut() {
                    *v /= nrm;
                }
                mnorms.push(nrm);
            }
            theta.push(tables);
            norms.push(mnorms);
        }
        let mut cosm = Vec::with_capacity(lmax + 1);
        let mut sinm = Vec::with_capacity(lmax + 1);
        for m in 0..=lmax {
            let mut c = Vec::with_capacity(mphi);
            let mut s = Vec::with_capacity(mphi);
            for i in 0..mphi {
                let phi = dphi * i as f64 * m as f64;
                c.push(phi.cos());
                s.push(phi.sin());
            }
            cosm.push(c);
            sinm.push(s);
        }
        S2Engine {
            lmax,
            mt,
            mphi,
            w2,
            theta,
            norms,
            cosm,
            sinm,
            dphi,
        }
    }

    pub fn coeff_len(&self) -> usize {
        (self.lmax + 1) * (self.lmax + 1)
    }

    pub fn grid_len(&self) -> usize {
        self.mt * self.mphi
    }

    /// Samples are laid out polar-major: `f[i_t * mphi + i_phi]`.
    pub fn forward(&self, samples: &[f64], coeffs: &mut [f64]) {
        let l = self.lmax;
        // Azimuth stage: a[m][i_t], b[m][i_t].
        let mut a = vec![vec![0.0; self.mt]; l + 1];
        let mut b = vec![vec![0.0; self.mt]; l + 1];
        for it in 0..self.mt {
            let rowf = &samples[it * self.mphi..(it + 1) * self.mphi];
            for m in 0..=l {
                let mut ca = 0.0;
                let mut cb = 0.0;
                for (i, &f) in rowf.iter().enumerate() {
                    ca += f * self.cosm[m][i];
                    cb += f * self.sinm[m][i];
                }
                a[m][it] = ca * self.dphi;
                b[m][it] = cb * self.dphi;
            }
        }
        // Polar stage.
        coeffs.fill(0.0);
        for m in 0..=l {
            for j in m..=l {
                let tab = &self.theta[m][j - m];
                let mut ccos = 0.0;
                let mut csin = 0.0;
                for it in 0..self.mt {
                    let wt = self.w2[it] * tab[it];
                    ccos += wt * a[m][it];
                    csin += wt * b[m][it];
                }
                let off = s2_offset(j);
                if m == 0 {
                    coeffs[off] = ccos;
                } else {
                    coeffs[off + 2 * m - 1] = ccos;
                    coeffs[off + 2 * m] = csin;
                }
            }
        }
    }

    pub fn inverse(&self, coeffs: &[f64], samples: &mut [f64]) {
        let l = self.lmax;
        let mut csum = vec![0.0; l + 1];
        let mut ssum = vec![0.0; l + 1];
        for it in 0..self.mt {
            csum.fill(0.0);
            ssum.fill(0.0);
            for m in 0..=l {
                for j in m..=l {
                    let v = self.theta[m][j - m][it];
                    let off = s2_offset(j);
                    if m == 0 {
                        csum[0] += coeffs[off] * v;
                    } else {
                        csum[m] += coeffs[off + 2 * m - 1] * v;
                        ssum[m] += coeffs[off + 2 * m] * v;
                    }
                }
            }
            let out = &mut samples[it * self.mphi..(it + 1) * self.mphi];
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = csum[0];
                for m in 1..=l {
                    acc += csum[m] * self.cosm[m][i] + ssum[m] * self.sinm[m][i];
                }
                *o = acc;
            }
        }
    }

    /// Values of every basis function at an arbitrary direction, written in
    /// coefficient layout (used by point evaluation and by the S^3 engine).
    pub fn eval_all(&self, t: f64, phi: f64, out: &mut [f64]) {
        let l = self.lmax;
        let s = (1.0 - t * t).max(0.0).sqrt();
        let mut row = Vec::new();
        for m in 0..=l {
            alf_row(l, m, t, s, &mut row);
            let (cm, sm) = ((m as f64 * phi).cos(), (m as f64 * phi).sin());
            for j in m..=l {
                let v = row[j - m] / self.norms[m][j - m];
                let off = s2_offset(j);
                if m == 0 {
                    out[off] = v;
                } else {
                    out[off + 2 * m - 1] = v * cm;
                    out[off + 2 * m] = v * sm;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// S^3 engine: outer ultraspherical polar factor x S^2 engine.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) struct S3Engine {
    pub lmax: usize,
    pub m1: usize,
    w1: Vec<f64>,
    /// Normalized polar factors `psi[j][k - j][i1]`,
    /// psi_{k,j} = (sin theta_1)^j C_{k-j}^{(j+1)}(cos theta_1).
    psi: Vec<Vec<Vec<f64>>>,
    norms: Vec<Vec<f64>>,
    pub s2: S2Engine,
}

impl S3Engine {
    pub fn new(polar1: &GaussRule, polar2: &GaussRule, mphi: usize, lmax: usize) -> Self {
        let m1 = polar1.nodes.len();
        let w1 = polar1.weights.clone();
        let t1 = polar1.nodes.clone();
        let s2 = S2Engine::new(polar2, mphi, lmax);
        let mut psi = Vec::with_capacity(lmax + 1);
        let mut norms = Vec::with_capacity(lmax + 1);
        let mut row = Vec::new();
        for j in 0..=lmax {
            let mut tables = vec![vec![0.0; m1]; lmax - j + 1];
            for (i, &t) in t1.iter().enumerate() {
                let s = (1.0 - t * t).max(0.0).sqrt();
                let sj = s.powi(j as i32);
                gegenbauer_row(j as f64 + 1.0, lmax - j, t, &mut row);
                for kj in 0..=(lmax - j) {
                    tables[kj][i] = sj * row[kj];
                }
            }
            let mut jnorms = Vec::with_capacity(lmax - j + 1);
            for tab in tables.iter_mut() {
                let nrm = tab
                    .iter()
                    .zip(&w1)
                    .map(|(v, w)| w * v * v)
                    .sum::<f64>()
                    .sqrt();
                for v in tab.iter_mut() {
                    *v /= nrm;
                }
                jnorms.push(nrm);
            }
            psi.push(tables);
            norms.push(jnorms);
        }
        S3Engine {
            lmax,
            m1,
            w1,
            psi,
            norms,
            s2,
        }
    }

    pub fn coeff_len(&self) -> usize {
        s3_offset(self.lmax + 1)
    }

    /// Samples laid out `f[(i1 * mt + i2) * mphi + i3]`.
    pub fn forward(&self, samples: &[f64], coeffs: &mut [f64]) {
        let l = self.lmax;
        let slab = self.s2.grid_len();
        let s2len = self.s2.coeff_len();
        // Stage A: angular transform of each polar slab.
        let mut s2c = vec![0.0; self.m1 * s2len];
        for i1 in 0..self.m1 {
            self.s2.forward(
                &samples[i1 * slab..(i1 + 1) * slab],
                &mut s2c[i1 * s2len..(i1 + 1) * s2len],
            );
        }
        // Stage B: project onto the outer polar factors.
        coeffs.fill(0.0);
        for j in 0..=l {
            for r in 0..(2 * j + 1) {
                let inner = s2_offset(j) + r;
                for k in j..=l {
                    let tab = &self.psi[j][k - j];
                    let mut acc = 0.0;
                    for i1 in 0..self.m1 {
                        acc += self.w1[i1] * tab[i1] * s2c[i1 * s2len + inner];
                    }
                    coeffs[s3_offset(k) + j * j + r] = acc;
                }
            }
        }
    }

    pub fn inverse(&self, coeffs: &[f64], samples: &mut [f64]) {
        let l = self.lmax;
        let slab = self.s2.grid_len();
        let s2len = self.s2.coeff_len();
        let mut s2c = vec![0.0; s2len];
        for i1 in 0..self.m1 {
            s2c.fill(0.0);
            for j in 0..=l {
                for r in 0..(2 * j + 1) {
                    let inner = s2_offset(j) + r;
                    let mut acc = 0.0;
                    for k in j..=l {
                        acc += coeffs[s3_offset(k) + j * j + r] * self.psi[j][k - j][i1];
                    }
                    s2c[inner] = acc;
                }
            }
            self.s2
                .inverse(&s2c, &mut samples[i1 * slab..(i1 + 1) * slab]);
        }
    }

    /// Evaluate at polar coordinate t1 and inner direction (t2, phi).
    pub fn eval(&self, coeffs: &[f64], t1: f64, t2: f64, phi: f64) -> f64 {
        let l = self.lmax;
        let s1 = (1.0 - t1 * t1).max(0.0).sqrt();
        let mut ang = vec![0.0; self.s2.coeff_len()];
        self.s2.eval_all(t2, phi, &mut ang);
        let mut row = Vec::new();
        let mut acc = 0.0;
        for j in 0..=l {
            let sj = s1.powi(j as i32);
            gegenbauer_row(j as f64 + 1.0, l - j, t1, &mut row);
            for k in j..=l {
                let psi = sj * row[k - j] / self.norms[j][k - j];
                let base = s3_offset(k) + j * j;
                let mut inner = 0.0;
                for r in 0..(2 * j + 1) {
                    inner += coeffs[base + r] * ang[s2_offset(j) + r];
                }
                acc += psi * inner;
            }
        }
        acc
    }
}
