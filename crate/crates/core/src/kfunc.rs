//! Prescribed-curvature candidates and their intrinsic differentials.
//!
//! A [`KFunction`] provides point values on the sphere and, optionally,
//! ambient derivatives of a smooth extension.  The intrinsic quantities
//! (tangential gradient, Hessian on the tangent space, Laplace-Beltrami
//! trace) are extension-independent: with `P = I - x x^T`,
//!
//! ```text
//!     grad_S K = P grad K,
//!     Hess_S K(v, w) = v^T (grad^2 K) w - (x . grad K) <v, w>,
//! ```
//!
//! because the second fundamental form of the unit sphere is the metric
//! itself.  Without analytic derivatives, geodesic central differences are
//! used: `d^2/ds^2 K(exp_p(s v))` at `s = 0` *is* the Riemannian Hessian,
//! so no curvature correction appears in the fallback either.

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, Transform};
use crate::sphere::SpherePoint;

/// Default geodesic step for first differences.
pub const FD_GRADIENT_STEP: f64 = 1e-5;
/// Default geodesic step for second differences (larger: the noise floor
/// of a second difference scales like eps / h^2).
pub const FD_HESSIAN_STEP: f64 = 1e-4;

pub trait KFunction {
    fn value(&self, p: &SpherePoint) -> f64;

    /// Ambient gradient of a smooth extension, when known analytically.
    fn ambient_gradient(&self, _p: &SpherePoint) -> Option<Vec<f64>> {
        None
    }

    /// Ambient Hessian of the same extension (row-major, symmetric).  Only
    /// consulted when [`Self::ambient_gradient`] is also available.
    fn ambient_hessian(&self, _p: &SpherePoint) -> Option<Vec<Vec<f64>>> {
        None
    }
}

/// `K = c`.
pub struct ConstantK(pub f64);

impl KFunction for ConstantK {
    fn value(&self, _p: &SpherePoint) -> f64 {
        self.0
    }
    fn ambient_gradient(&self, p: &SpherePoint) -> Option<Vec<f64>> {
        Some(vec![0.0; p.dim() + 1])
    }
    fn ambient_hessian(&self, p: &SpherePoint) -> Option<Vec<Vec<f64>>> {
        Some(vec![vec![0.0; p.dim() + 1]; p.dim() + 1])
    }
}

/// `K = offset + <direction, x>`.
pub struct LinearK {
    pub offset: f64,
    pub direction: Vec<f64>,
}

impl KFunction for LinearK {
    fn value(&self, p: &SpherePoint) -> f64 {
        self.offset
            + self
                .direction
                .iter()
                .zip(p.coords())
                .map(|(d, x)| d * x)
                .sum::<f64>()
    }
    fn ambient_gradient(&self, _p: &SpherePoint) -> Option<Vec<f64>> {
        Some(self.direction.clone())
    }
    fn ambient_hessian(&self, p: &SpherePoint) -> Option<Vec<Vec<f64>>> {
        Some(vec![vec![0.0; p.dim() + 1]; p.dim() + 1])
    }
}

/// `K = base + amp * x_axis^2` (axis is an ambient coordinate index);
/// covers the symmetric two-peak family `1 + eps (xi_{n+1}^2 - c)`.
pub struct AxisQuadraticK {
    pub base: f64,
    pub amp: f64,
    pub axis: usize,
}

impl KFunction for AxisQuadraticK {
    fn value(&self, p: &SpherePoint) -> f64 {
        let x = p.coords()[self.axis];
        self.base + self.amp * x * x
    }
    fn ambient_gradient(&self, p: &SpherePoint) -> Option<Vec<f64>> {
        let mut g = vec![0.0; p.dim() + 1];
        g[self.axis] = 2.0 * self.amp * p.coords()[self.axis];
        Some(g)
    }
    fn ambient_hessian(&self, p: &SpherePoint) -> Option<Vec<Vec<f64>>> {
        let d = p.dim() + 1;
        let mut h = vec![vec![0.0; d]; d];
        h[self.axis][self.axis] = 2.0 * self.amp;
        Some(h)
    }
}

/// Arbitrary closure; differentials fall back to geodesic differences.
pub struct ClosureK<F: Fn(&SpherePoint) -> f64>(pub F);

impl<F: Fn(&SpherePoint) -> f64> KFunction for ClosureK<F> {
    fn value(&self, p: &SpherePoint) -> f64 {
        (self.0)(p)
    }
}

/// A band-limited field evaluated through its transform.
pub struct SpectralK<'a> {
    pub tf: &'a Transform,
    pub field: &'a SpectralField,
}

impl KFunction for SpectralK<'_> {
    fn value(&self, p: &SpherePoint) -> f64 {
        self.tf
            .eval(self.field, p)
            .expect("field and transform are compatible by construction")
    }
}

/// Intrinsic differentials of K at a point.
#[derive(Debug, Clone)]
pub struct Differentials {
    pub value: f64,
    /// Tangential gradient in ambient coordinates (orthogonal to the point).
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    /// Intrinsic Hessian in the orthonormal basis `p.tangent_basis()`.
    pub hessian: Vec<Vec<f64>>,
    /// Laplace-Beltrami operator applied to K (trace of the Hessian).
    pub laplacian: f64,
}

/// Compute value, tangential gradient, intrinsic Hessian, and Laplacian,
/// using analytic ambient derivatives when the function provides them and
/// geodesic central differences otherwise.
pub fn differentials(
    k: &dyn KFunction,
    p: &SpherePoint,
    fd_gradient_step: f64,
    fd_hessian_step: f64,
) -> Result<Differentials> {
    if !(fd_gradient_step > 0.0) || !(fd_hessian_step > 0.0) {
        return Err(Error::invalid("difference steps must be positive"));
    }
    let n = p.dim();
    let x = p.coords();
    let basis = p.tangent_basis();
    let value = k.value(p);

    let ambient = k.ambient_gradient(p);
    let (gradient, radial) = match &ambient {
        Some(g) => {
            if g.len() != n + 1 {
                return Err(Error::mismatch(
                    "ambient gradient must have n + 1 components",
                ));
            }
            let gx: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
            let gt: Vec<f64> = g.iter().zip(x).map(|(a, b)| a - gx * b).collect();
            (gt, Some(gx))
        }
        None => {
            let h = fd_gradient_step;
            let mut gt = vec![0.0; n + 1];
            for eta in &basis {
                let step: Vec<f64> = eta.iter().map(|e| e * h).collect();
                let fp = k.value(&p.exp_map(&step)?);
                let neg: Vec<f64> = eta.iter().map(|e| -e * h).collect();
                let fm = k.value(&p.exp_map(&neg)?);
                let d = (fp - fm) / (2.0 * h);
                for (g, e) in gt.iter_mut().zip(eta) {
                    *g += d * e;
                }
            }
            (gt, None)
        }
    };
    let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();

    let analytic_hessian = match (k.ambient_hessian(p), radial) {
        (Some(hmat), Some(gx)) => {
            if hmat.len() != n + 1 || hmat.iter().any(|row| row.len() != n + 1) {
                return Err(Error::mismatch(
                    "ambient Hessian must be (n + 1) x (n + 1)",
                ));
            }
            let mut hess = vec![vec![0.0; n]; n];
            for a in 0..n {
                for b in 0..n {
                    let mut q = 0.0;
                    for i in 0..=n {
                        for j in 0..=n {
                            q += basis[a][i] * hmat[i][j] * basis[b][j];
                        }
                    }
                    hess[a][b] = q - if a == b { gx } else { 0.0 };
                }
            }
            Some(hess)
        }
        _ => None,
    };
    let hessian = match analytic_hessian {
        Some(h) => h,
        None => {
            let h = fd_hessian_step;
            let geo = |dir: &[f64]| -> Result<f64> {
                let step: Vec<f64> = dir.iter().map(|e| e * h).collect();
                Ok(k.value(&p.exp_map(&step)?))
            };
            let mut hess = vec![vec![0.0; n]; n];
            for a in 0..n {
                let fp = geo(&basis[a])?;
                let fm = geo(&basis[a].iter().map(|e| -e).collect::<Vec<_>>())?;
                hess[a][a] = (fp - 2.0 * value + fm) / (h * h);
                for b in a + 1..n {
                    let mk = |sa: f64, sb: f64| -> Vec<f64> {
                        basis[a]
                            .iter()
                            .zip(&basis[b])
                            .map(|(ea, eb)| sa * ea + sb * eb)
                            .collect()
                    };
                    let pp = geo(&mk(1.0, 1.0))?;
                    let mm = geo(&mk(-1.0, -1.0))?;
                    let pm = geo(&mk(1.0, -1.0))?;
                    let mp = geo(&mk(-1.0, 1.0))?;
                    let q = (pp + mm - pm - mp) / (4.0 * h * h);
                    hess[a][b] = q;
                    hess[b][a] = q;
                }
            }
            hess
        }
    };
    let laplacian = (0..n).map(|a| hessian[a][a]).sum();

    Ok(Differentials {
        value,
        gradient,
        gradient_norm,
        hessian,
        laplacian,
    })
}
