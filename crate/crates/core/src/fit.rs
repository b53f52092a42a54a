//! Small least-squares helpers for sweep diagnostics (slope fits of decay
//! laws, calibration of expansion constants).

use crate::error::{Error, Result};

/// Ordinary least squares for `y ~ slope * x + intercept`.
/// Returns (slope, intercept, relative rms residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(
            "linear fit needs two equally long samples of length >= 2",
        ));
    }
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::degenerate("linear fit with constant abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (slope * x + intercept);
        ss_res += e * e;
        ss_tot += (y - my) * (y - my);
    }
    let rel = if ss_tot > 0.0 {
        (ss_res / ss_tot).sqrt()
    } else {
        0.0
    };
    Ok((slope, intercept, rel))
}

/// Fit `|y| ~ C * x^slope` by regressing log|y| on log x.
/// Returns (slope, relative rms residual in log space).
pub fn powerlaw_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Result<Vec<f64>> = ys
        .iter()
        .map(|y| {
            let a = y.abs();
            if a <= 0.0 || !a.is_finite() {
                Err(Error::degenerate(
                    "power-law fit requires nonzero finite samples",
                ))
            } else {
                Ok(a.ln())
            }
        })
        .collect();
    let (slope, _, rel) = linear_fit(&lx, &ly?)?;
    Ok((slope, rel))
}

/// Two-parameter least squares for `y ~ b * x + c * x^e` (no intercept):
/// used to extract the leading `1/lambda^2` coefficient of deviations while
/// absorbing the next-order correction `x^e`.  Returns
/// (b, c, relative rms residual).
pub fn leading_coefficient_fit(
    xs: &[f64],
    ys: &[f64],
    second_exponent: f64,
) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::invalid(
            "coefficient fit needs two equally long samples of length >= 3",
        ));
    }
    if !(second_exponent > 1.0) {
        return Err(Error::invalid(
            "secondary exponent must exceed the leading one",
        ));
    }
    // Normal equations for the 2-column design [x, x^e].
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let x2 = x.powf(second_exponent);
        a11 += x * x;
        a12 += x * x2;
        a22 += x2 * x2;
        b1 += x * y;
        b2 += x2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= 1e-300 {
        return Err(Error::degenerate("singular design in coefficient fit"));
    }
    let b = (b1 * a22 - b2 * a12) / det;
    let c = (a11 * b2 - a12 * b1) / det;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (b * x + c * x.powf(second_exponent));
        ss_res += e * e;
        ss_tot += y * y;
    }
    let rel = if ss_tot > 0.0 {
        (ss_res / ss_tot).sqrt()
    } else {
        0.0
    };
    Ok((b, c, rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exact_line() {
        let xs = [1.0, 2.0, 3.5, 7.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let (s, i, r) = linear_fit(&xs, &ys).unwrap();
        assert_relative_eq!(s, 3.0, max_relative = 1e-12);
        assert_relative_eq!(i, -2.0, max_relative = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn recovers_power_law() {
        let xs = [2.0, 4.0, 8.0, 16.0, 32.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 5.0 * x.powf(-2.0)).collect();
        let (s, r) = powerlaw_slope(&xs, &ys).unwrap();
        assert_relative_eq!(s, -2.0, max_relative = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn extracts_leading_coefficient_with_correction() {
        let xs: Vec<f64> = (1..=8).map(|i| 1.0 / (i as f64 * i as f64)).collect();
        for e in [1.5, 2.0] {
            let ys: Vec<f64> = xs.iter().map(|x| 0.7 * x - 0.2 * x.powf(e)).collect();
            let (b, c, r) = leading_coefficient_fit(&xs, &ys, e).unwrap();
            assert_relative_eq!(b, 0.7, max_relative = 1e-9);
            assert_relative_eq!(c, -0.2, max_relative = 1e-8);
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(powerlaw_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
