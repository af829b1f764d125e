//! Distribution functions: standard normal CDF and quantile, and the
//! regularized incomplete beta function used for F-distribution p-values.
//!
//! `erfc` comes from `libm` (the musl port, accurate to about one ulp); the
//! inverse and the incomplete beta come from `statrs`. This module pins the
//! domain checks and conventions the rest of the crate relies on.

use std::f64::consts::SQRT_2;

use statrs::function::{beta, erf};

use crate::error::{Error, Result};

/// Standard normal CDF, `Phi(z)`.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Upper tail `1 - Phi(z)`, accurate for large `z`.
pub fn normal_sf(z: f64) -> f64 {
    normal_cdf(-z)
}

/// Inverse of [`normal_cdf`] on the open interval `(0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    let mut z = -SQRT_2 * erf::erfc_inv(2.0 * p);
    // one Newton step against the CDF tightens the round trip
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if pdf > 0.0 {
        let step = (normal_cdf(z) - p) / pdf;
        if step.is_finite() {
            z -= step;
        }
    }
    Ok(z)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("incomplete beta needs a, b > 0, got a={a}, b={b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("incomplete beta needs x in [0, 1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    Ok(beta::beta_reg(a, b, x).clamp(0.0, 1.0))
}

/// Upper tail of the F distribution, `P(F > f)` with `(d1, d2)` degrees of freedom.
pub fn f_distribution_sf(f: f64, d1: f64, d2: f64) -> Result<f64> {
    if f.is_infinite() && f > 0.0 {
        return Ok(0.0);
    }
    if f <= 0.0 {
        return Ok(1.0);
    }
    regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}
