//! Principal-value integrals of (e^{i omega a} - e^{i omega b}) / omega^2.
//!
//! The analytic values come from closing the contour around the simple pole
//! at the origin; the quadrature route realizes the principal value through
//! symmetric truncation, where the odd imaginary part cancels exactly and
//! the real part converges to the same constants. The kernel combination
//! used by the flat-coupling regression proof reduces to
//! 2 pi (t_k - t_{k-1}) delta_{kh} for intervals of a common ordered grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvMethod {
    Analytic,
    Quadrature,
}

#[derive(Debug, Clone, Copy)]
pub struct PvResult {
    pub value: f64,
    pub method: PvMethod,
    pub estimated_error: f64,
}

impl PvResult {
    fn analytic(value: f64) -> Self {
        Self { value, method: PvMethod::Analytic, estimated_error: 0.0 }
    }
}

/// PV int (e^{i w a} - e^{i w b}) / w^2 dw for a, b of a common sign:
/// -pi (a - b) when both are >= 0, +pi (a - b) when both are <= 0.
/// Mixed strict signs are outside the treated cases and are rejected.
pub fn pv_exp_diff(a: f64, b: f64) -> Result<PvResult> {
    if a >= 0.0 && b >= 0.0 {
        Ok(PvResult::analytic(-PI * (a - b)))
    } else if a <= 0.0 && b <= 0.0 {
        Ok(PvResult::analytic(PI * (a - b)))
    } else {
        Err(Error::UnsupportedCase(format!(
            "pv_exp_diff needs a, b of a common sign, got a = {a}, b = {b}"
        )))
    }
}

/// PV int (1 - e^{i w b}) / w^2 dw = pi |b|.
pub fn pv_one_minus_exp(b: f64) -> PvResult {
    PvResult::analytic(PI * b.abs())
}

/// int (e^{i w t_k} - e^{i w t_{k-1}})(e^{-i w t_h} - e^{-i w t_{h-1}}) / w^2 dw
/// for two intervals [t_{k-1}, t_k], [t_{h-1}, t_h] of a common ordered grid:
/// 2 pi (t_k - t_{k-1}) when the intervals coincide, zero when they are
/// disjoint. Derived here from the two principal-value integrals rather than
/// stated, so the Kronecker-delta form is a checkable consequence.
pub fn kernel_integral(t_k: f64, t_km1: f64, t_h: f64, t_hm1: f64) -> Result<f64> {
    for (hi, lo) in [(t_k, t_km1), (t_h, t_hm1)] {
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::UnsupportedCase(format!(
                "interval [{lo}, {hi}] is not an ordered nonnegative grid interval"
            )));
        }
    }
    let identical = t_k == t_h && t_km1 == t_hm1;
    let disjoint = t_hm1 >= t_k || t_h <= t_km1;
    if !identical && !disjoint {
        return Err(Error::UnsupportedCase(
            "intervals overlap without coinciding; not consecutive intervals of one grid".into(),
        ));
    }
    let first = pv_exp_diff(t_k - t_h, t_km1 - t_h)?;
    let second = pv_exp_diff(t_k - t_hm1, t_km1 - t_hm1)?;
    Ok(first.value - second.value)
}

/// Tail of int_R^inf cos(x w) / w^2 dw by repeated integration by parts;
/// the neglected term is bounded by 6 / (x R)^4.
fn cosine_tail(x: f64, radius: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0 / radius, 0.0);
    }
    let xr = x * radius;
    let value = -xr.sin() / (x * radius * radius)
        + 2.0 * xr.cos() / (x * x * radius.powi(3))
        + 6.0 * xr.sin() / (x.powi(3) * radius.powi(4));
    (value, 6.0 / xr.powi(4))
}

const TAIL_THRESHOLD: f64 = 200.0;

/// Tail handling for one cosine component: extend the quadrature window
/// until x * R is large enough for the asymptotic series, then apply it.
fn component_tail(x: f64, radius: f64) -> Result<(f64, f64)> {
    if x == 0.0 || x * radius >= TAIL_THRESHOLD {
        return Ok(cosine_tail(x, radius));
    }
    let extended = TAIL_THRESHOLD / x;
    let numeric = quad::adaptive(
        |w| (x * w).cos() / (w * w),
        radius,
        extended,
        1e-13,
        1e-12,
        50_000,
    )?;
    let (asym, asym_err) = cosine_tail(x, extended);
    Ok((numeric.value + asym, numeric.abs_error + asym_err))
}

/// Symmetric-limit quadrature of PV int (e^{i w a} - e^{i w b}) / w^2 dw.
///
/// The imaginary part is odd and cancels under symmetric truncation; the
/// even real part is integrated adaptively on (0, radius] with the removable
/// singularity at the origin evaluated through the regularized kernel, plus
/// integration-by-parts tail corrections beyond the radius.
pub fn pv_quadrature(a: f64, b: f64, radius: f64, tol: f64) -> Result<PvResult> {
    if radius <= 0.0 {
        return Err(Error::Model(format!("radius must be positive, got {radius}")));
    }
    let (aa, ab) = (a.abs(), b.abs());
    let integrand = |w: f64| {
        quad::one_minus_cos_over_w2(w, ab) - quad::one_minus_cos_over_w2(w, aa)
    };
    let body = quad::adaptive(integrand, 0.0, radius, tol * 0.05, 1e-12, 200_000)?;
    let (tail_a, err_a) = component_tail(aa, radius)?;
    let (tail_b, err_b) = component_tail(ab, radius)?;
    let value = 2.0 * (body.value + tail_a - tail_b);
    let estimated_error = 2.0 * (body.abs_error + err_a + err_b);
    if estimated_error > tol {
        return Err(Error::Accuracy { achieved: estimated_error, requested: tol });
    }
    Ok(PvResult { value, method: PvMethod::Quadrature, estimated_error })
}
