//! Closed-form and semi-analytic reference values on circles and round spheres.
//!
//! All values use `c_s = 1`. Every closed form has a quadrature twin that
//! integrates the one-dimensional reduction after subtracting the power-law
//! singularity at the origin, so the two can be compared.

use alloc::string::String;
use alloc::format;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::math;
use core::f64::consts::{FRAC_PI_2, PI};

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleQuantity {
    CircleFmc,
    SphereFmc,
    TangentRadiusCircle,
    ScalingExponent,
    CircleTangentPoint,
}

impl OracleQuantity {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "circle_fmc" => OracleQuantity::CircleFmc,
            "sphere_fmc" => OracleQuantity::SphereFmc,
            "tangent_radius_circle" => OracleQuantity::TangentRadiusCircle,
            "scaling_exponent" => OracleQuantity::ScalingExponent,
            "circle_tangent_point" => OracleQuantity::CircleTangentPoint,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleInputs {
    #[serde(rename = "R")]
    pub r: f64,
    pub s: f64,
    pub d: f64,
    pub p: f64,
    pub q: f64,
}

impl Default for OracleInputs {
    fn default() -> Self {
        OracleInputs {
            r: 1.0,
            s: 0.5,
            d: 2.0,
            p: 4.0,
            q: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub quantity: OracleQuantity,
    pub inputs: OracleInputs,
    pub value: f64,
    pub method: String,
    pub error_estimate: f64,
}

fn check(r: f64, s: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("s must lie in (0, 1), got {s}")));
    }
    Ok(())
}

/// `int_0^{pi/2} f(u) du` for `f(u) ~ u^e` near zero (`e > -1`), by
/// integrating `f(u) - u^e` numerically and `u^e` exactly.
fn subtracted_integral<F: Fn(f64) -> f64>(f: F, e: f64) -> (f64, f64) {
    let (v, err) = math::integrate(
        |u| if u == 0.0 { 0.0 } else { f(u) - math::powf(u, e) },
        0.0,
        FRAC_PI_2,
        QUAD_TOL,
    );
    (v + math::powf(FRAC_PI_2, e + 1.0) / (e + 1.0), err)
}

/// `H_s` on a circle of radius `r`: `-2^-s r^-s sqrt(pi) G((1-s)/2) / G(1-s/2)`.
pub fn circle_fmc(r: f64, s: f64) -> Result<f64> {
    check(r, s)?;
    Ok(-math::powf(2.0, -s)
        * math::powf(r, -s)
        * math::sqrt(PI)
        * math::gamma(0.5 * (1.0 - s))
        / math::gamma(1.0 - 0.5 * s))
}

/// Quadrature of `-2^(-1-s) r^-s int_0^{2pi} sin^-s(t/2) dt`.
pub fn circle_fmc_quadrature(r: f64, s: f64) -> Result<(f64, f64)> {
    check(r, s)?;
    // int_0^{2pi} sin^-s(t/2) dt = 4 int_0^{pi/2} sin^-s(u) du
    let (i, e) = subtracted_integral(|u| math::powf(math::sin(u), -s), -s);
    let k = -math::powf(2.0, 1.0 - s) * math::powf(r, -s);
    Ok((k * i, math::abs(k) * e))
}

/// `H_s` on a round 2-sphere of radius `r`: `-2^(1-s) pi r^-s / (1-s)`.
pub fn sphere_fmc(r: f64, s: f64) -> Result<f64> {
    check(r, s)?;
    Ok(-math::powf(2.0, 1.0 - s) * PI * math::powf(r, -s) / (1.0 - s))
}

/// Quadrature of `-2^-s pi r^-s int_0^pi sin^-s(t/2) cos(t/2) dt`.
pub fn sphere_fmc_quadrature(r: f64, s: f64) -> Result<(f64, f64)> {
    check(r, s)?;
    let (i, e) = subtracted_integral(|u| math::powf(math::sin(u), -s) * math::cos(u), -s);
    let k = -math::powf(2.0, 1.0 - s) * PI * math::powf(r, -s);
    Ok((k * i, math::abs(k) * e))
}

/// Radius of the tangent sphere through two points of a circle: `2r`.
pub fn tangent_radius_circle(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    Ok(2.0 * r)
}

/// Energies scale as `lambda^(d - s p)` under dilation.
pub fn expected_scaling_exponent(d: f64, s: f64, p: f64) -> f64 {
    d - s * p
}

fn tangent_point_prefactor(r: f64, p: f64, q: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    if !(p > 0.0 && q > p) {
        return Err(invalid("tangent-point oracle needs q > p > 0"));
    }
    let e = 3.0 * p - q;
    if !(e > -1.0) {
        return Err(invalid(format!("tangent-point energy diverges on a circle for 3p - q = {e}")));
    }
    // |x-y| = 2r sin(t/2), |<x-y, n>| = 2r sin^2(t/2), outer length 2 pi r,
    // inner measure r dt, and int_0^{2pi} sin^e(t/2) dt = 4 int_0^{pi/2} sin^e.
    Ok((2.0 * PI * r * r * math::powf(2.0 * r, 2.0 * p - q) * 4.0, e))
}

/// Tangent-point energy (`c_s = 1`) of a circle, by 1-D adaptive quadrature.
pub fn circle_tangent_point_energy(r: f64, p: f64, q: f64) -> Result<(f64, f64)> {
    let (k, e) = tangent_point_prefactor(r, p, q)?;
    let (i, err) = subtracted_integral(|u| math::powf(math::sin(u), e), e);
    Ok((k * i, k * err))
}

/// Same quantity through the Beta-function closed form.
pub fn circle_tangent_point_energy_closed(r: f64, p: f64, q: f64) -> Result<f64> {
    let (k, e) = tangent_point_prefactor(r, p, q)?;
    let i = 0.5 * math::sqrt(PI) * math::gamma(0.5 * (e + 1.0)) / math::gamma(0.5 * e + 1.0);
    Ok(k * i)
}

/// Evaluate one quantity with its cross-check; the error estimate is the
/// larger of the quadrature estimate and the closed-form disagreement.
pub fn evaluate(quantity: OracleQuantity, inputs: OracleInputs) -> Result<OracleValue> {
    let OracleInputs { r, s, d, p, q } = inputs;
    let (value, method, error_estimate) = match quantity {
        OracleQuantity::CircleFmc => {
            let v = circle_fmc(r, s)?;
            let (qv, qe) = circle_fmc_quadrature(r, s)?;
            (v, "closed form, checked by adaptive 1-D quadrature", qe.max(math::abs(v - qv)))
        }
        OracleQuantity::SphereFmc => {
            let v = sphere_fmc(r, s)?;
            let (qv, qe) = sphere_fmc_quadrature(r, s)?;
            (v, "closed form, checked by adaptive 1-D quadrature", qe.max(math::abs(v - qv)))
        }
        OracleQuantity::TangentRadiusCircle => (tangent_radius_circle(r)?, "closed form", 0.0),
        OracleQuantity::ScalingExponent => {
            (expected_scaling_exponent(d, s, p), "closed form", 0.0)
        }
        OracleQuantity::CircleTangentPoint => {
            let (v, e) = circle_tangent_point_energy(r, p, q)?;
            let c = circle_tangent_point_energy_closed(r, p, q)?;
            (v, "adaptive 1-D quadrature, checked by closed form", e.max(math::abs(v - c)))
        }
    };
    Ok(OracleValue {
        quantity,
        inputs,
        value,
        method: method.into(),
        error_estimate,
    })
}
