//! Closed-form per-pair predictions of each ensemble.

use super::polylog::shifted_moment_unchecked;
use super::{MacroParams, PairPrediction};
use crate::error::{Error, Result};

fn check_nonneg(name: &str, values: &[f64]) -> Result<()> {
    for &v in values {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} = {v} must be finite and >= 0")));
        }
    }
    Ok(())
}

fn check_ratio(y_i: f64, y_j: f64) -> Result<f64> {
    for y in [y_i, y_j] {
        if !(y.is_finite() && y >= 0.0) {
            return Err(Error::Domain(format!("y = {y} must be finite and >= 0")));
        }
    }
    let ratio = y_i * y_j;
    if ratio >= 1.0 {
        return Err(Error::Domain(format!("y_i y_j = {ratio} must be below 1")));
    }
    Ok(ratio)
}

/// Binary configuration model: `z_i z_j / (1 + z_i z_j)`.
pub fn bcm_link_prob(z_i: f64, z_j: f64) -> Result<f64> {
    check_nonneg("z", &[z_i, z_j])?;
    Ok(fermi(z_i * z_j))
}

/// `t / (1 + t)`, evaluated without overflow for large `t`.
#[inline]
pub(crate) fn fermi(t: f64) -> f64 {
    if t > 1.0 {
        1.0 / (1.0 + 1.0 / t)
    } else {
        t / (1.0 + t)
    }
}

/// Enhanced configuration model pair in the `(x, y)` parametrization.
pub fn ecm_pair(x_i: f64, x_j: f64, y_i: f64, y_j: f64) -> Result<PairPrediction> {
    check_nonneg("x", &[x_i, x_j])?;
    let ratio = check_ratio(y_i, y_j)?;
    let num = x_i * x_j * ratio;
    let p = num / (1.0 - ratio + num);
    Ok(PairPrediction {
        p,
        expected_w: p / (1.0 - ratio),
    })
}

/// ECM link probability from the link propensities `u_i = x_i y_i`:
/// `u_i u_j / (1 - y_i y_j + u_i u_j)`, identical to the BCM form at
/// `y_i y_j = 0`.
#[inline]
pub(crate) fn ecm_link_prob_from_propensity(u_i: f64, u_j: f64, ratio: f64) -> f64 {
    fermi(u_i * u_j / (1.0 - ratio))
}

/// Two-step model pair: BCM link probability with geometric weights.
pub fn ts_pair(z_i: f64, z_j: f64, y_i: f64, y_j: f64) -> Result<PairPrediction> {
    check_nonneg("z", &[z_i, z_j])?;
    let ratio = check_ratio(y_i, y_j)?;
    let p = fermi(z_i * z_j);
    Ok(PairPrediction {
        p,
        expected_w: p / (1.0 - ratio),
    })
}

/// GDP-driven two-step pair from rescaled GDPs and `(a, b, c)`.
pub fn gdp_ts_pair(g_i: f64, g_j: f64, params: &MacroParams) -> PairPrediction {
    let p = fermi(params.a * g_i * g_j);
    let (bi, bj) = (params.b * g_i.powf(params.c), params.b * g_j.powf(params.c));
    PairPrediction {
        p,
        expected_w: p * (1.0 + bi) * (1.0 + bj) / (1.0 + bi + bj),
    }
}

/// `y = b g^c / (1 + b g^c)` and the pair ratio `y_i y_j`, kept in the form
/// that stays accurate when `b g^c` is large.
pub(crate) fn gdp_ratio(g_i: f64, g_j: f64, params: &MacroParams) -> f64 {
    gdp_y(g_i, params) * gdp_y(g_j, params)
}

#[inline]
pub(crate) fn gdp_y(g: f64, params: &MacroParams) -> f64 {
    fermi(params.b * g.powf(params.c))
}

/// Continuous weighted configuration model (gravity baseline): `T g_i g_j`.
/// Its link probability is identically one.
pub fn wcm_gravity_weight(g_i: f64, g_j: f64, total_strength: f64) -> f64 {
    total_strength * g_i * g_j
}

/// `<w^gamma>` under the ECM.
pub fn ecm_weight_moment(x_i: f64, x_j: f64, y_i: f64, y_j: f64, gamma: f64) -> Result<f64> {
    let pair = ecm_pair(x_i, x_j, y_i, y_j)?;
    geometric_moment(pair.p, y_i * y_j, gamma)
}

/// `<w^gamma>` under the two-step model.
pub fn ts_weight_moment(z_i: f64, z_j: f64, y_i: f64, y_j: f64, gamma: f64) -> Result<f64> {
    let pair = ts_pair(z_i, z_j, y_i, y_j)?;
    geometric_moment(pair.p, y_i * y_j, gamma)
}

/// `<w^gamma> = p (1 - R) S(gamma, R) / R` for `q(w) = p R^{w-1} (1 - R)`.
pub(crate) fn geometric_moment(p: f64, ratio: f64, gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!("moment order {gamma} must be >= 0")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(p * (1.0 - ratio) * shifted_moment_unchecked(gamma, ratio)?)
}
