//! The weight-moment series `S(gamma, R) = sum_{w>=1} w^gamma R^w`.
//!
//! This is the polylogarithm of order `-gamma`. For the geometric weight law
//! `q(w) = p R^{w-1} (1 - R)` it gives `<w^gamma> = p (1 - R) S(gamma, R) / R`.
//! The shifted form `S / R` is what the moment formulas actually need, and it
//! stays finite (equal to 1) at `R = 0`.

use crate::error::{Error, Result};

/// Truncation threshold on the bounded tail relative to the partial sum.
const RELATIVE_TAIL: f64 = 1e-15;
/// Hard cap on the number of summed terms.
pub const MAX_TERMS: usize = 1_000_000;
/// How often the running power `R^(w-1)` is recomputed from scratch.
const RESYNC_EVERY: usize = 1024;

fn check_domain(gamma: f64, ratio: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!("moment order {gamma} must be >= 0")));
    }
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::Domain(format!(
            "series ratio {ratio} must lie in [0, 1)"
        )));
    }
    Ok(())
}

/// `S(gamma, R) = sum_{w>=1} w^gamma R^w` for `0 <= R < 1`, `gamma >= 0`.
pub fn poly_moment(gamma: f64, ratio: f64) -> Result<f64> {
    check_domain(gamma, ratio)?;
    if ratio == 0.0 {
        return Ok(0.0);
    }
    Ok(ratio * shifted_moment_unchecked(gamma, ratio)?)
}

/// `S(gamma, R) / R = sum_{w>=1} w^gamma R^(w-1)`, equal to 1 at `R = 0`.
pub fn shifted_moment(gamma: f64, ratio: f64) -> Result<f64> {
    check_domain(gamma, ratio)?;
    shifted_moment_unchecked(gamma, ratio)
}

pub(crate) fn shifted_moment_unchecked(gamma: f64, ratio: f64) -> Result<f64> {
    if ratio == 0.0 {
        return Ok(1.0);
    }
    if gamma == 0.0 {
        return Ok(1.0 / (1.0 - ratio));
    }
    if gamma == 1.0 {
        let q = 1.0 - ratio;
        return Ok(1.0 / (q * q));
    }

    // Term ratios ((w+1)/w)^gamma R decrease in w, so once they drop below 1
    // the tail after term w is bounded by t_{w+1} / (1 - rho_{w+1}).
    let mut sum = 0.0;
    let mut power = 1.0; // R^(w-1)
    for w in 1..=MAX_TERMS {
        if w % RESYNC_EVERY == 0 {
            power = ratio.powi((w - 1) as i32);
        }
        let wf = w as f64;
        sum += wf.powf(gamma) * power;
        power *= ratio;

        let next = (wf + 1.0).powf(gamma) * power;
        let rho = ((wf + 2.0) / (wf + 1.0)).powf(gamma) * ratio;
        if rho < 1.0 && next / (1.0 - rho) <= RELATIVE_TAIL * sum {
            return Ok(sum + next);
        }
    }
    Err(Error::SeriesDivergence {
        gamma,
        ratio,
        terms: MAX_TERMS,
    })
}
