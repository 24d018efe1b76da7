//! Closed-form bifurcation curves of the LLZ system in the `(D, r)` plane.

use crate::error::{Error, Result};

fn check_d(d: f64) -> Result<f64> {
    if !(0.0..=0.25).contains(&d) {
        return Err(Error::domain("D", d, "0 <= D <= 0.25"));
    }
    Ok((1.0 - 4.0 * d).sqrt())
}

/// Pitchfork residual `D r^2 - r + 1`.
pub fn l_pf(d: f64, r: f64) -> f64 {
    d * r * r - r + 1.0
}

/// Residual of the unit-saddle-index curve:
/// `beta^2 + (1 + sigma) beta + sigma (D r^2 - r + 1)`.
pub fn l_nu1(d: f64, r: f64, sigma: f64, beta: f64) -> f64 {
    beta * beta + (1.0 + sigma) * beta + sigma * l_pf(d, r)
}

/// Lower (`r < 2`) branch of the pitchfork curve, `r = 2 / (1 + sqrt(1 - 4D))`.
pub fn curve_pf(d: f64) -> Result<f64> {
    let s = check_d(d)?;
    Ok(2.0 / (1.0 + s))
}

/// Both branches of the unit-saddle-index curve, ascending. At `D = 0` the
/// single Lorenz value `1 + beta (beta + 1 + sigma) / sigma` is returned.
pub fn curve_nu1(d: f64, sigma: f64, beta: f64) -> Result<Vec<f64>> {
    check_d(d)?;
    let c = 1.0 + beta * (beta + 1.0 + sigma) / sigma;
    if d == 0.0 {
        return Ok(vec![c]);
    }
    let disc = 1.0 - 4.0 * d * c;
    if disc < 0.0 {
        return Err(Error::no_root(format!("no unit saddle index at D = {d}")));
    }
    let s = disc.sqrt();
    // Stable pair: small root via the product of roots.
    let big = (1.0 + s) / (2.0 * d);
    Ok(vec![c / (d * big), big])
}

/// Andronov-Hopf curve of the foci:
///
/// ```text
/// r = sigma [sigma + beta + 3 + (sigma + beta - 1) R^2 D]
///     / (sigma - beta - 1 - [(sigma - 1)^2 + beta (sigma + 1)] R D)
/// ```
pub fn curve_ah(d: f64, sigma: f64, beta: f64) -> Result<f64> {
    let s = check_d(d)?;
    let big_r = -2.0 / (1.0 + s);
    let num = sigma * (sigma + beta + 3.0 + (sigma + beta - 1.0) * big_r * big_r * d);
    let den = sigma - beta - 1.0 - ((sigma - 1.0).powi(2) + beta * (sigma + 1.0)) * big_r * d;
    if den.abs() <= 1e-12 * (sigma + beta + 1.0) {
        return Err(Error::Pole {
            context: format!("Andronov-Hopf denominator vanishes at D = {d}"),
        });
    }
    Ok(num / den)
}
