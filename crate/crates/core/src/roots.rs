//! Bracketed scalar root finding shared by the solvers.

use crate::error::{Error, Result};

/// Default iteration cap for bisection; enough to exhaust the f64 mantissa
/// on any finite bracket.
pub const MAX_BISECT: usize = 2200;

/// Bisects `f` on `[lo, hi]` until the bracket is at most `xtol` wide or
/// cannot be split further. Returns the endpoint with the smaller `|f|`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::no_root(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    for _ in 0..MAX_BISECT {
        let m = a + 0.5 * (b - a);
        if b - a <= xtol || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if !fm.is_finite() {
            return Err(Error::no_root(format!("non-finite value at {m}")));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

/// Consecutive grid intervals on which `f` changes sign, plus exact zeros.
/// Non-finite samples break the chain.
pub fn sign_changes<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let v = f(x);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if let Some((xp, vp)) = prev {
            if v == 0.0 {
                out.push((x, x));
            } else if vp != 0.0 && vp.signum() != v.signum() {
                out.push((xp, x));
            }
        } else if v == 0.0 {
            out.push((x, x));
        }
        prev = Some((x, v));
    }
    out
}

/// Uniform grid with `n + 1` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| {
            if k == n {
                hi
            } else {
                lo + (hi - lo) * (k as f64) / (n as f64)
            }
        })
        .collect()
}

/// Newton iteration safeguarded to stay inside `[lo, hi]`; falls back to
/// the current iterate when a step would leave the bracket.
pub fn newton_polish<F, D>(f: F, df: D, x0: f64, lo: f64, hi: f64, max_iter: usize) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = x0;
    let mut fx = f(x);
    for _ in 0..max_iter {
        let d = df(x);
        if !(d.is_finite() && d != 0.0 && fx.is_finite()) {
            break;
        }
        let xn = x - fx / d;
        if !(xn >= lo && xn <= hi) {
            break;
        }
        let fxn = f(xn);
        if !(fxn.abs() < fx.abs()) {
            break;
        }
        x = xn;
        fx = fxn;
        if fx == 0.0 {
            break;
        }
    }
    x
}
