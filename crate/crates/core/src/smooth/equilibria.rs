use num_complex::Complex64;
use serde::Serialize;

use super::{LlzParams, LorenzParams};
use crate::error::{Error, Result};
use crate::roots;
use crate::state::State3;

/// Linear type of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumClass {
    /// One positive real eigenvalue, two stable real eigenvalues.
    Saddle,
    StableNode,
    StableFocus,
    /// A complex pair with positive real part and a stable real eigenvalue.
    SaddleFocus,
    /// Anything else (e.g. two unstable directions).
    Other,
}

/// An equilibrium with its spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumInfo {
    /// `"O_s"`, `"e_l"` or `"e_r"`.
    pub name: &'static str,
    pub location: State3,
    pub eigenvalues: [Complex64; 3],
    /// Sum of the real parts of the two eigenvalues nearest the imaginary axis.
    pub saddle_value: f64,
    pub classification: EquilibriumClass,
    /// Largest `|p(s_i)|` over the characteristic polynomial `p`.
    pub residual: f64,
}

/// Roots of the monic cubic `s^3 + c2 s^2 + c1 s + c0`.
///
/// The real root is bracketed by the Cauchy bound and bisected, the quadratic
/// cofactor is solved in complex arithmetic, and every root gets a few Newton
/// steps on the original cubic. Conjugate pairs are returned exactly
/// conjugate.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> Result<[Complex64; 3]> {
    if !(c2.is_finite() && c1.is_finite() && c0.is_finite()) {
        return Err(Error::invalid("non-finite cubic coefficient"));
    }
    let p = |s: f64| ((s + c2) * s + c1) * s + c0;
    let bound = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());
    let mut r = roots::bisect(p, -bound, bound, 0.0)?;
    let dp = |s: f64| (3.0 * s + 2.0 * c2) * s + c1;
    for _ in 0..3 {
        let d = dp(r);
        if d == 0.0 {
            break;
        }
        let nr = r - p(r) / d;
        if p(nr).abs() < p(r).abs() {
            r = nr;
        } else {
            break;
        }
    }
    // s^2 + b s + c = cubic / (s - r)
    let b = c2 + r;
    let c = c1 + r * b;
    let disc = b * b - 4.0 * c;
    let (z1, z2) = if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (a1, a2) = if q != 0.0 { (q, c / q) } else { (0.0, 0.0) };
        (
            Complex64::new(polish_real(a1, c2, c1, c0), 0.0),
            Complex64::new(polish_real(a2, c2, c1, c0), 0.0),
        )
    } else {
        let z = polish_complex(Complex64::new(-0.5 * b, 0.5 * (-disc).sqrt()), c2, c1, c0);
        let z = if z.im < 0.0 { z.conj() } else { z };
        (z, z.conj())
    };
    Ok([Complex64::new(r, 0.0), z1, z2])
}

fn cubic_at(s: Complex64, c2: f64, c1: f64, c0: f64) -> Complex64 {
    ((s + c2) * s + c1) * s + c0
}

fn polish_real(mut s: f64, c2: f64, c1: f64, c0: f64) -> f64 {
    for _ in 0..4 {
        let v = ((s + c2) * s + c1) * s + c0;
        let d = (3.0 * s + 2.0 * c2) * s + c1;
        if d == 0.0 {
            break;
        }
        let ns = s - v / d;
        if (((ns + c2) * ns + c1) * ns + c0).abs() < v.abs() {
            s = ns;
        } else {
            break;
        }
    }
    s
}

fn polish_complex(mut s: Complex64, c2: f64, c1: f64, c0: f64) -> Complex64 {
    for _ in 0..4 {
        let v = cubic_at(s, c2, c1, c0);
        let d = (3.0 * s + 2.0 * c2) * s + c1;
        if d.norm() == 0.0 {
            break;
        }
        let ns = s - v / d;
        if cubic_at(ns, c2, c1, c0).norm() < v.norm() {
            s = ns;
        } else {
            break;
        }
    }
    s
}

fn classify(ev: &[Complex64; 3]) -> EquilibriumClass {
    let unstable = ev.iter().filter(|z| z.re > 0.0).count();
    let complex = ev.iter().any(|z| z.im != 0.0);
    match (unstable, complex) {
        (0, false) => EquilibriumClass::StableNode,
        (0, true) => EquilibriumClass::StableFocus,
        (1, false) => EquilibriumClass::Saddle,
        (2, true) => EquilibriumClass::SaddleFocus,
        _ => EquilibriumClass::Other,
    }
}

fn saddle_value(ev: &[Complex64; 3]) -> f64 {
    let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    re[0] + re[1]
}

fn info(name: &'static str, location: State3, ev: [Complex64; 3], c: [f64; 3]) -> EquilibriumInfo {
    let residual = ev
        .iter()
        .map(|&s| cubic_at(s, c[0], c[1], c[2]).norm())
        .fold(0.0, f64::max);
    EquilibriumInfo {
        name,
        location,
        saddle_value: saddle_value(&ev),
        classification: classify(&ev),
        eigenvalues: ev,
        residual,
    }
}

/// Equilibria of the LLZ system: `O_s` always, then `e_l`, `e_r` when they
/// exist (above the pitchfork curve).
pub fn equilibria_llz(p: &LlzParams) -> Result<Vec<EquilibriumInfo>> {
    let (sg, bt, r, d) = (p.sigma, p.beta, p.r, p.d);
    let big_r = p.big_r()?;

    // O_s: (s + beta)(s^2 + (1 + sigma) s + sigma (D r^2 - r + 1)).
    let det = sg * (d * r * r - r + 1.0);
    let tr = 1.0 + sg;
    let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
    let s1 = 0.5 * (-tr + disc);
    let s2 = 0.5 * (-tr - disc);
    let s3 = Complex64::new(-bt, 0.0);
    let c_o = [tr + bt, det + bt * tr, bt * det];
    let mut out = vec![info("O_s", State3::default(), [s1, s2, s3], c_o)];

    let q = match p.big_q() {
        Ok(q) => q,
        Err(_) => return Ok(out),
    };
    let a1 = (r + sg * big_r + sg * r) * big_r * d;
    let a2 = (big_r + 2.0 * r) * big_r * d;
    let c_e = [
        sg + bt + 1.0,
        bt * (sg + r + a1),
        2.0 * sg * bt * (r - 1.0 + a2),
    ];
    let ev = cubic_roots(c_e[0], c_e[1], c_e[2])?;
    let z = r + big_r;
    out.push(info("e_l", State3::new(-q, q * big_r, z), ev, c_e));
    out.push(info("e_r", State3::new(q, -q * big_r, z), ev, c_e));
    Ok(out)
}

/// Equilibria of the Lorenz system (the `D = 0` case).
pub fn lorenz_equilibria(p: &LorenzParams) -> Result<Vec<EquilibriumInfo>> {
    equilibria_llz(&p.to_llz())
}
