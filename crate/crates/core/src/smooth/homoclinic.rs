use super::{Flow, SmoothFlow};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeOptions};
use crate::roots;

/// Separatrix split of the saddle at the origin.
///
/// The right unstable separatrix starts at `eps * v_u`. Its distance from the
/// plane spanned by the stable eigenvectors is measured by `g = w . (x, y)`,
/// with `w` the left unstable eigenvector of the `(x, y)` block of the
/// Jacobian (the `z` direction is stable and decoupled at the origin). The
/// value returned is `g` at the first local minimum after departure:
/// positive while the separatrix returns on its own side, negative once it
/// overshoots to the other side.
pub fn separatrix_split<F: SmoothFlow + ?Sized>(
    flow: &F,
    eps: f64,
    t_max: f64,
    tol: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1e-4) {
        return Err(Error::domain("eps", eps, "0 < eps <= 1e-4"));
    }
    let j = flow.jacobian(&[0.0; 3]);
    let (a11, a12, a21, a22) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    if j[0][2] != 0.0 || j[1][2] != 0.0 || j[2][0] != 0.0 || j[2][1] != 0.0 {
        return Err(Error::Degenerate {
            context: "z is not decoupled at the origin".into(),
        });
    }
    let tr = a11 + a22;
    let det = a11 * a22 - a12 * a21;
    let disc = tr * tr - 4.0 * det;
    if disc <= 0.0 || det >= 0.0 {
        return Err(Error::Degenerate {
            context: "origin is not a saddle in the (x, y) plane".into(),
        });
    }
    let s1 = 0.5 * (tr + disc.sqrt());
    let mut v = [a12, s1 - a11];
    let nv = v[0].hypot(v[1]);
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v = [sign * v[0] / nv, sign * v[1] / nv];
    let mut w = [s1 - a22, a12];
    if w[0] * v[0] + w[1] * v[1] < 0.0 {
        w = [-w[0], -w[1]];
    }
    let nw = w[0].hypot(w[1]);
    w = [w[0] / nw, w[1] / nw];

    let gdot = |s: &[f64; 3]| {
        let f = flow.field(s);
        w[0] * f[0] + w[1] * f[1]
    };
    let sys = Flow(flow);
    let mut ig = Dopri5::new(
        &sys,
        0.0,
        [eps * v[0], eps * v[1], 0.0],
        OdeOptions::with_tol(tol),
    )?;
    let mut prev = gdot(&ig.y());
    let mut left_start = false;
    while ig.t() < t_max {
        let st = ig.step(t_max)?;
        let cur = gdot(&st.y1);
        let g1 = w[0] * st.y1[0] + w[1] * st.y1[1];
        if !left_start && g1 > 1e3 * eps {
            left_start = true;
        }
        if left_start && prev < 0.0 && cur >= 0.0 {
            let tm = roots::bisect(|t| gdot(&st.eval(t)), st.t0, st.t1(), 0.0)?;
            let s = st.eval(tm);
            return Ok(w[0] * s[0] + w[1] * s[1]);
        }
        prev = cur;
    }
    Err(Error::no_root(format!(
        "separatrix made no return before t = {t_max}"
    )))
}

/// Bisects the separatrix split over a parameter interval. `make` builds the
/// flow for a parameter value.
pub fn locate_homoclinic<F, M>(make: M, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: SmoothFlow,
    M: Fn(f64) -> Result<F>,
{
    let split = |x: f64| -> f64 {
        make(x)
            .and_then(|f| separatrix_split(&f, 1e-8, 200.0, 1e-11))
            .unwrap_or(f64::NAN)
    };
    let (a, b) = (split(lo), split(hi));
    if !(a.is_finite() && b.is_finite()) || a * b > 0.0 {
        return Err(Error::no_root(format!(
            "split does not change sign on [{lo}, {hi}] ({a}, {b})"
        )));
    }
    roots::bisect(split, lo, hi, xtol)
}
