use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::region::{region_of, Boundary, Equilibrium, Region};
use super::{PwlParams, RotationOrientation};
use crate::error::{Error, Result};
use crate::roots;
use crate::state::State3;

/// Spirals with radius below this are treated as captured by the focus.
pub(crate) const TRAP_RADIUS: f64 = 1e-13;
/// Candidate events closer than this to the segment start are ignored.
const T_EPS: f64 = 1e-12;
/// Normal displacement used to probe the region after an event.
const NUDGE: f64 = 1e-9;

/// Focus frame of a spiral region: centre `(cx, cy, b)` and rotation sense
/// (`+1` counterclockwise in `(x - cx, z - b)`).
#[derive(Debug, Clone, Copy)]
struct Frame {
    cx: f64,
    cy: f64,
    rot: f64,
}

fn frame(region: Region, orientation: RotationOrientation) -> Frame {
    match region {
        Region::R => Frame {
            cx: 1.0,
            cy: 1.0,
            rot: match orientation {
                RotationOrientation::FigureConsistent => 1.0,
                RotationOrientation::AsPrinted => -1.0,
            },
        },
        Region::L => Frame {
            cx: -1.0,
            cy: -1.0,
            rot: -1.0,
        },
        Region::S => unreachable!("the saddle region has no focus frame"),
    }
}

/// Right-hand side of the linear subsystem of `region` at `s`.
pub fn vector_field(s: &State3, region: Region, p: &PwlParams) -> State3 {
    match region {
        Region::S => State3::new(s.x, -p.alpha * s.y, -p.nu * s.z),
        _ => {
            let f = frame(region, p.orientation);
            let (u, v) = (s.x - f.cx, s.z - p.b);
            State3::new(
                -p.lambda * u - f.rot * p.omega * v,
                -p.delta * (s.y - f.cy),
                f.rot * p.omega * u - p.lambda * v,
            )
        }
    }
}

/// Closed-form flow of the linear subsystem of `region` for time `t`.
pub fn exact_flow(s0: &State3, region: Region, t: f64, p: &PwlParams) -> State3 {
    match region {
        Region::S => State3::new(
            s0.x * t.exp(),
            s0.y * (-p.alpha * t).exp(),
            s0.z * (-p.nu * t).exp(),
        ),
        _ => {
            let f = frame(region, p.orientation);
            let (u0, v0) = (s0.x - f.cx, s0.z - p.b);
            let decay = (-p.lambda * t).exp();
            let (sn, cs) = (f.rot * p.omega * t).sin_cos();
            State3::new(
                f.cx + decay * (u0 * cs - v0 * sn),
                f.cy + (s0.y - f.cy) * (-p.delta * t).exp(),
                p.b + decay * (u0 * sn + v0 * cs),
            )
        }
    }
}

/// First boundary event of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// Time from the segment start.
    pub t: f64,
    pub boundary: Boundary,
    /// State on the boundary (the crossed coordinate is set exactly).
    pub state: State3,
    /// Region entered.
    pub next: Region,
}

/// Outcome of [`next_crossing`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Exit {
    Crossing(Crossing),
    /// No boundary is reached; the segment converges to an equilibrium.
    Converged {
        equilibrium: Equilibrium,
        /// Time after which the spiral radius is below the trap radius
        /// (infinite for the saddle's stable manifold).
        t_trap: f64,
    },
}

/// First boundary event of the segment starting at `s0` in `region`.
pub fn next_crossing(s0: &State3, region: Region, p: &PwlParams) -> Result<Exit> {
    next_crossing_refined(s0, region, p, 1)
}

/// [`next_crossing`] with each monotone bracket split into `subdivisions`
/// pieces before root finding.
pub fn next_crossing_refined(
    s0: &State3,
    region: Region,
    p: &PwlParams,
    subdivisions: usize,
) -> Result<Exit> {
    if !s0.is_finite() {
        return Err(Error::invalid("non-finite state"));
    }
    match region {
        Region::S => saddle_exit(s0, p),
        _ => spiral_exit(s0, region, p, subdivisions.max(1)),
    }
}

fn saddle_exit(s0: &State3, p: &PwlParams) -> Result<Exit> {
    let a = s0.x.abs();
    if a == 0.0 {
        return Ok(Exit::Converged {
            equilibrium: Equilibrium::Saddle,
            t_trap: f64::INFINITY,
        });
    }
    if a > 1.0 {
        return Err(Error::invalid(format!(
            "x = {} is outside the saddle region",
            s0.x
        )));
    }
    let sign = s0.x.signum();
    let state = State3::new(sign, s0.y * a.powf(p.alpha), s0.z * a.powf(p.nu));
    Ok(Exit::Crossing(Crossing {
        t: -a.ln(),
        boundary: if sign > 0.0 {
            Boundary::XPlusOne
        } else {
            Boundary::XMinusOne
        },
        state,
        next: if sign > 0.0 { Region::R } else { Region::L },
    }))
}

fn spiral_exit(s0: &State3, region: Region, p: &PwlParams, subdivisions: usize) -> Result<Exit> {
    let f = frame(region, p.orientation);
    let equilibrium = if region == Region::R {
        Equilibrium::FocusRight
    } else {
        Equilibrium::FocusLeft
    };
    let (u0, v0) = (s0.x - f.cx, s0.z - p.b);
    let rho0 = u0.hypot(v0);
    if rho0 < TRAP_RADIUS {
        return Ok(Exit::Converged {
            equilibrium,
            t_trap: 0.0,
        });
    }
    let t_trap = (rho0 / TRAP_RADIUS).ln() / p.lambda;
    let horizon = t_trap.min(4.0 * std::f64::consts::PI / p.omega);
    let th0 = v0.atan2(u0);
    let w = f.rot * p.omega;
    let x_boundary = |x: f64| {
        if x > 0.0 {
            Boundary::XPlusOne
        } else {
            Boundary::XMinusOne
        }
    };

    // Quarter-turn times: phase = theta0 + w t crosses a multiple of pi/2.
    let mut quarters: Vec<(f64, i64)> = Vec::new();
    let q0 = th0 / FRAC_PI_2;
    let mut k = if f.rot > 0.0 {
        q0.floor() as i64 + 1
    } else {
        q0.ceil() as i64 - 1
    };
    loop {
        let t = (k as f64 * FRAC_PI_2 - th0) / w;
        if t > horizon {
            break;
        }
        quarters.push((t, k));
        k += f.rot as i64;
    }

    let mut cands: Vec<(f64, Boundary)> = Vec::new();
    for &(t, k) in &quarters {
        if k.rem_euclid(2) == 0 {
            cands.push((t, Boundary::ZEqualsB));
        } else {
            cands.push((t, x_boundary(f.cx)));
        }
    }

    // Far plane x = -cx, i.e. u = -2 cx, on pieces where u is monotone.
    let u_far = -2.0 * f.cx;
    let u_at = |t: f64| {
        let st = exact_flow(s0, region, t, p);
        st.x - f.cx - u_far
    };
    let mut knots: Vec<f64> = vec![0.0];
    knots.extend(quarters.iter().map(|q| q.0).filter(|&t| t > 0.0));
    knots.push(horizon);
    // Critical times of u: tan(phase) = -lambda / w.
    let phc = (-p.lambda / w).atan();
    let mut crit = Vec::new();
    for j in -8..=8 {
        let t = (phc + j as f64 * std::f64::consts::PI - th0) / w;
        if t > 0.0 && t < horizon {
            crit.push(t);
        }
    }
    knots.extend(crit);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    for wdw in knots.windows(2) {
        let (a, b) = (wdw[0], wdw[1]);
        let pieces: Vec<f64> = (0..=subdivisions)
            .map(|i| a + (b - a) * i as f64 / subdivisions as f64)
            .collect();
        for (lo, hi) in roots::sign_changes(u_at, &pieces) {
            let t = if lo == hi {
                lo
            } else {
                roots::bisect(u_at, lo, hi, 0.0)?
            };
            cands.push((t, x_boundary(-f.cx)));
        }
    }

    // y = 0 in finite time when y0 lies on the far side of cy.
    if s0.y * f.cy < 0.0 {
        let t = ((f.cy - s0.y) / f.cy).ln() / p.delta;
        if t <= horizon {
            cands.push((t, Boundary::YZero));
        }
    }

    cands.retain(|c| c.0 > T_EPS);
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (t, boundary) in cands {
        let mut st = exact_flow(s0, region, t, p);
        match boundary {
            Boundary::XPlusOne => st.x = 1.0,
            Boundary::XMinusOne => st.x = -1.0,
            Boundary::ZEqualsB => st.z = p.b,
            Boundary::YZero => st.y = 0.0,
        }
        let vel = vector_field(&st, region, p);
        let n = boundary.normal();
        let vn = vel.dot(n);
        if vn.abs() < 1e-14 {
            continue;
        }
        let probe = st + (NUDGE / vn.abs()) * vel;
        let next = region_of(&probe, p.b, Some(region)).region;
        if next != region {
            return Ok(Exit::Crossing(Crossing {
                t,
                boundary,
                state: st,
                next,
            }));
        }
    }
    if horizon < t_trap {
        return Err(Error::NonConvergence {
            iterations: 2,
            context: "spiral segment made two turns without leaving its region".into(),
        });
    }
    Ok(Exit::Converged {
        equilibrium,
        t_trap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(b: f64) -> PwlParams {
        PwlParams::reference(0.65, b).unwrap()
    }

    #[test]
    fn saddle_exit_time() {
        let p = params(2.0);
        let Exit::Crossing(c) = next_crossing(&State3::new(0.25, 0.3, 1.0), Region::S, &p).unwrap()
        else {
            panic!()
        };
        assert!((c.t - 4f64.ln()).abs() < 1e-15);
        assert_eq!(c.state.x, 1.0);
        assert_eq!(c.next, Region::R);
    }

    #[test]
    fn stable_manifold_converges() {
        let p = params(2.0);
        let e = next_crossing(&State3::new(0.0, 0.3, 1.0), Region::S, &p).unwrap();
        assert!(matches!(
            e,
            Exit::Converged {
                equilibrium: Equilibrium::Saddle,
                ..
            }
        ));
    }

    #[test]
    fn three_quarter_turn() {
        let p = params(3.0);
        let x0: f64 = 0.4;
        let entry = State3::new(1.0, 0.5, p.b() * x0.powf(p.nu()));
        let Exit::Crossing(c) = next_crossing(&entry, Region::R, &p).unwrap() else {
            panic!()
        };
        let t34 = 1.5 * std::f64::consts::PI / p.omega();
        assert!((c.t - t34).abs() < 1e-12);
        assert_eq!(c.boundary, Boundary::ZEqualsB);
        assert_eq!(c.next, Region::S);
        let xbar = 1.0 - p.gamma() * (1.0 - x0.powf(p.nu()));
        assert!((c.state.x - xbar).abs() < 1e-12);
    }

    #[test]
    fn focus_trap() {
        let p = params(3.0);
        let e = next_crossing(&State3::new(1.0, 0.2, p.b()), Region::R, &p).unwrap();
        assert!(matches!(
            e,
            Exit::Converged {
                equilibrium: Equilibrium::FocusRight,
                ..
            }
        ));
    }
}
