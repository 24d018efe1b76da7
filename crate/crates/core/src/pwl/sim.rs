use serde::Serialize;

use super::flow::{exact_flow, next_crossing, Exit};
use super::region::{region_of, Boundary, Equilibrium, Region};
use super::sliding::{sliding_check, SlidingReport};
use super::PwlParams;
use crate::error::{Error, Result};
use crate::section::SectionPoint;
use crate::state::State3;

/// One closed-form piece of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub region: Region,
    pub t_enter: f64,
    pub state_enter: State3,
    pub t_exit: f64,
    pub state_exit: State3,
    /// Boundary crossed at the end; `None` when the horizon or a trap ended it.
    pub boundary: Option<Boundary>,
}

/// A downward crossing of `z = b` into the saddle region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionHit {
    pub t: f64,
    pub state: State3,
    /// `|y| <= 1`, i.e. the hit lies on the cross-section `D`.
    pub inside_d: bool,
}

/// Why a simulation stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    ReturnLimit,
    Converged {
        equilibrium: Equilibrium,
    },
    Sliding {
        report: SlidingReport,
        state: State3,
    },
}

/// Noteworthy events along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum TrajectoryFlag {
    /// The initial state lay on a boundary with no region hint.
    AmbiguousStart,
    /// Direct transition between the two spiral regions.
    SpiralHandoff { t: f64 },
}

/// A trajectory as a chain of closed-form segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTrajectory {
    pub segments: Vec<Segment>,
    pub total_time: f64,
    pub termination: Termination,
    pub returns: Vec<SectionHit>,
    pub flags: Vec<TrajectoryFlag>,
}

impl EventTrajectory {
    /// Final state.
    pub fn end_state(&self) -> Option<State3> {
        self.segments.last().map(|s| s.state_exit)
    }

    /// Samples the trajectory at spacing `dt` plus every segment end point.
    pub fn sample(&self, dt: f64, p: &PwlParams) -> Vec<(f64, State3, Region)> {
        let mut out = Vec::new();
        for seg in &self.segments {
            let dur = seg.t_exit - seg.t_enter;
            let n = if dt > 0.0 {
                (dur / dt).floor() as usize
            } else {
                0
            };
            for i in 0..=n {
                let tau = (i as f64 * dt).min(dur);
                out.push((
                    seg.t_enter + tau,
                    exact_flow(&seg.state_enter, seg.region, tau, p),
                    seg.region,
                ));
            }
            if n as f64 * dt < dur {
                out.push((seg.t_exit, seg.state_exit, seg.region));
            }
        }
        out
    }
}

/// Stopping rules for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOptions {
    pub max_time: f64,
    /// Stop after this many returns to `z = b`.
    pub max_returns: Option<usize>,
    pub max_events: usize,
    /// Region used when the initial state lies on a boundary.
    pub start_region: Option<Region>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            max_time: 100.0,
            max_returns: None,
            max_events: 1_000_000,
            start_region: None,
        }
    }
}

/// Chains closed-form segments from `s0`.
pub fn simulate(s0: State3, p: &PwlParams, opts: &SimOptions) -> Result<EventTrajectory> {
    if !s0.is_finite() {
        return Err(Error::invalid("non-finite initial state"));
    }
    let mut flags = Vec::new();
    let start = region_of(&s0, p.b(), opts.start_region);
    if start.ambiguous {
        flags.push(TrajectoryFlag::AmbiguousStart);
    }
    let mut region = start.region;
    let mut state = s0;
    let mut t = 0.0;
    let mut segments = Vec::new();
    let mut returns = Vec::new();
    for _ in 0..opts.max_events {
        let exit = next_crossing(&state, region, p)?;
        let remaining = opts.max_time - t;
        let finish = |segments: &mut Vec<Segment>, dur: f64| {
            let end = exact_flow(&state, region, dur, p);
            segments.push(Segment {
                region,
                t_enter: t,
                state_enter: state,
                t_exit: t + dur,
                state_exit: end,
                boundary: None,
            });
            t + dur
        };
        match exit {
            Exit::Converged {
                equilibrium,
                t_trap,
            } => {
                let dur = t_trap.min(remaining);
                let total_time = finish(&mut segments, dur);
                let termination = if t_trap <= remaining {
                    Termination::Converged { equilibrium }
                } else {
                    Termination::Horizon
                };
                return Ok(EventTrajectory {
                    segments,
                    total_time,
                    termination,
                    returns,
                    flags,
                });
            }
            Exit::Crossing(c) => {
                if c.t > remaining {
                    let total_time = finish(&mut segments, remaining);
                    return Ok(EventTrajectory {
                        segments,
                        total_time,
                        termination: Termination::Horizon,
                        returns,
                        flags,
                    });
                }
                segments.push(Segment {
                    region,
                    t_enter: t,
                    state_enter: state,
                    t_exit: t + c.t,
                    state_exit: c.state,
                    boundary: Some(c.boundary),
                });
                t += c.t;
                let report = sliding_check(&c.state, p);
                if report.attracting {
                    return Ok(EventTrajectory {
                        segments,
                        total_time: t,
                        termination: Termination::Sliding {
                            report,
                            state: c.state,
                        },
                        returns,
                        flags,
                    });
                }
                if matches!(
                    (region, c.next),
                    (Region::L, Region::R) | (Region::R, Region::L)
                ) {
                    flags.push(TrajectoryFlag::SpiralHandoff { t });
                }
                if c.boundary == Boundary::ZEqualsB && c.next == Region::S {
                    returns.push(SectionHit {
                        t,
                        state: c.state,
                        inside_d: c.state.y.abs() <= 1.0,
                    });
                    if opts.max_returns.is_some_and(|m| returns.len() >= m) {
                        return Ok(EventTrajectory {
                            segments,
                            total_time: t,
                            termination: Termination::ReturnLimit,
                            returns,
                            flags,
                        });
                    }
                }
                region = c.next;
                state = c.state;
            }
        }
    }
    Err(Error::EventAccumulation {
        limit: opts.max_events,
    })
}

/// Poincare return map of the cross-section `D` computed from the flow.
pub fn return_map_d(pt: SectionPoint, p: &PwlParams) -> Result<SectionPoint> {
    if !(pt.x.abs() <= 1.0 && pt.y.abs() <= 1.0) {
        return Err(Error::domain(
            "section point",
            pt.x.abs().max(pt.y.abs()),
            "|x|, |y| <= 1",
        ));
    }
    if pt.x == 0.0 {
        return Err(Error::Discontinuity { step: 0 });
    }
    if pt.x.abs() == 1.0 {
        // The point is the focus axis itself: only y relaxes over a nominal turn.
        let c = pt.x;
        return Ok(SectionPoint::new(pt.x, c + (pt.y - c) * p.q()));
    }
    let opts = SimOptions {
        max_time: 1e4,
        max_returns: Some(1),
        max_events: 10_000,
        start_region: Some(Region::S),
    };
    let traj = simulate(State3::new(pt.x, pt.y, p.b()), p, &opts)?;
    match traj.termination {
        Termination::ReturnLimit => {
            let hit = traj.returns[0];
            if hit.inside_d {
                Ok(SectionPoint::new(hit.state.x, hit.state.y))
            } else {
                Err(Error::LeftDomain {
                    x: hit.state.x,
                    y: hit.state.y,
                    z: hit.state.z,
                })
            }
        }
        Termination::Sliding { state, .. } => Err(Error::SlidingDetected {
            x: state.x,
            y: state.y,
            z: state.z,
        }),
        _ => {
            let s = traj.end_state().unwrap_or_default();
            Err(Error::LeftDomain {
                x: s.x,
                y: s.y,
                z: s.z,
            })
        }
    }
}

/// A shot along the unstable manifold of the saddle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shoot {
    pub trajectory: EventTrajectory,
    /// `x` of the first return to `z = b`: positive before the primary
    /// homoclinic loop forms on the right, negative after.
    pub split: f64,
}

/// Follows the unstable separatrix from `(side * epsilon, 0, 0)` to its
/// first return to `z = b`.
pub fn unstable_manifold_shoot(epsilon: f64, side: f64, p: &PwlParams) -> Result<Shoot> {
    if !(epsilon > 0.0 && epsilon <= 1e-6) {
        return Err(Error::domain("epsilon", epsilon, "0 < epsilon <= 1e-6"));
    }
    if side == 0.0 {
        return Err(Error::invalid("side must be +1 or -1"));
    }
    let opts = SimOptions {
        max_time: 1e4,
        max_returns: Some(1),
        max_events: 10_000,
        start_region: Some(Region::S),
    };
    let traj = simulate(State3::new(side.signum() * epsilon, 0.0, 0.0), p, &opts)?;
    match traj.termination {
        Termination::ReturnLimit => {
            let split = traj.returns[0].state.x;
            Ok(Shoot {
                trajectory: traj,
                split,
            })
        }
        Termination::Sliding { state, .. } => Err(Error::SlidingDetected {
            x: state.x,
            y: state.y,
            z: state.z,
        }),
        _ => Err(Error::no_root("separatrix did not return to z = b")),
    }
}

/// Bisects the separatrix split over `b` in `[lo, hi]`; the zero is the
/// primary homoclinic butterfly.
pub fn locate_primary_homoclinic(base: &PwlParams, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let split = |b: f64| {
        base.with_b(b)
            .and_then(|p| unstable_manifold_shoot(1e-9, 1.0, &p))
            .map(|s| s.split)
            .unwrap_or(f64::NAN)
    };
    let (a, c) = (split(lo), split(hi));
    if !(a.is_finite() && c.is_finite()) || a * c > 0.0 {
        return Err(Error::no_root(format!(
            "separatrix split does not change sign on [{lo}, {hi}]"
        )));
    }
    crate::roots::bisect(split, lo, hi, xtol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focus_axis_is_fixed() {
        let p = PwlParams::reference(0.65, 3.4).unwrap();
        let r = return_map_d(SectionPoint::new(1.0, 1.0), &p).unwrap();
        assert!((r.x - 1.0).abs() < 1e-9 && (r.y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_is_rejected() {
        let p = PwlParams::reference(0.65, 3.4).unwrap();
        assert!(return_map_d(SectionPoint::new(0.0, 0.5), &p).is_err());
    }

    #[test]
    fn below_homoclinic_converges() {
        let p = PwlParams::reference(0.65, 1.5).unwrap();
        let opts = SimOptions {
            max_time: 500.0,
            ..Default::default()
        };
        let tr = simulate(State3::new(0.3, 0.2, 0.5), &p, &opts).unwrap();
        assert!(matches!(
            tr.termination,
            Termination::Converged {
                equilibrium: Equilibrium::FocusRight | Equilibrium::FocusLeft
            }
        ));
    }
}
