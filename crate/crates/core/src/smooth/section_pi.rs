use serde::Serialize;

use super::LlzParams;
use crate::error::{Error, Result};
use crate::ode::{DenseSolution, DenseStep};
use crate::roots;
use crate::state::State3;

/// Sub-intervals probed per integration step; the surface has a kink on
/// `xi x + eta y = 0`, so a step can hold two crossings.
const PROBES: usize = 4;

/// The V-shaped surface `z = |xi x + eta y| / kappa` through the saddle, its
/// strong stable eigenvector and both foci.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionPi {
    pub xi: f64,
    pub eta: f64,
    pub kappa: f64,
}

impl SectionPi {
    pub fn new(p: &LlzParams) -> Result<Self> {
        let big_r = p.big_r()?;
        let q = p.big_q()?;
        let (sg, r, d) = (p.sigma, p.r, p.d);
        let disc = (1.0 + sg).powi(2) - 4.0 * sg * (d * r * r - r + 1.0);
        if disc < 0.0 {
            return Err(Error::Degenerate {
                context: "saddle eigenvalues s_1, s_2 are complex".into(),
            });
        }
        let s2 = -0.5 * (1.0 + sg) - 0.5 * disc.sqrt();
        let kappa = q * (big_r * sg * (d - 1.0) - sg - s2);
        if !(kappa > 1e-12) {
            return Err(Error::Degenerate {
                context: format!("kappa = {kappa} is not positive"),
            });
        }
        Ok(Self {
            xi: (sg + s2) * (r + big_r),
            eta: sg * (d - 1.0) * (r + big_r),
            kappa,
        })
    }

    /// Signed distance-like value `z - |xi x + eta y| / kappa`; positive above.
    pub fn surface(&self, s: &State3) -> f64 {
        s.z - (self.xi * s.x + self.eta * s.y).abs() / self.kappa
    }
}

/// Crossing sense of the surface value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// From above (`z` larger) to below.
    Downward,
    Upward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiCrossing {
    pub t: f64,
    pub state: State3,
    pub direction: Direction,
}

/// Crossings inside one dense step, refined by bisection on the interpolant.
pub(crate) fn crossings_in_step(sec: &SectionPi, step: &DenseStep<3>, out: &mut Vec<PiCrossing>) {
    let g = |t: f64| sec.surface(&State3::from_array(step.eval(t)));
    let grid: Vec<f64> = (0..=PROBES)
        .map(|k| {
            if k == PROBES {
                step.t1()
            } else {
                step.t0 + step.h * k as f64 / PROBES as f64
            }
        })
        .collect();
    for (lo, hi) in roots::sign_changes(g, &grid) {
        // An exact zero on the left knot belongs to the previous piece.
        if lo == hi && lo == step.t0 {
            continue;
        }
        let t = if lo == hi {
            lo
        } else {
            match roots::bisect(g, lo, hi, 0.0) {
                Ok(t) => t,
                Err(_) => continue,
            }
        };
        let direction = if g(lo) > g(hi) || (lo == hi && g(t - 1e-9 * step.h) > 0.0) {
            Direction::Downward
        } else {
            Direction::Upward
        };
        out.push(PiCrossing {
            t,
            state: State3::from_array(step.eval(t)),
            direction,
        });
    }
}

/// All crossings of a dense trajectory with the surface, in time order.
pub fn section_pi_crossings(traj: &DenseSolution<3>, p: &LlzParams) -> Result<Vec<PiCrossing>> {
    let sec = SectionPi::new(p)?;
    let mut out = Vec::new();
    for st in &traj.steps {
        crossings_in_step(&sec, st, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::equilibria_llz;

    #[test]
    fn passes_through_saddle_and_foci() {
        let p = LlzParams::new(10.0, 8.0 / 3.0, 17.8, 0.05).unwrap();
        let sec = SectionPi::new(&p).unwrap();
        for e in equilibria_llz(&p).unwrap() {
            assert!(sec.surface(&e.location).abs() < 1e-9, "{}", e.name);
        }
    }

    #[test]
    fn below_pitchfork_is_an_error() {
        let p = LlzParams::new(10.0, 8.0 / 3.0, 0.5, 0.05).unwrap();
        assert!(SectionPi::new(&p).is_err());
    }
}
