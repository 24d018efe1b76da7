use serde::Serialize;

use super::section_pi::{crossings_in_step, Direction, PiCrossing, SectionPi};
use super::{equilibria_llz, lyapunov_flow, Flow, LlzParams};
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::state::State3;

/// Integration and detection limits for [`classify_attractor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyBudget {
    /// Discarded initial time.
    pub transient: f64,
    /// Observation time after the transient.
    pub window: f64,
    pub tol: f64,
    /// Relative tolerance for repeated section points.
    pub cluster_rtol: f64,
    /// Repetitions of a period required to accept it.
    pub min_repeats: usize,
    pub max_period: usize,
    /// Lyapunov run length for non-periodic windows.
    pub lyap_time: f64,
    /// Minimum distance to the saddle, relative to the focus distance, below
    /// which the attractor is flagged near-homoclinic.
    pub near_homoclinic: f64,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        Self {
            transient: 2000.0,
            window: 1000.0,
            tol: 1e-9,
            cluster_rtol: 1e-5,
            min_repeats: 8,
            max_period: 64,
            lyap_time: 500.0,
            near_homoclinic: 0.05,
        }
    }
}

/// Attractor type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttractorKind {
    FixedPoint,
    /// `period` downward crossings of the section per cycle; `symmetric` when
    /// the cycle is its own mirror image.
    Periodic {
        period: usize,
        symmetric: bool,
    },
    Chaotic,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub kind: AttractorKind,
    /// Downward section crossings observed in the window.
    pub crossings: usize,
    /// Section points of the detected cycle.
    pub cycle: Vec<State3>,
    /// Time period of the detected cycle.
    pub cycle_time: Option<f64>,
    /// Largest Lyapunov exponent, when it was computed.
    pub lyap1: Option<f64>,
    /// Smallest distance to the saddle over the window, divided by `|e_r|`.
    pub min_saddle_distance: f64,
    pub near_homoclinic: bool,
    /// Up to the last [`RECENT_CROSSINGS`] downward section points.
    pub recent: Vec<State3>,
    pub end_state: State3,
}

/// Number of trailing section points kept in [`Classification::recent`].
pub const RECENT_CROSSINGS: usize = 256;

/// Classifies the attractor reached from `s0` by the downward crossings of
/// the section `Pi`, falling back to the largest Lyapunov exponent.
pub fn classify_attractor(
    p: &LlzParams,
    s0: State3,
    budget: &ClassifyBudget,
) -> Result<Classification> {
    if !(budget.transient >= 0.0 && budget.window > 0.0 && budget.min_repeats >= 1) {
        return Err(Error::invalid("empty classification budget"));
    }
    let sec = SectionPi::new(p)?;
    let eq = equilibria_llz(p)?;
    let foci = [eq[1].location, eq[2].location];
    let scale = foci[1].norm();
    let opts = OdeOptions::with_tol(budget.tol);
    let sys = Flow(p);

    let y = ode::integrate_to(&sys, 0.0, s0.to_array(), budget.transient, opts)?;
    let focus_dist = |s: &State3| foci[0].dist(*s).min(foci[1].dist(*s));
    let start = State3::from_array(y);
    let d_start = focus_dist(&start);

    let mut hits: Vec<PiCrossing> = Vec::new();
    let mut min_saddle = f64::INFINITY;
    let t_end = budget.transient + budget.window;
    let (_, yend) = ode::integrate_with(&sys, budget.transient, y, t_end, opts, |st| {
        for t in [st.t0 + 0.5 * st.h, st.t1()] {
            min_saddle = min_saddle.min(State3::from_array(st.eval(t)).norm());
        }
        crossings_in_step(&sec, st, &mut hits);
        true
    })?;
    let end_state = State3::from_array(yend);
    hits.retain(|c| c.direction == Direction::Downward);
    let min_saddle_distance = min_saddle / scale;
    let near_homoclinic = min_saddle_distance < budget.near_homoclinic;
    let mut out = Classification {
        kind: AttractorKind::Undecided,
        crossings: hits.len(),
        cycle: Vec::new(),
        cycle_time: None,
        lyap1: None,
        min_saddle_distance,
        near_homoclinic,
        recent: hits[hits.len().saturating_sub(RECENT_CROSSINGS)..]
            .iter()
            .map(|c| c.state)
            .collect(),
        end_state,
    };

    let d_end = focus_dist(&end_state);
    if d_end <= 1e-6 * scale || (d_end < 0.5 * d_start && d_end < 0.05 * scale) {
        out.kind = AttractorKind::FixedPoint;
        return Ok(out);
    }

    let atol = budget.cluster_rtol * (1.0 + scale);
    let n = hits.len();
    for period in 1..=budget.max_period {
        if n < (budget.min_repeats + 1) * period {
            break;
        }
        let repeats = (n - budget.min_repeats * period..n)
            .all(|i| hits[i].state.dist(hits[i - period].state) <= atol);
        if repeats {
            let cycle: Vec<State3> = hits[n - period..].iter().map(|c| c.state).collect();
            let symmetric = cycle
                .iter()
                .all(|c| cycle.iter().any(|d| d.dist(c.mirror()) <= 10.0 * atol));
            out.cycle_time = Some(hits[n - 1].t - hits[n - 1 - period].t);
            out.cycle = cycle;
            out.kind = AttractorKind::Periodic { period, symmetric };
            return Ok(out);
        }
    }

    let ly = lyapunov_flow(p, end_state, budget.lyap_time, 1.0, budget.tol)?;
    out.lyap1 = Some(ly.largest);
    if ly.largest > 0.01 {
        out.kind = AttractorKind::Chaotic;
    }
    Ok(out)
}
