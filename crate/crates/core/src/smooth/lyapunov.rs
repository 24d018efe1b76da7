use serde::Serialize;

use super::{SmoothFlow, Tangent};
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::state::State3;

/// Benettin estimate of the Lyapunov spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Exponents in descending order of the Gram-Schmidt chain.
    pub spectrum: [f64; 3],
    pub largest: f64,
    /// Running estimate of the largest exponent at half the horizon.
    pub half_time_largest: f64,
    /// The estimate moved by less than `5% |largest| + 0.005` over the
    /// second half.
    pub converged: bool,
    pub time: f64,
    /// State at the end of the run.
    pub end_state: State3,
}

/// Integrates three tangent vectors along the orbit of `s0` for `t_total`,
/// re-orthonormalising every `renorm` time units. `s0` should already lie
/// near the attractor.
pub fn lyapunov_flow<F: SmoothFlow + ?Sized>(
    flow: &F,
    s0: State3,
    t_total: f64,
    renorm: f64,
    tol: f64,
) -> Result<LyapunovEstimate> {
    if !(t_total > 0.0 && renorm > 0.0 && renorm <= t_total) {
        return Err(Error::invalid("need 0 < renorm <= t_total"));
    }
    let n = (t_total / renorm).round().max(1.0) as usize;
    let sys = Tangent(flow);
    let opts = OdeOptions::with_tol(tol);
    let mut y = [0.0; 12];
    y[..3].copy_from_slice(&s0.to_array());
    y[3] = 1.0;
    y[7] = 1.0;
    y[11] = 1.0;
    let mut sums = [0.0; 3];
    let mut half = f64::NAN;
    for k in 0..n {
        let t0 = k as f64 * renorm;
        y = ode::integrate_to(&sys, t0, y, t0 + renorm, opts)?;
        let mut v = [[y[3], y[4], y[5]], [y[6], y[7], y[8]], [y[9], y[10], y[11]]];
        for i in 0..3 {
            for j in 0..i {
                let d = dot(&v[i], &v[j]);
                for c in 0..3 {
                    v[i][c] -= d * v[j][c];
                }
            }
            let nrm = dot(&v[i], &v[i]).sqrt();
            if !(nrm > 0.0 && nrm.is_finite()) {
                return Err(Error::Degenerate {
                    context: "tangent vectors collapsed".into(),
                });
            }
            sums[i] += nrm.ln();
            for c in 0..3 {
                v[i][c] /= nrm;
            }
        }
        for i in 0..3 {
            y[3 + 3 * i..6 + 3 * i].copy_from_slice(&v[i]);
        }
        if k + 1 == n / 2 {
            half = sums[0] / ((k + 1) as f64 * renorm);
        }
    }
    let time = n as f64 * renorm;
    let spectrum = sums.map(|s| s / time);
    let largest = spectrum[0];
    let half_time_largest = if half.is_nan() { largest } else { half };
    Ok(LyapunovEstimate {
        spectrum,
        largest,
        half_time_largest,
        converged: (largest - half_time_largest).abs() <= 0.05 * largest.abs() + 0.005,
        time,
        end_state: State3::new(y[0], y[1], y[2]),
    })
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
