//! Dormand-Prince 5(4) integrator with step-size control and the
//! fourth-order continuous extension of Hairer, Norsett and Wanner.

use serde::Serialize;

use crate::error::{Error, Result};

/// An autonomous or time-dependent ODE `y' = f(t, y)` in `R^N`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

/// Tolerances and limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    /// Initial step; estimated when `None`.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tol(1e-9)
    }
}

impl OdeOptions {
    /// Equal relative and absolute tolerance.
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_max: f64::INFINITY,
            h_init: None,
            max_steps: 50_000_000,
        }
    }
}

/// One accepted step with its dense-output polynomial.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` in `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Step-by-step integrator state.
pub struct Dopri5<'a, S, const N: usize> {
    sys: &'a S,
    opts: OdeOptions,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    steps: usize,
}

impl<'a, S: OdeSystem<N>, const N: usize> Dopri5<'a, S, N> {
    pub fn new(sys: &'a S, t0: f64, y0: [f64; N], opts: OdeOptions) -> Result<Self> {
        if !(opts.rtol >= 0.0 && opts.atol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite initial state"));
        }
        let mut k1 = [0.0; N];
        sys.rhs(t0, &y0, &mut k1);
        let mut me = Self {
            sys,
            opts,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            steps: 0,
        };
        me.h = opts.h_init.unwrap_or_else(|| me.initial_step());
        Ok(me)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    fn sc(&self, a: f64, b: f64) -> f64 {
        self.opts.atol + self.opts.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&self) -> f64 {
        let n = N as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let s = self.sc(self.y[i], self.y[i]);
            d0 += (self.y[i] / s).powi(2);
            d1 += (self.k1[i] / s).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = lin(&self.y, h0, &[(1.0, &self.k1)]);
        let mut f1 = [0.0; N];
        self.sys.rhs(self.t + h0, &y1, &mut f1);
        let mut d2 = 0.0;
        for i in 0..N {
            d2 += ((f1[i] - self.k1[i]) / self.sc(self.y[i], self.y[i])).powi(2);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// Advances one accepted step, not beyond `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<DenseStep<N>> {
        let sys = self.sys;
        loop {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::NonConvergence {
                    iterations: self.opts.max_steps,
                    context: "step limit reached".into(),
                });
            }
            let mut h = self.h.min(self.opts.h_max);
            let last = self.t + h >= t_stop;
            if last {
                h = t_stop - self.t;
            }
            if h < 1e-14 * self.t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let mut k2 = [0.0; N];
            let mut k3 = [0.0; N];
            let mut k4 = [0.0; N];
            let mut k5 = [0.0; N];
            let mut k6 = [0.0; N];
            let mut k7 = [0.0; N];
            sys.rhs(t + C2 * h, &lin(&y, h, &[(A21, &k1)]), &mut k2);
            sys.rhs(t + C3 * h, &lin(&y, h, &[(A31, &k1), (A32, &k2)]), &mut k3);
            sys.rhs(
                t + C4 * h,
                &lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
                &mut k4,
            );
            sys.rhs(
                t + C5 * h,
                &lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                &mut k5,
            );
            sys.rhs(
                t + h,
                &lin(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
                &mut k6,
            );
            let y1 = lin(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            sys.rhs(t + h, &y1, &mut k7);
            let mut err = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err += (e / self.sc(y[i], y1[i])).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                self.h = h * 0.1;
                continue;
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rcont[0][i] = y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let step = DenseStep {
                    t0: t,
                    h,
                    y0: y,
                    y1,
                    rcont,
                };
                self.t = if last { t_stop } else { t + h };
                self.y = y1;
                self.k1 = k7;
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                return Ok(step);
            }
            self.h = h * fac.min(1.0);
        }
    }
}

/// Integrates from `t0` to `t_end`, calling `on_step` after every accepted
/// step; returning `false` stops early. Returns the final `(t, y)`.
pub fn integrate_with<S, F, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: OdeOptions,
    mut on_step: F,
) -> Result<(f64, [f64; N])>
where
    S: OdeSystem<N>,
    F: FnMut(&DenseStep<N>) -> bool,
{
    let mut ig = Dopri5::new(sys, t0, y0, opts)?;
    while ig.t() < t_end {
        let st = ig.step(t_end)?;
        if !on_step(&st) {
            break;
        }
    }
    Ok((ig.t(), ig.y()))
}

/// Final state at `t_end`.
pub fn integrate_to<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: OdeOptions,
) -> Result<[f64; N]> {
    integrate_with(sys, t0, y0, t_end, opts, |_| true).map(|r| r.1)
}

/// A trajectory stored as its dense steps.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.steps.first().map(|s| s.t0).unwrap_or(0.0)
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map(|s| s.t1()).unwrap_or(0.0)
    }

    /// Interpolated state; `None` outside the covered interval.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if self.steps.is_empty() || t < self.t_start() || t > self.t_end() {
            return None;
        }
        let i = self.steps.partition_point(|s| s.t1() < t);
        self.steps
            .get(i.min(self.steps.len() - 1))
            .map(|s| s.eval(t))
    }

    /// Samples at spacing `dt` from the start.
    pub fn sample(&self, dt: f64) -> Vec<(f64, [f64; N])> {
        let (a, b) = (self.t_start(), self.t_end());
        let n = ((b - a) / dt).floor() as usize;
        (0..=n)
            .filter_map(|k| {
                let t = a + k as f64 * dt;
                self.eval(t).map(|y| (t, y))
            })
            .collect()
    }
}

/// Integrates and keeps every dense step.
pub fn integrate_dense<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: OdeOptions,
) -> Result<DenseSolution<N>> {
    let mut steps = Vec::new();
    integrate_with(sys, t0, y0, t_end, opts, |s| {
        steps.push(*s);
        true
    })?;
    Ok(DenseSolution { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;
    impl OdeSystem<1> for Decay {
        fn rhs(&self, _t: f64, y: &[f64; 1], dy: &mut [f64; 1]) {
            dy[0] = -y[0];
        }
    }

    struct Osc;
    impl OdeSystem<2> for Osc {
        fn rhs(&self, _t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn exponential_decay() {
        for tol in [1e-6, 1e-9, 1e-12] {
            let y = integrate_to(&Decay, 0.0, [1.0], 10.0, OdeOptions::with_tol(tol)).unwrap();
            assert!((y[0] - (-10f64).exp()).abs() < 10.0 * tol);
        }
    }

    #[test]
    fn dense_output_matches_solution() {
        let sol =
            integrate_dense(&Osc, 0.0, [0.0, 1.0], 20.0, OdeOptions::with_tol(1e-11)).unwrap();
        for k in 0..200 {
            let t = 0.1 * k as f64 + 0.037;
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-8, "t = {t}");
        }
        assert!(sol.eval(25.0).is_none());
    }

    #[test]
    fn bad_tolerance() {
        assert!(Dopri5::new(&Decay, 0.0, [1.0], OdeOptions::with_tol(0.0)).is_err());
    }
}
