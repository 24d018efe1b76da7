//! Smooth reference systems: the Lorenz equations
//!
//! ```text
//! x' = sigma (y - x),  y' = x (r - z) - y,  z' = x y - beta z
//! ```
//!
//! and the Lorenz-Lyubimov-Zaks (LLZ) extension
//!
//! ```text
//! x' = -sigma x + sigma y + sigma y D (z - r),  y' = r x - y - x z,  z' = x y - beta z
//! ```
//!
//! which reduces to Lorenz at `D = 0`.

mod classify;
mod curves;
mod equilibria;
mod homoclinic;
mod lyapunov;
mod section_pi;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, DenseSolution, OdeOptions, OdeSystem};
use crate::state::State3;

pub use classify::{
    classify_attractor, AttractorKind, Classification, ClassifyBudget, RECENT_CROSSINGS,
};
pub use curves::{curve_ah, curve_nu1, curve_pf, l_nu1, l_pf};
pub use equilibria::{
    cubic_roots, equilibria_llz, lorenz_equilibria, EquilibriumClass, EquilibriumInfo,
};
pub use homoclinic::{locate_homoclinic, separatrix_split};
pub use lyapunov::{lyapunov_flow, LyapunovEstimate};
pub use section_pi::{section_pi_crossings, Direction, PiCrossing, SectionPi};

/// The factor `r D = 0.881` defining the LLZ comparison route.
pub const LLZ_ROUTE_PRODUCT: f64 = 0.881;

/// A smooth autonomous vector field in `R^3`.
pub trait SmoothFlow: Sync {
    fn field(&self, s: &[f64; 3]) -> [f64; 3];
    fn jacobian(&self, s: &[f64; 3]) -> [[f64; 3]; 3];
}

/// Parameters of the Lorenz system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub r: f64,
    pub beta: f64,
}

impl LorenzParams {
    pub fn new(sigma: f64, r: f64, beta: f64) -> Result<Self> {
        positive(&[("sigma", sigma), ("r", r), ("beta", beta)])?;
        Ok(Self { sigma, r, beta })
    }

    /// `beta = 8/3`.
    pub fn classic(sigma: f64, r: f64) -> Result<Self> {
        Self::new(sigma, r, 8.0 / 3.0)
    }

    /// The same system written as LLZ with `D = 0`.
    pub fn to_llz(&self) -> LlzParams {
        LlzParams {
            sigma: self.sigma,
            beta: self.beta,
            r: self.r,
            d: 0.0,
        }
    }
}

/// Parameters of the LLZ system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlzParams {
    pub sigma: f64,
    pub beta: f64,
    pub r: f64,
    pub d: f64,
}

impl LlzParams {
    /// `D = 0` is accepted and gives the Lorenz system.
    pub fn new(sigma: f64, beta: f64, r: f64, d: f64) -> Result<Self> {
        positive(&[("sigma", sigma), ("beta", beta), ("r", r)])?;
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::domain("D", d, "D >= 0"));
        }
        Ok(Self { sigma, beta, r, d })
    }

    /// `R = (sqrt(1 - 4D) - 1) / (2D)`, evaluated as `-2 / (1 + sqrt(1 - 4D))`
    /// so that `D = 0` gives `R = -1`.
    pub fn big_r(&self) -> Result<f64> {
        let disc = 1.0 - 4.0 * self.d;
        if !(disc > 0.0) {
            return Err(Error::domain("D", self.d, "1 - 4D > 0"));
        }
        Ok(-2.0 / (1.0 + disc.sqrt()))
    }

    /// `Q = sqrt(beta / 2) sqrt(r (sqrt(1 - 4D) + 1) - 2)`.
    pub fn big_q(&self) -> Result<f64> {
        let disc = 1.0 - 4.0 * self.d;
        if !(disc > 0.0) {
            return Err(Error::domain("D", self.d, "1 - 4D > 0"));
        }
        let inner = self.r * (disc.sqrt() + 1.0) - 2.0;
        if !(inner > 0.0) {
            return Err(Error::domain(
                "r",
                self.r,
                "r above the pitchfork curve (foci exist)",
            ));
        }
        Ok((self.beta / 2.0).sqrt() * inner.sqrt())
    }
}

fn positive(vals: &[(&'static str, f64)]) -> Result<()> {
    for &(what, v) in vals {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(what, v, "positive"));
        }
    }
    Ok(())
}

/// Lorenz right-hand side.
pub fn rhs_lorenz(s: &State3, p: &LorenzParams) -> State3 {
    State3::new(
        p.sigma * (s.y - s.x),
        s.x * (p.r - s.z) - s.y,
        s.x * s.y - p.beta * s.z,
    )
}

/// LLZ right-hand side.
pub fn rhs_llz(s: &State3, p: &LlzParams) -> State3 {
    State3::new(
        -p.sigma * s.x + p.sigma * s.y + p.sigma * s.y * p.d * (s.z - p.r),
        p.r * s.x - s.y - s.x * s.z,
        s.x * s.y - p.beta * s.z,
    )
}

impl SmoothFlow for LorenzParams {
    fn field(&self, s: &[f64; 3]) -> [f64; 3] {
        rhs_lorenz(&State3::from_array(*s), self).to_array()
    }

    fn jacobian(&self, s: &[f64; 3]) -> [[f64; 3]; 3] {
        let [x, y, z] = *s;
        [
            [-self.sigma, self.sigma, 0.0],
            [self.r - z, -1.0, -x],
            [y, x, -self.beta],
        ]
    }
}

impl SmoothFlow for LlzParams {
    fn field(&self, s: &[f64; 3]) -> [f64; 3] {
        rhs_llz(&State3::from_array(*s), self).to_array()
    }

    fn jacobian(&self, s: &[f64; 3]) -> [[f64; 3]; 3] {
        let [x, y, z] = *s;
        let (sg, d) = (self.sigma, self.d);
        [
            [-sg, sg + sg * d * (z - self.r), sg * y * d],
            [self.r - z, -1.0, -x],
            [y, x, -self.beta],
        ]
    }
}

/// Adapter running a [`SmoothFlow`] through the ODE integrator.
pub struct Flow<'a, F: ?Sized>(pub &'a F);

impl<F: SmoothFlow + ?Sized> OdeSystem<3> for Flow<'_, F> {
    fn rhs(&self, _t: f64, y: &[f64; 3], dy: &mut [f64; 3]) {
        *dy = self.0.field(y);
    }
}

/// State plus three tangent vectors, for Lyapunov spectra.
pub struct Tangent<'a, F: ?Sized>(pub &'a F);

impl<F: SmoothFlow + ?Sized> OdeSystem<12> for Tangent<'_, F> {
    fn rhs(&self, _t: f64, y: &[f64; 12], dy: &mut [f64; 12]) {
        let s = [y[0], y[1], y[2]];
        let f = self.0.field(&s);
        let j = self.0.jacobian(&s);
        dy[..3].copy_from_slice(&f);
        for v in 0..3 {
            let o = 3 + 3 * v;
            for i in 0..3 {
                dy[o + i] = j[i][0] * y[o] + j[i][1] * y[o + 1] + j[i][2] * y[o + 2];
            }
        }
    }
}

/// Integrates a smooth flow over `[0, t_end]` with dense output.
pub fn integrate_adaptive<F: SmoothFlow + ?Sized>(
    flow: &F,
    s0: State3,
    t_end: f64,
    tol: f64,
) -> Result<DenseSolution<3>> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::domain("tol", tol, "[1e-12, 1e-6]"));
    }
    ode::integrate_dense(
        &Flow(flow),
        0.0,
        s0.to_array(),
        t_end,
        OdeOptions::with_tol(tol),
    )
}

/// A point of the LLZ comparison route `r = 0.881 / D` with `sigma = 10`,
/// `beta = 8/3`.
pub fn route_point_llz(d: f64) -> Result<LlzParams> {
    if !(d > 0.0 && d < 0.25) {
        return Err(Error::domain("D", d, "0 < D < 0.25"));
    }
    LlzParams::new(10.0, 8.0 / 3.0, LLZ_ROUTE_PRODUCT / d, d)
}

/// Labelled points `a`-`g` of the LLZ route as `(label, D, r)`.
pub const LLZ_ROUTE_POINTS: [(char, f64, f64); 7] = [
    ('a', 0.0938, 9.38),
    ('b', 0.0915, 9.64),
    ('c', 0.08, 11.01),
    ('d', 0.0711, 12.41),
    ('e', 0.0624, 14.2),
    ('f', 0.0586, 15.1),
    ('g', 0.05, 17.8),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn llz_reduces_to_lorenz() {
        let lz = LorenzParams::classic(10.0, 28.0).unwrap();
        let s = State3::new(1.3, -2.1, 20.5);
        let d = rhs_llz(&s, &lz.to_llz()) - rhs_lorenz(&s, &lz);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn origin_is_equilibrium() {
        let p = LlzParams::new(10.0, 8.0 / 3.0, 12.0, 0.07).unwrap();
        assert_eq!(rhs_llz(&State3::default(), &p), State3::default());
    }

    #[test]
    fn route_identity() {
        for (_, d, _) in LLZ_ROUTE_POINTS {
            let p = route_point_llz(d).unwrap();
            assert!((p.r * p.d - LLZ_ROUTE_PRODUCT).abs() < 1e-12);
        }
        assert!(route_point_llz(0.3).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = LlzParams::new(10.0, 8.0 / 3.0, 12.0, 0.07).unwrap();
        let s = [1.1, -0.7, 8.3];
        let j = p.jacobian(&s);
        for k in 0..3 {
            let mut a = s;
            let mut b = s;
            a[k] += 1e-6;
            b[k] -= 1e-6;
            let (fa, fb) = (p.field(&a), p.field(&b));
            for i in 0..3 {
                assert!(((fa[i] - fb[i]) / 2e-6 - j[i][k]).abs() < 1e-6);
            }
        }
    }
}
