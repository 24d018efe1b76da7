//! The piecewise-linear Lorenz-type flow.
//!
//! Phase space is split into three regions:
//!
//! ```text
//! G_s: |x| < 1, z < b                         saddle O_s at the origin
//! G_l: x <= -1  or  (x < 1, y < 0, z > b)     focus e_l = (-1, -1, b)
//! G_r: x >= 1   or  (x > -1, y > 0, z > b)    focus e_r = ( 1,  1, b)
//! ```
//!
//! Each region carries a linear vector field with a closed-form flow, so
//! trajectories are integrated exactly from boundary to boundary.

mod flow;
mod region;
mod sim;
mod sliding;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bifurcation;
use crate::error::{Error, Result};
use crate::section::{self, Section2Params};

pub use flow::{exact_flow, next_crossing, next_crossing_refined, vector_field, Crossing, Exit};
pub use region::{region_of, Boundary, Equilibrium, Region, RegionAssignment};
pub use sim::{
    locate_primary_homoclinic, return_map_d, simulate, unstable_manifold_shoot, EventTrajectory,
    SectionHit, Segment, Shoot, SimOptions, Termination, TrajectoryFlag,
};
pub use sliding::{sliding_check, SlidingReport};

/// Rotation sense of the focus subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationOrientation {
    /// Both focus subsystems exactly as printed: `G_r` turns clockwise in
    /// `(x - 1, z - b)`, which is not the mirror image of `G_l`.
    AsPrinted,
    /// `G_r` turns counterclockwise, `G_l` is its mirror image; entry points
    /// below the focus make a three-quarter turn back to `z = b`.
    #[default]
    FigureConsistent,
}

/// Parameters of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwlParams {
    alpha: f64,
    delta: f64,
    nu: f64,
    omega: f64,
    lambda: f64,
    b: f64,
    orientation: RotationOrientation,
}

impl PwlParams {
    /// Requires all parameters positive and `1/2 < nu < alpha`.
    pub fn new(
        alpha: f64,
        delta: f64,
        nu: f64,
        omega: f64,
        lambda: f64,
        b: f64,
        orientation: RotationOrientation,
    ) -> Result<Self> {
        for (what, v) in [
            ("alpha", alpha),
            ("delta", delta),
            ("nu", nu),
            ("omega", omega),
            ("lambda", lambda),
            ("b", b),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(what, v, "positive"));
            }
        }
        if !(nu > 0.5 && nu < alpha) {
            return Err(Error::domain("nu", nu, "1/2 < nu < alpha"));
        }
        Ok(Self {
            alpha,
            delta,
            nu,
            omega,
            lambda,
            b,
            orientation,
        })
    }

    /// The parameter set used for the `nu = 0.65` bifurcation diagram:
    /// `alpha = 2, delta = 0.588, omega = 2, lambda = 0.294`.
    pub fn reference(nu: f64, b: f64) -> Result<Self> {
        Self::new(
            2.0,
            0.588,
            nu,
            2.0,
            0.294,
            b,
            RotationOrientation::FigureConsistent,
        )
    }

    pub fn with_b(self, b: f64) -> Result<Self> {
        Self::new(
            self.alpha,
            self.delta,
            self.nu,
            self.omega,
            self.lambda,
            b,
            self.orientation,
        )
    }

    pub fn with_orientation(mut self, orientation: RotationOrientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn orientation(&self) -> RotationOrientation {
        self.orientation
    }

    /// Splitting parameter `b exp(-3 pi lambda / (2 omega))`.
    pub fn gamma(&self) -> f64 {
        bifurcation::to_gamma(self.b, self.lambda, self.omega)
    }

    /// `y` contraction per passage, `exp(-3 pi delta / (2 omega))`.
    pub fn q(&self) -> f64 {
        section::q_of(self.delta, self.omega)
    }

    /// Eigenvalues `1, -alpha, -nu` of the saddle.
    pub fn saddle_eigenvalues(&self) -> [f64; 3] {
        [1.0, -self.alpha, -self.nu]
    }

    /// Eigenvalues `-lambda +- i omega, -delta` of the foci.
    pub fn focus_eigenvalues(&self) -> [Complex64; 3] {
        [
            Complex64::new(-self.lambda, self.omega),
            Complex64::new(-self.lambda, -self.omega),
            Complex64::new(-self.delta, 0.0),
        ]
    }

    /// Saddle value `1 - nu`.
    pub fn saddle_value(&self) -> f64 {
        1.0 - self.nu
    }

    /// Sliding threshold `b_cr(lambda, omega)`.
    pub fn b_cr(&self) -> f64 {
        bifurcation::b_cr(self.lambda, self.omega)
    }

    /// Parameters of the analytic section map. Fails when `gamma > 2`.
    pub fn section_params(&self) -> Result<Section2Params> {
        Section2Params::new(self.gamma(), self.q(), self.nu, self.alpha)
    }
}
