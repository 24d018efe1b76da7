//! Piecewise-linear Lorenz-type flows and their reductions.
//!
//! The crate is organised bottom-up:
//!
//! * [`factor`]: the 1-D discontinuous factor map `x -> (1 - g + g|x|^nu) sign x`.
//! * [`bifurcation`]: closed forms and root finders for the homoclinic/pitchfork
//!   cascade of the factor map and the conversions to the flow parameter `b`.
//! * [`section`]: the triangular 2-D Poincare map on the cross-section `D`.
//! * [`pwl`]: event-driven closed-form integration of the piecewise-linear flow.
//! * [`smooth`]: the Lorenz and Lorenz-Lyubimov-Zaks systems with an adaptive
//!   integrator, equilibria, bifurcation curves, Lyapunov exponents and
//!   attractor classification.
//! * [`diagrams`]: parameter sweeps, route diagrams and phase-portrait bundles.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bifurcation;
pub mod diagrams;
pub mod error;
pub mod export;
pub mod factor;
pub mod ode;
pub mod pwl;
pub mod roots;
pub mod section;
pub mod smooth;
pub mod state;

pub use error::{Error, Result};
pub use state::State3;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
