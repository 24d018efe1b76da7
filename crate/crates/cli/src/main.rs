//! `pwlorenz`: command-line front end of the pwl-lorenz toolkit.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(
    name = "pwlorenz",
    version,
    about = "Piecewise-linear Lorenz-type flows, maps and diagrams"
)]
pub struct Cli {
    /// Output directory (flag, then PWLORENZ_OUT, then the config file, then `out`).
    #[arg(long, global = true, env = "PWLORENZ_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; 0 or absent uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Config file, JSON object or `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Named parameter set.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// One-dimensional factor map.
    #[command(subcommand)]
    Factor(FactorCmd),
    /// Bifurcation values of the factor map and the flow.
    #[command(subcommand)]
    Bif(BifCmd),
    /// Two-dimensional section map.
    #[command(subcommand)]
    Map2d(Map2dCmd),
    /// Piecewise-linear flow.
    #[command(subcommand)]
    Flow(FlowCmd),
    /// Lorenz and LLZ systems.
    #[command(subcommand)]
    Smooth(SmoothCmd),
    /// Parameter sweeps and route diagrams.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Phase-portrait data.
    #[command(subcommand)]
    Portrait(PortraitCmd),
}

/// Factor-map parameters: `gamma` directly, or `b` with `lambda`, `omega`.
#[derive(Debug, Clone, Default, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub nu: Option<f64>,
    /// Splitting parameter; repeat or comma-separate for several values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub gamma: Vec<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
}

/// Piecewise-linear flow parameters.
#[derive(Debug, Clone, Default, Args)]
pub struct PwlArgs {
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `figure-consistent` (default) or `as-printed`.
    #[arg(long)]
    pub orientation: Option<String>,
}

/// Lorenz / LLZ parameters.
#[derive(Debug, Clone, Default, Args)]
pub struct SmoothArgs {
    /// `lorenz` or `llz`.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Defaults to `0.881 / D` for LLZ.
    #[arg(long)]
    pub r: Option<f64>,
    /// LLZ parameter `D`.
    #[arg(long = "d")]
    pub d: Option<f64>,
}

/// Initial state.
#[derive(Debug, Clone, Default, Args)]
pub struct StartArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z0: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum FactorCmd {
    /// Iterates after a burn-in.
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
    /// Periodic orbits with a given itinerary.
    Orbit {
        #[command(flatten)]
        map: MapArgs,
        /// Word over `+`, `-` (use `--word=-+` for words starting with `-`).
        #[arg(long)]
        word: Option<String>,
    },
    /// Lyapunov exponent.
    Lyapunov {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum BifCmd {
    /// Homoclinic/pitchfork cascade at one `nu`.
    Cascade {
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Every bifurcation curve sampled over a list of `nu`.
    Curve {
        #[arg(long, value_delimiter = ',')]
        nus: Vec<f64>,
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Heteroclinic value (`nu < 1`) or homoclinic-to-cycle value (`nu > 1`).
    Het {
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        lead_max: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Flow parameter `b` of the main bifurcations.
    BValues {
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Map2dCmd {
    /// Iterates the section map.
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        alpha: Option<f64>,
        /// `y` contraction; defaults to `exp(-3 pi delta / (2 omega))`.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y0: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FlowCmd {
    /// Event-driven trajectory.
    Simulate {
        #[command(flatten)]
        pwl: PwlArgs,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        max_returns: Option<usize>,
    },
    /// Return map of the section from the flow, at one point or on a grid.
    ReturnMap {
        #[command(flatten)]
        pwl: PwlArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Compares the flow return map with the analytic section map.
    VerifyMap {
        #[command(flatten)]
        pwl: PwlArgs,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Unstable separatrix shot; `--lo/--hi` bisect the split over `b`.
    Shoot {
        #[command(flatten)]
        pwl: PwlArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        side: Option<f64>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SmoothCmd {
    /// Adaptive trajectory plus section crossings.
    Simulate {
        #[command(flatten)]
        sys: SmoothArgs,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Equilibria with spectra.
    Equilibria {
        #[command(flatten)]
        sys: SmoothArgs,
    },
    /// Pitchfork, unit-saddle-index and Andronov-Hopf curves in `(D, r)`.
    Curves {
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Attractor type reached from a seed.
    Classify {
        #[command(flatten)]
        sys: SmoothArgs,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long)]
        transient: Option<f64>,
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepCmd {
    /// Factor-map attractors over a `(nu, b)` grid.
    #[command(name = "2d")]
    TwoD {
        #[arg(long)]
        nu_min: Option<f64>,
        #[arg(long)]
        nu_max: Option<f64>,
        #[arg(long)]
        nu_count: Option<usize>,
        #[arg(long)]
        b_min: Option<f64>,
        #[arg(long)]
        b_max: Option<f64>,
        #[arg(long)]
        b_count: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
    /// One-parameter route of the factor map, the flow or LLZ.
    Route {
        /// `factor`, `pwl` or `llz`.
        #[arg(long)]
        system: Option<String>,
        #[command(flatten)]
        pwl: PwlArgs,
        /// Explicit route parameters (`b`, or `D` for LLZ).
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Labels of the explicit values.
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PortraitCmd {
    /// Trajectory bundles of the preset portraits, or of one system from flags.
    Export {
        #[command(flatten)]
        pwl: PwlArgs,
        #[command(flatten)]
        sys: SmoothArgs,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// A check that ran but did not pass.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn error_json(e: &anyhow::Error) -> Value {
    let message = format!("{e:#}");
    for cause in e.chain() {
        if let Some(lib) = cause.downcast_ref::<pwl_lorenz::Error>() {
            let mut v = serde_json::to_value(lib).unwrap_or_else(|_| json!({}));
            if let Value::Object(m) = &mut v {
                m.insert("kind".into(), json!(lib.kind()));
                m.insert("message".into(), json!(message));
            }
            return json!({ "error": v });
        }
        if cause.downcast_ref::<CheckFailed>().is_some() {
            return json!({"error": {"kind": "check_failed", "message": message}});
        }
    }
    json!({"error": {"kind": "cli", "message": message}})
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
