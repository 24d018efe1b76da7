mod diagrams;
mod flows;
mod maps;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Result};
use pwl_lorenz::bifurcation::to_gamma;
use pwl_lorenz::pwl::{PwlParams, RotationOrientation};
use pwl_lorenz::smooth::{LlzParams, LorenzParams, LLZ_ROUTE_PRODUCT};
use pwl_lorenz::State3;
use serde_json::{json, Map, Value};

use crate::config::Resolver;
use crate::output::Output;
use crate::{Cli, Cmd, MapArgs, PwlArgs, SmoothArgs, StartArgs};

pub const DEFAULT_LAMBDA: f64 = 0.294;
pub const DEFAULT_OMEGA: f64 = 2.0;
pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_DELTA: f64 = 0.588;
pub const DEFAULT_SIGMA: f64 = 10.0;
pub const DEFAULT_BETA: f64 = 8.0 / 3.0;

/// State shared by every subcommand.
pub struct Ctx {
    pub res: Resolver,
    pub out: Output,
    pub threads: usize,
    pub summary: Map<String, Value>,
}

impl Ctx {
    pub fn note(&mut self, key: &str, v: Value) {
        self.summary.insert(key.to_string(), v);
    }

    pub fn lambda_omega(&mut self, lambda: Option<f64>, omega: Option<f64>) -> Result<(f64, f64)> {
        Ok((
            self.res.f64("lambda", lambda, Some(DEFAULT_LAMBDA))?,
            self.res.f64("omega", omega, Some(DEFAULT_OMEGA))?,
        ))
    }

    /// `(nu, gammas)`: explicit `gamma` values, else `b` converted with
    /// `lambda`, `omega`.
    pub fn factor_params(&mut self, a: &MapArgs) -> Result<(f64, Vec<f64>)> {
        let nu = self.res.f64("nu", a.nu, None)?;
        if !a.gamma.is_empty() || self.res.lookup("gamma").is_some() {
            let g = self.res.list("gamma", a.gamma.clone(), None)?;
            return Ok((nu, g));
        }
        let b = self
            .res
            .f64("b", a.b, None)
            .map_err(|_| anyhow::anyhow!("missing parameter gamma (or b with lambda and omega)"))?;
        let (l, w) = self.lambda_omega(a.lambda, a.omega)?;
        Ok((nu, vec![to_gamma(b, l, w)]))
    }

    pub fn single_gamma(&mut self, a: &MapArgs) -> Result<(f64, f64)> {
        let (nu, g) = self.factor_params(a)?;
        match g.as_slice() {
            [g] => Ok((nu, *g)),
            _ => bail!("this command takes a single gamma"),
        }
    }

    pub fn pwl_params(&mut self, a: &PwlArgs) -> Result<PwlParams> {
        let nu = self.res.f64("nu", a.nu, None)?;
        let b = self.res.f64("b", a.b, None)?;
        self.pwl_params_at(a, nu, b)
    }

    pub fn pwl_params_at(&mut self, a: &PwlArgs, nu: f64, b: f64) -> Result<PwlParams> {
        let alpha = self.res.f64("alpha", a.alpha, Some(DEFAULT_ALPHA))?;
        let delta = self.res.f64("delta", a.delta, Some(DEFAULT_DELTA))?;
        let (lambda, omega) = self.lambda_omega(a.lambda, a.omega)?;
        let o = self.res.string(
            "orientation",
            a.orientation.clone(),
            Some("figure-consistent"),
        )?;
        let orientation = match o.as_str() {
            "figure-consistent" | "figure_consistent" => RotationOrientation::FigureConsistent,
            "as-printed" | "as_printed" => RotationOrientation::AsPrinted,
            other => bail!("unknown orientation {other:?}"),
        };
        Ok(PwlParams::new(
            alpha,
            delta,
            nu,
            omega,
            lambda,
            b,
            orientation,
        )?)
    }

    pub fn smooth_system(&mut self, a: &SmoothArgs) -> Result<SmoothSystem> {
        let system = self.res.string("system", a.system.clone(), Some("llz"))?;
        let sigma = self.res.f64("sigma", a.sigma, Some(DEFAULT_SIGMA))?;
        let beta = self.res.f64("beta", a.beta, Some(DEFAULT_BETA))?;
        match system.as_str() {
            "lorenz" => {
                let r = self.res.f64("r", a.r, None)?;
                Ok(SmoothSystem::Lorenz(LorenzParams::new(sigma, r, beta)?))
            }
            "llz" => {
                let d = self.res.f64("D", a.d, None)?;
                let route_r = if d > 0.0 {
                    Some(LLZ_ROUTE_PRODUCT / d)
                } else {
                    None
                };
                let r = self.res.f64("r", a.r, route_r)?;
                Ok(SmoothSystem::Llz(LlzParams::new(sigma, beta, r, d)?))
            }
            other => bail!("unknown smooth system {other:?} (expected lorenz or llz)"),
        }
    }

    pub fn start(&mut self, a: &StartArgs, default: State3) -> Result<State3> {
        Ok(State3::new(
            self.res.f64("x0", a.x0, Some(default.x))?,
            self.res.f64("y0", a.y0, Some(default.y))?,
            self.res.f64("z0", a.z0, Some(default.z))?,
        ))
    }

    /// Explicit start only if one coordinate was given somewhere.
    pub fn explicit_start(&mut self, a: &StartArgs) -> Result<Option<State3>> {
        let any = a.x0.is_some()
            || a.y0.is_some()
            || a.z0.is_some()
            || ["x0", "y0", "z0"]
                .iter()
                .any(|k| self.res.lookup(k).is_some());
        if any {
            self.start(a, State3::default()).map(Some)
        } else {
            Ok(None)
        }
    }
}

/// A Lorenz or LLZ parameter set.
#[derive(Debug, Clone, Copy)]
pub enum SmoothSystem {
    Lorenz(LorenzParams),
    Llz(LlzParams),
}

impl SmoothSystem {
    pub fn as_llz(&self) -> LlzParams {
        match self {
            SmoothSystem::Lorenz(p) => p.to_llz(),
            SmoothSystem::Llz(p) => *p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SmoothSystem::Lorenz(_) => "lorenz",
            SmoothSystem::Llz(_) => "llz",
        }
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    use crate::*;
    match cmd {
        Cmd::Factor(FactorCmd::Iterate { .. }) => "factor iterate",
        Cmd::Factor(FactorCmd::Orbit { .. }) => "factor orbit",
        Cmd::Factor(FactorCmd::Lyapunov { .. }) => "factor lyapunov",
        Cmd::Bif(BifCmd::Cascade { .. }) => "bif cascade",
        Cmd::Bif(BifCmd::Curve { .. }) => "bif curve",
        Cmd::Bif(BifCmd::Het { .. }) => "bif het",
        Cmd::Bif(BifCmd::BValues { .. }) => "bif b-values",
        Cmd::Map2d(Map2dCmd::Iterate { .. }) => "map2d iterate",
        Cmd::Flow(FlowCmd::Simulate { .. }) => "flow simulate",
        Cmd::Flow(FlowCmd::ReturnMap { .. }) => "flow return-map",
        Cmd::Flow(FlowCmd::VerifyMap { .. }) => "flow verify-map",
        Cmd::Flow(FlowCmd::Shoot { .. }) => "flow shoot",
        Cmd::Smooth(SmoothCmd::Simulate { .. }) => "smooth simulate",
        Cmd::Smooth(SmoothCmd::Equilibria { .. }) => "smooth equilibria",
        Cmd::Smooth(SmoothCmd::Curves { .. }) => "smooth curves",
        Cmd::Smooth(SmoothCmd::Classify { .. }) => "smooth classify",
        Cmd::Sweep(SweepCmd::TwoD { .. }) => "sweep 2d",
        Cmd::Sweep(SweepCmd::Route { .. }) => "sweep route",
        Cmd::Portrait(PortraitCmd::Export { .. }) => "portrait export",
    }
}

/// Runs one subcommand: resolves parameters, writes outputs and the
/// manifest, and prints a JSON summary.
pub fn run(cli: Cli) -> Result<()> {
    let mut res = Resolver::load(cli.preset.as_deref(), cli.config.as_deref())?;
    let out_dir = match cli.out {
        Some(p) => p,
        None => PathBuf::from(res.string("out", None, Some("out"))?),
    };
    let requested = res.usize("threads", cli.threads, Some(0))?;
    let threads = if requested == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        requested
    };
    let command = command_name(&cli.cmd);
    let mut ctx = Ctx {
        res,
        out: Output::create(&out_dir)?,
        threads,
        summary: Map::new(),
    };
    let result = match cli.cmd {
        Cmd::Factor(c) => maps::factor(&mut ctx, c),
        Cmd::Bif(c) => maps::bif(&mut ctx, c),
        Cmd::Map2d(c) => maps::map2d(&mut ctx, c),
        Cmd::Flow(c) => flows::flow(&mut ctx, c),
        Cmd::Smooth(c) => flows::smooth(&mut ctx, c),
        Cmd::Sweep(c) => diagrams::sweep(&mut ctx, c),
        Cmd::Portrait(c) => diagrams::portrait(&mut ctx, c),
    };
    let echo = json!({
        "preset": cli.preset,
        "config_file": cli.config.map(|p| p.display().to_string()),
        "out": out_dir.display().to_string(),
        "parameters": ctx.res.used(),
    });
    // The manifest is written even when the command failed after resolving.
    ctx.out.finish(command, echo, threads)?;
    result?;
    let summary = json!({
        "command": command,
        "out": out_dir.display().to_string(),
        "outputs": ctx.out.files(),
        "result": ctx.summary,
    });
    // A closed stdout (e.g. piped into `head`) is not an error of the run.
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&summary)?
    );
    Ok(())
}
