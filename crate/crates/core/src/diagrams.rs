//! Parameter sweeps, route diagrams and phase-portrait bundles.
//!
//! All parallel work runs on a dedicated rayon pool and is collected in input
//! order, so results do not depend on the number of threads.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bifurcation::{b_cr, to_gamma};
use crate::error::{Error, Result};
use crate::export::{num, opt, Table};
use crate::factor::{detect_attractor, Attractor1D, AttractorBudget, FactorParams};
use crate::pwl::{return_map_d, simulate, PwlParams, Region, SimOptions};
use crate::section::SectionPoint;
use crate::smooth::{
    classify_attractor, equilibria_llz, integrate_adaptive, route_point_llz, AttractorKind,
    Classification, ClassifyBudget, LlzParams, LorenzParams,
};
use crate::state::State3;

/// Section distance to the saddle (`|x|` on the section, `|s| / |e_r|` for
/// smooth flows) below which a cycle counts as near-homoclinic.
pub const NEAR_HOMOCLINIC: f64 = 0.05;

/// Coarse regime shared by the factor map, the piecewise-linear flow and the
/// LLZ system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum RegimeLabel {
    /// The foci `e_{l,r}` attract.
    FixedPoint,
    /// A cycle that is not its own mirror image (it has a mirror partner).
    CyclePair {
        period: usize,
    },
    /// A cycle equal to its own mirror image (figure-eight).
    SymmetricCycle {
        period: usize,
    },
    Chaotic,
    Undecided,
}

impl RegimeLabel {
    pub fn period(&self) -> Option<usize> {
        match *self {
            RegimeLabel::FixedPoint => Some(1),
            RegimeLabel::CyclePair { period } | RegimeLabel::SymmetricCycle { period } => {
                Some(period)
            }
            _ => None,
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeLabel::FixedPoint => write!(f, "fixed_point"),
            RegimeLabel::CyclePair { period } => write!(f, "cycle_pair_{period}"),
            RegimeLabel::SymmetricCycle { period } => write!(f, "symmetric_cycle_{period}"),
            RegimeLabel::Chaotic => write!(f, "chaotic"),
            RegimeLabel::Undecided => write!(f, "undecided"),
        }
    }
}

/// Label of a 1-D attractor on the section.
pub fn label_1d(a: &Attractor1D) -> RegimeLabel {
    match a.period {
        Some(_) if a.is_focus() => RegimeLabel::FixedPoint,
        Some(period) if a.self_symmetric => RegimeLabel::SymmetricCycle { period },
        Some(period) => RegimeLabel::CyclePair { period },
        None if a.ln_mu > 0.0 => RegimeLabel::Chaotic,
        None => RegimeLabel::Undecided,
    }
}

/// Label of a smooth-flow classification.
pub fn label_llz(c: &Classification) -> RegimeLabel {
    match c.kind {
        AttractorKind::FixedPoint => RegimeLabel::FixedPoint,
        AttractorKind::Periodic {
            period,
            symmetric: true,
        } => RegimeLabel::SymmetricCycle { period },
        AttractorKind::Periodic { period, .. } => RegimeLabel::CyclePair { period },
        AttractorKind::Chaotic => RegimeLabel::Chaotic,
        AttractorKind::Undecided => RegimeLabel::Undecided,
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        b = b.num_threads(threads);
    }
    b.build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

/// One sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("axis needs at least 2 points"));
        }
        if !(min < max) {
            return Err(Error::invalid(format!(
                "axis min {min} must be below max {max}"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
                }
            })
            .collect()
    }
}

/// A `(nu, b)` grid for the factor-map sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub nu: Axis,
    pub b: Axis,
    pub lambda: f64,
    pub omega: f64,
    pub budget: AttractorBudget,
    /// Initial point of every cell (near the right focus).
    pub seed: f64,
}

impl GridSpec {
    pub fn new(nu: Axis, b: Axis, lambda: f64, omega: f64) -> Result<Self> {
        if !(lambda > 0.0 && omega > 0.0) {
            return Err(Error::invalid("lambda and omega must be positive"));
        }
        if !(nu.min > 0.0) {
            return Err(Error::domain("nu", nu.min, "nu > 0"));
        }
        if !(b.min > 0.0 && b.max <= b_cr(lambda, omega)) {
            return Err(Error::domain("b", b.max, "0 < b <= b_cr"));
        }
        Ok(Self {
            nu,
            b,
            lambda,
            omega,
            budget: AttractorBudget::default(),
            seed: 0.999,
        })
    }
}

/// Cell attractor kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Periodic,
    /// No period up to the cap; `ln_mu` holds the Lyapunov average.
    ChaoticOrLong,
    Undecided,
}

/// One cell of a factor-map sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub nu: f64,
    pub b: f64,
    pub gamma: f64,
    pub kind: CellKind,
    pub label: RegimeLabel,
    pub period: Option<usize>,
    /// `ln |multiplier|` over one period, `-inf` for superstable cycles.
    pub ln_mu: f64,
    pub superstable: bool,
    /// `ln_mu` is a Lyapunov average rather than a cycle multiplier.
    pub lyapunov_average: bool,
    /// Error kind when the cell could not be evaluated.
    pub error: Option<&'static str>,
}

/// Row-major (`nu` outer, `b` inner) cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub spec: GridSpec,
    pub cells: Vec<SweepCell>,
}

fn sweep_cell(spec: &GridSpec, nu: f64, b: f64) -> SweepCell {
    let gamma = to_gamma(b, spec.lambda, spec.omega);
    let base = SweepCell {
        nu,
        b,
        gamma,
        kind: CellKind::Undecided,
        label: RegimeLabel::Undecided,
        period: None,
        ln_mu: f64::NAN,
        superstable: false,
        lyapunov_average: false,
        error: None,
    };
    let res =
        FactorParams::new(gamma, nu).and_then(|p| detect_attractor(&p, spec.seed, &spec.budget));
    match res {
        Ok(a) => SweepCell {
            kind: if a.period.is_some() {
                CellKind::Periodic
            } else {
                CellKind::ChaoticOrLong
            },
            label: label_1d(&a),
            period: a.period,
            ln_mu: a.ln_mu,
            superstable: a.superstable,
            lyapunov_average: a.period.is_none(),
            ..base
        },
        Err(e) => SweepCell {
            error: Some(e.kind()),
            ..base
        },
    }
}

/// Attractor type and multiplier of the factor map over a `(nu, b)` grid.
/// `threads == 0` uses every available core.
pub fn sweep2d_factor(spec: &GridSpec, threads: usize) -> Result<Sweep> {
    let nus = spec.nu.values();
    let bs = spec.b.values();
    let coords: Vec<(f64, f64)> = nus
        .iter()
        .flat_map(|&nu| bs.iter().map(move |&b| (nu, b)))
        .collect();
    let cells = pool(threads)?.install(|| {
        coords
            .par_iter()
            .map(|&(nu, b)| sweep_cell(spec, nu, b))
            .collect()
    });
    Ok(Sweep { spec: *spec, cells })
}

/// Long-format sweep table.
pub fn sweep_table(s: &Sweep) -> Table {
    let mut t = Table::new(&[
        "nu", "b", "gamma", "kind", "label", "period", "ln_mu", "flags",
    ]);
    for c in &s.cells {
        let mut flags = Vec::new();
        if c.superstable {
            flags.push("superstable");
        }
        if c.lyapunov_average {
            flags.push("lyapunov_average");
        }
        if let Some(e) = c.error {
            flags.push(e);
        }
        let kind = match c.kind {
            CellKind::Periodic => "periodic",
            CellKind::ChaoticOrLong => "chaotic_or_long",
            CellKind::Undecided => "undecided",
        };
        t.rows.push(vec![
            num(c.nu),
            num(c.b),
            num(c.gamma),
            kind.into(),
            c.label.to_string(),
            opt(c.period),
            num(c.ln_mu),
            flags.join(";"),
        ]);
    }
    t
}

/// System followed along a one-parameter route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum RouteSystem {
    /// Factor map at `gamma = b e^{-3 pi lambda / (2 omega)}`; the route
    /// parameter is `b`.
    Factor { nu: f64, lambda: f64, omega: f64 },
    /// Flow returns to the section `D`; the route parameter replaces `b`.
    Pwl { params: PwlParams },
    /// LLZ on `r = 0.881 / D`; the route parameter is `D`.
    Llz,
}

/// Initial condition near `e_r` (red) or `e_l` (blue).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    Red,
    Blue,
}

impl Seed {
    pub fn sign(self) -> f64 {
        match self {
            Seed::Red => 1.0,
            Seed::Blue => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Seed::Red => "red",
            Seed::Blue => "blue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteSpec {
    pub system: RouteSystem,
    /// Map iterations (factor) or returns (flow) discarded per sample.
    pub transient: usize,
    /// Points kept per trace; also the period-detection window.
    pub record: usize,
    pub tol: f64,
    pub llz_budget: ClassifyBudget,
}

impl RouteSpec {
    pub fn new(system: RouteSystem) -> Self {
        let (transient, record) = match system {
            RouteSystem::Factor { .. } => (10_000, 512),
            _ => (2_000, 256),
        };
        Self {
            system,
            transient,
            record,
            tol: 1e-8,
            llz_budget: ClassifyBudget::default(),
        }
    }
}

/// One seed at one route parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteSample {
    pub param: f64,
    pub seed: Seed,
    pub label: RegimeLabel,
    pub near_homoclinic: bool,
    /// Section `x` values of the attractor (one period when periodic).
    pub trace: Vec<f64>,
    pub lyap1: Option<f64>,
    /// Error kind that ended the sample early.
    pub error: Option<&'static str>,
}

fn sample_from_trace(param: f64, seed: Seed, xs: &[f64], tol: f64, ln_mu: f64) -> RouteSample {
    let cap = xs.len() / 2;
    let n = xs.len();
    let period = (1..=cap).find(|&q| (0..n - q).all(|i| (xs[i + q] - xs[i]).abs() <= tol));
    let (label, trace, near) = match period {
        Some(q) => {
            let pts = xs[n - q..].to_vec();
            let a = Attractor1D {
                period: Some(q),
                self_symmetric: pts
                    .iter()
                    .all(|&a| pts.iter().any(|&b| (a + b).abs() <= 1e3 * tol)),
                superstable: false,
                ln_mu: f64::NAN,
                points: pts.clone(),
            };
            let near = pts.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())) < NEAR_HOMOCLINIC;
            (label_1d(&a), pts, near)
        }
        None => {
            let label = if ln_mu > 0.0 {
                RegimeLabel::Chaotic
            } else {
                RegimeLabel::Undecided
            };
            (label, xs.to_vec(), false)
        }
    };
    RouteSample {
        param,
        seed,
        label,
        near_homoclinic: near,
        trace,
        lyap1: None,
        error: None,
    }
}

fn failed(param: f64, seed: Seed, e: &Error) -> RouteSample {
    RouteSample {
        param,
        seed,
        label: RegimeLabel::Undecided,
        near_homoclinic: false,
        trace: Vec::new(),
        lyap1: None,
        error: Some(e.kind()),
    }
}

fn route_sample(spec: &RouteSpec, param: f64, seed: Seed) -> RouteSample {
    let s = seed.sign();
    match spec.system {
        RouteSystem::Factor { nu, lambda, omega } => {
            let gamma = to_gamma(param, lambda, omega);
            let budget = AttractorBudget {
                transient: spec.transient,
                period_cap: spec.record / 2,
                tol: spec.tol,
            };
            match FactorParams::new(gamma, nu)
                .and_then(|p| detect_attractor(&p, s * 0.999, &budget))
            {
                Ok(a) => {
                    let mut out = sample_from_trace(param, seed, &a.points, spec.tol, a.ln_mu);
                    if a.period.is_some() {
                        out.label = label_1d(&a);
                        out.trace = a.points.clone();
                        out.near_homoclinic =
                            a.points.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
                                < NEAR_HOMOCLINIC;
                    }
                    out.lyap1 = Some(a.ln_mu / a.period.unwrap_or(1) as f64);
                    out
                }
                Err(e) => failed(param, seed, &e),
            }
        }
        RouteSystem::Pwl { params } => {
            let p = match params.with_b(param) {
                Ok(p) => p,
                Err(e) => return failed(param, seed, &e),
            };
            let mut pt = SectionPoint::new(s * 0.999, s * 0.999);
            let mut xs = Vec::with_capacity(spec.record);
            for k in 0..spec.transient + spec.record {
                match return_map_d(pt, &p) {
                    Ok(next) => pt = next,
                    // The orbit spiralled into a focus without returning.
                    Err(Error::LeftDomain { x, z, .. })
                        if (x.abs() - 1.0).abs() < 1e-6 && (z - p.b()).abs() < 1e-6 =>
                    {
                        let mut out =
                            sample_from_trace(param, seed, &[x.signum(); 2], spec.tol, f64::NAN);
                        out.label = RegimeLabel::FixedPoint;
                        return out;
                    }
                    Err(e) => return failed(param, seed, &e),
                }
                if k >= spec.transient {
                    xs.push(pt.x);
                }
            }
            let f = FactorParams::new_unchecked(p.gamma(), p.nu());
            let ln_mu = xs
                .iter()
                .map(|&x| {
                    f.deriv(x)
                        .map(|d| d.abs().ln())
                        .unwrap_or(f64::NEG_INFINITY)
                })
                .sum::<f64>()
                / xs.len().max(1) as f64;
            let mut out = sample_from_trace(param, seed, &xs, spec.tol, ln_mu);
            out.lyap1 = Some(ln_mu);
            out
        }
        RouteSystem::Llz => {
            let run = || -> Result<RouteSample> {
                let p = route_point_llz(param)?;
                let eq = equilibria_llz(&p)?;
                let e_r = eq
                    .get(2)
                    .ok_or_else(|| Error::invalid("foci do not exist on this route point"))?
                    .location;
                let s0 = e_r + State3::new(0.1, 0.1, 0.1);
                let s0 = if s > 0.0 { s0 } else { s0.mirror() };
                let c = classify_attractor(&p, s0, &spec.llz_budget)?;
                let pts = if c.cycle.is_empty() {
                    &c.recent
                } else {
                    &c.cycle
                };
                Ok(RouteSample {
                    param,
                    seed,
                    label: label_llz(&c),
                    near_homoclinic: c.near_homoclinic,
                    trace: pts.iter().map(|s| s.x).collect(),
                    lyap1: c.lyap1,
                    error: None,
                })
            };
            run().unwrap_or_else(|e| failed(param, seed, &e))
        }
    }
}

/// Post-transient traces from both seeds at every route parameter, ordered
/// by parameter then seed (red first).
pub fn diagram1d_route(
    spec: &RouteSpec,
    params: &[f64],
    threads: usize,
) -> Result<Vec<RouteSample>> {
    let jobs: Vec<(f64, Seed)> = params
        .iter()
        .flat_map(|&v| [(v, Seed::Red), (v, Seed::Blue)])
        .collect();
    Ok(pool(threads)?.install(|| {
        jobs.par_iter()
            .map(|&(v, seed)| route_sample(spec, v, seed))
            .collect()
    }))
}

/// Long-format route table: one row per trace point.
pub fn route_table(samples: &[RouteSample]) -> Table {
    let mut t = Table::new(&[
        "param",
        "seed",
        "label",
        "period",
        "near_homoclinic",
        "lyap1",
        "index",
        "x",
        "error",
    ]);
    for s in samples {
        let row = |i: String, x: String| {
            vec![
                num(s.param),
                s.seed.as_str().into(),
                s.label.to_string(),
                opt(s.label.period()),
                s.near_homoclinic.to_string(),
                s.lyap1.map(num).unwrap_or_default(),
                i,
                x,
                s.error.unwrap_or("").into(),
            ]
        };
        if s.trace.is_empty() {
            t.rows.push(row(String::new(), String::new()));
        }
        for (i, x) in s.trace.iter().enumerate() {
            t.rows.push(row(i.to_string(), num(*x)));
        }
    }
    t
}

/// LLZ route summary: `D, r, seed, label, classification, lyap1`.
pub fn llz_route_table(samples: &[RouteSample]) -> Table {
    let mut t = Table::new(&["D", "r", "seed", "label", "classification", "lyap1"]);
    for s in samples {
        let class = match s.label {
            RegimeLabel::FixedPoint => "fixed_point".to_string(),
            RegimeLabel::CyclePair { period } | RegimeLabel::SymmetricCycle { period } => {
                format!("period_{period}")
            }
            RegimeLabel::Chaotic => "chaotic".into(),
            RegimeLabel::Undecided => "undecided".into(),
        };
        t.rows.push(vec![
            num(s.param),
            num(crate::smooth::LLZ_ROUTE_PRODUCT / s.param),
            s.seed.as_str().into(),
            s.label.to_string(),
            class,
            s.lyap1.map(num).unwrap_or_default(),
        ]);
    }
    t
}

/// Largest distance from a point of `a` to the nearest point of `b`.
pub fn set_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .map(|x| b.iter().fold(f64::INFINITY, |m, y| m.min((x - y).abs())))
        .fold(0.0, f64::max)
}

/// System for phase-portrait export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum PortraitSystem {
    Pwl { params: PwlParams },
    Lorenz { params: LorenzParams },
    Llz { params: LlzParams },
}

/// One sampled trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitTrack {
    pub seed: State3,
    #[serde(skip)]
    pub table: Table,
    pub points: usize,
    /// Why the trajectory ended before the horizon, if it did.
    pub termination: Option<String>,
}

/// Trajectories plus metadata for one phase portrait.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitBundle {
    pub label: Option<String>,
    pub system: PortraitSystem,
    pub horizon: f64,
    pub dt: f64,
    pub tracks: Vec<PortraitTrack>,
}

/// Samples trajectories from every seed at spacing `dt` up to `horizon`.
pub fn phase_portrait_export(
    system: PortraitSystem,
    seeds: &[State3],
    horizon: f64,
    dt: f64,
    label: Option<String>,
) -> Result<PortraitBundle> {
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(Error::invalid("horizon and dt must be positive"));
    }
    let mut tracks = Vec::with_capacity(seeds.len());
    for &s0 in seeds {
        let (table, termination) = match system {
            PortraitSystem::Pwl { params } => {
                let opts = SimOptions {
                    max_time: horizon,
                    ..Default::default()
                };
                let tr = simulate(s0, &params, &opts)?;
                let samples: Vec<(f64, State3, Region)> = tr.sample(dt, &params);
                let term = match tr.termination {
                    crate::pwl::Termination::Horizon => None,
                    other => Some(format!("{other:?}")),
                };
                (crate::export::pwl_trajectory_table(&samples), term)
            }
            PortraitSystem::Lorenz { params } => {
                let sol = integrate_adaptive(&params, s0, horizon, 1e-9)?;
                (
                    crate::export::smooth_trajectory_table(&sol.sample(dt)),
                    None,
                )
            }
            PortraitSystem::Llz { params } => {
                let sol = integrate_adaptive(&params, s0, horizon, 1e-9)?;
                (
                    crate::export::smooth_trajectory_table(&sol.sample(dt)),
                    None,
                )
            }
        };
        tracks.push(PortraitTrack {
            seed: s0,
            points: table.len(),
            table,
            termination,
        });
    }
    Ok(PortraitBundle {
        label,
        system,
        horizon,
        dt,
        tracks,
    })
}

/// Route point labels of the piecewise-linear comparison route at
/// `nu = 1.25`, as `(label, b)`.
pub const PWL_ROUTE_POINTS: [(char, f64); 7] = [
    ('a', 1.4),
    ('b', 1.8),
    ('c', 2.0),
    ('d', 2.3),
    ('e', 2.6),
    ('f', 2.65),
    ('g', 3.8),
];

/// Route points of the `nu = 0.65` comparison with the Lorenz system, as
/// `(label, b, r)`.
pub const LORENZ_ROUTE_POINTS: [(char, f64, f64); 6] = [
    ('a', 1.5, 10.0),
    ('b', 2.0, 13.927),
    ('c', 2.3, 20.0),
    ('d', 2.556, 24.06),
    ('e', 2.8, 24.4),
    ('f', 3.4, 28.0),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis::new(1.0, 2.0, 5).unwrap();
        let v = a.values();
        assert_eq!(v, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(Axis::new(1.0, 1.0, 3).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn empty_seed_list_gives_empty_bundle() {
        let p = PwlParams::reference(0.65, 3.4).unwrap();
        let b =
            phase_portrait_export(PortraitSystem::Pwl { params: p }, &[], 10.0, 0.1, None).unwrap();
        assert!(b.tracks.is_empty());
    }
}
