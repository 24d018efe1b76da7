use anyhow::{bail, Result};
use pwl_lorenz::diagrams::Axis;
use pwl_lorenz::export::{
    crossing_table, num, pwl_trajectory_table, smooth_trajectory_table, Table,
};
use pwl_lorenz::pwl::{
    locate_primary_homoclinic, return_map_d, simulate, unstable_manifold_shoot, SimOptions,
};
use pwl_lorenz::section::SectionPoint;
use pwl_lorenz::smooth::{
    classify_attractor, curve_ah, curve_nu1, curve_pf, equilibria_llz, integrate_adaptive, l_nu1,
    l_pf, section_pi_crossings, ClassifyBudget,
};
use pwl_lorenz::State3;
use serde_json::json;

use super::{Ctx, SmoothSystem, DEFAULT_BETA, DEFAULT_SIGMA};
use crate::{CheckFailed, FlowCmd, SmoothCmd};

fn cell_centres(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -1.0 + (2.0 * i as f64 + 1.0) / n as f64)
        .collect()
}

pub fn flow(ctx: &mut Ctx, cmd: FlowCmd) -> Result<()> {
    match cmd {
        FlowCmd::Simulate {
            pwl,
            start,
            t,
            dt,
            max_returns,
        } => {
            let p = ctx.pwl_params(&pwl)?;
            let s0 = ctx.start(&start, State3::new(1e-6, 0.0, 0.0))?;
            let t = ctx.res.f64("t", t, Some(100.0))?;
            let dt = ctx.res.f64("dt", dt, Some(0.01))?;
            let max_returns = match max_returns {
                Some(v) => Some(v),
                None if ctx.res.lookup("max_returns").is_some() => {
                    Some(ctx.res.usize("max_returns", None, None)?)
                }
                None => None,
            };
            let opts = SimOptions {
                max_time: t,
                max_returns,
                ..Default::default()
            };
            let tr = simulate(s0, &p, &opts)?;
            ctx.out
                .table("trajectory.csv", &pwl_trajectory_table(&tr.sample(dt, &p)))?;
            let mut rt = Table::new(&["t", "x", "y", "z", "inside_d"]);
            for h in &tr.returns {
                rt.push(vec![
                    num(h.t),
                    num(h.state.x),
                    num(h.state.y),
                    num(h.state.z),
                    h.inside_d.to_string(),
                ])?;
            }
            ctx.out.table("returns.csv", &rt)?;
            let meta = json!({
                "params": p,
                "start": s0,
                "segments": tr.segments.len(),
                "returns": tr.returns.len(),
                "total_time": tr.total_time,
                "termination": tr.termination,
                "flags": tr.flags,
            });
            ctx.out.json("simulate.json", &meta)?;
            ctx.note("termination", json!(tr.termination));
            ctx.note("returns", json!(tr.returns.len()));
        }
        FlowCmd::ReturnMap { pwl, x, y, grid } => {
            let p = ctx.pwl_params(&pwl)?;
            let pts: Vec<SectionPoint> = match (x, y) {
                (Some(x), Some(y)) => vec![SectionPoint::new(x, y)],
                (None, None) => {
                    let n = ctx.res.usize("grid", grid, Some(10))?;
                    let c = cell_centres(n);
                    c.iter()
                        .flat_map(|&x| c.iter().map(move |&y| SectionPoint::new(x, y)))
                        .collect()
                }
                _ => bail!("give both --x and --y, or neither"),
            };
            let mut t = Table::new(&["x_in", "y_in", "x_out", "y_out", "error"]);
            let mut failed = 0usize;
            for pt in &pts {
                match return_map_d(*pt, &p) {
                    Ok(o) => t.push(vec![
                        num(pt.x),
                        num(pt.y),
                        num(o.x),
                        num(o.y),
                        String::new(),
                    ])?,
                    Err(e) => {
                        failed += 1;
                        t.push(vec![
                            num(pt.x),
                            num(pt.y),
                            String::new(),
                            String::new(),
                            e.kind().into(),
                        ])?
                    }
                }
            }
            ctx.out.table("return_map.csv", &t)?;
            ctx.note("points", json!(pts.len()));
            ctx.note("failed", json!(failed));
        }
        FlowCmd::VerifyMap { pwl, grid, tol } => {
            let p = ctx.pwl_params(&pwl)?;
            let n = ctx.res.usize("grid", grid, Some(20))?;
            let tol = ctx.res.f64("verify_tol", tol, Some(1e-6))?;
            ctx.out.tolerance("verify_tol", tol);
            let map = p.section_params()?;
            let c = cell_centres(n);
            let mut t = Table::new(&[
                "x", "y", "x_flow", "y_flow", "x_map", "y_map", "residual", "error",
            ]);
            let mut worst = 0.0f64;
            let mut errors = 0usize;
            for &x in &c {
                for &y in &c {
                    let pt = SectionPoint::new(x, y);
                    let analytic = map.eval(pt)?.point;
                    match return_map_d(pt, &p) {
                        Ok(f) => {
                            let r = (f.x - analytic.x).abs().max((f.y - analytic.y).abs());
                            worst = worst.max(r);
                            t.push(vec![
                                num(x),
                                num(y),
                                num(f.x),
                                num(f.y),
                                num(analytic.x),
                                num(analytic.y),
                                num(r),
                                String::new(),
                            ])?;
                        }
                        Err(e) => {
                            errors += 1;
                            t.push(vec![
                                num(x),
                                num(y),
                                String::new(),
                                String::new(),
                                num(analytic.x),
                                num(analytic.y),
                                String::new(),
                                e.kind().into(),
                            ])?;
                        }
                    }
                }
            }
            let pass = errors == 0 && worst < tol;
            ctx.out.table("verify_map.csv", &t)?;
            ctx.out.json(
                "verify_map.json",
                &json!({
                    "params": p, "grid": n, "points": n * n, "errors": errors,
                    "max_residual": worst, "tol": tol, "pass": pass,
                }),
            )?;
            ctx.note("max_residual", json!(worst));
            ctx.note("errors", json!(errors));
            ctx.note("pass", json!(pass));
            if !pass {
                bail!(CheckFailed(format!(
                    "flow return map differs from the section map: max residual {worst:e}, {errors} failed points"
                )));
            }
        }
        FlowCmd::Shoot {
            pwl,
            eps,
            side,
            lo,
            hi,
        } => {
            let eps = ctx.res.f64("eps", eps, Some(1e-9))?;
            let side = ctx.res.f64("side", side, Some(1.0))?;
            let lo = lo.or_else(|| ctx.res.lookup("lo").and_then(|v| v.as_f64()));
            let hi = hi.or_else(|| ctx.res.lookup("hi").and_then(|v| v.as_f64()));
            if let (Some(lo), Some(hi)) = (lo, hi) {
                let nu = ctx.res.f64("nu", pwl.nu, None)?;
                let p = ctx.pwl_params_at(&pwl, nu, 0.5 * (lo + hi))?;
                let xtol = 1e-12;
                ctx.out.tolerance("bisect_xtol", xtol);
                let b = locate_primary_homoclinic(&p, lo, hi, xtol)?;
                ctx.out.json(
                    "shoot.json",
                    &json!({"lo": lo, "hi": hi, "b_homoclinic": b}),
                )?;
                ctx.note("b_homoclinic", json!(b));
                return Ok(());
            }
            let p = ctx.pwl_params(&pwl)?;
            let s = unstable_manifold_shoot(eps, side, &p)?;
            let samples = s.trajectory.sample(0.01, &p);
            ctx.out
                .table("shoot_trajectory.csv", &pwl_trajectory_table(&samples))?;
            ctx.out.json(
                "shoot.json",
                &json!({"params": p, "eps": eps, "side": side, "split": s.split,
                        "first_return": s.trajectory.returns.first()}),
            )?;
            ctx.note("split", json!(s.split));
        }
    }
    Ok(())
}

pub fn smooth(ctx: &mut Ctx, cmd: SmoothCmd) -> Result<()> {
    match cmd {
        SmoothCmd::Simulate {
            sys,
            start,
            t,
            dt,
            tol,
        } => {
            let s = ctx.smooth_system(&sys)?;
            let s0 = ctx.start(&start, State3::new(0.1, 0.1, 0.1))?;
            let t = ctx.res.f64("t", t, Some(50.0))?;
            let dt = ctx.res.f64("dt", dt, Some(0.01))?;
            let tol = ctx.res.f64("tol", tol, Some(1e-9))?;
            ctx.out.tolerance("ode_tol", tol);
            let sol = match s {
                SmoothSystem::Lorenz(p) => integrate_adaptive(&p, s0, t, tol)?,
                SmoothSystem::Llz(p) => integrate_adaptive(&p, s0, t, tol)?,
            };
            ctx.out
                .table("trajectory.csv", &smooth_trajectory_table(&sol.sample(dt)))?;
            match section_pi_crossings(&sol, &s.as_llz()) {
                Ok(cs) => {
                    ctx.out.table("crossings.csv", &crossing_table(&cs))?;
                    ctx.note("crossings", json!(cs.len()));
                }
                Err(e) => ctx.note("crossings_error", json!(e.to_string())),
            }
            ctx.note("system", json!(s.name()));
            ctx.note("steps", json!(sol.steps.len()));
        }
        SmoothCmd::Equilibria { sys } => {
            let s = ctx.smooth_system(&sys)?;
            let eq = equilibria_llz(&s.as_llz())?;
            let mut t = Table::new(&[
                "name",
                "x",
                "y",
                "z",
                "ev1_re",
                "ev1_im",
                "ev2_re",
                "ev2_im",
                "ev3_re",
                "ev3_im",
                "saddle_value",
                "classification",
                "residual",
            ]);
            for e in &eq {
                let mut row = vec![
                    e.name.to_string(),
                    num(e.location.x),
                    num(e.location.y),
                    num(e.location.z),
                ];
                for z in e.eigenvalues {
                    row.push(num(z.re));
                    row.push(num(z.im));
                }
                row.push(num(e.saddle_value));
                row.push(
                    serde_json::to_value(e.classification)?
                        .as_str()
                        .unwrap_or("")
                        .to_string(),
                );
                row.push(num(e.residual));
                t.push(row)?;
            }
            ctx.out.table("equilibria.csv", &t)?;
            ctx.out.json("equilibria.json", &eq)?;
            ctx.note("count", json!(eq.len()));
        }
        SmoothCmd::Curves {
            sigma,
            beta,
            min,
            max,
            count,
        } => {
            let sigma = ctx.res.f64("sigma", sigma, Some(DEFAULT_SIGMA))?;
            let beta = ctx.res.f64("beta", beta, Some(DEFAULT_BETA))?;
            let min = ctx.res.f64("min", min, Some(0.0))?;
            let max = ctx.res.f64("max", max, Some(0.25))?;
            let count = ctx.res.usize("count", count, Some(101))?;
            let axis = Axis::new(min, max, count)?;
            let mut t = Table::new(&["D", "kind", "r", "residual", "error"]);
            for d in axis.values() {
                match curve_pf(d) {
                    Ok(r) => t.push(vec![
                        num(d),
                        "pf".into(),
                        num(r),
                        num(l_pf(d, r)),
                        String::new(),
                    ])?,
                    Err(e) => t.push(vec![
                        num(d),
                        "pf".into(),
                        String::new(),
                        String::new(),
                        e.kind().into(),
                    ])?,
                }
                match curve_nu1(d, sigma, beta) {
                    Ok(rs) => {
                        for r in rs {
                            t.push(vec![
                                num(d),
                                "nu1".into(),
                                num(r),
                                num(l_nu1(d, r, sigma, beta)),
                                String::new(),
                            ])?;
                        }
                    }
                    Err(e) => t.push(vec![
                        num(d),
                        "nu1".into(),
                        String::new(),
                        String::new(),
                        e.kind().into(),
                    ])?,
                }
                match curve_ah(d, sigma, beta) {
                    Ok(r) => t.push(vec![
                        num(d),
                        "ah".into(),
                        num(r),
                        String::new(),
                        String::new(),
                    ])?,
                    Err(e) => t.push(vec![
                        num(d),
                        "ah".into(),
                        String::new(),
                        String::new(),
                        e.kind().into(),
                    ])?,
                }
            }
            ctx.out.table("llz_curves.csv", &t)?;
            ctx.note("rows", json!(t.len()));
            ctx.note("ah_at_zero", json!(curve_ah(0.0, sigma, beta).ok()));
        }
        SmoothCmd::Classify {
            sys,
            start,
            transient,
            window,
            tol,
        } => {
            let s = ctx.smooth_system(&sys)?;
            let p = s.as_llz();
            let default_start = equilibria_llz(&p)?
                .get(2)
                .map(|e| e.location + State3::new(0.1, 0.1, 0.1))
                .unwrap_or(State3::new(0.1, 0.1, 0.1));
            let s0 = ctx.start(&start, default_start)?;
            let d = ClassifyBudget::default();
            let budget = ClassifyBudget {
                transient: ctx.res.f64("transient", transient, Some(d.transient))?,
                window: ctx.res.f64("window", window, Some(d.window))?,
                tol: ctx.res.f64("tol", tol, Some(d.tol))?,
                ..d
            };
            ctx.out.tolerance("ode_tol", budget.tol);
            ctx.out.tolerance("cluster_rtol", budget.cluster_rtol);
            let c = classify_attractor(&p, s0, &budget)?;
            let label = pwl_lorenz::diagrams::label_llz(&c);
            ctx.out.json(
                "classify.json",
                &json!({"params": p, "start": s0, "budget": budget,
                        "label": label.to_string(), "classification": c}),
            )?;
            ctx.note("label", json!(label.to_string()));
            ctx.note("kind", json!(c.kind));
            ctx.note("lyap1", json!(c.lyap1));
            ctx.note("near_homoclinic", json!(c.near_homoclinic));
        }
    }
    Ok(())
}
