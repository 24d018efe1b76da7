use anyhow::{anyhow, bail, Result};
use pwl_lorenz::diagrams::{
    diagram1d_route, llz_route_table, phase_portrait_export, route_table, sweep2d_factor,
    sweep_table, Axis, GridSpec, PortraitSystem, RegimeLabel, RouteSample, RouteSpec, RouteSystem,
};
use pwl_lorenz::smooth::{LlzParams, LorenzParams};
use pwl_lorenz::State3;
use serde_json::{json, Map, Value};

use super::{Ctx, DEFAULT_BETA, DEFAULT_SIGMA};
use crate::{PortraitCmd, PwlArgs, SweepCmd};

fn label_counts<'a>(labels: impl Iterator<Item = &'a RegimeLabel>) -> Value {
    let mut m = std::collections::BTreeMap::<String, usize>::new();
    for l in labels {
        *m.entry(l.to_string()).or_default() += 1;
    }
    json!(m)
}

pub fn sweep(ctx: &mut Ctx, cmd: SweepCmd) -> Result<()> {
    match cmd {
        SweepCmd::TwoD {
            nu_min,
            nu_max,
            nu_count,
            b_min,
            b_max,
            b_count,
            lambda,
            omega,
        } => {
            let nu = Axis::new(
                ctx.res.f64("nu_min", nu_min, Some(1.01))?,
                ctx.res.f64("nu_max", nu_max, Some(1.99))?,
                ctx.res.usize("nu_count", nu_count, Some(100))?,
            )?;
            let b = Axis::new(
                ctx.res.f64("b_min", b_min, Some(0.05))?,
                ctx.res.f64("b_max", b_max, Some(3.95))?,
                ctx.res.usize("b_count", b_count, Some(100))?,
            )?;
            let (l, w) = ctx.lambda_omega(lambda, omega)?;
            let spec = GridSpec::new(nu, b, l, w)?;
            ctx.out.tolerance("period_tol", spec.budget.tol);
            let s = sweep2d_factor(&spec, ctx.threads)?;
            ctx.out.table("sweep2d.csv", &sweep_table(&s))?;
            let counts = label_counts(s.cells.iter().map(|c| &c.label));
            ctx.out
                .json("sweep2d.json", &json!({"spec": spec, "labels": counts}))?;
            ctx.note("cells", json!(s.cells.len()));
            ctx.note("labels", counts);
        }
        SweepCmd::Route {
            system,
            pwl,
            values,
            labels,
            min,
            max,
            count,
        } => {
            let system = ctx.res.string("system", system, Some("pwl"))?;
            let (route_system, param_name) = match system.as_str() {
                "factor" => {
                    let nu = ctx.res.f64("nu", pwl.nu, None)?;
                    let (lambda, omega) = ctx.lambda_omega(pwl.lambda, pwl.omega)?;
                    (RouteSystem::Factor { nu, lambda, omega }, "b")
                }
                "pwl" => {
                    let nu = ctx.res.f64("nu", pwl.nu, None)?;
                    // b is replaced by each route value; 1 only seeds validation.
                    let params = ctx.pwl_params_at(&pwl, nu, 1.0)?;
                    (RouteSystem::Pwl { params }, "b")
                }
                "llz" => (RouteSystem::Llz, "D"),
                other => bail!("unknown route system {other:?} (expected factor, pwl or llz)"),
            };
            let explicit = !values.is_empty() || ctx.res.lookup("values").is_some();
            let (params, labels) = if explicit {
                let v = ctx.res.list("values", values, None)?;
                let l = ctx.res.strings("labels", labels)?;
                if let Some(l) = &l {
                    if l.len() != v.len() {
                        bail!("{} labels for {} values", l.len(), v.len());
                    }
                }
                (v, l)
            } else {
                let axis = Axis::new(
                    ctx.res.f64("min", min, None)?,
                    ctx.res.f64("max", max, None)?,
                    ctx.res.usize("count", count, None)?,
                )?;
                (axis.values(), None)
            };
            let spec = RouteSpec::new(route_system);
            ctx.out.tolerance("period_tol", spec.tol);
            let samples = diagram1d_route(&spec, &params, ctx.threads)?;
            ctx.out.table("route.csv", &route_table(&samples))?;
            if matches!(route_system, RouteSystem::Llz) {
                ctx.out.table("llz_route.csv", &llz_route_table(&samples))?;
            }
            let mut points = Vec::new();
            if let Some(labels) = &labels {
                for (label, &v) in labels.iter().zip(&params) {
                    let at: Vec<RouteSample> =
                        samples.iter().filter(|s| s.param == v).cloned().collect();
                    ctx.out
                        .table(&format!("route_{label}.csv"), &route_table(&at))?;
                    points.push(json!({
                        "label": label,
                        param_name: v,
                        "red": at.first().map(|s| s.label.to_string()),
                        "blue": at.get(1).map(|s| s.label.to_string()),
                        "near_homoclinic": at.iter().any(|s| s.near_homoclinic),
                    }));
                }
            }
            ctx.out.json(
                "route.json",
                &json!({"spec": spec, "parameter": param_name, "values": params,
                        "labels": labels, "points": points}),
            )?;
            ctx.note("samples", json!(samples.len()));
            ctx.note("labels", label_counts(samples.iter().map(|s| &s.label)));
            if !points.is_empty() {
                ctx.note("points", json!(points));
            }
        }
    }
    Ok(())
}

/// Portrait specification from a preset entry or from flags.
fn portrait_system(
    ctx: &mut Ctx,
    entry: &Map<String, Value>,
    pwl: &PwlArgs,
) -> Result<PortraitSystem> {
    let get = |k: &str| entry.get(k).and_then(Value::as_f64);
    let system = entry
        .get("system")
        .and_then(Value::as_str)
        .ok_or_else(|| anyhow!("portrait entry without system"))?;
    let sigma = ctx.res.f64("sigma", None, Some(DEFAULT_SIGMA))?;
    let beta = ctx.res.f64("beta", None, Some(DEFAULT_BETA))?;
    Ok(match system {
        "pwl" => {
            let nu = get("nu").ok_or_else(|| anyhow!("pwl portrait needs nu"))?;
            let b = get("b").ok_or_else(|| anyhow!("pwl portrait needs b"))?;
            let params = ctx.pwl_params_at(pwl, nu, b)?;
            PortraitSystem::Pwl { params }
        }
        "lorenz" => {
            let r = get("r").ok_or_else(|| anyhow!("lorenz portrait needs r"))?;
            PortraitSystem::Lorenz {
                params: LorenzParams::new(sigma, r, beta)?,
            }
        }
        "llz" => {
            let d = get("D").ok_or_else(|| anyhow!("llz portrait needs D"))?;
            let r = get("r").ok_or_else(|| anyhow!("llz portrait needs r"))?;
            PortraitSystem::Llz {
                params: LlzParams::new(sigma, beta, r, d)?,
            }
        }
        other => bail!("unknown portrait system {other:?}"),
    })
}

pub fn portrait(ctx: &mut Ctx, cmd: PortraitCmd) -> Result<()> {
    let PortraitCmd::Export {
        pwl,
        sys,
        start,
        label,
        t,
        dt,
    } = cmd;
    let horizon = ctx.res.f64("t", t, Some(100.0))?;
    let dt = ctx.res.f64("dt", dt, Some(0.01))?;
    let from_flags = sys.system.is_some() || label.is_some();
    let entries: Vec<Map<String, Value>> = match ctx.res.lookup("portraits") {
        Some(Value::Array(a)) if !from_flags => a
            .iter()
            .map(|v| {
                v.as_object()
                    .cloned()
                    .ok_or_else(|| anyhow!("portrait entries must be objects"))
            })
            .collect::<Result<_>>()?,
        _ => {
            let system = ctx.res.string("system", sys.system.clone(), None)?;
            let label = ctx.res.string("label", label, Some("custom"))?;
            let mut m = Map::new();
            m.insert("label".into(), json!(label));
            m.insert("system".into(), json!(system));
            match system.as_str() {
                "pwl" => {
                    m.insert("nu".into(), json!(ctx.res.f64("nu", pwl.nu, None)?));
                    m.insert("b".into(), json!(ctx.res.f64("b", pwl.b, None)?));
                }
                "lorenz" => {
                    m.insert("r".into(), json!(ctx.res.f64("r", sys.r, None)?));
                }
                _ => {
                    let d = ctx.res.f64("D", sys.d, None)?;
                    let route_r = (d > 0.0).then(|| pwl_lorenz::smooth::LLZ_ROUTE_PRODUCT / d);
                    m.insert("D".into(), json!(d));
                    m.insert("r".into(), json!(ctx.res.f64("r", sys.r, route_r)?));
                }
            }
            vec![m]
        }
    };
    let explicit = ctx.explicit_start(&start)?;
    let mut written = Vec::new();
    for entry in &entries {
        let label = entry
            .get("label")
            .and_then(Value::as_str)
            .unwrap_or("custom")
            .to_string();
        let system = portrait_system(ctx, entry, &pwl)?;
        // Both unstable separatrices of the saddle, or a seed and its mirror.
        let seeds = match explicit {
            Some(s) => vec![s, s.mirror()],
            None => vec![State3::new(1e-6, 0.0, 0.0), State3::new(-1e-6, 0.0, 0.0)],
        };
        let bundle = phase_portrait_export(system, &seeds, horizon, dt, Some(label.clone()))?;
        for (i, track) in bundle.tracks.iter().enumerate() {
            ctx.out
                .table(&format!("portrait_{label}_{i}.csv"), &track.table)?;
        }
        ctx.out.json(&format!("portrait_{label}.json"), &bundle)?;
        written.push(label);
    }
    ctx.note("portraits", json!(written));
    Ok(())
}
