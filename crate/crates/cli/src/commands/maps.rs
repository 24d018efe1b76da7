use anyhow::{bail, Result};
use pwl_lorenz::bifurcation::{
    b_ah, b_cr, b_h1, cascade, curve_rows, gamma_cr, gamma_het, homoclinic_to_orbit_min_lead,
};
use pwl_lorenz::export::{curve_table, num, opt, Table};
use pwl_lorenz::factor::ZERO_TOL;
use pwl_lorenz::factor::{self, find_periodic_orbits, lyapunov_1d, FactorParams, Itinerary};
use pwl_lorenz::section::{self, q_of, Section2Params, SectionPoint};
use serde_json::json;

use super::{Ctx, DEFAULT_ALPHA, DEFAULT_DELTA};
use crate::{BifCmd, FactorCmd, Map2dCmd};

pub fn factor(ctx: &mut Ctx, cmd: FactorCmd) -> Result<()> {
    ctx.out.tolerance("zero_tol", ZERO_TOL);
    match cmd {
        FactorCmd::Iterate {
            map,
            x0,
            n,
            burn_in,
        } => {
            let (nu, gammas) = ctx.factor_params(&map)?;
            let x0 = ctx.res.f64("x0", x0, Some(0.999))?;
            let n = ctx.res.usize("n", n, Some(64))?;
            let burn_in = ctx.res.usize("burn_in", burn_in, Some(0))?;
            let mut t = Table::new(&["gamma", "nu", "k", "x"]);
            let mut hits = Vec::new();
            for &g in &gammas {
                let p = FactorParams::new(g, nu)?;
                let it = factor::iterate(&p, x0, n, burn_in)?;
                for (i, x) in it.points.iter().enumerate() {
                    t.push(vec![
                        num(g),
                        num(nu),
                        (burn_in + i + 1).to_string(),
                        num(*x),
                    ])?;
                }
                hits.push(json!({"gamma": g, "discontinuity_hits": it.hits}));
            }
            ctx.out.table("iterates.csv", &t)?;
            ctx.note("hits", json!(hits));
        }
        FactorCmd::Orbit { map, word } => {
            let (nu, g) = ctx.single_gamma(&map)?;
            let word = ctx.res.string("word", word, None)?;
            let w: Itinerary = word.parse()?;
            let p = FactorParams::new(g, nu)?;
            let orbits = find_periodic_orbits(&p, &w)?;
            let mut t = Table::new(&[
                "orbit",
                "itinerary",
                "period",
                "index",
                "x",
                "multiplier",
                "superstable",
                "self_symmetric",
                "pair_id",
            ]);
            for (k, o) in orbits.iter().enumerate() {
                for (i, x) in o.points.iter().enumerate() {
                    t.push(vec![
                        k.to_string(),
                        o.itinerary.to_string(),
                        o.period.to_string(),
                        i.to_string(),
                        num(*x),
                        num(o.multiplier),
                        o.superstable.to_string(),
                        o.self_symmetric.to_string(),
                        o.symmetric_pair_id.clone().unwrap_or_default(),
                    ])?;
                }
            }
            ctx.out.table("orbits.csv", &t)?;
            ctx.out.json("orbits.json", &orbits)?;
            ctx.note("orbits", json!(orbits.len()));
        }
        FactorCmd::Lyapunov {
            map,
            x0,
            n,
            burn_in,
        } => {
            let (nu, gammas) = ctx.factor_params(&map)?;
            let x0 = ctx.res.f64("x0", x0, Some(0.999))?;
            let n = ctx.res.usize("n", n, Some(100_000))?;
            let burn_in = ctx.res.usize("burn_in", burn_in, Some(1000))?;
            let mut t = Table::new(&["gamma", "nu", "lyapunov"]);
            let mut vals = Vec::new();
            for &g in &gammas {
                let l = lyapunov_1d(&FactorParams::new(g, nu)?, x0, n, burn_in)?;
                t.push(vec![num(g), num(nu), num(l)])?;
                vals.push(json!({"gamma": g, "lyapunov": l}));
            }
            ctx.out.table("lyapunov.csv", &t)?;
            ctx.note("lyapunov", json!(vals));
        }
    }
    Ok(())
}

pub fn bif(ctx: &mut Ctx, cmd: BifCmd) -> Result<()> {
    match cmd {
        BifCmd::Cascade {
            nu,
            levels,
            lambda,
            omega,
        } => {
            let nu = ctx.res.f64("nu", nu, None)?;
            let levels =
                ctx.res
                    .usize("levels", levels.map(|v| v as usize), Some(4))? as u32;
            let (l, w) = ctx.lambda_omega(lambda, omega)?;
            let table = cascade(nu, levels)?.with_flow(l, w);
            let mut t = Table::new(&[
                "kind",
                "level",
                "gamma",
                "b",
                "residual",
                "multiplicity",
                "beyond_sliding",
            ]);
            for e in &table.entries {
                t.push(vec![
                    e.kind.label(),
                    opt(e.kind.level()),
                    num(e.gamma),
                    e.b.map(num).unwrap_or_default(),
                    num(e.residual),
                    e.multiplicity.to_string(),
                    opt(e.beyond_sliding),
                ])?;
            }
            ctx.out.table("cascade.csv", &t)?;
            ctx.out.json("cascade.json", &table)?;
            ctx.note("gammas", json!(table.gammas()));
            ctx.note(
                "labels",
                json!(table
                    .entries
                    .iter()
                    .map(|e| e.kind.label())
                    .collect::<Vec<_>>()),
            );
            ctx.note(
                "h_infinity",
                json!(table.h_infinity.as_ref().map(|h| h.value)),
            );
            if !table.failures.is_empty() {
                ctx.note(
                    "failures",
                    json!(table
                        .failures
                        .iter()
                        .map(|(n, e)| json!({"entry": n, "error": e.to_string()}))
                        .collect::<Vec<_>>()),
                );
            }
        }
        BifCmd::Curve {
            nus,
            levels,
            lambda,
            omega,
        } => {
            let nus = ctx.res.list("nus", nus, None)?;
            let levels =
                ctx.res
                    .usize("levels", levels.map(|v| v as usize), Some(4))? as u32;
            let (l, w) = ctx.lambda_omega(lambda, omega)?;
            let rows = curve_rows(&nus, levels, l, w);
            ctx.out.table("curves.csv", &curve_table(&rows))?;
            ctx.note("rows", json!(rows.len()));
        }
        BifCmd::Het {
            nu,
            word,
            lead_max,
            lambda,
            omega,
        } => {
            let nu = ctx.res.f64("nu", nu, None)?;
            let (l, w) = ctx.lambda_omega(lambda, omega)?;
            let (point, lead) = if nu < 1.0 {
                (gamma_het(nu)?.with_flow(l, w), None)
            } else if nu > 1.0 {
                let word = ctx.res.string("word", word, Some("+-"))?;
                let lead_max = ctx.res.usize("lead_max", lead_max, Some(8))?;
                let it: Itinerary = word.parse()?;
                let (m, p) =
                    homoclinic_to_orbit_min_lead(nu, &it, lead_max, (1.0 / nu, 2.0), 1e-3)?;
                (p.with_flow(l, w), Some(m))
            } else {
                bail!("nu = 1 has neither a heteroclinic nor a cascade value");
            };
            ctx.out
                .json("het.json", &json!({"nu": nu, "lead": lead, "point": point}))?;
            ctx.note("gamma", json!(point.gamma));
            ctx.note("b", json!(point.b));
        }
        BifCmd::BValues { nu, lambda, omega } => {
            let nu = ctx.res.f64("nu", nu, None)?;
            let (l, w) = ctx.lambda_omega(lambda, omega)?;
            let het = if nu > 0.5 && nu < 1.0 {
                Some(gamma_het(nu)?.with_flow(l, w))
            } else {
                None
            };
            let v = json!({
                "nu": nu,
                "lambda": l,
                "omega": w,
                "b_h1": b_h1(l, w),
                "b_ah": b_ah(nu, l, w),
                "b_cr": b_cr(l, w),
                "gamma_cr": gamma_cr(l, w),
                "b_het": het.as_ref().and_then(|h| h.b),
                "gamma_het": het.as_ref().map(|h| h.gamma),
            });
            ctx.out.json("b_values.json", &v)?;
            ctx.summary
                .extend(v.as_object().cloned().unwrap_or_default());
        }
    }
    Ok(())
}

pub fn map2d(ctx: &mut Ctx, cmd: Map2dCmd) -> Result<()> {
    let Map2dCmd::Iterate {
        map,
        alpha,
        q,
        delta,
        x0,
        y0,
        n,
        burn_in,
    } = cmd;
    let (nu, g) = ctx.single_gamma(&map)?;
    let alpha = ctx.res.f64("alpha", alpha, Some(DEFAULT_ALPHA))?;
    let q = match q.or_else(|| ctx.res.lookup("q").and_then(|v| v.as_f64())) {
        Some(q) => ctx.res.f64("q", Some(q), None)?,
        None => {
            let delta = ctx.res.f64("delta", delta, Some(DEFAULT_DELTA))?;
            let (_, w) = ctx.lambda_omega(map.lambda, map.omega)?;
            q_of(delta, w)
        }
    };
    let x0 = ctx.res.f64("x0", x0, Some(0.999))?;
    let y0 = ctx.res.f64("y0", y0, Some(0.0))?;
    let n = ctx.res.usize("n", n, Some(64))?;
    let burn_in = ctx.res.usize("burn_in", burn_in, Some(0))?;
    let p = Section2Params::new(g, q, nu, alpha)?;
    let orbit = section::iterate(&p, SectionPoint::new(x0, y0), n, burn_in)?;
    let mut t = Table::new(&["k", "x", "y"]);
    for (i, pt) in orbit.points.iter().enumerate() {
        t.push(vec![(burn_in + i + 1).to_string(), num(pt.x), num(pt.y)])?;
    }
    ctx.out.table("map2d.csv", &t)?;
    ctx.note("q", json!(q));
    ctx.note("discontinuity_hits", json!(orbit.hits));
    ctx.note("left_section_at", json!(orbit.left_section_at));
    Ok(())
}
