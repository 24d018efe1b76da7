//! Parameter resolution: command-line flags over a config file over a preset.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Map, Value};

/// Names accepted by `--preset`.
pub const PRESETS: [&str; 10] = [
    "fig2",
    "fig2f",
    "fig3",
    "fig4",
    "fig5a",
    "fig5b-route",
    "fig6a",
    "fig6b",
    "fig7",
    "fig8",
];

const ROUTE_LABELS: [&str; 7] = ["a", "b", "c", "d", "e", "f", "g"];

fn pwl_reference() -> Value {
    json!({"alpha": 2.0, "delta": 0.588, "omega": 2.0, "lambda": 0.294})
}

fn merge(base: Value, extra: Value) -> Value {
    let mut m = base.as_object().cloned().unwrap_or_default();
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    Value::Object(m)
}

/// Parameter block of a named preset.
pub fn preset(name: &str) -> Option<Value> {
    let pwl = pwl_reference();
    let v = match name {
        // Two-parameter diagram and route a-f at nu = 0.65.
        "fig2" => merge(
            pwl,
            json!({
                "nu": 0.65,
                "levels": 4,
                "nus": [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
                        1.05, 1.1, 1.25, 1.5, 1.75, 1.95],
                "system": "pwl",
                "values": [1.5, 2.0, 2.3, 2.556, 2.8, 3.4],
                "labels": ["a", "b", "c", "d", "e", "f"],
            }),
        ),
        // Route point f of the same diagram.
        "fig2f" => merge(pwl, json!({"nu": 0.65, "b": 3.4, "grid": 20})),
        // Phase portraits of the piecewise-linear and Lorenz systems, a-f.
        "fig3" => {
            let mut ps = Vec::new();
            for (l, b, r) in pwl_lorenz::diagrams::LORENZ_ROUTE_POINTS {
                ps.push(json!({"label": format!("{l}_pwl"), "system": "pwl", "nu": 0.65, "b": b}));
                ps.push(json!({"label": format!("{l}_lorenz"), "system": "lorenz", "r": r}));
            }
            merge(
                pwl,
                json!({"portraits": ps, "t": 60.0, "dt": 0.01, "sigma": 10.0, "beta": 8.0 / 3.0}),
            )
        }
        // Graphs of the factor map along the cascade at nu = 1.25.
        "fig4" => json!({
            "nu": 1.25,
            "gamma": [0.7, 0.8, 0.9, 1.0, 1.277, 1.325],
            "levels": 4,
            "x0": 0.999,
            "n": 64,
            "burn_in": 10000,
            "word": "+-",
        }),
        // Two-parameter sweep of the factor map for nu > 1.
        "fig5a" => merge(
            pwl,
            json!({
                "nu_min": 1.01, "nu_max": 1.99, "nu_count": 100,
                "b_min": 0.05, "b_max": 3.95, "b_count": 100,
            }),
        ),
        // LLZ route a-g on r = 0.881 / D.
        "fig5b-route" => json!({
            "system": "llz",
            "sigma": 10.0,
            "beta": 8.0 / 3.0,
            "values": pwl_lorenz::smooth::LLZ_ROUTE_POINTS.iter().map(|p| p.1).collect::<Vec<_>>(),
            "labels": ROUTE_LABELS,
        }),
        // One-parameter diagram of the flow returns at nu = 1.25.
        "fig6a" => merge(
            pwl,
            json!({"system": "pwl", "nu": 1.25, "min": 1.4, "max": 3.8, "count": 241}),
        ),
        // One-parameter diagram of the LLZ route.
        "fig6b" => json!({
            "system": "llz", "sigma": 10.0, "beta": 8.0 / 3.0,
            "min": 0.05, "max": 0.0938, "count": 45,
        }),
        // Phase portraits of the piecewise-linear flow at nu = 1.25 and LLZ, a-f.
        "fig7" => {
            let mut ps = Vec::new();
            for (i, (l, b)) in pwl_lorenz::diagrams::PWL_ROUTE_POINTS
                .iter()
                .take(6)
                .enumerate()
            {
                let (_, d, r) = pwl_lorenz::smooth::LLZ_ROUTE_POINTS[i];
                ps.push(json!({"label": format!("{l}_pwl"), "system": "pwl", "nu": 1.25, "b": b}));
                ps.push(json!({"label": format!("{l}_llz"), "system": "llz", "D": d, "r": r}));
            }
            merge(
                pwl,
                json!({"portraits": ps, "t": 200.0, "dt": 0.01, "sigma": 10.0, "beta": 8.0 / 3.0}),
            )
        }
        // Quasi-strange attractor at route point g.
        "fig8" => {
            let (l, b) = pwl_lorenz::diagrams::PWL_ROUTE_POINTS[6];
            let (_, d, r) = pwl_lorenz::smooth::LLZ_ROUTE_POINTS[6];
            merge(
                pwl,
                json!({
                    "portraits": [
                        {"label": format!("{l}_pwl"), "system": "pwl", "nu": 1.25, "b": b},
                        {"label": format!("{l}_llz"), "system": "llz", "D": d, "r": r},
                    ],
                    "t": 400.0, "dt": 0.01, "sigma": 10.0, "beta": 8.0 / 3.0,
                }),
            )
        }
        _ => return None,
    };
    Some(v)
}

/// Parses a config file: a JSON object, or `key = value` lines where values
/// are JSON literals or bare strings and `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Map<String, Value>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return match serde_json::from_str(text)? {
            Value::Object(m) => Ok(m),
            _ => bail!("config JSON must be an object"),
        };
    }
    let mut m = Map::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key = value", i + 1))?;
        let v = v.trim();
        let value = serde_json::from_str(v)
            .or_else(|_| serde_json::from_str(&format!("[{v}]")))
            .unwrap_or_else(|_| Value::String(v.to_string()));
        m.insert(k.trim().to_string(), value);
    }
    Ok(m)
}

/// Looks up parameters flag first, then config file, then preset, and
/// records every value used for the manifest.
#[derive(Debug, Default)]
pub struct Resolver {
    preset: Map<String, Value>,
    config: Map<String, Value>,
    used: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn load(preset_name: Option<&str>, config: Option<&Path>) -> Result<Self> {
        let preset = match preset_name {
            Some(n) => match preset(n) {
                Some(Value::Object(m)) => m,
                _ => bail!(
                    "unknown preset {n:?}; known presets: {}",
                    PRESETS.join(", ")
                ),
            },
            None => Map::new(),
        };
        let config = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                parse_config(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Map::new(),
        };
        Ok(Self {
            preset,
            config,
            used: BTreeMap::new(),
        })
    }

    #[cfg(test)]
    pub fn from_maps(preset: Map<String, Value>, config: Map<String, Value>) -> Self {
        Self {
            preset,
            config,
            used: BTreeMap::new(),
        }
    }

    /// Raw value from the config file or the preset.
    pub fn lookup(&self, key: &str) -> Option<&Value> {
        self.config.get(key).or_else(|| self.preset.get(key))
    }

    fn record(&mut self, key: &str, v: Value) {
        self.used.insert(key.to_string(), v);
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: Option<f64>) -> Result<f64> {
        let v = match flag {
            Some(v) => v,
            None => match self.lookup(key) {
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| anyhow!("parameter {key} must be a number, got {v}"))?,
                None => default.ok_or_else(|| anyhow!("missing parameter {key}"))?,
            },
        };
        self.record(key, json!(v));
        Ok(v)
    }

    pub fn usize(
        &mut self,
        key: &str,
        flag: Option<usize>,
        default: Option<usize>,
    ) -> Result<usize> {
        let v = match flag {
            Some(v) => v,
            None => match self.lookup(key) {
                Some(v) => v
                    .as_u64()
                    .ok_or_else(|| anyhow!("parameter {key} must be a non-negative integer"))?
                    as usize,
                None => default.ok_or_else(|| anyhow!("missing parameter {key}"))?,
            },
        };
        self.record(key, json!(v));
        Ok(v)
    }

    pub fn string(
        &mut self,
        key: &str,
        flag: Option<String>,
        default: Option<&str>,
    ) -> Result<String> {
        let v = match flag {
            Some(v) => v,
            None => match self.lookup(key) {
                Some(Value::String(s)) => s.clone(),
                Some(v) => bail!("parameter {key} must be a string, got {v}"),
                None => default
                    .map(str::to_string)
                    .ok_or_else(|| anyhow!("missing parameter {key}"))?,
            },
        };
        self.record(key, json!(v));
        Ok(v)
    }

    /// A list of numbers; a scalar counts as a one-element list.
    pub fn list(
        &mut self,
        key: &str,
        flag: Vec<f64>,
        default: Option<Vec<f64>>,
    ) -> Result<Vec<f64>> {
        let v = if !flag.is_empty() {
            flag
        } else {
            match self.lookup(key) {
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|x| {
                        x.as_f64()
                            .ok_or_else(|| anyhow!("parameter {key} must hold numbers"))
                    })
                    .collect::<Result<_>>()?,
                Some(v) => vec![v
                    .as_f64()
                    .ok_or_else(|| anyhow!("parameter {key} must be a number list"))?],
                None => default.ok_or_else(|| anyhow!("missing parameter {key}"))?,
            }
        };
        self.record(key, json!(v));
        Ok(v)
    }

    /// A list of strings, or `None` when absent everywhere.
    pub fn strings(&mut self, key: &str, flag: Vec<String>) -> Result<Option<Vec<String>>> {
        let v = if !flag.is_empty() {
            flag
        } else {
            match self.lookup(key) {
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| anyhow!("parameter {key} must hold strings"))
                    })
                    .collect::<Result<_>>()?,
                Some(v) => bail!("parameter {key} must be a string list, got {v}"),
                None => return Ok(None),
            }
        };
        self.record(key, json!(v));
        Ok(Some(v))
    }

    /// Every value resolved so far.
    pub fn used(&self) -> &BTreeMap<String, Value> {
        &self.used
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(v: Value) -> Map<String, Value> {
        v.as_object().cloned().unwrap()
    }

    #[test]
    fn precedence() {
        let mut r = Resolver::from_maps(map(json!({"b": 1.0, "nu": 2.0})), map(json!({"b": 3.0})));
        assert_eq!(r.f64("b", Some(5.0), None).unwrap(), 5.0);
        assert_eq!(r.f64("b", None, None).unwrap(), 3.0);
        assert_eq!(r.f64("nu", None, None).unwrap(), 2.0);
        assert_eq!(r.f64("x", None, Some(7.0)).unwrap(), 7.0);
        assert!(r.f64("y", None, None).is_err());
    }

    #[test]
    fn key_value_config() {
        let m = parse_config("# c\nnu = 1.25\nlabels = a\nvalues = 1.4, 1.8\n").unwrap();
        assert_eq!(m["nu"], json!(1.25));
        assert_eq!(m["labels"], json!("a"));
        assert_eq!(m["values"], json!([1.4, 1.8]));
    }

    #[test]
    fn every_preset_resolves() {
        for p in PRESETS {
            assert!(preset(p).unwrap().is_object(), "{p}");
        }
    }
}
