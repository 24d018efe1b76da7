//! CSV tables with round-trip exact numbers.

use crate::bifurcation::CurveRow;
use crate::error::{Error, Result};
use crate::pwl::Region;
use crate::section::SectionPoint;
use crate::smooth::{Direction, PiCrossing};
use crate::state::State3;

/// Formats a double with 17 significant digits; infinities and NaN are
/// written as `inf`, `-inf`, `nan`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

/// Optional value: empty field when absent.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// A header plus string rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::invalid(format!(
                "row has {} fields, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(format!("csv: {e}")))
    }
}

/// `t, x, y, z, region` rows of a piecewise-linear trajectory.
pub fn pwl_trajectory_table(samples: &[(f64, State3, Region)]) -> Table {
    let mut t = Table::new(&["t", "x", "y", "z", "region"]);
    for (time, s, r) in samples {
        t.rows.push(vec![
            num(*time),
            num(s.x),
            num(s.y),
            num(s.z),
            r.as_str().into(),
        ]);
    }
    t
}

/// `t, x, y, z` rows of a smooth trajectory.
pub fn smooth_trajectory_table(samples: &[(f64, [f64; 3])]) -> Table {
    let mut t = Table::new(&["t", "x", "y", "z"]);
    for (time, s) in samples {
        t.rows
            .push(vec![num(*time), num(s[0]), num(s[1]), num(s[2])]);
    }
    t
}

/// `x_in, y_in, x_out, y_out` rows of section returns.
pub fn section_return_table(pairs: &[(SectionPoint, SectionPoint)]) -> Table {
    let mut t = Table::new(&["x_in", "y_in", "x_out", "y_out"]);
    for (a, b) in pairs {
        t.rows.push(vec![num(a.x), num(a.y), num(b.x), num(b.y)]);
    }
    t
}

/// `x, y` rows of section points.
pub fn section_points_table(pts: &[SectionPoint]) -> Table {
    let mut t = Table::new(&["x", "y"]);
    for p in pts {
        t.rows.push(vec![num(p.x), num(p.y)]);
    }
    t
}

/// `nu, kind, n, gamma, b, residual` rows of bifurcation curves.
pub fn curve_table(rows: &[CurveRow]) -> Table {
    let mut t = Table::new(&["nu", "kind", "n", "gamma", "b", "residual"]);
    for r in rows {
        t.rows.push(vec![
            num(r.nu),
            r.kind.clone(),
            opt(r.n),
            num(r.gamma),
            num(r.b),
            num(r.residual),
        ]);
    }
    t
}

/// `t, x, y, z, direction` rows of section crossings of a smooth flow.
pub fn crossing_table(cs: &[PiCrossing]) -> Table {
    let mut t = Table::new(&["t", "x", "y", "z", "direction"]);
    for c in cs {
        let d = match c.direction {
            Direction::Downward => "down",
            Direction::Upward => "up",
        };
        t.rows.push(vec![
            num(c.t),
            num(c.state.x),
            num(c.state.y),
            num(c.state.z),
            d.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 5e-324] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_shape() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]).unwrap();
        assert!(t.push(vec!["1".into()]).is_err());
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
