use std::fmt;

use serde::{Deserialize, Serialize};

use crate::state::State3;

/// Region of the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    S,
    L,
    R,
}

impl Region {
    /// Image under `(x, y, z) -> (-x, -y, z)`.
    pub fn mirror(self) -> Region {
        match self {
            Region::S => Region::S,
            Region::L => Region::R,
            Region::R => Region::L,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::S => "s",
            Region::L => "l",
            Region::R => "r",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Switching surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    XPlusOne,
    XMinusOne,
    ZEqualsB,
    YZero,
}

impl Boundary {
    pub fn mirror(self) -> Boundary {
        match self {
            Boundary::XPlusOne => Boundary::XMinusOne,
            Boundary::XMinusOne => Boundary::XPlusOne,
            b => b,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::XPlusOne => "x=1",
            Boundary::XMinusOne => "x=-1",
            Boundary::ZEqualsB => "z=b",
            Boundary::YZero => "y=0",
        }
    }

    /// Unit normal (unsigned).
    pub(crate) fn normal(self) -> State3 {
        match self {
            Boundary::XPlusOne | Boundary::XMinusOne => State3::new(1.0, 0.0, 0.0),
            Boundary::ZEqualsB => State3::new(0.0, 0.0, 1.0),
            Boundary::YZero => State3::new(0.0, 1.0, 0.0),
        }
    }
}

/// Equilibria of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equilibrium {
    Saddle,
    FocusLeft,
    FocusRight,
}

/// Result of [`region_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionAssignment {
    pub region: Region,
    /// The point lies on a boundary and no previous region decided it.
    pub ambiguous: bool,
}

fn in_s(s: &State3, b: f64) -> bool {
    s.x.abs() < 1.0 && s.z < b
}
fn in_l(s: &State3, b: f64) -> bool {
    s.x <= -1.0 || (s.x < 1.0 && s.y < 0.0 && s.z > b)
}
fn in_r(s: &State3, b: f64) -> bool {
    s.x >= 1.0 || (s.x > -1.0 && s.y > 0.0 && s.z > b)
}

fn closure(s: &State3, b: f64, r: Region) -> bool {
    match r {
        Region::S => s.x.abs() <= 1.0 && s.z <= b,
        Region::L => s.x <= -1.0 || (s.x <= 1.0 && s.y <= 0.0 && s.z >= b),
        Region::R => s.x >= 1.0 || (s.x >= -1.0 && s.y >= 0.0 && s.z >= b),
    }
}

/// Region containing `s`. Boundary points keep `prev` when it is adjacent,
/// otherwise the first adjacent region in the order `s < l < r` is chosen
/// and the result is flagged.
pub fn region_of(s: &State3, b: f64, prev: Option<Region>) -> RegionAssignment {
    let strict = [
        (Region::S, in_s(s, b)),
        (Region::L, in_l(s, b)),
        (Region::R, in_r(s, b)),
    ];
    if let Some(&(r, _)) = strict.iter().find(|(_, inside)| *inside) {
        return RegionAssignment {
            region: r,
            ambiguous: false,
        };
    }
    if let Some(p) = prev {
        if closure(s, b, p) {
            return RegionAssignment {
                region: p,
                ambiguous: false,
            };
        }
    }
    let region = [Region::S, Region::L, Region::R]
        .into_iter()
        .find(|&r| closure(s, b, r))
        .unwrap_or(Region::S);
    RegionAssignment {
        region,
        ambiguous: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interiors() {
        let b = 2.0;
        assert_eq!(
            region_of(&State3::new(0.0, 0.5, b - 0.1), b, None).region,
            Region::S
        );
        assert_eq!(
            region_of(&State3::new(1.5, -3.0, 0.0), b, None).region,
            Region::R
        );
        assert_eq!(
            region_of(&State3::new(0.5, -0.2, b + 0.1), b, None).region,
            Region::L
        );
        assert_eq!(
            region_of(&State3::new(-1.5, 3.0, 9.0), b, None).region,
            Region::L
        );
    }

    #[test]
    fn boundary_ties() {
        let b = 2.0;
        let on = State3::new(0.3, 0.5, b);
        let a = region_of(&on, b, None);
        assert_eq!(a.region, Region::S);
        assert!(a.ambiguous);
        let c = region_of(&on, b, Some(Region::R));
        assert_eq!(c.region, Region::R);
        assert!(!c.ambiguous);
        // prev not adjacent: falls back to the ordering
        assert_eq!(region_of(&on, b, Some(Region::L)).region, Region::S);
    }
}
