use serde::Serialize;

use super::flow::vector_field;
use super::region::{Boundary, Region};
use super::PwlParams;
use crate::state::State3;

const ON_SURFACE: f64 = 1e-12;

/// Local sliding analysis at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlidingReport {
    /// Surface the point lies on, if it separates two different regions.
    pub surface: Option<Boundary>,
    /// Regions on the negative and positive side of the surface normal.
    pub sides: Option<(Region, Region)>,
    /// Normal components of the two adjacent fields, in the order of `sides`.
    pub normal_components: (f64, f64),
    /// Both fields point toward the surface.
    pub attracting: bool,
    /// `b >= b_cr`: attracting sliding exists somewhere on `x = -+1, z > b`.
    pub global_guard: bool,
}

/// Identifies the switching surface through `s` and compares the normal
/// components of the two adjacent vector fields.
pub fn sliding_check(s: &State3, p: &PwlParams) -> SlidingReport {
    let b = p.b();
    let near = |a: f64, c: f64| (a - c).abs() <= ON_SURFACE;
    let split = if near(s.x, 1.0) {
        if s.z < b {
            Some((Boundary::XPlusOne, Region::S, Region::R))
        } else if s.z > b && s.y < 0.0 {
            Some((Boundary::XPlusOne, Region::L, Region::R))
        } else {
            None
        }
    } else if near(s.x, -1.0) {
        if s.z < b {
            Some((Boundary::XMinusOne, Region::L, Region::S))
        } else if s.z > b && s.y > 0.0 {
            Some((Boundary::XMinusOne, Region::L, Region::R))
        } else {
            None
        }
    } else if near(s.z, b) && s.x.abs() < 1.0 {
        if s.y > 0.0 {
            Some((Boundary::ZEqualsB, Region::S, Region::R))
        } else if s.y < 0.0 {
            Some((Boundary::ZEqualsB, Region::S, Region::L))
        } else {
            None
        }
    } else if near(s.y, 0.0) && s.z > b && s.x.abs() < 1.0 {
        Some((Boundary::YZero, Region::L, Region::R))
    } else {
        None
    };
    let global_guard = b >= p.b_cr();
    match split {
        Some((surface, neg, pos)) => {
            let n = surface.normal();
            let fa = vector_field(s, neg, p).dot(n);
            let fb = vector_field(s, pos, p).dot(n);
            SlidingReport {
                surface: Some(surface),
                sides: Some((neg, pos)),
                normal_components: (fa, fb),
                attracting: fa > 0.0 && fb < 0.0,
                global_guard,
            }
        }
        None => SlidingReport {
            surface: None,
            sides: None,
            normal_components: (0.0, 0.0),
            attracting: false,
            global_guard,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::RotationOrientation;

    #[test]
    fn global_guard_threshold() {
        let s = State3::new(0.0, 0.0, 0.0);
        assert!(sliding_check(&s, &PwlParams::reference(0.65, 3.96).unwrap()).global_guard);
        assert!(!sliding_check(&s, &PwlParams::reference(0.65, 3.9).unwrap()).global_guard);
    }

    #[test]
    fn far_plane_slides_above_focus_height() {
        let p = PwlParams::reference(0.65, 3.0).unwrap();
        let s = State3::new(-1.0, 0.5, p.b() + 0.3);
        let r = sliding_check(&s, &p);
        assert_eq!(r.sides, Some((Region::L, Region::R)));
        assert!(r.attracting);
    }

    #[test]
    fn printed_orientation_slides_below_right_focus() {
        let p = PwlParams::reference(0.65, 3.0)
            .unwrap()
            .with_orientation(RotationOrientation::AsPrinted);
        let s = State3::new(1.0, 0.5, p.b() - 0.5);
        assert!(sliding_check(&s, &p).attracting);
        let fc = p.with_orientation(RotationOrientation::FigureConsistent);
        assert!(!sliding_check(&s, &fc).attracting);
    }
}
