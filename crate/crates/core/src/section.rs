//! The triangular 2-D Poincare map on the cross-section `D = {z = b, |x| <= 1, |y| <= 1}`:
//!
//! ```text
//! x > 0:  (1 - g + g x^nu,          1 - q + q x^alpha y)
//! x < 0:  (g - 1 - g |x|^nu,        q - 1 + q |x|^alpha y)
//! ```
//!
//! The `x` component is the factor map, so `x` iterates here agree bit for
//! bit with [`crate::factor::iterate`]. The map is odd under `(x, y) -> (-x, -y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{FactorParams, ZERO_TOL};

/// Contraction factor `q = exp(-3 pi delta / (2 omega))` of the `y` direction
/// over one passage.
pub fn q_of(delta: f64, omega: f64) -> f64 {
    (-3.0 * std::f64::consts::PI * delta / (2.0 * omega)).exp()
}

/// Parameters of the section map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section2Params {
    gamma: f64,
    q: f64,
    nu: f64,
    alpha: f64,
}

impl Section2Params {
    pub fn new(gamma: f64, q: f64, nu: f64, alpha: f64) -> Result<Self> {
        FactorParams::new(gamma, nu)?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain("q", q, "0 < q < 1"));
        }
        if !(alpha > nu && alpha.is_finite()) {
            return Err(Error::domain("alpha", alpha, "alpha > nu"));
        }
        Ok(Self {
            gamma,
            q,
            nu,
            alpha,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The `x` factor.
    pub fn factor(&self) -> FactorParams {
        FactorParams::new_unchecked(self.gamma, self.nu)
    }

    /// Raw map without domain checks.
    #[inline]
    pub fn apply(&self, pt: SectionPoint) -> SectionPoint {
        let s = pt.x.signum();
        let x = self.factor().apply(pt.x);
        let y = s * (1.0 - self.q) + self.q * pt.x.abs().powf(self.alpha) * pt.y;
        SectionPoint { x, y }
    }

    /// Evaluates the map; the result is flagged when `y` leaves `[-1, 1]`.
    pub fn eval(&self, pt: SectionPoint) -> Result<SectionImage> {
        pt.check()?;
        let point = self.apply(pt);
        Ok(SectionImage {
            point,
            left_section: point.y.abs() > 1.0,
        })
    }

    /// `d ybar / d y = q |x|^alpha`.
    pub fn y_contraction(&self, x: f64) -> f64 {
        self.q * x.abs().powf(self.alpha)
    }
}

/// A point of the cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub x: f64,
    pub y: f64,
}

impl SectionPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn mirror(self) -> Self {
        Self::new(-self.x, -self.y)
    }

    fn check(&self) -> Result<()> {
        if !(self.x.abs() <= 1.0) {
            return Err(Error::domain("x", self.x, "|x| <= 1"));
        }
        if !(self.y.abs() <= 1.0) {
            return Err(Error::domain("y", self.y, "|y| <= 1"));
        }
        Ok(())
    }
}

/// Image of a section point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionImage {
    pub point: SectionPoint,
    /// `|y| > 1`: the image is outside `D`.
    pub left_section: bool,
}

/// Post-burn-in orbit of the section map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionOrbit {
    pub points: Vec<SectionPoint>,
    /// Steps (1-based, counting burn-in) whose `x` was frozen at zero.
    pub hits: Vec<usize>,
    /// First step whose `y` left `[-1, 1]`.
    pub left_section_at: Option<usize>,
}

/// Iterates the map with the same zero freeze as the factor map.
pub fn iterate(
    p: &Section2Params,
    pt0: SectionPoint,
    n: usize,
    burn_in: usize,
) -> Result<SectionOrbit> {
    pt0.check()?;
    let f = p.factor();
    let mut pt = pt0;
    let mut points = Vec::with_capacity(n);
    let mut hits = Vec::new();
    let mut left_section_at = None;
    for k in 1..=burn_in + n {
        let s = pt.x.signum();
        let (x, hit) = f.step(pt.x, ZERO_TOL);
        let y = s * (1.0 - p.q) + p.q * pt.x.abs().powf(p.alpha) * pt.y;
        if hit {
            hits.push(k);
        }
        if y.abs() > 1.0 && left_section_at.is_none() {
            left_section_at = Some(k);
        }
        pt = SectionPoint { x, y };
        if k > burn_in {
            points.push(pt);
        }
    }
    Ok(SectionOrbit {
        points,
        hits,
        left_section_at,
    })
}

/// Result of [`check_self_map`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMapReport {
    pub samples: usize,
    pub max_abs_x: f64,
    pub max_abs_y: f64,
    pub violations: usize,
}

/// Checks on an `n x n` grid of `[-1, 1]^2` (excluding `x = 0`) that the
/// square maps into itself.
pub fn check_self_map(p: &Section2Params, n: usize) -> SelfMapReport {
    let mut rep = SelfMapReport {
        samples: 0,
        max_abs_x: 0.0,
        max_abs_y: 0.0,
        violations: 0,
    };
    let n = n.max(2);
    for i in 0..n {
        for j in 0..n {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            if x == 0.0 {
                continue;
            }
            let im = p.apply(SectionPoint::new(x, y));
            rep.samples += 1;
            rep.max_abs_x = rep.max_abs_x.max(im.x.abs());
            rep.max_abs_y = rep.max_abs_y.max(im.y.abs());
            if im.x.abs() > 1.0 || im.y.abs() > 1.0 {
                rep.violations += 1;
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focus_image_is_fixed() {
        let p = Section2Params::new(1.3, 0.3, 1.25, 2.0).unwrap();
        let im = p.eval(SectionPoint::new(1.0, 1.0)).unwrap();
        assert_eq!(im.point, SectionPoint::new(1.0, 1.0));
        assert!(!im.left_section);
    }

    #[test]
    fn zero_sentinel_images() {
        let p = Section2Params::new(1.3, 0.3, 1.25, 2.0).unwrap();
        let a = p.apply(SectionPoint::new(0.0, 0.4));
        assert!((a.x - (1.0 - 1.3)).abs() < 1e-15 && (a.y - 0.7).abs() < 1e-15);
        let b = p.apply(SectionPoint::new(-0.0, -0.4));
        assert_eq!(b, a.mirror());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Section2Params::new(1.0, 1.0, 1.0, 2.0).is_err());
        assert!(Section2Params::new(1.0, 0.5, 2.0, 2.0).is_err());
        assert!(Section2Params::new(2.5, 0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn square_is_invariant() {
        for g in [0.0, 0.7, 1.3, 2.0] {
            let p = Section2Params::new(g, 0.25, 0.65, 2.0).unwrap();
            assert_eq!(check_self_map(&p, 101).violations, 0);
        }
    }
}
