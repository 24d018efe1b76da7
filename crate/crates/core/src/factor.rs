//! The 1-D discontinuous factor map
//!
//! ```text
//! f(x) = (1 - g + g |x|^nu) sign x,      f(+0) = 1 - g,  f(-0) = g - 1
//! ```
//!
//! The map is two-valued at `x = 0`. Iterates that land within
//! [`ZERO_TOL`] of zero are frozen to a signed-zero sentinel (`+0.0` or
//! `-0.0`, following the side they approached from) and the step is recorded
//! as a discontinuity hit. `f64::signum` distinguishes `+0.0` from `-0.0`,
//! so [`FactorParams::apply`] implements the two-sided rule directly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// Iterates closer than this to zero are frozen to the signed-zero sentinel.
pub const ZERO_TOL: f64 = 1e-14;
/// Residual accepted for periodic points.
pub const ROOT_TOL: f64 = 1e-12;

/// Parameters of the factor map: splitting parameter `gamma` and saddle index `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    gamma: f64,
    nu: f64,
}

impl FactorParams {
    /// Checked constructor: `gamma` in `[0, 2]`, `nu > 0`.
    pub fn new(gamma: f64, nu: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&gamma) {
            return Err(Error::domain("gamma", gamma, "[0, 2]"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::domain("nu", nu, "nu > 0"));
        }
        Ok(Self { gamma, nu })
    }

    /// Unchecked constructor for experiments outside the invariant region.
    pub const fn new_unchecked(gamma: f64, nu: f64) -> Self {
        Self { gamma, nu }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Saddle value `1 - nu` of the underlying flow.
    pub fn saddle_value(&self) -> f64 {
        1.0 - self.nu
    }

    /// Multiplier `gamma * nu` of the fixed points `x = +-1`.
    pub fn focus_multiplier(&self) -> f64 {
        self.gamma * self.nu
    }

    /// Raw map without domain checks.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (1.0 - self.gamma + self.gamma * x.abs().powf(self.nu)) * x.signum()
    }

    /// Evaluates the map; `x` may be the sentinel `+0.0` or `-0.0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.apply(x))
    }

    /// Derivative `gamma * nu * |x|^(nu - 1)` for `x != 0`.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        if x.abs() < ZERO_TOL {
            return Err(Error::Singular { x });
        }
        Ok(self.deriv_raw(x))
    }

    /// Like [`deriv`](Self::deriv) but returns the one-sided limit at zero
    /// when it is finite (`0` for `nu > 1`, `gamma` for `nu = 1`).
    pub fn deriv_limit(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        if x.abs() < ZERO_TOL {
            return if self.nu > 1.0 {
                Ok(0.0)
            } else if self.nu == 1.0 {
                Ok(self.gamma)
            } else {
                Err(Error::Singular { x })
            };
        }
        Ok(self.deriv_raw(x))
    }

    #[inline]
    pub(crate) fn deriv_raw(&self, x: f64) -> f64 {
        self.gamma * self.nu * x.abs().powf(self.nu - 1.0)
    }

    /// One step with the zero freeze; the flag reports a discontinuity hit.
    #[inline]
    pub fn step(&self, x: f64, zero_tol: f64) -> (f64, bool) {
        freeze(self.apply(x), zero_tol)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("x", x, "|x| <= 1"))
    }
}

/// Replaces values within `zero_tol` of zero by the signed-zero sentinel.
#[inline]
pub fn freeze(y: f64, zero_tol: f64) -> (f64, bool) {
    if y.abs() < zero_tol {
        (0.0f64.copysign(y), true)
    } else {
        (y, false)
    }
}

/// Post-burn-in iterates together with discontinuity hits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iterates {
    /// `x_{burn_in + 1}, ..., x_{burn_in + n}`.
    pub points: Vec<f64>,
    /// Step numbers (1-based, counting burn-in) at which the iterate was frozen.
    pub hits: Vec<usize>,
}

impl Iterates {
    pub fn hit_discontinuity(&self) -> bool {
        !self.hits.is_empty()
    }
}

/// Iterates the map `n` times after discarding `burn_in` steps.
pub fn iterate(p: &FactorParams, x0: f64, n: usize, burn_in: usize) -> Result<Iterates> {
    iterate_with(p, x0, n, burn_in, ZERO_TOL)
}

/// [`iterate`] with an explicit zero tolerance.
pub fn iterate_with(
    p: &FactorParams,
    x0: f64,
    n: usize,
    burn_in: usize,
    zero_tol: f64,
) -> Result<Iterates> {
    check_unit(x0)?;
    let mut x = x0;
    let mut points = Vec::with_capacity(n);
    let mut hits = Vec::new();
    for k in 1..=burn_in + n {
        let (y, hit) = p.step(x, zero_tol);
        if hit {
            hits.push(k);
        }
        if k > burn_in {
            points.push(y);
        }
        x = y;
    }
    Ok(Iterates { points, hits })
}

/// Letter of a symbolic itinerary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Plus
        } else if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
            Sign::Zero => Sign::Zero,
        }
    }

    /// `+1` or `-1`; zero maps to `+1`.
    pub fn factor(self) -> f64 {
        if self == Sign::Minus {
            -1.0
        } else {
            1.0
        }
    }

    fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
            Sign::Zero => '0',
        }
    }
}

/// A word over `{+, -, 0}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Itinerary(pub Vec<Sign>);

impl Itinerary {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Word with every letter flipped.
    pub fn flipped(&self) -> Itinerary {
        Itinerary(self.0.iter().map(|s| s.flip()).collect())
    }

    /// Word rotated left by `k` letters.
    pub fn rotated(&self, k: usize) -> Itinerary {
        let n = self.0.len();
        Itinerary((0..n).map(|i| self.0[(i + k) % n]).collect())
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Itinerary) -> Itinerary {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Itinerary(v)
    }

    /// Smallest rotation of the word or of its flip; mirror orbits share it.
    pub fn canonical_pair_form(&self) -> Itinerary {
        let n = self.0.len();
        let flipped = self.flipped();
        (0..n)
            .flat_map(|k| [self.rotated(k), flipped.rotated(k)])
            .min()
            .unwrap_or_default()
    }

    fn has_zero(&self) -> bool {
        self.0.contains(&Sign::Zero)
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Itinerary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' | '\u{2212}' => Ok(Sign::Minus),
                '0' => Ok(Sign::Zero),
                other => Err(Error::invalid(format!("bad itinerary letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Itinerary)
    }
}

impl Serialize for Itinerary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Signs of `x_1, ..., x_n`; `0` marks frozen iterates.
pub fn itinerary(p: &FactorParams, x0: f64, n: usize) -> Result<Itinerary> {
    let it = iterate(p, x0, n, 0)?;
    Ok(Itinerary(it.points.iter().map(|&x| Sign::of(x)).collect()))
}

/// A periodic orbit of the factor map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit1D {
    /// `x_0, ..., x_{period-1}` with `x_0` on the branch of the first letter.
    pub points: Vec<f64>,
    pub period: usize,
    /// Product of derivatives along the orbit (0 when superstable).
    pub multiplier: f64,
    pub itinerary: Itinerary,
    pub superstable: bool,
    /// `|f^period(x_0) - x_0|`.
    pub residual: f64,
    /// The orbit coincides with its mirror image.
    pub self_symmetric: bool,
    /// Tag shared by an asymmetric orbit and its mirror.
    pub symmetric_pair_id: Option<String>,
}

impl PeriodicOrbit1D {
    /// Contains one of the fixed points `x = +-1`.
    pub fn is_trivial(&self) -> bool {
        self.points.iter().any(|x| (x.abs() - 1.0).abs() < ROOT_TOL)
    }

    pub fn is_stable(&self) -> bool {
        self.multiplier.abs() < 1.0
    }

    pub fn min_abs(&self) -> f64 {
        self.points
            .iter()
            .fold(f64::INFINITY, |m, x| m.min(x.abs()))
    }
}

/// Composite map along `word` from `x0`; `None` if an intermediate iterate
/// leaves the prescribed branch. Returns `(x_p, d x_p / d x_0)`.
fn along_word(p: &FactorParams, word: &[Sign], x0: f64) -> Option<(f64, f64)> {
    let mut x = x0;
    let mut d = 1.0;
    for &s in word {
        if Sign::of(x) != s {
            return None;
        }
        d *= p.deriv_raw(x);
        x = p.apply(x);
    }
    Some((x, d))
}

fn scan_grid() -> Vec<f64> {
    const N: usize = 4000;
    let mut t: Vec<f64> = (1..=N)
        .flat_map(|k| {
            let u = k as f64 / N as f64;
            [u, u * u]
        })
        .chain((1..=120).map(|k| 10f64.powf(-(k as f64) / 10.0)))
        .collect();
    t.push(1.0);
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.dedup();
    t
}

/// All periodic orbits with the given itinerary, ordered by `|x_0|`.
pub fn find_periodic_orbits(p: &FactorParams, word: &Itinerary) -> Result<Vec<PeriodicOrbit1D>> {
    if word.is_empty() {
        return Err(Error::invalid("empty itinerary"));
    }
    if word.has_zero() {
        return Err(Error::invalid(
            "itinerary of a periodic orbit must not contain 0",
        ));
    }
    let letters = &word.0;
    let s0 = letters[0].factor();
    let g = |t: f64| match along_word(p, letters, s0 * t) {
        Some((xp, _)) => xp - s0 * t,
        None => f64::NAN,
    };
    let dg = |t: f64| match along_word(p, letters, s0 * t) {
        Some((_, d)) => s0 * (d - 1.0),
        None => f64::NAN,
    };
    let grid = scan_grid();
    let mut roots_t = Vec::new();
    for (a, b) in roots::sign_changes(g, &grid) {
        let t = if a == b {
            a
        } else {
            let t = roots::bisect(g, a, b, 0.0)?;
            roots::newton_polish(g, dg, t, a, b, 8)
        };
        roots_t.push(t);
    }
    roots_t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots_t.dedup_by(|a, b| (*a - *b).abs() < 1e-10);

    let mut out = Vec::new();
    for t in roots_t {
        let orbit = build_orbit(p, word, s0 * t);
        if orbit.residual < 1e-10 {
            out.push(orbit);
        }
    }
    Ok(out)
}

fn build_orbit(p: &FactorParams, word: &Itinerary, x0: f64) -> PeriodicOrbit1D {
    let period = word.len();
    let mut points = Vec::with_capacity(period);
    let mut x = x0;
    for _ in 0..period {
        points.push(x);
        x = p.apply(x);
    }
    let residual = (x - x0).abs();
    let superstable = points.iter().any(|v| v.abs() < ZERO_TOL);
    let multiplier = if superstable {
        0.0
    } else {
        points.iter().map(|&v| p.deriv_raw(v)).product()
    };
    let self_symmetric = points
        .iter()
        .all(|&a| points.iter().any(|&b| (a + b).abs() < 1e-9));
    let symmetric_pair_id = if self_symmetric {
        None
    } else {
        let min_abs = points.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        Some(format!("{}:{:.9}", word.canonical_pair_form(), min_abs))
    };
    PeriodicOrbit1D {
        points,
        period,
        multiplier,
        itinerary: word.clone(),
        superstable,
        residual,
        self_symmetric,
        symmetric_pair_id,
    }
}

/// The periodic orbit with the given itinerary, preferring orbits that avoid
/// the trivial fixed points `+-1`.
pub fn find_periodic_orbit(p: &FactorParams, word: &Itinerary) -> Result<PeriodicOrbit1D> {
    let all = find_periodic_orbits(p, word)?;
    let pick = all
        .iter()
        .position(|o| !o.is_trivial())
        .or(if all.is_empty() { None } else { Some(0) });
    match pick {
        Some(i) => {
            let o = all[i].clone();
            if o.residual > ROOT_TOL {
                return Err(Error::NonConvergence {
                    iterations: crate::roots::MAX_BISECT,
                    context: format!("periodic orbit {word} residual {}", o.residual),
                });
            }
            Ok(o)
        }
        None => Err(Error::OrbitNotFound {
            word: word.to_string(),
        }),
    }
}

/// Average of `ln|f'|` along `n` post-burn-in iterates; `-inf` when the
/// orbit hits the discontinuity in that window.
pub fn lyapunov_1d(p: &FactorParams, x0: f64, n: usize, burn_in: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let it = iterate(p, x0, n, burn_in)?;
    if it.hits.iter().any(|&k| k > burn_in) {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = it.points.iter().map(|&x| p.deriv_raw(x).ln()).sum();
    Ok(sum / n as f64)
}

/// Attractor reached from a seed after a transient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attractor1D {
    /// Detected period, or `None` for chaotic-or-long-periodic.
    pub period: Option<usize>,
    /// One period of the cycle (or the last sample window otherwise).
    pub points: Vec<f64>,
    /// `ln |multiplier|` of the cycle, or the Lyapunov average when aperiodic.
    pub ln_mu: f64,
    /// The cycle passes through the discontinuity.
    pub superstable: bool,
    /// The cycle is its own mirror image.
    pub self_symmetric: bool,
}

impl Attractor1D {
    /// The attractor is one of the fixed points `x = +-1`.
    pub fn is_focus(&self) -> bool {
        self.period == Some(1) && (self.points[0].abs() - 1.0).abs() < 1e-9
    }
}

/// Settings for [`detect_attractor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorBudget {
    pub transient: usize,
    pub period_cap: usize,
    pub tol: f64,
}

impl Default for AttractorBudget {
    fn default() -> Self {
        Self {
            transient: 10_000,
            period_cap: 1024,
            tol: 1e-8,
        }
    }
}

/// Iterates from `x0`, then looks for the smallest period up to the cap.
pub fn detect_attractor(
    p: &FactorParams,
    x0: f64,
    budget: &AttractorBudget,
) -> Result<Attractor1D> {
    let cap = budget.period_cap.max(1);
    let window = 2 * cap;
    let it = iterate(p, x0, window, budget.transient)?;
    let xs = &it.points;
    let period =
        (1..=cap).find(|&q| (0..window - q).all(|i| (xs[i + q] - xs[i]).abs() <= budget.tol));
    match period {
        Some(q) => {
            let points = xs[..q].to_vec();
            let superstable = points.iter().any(|v| v.abs() < ZERO_TOL);
            let ln_mu = if superstable {
                f64::NEG_INFINITY
            } else {
                points.iter().map(|&v| p.deriv_raw(v).ln()).sum()
            };
            let self_symmetric = points
                .iter()
                .all(|&a| points.iter().any(|&b| (a + b).abs() <= 1e3 * budget.tol));
            Ok(Attractor1D {
                period: Some(q),
                points,
                ln_mu,
                superstable,
                self_symmetric,
            })
        }
        None => {
            let superstable = it.hit_discontinuity();
            let ln_mu = if superstable {
                f64::NEG_INFINITY
            } else {
                xs.iter().map(|&v| p.deriv_raw(v).ln()).sum::<f64>() / xs.len() as f64
            };
            Ok(Attractor1D {
                period: None,
                points: xs.clone(),
                ln_mu,
                superstable,
                self_symmetric: false,
            })
        }
    }
}
