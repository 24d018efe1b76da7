//! Bifurcation values of the factor map and their images in the flow
//! parameter `b`.
//!
//! For `nu > 1` the map undergoes the alternating cascade
//!
//! ```text
//! AH < H(1) < F(1) < H(2) < F(2) < ... -> H_inf
//! ```
//!
//! where `H(n)` is the superstability condition `f^(2^(n-1))(+0) = 0` (an
//! `2^(n-1)`-round homoclinic butterfly of the flow) and `F(n)` the pitchfork
//! at which the symmetric orbit of period `2^n` acquires multiplier `+1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{FactorParams, Itinerary, Sign};
use crate::roots;

/// Kind of a located bifurcation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "level", rename_all = "snake_case")]
pub enum BifurcationKind {
    TranscriticalAh,
    Homoclinic(u32),
    Pitchfork(u32),
    Heteroclinic,
    HomToPeriod2,
    CriticalSliding,
    HInfinityEstimate,
}

impl BifurcationKind {
    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            BifurcationKind::TranscriticalAh => "AH".into(),
            BifurcationKind::Homoclinic(n) => format!("H{}", 1u64 << (n - 1)),
            BifurcationKind::Pitchfork(n) => format!("F{}", 1u64 << n),
            BifurcationKind::Heteroclinic => "het".into(),
            BifurcationKind::HomToPeriod2 => "Hp2".into(),
            BifurcationKind::CriticalSliding => "cr".into(),
            BifurcationKind::HInfinityEstimate => "Hinf".into(),
        }
    }

    pub fn level(&self) -> Option<u32> {
        match self {
            BifurcationKind::Homoclinic(n) | BifurcationKind::Pitchfork(n) => Some(*n),
            _ => None,
        }
    }
}

/// A located bifurcation value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub kind: BifurcationKind,
    pub gamma: f64,
    /// Flow parameter, filled by [`BifurcationPoint::with_flow`].
    pub b: Option<f64>,
    /// Value of the defining equation at the root.
    pub residual: f64,
    /// Number of roots of the defining equation seen in the search interval.
    pub multiplicity: usize,
    /// Set with `b`: the value lies at or beyond the sliding threshold.
    pub beyond_sliding: Option<bool>,
}

impl BifurcationPoint {
    fn new(kind: BifurcationKind, gamma: f64, residual: f64) -> Self {
        Self {
            kind,
            gamma,
            b: None,
            residual,
            multiplicity: 1,
            beyond_sliding: None,
        }
    }

    /// Fills the flow parameter `b` for the given focus eigenvalue `-lambda +- i omega`.
    pub fn with_flow(mut self, lambda: f64, omega: f64) -> Self {
        let b = to_b(self.gamma, lambda, omega);
        self.b = Some(b);
        self.beyond_sliding = Some(b >= b_cr(lambda, omega));
        self
    }
}

/// Transcritical value `1 / nu` at which `x = +-1` lose stability.
pub fn gamma_ah(nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::domain("nu", nu, "nu > 0"));
    }
    Ok(1.0 / nu)
}

/// `b = gamma * exp(3 pi lambda / (2 omega))`.
pub fn to_b(gamma: f64, lambda: f64, omega: f64) -> f64 {
    gamma * b_h1(lambda, omega)
}

/// `gamma = b * exp(-3 pi lambda / (2 omega))`.
pub fn to_gamma(b: f64, lambda: f64, omega: f64) -> f64 {
    b / b_h1(lambda, omega)
}

/// Primary homoclinic value of `b` (`gamma = 1`).
pub fn b_h1(lambda: f64, omega: f64) -> f64 {
    (3.0 * std::f64::consts::PI * lambda / (2.0 * omega)).exp()
}

/// `b` of the transcritical bifurcation, `b_h1 / nu`.
pub fn b_ah(nu: f64, lambda: f64, omega: f64) -> f64 {
    b_h1(lambda, omega) / nu
}

/// Threshold beyond which attracting sliding appears on `x = -1, z > b`.
pub fn b_cr(lambda: f64, omega: f64) -> f64 {
    let k = lambda / omega;
    2.0 * (1.0 + k * k).sqrt() * (k * ((omega / lambda).atan() + std::f64::consts::PI)).exp()
}

/// `gamma` image of [`b_cr`].
pub fn gamma_cr(lambda: f64, omega: f64) -> f64 {
    to_gamma(b_cr(lambda, omega), lambda, omega)
}

/// Critical sliding threshold as a bifurcation point.
pub fn critical_sliding(lambda: f64, omega: f64) -> BifurcationPoint {
    BifurcationPoint::new(
        BifurcationKind::CriticalSliding,
        gamma_cr(lambda, omega),
        0.0,
    )
    .with_flow(lambda, omega)
}

/// Bracket scan settings for the cascade solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Upper bound on the scan step in `gamma`.
    pub max_step: f64,
    /// The step is at most the previous cascade gap divided by this.
    pub gap_divisor: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            max_step: 1e-3,
            gap_divisor: 20.0,
        }
    }
}

/// `f^m(+0)` without the zero freeze.
fn orbit_of_zero(p: &FactorParams, m: usize) -> f64 {
    let mut x = 0.0f64;
    for _ in 0..m {
        x = p.apply(x);
    }
    x
}

/// Smallest `|f^k(+0)|` for `1 <= k < m`.
fn earliest_return(p: &FactorParams, m: usize) -> f64 {
    let mut x = 0.0f64;
    let mut best = f64::INFINITY;
    for _ in 1..m {
        x = p.apply(x);
        best = best.min(x.abs());
    }
    best
}

/// Memoizing solver for the homoclinic/pitchfork cascade at fixed `nu > 1`.
#[derive(Debug, Clone)]
pub struct CascadeSolver {
    nu: f64,
    opts: ScanOptions,
    h: Vec<BifurcationPoint>,
    f: Vec<BifurcationPoint>,
}

impl CascadeSolver {
    pub fn new(nu: f64) -> Result<Self> {
        Self::with_options(nu, ScanOptions::default())
    }

    pub fn with_options(nu: f64, opts: ScanOptions) -> Result<Self> {
        if !(nu > 1.0 && nu.is_finite()) {
            return Err(Error::domain("nu", nu, "nu > 1 for the cascade"));
        }
        if !(opts.max_step > 0.0 && opts.gap_divisor >= 1.0) {
            return Err(Error::invalid("scan step must be positive"));
        }
        Ok(Self {
            nu,
            opts,
            h: Vec::new(),
            f: Vec::new(),
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    fn params(&self, gamma: f64) -> FactorParams {
        FactorParams::new_unchecked(gamma, self.nu)
    }

    /// Homoclinic value `H(n)`: `f^(2^(n-1))(+0) = 0`.
    pub fn h(&mut self, n: u32) -> Result<BifurcationPoint> {
        if n == 0 {
            return Err(Error::invalid("cascade levels start at 1"));
        }
        while self.h.len() < n as usize {
            let k = self.h.len() as u32 + 1;
            let pt = self.solve_h(k)?;
            self.h.push(pt);
        }
        Ok(self.h[n as usize - 1].clone())
    }

    /// Pitchfork value `F(n)` of the symmetric orbit of period `2^n`.
    pub fn f(&mut self, n: u32) -> Result<BifurcationPoint> {
        if n == 0 {
            return Err(Error::invalid("cascade levels start at 1"));
        }
        while self.f.len() < n as usize {
            let k = self.f.len() as u32 + 1;
            let pt = self.solve_f(k)?;
            self.f.push(pt);
        }
        Ok(self.f[n as usize - 1].clone())
    }

    fn solve_h(&mut self, n: u32) -> Result<BifurcationPoint> {
        let nu = self.nu;
        match n {
            1 => Ok(BifurcationPoint::new(
                BifurcationKind::Homoclinic(1),
                1.0,
                0.0,
            )),
            2 => {
                let eq = |g: f64| g * (g - 1.0).powf(nu - 1.0) - 1.0;
                let g = roots::bisect(eq, 1.0, 2.0, 0.0)?;
                Ok(BifurcationPoint::new(
                    BifurcationKind::Homoclinic(2),
                    g,
                    eq(g).abs(),
                ))
            }
            _ => {
                let prev_h = self.h(n - 1)?.gamma;
                let prev_f = self.f(n - 1)?.gamma;
                let step = self.step_for(prev_f - prev_h);
                let m = 1usize << (n - 1);
                let phi = |g: f64| orbit_of_zero(&FactorParams::new_unchecked(g, nu), m);
                let mut lo = prev_f;
                let mut vlo = phi(lo);
                let mut k = 1usize;
                loop {
                    let hi = (prev_f + step * k as f64).min(2.0);
                    let vhi = phi(hi);
                    if vlo != 0.0 && vhi.signum() != vlo.signum() {
                        let g = roots::bisect(phi, lo, hi, 0.0)?;
                        let p = self.params(g);
                        let res = phi(g).abs();
                        if res < 1e-10 && earliest_return(&p, m) > 1e-9 {
                            return Ok(BifurcationPoint::new(
                                BifurcationKind::Homoclinic(n),
                                g,
                                res,
                            ));
                        }
                    }
                    if hi >= 2.0 {
                        return Err(Error::no_root(format!(
                            "H level {n} not bracketed above {prev_f}"
                        )));
                    }
                    lo = hi;
                    vlo = vhi;
                    k += 1;
                }
            }
        }
    }

    fn step_for(&self, gap: f64) -> f64 {
        self.opts.max_step.min(gap / self.opts.gap_divisor)
    }

    fn solve_f(&mut self, n: u32) -> Result<BifurcationPoint> {
        let nu = self.nu;
        if n == 1 {
            let upper = self.h(2)?.gamma;
            let eq = |g: f64| g * nu.powf(nu) * ((g - 1.0) / (nu + 1.0)).powf(nu - 1.0) - 1.0;
            let grid = roots::linspace(1.0, upper, 2000);
            let brackets = roots::sign_changes(eq, &grid);
            let (a, b) = *brackets
                .first()
                .ok_or_else(|| Error::no_root("F level 1 not bracketed"))?;
            let g = if a == b {
                a
            } else {
                roots::bisect(eq, a, b, 0.0)?
            };
            let mut pt = BifurcationPoint::new(BifurcationKind::Pitchfork(1), g, eq(g).abs());
            pt.multiplicity = brackets.len();
            return Ok(pt);
        }
        let h = self.h(n)?.gamma;
        let prev_f = self.f(n - 1)?.gamma;
        let word = half_word_at(&self.params(h), 1usize << (n - 1));
        let step = self.step_for(h - prev_f);

        // Bracket the multiplier crossing along the symmetric branch.
        let mut lo: Option<(f64, f64)> = None;
        let mut k = 1usize;
        let bracket = loop {
            let g = (h + step * k as f64).min(2.0);
            if let Some(x) = symmetric_point(&self.params(g), &word) {
                let mu = half_orbit(&self.params(g), &word, x)
                    .map(|s| s.log_mu)
                    .unwrap_or(f64::NAN);
                if mu >= 0.0 {
                    match lo {
                        Some((glo, xlo)) => break (glo, xlo, g),
                        None => {
                            return Err(Error::no_root(format!(
                                "F level {n}: multiplier already above 1 at {g}"
                            )))
                        }
                    }
                }
                lo = Some((g, x));
            } else if lo.is_some() {
                return Err(Error::no_root(format!(
                    "F level {n}: symmetric orbit lost at gamma = {g}"
                )));
            }
            if g >= 2.0 {
                return Err(Error::no_root(format!(
                    "F level {n} not bracketed above {h}"
                )));
            }
            k += 1;
        };
        let (glo, xlo, ghi) = bracket;
        let (g, x) = newton_symmetric(nu, &word, xlo, 0.5 * (glo + ghi))?;
        if !(g > glo - step && g < ghi + step) {
            return Err(Error::NonConvergence {
                iterations: NEWTON_MAX,
                context: format!("F level {n}: Newton left the bracket [{glo}, {ghi}]"),
            });
        }
        let residual = full_orbit_residual(&self.params(g), x, 2 * word.len());
        Ok(BifurcationPoint::new(
            BifurcationKind::Pitchfork(n),
            g,
            residual,
        ))
    }
}

/// Itinerary of the first half of the symmetric orbit born at a superstable
/// value: `+` followed by the signs of `f(+0), ..., f^(half-1)(+0)`.
pub fn half_word_at(p: &FactorParams, half: usize) -> Itinerary {
    let mut letters = vec![Sign::Plus];
    let mut x = 0.0f64;
    for _ in 1..half {
        x = p.apply(x);
        letters.push(Sign::of(x));
    }
    Itinerary(letters)
}

struct HalfOrbit {
    x_half: f64,
    log_mu: f64,
    dxh_dx: f64,
    dxh_dg: f64,
    dl_dx: f64,
    dl_dg: f64,
}

/// Propagates the branch-restricted half orbit with first derivatives in
/// the initial point and in `gamma`. `None` when an iterate leaves its branch.
fn half_orbit(p: &FactorParams, word: &Itinerary, x0: f64) -> Option<HalfOrbit> {
    let (g, nu) = (p.gamma(), p.nu());
    let mut x = x0;
    let (mut dx, mut dg) = (1.0, 0.0);
    let (mut l, mut dl_dx, mut dl_dg) = (0.0, 0.0, 0.0);
    for &s in &word.0 {
        let sf = s.factor();
        let a = sf * x;
        if !(a > 0.0) {
            return None;
        }
        l += (g * nu).ln() + (nu - 1.0) * a.ln();
        dl_dx += (nu - 1.0) * dx / x;
        dl_dg += 1.0 / g + (nu - 1.0) * dg / x;
        let slope = g * nu * a.powf(nu - 1.0);
        let an = a.powf(nu);
        dg = sf * (an - 1.0) + slope * dg;
        dx *= slope;
        x = sf * (1.0 - g + g * an);
    }
    Some(HalfOrbit {
        x_half: x,
        log_mu: l,
        dxh_dx: dx,
        dxh_dg: dg,
        dl_dx,
        dl_dg,
    })
}

/// Point `x > 0` with `f^half(x) = -x` along `word`, closest to zero.
fn symmetric_point(p: &FactorParams, word: &Itinerary) -> Option<f64> {
    let r = |x: f64| {
        half_orbit(p, word, x)
            .map(|h| h.x_half + x)
            .unwrap_or(f64::NAN)
    };
    let mut grid: Vec<f64> = (1..=2000)
        .map(|k| k as f64 / 2000.0)
        .chain((1..=140).map(|k| 10f64.powf(-(k as f64) / 10.0)))
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (a, b) = *roots::sign_changes(r, &grid).first()?;
    if a == b {
        Some(a)
    } else {
        roots::bisect(r, a, b, 0.0).ok()
    }
}

const NEWTON_MAX: usize = 100;

/// Damped Newton on `f^half(x) + x = 0`, `ln (f^half)'(x) = 0` in `(x, gamma)`.
fn newton_symmetric(nu: f64, word: &Itinerary, x0: f64, g0: f64) -> Result<(f64, f64)> {
    let eval = |x: f64, g: f64| half_orbit(&FactorParams::new_unchecked(g, nu), word, x);
    let norm = |h: &HalfOrbit, x: f64| (h.x_half + x).hypot(h.log_mu);
    let (mut x, mut g) = (x0, g0);
    let mut cur = eval(x, g).ok_or_else(|| Error::no_root("Newton seed is not admissible"))?;
    let mut r = norm(&cur, x);
    for _ in 0..NEWTON_MAX {
        if r < 1e-15 {
            return Ok((g, x));
        }
        let (r1, r2) = (cur.x_half + x, cur.log_mu);
        let (j11, j12, j21, j22) = (cur.dxh_dx + 1.0, cur.dxh_dg, cur.dl_dx, cur.dl_dg);
        let det = j11 * j22 - j12 * j21;
        if !(det.is_finite() && det != 0.0) {
            break;
        }
        let sx = (r1 * j22 - r2 * j12) / det;
        let sg = (j11 * r2 - j21 * r1) / det;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let (xn, gn) = (x - lam * sx, g - lam * sg);
            if let Some(h) = eval(xn, gn) {
                let rn = norm(&h, xn);
                if rn < r {
                    x = xn;
                    g = gn;
                    cur = h;
                    r = rn;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r < 1e-12 {
        Ok((g, x))
    } else {
        Err(Error::NonConvergence {
            iterations: NEWTON_MAX,
            context: format!("pitchfork Newton stalled with residual {r}"),
        })
    }
}

/// `max(|f^m(x) - x|, |(f^m)'(x) - 1|)`.
fn full_orbit_residual(p: &FactorParams, x0: f64, m: usize) -> f64 {
    let mut x = x0;
    let mut mu = 1.0;
    for _ in 0..m {
        mu *= p.deriv_raw(x);
        x = p.apply(x);
    }
    (x - x0).abs().max((mu - 1.0).abs())
}

/// `H(n)` for any `nu > 0` when `n = 1`, `nu > 1` otherwise.
pub fn gamma_h(nu: f64, n: u32) -> Result<BifurcationPoint> {
    if n == 1 {
        if !(nu > 0.0) {
            return Err(Error::domain("nu", nu, "nu > 0"));
        }
        return Ok(BifurcationPoint::new(
            BifurcationKind::Homoclinic(1),
            1.0,
            0.0,
        ));
    }
    CascadeSolver::new(nu)?.h(n)
}

/// `F(n)` for `nu > 1`.
pub fn gamma_f(nu: f64, n: u32) -> Result<BifurcationPoint> {
    CascadeSolver::new(nu)?.f(n)
}

/// Heteroclinic value for `1/2 < nu < 1`: root of `g (g - 1)^(nu - 1) = 2`
/// below `1 / nu`, where `f(+0) = 1 - g` lands on the mirror of the fixed
/// point `g - 1`.
pub fn gamma_het(nu: f64) -> Result<BifurcationPoint> {
    if !(nu > 0.5 && nu < 1.0) {
        return Err(Error::domain("nu", nu, "1/2 < nu < 1"));
    }
    let eq = |g: f64| g * (g - 1.0).powf(nu - 1.0) - 2.0;
    let g = roots::bisect(eq, 1.0 + 1e-9, 1.0 / nu, 0.0)
        .map_err(|_| Error::no_root(format!("no heteroclinic root for nu = {nu}")))?;
    Ok(BifurcationPoint::new(
        BifurcationKind::Heteroclinic,
        g,
        eq(g).abs(),
    ))
}

/// Periodic points (and their mirrors) of nontrivial orbits with the given
/// itinerary, sorted.
fn orbit_targets(p: &FactorParams, word: &Itinerary) -> Vec<f64> {
    let orbits = match crate::factor::find_periodic_orbits(p, word) {
        Ok(o) => o,
        Err(_) => return Vec::new(),
    };
    let mut t: Vec<f64> = orbits
        .iter()
        .filter(|o| !o.is_trivial())
        .flat_map(|o| o.points.iter().flat_map(|&x| [x, -x]).collect::<Vec<_>>())
        .collect();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    t
}

/// Smallest `gamma` in `range` at which `f^m(+0)` lands on a point of a
/// nontrivial periodic orbit with the given itinerary (or on its mirror).
pub fn homoclinic_to_orbit(
    nu: f64,
    word: &Itinerary,
    m: usize,
    range: (f64, f64),
    step: f64,
) -> Result<BifurcationPoint> {
    if m == 0 || word.is_empty() {
        return Err(Error::invalid("lead length and word must be non-empty"));
    }
    if !(nu > 0.0) {
        return Err(Error::domain("nu", nu, "nu > 0"));
    }
    let (lo, hi) = (range.0.max(1e-9), range.1.min(2.0));
    if !(lo < hi && step > 0.0) {
        return Err(Error::invalid("empty scan range"));
    }
    let eval = |g: f64, j: usize, count: usize| -> f64 {
        let p = FactorParams::new_unchecked(g, nu);
        let t = orbit_targets(&p, word);
        if t.len() != count {
            return f64::NAN;
        }
        orbit_of_zero(&p, m) - t[j]
    };
    let n = ((hi - lo) / step).ceil() as usize;
    let mut prev: Option<(f64, Vec<f64>, f64)> = None;
    let mut seen_target = false;
    for k in 0..=n {
        let g = (lo + step * k as f64).min(hi);
        let p = FactorParams::new_unchecked(g, nu);
        let targets = orbit_targets(&p, word);
        seen_target |= !targets.is_empty();
        let lead = orbit_of_zero(&p, m);
        if let Some((gp, tp, lp)) = &prev {
            if tp.len() == targets.len() {
                let mut found: Vec<f64> = Vec::new();
                for j in 0..targets.len() {
                    let (a, b) = (lp - tp[j], lead - targets[j]);
                    if a == 0.0 || a.signum() == b.signum() {
                        continue;
                    }
                    let count = targets.len();
                    let Ok(root) = roots::bisect(|x| eval(x, j, count), *gp, g, 0.0) else {
                        continue;
                    };
                    let pr = FactorParams::new_unchecked(root, nu);
                    let t = orbit_targets(&pr, word);
                    if t.len() != count || t[j].abs() < 1e-8 {
                        continue;
                    }
                    let res = (orbit_of_zero(&pr, m) - t[j]).abs();
                    if res < 1e-10 {
                        found.push(root);
                    }
                }
                if let Some(&root) = found.iter().min_by(|a, b| a.partial_cmp(b).unwrap()) {
                    let kind = if word.len() == 2 {
                        BifurcationKind::HomToPeriod2
                    } else {
                        BifurcationKind::Heteroclinic
                    };
                    let count = targets.len();
                    let j = (0..count)
                        .min_by(|&a, &b| {
                            eval(root, a, count)
                                .abs()
                                .partial_cmp(&eval(root, b, count).abs())
                                .unwrap()
                        })
                        .unwrap_or(0);
                    return Ok(BifurcationPoint::new(
                        kind,
                        root,
                        eval(root, j, count).abs(),
                    ));
                }
            }
        }
        prev = Some((g, targets, lead));
    }
    if !seen_target {
        return Err(Error::OrbitNotFound {
            word: word.to_string(),
        });
    }
    Err(Error::no_root(format!(
        "f^{m}(+0) never lands on orbit {word} in [{lo}, {hi}]"
    )))
}

/// [`homoclinic_to_orbit`] with the smallest lead `m <= m_max` that succeeds.
pub fn homoclinic_to_orbit_min_lead(
    nu: f64,
    word: &Itinerary,
    m_max: usize,
    range: (f64, f64),
    step: f64,
) -> Result<(usize, BifurcationPoint)> {
    let mut last = Error::no_root("no lead length tried");
    for m in 1..=m_max {
        match homoclinic_to_orbit(nu, word, m, range, step) {
            Ok(pt) => return Ok((m, pt)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Geometric extrapolation of the `H(n)` sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HInfinity {
    pub value: f64,
    pub uncertainty: f64,
    /// Ratio of the last two gaps.
    pub ratio: f64,
}

impl HInfinity {
    pub fn point(&self) -> BifurcationPoint {
        BifurcationPoint::new(
            BifurcationKind::HInfinityEstimate,
            self.value,
            self.uncertainty,
        )
    }
}

fn extrapolate(hs: &[f64]) -> Result<HInfinity> {
    let n = hs.len();
    if n < 4 {
        return Err(Error::invalid("need at least three gaps"));
    }
    let d_last = hs[n - 1] - hs[n - 2];
    let d_prev = hs[n - 2] - hs[n - 3];
    let ratio = d_last / d_prev;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::NonConvergence {
            iterations: n,
            context: format!("cascade gaps not contracting (ratio {ratio})"),
        });
    }
    let tail = d_last * ratio / (1.0 - ratio);
    Ok(HInfinity {
        value: hs[n - 1] + tail,
        uncertainty: tail,
        ratio,
    })
}

/// Extrapolated accumulation point of the cascade from `H(1..=n_max)`.
pub fn estimate_h_infinity(nu: f64, n_max: u32) -> Result<HInfinity> {
    if n_max < 4 {
        return Err(Error::invalid("n_max must be at least 4"));
    }
    let mut s = CascadeSolver::new(nu)?;
    let hs = (1..=n_max)
        .map(|n| s.h(n).map(|p| p.gamma))
        .collect::<Result<Vec<_>>>()?;
    extrapolate(&hs)
}

/// Ordered cascade `AH, H(1), F(1), H(2), ..., F(n_max - 1), H(n_max)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeTable {
    pub nu: f64,
    pub entries: Vec<BifurcationPoint>,
    pub h_infinity: Option<HInfinity>,
    /// Entries that failed to solve, with the error.
    pub failures: Vec<(String, Error)>,
}

impl CascadeTable {
    pub fn gammas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.gamma).collect()
    }

    pub fn with_flow(mut self, lambda: f64, omega: f64) -> Self {
        self.entries = self
            .entries
            .into_iter()
            .map(|e| e.with_flow(lambda, omega))
            .collect();
        self
    }
}

/// Solves the cascade up to `H(n_max)`; stops at the first failure and
/// returns the partial table.
pub fn cascade(nu: f64, n_max: u32) -> Result<CascadeTable> {
    cascade_with(nu, n_max, ScanOptions::default())
}

/// [`cascade`] with explicit scan options.
pub fn cascade_with(nu: f64, n_max: u32, opts: ScanOptions) -> Result<CascadeTable> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut s = CascadeSolver::with_options(nu, opts)?;
    let mut entries = vec![BifurcationPoint::new(
        BifurcationKind::TranscriticalAh,
        1.0 / nu,
        0.0,
    )];
    let mut failures = Vec::new();
    'levels: for n in 1..=n_max {
        let mut wanted = vec![(format!("H level {n}"), true)];
        if n < n_max {
            wanted.push((format!("F level {n}"), false));
        }
        for (name, is_h) in wanted {
            match if is_h { s.h(n) } else { s.f(n) } {
                Ok(p) => entries.push(p),
                Err(e) => {
                    failures.push((name, e));
                    break 'levels;
                }
            }
        }
    }
    let hs: Vec<f64> = entries
        .iter()
        .filter(|e| matches!(e.kind, BifurcationKind::Homoclinic(_)))
        .map(|e| e.gamma)
        .collect();
    let h_infinity = if hs.len() >= 4 {
        extrapolate(&hs).ok()
    } else {
        None
    };
    Ok(CascadeTable {
        nu,
        entries,
        h_infinity,
        failures,
    })
}

/// One row of a bifurcation-curve export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub nu: f64,
    pub kind: String,
    pub n: Option<u32>,
    pub gamma: f64,
    pub b: f64,
    pub residual: f64,
}

/// Samples every applicable curve at the given `nu` values: the
/// transcritical and primary homoclinic curves everywhere, the heteroclinic
/// curve for `1/2 < nu < 1`, the cascade up to `n_max` for `nu > 1`, and
/// the sliding threshold.
pub fn curve_rows(nus: &[f64], n_max: u32, lambda: f64, omega: f64) -> Vec<CurveRow> {
    let mut rows = Vec::new();
    let mut push = |nu: f64, p: &BifurcationPoint| {
        rows.push(CurveRow {
            nu,
            kind: p.kind.label(),
            n: p.kind.level(),
            gamma: p.gamma,
            b: to_b(p.gamma, lambda, omega),
            residual: p.residual,
        })
    };
    for &nu in nus {
        if !(nu > 0.0) {
            continue;
        }
        push(
            nu,
            &BifurcationPoint::new(BifurcationKind::TranscriticalAh, 1.0 / nu, 0.0),
        );
        if nu > 1.0 {
            if let Ok(t) = cascade(nu, n_max) {
                for e in t.entries.iter().skip(1) {
                    push(nu, e);
                }
                if let Some(h) = &t.h_infinity {
                    push(nu, &h.point());
                }
            }
        } else {
            push(
                nu,
                &BifurcationPoint::new(BifurcationKind::Homoclinic(1), 1.0, 0.0),
            );
            if let Ok(h) = gamma_het(nu) {
                push(nu, &h);
            }
        }
        push(nu, &critical_sliding(lambda, omega));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(gamma_ah(1.25).unwrap(), 0.8);
        assert_eq!(gamma_ah(2.0).unwrap(), 0.5);
        assert_eq!(to_b(1.0, 0.294, 2.0), b_h1(0.294, 2.0));
        assert!((b_cr(0.294, 2.0) - 3.95548).abs() < 1e-4);
    }

    #[test]
    fn h_level_one_is_exact() {
        for nu in [0.6, 1.0, 1.7] {
            assert_eq!(gamma_h(nu, 1).unwrap().gamma, 1.0);
        }
    }

    #[test]
    fn cascade_requires_contracting_case() {
        assert!(gamma_h(0.9, 2).is_err());
        assert!(gamma_f(1.0, 1).is_err());
    }

    #[test]
    fn het_domain() {
        assert!(gamma_het(0.4).is_err());
        assert!(gamma_het(1.2).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(BifurcationKind::Homoclinic(3).label(), "H4");
        assert_eq!(BifurcationKind::Pitchfork(2).label(), "F4");
    }
}
