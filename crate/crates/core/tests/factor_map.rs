use proptest::prelude::*;
use pwl_lorenz::bifurcation::{cascade, gamma_f, gamma_h, gamma_het};
use pwl_lorenz::factor::{
    detect_attractor, find_periodic_orbits, iterate, lyapunov_1d, AttractorBudget, FactorParams,
    Itinerary,
};

/// Plain bisection for the oracles below, independent of the library.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "oracle bracket");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn f(g: f64, nu: f64, x: f64) -> f64 {
    (1.0 - g + g * x.abs().powf(nu)) * x.signum()
}

#[test]
fn second_homoclinic_matches_two_step_return() {
    // f(f(+0)) = 0 with f(+0) = 1 - g < 0 reads 1 - g + g (g - 1)^nu = 0.
    for nu in [1.1, 1.25, 1.5] {
        let oracle = bisect(|g| 1.0 - g + g * (g - 1.0).powf(nu), 1.0 + 1e-9, 2.0);
        let h2 = gamma_h(nu, 2).unwrap();
        assert!((h2.gamma - oracle).abs() < 1e-10, "nu {nu}");
        assert!(h2.residual < 1e-10);
    }
}

#[test]
fn first_pitchfork_matches_symmetric_two_cycle() {
    // Symmetric 2-cycle {x, -x}: f(x) = -x with multiplier (g nu x^(nu-1))^2 = 1.
    for nu in [1.1, 1.25, 1.5] {
        let eq = |g: f64| {
            let x = (g * nu).powf(-1.0 / (nu - 1.0));
            1.0 - g + g * x.powf(nu) + x
        };
        let oracle = bisect(eq, 1.0 + 1e-6, gamma_h(nu, 2).unwrap().gamma);
        let f1 = gamma_f(nu, 1).unwrap();
        assert!(
            (f1.gamma - oracle).abs() < 1e-9,
            "nu {nu}: {} vs {oracle}",
            f1.gamma
        );
    }
}

#[test]
fn heteroclinic_matches_interior_fixed_point() {
    // f(+0) = 1 - g lands on the mirror of the interior fixed point x*.
    for nu in [0.55, 0.65, 0.8] {
        let x_star = |g: f64| bisect(|x| f(g, nu, x) - x, 1e-12, 1.0 - 1e-6);
        let oracle = bisect(|g| (1.0 - g) + x_star(g), 1.0 + 1e-6, 1.0 / nu - 1e-3);
        let het = gamma_het(nu).unwrap();
        assert!((het.gamma - oracle).abs() < 1e-8, "nu {nu}");
    }
    // Frozen value of the reference diagram.
    assert!((gamma_het(0.65).unwrap().gamma - 1.2784122926).abs() < 1e-9);
}

#[test]
fn cascade_reference_values() {
    let t = cascade(1.25, 5).unwrap();
    let g = t.gammas();
    let frozen = [0.8, 1.0, 1.2771328984, 1.3247179572, 1.4070176999];
    for (a, b) in g.iter().zip(frozen) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    let h = t.h_infinity.expect("extrapolated");
    assert!(h.value > g[g.len() - 1] && h.value < 1.5);
}

#[test]
fn plastic_number_at_second_homoclinic() {
    // At nu = 1.25 the two-step condition has the plastic number as a root.
    let rho = 1.324717957244746;
    assert!((gamma_h(1.25, 2).unwrap().gamma - rho).abs() < 1e-12);
}

#[test]
fn periodic_orbits_with_itinerary() {
    let p = FactorParams::new(1.3, 1.25).unwrap();
    let orbits = find_periodic_orbits(&p, &"+-".parse::<Itinerary>().unwrap()).unwrap();
    assert!(!orbits.is_empty());
    for o in &orbits {
        assert_eq!(o.period, 2);
        assert!(o.residual < 1e-12);
        let (a, b) = (o.points[0], o.points[1]);
        assert!((f(1.3, 1.25, a) - b).abs() < 1e-12 && (f(1.3, 1.25, b) - a).abs() < 1e-12);
    }
    assert!(orbits.iter().any(|o| o.self_symmetric));
}

#[test]
fn attractors_along_the_cascade() {
    let b = AttractorBudget::default();
    let at = |g: f64| detect_attractor(&FactorParams::new(g, 1.25).unwrap(), 0.999, &b).unwrap();
    assert!(at(0.7).is_focus());
    assert_eq!(at(0.9).period, Some(1));
    assert!(!at(0.9).is_focus());
    assert_eq!(at(1.1).period, Some(2));
    assert!(at(1.1).self_symmetric);
    assert_eq!(at(1.3).period, Some(2));
    assert!(!at(1.3).self_symmetric);
    assert_eq!(at(1.9).period, None);
    assert!(lyapunov_1d(&FactorParams::new(1.9, 1.25).unwrap(), 0.999, 20000, 1000).unwrap() > 0.0);
}

#[test]
fn discontinuity_hits_are_reported() {
    // At H2 the orbit of +0 returns to the discontinuity every second step.
    let p = FactorParams::new(gamma_h(1.25, 2).unwrap().gamma, 1.25).unwrap();
    let it = iterate(&p, 0.0, 6, 0).unwrap();
    assert_eq!(it.hits, vec![2, 4, 6]);
    assert!(iterate(&p, 1.5, 3, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn map_is_odd(g in 0.0f64..=2.0, nu in 0.1f64..3.0, x in -1.0f64..=1.0) {
        let p = FactorParams::new(g, nu).unwrap();
        prop_assert_eq!(p.eval(-x).unwrap(), -p.eval(x).unwrap());
    }

    #[test]
    fn map_keeps_the_unit_interval(g in 0.0f64..=2.0, nu in 0.1f64..3.0, x in -1.0f64..=1.0) {
        let p = FactorParams::new(g, nu).unwrap();
        prop_assert!(p.eval(x).unwrap().abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn derivative_matches_differences(g in 0.1f64..=2.0, nu in 0.3f64..3.0, x in 0.05f64..0.95) {
        let p = FactorParams::new(g, nu).unwrap();
        let h = 1e-6;
        let fd = (p.eval(x + h).unwrap() - p.eval(x - h).unwrap()) / (2.0 * h);
        let d = p.deriv(x).unwrap();
        prop_assert!((fd - d).abs() <= 1e-6 * (1.0 + d.abs()));
        prop_assert_eq!(p.deriv(-x).unwrap(), d);
    }

    #[test]
    fn mirrored_orbits(g in 0.0f64..=2.0, nu in 0.3f64..3.0, x in -1.0f64..=1.0) {
        let p = FactorParams::new(g, nu).unwrap();
        let a = iterate(&p, x, 20, 0).unwrap();
        let b = iterate(&p, -x, 20, 0).unwrap();
        for (u, v) in a.points.iter().zip(&b.points) {
            prop_assert_eq!(*u, -*v);
        }
        prop_assert_eq!(a.hits, b.hits);
    }
}
