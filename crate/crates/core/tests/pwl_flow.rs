use proptest::prelude::*;
use pwl_lorenz::bifurcation::{b_cr, b_h1};
use pwl_lorenz::pwl::{
    exact_flow, locate_primary_homoclinic, return_map_d, simulate, sliding_check,
    unstable_manifold_shoot, vector_field, PwlParams, Region, SimOptions, Termination,
};
use pwl_lorenz::section::{self, q_of, Section2Params, SectionPoint};
use pwl_lorenz::State3;

fn reference(b: f64) -> PwlParams {
    PwlParams::reference(0.65, b).unwrap()
}

fn close(a: State3, b: State3, tol: f64) -> bool {
    a.dist(b) <= tol * (1.0 + a.norm())
}

#[test]
fn contraction_factor_of_reference_parameters() {
    assert!((q_of(0.588, 2.0) - 0.250213090985662).abs() < 1e-14);
    assert!((reference(3.4).q() - q_of(0.588, 2.0)).abs() < 1e-15);
}

#[test]
fn flow_return_map_equals_section_map() {
    for b in [2.3, 2.8, 3.4, 3.9] {
        let p = reference(b);
        let m = p.section_params().unwrap();
        let mut worst = 0.0f64;
        for i in 0..12 {
            for j in 0..12 {
                let pt = SectionPoint::new(
                    -1.0 + (2 * i + 1) as f64 / 12.0,
                    -1.0 + (2 * j + 1) as f64 / 12.0,
                );
                let a = return_map_d(pt, &p).unwrap();
                let e = m.eval(pt).unwrap().point;
                worst = worst.max((a.x - e.x).abs().max((a.y - e.y).abs()));
            }
        }
        assert!(worst < 1e-9, "b {b}: {worst}");
    }
}

#[test]
fn return_map_domain_errors() {
    let p = reference(3.4);
    assert!(return_map_d(SectionPoint::new(1.5, 0.0), &p).is_err());
    assert!(return_map_d(SectionPoint::new(0.0, 0.2), &p).is_err());
}

#[test]
fn separatrix_split_changes_sign_at_primary_homoclinic() {
    let h1 = b_h1(0.294, 2.0);
    let before = unstable_manifold_shoot(1e-9, 1.0, &reference(h1 - 0.01)).unwrap();
    let after = unstable_manifold_shoot(1e-9, 1.0, &reference(h1 + 0.01)).unwrap();
    assert!(before.split > 0.0 && after.split < 0.0);
    let b = locate_primary_homoclinic(&reference(2.0), 1.9, 2.1, 1e-12).unwrap();
    assert!((b - h1).abs() < 1e-9, "{b} vs {h1}");
}

#[test]
fn sliding_guard_beyond_critical_value() {
    let bc = b_cr(0.294, 2.0);
    let on = State3::new(1.0, 0.3, bc + 0.5);
    assert!(!sliding_check(&on, &reference(3.4)).global_guard);
    assert!(sliding_check(&on, &reference(bc + 0.01)).global_guard);
}

#[test]
fn focus_trajectory_converges_before_first_homoclinic() {
    let p = reference(1.5);
    let opts = SimOptions {
        max_time: 500.0,
        ..Default::default()
    };
    let t = simulate(State3::new(1e-6, 0.0, 0.0), &p, &opts).unwrap();
    let end = t.end_state().unwrap();
    let focus = State3::new(1.0, 1.0, 1.5);
    assert!(
        matches!(t.termination, Termination::Converged { .. }) || end.dist(focus) < 1e-3,
        "{:?} {end:?}",
        t.termination
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn section_map_is_odd(g in 0.0f64..=2.0, nu in 0.3f64..1.9, x in -1.0f64..=1.0, y in -1.0f64..=1.0) {
        let m = Section2Params::new(g, 0.25, nu, 2.0).unwrap();
        let a = m.apply(SectionPoint::new(x, y));
        let b = m.apply(SectionPoint::new(-x, -y));
        prop_assert_eq!(a.x, -b.x);
        prop_assert_eq!(a.y, -b.y);
    }

    #[test]
    fn section_map_x_is_the_factor_map(g in 0.0f64..=2.0, nu in 0.3f64..1.9, x in -1.0f64..=1.0, y in -1.0f64..=1.0) {
        let m = Section2Params::new(g, 0.25, nu, 2.0).unwrap();
        prop_assert_eq!(m.apply(SectionPoint::new(x, y)).x, m.factor().apply(x));
        let o = section::iterate(&m, SectionPoint::new(x, y), 10, 0).unwrap();
        let f = pwl_lorenz::factor::iterate(&m.factor(), x, 10, 0).unwrap();
        for (a, b) in o.points.iter().zip(&f.points) {
            prop_assert_eq!(a.x, *b);
        }
    }

    #[test]
    fn y_direction_contracts(g in 0.0f64..=2.0, q in 0.01f64..0.99, x in -1.0f64..=1.0, y1 in -1.0f64..=1.0, y2 in -1.0f64..=1.0) {
        let m = Section2Params::new(g, q, 0.65, 2.0).unwrap();
        let a = m.apply(SectionPoint::new(x, y1)).y;
        let b = m.apply(SectionPoint::new(x, y2)).y;
        prop_assert!((a - b).abs() <= q * (y1 - y2).abs() * (1.0 + 1e-12));
        prop_assert!(m.y_contraction(x) <= q);
    }

    #[test]
    fn vector_fields_are_odd(b in 0.5f64..3.9, x in -2.0f64..2.0, y in -2.0f64..2.0, z in -1.0f64..5.0) {
        let p = reference(b);
        let s = State3::new(x, y, z);
        for r in [Region::S, Region::L, Region::R] {
            let f = vector_field(&s, r, &p);
            let g = vector_field(&s.mirror(), r.mirror(), &p);
            prop_assert!(close(f.mirror(), g, 1e-15));
        }
    }

    #[test]
    fn closed_form_flow_is_a_semigroup(b in 0.5f64..3.9, x in -1.0f64..1.0, y in -1.0f64..1.0, z in 0.0f64..4.0, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let p = reference(b);
        let s = State3::new(x, y, z);
        for r in [Region::S, Region::L, Region::R] {
            let a = exact_flow(&exact_flow(&s, r, t1, &p), r, t2, &p);
            let c = exact_flow(&s, r, t1 + t2, &p);
            prop_assert!(close(a, c, 1e-12), "{:?}", r);
        }
    }

    #[test]
    fn closed_form_flow_solves_the_field(b in 0.5f64..3.9, x in -1.0f64..1.0, y in -1.0f64..1.0, z in 0.0f64..4.0, t in 0.0f64..1.0) {
        let p = reference(b);
        let s = State3::new(x, y, z);
        let h = 1e-6;
        for r in [Region::S, Region::L, Region::R] {
            let fd = (0.5 / h) * (exact_flow(&s, r, t + h, &p) - exact_flow(&s, r, t - h, &p));
            let v = vector_field(&exact_flow(&s, r, t, &p), r, &p);
            prop_assert!(fd.dist(v) <= 1e-4 * (1.0 + v.norm()), "{:?}", r);
        }
    }

    #[test]
    fn mirrored_trajectories(b in 0.5f64..3.9, x in -0.99f64..0.99, y in -0.99f64..0.99) {
        let p = reference(b);
        let opts = SimOptions { max_time: 20.0, ..Default::default() };
        let s = State3::new(x, y, b);
        let a = simulate(s, &p, &opts);
        let m = simulate(s.mirror(), &p, &opts);
        match (a, m) {
            (Ok(a), Ok(m)) => {
                prop_assert_eq!(a.segments.len(), m.segments.len());
                for (u, v) in a.segments.iter().zip(&m.segments) {
                    prop_assert_eq!(u.region.mirror(), v.region);
                    prop_assert!(close(u.state_exit.mirror(), v.state_exit, 1e-12));
                }
            }
            (Err(a), Err(m)) => prop_assert_eq!(a.kind(), m.kind()),
            _ => prop_assert!(false, "only one side failed"),
        }
    }
}
