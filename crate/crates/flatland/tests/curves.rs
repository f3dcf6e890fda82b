use flatland::curves::{
    certify, checkerboard_sign, classify_tangencies_oriented, gauss_degree, j_from_pattern, random_loop,
    self_intersections, shapes, snake, trajectory_graph_euler, vertical_tangencies, whitney_report, Ambient,
    CurveError, CurvePattern, ImmersedCurve, Polarity, SnakeParams, TangencyKind,
};
use proptest::prelude::*;

fn single(c: ImmersedCurve) -> CurvePattern {
    CurvePattern::single(c)
}

#[test]
fn circle_examples() {
    let c = shapes::circle([0.0, 0.0], 1.0, 512);
    let si = self_intersections(&c).unwrap();
    assert_eq!((si.n_plus, si.n_minus, si.mu), (0, 0, 1));
    assert_eq!(gauss_degree(&c).unwrap(), 1);
    assert_eq!(gauss_degree(&c.reversed()).unwrap(), -1);
    let p = single(c.clone());
    assert_eq!(checkerboard_sign(&p, [3.0, 0.2]).unwrap(), 1);
    assert_eq!(checkerboard_sign(&p, [0.1, 0.2]).unwrap(), -1);
    let ev = vertical_tangencies(&p).unwrap();
    assert_eq!(ev.len(), 2);
    assert!(ev.iter().all(|e| e.kind == TangencyKind::Convex && e.order == 2));
    let w = whitney_report(&c, &ev).unwrap();
    assert!(w.whitney_holds && w.region_holds);
    assert_eq!(j_from_pattern(&p).unwrap().j, 0);
}

#[test]
fn figure_eight_examples() {
    let c = shapes::figure_eight(512);
    let si = self_intersections(&c).unwrap();
    assert_eq!(si.n_plus + si.n_minus, 1);
    assert_eq!(si.mu + si.n_plus as i64 - si.n_minus as i64, 0);
    assert_eq!(gauss_degree(&c).unwrap(), 0);
    let p = single(c);
    assert_eq!(checkerboard_sign(&p, [0.0, 0.6]).unwrap(), -1);
    assert_eq!(checkerboard_sign(&p, [0.0, -0.6]).unwrap(), -1);
}

#[test]
fn annular_region_has_two_concave_events() {
    let p = shapes::annular_region(400);
    let ev = vertical_tangencies(&p).unwrap();
    let inner: Vec<_> = ev.iter().filter(|e| e.loop_index == 1).collect();
    assert_eq!(inner.len(), 2);
    assert!(inner.iter().all(|e| e.kind == TangencyKind::Concave));
    let r = j_from_pattern(&p).unwrap();
    assert_eq!((r.j, r.c_plus), (0, 2));
}

#[test]
fn notched_disk_is_a_generator() {
    let p = single(shapes::notched_disk(600));
    let r = j_from_pattern(&p).unwrap();
    assert_eq!((r.j, r.concave_plus, r.concave_minus, r.convex), (1, 1, 0, 3));
    assert_eq!(j_from_pattern(&p.mirrored()).unwrap().j, -1);
}

#[test]
fn torus_boundary_identities() {
    let c = shapes::punctured_torus_boundary(160);
    let si = self_intersections(&c).unwrap();
    assert!(si.n_plus + si.n_minus >= 4);
    let ev = classify_tangencies_oriented(&single(c.clone())).unwrap();
    let w = whitney_report(&c, &ev).unwrap();
    assert!(w.whitney_holds);
    assert!(w.region_holds);
    assert_eq!(w.region_degree, Some(-1));
}

#[test]
fn snake_increments_j_and_keeps_graph_euler() {
    for p in
        [single(shapes::circle([0.0, 0.0], 1.0, 400)), single(shapes::notched_disk(600)), shapes::annular_region(400)]
    {
        let before = vertical_tangencies(&p).unwrap();
        let s = snake(&p, 0, p.loops[0].len() / 3, SnakeParams::default()).unwrap();
        let after = vertical_tangencies(&s).unwrap();
        assert_eq!(j_from_pattern(&s).unwrap().j, j_from_pattern(&p).unwrap().j + 1);
        assert_eq!(trajectory_graph_euler(&after), trajectory_graph_euler(&before));
        let plus = |ev: &[flatland::curves::TangencyEvent]| {
            ev.iter().filter(|e| e.kind == TangencyKind::Concave && e.polarity == Polarity::Plus).count()
        };
        assert_eq!(plus(&after), plus(&before) + 1);
    }
}

#[test]
fn genericity_failures() {
    let vertical = ImmersedCurve::plane(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.5]]);
    assert!(certify(&single(vertical)).is_err());
    let two = ImmersedCurve::plane(vec![[0.0, 0.0], [1.0, 1.0]]);
    assert!(matches!(certify(&single(two)), Err(CurveError::TooFewPoints(0))));
    let tiny = CurvePattern::from_json("{\"format\":1,\"ambient\":\"plane\",\"loops\":[[[0,0]]]}").unwrap();
    assert!(certify(&tiny).is_err());
    assert!(CurvePattern::from_json("{\"format\":2,\"ambient\":\"plane\",\"loops\":[]}").is_err());
}

#[test]
fn json_round_trip() {
    let p = shapes::pair_of_pants(200);
    let back = CurvePattern::from_json(&p.to_json()).unwrap();
    assert_eq!(back.ambient, Ambient::Plane);
    assert_eq!(back.to_json(), p.to_json());
}

#[test]
fn random_loops_satisfy_whitney() {
    for seed in 0..20 {
        let c = random_loop(seed, 3, 512).unwrap();
        let ev = vertical_tangencies(&single(c.clone())).unwrap();
        assert!(whitney_report(&c, &ev).unwrap().whitney_holds, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reversal_negates_degree(seed in 100u64..10_000) {
        let c = random_loop(seed, 3, 512).unwrap();
        prop_assert_eq!(gauss_degree(&c.reversed()).unwrap(), -gauss_degree(&c).unwrap());
    }

    #[test]
    fn j_invariant_under_translation(dt in -3.0f64..3.0, du in -3.0f64..3.0) {
        let p = single(shapes::notched_disk(600));
        prop_assert_eq!(j_from_pattern(&p.translated(dt, du)).unwrap().j, 1);
        let a = shapes::annular_region(300);
        prop_assert_eq!(j_from_pattern(&a.translated(dt, du)).unwrap().j, 0);
    }

    #[test]
    fn concave_convex_parity(seed in 0u64..10_000) {
        let c = random_loop(seed, 2, 400).unwrap();
        let r = j_from_pattern(&single(c)).unwrap();
        prop_assert!(r.bound_holds);
        prop_assert_eq!((r.c_plus + r.convex) % 2, 0);
    }
}
