use flatland::curves::{j_from_pattern, Polarity, TangencyKind};
use flatland::polyfam::cells::{cell_boundary, chain, chain_boundary, forbidden_codim2, j_strata, Chain};
use flatland::polyfam::exact::{pattern_of, QPoly};
use flatland::polyfam::{
    delta_curves, j_invariant, loops, perturbation_trials, track_loop, PolyError, PolyLoop, RootPattern,
    DEFAULT_RESOLUTION,
};
use proptest::prelude::*;

#[test]
fn pattern_examples() {
    assert_eq!(pattern_of(&QPoly::from_ints(&[1, 0, 1])).unwrap(), RootPattern(vec![]));
    // u³(u − 2)
    assert!(matches!(
        pattern_of(&QPoly::from_ints(&[0, 0, 0, -2, 1])),
        Err(PolyError::Forbidden { multiplicity: 3, .. })
    ));
    // (u+1)(u−1)²(u−3) = u⁴ − 4u³ + 2u² + 4u − 3
    assert_eq!(pattern_of(&QPoly::from_ints(&[-3, 4, 2, -4, 1])).unwrap(), "121".parse().unwrap());
}

#[test]
fn generator_three_ways() {
    let l = loops::quartic_generator();
    let t = track_loop(&l, DEFAULT_RESOLUTION).unwrap();
    assert!(t.discriminant_check && t.kind_rule_check);
    assert!(t.strand_bound <= 4);
    let j = j_invariant(&l).unwrap();
    assert_eq!((j.census, j.strata), (1, 1));
    let p = delta_curves(&l, DEFAULT_RESOLUTION).unwrap();
    assert_eq!(j_from_pattern(&p).unwrap().j, 1);
    assert_eq!(j_invariant(&l.reversed()).unwrap().value(), -1);
    assert_eq!(j_invariant(&l.power(2)).unwrap().value(), 2);
}

#[test]
fn trivial_loops() {
    assert!(track_loop(&loops::rootless(), 256).unwrap().events.is_empty());
    assert_eq!(j_invariant(&loops::rootless()).unwrap().value(), 0);
    let p = delta_curves(&loops::two_circles(), 256).unwrap();
    assert_eq!(p.loops.len(), 2);
    assert_eq!(p.fiber(1.0).len(), 2);
    assert!(matches!(track_loop(&loops::through_triple_root(), 512), Err(PolyError::Forbidden { .. })));
}

#[test]
fn sextic_matches_quartic_events() {
    let a = track_loop(&loops::quartic_generator(), 1024).unwrap().events;
    let b = track_loop(&loops::sextic_generator(), 1024).unwrap().events;
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.theta - y.theta).abs() < 1e-7);
        assert_eq!((x.kind, x.polarity, x.birth), (y.kind, y.polarity, y.birth));
    }
    assert_eq!(j_invariant(&loops::sextic_double()).unwrap().value(), 2);
}

#[test]
fn event_kinds_follow_the_odd_rule() {
    for l in [loops::quartic_generator(), loops::sextic_double()] {
        for e in track_loop(&l, 1024).unwrap().events {
            let i = e.pattern.0.iter().position(|&m| m == 2).unwrap();
            let right = e.pattern.0.len() - 1 - i;
            assert_eq!(e.kind == TangencyKind::Concave, right % 2 == 1);
            assert_eq!(e.polarity == Polarity::Plus, e.birth == (e.kind == TangencyKind::Concave));
        }
    }
}

#[test]
fn forbidden_chain_relation() {
    let cells = chain(&[("12111", 1), ("11121", 1), ("121", -1)]);
    let b = chain_boundary(&cells, 6).unwrap();
    let forb: Chain = b.iter().filter(|(p, _)| p.0.iter().any(|&m| m >= 3)).map(|(p, c)| (p.clone(), *c)).collect();
    assert_eq!(forb, chain(&[("3111", 1), ("1311", -1), ("1131", 1), ("1113", -1), ("31", -1), ("13", 1)]));
    for p in forb.keys() {
        assert!(forbidden_codim2(6).contains(p));
    }
    assert_eq!(j_strata(6).len(), 3);
    assert!(cell_boundary(&"1212".parse().unwrap(), 6).is_ok());
}

#[test]
fn loop_json_round_trip() {
    let l = loops::sextic_generator();
    assert_eq!(PolyLoop::from_json(&l.to_json()).unwrap(), l);
    assert!(PolyLoop::from_json("{\"degree\":3,\"coeffs\":[]}").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn perturbations_keep_j(seed in any::<u64>()) {
        for j in perturbation_trials(&loops::quartic_generator(), 1e-2, 3, seed).into_iter().flatten() {
            prop_assert_eq!(j.value(), 1);
        }
    }

    #[test]
    fn rootless_factor_keeps_j(a in 0.5f64..4.0, b in -2.0f64..2.0) {
        let f = PolyLoop::constant(&[a + b * b / 4.0 + 0.01, b]).unwrap();
        prop_assert_eq!(j_invariant(&loops::quartic_generator().mul(&f)).unwrap().value(), 1);
    }
}
