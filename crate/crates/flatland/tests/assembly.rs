mod common;

use std::collections::BTreeSet;

use flatland::assembly::{assemble, boundary_cycles, classify, tangency_census, SurfaceClass};
use flatland::flowgraph::{boundary_connect_sum, enumerate_tricolorings, named, validate};
use proptest::prelude::*;

fn class_set(g: &flatland::flowgraph::TrivalentGraph) -> BTreeSet<SurfaceClass> {
    enumerate_tricolorings(g).iter().map(|c| classify(&assemble(g, c).unwrap()).unwrap()).collect()
}

#[test]
fn small_graph_classes() {
    let caps = named::capped_edge();
    let disk = assemble(&caps, &named::all_caps(&caps)).unwrap();
    assert_eq!(classify(&disk).unwrap(), SurfaceClass::disk());
    assert_eq!(boundary_cycles(&disk).unwrap().len(), 1);
    let gm = named::g_m();
    let m = assemble(&gm, &named::g_m_coloring()).unwrap();
    assert_eq!(classify(&m).unwrap(), SurfaceClass::mobius());
    assert_eq!(class_set(&gm), BTreeSet::from([SurfaceClass::mobius(), SurfaceClass::annulus()]));
    for c in enumerate_tricolorings(&gm) {
        let t = tangency_census(&assemble(&gm, &c).unwrap()).unwrap();
        assert_eq!((t.concave_points.len(), t.convex_points.len()), (1, 1));
    }
}

#[test]
fn two_vertex_classes_have_euler_minus_one() {
    for g in [named::theta(), named::dumbbell()] {
        for s in class_set(&g) {
            assert_eq!(s.euler, -1);
            assert_eq!(s.boundary_components as i64, 2 - s.genus as i64 * if s.orientable { 2 } else { 1 } + 1);
        }
    }
}

#[test]
fn connected_sum_of_thetas() {
    let t = named::colored(named::theta(), named::straight(&named::theta()));
    let s = boundary_connect_sum(&t, &t);
    let surf = assemble(&s.graph, &s.coloring).unwrap();
    assert_eq!(tangency_census(&surf).unwrap().concave_points.len(), 6);
    assert_eq!(classify(&surf).unwrap().euler, -3);
}

#[test]
fn exhaustive_four_vertex_identities() {
    for (g, c) in common::all_colored(4) {
        let surf = assemble(&g, &c).unwrap();
        surf.check().unwrap();
        let class = classify(&surf).unwrap();
        let t = tangency_census(&surf).unwrap();
        assert_eq!(class.euler, g.euler());
        assert_eq!(t.concave_points.len(), g.trivalent_count());
        assert_eq!(t.convex_points.len(), g.univalent_count());
        assert_eq!(t.concave_points.len() as i64 - t.convex_points.len() as i64, -2 * class.euler);
        if g.univalent_count() == 0 && class.orientable && !g.is_circle() {
            let (gg, k) = (class.genus as i64, class.boundary_components as i64);
            assert_eq!(t.concave_points.len() as i64, 4 * gg - 4 + 2 * k);
        }
        if t.concave_points.is_empty() && t.convex_points.is_empty() {
            assert!(class == SurfaceClass::disk() || class == SurfaceClass::annulus());
        }
    }
}

#[test]
fn json_dump_round_trips() {
    let g = named::theta();
    let surf = assemble(&g, &named::straight(&g)).unwrap();
    let s = serde_json::to_string(&surf).unwrap();
    let back: flatland::assembly::SurfaceComplex = serde_json::from_str(&s).unwrap();
    assert_eq!(back, surf);
}

#[test]
fn strip_svg_is_deterministic() {
    let g = named::dumbbell();
    let c = named::straight(&g);
    let a = flatland::assembly::strip_svg(&g, &c);
    assert_eq!(a, flatland::assembly::strip_svg(&g, &c));
    assert!(a.starts_with("<svg"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn euler_equals_graph_euler(gi in 0usize..1000, k in any::<u64>()) {
        let graphs = common::graphs_up_to_six();
        let g = &graphs[gi % graphs.len()];
        let c = common::coloring_by_index(g, k);
        prop_assert!(validate(g, &c).is_valid());
        let surf = assemble(g, &c).unwrap();
        let class = classify(&surf).unwrap();
        prop_assert_eq!(class.euler, g.euler());
        let t = tangency_census(&surf).unwrap();
        prop_assert_eq!(t.concave_points.len() as i64 - t.convex_points.len() as i64, -2 * class.euler);
    }
}
