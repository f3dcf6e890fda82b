//! Regenerates the shipped fixtures: `cargo run -p flatland --example write_fixtures [DIR]`.

use std::path::PathBuf;

use flatland::curves::{shapes, CurvePattern, ImmersedCurve};
use flatland::flowgraph::{boundary_connect_sum, named, ColoringDoc, GraphDoc, Tricoloring, TrivalentGraph};
use flatland::patterns::words;
use flatland::polyfam::{delta_curves, loops, DEFAULT_RESOLUTION};

fn graph_pair(name: &str, g: &TrivalentGraph, c: &Tricoloring, out: &mut Vec<(String, String)>) {
    out.push((format!("graphs/{name}.json"), GraphDoc::from_graph(g, None).to_json()));
    out.push((format!("colorings/{name}.json"), ColoringDoc::from_coloring(c).to_json()));
}

fn plane(c: ImmersedCurve) -> CurvePattern {
    CurvePattern::single(c)
}

/// Relative path and contents of every fixture.
pub fn fixtures() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let theta = named::theta();
    graph_pair("theta", &theta, &named::straight(&theta), &mut out);
    let dumbbell = named::dumbbell();
    graph_pair("dumbbell", &dumbbell, &named::straight(&dumbbell), &mut out);
    let caps = named::capped_edge();
    graph_pair("capped_edge", &caps, &named::all_caps(&caps), &mut out);
    graph_pair("g_m", &named::g_m(), &named::g_m_coloring(), &mut out);
    let k4 = named::k4();
    graph_pair("k4", &k4, &named::straight(&k4), &mut out);
    let t = named::colored(theta.clone(), named::straight(&theta));
    let sum = boundary_connect_sum(&t, &t);
    graph_pair("theta_sum", &sum.graph, &sum.coloring, &mut out);

    let loop_files = [
        ("quartic_generator", loops::quartic_generator()),
        ("quartic_reversed", loops::quartic_generator().reversed()),
        ("quartic_double", loops::quartic_generator().power(2)),
        ("sextic_generator", loops::sextic_generator()),
        ("sextic_double", loops::sextic_double()),
        ("rootless", loops::rootless()),
        ("two_circles", loops::two_circles()),
    ];
    for (name, l) in &loop_files {
        out.push((format!("loops/{name}.json"), l.to_json()));
    }
    out.push(("invalid/triple_root_loop.json".into(), loops::through_triple_root().to_json()));

    let curve_files = [
        ("circle", plane(shapes::circle([0.0, 0.0], 1.0, 256))),
        ("figure_eight", plane(shapes::figure_eight(256))),
        ("torus_boundary", plane(shapes::punctured_torus_boundary(120))),
        ("notched_disk", plane(shapes::notched_disk(400))),
        ("notched_disk_mirror", plane(shapes::notched_disk(400)).mirrored()),
        ("annular_region", shapes::annular_region(256)),
        ("pair_of_pants", shapes::pair_of_pants(256)),
        ("generator_delta", delta_curves(&loops::quartic_generator(), DEFAULT_RESOLUTION).expect("generator tracks")),
    ];
    for (name, p) in &curve_files {
        out.push((format!("curves/{name}.json"), p.to_json()));
    }

    let word_files = [
        ("generator", words::generator()),
        ("mirror_generator", words::mirror_generator()),
        ("two_disks", words::two_disks()),
        ("double_notch", words::double_notch()),
        ("annular", words::annular()),
        ("generator_and_mirror", words::generator_and_mirror()),
        ("banded_generator", words::banded_generator()),
    ];
    for (name, w) in &word_files {
        out.push((format!("words/{name}.json"), w.to_json()));
    }
    out.push((
        "invalid/corrupt_causality.json".into(),
        "{\"format\": 1, \"entry_arcs\": [{\"id\": 0, \"side\": \"sideways\"}]}\n".into(),
    ));
    out
}

#[allow(dead_code)]
fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    for (rel, body) in fixtures() {
        let path = dir.join(rel);
        std::fs::create_dir_all(path.parent().expect("fixture paths have a directory")).expect("create fixture dir");
        std::fs::write(&path, body).expect("write fixture");
    }
}
