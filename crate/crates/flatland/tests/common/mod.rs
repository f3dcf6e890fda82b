#![allow(dead_code)]

use std::sync::OnceLock;

use flatland::flowgraph::{enumerate_tricolorings, flow_graphs_up_to, Tricoloring, TrivalentGraph};

/// Every colored flow graph with at most `n` vertices. Only used for small n.
pub fn all_colored(n: usize) -> Vec<(TrivalentGraph, Tricoloring)> {
    flow_graphs_up_to(n, 8)
        .unwrap()
        .into_iter()
        .flat_map(|g| enumerate_tricolorings(&g).into_iter().map(move |c| (g.clone(), c)))
        .collect()
}

pub fn graphs_up_to_six() -> &'static Vec<TrivalentGraph> {
    static G: OnceLock<Vec<TrivalentGraph>> = OnceLock::new();
    G.get_or_init(|| flow_graphs_up_to(6, 8).unwrap())
}

/// Coloring number `k` (mixed radix 6 over trivalent vertices) of `g`.
pub fn coloring_by_index(g: &TrivalentGraph, mut k: u64) -> Tricoloring {
    use flatland::flowgraph::Color;
    const PERMS: [[Color; 3]; 6] = [
        [Color::A, Color::B, Color::C],
        [Color::A, Color::C, Color::B],
        [Color::B, Color::A, Color::C],
        [Color::B, Color::C, Color::A],
        [Color::C, Color::A, Color::B],
        [Color::C, Color::B, Color::A],
    ];
    let mut colors = vec![Color::Cap; g.half_edge_count()];
    for v in 0..g.vertex_count() {
        let star = g.star(v);
        if star.len() == 3 {
            let p = PERMS[(k % 6) as usize];
            k /= 6;
            for (i, &h) in star.iter().enumerate() {
                colors[h] = p[i];
            }
        }
    }
    Tricoloring(colors)
}
