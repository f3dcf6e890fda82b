use std::collections::BTreeSet;

use flatland::flowgraph::named::*;
use flatland::flowgraph::*;
use proptest::prelude::*;

/// Isomorphism by trying every vertex bijection on multiplicity matrices.
fn brute_isomorphic(a: &TrivalentGraph, b: &TrivalentGraph) -> bool {
    let (ma, mb) = (a.multiplicity_matrix(), b.multiplicity_matrix());
    let n = ma.len();
    if n != mb.len() {
        return false;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    fn next(p: &mut [usize]) -> bool {
        let n = p.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while p[j] <= p[i - 1] {
            j -= 1;
        }
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }
    loop {
        let ok = (0..n).all(|i| (0..n).all(|j| ma[i][j] == mb[perm[i]][perm[j]]))
            && (0..n).all(|i| a.valency(i) == b.valency(perm[i]));
        if ok {
            return true;
        }
        if !next(&mut perm) {
            return false;
        }
    }
}

/// Every perfect matching of 3n half-edges grouped into n stars.
fn pairing_oracle(n: usize) -> Vec<TrivalentGraph> {
    let h = 3 * n;
    let stars: Vec<Vec<usize>> = (0..n).map(|v| vec![3 * v, 3 * v + 1, 3 * v + 2]).collect();
    let mut out = Vec::new();
    fn rec(
        free: &mut Vec<usize>,
        pairs: &mut Vec<(usize, usize)>,
        h: usize,
        stars: &[Vec<usize>],
        out: &mut Vec<TrivalentGraph>,
    ) {
        if free.is_empty() {
            let g = TrivalentGraph::new(h, pairs, stars.to_vec()).unwrap();
            if g.is_connected() {
                out.push(g);
            }
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free.remove(i);
            pairs.push((a, b));
            rec(free, pairs, h, stars, out);
            pairs.pop();
            free.insert(i, b);
        }
        free.insert(0, a);
    }
    rec(&mut (0..h).collect(), &mut Vec::new(), h, &stars, &mut out);
    out
}

fn classes_by_brute_force(graphs: Vec<TrivalentGraph>) -> Vec<TrivalentGraph> {
    let mut reps: Vec<TrivalentGraph> = Vec::new();
    for g in graphs {
        if !reps.iter().any(|r| brute_isomorphic(r, &g)) {
            reps.push(g);
        }
    }
    reps
}

#[test]
fn tricoloring_counts() {
    assert_eq!(enumerate_tricolorings(&theta()).len(), 36);
    assert_eq!(enumerate_tricolorings(&dumbbell()).len(), 36);
    assert_eq!(enumerate_tricolorings(&capped_edge()), vec![all_caps(&capped_edge())]);
    assert_eq!(enumerate_tricolorings(&k4()).len(), 6usize.pow(4));
    assert_eq!(enumerate_tricolorings(&g_m()).len(), 6);
}

#[test]
fn tricolorings_sorted_and_valid() {
    let all = enumerate_tricolorings(&theta());
    assert!(all.windows(2).all(|w| w[0] < w[1]));
    assert!(all.iter().all(|c| validate(&theta(), c).is_valid()));
}

#[test]
fn two_vertex_graphs() {
    let gs = enumerate_trivalent_graphs(2, DEFAULT_VERTEX_CAP).unwrap();
    assert_eq!(gs.len(), 2);
    assert!(gs.iter().any(|g| g.is_isomorphic(&theta())));
    assert!(gs.iter().any(|g| g.is_isomorphic(&dumbbell())));
    assert!(enumerate_trivalent_graphs(0, DEFAULT_VERTEX_CAP).unwrap().is_empty());
}

#[test]
fn four_vertex_graphs_contain_k4() {
    let gs = enumerate_trivalent_graphs(4, DEFAULT_VERTEX_CAP).unwrap();
    assert_eq!(gs.len(), 5);
    assert!(gs.iter().any(|g| brute_isomorphic(g, &k4())));
}

#[test]
fn enumeration_matches_pairing_oracle() {
    for n in [2, 4] {
        let reps = classes_by_brute_force(pairing_oracle(n));
        let gs = enumerate_trivalent_graphs(n, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(reps.len(), gs.len(), "n = {n}");
        for r in &reps {
            assert_eq!(gs.iter().filter(|g| brute_isomorphic(g, r)).count(), 1);
        }
    }
}

#[test]
fn enumeration_has_no_isomorphic_pair() {
    let gs = enumerate_trivalent_graphs(6, DEFAULT_VERTEX_CAP).unwrap();
    assert_eq!(gs.len(), 17);
    for i in 0..gs.len() {
        assert!(gs[i].is_connected());
        assert!(gs[i].stars().iter().all(|s| s.len() == 3));
        for j in i + 1..gs.len() {
            assert!(!brute_isomorphic(&gs[i], &gs[j]));
        }
    }
}

#[test]
fn eight_vertex_count() {
    let gs = enumerate_trivalent_graphs(8, DEFAULT_VERTEX_CAP).unwrap();
    assert_eq!(gs.len(), 71);
    let forms: BTreeSet<_> = gs.iter().map(|g| g.canonical_form()).collect();
    assert_eq!(forms.len(), 71);
}

#[test]
fn cap_and_parity_enforced() {
    assert_eq!(
        enumerate_trivalent_graphs(10, DEFAULT_VERTEX_CAP).unwrap_err(),
        GraphError::CapExceeded { requested: 10, cap: 8 }
    );
    assert_eq!(enumerate_trivalent_graphs(3, DEFAULT_VERTEX_CAP).unwrap_err(), GraphError::OddVertexCount(3));
}

#[test]
fn connect_sum_euler_additive() {
    let inputs = [
        colored(theta(), straight(&theta())),
        colored(dumbbell(), straight(&dumbbell())),
        colored(capped_edge(), all_caps(&capped_edge())),
        colored(g_m(), straight(&g_m())),
    ];
    for a in &inputs {
        for b in &inputs {
            let s = boundary_connect_sum(a, b);
            assert!(s.graph.is_connected());
            assert_eq!(s.graph.euler(), a.graph.euler() + b.graph.euler() - 1);
            assert_eq!(s.graph.trivalent_count(), a.graph.trivalent_count() + b.graph.trivalent_count() + 2);
            assert!(validate(&s.graph, &s.coloring).is_valid());
        }
    }
}

#[test]
fn graph_json_round_trip() {
    for (g, c) in [(theta(), Some(straight(&theta()))), (k4(), None), (TrivalentGraph::circle(), None)] {
        let doc = GraphDoc::from_graph(&g, c.as_ref());
        let text = doc.to_json();
        let back = GraphDoc::parse(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.graph().unwrap(), g);
        assert_eq!(back.coloring().unwrap(), c);
    }
}

#[test]
fn coloring_keys_are_numeric_order() {
    let g = enumerate_trivalent_graphs(4, 8).unwrap().remove(0);
    let doc = GraphDoc::from_graph(&g, Some(&straight(&g)));
    let text = doc.to_json();
    let p2 = text.find("\"2\"").unwrap();
    let p10 = text.find("\"10\"").unwrap();
    assert!(p2 < p10);
}

fn relabel(g: &TrivalentGraph, hperm: &[usize], vperm: &[usize]) -> TrivalentGraph {
    let pairs: Vec<(usize, usize)> = g.edges().into_iter().map(|(a, b)| (hperm[a], hperm[b])).collect();
    let mut stars = vec![Vec::new(); g.vertex_count()];
    for (v, s) in g.stars().iter().enumerate() {
        stars[vperm[v]] = s.iter().map(|&h| hperm[h]).collect();
    }
    TrivalentGraph::new(g.half_edge_count(), &pairs, stars).unwrap()
}

fn six_vertex_graphs() -> &'static [TrivalentGraph] {
    static G: std::sync::OnceLock<Vec<TrivalentGraph>> = std::sync::OnceLock::new();
    G.get_or_init(|| enumerate_trivalent_graphs(6, 8).unwrap())
}

proptest! {
    #[test]
    fn canonical_form_is_relabeling_invariant(idx in 0usize..17, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let g = six_vertex_graphs()[idx].clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut hp: Vec<usize> = (0..g.half_edge_count()).collect();
        hp.shuffle(&mut rng);
        let mut vp: Vec<usize> = (0..g.vertex_count()).collect();
        vp.shuffle(&mut rng);
        let h = relabel(&g, &hp, &vp);
        prop_assert_eq!(h.canonical_form(), g.canonical_form());
        prop_assert_eq!(h.euler(), g.euler());
    }

    #[test]
    fn coloring_count_is_six_to_the_a(idx in 0usize..5) {
        let g = enumerate_trivalent_graphs(4, 8).unwrap().swap_remove(idx);
        prop_assert_eq!(enumerate_tricolorings(&g).len(), 6usize.pow(g.trivalent_count() as u32));
    }
}

#[test]
fn mixed_valency_enumeration() {
    use flatland::flowgraph::{enumerate_graphs, flow_graphs_up_to};
    assert_eq!(enumerate_graphs(0, 2, 8).unwrap().len(), 1);
    assert_eq!(enumerate_graphs(1, 1, 8).unwrap().len(), 1);
    assert_eq!(enumerate_graphs(1, 3, 8).unwrap().len(), 1);
    assert_eq!(enumerate_graphs(2, 0, 8).unwrap().len(), 2);
    assert!(enumerate_graphs(1, 2, 8).unwrap().is_empty());
    let all = flow_graphs_up_to(6, 8).unwrap();
    for (i, g) in all.iter().enumerate() {
        assert!(g.is_connected());
        for h in &all[i + 1..] {
            assert!(!g.is_isomorphic(h));
        }
    }
    eprintln!("{} flow graphs", all.len());
}
