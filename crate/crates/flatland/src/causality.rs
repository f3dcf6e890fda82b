//! The causality map of the vertical flow on an assembled surface, and the
//! reconstruction of the trajectory graph and its tricoloring from it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{AssemblyError, BoundaryStructure, Side, SurfaceComplex};
use crate::flowgraph::{validate, Color, ColoredGraph, Tricoloring, TrivalentGraph};
use crate::strata::TangencyPattern;

/// Maximal boundary segment inside the entry (or exit) boundary.
/// `points[i]` and `points[i + 1]` bound `edges[i]`; closed arcs repeat the first point at the end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub id: usize,
    pub side: Side,
    pub closed: bool,
    pub edges: Vec<usize>,
    pub points: Vec<usize>,
}

/// A maximal interval of an entry arc on which the map is continuous.
/// Ranges are half-open edge-index ranges into the arcs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub source_arc: usize,
    pub source_range: [usize; 2],
    pub target_arc: usize,
    pub target_range: [usize; 2],
    pub orientation_preserving: bool,
    /// Endpoints of the source interval; absent for a whole closed arc.
    pub source_ends: Option<[usize; 2]>,
    /// Limits of the map at the two source endpoints, in the same order.
    pub target_ends: Option<[usize; 2]>,
}

/// A concave tangency t with C(z) = t for the point z below it and C(t) the exit point above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConcaveRelay {
    pub tangency: usize,
    pub incoming: usize,
    pub outgoing: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalityMap {
    pub format: u32,
    pub entry_arcs: Vec<BoundaryArc>,
    pub exit_arcs: Vec<BoundaryArc>,
    pub pieces: Vec<Piece>,
    pub tangency_fixed_points: Vec<usize>,
    pub concave_relays: Vec<ConcaveRelay>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CausalityError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("not a causality map of a traversally generic flow: {0}")]
    NotGeneric(String),
    #[error("genericity violation: {0}")]
    Genericity(String),
}

fn not_generic<T>(msg: impl Into<String>) -> Result<T, CausalityError> {
    Err(CausalityError::NotGeneric(msg.into()))
}

/// Splits the boundary cycles at tangencies into entry and exit arcs.
fn arcs(bs: &BoundaryStructure) -> (Vec<BoundaryArc>, Vec<BoundaryArc>) {
    let is_t = |v: usize| bs.tangencies.binary_search(&v).is_ok();
    let mut raw: Vec<(Side, bool, Vec<usize>, Vec<usize>)> = Vec::new();
    for c in &bs.cycles {
        let n = c.edges.len();
        let side = |i: usize| bs.side[c.edges[i % n]].expect("boundary edge has a side");
        match (0..n).find(|&i| is_t(c.vertices[i])) {
            None => {
                // Orient closed arcs from their least vertex towards the smaller edge.
                let k = (0..n).min_by_key(|&i| c.vertices[i]).unwrap();
                let fwd = c.edges[k];
                let back = c.edges[(k + n - 1) % n];
                let mut points: Vec<usize> = (0..=n).map(|i| c.vertices[(k + i) % n]).collect();
                let mut edges: Vec<usize> = (0..n).map(|i| c.edges[(k + i) % n]).collect();
                if back < fwd {
                    points.reverse();
                    edges = (0..n).map(|i| c.edges[(k + n - 1 - i) % n]).collect();
                }
                raw.push((side(0), true, edges, points));
            }
            Some(s) => {
                let mut i = s;
                while i < s + n {
                    let mut edges = vec![c.edges[i % n]];
                    let mut points = vec![c.vertices[i % n]];
                    let sd = side(i);
                    let mut j = i + 1;
                    while !is_t(c.vertices[j % n]) {
                        edges.push(c.edges[j % n]);
                        points.push(c.vertices[j % n]);
                        j += 1;
                    }
                    points.push(c.vertices[j % n]);
                    // Canonical direction: start at the smaller endpoint.
                    if points[0] > *points.last().unwrap()
                        || (points[0] == *points.last().unwrap() && edges[0] > *edges.last().unwrap())
                    {
                        points.reverse();
                        edges.reverse();
                    }
                    raw.push((sd, false, edges, points));
                    i = j;
                }
            }
        }
    }
    raw.sort_by(|a, b| a.2[0].cmp(&b.2[0]));
    let mut entry = Vec::new();
    let mut exit = Vec::new();
    for (side, closed, edges, points) in raw {
        let list = if side == Side::Entry { &mut entry } else { &mut exit };
        let id = list.len();
        list.push(BoundaryArc { id, side, closed, edges, points });
    }
    (entry, exit)
}

/// Image under the flow of the entry point `v` seen from the face above entry edge `e`.
fn image(surface: &SurfaceComplex, bs: &BoundaryStructure, e: usize, v: usize) -> usize {
    let f = bs.face[e].expect("boundary edge has a face");
    let (_, top) = surface.face_lines(f).expect("face has lines");
    surface.endpoint_over(top, v).expect("top line spans the same graph points")
}

pub fn extract_causality(surface: &SurfaceComplex) -> Result<CausalityMap, CausalityError> {
    surface.check()?;
    let bs = BoundaryStructure::of(surface)?;
    let (entry_arcs, exit_arcs) = arcs(&bs);
    let mut exit_pos: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for a in &exit_arcs {
        for (i, &e) in a.edges.iter().enumerate() {
            exit_pos.insert(e, (a.id, i));
        }
    }
    let mut pieces = Vec::new();
    for arc in &entry_arcs {
        let n = arc.edges.len();
        // Inner vertex k sits between edges k-1 and k.
        let cont = |k: usize| -> bool {
            let v = arc.points[k];
            image(surface, &bs, arc.edges[(k + n - 1) % n], v) == image(surface, &bs, arc.edges[k % n], v)
        };
        let mut cuts: Vec<usize> =
            if arc.closed { (0..n).filter(|&k| !cont(k)).collect() } else { (1..n).filter(|&k| !cont(k)).collect() };
        let whole = arc.closed && cuts.is_empty();
        let ranges: Vec<(usize, usize)> = if whole {
            vec![(0, n)]
        } else if arc.closed {
            // Ranges wrap around; store them unrolled past n.
            let c0 = cuts[0];
            cuts.push(c0 + n);
            cuts.windows(2).map(|w| (w[0], w[1])).collect()
        } else {
            let mut b = vec![0];
            b.extend(cuts);
            b.push(n);
            b.windows(2).map(|w| (w[0], w[1])).collect()
        };
        for (a, b) in ranges {
            let tops: Vec<(usize, usize)> = (a..b)
                .map(|i| {
                    let e = arc.edges[i % n];
                    let (_, top) = surface.face_lines(bs.face[e].unwrap()).unwrap();
                    exit_pos[&top]
                })
                .collect();
            let target_arc = tops[0].0;
            if tops.iter().any(|t| t.0 != target_arc) {
                return not_generic("a continuity piece maps into two exit arcs");
            }
            let idx: Vec<usize> = tops.iter().map(|t| t.1).collect();
            let len = exit_arcs[target_arc].edges.len();
            let step_ok = |d: i64| idx.windows(2).all(|w| (w[1] as i64 - w[0] as i64 - d).rem_euclid(len as i64) == 0);
            let preserving = idx.len() == 1 || step_ok(1);
            if !preserving && !step_ok(-1) {
                return not_generic("image of a continuity piece is not an interval");
            }
            let (lo, hi) = if preserving {
                (idx[0], idx[0] + idx.len())
            } else {
                (idx[idx.len() - 1], idx[idx.len() - 1] + idx.len())
            };
            let (source_ends, target_ends) = if whole {
                (None, None)
            } else {
                let (p, q) = (arc.points[a % n], arc.points[if arc.closed { b % n } else { b }]);
                let tp = image(surface, &bs, arc.edges[a % n], p);
                let tq = image(surface, &bs, arc.edges[(b - 1) % n], q);
                (Some([p, q]), Some([tp, tq]))
            };
            let (sa, sb) = if arc.closed && !whole { (a % n, a % n + (b - a)) } else { (a, b) };
            pieces.push(Piece {
                source_arc: arc.id,
                source_range: [sa, sb],
                target_arc,
                target_range: [lo, hi],
                orientation_preserving: preserving,
                source_ends,
                target_ends,
            });
        }
    }
    let mut fixed = Vec::new();
    let mut relays = Vec::new();
    for &t in &bs.tangencies {
        if bs.is_concave(surface, t) {
            let incoming = walk_fiber(surface, &bs, t, false)?;
            let outgoing = walk_fiber(surface, &bs, t, true)?;
            relays.push(ConcaveRelay { tangency: t, incoming, outgoing });
        } else {
            fixed.push(t);
        }
    }
    Ok(CausalityMap { format: 1, entry_arcs, exit_arcs, pieces, tangency_fixed_points: fixed, concave_relays: relays })
}

/// Follows vertical edges from `v` to the first boundary vertex.
fn walk_fiber(surface: &SurfaceComplex, bs: &BoundaryStructure, v: usize, up: bool) -> Result<usize, CausalityError> {
    let on_boundary: BTreeSet<usize> = bs.cycles.iter().flat_map(|c| c.vertices.iter().copied()).collect();
    let mut cur = v;
    loop {
        let (down, upv) = surface.vertical_neighbours(cur);
        cur = match if up { upv } else { down } {
            Some(x) => x,
            None => return not_generic(format!("fiber through vertex {v} leaves the surface")),
        };
        if on_boundary.contains(&cur) {
            return Ok(cur);
        }
    }
}

/// Interior points of entry arcs where the map jumps, read off the piece structure.
pub fn discontinuities_from_pieces(cmap: &CausalityMap) -> BTreeSet<usize> {
    let ends: BTreeSet<usize> =
        cmap.entry_arcs.iter().filter(|a| !a.closed).flat_map(|a| [a.points[0], *a.points.last().unwrap()]).collect();
    cmap.pieces.iter().filter_map(|p| p.source_ends).flat_map(|e| e.into_iter()).filter(|v| !ends.contains(v)).collect()
}

/// The same set found by tracing each concave fiber down to the entry boundary.
pub fn discontinuities_from_fibers(surface: &SurfaceComplex) -> Result<BTreeSet<usize>, CausalityError> {
    let bs = BoundaryStructure::of(surface)?;
    let mut out = BTreeSet::new();
    for &t in &bs.tangencies {
        if bs.is_concave(surface, t) {
            out.insert(walk_fiber(surface, &bs, t, false)?);
        }
    }
    Ok(out)
}

/// One germ of a reconstructed edge at a vertex: the entry point where the
/// piece ends and the limit of the map there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceEnd {
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryGraph {
    pub graph: TrivalentGraph,
    /// Stratum label of each vertex; edge interiors are (11).
    pub vertex_labels: Vec<TangencyPattern>,
    /// Piece end carried by each half-edge.
    pub ends: Vec<PieceEnd>,
    /// Relay or fixed point behind each vertex.
    pub vertex_points: Vec<usize>,
    pub coloring: Tricoloring,
}

impl TrajectoryGraph {
    pub fn graph(&self) -> &TrivalentGraph {
        &self.graph
    }

    pub fn colored(&self) -> Result<ColoredGraph, CausalityError> {
        ColoredGraph::new(self.graph().clone(), self.coloring.clone())
            .map_err(|r| CausalityError::Genericity(format!("recovered coloring invalid: {:?}", r.violations)))
    }
}

/// Quotient of the entry boundary by the piece structure.
pub fn reconstruct(cmap: &CausalityMap) -> Result<TrajectoryGraph, CausalityError> {
    let fixed: BTreeSet<usize> = cmap.tangency_fixed_points.iter().copied().collect();
    let mut relay_of: BTreeMap<usize, usize> = BTreeMap::new();
    for (r, relay) in cmap.concave_relays.iter().enumerate() {
        if fixed.contains(&relay.outgoing) || cmap.concave_relays.iter().any(|o| o.tangency == relay.outgoing) {
            return not_generic(format!("trajectory through tangency {} meets a second tangency", relay.tangency));
        }
        if fixed.contains(&relay.incoming) || cmap.concave_relays.iter().any(|o| o.tangency == relay.incoming) {
            return not_generic(format!("trajectory through tangency {} meets a second tangency", relay.tangency));
        }
        for p in [relay.incoming, relay.tangency] {
            if relay_of.insert(p, r).is_some() {
                return not_generic(format!("point {p} belongs to two concave fibers"));
            }
        }
    }
    let closed: Vec<&Piece> = cmap.pieces.iter().filter(|p| p.source_ends.is_none()).collect();
    if !closed.is_empty() {
        if cmap.pieces.len() != 1 || !cmap.concave_relays.is_empty() || !fixed.is_empty() {
            return not_generic("a closed continuity piece must be the whole map");
        }
        return Ok(TrajectoryGraph {
            graph: TrivalentGraph::circle(),
            vertex_labels: Vec::new(),
            ends: Vec::new(),
            vertex_points: Vec::new(),
            coloring: Tricoloring(Vec::new()),
        });
    }
    // Vertices: relays first (trivalent), then fixed points (univalent).
    let nr = cmap.concave_relays.len();
    let fixed_list: Vec<usize> = fixed.iter().copied().collect();
    let mut stars: Vec<Vec<usize>> = vec![Vec::new(); nr + fixed_list.len()];
    let mut ends = Vec::new();
    let mut pairs = Vec::new();
    for p in &cmap.pieces {
        let (s, t) = (
            p.source_ends.unwrap(),
            p.target_ends
                .ok_or_else(|| CausalityError::NotGeneric("piece has source ends but no target ends".into()))?,
        );
        let h0 = ends.len();
        for k in 0..2 {
            let end = PieceEnd { source: s[k], target: t[k] };
            let v = if let Some(&r) = relay_of.get(&end.source) {
                r
            } else if let Ok(i) = fixed_list.binary_search(&end.source) {
                if end.target != end.source {
                    return not_generic(format!("map does not fix the convex point {}", end.source));
                }
                nr + i
            } else {
                return not_generic(format!(
                    "piece end {} is neither on a concave fiber nor a convex point",
                    end.source
                ));
            };
            stars[v].push(h0 + k);
            ends.push(end);
        }
        pairs.push((h0, h0 + 1));
    }
    for (v, s) in stars.iter().enumerate() {
        let want = if v < nr { 3 } else { 1 };
        if s.len() != want {
            return not_generic(format!("vertex {v} collects {} piece ends, expected {want}", s.len()));
        }
    }
    let graph =
        TrivalentGraph::new(ends.len(), &pairs, stars).map_err(|e| CausalityError::NotGeneric(e.to_string()))?;
    let vertex_labels = (0..graph.vertex_count())
        .map(|v| if v < nr { TangencyPattern::Concave } else { TangencyPattern::Convex })
        .collect();
    let mut vertex_points: Vec<usize> = cmap.concave_relays.iter().map(|r| r.tangency).collect();
    vertex_points.extend(fixed_list);
    let mut tg = TrajectoryGraph { graph, vertex_labels, ends, vertex_points, coloring: Tricoloring(Vec::new()) };
    tg.coloring = derive_tricoloring(cmap, &tg)?;
    Ok(tg)
}

/// Colours from the order-preserving injection of each 2-point fiber into the
/// 3-point fiber over the vertex: {1,2} ↦ A, {2,3} ↦ B, {1,3} ↦ C.
pub fn derive_tricoloring(cmap: &CausalityMap, tg: &TrajectoryGraph) -> Result<Tricoloring, CausalityError> {
    let graph = tg.graph();
    let nr = cmap.concave_relays.len();
    let mut colors = vec![Color::Cap; graph.half_edge_count()];
    for (h, end) in tg.ends.iter().enumerate() {
        let v = graph.star_of(h);
        if v >= nr {
            continue;
        }
        let r = cmap.concave_relays[v];
        let pos = |x: usize| -> Option<u8> {
            if x == r.incoming {
                Some(1)
            } else if x == r.tangency {
                Some(2)
            } else if x == r.outgoing {
                Some(3)
            } else {
                None
            }
        };
        let c = match (pos(end.source), pos(end.target)) {
            (Some(a), Some(b)) if a < b => Color::from_levels(a, b),
            _ => None,
        };
        colors[h] = c.ok_or_else(|| {
            CausalityError::Genericity(format!("fiber correspondence at half-edge {h} is not monotone"))
        })?;
    }
    let coloring = Tricoloring(colors);
    let report = validate(graph, &coloring);
    if !report.is_valid() {
        return Err(CausalityError::Genericity(format!("recovered coloring invalid: {:?}", report.violations)));
    }
    Ok(coloring)
}

/// True iff some graph isomorphism carries colours to colours.
/// Colours at a trivalent vertex force the half-edge bijection there, so one
/// seed choice per component determines the whole map.
pub fn colored_isomorphic(g1: &ColoredGraph, g2: &ColoredGraph) -> bool {
    let (a, b) = (&g1.graph, &g2.graph);
    if a.is_circle() || b.is_circle() {
        return a.is_circle() == b.is_circle();
    }
    if a.vertex_count() != b.vertex_count()
        || a.half_edge_count() != b.half_edge_count()
        || a.trivalent_count() != b.trivalent_count()
    {
        return false;
    }
    let n = a.vertex_count();
    let mut vmap = vec![usize::MAX; n];
    let mut hmap = vec![usize::MAX; a.half_edge_count()];
    let mut used = vec![false; n];
    search(g1, g2, &mut vmap, &mut hmap, &mut used)
}

fn search(
    g1: &ColoredGraph,
    g2: &ColoredGraph,
    vmap: &mut Vec<usize>,
    hmap: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let Some(v) = vmap.iter().position(|&x| x == usize::MAX) else {
        return true;
    };
    for w in 0..g2.graph.vertex_count() {
        if used[w] || g2.graph.valency(w) != g1.graph.valency(v) {
            continue;
        }
        let (sv, sh) = (vmap.clone(), hmap.clone());
        let su = used.clone();
        if propagate(g1, g2, v, w, vmap, hmap, used) && search(g1, g2, vmap, hmap, used) {
            return true;
        }
        *vmap = sv;
        *hmap = sh;
        *used = su;
    }
    false
}

/// Maps v ↦ w and follows edges; false on any conflict.
fn propagate(
    g1: &ColoredGraph,
    g2: &ColoredGraph,
    v: usize,
    w: usize,
    vmap: &mut [usize],
    hmap: &mut [usize],
    used: &mut [bool],
) -> bool {
    let mut stack = vec![(v, w)];
    while let Some((v, w)) = stack.pop() {
        if vmap[v] != usize::MAX {
            if vmap[v] != w {
                return false;
            }
            continue;
        }
        if used[w] || g1.graph.valency(v) != g2.graph.valency(w) {
            return false;
        }
        vmap[v] = w;
        used[w] = true;
        for &h in g1.graph.star(v) {
            let c = g1.coloring.get(h);
            let Some(&k) = g2.graph.star(w).iter().find(|&&k| g2.coloring.get(k) == c) else {
                return false;
            };
            if hmap[h] != usize::MAX && hmap[h] != k {
                return false;
            }
            hmap[h] = k;
            let (hm, km) = (g1.graph.mate(h), g2.graph.mate(k));
            if hmap[hm] != usize::MAX && hmap[hm] != km {
                return false;
            }
            if g1.coloring.get(hm) != g2.coloring.get(km) {
                return false;
            }
            hmap[hm] = km;
            stack.push((g1.graph.star_of(hm), g2.graph.star_of(km)));
        }
    }
    true
}
