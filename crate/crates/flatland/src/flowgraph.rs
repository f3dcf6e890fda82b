//! Half-edge graphs with vertices of valency 1 or 3, their tricolorings,
//! exhaustive generation of cubic multigraphs and the boundary connected sum.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Colour carried by a half-edge. `Cap` marks the half-edge at a univalent vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    A,
    B,
    C,
    Cap,
}

impl Color {
    pub const TRIPLE: [Color; 3] = [Color::A, Color::B, Color::C];

    /// Fiber levels (bottom, top) of the strip end on a trivalent binder.
    pub fn levels(self) -> (u8, u8) {
        match self {
            Color::A => (1, 2),
            Color::B => (2, 3),
            Color::C => (1, 3),
            Color::Cap => (2, 2),
        }
    }

    /// Colour determined by the pair of fiber positions a half-strip occupies.
    pub fn from_levels(lo: u8, hi: u8) -> Option<Color> {
        match (lo, hi) {
            (1, 2) => Some(Color::A),
            (2, 3) => Some(Color::B),
            (1, 3) => Some(Color::C),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Color::A => "A",
            Color::B => "B",
            Color::C => "C",
            Color::Cap => "Cap",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("half-edge {0} is referenced but the graph has {1} half-edges")]
    OutOfRange(usize, usize),
    #[error("half-edge {0} is paired with itself")]
    FixedPoint(usize),
    #[error("half-edge {0} appears in more than one pair")]
    PairedTwice(usize),
    #[error("half-edge {0} is not paired")]
    Unpaired(usize),
    #[error("half-edge {0} belongs to more than one vertex star")]
    InTwoStars(usize),
    #[error("half-edge {0} belongs to no vertex star")]
    NoStar(usize),
    #[error("vertex {vertex} has valency {valency}; only 1 and 3 are allowed")]
    BadValency { vertex: usize, valency: usize },
    #[error("a circle marker cannot carry half-edges")]
    CircleWithHalfEdges,
    #[error("vertex count {requested} exceeds the enumeration cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("vertex count {0} is odd; cubic graphs need an even number of vertices")]
    OddVertexCount(usize),
}

/// A graph stored through its half-edges.
///
/// `mate` is the edge involution, `stars` partitions half-edges into vertices.
/// The vertexless circle is a separate marker with no half-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivalentGraph {
    mate: Vec<usize>,
    stars: Vec<Vec<usize>>,
    star_of: Vec<usize>,
    circle: bool,
    connected: bool,
}

impl TrivalentGraph {
    /// Builds a graph from edge pairs and vertex stars over half-edges `0..half_edges`.
    pub fn new(half_edges: usize, pairing: &[(usize, usize)], stars: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let mut mate = vec![usize::MAX; half_edges];
        for &(a, b) in pairing {
            for h in [a, b] {
                if h >= half_edges {
                    return Err(GraphError::OutOfRange(h, half_edges));
                }
            }
            if a == b {
                return Err(GraphError::FixedPoint(a));
            }
            for h in [a, b] {
                if mate[h] != usize::MAX {
                    return Err(GraphError::PairedTwice(h));
                }
            }
            mate[a] = b;
            mate[b] = a;
        }
        if let Some(h) = mate.iter().position(|&m| m == usize::MAX) {
            return Err(GraphError::Unpaired(h));
        }
        let mut star_of = vec![usize::MAX; half_edges];
        for (v, star) in stars.iter().enumerate() {
            if star.len() != 1 && star.len() != 3 {
                return Err(GraphError::BadValency { vertex: v, valency: star.len() });
            }
            for &h in star {
                if h >= half_edges {
                    return Err(GraphError::OutOfRange(h, half_edges));
                }
                if star_of[h] != usize::MAX {
                    return Err(GraphError::InTwoStars(h));
                }
                star_of[h] = v;
            }
        }
        if let Some(h) = star_of.iter().position(|&s| s == usize::MAX) {
            return Err(GraphError::NoStar(h));
        }
        let mut g = TrivalentGraph { mate, stars, star_of, circle: false, connected: false };
        g.connected = g.bfs_connected();
        Ok(g)
    }

    /// The vertexless circle: trajectory space of an annulus.
    pub fn circle() -> Self {
        TrivalentGraph { mate: Vec::new(), stars: Vec::new(), star_of: Vec::new(), circle: true, connected: true }
    }

    fn bfs_connected(&self) -> bool {
        if self.circle {
            return true;
        }
        let n = self.stars.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &h in &self.stars[v] {
                let w = self.star_of[self.mate[h]];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_circle(&self) -> bool {
        self.circle
    }
    pub fn is_connected(&self) -> bool {
        self.connected
    }
    pub fn half_edge_count(&self) -> usize {
        self.mate.len()
    }
    pub fn vertex_count(&self) -> usize {
        self.stars.len()
    }
    pub fn mate(&self, h: usize) -> usize {
        self.mate[h]
    }
    pub fn star_of(&self, h: usize) -> usize {
        self.star_of[h]
    }
    pub fn stars(&self) -> &[Vec<usize>] {
        &self.stars
    }
    pub fn star(&self, v: usize) -> &[usize] {
        &self.stars[v]
    }
    pub fn valency(&self, v: usize) -> usize {
        self.stars[v].len()
    }
    pub fn trivalent_count(&self) -> usize {
        self.stars.iter().filter(|s| s.len() == 3).count()
    }
    pub fn univalent_count(&self) -> usize {
        self.stars.iter().filter(|s| s.len() == 1).count()
    }

    /// Edges as `(h, mate(h))` with `h < mate(h)`, ordered by `h`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.mate.len()).filter(|&h| h < self.mate[h]).map(|h| (h, self.mate[h])).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.mate.len() / 2
    }

    /// Index into [`edges`](Self::edges) of the edge containing `h`.
    pub fn edge_of(&self, h: usize) -> usize {
        let lo = h.min(self.mate[h]);
        (0..lo).filter(|&k| k < self.mate[k]).count()
    }

    /// Euler characteristic V − E. The circle has χ = 0.
    pub fn euler(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64
    }

    /// Symmetric multiplicity matrix; loops are counted once on the diagonal.
    pub fn multiplicity_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.stars.len();
        let mut m = vec![vec![0u8; n]; n];
        for (a, b) in self.edges() {
            let (u, v) = (self.star_of[a], self.star_of[b]);
            if u == v {
                m[u][u] += 1;
            } else {
                m[u][v] += 1;
                m[v][u] += 1;
            }
        }
        m
    }

    /// Builds a graph from a multiplicity matrix and valencies.
    /// Half-edges are numbered vertex by vertex in matrix order.
    pub fn from_matrix(m: &[Vec<u8>]) -> Result<Self, GraphError> {
        let n = m.len();
        let mut stars: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut pairs = Vec::new();
        let mut next = 0usize;
        for i in 0..n {
            for j in i..n {
                for _ in 0..m[i][j] {
                    let (a, b) = (next, next + 1);
                    next += 2;
                    stars[i].push(a);
                    stars[j].push(b);
                    pairs.push((a, b));
                }
            }
        }
        // Renumber so that each star holds consecutive ids.
        let mut relabel = vec![0usize; next];
        let mut k = 0;
        for star in &stars {
            for &h in star {
                relabel[h] = k;
                k += 1;
            }
        }
        let stars = stars.into_iter().map(|s| s.into_iter().map(|h| relabel[h]).collect()).collect();
        let pairs: Vec<_> = pairs.into_iter().map(|(a, b)| (relabel[a], relabel[b])).collect();
        TrivalentGraph::new(next, &pairs, stars)
    }

    /// Minimum lexicographic encoding over all vertex relabelings.
    pub fn canonical_form(&self) -> CanonicalForm {
        if self.circle {
            return CanonicalForm(vec![u8::MAX]);
        }
        let m = self.multiplicity_matrix();
        let val: Vec<u8> = self.stars.iter().map(|s| s.len() as u8).collect();
        CanonicalForm(canonical_code(&m, &val).0)
    }

    pub fn is_isomorphic(&self, other: &TrivalentGraph) -> bool {
        self.canonical_form() == other.canonical_form()
    }
}

/// Isomorphism-invariant code of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(pub Vec<u8>);

/// Branch and bound over vertex orders. Position k contributes
/// `[valency(p_k), m(p_0,p_k), .., m(p_{k-1},p_k), m(p_k,p_k)]`.
/// Returns the code and one optimal order.
fn canonical_code(m: &[Vec<u8>], val: &[u8]) -> (Vec<u8>, Vec<usize>) {
    struct Search<'a> {
        m: &'a [Vec<u8>],
        val: &'a [u8],
        best: Option<Vec<u8>>,
        best_order: Vec<usize>,
    }
    impl Search<'_> {
        fn go(&mut self, order: &mut Vec<usize>, used: &mut Vec<bool>, code: &mut Vec<u8>) {
            let n = self.m.len();
            if order.len() == n {
                if self.best.as_ref().is_none_or(|b| code[..] < b[..]) {
                    self.best = Some(code.clone());
                    self.best_order = order.clone();
                }
                return;
            }
            for v in 0..n {
                if used[v] {
                    continue;
                }
                let mark = code.len();
                code.push(self.val[v]);
                for &u in order.iter() {
                    code.push(self.m[u][v]);
                }
                code.push(self.m[v][v]);
                let prune = match &self.best {
                    Some(b) => code[..] > b[..code.len()],
                    None => false,
                };
                if !prune {
                    used[v] = true;
                    order.push(v);
                    self.go(order, used, code);
                    order.pop();
                    used[v] = false;
                }
                code.truncate(mark);
            }
        }
    }
    let mut s = Search { m, val, best: None, best_order: Vec::new() };
    let n = m.len();
    s.go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut Vec::new());
    (s.best.unwrap_or_default(), s.best_order)
}

/// Colour per half-edge, indexed by half-edge id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tricoloring(pub Vec<Color>);

impl Tricoloring {
    pub fn get(&self, h: usize) -> Color {
        self.0[h]
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn as_map(&self) -> BTreeMap<usize, Color> {
        self.0.iter().copied().enumerate().collect()
    }
    pub fn from_map(map: &BTreeMap<usize, Color>, half_edges: usize) -> Result<Self, Violation> {
        if map.len() != half_edges || map.keys().any(|&k| k >= half_edges) {
            return Err(Violation::LengthMismatch { expected: half_edges, found: map.len() });
        }
        Ok(Tricoloring(map.values().copied().collect()))
    }
}

impl fmt::Display for Tricoloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            match c {
                Color::Cap => f.write_str("_")?,
                c => write!(f, "{c}")?,
            }
        }
        Ok(())
    }
}

/// One violated invariant of a (graph, coloring) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    #[error("coloring covers {found} half-edges, graph has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("repeated color at vertex {vertex}")]
    RepeatedColor { vertex: usize },
    #[error("half-edge {half_edge} at trivalent vertex {vertex} carries Cap")]
    CapAtTrivalent { vertex: usize, half_edge: usize },
    #[error("half-edge {half_edge} at univalent vertex {vertex} must carry Cap")]
    MissingCap { vertex: usize, half_edge: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every violated invariant of the pair; never aborts.
pub fn validate(graph: &TrivalentGraph, coloring: &Tricoloring) -> ValidityReport {
    let mut violations = Vec::new();
    if graph.is_circle() {
        if !coloring.is_empty() {
            violations.push(Violation::LengthMismatch { expected: 0, found: coloring.len() });
        }
        return ValidityReport { violations };
    }
    if graph.vertex_count() == 0 {
        violations.push(Violation::Empty);
    } else if !graph.is_connected() {
        violations.push(Violation::Disconnected);
    }
    if coloring.len() != graph.half_edge_count() {
        violations.push(Violation::LengthMismatch { expected: graph.half_edge_count(), found: coloring.len() });
        return ValidityReport { violations };
    }
    for (v, star) in graph.stars().iter().enumerate() {
        if star.len() == 1 {
            if coloring.get(star[0]) != Color::Cap {
                violations.push(Violation::MissingCap { vertex: v, half_edge: star[0] });
            }
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut repeated = false;
        for &h in star {
            let c = coloring.get(h);
            if c == Color::Cap {
                violations.push(Violation::CapAtTrivalent { vertex: v, half_edge: h });
            } else if !seen.insert(c) {
                repeated = true;
            }
        }
        if repeated {
            violations.push(Violation::RepeatedColor { vertex: v });
        }
    }
    ValidityReport { violations }
}

const PERMS: [[Color; 3]; 6] = [
    [Color::A, Color::B, Color::C],
    [Color::A, Color::C, Color::B],
    [Color::B, Color::A, Color::C],
    [Color::B, Color::C, Color::A],
    [Color::C, Color::A, Color::B],
    [Color::C, Color::B, Color::A],
];

/// All valid colorings, sorted lexicographically by the colour sequence over half-edge ids.
pub fn enumerate_tricolorings(graph: &TrivalentGraph) -> Vec<Tricoloring> {
    if graph.is_circle() {
        return vec![Tricoloring(Vec::new())];
    }
    let trivalent: Vec<usize> = (0..graph.vertex_count()).filter(|&v| graph.valency(v) == 3).collect();
    let mut base = vec![Color::Cap; graph.half_edge_count()];
    let mut out = Vec::with_capacity(6usize.pow(trivalent.len() as u32));
    fn rec(graph: &TrivalentGraph, trivalent: &[usize], k: usize, cur: &mut Vec<Color>, out: &mut Vec<Tricoloring>) {
        if k == trivalent.len() {
            out.push(Tricoloring(cur.clone()));
            return;
        }
        let star = graph.star(trivalent[k]);
        for p in PERMS {
            for (i, &h) in star.iter().enumerate() {
                cur[h] = p[i];
            }
            rec(graph, trivalent, k + 1, cur, out);
        }
    }
    rec(graph, &trivalent, 0, &mut base, &mut out);
    out.sort();
    out
}

/// Default cap on the vertex count accepted by [`enumerate_trivalent_graphs`].
pub const DEFAULT_VERTEX_CAP: usize = 8;

/// All connected cubic multigraphs (loops and parallel edges allowed) on
/// `vertex_count` vertices, one per isomorphism class, in canonical labeling
/// and sorted by canonical code.
pub fn enumerate_trivalent_graphs(vertex_count: usize, cap: usize) -> Result<Vec<TrivalentGraph>, GraphError> {
    if vertex_count > cap {
        return Err(GraphError::CapExceeded { requested: vertex_count, cap });
    }
    if vertex_count % 2 == 1 {
        return Err(GraphError::OddVertexCount(vertex_count));
    }
    enumerate_graphs(vertex_count, 0, cap)
}

/// All connected multigraphs with `trivalent` vertices of valency 3 and
/// `univalent` vertices of valency 1, one per isomorphism class.
/// Empty when the half-edge count is odd.
pub fn enumerate_graphs(trivalent: usize, univalent: usize, cap: usize) -> Result<Vec<TrivalentGraph>, GraphError> {
    let n = trivalent + univalent;
    if n > cap {
        return Err(GraphError::CapExceeded { requested: n, cap });
    }
    if n == 0 || (3 * trivalent + univalent) % 2 == 1 {
        return Ok(Vec::new());
    }
    let target: Vec<u8> = (0..n).map(|i| if i < trivalent { 3 } else { 1 }).collect();
    let mut m = vec![vec![0u8; n]; n];
    let mut deg = vec![0u8; n];
    // Cells of the upper triangle in row-major order.
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    struct Fill<'a> {
        cells: &'a [(usize, usize)],
        target: &'a [u8],
        seen: HashSet<Vec<Vec<u8>>>,
        found: BTreeMap<Vec<u8>, Vec<Vec<u8>>>,
    }
    impl Fill<'_> {
        fn go(&mut self, k: usize, m: &mut Vec<Vec<u8>>, deg: &mut Vec<u8>) {
            let n = m.len();
            let t = self.target;
            if k == self.cells.len() {
                if deg[..] == t[..] && matrix_connected(m) && self.seen.insert(m.clone()) {
                    let (code, order) = canonical_code(m, t);
                    self.found
                        .entry(code)
                        .or_insert_with(|| (0..n).map(|a| (0..n).map(|b| m[order[a]][order[b]]).collect()).collect());
                }
                return;
            }
            let (i, j) = self.cells[k];
            let max = if i == j { (t[i] - deg[i]) / 2 } else { (t[i] - deg[i]).min(t[j] - deg[j]) };
            for x in 0..=max {
                if i == j {
                    deg[i] += 2 * x;
                } else {
                    deg[i] += x;
                    deg[j] += x;
                }
                m[i][j] = x;
                m[j][i] = x;
                // Row i must be complete once its last cell is passed.
                if j != n - 1 || deg[i] == t[i] {
                    self.go(k + 1, m, deg);
                }
                if i == j {
                    deg[i] -= 2 * x;
                } else {
                    deg[i] -= x;
                    deg[j] -= x;
                }
                m[i][j] = 0;
                m[j][i] = 0;
            }
        }
    }
    let mut f = Fill { cells: &cells, target: &target, seen: HashSet::new(), found: BTreeMap::new() };
    f.go(0, &mut m, &mut deg);
    f.found.values().map(|mat| TrivalentGraph::from_matrix(mat)).collect()
}

/// The circle and every connected graph with valencies 1 and 3 on at most
/// `max_vertices` vertices, ordered by (trivalent, univalent) and then canonically.
pub fn flow_graphs_up_to(max_vertices: usize, cap: usize) -> Result<Vec<TrivalentGraph>, GraphError> {
    if max_vertices > cap {
        return Err(GraphError::CapExceeded { requested: max_vertices, cap });
    }
    let mut out = vec![TrivalentGraph::circle()];
    for t in 0..=max_vertices {
        for u in 0..=max_vertices - t {
            out.extend(enumerate_graphs(t, u, cap)?);
        }
    }
    Ok(out)
}

fn matrix_connected(m: &[Vec<u8>]) -> bool {
    let n = m.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if m[v][w] > 0 && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A graph together with a coloring that passed [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    pub graph: TrivalentGraph,
    pub coloring: Tricoloring,
}

impl ColoredGraph {
    pub fn new(graph: TrivalentGraph, coloring: Tricoloring) -> Result<Self, ValidityReport> {
        let report = validate(&graph, &coloring);
        if report.is_valid() {
            Ok(ColoredGraph { graph, coloring })
        } else {
            Err(report)
        }
    }
}

/// Boundary connected sum realised on graphs: subdivide the edge holding
/// half-edge 0 in each input and join the two midpoints by a neck edge.
/// At each new vertex the halves of the subdivided edge get A and C, the neck gets B.
/// A circle input contributes a new vertex carrying a loop.
pub fn boundary_connect_sum(g1: &ColoredGraph, g2: &ColoredGraph) -> ColoredGraph {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut stars: Vec<Vec<usize>> = Vec::new();
    let mut colors: Vec<Color> = Vec::new();
    let mut necks = Vec::new();
    for g in [g1, g2] {
        let off = colors.len();
        let graph = &g.graph;
        let h = graph.half_edge_count();
        let skip = if graph.is_circle() { None } else { Some((0, graph.mate(0))) };
        for (a, b) in graph.edges() {
            if Some((a, b)) != skip {
                pairs.push((a + off, b + off));
            }
        }
        stars.extend(graph.stars().iter().map(|s| s.iter().map(|&x| x + off).collect::<Vec<_>>()));
        colors.extend_from_slice(&g.coloring.0);
        let (x1, x2, y) = (off + h, off + h + 1, off + h + 2);
        match skip {
            Some((a, b)) => {
                pairs.push((a + off, x1));
                pairs.push((x2, b + off));
            }
            None => pairs.push((x1, x2)),
        }
        stars.push(vec![x1, x2, y]);
        colors.extend_from_slice(&[Color::A, Color::C, Color::B]);
        necks.push(y);
        // Keep the id space dense across the two inputs.
        debug_assert_eq!(colors.len(), off + h + 3);
    }
    pairs.push((necks[0], necks[1]));
    let total = colors.len();
    let graph = TrivalentGraph::new(total, &pairs, stars).expect("connected sum preserves structure");
    let coloring = Tricoloring(colors);
    debug_assert!(validate(&graph, &coloring).is_valid());
    ColoredGraph { graph, coloring }
}

/// Small graphs used throughout tests, fixtures and the CLI.
pub mod named {
    use super::*;

    /// Two vertices joined by three parallel edges.
    pub fn theta() -> TrivalentGraph {
        TrivalentGraph::new(6, &[(0, 3), (1, 4), (2, 5)], vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap()
    }

    /// Two loops joined by a bridge.
    pub fn dumbbell() -> TrivalentGraph {
        TrivalentGraph::new(6, &[(0, 1), (2, 3), (4, 5)], vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap()
    }

    /// One edge with two univalent ends.
    pub fn capped_edge() -> TrivalentGraph {
        TrivalentGraph::new(2, &[(0, 1)], vec![vec![0], vec![1]]).unwrap()
    }

    /// A loop at a trivalent vertex plus a capped radius.
    pub fn g_m() -> TrivalentGraph {
        TrivalentGraph::new(4, &[(0, 1), (2, 3)], vec![vec![0, 1, 2], vec![3]]).unwrap()
    }

    /// The coloring of [`g_m`] whose surface is a Möbius band: the loop carries A and B.
    pub fn g_m_coloring() -> Tricoloring {
        Tricoloring(vec![Color::A, Color::B, Color::C, Color::Cap])
    }

    /// The complete graph on four vertices.
    pub fn k4() -> TrivalentGraph {
        let mut m = vec![vec![1u8; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0;
        }
        TrivalentGraph::from_matrix(&m).unwrap()
    }

    pub fn all_caps(graph: &TrivalentGraph) -> Tricoloring {
        Tricoloring(vec![Color::Cap; graph.half_edge_count()])
    }

    /// Colours the star of each trivalent vertex (A, B, C) in star order.
    pub fn straight(graph: &TrivalentGraph) -> Tricoloring {
        let mut c = vec![Color::Cap; graph.half_edge_count()];
        for star in graph.stars() {
            if star.len() == 3 {
                for (i, &h) in star.iter().enumerate() {
                    c[h] = Color::TRIPLE[i];
                }
            }
        }
        Tricoloring(c)
    }

    pub fn colored(graph: TrivalentGraph, coloring: Tricoloring) -> ColoredGraph {
        ColoredGraph::new(graph, coloring).expect("named coloring is valid")
    }
}

/// JSON document for a graph, optionally with a coloring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub format: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub circle: bool,
    pub half_edges: usize,
    pub pairing: Vec<[usize; 2]>,
    pub stars: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<BTreeMap<usize, Color>>,
}

/// JSON document holding only a coloring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringDoc {
    pub format: u32,
    pub coloring: BTreeMap<usize, Color>,
}

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format {0}")]
    Format(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Coloring(Violation),
}

impl GraphDoc {
    pub fn from_graph(graph: &TrivalentGraph, coloring: Option<&Tricoloring>) -> Self {
        GraphDoc {
            format: 1,
            circle: graph.is_circle(),
            half_edges: graph.half_edge_count(),
            pairing: graph.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            stars: graph.stars().to_vec(),
            coloring: coloring.map(|c| c.as_map()),
        }
    }

    pub fn graph(&self) -> Result<TrivalentGraph, DocError> {
        if self.format != 1 {
            return Err(DocError::Format(self.format));
        }
        if self.circle {
            if self.half_edges != 0 || !self.pairing.is_empty() || !self.stars.is_empty() {
                return Err(GraphError::CircleWithHalfEdges.into());
            }
            return Ok(TrivalentGraph::circle());
        }
        let pairs: Vec<(usize, usize)> = self.pairing.iter().map(|p| (p[0], p[1])).collect();
        Ok(TrivalentGraph::new(self.half_edges, &pairs, self.stars.clone())?)
    }

    pub fn coloring(&self) -> Result<Option<Tricoloring>, DocError> {
        self.coloring
            .as_ref()
            .map(|m| Tricoloring::from_map(m, self.half_edges).map_err(DocError::Coloring))
            .transpose()
    }

    pub fn parse(s: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph documents serialize") + "\n"
    }
}

impl ColoringDoc {
    pub fn from_coloring(coloring: &Tricoloring) -> Self {
        ColoringDoc { format: 1, coloring: coloring.as_map() }
    }

    pub fn coloring(&self, half_edges: usize) -> Result<Tricoloring, DocError> {
        Tricoloring::from_map(&self.coloring, half_edges).map_err(DocError::Coloring)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coloring documents serialize") + "\n"
    }

    pub fn parse(s: &str) -> Result<Self, DocError> {
        let d: ColoringDoc = serde_json::from_str(s)?;
        if d.format != 1 {
            return Err(DocError::Format(d.format));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    #[test]
    fn theta_straight_coloring_is_valid() {
        let g = theta();
        assert!(validate(&g, &straight(&g)).is_valid());
    }

    #[test]
    fn repeated_color_reported() {
        let g = theta();
        let c = Tricoloring(vec![Color::A, Color::A, Color::B, Color::A, Color::B, Color::C]);
        let r = validate(&g, &c);
        assert_eq!(r.violations, vec![Violation::RepeatedColor { vertex: 0 }]);
        assert_eq!(r.violations[0].to_string(), "repeated color at vertex 0");
    }

    #[test]
    fn capped_edge_all_cap_valid() {
        let g = capped_edge();
        assert!(validate(&g, &all_caps(&g)).is_valid());
    }

    #[test]
    fn bad_structures_rejected() {
        assert_eq!(TrivalentGraph::new(2, &[(0, 0)], vec![vec![0], vec![1]]), Err(GraphError::FixedPoint(0)));
        assert!(matches!(
            TrivalentGraph::new(4, &[(0, 1), (2, 3)], vec![vec![0, 1], vec![2, 3]]),
            Err(GraphError::BadValency { .. })
        ));
        assert_eq!(TrivalentGraph::new(2, &[(0, 1)], vec![vec![0]]), Err(GraphError::NoStar(1)));
    }

    #[test]
    fn euler_of_named_graphs() {
        assert_eq!(theta().euler(), -1);
        assert_eq!(dumbbell().euler(), -1);
        assert_eq!(capped_edge().euler(), 1);
        assert_eq!(g_m().euler(), 0);
        assert_eq!(TrivalentGraph::circle().euler(), 0);
    }

    #[test]
    fn edge_index_matches_edge_list() {
        let g = k4();
        for (k, (a, b)) in g.edges().into_iter().enumerate() {
            assert_eq!(g.edge_of(a), k);
            assert_eq!(g.edge_of(b), k);
        }
    }

    #[test]
    fn theta_and_dumbbell_differ() {
        assert!(!theta().is_isomorphic(&dumbbell()));
        assert!(theta().is_isomorphic(&theta()));
    }

    #[test]
    fn relabeled_graph_same_canonical_form() {
        let g = TrivalentGraph::new(6, &[(5, 1), (4, 0), (3, 2)], vec![vec![5, 3, 4], vec![2, 1, 0]]).unwrap();
        assert_eq!(g.canonical_form(), theta().canonical_form());
    }

    #[test]
    fn connect_sum_counts() {
        let t = colored(theta(), straight(&theta()));
        let s = boundary_connect_sum(&t, &t);
        assert_eq!(s.graph.trivalent_count(), 6);
        assert_eq!(s.graph.euler(), -3);
        assert!(s.graph.is_connected());
        let c = colored(capped_edge(), all_caps(&capped_edge()));
        let cc = boundary_connect_sum(&c, &c);
        assert_eq!(cc.graph.euler(), 1);
        let tc = boundary_connect_sum(&t, &c);
        assert_eq!(tc.graph.euler(), -1);
        assert_eq!(tc.graph.trivalent_count(), 4);
    }

    #[test]
    fn connect_sum_with_circle() {
        let t = colored(theta(), straight(&theta()));
        let circ = ColoredGraph { graph: TrivalentGraph::circle(), coloring: Tricoloring(vec![]) };
        let s = boundary_connect_sum(&t, &circ);
        assert_eq!(s.graph.euler(), -2);
        assert!(validate(&s.graph, &s.coloring).is_valid());
    }
}
