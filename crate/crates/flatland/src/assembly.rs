//! Strip surfaces X(G, α): one strip per half-edge inside G × (0, 4),
//! assembled as an explicit polygonal complex, classified, and read for
//! its boundary tangencies.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flowgraph::{validate, Color, Tricoloring, TrivalentGraph, ValidityReport};

/// Point of the graph over which a complex vertex sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "at", content = "id", rename_all = "snake_case")]
pub enum GraphPoint {
    /// Midpoint of edge `e` (index into `TrivalentGraph::edges`).
    Barycenter(usize),
    /// Graph vertex `w`.
    Vertex(usize),
    /// Auxiliary node on the vertexless circle.
    Node(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComplexVertex {
    pub point: GraphPoint,
    pub level: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Lies in a fiber {point} × (0, 4).
    Vertical,
    /// Part of a strip's bottom or top line.
    BoundaryLine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexEdge {
    pub ends: [usize; 2],
    pub kind: EdgeKind,
}

/// A polygon of the complex. `edges[i]` joins `cycle[i]` to `cycle[i + 1]`.
/// The flow runs in the direction of increasing level on every face.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFace {
    pub half_edge: Option<usize>,
    pub color: Option<Color>,
    pub cycle: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceComplex {
    pub vertices: Vec<ComplexVertex>,
    pub edges: Vec<ComplexEdge>,
    pub faces: Vec<ComplexFace>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub euler: i64,
    pub orientable: bool,
    pub genus: u32,
    pub boundary_components: u32,
}

impl SurfaceClass {
    pub fn disk() -> Self {
        SurfaceClass { euler: 1, orientable: true, genus: 0, boundary_components: 1 }
    }
    pub fn annulus() -> Self {
        SurfaceClass { euler: 0, orientable: true, genus: 0, boundary_components: 2 }
    }
    pub fn mobius() -> Self {
        SurfaceClass { euler: 0, orientable: false, genus: 1, boundary_components: 1 }
    }
    pub fn punctured_torus() -> Self {
        SurfaceClass { euler: -1, orientable: true, genus: 1, boundary_components: 1 }
    }
    pub fn punctured_klein() -> Self {
        SurfaceClass { euler: -1, orientable: false, genus: 2, boundary_components: 1 }
    }
    pub fn pair_of_pants() -> Self {
        SurfaceClass { euler: -1, orientable: true, genus: 0, boundary_components: 3 }
    }

    /// Solves χ = 2 − 2g − k (orientable) or χ = 2 − g − k (crosscaps).
    pub fn from_invariants(euler: i64, orientable: bool, boundary: u32) -> Result<Self, AssemblyError> {
        let rest = 2 - euler - boundary as i64;
        let genus = if orientable {
            if rest < 0 || rest % 2 != 0 {
                return Err(AssemblyError::NotASurface(format!(
                    "no orientable surface has euler {euler} with {boundary} boundary circles"
                )));
            }
            rest / 2
        } else {
            if rest < 1 {
                return Err(AssemblyError::NotASurface(format!(
                    "no non-orientable surface has euler {euler} with {boundary} boundary circles"
                )));
            }
            rest
        };
        Ok(SurfaceClass { euler, orientable, genus: genus as u32, boundary_components: boundary })
    }

    pub fn name(&self) -> String {
        let base = match (self.orientable, self.genus) {
            (true, 0) => "sphere".to_string(),
            (true, 1) => "torus".to_string(),
            (true, g) => format!("genus-{g} surface"),
            (false, 1) => "projective plane".to_string(),
            (false, 2) => "Klein bottle".to_string(),
            (false, g) => format!("sphere with {g} crosscaps"),
        };
        match self.boundary_components {
            0 => base,
            1 => format!("{base} minus a disk"),
            k => format!("{base} minus {k} disks"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("invalid coloring: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidColoring(ValidityReport),
    #[error("not a surface: {0}")]
    NotASurface(String),
}

/// Boundary line position inside a face: fiber-bottom (entry) or fiber-top (exit).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Entry,
    Exit,
}

struct Builder {
    vertices: Vec<ComplexVertex>,
    index: BTreeMap<ComplexVertex, usize>,
    edges: Vec<ComplexEdge>,
    vertical: BTreeMap<(usize, usize), usize>,
    faces: Vec<ComplexFace>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            vertices: Vec::new(),
            index: BTreeMap::new(),
            edges: Vec::new(),
            vertical: BTreeMap::new(),
            faces: Vec::new(),
        }
    }

    fn vertex(&mut self, point: GraphPoint, level: u8) -> usize {
        let v = ComplexVertex { point, level };
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        self.vertices.push(v);
        self.index.insert(v, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    /// Adds a face from its vertex cycle. Consecutive vertices over the same
    /// graph point share a vertical edge; other sides are fresh boundary lines.
    fn face(&mut self, half_edge: Option<usize>, color: Option<Color>, cycle: Vec<usize>) {
        let n = cycle.len();
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (cycle[i], cycle[(i + 1) % n]);
            if self.vertices[a].point == self.vertices[b].point {
                let key = (a.min(b), a.max(b));
                let id = match self.vertical.get(&key) {
                    Some(&id) => id,
                    None => {
                        self.edges.push(ComplexEdge { ends: [key.0, key.1], kind: EdgeKind::Vertical });
                        self.vertical.insert(key, self.edges.len() - 1);
                        self.edges.len() - 1
                    }
                };
                edges.push(id);
            } else {
                self.edges.push(ComplexEdge { ends: [a, b], kind: EdgeKind::BoundaryLine });
                edges.push(self.edges.len() - 1);
            }
        }
        self.faces.push(ComplexFace { half_edge, color, cycle, edges });
    }

    fn finish(self) -> SurfaceComplex {
        SurfaceComplex { vertices: self.vertices, edges: self.edges, faces: self.faces }
    }
}

/// Builds the strip complex of a valid colored graph.
pub fn assemble(graph: &TrivalentGraph, coloring: &Tricoloring) -> Result<SurfaceComplex, AssemblyError> {
    let report = validate(graph, coloring);
    if !report.is_valid() {
        return Err(AssemblyError::InvalidColoring(report));
    }
    let mut b = Builder::new();
    if graph.is_circle() {
        let (c0, c1) = (GraphPoint::Node(0), GraphPoint::Node(1));
        let (p02, p03, p12, p13) = (b.vertex(c0, 2), b.vertex(c0, 3), b.vertex(c1, 2), b.vertex(c1, 3));
        b.face(None, None, vec![p02, p12, p13, p03]);
        b.face(None, None, vec![p12, p02, p03, p13]);
        return Ok(b.finish());
    }
    for h in 0..graph.half_edge_count() {
        let e = GraphPoint::Barycenter(graph.edge_of(h));
        let w = GraphPoint::Vertex(graph.star_of(h));
        let color = coloring.get(h);
        let cycle = match color {
            Color::Cap => vec![b.vertex(e, 2), b.vertex(w, 2), b.vertex(e, 3)],
            c => {
                let (lo, hi) = c.levels();
                let mut cyc = vec![b.vertex(e, 2), b.vertex(w, lo)];
                if c == Color::C {
                    cyc.push(b.vertex(w, 2));
                }
                cyc.push(b.vertex(w, hi));
                cyc.push(b.vertex(e, 3));
                cyc
            }
        };
        b.face(Some(h), Some(color), cycle);
    }
    Ok(b.finish())
}

impl SurfaceComplex {
    /// Faces incident to each edge.
    pub fn edge_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (f, face) in self.faces.iter().enumerate() {
            for &e in &face.edges {
                out[e].push(f);
            }
        }
        out
    }

    /// Checks the structural invariants; returns a description of the first failure.
    pub fn check(&self) -> Result<(), AssemblyError> {
        let nv = self.vertices.len();
        for (i, e) in self.edges.iter().enumerate() {
            if e.ends.iter().any(|&v| v >= nv) || e.ends[0] == e.ends[1] {
                return Err(AssemblyError::NotASurface(format!("edge {i} has bad endpoints")));
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let n = face.cycle.len();
            if n < 3 || face.edges.len() != n {
                return Err(AssemblyError::NotASurface(format!("face {f} is degenerate")));
            }
            for i in 0..n {
                let (a, b) = (face.cycle[i], face.cycle[(i + 1) % n]);
                let e = *self
                    .edges
                    .get(face.edges[i])
                    .ok_or_else(|| AssemblyError::NotASurface(format!("face {f} references a missing edge")))?;
                if !(e.ends == [a, b] || e.ends == [b, a]) {
                    return Err(AssemblyError::NotASurface(format!("face {f} side {i} does not match its edge")));
                }
            }
        }
        for (e, fs) in self.edge_faces().iter().enumerate() {
            if fs.is_empty() || fs.len() > 2 {
                return Err(AssemblyError::NotASurface(format!("edge {e} borders {} faces", fs.len())));
            }
        }
        self.check_links()
    }

    /// Every vertex link must be a single path or a single cycle.
    fn check_links(&self) -> Result<(), AssemblyError> {
        let nv = self.vertices.len();
        let mut corners: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for face in &self.faces {
            let n = face.cycle.len();
            for i in 0..n {
                let v = face.cycle[i];
                corners[v].push((face.edges[(i + n - 1) % n], face.edges[i]));
            }
        }
        for (v, cs) in corners.iter().enumerate() {
            if cs.is_empty() {
                return Err(AssemblyError::NotASurface(format!("vertex {v} is isolated")));
            }
            let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
            let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
            fn find(p: &mut BTreeMap<usize, usize>, x: usize) -> usize {
                let mut r = x;
                while p[&r] != r {
                    r = p[&r];
                }
                p.insert(x, r);
                r
            }
            for &(a, b) in cs {
                *deg.entry(a).or_default() += 1;
                *deg.entry(b).or_default() += 1;
                parent.entry(a).or_insert(a);
                parent.entry(b).or_insert(b);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent.insert(ra, rb);
            }
            let keys: Vec<usize> = parent.keys().copied().collect();
            let roots: std::collections::BTreeSet<usize> = keys.into_iter().map(|k| find(&mut parent, k)).collect();
            let ends = deg.values().filter(|&&d| d == 1).count();
            if roots.len() != 1 || deg.values().any(|&d| d > 2) || !(ends == 0 || ends == 2) {
                return Err(AssemblyError::NotASurface(format!("link of vertex {v} is not a path or cycle")));
            }
        }
        Ok(())
    }

    /// Bottom (entry) and top (exit) boundary-line edges of a face: the one
    /// with the lower mean level is the bottom.
    pub fn face_lines(&self, f: usize) -> Option<(usize, usize)> {
        let lines: Vec<usize> =
            self.faces[f].edges.iter().copied().filter(|&e| self.edges[e].kind == EdgeKind::BoundaryLine).collect();
        if lines.len() != 2 {
            return None;
        }
        let level = |e: usize| -> u32 { self.edges[e].ends.iter().map(|&v| self.vertices[v].level as u32).sum() };
        if level(lines[0]) < level(lines[1]) {
            Some((lines[0], lines[1]))
        } else if level(lines[1]) < level(lines[0]) {
            Some((lines[1], lines[0]))
        } else {
            None
        }
    }

    /// Endpoint of `edge` lying over the same graph point as vertex `v`.
    pub fn endpoint_over(&self, edge: usize, v: usize) -> Option<usize> {
        let p = self.vertices[v].point;
        self.edges[edge].ends.iter().copied().find(|&x| self.vertices[x].point == p)
    }

    /// Vertical neighbours of `v`: (next lower, next higher) along its fiber.
    pub fn vertical_neighbours(&self, v: usize) -> (Option<usize>, Option<usize>) {
        let mut down = None;
        let mut up = None;
        for e in &self.edges {
            if e.kind != EdgeKind::Vertical || !e.ends.contains(&v) {
                continue;
            }
            let o = if e.ends[0] == v { e.ends[1] } else { e.ends[0] };
            if self.vertices[o].level < self.vertices[v].level {
                down = Some(o);
            } else {
                up = Some(o);
            }
        }
        (down, up)
    }
}

/// Topological type of the complex.
pub fn classify(surface: &SurfaceComplex) -> Result<SurfaceClass, AssemblyError> {
    surface.check()?;
    let euler = surface.vertices.len() as i64 - surface.edges.len() as i64 + surface.faces.len() as i64;
    let orientable = orientable(surface);
    let boundary = boundary_cycles(surface)?.len() as u32;
    if boundary == 0 {
        return Err(AssemblyError::NotASurface("closed complex; strip surfaces always have boundary".into()));
    }
    SurfaceClass::from_invariants(euler, orientable, boundary)
}

/// Propagates orientations; two faces agree across an edge when they run it in opposite directions.
fn orientable(surface: &SurfaceComplex) -> bool {
    let nf = surface.faces.len();
    let mut dir: Vec<BTreeMap<usize, bool>> = vec![BTreeMap::new(); nf];
    for (f, face) in surface.faces.iter().enumerate() {
        let n = face.cycle.len();
        for i in 0..n {
            let e = face.edges[i];
            dir[f].insert(
                e,
                surface.edges[e].ends[0] == face.cycle[i] && surface.edges[e].ends[1] == face.cycle[(i + 1) % n],
            );
        }
    }
    let ef = surface.edge_faces();
    let mut sign = vec![0i8; nf];
    for start in 0..nf {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            for &e in &surface.faces[f].edges {
                if ef[e].len() != 2 {
                    continue;
                }
                let g = if ef[e][0] == f { ef[e][1] } else { ef[e][0] };
                let same = dir[f][&e] == dir[g][&e];
                let want = if same { -sign[f] } else { sign[f] };
                if sign[g] == 0 {
                    sign[g] = want;
                    queue.push_back(g);
                } else if sign[g] != want {
                    return false;
                }
            }
        }
    }
    true
}

/// Boundary cycles as closed vertex/edge walks. Each cycle lists its edges
/// in traversal order and `vertices[i]` is the start of `edges[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryCycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

pub fn boundary_cycles(surface: &SurfaceComplex) -> Result<Vec<BoundaryCycle>, AssemblyError> {
    let ef = surface.edge_faces();
    let bedges: Vec<usize> = (0..surface.edges.len()).filter(|&e| ef[e].len() == 1).collect();
    let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &bedges {
        for &v in &surface.edges[e].ends {
            at.entry(v).or_default().push(e);
        }
    }
    if let Some((v, _)) = at.iter().find(|(_, es)| es.len() != 2) {
        return Err(AssemblyError::NotASurface(format!("boundary is not a union of simple cycles at vertex {v}")));
    }
    let mut used = vec![false; surface.edges.len()];
    let mut cycles = Vec::new();
    for &e0 in &bedges {
        if used[e0] {
            continue;
        }
        let start = surface.edges[e0].ends[0];
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let (mut v, mut e) = (start, e0);
        loop {
            used[e] = true;
            vertices.push(v);
            edges.push(e);
            let ends = surface.edges[e].ends;
            let next_v = if ends[0] == v { ends[1] } else { ends[0] };
            if next_v == start {
                break;
            }
            let pair = &at[&next_v];
            e = if pair[0] == e { pair[1] } else { pair[0] };
            v = next_v;
        }
        cycles.push(BoundaryCycle { vertices, edges });
    }
    Ok(cycles)
}

/// A boundary tangency point of the vertical flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TangencyPoint {
    /// Graph vertex under the point, when there is one.
    pub graph_vertex: Option<usize>,
    /// Complex vertex at the point.
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangencyCensus {
    pub concave_points: Vec<TangencyPoint>,
    pub convex_points: Vec<TangencyPoint>,
    pub entry_arcs: usize,
    pub exit_arcs: usize,
    pub entry_circles: usize,
    pub exit_circles: usize,
}

/// Entry/exit structure of the boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryStructure {
    /// Side of every boundary edge (None for interior edges).
    pub side: Vec<Option<Side>>,
    /// Face holding each boundary edge.
    pub face: Vec<Option<usize>>,
    pub cycles: Vec<BoundaryCycle>,
    /// Boundary vertices where an entry line meets an exit line.
    pub tangencies: Vec<usize>,
}

impl BoundaryStructure {
    pub fn of(surface: &SurfaceComplex) -> Result<Self, AssemblyError> {
        let ef = surface.edge_faces();
        let mut side = vec![None; surface.edges.len()];
        let mut face = vec![None; surface.edges.len()];
        for f in 0..surface.faces.len() {
            let (bottom, top) = surface
                .face_lines(f)
                .ok_or_else(|| AssemblyError::NotASurface(format!("face {f} has no bottom/top lines")))?;
            side[bottom] = Some(Side::Entry);
            side[top] = Some(Side::Exit);
        }
        for (e, fs) in ef.iter().enumerate() {
            if fs.len() == 1 {
                if side[e].is_none() {
                    return Err(AssemblyError::NotASurface(format!("vertical edge {e} lies on the boundary")));
                }
                face[e] = Some(fs[0]);
            } else if side[e].is_some() {
                return Err(AssemblyError::NotASurface(format!("boundary line {e} is interior")));
            }
        }
        let cycles = boundary_cycles(surface)?;
        let mut tangencies = Vec::new();
        for c in &cycles {
            let n = c.edges.len();
            for i in 0..n {
                let (prev, next) = (c.edges[(i + n - 1) % n], c.edges[i]);
                if side[prev] != side[next] {
                    tangencies.push(c.vertices[i]);
                }
            }
        }
        tangencies.sort_unstable();
        Ok(BoundaryStructure { side, face, cycles, tangencies })
    }

    /// A tangency is concave when the fiber continues inside the surface on both sides.
    pub fn is_concave(&self, surface: &SurfaceComplex, v: usize) -> bool {
        let (down, up) = surface.vertical_neighbours(v);
        down.is_some() && up.is_some()
    }
}

pub fn tangency_census(surface: &SurfaceComplex) -> Result<TangencyCensus, AssemblyError> {
    let bs = BoundaryStructure::of(surface)?;
    let mut concave_points = Vec::new();
    let mut convex_points = Vec::new();
    for &t in &bs.tangencies {
        let graph_vertex = match surface.vertices[t].point {
            GraphPoint::Vertex(w) => Some(w),
            _ => None,
        };
        let p = TangencyPoint { graph_vertex, vertex: t };
        if bs.is_concave(surface, t) {
            concave_points.push(p);
        } else {
            convex_points.push(p);
        }
    }
    let (mut entry_arcs, mut exit_arcs, mut entry_circles, mut exit_circles) = (0, 0, 0, 0);
    for c in &bs.cycles {
        let tang = c.vertices.iter().filter(|v| bs.tangencies.binary_search(v).is_ok()).count();
        if tang == 0 {
            match bs.side[c.edges[0]] {
                Some(Side::Entry) => entry_circles += 1,
                _ => exit_circles += 1,
            }
        } else {
            // Tangencies alternate entry and exit arcs around the cycle.
            entry_arcs += tang / 2;
            exit_arcs += tang / 2;
        }
    }
    Ok(TangencyCensus { concave_points, convex_points, entry_arcs, exit_arcs, entry_circles, exit_circles })
}

/// SVG of the strip diagram over a linear layout of the graph: one column per
/// half-edge spanning levels 0..4, with its bottom and top lines drawn in the half-edge colour.
pub fn strip_svg(graph: &TrivalentGraph, coloring: &Tricoloring) -> String {
    let h = graph.half_edge_count().max(1);
    let col_w = 60.0;
    let width = col_w * h as f64 + 40.0;
    let height = 260.0;
    let y = |level: f64| height - 30.0 - level * 50.0;
    let mut s = crate::svg::Svg::new(width, height);
    for v in 0..=4 {
        s.line(20.0, y(v as f64), width - 20.0, y(v as f64), "#dddddd", 0.5);
    }
    for (k, hh) in (0..graph.half_edge_count()).enumerate() {
        let x0 = 20.0 + col_w * k as f64;
        let (xe, xw) = (x0 + 5.0, x0 + col_w - 5.0);
        let cstroke = match coloring.get(hh) {
            Color::A => "#d62728",
            Color::B => "#2ca02c",
            Color::C => "#1f77b4",
            Color::Cap => "#7f7f7f",
        };
        let (lo, hi) = coloring.get(hh).levels();
        let pts = if coloring.get(hh) == Color::Cap {
            vec![(xe, y(2.0)), (xw, y(2.0)), (xe, y(3.0))]
        } else {
            vec![(xe, y(2.0)), (xw, y(lo as f64)), (xw, y(hi as f64)), (xe, y(3.0))]
        };
        s.polygon(&pts, "#f4f4f4", "#999999", 0.5);
        s.line(xe, y(2.0), xw, y(lo as f64), cstroke, 2.0);
        let (tx, ty) = if coloring.get(hh) == Color::Cap { (xw, y(2.0)) } else { (xw, y(hi as f64)) };
        s.line(tx, ty, xe, y(3.0), cstroke, 2.0);
        s.text(x0 + col_w / 2.0, height - 8.0, &format!("h{hh} e{} w{}", graph.edge_of(hh), graph.star_of(hh)), 9.0);
    }
    s.finish()
}
