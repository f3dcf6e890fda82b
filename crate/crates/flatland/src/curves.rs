//! Immersed curves in the plane or the annulus S¹ × ℝ with coordinates (θ, u):
//! signed double points, turning number, checkerboard signs, vertical tangencies
//! of the field ∂_u and the J invariant of a curve pattern.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::svg::Svg;

/// Minimum |sin| of the angle at a double point.
pub const CROSSING_SIN_TOL: f64 = 1e-6;
/// Minimum |d²θ/du²| at a fold tip.
pub const FOLD_CURVATURE_TOL: f64 = 1e-3;
/// Slope |tθ| below which a fold-free vertex is flagged as a vertical inflection.
pub const INFLECTION_SLOPE_TOL: f64 = 1e-4;
/// Rounding tolerance for the turning number.
pub const TURNING_TOL: f64 = 1e-6;
/// Default sample count for generated loops.
pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    Plane,
    Annulus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TangencyKind {
    /// Trajectory germ inside the region: locus ∂₂⁺, pattern (121).
    Concave,
    /// Trajectory germ outside the region: locus ∂₂⁻, pattern (2).
    Convex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Plus => "+",
            Polarity::Minus => "-",
        })
    }
}

impl Polarity {
    /// ⊕ exactly when the inner normal of the region points toward −θ.
    pub fn from_inner_normal(theta_sign: i8) -> Polarity {
        if theta_sign < 0 {
            Polarity::Plus
        } else {
            Polarity::Minus
        }
    }

    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Plus => Polarity::Minus,
            Polarity::Minus => Polarity::Plus,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("loop {0} has fewer than 3 samples")]
    TooFewPoints(usize),
    #[error("loop {0}: sample {1} repeats its predecessor")]
    DuplicatePoint(usize, usize),
    #[error("loop {0}: segment {1} is vertical")]
    VerticalSegment(usize, usize),
    #[error("loop {0}: segment {1} has length {2}, above the resolution bound {3}")]
    StepTooLong(usize, usize, f64, f64),
    #[error("double point at ({theta}, {u}) is near-tangential (|sin| = {sin:e})")]
    NearTangentialCrossing { theta: f64, u: f64, sin: f64 },
    #[error("segments overlap collinearly near ({0}, {1})")]
    CollinearOverlap(f64, f64),
    #[error("triple point near ({0}, {1})")]
    TriplePoint(f64, f64),
    #[error("loop {0}: fold at sample {1} has contact order above 2 (|d²θ/du²| = {2:e})")]
    DegenerateFold(usize, usize, f64),
    #[error("loop {0}: vertical inflection near sample {1}")]
    VerticalInflection(usize, usize),
    #[error("turning {0} is not an integer; sampling too coarse")]
    NonIntegralTurning(f64),
    #[error("no generic ray found from ({0}, {1})")]
    RayFailure(f64, f64),
    #[error("operation needs a single loop in the plane")]
    PlaneOnly,
    #[error("snake site at loop {0}, sample {1} is not a fold-free graph over θ of length {2}")]
    SnakeSite(usize, usize, f64),
    #[error("unsupported format {0}")]
    Format(u32),
    #[error("malformed curve JSON: {0}")]
    Json(String),
    #[error("no generic loop found after {0} attempts")]
    NoGenericLoop(usize),
}

/// Closed polyline. In the annulus the θ coordinates are lifted to ℝ so that
/// consecutive samples are close; the lift closes up after `winding` turns.
#[derive(Clone, Debug, PartialEq)]
pub struct ImmersedCurve {
    points: Vec<[f64; 2]>,
    winding: i64,
}

impl ImmersedCurve {
    pub fn plane(points: Vec<[f64; 2]>) -> Self {
        ImmersedCurve { points, winding: 0 }
    }

    /// Lifts wrapped angles so each step has |Δθ| ≤ π.
    pub fn annulus(points: Vec<[f64; 2]>) -> Self {
        if points.is_empty() {
            return ImmersedCurve { points, winding: 0 };
        }
        let mut lifted = Vec::with_capacity(points.len());
        lifted.push(points[0]);
        for p in &points[1..] {
            let prev: [f64; 2] = *lifted.last().unwrap();
            lifted.push([prev[0] + wrap(p[0] - prev[0]), p[1]]);
        }
        let last = *lifted.last().unwrap();
        let close = last[0] + wrap(points[0][0] - last[0]);
        let winding = ((close - points[0][0]) / TAU).round() as i64;
        ImmersedCurve { points: lifted, winding }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sample `i` in the lift, continuing past the last sample.
    fn at(&self, i: usize) -> [f64; 2] {
        let n = self.points.len();
        let p = self.points[i % n];
        let k = (i / n) as f64;
        [p[0] + k * TAU * self.winding as f64, p[1]]
    }

    /// Segment `i` from sample `i` to sample `i + 1` (lifted).
    pub fn segment(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        (self.at(i), self.at(i + 1))
    }

    fn prev(&self, i: usize) -> [f64; 2] {
        let n = self.points.len();
        if i == 0 {
            let p = self.points[n - 1];
            [p[0] - TAU * self.winding as f64, p[1]]
        } else {
            self.points[i - 1]
        }
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        ImmersedCurve { points, winding: -self.winding }
    }

    pub fn map(&self, f: impl Fn([f64; 2]) -> [f64; 2], winding: i64) -> Self {
        ImmersedCurve { points: self.points.iter().map(|&p| f(p)).collect(), winding }
    }
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// A family of disjointly indexed loops in one ambient surface.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePattern {
    pub ambient: Ambient,
    pub loops: Vec<ImmersedCurve>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveDoc {
    #[serde(default = "one")]
    format: u32,
    ambient: Ambient,
    loops: Vec<Vec<[f64; 2]>>,
}

fn one() -> u32 {
    1
}

impl CurvePattern {
    pub fn new(ambient: Ambient, loops: Vec<ImmersedCurve>) -> Self {
        CurvePattern { ambient, loops }
    }

    pub fn single(curve: ImmersedCurve) -> Self {
        CurvePattern { ambient: Ambient::Plane, loops: vec![curve] }
    }

    pub fn from_json(s: &str) -> Result<Self, CurveError> {
        let doc: CurveDoc = serde_json::from_str(s).map_err(|e| CurveError::Json(e.to_string()))?;
        if doc.format != 1 {
            return Err(CurveError::Format(doc.format));
        }
        let loops = doc
            .loops
            .into_iter()
            .map(|l| match doc.ambient {
                Ambient::Plane => ImmersedCurve::plane(l),
                Ambient::Annulus => ImmersedCurve::annulus(l),
            })
            .collect();
        Ok(CurvePattern { ambient: doc.ambient, loops })
    }

    /// Annulus angles are written reduced to [0, 2π).
    pub fn to_json(&self) -> String {
        let loops = self
            .loops
            .iter()
            .map(|c| {
                c.points
                    .iter()
                    .map(|&[t, u]| match self.ambient {
                        Ambient::Plane => [t, u],
                        Ambient::Annulus => [t.rem_euclid(TAU), u],
                    })
                    .collect()
            })
            .collect();
        let doc = CurveDoc { format: 1, ambient: self.ambient, loops };
        serde_json::to_string(&doc).expect("curve documents serialize") + "\n"
    }

    pub fn translated(&self, dtheta: f64, du: f64) -> Self {
        let loops = self.loops.iter().map(|c| c.map(|[t, u]| [t + dtheta, u + du], c.winding)).collect();
        CurvePattern { ambient: self.ambient, loops }
    }

    /// Mirror image under θ ↦ −θ.
    pub fn mirrored(&self) -> Self {
        let loops = self.loops.iter().map(|c| c.map(|[t, u]| [-t, u], -c.winding)).collect();
        CurvePattern { ambient: self.ambient, loops }
    }

    pub fn reversed(&self) -> Self {
        CurvePattern { ambient: self.ambient, loops: self.loops.iter().map(|c| c.reversed()).collect() }
    }

    fn segments(&self) -> Vec<Seg> {
        let mut out = Vec::new();
        for (l, c) in self.loops.iter().enumerate() {
            for i in 0..c.len() {
                let (a, b) = c.segment(i);
                let shift = match self.ambient {
                    Ambient::Plane => 0.0,
                    Ambient::Annulus => (a[0].min(b[0]) / TAU).floor() * TAU,
                };
                out.push(Seg { id: (l, i), a: [a[0] - shift, a[1]], b: [b[0] - shift, b[1]] });
            }
        }
        out
    }

    /// Sorted u-values where the vertical line at `theta` meets the pattern.
    pub fn fiber(&self, theta: f64) -> Vec<f64> {
        let mut us = Vec::new();
        for s in self.segments() {
            let shifts: &[f64] = match self.ambient {
                Ambient::Plane => &[0.0],
                Ambient::Annulus => &[-TAU, 0.0, TAU],
            };
            let target = match self.ambient {
                Ambient::Plane => theta,
                Ambient::Annulus => theta.rem_euclid(TAU),
            };
            for &sh in shifts {
                let (x0, x1) = (s.a[0] + sh, s.b[0] + sh);
                let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
                if target >= lo && target < hi {
                    let t = (target - x0) / (x1 - x0);
                    us.push(s.a[1] + t * (s.b[1] - s.a[1]));
                }
            }
        }
        us.sort_by(f64::total_cmp);
        us
    }
}

#[derive(Clone, Copy, Debug)]
struct Seg {
    id: (usize, usize),
    a: [f64; 2],
    b: [f64; 2],
}

/// A transversal double point of the pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub theta: f64,
    pub u: f64,
    /// (loop, segment, parameter in [0, 1)) for both branches, first branch has the smaller key.
    pub first: (usize, usize, f64),
    pub second: (usize, usize, f64),
    pub dir_first: [f64; 2],
    pub dir_second: [f64; 2],
}

/// A sample where θ changes direction, refined by a parabola in u.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldTip {
    pub loop_index: usize,
    pub vertex: usize,
    pub theta: f64,
    pub u: f64,
    /// +1 at a local θ-maximum, −1 at a local θ-minimum.
    pub side: i8,
    /// Sign of du along the curve orientation at the tip.
    pub du_sign: i8,
    pub curvature: f64,
}

/// Evidence that a pattern is generic.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub crossings: Vec<Crossing>,
    pub folds: Vec<FoldTip>,
    pub min_crossing_sin: f64,
}

/// Resolution bound on sample spacing used by [`certify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertOptions {
    pub max_step: f64,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions { max_step: 0.5 }
    }
}

pub fn certify(pattern: &CurvePattern) -> Result<Certificate, CurveError> {
    certify_with(pattern, CertOptions::default())
}

pub fn certify_with(pattern: &CurvePattern, opts: CertOptions) -> Result<Certificate, CurveError> {
    let mut folds = Vec::new();
    for (l, c) in pattern.loops.iter().enumerate() {
        let n = c.len();
        if n < 3 {
            return Err(CurveError::TooFewPoints(l));
        }
        for i in 0..n {
            let (a, b) = c.segment(i);
            let d = sub(b, a);
            let len = norm(d);
            if len == 0.0 {
                return Err(CurveError::DuplicatePoint(l, (i + 1) % n));
            }
            if d[0].abs() <= 1e-15 * len {
                return Err(CurveError::VerticalSegment(l, i));
            }
            if len > opts.max_step {
                return Err(CurveError::StepTooLong(l, i, len, opts.max_step));
            }
        }
        for i in 0..n {
            let p0 = c.prev(i);
            let p1 = c.at(i);
            let p2 = c.at(i + 1);
            let (d0, d1) = (sub(p1, p0), sub(p2, p1));
            if d0[0] * d1[0] < 0.0 {
                folds.push(fold_tip(l, i, p0, p1, p2)?);
            } else {
                let s0 = d0[0].abs() / norm(d0);
                let s1 = d1[0].abs() / norm(d1);
                if s0.max(s1) < INFLECTION_SLOPE_TOL {
                    return Err(CurveError::VerticalInflection(l, i));
                }
            }
        }
    }
    let crossings = find_crossings(pattern)?;
    let mut min_sin = f64::INFINITY;
    for x in &crossings {
        let s = cross(x.dir_first, x.dir_second).abs() / (norm(x.dir_first) * norm(x.dir_second));
        min_sin = min_sin.min(s);
        if s < CROSSING_SIN_TOL {
            return Err(CurveError::NearTangentialCrossing { theta: x.theta, u: x.u, sin: s });
        }
    }
    let mut sorted: Vec<&Crossing> = crossings.iter().collect();
    sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    for w in 0..sorted.len() {
        for v in w + 1..sorted.len() {
            if sorted[v].theta - sorted[w].theta > 1e-9 {
                break;
            }
            if (sorted[v].u - sorted[w].u).abs() <= 1e-9 {
                return Err(CurveError::TriplePoint(sorted[w].theta, sorted[w].u));
            }
        }
    }
    Ok(Certificate { crossings, folds, min_crossing_sin: min_sin })
}

fn fold_tip(l: usize, i: usize, p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> Result<FoldTip, CurveError> {
    let (u0, u1, u2) = (p0[1], p1[1], p2[1]);
    let (t0, t1, t2) = (p0[0], p1[0], p2[0]);
    if !((u1 - u0) * (u2 - u1) > 0.0) {
        return Err(CurveError::DegenerateFold(l, i, 0.0));
    }
    let f01 = (t1 - t0) / (u1 - u0);
    let f12 = (t2 - t1) / (u2 - u1);
    let a = (f12 - f01) / (u2 - u0);
    let curvature = 2.0 * a;
    if curvature.abs() < FOLD_CURVATURE_TOL {
        return Err(CurveError::DegenerateFold(l, i, curvature.abs()));
    }
    let u = 0.5 * (u0 + u1) - f01 / (2.0 * a);
    let theta = t0 + f01 * (u - u0) + a * (u - u0) * (u - u1);
    let side = if a < 0.0 { 1 } else { -1 };
    let du_sign = if u2 > u0 { 1 } else { -1 };
    let (lo, hi) = (u0.min(u2), u0.max(u2));
    let u = u.clamp(lo, hi);
    Ok(FoldTip { loop_index: l, vertex: i, theta, u, side, du_sign, curvature })
}

fn seg_intersection(s: &Seg, t: &Seg) -> Result<Option<(f64, f64)>, CurveError> {
    let r = sub(s.b, s.a);
    let q = sub(t.b, t.a);
    let den = cross(r, q);
    let w = sub(t.a, s.a);
    if den.abs() <= 1e-18 * norm(r) * norm(q) {
        if cross(w, r).abs() <= 1e-15 * norm(r) * (1.0 + norm(w)) {
            let rr = r[0] * r[0] + r[1] * r[1];
            let t0 = (w[0] * r[0] + w[1] * r[1]) / rr;
            let t1 = t0 + (q[0] * r[0] + q[1] * r[1]) / rr;
            let (lo, hi) = (t0.min(t1), t0.max(t1));
            if hi > 0.0 && lo < 1.0 {
                return Err(CurveError::CollinearOverlap(s.a[0], s.a[1]));
            }
        }
        return Ok(None);
    }
    let a = cross(w, q) / den;
    let b = cross(w, r) / den;
    if (0.0..1.0).contains(&a) && (0.0..1.0).contains(&b) {
        Ok(Some((a, b)))
    } else {
        Ok(None)
    }
}

fn adjacent(p: &CurvePattern, a: (usize, usize), b: (usize, usize)) -> bool {
    if a.0 != b.0 {
        return false;
    }
    let n = p.loops[a.0].len();
    (a.1 + 1) % n == b.1 || (b.1 + 1) % n == a.1 || a.1 == b.1
}

/// All double points by an x-sorted sweep. In the annulus each segment is also
/// considered one period to the left; a double point is kept when its θ lies in [0, 2π).
pub fn find_crossings(pattern: &CurvePattern) -> Result<Vec<Crossing>, CurveError> {
    let mut segs = pattern.segments();
    if pattern.ambient == Ambient::Annulus {
        let copies: Vec<Seg> =
            segs.iter().map(|s| Seg { id: s.id, a: [s.a[0] - TAU, s.a[1]], b: [s.b[0] - TAU, s.b[1]] }).collect();
        segs.extend(copies);
    }
    let xmin = |s: &Seg| s.a[0].min(s.b[0]);
    let xmax = |s: &Seg| s.a[0].max(s.b[0]);
    segs.sort_by(|a, b| xmin(a).total_cmp(&xmin(b)).then(a.id.cmp(&b.id)));
    let mut out = Vec::new();
    for i in 0..segs.len() {
        let s = &segs[i];
        let (sy0, sy1) = (s.a[1].min(s.b[1]), s.a[1].max(s.b[1]));
        for t in &segs[i + 1..] {
            if xmin(t) > xmax(s) {
                break;
            }
            if t.id == s.id || adjacent(pattern, s.id, t.id) {
                continue;
            }
            if t.a[1].max(t.b[1]) < sy0 || t.a[1].min(t.b[1]) > sy1 {
                continue;
            }
            if let Some((ps, pt)) = seg_intersection(s, t)? {
                let x = s.a[0] + ps * (s.b[0] - s.a[0]);
                let y = s.a[1] + ps * (s.b[1] - s.a[1]);
                if pattern.ambient == Ambient::Annulus && !(0.0..TAU).contains(&x) {
                    continue;
                }
                let (f, g, df, dg) = if s.id < t.id {
                    ((s.id.0, s.id.1, ps), (t.id.0, t.id.1, pt), sub(s.b, s.a), sub(t.b, t.a))
                } else {
                    ((t.id.0, t.id.1, pt), (s.id.0, s.id.1, ps), sub(t.b, t.a), sub(s.b, s.a))
                };
                out.push(Crossing { theta: x, u: y, first: f, second: g, dir_first: df, dir_second: dg });
            }
        }
    }
    out.sort_by(|a, b| a.first.0.cmp(&b.first.0).then(a.first.1.cmp(&b.first.1)).then(a.first.2.total_cmp(&b.first.2)));
    Ok(out)
}

/// Signed double-point census of a plane curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfIntersections {
    pub n_plus: u32,
    pub n_minus: u32,
    pub mu: i64,
}

/// Index of the lowest sample, ties broken by least θ.
fn lowest(curve: &ImmersedCurve) -> usize {
    (0..curve.len())
        .min_by(|&i, &j| {
            let (p, q) = (curve.points[i], curve.points[j]);
            p[1].total_cmp(&q[1]).then(p[0].total_cmp(&q[0]))
        })
        .unwrap_or(0)
}

/// Signs each double point by the turn from the first-visit tangent to the
/// second-visit tangent, travelling from the lowest point: a clockwise turn counts in N⁺.
pub fn self_intersections(curve: &ImmersedCurve) -> Result<SelfIntersections, CurveError> {
    let pattern = CurvePattern::single(curve.clone());
    let cert = certify(&pattern)?;
    let n = curve.len();
    let p = lowest(curve);
    let tangent = sub(curve.at(p + 1), curve.prev(p));
    let mu = if tangent[0] > 0.0 { 1 } else { -1 };
    let (mut np, mut nm) = (0, 0);
    for x in &cert.crossings {
        let key = |seg: usize, t: f64| ((seg + n - p) % n) as f64 + t;
        let (k1, k2) = (key(x.first.1, x.first.2), key(x.second.1, x.second.2));
        let (t1, t2) = if k1 < k2 { (x.dir_first, x.dir_second) } else { (x.dir_second, x.dir_first) };
        if cross(t1, t2) < 0.0 {
            np += 1;
        } else {
            nm += 1;
        }
    }
    Ok(SelfIntersections { n_plus: np, n_minus: nm, mu })
}

/// Total turning of the tangent over 2π.
pub fn gauss_degree(curve: &ImmersedCurve) -> Result<i64, CurveError> {
    let n = curve.len();
    if n < 3 {
        return Err(CurveError::TooFewPoints(0));
    }
    let mut total = 0.0;
    for i in 0..n {
        let v1 = sub(curve.at(i), curve.prev(i));
        let v2 = sub(curve.at(i + 1), curve.at(i));
        total += cross(v1, v2).atan2(v1[0] * v2[0] + v1[1] * v2[1]);
    }
    let t = total / TAU;
    let r = t.round();
    if (t - r).abs() > TURNING_TOL {
        return Err(CurveError::NonIntegralTurning(t));
    }
    Ok(r as i64)
}

/// +1 near infinity, flipping across every strand. Computed by the parity of
/// hits along an upward ray, tilted through a fixed sequence when the ray is degenerate.
pub fn checkerboard_sign(pattern: &CurvePattern, point: [f64; 2]) -> Result<i8, CurveError> {
    let segs = pattern.segments();
    'tilt: for k in 0..64 {
        let delta = if k == 0 { 0.0 } else { 1e-4 * k as f64 * if k % 2 == 0 { 1.0 } else { -1.0 } };
        let dir = [delta, 1.0];
        let mut hits = 0usize;
        for s in &segs {
            let shifts: &[f64] = match pattern.ambient {
                Ambient::Plane => &[0.0],
                Ambient::Annulus => &[-TAU, 0.0, TAU],
            };
            let x0 = match pattern.ambient {
                Ambient::Plane => point[0],
                Ambient::Annulus => point[0].rem_euclid(TAU),
            };
            for &sh in shifts {
                let a = [s.a[0] + sh, s.a[1]];
                let b = [s.b[0] + sh, s.b[1]];
                let e = sub(b, a);
                let den = cross(dir, e);
                let w = sub(a, [x0, point[1]]);
                if den.abs() < 1e-14 * norm(e) {
                    if cross(w, dir).abs() < 1e-12 {
                        continue 'tilt;
                    }
                    continue;
                }
                // point + r·dir = a + q·e
                let r = cross(w, e) / den;
                let q = cross(w, dir) / den;
                if r <= 0.0 || !(-1e-12..=1.0 + 1e-12).contains(&q) {
                    continue;
                }
                if q.abs() < 1e-10 || (1.0 - q).abs() < 1e-10 {
                    continue 'tilt;
                }
                hits += 1;
            }
        }
        return Ok(if hits.is_multiple_of(2) { 1 } else { -1 });
    }
    Err(CurveError::RayFailure(point[0], point[1]))
}

/// A simple tangency of the vertical field with the pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyEvent {
    pub loop_index: usize,
    pub vertex: usize,
    pub theta: f64,
    pub u: f64,
    pub kind: TangencyKind,
    pub polarity: Polarity,
    pub order: u8,
}

fn probe_offset(tip: &FoldTip) -> f64 {
    1e-9 * (1.0 + tip.theta.abs())
}

/// Events of the region where the checkerboard sign is −1.
pub fn vertical_tangencies(pattern: &CurvePattern) -> Result<Vec<TangencyEvent>, CurveError> {
    let cert = certify(pattern)?;
    let mut out = Vec::with_capacity(cert.folds.len());
    for tip in &cert.folds {
        let probe = [tip.theta + tip.side as f64 * probe_offset(tip), tip.u];
        let concave = checkerboard_sign(pattern, probe)? < 0;
        out.push(event_from(tip, concave));
    }
    sort_events(&mut out);
    Ok(out)
}

/// Events of the immersed region lying to the left of each oriented loop.
pub fn classify_tangencies_oriented(pattern: &CurvePattern) -> Result<Vec<TangencyEvent>, CurveError> {
    let cert = certify(pattern)?;
    let mut out: Vec<TangencyEvent> = cert
        .folds
        .iter()
        .map(|tip| {
            let normal = -tip.du_sign;
            event_from(tip, normal == tip.side)
        })
        .collect();
    sort_events(&mut out);
    Ok(out)
}

fn event_from(tip: &FoldTip, concave: bool) -> TangencyEvent {
    let normal = if concave { tip.side } else { -tip.side };
    TangencyEvent {
        loop_index: tip.loop_index,
        vertex: tip.vertex,
        theta: tip.theta,
        u: tip.u,
        kind: if concave { TangencyKind::Concave } else { TangencyKind::Convex },
        polarity: Polarity::from_inner_normal(normal),
        order: 2,
    }
}

fn sort_events(ev: &mut [TangencyEvent]) {
    ev.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.u.total_cmp(&b.u)));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JReport {
    pub j: i64,
    pub concave_plus: u32,
    pub concave_minus: u32,
    pub convex: u32,
    /// c⁺, the number of concave events.
    pub c_plus: u32,
    pub bound_holds: bool,
}

pub fn j_from_events(events: &[TangencyEvent]) -> JReport {
    let count = |k: TangencyKind, p: Option<Polarity>| {
        events.iter().filter(|e| e.kind == k && p.is_none_or(|p| e.polarity == p)).count() as u32
    };
    let cp = count(TangencyKind::Concave, Some(Polarity::Plus));
    let cm = count(TangencyKind::Concave, Some(Polarity::Minus));
    let j = cp as i64 - cm as i64;
    JReport {
        j,
        concave_plus: cp,
        concave_minus: cm,
        convex: count(TangencyKind::Convex, None),
        c_plus: cp + cm,
        bound_holds: j.unsigned_abs() <= (cp + cm) as u64,
    }
}

pub fn j_from_pattern(pattern: &CurvePattern) -> Result<JReport, CurveError> {
    Ok(j_from_events(&vertical_tangencies(pattern)?))
}

/// Euler characteristic of the trajectory graph: convex tips are univalent and
/// concave tips trivalent vertices.
pub fn trajectory_graph_euler(events: &[TangencyEvent]) -> Option<i64> {
    let r = j_from_events(events);
    let (v, h) = (r.convex as i64 + r.c_plus as i64, r.convex as i64 + 3 * r.c_plus as i64);
    (h % 2 == 0).then_some(v - h / 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhitneyReport {
    pub gauss_degree: i64,
    pub mu: i64,
    pub n_plus: u32,
    pub n_minus: u32,
    pub whitney_holds: bool,
    pub convex: u32,
    pub concave: u32,
    /// (#convex − #concave)/2 when that is an integer.
    pub region_degree: Option<i64>,
    pub region_holds: bool,
}

pub fn whitney_report(curve: &ImmersedCurve, events: &[TangencyEvent]) -> Result<WhitneyReport, CurveError> {
    let g = gauss_degree(curve)?;
    let si = self_intersections(curve)?;
    let r = j_from_events(events);
    let diff = r.convex as i64 - r.c_plus as i64;
    let region_degree = (diff % 2 == 0).then_some(diff / 2);
    Ok(WhitneyReport {
        gauss_degree: g,
        mu: si.mu,
        n_plus: si.n_plus,
        n_minus: si.n_minus,
        whitney_holds: g == si.mu + si.n_plus as i64 - si.n_minus as i64,
        convex: r.convex,
        concave: r.c_plus,
        region_degree,
        region_holds: region_degree == Some(g),
    })
}

/// Shape of the inserted S: θ(s) folds back once, u(s) is a bump toward the region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnakeParams {
    pub length: f64,
    pub height: f64,
    pub samples: usize,
}

impl Default for SnakeParams {
    fn default() -> Self {
        SnakeParams { length: 0.4, height: 0.15, samples: 400 }
    }
}

const SNAKE_C: f64 = 1.6;

fn snake_theta(s: f64) -> f64 {
    let k = 1.0 - SNAKE_C / 2.0;
    (s * k + SNAKE_C * (TAU * s).sin() / (4.0 * PI)) / k
}

fn snake_bump(s: f64, s3: f64) -> f64 {
    if s <= s3 {
        (0.5 * PI * s / s3).sin().powi(2)
    } else {
        (0.5 * PI * (1.0 - s) / (1.0 - s3)).sin().powi(2)
    }
}

/// Replaces a fold-free arc starting at `vertex` by an S-shaped arc pushed toward
/// the side with checkerboard sign −1. Adds one concave ⊕ and one convex event.
pub fn snake(
    pattern: &CurvePattern,
    loop_index: usize,
    vertex: usize,
    params: SnakeParams,
) -> Result<CurvePattern, CurveError> {
    let bad = || CurveError::SnakeSite(loop_index, vertex, params.length);
    let curve = pattern.loops.get(loop_index).ok_or_else(bad)?;
    let n = curve.len();
    let start = curve.at(vertex);
    let first = curve.at(vertex + 1);
    let dir = if first[0] > start[0] { 1.0 } else { -1.0 };
    let mut run = vec![start];
    let mut k = vertex;
    loop {
        let next = curve.at(k + 1);
        let last = *run.last().unwrap();
        if (next[0] - last[0]) * dir <= 0.0 || k + 1 >= vertex + n {
            return Err(bad());
        }
        run.push(next);
        k += 1;
        if (next[0] - start[0]) * dir >= params.length {
            break;
        }
    }
    let base = |theta: f64| -> f64 {
        for w in run.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (theta - a[0]) * (theta - b[0]) <= 0.0 {
                return a[1] + (theta - a[0]) / (b[0] - a[0]) * (b[1] - a[1]);
            }
        }
        run.last().unwrap()[1]
    };
    let theta_end = start[0] + dir * params.length;
    let theta_lo = start[0].min(theta_end);
    let mid = theta_lo + 0.5 * params.length;
    let eps = 1e-6;
    let up = checkerboard_sign(pattern, [mid, base(mid) + eps])?;
    let down = checkerboard_sign(pattern, [mid, base(mid) - eps])?;
    if up == down {
        return Err(bad());
    }
    let side = if up < 0 { 1.0 } else { -1.0 };
    let s1 = (1.0 / SNAKE_C.sqrt()).asin() / PI;
    let (s2, target) = (1.0 - s1, snake_theta(s1));
    let (mut lo, mut hi) = (s2, 1.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if snake_theta(m) < target {
            lo = m;
        } else {
            hi = m;
        }
    }
    let s3 = 0.5 * (lo + hi);
    let m = params.samples.max(16);
    let mut shape: Vec<[f64; 2]> = (0..=m)
        .map(|i| {
            let s = i as f64 / m as f64;
            let t = theta_lo + params.length * snake_theta(s);
            [t, base(t) + side * params.height * snake_bump(s, s3)]
        })
        .collect();
    if dir < 0.0 {
        shape.reverse();
    }
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(n + m);
    pts.push(start);
    pts.extend_from_slice(&shape[1..m]);
    pts.push([theta_end, base(theta_end)]);
    for j in k..vertex + n {
        let p = curve.at(j);
        if j > k || (p[0] - theta_end) * dir > 0.0 {
            pts.push(p);
        }
    }
    let winding = curve.winding;
    let mut loops = pattern.loops.clone();
    loops[loop_index] = ImmersedCurve { points: pts, winding };
    Ok(CurvePattern { ambient: pattern.ambient, loops })
}

/// Random trigonometric plane loop with harmonics up to `harmonics`, retried
/// until the certificate passes.
pub fn random_loop(seed: u64, harmonics: usize, samples: usize) -> Result<ImmersedCurve, CurveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let coeffs: Vec<[f64; 4]> = (1..=harmonics)
            .map(|k| {
                let s = 1.0 / k as f64;
                [rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s)]
            })
            .collect();
        let phase: f64 = rng.gen_range(0.0..1.0);
        let pts: Vec<[f64; 2]> = (0..samples)
            .map(|i| {
                let t = TAU * (i as f64 + phase) / samples as f64;
                let mut p = [0.0, 0.0];
                for (k, c) in coeffs.iter().enumerate() {
                    let kt = (k + 1) as f64 * t;
                    p[0] += c[0] * kt.cos() + c[1] * kt.sin();
                    p[1] += c[2] * kt.cos() + c[3] * kt.sin();
                }
                p
            })
            .collect();
        let c = ImmersedCurve::plane(pts);
        if certify(&CurvePattern::single(c.clone())).is_ok() && gauss_degree(&c).is_ok() {
            return Ok(c);
        }
    }
    Err(CurveError::NoGenericLoop(100))
}

/// Uniform sampling of a parametrized loop on t ∈ [0, 2π) with a phase offset.
pub fn sample_loop(samples: usize, phase: f64, f: impl Fn(f64) -> [f64; 2]) -> ImmersedCurve {
    ImmersedCurve::plane((0..samples).map(|i| f(TAU * (i as f64 + phase) / samples as f64)).collect())
}

/// Shipped shapes.
pub mod shapes {
    use super::*;

    /// Counterclockwise circle.
    pub fn circle(center: [f64; 2], r: f64, samples: usize) -> ImmersedCurve {
        sample_loop(samples, 0.37, |t| [center[0] + r * t.cos(), center[1] + r * t.sin()])
    }

    pub fn figure_eight(samples: usize) -> ImmersedCurve {
        sample_loop(samples, 0.29, |t| [(2.0 * t).sin(), t.sin()])
    }

    /// Disk with a notch cut from the +θ side: one concave ⊕ and three convex tips.
    pub fn notched_disk(samples: usize) -> ImmersedCurve {
        sample_loop(samples, 0.41, |t| {
            let phi = t.sin().atan2(t.cos());
            let r = 1.0 - 0.8 * (-(phi / 0.35).powi(2)).exp();
            [r * t.cos(), r * t.sin()]
        })
    }

    pub fn disk(samples: usize) -> CurvePattern {
        CurvePattern::single(circle([0.0, 0.0], 1.0, samples))
    }

    /// Outer circle plus a clockwise inner circle.
    pub fn annular_region(samples: usize) -> CurvePattern {
        CurvePattern::new(
            Ambient::Plane,
            vec![circle([0.0, 0.0], 1.0, samples), circle([0.0, 0.0], 0.45, samples).reversed()],
        )
    }

    /// Disk with two holes side by side.
    pub fn pair_of_pants(samples: usize) -> CurvePattern {
        CurvePattern::new(
            Ambient::Plane,
            vec![
                circle([0.0, 0.0], 1.0, samples),
                circle([-0.45, 0.1], 0.3, samples).reversed(),
                circle([0.45, -0.1], 0.3, samples).reversed(),
            ],
        )
    }

    /// Boundary of an immersed once-punctured torus: the core circles of two
    /// overlapping bands, each thickened, traced as a single loop.
    pub fn punctured_torus_boundary(per_arc: usize) -> ImmersedCurve {
        let (ra, rb, eps, rho) = (1.0, 1.3, 0.12, 0.3);
        let arc_a = |r: f64| -> Vec<[f64; 2]> {
            let d = (rho / r).asin();
            let (a0, a1) = (-PI / 2.0 + d, 3.0 * PI / 2.0 - d);
            (0..=per_arc)
                .map(|i| {
                    let a = a0 + (a1 - a0) * i as f64 / per_arc as f64;
                    [r * a.cos(), ra + r * a.sin()]
                })
                .collect()
        };
        let arc_b = |r: f64| -> Vec<[f64; 2]> {
            let d = (rho / r).asin();
            let (a0, a1) = (PI - d, -PI + d);
            (0..=per_arc)
                .map(|i| {
                    let a = a0 + (a1 - a0) * i as f64 / per_arc as f64;
                    [rb + r * a.cos(), r * a.sin()]
                })
                .collect()
        };
        let mut p = arc_a(ra - eps);
        p.extend(arc_b(rb + eps));
        p.extend(arc_a(ra + eps).into_iter().rev());
        p.extend(arc_b(rb - eps).into_iter().rev());
        let mut q: Vec<[f64; 2]> = Vec::with_capacity(p.len());
        for x in p {
            if q.last().is_none_or(|&l| norm(sub(x, l)) > 1e-12) {
                q.push(x);
            }
        }
        if norm(sub(q[0], *q.last().unwrap())) <= 1e-12 {
            q.pop();
        }
        ImmersedCurve::plane(q).reversed()
    }
}

/// SVG of a pattern in an 800×400 viewport, θ horizontal and u vertical.
/// Concave events are filled discs, convex events rings; red marks ⊕, blue ⊖.
pub fn render_svg(pattern: &CurvePattern, events: &[TangencyEvent]) -> String {
    let (w, h, pad) = (800.0, 400.0, 20.0);
    let mut ys: Vec<f64> = pattern.loops.iter().flat_map(|c| c.points.iter().map(|p| p[1])).collect();
    ys.extend(events.iter().map(|e| e.u));
    let (mut ymin, mut ymax) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let (xmin, xmax) = match pattern.ambient {
        Ambient::Annulus => (0.0, TAU),
        Ambient::Plane => pattern
            .loops
            .iter()
            .flat_map(|c| c.points.iter().map(|p| p[0]))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x))),
    };
    if !ymin.is_finite() {
        ymin = -1.0;
        ymax = 1.0;
    }
    let (xmin, xmax) = if xmin.is_finite() { (xmin, xmax) } else { (-1.0, 1.0) };
    let sx = (w - 2.0 * pad) / (xmax - xmin).max(1e-9);
    let sy = (h - 2.0 * pad) / (ymax - ymin).max(1e-9);
    let map = |p: [f64; 2]| -> (f64, f64) { (pad + (p[0] - xmin) * sx, h - pad - (p[1] - ymin) * sy) };
    let mut svg = Svg::new(w, h);
    if pattern.ambient == Ambient::Annulus {
        svg.line(pad, pad, pad, h - pad, "#bbbbbb", 1.0);
        svg.line(w - pad, pad, w - pad, h - pad, "#bbbbbb", 1.0);
    }
    for c in &pattern.loops {
        let mut run: Vec<(f64, f64)> = Vec::new();
        for i in 0..=c.len() {
            let mut p = c.at(i);
            if pattern.ambient == Ambient::Annulus {
                let q = c.at(if i == 0 { 0 } else { i - 1 });
                let k = (q[0] / TAU).floor() * TAU;
                p[0] -= k;
                if i > 0 && !(0.0..TAU).contains(&p[0]) {
                    svg.polyline(&run, "black", 1.5);
                    run.clear();
                    p[0] = p[0].rem_euclid(TAU);
                }
            }
            run.push(map(p));
        }
        svg.polyline(&run, "black", 1.5);
    }
    for e in events {
        let t = match pattern.ambient {
            Ambient::Annulus => e.theta.rem_euclid(TAU),
            Ambient::Plane => e.theta,
        };
        let (x, y) = map([t, e.u]);
        let color = match e.polarity {
            Polarity::Plus => "#d62728",
            Polarity::Minus => "#1f77b4",
        };
        match e.kind {
            TangencyKind::Concave => svg.circle(x, y, 5.0, color),
            TangencyKind::Convex => {
                svg.circle(x, y, 5.0, color);
                svg.circle(x, y, 3.0, "white");
            }
        }
        svg.text(x, y - 8.0, &e.polarity.to_string(), 11.0);
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::shapes::*;
    use super::*;

    #[test]
    fn circle_basics() {
        let c = circle([0.0, 0.0], 1.0, 512);
        assert_eq!(gauss_degree(&c).unwrap(), 1);
        assert_eq!(gauss_degree(&c.reversed()).unwrap(), -1);
        assert_eq!(self_intersections(&c).unwrap(), SelfIntersections { n_plus: 0, n_minus: 0, mu: 1 });
        let p = CurvePattern::single(c);
        assert_eq!(checkerboard_sign(&p, [0.0, 0.0]).unwrap(), -1);
        assert_eq!(checkerboard_sign(&p, [3.0, 0.0]).unwrap(), 1);
        let ev = vertical_tangencies(&p).unwrap();
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|e| e.kind == TangencyKind::Convex));
        assert_eq!(j_from_events(&ev).j, 0);
    }

    #[test]
    fn figure_eight_whitney() {
        let c = figure_eight(512);
        let si = self_intersections(&c).unwrap();
        assert_eq!(si.n_plus + si.n_minus, 1);
        assert_eq!(gauss_degree(&c).unwrap(), 0);
        assert_eq!(si.mu + si.n_plus as i64 - si.n_minus as i64, 0);
        let p = CurvePattern::single(c);
        assert_eq!(checkerboard_sign(&p, [0.5, 0.7]).unwrap(), -1);
        assert_eq!(checkerboard_sign(&p, [-0.5, -0.7]).unwrap(), -1);
    }

    #[test]
    fn notched_disk_is_a_generator() {
        let p = CurvePattern::single(notched_disk(1024));
        let r = j_from_pattern(&p).unwrap();
        assert_eq!((r.j, r.c_plus, r.convex), (1, 1, 3));
        assert_eq!(j_from_pattern(&p.mirrored()).unwrap().j, -1);
    }

    #[test]
    fn annular_and_pants() {
        let r = j_from_pattern(&annular_region(512)).unwrap();
        assert_eq!((r.j, r.c_plus, r.convex), (0, 2, 2));
        let r = j_from_pattern(&pair_of_pants(512)).unwrap();
        assert_eq!((r.j, r.c_plus, r.convex), (0, 4, 2));
    }

    #[test]
    fn torus_boundary() {
        let c = punctured_torus_boundary(300);
        let ev = classify_tangencies_oriented(&CurvePattern::single(c.clone())).unwrap();
        let w = whitney_report(&c, &ev).unwrap();
        assert!(w.whitney_holds);
        assert_eq!(w.gauss_degree, -1);
        assert!(w.region_holds, "{w:?}");
        assert!(w.n_plus + w.n_minus >= 4);
    }

    #[test]
    fn snake_adds_generator() {
        let p = disk(512);
        let s = snake(&p, 0, 100, SnakeParams::default()).unwrap();
        let a = j_from_pattern(&p).unwrap();
        let b = j_from_pattern(&s).unwrap();
        assert_eq!(b.j, a.j + 1);
        assert_eq!(b.c_plus, a.c_plus + 1);
        assert_eq!(b.convex, a.convex + 1);
    }

    #[test]
    fn annulus_lift() {
        let pts: Vec<[f64; 2]> =
            (0..64).map(|i| [(TAU * i as f64 / 64.0 + 0.01).rem_euclid(TAU), 1.0 + 0.1 * (i as f64).sin()]).collect();
        let c = ImmersedCurve::annulus(pts);
        assert_eq!(c.winding(), 1);
        let p = CurvePattern::new(Ambient::Annulus, vec![c]);
        assert_eq!(p.fiber(2.0).len(), 1);
        assert_eq!(checkerboard_sign(&p, [1.0, 0.0]).unwrap(), -1);
        assert_eq!(checkerboard_sign(&p, [1.0, 3.0]).unwrap(), 1);
        let back = CurvePattern::from_json(&p.to_json()).unwrap();
        assert_eq!(back.to_json(), p.to_json());
    }
}
