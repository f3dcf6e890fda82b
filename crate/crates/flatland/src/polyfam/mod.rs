//! Loops of real monic polynomials of even degree with no real root of
//! multiplicity ≥ 3: root tracking, tangency events of the zero set, the J
//! invariant and the cell structure of the stratified polynomial space.

pub mod cells;
pub mod exact;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{Ambient, CurvePattern, ImmersedCurve, Polarity, TangencyKind};

/// Bisection tolerance on θ for event refinement.
pub const EVENT_TOL: f64 = 1e-9;
/// Default number of uniform θ samples.
pub const DEFAULT_RESOLUTION: usize = 1024;
/// Scaled |p| + |p′| at a root of p″ below which a triple root is declared.
pub const TRIPLE_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("root of multiplicity {multiplicity} at u = {u:.6}{}", theta.map(|t| format!(" for theta = {t:.6}")).unwrap_or_default())]
    Forbidden { theta: Option<f64>, u: f64, multiplicity: u8 },
    #[error("pattern {pattern} is invalid in degree {degree}")]
    InvalidPattern { pattern: String, degree: usize },
    #[error("degree must be even and at least 2, got {0}")]
    BadDegree(usize),
    #[error("expected {expected} coefficient series, got {found}")]
    CoefficientCount { expected: usize, found: usize },
    #[error("non-generic event near theta = {theta:.6}: {reason}")]
    Genericity { theta: f64, reason: String },
    #[error("event census J = {census} disagrees with strata crossing J = {strata}")]
    Inconsistent { census: i64, strata: i64 },
    #[error("root branches within {gap:e} of each other at theta = {theta:.6}; increase the resolution")]
    Ambiguous { theta: f64, gap: f64 },
    #[error("malformed loop JSON: {0}")]
    Json(String),
    #[error("unsupported format {0}")]
    Format(u32),
}

/// Composition of root multiplicities in increasing root order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RootPattern(pub Vec<u8>);

impl RootPattern {
    /// |ω|.
    pub fn norm(&self) -> usize {
        self.0.iter().map(|&m| m as usize).sum()
    }

    /// |ω|′ = |ω| − s.
    pub fn reduced_norm(&self) -> usize {
        self.norm() - self.0.len()
    }
}

impl fmt::Display for RootPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        f.write_str("(")?;
        for m in &self.0 {
            write!(f, "{m}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for RootPattern {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, PolyError> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        t.chars()
            .map(|c| c.to_digit(10).filter(|&d| d > 0).map(|d| d as u8))
            .collect::<Option<Vec<u8>>>()
            .map(RootPattern)
            .ok_or_else(|| PolyError::InvalidPattern { pattern: s.to_string(), degree: 0 })
    }
}

impl Serialize for RootPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.iter().map(|m| m.to_string()).collect::<String>())
    }
}

impl<'de> Deserialize<'de> for RootPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Truncated Fourier series Σ cos[k]·cos kθ + sin[k]·sin kθ.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Fourier {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl Fourier {
    pub fn constant(c: f64) -> Self {
        Fourier { cos: vec![c], sin: Vec::new() }
    }

    pub fn harmonic(&self) -> usize {
        self.cos.len().max(self.sin.len()).saturating_sub(1)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, c) in self.cos.iter().enumerate() {
            v += c * (k as f64 * theta).cos();
        }
        for (k, s) in self.sin.iter().enumerate() {
            v += s * (k as f64 * theta).sin();
        }
        v
    }

    pub fn deriv(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, c) in self.cos.iter().enumerate() {
            v -= c * k as f64 * (k as f64 * theta).sin();
        }
        for (k, s) in self.sin.iter().enumerate() {
            v += s * k as f64 * (k as f64 * theta).cos();
        }
        v
    }

    fn get(v: &[f64], k: usize) -> f64 {
        v.get(k).copied().unwrap_or(0.0)
    }

    pub fn add(&self, o: &Fourier) -> Fourier {
        let n = self.harmonic().max(o.harmonic()) + 1;
        Fourier {
            cos: (0..n).map(|k| Self::get(&self.cos, k) + Self::get(&o.cos, k)).collect(),
            sin: (0..n).map(|k| Self::get(&self.sin, k) + Self::get(&o.sin, k)).collect(),
        }
        .trimmed()
    }

    pub fn mul(&self, o: &Fourier) -> Fourier {
        let (n, m) = (self.harmonic() + 1, o.harmonic() + 1);
        let mut cos = vec![0.0; n + m];
        let mut sin = vec![0.0; n + m];
        for i in 0..n {
            let (ai, bi) = (Self::get(&self.cos, i), Self::get(&self.sin, i));
            for j in 0..m {
                let (aj, bj) = (Self::get(&o.cos, j), Self::get(&o.sin, j));
                let (s, d) = (i + j, i.abs_diff(j));
                // cos·cos, sin·sin, sin·cos and cos·sin product rules.
                cos[s] += 0.5 * (ai * aj - bi * bj);
                cos[d] += 0.5 * (ai * aj + bi * bj);
                sin[s] += 0.5 * (bi * aj + ai * bj);
                let sd = if i >= j { 1.0 } else { -1.0 };
                sin[d] += 0.5 * sd * (bi * aj - ai * bj);
            }
        }
        sin[0] = 0.0;
        Fourier { cos, sin }.trimmed()
    }

    fn trimmed(mut self) -> Fourier {
        while self.cos.last() == Some(&0.0) {
            self.cos.pop();
        }
        while self.sin.last() == Some(&0.0) {
            self.sin.pop();
        }
        self
    }

    /// θ ↦ −θ.
    pub fn reversed(&self) -> Fourier {
        Fourier { cos: self.cos.clone(), sin: self.sin.iter().map(|s| -s).collect() }
    }

    /// θ ↦ kθ.
    pub fn scaled(&self, k: usize) -> Fourier {
        let spread = |v: &[f64]| {
            let mut out = vec![0.0; (v.len().max(1) - 1) * k + 1];
            for (i, &x) in v.iter().enumerate() {
                out[i * k] = x;
            }
            if v.is_empty() {
                out.clear();
            }
            out
        };
        Fourier { cos: spread(&self.cos), sin: spread(&self.sin) }
    }
}

/// β(θ)(u) = u^d + Σ_{j<d} c_j(θ) u^j.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyLoop {
    pub degree: usize,
    pub coeffs: Vec<Fourier>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopDoc {
    #[serde(default = "one")]
    format: u32,
    degree: usize,
    coeffs: Vec<Fourier>,
}

fn one() -> u32 {
    1
}

impl PolyLoop {
    pub fn new(degree: usize, coeffs: Vec<Fourier>) -> Result<Self, PolyError> {
        if degree < 2 || !degree.is_multiple_of(2) {
            return Err(PolyError::BadDegree(degree));
        }
        if coeffs.len() != degree {
            return Err(PolyError::CoefficientCount { expected: degree, found: coeffs.len() });
        }
        Ok(PolyLoop { degree, coeffs })
    }

    /// Constant-in-θ loop from ascending coefficients of a monic polynomial (leading 1 omitted).
    pub fn constant(lower: &[f64]) -> Result<Self, PolyError> {
        Self::new(lower.len(), lower.iter().map(|&c| Fourier::constant(c)).collect())
    }

    pub fn from_json(s: &str) -> Result<Self, PolyError> {
        let d: LoopDoc = serde_json::from_str(s).map_err(|e| PolyError::Json(e.to_string()))?;
        if d.format != 1 {
            return Err(PolyError::Format(d.format));
        }
        Self::new(d.degree, d.coeffs)
    }

    pub fn to_json(&self) -> String {
        let d = LoopDoc { format: 1, degree: self.degree, coeffs: self.coeffs.clone() };
        serde_json::to_string(&d).expect("loops serialize") + "\n"
    }

    pub fn harmonic(&self) -> usize {
        self.coeffs.iter().map(Fourier::harmonic).max().unwrap_or(0)
    }

    /// Ascending coefficients including the leading 1.
    pub fn at(&self, theta: f64) -> Vec<f64> {
        let mut c: Vec<f64> = self.coeffs.iter().map(|f| f.eval(theta)).collect();
        c.push(1.0);
        c
    }

    fn dtheta(&self, theta: f64) -> Vec<f64> {
        let mut c: Vec<f64> = self.coeffs.iter().map(|f| f.deriv(theta)).collect();
        c.push(0.0);
        c
    }

    pub fn value(&self, theta: f64, u: f64) -> f64 {
        horner(&self.at(theta), u)
    }

    /// Pointwise product of two loops.
    pub fn mul(&self, o: &PolyLoop) -> PolyLoop {
        let full = |l: &PolyLoop| {
            let mut v = l.coeffs.clone();
            v.push(Fourier::constant(1.0));
            v
        };
        let (a, b) = (full(self), full(o));
        let mut c = vec![Fourier::default(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] = c[i + j].add(&x.mul(y));
            }
        }
        c.pop();
        PolyLoop { degree: self.degree + o.degree, coeffs: c }
    }

    /// Same family traversed backwards.
    pub fn reversed(&self) -> PolyLoop {
        PolyLoop { degree: self.degree, coeffs: self.coeffs.iter().map(Fourier::reversed).collect() }
    }

    /// The loop traversed `k` times.
    pub fn power(&self, k: usize) -> PolyLoop {
        PolyLoop { degree: self.degree, coeffs: self.coeffs.iter().map(|f| f.scaled(k)).collect() }
    }

    /// Adds ε·U(−1, 1) to every Fourier coefficient up to the loop's harmonic (at least 1).
    pub fn perturbed(&self, eps: f64, rng: &mut impl Rng) -> PolyLoop {
        let h = self.harmonic().max(1);
        let coeffs = self
            .coeffs
            .iter()
            .map(|f| {
                let cos = (0..=h).map(|k| Fourier::get(&f.cos, k) + eps * rng.gen_range(-1.0..1.0)).collect();
                let sin = (0..=h)
                    .map(|k| if k == 0 { 0.0 } else { Fourier::get(&f.sin, k) + eps * rng.gen_range(-1.0..1.0) })
                    .collect();
                Fourier { cos, sin }
            })
            .collect();
        PolyLoop { degree: self.degree, coeffs }
    }
}

/// Shipped loops.
pub mod loops {
    use super::*;

    /// (u − 2)(u³ + cos θ·u + sin θ).
    pub fn quartic_generator() -> PolyLoop {
        let f = |c0: f64, c1: f64, s1: f64| Fourier { cos: vec![c0, c1], sin: vec![0.0, s1] };
        PolyLoop::new(4, vec![f(0.0, 0.0, -2.0), f(0.0, -2.0, 1.0), f(0.0, 1.0, 0.0), f(-2.0, 0.0, 0.0)]).unwrap()
    }

    /// (u − 2)(u³ + (cos θ − 1)·u + sin θ): a triple root at θ = 0.
    pub fn through_triple_root() -> PolyLoop {
        let f = |c0: f64, c1: f64, s1: f64| Fourier { cos: vec![c0, c1], sin: vec![0.0, s1] };
        PolyLoop::new(4, vec![f(0.0, 0.0, -2.0), f(2.0, -2.0, 1.0), f(-1.0, 1.0, 0.0), f(-2.0, 0.0, 0.0)]).unwrap()
    }

    pub fn rootless() -> PolyLoop {
        PolyLoop::constant(&[1.0, 0.0]).unwrap()
    }

    /// u² − 1: two horizontal circles.
    pub fn two_circles() -> PolyLoop {
        PolyLoop::constant(&[-1.0, 0.0]).unwrap()
    }

    /// The generator times u² + 1.
    pub fn sextic_generator() -> PolyLoop {
        quartic_generator().mul(&rootless())
    }

    /// The generator times (u + 3)² + 1/4, then traversed twice.
    pub fn sextic_double() -> PolyLoop {
        quartic_generator().mul(&PolyLoop::constant(&[9.25, 6.0]).unwrap()).power(2)
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect()
}

/// Real roots of a polynomial (ascending coefficients, nonzero leading term),
/// bracketed between consecutive critical points and bisected.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let mut c = c.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![-c[0] / c[1]];
    }
    let lead = c[n].abs();
    let bound = 1.0 + c[..n].iter().map(|a| a.abs() / lead).fold(0.0, f64::max);
    let mut pts = vec![-bound];
    pts.extend(real_roots(&derivative(&c)).into_iter().filter(|x| x.abs() < bound));
    pts.push(bound);
    let mut out: Vec<f64> = Vec::new();
    for w in pts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (horner(&c, a), horner(&c, b));
        if fa == 0.0 {
            if out.last() != Some(&a) {
                out.push(a);
            }
            continue;
        }
        if fb == 0.0 || (fa < 0.0) == (fb < 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = horner(&c, m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    if horner(&c, bound) == 0.0 {
        out.push(bound);
    }
    out
}

/// Sign of the discriminant of a monic polynomial, from the Sylvester
/// determinant of p and p′ by pivoted elimination.
pub fn discriminant_sign(c: &[f64]) -> i8 {
    let n = c.len() - 1;
    let dc = derivative(c);
    let m = 2 * n - 1;
    let mut a = vec![vec![0.0f64; m]; m];
    for r in 0..n - 1 {
        for (k, &x) in c.iter().rev().enumerate() {
            a[r][r + k] = x;
        }
    }
    for r in 0..n {
        for (k, &x) in dc.iter().rev().enumerate() {
            a[n - 1 + r][r + k] = x;
        }
    }
    let mut sign = 1i8;
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0;
        }
        if piv != col {
            a.swap(piv, col);
            sign = -sign;
        }
        if a[col][col] < 0.0 {
            sign = -sign;
        }
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..m {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    if (n * (n - 1) / 2) % 2 == 1 {
        sign = -sign;
    }
    sign
}

/// Scaled distance to the triple-root locus: min over real roots r of p″ of |p(r)| + |p′(r)|.
pub fn triple_measure(c: &[f64]) -> f64 {
    let scale = 1.0 + c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let d1 = derivative(c);
    let d2 = derivative(&d1);
    real_roots(&d2)
        .into_iter()
        .map(|r| (horner(c, r).abs() + horner(&d1, r).abs()) / scale)
        .fold(f64::INFINITY, f64::min)
}

/// A double root of β(θ*) where two real roots are born or die.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopEvent {
    pub theta: f64,
    pub u: f64,
    pub pattern: RootPattern,
    pub kind: TangencyKind,
    pub polarity: Polarity,
    /// True when the pair exists for θ slightly above θ*.
    pub birth: bool,
    /// Number of simple real roots below u*.
    pub position: usize,
}

/// Output of [`track_loop`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tracking {
    pub events: Vec<LoopEvent>,
    /// Largest real fiber cardinality seen.
    pub strand_bound: usize,
    /// Root counts agreed with the Sylvester sign at every sample.
    pub discriminant_check: bool,
    /// Polynomial sign next to the double root matched (−1)^(simple roots above) at every event.
    pub kind_rule_check: bool,
}

fn sample(resolution: usize, k: usize) -> f64 {
    TAU * (k as f64 + 0.5) / resolution as f64
}

fn check_triple(l: &PolyLoop, resolution: usize) -> Result<(), PolyError> {
    let m: Vec<f64> = (0..=resolution).map(|k| triple_measure(&l.at(TAU * k as f64 / resolution as f64))).collect();
    for k in 0..resolution {
        let t = TAU * k as f64 / resolution as f64;
        let left = if k == 0 { m[resolution - 1] } else { m[k - 1] };
        if m[k] > left || m[k] > m[k + 1] {
            continue;
        }
        // Golden-section refinement of a local minimum.
        let h = TAU / resolution as f64;
        let (mut a, mut b) = (t - h, t + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let x1 = b - g * (b - a);
            let x2 = a + g * (b - a);
            if triple_measure(&l.at(x1)) < triple_measure(&l.at(x2)) {
                b = x2;
            } else {
                a = x1;
            }
        }
        let tm = 0.5 * (a + b);
        if triple_measure(&l.at(tm)) < TRIPLE_TOL {
            let c = l.at(tm);
            let d2 = derivative(&derivative(&c));
            let u = real_roots(&d2)
                .into_iter()
                .min_by(|x, y| horner(&c, *x).abs().total_cmp(&horner(&c, *y).abs()))
                .unwrap_or(0.0);
            return Err(PolyError::Forbidden { theta: Some(tm.rem_euclid(TAU)), u, multiplicity: 3 });
        }
    }
    Ok(())
}

/// Locates every birth or death of a pair of real roots.
pub fn track_loop(l: &PolyLoop, resolution: usize) -> Result<Tracking, PolyError> {
    check_triple(l, resolution)?;
    let n = resolution;
    let counts: Vec<usize> = (0..n).map(|k| real_roots(&l.at(sample(n, k))).len()).collect();
    let mut disc_ok = true;
    for k in 0..n {
        let c = l.at(sample(n, k));
        let expect = if ((l.degree - counts[k]) / 2).is_multiple_of(2) { 1 } else { -1 };
        let s = discriminant_sign(&c);
        if s != 0 && s != expect {
            disc_ok = false;
        }
    }
    let mut events = Vec::new();
    let mut kind_ok = true;
    for k in 0..n {
        let (a, b) = (sample(n, k), sample(n, k) + TAU / n as f64);
        let (ca, cb) = (counts[k], counts[(k + 1) % n]);
        if ca == cb {
            continue;
        }
        if ca.abs_diff(cb) != 2 {
            return Err(PolyError::Genericity {
                theta: a,
                reason: format!("root count jumps from {ca} to {cb}; increase the resolution"),
            });
        }
        let (mut lo, mut hi) = (a, b);
        while hi - lo > EVENT_TOL {
            let m = 0.5 * (lo + hi);
            if real_roots(&l.at(m)).len() == ca {
                lo = m;
            } else {
                hi = m;
            }
        }
        let theta = 0.5 * (lo + hi);
        let (ev, consistent) = classify_event(l, theta, ca < cb)?;
        kind_ok &= consistent;
        events.push(ev);
    }
    events.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    Ok(Tracking {
        events,
        strand_bound: counts.iter().copied().max().unwrap_or(0),
        discriminant_check: disc_ok,
        kind_rule_check: kind_ok,
    })
}

fn classify_event(l: &PolyLoop, theta: f64, birth: bool) -> Result<(LoopEvent, bool), PolyError> {
    let c = l.at(theta);
    let h = 1e-6;
    let small = real_roots(&l.at(if birth { theta - h } else { theta + h }));
    let big = real_roots(&l.at(if birth { theta + h } else { theta - h }));
    if big.len() != small.len() + 2 {
        return Err(PolyError::Genericity { theta, reason: "pair not isolated near the event".into() });
    }
    // The double root is the critical point where |β| nearly vanishes.
    let u = real_roots(&derivative(&c))
        .into_iter()
        .min_by(|x, y| horner(&c, *x).abs().total_cmp(&horner(&c, *y).abs()))
        .ok_or_else(|| PolyError::Genericity { theta, reason: "no critical point at the double root".into() })?;
    let d2 = horner(&derivative(&derivative(&c)), u);
    if d2.abs() < 1e-6 {
        return Err(PolyError::Forbidden { theta: Some(theta.rem_euclid(TAU)), u, multiplicity: 3 });
    }
    let bt = horner(&l.dtheta(theta), u);
    if bt.abs() < 1e-9 {
        return Err(PolyError::Genericity { theta, reason: "discriminant is not crossed transversally".into() });
    }
    let position = small.iter().filter(|&&r| r < u).count();
    let above = small.len() - position;
    let mut pat: Vec<u8> = vec![1; small.len()];
    pat.insert(position, 2);
    let pattern = RootPattern(pat);
    // Kind from the sign of β beside the double root; polarity from ∂θβ.
    let delta = 1e-3 * (1.0 + u.abs());
    let side = |x: f64| horner(&c, x);
    let gap_lo = small.get(position.wrapping_sub(1)).copied().unwrap_or(f64::NEG_INFINITY);
    let gap_hi = small.get(position).copied().unwrap_or(f64::INFINITY);
    let dl = delta.min(0.5 * (u - gap_lo));
    let dh = delta.min(0.5 * (gap_hi - u));
    let (sl, sh) = (side(u - dl), side(u + dh));
    let concave = sl < 0.0 && sh < 0.0;
    let rule = if above % 2 == 1 { -1.0 } else { 1.0 };
    let consistent = (sl.signum() == rule) && (sh.signum() == rule);
    let kind = if concave { TangencyKind::Concave } else { TangencyKind::Convex };
    let polarity = Polarity::from_inner_normal(if bt > 0.0 { -1 } else { 1 });
    Ok((LoopEvent { theta: theta.rem_euclid(TAU), u, pattern, kind, polarity, birth, position }, consistent))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopJ {
    /// ⊕ minus ⊖ over concave events.
    pub census: i64,
    /// Signed crossings of the walls listed by [`cells::j_strata`].
    pub strata: i64,
    pub concave: u32,
    pub convex: u32,
}

impl LoopJ {
    pub fn value(&self) -> i64 {
        self.census
    }
}

pub fn j_of_events(events: &[LoopEvent]) -> Result<LoopJ, PolyError> {
    let mut census = 0;
    let mut strata = 0;
    let (mut concave, mut convex) = (0, 0);
    for e in events {
        match e.kind {
            TangencyKind::Concave => {
                concave += 1;
                census += if e.polarity == Polarity::Plus { 1 } else { -1 };
            }
            TangencyKind::Convex => convex += 1,
        }
        if cells::is_j_stratum(&e.pattern) {
            strata += if e.birth { 1 } else { -1 };
        }
    }
    if census != strata {
        return Err(PolyError::Inconsistent { census, strata });
    }
    Ok(LoopJ { census, strata, concave, convex })
}

/// J computed by event census and by strata crossings, which must agree.
pub fn j_invariant(l: &PolyLoop) -> Result<LoopJ, PolyError> {
    j_of_events(&track_loop(l, DEFAULT_RESOLUTION)?.events)
}

/// The zero set {β(θ)(u) = 0} as loops in the annulus. Branches follow root
/// order between samples; at events the colliding pair is closed off by a fold tip.
pub fn delta_curves(l: &PolyLoop, resolution: usize) -> Result<CurvePattern, PolyError> {
    let tracking = track_loop(l, resolution)?;
    let spacing = TAU / resolution as f64;
    let mut thetas: Vec<f64> = (0..resolution).map(|k| sample(resolution, k)).collect();
    for e in &tracking.events {
        let mut h = 1e-6;
        while h < 0.5 * spacing {
            thetas.push(e.theta + h);
            thetas.push(e.theta - h);
            h *= 1.6;
        }
    }
    let mut thetas: Vec<f64> = thetas.into_iter().map(|t| t.rem_euclid(TAU)).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let m = thetas.len();
    let roots: Vec<Vec<f64>> = thetas.iter().map(|&t| real_roots(&l.at(t))).collect();
    for (k, r) in roots.iter().enumerate() {
        for w in r.windows(2) {
            if w[1] - w[0] < 1e-9 {
                return Err(PolyError::Ambiguous { theta: thetas[k], gap: w[1] - w[0] });
            }
        }
    }
    // Node ids: samples (k, j), then one tip per event.
    let mut base = vec![0usize; m + 1];
    for k in 0..m {
        base[k + 1] = base[k] + roots[k].len();
    }
    let tips = base[m];
    let mut pos: Vec<[f64; 2]> = Vec::with_capacity(tips + tracking.events.len());
    for k in 0..m {
        for &u in &roots[k] {
            pos.push([thetas[k], u]);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); tips + tracking.events.len()];
    let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
        adj[a].push(b);
        adj[b].push(a);
    };
    let mut used = vec![false; tracking.events.len()];
    for k in 0..m {
        let k2 = (k + 1) % m;
        let (t0, mut t1) = (thetas[k], thetas[k2]);
        if k2 == 0 {
            t1 += TAU;
        }
        let (ra, rb) = (&roots[k], &roots[k2]);
        let ev = tracking.events.iter().enumerate().find(|(i, e)| {
            !used[*i] && {
                let t = if e.theta < t0 { e.theta + TAU } else { e.theta };
                t > t0 && t < t1
            }
        });
        match ev {
            None => {
                if ra.len() != rb.len() {
                    return Err(PolyError::Ambiguous { theta: t0, gap: t1 - t0 });
                }
                for j in 0..ra.len() {
                    link(base[k] + j, base[k2] + j, &mut adj);
                }
            }
            Some((i, e)) => {
                used[i] = true;
                let tip = tips + i;
                let (few, many, kf, km) = if ra.len() < rb.len() { (ra, rb, k, k2) } else { (rb, ra, k2, k) };
                if many.len() != few.len() + 2 {
                    return Err(PolyError::Ambiguous { theta: t0, gap: t1 - t0 });
                }
                let p = e.position;
                for j in 0..few.len() {
                    let jj = if j < p { j } else { j + 2 };
                    link(base[kf] + j, base[km] + jj, &mut adj);
                }
                link(tip, base[km] + p, &mut adj);
                link(tip, base[km] + p + 1, &mut adj);
            }
        }
    }
    for e in &tracking.events {
        pos.push([e.theta, e.u]);
    }
    let lift_theta = |node: usize| pos[node][0];
    let mut seen = vec![false; adj.len()];
    let mut loops = Vec::new();
    for start in 0..adj.len() {
        if seen[start] {
            continue;
        }
        if adj[start].len() != 2 {
            return Err(PolyError::Ambiguous { theta: lift_theta(start), gap: 0.0 });
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let (mut prev, mut cur) = (start, adj[start][0]);
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        loops.push(ImmersedCurve::annulus(cycle.iter().map(|&v| pos[v]).collect()));
    }
    Ok(CurvePattern::new(Ambient::Annulus, loops))
}

/// Seeded perturbations of `l` that stay generic, with the J of each.
pub fn perturbation_trials(l: &PolyLoop, eps: f64, trials: usize, seed: u64) -> Vec<Result<LoopJ, PolyError>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| j_invariant(&l.perturbed(eps, &mut rng))).collect()
}

#[cfg(test)]
mod tests {
    use super::loops::*;
    use super::*;
    use crate::curves::j_from_pattern;

    #[test]
    fn roots_of_simple_polys() {
        let r = real_roots(&[-6.0, 11.0, -6.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
    }

    #[test]
    fn discriminant_sign_matches_root_count() {
        assert_eq!(discriminant_sign(&[-1.0, 0.0, 1.0]), 1);
        assert_eq!(discriminant_sign(&[1.0, 0.0, 1.0]), -1);
        assert_eq!(discriminant_sign(&[24.0, -50.0, 35.0, -10.0, 1.0]), 1);
        assert_eq!(discriminant_sign(&[-2.0, 0.0, -1.0, 0.0, 1.0]), -1);
    }

    #[test]
    fn generator_events() {
        let t = track_loop(&quartic_generator(), DEFAULT_RESOLUTION).unwrap();
        assert_eq!(t.events.len(), 2);
        assert!(t.discriminant_check && t.kind_rule_check);
        assert!(t.strand_bound <= 4);
        let j = j_of_events(&t.events).unwrap();
        assert_eq!((j.census, j.strata), (1, 1));
        assert_eq!(j_invariant(&quartic_generator().reversed()).unwrap().census, -1);
        assert_eq!(j_invariant(&quartic_generator().power(2)).unwrap().census, 2);
    }

    #[test]
    fn generator_delta_pattern() {
        let p = delta_curves(&quartic_generator(), DEFAULT_RESOLUTION).unwrap();
        assert_eq!(j_from_pattern(&p).unwrap().j, 1);
    }

    #[test]
    fn trivial_loops() {
        assert!(track_loop(&rootless(), 64).unwrap().events.is_empty());
        let p = delta_curves(&two_circles(), 256).unwrap();
        assert_eq!(p.loops.len(), 2);
        assert!(p.loops.iter().all(|c| c.winding().abs() == 1));
    }

    #[test]
    fn triple_root_rejected() {
        assert!(matches!(track_loop(&through_triple_root(), 256), Err(PolyError::Forbidden { .. })));
    }

    #[test]
    fn sextic_same_events() {
        let a = track_loop(&quartic_generator(), DEFAULT_RESOLUTION).unwrap();
        let b = track_loop(&sextic_generator(), DEFAULT_RESOLUTION).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            assert!((x.theta - y.theta).abs() < 1e-7);
            assert_eq!((x.kind, x.polarity, &x.pattern), (y.kind, y.polarity, &y.pattern));
        }
    }

    #[test]
    fn fourier_product() {
        let a = Fourier { cos: vec![1.0, 2.0], sin: vec![0.0, 3.0] };
        let b = Fourier { cos: vec![0.5, -1.0, 0.25], sin: vec![0.0, 0.0, 2.0] };
        let c = a.mul(&b);
        for t in [0.0, 0.3, 1.7, 4.0] {
            assert!((c.eval(t) - a.eval(t) * b.eval(t)).abs() < 1e-12);
        }
    }
}
