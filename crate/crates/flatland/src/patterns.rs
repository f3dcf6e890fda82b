//! Annulus curve patterns as cyclic event words, the seven-step rewriting that
//! reduces a word to a multiple of the generator, and the group operation.
//!
//! Strands in a fiber are numbered from the bottom. Gap j lies below strand j,
//! so gap 0 is the outer region; gaps of odd index form the region A⁻.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{certify, Ambient, CurveError, CurvePattern, Polarity, TangencyKind};
use crate::svg::Svg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordEvent {
    /// Strands `pos` and `pos + 1` swap.
    Crossing { pos: usize },
    /// A pair of strands at positions `pos`, `pos + 1` is born or dies.
    Fold { pos: usize, birth: bool },
}

impl WordEvent {
    pub fn birth(pos: usize) -> Self {
        WordEvent::Fold { pos, birth: true }
    }

    pub fn death(pos: usize) -> Self {
        WordEvent::Fold { pos, birth: false }
    }

    /// An odd position puts A⁺ between the pair, so the region sees a concave tip.
    pub fn kind(&self) -> Option<TangencyKind> {
        match *self {
            WordEvent::Fold { pos, .. } => {
                Some(if pos % 2 == 1 { TangencyKind::Concave } else { TangencyKind::Convex })
            }
            WordEvent::Crossing { .. } => None,
        }
    }

    /// Concave tips are ⊕ at births, convex tips are ⊕ at deaths.
    pub fn polarity(&self) -> Option<Polarity> {
        match *self {
            WordEvent::Fold { birth, .. } => {
                let concave = self.kind() == Some(TangencyKind::Concave);
                Some(if concave == birth { Polarity::Plus } else { Polarity::Minus })
            }
            WordEvent::Crossing { .. } => None,
        }
    }

    fn is_concave(&self) -> bool {
        self.kind() == Some(TangencyKind::Concave)
    }

    fn delta(&self) -> isize {
        match *self {
            WordEvent::Crossing { .. } => 0,
            WordEvent::Fold { birth: true, .. } => 2,
            WordEvent::Fold { birth: false, .. } => -2,
        }
    }

    fn shifted(&self, by: usize) -> Self {
        match *self {
            WordEvent::Crossing { pos } => WordEvent::Crossing { pos: pos + by },
            WordEvent::Fold { pos, birth } => WordEvent::Fold { pos: pos + by, birth },
        }
    }
}

impl fmt::Display for WordEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordEvent::Crossing { pos } => write!(f, "X{pos}"),
            WordEvent::Fold { pos, birth: true } => write!(f, "B{pos}"),
            WordEvent::Fold { pos, birth: false } => write!(f, "D{pos}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("event {index} ({event}) needs strands {pos} and {next} but only {count} are present")]
    OutOfRange { index: usize, event: String, pos: usize, next: usize, count: usize },
    #[error("word ends with {end} strands but starts with {start}")]
    NotClosed { start: usize, end: usize },
    #[error("strand count {count} is odd")]
    OddCount { count: usize },
    #[error("strand count {count} exceeds the bound {bound}")]
    BoundExceeded { count: usize, bound: usize },
    #[error("events at theta {0} and {1} coincide; perturb the pattern")]
    CoincidentEvents(f64, f64),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("malformed word JSON: {0}")]
    Json(String),
    #[error("step {step} at site {site} is inadmissible: {reason}")]
    Inadmissible { step: u8, site: usize, reason: String },
    #[error("reduction stuck before canonical form: {0}")]
    Structural(String),
}

/// Cyclic word of events with the strand count before the first event.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnnulusWord {
    pub base: usize,
    pub events: Vec<WordEvent>,
    /// Declared upper bound on fiber cardinality.
    pub bound: Option<usize>,
}

impl AnnulusWord {
    pub fn new(base: usize, events: Vec<WordEvent>, bound: Option<usize>) -> Result<Self, WordError> {
        let w = AnnulusWord { base, events, bound };
        w.validate()?;
        Ok(w)
    }

    pub fn empty() -> Self {
        AnnulusWord { base: 0, events: Vec::new(), bound: None }
    }

    /// Parses words like "B0 B1 D0 D0" with an optional "base:" prefix token.
    pub fn parse(s: &str) -> Result<Self, WordError> {
        let mut base = 0;
        let mut events = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            if let Some(b) = tok.strip_prefix("base:") {
                base = b.parse().map_err(|_| WordError::Json(format!("bad base {tok}")))?;
                continue;
            }
            let (head, num) = tok.split_at(1);
            let pos: usize = num.parse().map_err(|_| WordError::Json(format!("bad token {tok}")))?;
            events.push(match head {
                "B" => WordEvent::birth(pos),
                "D" => WordEvent::death(pos),
                "X" => WordEvent::Crossing { pos },
                _ => return Err(WordError::Json(format!("bad token {tok}"))),
            });
        }
        AnnulusWord::new(base, events, None)
    }

    /// Strand counts before each event and after the last.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![self.base];
        let mut cur = self.base as isize;
        for e in &self.events {
            cur += e.delta();
            c.push(cur.max(0) as usize);
        }
        c
    }

    pub fn max_count(&self) -> usize {
        self.counts().into_iter().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), WordError> {
        let mut count = self.base;
        if count % 2 == 1 {
            return Err(WordError::OddCount { count });
        }
        for (i, e) in self.events.iter().enumerate() {
            let (pos, need) = match *e {
                WordEvent::Crossing { pos } => (pos, count),
                WordEvent::Fold { pos, birth: true } => (pos, count + 2),
                WordEvent::Fold { pos, birth: false } => (pos, count),
            };
            if pos + 1 >= need {
                return Err(WordError::OutOfRange { index: i, event: e.to_string(), pos, next: pos + 1, count });
            }
            count = (count as isize + e.delta()) as usize;
            if let Some(b) = self.bound {
                if count > b {
                    return Err(WordError::BoundExceeded { count, bound: b });
                }
            }
        }
        if let Some(b) = self.bound {
            if self.base > b {
                return Err(WordError::BoundExceeded { count: self.base, bound: b });
            }
        }
        if count != self.base {
            return Err(WordError::NotClosed { start: self.base, end: count });
        }
        Ok(())
    }

    /// Checkerboard sign of gap j: + for even j.
    pub fn gap_sign(j: usize) -> i8 {
        if j.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn crossing_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, WordEvent::Crossing { .. })).count()
    }

    pub fn concave_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_concave()).count()
    }

    /// Stacks `other` above `self`.
    pub fn concat(&self, other: &AnnulusWord) -> AnnulusWord {
        let mut events = self.events.clone();
        events.extend(other.events.iter().map(|e| e.shifted(self.base)));
        let bound = match (self.bound, other.bound) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        AnnulusWord { base: self.base + other.base, events, bound }
    }

    /// The word read from gap `k` onward.
    pub fn rotated(&self, k: usize) -> AnnulusWord {
        let n = self.events.len();
        let k = if n == 0 { 0 } else { k % n };
        let base = self.counts()[k];
        let mut events = self.events[k..].to_vec();
        events.extend_from_slice(&self.events[..k]);
        AnnulusWord { base, events, bound: self.bound }
    }

    /// Mirror image θ ↦ −θ: reverse the order and swap births with deaths.
    pub fn mirrored(&self) -> AnnulusWord {
        let events = self
            .events
            .iter()
            .rev()
            .map(|e| match *e {
                WordEvent::Fold { pos, birth } => WordEvent::Fold { pos, birth: !birth },
                c => c,
            })
            .collect();
        AnnulusWord { base: self.base, events, bound: self.bound }
    }
}

impl fmt::Display for AnnulusWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base > 0 {
            write!(f, "base:{}", self.base)?;
            if !self.events.is_empty() {
                f.write_str(" ")?;
            }
        }
        let parts: Vec<String> = self.events.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Generator words: one concave point of the given polarity and three convex points.
pub fn k_word(polarity: Polarity) -> AnnulusWord {
    let events = match polarity {
        Polarity::Plus => vec![WordEvent::birth(0), WordEvent::birth(1), WordEvent::death(0), WordEvent::death(0)],
        Polarity::Minus => vec![WordEvent::birth(0), WordEvent::birth(0), WordEvent::death(1), WordEvent::death(0)],
    };
    AnnulusWord { base: 0, events, bound: None }
}

/// n copies of the generator (or of its mirror for n < 0).
pub fn multiple_of_k(n: i64) -> AnnulusWord {
    let k = k_word(if n >= 0 { Polarity::Plus } else { Polarity::Minus });
    let mut events = Vec::new();
    for _ in 0..n.unsigned_abs() {
        events.extend_from_slice(&k.events);
    }
    AnnulusWord { base: 0, events, bound: None }
}

/// #concave ⊕ − #concave ⊖.
pub fn j_of_word(w: &AnnulusWord) -> i64 {
    w.events.iter().filter(|e| e.is_concave()).map(|e| if e.polarity() == Some(Polarity::Plus) { 1 } else { -1 }).sum()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    event: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarity: Option<Polarity>,
    pair: usize,
    strands: [usize; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordDoc {
    #[serde(default = "one")]
    format: u32,
    base: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<usize>,
    events: Vec<EventDoc>,
}

fn one() -> u32 {
    1
}

impl AnnulusWord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc()).expect("words serialize") + "\n"
    }

    fn doc(&self) -> WordDoc {
        let counts = self.counts();
        let events = self
            .events
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (event, pair) = match *e {
                    WordEvent::Crossing { pos } => ("crossing".to_string(), pos),
                    WordEvent::Fold { pos, .. } => (if e.is_concave() { "concave" } else { "convex" }.to_string(), pos),
                };
                EventDoc { event, polarity: e.polarity(), pair, strands: [counts[i], counts[i + 1]] }
            })
            .collect();
        WordDoc { format: 1, base: self.base, bound: self.bound, events }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self.doc()).expect("words serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, WordError> {
        let doc: WordDoc = serde_json::from_str(s).map_err(|e| WordError::Json(e.to_string()))?;
        if doc.format != 1 {
            return Err(WordError::Json(format!("unsupported format {}", doc.format)));
        }
        let mut events = Vec::with_capacity(doc.events.len());
        for (i, e) in doc.events.iter().enumerate() {
            let [before, after] = e.strands;
            let ev = match e.event.as_str() {
                "crossing" if before == after => WordEvent::Crossing { pos: e.pair },
                "concave" | "convex" if after == before + 2 => WordEvent::birth(e.pair),
                "concave" | "convex" if before == after + 2 => WordEvent::death(e.pair),
                _ => return Err(WordError::Json(format!("event {i}: inconsistent strand counts or type"))),
            };
            let kind_ok = match e.event.as_str() {
                "concave" => ev.is_concave(),
                "convex" => ev.kind() == Some(TangencyKind::Convex),
                _ => true,
            };
            if !kind_ok || e.polarity != ev.polarity() {
                return Err(WordError::Json(format!("event {i}: kind or polarity contradicts its position")));
            }
            events.push(ev);
        }
        let w = AnnulusWord::new(doc.base, events, doc.bound)?;
        let counts = w.counts();
        for (i, e) in doc.events.iter().enumerate() {
            if e.strands != [counts[i], counts[i + 1]] {
                return Err(WordError::Json(format!("event {i}: strand counts do not chain")));
            }
        }
        Ok(w)
    }
}

/// Reads events off a certified pattern in θ order. Plane patterns start with no strands.
pub fn encode(pattern: &CurvePattern) -> Result<AnnulusWord, WordError> {
    let cert = certify(pattern)?;
    let eta = 1e-7;
    let norm_theta = |t: f64| match pattern.ambient {
        Ambient::Plane => t,
        Ambient::Annulus => t.rem_euclid(TAU),
    };
    let mut raw: Vec<(f64, WordEvent)> = Vec::new();
    for x in &cert.crossings {
        let slope = |d: [f64; 2]| (d[1] / d[0]).abs();
        let m = slope(x.dir_first).max(slope(x.dir_second)) + 1.0;
        let below = pattern.fiber(x.theta - eta).into_iter().filter(|&v| v < x.u - m * eta).count();
        raw.push((norm_theta(x.theta), WordEvent::Crossing { pos: below }));
    }
    for tip in &cert.folds {
        let side = tip.side as f64;
        let below = pattern.fiber(tip.theta + side * eta).into_iter().filter(|&v| v < tip.u).count();
        raw.push((norm_theta(tip.theta), WordEvent::Fold { pos: below, birth: tip.side < 0 }));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in raw.windows(2) {
        if w[1].0 - w[0].0 < 1e-9 {
            return Err(WordError::CoincidentEvents(w[0].0, w[1].0));
        }
    }
    let base = match pattern.ambient {
        Ambient::Plane => 0,
        Ambient::Annulus => {
            if let (Some(first), Some(last)) = (raw.first(), raw.last()) {
                if first.0 < 1e-9 || TAU - last.0 < 1e-9 {
                    return Err(WordError::CoincidentEvents(first.0, last.0));
                }
            }
            pattern.fiber(0.0).len()
        }
    };
    AnnulusWord::new(base, raw.into_iter().map(|r| r.1).collect(), None)
}

/// A⁻ regions of the word as connected components over (interval, odd gap) cells.
#[derive(Clone, Debug)]
struct Components {
    /// Component of each fold event, by event index.
    of_event: Vec<Option<usize>>,
    /// Components touched by a crossing.
    crossed: Vec<bool>,
    count: usize,
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let n = p[y];
        p[y] = r;
        y = n;
    }
    r
}

fn components(w: &AnnulusWord) -> Components {
    let counts = w.counts();
    let n = w.events.len();
    let mut offset = vec![0usize; n + 2];
    for t in 0..=n {
        offset[t + 1] = offset[t] + counts[t] + 1;
    }
    let cell = |t: usize, g: usize| offset[t] + g;
    let mut parent: Vec<usize> = (0..offset[n + 1]).collect();
    let union = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
        }
    };
    for (t, e) in w.events.iter().enumerate() {
        let c = counts[t];
        match *e {
            WordEvent::Crossing { pos } => {
                for g in 0..=c {
                    if g != pos + 1 {
                        union(&mut parent, cell(t, g), cell(t + 1, g));
                    }
                }
            }
            WordEvent::Fold { pos, birth: true } => {
                for g in 0..=c {
                    if g <= pos {
                        union(&mut parent, cell(t, g), cell(t + 1, g));
                    }
                    if g >= pos {
                        union(&mut parent, cell(t, g), cell(t + 1, g + 2));
                    }
                }
            }
            WordEvent::Fold { pos, birth: false } => {
                for g in 0..=counts[t + 1] {
                    if g <= pos {
                        union(&mut parent, cell(t + 1, g), cell(t, g));
                    }
                    if g >= pos {
                        union(&mut parent, cell(t + 1, g), cell(t, g + 2));
                    }
                }
            }
        }
    }
    for g in 0..=counts[0] {
        union(&mut parent, cell(0, g), cell(n, g));
    }
    let mut label: BTreeMap<usize, usize> = BTreeMap::new();
    let mut comp_of = |p: &mut Vec<usize>, x: usize| {
        let r = find(p, x);
        let k = label.len();
        *label.entry(r).or_insert(k)
    };
    let mut of_event = vec![None; n];
    let mut crossing_cells = Vec::new();
    for (t, e) in w.events.iter().enumerate() {
        match *e {
            WordEvent::Fold { pos, birth } => {
                let g = if pos % 2 == 0 { pos + 1 } else { pos };
                let x = if birth == (pos % 2 == 0) { cell(t + 1, g) } else { cell(t, g) };
                of_event[t] = Some(comp_of(&mut parent, x));
            }
            WordEvent::Crossing { pos } => {
                for g in [pos, pos + 1, pos + 2] {
                    if g % 2 == 1 {
                        crossing_cells.push(comp_of(&mut parent, cell(t, g)));
                        crossing_cells.push(comp_of(&mut parent, cell(t + 1, g)));
                    }
                }
            }
        }
    }
    for t in 0..=n {
        for g in (1..=counts[t]).step_by(2) {
            comp_of(&mut parent, cell(t, g));
        }
    }
    let count = label.len();
    let mut crossed = vec![false; count];
    for c in crossing_cells {
        crossed[c] = true;
    }
    Components { of_event, crossed, count }
}

/// Events of each zero-free block of a word with base 0, as index ranges.
fn blocks(w: &AnnulusWord) -> Vec<(usize, usize)> {
    if w.base != 0 {
        return Vec::new();
    }
    let counts = w.counts();
    let mut out = Vec::new();
    let mut start = 0;
    for t in 0..w.events.len() {
        if counts[t + 1] == 0 {
            out.push((start, t + 1));
            start = t + 1;
        }
    }
    out
}

fn block_polarity(w: &AnnulusWord, b: (usize, usize)) -> Option<Polarity> {
    let slice = &w.events[b.0..b.1];
    if slice.len() == 4 && slice == k_word(Polarity::Plus).events.as_slice() {
        Some(Polarity::Plus)
    } else if slice.len() == 4 && slice == k_word(Polarity::Minus).events.as_slice() {
        Some(Polarity::Minus)
    } else {
        None
    }
}

/// Concave-free A⁻ components: (birth index, death index) of their two convex events.
fn lenses(w: &AnnulusWord) -> Vec<(usize, usize)> {
    let comps = components(w);
    let mut events_of: Vec<Vec<usize>> = vec![Vec::new(); comps.count];
    for (t, c) in comps.of_event.iter().enumerate() {
        if let Some(c) = c {
            events_of[*c].push(t);
        }
    }
    let mut out = Vec::new();
    for (c, evs) in events_of.iter().enumerate() {
        if comps.crossed[c] || evs.len() != 2 {
            continue;
        }
        let (a, b) = (evs[0], evs[1]);
        match (w.events[a], w.events[b]) {
            (WordEvent::Fold { birth: true, .. }, WordEvent::Fold { birth: false, .. })
                if !w.events[a].is_concave() && !w.events[b].is_concave() =>
            {
                out.push((a, b))
            }
            _ => {}
        }
    }
    out.sort();
    out
}

fn concave_free_components(w: &AnnulusWord) -> usize {
    let comps = components(w);
    let mut concave = vec![false; comps.count];
    let mut has_event = vec![false; comps.count];
    for (t, c) in comps.of_event.iter().enumerate() {
        if let Some(c) = c {
            has_event[*c] = true;
            if w.events[t].is_concave() {
                concave[*c] = true;
            }
        }
    }
    (0..comps.count).filter(|&c| has_event[c] && !concave[c]).count()
}

fn inadmissible(step: u8, site: usize, reason: &str) -> WordError {
    WordError::Inadmissible { step, site, reason: reason.to_string() }
}

/// Lexicographic termination measure: (crossings, pending cuts, concave events,
/// concave-free A⁻ components, non-canonical single-concave blocks).
pub fn measure(w: &AnnulusWord) -> [usize; 5] {
    let concave = w.concave_count();
    let pending = if w.base > 0 {
        1 + concave
    } else {
        blocks(w).iter().map(|&(a, b)| w.events[a..b].iter().filter(|e| e.is_concave()).count().saturating_sub(1)).sum()
    };
    let noncanonical = blocks(w)
        .iter()
        .filter(|&&b| {
            w.events[b.0..b.1].iter().filter(|e| e.is_concave()).count() == 1 && block_polarity(w, b).is_none()
        })
        .count();
    [w.crossing_count(), pending, concave, concave_free_components(w), noncanonical]
}

/// Applies one of the seven steps at `site`.
///
/// 1: delete the crossing at event `site`. 2: cut the fiber in gap `site`, leaving
/// no strands there. 3: cut after the concave event `site` when the same block has a
/// later concave event. 4: check that no A⁻ component has two concave points.
/// 5: delete the concave-free component whose birth is event `site`. 6: cancel block
/// `site` (K⊕) against the next block (K⊖). 7: replace the single-concave block `site` by K.
pub fn rewrite(w: &AnnulusWord, step: u8, site: usize) -> Result<AnnulusWord, WordError> {
    let out = match step {
        1 => {
            if !matches!(w.events.get(site), Some(WordEvent::Crossing { .. })) {
                return Err(inadmissible(1, site, "no crossing at this event"));
            }
            let mut e = w.events.clone();
            e.remove(site);
            AnnulusWord { base: w.base, events: e, bound: w.bound }
        }
        2 => {
            if site > w.events.len() {
                return Err(inadmissible(2, site, "gap index out of range"));
            }
            let r = w.rotated(site);
            if r.base == 0 {
                return Err(inadmissible(2, site, "the fiber is already empty"));
            }
            let m = r.base / 2;
            let mut e = vec![WordEvent::birth(0); m];
            e.extend_from_slice(&r.events);
            e.extend(std::iter::repeat_n(WordEvent::death(0), m));
            AnnulusWord { base: 0, events: e, bound: w.bound }
        }
        3 => {
            if w.base != 0 {
                return Err(inadmissible(3, site, "cut the fiber first"));
            }
            if !w.events.get(site).is_some_and(|e| e.is_concave()) {
                return Err(inadmissible(3, site, "no concave event here"));
            }
            let (_, end) = blocks(w)
                .into_iter()
                .find(|&(a, b)| a <= site && site < b)
                .ok_or_else(|| inadmissible(3, site, "event lies in no block"))?;
            if !w.events[site + 1..end].iter().any(|e| e.is_concave()) {
                return Err(inadmissible(3, site, "no later concave event in this block"));
            }
            let m = w.counts()[site + 1] / 2;
            let mut e = w.events[..=site].to_vec();
            e.extend(std::iter::repeat_n(WordEvent::death(0), m));
            e.extend(std::iter::repeat_n(WordEvent::birth(0), m));
            e.extend_from_slice(&w.events[site + 1..]);
            AnnulusWord { base: 0, events: e, bound: w.bound }
        }
        4 => {
            let comps = components(w);
            let mut per = vec![0usize; comps.count];
            for (t, c) in comps.of_event.iter().enumerate() {
                if let (Some(c), true) = (c, w.events[t].is_concave()) {
                    per[*c] += 1;
                }
            }
            if per.iter().any(|&k| k > 1) {
                return Err(inadmissible(4, site, "an A⁻ component holds two concave points"));
            }
            w.clone()
        }
        5 => {
            let (a, b) = lenses(w)
                .into_iter()
                .find(|&(a, _)| a == site)
                .ok_or_else(|| inadmissible(5, site, "no concave-free disk is born here"))?;
            if b < a {
                return Err(inadmissible(5, site, "component wraps around the annulus"));
            }
            let WordEvent::Fold { pos, .. } = w.events[a] else { unreachable!() };
            let mut lower = pos;
            let mut e = Vec::with_capacity(w.events.len() - 2);
            e.extend_from_slice(&w.events[..a]);
            for ev in &w.events[a + 1..b] {
                let below = match *ev {
                    WordEvent::Fold { pos: p, birth: true } => p <= lower,
                    WordEvent::Fold { pos: p, .. } | WordEvent::Crossing { pos: p } => p + 1 < lower,
                };
                if below {
                    lower = (lower as isize + ev.delta()) as usize;
                    e.push(*ev);
                } else {
                    e.push(match *ev {
                        WordEvent::Fold { pos: p, birth } => WordEvent::Fold { pos: p - 2, birth },
                        WordEvent::Crossing { pos: p } => WordEvent::Crossing { pos: p - 2 },
                    });
                }
            }
            e.extend_from_slice(&w.events[b + 1..]);
            AnnulusWord { base: w.base, events: e, bound: w.bound }
        }
        6 => {
            let bs = blocks(w);
            if bs.len() < 2 || site >= bs.len() {
                return Err(inadmissible(6, site, "needs two blocks"));
            }
            let next = (site + 1) % bs.len();
            if block_polarity(w, bs[site]) != Some(Polarity::Plus)
                || block_polarity(w, bs[next]) != Some(Polarity::Minus)
            {
                return Err(inadmissible(6, site, "blocks are not K⊕ followed by K⊖"));
            }
            let keep = |t: usize| !(bs[site].0..bs[site].1).contains(&t) && !(bs[next].0..bs[next].1).contains(&t);
            let e = w.events.iter().enumerate().filter(|(t, _)| keep(*t)).map(|(_, e)| *e).collect();
            AnnulusWord { base: 0, events: e, bound: w.bound }
        }
        7 => {
            let bs = blocks(w);
            let b = *bs.get(site).ok_or_else(|| inadmissible(7, site, "no such block"))?;
            let slice = &w.events[b.0..b.1];
            let concave: Vec<&WordEvent> = slice.iter().filter(|e| e.is_concave()).collect();
            if concave.len() != 1 || slice.len() != 4 || slice.iter().any(|e| matches!(e, WordEvent::Crossing { .. })) {
                return Err(inadmissible(7, site, "block is not a disk with one concave and three convex points"));
            }
            if block_polarity(w, b).is_some() {
                return Err(inadmissible(7, site, "block is already canonical"));
            }
            let k = k_word(concave[0].polarity().expect("fold"));
            let mut e = w.events[..b.0].to_vec();
            e.extend_from_slice(&k.events);
            e.extend_from_slice(&w.events[b.1..]);
            AnnulusWord { base: 0, events: e, bound: w.bound }
        }
        _ => return Err(inadmissible(step, site, "steps are numbered 1 to 7")),
    };
    out.validate()?;
    Ok(out)
}

/// One applied rewrite with the word it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: u8,
    pub site: usize,
    pub word: String,
    pub j: i64,
    pub measure: [usize; 5],
    pub max_strands: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub n: i64,
    pub initial: String,
    pub terminal: String,
    pub trace: Vec<TraceStep>,
}

fn next_rewrite(w: &AnnulusWord, checked: bool) -> Option<(u8, usize)> {
    if let Some(i) = w.events.iter().position(|e| matches!(e, WordEvent::Crossing { .. })) {
        return Some((1, i));
    }
    if w.base > 0 {
        return Some((2, 0));
    }
    for &(a, b) in &blocks(w) {
        let conc: Vec<usize> = (a..b).filter(|&t| w.events[t].is_concave()).collect();
        if conc.len() >= 2 {
            return Some((3, conc[0]));
        }
    }
    if !checked {
        return Some((4, 0));
    }
    if let Some(&(a, _)) = lenses(w).first() {
        return Some((5, a));
    }
    let bs = blocks(w);
    if bs.len() >= 2 {
        for i in 0..bs.len() {
            let j = (i + 1) % bs.len();
            if block_polarity(w, bs[i]) == Some(Polarity::Plus) && block_polarity(w, bs[j]) == Some(Polarity::Minus) {
                return Some((6, i));
            }
        }
    }
    for (i, &b) in bs.iter().enumerate() {
        let conc = w.events[b.0..b.1].iter().filter(|e| e.is_concave()).count();
        if conc == 1 && block_polarity(w, b).is_none() {
            return Some((7, i));
        }
    }
    None
}

/// Runs the steps in order until none applies, checking J, the strand bound and
/// the measure after every rewrite. The result is n·K with n = J.
pub fn reduce(w: &AnnulusWord) -> Result<Reduction, WordError> {
    w.validate()?;
    let j0 = j_of_word(w);
    let mut cur = w.clone();
    let mut trace = Vec::new();
    let mut checked = false;
    let mut meas = measure(&cur);
    let mut bound = cur.max_count();
    while let Some((step, site)) = next_rewrite(&cur, checked) {
        let next = rewrite(&cur, step, site)?;
        if step == 4 {
            checked = true;
        }
        let j = j_of_word(&next);
        if j != j0 {
            return Err(WordError::Structural(format!("step {step} changed J from {j0} to {j}")));
        }
        let m = measure(&next);
        if step != 4 && m >= meas {
            return Err(WordError::Structural(format!("step {step} did not decrease the measure: {meas:?} to {m:?}")));
        }
        let b = next.max_count();
        if b > bound {
            return Err(WordError::Structural(format!("step {step} raised the strand bound from {bound} to {b}")));
        }
        if step == 3 || step == 2 {
            checked = false;
        }
        trace.push(TraceStep { step, site, word: next.to_string(), j, measure: m, max_strands: b });
        meas = m;
        bound = b;
        cur = next;
        if trace.len() > 100_000 {
            return Err(WordError::Structural("trace exceeded 100000 rewrites".into()));
        }
    }
    let n = j0;
    if cur.events != multiple_of_k(n).events || cur.base != 0 {
        return Err(WordError::Structural(format!("terminal word {cur} is not {n}·K")));
    }
    Ok(Reduction { n, initial: w.to_string(), terminal: cur.to_string(), trace })
}

/// Re-applies a trace from its initial word and checks every intermediate word.
pub fn replay(initial: &AnnulusWord, trace: &[TraceStep]) -> Result<AnnulusWord, WordError> {
    let mut cur = initial.clone();
    for (i, s) in trace.iter().enumerate() {
        cur = rewrite(&cur, s.step, s.site)?;
        if cur.to_string() != s.word {
            return Err(WordError::Structural(format!("replay diverges at rewrite {i}")));
        }
    }
    Ok(cur)
}

/// Shipped words.
pub mod words {
    use super::*;

    pub fn generator() -> AnnulusWord {
        k_word(Polarity::Plus)
    }

    pub fn mirror_generator() -> AnnulusWord {
        k_word(Polarity::Minus)
    }

    /// Two generator disks side by side.
    pub fn two_disks() -> AnnulusWord {
        let mut w = generator();
        w.events.extend_from_slice(&generator().events);
        w
    }

    /// One disk with two concave ⊕ points.
    pub fn double_notch() -> AnnulusWord {
        AnnulusWord::parse("B0 B1 B3 D0 D0 D0").expect("valid word")
    }

    /// An annular region: concave points of opposite polarity.
    pub fn annular() -> AnnulusWord {
        AnnulusWord::parse("B0 B1 D1 D0").expect("valid word")
    }

    /// Generator stacked under its mirror.
    pub fn generator_and_mirror() -> AnnulusWord {
        generator().concat(&mirror_generator())
    }

    /// Two horizontal circles with a generator disk between them.
    pub fn banded_generator() -> AnnulusWord {
        AnnulusWord::parse("base:2 B2 B3 D2 D2").expect("valid word")
    }
}

/// Wiring diagram: strands as horizontal wires, folds as caps, crossings as
/// swaps. Concave folds are marked red (⊕) or blue (⊖).
pub fn render_word_svg(w: &AnnulusWord) -> String {
    let (width, height, pad) = (800.0, 400.0, 30.0);
    let counts = w.counts();
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let n = w.events.len() as f64;
    let dx = (width - 2.0 * pad) / (n + 1.0);
    let dy = (height - 2.0 * pad) / top;
    let y = |j: f64| height - pad - (j + 0.5) * dy;
    let mut svg = Svg::new(width, height);
    for (t, e) in w.events.iter().enumerate() {
        let x0 = pad + t as f64 * dx;
        let x1 = x0 + dx;
        let (c0, c1) = (counts[t], counts[t + 1]);
        let xm = 0.5 * (x0 + x1);
        match *e {
            WordEvent::Crossing { pos } => {
                for j in 0..c0 {
                    if j != pos && j != pos + 1 {
                        svg.line(x0, y(j as f64), x1, y(j as f64), "black", 1.5);
                    }
                }
                svg.line(x0, y(pos as f64), x1, y(pos as f64 + 1.0), "black", 1.5);
                svg.line(x0, y(pos as f64 + 1.0), x1, y(pos as f64), "black", 1.5);
            }
            WordEvent::Fold { pos, birth } => {
                let (few, xf, xn) = if birth { (c0, x0, x1) } else { (c1, x1, x0) };
                for j in 0..few {
                    let jj = if j < pos { j } else { j + 2 };
                    svg.line(xf, y(j as f64), xn, y(jj as f64), "black", 1.5);
                }
                let tip = (xm, y(pos as f64 + 0.5));
                svg.polyline(&[(xn, y(pos as f64)), tip, (xn, y(pos as f64 + 1.0))], "black", 1.5);
                let color = match (e.is_concave(), e.polarity()) {
                    (true, Some(Polarity::Plus)) => "#d62728",
                    (true, _) => "#1f77b4",
                    _ => "#888888",
                };
                svg.circle(tip.0, tip.1, 4.0, color);
            }
        }
    }
    let xe = pad + n * dx;
    for j in 0..*counts.last().unwrap_or(&0) {
        svg.line(xe, y(j as f64), xe + dx, y(j as f64), "black", 1.5);
    }
    svg.text(width / 2.0, 18.0, &format!("J = {}", j_of_word(w)), 14.0);
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::words::*;
    use super::*;

    #[test]
    fn generator_census() {
        let k = generator();
        assert_eq!(j_of_word(&k), 1);
        assert_eq!(k.events.iter().filter(|e| e.kind() == Some(TangencyKind::Convex)).count(), 3);
        assert_eq!(j_of_word(&mirror_generator()), -1);
        assert_eq!(j_of_word(&k.mirrored()), -1);
        assert_eq!(j_of_word(&double_notch()), 2);
        assert_eq!(j_of_word(&two_disks()), 2);
        assert_eq!(j_of_word(&AnnulusWord::empty()), 0);
    }

    #[test]
    fn reductions() {
        for (w, n) in [
            (generator(), 1),
            (mirror_generator(), -1),
            (double_notch(), 2),
            (two_disks(), 2),
            (annular(), 0),
            (generator_and_mirror(), 0),
            (banded_generator(), 1),
            (k_word(Polarity::Plus).mirrored(), -1),
        ] {
            let r = reduce(&w).unwrap_or_else(|e| panic!("{w}: {e}"));
            assert_eq!(r.n, n, "{w}");
            assert_eq!(replay(&w, &r.trace).unwrap().to_string(), r.terminal);
        }
    }

    #[test]
    fn json_round_trip() {
        let w = double_notch();
        let back = AnnulusWord::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        assert!(AnnulusWord::from_json(
            r#"{"base":0,"events":[{"event":"concave","polarity":"+","pair":0,"strands":[0,2]}]}"#
        )
        .is_err());
    }

    #[test]
    fn step_rejections() {
        let k = generator();
        assert!(rewrite(&k, 1, 0).is_err());
        assert!(rewrite(&k, 2, 0).is_err());
        assert!(rewrite(&k, 6, 0).is_err());
        assert!(rewrite(&k, 7, 0).is_err());
        assert!(rewrite(&k, 9, 0).is_err());
    }

    #[test]
    fn lens_removal() {
        let w = AnnulusWord::parse("B0 B2 D2 D0").unwrap();
        let r = rewrite(&w, 5, 0).unwrap();
        assert_eq!(r.to_string(), "B0 D0");
    }
}
