//! Morse stratification bookkeeping for non-vanishing fields on surfaces:
//! the index formula, complexity bounds, the volume ratio and the 2D tangency poset.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{classify, tangency_census, AssemblyError, SurfaceClass, SurfaceComplex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolaritySplit {
    pub n_oplus: u32,
    pub n_ominus: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrataCensus {
    pub chi_x: i64,
    /// Euler number of the entry boundary: one per arc, circles count zero.
    pub chi_entry: i64,
    pub n2_plus: u32,
    pub n2_minus: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<PolaritySplit>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrataError {
    #[error("index is {0}; the statement needs a non-vanishing field (index 0)")]
    NonZeroIndex(i64),
    #[error("euler characteristic {0} admits no hyperbolic structure")]
    NoHyperbolicStructure(i64),
    #[error("census is inconsistent: #concave - #convex = {0} is odd")]
    OddDifference(i64),
    #[error("polarity split {0:?} does not sum to {1}")]
    BadSplit(PolaritySplit, u32),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

impl StrataCensus {
    pub fn new(chi_x: i64, chi_entry: i64, n2_plus: u32, n2_minus: u32) -> Self {
        StrataCensus { chi_x, chi_entry, n2_plus, n2_minus, polarity: None }
    }

    pub fn with_polarity(mut self, split: PolaritySplit) -> Result<Self, StrataError> {
        if split.n_oplus + split.n_ominus != self.n2_plus {
            return Err(StrataError::BadSplit(split, self.n2_plus));
        }
        self.polarity = Some(split);
        Ok(self)
    }

    /// Census of the vertical flow on an assembled surface.
    pub fn of_surface(surface: &SurfaceComplex) -> Result<Self, StrataError> {
        let class = classify(surface)?;
        let t = tangency_census(surface)?;
        Ok(StrataCensus::new(
            class.euler,
            t.entry_arcs as i64,
            t.concave_points.len() as u32,
            t.convex_points.len() as u32,
        ))
    }
}

/// Ind = χ(X) − χ(∂₁⁺X) + χ(∂₂⁺X).
pub fn index(census: &StrataCensus) -> i64 {
    census.chi_x - census.chi_entry + census.n2_plus as i64
}

/// How a lower bound on complexity is witnessed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// The census comes from an assembled strip surface, a gradient-type field,
    /// so it bounds the gradient complexity from above.
    GradientAssembled,
    /// No witness information attached.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub lower_bound: u32,
    pub satisfied: bool,
    /// True when the bound is attained, which happens exactly for boundary-concave fields.
    pub equality: bool,
    pub witness: Witness,
}

/// Checks #∂₂⁺ ≥ −2χ and flags equality when the field has no convex points.
pub fn complexity_report(class: &SurfaceClass, census: &StrataCensus) -> Result<ComplexityReport, StrataError> {
    let ind = index(census);
    if ind != 0 {
        return Err(StrataError::NonZeroIndex(ind));
    }
    let lower_bound = (-2 * class.euler).max(0) as u32;
    Ok(ComplexityReport {
        lower_bound,
        satisfied: census.n2_plus >= lower_bound,
        equality: census.n2_minus == 0,
        witness: Witness::None,
    })
}

/// Complexity values that are known but not computable by this library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownComplexity {
    pub class: SurfaceClass,
    pub c_plus: u32,
    pub gc_plus: u32,
}

/// Recorded values: the Möbius band carries a non-gradient field with no concave
/// points, while every gradient-type field on it has at least one.
pub fn known_complexity(class: &SurfaceClass) -> Option<KnownComplexity> {
    let table = [
        KnownComplexity { class: SurfaceClass::mobius(), c_plus: 0, gc_plus: 1 },
        KnownComplexity { class: SurfaceClass::disk(), c_plus: 0, gc_plus: 0 },
        KnownComplexity { class: SurfaceClass::annulus(), c_plus: 0, gc_plus: 0 },
        KnownComplexity { class: SurfaceClass::punctured_torus(), c_plus: 2, gc_plus: 2 },
        KnownComplexity { class: SurfaceClass::punctured_klein(), c_plus: 2, gc_plus: 2 },
        KnownComplexity { class: SurfaceClass::pair_of_pants(), c_plus: 2, gc_plus: 2 },
    ];
    table.into_iter().find(|k| &k.class == class)
}

/// vol(DX)/vol(Δ²) = −χ(DX) = −2χ(X) for a hyperbolic double.
pub fn volume_ratio(class: &SurfaceClass) -> Result<Rational64, StrataError> {
    if class.euler >= 0 {
        return Err(StrataError::NoHyperbolicStructure(class.euler));
    }
    Ok(Rational64::from_integer(-2 * class.euler))
}

/// (#∂₂⁺ − #∂₂⁻)/2 = −χ(X) for a non-vanishing field.
pub fn morse_identity_check(census: &StrataCensus) -> Result<bool, StrataError> {
    let ind = index(census);
    if ind != 0 {
        return Err(StrataError::NonZeroIndex(ind));
    }
    let diff = census.n2_plus as i64 - census.n2_minus as i64;
    if diff % 2 != 0 {
        return Err(StrataError::OddDifference(diff));
    }
    Ok(diff / 2 == -census.chi_x)
}

/// Combinatorial tangency types along a trajectory of a 2D field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TangencyPattern {
    /// (11): transversal crossing of the boundary at both ends.
    Regular,
    /// (2): convex tangency, the trajectory is a point.
    Convex,
    /// (121): concave tangency in the interior of a trajectory.
    Concave,
}

impl TangencyPattern {
    pub const ALL: [TangencyPattern; 3] = [TangencyPattern::Regular, TangencyPattern::Convex, TangencyPattern::Concave];

    pub fn word(self) -> &'static str {
        match self {
            TangencyPattern::Regular => "(11)",
            TangencyPattern::Convex => "(2)",
            TangencyPattern::Concave => "(121)",
        }
    }

    /// `self ≻ other`: `other` lies in the closure of the stratum of `self`.
    pub fn covers(self, other: TangencyPattern) -> bool {
        matches!(
            (self, other),
            (TangencyPattern::Regular, TangencyPattern::Convex) | (TangencyPattern::Regular, TangencyPattern::Concave)
        )
    }
}

impl fmt::Display for TangencyPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

impl PartialOrd for TangencyPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else if self.covers(*other) {
            Some(Ordering::Greater)
        } else if other.covers(*self) {
            Some(Ordering::Less)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_examples() {
        assert_eq!(index(&StrataCensus::new(1, 0, 0, 0)), 1);
        assert_eq!(index(&StrataCensus::new(0, 0, 0, 0)), 0);
        assert_eq!(index(&StrataCensus::new(-1, 1, 2, 0)), 0);
    }

    #[test]
    fn complexity_examples() {
        let r = complexity_report(&SurfaceClass::punctured_torus(), &StrataCensus::new(-1, 1, 2, 0)).unwrap();
        assert_eq!((r.lower_bound, r.satisfied, r.equality), (2, true, true));
        let g2 = SurfaceClass::from_invariants(-3, true, 1).unwrap();
        assert_eq!(g2.genus, 2);
        let r = complexity_report(&g2, &StrataCensus::new(-3, 3, 6, 0)).unwrap();
        assert_eq!(r.lower_bound, 6);
        let r = complexity_report(&SurfaceClass::disk(), &StrataCensus::new(1, 1, 0, 2)).unwrap();
        assert_eq!((r.lower_bound, r.satisfied, r.equality), (0, true, false));
        assert_eq!(
            complexity_report(&SurfaceClass::disk(), &StrataCensus::new(1, 0, 0, 0)),
            Err(StrataError::NonZeroIndex(1))
        );
    }

    #[test]
    fn volume_examples() {
        assert_eq!(volume_ratio(&SurfaceClass::punctured_torus()).unwrap(), Rational64::from_integer(2));
        let g2 = SurfaceClass::from_invariants(-3, true, 1).unwrap();
        assert_eq!(volume_ratio(&g2).unwrap(), Rational64::from_integer(6));
        assert_eq!(volume_ratio(&SurfaceClass::annulus()), Err(StrataError::NoHyperbolicStructure(0)));
    }

    #[test]
    fn morse_examples() {
        assert_eq!(morse_identity_check(&StrataCensus::new(1, 1, 0, 2)), Ok(true));
        assert_eq!(morse_identity_check(&StrataCensus::new(-1, 1, 2, 0)), Ok(true));
        assert_eq!(morse_identity_check(&StrataCensus::new(0, 1, 1, 1)), Ok(true));
        assert_eq!(morse_identity_check(&StrataCensus::new(0, 1, 1, 0)), Err(StrataError::OddDifference(1)));
    }

    #[test]
    fn poset_relations() {
        use TangencyPattern::*;
        assert!(Regular > Convex);
        assert!(Regular > Concave);
        assert_eq!(Convex.partial_cmp(&Concave), None);
        let mut covers = 0;
        for a in TangencyPattern::ALL {
            assert!(!a.covers(a));
            for b in TangencyPattern::ALL {
                if a.covers(b) {
                    covers += 1;
                    assert!(!b.covers(a));
                }
            }
        }
        assert_eq!(covers, 2);
    }

    #[test]
    fn known_mobius_values() {
        let k = known_complexity(&SurfaceClass::mobius()).unwrap();
        assert_eq!((k.c_plus, k.gc_plus), (0, 1));
    }

    #[test]
    fn split_must_sum() {
        let c = StrataCensus::new(-1, 1, 2, 0);
        assert!(c.with_polarity(PolaritySplit { n_oplus: 1, n_ominus: 0 }).is_err());
        assert!(c.with_polarity(PolaritySplit { n_oplus: 1, n_ominus: 1 }).is_ok());
    }
}
