//! Traversing flows on compact surfaces with boundary, built from tricolored
//! trivalent graphs, and the loop invariant J of real polynomial families.

pub mod assembly;
pub mod causality;
pub mod curves;
pub mod flowgraph;
pub mod patterns;
pub mod polyfam;
pub mod strata;
pub mod svg;
