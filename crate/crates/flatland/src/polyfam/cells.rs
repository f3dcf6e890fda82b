//! Cell structure of the space of monic real polynomials of even degree d,
//! stratified by the multiplicity pattern of real roots.

use std::collections::BTreeMap;

use super::{PolyError, RootPattern};

/// Signed formal sum of cells.
pub type Chain = BTreeMap<RootPattern, i64>;

pub fn check_pattern(omega: &RootPattern, d: usize) -> Result<(), PolyError> {
    let n = omega.norm();
    if omega.0.contains(&0) || n > d || !(d - n).is_multiple_of(2) {
        return Err(PolyError::InvalidPattern { pattern: omega.to_string(), degree: d });
    }
    Ok(())
}

/// d − |ω|′.
pub fn cell_dim(omega: &RootPattern, d: usize) -> Result<usize, PolyError> {
    check_pattern(omega, d)?;
    Ok(d - omega.reduced_norm())
}

fn add(chain: &mut Chain, p: RootPattern, c: i64) {
    let e = chain.entry(p.clone()).or_insert(0);
    *e += c;
    if *e == 0 {
        chain.remove(&p);
    }
}

/// Codimension-one faces: collide roots i and i+1 with sign (−1)^i, and when
/// |ω| + 2 ≤ d let a complex pair land as a new double root in gap g with sign (−1)^g.
pub fn cell_boundary(omega: &RootPattern, d: usize) -> Result<Chain, PolyError> {
    check_pattern(omega, d)?;
    let w = &omega.0;
    let mut out = Chain::new();
    for i in 0..w.len().saturating_sub(1) {
        let mut v = w[..i].to_vec();
        v.push(w[i] + w[i + 1]);
        v.extend_from_slice(&w[i + 2..]);
        add(&mut out, RootPattern(v), if i % 2 == 0 { 1 } else { -1 });
    }
    if omega.norm() + 2 <= d {
        for g in 0..=w.len() {
            let mut v = w[..g].to_vec();
            v.push(2);
            v.extend_from_slice(&w[g..]);
            add(&mut out, RootPattern(v), if g % 2 == 0 { 1 } else { -1 });
        }
    }
    Ok(out)
}

pub fn chain_boundary(chain: &Chain, d: usize) -> Result<Chain, PolyError> {
    let mut out = Chain::new();
    for (p, &c) in chain {
        for (q, e) in cell_boundary(p, d)? {
            add(&mut out, q, c * e);
        }
    }
    Ok(out)
}

fn compositions(n: usize) -> Vec<Vec<u8>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first as u8);
            out.push(rest);
        }
    }
    out
}

/// All cells of the closure stratification in degree d, including the forbidden ones.
pub fn valid_patterns(d: usize) -> Vec<RootPattern> {
    let mut out: Vec<RootPattern> =
        (0..=d).filter(|m| (d - m).is_multiple_of(2)).flat_map(compositions).map(RootPattern).collect();
    out.sort();
    out
}

/// Codimension-one walls crossed by concave tangencies: a single 2 with an odd
/// number of simple roots to its right.
pub fn is_j_stratum(omega: &RootPattern) -> bool {
    let w = &omega.0;
    let twos: Vec<usize> = (0..w.len()).filter(|&i| w[i] == 2).collect();
    twos.len() == 1 && w.iter().all(|&m| m == 1 || m == 2) && (w.len() - 1 - twos[0]) % 2 == 1
}

pub fn j_strata(d: usize) -> Vec<RootPattern> {
    valid_patterns(d).into_iter().filter(is_j_stratum).collect()
}

/// Cells with a root of multiplicity ≥ 3 and codimension 2.
pub fn forbidden_codim2(d: usize) -> Vec<RootPattern> {
    valid_patterns(d).into_iter().filter(|p| p.0.iter().any(|&m| m >= 3) && p.reduced_norm() == 2).collect()
}

/// Chain literal from (pattern, coefficient) pairs.
pub fn chain(terms: &[(&str, i64)]) -> Chain {
    let mut c = Chain::new();
    for &(p, k) in terms {
        add(&mut c, p.parse().expect("pattern literal"), k);
    }
    c
}
