//! Exact real-root patterns of rational polynomials: square-free decomposition
//! and Sturm-sequence isolation over big rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{PolyError, RootPattern};

/// Polynomial with rational coefficients in ascending order, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly(pub Vec<BigRational>);

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly(c)
    }

    /// Exact conversion of finite doubles.
    pub fn from_f64(c: &[f64]) -> Option<Self> {
        c.iter().map(|&x| BigRational::from_float(x)).collect::<Option<Vec<_>>>().map(QPoly::new)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        QPoly::new(c.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("nonzero polynomial")
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().clone();
        QPoly(self.0.iter().map(|x| x / &l).collect())
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.0.iter().enumerate().skip(1).map(|(i, x)| x * BigRational::from_integer(BigInt::from(i))).collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &BigRational) -> i8 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly(Vec::new());
        }
        let mut c = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }

    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (QPoly(Vec::new()), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        let lead = d.lead().clone();
        for k in (0..q.len()).rev() {
            let coef = &r[k + dd] / &lead;
            if !coef.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[k + j] -= &coef * dj;
                }
            }
            q[k] = coef;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        QPoly::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect())
    }

    fn neg(&self) -> QPoly {
        QPoly(self.0.iter().map(|x| -x).collect())
    }
}

/// Yun's algorithm: returns square-free factors f_1, f_2, … with p = ∏ f_i^i up to a constant.
pub fn square_free_decomposition(p: &QPoly) -> Vec<QPoly> {
    let p = p.monic();
    let dp = p.derivative();
    let a = p.gcd(&dp);
    let mut b = p.div_rem(&a).0;
    let mut c = dp.div_rem(&a).0;
    let mut out = Vec::new();
    while b.degree().unwrap_or(0) > 0 {
        let d = c.sub(&b.derivative());
        let f = b.gcd(&d);
        b = b.div_rem(&f).0;
        c = d.div_rem(&f).0;
        out.push(f);
    }
    while out.last().is_some_and(|f| f.degree() == Some(0)) {
        out.pop();
    }
    out
}

fn sturm_chain(p: &QPoly) -> Vec<QPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    while let Some(last) = chain.last() {
        if last.is_zero() {
            chain.pop();
            break;
        }
        let n = chain.len();
        let r = chain[n - 2].div_rem(&chain[n - 1]).1.neg();
        if r.is_zero() {
            break;
        }
        chain.push(r);
    }
    chain
}

fn variations(chain: &[QPoly], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut v = 0;
    for q in chain {
        let s = q.sign_at(x);
        if s != 0 {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
    }
    v
}

fn cauchy_bound(p: &QPoly) -> BigRational {
    let lead = p.lead().abs();
    let m =
        p.0.iter()
            .take(p.0.len() - 1)
            .map(|c| c.abs() / &lead)
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    m + BigRational::one()
}

/// Isolating intervals (a, b], each holding exactly one root of the square-free `p`.
fn isolate(p: &QPoly) -> Vec<(BigRational, BigRational)> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let chain = sturm_chain(p);
    let b = cauchy_bound(p);
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let n = variations(&chain, &lo) - variations(&chain, &hi);
        match n {
            0 => {}
            1 => out.push((lo, hi)),
            _ => {
                let mid = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

struct Root {
    lo: BigRational,
    hi: BigRational,
    mult: u8,
    chain: Vec<QPoly>,
}

impl Root {
    fn refine(&mut self) {
        let mid = (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2));
        if variations(&self.chain, &self.lo) - variations(&self.chain, &mid) == 1 {
            self.hi = mid;
        } else {
            self.lo = mid;
        }
    }
}

/// Real roots with multiplicities, increasing, as (approximate value, multiplicity).
pub fn real_roots_exact(p: &QPoly) -> Vec<(f64, u8)> {
    let mut roots: Vec<Root> = Vec::new();
    for (i, f) in square_free_decomposition(p).iter().enumerate() {
        let chain = sturm_chain(f);
        for (lo, hi) in isolate(f) {
            roots.push(Root { lo, hi, mult: (i + 1) as u8, chain: chain.clone() });
        }
    }
    // Refine until intervals are pairwise disjoint, then order.
    loop {
        roots.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut clash = None;
        for k in 0..roots.len().saturating_sub(1) {
            if roots[k].hi > roots[k + 1].lo {
                clash = Some(k);
                break;
            }
        }
        match clash {
            None => break,
            Some(k) => {
                roots[k].refine();
                roots[k + 1].refine();
            }
        }
    }
    roots
        .iter_mut()
        .map(|r| {
            for _ in 0..60 {
                r.refine();
            }
            (((&r.lo + &r.hi) / BigRational::from_integer(BigInt::from(2))).to_f64().unwrap_or(f64::NAN), r.mult)
        })
        .collect()
}

/// The multiplicity composition of the real roots. Roots of multiplicity ≥ 3 are rejected.
pub fn pattern_of(p: &QPoly) -> Result<RootPattern, PolyError> {
    let roots = real_roots_exact(p);
    if let Some(&(x, m)) = roots.iter().find(|r| r.1 >= 3) {
        return Err(PolyError::Forbidden { theta: None, u: x, multiplicity: m });
    }
    Ok(RootPattern(roots.iter().map(|r| r.1).collect()))
}

/// Pattern including roots of any multiplicity.
pub fn pattern_unchecked(p: &QPoly) -> RootPattern {
    RootPattern(real_roots_exact(p).iter().map(|r| r.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[i64], extra: &[i64]) -> QPoly {
        let mut p = QPoly::from_ints(extra);
        for &r in roots {
            p = p.mul(&QPoly::from_ints(&[-r, 1]));
        }
        p
    }

    #[test]
    fn examples() {
        assert_eq!(pattern_of(&QPoly::from_ints(&[1, 0, 1])).unwrap(), RootPattern(vec![]));
        let p = from_roots(&[-1, 1, 1, 3], &[1]);
        assert_eq!(pattern_of(&p).unwrap(), RootPattern(vec![1, 2, 1]));
        let q = from_roots(&[0, 0, 0, 2], &[1]);
        assert!(matches!(pattern_of(&q), Err(PolyError::Forbidden { multiplicity: 3, .. })));
        assert_eq!(pattern_unchecked(&q), RootPattern(vec![3, 1]));
    }

    #[test]
    fn close_roots_separated() {
        let p = from_roots(&[1, 1, 2], &[1])
            .mul(&QPoly::new(vec![BigRational::new(BigInt::from(-1001), BigInt::from(1000)), BigRational::one()]));
        assert_eq!(pattern_of(&p).unwrap(), RootPattern(vec![2, 1, 1]));
    }

    #[test]
    fn square_free_parts() {
        let p = from_roots(&[1, 2, 2, 3, 3, 3], &[1]);
        let f = square_free_decomposition(&p);
        assert_eq!(f.len(), 3);
        assert!(f.iter().all(|x| x.degree() == Some(1)));
    }
}
