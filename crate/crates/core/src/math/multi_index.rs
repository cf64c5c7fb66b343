use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Exponent vector `s = (s_1, ..., s_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|s|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `s! = prod s_i!`, exact for `|s| <= 20`.
    pub fn factorial(&self) -> u64 {
        self.0.iter().map(|&s| (1..=s as u64).product::<u64>()).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn monomial(&self, u: &[f64]) -> f64 {
        monomial_eval(u, self)
    }
}

/// All multi-indices with `|s| <= l` in graded lexicographic order: by total
/// degree, then lexicographically descending in the exponents, so
/// `(d=2, l=1)` gives `[(0,0), (1,0), (0,1)]`. This order fixes the layout of
/// the local design matrices.
pub fn enumerate_multiindices(d: usize, l: u32) -> Vec<MultiIndex> {
    fn fill(prefix: &mut Vec<u32>, remaining_dims: usize, degree: u32, out: &mut Vec<MultiIndex>) {
        if remaining_dims == 1 {
            prefix.push(degree);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=degree).rev() {
            prefix.push(first);
            fill(prefix, remaining_dims - 1, degree - first, out);
            prefix.pop();
        }
    }
    assert!(d >= 1, "dimension must be >= 1");
    let mut out = Vec::new();
    for degree in 0..=l {
        fill(&mut Vec::with_capacity(d), d, degree, &mut out);
    }
    out
}

/// `u^s = prod u_i^{s_i}`; the empty product is 1.
pub fn monomial_eval(u: &[f64], s: &MultiIndex) -> f64 {
    debug_assert_eq!(u.len(), s.dim());
    u.iter().zip(s.exponents()).map(|(&x, &e)| x.powi(e as i32)).product()
}

/// Evaluates the Taylor polynomial of degree `order` at `xq` around `x`:
/// `sum_{|s| <= order} (xq - x)^s / s! * D^s g(x)`.
pub fn taylor_eval(derivs: &BTreeMap<MultiIndex, f64>, order: u32, x: &[f64], xq: &[f64]) -> Result<f64> {
    if x.len() != xq.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: xq.len() });
    }
    let diff: Vec<f64> = xq.iter().zip(x).map(|(a, b)| a - b).collect();
    enumerate_multiindices(x.len(), order).iter().try_fold(0.0, |acc, s| {
        let d = derivs.get(s).ok_or_else(|| Error::MissingDerivative(s.exponents().to_vec()))?;
        Ok(acc + monomial_eval(&diff, s) / s.factorial() as f64 * d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
    }

    #[test]
    fn enumeration_small_cases() {
        assert_eq!(enumerate_multiindices(2, 1), vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1])]);
        assert_eq!(enumerate_multiindices(1, 2), vec![mi(&[0]), mi(&[1]), mi(&[2])]);
        // nested-loop count oracle
        let mut count = 0;
        for a in 0..=2u32 {
            for b in 0..=2u32 {
                for c in 0..=2u32 {
                    if a + b + c <= 2 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 10);
        assert_eq!(enumerate_multiindices(3, 2).len(), count);
        assert_eq!(enumerate_multiindices(2, 2)[3..], [mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]);
    }

    #[test]
    fn monomials() {
        assert_eq!(monomial_eval(&[2.0, 3.0], &mi(&[1, 2])), 18.0);
        assert_eq!(monomial_eval(&[-7.5, 1e6], &mi(&[0, 0])), 1.0);
        assert_eq!(monomial_eval(&[0.5, 0.5], &mi(&[2, 0])), 0.25);
        assert_eq!(mi(&[3, 2, 0]).factorial(), 12);
        assert_eq!(mi(&[20]).factorial(), 2_432_902_008_176_640_000);
    }

    #[test]
    fn taylor_small_cases() {
        let mut d = BTreeMap::new();
        d.insert(mi(&[0]), 3.0);
        assert_eq!(taylor_eval(&d, 0, &[0.0], &[5.0]).unwrap(), 3.0);
        d.insert(mi(&[0]), 1.0);
        d.insert(mi(&[1]), 2.0);
        assert_eq!(taylor_eval(&d, 1, &[1.0], &[2.0]).unwrap(), 3.0);
        assert_eq!(taylor_eval(&d, 2, &[1.0], &[2.0]), Err(Error::MissingDerivative(vec![2])));
    }

    #[test]
    fn taylor_reproduces_quadratic_2d() {
        // p(x, y) = 1 - 2x + 3y + 0.5x^2 - xy + 2y^2
        let p = |x: f64, y: f64| 1.0 - 2.0 * x + 3.0 * y + 0.5 * x * x - x * y + 2.0 * y * y;
        let (x0, y0) = (0.3, -1.2);
        let mut d = BTreeMap::new();
        d.insert(mi(&[0, 0]), p(x0, y0));
        d.insert(mi(&[1, 0]), -2.0 + x0 - y0);
        d.insert(mi(&[0, 1]), 3.0 - x0 + 4.0 * y0);
        d.insert(mi(&[2, 0]), 1.0);
        d.insert(mi(&[1, 1]), -1.0);
        d.insert(mi(&[0, 2]), 4.0);
        for &(xq, yq) in &[(1.0, 2.0), (-3.0, 0.5), (0.3, -1.2)] {
            let got = taylor_eval(&d, 2, &[x0, y0], &[xq, yq]).unwrap();
            assert!((got - p(xq, yq)).abs() <= 1e-12 * p(xq, yq).abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn enumeration_count_and_uniqueness(d in 1usize..=4, l in 0u32..=4) {
            let all = enumerate_multiindices(d, l);
            prop_assert_eq!(all.len() as u64, binomial(d as u64 + l as u64, l as u64));
            let set: std::collections::BTreeSet<_> = all.iter().cloned().collect();
            prop_assert_eq!(set.len(), all.len());
            prop_assert!(all.iter().all(|s| s.order() <= l && s.dim() == d));
            prop_assert!(all.windows(2).all(|w| w[0].order() <= w[1].order()));
        }

        #[test]
        fn taylor_exact_on_cubics_1d(c in proptest::collection::vec(-3.0f64..3.0, 4), x0 in -2.0f64..2.0, xq in -2.0f64..2.0) {
            let p = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            let mut d = BTreeMap::new();
            d.insert(mi(&[0]), p(x0));
            d.insert(mi(&[1]), c[1] + 2.0 * c[2] * x0 + 3.0 * c[3] * x0 * x0);
            d.insert(mi(&[2]), 2.0 * c[2] + 6.0 * c[3] * x0);
            d.insert(mi(&[3]), 6.0 * c[3]);
            let got = taylor_eval(&d, 3, &[x0], &[xq]).unwrap();
            prop_assert!((got - p(xq)).abs() <= 1e-12 * p(xq).abs().max(1.0) * 10.0);
        }
    }
}
