//! Multinomial expansion machinery shared by finite-type construction,
//! composition and coefficient recovery.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::index::{CoefficientKey, MultiIndex};
use crate::scalar::Scalar;

/// Default cap on intermediate monomials during an expansion.
pub const TERM_BUDGET: usize = 1_000_000;

/// All weak compositions of `n` into `d` parts, in lexicographically
/// decreasing order of the first part (so `(n,0,…,0)` comes first).
pub fn weak_compositions(n: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if d == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=n).rev() {
            prefix.push(first);
            rec(n - first, d - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Number of monomials of degree `n` in `d` variables, `C(n+d-1, d-1)`.
pub fn count_monomials(n: u32, d: usize) -> usize {
    if d == 0 {
        return usize::from(n == 0);
    }
    binomial(n as u64 + d as u64 - 1, d as u64 - 1) as usize
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `|α|! / α!` computed in exact integer arithmetic.
pub fn multinomial(exps: impl IntoIterator<Item = u32>) -> u128 {
    let mut total = 0u64;
    let mut acc: u128 = 1;
    for e in exps {
        total += e as u64;
        acc *= binomial(total, e as u64);
    }
    acc
}

/// Expands `(Σ_k c_k x_{i_k})^n` by the multinomial theorem. Zero entries of
/// the form are skipped; the integer multinomial is applied last, once per term.
pub fn linear_form_power(form: &[(usize, Scalar)], n: u32) -> Vec<(MultiIndex, Scalar)> {
    let support: Vec<(usize, Scalar)> = form.iter().copied().filter(|(_, c)| !c.is_zero()).collect();
    if n == 0 {
        return vec![(MultiIndex::empty(), Scalar::new(1.0, 0.0))];
    }
    if support.is_empty() {
        return Vec::new();
    }
    weak_compositions(n, support.len())
        .into_iter()
        .map(|comp| {
            let powers = support
                .iter()
                .zip(&comp)
                .fold(Scalar::new(1.0, 0.0), |acc, (&(_, c), &k)| acc * c.powu(k));
            let count = multinomial(comp.iter().copied()) as f64;
            let idx = MultiIndex::from_pairs(support.iter().zip(&comp).map(|(&(i, _), &k)| (i, k)));
            (idx, powers * count)
        })
        .collect()
}

/// Sparse multi-block polynomial used as an expansion workspace. Zero
/// coefficients may be present transiently; callers canonicalize at the end.
pub type SparseTerms = BTreeMap<CoefficientKey, Scalar>;

pub(crate) struct Budget {
    used: usize,
    limit: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Budget { used: 0, limit }
    }

    pub fn charge(&mut self, n: usize) -> Result<()> {
        self.used = self.used.saturating_add(n);
        if self.used > self.limit {
            return Err(Error::TermBudget { required: self.used, budget: self.limit });
        }
        Ok(())
    }
}

pub(crate) fn sparse_mul(a: &SparseTerms, b: &SparseTerms, budget: &mut Budget) -> Result<SparseTerms> {
    budget.charge(a.len().saturating_mul(b.len()))?;
    let mut out = SparseTerms::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            *out.entry(ka.mul(kb)).or_insert_with(Scalar::zero) += ca * cb;
        }
    }
    Ok(out)
}

pub(crate) fn sparse_one(blocks: usize) -> SparseTerms {
    let mut out = SparseTerms::new();
    out.insert(CoefficientKey::new(vec![MultiIndex::empty(); blocks]), Scalar::new(1.0, 0.0));
    out
}

/// `base^e` with a cache of previously computed powers of the same base.
pub(crate) fn sparse_pow_cached(
    cache: &mut Vec<SparseTerms>,
    e: u32,
    budget: &mut Budget,
) -> Result<SparseTerms> {
    // cache[0] = base^1, cache[k] = base^(k+1)
    while cache.len() < e as usize {
        let next = sparse_mul(cache.last().expect("cache seeded with base"), &cache[0], budget)?;
        cache.push(next);
    }
    Ok(cache[e as usize - 1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_count_and_order() {
        let c = weak_compositions(2, 3);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![2, 0, 0]);
        assert_eq!(c.last().unwrap(), &vec![0, 0, 2]);
        for (n, d) in [(3u32, 4usize), (5, 8), (1, 1), (0, 3)] {
            assert_eq!(weak_compositions(n, d).len(), count_monomials(n, d));
        }
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial([1, 1]), 2);
        assert_eq!(multinomial([2, 1]), 3);
        assert_eq!(multinomial([2, 2, 2]), 90);
        assert_eq!(multinomial([12]), 1);
    }

    #[test]
    fn square_of_sum() {
        let one = Scalar::new(1.0, 0.0);
        let terms = linear_form_power(&[(0, one), (1, one)], 2);
        let map: BTreeMap<_, _> = terms.into_iter().collect();
        assert_eq!(map[&MultiIndex::from_pairs([(0, 2)])].re, 1.0);
        assert_eq!(map[&MultiIndex::from_pairs([(0, 1), (1, 1)])].re, 2.0);
        assert_eq!(map[&MultiIndex::from_pairs([(1, 2)])].re, 1.0);
    }
}
