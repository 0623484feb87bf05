//! Multi-indices, multidegrees and coefficient keys.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;

use crate::error::{malformed, Result};

/// Sparse exponent vector `α`: sorted `(coordinate, exponent)` pairs with
/// every stored exponent positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<(usize, u32)>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// Builds an index from arbitrary pairs. Repeated coordinates are summed and
    /// zero exponents dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut v: Vec<(usize, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort_unstable_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, u32)> = Vec::with_capacity(v.len());
        for (i, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += e,
                _ => out.push((i, e)),
            }
        }
        MultiIndex(out)
    }

    /// Index of a dense exponent vector; position `j` holds the exponent of `x_j`.
    pub fn from_dense(exps: &[u32]) -> Self {
        MultiIndex(exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect())
    }

    pub fn var(i: usize) -> Self {
        MultiIndex(vec![(i, 1)])
    }

    /// `|α|`, the sum of the exponents.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn pairs(&self) -> &[(usize, u32)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.0.last().map(|&(i, _)| i)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.binary_search_by_key(&i, |&(j, _)| j).map(|k| self.0[k].1).unwrap_or(0)
    }

    /// Product of monomials, i.e. the sum of exponent vectors.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        MultiIndex(out)
    }

    /// Relabels coordinates through `map`. The map must be injective on the
    /// support, which keeps the result canonical after re-sorting.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> MultiIndex {
        MultiIndex::from_pairs(self.0.iter().map(|&(i, e)| (map(i), e)))
    }

    /// `α!` as a float, exact for the small exponents used here.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&(_, e)| factorial(e)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}:{e}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    i: usize,
    e: u32,
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<IndexEntry> = self.0.iter().map(|&(i, e)| IndexEntry { i, e }).collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<IndexEntry>::deserialize(d)?;
        let mut seen = std::collections::BTreeSet::new();
        for en in &entries {
            if en.e == 0 {
                return Err(serde::de::Error::custom(format!("zero exponent stored for coordinate {}", en.i)));
            }
            if !seen.insert(en.i) {
                return Err(serde::de::Error::custom(format!("coordinate {} repeated in multi-index", en.i)));
            }
        }
        Ok(MultiIndex::from_pairs(entries.into_iter().map(|en| (en.i, en.e))))
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `x^α = ∏ x_j^{α_j}`; the empty index gives one.
pub fn eval_monomial<T>(x: &[T], alpha: &MultiIndex) -> Result<T>
where
    T: Copy + One + Zero + Mul<Output = T>,
{
    if let Some(max) = alpha.max_coord() {
        if max >= x.len() {
            return Err(malformed(format!(
                "monomial {alpha} references coordinate {max} but the point has length {}",
                x.len()
            )));
        }
    }
    Ok(eval_monomial_unchecked(x, alpha))
}

#[inline]
pub(crate) fn eval_monomial_unchecked<T>(x: &[T], alpha: &MultiIndex) -> T
where
    T: Copy + One + Zero + Mul<Output = T>,
{
    alpha.0.iter().fold(T::one(), |acc, &(i, e)| acc * num_traits::pow(x[i], e as usize))
}

/// The tuple `(n₁,…,n_m)` of block degrees; `m ≥ 1` and every `nᵢ ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct MultiDegree(Vec<u32>);

impl MultiDegree {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(malformed("multidegree must have at least one block"));
        }
        if let Some(pos) = degrees.iter().position(|&n| n == 0) {
            return Err(malformed(format!("multidegree entry {pos} is zero")));
        }
        Ok(MultiDegree(degrees))
    }

    pub fn ones(m: usize) -> Result<Self> {
        MultiDegree::new(vec![1; m])
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn blocks(&self) -> usize {
        self.0.len()
    }

    /// `M = Σ nⱼ`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_multilinear(&self) -> bool {
        self.0.iter().all(|&n| n == 1)
    }
}

impl<'de> Deserialize<'de> for MultiDegree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        MultiDegree::new(Vec::<u32>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One multi-index per block, identifying a coefficient `c_{α⁽¹⁾…α⁽ᵐ⁾}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientKey(pub Vec<MultiIndex>);

impl CoefficientKey {
    pub fn new(alphas: Vec<MultiIndex>) -> Self {
        CoefficientKey(alphas)
    }

    pub fn alphas(&self) -> &[MultiIndex] {
        &self.0
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.0.iter().map(MultiIndex::degree).collect()
    }

    /// Blockwise product of the two monomials.
    pub fn mul(&self, other: &CoefficientKey) -> CoefficientKey {
        debug_assert_eq!(self.0.len(), other.0.len());
        CoefficientKey(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }
}

impl fmt::Display for CoefficientKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_examples() {
        assert_eq!(MultiIndex::from_pairs([(0, 2), (3, 1)]).degree(), 3);
        assert_eq!(MultiIndex::empty().degree(), 0);
        assert_eq!(MultiIndex::from_pairs([(5, 1)]).degree(), 1);
    }

    #[test]
    fn from_pairs_canonicalizes() {
        let a = MultiIndex::from_pairs([(3, 1), (0, 0), (1, 2), (3, 2)]);
        assert_eq!(a.pairs(), &[(1, 2), (3, 3)]);
        assert_eq!(a.exponent(3), 3);
        assert_eq!(a.exponent(0), 0);
    }

    #[test]
    fn eval_monomial_examples() {
        let a = MultiIndex::from_pairs([(0, 1), (1, 2)]);
        assert_eq!(eval_monomial(&[2.0, 3.0], &a).unwrap(), 18.0);
        assert_eq!(eval_monomial(&[7.0, -4.0], &MultiIndex::empty()).unwrap(), 1.0);
        assert_eq!(eval_monomial(&[0.0, 5.0], &MultiIndex::var(0)).unwrap(), 0.0);
    }

    #[test]
    fn eval_monomial_out_of_range() {
        let err = eval_monomial(&[1.0, 2.0], &MultiIndex::var(2)).unwrap_err();
        assert!(matches!(err, crate::Error::Malformed(_)));
    }

    #[test]
    fn multidegree_rejects_degenerate() {
        assert!(MultiDegree::new(vec![]).is_err());
        assert!(MultiDegree::new(vec![1, 0]).is_err());
        let md = MultiDegree::new(vec![2, 3]).unwrap();
        assert_eq!(md.total(), 5);
        assert!(!md.is_multilinear());
    }

    #[test]
    fn index_add_merges() {
        let a = MultiIndex::from_pairs([(0, 1), (2, 1)]);
        let b = MultiIndex::from_pairs([(1, 1), (2, 3)]);
        assert_eq!(a.add(&b), MultiIndex::from_pairs([(0, 1), (1, 1), (2, 4)]));
    }
}
