#![allow(dead_code)]

use multipoly::compose::{LinearMap, VectorMultiPolynomial};
use multipoly::expand::weak_compositions;
use multipoly::{CoefficientKey, Field, MultiDegree, MultiIndex, MultiPolynomial, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scalar<R: Rng>(rng: &mut R, field: Field) -> Scalar {
    let im = if field == Field::Complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
    Scalar::new(rng.gen_range(-1.0..1.0), im)
}

/// Every coefficient key of the given shape.
pub fn all_keys(md: &MultiDegree, dims: &[usize]) -> Vec<CoefficientKey> {
    let mut keys = vec![Vec::<MultiIndex>::new()];
    for (&n, &d) in md.degrees().iter().zip(dims) {
        let block: Vec<MultiIndex> = weak_compositions(n, d).iter().map(|e| MultiIndex::from_dense(e)).collect();
        keys = keys
            .into_iter()
            .flat_map(|k| {
                block.iter().map(move |a| {
                    let mut k = k.clone();
                    k.push(a.clone());
                    k
                })
            })
            .collect();
    }
    keys.into_iter().map(CoefficientKey::new).collect()
}

/// Random polynomial keeping each monomial with probability `density`
/// (at least one term is always kept).
pub fn poly<R: Rng>(rng: &mut R, field: Field, md: &MultiDegree, dims: &[usize], density: f64) -> MultiPolynomial {
    let keys = all_keys(md, dims);
    let forced = rng.gen_range(0..keys.len());
    let mut terms = Vec::new();
    for (i, k) in keys.into_iter().enumerate() {
        if i == forced || rng.gen_bool(density) {
            terms.push((k, scalar(rng, field)));
        }
    }
    MultiPolynomial::from_terms(field, md.clone(), dims.to_vec(), terms).unwrap()
}

pub fn point<R: Rng>(rng: &mut R, dims: &[usize], field: Field) -> Vec<Vec<Scalar>> {
    dims.iter().map(|&d| (0..d).map(|_| scalar(rng, field)).collect()).collect()
}

pub fn map<R: Rng>(rng: &mut R, rows: usize, cols: usize, field: Field) -> LinearMap {
    LinearMap::new((0..rows).map(|_| (0..cols).map(|_| scalar(rng, field)).collect()).collect()).unwrap()
}

pub fn vector<R: Rng>(rng: &mut R, outputs: usize, field: Field, md: &MultiDegree, dims: &[usize], density: f64) -> VectorMultiPolynomial {
    VectorMultiPolynomial::new((0..outputs).map(|_| poly(rng, field, md, dims, density)).collect()).unwrap()
}

pub fn max_coeff_diff(a: &MultiPolynomial, b: &MultiPolynomial) -> f64 {
    a.terms()
        .keys()
        .chain(b.terms().keys())
        .map(|k| (a.coeff(k) - b.coeff(k)).norm())
        .fold(0.0, f64::max)
}

pub fn rel_err(a: Scalar, b: Scalar) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
