//! Polynomial flattened onto one global coordinate vector: block `b`
//! occupies `offsets[b] .. offsets[b] + dims[b]`. The product of sup-norm
//! unit balls is then the unit cube of the global space.

use crate::poly::MultiPolynomial;
use crate::scalar::Scalar;

pub(crate) struct FlatTerm {
    pub coef: Scalar,
    pub vars: Vec<(usize, u32)>,
}

pub(crate) struct FlatPoly {
    pub dim: usize,
    pub offsets: Vec<usize>,
    pub dims: Vec<usize>,
    pub terms: Vec<FlatTerm>,
    /// Terms containing each coordinate.
    pub occ: Vec<Vec<usize>>,
    /// Largest exponent of each coordinate.
    pub max_exp: Vec<u32>,
}

impl FlatPoly {
    pub fn new(p: &MultiPolynomial) -> Self {
        let dims = p.dims().to_vec();
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        let dim = acc;
        let terms: Vec<FlatTerm> = p
            .terms()
            .iter()
            .map(|(key, &coef)| FlatTerm {
                coef,
                vars: key
                    .alphas()
                    .iter()
                    .zip(&offsets)
                    .flat_map(|(alpha, &off)| alpha.iter().map(move |(i, e)| (off + i, e)))
                    .collect(),
            })
            .collect();
        let mut occ = vec![Vec::new(); dim];
        let mut max_exp = vec![0; dim];
        for (t, term) in terms.iter().enumerate() {
            for &(v, e) in &term.vars {
                occ[v].push(t);
                max_exp[v] = max_exp[v].max(e);
            }
        }
        FlatPoly { dim, offsets, dims, terms, occ, max_exp }
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.vars.iter().fold(t.coef.re, |acc, &(v, e)| acc * x[v].powi(e as i32)))
            .sum()
    }

    pub fn eval_complex(&self, x: &[Scalar]) -> Scalar {
        self.terms
            .iter()
            .map(|t| t.vars.iter().fold(t.coef, |acc, &(v, e)| acc * x[v].powu(e)))
            .sum()
    }

    /// Splits a global vector back into per-block vectors.
    pub fn unflatten<T: Copy>(&self, x: &[T]) -> Vec<Vec<T>> {
        self.offsets.iter().zip(&self.dims).map(|(&o, &d)| x[o..o + d].to_vec()).collect()
    }
}
