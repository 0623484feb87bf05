//! Symmetric multilinear forms and their diagonal polynomials.
//!
//! A form `A` of arity `n` on `𝕂^d` is stored by its values on sorted basis
//! tuples `A(e_{i₁},…,e_{iₙ})`, `i₁ ≤ … ≤ iₙ`. Its diagonal `Â(x) = A(x,…,x)`
//! has monomial coefficients `c_α = A(sorted α)·n!/α!`.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{malformed, shape, Error, Result};
use crate::expand::TERM_BUDGET;
use crate::index::{factorial, CoefficientKey, MultiDegree, MultiIndex};
use crate::norms::{sup_norm_estimate_with, NormEstimate, NormOptions};
use crate::poly::MultiPolynomial;
use crate::scalar::{Field, Scalar};

/// Largest degree for which the `2^n` sign sum is enumerated.
pub const MAX_POLARIZATION_DEGREE: u32 = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricForm {
    arity: u32,
    dim: usize,
    entries: BTreeMap<Vec<usize>, Scalar>,
}

fn key_of(alpha: &MultiIndex) -> Vec<usize> {
    alpha.iter().flat_map(|(i, e)| std::iter::repeat(i).take(e as usize)).collect()
}

fn alpha_of(key: &[usize]) -> MultiIndex {
    MultiIndex::from_pairs(key.iter().map(|&i| (i, 1)))
}

impl SymmetricForm {
    pub fn zero(arity: u32, dim: usize) -> Self {
        SymmetricForm { arity, dim, entries: BTreeMap::new() }
    }

    /// Builds a form from tuple values; unsorted tuples are canonicalized and
    /// repeated tuples must agree.
    pub fn new<I>(arity: u32, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        if arity == 0 {
            return Err(malformed("arity must be at least 1"));
        }
        let mut map = BTreeMap::new();
        for (mut key, v) in entries {
            if key.len() != arity as usize {
                return Err(malformed(format!("entries: key {key:?} has length {}, expected {arity}", key.len())));
            }
            if let Some(&i) = key.iter().find(|&&i| i >= dim) {
                return Err(malformed(format!("entries: index {i} out of range for dim {dim}")));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(malformed(format!("entries: non-finite value at {key:?}")));
            }
            key.sort_unstable();
            if let Some(prev) = map.insert(key.clone(), v) {
                if prev != v {
                    return Err(malformed(format!("entries: conflicting values for {key:?}")));
                }
            }
        }
        map.retain(|_, v: &mut Scalar| *v != Scalar::new(0.0, 0.0));
        Ok(SymmetricForm { arity, dim, entries: map })
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, Scalar> {
        &self.entries
    }

    /// Value on an arbitrary basis tuple.
    pub fn get(&self, tuple: &[usize]) -> Scalar {
        let mut key = tuple.to_vec();
        key.sort_unstable();
        self.entries.get(&key).copied().unwrap_or_default()
    }

    pub fn field(&self) -> Field {
        if self.entries.values().any(|v| v.im != 0.0) {
            Field::Complex
        } else {
            Field::Real
        }
    }

    /// The form as an `n`-block multilinear polynomial on `(𝕂^d)^n`.
    pub fn to_multilinear(&self) -> Result<MultiPolynomial> {
        self.to_multilinear_in(self.field())
    }

    pub fn to_multilinear_in(&self, field: Field) -> Result<MultiPolynomial> {
        let n = self.arity as usize;
        let mut terms = Vec::new();
        for (key, &v) in &self.entries {
            let mut perm = key.clone();
            // every distinct ordering of the sorted key
            loop {
                terms.push((CoefficientKey::new(perm.iter().map(|&i| MultiIndex::var(i)).collect()), v));
                if terms.len() > TERM_BUDGET {
                    return Err(Error::TermBudget { required: terms.len(), budget: TERM_BUDGET });
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        MultiPolynomial::from_terms(field, MultiDegree::ones(n)?, vec![self.dim; n], terms)
    }

    /// `A(x₁,…,xₙ)`.
    pub fn eval(&self, xs: &[Vec<Scalar>]) -> Result<Scalar> {
        if xs.len() != self.arity as usize || xs.iter().any(|x| x.len() != self.dim) {
            return Err(shape(format!("form of arity {} on dim {} got {} vectors", self.arity, self.dim, xs.len())));
        }
        let mut total = Scalar::new(0.0, 0.0);
        for (key, &v) in &self.entries {
            let mut perm = key.clone();
            loop {
                total += perm.iter().zip(xs).fold(v, |acc, (&i, x)| acc * x[i]);
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Serialize, Deserialize)]
struct EntryWire {
    key: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FormWire {
    arity: u32,
    dim: usize,
    entries: Vec<EntryWire>,
}

impl Serialize for SymmetricForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormWire {
            arity: self.arity,
            dim: self.dim,
            entries: self.entries.iter().map(|(k, v)| EntryWire { key: k.clone(), re: v.re, im: v.im }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = FormWire::deserialize(d)?;
        if let Some(e) = w.entries.iter().find(|e| !e.key.windows(2).all(|p| p[0] <= p[1])) {
            return Err(serde::de::Error::custom(format!("entries: key {:?} is not sorted", e.key)));
        }
        let n = w.entries.len();
        let form = SymmetricForm::new(w.arity, w.dim, w.entries.into_iter().map(|e| (e.key, Scalar::new(e.re, e.im))))
            .map_err(serde::de::Error::custom)?;
        let nonzero = form.entries.len();
        if nonzero != n {
            return Err(serde::de::Error::custom("entries: duplicate or zero entries"));
        }
        Ok(form)
    }
}

fn single_block_degree(p: &MultiPolynomial) -> Result<(u32, usize)> {
    if p.blocks() != 1 {
        return Err(shape(format!("expected a single-block polynomial, got {} blocks", p.blocks())));
    }
    Ok((p.multidegree().degrees()[0], p.dims()[0]))
}

/// `1/(n!2^n) Σ_{ε∈{±1}ⁿ} ε₁⋯εₙ P̂(x₀ + Σ εⱼxⱼ)`, which equals the symmetric
/// form `A(x₁,…,xₙ)` for every `x₀`.
pub fn polarization_value(p: &MultiPolynomial, x0: &[Scalar], xs: &[Vec<Scalar>]) -> Result<Scalar> {
    let (n, d) = single_block_degree(p)?;
    if n > MAX_POLARIZATION_DEGREE {
        return Err(Error::Unsupported(format!("polarization degree {n} exceeds {MAX_POLARIZATION_DEGREE}")));
    }
    if xs.len() != n as usize {
        return Err(shape(format!("degree {n} needs {n} vectors, got {}", xs.len())));
    }
    if x0.len() != d || xs.iter().any(|x| x.len() != d) {
        return Err(shape(format!("all vectors must have length {d}")));
    }
    let mut total = Scalar::new(0.0, 0.0);
    let mut point = vec![Scalar::new(0.0, 0.0); d];
    for mask in 0u32..(1 << n) {
        point.copy_from_slice(x0);
        for (j, x) in xs.iter().enumerate() {
            let sign = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
            for (pt, &v) in point.iter_mut().zip(x) {
                *pt += v * sign;
            }
        }
        let value = p.eval(std::slice::from_ref(&point))?;
        if mask.count_ones() % 2 == 1 {
            total -= value;
        } else {
            total += value;
        }
    }
    Ok(total / (factorial(n) * 2f64.powi(n as i32)))
}

/// The unique symmetric form whose diagonal is `p`.
pub fn to_symmetric_form(p: &MultiPolynomial) -> Result<SymmetricForm> {
    let (n, d) = single_block_degree(p)?;
    let nf = factorial(n);
    let entries = p.terms().iter().map(|(key, &c)| {
        let alpha = &key.alphas()[0];
        (key_of(alpha), c * alpha.factorial() / nf)
    });
    SymmetricForm::new(n, d, entries)
}

/// The diagonal `Â(x) = A(x,…,x)` as a single-block polynomial.
pub fn poly_from_form(a: &SymmetricForm) -> Result<MultiPolynomial> {
    let nf = factorial(a.arity);
    let terms = a.entries.iter().map(|(key, &v)| {
        let alpha = alpha_of(key);
        let c = v * nf / alpha.factorial();
        (CoefficientKey::new(vec![alpha]), c)
    });
    MultiPolynomial::from_terms(a.field(), MultiDegree::new(vec![a.arity])?, vec![a.dim], terms)
}

/// `m^m/m!`
pub fn polarization_constant(m: u32) -> f64 {
    (m as f64).powi(m as i32) / factorial(m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormNormReport {
    pub arity: u32,
    pub factor: f64,
    /// Bracket for `‖Â‖`.
    pub diagonal: NormEstimate,
    /// Bracket for `‖A‖`.
    pub form: NormEstimate,
    /// `lower‖Â‖ ≤ upper‖A‖·(1+tol)`
    pub diagonal_le_form: bool,
    /// `lower‖A‖ ≤ (m^m/m!)·upper‖Â‖·(1+tol)`
    pub form_le_factor_diagonal: bool,
}

impl FormNormReport {
    pub fn pass(&self) -> bool {
        self.diagonal_le_form && self.form_le_factor_diagonal
    }
}

/// Brackets `‖Â‖` and `‖A‖` and checks `‖Â‖ ≤ ‖A‖ ≤ (m^m/m!)‖Â‖` on the
/// certified ends of the brackets.
pub fn form_norm_bounds(a: &SymmetricForm, opts: &NormOptions, tol: f64) -> Result<FormNormReport> {
    let field = a.field();
    let diagonal = sup_norm_estimate_with(&poly_from_form(a)?, opts);
    let form = sup_norm_estimate_with(&a.to_multilinear_in(field)?, opts);
    let factor = polarization_constant(a.arity);
    Ok(FormNormReport {
        arity: a.arity,
        factor,
        diagonal_le_form: diagonal.lower <= form.upper * (1.0 + tol),
        form_le_factor_diagonal: form.lower <= factor * diagonal.upper * (1.0 + tol),
        diagonal,
        form,
    })
}
