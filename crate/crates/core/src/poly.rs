//! The multipolynomial type: an `(n₁,…,n_m)`-homogeneous polynomial on
//! `𝕂^{d₁} × ⋯ × 𝕂^{d_m}` stored as a sparse coefficient map.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{malformed, shape, Error, Result};
use crate::expand::linear_form_power;
use crate::index::{eval_monomial_unchecked, CoefficientKey, MultiDegree, MultiIndex};
use crate::scalar::{Field, JsonScalar, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct MultiPolynomial {
    field: Field,
    multidegree: MultiDegree,
    dims: Vec<usize>,
    terms: BTreeMap<CoefficientKey, Scalar>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub key: Option<CoefficientKey>,
    pub reason: String,
}

/// Every broken invariant found by [`MultiPolynomial::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            match &v.key {
                Some(key) => write!(f, "term {key}: {}", v.reason)?,
                None => write!(f, "{}", v.reason)?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

impl From<ValidationReport> for Error {
    fn from(r: ValidationReport) -> Self {
        Error::Malformed(r.to_string())
    }
}

impl MultiPolynomial {
    /// Wraps raw parts without checking any invariant. Use [`validate`](Self::validate)
    /// before trusting the result.
    pub fn new_unchecked(
        field: Field,
        multidegree: MultiDegree,
        dims: Vec<usize>,
        terms: BTreeMap<CoefficientKey, Scalar>,
    ) -> Self {
        MultiPolynomial { field, multidegree, dims, terms }
    }

    pub fn zero(field: Field, multidegree: MultiDegree, dims: Vec<usize>) -> Result<Self> {
        Self::from_terms(field, multidegree, dims, std::iter::empty())
    }

    /// Accumulates repeated keys, drops exact zeros and validates.
    pub fn from_terms<I>(field: Field, multidegree: MultiDegree, dims: Vec<usize>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CoefficientKey, Scalar)>,
    {
        let mut map: BTreeMap<CoefficientKey, Scalar> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert_with(Scalar::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let p = MultiPolynomial { field, multidegree, dims, terms: map };
        p.validate()?;
        Ok(p)
    }

    /// Single-block polynomial of degree `n` on `𝕂^d` from `(α, c)` pairs.
    pub fn single_block<I>(field: Field, n: u32, d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Scalar)>,
    {
        Self::from_terms(
            field,
            MultiDegree::new(vec![n])?,
            vec![d],
            terms.into_iter().map(|(a, c)| (CoefficientKey::new(vec![a]), c)),
        )
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn multidegree(&self) -> &MultiDegree {
        &self.multidegree
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn blocks(&self) -> usize {
        self.multidegree.blocks()
    }

    pub fn terms(&self) -> &BTreeMap<CoefficientKey, Scalar> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &CoefficientKey) -> Scalar {
        self.terms.get(key).copied().unwrap_or_else(Scalar::zero)
    }

    pub fn same_shape(&self, other: &MultiPolynomial) -> bool {
        self.multidegree == other.multidegree && self.dims == other.dims
    }

    /// True when no coordinate appears with exponent above one in any term.
    pub fn is_multiaffine(&self) -> bool {
        self.terms.keys().all(|k| k.alphas().iter().all(|a| a.iter().all(|(_, e)| e <= 1)))
    }

    /// Checks the key, coefficient and shape invariants; collects every violation.
    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut violations = Vec::new();
        let m = self.multidegree.blocks();
        if self.dims.len() != m {
            violations.push(Violation {
                key: None,
                reason: format!("dims has {} entries but multidegree has {m} blocks", self.dims.len()),
            });
            return Err(ValidationReport { violations });
        }
        for (key, c) in &self.terms {
            let mut push = |reason: String| violations.push(Violation { key: Some(key.clone()), reason });
            if key.alphas().len() != m {
                push(format!("key has {} blocks, expected {m}", key.alphas().len()));
                continue;
            }
            for (b, alpha) in key.alphas().iter().enumerate() {
                let want = self.multidegree.degrees()[b];
                if alpha.degree() != want {
                    push(format!("block {b} degree {} != {want}", alpha.degree()));
                }
                if let Some(max) = alpha.max_coord() {
                    if max >= self.dims[b] {
                        push(format!("block {b} coordinate {max} out of range (dim {})", self.dims[b]));
                    }
                }
                if alpha.iter().any(|(_, e)| e == 0) {
                    push(format!("block {b} stores a zero exponent"));
                }
            }
            if c.is_zero() {
                push("stored coefficient is zero".to_string());
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                push("coefficient is not finite".to_string());
            }
            if self.field == Field::Real && c.im != 0.0 {
                push(format!("real field but coefficient has imaginary part {}", c.im));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { violations })
        }
    }

    fn check_points<T>(&self, xs: &[Vec<T>]) -> Result<()> {
        if xs.len() != self.blocks() {
            return Err(shape(format!("expected {} blocks of input, got {}", self.blocks(), xs.len())));
        }
        for (b, (x, &d)) in xs.iter().zip(&self.dims).enumerate() {
            if x.len() != d {
                return Err(shape(format!("block {b} has length {}, expected {d}", x.len())));
            }
        }
        Ok(())
    }

    /// `P(x⁽¹⁾,…,x⁽ᵐ⁾) = Σ c_α ∏ᵢ (x⁽ⁱ⁾)^{α⁽ⁱ⁾}`.
    pub fn eval(&self, xs: &[Vec<Scalar>]) -> Result<Scalar> {
        self.check_points(xs)?;
        Ok(self.terms.iter().fold(Scalar::zero(), |acc, (key, &c)| {
            acc + key
                .alphas()
                .iter()
                .zip(xs)
                .fold(c, |t, (alpha, x)| t * eval_monomial_unchecked(x, alpha))
        }))
    }

    /// Evaluation at real points. Only meaningful for the real field.
    pub fn eval_real(&self, xs: &[Vec<f64>]) -> Result<f64> {
        if self.field != Field::Real {
            return Err(Error::Unsupported("eval_real on a complex-field polynomial".into()));
        }
        self.check_points(xs)?;
        Ok(self.terms.iter().fold(0.0, |acc, (key, c)| {
            acc + key
                .alphas()
                .iter()
                .zip(xs)
                .fold(c.re, |t, (alpha, x)| t * eval_monomial_unchecked(x, alpha))
        }))
    }

    pub fn scale(&self, s: Scalar) -> Result<Self> {
        if self.field == Field::Real && s.im != 0.0 {
            return Err(Error::Unsupported("complex scalar applied to a real polynomial".into()));
        }
        Self::from_terms(
            self.field,
            self.multidegree.clone(),
            self.dims.clone(),
            self.terms.iter().map(|(k, &c)| (k.clone(), c * s)),
        )
    }

    /// `a·self + b·other` for polynomials of identical shape and field.
    pub fn lin_comb(&self, a: Scalar, other: &MultiPolynomial, b: Scalar) -> Result<Self> {
        if !self.same_shape(other) || self.field != other.field {
            return Err(shape("linear combination of polynomials with different shapes"));
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, &c)| (k.clone(), c * a))
            .chain(other.terms.iter().map(|(k, &c)| (k.clone(), c * b)));
        Self::from_terms(self.field, self.multidegree.clone(), self.dims.clone(), terms)
    }

    /// Reinterprets the polynomial over another field. Going to the real field
    /// requires every coefficient to be real.
    pub fn with_field(&self, field: Field) -> Result<Self> {
        if field == Field::Real && self.terms.values().any(|c| c.im != 0.0) {
            return Err(malformed("polynomial has complex coefficients and cannot be read as real"));
        }
        let mut p = self.clone();
        p.field = field;
        Ok(p)
    }

    /// Freezes every block except `block` at the given points, producing a
    /// single-block `n_block`-homogeneous polynomial.
    pub fn restrict_to_block(&self, block: usize, frozen: &[Vec<Scalar>]) -> Result<Self> {
        self.check_points(frozen)?;
        if block >= self.blocks() {
            return Err(malformed(format!("block {block} out of range")));
        }
        let terms = self.terms.iter().map(|(key, &c)| {
            let factor = key
                .alphas()
                .iter()
                .zip(frozen)
                .enumerate()
                .filter(|(b, _)| *b != block)
                .fold(c, |t, (_, (alpha, x))| t * eval_monomial_unchecked(x, alpha));
            (key.alphas()[block].clone(), factor)
        });
        let field = if frozen.iter().flatten().any(|x| x.im != 0.0) { Field::Complex } else { self.field };
        Self::single_block(field, self.multidegree.degrees()[block], self.dims[block], terms)
    }

    pub fn coeff_abs_sum(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `Σᵢ φᵢ⁽¹⁾(x₁)^{n₁} ⋯ φᵢ⁽ᵐ⁾(x_m)^{n_m} bᵢ` with scalar targets `bᵢ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FiniteTypeSpec {
    pub summands: Vec<FiniteTypeSummand>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteTypeSummand {
    #[serde(with = "crate::scalar::vec_of_vec")]
    pub functionals: Vec<Vec<Scalar>>,
    #[serde(with = "json_scalar")]
    pub target: Scalar,
}

mod json_scalar {
    use super::{JsonScalar, Scalar};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        JsonScalar(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        Ok(JsonScalar::deserialize(d)?.0)
    }
}

/// Expands a finite-type multipolynomial into coefficient form, block by block,
/// with the multinomial theorem.
pub fn finite_type(spec: &FiniteTypeSpec, multidegree: &MultiDegree, dims: &[usize], field: Field) -> Result<MultiPolynomial> {
    let m = multidegree.blocks();
    if dims.len() != m {
        return Err(shape(format!("dims has {} entries, multidegree has {m} blocks", dims.len())));
    }
    let mut terms: BTreeMap<CoefficientKey, Scalar> = BTreeMap::new();
    for (s, summand) in spec.summands.iter().enumerate() {
        if summand.functionals.len() != m {
            return Err(shape(format!("summand {s} has {} functionals, expected {m}", summand.functionals.len())));
        }
        let mut partial: Vec<(Vec<MultiIndex>, Scalar)> = vec![(Vec::with_capacity(m), summand.target)];
        for (b, phi) in summand.functionals.iter().enumerate() {
            if phi.len() != dims[b] {
                return Err(shape(format!(
                    "summand {s} functional {b} has length {}, expected {}",
                    phi.len(),
                    dims[b]
                )));
            }
            let form: Vec<(usize, Scalar)> = phi.iter().copied().enumerate().collect();
            let power = linear_form_power(&form, multidegree.degrees()[b]);
            partial = partial
                .into_iter()
                .flat_map(|(prefix, c)| {
                    power.iter().map(move |(alpha, pc)| {
                        let mut p = prefix.clone();
                        p.push(alpha.clone());
                        (p, c * pc)
                    })
                })
                .collect();
        }
        for (alphas, c) in partial {
            *terms.entry(CoefficientKey::new(alphas)).or_insert_with(Scalar::zero) += c;
        }
    }
    MultiPolynomial::from_terms(field, multidegree.clone(), dims.to_vec(), terms)
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    alphas: Vec<MultiIndex>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyWire {
    field: Field,
    multidegree: MultiDegree,
    dims: Vec<usize>,
    terms: Vec<TermWire>,
}

impl Serialize for MultiPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyWire {
            field: self.field,
            multidegree: self.multidegree.clone(),
            dims: self.dims.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermWire { alphas: k.alphas().to_vec(), re: c.re, im: c.im })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = PolyWire::deserialize(d)?;
        let mut terms = BTreeMap::new();
        for t in wire.terms {
            let key = CoefficientKey::new(t.alphas);
            if terms.insert(key.clone(), Scalar::new(t.re, t.im)).is_some() {
                return Err(D::Error::custom(format!("terms: key {key} appears twice")));
            }
        }
        let p = MultiPolynomial::new_unchecked(wire.field, wire.multidegree, wire.dims, terms);
        p.validate().map_err(|r| D::Error::custom(format!("terms: {r}")))?;
        Ok(p)
    }
}
