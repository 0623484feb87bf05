//! Sup-norm brackets over products of sup-norm unit balls, coefficient
//! `ℓ^p` norms and weak `ℓ_q` norms.
//!
//! Every block space carries the sup norm and the product carries the max
//! norm, so the domain of `‖P‖ = sup |P(x₁,…,x_m)|` is the unit cube (real)
//! or unit polydisc (complex) of the concatenated coordinates.

mod ascent;
mod checks;
pub(crate) mod flat;
mod univariate;
mod vertex;

use serde::{Deserialize, Serialize};

use crate::error::{malformed, shape, Error, Result};
use crate::poly::MultiPolynomial;
use crate::scalar::{Field, Scalar};

pub use checks::{
    ball_transfer_check, continuity_certificate, growth_ratio, transfer_factor, BallTransferReport, ContinuityReport,
};

/// Default vertex budget (log2 of the number of enumerated sign patterns).
pub const VERTEX_BUDGET_LOG2: u32 = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    VertexExact,
    BlockAscent,
    CoeffSum,
}

/// Certified bracket `lower ≤ ‖P‖ ≤ upper`; `|P(witness)| = lower`.
///
/// `method` names what closed the bracket: `vertex_exact` (exact enumeration,
/// `lower = upper`), `coeff_sum` (the ascent reached `Σ|c|`) or
/// `block_ascent` (open bracket between the ascent and `Σ|c|`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub method: NormMethod,
    #[serde(with = "crate::scalar::vec_of_vec")]
    pub witness: Vec<Vec<Scalar>>,
}

impl NormEstimate {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormOptions {
    pub starts: usize,
    /// Relative stagnation tolerance that ends an ascent run.
    pub tol: f64,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Try the exact vertex oracle first when the polynomial is real and multiaffine.
    pub exact: bool,
    pub vertex_budget_log2: u32,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            starts: 64,
            tol: 1e-10,
            seed: 0,
            max_sweeps: 200,
            exact: true,
            vertex_budget_log2: VERTEX_BUDGET_LOG2,
        }
    }
}

impl NormOptions {
    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn ascent_only(mut self) -> Self {
        self.exact = false;
        self
    }

    pub fn with_vertex_budget_log2(mut self, b: u32) -> Self {
        self.vertex_budget_log2 = b;
        self
    }
}

fn zero_estimate(p: &MultiPolynomial) -> NormEstimate {
    NormEstimate {
        lower: 0.0,
        upper: 0.0,
        method: NormMethod::VertexExact,
        witness: p.dims().iter().map(|&d| vec![Scalar::new(1.0, 0.0); d]).collect(),
    }
}

fn exact_estimate(p: &MultiPolynomial, closed: Option<Vec<usize>>, budget_log2: u32) -> Result<NormEstimate> {
    let res = vertex::vertex_exact(p, closed, budget_log2)?;
    let flat = flat::FlatPoly::new(p);
    let witness = flat.unflatten(&res.witness.iter().map(|&v| Scalar::new(v, 0.0)).collect::<Vec<_>>());
    Ok(NormEstimate { lower: res.value, upper: res.value, method: NormMethod::VertexExact, witness })
}

/// Exact norm of a real multilinear form (`nᵢ = 1` for all blocks).
///
/// Sign vertices of every block except the largest are enumerated and the
/// largest block is solved in closed form. Refuses when the enumeration
/// exceeds `2^22` patterns.
pub fn sup_norm_multilinear_exact(p: &MultiPolynomial) -> Result<NormEstimate> {
    sup_norm_multilinear_exact_with_budget(p, VERTEX_BUDGET_LOG2)
}

pub fn sup_norm_multilinear_exact_with_budget(p: &MultiPolynomial, budget_log2: u32) -> Result<NormEstimate> {
    if !p.multidegree().is_multilinear() {
        return Err(malformed(format!("multidegree {} is not all ones", p.multidegree())));
    }
    if p.field() != Field::Real {
        return Err(Error::Unsupported("exact vertex norm needs the real field; use block ascent".into()));
    }
    let dims = p.dims();
    // largest block, last one on ties
    let big = (0..dims.len()).rev().max_by_key(|&b| dims[b]).unwrap_or(0);
    let required: usize = dims.iter().sum::<usize>() - dims[big];
    if required as u32 > budget_log2 {
        return Err(Error::VertexBudget { required_log2: required as u32, budget_log2 });
    }
    if p.is_zero() {
        return Ok(zero_estimate(p));
    }
    let offset: usize = dims[..big].iter().sum();
    exact_estimate(p, Some((offset..offset + dims[big]).collect()), budget_log2)
}

/// Exact norm of any real polynomial that is affine in each coordinate.
pub fn sup_norm_vertex_exact(p: &MultiPolynomial, budget_log2: u32) -> Result<NormEstimate> {
    if p.field() != Field::Real {
        return Err(Error::Unsupported("exact vertex norm needs the real field; use block ascent".into()));
    }
    if p.is_zero() {
        return Ok(zero_estimate(p));
    }
    exact_estimate(p, None, budget_log2)
}

/// Relative allowance for the rounding in `Σ|c|` and in evaluations of `p`,
/// so that `Σ|c|` stays an upper bound for any computed value of `|p|`.
fn rounding_slack(p: &MultiPolynomial) -> f64 {
    4.0 * (p.num_terms() + p.multidegree().total() as usize + 2) as f64 * f64::EPSILON
}

/// Norm bracket with default options apart from `starts` and `tol`.
pub fn sup_norm_estimate(p: &MultiPolynomial, starts: usize, tol: f64) -> NormEstimate {
    sup_norm_estimate_with(p, &NormOptions { starts, tol, ..NormOptions::default() })
}

/// Lower bound from multi-start coordinate ascent (or the exact oracle when
/// allowed and applicable); upper bound `min(Σ|c|, exact)`.
pub fn sup_norm_estimate_with(p: &MultiPolynomial, opts: &NormOptions) -> NormEstimate {
    if p.is_zero() {
        return zero_estimate(p);
    }
    if opts.exact && p.field() == Field::Real && p.is_multiaffine() {
        if let Ok(est) = sup_norm_vertex_exact(p, opts.vertex_budget_log2) {
            return est;
        }
    }
    let flat = flat::FlatPoly::new(p);
    let run = ascent::multi_start(&flat, p.field() == Field::Complex, opts);
    let upper = (p.coeff_abs_sum() * (1.0 + rounding_slack(p))).max(run.value);
    let method = if run.value >= upper * (1.0 - 1e-12) { NormMethod::CoeffSum } else { NormMethod::BlockAscent };
    NormEstimate { lower: run.value, upper, method, witness: flat.unflatten(&run.witness) }
}

/// `(Σ |c_α|^p)^{1/p}` over the stored coefficients.
pub fn lp_coeff_norm(p: &MultiPolynomial, exponent: f64) -> Result<f64> {
    if !(exponent > 0.0) {
        return Err(malformed(format!("coefficient norm exponent must be positive, got {exponent}")));
    }
    Ok(p.terms().values().map(|c| c.norm().powf(exponent)).sum::<f64>().powf(1.0 / exponent))
}

/// A finite vector family in one sup-norm block space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakNormInput {
    #[serde(with = "crate::scalar::vec_of_vec")]
    pub family: Vec<Vec<Scalar>>,
    pub q: f64,
}

/// `sup_{‖φ‖ ≤ 1} (Σⱼ |φ(xⱼ)|^q)^{1/q}`. On a sup-norm space the dual ball is
/// the `ℓ¹` ball whose extreme points are `±e_k`, and the supremum of the
/// convex function `φ ↦ (Σ|φ(xⱼ)|^q)^{1/q}` (for `q ≥ 1`) is attained there,
/// giving `max_k (Σⱼ |x_{j,k}|^q)^{1/q}`.
pub fn weak_lq_norm(input: &WeakNormInput) -> Result<f64> {
    if !(input.q > 0.0) {
        return Err(malformed(format!("weak norm exponent must be positive, got {}", input.q)));
    }
    let Some(first) = input.family.first() else {
        return Ok(0.0);
    };
    let d = first.len();
    if input.family.iter().any(|x| x.len() != d) {
        return Err(shape("weak norm family has vectors of different lengths"));
    }
    Ok((0..d)
        .map(|k| input.family.iter().map(|x| x[k].norm().powf(input.q)).sum::<f64>().powf(1.0 / input.q))
        .fold(0.0, f64::max))
}
