//! Composition of multipolynomials with linear maps and with other
//! multipolynomials, and sampling checks of the associated norm inequalities.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{malformed, shape, Error, Result};
use crate::expand::{linear_form_power, sparse_mul, sparse_one, sparse_pow_cached, Budget, SparseTerms, TERM_BUDGET};
use crate::index::{CoefficientKey, MultiDegree, MultiIndex};
use crate::norms::{sup_norm_estimate_with, weak_lq_norm, NormEstimate, NormMethod, NormOptions, WeakNormInput};
use crate::poly::MultiPolynomial;
use crate::scalar::{Field, Scalar};

fn zero() -> Scalar {
    Scalar::new(0.0, 0.0)
}

/// Dense matrix acting on sup-normed coordinate spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Scalar>>,
}

impl LinearMap {
    pub fn new(entries: Vec<Vec<Scalar>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        Self::with_shape(rows, cols, entries)
    }

    pub fn with_shape(rows: usize, cols: usize, entries: Vec<Vec<Scalar>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(malformed("linear map must have at least one row and one column"));
        }
        if entries.len() != rows {
            return Err(malformed(format!("entries: {} rows, expected {rows}", entries.len())));
        }
        if let Some((i, r)) = entries.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(malformed(format!("entries: row {i} has {} columns, expected {cols}", r.len())));
        }
        if entries.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(malformed("entries: non-finite value"));
        }
        Ok(LinearMap { rows, cols, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Scalar::new(1.0, 0.0))
    }

    pub fn scalar(n: usize, lambda: Scalar) -> Self {
        let entries = (0..n).map(|i| (0..n).map(|j| if i == j { lambda } else { zero() }).collect()).collect();
        LinearMap { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Vec<Scalar>] {
        &self.entries
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.im == 0.0)
    }

    pub fn apply(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() != self.cols {
            return Err(shape(format!("map with {} columns applied to a vector of length {}", self.cols, x.len())));
        }
        Ok(self.entries.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect())
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap> {
        if self.cols != other.rows {
            return Err(shape(format!("cannot compose {}x{} after {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let entries = self
            .entries
            .iter()
            .map(|row| {
                (0..other.cols).map(|j| row.iter().zip(&other.entries).map(|(a, r)| a * r[j]).sum()).collect()
            })
            .collect();
        Ok(LinearMap { rows: self.rows, cols: other.cols, entries })
    }

    /// Operator norm between sup-norm spaces: the largest row `ℓ¹` norm.
    pub fn op_norm(&self) -> f64 {
        self.entries.iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct LinearMapWire {
    rows: usize,
    cols: usize,
    #[serde(with = "crate::scalar::vec_of_vec")]
    entries: Vec<Vec<Scalar>>,
}

impl Serialize for LinearMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LinearMapWire { rows: self.rows, cols: self.cols, entries: self.entries.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = LinearMapWire::deserialize(d)?;
        LinearMap::with_shape(w.rows, w.cols, w.entries).map_err(serde::de::Error::custom)
    }
}

/// A multipolynomial with values in `𝕂^k`, one scalar component per output
/// coordinate. The output space carries the sup norm.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorMultiPolynomial {
    components: Vec<MultiPolynomial>,
}

impl VectorMultiPolynomial {
    pub fn new(components: Vec<MultiPolynomial>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(malformed("components: at least one component is required"));
        };
        if let Some(i) = components.iter().position(|c| !c.same_shape(first)) {
            return Err(malformed(format!("components: component {i} differs in field, multidegree or dims")));
        }
        Ok(VectorMultiPolynomial { components })
    }

    pub fn scalar(p: MultiPolynomial) -> Self {
        VectorMultiPolynomial { components: vec![p] }
    }

    pub fn components(&self) -> &[MultiPolynomial] {
        &self.components
    }

    pub fn into_components(self) -> Vec<MultiPolynomial> {
        self.components
    }

    pub fn outputs(&self) -> usize {
        self.components.len()
    }

    pub fn field(&self) -> Field {
        self.components[0].field()
    }

    pub fn multidegree(&self) -> &MultiDegree {
        self.components[0].multidegree()
    }

    pub fn dims(&self) -> &[usize] {
        self.components[0].dims()
    }

    pub fn eval(&self, xs: &[Vec<Scalar>]) -> Result<Vec<Scalar>> {
        self.components.iter().map(|c| c.eval(xs)).collect()
    }

    /// `‖P‖ = max_c ‖P_c‖`; the witness comes from the component with the
    /// largest lower bound (first one on ties).
    pub fn norm_estimate(&self, opts: &NormOptions) -> NormEstimate {
        let ests: Vec<NormEstimate> = self.components.iter().map(|c| sup_norm_estimate_with(c, opts)).collect();
        let upper = ests.iter().map(|e| e.upper).fold(0.0, f64::max);
        let best = ests.iter().fold(&ests[0], |b, e| if e.lower > b.lower { e } else { b });
        let method = if ests.iter().all(|e| e.method == NormMethod::VertexExact) {
            NormMethod::VertexExact
        } else if best.lower >= upper * (1.0 - 1e-12) {
            NormMethod::CoeffSum
        } else {
            NormMethod::BlockAscent
        };
        NormEstimate { lower: best.lower, upper: upper.max(best.lower), method, witness: best.witness.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct VectorWire {
    components: Vec<MultiPolynomial>,
}

impl Serialize for VectorMultiPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorWire { components: self.components.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorMultiPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = VectorWire::deserialize(d)?;
        VectorMultiPolynomial::new(w.components).map_err(serde::de::Error::custom)
    }
}

fn joint_field(real: bool) -> Field {
    if real {
        Field::Real
    } else {
        Field::Complex
    }
}

type IndexMap = BTreeMap<MultiIndex, Scalar>;

fn mul_index_maps(a: &IndexMap, b: &IndexMap, budget: &mut Budget) -> Result<IndexMap> {
    budget.charge(a.len().saturating_mul(b.len()))?;
    let mut out = IndexMap::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            *out.entry(ka.add(kb)).or_insert_with(zero) += ca * cb;
        }
    }
    Ok(out)
}

/// `x^α` with `x = u y`, expanded in `y`.
fn substitute_monomial(alpha: &MultiIndex, u: &LinearMap, budget: &mut Budget) -> Result<IndexMap> {
    let mut acc = IndexMap::from([(MultiIndex::empty(), Scalar::new(1.0, 0.0))]);
    for (i, e) in alpha.iter() {
        let form: Vec<(usize, Scalar)> = u.entries[i].iter().copied().enumerate().collect();
        let power: IndexMap = linear_form_power(&form, e).into_iter().collect();
        acc = mul_index_maps(&acc, &power, budget)?;
    }
    Ok(acc)
}

/// `t ∘ P ∘ (u₁,…,u_m)`, expanded coefficientwise.
pub fn compose_linear(t: &LinearMap, p: &VectorMultiPolynomial, us: &[LinearMap]) -> Result<VectorMultiPolynomial> {
    if us.len() != p.dims().len() {
        return Err(shape(format!("{} inner maps for {} blocks", us.len(), p.dims().len())));
    }
    for (j, (u, &d)) in us.iter().zip(p.dims()).enumerate() {
        if u.rows != d {
            return Err(shape(format!("inner map {j} has {} rows, block has dim {d}", u.rows)));
        }
    }
    if t.cols != p.outputs() {
        return Err(shape(format!("outer map has {} columns, polynomial has {} outputs", t.cols, p.outputs())));
    }
    let field =
        joint_field(p.field() == Field::Real && t.is_real() && us.iter().all(LinearMap::is_real));
    let mut budget = Budget::new(TERM_BUDGET);
    let mut cache: Vec<BTreeMap<MultiIndex, IndexMap>> = vec![BTreeMap::new(); us.len()];
    let mut inner: Vec<SparseTerms> = Vec::with_capacity(p.outputs());
    for comp in p.components() {
        let mut acc = SparseTerms::new();
        for (key, &c) in comp.terms() {
            let mut partial: Vec<(Vec<MultiIndex>, Scalar)> = vec![(Vec::new(), c)];
            for (j, alpha) in key.alphas().iter().enumerate() {
                if !cache[j].contains_key(alpha) {
                    let expanded = substitute_monomial(alpha, &us[j], &mut budget)?;
                    cache[j].insert(alpha.clone(), expanded);
                }
                let expanded = &cache[j][alpha];
                budget.charge(partial.len().saturating_mul(expanded.len()))?;
                partial = partial
                    .iter()
                    .flat_map(|(idx, v)| {
                        expanded.iter().map(move |(a, w)| {
                            let mut idx = idx.clone();
                            idx.push(a.clone());
                            (idx, v * w)
                        })
                    })
                    .collect();
            }
            for (idx, v) in partial {
                *acc.entry(CoefficientKey::new(idx)).or_insert_with(zero) += v;
            }
        }
        inner.push(acc);
    }
    let dims: Vec<usize> = us.iter().map(|u| u.cols).collect();
    let components = t
        .entries
        .iter()
        .map(|row| {
            let mut acc = SparseTerms::new();
            for (w, terms) in row.iter().zip(&inner) {
                if *w == zero() {
                    continue;
                }
                for (k, v) in terms {
                    *acc.entry(k.clone()).or_insert_with(zero) += w * v;
                }
            }
            MultiPolynomial::from_terms(field, p.multidegree().clone(), dims.clone(), acc)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorMultiPolynomial::new(components)
}

/// Norm comparison for one composite. Only `lhs_lower` can falsify the
/// inequality, so `pass` is decided on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs_lower: f64,
    pub lhs_upper: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `‖t∘P∘(u₁,…,u_m)‖ ≤ ‖t‖·‖P‖·∏‖u_j‖^{n_j}`
pub fn ideal_inequality_report(
    t: &LinearMap,
    p: &VectorMultiPolynomial,
    us: &[LinearMap],
    opts: &NormOptions,
    tol: f64,
) -> Result<InequalityReport> {
    let composite = compose_linear(t, p, us)?;
    let lhs = composite.norm_estimate(opts);
    let inner: f64 = us.iter().zip(p.multidegree().degrees()).map(|(u, &n)| u.op_norm().powi(n as i32)).product();
    let rhs = t.op_norm() * p.norm_estimate(opts).upper * inner;
    Ok(InequalityReport { lhs_lower: lhs.lower, lhs_upper: lhs.upper, rhs, pass: lhs.lower <= rhs * (1.0 + tol) })
}

/// Constants for the hyper-ideal inequality, indexed from 1. Entries past
/// the end of a list are 1, so the default (empty lists) is `C_j = K_j = 1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperIneqConfig {
    #[serde(default)]
    pub c_seq: Vec<f64>,
    #[serde(default)]
    pub k_seq: Vec<f64>,
    #[serde(default)]
    pub tol: f64,
}

impl HyperIneqConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, seq) in [("c_seq", &self.c_seq), ("k_seq", &self.k_seq)] {
            if seq.iter().any(|&v| !(v >= 1.0)) {
                return Err(malformed(format!("{name}: entries must be at least 1")));
            }
            if seq.first().is_some_and(|&v| v != 1.0) {
                return Err(malformed(format!("{name}: first entry must be 1")));
            }
        }
        if !(self.tol >= 0.0) {
            return Err(malformed("tol: must be nonnegative"));
        }
        Ok(())
    }

    pub fn c(&self, j: u32) -> f64 {
        self.c_seq.get(j as usize - 1).copied().unwrap_or(1.0)
    }

    pub fn k(&self, j: u32) -> f64 {
        self.k_seq.get(j as usize - 1).copied().unwrap_or(1.0)
    }
}

fn check_hyper_shapes(r: &VectorMultiPolynomial, p: &VectorMultiPolynomial, qs: &[VectorMultiPolynomial]) -> Result<()> {
    if r.dims().len() != 1 {
        return Err(shape(format!("outer polynomial must have one block, got {}", r.dims().len())));
    }
    if r.dims()[0] != p.outputs() {
        return Err(shape(format!("outer polynomial acts on dim {}, middle has {} outputs", r.dims()[0], p.outputs())));
    }
    if qs.len() != p.dims().len() {
        return Err(shape(format!("{} inner polynomials for {} blocks", qs.len(), p.dims().len())));
    }
    for (i, (q, &d)) in qs.iter().zip(p.dims()).enumerate() {
        if q.outputs() != d {
            return Err(shape(format!("inner polynomial {i} has {} outputs, block has dim {d}", q.outputs())));
        }
    }
    Ok(())
}

/// Multidegree of `R∘P∘(Q₁,…,Q_n)`: block `j` of `Q_i` gets `r_j·k_i·r`.
pub fn hyper_multidegree(r: u32, k: &[u32], q_degrees: &[Vec<u32>]) -> Result<MultiDegree> {
    if k.len() != q_degrees.len() {
        return Err(shape(format!("{} middle degrees for {} inner polynomials", k.len(), q_degrees.len())));
    }
    MultiDegree::new(q_degrees.iter().zip(k).flat_map(|(rs, &ki)| rs.iter().map(move |&rj| rj * ki * r)).collect())
}

/// Substitutes `vars[v]` for variable `v` of a single-block `SparseTerms`
/// source, accumulating `Σ c·∏ vars[v]^{e}`.
fn substitute_sparse(
    source: &MultiPolynomial,
    vars_per_block: &[Vec<SparseTerms>],
    blocks: usize,
    budget: &mut Budget,
) -> Result<SparseTerms> {
    let mut caches: Vec<Vec<Vec<SparseTerms>>> =
        vars_per_block.iter().map(|vars| vars.iter().map(|v| vec![v.clone()]).collect()).collect();
    let mut acc = SparseTerms::new();
    for (key, &c) in source.terms() {
        let mut prod = sparse_one(blocks);
        for (b, alpha) in key.alphas().iter().enumerate() {
            for (v, e) in alpha.iter() {
                let pow = sparse_pow_cached(&mut caches[b][v], e, budget)?;
                prod = sparse_mul(&prod, &pow, budget)?;
            }
        }
        budget.charge(prod.len())?;
        for (k, w) in prod {
            *acc.entry(k).or_insert_with(zero) += c * w;
        }
    }
    Ok(acc)
}

/// `R∘P∘(Q₁,…,Q_n)` for a single-block `R`, expanded coefficientwise under
/// a budget of `10⁶` intermediate monomials.
pub fn compose_hyper(
    r: &VectorMultiPolynomial,
    p: &VectorMultiPolynomial,
    qs: &[VectorMultiPolynomial],
) -> Result<VectorMultiPolynomial> {
    check_hyper_shapes(r, p, qs)?;
    let q_degrees: Vec<Vec<u32>> = qs.iter().map(|q| q.multidegree().degrees().to_vec()).collect();
    let md = hyper_multidegree(r.multidegree().degrees()[0], p.multidegree().degrees(), &q_degrees)?;
    let dims: Vec<usize> = qs.iter().flat_map(|q| q.dims().iter().copied()).collect();
    let blocks = dims.len();
    let real = r.field() == Field::Real && p.field() == Field::Real && qs.iter().all(|q| q.field() == Field::Real);
    let mut budget = Budget::new(TERM_BUDGET);

    // inner components lifted to the global block layout
    let mut offset = 0;
    let mut q_vars: Vec<Vec<SparseTerms>> = Vec::with_capacity(qs.len());
    for q in qs {
        let nb = q.dims().len();
        q_vars.push(
            q.components()
                .iter()
                .map(|c| {
                    c.terms()
                        .iter()
                        .map(|(k, &v)| {
                            let mut alphas = vec![MultiIndex::empty(); blocks];
                            alphas[offset..offset + nb].clone_from_slice(k.alphas());
                            (CoefficientKey::new(alphas), v)
                        })
                        .collect()
                })
                .collect(),
        );
        offset += nb;
    }
    let middle: Vec<SparseTerms> =
        p.components().iter().map(|c| substitute_sparse(c, &q_vars, blocks, &mut budget)).collect::<Result<_>>()?;
    let middle = [middle];
    let components = r
        .components()
        .iter()
        .map(|c| {
            let terms = substitute_sparse(c, &middle, blocks, &mut budget)?;
            MultiPolynomial::from_terms(joint_field(real), md.clone(), dims.clone(), terms)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorMultiPolynomial::new(components)
}

/// `‖R∘P∘(Q_i)‖ ≤ K_r ∏_i (∏_{j∈i} C_{r_j})^{r k_i} ‖R‖ ‖P‖^r ∏_i ‖Q_i‖^{r k_i}`
pub fn hyper_inequality_report(
    r: &VectorMultiPolynomial,
    p: &VectorMultiPolynomial,
    qs: &[VectorMultiPolynomial],
    config: &HyperIneqConfig,
    opts: &NormOptions,
) -> Result<InequalityReport> {
    config.validate()?;
    let composite = compose_hyper(r, p, qs)?;
    let lhs = composite.norm_estimate(opts);
    let rdeg = r.multidegree().degrees()[0];
    let mut rhs = config.k(rdeg) * r.norm_estimate(opts).upper * p.norm_estimate(opts).upper.powi(rdeg as i32);
    for (q, &ki) in qs.iter().zip(p.multidegree().degrees()) {
        let cs: f64 = q.multidegree().degrees().iter().map(|&rj| config.c(rj)).product();
        let e = (rdeg * ki) as i32;
        rhs *= cs.powi(e) * q.norm_estimate(opts).upper.powi(e);
    }
    Ok(InequalityReport {
        lhs_lower: lhs.lower,
        lhs_upper: lhs.upper,
        rhs,
        pass: lhs.lower <= rhs * (1.0 + config.tol),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummingMode {
    /// Diagonal sum over `j`.
    Abs,
    /// Sum over all index tuples `(j₁,…,j_m)`.
    Full,
}

impl std::str::FromStr for SummingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" => Ok(SummingMode::Abs),
            "full" => Ok(SummingMode::Full),
            _ => Err(malformed(format!("mode: expected abs or full, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummingReport {
    pub lhs: f64,
    pub rhs_product: f64,
    pub ratio: f64,
}

fn vec_sup(v: &[Scalar]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `(Σ ‖P(x_{j₁}⁽¹⁾,…,x_{j_m}⁽ᵐ⁾)‖^p)^{1/p} / ∏_k ‖(x_j⁽ᵏ⁾)‖_{w,q_k}^{n_k}`
pub fn summing_ratio(
    p: &VectorMultiPolynomial,
    families: &[Vec<Vec<Scalar>>],
    exponent: f64,
    qs: &[f64],
    mode: SummingMode,
) -> Result<SummingReport> {
    let m = p.dims().len();
    if families.len() != m || qs.len() != m {
        return Err(shape(format!("{m} blocks need {m} families and {m} exponents")));
    }
    if !(exponent > 0.0) || qs.iter().any(|&q| !(q > 0.0)) {
        return Err(malformed("summing exponents must be positive"));
    }
    for (k, (fam, &d)) in families.iter().zip(p.dims()).enumerate() {
        if let Some(x) = fam.iter().find(|x| x.len() != d) {
            return Err(shape(format!("family {k} has a vector of length {}, block dim is {d}", x.len())));
        }
    }
    let mut sum = 0.0;
    match mode {
        SummingMode::Abs => {
            let n = families[0].len();
            if families.iter().any(|f| f.len() != n) {
                return Err(shape("absolute summing needs families of equal length"));
            }
            for j in 0..n {
                let xs: Vec<Vec<Scalar>> = families.iter().map(|f| f[j].clone()).collect();
                sum += vec_sup(&p.eval(&xs)?).powf(exponent);
            }
        }
        SummingMode::Full => {
            if families.iter().any(Vec::is_empty) {
                return Err(shape("full summing needs nonempty families"));
            }
            let mut idx = vec![0usize; m];
            'outer: loop {
                let xs: Vec<Vec<Scalar>> = families.iter().zip(&idx).map(|(f, &j)| f[j].clone()).collect();
                sum += vec_sup(&p.eval(&xs)?).powf(exponent);
                for k in (0..m).rev() {
                    idx[k] += 1;
                    if idx[k] < families[k].len() {
                        continue 'outer;
                    }
                    idx[k] = 0;
                }
                break;
            }
        }
    }
    let lhs = sum.powf(1.0 / exponent);
    let mut rhs_product = 1.0;
    for ((fam, &q), &n) in families.iter().zip(qs).zip(p.multidegree().degrees()) {
        rhs_product *= weak_lq_norm(&WeakNormInput { family: fam.clone(), q })?.powi(n as i32);
    }
    let ratio = if lhs == 0.0 {
        0.0
    } else if rhs_product == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs_product
    };
    Ok(SummingReport { lhs, rhs_product, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    fn term(alphas: &[&[(usize, u32)]], c: f64) -> (CoefficientKey, Scalar) {
        (CoefficientKey::new(alphas.iter().map(|a| MultiIndex::from_pairs(a.iter().copied())).collect()), re(c))
    }

    fn real(md: &[u32], dims: &[usize], terms: Vec<(CoefficientKey, Scalar)>) -> MultiPolynomial {
        MultiPolynomial::from_terms(Field::Real, MultiDegree::new(md.to_vec()).unwrap(), dims.to_vec(), terms).unwrap()
    }

    fn scalar_chain(n: u32) -> VectorMultiPolynomial {
        VectorMultiPolynomial::scalar(real(&[n], &[1], vec![term(&[&[(0, n)]], 1.0)]))
    }

    fn sample() -> VectorMultiPolynomial {
        VectorMultiPolynomial::scalar(real(
            &[2, 1],
            &[2, 2],
            vec![term(&[&[(0, 2)], &[(1, 1)]], 1.5), term(&[&[(0, 1), (1, 1)], &[(0, 1)]], -0.5)],
        ))
    }

    #[test]
    fn linear_map_basics() {
        let a = LinearMap::new(vec![vec![re(1.0), re(-2.0)], vec![re(0.5), re(0.0)]]).unwrap();
        assert_eq!(a.op_norm(), 3.0);
        assert_eq!(a.apply(&[re(1.0), re(1.0)]).unwrap(), vec![re(-1.0), re(0.5)]);
        assert_eq!(LinearMap::identity(2).compose(&a).unwrap(), a);
        let s = a.to_json().unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":[[1.0,-2.0],[0.5,0.0]]}"#);
        assert_eq!(LinearMap::from_json(&s).unwrap(), a);
        assert!(LinearMap::from_json(r#"{"rows":2,"cols":2,"entries":[[1.0,2.0]]}"#).is_err());
    }

    #[test]
    fn identities_leave_polynomial_unchanged() {
        let p = sample();
        let out = compose_linear(&LinearMap::identity(1), &p, &[LinearMap::identity(2), LinearMap::identity(2)]).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn scalar_maps_scale_by_homogeneity() {
        let p = sample();
        let us = [LinearMap::scalar(2, re(2.0)), LinearMap::scalar(2, re(-3.0))];
        let out = compose_linear(&LinearMap::identity(1), &p, &us).unwrap();
        let want = p.components()[0].scale(re(4.0 * -3.0)).unwrap();
        assert_eq!(out.components()[0], want);
    }

    #[test]
    fn composite_matches_pointwise() {
        let p = VectorMultiPolynomial::new(vec![
            sample().components()[0].clone(),
            real(&[2, 1], &[2, 2], vec![term(&[&[(1, 2)], &[(0, 1)]], 2.0)]),
        ])
        .unwrap();
        let t = LinearMap::new(vec![vec![re(1.0), re(0.5)], vec![re(0.0), re(-1.0)], vec![re(2.0), re(1.0)]]).unwrap();
        let u0 = LinearMap::new(vec![vec![re(1.0), re(2.0), re(0.0)], vec![re(-1.0), re(0.0), re(0.5)]]).unwrap();
        let u1 = LinearMap::new(vec![vec![re(0.3)], vec![re(-0.7)]]).unwrap();
        let out = compose_linear(&t, &p, &[u0.clone(), u1.clone()]).unwrap();
        assert_eq!(out.dims(), &[3, 1]);
        let ys = vec![vec![re(0.2), re(-0.4), re(0.9)], vec![re(1.3)]];
        let inner = p.eval(&[u0.apply(&ys[0]).unwrap(), u1.apply(&ys[1]).unwrap()]).unwrap();
        let want = t.apply(&inner).unwrap();
        for (a, b) in out.eval(&ys).unwrap().iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ideal_report_for_scalar_maps() {
        let p = sample();
        let opts = NormOptions::default();
        let us = [LinearMap::scalar(2, re(0.5)), LinearMap::scalar(2, re(0.5))];
        let r = ideal_inequality_report(&LinearMap::identity(1), &p, &us, &opts, 1e-9).unwrap();
        let base = p.norm_estimate(&opts);
        assert!((r.lhs_lower - base.lower / 8.0).abs() < 1e-12);
        assert!((r.rhs - base.upper / 8.0).abs() < 1e-15);
        assert!(r.pass);
    }

    #[test]
    fn monomial_chain() {
        let out = compose_hyper(&scalar_chain(2), &scalar_chain(3), &[scalar_chain(2)]).unwrap();
        let c = &out.components()[0];
        assert_eq!(c.multidegree().degrees(), &[12]);
        assert_eq!(c.num_terms(), 1);
        assert_eq!(c.coeff(&CoefficientKey::new(vec![MultiIndex::from_pairs([(0, 12)])])), re(1.0));
        let rep = hyper_inequality_report(
            &scalar_chain(2),
            &scalar_chain(3),
            &[scalar_chain(2)],
            &HyperIneqConfig::default(),
            &NormOptions::default(),
        )
        .unwrap();
        assert_eq!((rep.lhs_lower, rep.pass), (1.0, true));
        assert!((rep.rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyper_degree_tuple() {
        assert_eq!(hyper_multidegree(2, &[1, 2], &[vec![2], vec![1, 3]]).unwrap().degrees(), &[4, 4, 12]);
        let q1 = VectorMultiPolynomial::scalar(real(&[2], &[1], vec![term(&[&[(0, 2)]], 1.0)]));
        let q2 = VectorMultiPolynomial::scalar(real(&[1, 3], &[1, 1], vec![term(&[&[(0, 1)], &[(0, 3)]], 1.0)]));
        let p = VectorMultiPolynomial::scalar(real(&[1, 2], &[1, 1], vec![term(&[&[(0, 1)], &[(0, 2)]], 1.0)]));
        let out = compose_hyper(&scalar_chain(2), &p, &[q1, q2]).unwrap();
        assert_eq!(out.multidegree().degrees(), &[4, 4, 12]);
    }

    #[test]
    fn hyper_matches_pointwise() {
        let q1 = VectorMultiPolynomial::new(vec![
            real(&[1], &[2], vec![term(&[&[(0, 1)]], 1.0), term(&[&[(1, 1)]], -2.0)]),
            real(&[1], &[2], vec![term(&[&[(1, 1)]], 0.5)]),
        ])
        .unwrap();
        let q2 = VectorMultiPolynomial::scalar(real(&[2], &[1], vec![term(&[&[(0, 2)]], 3.0)]));
        let p = VectorMultiPolynomial::new(vec![
            real(&[2, 1], &[2, 1], vec![term(&[&[(0, 1), (1, 1)], &[(0, 1)]], 1.0)]),
            real(&[2, 1], &[2, 1], vec![term(&[&[(0, 2)], &[(0, 1)]], -1.0), term(&[&[(1, 2)], &[(0, 1)]], 0.25)]),
        ])
        .unwrap();
        let r = VectorMultiPolynomial::scalar(real(&[2], &[2], vec![term(&[&[(0, 1), (1, 1)]], 1.0), term(&[&[(1, 2)]], 2.0)]));
        let out = compose_hyper(&r, &p, &[q1.clone(), q2.clone()]).unwrap();
        assert_eq!(out.multidegree().degrees(), &[4, 4]);
        let xs = vec![vec![re(0.3), re(-0.8)], vec![re(0.6)]];
        let mid = p.eval(&[q1.eval(&xs[..1]).unwrap(), q2.eval(&xs[1..]).unwrap()]).unwrap();
        let want = r.eval(&[mid]).unwrap();
        let got = out.eval(&xs).unwrap();
        assert!((got[0] - want[0]).norm() < 1e-12 * want[0].norm().max(1.0));
    }

    #[test]
    fn hyper_refuses_past_budget() {
        let dense = |n: u32, d: usize| {
            let terms = crate::expand::weak_compositions(n, d)
                .into_iter()
                .map(|e| (CoefficientKey::new(vec![MultiIndex::from_dense(&e)]), re(1.0)));
            MultiPolynomial::from_terms(Field::Real, MultiDegree::new(vec![n]).unwrap(), vec![d], terms).unwrap()
        };
        let q = VectorMultiPolynomial::new(vec![dense(3, 6); 4]).unwrap();
        let p = VectorMultiPolynomial::new(vec![dense(4, 4); 4]).unwrap();
        let r = VectorMultiPolynomial::scalar(dense(3, 4));
        assert!(matches!(compose_hyper(&r, &p, &[q]), Err(Error::TermBudget { .. })));
    }

    #[test]
    fn summing_examples() {
        let xy = VectorMultiPolynomial::scalar(real(&[1, 1], &[1, 1], vec![term(&[&[(0, 1)], &[(0, 1)]], 1.0)]));
        let single = [vec![vec![re(3.0)]], vec![vec![re(-2.0)]]];
        let r = summing_ratio(&xy, &single, 1.0, &[1.0, 1.0], SummingMode::Abs).unwrap();
        assert_eq!((r.lhs, r.rhs_product, r.ratio), (6.0, 6.0, 1.0));

        // N copies of e₁ in both slots, p = 1/3, q = 1: ratio = N^3 / N^2 = N
        for n in [4usize, 16] {
            let fam = vec![vec![re(1.0)]; n];
            let r = summing_ratio(&xy, &[fam.clone(), fam], 1.0 / 3.0, &[1.0, 1.0], SummingMode::Abs).unwrap();
            assert!((r.ratio - n as f64).abs() < 1e-9 * n as f64);
        }
        let fam = vec![vec![re(1.0)]; 3];
        let r = summing_ratio(&xy, &[fam.clone(), fam], 1.0, &[1.0, 1.0], SummingMode::Full).unwrap();
        assert_eq!((r.lhs, r.rhs_product), (9.0, 9.0));

        let zero = VectorMultiPolynomial::scalar(
            MultiPolynomial::zero(Field::Real, MultiDegree::ones(2).unwrap(), vec![1, 1]).unwrap(),
        );
        assert_eq!(summing_ratio(&zero, &single, 1.0, &[1.0, 1.0], SummingMode::Abs).unwrap().ratio, 0.0);
        let ragged = [vec![vec![re(1.0)]; 2], vec![vec![re(1.0)]; 3]];
        assert!(summing_ratio(&xy, &ragged, 1.0, &[1.0, 1.0], SummingMode::Abs).is_err());
    }
}
