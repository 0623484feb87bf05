//! Experiments around the critical coefficient exponent `2M/(M+1)`: the
//! variable-splitting embedding into one block, random-sign multilinear
//! forms lifted to multipolynomials, and ratio-growth scans.
//!
//! For a lift `P_r` of an `r`-dimensional `±1` form the coefficient norm is
//! exactly `r^{M/p}`, while the sup norm of a good sign choice grows like
//! `r^{(M+1)/2}`. The ratio `‖c(P_r)‖_p / ‖P_r‖` then grows with slope
//! `M/p − (M+1)/2` in `log r`.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{malformed, shape, Result};
use crate::index::{CoefficientKey, MultiDegree, MultiIndex};
use crate::norms::{sup_norm_estimate_with, NormMethod, NormOptions};
use crate::poly::MultiPolynomial;
use crate::rng::stream_rng;
use crate::scalar::{re, Field};

/// `2M/(M+1)` with `M = Σ nⱼ`.
pub fn bh_exponent(n: &MultiDegree) -> f64 {
    let m = n.total() as f64;
    2.0 * m / (m + 1.0)
}

/// Injective relabeling of every block's coordinates into one target block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub target_dim: usize,
    /// `assignment[i][j]` is the target coordinate of coordinate `j` of block `i`.
    pub assignment: Vec<Vec<usize>>,
}

impl BlockPartition {
    /// Blocks laid out one after another.
    pub fn concat(dims: &[usize]) -> Self {
        let mut next = 0;
        let assignment = dims
            .iter()
            .map(|&d| {
                let range: Vec<usize> = (next..next + d).collect();
                next += d;
                range
            })
            .collect();
        BlockPartition { target_dim: next, assignment }
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        if self.assignment.len() != dims.len() {
            return Err(shape(format!("partition has {} blocks, polynomial has {}", self.assignment.len(), dims.len())));
        }
        let mut used = vec![false; self.target_dim];
        for (i, (a, &d)) in self.assignment.iter().zip(dims).enumerate() {
            if a.len() != d {
                return Err(shape(format!("partition block {i} maps {} coordinates, block has {d}", a.len())));
            }
            for &t in a {
                if t >= self.target_dim {
                    return Err(shape(format!("partition target {t} out of range {}", self.target_dim)));
                }
                if std::mem::replace(&mut used[t], true) {
                    return Err(shape(format!("partition target {t} is used twice")));
                }
            }
        }
        Ok(())
    }
}

/// `Q(z) = P((z_j)_{j∈N₁},…,(z_j)_{j∈N_m})`: one block of degree `M` on
/// disjoint coordinate ranges, with the same coefficients as `P`.
pub fn split_embed(p: &MultiPolynomial, partition: &BlockPartition) -> Result<MultiPolynomial> {
    partition.validate(p.dims())?;
    let terms = p.terms().iter().map(|(key, &c)| {
        let pairs = key
            .alphas()
            .iter()
            .zip(&partition.assignment)
            .flat_map(|(alpha, map)| alpha.iter().map(move |(j, e)| (map[j], e)));
        (CoefficientKey::new(vec![MultiIndex::from_pairs(pairs)]), c)
    });
    MultiPolynomial::from_terms(
        p.field(),
        MultiDegree::new(vec![p.multidegree().total()])?,
        vec![partition.target_dim],
        terms,
    )
}

/// Random signs `T_r(x⁽¹⁾,…,x⁽ᴹ⁾) = Σ ±x_{i₁}⁽¹⁾⋯x_{i_M}⁽ᴹ⁾` over `{0..r-1}^M`,
/// stored in lexicographic tuple order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KszInstance {
    pub r: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub seed: u64,
    pub signs: Vec<i8>,
}

impl KszInstance {
    pub fn sign(&self, tuple: &[usize]) -> i8 {
        self.signs[tuple.iter().fold(0, |acc, &i| acc * self.r + i)]
    }

    /// Every tuple in lexicographic order with its sign.
    pub fn tuples(&self) -> impl Iterator<Item = (Vec<usize>, i8)> + '_ {
        let m = self.m as usize;
        self.signs.iter().enumerate().map(move |(mut k, &s)| {
            let mut t = vec![0; m];
            for slot in (0..m).rev() {
                t[slot] = k % self.r;
                k /= self.r;
            }
            (t, s)
        })
    }
}

pub fn ksz_build(r: usize, m: u32, seed: u64) -> Result<KszInstance> {
    if r == 0 || m == 0 {
        return Err(malformed(format!("random-sign form needs r ≥ 1 and M ≥ 1, got r={r}, M={m}")));
    }
    let count = (r as u128).pow(m);
    if count > crate::expand::TERM_BUDGET as u128 {
        return Err(crate::Error::TermBudget { required: count as usize, budget: crate::expand::TERM_BUDGET });
    }
    let mut rng = stream_rng(seed, ((r as u64) << 8) | m as u64);
    let signs = (0..count as usize).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    Ok(KszInstance { r, m, seed, signs })
}

/// `T_r` itself as an `M`-block multilinear polynomial on `(ℝ^r)^M`.
pub fn ksz_form(inst: &KszInstance) -> Result<MultiPolynomial> {
    ksz_lift(inst, &MultiDegree::ones(inst.m as usize)?)
}

/// `P_r(x⁽¹⁾,…,x⁽ᵐ⁾) = T_r(copies of x⁽¹⁾,…,copies of x⁽ᵐ⁾)`. Block `i` has
/// dimension `nᵢ·r`, laid out as `nᵢ` consecutive copies of size `r`; slots of
/// `T_r` are assigned in order, the first `n₁` to the copies of block 1 and so on.
pub fn ksz_lift(inst: &KszInstance, n: &MultiDegree) -> Result<MultiPolynomial> {
    if n.total() != inst.m {
        return Err(shape(format!("multidegree {n} has total degree {}, form has arity {}", n.total(), inst.m)));
    }
    // slot -> (block, copy)
    let slots: Vec<(usize, usize)> =
        n.degrees().iter().enumerate().flat_map(|(b, &nb)| (0..nb as usize).map(move |k| (b, k))).collect();
    let r = inst.r;
    let dims: Vec<usize> = n.degrees().iter().map(|&nb| nb as usize * r).collect();
    let blocks = dims.len();
    let terms = inst.tuples().map(|(t, s)| {
        let mut per_block: Vec<Vec<(usize, u32)>> = vec![Vec::new(); blocks];
        for (&(b, k), &i) in slots.iter().zip(&t) {
            per_block[b].push((k * r + i, 1));
        }
        (CoefficientKey::new(per_block.into_iter().map(MultiIndex::from_pairs).collect()), re(s as f64))
    });
    MultiPolynomial::from_terms(Field::Real, n.clone(), dims, terms)
}

/// Integer form of `Σ|c_α(P_r)|^p = r^M`: every coefficient is `±1` and there
/// are exactly `r^M` of them.
pub fn ksz_lift_identity(p: &MultiPolynomial, r: usize) -> bool {
    let m = p.multidegree().total();
    p.num_terms() as u128 == (r as u128).pow(m) && p.terms().values().all(|c| c.im == 0.0 && c.re.abs() == 1.0)
}

/// Parameters of a ratio scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub n: MultiDegree,
    pub ps: Vec<f64>,
    pub r_values: Vec<usize>,
    pub seeds_per_r: usize,
    pub starts: usize,
    /// First seed; cell `s` of every `r` uses `base_seed + s`.
    pub base_seed: u64,
    /// Extra seeds allowed per `r` while the best norm is above the running bound.
    pub max_retries: usize,
    pub vertex_budget_log2: u32,
}

impl ScanConfig {
    pub fn new(n: MultiDegree, ps: Vec<f64>, r_values: Vec<usize>, seeds_per_r: usize) -> Self {
        ScanConfig {
            n,
            ps,
            r_values,
            seeds_per_r,
            starts: 256,
            base_seed: 0,
            max_retries: seeds_per_r,
            vertex_budget_log2: 32,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ps.is_empty() || self.ps.iter().any(|&p| !(p > 0.0)) {
            return Err(malformed("p: exponents must be positive"));
        }
        if self.r_values.is_empty() || self.r_values.windows(2).any(|w| w[0] >= w[1]) || self.r_values[0] == 0 {
            return Err(malformed("r: values must be positive and strictly increasing"));
        }
        if self.seeds_per_r == 0 {
            return Err(malformed("seeds: at least one seed per r is required"));
        }
        Ok(())
    }
}

/// One `(r, seed)` cell: sup-norm bracket of `P_r`. Shared by all `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanCell {
    pub r: usize,
    pub seed: u64,
    pub norm_lower: f64,
    pub norm_upper: f64,
    pub method: NormMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub r: usize,
    pub seed: u64,
    pub norm_lower: f64,
    pub norm_upper: f64,
    pub method: NormMethod,
    pub lp_norm: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioScanResult {
    pub n: MultiDegree,
    pub p: f64,
    /// Best cell per `r` (smallest upper norm, lowest seed on ties).
    pub rows: Vec<ScanRow>,
    /// Every computed cell, in `(r, seed)` order.
    pub cells: Vec<ScanRow>,
    pub fitted_slope: f64,
    pub fitted_k: f64,
    pub expected_slope: f64,
}

fn kappa(n: &MultiDegree) -> f64 {
    (n.total() as f64 + 1.0) / 2.0
}

fn compute_cell(cfg: &ScanConfig, r: usize, seed: u64) -> Result<ScanCell> {
    let inst = ksz_build(r, cfg.n.total(), seed)?;
    let p = ksz_lift(&inst, &cfg.n)?;
    let opts = NormOptions {
        starts: cfg.starts,
        seed,
        vertex_budget_log2: cfg.vertex_budget_log2,
        ..NormOptions::default()
    };
    let est = sup_norm_estimate_with(&p, &opts);
    Ok(ScanCell { r, seed, norm_lower: est.lower, norm_upper: est.upper, method: est.method })
}

/// Sup-norm cells for every `r`, including retries.
///
/// For `r` after the first, the running constant `K = max (best upper)/r^{(M+1)/2}`
/// over the finished `r` gives the bound `K·r^{(M+1)/2}`; while the best upper
/// norm of the current `r` is above it, the next seed is tried, at most
/// `max_retries` times.
pub fn scan_cells(cfg: &ScanConfig) -> Result<Vec<ScanCell>> {
    cfg.validate()?;
    let kap = kappa(&cfg.n);
    let mut all = Vec::new();
    let mut running_k: Option<f64> = None;
    for &r in &cfg.r_values {
        let mut cells: Vec<ScanCell> = (0..cfg.seeds_per_r as u64)
            .into_par_iter()
            .map(|s| compute_cell(cfg, r, cfg.base_seed.wrapping_add(s)))
            .collect::<Result<_>>()?;
        let best = |cells: &[ScanCell]| cells.iter().map(|c| c.norm_upper).fold(f64::INFINITY, f64::min);
        if let Some(k) = running_k {
            let bound = k * (r as f64).powf(kap);
            let mut next = cfg.seeds_per_r as u64;
            while best(&cells) > bound && next < (cfg.seeds_per_r + cfg.max_retries) as u64 {
                cells.push(compute_cell(cfg, r, cfg.base_seed.wrapping_add(next))?);
                next += 1;
            }
        }
        let k_here = best(&cells) / (r as f64).powf(kap);
        running_k = Some(running_k.map_or(k_here, |k: f64| k.max(k_here)));
        all.extend(cells);
    }
    Ok(all)
}

fn row_for(cell: &ScanCell, n: &MultiDegree, p: f64) -> ScanRow {
    // every coefficient is ±1, so Σ|c|^p = r^M
    let lp_norm = (cell.r as f64).powf(n.total() as f64 / p);
    let ratio_upper = if cell.norm_lower > 0.0 { lp_norm / cell.norm_lower } else { f64::INFINITY };
    ScanRow {
        r: cell.r,
        seed: cell.seed,
        norm_lower: cell.norm_lower,
        norm_upper: cell.norm_upper,
        method: cell.method,
        lp_norm,
        ratio_lower: lp_norm / cell.norm_upper,
        ratio_upper,
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Turns cells into one result per `p`.
pub fn assemble(n: &MultiDegree, ps: &[f64], cells: &[ScanCell]) -> Vec<RatioScanResult> {
    let kap = kappa(n);
    let mut best: BTreeMap<usize, &ScanCell> = BTreeMap::new();
    for c in cells {
        let e = best.entry(c.r).or_insert(c);
        if c.norm_upper < e.norm_upper || (c.norm_upper == e.norm_upper && c.seed < e.seed) {
            *e = c;
        }
    }
    let fitted_k = best.values().map(|c| c.norm_upper / (c.r as f64).powf(kap)).fold(0.0, f64::max);
    ps.iter()
        .map(|&p| {
            let rows: Vec<ScanRow> = best.values().map(|c| row_for(c, n, p)).collect();
            let fitted_slope = log_log_slope(&rows.iter().map(|r| (r.r as f64, r.ratio_lower)).collect::<Vec<_>>());
            RatioScanResult {
                n: n.clone(),
                p,
                cells: cells.iter().map(|c| row_for(c, n, p)).collect(),
                rows,
                fitted_slope,
                fitted_k,
                expected_slope: n.total() as f64 / p - kap,
            }
        })
        .collect()
}

/// One scan shared by several exponents; the norms do not depend on `p`.
pub fn ratio_scan_multi(cfg: &ScanConfig) -> Result<Vec<RatioScanResult>> {
    let cells = scan_cells(cfg)?;
    Ok(assemble(&cfg.n, &cfg.ps, &cells))
}

pub fn ratio_scan(n: &MultiDegree, p: f64, r_values: &[usize], seeds_per_r: usize, starts: usize) -> Result<RatioScanResult> {
    let cfg = ScanConfig { starts, ..ScanConfig::new(n.clone(), vec![p], r_values.to_vec(), seeds_per_r) };
    Ok(ratio_scan_multi(&cfg)?.pop().expect("one exponent"))
}

/// `%.17g`
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip(mant.to_string()), sign, exp.abs())
    } else {
        strip(format!("{:.*}", (16 - exp) as usize, x))
    }
}

fn n_label(n: &MultiDegree) -> String {
    n.degrees().iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub const CSV_HEADER: [&str; 9] =
    ["n", "p", "r", "seed", "norm_lower", "norm_upper", "lp_norm", "ratio_lower", "ratio_upper"];

/// All cells of the given results as CSV (comma, LF, header row).
pub fn write_csv<W: Write>(out: W, results: &[RatioScanResult]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for res in results {
        for row in &res.cells {
            w.write_record([
                n_label(&res.n),
                format_g17(res.p),
                row.r.to_string(),
                row.seed.to_string(),
                format_g17(row.norm_lower),
                format_g17(row.norm_upper),
                format_g17(row.lp_norm),
                format_g17(row.ratio_lower),
                format_g17(row.ratio_upper),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(results: &[RatioScanResult]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, results)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

#[derive(Serialize)]
pub struct ScanSummary<'a> {
    pub n: &'a MultiDegree,
    pub p: f64,
    pub fitted_slope: f64,
    #[serde(rename = "fitted_K")]
    pub fitted_k: f64,
    pub expected_slope: f64,
    pub rows: &'a [ScanRow],
}

impl RatioScanResult {
    pub fn summary(&self) -> ScanSummary<'_> {
        ScanSummary {
            n: &self.n,
            p: self.p,
            fitted_slope: self.fitted_slope,
            fitted_k: self.fitted_k,
            expected_slope: self.expected_slope,
            rows: &self.rows,
        }
    }
}
