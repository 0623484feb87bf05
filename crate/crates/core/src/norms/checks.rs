//! Sampling checks of the homogeneous growth bound and of the transfer of
//! a bound from a shifted ball to the centered one.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{sup_norm_estimate_with, NormOptions};
use crate::error::{malformed, Result};
use crate::index::factorial;
use crate::poly::MultiPolynomial;
use crate::rng::stream_rng;
use crate::scalar::{Field, Scalar};

const CERT_TOL: f64 = 1e-9;
const WITNESS_TOL: f64 = 1e-6;
const LHS_SEED: u64 = 0x1a7_c0be;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `|P(x)| / ∏‖xᵢ‖^{nᵢ}` seen over the random points.
    pub max_ratio: f64,
    pub lower: f64,
    pub upper: f64,
    /// Ratio at a rescaled copy of the norm witness.
    pub witness_ratio: f64,
    pub witness_attains: bool,
}

impl ContinuityReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.witness_attains
    }
}

fn sup(x: &[Scalar]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `|P(xs)| / ∏‖xᵢ‖^{nᵢ}`, or `None` when some block is zero.
pub fn growth_ratio(p: &MultiPolynomial, xs: &[Vec<Scalar>]) -> Result<Option<f64>> {
    let value = p.eval(xs)?.norm();
    let denom: f64 = xs.iter().zip(p.multidegree().degrees()).map(|(x, &n)| sup(x).powi(n as i32)).product();
    Ok(if denom > 0.0 { Some(value / denom) } else { None })
}

/// Checks `|P(xs)| ≤ upper·∏‖xᵢ‖^{nᵢ}` at `samples` random points whose
/// blocks are scaled independently by `10^{U(-3,3)}`, and that a rescaled
/// witness reaches the lower end of the bracket.
pub fn continuity_certificate(p: &MultiPolynomial, samples: usize, opts: &NormOptions) -> Result<ContinuityReport> {
    let est = sup_norm_estimate_with(p, opts);
    let mut rng = stream_rng(opts.seed, u64::MAX);
    let complex = p.field() == Field::Complex;
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..samples {
        let xs: Vec<Vec<Scalar>> = p
            .dims()
            .iter()
            .map(|&d| {
                let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
                (0..d)
                    .map(|_| {
                        let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
                        Scalar::new(rng.gen_range(-1.0..1.0), im) * scale
                    })
                    .collect()
            })
            .collect();
        let value = p.eval(&xs)?.norm();
        let denom: f64 = xs.iter().zip(p.multidegree().degrees()).map(|(x, &n)| sup(x).powi(n as i32)).product();
        if value > est.upper * denom * (1.0 + CERT_TOL) {
            violations += 1;
        }
        if denom > 0.0 {
            max_ratio = max_ratio.max(value / denom);
        }
    }
    let scaled: Vec<Vec<Scalar>> = est
        .witness
        .iter()
        .map(|w| {
            let t = 10f64.powf(rng.gen_range(-3.0..3.0));
            w.iter().map(|v| v * t).collect()
        })
        .collect();
    let witness_ratio = growth_ratio(p, &scaled)?.unwrap_or(0.0);
    if witness_ratio > est.upper * (1.0 + CERT_TOL) {
        violations += 1;
    }
    Ok(ContinuityReport {
        samples,
        violations,
        max_ratio,
        lower: est.lower,
        upper: est.upper,
        witness_ratio,
        witness_attains: witness_ratio >= est.lower * (1.0 - WITNESS_TOL),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallTransferReport {
    pub probes: usize,
    /// `∏ nᵢ^{nᵢ}/nᵢ!`
    pub factor: f64,
    pub shifted_max: f64,
    pub centered_max: f64,
    pub slack: f64,
    pub pass: bool,
}

/// `∏ nᵢ^{nᵢ}/nᵢ!` for the multidegree of `p`.
pub fn transfer_factor(p: &MultiPolynomial) -> f64 {
    p.multidegree().degrees().iter().map(|&n| (n as f64).powi(n as i32) / factorial(n)).product()
}

/// Latin-hypercube sample of `n` points in `[0,1)^dim`.
fn latin_hypercube(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0);
    let mut pts = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for k in 0..dim {
        strata.shuffle(&mut rng);
        for (pt, &s) in pts.iter_mut().zip(&strata) {
            pt[k] = (s as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    pts
}

/// Compares the probe maximum of `|P|` on `ball(center, radius)` with the
/// probe maximum on `ball(0, radius)`. The same unit-ball probes feed both
/// sides; the centered maximum must stay below the shifted one times
/// `∏ nᵢ^{nᵢ}/nᵢ!` up to `slack`.
pub fn ball_transfer_check(
    p: &MultiPolynomial,
    center: &[Vec<Scalar>],
    radius: f64,
    probes: usize,
    slack: f64,
) -> Result<BallTransferReport> {
    if !(radius > 0.0) {
        return Err(malformed(format!("radius must be positive, got {radius}")));
    }
    if center.len() != p.blocks() || center.iter().zip(p.dims()).any(|(c, &d)| c.len() != d) {
        return Err(malformed("center: block shapes do not match the polynomial"));
    }
    let dim: usize = p.dims().iter().sum();
    let complex = p.field() == Field::Complex;
    let cols = if complex { 2 * dim } else { dim };
    let mut shifted_max: f64 = 0.0;
    let mut centered_max: f64 = 0.0;
    let mut unit = Vec::with_capacity(dim);
    for row in latin_hypercube(probes, cols, LHS_SEED) {
        unit.clear();
        for k in 0..dim {
            unit.push(if complex {
                // uniform in the disc: radius sqrt(u), phase 2πv
                Scalar::from_polar(row[2 * k].sqrt(), std::f64::consts::TAU * row[2 * k + 1])
            } else {
                Scalar::new(2.0 * row[k] - 1.0, 0.0)
            });
        }
        let mut it = unit.iter();
        let centered: Vec<Vec<Scalar>> =
            p.dims().iter().map(|&d| it.by_ref().take(d).map(|u| u * radius).collect()).collect();
        let shifted: Vec<Vec<Scalar>> =
            centered.iter().zip(center).map(|(x, a)| x.iter().zip(a).map(|(x, a)| x + a).collect()).collect();
        centered_max = centered_max.max(p.eval(&centered)?.norm());
        shifted_max = shifted_max.max(p.eval(&shifted)?.norm());
    }
    let factor = transfer_factor(p);
    Ok(BallTransferReport {
        probes,
        factor,
        shifted_max,
        centered_max,
        slack,
        pass: centered_max <= shifted_max * factor * (1.0 + slack),
    })
}
