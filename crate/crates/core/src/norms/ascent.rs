//! Multi-start cyclic coordinate ascent for `max |P|` over the product of
//! unit balls. Every coordinate step maximizes the univariate restriction
//! exactly, so `|P|` never decreases along a run.

use rand::Rng;
use rayon::prelude::*;

use super::flat::FlatPoly;
use super::univariate::{horner, horner_c, max_abs_on_circle, max_abs_on_interval};
use super::NormOptions;
use crate::rng::stream_rng;
use crate::scalar::Scalar;

const PHASE_SAMPLES: usize = 16;

pub(crate) struct AscentResult {
    pub value: f64,
    pub witness: Vec<Scalar>,
}

/// Runs every start (in parallel) and keeps the best; ties go to the lower
/// start index, so the result does not depend on scheduling.
pub(crate) fn multi_start(flat: &FlatPoly, complex: bool, opts: &NormOptions) -> AscentResult {
    let runs: Vec<AscentResult> = (0..opts.starts.max(1) as u64)
        .into_par_iter()
        .map(|s| if complex { run_complex(flat, opts, s) } else { run_real(flat, opts, s) })
        .collect();
    runs.into_iter()
        .reduce(|best, cur| if cur.value > best.value { cur } else { best })
        .expect("at least one start")
}

fn run_real(flat: &FlatPoly, opts: &NormOptions, start: u64) -> AscentResult {
    let mut rng = stream_rng(opts.seed, start);
    let mut x: Vec<f64> = (0..flat.dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut total = flat.eval_real(&x);
    let mut coeffs: Vec<f64> = Vec::new();
    for _ in 0..opts.max_sweeps {
        let before = total.abs();
        for v in 0..flat.dim {
            if flat.occ[v].is_empty() {
                continue;
            }
            coeffs.clear();
            coeffs.resize(flat.max_exp[v] as usize + 1, 0.0);
            for &t in &flat.occ[v] {
                let term = &flat.terms[t];
                let mut rest = term.coef.re;
                let mut ev = 0;
                for &(u, e) in &term.vars {
                    if u == v {
                        ev = e;
                    } else {
                        rest *= x[u].powi(e as i32);
                    }
                }
                coeffs[ev as usize] += rest;
            }
            coeffs[0] = total - horner(&coeffs, x[v]);
            let current = total.abs();
            let (t, val) = max_abs_on_interval(&coeffs);
            if val > current {
                x[v] = t;
                total = horner(&coeffs, t);
            }
        }
        total = flat.eval_real(&x);
        if total.abs() - before <= opts.tol * total.abs().max(1.0) {
            break;
        }
    }
    AscentResult { value: total.abs(), witness: x.into_iter().map(|v| Scalar::new(v, 0.0)).collect() }
}

fn run_complex(flat: &FlatPoly, opts: &NormOptions, start: u64) -> AscentResult {
    let mut rng = stream_rng(opts.seed, start);
    let mut x: Vec<Scalar> =
        (0..flat.dim).map(|_| Scalar::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect();
    let mut total = flat.eval_complex(&x);
    let mut coeffs: Vec<Scalar> = Vec::new();
    for _ in 0..opts.max_sweeps {
        let before = total.norm();
        for v in 0..flat.dim {
            if flat.occ[v].is_empty() {
                continue;
            }
            coeffs.clear();
            coeffs.resize(flat.max_exp[v] as usize + 1, Scalar::new(0.0, 0.0));
            for &t in &flat.occ[v] {
                let term = &flat.terms[t];
                let mut rest = term.coef;
                let mut ev = 0;
                for &(u, e) in &term.vars {
                    if u == v {
                        ev = e;
                    } else {
                        rest *= x[u].powu(e);
                    }
                }
                coeffs[ev as usize] += rest;
            }
            coeffs[0] = total - horner_c(&coeffs, x[v]);
            let current = total.norm();
            let (z, val) = max_abs_on_circle(&coeffs, PHASE_SAMPLES);
            if val > current {
                x[v] = z;
                total = horner_c(&coeffs, z);
            }
        }
        total = flat.eval_complex(&x);
        if total.norm() - before <= opts.tol * total.norm().max(1.0) {
            break;
        }
    }
    AscentResult { value: total.norm(), witness: x }
}
