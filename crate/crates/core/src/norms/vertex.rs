//! Exact sup norm of a real multiaffine polynomial over the unit cube.
//!
//! A polynomial that is affine in every coordinate attains `max |P|` at a
//! vertex of the cube. Pick a set `S` of coordinates no two of which share a
//! term; for fixed signs on the remaining coordinates `E`, `P` is affine in
//! `x_S` and `max_{x_S} |g₀ + Σ g_s x_s| = |g₀| + Σ|g_s|` in closed form. The
//! sign patterns of `E` are walked in Gray-code order, so each step flips one
//! coordinate `v` and updates `g` by `-2·x_v·∂g/∂x_v`. The derivative rows are
//! cached and recomputed only after a coordinate sharing a term with `v` has
//! flipped. Since `|P(-x)| = |P(x)|`, the last coordinate of `E` is fixed.

use rayon::prelude::*;

use super::flat::FlatPoly;
use crate::error::{Error, Result};
use crate::poly::MultiPolynomial;

/// Chunks handed to the thread pool; each is an independent Gray walk.
const CHUNK_BITS: usize = 6;

pub(crate) struct VertexResult {
    pub value: f64,
    pub witness: Vec<f64>,
}

/// Greedy independent set in the co-occurrence graph: coordinates are taken in
/// increasing order of conflict count (ties broken towards higher index).
fn greedy_closed_set(flat: &FlatPoly, conflicts: &[Vec<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..flat.dim).collect();
    order.sort_by(|&a, &b| conflicts[a].len().cmp(&conflicts[b].len()).then(b.cmp(&a)));
    let mut blocked = vec![false; flat.dim];
    let mut chosen = Vec::new();
    for v in order {
        if blocked[v] {
            continue;
        }
        chosen.push(v);
        for &u in &conflicts[v] {
            blocked[u] = true;
        }
    }
    chosen.sort_unstable();
    chosen
}

fn conflict_lists(flat: &FlatPoly) -> Vec<Vec<usize>> {
    let mut adj = vec![vec![false; flat.dim]; flat.dim];
    for t in &flat.terms {
        for &(a, _) in &t.vars {
            for &(b, _) in &t.vars {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
    }
    adj.into_iter().map(|row| row.into_iter().enumerate().filter(|(_, x)| *x).map(|(i, _)| i).collect()).collect()
}

/// Coordinates that will be enumerated for `p` given an optional explicit
/// closed-form set. Returned as `(closed, enumerated)`.
pub(crate) fn plan(p: &MultiPolynomial, closed: Option<Vec<usize>>) -> Result<(FlatPoly, Vec<usize>, Vec<usize>)> {
    if !p.is_multiaffine() {
        return Err(Error::Unsupported("vertex oracle needs every exponent to be at most one".into()));
    }
    let flat = FlatPoly::new(p);
    let closed = match closed {
        Some(c) => c,
        None => greedy_closed_set(&flat, &conflict_lists(&flat)),
    };
    let mut in_closed = vec![false; flat.dim];
    for &s in &closed {
        in_closed[s] = true;
    }
    // highest coordinate first: it becomes the fastest-flipping Gray bit
    let enumerated: Vec<usize> = (0..flat.dim).rev().filter(|&v| !in_closed[v] && !flat.occ[v].is_empty()).collect();
    Ok((flat, closed, enumerated))
}

struct Layout {
    /// Per term: slot of its closed coordinate (0 when none) and positions in `E`.
    slot: Vec<usize>,
    evars: Vec<Vec<usize>>,
    /// Per enumerated coordinate: terms containing it, and enumerated
    /// coordinates sharing a term with it.
    occ: Vec<Vec<usize>>,
    cooc: Vec<Vec<usize>>,
    width: usize,
}

fn layout(flat: &FlatPoly, closed: &[usize], enumerated: &[usize]) -> Result<Layout> {
    let mut slot_of = vec![0usize; flat.dim];
    for (k, &s) in closed.iter().enumerate() {
        slot_of[s] = k + 1;
    }
    let mut epos = vec![usize::MAX; flat.dim];
    for (k, &v) in enumerated.iter().enumerate() {
        epos[v] = k;
    }
    let mut slot = Vec::with_capacity(flat.terms.len());
    let mut evars = Vec::with_capacity(flat.terms.len());
    for t in &flat.terms {
        let mut s = 0;
        let mut ev = Vec::new();
        for &(v, _) in &t.vars {
            if slot_of[v] > 0 {
                if s != 0 {
                    return Err(Error::Malformed("closed-form coordinates share a term".into()));
                }
                s = slot_of[v];
            } else {
                ev.push(epos[v]);
            }
        }
        slot.push(s);
        evars.push(ev);
    }
    let e = enumerated.len();
    let mut occ = vec![Vec::new(); e];
    let mut cooc_flag = vec![vec![false; e]; e];
    for (t, ev) in evars.iter().enumerate() {
        for &a in ev {
            occ[a].push(t);
            for &b in ev {
                if a != b {
                    cooc_flag[a][b] = true;
                }
            }
        }
    }
    let cooc = cooc_flag
        .into_iter()
        .map(|row| row.into_iter().enumerate().filter(|(_, f)| *f).map(|(i, _)| i).collect())
        .collect();
    Ok(Layout { slot, evars, occ, cooc, width: closed.len() + 1 })
}

/// Sign patterns of the lowest enumerated coordinates evaluated side by side.
const LOW_BITS: usize = 5;
const LANES: usize = 1 << LOW_BITS;

/// Derivative row of `g` with respect to enumerated coordinate `v` at `x`.
fn derivative_row(flat: &FlatPoly, lay: &Layout, x: &[f64], v: usize, row: &mut [f64]) {
    row.iter_mut().for_each(|r| *r = 0.0);
    for &t in &lay.occ[v] {
        let prod = lay.evars[t].iter().filter(|&&u| u != v).fold(flat.terms[t].coef.re, |acc, &u| acc * x[u]);
        row[lay.slot[t]] += prod;
    }
}

/// `Σ_i |g_i + o_{i,j}|` for every lane `j`.
#[inline(always)]
fn lane_scores(g: &[f64], offsets: &[[f64; LANES]]) -> [f64; LANES] {
    let mut acc = [0.0f64; LANES];
    for (&b, o) in g.iter().zip(offsets) {
        for j in 0..LANES {
            acc[j] += (b + o[j]).abs();
        }
    }
    acc
}

/// Walks all sign patterns of the low `low_bits` enumerated coordinates with
/// the remaining ones fixed by `x`. The lowest `LOW_BITS` coordinates are
/// expanded into lanes; the rest follow a Gray code. Returns the best
/// objective and the pattern (bit set = coordinate flipped from `x`).
fn walk(flat: &FlatPoly, lay: &Layout, x: &mut [f64], low_bits: usize) -> (f64, u64) {
    let e = x.len();
    let w = lay.width;
    let lanes_bits = low_bits.min(LOW_BITS);
    let mut g = vec![0.0f64; w];
    for (t, term) in flat.terms.iter().enumerate() {
        let prod = lay.evars[t].iter().fold(term.coef.re, |acc, &u| acc * x[u]);
        g[lay.slot[t]] += prod;
    }
    let mut deriv = vec![0.0f64; e * w];
    let mut stale = vec![true; e];
    let mut offsets = vec![[0.0f64; LANES]; w];
    let mut offsets_stale = true;
    let mut best = f64::NEG_INFINITY;
    let mut best_word = 0u64;
    let steps: u64 = 1u64 << (low_bits - lanes_bits);
    for k in 0..steps {
        if k > 0 {
            let v = lanes_bits + k.trailing_zeros() as usize;
            let row = &mut deriv[v * w..(v + 1) * w];
            if stale[v] {
                derivative_row(flat, lay, x, v, row);
                stale[v] = false;
            }
            let step = -2.0 * x[v];
            for (gi, ri) in g.iter_mut().zip(row.iter()) {
                *gi += step * ri;
            }
            x[v] = -x[v];
            for &u in &lay.cooc[v] {
                stale[u] = true;
                offsets_stale |= u < lanes_bits;
            }
        }
        if offsets_stale {
            let mut rows = vec![vec![0.0f64; w]; lanes_bits];
            for (b, row) in rows.iter_mut().enumerate() {
                derivative_row(flat, lay, x, b, row);
            }
            // lanes beyond 2^lanes_bits repeat the base pattern
            for (i, o) in offsets.iter_mut().enumerate() {
                for (j, oj) in o.iter_mut().enumerate() {
                    let j = if j < 1 << lanes_bits { j } else { 0 };
                    *oj = (0..lanes_bits).filter(|b| j >> b & 1 == 1).map(|b| -2.0 * x[b] * rows[b][i]).sum();
                }
            }
            offsets_stale = false;
        }
        let acc = lane_scores(&g, &offsets);
        for (j, &val) in acc.iter().enumerate() {
            if val > best {
                best = val;
                best_word = ((k ^ (k >> 1)) << lanes_bits) | j as u64;
            }
        }
    }
    (best, best_word)
}

/// Exact maximum of `|P|` over the cube. `budget_log2` caps `|E|`, the number
/// of enumerated coordinates (the closed-form set does not count).
pub(crate) fn vertex_exact(p: &MultiPolynomial, closed: Option<Vec<usize>>, budget_log2: u32) -> Result<VertexResult> {
    let (flat, closed, enumerated) = plan(p, closed)?;
    let required = enumerated.len() as u32;
    if required > budget_log2 {
        return Err(Error::VertexBudget { required_log2: required, budget_log2 });
    }
    if required > 62 {
        return Err(Error::VertexBudget { required_log2: required, budget_log2: 62 });
    }
    let lay = layout(&flat, &closed, &enumerated)?;
    let e = enumerated.len();
    // last enumerated coordinate is pinned to +1 by the sign symmetry
    let free = e.saturating_sub(1);
    let chunk_bits = free.min(CHUNK_BITS);
    let low_bits = free - chunk_bits;

    let results: Vec<(f64, Vec<f64>)> = (0..1u64 << chunk_bits)
        .into_par_iter()
        .map(|chunk| {
            let mut x = vec![1.0f64; e];
            for b in 0..chunk_bits {
                if chunk >> b & 1 == 1 {
                    x[low_bits + b] = -1.0;
                }
            }
            let start = x.clone();
            let (val, word) = walk(&flat, &lay, &mut x, low_bits);
            let mut best_x = start;
            for b in 0..low_bits {
                if word >> b & 1 == 1 {
                    best_x[b] = -1.0;
                }
            }
            (val, best_x)
        })
        .collect();
    let (_, ex) = results
        .into_iter()
        .fold(None::<(f64, Vec<f64>)>, |acc, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        })
        .unwrap_or((0.0, Vec::new()));

    // rebuild the full vertex: enumerated signs, then closed coordinates aligned with g
    let mut full = vec![1.0f64; flat.dim];
    for (k, &v) in enumerated.iter().enumerate() {
        full[v] = ex[k];
    }
    let mut g = vec![0.0f64; lay.width];
    for (t, term) in flat.terms.iter().enumerate() {
        let prod = lay.evars[t].iter().fold(term.coef.re, |acc, &u| acc * ex[u]);
        g[lay.slot[t]] += prod;
    }
    let sign0 = if g[0] < 0.0 { -1.0 } else { 1.0 };
    for (k, &s) in closed.iter().enumerate() {
        full[s] = if g[k + 1] < 0.0 { -sign0 } else { sign0 };
    }
    let value = flat.eval_real(&full).abs();
    Ok(VertexResult { value, witness: full })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{CoefficientKey, MultiDegree, MultiIndex};
    use crate::scalar::{re, Field};

    fn bilinear(m: &[&[f64]]) -> MultiPolynomial {
        let terms = m.iter().enumerate().flat_map(|(i, row)| {
            row.iter().enumerate().map(move |(j, &c)| {
                (CoefficientKey::new(vec![MultiIndex::var(i), MultiIndex::var(j)]), re(c))
            })
        });
        MultiPolynomial::from_terms(Field::Real, MultiDegree::ones(2).unwrap(), vec![m.len(), m[0].len()], terms)
            .unwrap()
    }

    /// Brute force over every vertex of the cube.
    fn brute(p: &MultiPolynomial) -> f64 {
        let flat = FlatPoly::new(p);
        let mut best = 0.0f64;
        for mask in 0u64..1 << flat.dim {
            let x: Vec<f64> = (0..flat.dim).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            best = best.max(flat.eval_real(&x).abs());
        }
        best
    }

    #[test]
    fn identity_and_difference_forms() {
        let p = bilinear(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(vertex_exact(&p, None, 22).unwrap().value, 2.0);
        let q = bilinear(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(vertex_exact(&q, None, 22).unwrap().value, 2.0);
    }

    #[test]
    fn matches_brute_force_on_dense_forms() {
        let m: [&[f64]; 3] = [&[0.3, -1.2, 0.7, 2.0], &[1.1, 0.4, -0.9, 0.2], &[-0.5, 0.8, 0.6, -1.4]];
        let p = bilinear(&m);
        let res = vertex_exact(&p, None, 22).unwrap();
        assert!((res.value - brute(&p)).abs() < 1e-12);
        let flat = FlatPoly::new(&p);
        assert!((flat.eval_real(&res.witness).abs() - res.value).abs() < 1e-12);
    }

    #[test]
    fn budget_refusal_reports_requirement() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| (0..30).map(|j| ((i * 7 + j * 3) % 5) as f64 - 2.0).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let p = bilinear(&refs);
        match vertex_exact(&p, None, 22) {
            Err(Error::VertexBudget { required_log2, budget_log2 }) => {
                assert_eq!(required_log2, 30);
                assert_eq!(budget_log2, 22);
            }
            _ => panic!("expected budget refusal"),
        }
    }

    #[test]
    fn rejects_non_multiaffine() {
        let p = MultiPolynomial::single_block(Field::Real, 2, 1, [(MultiIndex::from_pairs([(0, 2)]), re(1.0))])
            .unwrap();
        assert!(matches!(vertex_exact(&p, None, 22), Err(Error::Unsupported(_))));
    }
}
