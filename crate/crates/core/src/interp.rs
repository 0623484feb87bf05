//! Coefficient recovery from a black-box evaluator.
//!
//! Each block uses the monomials of degree `nᵢ` in `dᵢ` variables as basis and
//! samples at the principal lattice `{β/nᵢ : |β| = nᵢ}` with coordinate `j`
//! scaled by `p_j^{1/(2nᵢ)}` (`p_j` the `j`-th prime). A nonzero homogeneous
//! polynomial cannot vanish on the whole lattice, so every per-block system is
//! square and invertible. The full sample grid is the product of the block
//! lattices and the system matrix is the Kronecker product of the block
//! matrices, which is inverted one mode at a time.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expand::weak_compositions;
use crate::index::{eval_monomial_unchecked, CoefficientKey, MultiDegree, MultiIndex};
use crate::poly::MultiPolynomial;
use crate::scalar::{re, Field, Scalar};

/// Relative residual allowed between the evaluator and the recovered polynomial.
pub const RESIDUAL_THRESHOLD: f64 = 1e-8;
const MAX_CONDITION: f64 = 1e12;
const MAX_SAMPLES: usize = 2_000_000;
const CHECK_POINTS: usize = 8;

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131,
];

struct BlockPlan {
    basis: Vec<MultiIndex>,
    points: Vec<Vec<f64>>,
    /// Inverse of the square sample matrix `V[s][α] = x_s^α`.
    inverse: DMatrix<f64>,
}

impl BlockPlan {
    fn new(n: u32, d: usize) -> Result<Self> {
        if d > PRIMES.len() {
            return Err(Error::Recovery(format!("block dimension {d} exceeds supported maximum {}", PRIMES.len())));
        }
        let comps = weak_compositions(n, d);
        let basis: Vec<MultiIndex> = comps.iter().map(|c| MultiIndex::from_dense(c)).collect();
        let scale: Vec<f64> = (0..d).map(|j| f64::from(PRIMES[j]).powf(1.0 / (2.0 * f64::from(n)))).collect();
        let points: Vec<Vec<f64>> = comps
            .iter()
            .map(|c| c.iter().zip(&scale).map(|(&b, s)| s * f64::from(b) / f64::from(n)).collect())
            .collect();
        let size = basis.len();
        let v = DMatrix::from_fn(size, size, |s, a| eval_monomial_unchecked(&points[s], &basis[a]));
        let svd = v.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 0.0) || smax / smin > MAX_CONDITION {
            return Err(Error::Recovery(format!(
                "sample matrix for degree {n} in {d} variables is ill-conditioned (condition {:e})",
                smax / smin
            )));
        }
        let inverse = svd
            .pseudo_inverse(0.0)
            .map_err(|e| Error::Recovery(format!("pseudo-inverse failed: {e}")))?;
        Ok(BlockPlan { basis, points, inverse })
    }
}

/// The sample grid and per-block inverses for one shape.
pub struct InterpolationPlan {
    multidegree: MultiDegree,
    dims: Vec<usize>,
    blocks: Vec<BlockPlan>,
}

impl InterpolationPlan {
    pub fn new(multidegree: &MultiDegree, dims: &[usize]) -> Result<Self> {
        if dims.len() != multidegree.blocks() {
            return Err(crate::error::shape("dims and multidegree disagree on the number of blocks"));
        }
        let blocks = multidegree
            .degrees()
            .iter()
            .zip(dims)
            .map(|(&n, &d)| BlockPlan::new(n, d))
            .collect::<Result<Vec<_>>>()?;
        let total = blocks.iter().try_fold(1usize, |acc, b| acc.checked_mul(b.basis.len()));
        match total {
            Some(t) if t <= MAX_SAMPLES => {}
            _ => return Err(Error::Recovery("sample grid too large".into())),
        }
        Ok(InterpolationPlan { multidegree: multidegree.clone(), dims: dims.to_vec(), blocks })
    }

    pub fn num_samples(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.len()).product()
    }

    /// Sample points in row-major order over the per-block lattices.
    pub fn samples(&self) -> Vec<Vec<Vec<Scalar>>> {
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.basis.len()).collect();
        (0..self.num_samples())
            .map(|flat| {
                let idx = unravel(flat, &sizes);
                idx.iter()
                    .zip(&self.blocks)
                    .map(|(&s, b)| b.points[s].iter().map(|&x| re(x)).collect())
                    .collect()
            })
            .collect()
    }

    /// `∏ᵢ Σ |Vᵢ⁻¹|`: bounds `Σ|c_α|` by this constant times the largest
    /// absolute sample value.
    pub fn grid_constant(&self) -> f64 {
        self.blocks.iter().map(|b| b.inverse.iter().map(|x| x.abs()).sum::<f64>()).product()
    }

    /// Solves for coefficients given values in the order of [`samples`](Self::samples).
    pub fn solve(&self, values: &[Scalar]) -> Result<BTreeMap<CoefficientKey, Scalar>> {
        if values.len() != self.num_samples() {
            return Err(Error::Recovery(format!("expected {} values, got {}", self.num_samples(), values.len())));
        }
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.basis.len()).collect();
        let mut data = values.to_vec();
        for (mode, block) in self.blocks.iter().enumerate() {
            data = mode_product(&data, &sizes, mode, &block.inverse);
        }
        let mut out = BTreeMap::new();
        for (flat, c) in data.into_iter().enumerate() {
            let idx = unravel(flat, &sizes);
            let key = CoefficientKey::new(idx.iter().zip(&self.blocks).map(|(&a, b)| b.basis[a].clone()).collect());
            out.insert(key, c);
        }
        Ok(out)
    }
}

fn unravel(mut flat: usize, sizes: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        idx[k] = flat % sizes[k];
        flat /= sizes[k];
    }
    idx
}

/// Applies `w` along axis `mode` of a row-major tensor with the given sizes.
fn mode_product(data: &[Scalar], sizes: &[usize], mode: usize, w: &DMatrix<f64>) -> Vec<Scalar> {
    let n = sizes[mode];
    let post: usize = sizes[mode + 1..].iter().product();
    let pre: usize = sizes[..mode].iter().product();
    let mut out = vec![Scalar::zero(); data.len()];
    for a in 0..pre {
        for c in 0..post {
            for i in 0..n {
                let mut acc = Scalar::zero();
                for j in 0..n {
                    acc += data[(a * n + j) * post + c] * w[(i, j)];
                }
                out[(a * n + i) * post + c] = acc;
            }
        }
    }
    out
}

/// Recovers the coefficient map of an evaluator that is exactly an
/// `(n₁,…,n_m)`-homogeneous polynomial of the declared shape.
///
/// Real-field shapes are sampled at real points and must produce real values.
/// The result is cross-checked at extra seeded points; a mismatch above
/// [`RESIDUAL_THRESHOLD`] means the evaluator is not of the declared shape.
pub fn coeffs_from_values<F>(f: F, multidegree: &MultiDegree, dims: &[usize], field: Field) -> Result<MultiPolynomial>
where
    F: Fn(&[Vec<Scalar>]) -> Scalar,
{
    let plan = InterpolationPlan::new(multidegree, dims)?;
    let samples = plan.samples();
    let values: Vec<Scalar> = samples.iter().map(|x| f(x)).collect();
    let mut scale = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if field == Field::Real {
        if let Some(v) = values.iter().find(|v| v.im.abs() > RESIDUAL_THRESHOLD * scale.max(1.0)) {
            return Err(Error::Recovery(format!("real-field evaluator returned complex value {v}")));
        }
    }
    let raw = plan.solve(&values)?;
    let cmax = raw.values().fold(0.0f64, |m, c| m.max(c.norm()));
    let cutoff = 1e-11 * cmax.max(1e-300);
    let terms = raw.into_iter().filter_map(|(k, c)| {
        let c = if field == Field::Real { re(c.re) } else { c };
        let c = Scalar::new(
            if c.re.abs() <= cutoff { 0.0 } else { c.re },
            if c.im.abs() <= cutoff { 0.0 } else { c.im },
        );
        (!c.is_zero()).then_some((k, c))
    });
    let p = MultiPolynomial::from_terms(field, multidegree.clone(), dims.to_vec(), terms)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0ef);
    let mut worst = 0.0f64;
    let mut checks = Vec::with_capacity(CHECK_POINTS);
    for _ in 0..CHECK_POINTS {
        let x: Vec<Vec<Scalar>> = dims
            .iter()
            .map(|&d| {
                (0..d)
                    .map(|_| match field {
                        Field::Real => re(rng.gen_range(-1.0..1.0)),
                        Field::Complex => Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    })
                    .collect()
            })
            .collect();
        let fx = f(&x);
        scale = scale.max(fx.norm());
        checks.push((p.eval(&x)?, fx));
    }
    for (px, fx) in checks {
        worst = worst.max((px - fx).norm());
    }
    if worst > RESIDUAL_THRESHOLD * scale.max(1.0) {
        return Err(Error::Recovery(format!(
            "evaluator is not {}-homogeneous on dims {:?}: residual {worst:e} at check points",
            plan.multidegree, plan.dims
        )));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(d: &[u32]) -> MultiDegree {
        MultiDegree::new(d.to_vec()).unwrap()
    }

    #[test]
    fn zero_evaluator_gives_zero_polynomial() {
        let p = coeffs_from_values(|_| Scalar::zero(), &md(&[2, 1]), &[2, 3], Field::Real).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn single_monomial_indicator() {
        // x_1 x_2 y_0^2 on dims (3, 2)
        let f = |x: &[Vec<Scalar>]| x[0][1] * x[0][2] * x[1][0] * x[1][0];
        let p = coeffs_from_values(f, &md(&[2, 2]), &[3, 2], Field::Real).unwrap();
        assert_eq!(p.num_terms(), 1);
        let (k, c) = p.terms().iter().next().unwrap();
        assert_eq!(k.alphas()[0], MultiIndex::from_pairs([(1, 1), (2, 1)]));
        assert_eq!(k.alphas()[1], MultiIndex::from_pairs([(0, 2)]));
        assert!((c.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_shape_is_reported() {
        // degree 3 evaluator declared as degree 2
        let f = |x: &[Vec<Scalar>]| x[0][0] * x[0][0] * x[0][1];
        let err = coeffs_from_values(f, &md(&[2]), &[2], Field::Real).unwrap_err();
        assert!(matches!(err, Error::Recovery(_)), "{err}");
    }

    #[test]
    fn complex_values_in_real_field_are_rejected() {
        let f = |x: &[Vec<Scalar>]| x[0][0] * Scalar::new(0.0, 1.0);
        assert!(coeffs_from_values(f, &md(&[1]), &[2], Field::Real).is_err());
        let p = coeffs_from_values(f, &md(&[1]), &[2], Field::Complex).unwrap();
        assert_eq!(p.num_terms(), 1);
    }

    #[test]
    fn desk_scale_blocks_are_well_conditioned() {
        for n in 1..=5 {
            for d in 1..=8 {
                BlockPlan::new(n, d).unwrap_or_else(|e| panic!("n={n} d={d}: {e}"));
            }
        }
    }
}
