mod common;

use multipoly::bhlab::{ksz_build, ksz_form, ksz_lift, ksz_lift_identity, split_embed, BlockPartition};
use multipoly::compose::{compose_linear, LinearMap, VectorMultiPolynomial};
use multipoly::norms::{
    ball_transfer_check, continuity_certificate, sup_norm_estimate_with, sup_norm_multilinear_exact, NormOptions,
};
use multipoly::polarize::{poly_from_form, polarization_value, to_symmetric_form};
use multipoly::{coeffs_from_values, Field, MultiDegree, MultiPolynomial, Scalar};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

use common::{max_coeff_diff, rel_err};

#[derive(Clone, Debug)]
struct Shape {
    field: Field,
    degrees: Vec<u32>,
    dims: Vec<usize>,
    seed: u64,
}

impl Shape {
    fn md(&self) -> MultiDegree {
        MultiDegree::new(self.degrees.clone()).unwrap()
    }

    fn poly(&self) -> MultiPolynomial {
        common::poly(&mut common::rng(self.seed), self.field, &self.md(), &self.dims, 0.6)
    }
}

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![3 => Just(Field::Real), 1 => Just(Field::Complex)]
}

fn shape(max_blocks: usize, max_degree: u32, max_dim: usize) -> impl Strategy<Value = Shape> {
    (field(), prop::collection::vec((1..=max_degree, 1..=max_dim), 1..=max_blocks), any::<u64>()).prop_map(
        |(field, blocks, seed)| Shape {
            field,
            degrees: blocks.iter().map(|b| b.0).collect(),
            dims: blocks.iter().map(|b| b.1).collect(),
            seed,
        },
    )
}

fn multilinear(max_blocks: usize, max_dim: usize) -> impl Strategy<Value = Shape> {
    (prop::collection::vec(1..=max_dim, 1..=max_blocks), any::<u64>()).prop_map(|(dims, seed)| Shape {
        field: Field::Real,
        degrees: vec![1; dims.len()],
        dims,
        seed,
    })
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn evaluation_is_multihomogeneous(s in shape(3, 3, 3), lambdas in prop::collection::vec(-2.0f64..2.0, 3)) {
        let p = s.poly();
        let mut rng = common::rng(s.seed ^ 1);
        let xs = common::point(&mut rng, &s.dims, s.field);
        let scaled: Vec<Vec<Scalar>> =
            xs.iter().zip(&lambdas).map(|(x, &l)| x.iter().map(|v| v * l).collect()).collect();
        let factor: f64 = lambdas.iter().zip(&s.degrees).map(|(l, &n)| l.powi(n as i32)).product();
        let lhs = p.eval(&scaled).unwrap();
        let rhs = p.eval(&xs).unwrap() * factor;
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1e-300) || (lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn evaluation_is_linear_in_the_polynomial(s in shape(3, 3, 3), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let p = s.poly();
        let q = Shape { seed: s.seed.wrapping_add(1), ..s.clone() }.poly();
        let combo = p.lin_comb(Scalar::new(a, 0.0), &q, Scalar::new(b, 0.0)).unwrap();
        let xs = common::point(&mut common::rng(s.seed ^ 2), &s.dims, s.field);
        let expected = p.eval(&xs).unwrap() * a + q.eval(&xs).unwrap() * b;
        prop_assert!(rel_err(combo.eval(&xs).unwrap(), expected) < 1e-12);
    }

    #[test]
    fn block_restriction_is_recovered_by_interpolation(s in shape(3, 3, 3), block in 0usize..3) {
        let p = s.poly();
        let block = block % s.dims.len();
        let frozen = common::point(&mut common::rng(s.seed ^ 3), &s.dims, s.field);
        let restricted = p.restrict_to_block(block, &frozen).unwrap();
        let f = |y: &[Vec<Scalar>]| {
            let mut xs = frozen.clone();
            xs[block] = y[0].clone();
            p.eval(&xs).unwrap()
        };
        let rec = coeffs_from_values(
            f,
            &MultiDegree::new(vec![s.degrees[block]]).unwrap(),
            &[s.dims[block]],
            restricted.field(),
        )
        .unwrap();
        prop_assert!(max_coeff_diff(&restricted, &rec) < 1e-9);
    }

    #[test]
    fn json_round_trip_is_exact(s in shape(3, 3, 4)) {
        let p = s.poly();
        let text = p.to_json().unwrap();
        let back = MultiPolynomial::from_json(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn polarization_round_trip(s in shape(1, 4, 4)) {
        let p = s.poly();
        let back = poly_from_form(&to_symmetric_form(&p).unwrap()).unwrap();
        prop_assert!(max_coeff_diff(&p, &back) < 1e-10);
    }

    #[test]
    fn polarization_ignores_base_point(s in shape(1, 4, 3)) {
        let p = s.poly();
        let (n, d) = (s.degrees[0] as usize, s.dims[0]);
        let mut rng = common::rng(s.seed ^ 4);
        let xs = common::point(&mut rng, &vec![d; n], s.field);
        let x0 = common::point(&mut rng, &[d], s.field).remove(0);
        let form = to_symmetric_form(&p).unwrap();
        prop_assert!(rel_err(polarization_value(&p, &x0, &xs).unwrap(), form.eval(&xs).unwrap()) < 1e-9);
        let mut swapped = xs.clone();
        swapped.reverse();
        prop_assert!(rel_err(form.eval(&swapped).unwrap(), form.eval(&xs).unwrap()) < 1e-12);
    }

    #[test]
    fn bracket_is_ordered_and_below_coefficient_sum(s in shape(3, 2, 3)) {
        let p = s.poly();
        let est = sup_norm_estimate_with(&p, &NormOptions::default().with_starts(16));
        prop_assert!(est.lower <= est.upper);
        prop_assert!(est.upper <= p.coeff_abs_sum() * (1.0 + 1e-12));
        let at_witness = p.eval(&est.witness).unwrap().norm();
        prop_assert!((at_witness - est.lower).abs() <= 1e-9 * est.lower.max(1.0));
    }

    #[test]
    fn exact_norm_scales_with_the_polynomial(s in multilinear(3, 3), lambda in -3.0f64..3.0) {
        let p = s.poly();
        let scaled = p.scale(Scalar::new(lambda, 0.0)).unwrap();
        let a = sup_norm_multilinear_exact(&p).unwrap().lower;
        let b = sup_norm_multilinear_exact(&scaled).unwrap().lower;
        prop_assert!((b - lambda.abs() * a).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn ascent_reaches_the_exact_norm(s in multilinear(3, 3)) {
        let p = s.poly();
        let exact = sup_norm_multilinear_exact(&p).unwrap();
        let ascent = sup_norm_estimate_with(&p, &NormOptions::default().ascent_only());
        prop_assert!((ascent.lower - exact.lower).abs() <= 1e-6);
        prop_assert!(ascent.upper >= exact.lower * (1.0 - 1e-12));
    }

    #[test]
    fn continuity_certificate_holds(s in shape(3, 3, 3)) {
        let r = continuity_certificate(&s.poly(), 200, &NormOptions::default().with_seed(s.seed)).unwrap();
        prop_assert_eq!(r.violations, 0);
    }

    #[test]
    fn centered_ball_maximum_is_controlled(s in shape(2, 3, 2), radius in 0.1f64..2.0) {
        let p = s.poly();
        let center = common::point(&mut common::rng(s.seed ^ 5), &s.dims, s.field);
        let r = ball_transfer_check(&p, &center, radius, 256, 0.05).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn composition_is_functorial(s in shape(2, 2, 2), outputs in 1usize..=2) {
        let mut rng = common::rng(s.seed ^ 6);
        let p = common::vector(&mut rng, outputs, s.field, &s.md(), &s.dims, 0.6);
        let t1 = common::map(&mut rng, 2, outputs, s.field);
        let t2 = common::map(&mut rng, 2, 2, s.field);
        let us: Vec<LinearMap> = s.dims.iter().map(|&d| common::map(&mut rng, d, 2, s.field)).collect();
        let vs: Vec<LinearMap> = (0..s.dims.len())
            .map(|_| {
                let e = rng.gen_range(1..=2);
                common::map(&mut rng, 2, e, s.field)
            })
            .collect();

        let nested = compose_linear(&t2, &compose_linear(&t1, &p, &us).unwrap(), &vs).unwrap();
        let uv: Vec<LinearMap> = us.iter().zip(&vs).map(|(u, v)| u.compose(v).unwrap()).collect();
        let flat = compose_linear(&t2.compose(&t1).unwrap(), &p, &uv).unwrap();
        for (a, b) in nested.components().iter().zip(flat.components()) {
            prop_assert!(max_coeff_diff(a, b) < 1e-9);
        }

        let ids: Vec<LinearMap> = s.dims.iter().map(|&d| LinearMap::identity(d)).collect();
        let same = compose_linear(&LinearMap::identity(outputs), &p, &ids).unwrap();
        for (a, b) in same.components().iter().zip(p.components()) {
            prop_assert!(max_coeff_diff(a, b) < 1e-12);
        }
    }

    #[test]
    fn split_embedding_keeps_coefficients(s in shape(3, 2, 3)) {
        let p = s.poly();
        let q = split_embed(&p, &BlockPartition::concat(&s.dims)).unwrap();
        prop_assert_eq!(q.multidegree().degrees(), &[s.degrees.iter().sum::<u32>()][..]);
        let mut a: Vec<(f64, f64)> = p.terms().values().map(|c| (c.re, c.im)).collect();
        let mut b: Vec<(f64, f64)> = q.terms().values().map(|c| (c.re, c.im)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert_eq!(a, b);
        let xs = common::point(&mut common::rng(s.seed ^ 7), &s.dims, s.field);
        let joined: Vec<Scalar> = xs.iter().flatten().copied().collect();
        prop_assert!(rel_err(q.eval(&[joined]).unwrap(), p.eval(&xs).unwrap()) < 1e-12);
    }

    #[test]
    fn ksz_lift_has_unit_coefficients(r in 1usize..=4, degrees in prop::collection::vec(1u32..=2, 1..=2), seed in any::<u64>()) {
        let n = MultiDegree::new(degrees).unwrap();
        let inst = ksz_build(r, n.total(), seed).unwrap();
        let lifted = ksz_lift(&inst, &n).unwrap();
        prop_assert!(ksz_lift_identity(&lifted, r));
        let form = ksz_form(&inst).unwrap();
        let a = sup_norm_estimate_with(&lifted, &NormOptions::default()).lower;
        let b = sup_norm_estimate_with(&form, &NormOptions::default()).lower;
        prop_assert!((a - b).abs() < 1e-9 * b.max(1.0));
    }
}

#[test]
fn vector_polynomial_norm_is_componentwise_max() {
    let s = Shape { field: Field::Real, degrees: vec![1, 1], dims: vec![2, 2], seed: 9 };
    let p = s.poly();
    let q = Shape { seed: 10, ..s.clone() }.poly();
    let v = VectorMultiPolynomial::new(vec![p.clone(), q.clone()]).unwrap();
    let opts = NormOptions::default();
    let est = v.norm_estimate(&opts);
    let best = sup_norm_estimate_with(&p, &opts).lower.max(sup_norm_estimate_with(&q, &opts).lower);
    assert_eq!(est.lower, best);
}
