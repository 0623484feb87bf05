//! Exact maximization of `|q|` for a univariate polynomial `q` on `[-1, 1]`,
//! and phase search for complex `q` on the unit circle.

use std::f64::consts::PI;

use crate::scalar::Scalar;

const ROOT_TOL: f64 = 1e-12;

pub(crate) fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

pub(crate) fn horner_c(c: &[Scalar], z: Scalar) -> Scalar {
    c.iter().rev().fold(Scalar::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn trim(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// Real roots of `c` in `[a, b]`, found by isolating them between the
/// critical points (roots of the derivative, recursively) and bisecting.
pub(crate) fn roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let c = trim(c);
    match c.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let r = -c[0] / c[1];
            return if (a..=b).contains(&r) { vec![r] } else { Vec::new() };
        }
        _ => {}
    }
    let mut knots = vec![a];
    knots.extend(roots_in(&derivative(c), a, b));
    knots.push(b);
    let mut out: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (mut flo, fhi) = (horner(c, lo), horner(c, hi));
        if flo == 0.0 {
            out.push(lo);
            continue;
        }
        if fhi == 0.0 || flo.signum() == fhi.signum() {
            continue;
        }
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = horner(c, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    if horner(c, b) == 0.0 {
        out.push(b);
    }
    out.dedup_by(|x, y| (*x - *y).abs() <= ROOT_TOL);
    out
}

/// `argmax_{t ∈ [-1,1]} |q(t)|` over the endpoints and the critical points.
pub(crate) fn max_abs_on_interval(c: &[f64]) -> (f64, f64) {
    let mut best = (-1.0, horner(c, -1.0).abs());
    let mut consider = |t: f64| {
        let v = horner(c, t).abs();
        if v > best.1 {
            best = (t, v);
        }
    };
    consider(1.0);
    for t in roots_in(&derivative(c), -1.0, 1.0) {
        consider(t);
    }
    best
}

/// Maximizes `|q(e^{iθ})|` by sampling `samples` phases and refining the best
/// one with golden-section search on its neighbourhood.
pub(crate) fn max_abs_on_circle(c: &[Scalar], samples: usize) -> (Scalar, f64) {
    let f = |theta: f64| horner_c(c, Scalar::from_polar(1.0, theta)).norm();
    let step = 2.0 * PI / samples as f64;
    let (mut th, mut val) = (0.0, f(0.0));
    for k in 1..samples {
        let t = k as f64 * step;
        let v = f(t);
        if v > val {
            th = t;
            val = v;
        }
    }
    let (mut lo, mut hi) = (th - step, th + step);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    if fm > val {
        th = mid;
        val = fm;
    }
    (Scalar::from_polar(1.0, th), val)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_cubic() {
        // (t - 0.5)(t + 0.25)(t - 2) = t^3 - 2.25 t^2 + 0.375 t + 0.25
        let c = [0.25, 0.375, -2.25, 1.0];
        let r = roots_in(&c, -1.0, 1.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 0.25).abs() < 1e-11);
        assert!((r[1] - 0.5).abs() < 1e-11);
    }

    #[test]
    fn interior_maximum() {
        let c = [0.0, 1.0, 0.0, -1.0];
        // t - t^3 peaks at t = 1/sqrt(3)
        let (t, v) = max_abs_on_interval(&c);
        assert!((t.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        assert!((v - 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn circle_maximum_of_affine() {
        // |1 + i z| is maximized at z = -i with value 2
        let c = [Scalar::new(1.0, 0.0), Scalar::new(0.0, 1.0)];
        let (z, v) = max_abs_on_circle(&c, 16);
        assert!((v - 2.0).abs() < 1e-12);
        assert!((z - Scalar::new(0.0, -1.0)).norm() < 1e-6);
    }
}
