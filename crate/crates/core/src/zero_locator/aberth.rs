//! Aberth–Ehrlich simultaneous iteration for all roots of a polynomial.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::poly::UnivariatePoly;

const MAX_ITERATIONS: usize = 1000;

fn eval_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Coefficients of `p(z + shift)`.
fn taylor_shift(coeffs: &[C64], shift: C64) -> Vec<C64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = out[j + 1];
            out[j] += shift * next;
        }
    }
    out
}

/// All roots of `p`, counted with multiplicity, in no particular order.
///
/// Convergence is fast for simple roots; callers with repeated roots should
/// reduce to square-free factors first.
pub fn roots(p: &UnivariatePoly) -> Vec<C64> {
    let Some(n) = p.degree() else {
        return Vec::new();
    };
    if n == 0 {
        return Vec::new();
    }
    let monic = p.monic();
    let c = monic.coeffs();
    if n == 1 {
        return vec![-c[0]];
    }
    let center = -c[n - 1] / n as f64;
    let shifted = taylor_shift(c, center);
    // Fujiwara's bound on the root moduli of the centred polynomial.
    let radius = (0..n)
        .map(|k| {
            let a = shifted[k].norm();
            let a = if k == 0 { a / 2.0 } else { a };
            2.0 * a.powf(1.0 / (n - k) as f64)
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
        * 0.5;
    let mut z: Vec<C64> = (0..n)
        .map(|k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.7))
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (pv, dpv) = eval_with_derivative(c, z[i]);
            if pv == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let w = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[i] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_step <= 4.0 * f64::EPSILON {
            break;
        }
    }
    for zi in z.iter_mut() {
        *zi = newton_polish(c, *zi, 3);
    }
    z
}

/// A few Newton steps on a polynomial, keeping the best iterate.
pub fn newton_polish(coeffs: &[C64], z0: C64, steps: usize) -> C64 {
    let mut z = z0;
    let mut best = (eval_with_derivative(coeffs, z).0.norm(), z);
    for _ in 0..steps {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if dp == C64::new(0.0, 0.0) {
            break;
        }
        z -= p / dp;
        let v = eval_with_derivative(coeffs, z).0.norm();
        if v < best.0 {
            best = (v, z);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_known_roots() {
        let expected = vec![
            C64::new(-2.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.5, 0.25),
            C64::new(3.0, 0.0),
        ];
        let p = UnivariatePoly::from_roots(&expected);
        let found = roots(&p);
        assert_eq!(found.len(), expected.len());
        for e in &expected {
            let d = found.iter().map(|z| (z - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-12, "{e} missed by {d}");
        }
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = UnivariatePoly::from_real(&[1.0, -2.0, 0.5, 3.0]);
        let s = C64::new(0.3, -1.1);
        let q = UnivariatePoly::new(taylor_shift(p.coeffs(), s));
        let z = C64::new(0.7, 0.2);
        assert!((q.eval(z) - p.eval(z + s)).norm() < 1e-12);
    }

    #[test]
    fn roots_of_unity() {
        let mut cs = vec![C64::new(0.0, 0.0); 13];
        cs[0] = C64::new(-1.0, 0.0);
        cs[12] = C64::new(1.0, 0.0);
        let r = roots(&UnivariatePoly::new(cs));
        assert_eq!(r.len(), 12);
        for z in r {
            assert!((z.norm() - 1.0).abs() < 1e-13);
        }
    }
}
