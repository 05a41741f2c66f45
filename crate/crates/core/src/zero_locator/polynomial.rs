//! Exact-structure backend: square-free decomposition, then roots of each
//! square-free factor.

use num_complex::Complex64 as C64;

use super::aberth::{newton_polish, roots};
use super::{Backend, Zero, ZeroAtlas, ZeroError};
use crate::poly::UnivariatePoly;

const GCD_TOL: f64 = 1e-9;

/// Splits `p = Π s_i^i` with each `s_i` square-free, via the chain
/// `g_0 = p`, `g_i = gcd(g_{i-1}, g_{i-1}')`.
///
/// Returns `(i, s_i)` for the nonconstant factors.
pub(crate) fn square_free_decomposition(p: &UnivariatePoly) -> Vec<(u32, UnivariatePoly)> {
    let mut chain = vec![p.monic()];
    while chain.last().and_then(|g| g.degree()).unwrap_or(0) > 0 {
        let g = chain.last().expect("nonempty chain");
        let next = UnivariatePoly::gcd(g, &g.derivative(), GCD_TOL);
        chain.push(next);
    }
    // h_i = g_{i-1} / g_i holds every root of multiplicity >= i once.
    let h: Vec<UnivariatePoly> = chain
        .windows(2)
        .map(|w| w[0].div_rem(&w[1]).0)
        .collect();
    let mut factors = Vec::new();
    for i in 0..h.len() {
        let s = match h.get(i + 1) {
            Some(next) => h[i].div_rem(next).0,
            None => h[i].clone(),
        };
        if s.degree().unwrap_or(0) > 0 {
            factors.push((i as u32 + 1, s));
        }
    }
    factors
}

/// Every root of `p` in ℂ with its multiplicity.
pub fn polynomial_zeros(p: &UnivariatePoly) -> Result<Vec<Zero>, ZeroError> {
    if p.is_zero() {
        return Err(ZeroError::IdenticallyZero);
    }
    let coeffs = p.coeffs();
    let origin = coeffs.iter().take_while(|c| **c == C64::new(0.0, 0.0)).count();
    let rest = UnivariatePoly::new(coeffs[origin..].to_vec());
    let mut zeros = Vec::new();
    if origin > 0 {
        zeros.push(Zero {
            location: C64::new(0.0, 0.0),
            multiplicity: origin as u32,
        });
    }
    let monic = rest.monic();
    for (mult, factor) in square_free_decomposition(&rest) {
        // A root of multiplicity m is a simple root of p^{(m-1)}.
        let polisher = monic.nth_derivative(mult as usize - 1);
        for z in roots(&factor) {
            let polished = newton_polish(polisher.coeffs(), z, 4);
            let location = if (polished - z).norm() <= 1e-6 * (1.0 + z.norm()) {
                polished
            } else {
                z
            };
            zeros.push(Zero {
                location,
                multiplicity: mult,
            });
        }
    }
    Ok(zeros)
}

/// Zeros of `p` in `|z| ≤ r` (exact backend).
pub fn locate_zeros_polynomial(p: &UnivariatePoly, r: f64) -> Result<ZeroAtlas, ZeroError> {
    Ok(ZeroAtlas::new(r, polynomial_zeros(p)?, Backend::Exact))
}
