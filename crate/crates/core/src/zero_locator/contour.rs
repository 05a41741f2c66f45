//! Circle contour integrals of the logarithmic derivative.

use std::cell::Cell;

use num_complex::Complex64 as C64;

use super::ZeroError;
use crate::exp_poly::ExpPoly;
use crate::quadrature::periodic_mean;

pub const INITIAL_NODES: usize = 256;
pub const MAX_NODES: usize = 1 << 18;
/// `|g(z)|` below this fraction of both the contour maximum and the local
/// term magnitude means a zero is too close to the contour.
pub const NEAR_ZERO: f64 = 1e-9;

/// Power sums `s_k = (1/2πi)∮ (z − c)^k g'(z)/g(z) dz`, i.e. `Σ m_a (a − c)^k`
/// over the zeros inside the circle.
#[derive(Clone, Debug)]
pub struct ContourMoments {
    pub moments: Vec<C64>,
    pub nodes: usize,
    /// Largest relative round-off `ε·magnitude/|g|` seen on the contour.
    pub noise: f64,
}

fn moments_with<F>(
    g: &ExpPoly,
    dg: &ExpPoly,
    center: C64,
    radius: f64,
    kmax: usize,
    max_nodes: usize,
    noise: &Cell<f64>,
    accept: F,
) -> Result<(ContourMoments, bool), ZeroError>
where
    F: FnMut(&Vec<C64>, &Vec<C64>) -> bool,
{
    let mut max_g = 0.0f64;
    let mut suspects: Vec<(f64, C64)> = Vec::new();
    let run = periodic_mean(
        |theta| {
            let u = C64::from_polar(1.0, theta);
            let z = center + u * radius;
            let gz = g.evaluate(z);
            let a = gz.norm();
            let mag = g.magnitude(z);
            if a == 0.0 || !a.is_finite() {
                return Err(ZeroError::ZeroNearContour(z));
            }
            max_g = max_g.max(a);
            if a < NEAR_ZERO * mag {
                suspects.push((a, z));
            }
            noise.set(noise.get().max(f64::EPSILON * mag / a));
            let base = u * radius * dg.evaluate(z) / gz;
            let mut out = Vec::with_capacity(kmax + 1);
            let mut uk = C64::new(1.0, 0.0);
            for _ in 0..=kmax {
                out.push(base * uk);
                uk *= u;
            }
            Ok(out)
        },
        INITIAL_NODES,
        max_nodes,
        accept,
    )?;
    if let Some(&(_, z)) = suspects.iter().find(|(a, _)| *a < NEAR_ZERO * max_g) {
        return Err(ZeroError::ZeroNearContour(z));
    }
    let mut rk = 1.0;
    let moments = run
        .value
        .iter()
        .map(|t| {
            let s = t * rk;
            rk *= radius;
            s
        })
        .collect();
    Ok((
        ContourMoments {
            moments,
            nodes: run.nodes,
            noise: noise.get(),
        },
        run.converged,
    ))
}

/// Moments `s_0..=s_kmax` on `|z − center| = radius`, converged to a relative
/// tolerance of `1e-12` or a hundred times the evaluation noise, whichever
/// is larger.
pub fn contour_moments(
    g: &ExpPoly,
    dg: &ExpPoly,
    center: C64,
    radius: f64,
    kmax: usize,
) -> Result<ContourMoments, ZeroError> {
    let noise = Cell::new(0.0);
    let (m, converged) = moments_with(g, dg, center, radius, kmax, MAX_NODES, &noise, |a, b| {
        let tol = 1e-12f64.max(100.0 * noise.get());
        a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() <= tol * (1.0 + y.norm()))
    })?;
    if !converged {
        return Err(ZeroError::NotConverged { center, radius });
    }
    Ok(m)
}

/// Number of zeros of `g` (with multiplicity) inside `|z − center| = radius`.
///
/// The trapezoidal estimate of `(1/2πi)∮ g'/g dz` is refined until two
/// successive levels agree and sit within 0.25 of an integer.
pub fn winding_number(g: &ExpPoly, center: C64, radius: f64) -> Result<i64, ZeroError> {
    if g.is_identically_zero() {
        return Err(ZeroError::IdenticallyZero);
    }
    let dg = g.differentiate();
    let noise = Cell::new(0.0);
    let (m, converged) = moments_with(g, &dg, center, radius, 0, MAX_NODES, &noise, |a, b| {
        let v = b[0];
        (a[0] - v).norm() < 1e-3 && (v.re - v.re.round()).abs() < 0.25 && v.im.abs() < 0.25
    })?;
    if !converged {
        return Err(ZeroError::NotConverged { center, radius });
    }
    Ok(m.moments[0].re.round() as i64)
}
