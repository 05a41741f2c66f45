//! Zeros with multiplicities of exponential polynomials inside a disk.
//!
//! Two backends produce a [`ZeroAtlas`]:
//!
//! - [`locate_zeros_polynomial`]: square-free decomposition plus Aberth
//!   iteration, for polynomials (and `p(z)e^{λz}`, which has the zeros of `p`).
//! - [`locate_zeros_analytic`]: recursive subdivision driven by the argument
//!   principle, for genuine exponential sums.
//!
//! Both are cross-checked against [`winding_number`] on the outer circle.

mod aberth;
mod analytic;
mod contour;
mod polynomial;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::exp_poly::ExpPoly;

pub use aberth::roots as aberth_roots;
pub use analytic::locate_zeros_analytic;
pub use contour::{contour_moments, winding_number, ContourMoments};
pub use polynomial::{locate_zeros_polynomial, polynomial_zeros};

/// Zeros closer than this (relative to `1 + |z|`) are one location.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Radius nudge applied when a zero sits on a counting circle.
pub const BOUNDARY_NUDGE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroError {
    #[error("the function is identically zero")]
    IdenticallyZero,
    #[error("zero near contour at {0}")]
    ZeroNearContour(C64),
    #[error("contour quadrature did not converge on |z - {center}| = {radius}")]
    NotConverged { center: C64, radius: f64 },
    #[error("subdivision stalled near {0}")]
    RefinementStall(C64),
    #[error("atlas holds {atlas} zeros but the winding number on |z| = {radius} is {winding}")]
    Inconsistent {
        atlas: u64,
        winding: i64,
        radius: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Zero {
    pub location: C64,
    pub multiplicity: u32,
}

/// Zeros of a function in the closed disk `|z| ≤ disk_radius`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroAtlas {
    pub disk_radius: f64,
    pub zeros: Vec<Zero>,
    pub backend: Backend,
}

/// Sort key `(|z|, arg z)` with `arg ∈ [0, 2π)`; moduli are bucketed at the
/// cluster tolerance so conjugate-symmetric zeros order by argument.
pub fn zero_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    let key = |z: &C64| {
        let m = (z.norm() / CLUSTER_TOL).round();
        let mut arg = z.im.atan2(z.re);
        if arg < 0.0 {
            arg += 2.0 * PI;
        }
        if z.norm() == 0.0 {
            arg = 0.0;
        }
        (m, arg)
    };
    let (ma, aa) = key(a);
    let (mb, ab) = key(b);
    ma.total_cmp(&mb).then(aa.total_cmp(&ab))
}

impl ZeroAtlas {
    pub(crate) fn new(disk_radius: f64, mut zeros: Vec<Zero>, backend: Backend) -> Self {
        zeros.retain(|z| z.location.norm() <= disk_radius);
        zeros.sort_by(|a, b| zero_order(&a.location, &b.location));
        Self {
            disk_radius,
            zeros,
            backend,
        }
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.zeros.iter().map(|z| z.multiplicity as u64).sum()
    }

    /// `n(t)`: zeros in the open disk `|z| < t`, multiplicities capped at `cap`.
    pub fn count_within(&self, t: f64, cap: Option<u32>) -> u64 {
        self.zeros
            .iter()
            .filter(|z| z.location.norm() < t)
            .map(|z| cap.map_or(z.multiplicity, |m| z.multiplicity.min(m)) as u64)
            .sum()
    }

    /// Smallest multiplicity present, `None` if the atlas is empty.
    pub fn min_multiplicity(&self) -> Option<u32> {
        self.zeros.iter().map(|z| z.multiplicity).min()
    }

    /// Distance from `|z| = t` to the nearest zero modulus.
    pub fn boundary_gap(&self, t: f64) -> f64 {
        self.zeros
            .iter()
            .map(|z| (z.location.norm() - t).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Total multiplicity inside a circle must equal the winding number of `g`
    /// around it.
    ///
    /// The circle is placed in `(0.98 r, r)` midway across the widest gap
    /// between zero moduli, so the quadrature never runs next to a zero.
    pub fn verify_conservation(&self, g: &ExpPoly) -> Result<(), ZeroError> {
        let r = self.check_radius();
        let winding = winding_number(g, C64::new(0.0, 0.0), r)?;
        let inside = self.count_within(r, None);
        if winding != inside as i64 {
            return Err(ZeroError::Inconsistent {
                atlas: inside,
                winding,
                radius: r,
            });
        }
        Ok(())
    }

    fn check_radius(&self) -> f64 {
        let hi = self.disk_radius;
        let lo = 0.98 * hi;
        let mut cuts: Vec<f64> = self
            .zeros
            .iter()
            .map(|z| z.location.norm())
            .filter(|&m| m > lo && m < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        let (a, b) = cuts
            .windows(2)
            .map(|w| (w[0], w[1]))
            .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
            .expect("at least two cut points");
        0.5 * (a + b)
    }
}

/// Result of [`locate_zeros`]: the atlas plus the radius actually used.
#[derive(Clone, Debug)]
pub struct LocatedZeros {
    pub atlas: ZeroAtlas,
    /// `effective radius − requested radius` (zero unless a zero sat on the circle).
    pub perturbation: f64,
}

/// Zeros of `g` in `|z| ≤ r`, choosing the exact backend whenever `g` is
/// `p(z)e^{λz}` and nudging `r` outward when a zero lies on the circle.
pub fn locate_zeros(g: &ExpPoly, r: f64) -> Result<LocatedZeros, ZeroError> {
    if g.is_identically_zero() {
        return Err(ZeroError::IdenticallyZero);
    }
    let mut nudge = 0.0;
    let mut step = BOUNDARY_NUDGE * r.max(1.0);
    for _ in 0..12 {
        let radius = r + nudge;
        let attempt = match g.single_frequency() {
            Some((_, p)) => locate_zeros_polynomial(p, radius),
            None => locate_zeros_analytic(g, radius),
        }
        .and_then(|atlas| {
            atlas.verify_conservation(g)?;
            Ok(atlas)
        });
        match attempt {
            Ok(atlas) => {
                return Ok(LocatedZeros {
                    atlas,
                    perturbation: nudge,
                })
            }
            Err(ZeroError::ZeroNearContour(_)) => {
                nudge += step;
                step *= 10.0;
            }
            Err(e) => return Err(e),
        }
    }
    Err(ZeroError::ZeroNearContour(C64::new(r, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::UnivariatePoly;

    #[test]
    fn order_prefers_smaller_argument_in_zero_to_two_pi() {
        let mut zs = vec![C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0)];
        zs.sort_by(zero_order);
        assert_eq!(zs, vec![C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)]);
    }

    #[test]
    fn counting_respects_cap_and_open_disk() {
        let atlas = ZeroAtlas::new(
            5.0,
            vec![
                Zero {
                    location: C64::new(0.0, 0.0),
                    multiplicity: 3,
                },
                Zero {
                    location: C64::new(2.0, 0.0),
                    multiplicity: 1,
                },
            ],
            Backend::Exact,
        );
        assert_eq!(atlas.count_within(2.0, None), 3);
        assert_eq!(atlas.count_within(2.5, None), 4);
        assert_eq!(atlas.count_within(2.5, Some(2)), 3);
    }

    #[test]
    fn auto_backend_picks_exact_for_single_frequency() {
        let g = ExpPoly::term(
            UnivariatePoly::from_roots(&[C64::new(1.0, 0.0)]),
            C64::new(2.0, 0.0),
        );
        let located = locate_zeros(&g, 2.0).unwrap();
        assert_eq!(located.atlas.backend, Backend::Exact);
        assert_eq!(located.atlas.total_multiplicity(), 1);
    }

    #[test]
    fn closed_disk_keeps_boundary_zero() {
        let g = ExpPoly::polynomial(UnivariatePoly::from_roots(&[C64::new(1.0, 0.0)]));
        let located = locate_zeros(&g, 1.0).unwrap();
        assert_eq!(located.atlas.total_multiplicity(), 1);
        assert_eq!(located.atlas.count_within(1.0, None), 0);
    }

    #[test]
    fn zero_function_rejected() {
        assert_eq!(
            locate_zeros(&ExpPoly::zero(), 1.0).unwrap_err(),
            ZeroError::IdenticallyZero
        );
    }
}
