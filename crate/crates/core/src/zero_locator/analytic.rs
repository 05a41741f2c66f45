//! Argument-principle backend: recursive subdivision of a box covering the
//! disk, tracking the winding number of `g` around every cell.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::contour::contour_moments;
use super::{Backend, Zero, ZeroAtlas, ZeroError, CLUSTER_TOL};
use crate::exp_poly::ExpPoly;

/// Edge points with `|g| ≤ EDGE_NEAR_ZERO·magnitude` abort the edge. This sits
/// a few hundred ulps above the evaluation noise, so multiple zeros (where
/// `|g|` decays like a power of the distance) do not trip it early.
const EDGE_NEAR_ZERO: f64 = 1e-13;
/// Target phase increment per marching step along an edge (radians).
const PHASE_STEP: f64 = 0.3;
/// Cells with winding ≥ 2 are examined for a multiple zero below this size
/// (relative to `1 + |center|`).
const CLUSTER_PROBE: f64 = 1e-2;
/// Tolerance for polished simple zeros.
const NEWTON_TOL: f64 = 1e-10;
const MAX_LEVELS: usize = 400;

/// Split offsets (fractions of the half-widths) tried in order until the new
/// edges avoid every zero.
const SPLIT_JITTER: [(f64, f64); 12] = [
    (0.0137, -0.0219),
    (-0.0311, 0.0173),
    (0.0457, 0.0391),
    (-0.0529, -0.0447),
    (0.0931, -0.0857),
    (-0.1213, 0.1119),
    (0.1579, 0.1433),
    (-0.1877, -0.1697),
    (0.2711, -0.2459),
    (-0.3137, 0.2953),
    (0.3719, 0.3581),
    (-0.4253, -0.4111),
];

#[derive(Clone, Copy, Debug)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    winding: i64,
}

impl Cell {
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }
    fn contains(&self, z: C64, slack: f64) -> bool {
        z.re >= self.x0 - slack
            && z.re <= self.x1 + slack
            && z.im >= self.y0 - slack
            && z.im <= self.y1 + slack
    }
    /// Distance from the origin to the closest point of the cell.
    fn min_modulus(&self) -> f64 {
        let dx = if self.x0 > 0.0 {
            self.x0
        } else if self.x1 < 0.0 {
            -self.x1
        } else {
            0.0
        };
        let dy = if self.y0 > 0.0 {
            self.y0
        } else if self.y1 < 0.0 {
            -self.y1
        } else {
            0.0
        };
        dx.hypot(dy)
    }
}

enum Outcome {
    Found(Vec<Zero>),
    Split(Vec<Cell>),
}

struct Locator<'a> {
    g: &'a ExpPoly,
    dg: ExpPoly,
}

impl Locator<'_> {
    fn near_zero(&self, z: C64, gz: C64) -> bool {
        let a = gz.norm();
        !a.is_finite() || a <= EDGE_NEAR_ZERO * self.g.magnitude(z)
    }

    /// Total change of `arg g` along the segment `a → b`.
    ///
    /// Marches with steps sized from `|g/g'|` and accepts a step only when the
    /// observed phase increment matches the derivative's prediction, so no
    /// full turn can hide between samples.
    fn arg_change(&self, a: C64, b: C64) -> Result<f64, ZeroError> {
        let len = (b - a).norm();
        if len == 0.0 {
            return Ok(0.0);
        }
        let dir = (b - a) / len;
        let min_step = 1e-14 * (1.0 + a.norm().max(b.norm()));
        let mut gz = self.g.evaluate(a);
        if self.near_zero(a, gz) {
            return Err(ZeroError::ZeroNearContour(a));
        }
        let mut logd = self.dg.evaluate(a) / gz;
        let mut t = 0.0;
        let mut total = 0.0;
        let mut step = (PHASE_STEP / logd.norm().max(1e-300)).min(len);
        while t < len {
            let h = step.min(len - t);
            let z1 = if len - t <= step { b } else { a + dir * (t + h) };
            let g1 = self.g.evaluate(z1);
            if self.near_zero(z1, g1) {
                return Err(ZeroError::ZeroNearContour(z1));
            }
            let logd1 = self.dg.evaluate(z1) / g1;
            let dphi = (g1 / gz).arg();
            let predicted = (0.5 * (logd + logd1) * dir * h).im;
            if predicted.abs() > 2.0 * PHASE_STEP || (dphi - predicted).abs() > 0.1 {
                step = 0.5 * h;
                if step < min_step {
                    return Err(ZeroError::ZeroNearContour(z1));
                }
                continue;
            }
            total += dphi;
            t += h;
            gz = g1;
            logd = logd1;
            step = (2.0 * h).min(PHASE_STEP / logd.norm().max(1e-300));
        }
        Ok(total)
    }

    fn rect_winding(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<i64, ZeroError> {
        let c = [
            C64::new(x0, y0),
            C64::new(x1, y0),
            C64::new(x1, y1),
            C64::new(x0, y1),
        ];
        let mut total = 0.0;
        for i in 0..4 {
            total += self.arg_change(c[i], c[(i + 1) % 4])?;
        }
        let w = total / (2.0 * PI);
        let rounded = w.round();
        if (w - rounded).abs() > 0.05 {
            return Err(ZeroError::RefinementStall(C64::new(
                0.5 * (x0 + x1),
                0.5 * (y0 + y1),
            )));
        }
        Ok(rounded as i64)
    }

    fn newton(&self, f: &ExpPoly, df: &ExpPoly, start: C64) -> Option<C64> {
        let mut z = start;
        for _ in 0..60 {
            let fz = f.evaluate(z);
            let dfz = df.evaluate(z);
            if dfz.norm() == 0.0 || !fz.norm().is_finite() {
                return None;
            }
            let step = fz / dfz;
            z -= step;
            if !z.re.is_finite() || !z.im.is_finite() {
                return None;
            }
            if step.norm() <= NEWTON_TOL * 1e-4 * (1.0 + z.norm()) {
                return Some(z);
            }
        }
        let fz = f.evaluate(z);
        (fz.norm() <= 1e-12 * f.magnitude(z)).then_some(z)
    }

    fn split(&self, cell: &Cell) -> Result<Vec<Cell>, ZeroError> {
        let hx = 0.5 * (cell.x1 - cell.x0);
        let hy = 0.5 * (cell.y1 - cell.y0);
        let c = cell.center();
        let mut last_err = ZeroError::RefinementStall(c);
        for (jx, jy) in SPLIT_JITTER {
            let xs = c.re + jx * hx;
            let ys = c.im + jy * hy;
            let quads = [
                (cell.x0, xs, cell.y0, ys),
                (xs, cell.x1, cell.y0, ys),
                (cell.x0, xs, ys, cell.y1),
                (xs, cell.x1, ys, cell.y1),
            ];
            let windings: Result<Vec<i64>, ZeroError> = quads
                .iter()
                .map(|&(x0, x1, y0, y1)| self.rect_winding(x0, x1, y0, y1))
                .collect();
            match windings {
                Ok(ws) if ws.iter().sum::<i64>() == cell.winding && ws.iter().all(|&w| w >= 0) => {
                    return Ok(quads
                        .iter()
                        .zip(ws)
                        .map(|(&(x0, x1, y0, y1), winding)| Cell {
                            x0,
                            x1,
                            y0,
                            y1,
                            winding,
                        })
                        .collect());
                }
                Ok(_) => last_err = ZeroError::RefinementStall(c),
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    /// Multiple-zero test on a circle around a small cell of winding `w`:
    /// the first two power sums give the centroid and spread of the cluster.
    fn cluster(&self, cell: &Cell) -> Option<Zero> {
        let c = cell.center();
        let rho = cell.diameter();
        let w = cell.winding;
        let m = contour_moments(self.g, &self.dg, c, rho, 2).ok()?;
        if (m.moments[0].re - w as f64).abs() > 0.25 {
            return None;
        }
        let wf = w as f64;
        let mean = m.moments[1] / wf;
        let variance = m.moments[2] / wf - mean * mean;
        let spread = variance.norm().sqrt();
        let scale = 1.0 + c.norm();
        let threshold = (CLUSTER_TOL * scale).max(10.0 * m.noise.sqrt() * rho);
        if spread > threshold {
            return None;
        }
        let centroid = c + mean;
        let f = self.g.nth_derivative(w as usize - 1);
        let location = match self.newton(&f, &f.differentiate(), centroid) {
            Some(z) if (z - centroid).norm() <= (10.0 * threshold).max(CLUSTER_TOL * scale) => z,
            _ => centroid,
        };
        Some(Zero {
            location,
            multiplicity: w as u32,
        })
    }

    fn process(&self, cell: &Cell) -> Result<Outcome, ZeroError> {
        let c = cell.center();
        let scale = 1.0 + c.norm();
        let diam = cell.diameter();
        if cell.winding == 1 {
            if let Some(z) = self.newton(self.g, &self.dg, c) {
                if cell.contains(z, 1e-12 * scale) {
                    return Ok(Outcome::Found(vec![Zero {
                        location: z,
                        multiplicity: 1,
                    }]));
                }
            }
            if diam < 1e-12 * scale {
                return Ok(Outcome::Found(vec![Zero {
                    location: c,
                    multiplicity: 1,
                }]));
            }
        } else if diam <= CLUSTER_PROBE * scale {
            if let Some(zero) = self.cluster(cell) {
                return Ok(Outcome::Found(vec![zero]));
            }
            if diam <= CLUSTER_TOL * scale {
                return Ok(Outcome::Found(vec![Zero {
                    location: c,
                    multiplicity: cell.winding as u32,
                }]));
            }
        }
        match self.split(cell) {
            Ok(children) => Ok(Outcome::Split(children)),
            // Edges cannot get through the noise halo of a multiple zero.
            Err(e) if cell.winding >= 2 => self
                .cluster(cell)
                .map(|zero| Outcome::Found(vec![zero]))
                .ok_or(e),
            Err(e) => Err(e),
        }
    }
}

/// Zeros of `g` in `|z| ≤ r` by argument-principle subdivision.
///
/// Simple zeros are polished by Newton's method on `g`; a cell whose winding
/// number stays at `m ≥ 2` down to the cluster probe size is recorded as one
/// zero of multiplicity `m` when its power sums show no spread, polished on
/// `g^{(m−1)}`.
pub fn locate_zeros_analytic(g: &ExpPoly, r: f64) -> Result<ZeroAtlas, ZeroError> {
    if g.is_identically_zero() {
        return Err(ZeroError::IdenticallyZero);
    }
    let locator = Locator {
        g,
        dg: g.differentiate(),
    };
    // Slightly off-centre box so symmetric zeros never land on cell edges.
    let offset = C64::new(0.00731, 0.00419) * r.max(1e-3);
    let mut half = r * 1.03 + 1e-6;
    let mut root = None;
    for _ in 0..24 {
        let (x0, x1, y0, y1) = (
            offset.re - half,
            offset.re + half,
            offset.im - half,
            offset.im + half,
        );
        match locator.rect_winding(x0, x1, y0, y1) {
            Ok(winding) => {
                root = Some(Cell {
                    x0,
                    x1,
                    y0,
                    y1,
                    winding,
                });
                break;
            }
            Err(ZeroError::ZeroNearContour(_)) | Err(ZeroError::RefinementStall(_)) => {
                half *= 1.0137;
            }
            Err(e) => return Err(e),
        }
    }
    let root = root.ok_or(ZeroError::ZeroNearContour(C64::new(r, 0.0)))?;

    let keep = |cell: &Cell| cell.winding > 0 && cell.min_modulus() <= r;
    let mut cells: Vec<Cell> = if keep(&root) { vec![root] } else { Vec::new() };
    let mut zeros = Vec::new();
    let mut levels = 0;
    while !cells.is_empty() {
        levels += 1;
        if levels > MAX_LEVELS {
            return Err(ZeroError::RefinementStall(cells[0].center()));
        }
        let outcomes: Vec<Result<Outcome, ZeroError>> =
            cells.par_iter().map(|cell| locator.process(cell)).collect();
        let mut next = Vec::new();
        for outcome in outcomes {
            match outcome? {
                Outcome::Found(found) => zeros.extend(found),
                Outcome::Split(children) => next.extend(children.into_iter().filter(keep)),
            }
        }
        cells = next;
    }
    Ok(ZeroAtlas::new(r, merge_clusters(zeros), Backend::Analytic))
}

/// Merges located zeros closer than the cluster tolerance, summing multiplicities.
fn merge_clusters(mut zeros: Vec<Zero>) -> Vec<Zero> {
    zeros.sort_by(|a, b| super::zero_order(&a.location, &b.location));
    let mut out: Vec<Zero> = Vec::with_capacity(zeros.len());
    for z in zeros {
        let tol = CLUSTER_TOL * (1.0 + z.location.norm());
        match out.iter_mut().find(|o| (o.location - z.location).norm() <= tol) {
            Some(o) => o.multiplicity += z.multiplicity,
            None => out.push(z),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::UnivariatePoly;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn one_plus_exp_two_z() {
        let g = &ExpPoly::one() + &ExpPoly::exp(c(2.0));
        let atlas = locate_zeros_analytic(&g, 2.0).unwrap();
        assert_eq!(atlas.zeros.len(), 2);
        let expected = [C64::new(0.0, PI / 2.0), C64::new(0.0, -PI / 2.0)];
        for (z, e) in atlas.zeros.iter().zip(expected) {
            assert_eq!(z.multiplicity, 1);
            assert!((z.location - e).norm() < 1e-10, "{} vs {}", z.location, e);
        }
    }

    #[test]
    fn polynomial_through_analytic_path() {
        let g = ExpPoly::z();
        let atlas = locate_zeros_analytic(&g, 1.0).unwrap();
        assert_eq!(atlas.zeros.len(), 1);
        assert_eq!(atlas.zeros[0].multiplicity, 1);
        assert!(atlas.zeros[0].location.norm() < 1e-12);
    }

    #[test]
    fn exp_minus_one_unit_disk() {
        let g = &ExpPoly::exp(c(1.0)) - &ExpPoly::one();
        let atlas = locate_zeros_analytic(&g, 1.0).unwrap();
        assert_eq!(atlas.total_multiplicity(), 1);
        assert!(atlas.zeros[0].location.norm() < 1e-12);
    }

    #[test]
    fn multiple_zero_detected() {
        let p = UnivariatePoly::from_roots(&[c(0.5), c(0.5), c(0.5), C64::new(-1.0, 1.0)]);
        let atlas = locate_zeros_analytic(&ExpPoly::polynomial(p), 2.0).unwrap();
        assert_eq!(atlas.zeros.len(), 2);
        assert_eq!(atlas.zeros[0].multiplicity, 3);
        assert!((atlas.zeros[0].location - c(0.5)).norm() < 1e-8);
    }

    #[test]
    fn double_zero_times_exponential_sum() {
        // (z - 1)^2 (1 + e^z) has a double zero at 1 and simple zeros at ±iπ.
        let p = ExpPoly::polynomial(UnivariatePoly::from_roots(&[c(1.0), c(1.0)]));
        let g = &p * &(&ExpPoly::one() + &ExpPoly::exp(c(1.0)));
        let atlas = locate_zeros_analytic(&g, 4.0).unwrap();
        assert_eq!(atlas.total_multiplicity(), 4);
        let double = atlas.zeros.iter().find(|z| z.multiplicity == 2).unwrap();
        assert!((double.location - c(1.0)).norm() < 1e-8);
    }

    #[test]
    fn zero_free_function() {
        let g = ExpPoly::exp(C64::new(1.0, 2.0)).scale(c(3.0));
        assert!(locate_zeros_analytic(&g, 10.0).unwrap().zeros.is_empty());
    }
}
