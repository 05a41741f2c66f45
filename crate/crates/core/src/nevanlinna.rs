//! Nevanlinna functionals of a curve on a grid of radii: the characteristic
//! `T_f`, proximity `m_f(·, D)`, counting `N_f(·, D)` and its truncations.

use std::f64::consts::PI;
use std::fmt::Write as _;

use indexmap::IndexMap;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::HolomorphicCurve;
use crate::exp_poly::ExpPoly;
use crate::projective::{compose, Hypersurface, ProjectiveError};
use crate::quadrature::{integrate, periodic_mean};
use crate::zero_locator::{locate_zeros, ZeroAtlas, ZeroError, BOUNDARY_NUDGE};

/// Sample count used to locate the arcs where one component dominates.
const ARC_SAMPLES: usize = 512;
/// Zeros this close to the origin count as zeros at the origin.
const ORIGIN_TOL: f64 = 1e-12;
const MEAN_TOL: f64 = 1e-11;
const MAX_NODES: usize = 1 << 18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NevanlinnaError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("{0} vanishes identically on the curve")]
    ContainedIn(String),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error("circle mean of log|Q∘f| did not converge at r = {0}")]
    NotConverged(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Geometric,
    Linear,
}

/// Strictly increasing positive radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RGrid {
    radii: Vec<f64>,
}

impl RGrid {
    pub fn new(radii: Vec<f64>) -> Result<Self, NevanlinnaError> {
        if radii.is_empty() {
            return Err(NevanlinnaError::InvalidGrid("no radii".into()));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(NevanlinnaError::InvalidGrid("radii must be positive".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NevanlinnaError::InvalidGrid("radii must increase strictly".into()));
        }
        Ok(Self { radii })
    }

    pub fn build(r_min: f64, r_max: f64, points: usize, spacing: Spacing) -> Result<Self, NevanlinnaError> {
        if points == 0 {
            return Err(NevanlinnaError::InvalidGrid("points must be at least 1".into()));
        }
        if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
            return Err(NevanlinnaError::InvalidGrid(format!(
                "need 0 < r_min <= r_max, got {r_min}, {r_max}"
            )));
        }
        if points == 1 {
            return Self::new(vec![r_min]);
        }
        let last = (points - 1) as f64;
        let radii = (0..points)
            .map(|i| {
                let t = i as f64 / last;
                match spacing {
                    Spacing::Geometric => r_min * (r_max / r_min).powf(t),
                    Spacing::Linear => r_min + (r_max - r_min) * t,
                }
            })
            .enumerate()
            .map(|(i, r)| if i + 1 == points { r_max } else { r })
            .collect();
        Self::new(radii)
    }

    pub fn geometric(r_min: f64, r_max: f64, points: usize) -> Result<Self, NevanlinnaError> {
        Self::build(r_min, r_max, points, Spacing::Geometric)
    }

    pub fn linear(r_min: f64, r_max: f64, points: usize) -> Result<Self, NevanlinnaError> {
        Self::build(r_min, r_max, points, Spacing::Linear)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().expect("nonempty grid")
    }
}

impl Default for RGrid {
    /// Geometric, 2 to 50, 40 points.
    fn default() -> Self {
        Self::geometric(2.0, 50.0, 40).expect("valid default grid")
    }
}

fn log_abs(g: &ExpPoly, z: C64) -> f64 {
    g.evaluate(z).norm().ln()
}

/// `T_f(r) = (1/2π)∫ log max_i |f_i(re^{iθ})| dθ`.
///
/// The circle is cut at the angles where the dominant component changes
/// (located by bisection); on each arc the logarithm of a single component is
/// smooth and is integrated by adaptive Gauss–Kronrod.
pub fn characteristic_at(f: &HolomorphicCurve, r: f64) -> f64 {
    let comps: Vec<&ExpPoly> = f
        .components()
        .iter()
        .filter(|c| !c.is_identically_zero())
        .collect();
    let dominant = |theta: f64| -> usize {
        let z = C64::from_polar(r, theta);
        comps
            .iter()
            .enumerate()
            .map(|(i, c)| (i, log_abs(c, z)))
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
            .0
    };
    let arc = |k: usize, a: f64, b: f64| -> f64 {
        let g = comps[k];
        integrate(|t| log_abs(g, C64::from_polar(r, t)), a, b, 1e-13, 1e-13)
    };
    let step = 2.0 * PI / ARC_SAMPLES as f64;
    let mut total = 0.0;
    let mut cur = dominant(0.0);
    for j in 0..ARC_SAMPLES {
        let mut lo = j as f64 * step;
        let hi = (j + 1) as f64 * step;
        let mut guard = 0;
        while dominant(hi) != cur && guard <= comps.len() {
            guard += 1;
            let (mut a, mut b) = (lo, hi);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if dominant(mid) == cur {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            total += arc(cur, lo, b);
            lo = b;
            cur = dominant(b);
        }
        total += arc(cur, lo, hi);
    }
    total / (2.0 * PI)
}

/// `T_f(r)` by the plain trapezoidal rule with node doubling; a slower
/// independent route kept for cross-checks.
pub fn characteristic_trapezoid(f: &HolomorphicCurve, r: f64, tol: f64) -> f64 {
    periodic_mean::<f64, ()>(
        |t| Ok(f.norm(C64::from_polar(r, t)).ln()),
        64,
        MAX_NODES,
        |a, b| (a - b).abs() <= tol,
    )
    .expect("infallible integrand")
    .value
}

/// `T_f` on every grid radius.
pub fn characteristic(f: &HolomorphicCurve, grid: &RGrid) -> Vec<f64> {
    grid.radii()
        .par_iter()
        .map(|&r| characteristic_at(f, r))
        .collect()
}

/// `n(t)`-weighted zero sum `Σ_{0<|a|<r} μ_a log(r/|a|) + μ_0 log r` with
/// `μ = min(multiplicity, cap)`.
pub fn counting_from_atlas(atlas: &ZeroAtlas, r: f64, cap: Option<u32>) -> f64 {
    atlas
        .zeros
        .iter()
        .map(|z| {
            let mu = cap.map_or(z.multiplicity, |m| z.multiplicity.min(m)) as f64;
            let a = z.location.norm();
            if a <= ORIGIN_TOL {
                mu * r.ln()
            } else if a < r {
                mu * (r / a).ln()
            } else {
                0.0
            }
        })
        .fold(0.0, |acc, v| acc + v)
}

/// `∫_0^r (n(t) − n(0))/t dt + n(0) log r` by Gauss–Kronrod on the pieces
/// between consecutive zero moduli.
pub fn counting_integral(atlas: &ZeroAtlas, r: f64, cap: Option<u32>) -> f64 {
    let n_at = |t: f64| -> f64 {
        atlas
            .zeros
            .iter()
            .filter(|z| z.location.norm() > ORIGIN_TOL && z.location.norm() < t)
            .map(|z| cap.map_or(z.multiplicity, |m| z.multiplicity.min(m)) as f64)
            .sum()
    };
    let n0: f64 = atlas
        .zeros
        .iter()
        .filter(|z| z.location.norm() <= ORIGIN_TOL)
        .map(|z| cap.map_or(z.multiplicity, |m| z.multiplicity.min(m)) as f64)
        .sum();
    let mut cuts: Vec<f64> = atlas
        .zeros
        .iter()
        .map(|z| z.location.norm())
        .filter(|&a| a > ORIGIN_TOL && a < r)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(r);
    let mut total = n0 * r.ln();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = n_at(0.5 * (a + b));
        total += integrate(|t| n / t, a, b, 1e-14, 1e-14);
    }
    total
}

/// `Q∘f` for one hypersurface with the zero atlas it needs.
#[derive(Clone, Debug)]
pub struct Composite {
    pub label: String,
    pub degree: u32,
    pub function: ExpPoly,
    pub atlas: ZeroAtlas,
}

/// Records a radius moved off a zero of `Q∘f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Perturbation {
    pub hypersurface: String,
    pub requested: f64,
    pub used: f64,
}

impl Composite {
    /// Composes and locates zeros on a disk somewhat larger than `r_max`, so
    /// zeros just outside the last circle are known to the proximity
    /// quadrature.
    pub fn new(f: &HolomorphicCurve, d: &Hypersurface, r_max: f64) -> Result<Self, NevanlinnaError> {
        let g = compose(d.form(), f)?;
        Self::from_function(d.label.clone(), d.degree(), g, r_max)
    }

    pub fn from_function(
        label: String,
        degree: u32,
        g: ExpPoly,
        r_max: f64,
    ) -> Result<Self, NevanlinnaError> {
        if g.is_identically_zero() {
            return Err(NevanlinnaError::ContainedIn(label));
        }
        let atlas = locate_zeros(&g, 1.1 * r_max + 1.0)?.atlas;
        Ok(Self {
            label,
            degree,
            function: g,
            atlas,
        })
    }

    /// `r`, pushed outward in steps of `1e-9` while a zero modulus lies
    /// within `1e-9` of it.
    pub fn effective_radius(&self, r: f64) -> f64 {
        let mut used = r;
        while self.atlas.boundary_gap(used) <= BOUNDARY_NUDGE {
            used += BOUNDARY_NUDGE;
        }
        used
    }

    pub fn perturbation(&self, r: f64) -> Option<Perturbation> {
        let used = self.effective_radius(r);
        (used != r).then(|| Perturbation {
            hypersurface: self.label.clone(),
            requested: r,
            used,
        })
    }

    pub fn counting(&self, r: f64, cap: Option<u32>) -> f64 {
        counting_from_atlas(&self.atlas, self.effective_radius(r), cap)
    }

    /// `(1/2π)∫ log|Q∘f(re^{iθ})| dθ` by the trapezoidal rule.
    ///
    /// The logarithms of the linear factors of zeros near the circle are
    /// subtracted and their exact means `log max(r, |a|)` added back, which
    /// keeps the integrand smooth.
    pub fn mean_log_modulus(&self, r: f64) -> Result<f64, NevanlinnaError> {
        let r = self.effective_radius(r);
        let window = 0.05 * r + 0.5;
        let near: Vec<(C64, f64)> = self
            .atlas
            .zeros
            .iter()
            .filter(|z| (z.location.norm() - r).abs() <= window)
            .map(|z| (z.location, z.multiplicity as f64))
            .collect();
        let g = &self.function;
        let run = periodic_mean::<f64, ()>(
            |t| {
                let z = C64::from_polar(r, t);
                let sub: f64 = near.iter().map(|(a, mu)| mu * (z - a).norm().ln()).sum();
                Ok(log_abs(g, z) - sub)
            },
            256,
            MAX_NODES,
            |a, b| (a - b).abs() <= MEAN_TOL * (1.0 + b.abs()),
        )
        .expect("infallible integrand");
        if !run.converged || !run.value.is_finite() {
            return Err(NevanlinnaError::NotConverged(r));
        }
        let back: f64 = near.iter().map(|(a, mu)| mu * r.max(a.norm()).ln()).sum();
        Ok(run.value + back)
    }

    /// `m_f(r, D) = d·T_f(r) − (1/2π)∫ log|Q∘f|`, given `T_f(r)`.
    pub fn proximity(&self, t_f: f64, r: f64) -> Result<f64, NevanlinnaError> {
        Ok(self.degree as f64 * t_f - self.mean_log_modulus(r)?)
    }

    /// Smallest multiplicity of a zero in `|z| ≤ r`, `None` when zero-free.
    pub fn min_multiplicity(&self, r: f64) -> Option<u32> {
        self.atlas
            .zeros
            .iter()
            .filter(|z| z.location.norm() <= r)
            .map(|z| z.multiplicity)
            .min()
    }
}

pub fn proximity(f: &HolomorphicCurve, d: &Hypersurface, grid: &RGrid) -> Result<Vec<f64>, NevanlinnaError> {
    let comp = Composite::new(f, d, grid.r_max())?;
    let t = characteristic(f, grid);
    grid.radii()
        .par_iter()
        .zip(t.par_iter())
        .map(|(&r, &tr)| comp.proximity(tr, r))
        .collect()
}

/// `N_f^M(r, D)` on the grid; `truncation = None` means no truncation.
pub fn counting(
    f: &HolomorphicCurve,
    d: &Hypersurface,
    grid: &RGrid,
    truncation: Option<u32>,
) -> Result<Vec<f64>, NevanlinnaError> {
    let comp = Composite::new(f, d, grid.r_max())?;
    Ok(grid.radii().iter().map(|&r| comp.counting(r, truncation)).collect())
}

/// Column tag of a functional.
pub fn tag_characteristic() -> String {
    "T_f".to_string()
}

pub fn tag_proximity(label: &str) -> String {
    format!("m_f({label})")
}

pub fn tag_counting(label: &str, truncation: Option<u32>) -> String {
    match truncation {
        None => format!("N_f({label})"),
        Some(m) => format!("N_f^{m}({label})"),
    }
}

/// Grid-aligned columns of functional values.
#[derive(Clone, Debug, PartialEq)]
pub struct NevanlinnaProfile {
    pub grid: RGrid,
    pub columns: IndexMap<String, Vec<f64>>,
    pub perturbations: Vec<Perturbation>,
}

impl NevanlinnaProfile {
    pub fn new(grid: RGrid) -> Self {
        Self {
            grid,
            columns: IndexMap::new(),
            perturbations: Vec::new(),
        }
    }

    pub fn insert(&mut self, tag: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.grid.len(), "column must align with the grid");
        self.columns.insert(tag.into(), values);
    }

    pub fn get(&self, tag: &str) -> Option<&[f64]> {
        self.columns.get(tag).map(|v| v.as_slice())
    }

    /// `T_f`, and for each hypersurface `m_f`, `N_f` and (when `truncation`
    /// is finite) `N_f^M`.
    pub fn compute(
        f: &HolomorphicCurve,
        ds: &[Hypersurface],
        grid: &RGrid,
        truncation: Option<u32>,
    ) -> Result<Self, NevanlinnaError> {
        let mut profile = Self::new(grid.clone());
        let t = characteristic(f, grid);
        for d in ds {
            let comp = Composite::new(f, d, grid.r_max())?;
            let m: Vec<f64> = grid
                .radii()
                .par_iter()
                .zip(t.par_iter())
                .map(|(&r, &tr)| comp.proximity(tr, r))
                .collect::<Result<_, _>>()?;
            profile.insert(tag_proximity(&d.label), m);
            profile.insert(
                tag_counting(&d.label, None),
                grid.radii().iter().map(|&r| comp.counting(r, None)).collect(),
            );
            if truncation.is_some() {
                profile.insert(
                    tag_counting(&d.label, truncation),
                    grid.radii().iter().map(|&r| comp.counting(r, truncation)).collect(),
                );
            }
            profile
                .perturbations
                .extend(grid.radii().iter().filter_map(|&r| comp.perturbation(r)));
        }
        profile.columns.shift_insert(0, tag_characteristic(), t);
        Ok(profile)
    }

    /// Header row `r,<tags…>`, numbers with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r");
        for tag in self.columns.keys() {
            out.push(',');
            out.push_str(tag);
        }
        out.push('\n');
        for (i, r) in self.grid.radii().iter().enumerate() {
            let _ = write!(out, "{r:.16e}");
            for col in self.columns.values() {
                let _ = write!(out, ",{:.16e}", col[i]);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::HomogeneousPolynomial;
    use crate::poly::UnivariatePoly;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn curve(fs: Vec<ExpPoly>) -> HolomorphicCurve {
        HolomorphicCurve::new("f", fs).unwrap()
    }

    fn hyper(label: &str, q: HomogeneousPolynomial) -> Hypersurface {
        Hypersurface::new(label, q).unwrap()
    }

    fn w(i: usize) -> HomogeneousPolynomial {
        HomogeneousPolynomial::variable(2, i)
    }

    #[test]
    fn grid_validation() {
        let g = RGrid::default();
        assert_eq!(g.len(), 40);
        assert_eq!(g.radii()[0], 2.0);
        assert_eq!(g.r_max(), 50.0);
        assert!(RGrid::new(vec![1.0, 1.0]).is_err());
        assert!(RGrid::new(vec![-1.0]).is_err());
        assert!(RGrid::geometric(5.0, 2.0, 3).is_err());
        assert_eq!(RGrid::linear(1.0, 3.0, 3).unwrap().radii(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn characteristic_of_line() {
        let f = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        assert!((characteristic_at(&f, std::f64::consts::E) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn characteristic_of_exponential() {
        let f = curve(vec![ExpPoly::one(), ExpPoly::exp(c(1.0))]);
        assert!((characteristic_at(&f, 10.0) - 10.0 / PI).abs() < 1e-10);
        let brute = characteristic_trapezoid(&f, 10.0, 1e-9);
        assert!((brute - 10.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn scaling_shifts_characteristic_by_constant() {
        let f = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        let g = f.scale(c(3.0));
        for r in [0.5, 2.0, 7.0] {
            let d = characteristic_at(&g, r) - characteristic_at(&f, r);
            assert!((d - 3.0f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn proximity_examples() {
        let f = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        let grid = RGrid::geometric(1.5, 20.0, 5).unwrap();
        let m1 = proximity(&f, &hyper("H1", w(1)), &grid).unwrap();
        assert!(m1.iter().all(|v| v.abs() < 1e-9), "{m1:?}");
        let m0 = proximity(&f, &hyper("H0", w(0)), &grid).unwrap();
        for (m, r) in m0.iter().zip(grid.radii()) {
            assert!((m - r.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn counting_examples() {
        let grid = RGrid::geometric(2.0, 40.0, 6).unwrap();
        let f = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        let n = counting(&f, &hyper("H1", w(1)), &grid, None).unwrap();
        for (v, r) in n.iter().zip(grid.radii()) {
            assert!((v - r.ln()).abs() < 1e-13);
        }
        let sq = hyper("D", w(1).power(2).unwrap());
        let n2 = counting(&f, &sq, &grid, None).unwrap();
        let n1 = counting(&f, &sq, &grid, Some(1)).unwrap();
        for ((a, b), r) in n2.iter().zip(&n1).zip(grid.radii()) {
            assert!((a - 2.0 * r.ln()).abs() < 1e-13 && (b - r.ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn counting_routes_agree_for_exponential_sum() {
        let g = &ExpPoly::one() + &ExpPoly::exp(c(2.0));
        let comp = Composite::from_function("D".into(), 2, g, 10.0).unwrap();
        let closed = comp.counting(10.0, None);
        let expected: f64 = (-3..=2)
            .map(|k| (10.0 / (PI / 2.0 + k as f64 * PI).abs()).ln())
            .sum();
        assert!((closed - expected).abs() < 1e-9);
        let integral = counting_integral(&comp.atlas, 10.0, None);
        assert!((closed - integral).abs() <= 1e-6 * closed);
    }

    #[test]
    fn first_main_theorem_residual_is_flat() {
        let f = curve(vec![ExpPoly::one(), ExpPoly::exp(c(1.0))]);
        let d = hyper("D3", w(0).power(2).unwrap().add(&w(1).power(2).unwrap()).unwrap());
        let grid = RGrid::geometric(5.0, 30.0, 8).unwrap();
        let p = NevanlinnaProfile::compute(&f, std::slice::from_ref(&d), &grid, None).unwrap();
        let t = p.get("T_f").unwrap();
        let m = p.get("m_f(D3)").unwrap();
        let n = p.get("N_f(D3)").unwrap();
        let res: Vec<f64> = (0..grid.len()).map(|i| 2.0 * t[i] - m[i] - n[i]).collect();
        // Jensen: the residual is log|Q∘f(0)| = log 2.
        for v in res {
            assert!((v - 2.0f64.ln()).abs() < 1e-7, "{v}");
        }
    }

    #[test]
    fn zero_on_circle_is_nudged() {
        let g = ExpPoly::polynomial(UnivariatePoly::from_roots(&[c(2.0)]));
        let comp = Composite::from_function("D".into(), 1, g, 4.0).unwrap();
        let p = comp.perturbation(2.0).unwrap();
        assert!(p.used > 2.0 && p.used - 2.0 < 1e-8);
        // Jensen for z - 2 at r = 2: mean log|z - 2| = log 2.
        assert!((comp.mean_log_modulus(2.0).unwrap() - 2.0f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn csv_layout() {
        let grid = RGrid::linear(1.0, 2.0, 2).unwrap();
        let mut p = NevanlinnaProfile::new(grid);
        p.insert("T_f", vec![0.5, 1.0 / 3.0]);
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,T_f");
        assert_eq!(lines[2], "2.0000000000000000e0,3.3333333333333331e-1");
    }
}
