//! Holomorphic curves `f = (f_0 : … : f_N)` with exponential-polynomial
//! components, and tests of linear and algebraic nondegeneracy.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::exp_poly::{wronskian, ExpPoly, FREQ_MERGE_TOL};
use crate::linalg::rank_and_kernel;
use crate::poly::UnivariatePoly;
use crate::projective::{monomials, HomogeneousPolynomial};
use crate::zero_locator::{locate_zeros, ZeroError};

/// Relative singular-value threshold for dependence detection.
pub const RANK_TOL: f64 = 1e-8;
/// Default degree bound for the algebraic nondegeneracy test.
pub const DEFAULT_DEGREE_BOUND: u32 = 4;
const GCD_TOL: f64 = 1e-9;
/// `|f_i(a)| ≤ COMMON_ZERO_TOL·magnitude` counts as vanishing.
const COMMON_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("a curve needs at least one component")]
    Empty,
    #[error("all components are identically zero")]
    AllZero,
    #[error("components vanish together at {0}")]
    CommonZero(C64),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicCurve {
    pub label: String,
    components: Vec<ExpPoly>,
}

impl HolomorphicCurve {
    /// Wraps components as given; reducedness is the caller's concern (see
    /// [`reduce_representation`]).
    pub fn new(label: impl Into<String>, components: Vec<ExpPoly>) -> Result<Self, CurveError> {
        if components.is_empty() {
            return Err(CurveError::Empty);
        }
        if components.iter().all(|c| c.is_identically_zero()) {
            return Err(CurveError::AllZero);
        }
        Ok(Self {
            label: label.into(),
            components,
        })
    }

    pub fn components(&self) -> &[ExpPoly] {
        &self.components
    }

    /// Projective dimension `N` of the target.
    pub fn dimension(&self) -> usize {
        self.components.len() - 1
    }

    pub fn evaluate(&self, z: C64) -> Vec<C64> {
        self.components.iter().map(|c| c.evaluate(z)).collect()
    }

    /// `‖f(z)‖ = max_i |f_i(z)|`.
    pub fn norm(&self, z: C64) -> f64 {
        self.components
            .iter()
            .map(|c| c.evaluate(z).norm())
            .fold(0.0, f64::max)
    }

    /// Every component multiplied by `s`.
    pub fn scale(&self, s: C64) -> Self {
        Self {
            label: self.label.clone(),
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn wronskian(&self) -> ExpPoly {
        wronskian(&self.components)
    }

    /// True iff the Wronskian is not identically zero.
    pub fn is_linearly_nondegenerate(&self) -> bool {
        !self.wronskian().is_identically_zero()
    }

    /// Constants `c` with `Σ c_i f_i ≡ 0`, if the components are dependent.
    pub fn linear_relation(&self) -> Option<Vec<C64>> {
        kernel_relation(&self.components)
    }

    /// Looks for a form `Q` of degree `d ≤ degree_bound` with `Q(f) ≡ 0`,
    /// returning the one of smallest degree.
    pub fn algebraic_relation(&self, degree_bound: u32) -> Option<HomogeneousPolynomial> {
        let nv = self.components.len();
        for d in 1..=degree_bound {
            let monos = monomials(nv, d);
            let values: Vec<ExpPoly> = monos
                .iter()
                .map(|e| {
                    HomogeneousPolynomial::monomial(nv, e, C64::new(1.0, 0.0))
                        .compose_components(&self.components)
                        .expect("matching dimension")
                })
                .collect();
            if let Some(c) = kernel_relation(&values) {
                let q = HomogeneousPolynomial::new(nv, d, monos.into_iter().zip(c))
                    .expect("monomials of degree d");
                return Some(q);
            }
        }
        None
    }

    /// No form of degree `≤ degree_bound` vanishes on the curve.
    pub fn is_algebraically_nondegenerate(&self, degree_bound: u32) -> bool {
        self.algebraic_relation(degree_bound).is_none()
    }

    /// A zero shared by all components in `|z| ≤ radius`, if any.
    pub fn common_zero(&self, radius: f64) -> Result<Option<C64>, CurveError> {
        common_zero(&self.components, radius)
    }
}

/// Columns of the coefficient matrix of `fs` in the basis `z^k e^{λz}`.
fn coefficient_matrix(fs: &[ExpPoly]) -> DMatrix<C64> {
    let mut basis: Vec<(C64, usize)> = Vec::new();
    let mut freqs: Vec<C64> = Vec::new();
    let key = |freqs: &mut Vec<C64>, lam: C64| -> usize {
        match freqs
            .iter()
            .position(|f| (f - lam).norm() <= FREQ_MERGE_TOL * (1.0 + f.norm()))
        {
            Some(i) => i,
            None => {
                freqs.push(lam);
                freqs.len() - 1
            }
        }
    };
    let mut entries = Vec::new();
    for (col, f) in fs.iter().enumerate() {
        for t in f.terms() {
            let fi = key(&mut freqs, t.freq);
            for (k, &c) in t.poly.coeffs().iter().enumerate() {
                let row = match basis.iter().position(|&(g, j)| g == freqs[fi] && j == k) {
                    Some(r) => r,
                    None => {
                        basis.push((freqs[fi], k));
                        basis.len() - 1
                    }
                };
                entries.push((row, col, c));
            }
        }
    }
    let mut m = DMatrix::zeros(basis.len().max(1), fs.len());
    for (r, c, v) in entries {
        m[(r, c)] += v;
    }
    m
}

/// Normalized kernel vector of the coefficient matrix: divided by its first
/// entry of (near) maximal modulus, tiny entries flushed.
fn kernel_relation(fs: &[ExpPoly]) -> Option<Vec<C64>> {
    let info = rank_and_kernel(&coefficient_matrix(fs), RANK_TOL);
    let v = info.kernel?;
    let vmax = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pivot = *v.iter().find(|c| c.norm() >= 0.999 * vmax)?;
    Some(
        v.iter()
            .map(|c| {
                let x = c / pivot;
                let snap = |t: f64| if t.abs() < 1e-10 { 0.0 } else { t };
                C64::new(snap(x.re), snap(x.im))
            })
            .collect(),
    )
}

fn common_zero(fs: &[ExpPoly], radius: f64) -> Result<Option<C64>, CurveError> {
    let nonzero: Vec<&ExpPoly> = fs.iter().filter(|c| !c.is_identically_zero()).collect();
    if nonzero.is_empty() {
        return Err(CurveError::AllZero);
    }
    // A zero-free component settles it; otherwise scan the zeros of the
    // cheapest one (single frequency first, then fewest terms).
    if nonzero
        .iter()
        .any(|c| c.single_frequency().is_some_and(|(_, p)| p.is_constant()))
    {
        return Ok(None);
    }
    let pivot = nonzero
        .iter()
        .min_by_key(|c| (c.single_frequency().is_none(), c.terms().len()))
        .expect("nonempty");
    let atlas = locate_zeros(pivot, radius)?.atlas;
    for zero in &atlas.zeros {
        let a = zero.location;
        let shared = nonzero.iter().all(|c| {
            let m = c.magnitude(a);
            c.evaluate(a).norm() <= COMMON_ZERO_TOL * m.max(f64::MIN_POSITIVE)
        });
        if shared {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// A reduced representation of `(components)`.
///
/// Pure polynomial components are divided by their monic gcd. Otherwise the
/// components must have no common zero in `|z| ≤ working_radius`.
pub fn reduce_representation(
    label: impl Into<String>,
    components: Vec<ExpPoly>,
    working_radius: f64,
) -> Result<HolomorphicCurve, CurveError> {
    let curve = HolomorphicCurve::new(label, components)?;
    let polys: Option<Vec<UnivariatePoly>> = curve
        .components
        .iter()
        .map(|c| {
            if c.is_identically_zero() {
                Some(UnivariatePoly::zero())
            } else {
                c.as_polynomial().cloned()
            }
        })
        .collect();
    if let Some(polys) = polys {
        let g = polys
            .iter()
            .filter(|p| !p.is_zero())
            .fold(UnivariatePoly::zero(), |acc, p| {
                if acc.is_zero() {
                    p.monic()
                } else {
                    UnivariatePoly::gcd(&acc, p, GCD_TOL)
                }
            });
        if g.is_constant() {
            return Ok(curve);
        }
        let components = polys
            .iter()
            .map(|p| {
                let (q, _) = p.div_rem(&g);
                let scale = q.max_abs_coeff();
                ExpPoly::polynomial(q.flush(1e-12 * scale))
            })
            .collect();
        return Ok(HolomorphicCurve {
            label: curve.label,
            components,
        });
    }
    match curve.common_zero(working_radius)? {
        Some(a) => Err(CurveError::CommonZero(a)),
        None => Ok(curve),
    }
}

/// `F = (Q_1∘f : … : Q_q∘f)`, forms of a common degree.
///
/// Reducedness of `F` follows from general position; it is spot-checked on
/// `|z| ≤ working_radius`.
pub fn build_derived_curve(
    f: &HolomorphicCurve,
    qs: &[HomogeneousPolynomial],
    working_radius: f64,
) -> Result<HolomorphicCurve, CurveError> {
    let components: Vec<ExpPoly> = qs
        .iter()
        .map(|q| {
            q.compose_components(f.components()).map_err(|_| CurveError::Empty)
        })
        .collect::<Result<_, _>>()?;
    let derived = HolomorphicCurve::new(format!("F[{}]", f.label), components)?;
    match derived.common_zero(working_radius)? {
        Some(a) => Err(CurveError::CommonZero(a)),
        None => Ok(derived),
    }
}
