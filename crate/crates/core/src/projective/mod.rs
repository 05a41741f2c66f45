//! Homogeneous forms in `N + 1` variables, hypersurfaces of `ℙᴺ`, and the
//! algebra behind general position.

mod certificate;
mod general_position;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use num_integer::Integer;
use thiserror::Error;

use crate::curves::HolomorphicCurve;
use crate::exp_poly::ExpPoly;

pub use certificate::{
    certificate_residual, certificates_for_subset, default_m_max,
    find_nullstellensatz_certificate, verify_norm_bound, CertificateSet,
    NullstellensatzCertificate, CERTIFICATE_TOL,
};
pub use general_position::{
    check_general_position, check_general_position_seeded, GeneralPosition,
    GeneralPositionReport, SubsetStatus, SEARCH_SEED,
};
pub(crate) use general_position::subset_status;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectiveError {
    #[error("monomial of degree {found} in a form of degree {expected}")]
    NonHomogeneous { expected: u32, found: u32 },
    #[error("expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the defining form is zero")]
    ZeroForm,
    #[error("the power must be at least 1")]
    InvalidPower,
    #[error("forms have different degrees")]
    DegreeMismatch,
    #[error("the sum of the normalized forms is identically zero")]
    ZeroSum,
    #[error("no certificate with exponent at most {m_max}")]
    NoCertificate { m_max: u32 },
    #[error("all forms vanish together on the curve at {0}")]
    CommonVanishing(C64),
}

/// Exponent vectors of total degree `d` in `n` variables, in descending lex
/// order (`w0^d` first).
pub fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Sparse homogeneous polynomial `Σ c_e w^e`, all `|e| = degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPolynomial {
    num_vars: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl HomogeneousPolynomial {
    /// Builds a form from `(exponent, coefficient)` pairs, summing repeats
    /// and dropping zero coefficients.
    pub fn new(
        num_vars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, C64)>,
    ) -> Result<Self, ProjectiveError> {
        let mut map: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(ProjectiveError::DimensionMismatch {
                    expected: num_vars,
                    found: e.len(),
                });
            }
            let found: u32 = e.iter().sum();
            if found != degree {
                return Err(ProjectiveError::NonHomogeneous {
                    expected: degree,
                    found,
                });
            }
            *map.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(Self {
            num_vars,
            degree,
            terms: map,
        })
    }

    pub fn zero(num_vars: usize, degree: u32) -> Self {
        Self {
            num_vars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The coordinate form `w_i`.
    pub fn variable(num_vars: usize, i: usize) -> Self {
        Self::monomial(num_vars, &unit(num_vars, i, 1), C64::new(1.0, 0.0))
    }

    /// `c·w^e`.
    pub fn monomial(num_vars: usize, e: &[u32], c: C64) -> Self {
        let mut terms = BTreeMap::new();
        if c != C64::new(0.0, 0.0) {
            terms.insert(e.to_vec(), c);
        }
        Self {
            num_vars,
            degree: e.iter().sum(),
            terms,
        }
    }

    /// `w_0 + … + w_N`.
    pub fn coordinate_sum(num_vars: usize) -> Self {
        (0..num_vars).fold(Self::zero(num_vars, 1), |acc, i| {
            acc.add(&Self::variable(num_vars, i)).expect("same shape")
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> C64 {
        self.terms.get(e).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Sum of coefficient moduli, which bounds `|Q(x)| ≤ ‖Q‖₁·max|x_i|^d`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self, ProjectiveError> {
        self.check_shape(other)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(ProjectiveError::DegreeMismatch);
        }
        let degree = if self.is_zero() { other.degree } else { self.degree };
        Self::new(
            self.num_vars,
            degree,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(e, c)| (e.clone(), *c)),
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ProjectiveError> {
        self.check_shape(other)?;
        let mut out = Self::zero(self.num_vars, self.degree + other.degree);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(C64::new(0.0, 0.0)) += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        out
    }

    /// `Q^e`, expanded.
    pub fn power(&self, e: u32) -> Result<Self, ProjectiveError> {
        if e < 1 {
            return Err(ProjectiveError::InvalidPower);
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `∂Q/∂w_i`, a form of degree `d − 1`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.num_vars, self.degree.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.terms.insert(f, c * e[i] as f64);
            }
        }
        out
    }

    pub fn evaluate(&self, x: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| acc * xi.powu(k))
            })
            .sum()
    }

    /// `Q(f_0, …, f_N)` expanded in the exponential-polynomial ring.
    pub fn compose_components(&self, fs: &[ExpPoly]) -> Result<ExpPoly, ProjectiveError> {
        if fs.len() != self.num_vars {
            return Err(ProjectiveError::DimensionMismatch {
                expected: self.num_vars,
                found: fs.len(),
            });
        }
        let max_exp: Vec<u32> = (0..self.num_vars)
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<ExpPoly>> = fs
            .iter()
            .zip(&max_exp)
            .map(|(f, &m)| {
                let mut p = vec![ExpPoly::one()];
                for k in 1..=m as usize {
                    let next = &p[k - 1] * f;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut out = ExpPoly::zero();
        for (e, c) in &self.terms {
            let mut term = ExpPoly::constant(*c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = &term * &powers[i][k as usize];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    fn check_shape(&self, other: &Self) -> Result<(), ProjectiveError> {
        if self.num_vars != other.num_vars {
            return Err(ProjectiveError::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        Ok(())
    }
}

pub(crate) fn unit(n: usize, i: usize, k: u32) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = k;
    e
}

/// Prints in the scenario grammar, terms in descending lex order.
impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", crate::format_complex(*c))?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*w{i}")?,
                    _ => write!(f, "*w{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// `composite: Q ∘ f`.
pub fn compose(q: &HomogeneousPolynomial, f: &HolomorphicCurve) -> Result<ExpPoly, ProjectiveError> {
    q.compose_components(f.components())
}

/// Zero set of a nonzero form.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypersurface {
    pub label: String,
    form: HomogeneousPolynomial,
}

impl Hypersurface {
    pub fn new(label: impl Into<String>, form: HomogeneousPolynomial) -> Result<Self, ProjectiveError> {
        if form.is_zero() {
            return Err(ProjectiveError::ZeroForm);
        }
        Ok(Self {
            label: label.into(),
            form,
        })
    }

    pub fn form(&self) -> &HomogeneousPolynomial {
        &self.form
    }

    pub fn degree(&self) -> u32 {
        self.form.degree
    }
}

/// Powers every form up to the common degree `n = lcm(d_j)`.
///
/// Returns `n`, the exponents `n/d_j`, and the powered forms.
pub fn normalize_degrees(
    qs: &[HomogeneousPolynomial],
) -> Result<(u32, Vec<u32>, Vec<HomogeneousPolynomial>), ProjectiveError> {
    let n = qs.iter().map(|q| q.degree.max(1)).fold(1u32, |a, d| a.lcm(&d));
    let mut exps = Vec::with_capacity(qs.len());
    let mut out = Vec::with_capacity(qs.len());
    for q in qs {
        let e = n / q.degree.max(1);
        exps.push(e);
        out.push(q.power(e)?);
    }
    Ok((n, exps, out))
}

/// The hypersurface `Σ_j Q_j = 0` of forms already raised to a common degree.
pub fn build_sum_hypersurface(
    qs: &[HomogeneousPolynomial],
    label: impl Into<String>,
) -> Result<Hypersurface, ProjectiveError> {
    let first = qs.first().ok_or(ProjectiveError::ZeroSum)?;
    if qs.iter().any(|q| q.degree != first.degree) {
        return Err(ProjectiveError::DegreeMismatch);
    }
    let mut sum = HomogeneousPolynomial::zero(first.num_vars, first.degree);
    for q in qs {
        sum = sum.add(q)?;
    }
    // Cancellation of floating coefficients counts as zero.
    let scale = qs.iter().map(|q| q.max_abs_coeff()).fold(0.0, f64::max);
    sum.terms.retain(|_, c| c.norm() > 1e-12 * scale);
    Hypersurface::new(label, sum).map_err(|_| ProjectiveError::ZeroSum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn w(n: usize, i: usize) -> HomogeneousPolynomial {
        HomogeneousPolynomial::variable(n, i)
    }

    fn curve(fs: Vec<ExpPoly>) -> HolomorphicCurve {
        HolomorphicCurve::new("f", fs).unwrap()
    }

    #[test]
    fn monomial_order_and_count() {
        let m = monomials(3, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0], vec![2, 0, 0]);
        assert_eq!(m[5], vec![0, 0, 2]);
    }

    #[test]
    fn compose_examples() {
        let f = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        let q = w(2, 0).mul(&w(2, 1)).unwrap();
        assert_eq!(compose(&q, &f).unwrap(), ExpPoly::z());

        let f = curve(vec![ExpPoly::one(), ExpPoly::exp(c(1.0))]);
        let q = w(2, 0).power(2).unwrap().add(&w(2, 1).power(2).unwrap()).unwrap();
        let expected = &ExpPoly::one() + &ExpPoly::exp(c(2.0));
        assert_eq!(compose(&q, &f).unwrap(), expected);

        let z2 = &ExpPoly::z() * &ExpPoly::z();
        let f = curve(vec![ExpPoly::one(), ExpPoly::z(), z2]);
        let conic = w(3, 0)
            .mul(&w(3, 2))
            .unwrap()
            .add(&w(3, 1).power(2).unwrap().scale(c(-1.0)))
            .unwrap();
        assert!(compose(&conic, &f).unwrap().is_identically_zero());
    }

    #[test]
    fn compose_rejects_dimension_mismatch() {
        let f = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        assert!(matches!(
            compose(&w(3, 0), &f),
            Err(ProjectiveError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_examples() {
        let sq = w(2, 0).power(2).unwrap();
        assert_eq!(sq, HomogeneousPolynomial::monomial(2, &[2, 0], c(1.0)));
        let s = w(2, 0).add(&w(2, 1)).unwrap().power(2).unwrap();
        assert_eq!(s.coefficient(&[1, 1]), c(2.0));
        assert_eq!(s.coefficient(&[2, 0]), c(1.0));
        assert_eq!(s.coefficient(&[0, 2]), c(1.0));
        assert_eq!(s.power(1).unwrap(), s);
        assert_eq!(s.power(0), Err(ProjectiveError::InvalidPower));
    }

    #[test]
    fn normalize_examples() {
        let cubic = w(2, 1).power(3).unwrap();
        let (n, e, qs) = normalize_degrees(&[w(2, 0).power(2).unwrap(), cubic]).unwrap();
        assert_eq!((n, e), (6, vec![3, 2]));
        assert!(qs.iter().all(|q| q.degree() == 6));
        let (n, e, _) = normalize_degrees(&[w(2, 0).power(2).unwrap(), w(2, 1).power(2).unwrap()]).unwrap();
        assert_eq!((n, e), (2, vec![1, 1]));
        let (n, _, _) = normalize_degrees(&[w(2, 0), w(2, 1)]).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn sum_hypersurface_examples() {
        let d = build_sum_hypersurface(&[w(2, 0).power(2).unwrap(), w(2, 1).power(2).unwrap()], "D3")
            .unwrap();
        assert_eq!(d.form().coefficient(&[2, 0]), c(1.0));
        assert_eq!(d.form().coefficient(&[0, 2]), c(1.0));
        assert_eq!(
            build_sum_hypersurface(&[w(2, 0), w(2, 0).scale(c(-1.0))], "D").unwrap_err(),
            ProjectiveError::ZeroSum
        );
        let d = build_sum_hypersurface(&[w(3, 0), w(3, 1), w(3, 2)], "D4").unwrap();
        assert_eq!(d.form(), &HomogeneousPolynomial::coordinate_sum(3));
    }

    #[test]
    fn non_homogeneous_rejected() {
        let err = HomogeneousPolynomial::new(2, 2, [(vec![1, 0], c(1.0)), (vec![0, 2], c(1.0))]);
        assert_eq!(
            err.unwrap_err(),
            ProjectiveError::NonHomogeneous {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn partial_derivative() {
        let q = w(2, 0).power(2).unwrap().mul(&w(2, 1)).unwrap();
        assert_eq!(q.partial(0), HomogeneousPolynomial::monomial(2, &[1, 1], c(2.0)));
    }
}
