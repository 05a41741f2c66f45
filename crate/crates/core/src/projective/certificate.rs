//! Nullstellensatz certificates `x_k^{m} = Σ_j b_{kj} Q_j` by graded linear
//! algebra, and the norm bound they imply along a curve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::{monomials, unit, HomogeneousPolynomial, ProjectiveError};
use crate::curves::HolomorphicCurve;
use crate::linalg::least_squares;

/// Largest admissible coefficient residual of a certificate identity.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Cofactor coefficients below this (relative to the largest) are dropped.
const COFACTOR_FLUSH: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct NullstellensatzCertificate {
    /// Index `k` of the variable whose power is certified.
    pub variable: usize,
    /// The exponent `m_k > n`.
    pub exponent: u32,
    /// `b_{kj}`, each of degree `m_k − n`.
    pub cofactors: Vec<HomogeneousPolynomial>,
    /// Maximal coefficient modulus of `x_k^{m_k} − Σ_j b_{kj}Q_j`.
    pub residual: f64,
}

impl NullstellensatzCertificate {
    /// `Σ_j ‖b_{kj}‖₁`.
    pub fn cofactor_mass(&self) -> f64 {
        self.cofactors.iter().map(|b| b.l1_norm()).sum()
    }
}

/// Maximal coefficient modulus of `x_k^m − Σ_j b_j Q_j`, by exact expansion.
pub fn certificate_residual(
    qs: &[HomogeneousPolynomial],
    k: usize,
    m: u32,
    cofactors: &[HomogeneousPolynomial],
) -> f64 {
    let nv = qs[0].num_vars();
    let mut acc = HomogeneousPolynomial::monomial(nv, &unit(nv, k, m), C64::new(1.0, 0.0));
    for (b, q) in cofactors.iter().zip(qs) {
        if b.is_zero() {
            continue;
        }
        let prod = b.mul(q).expect("same number of variables");
        acc = acc.add(&prod.scale(C64::new(-1.0, 0.0))).expect("same degree");
    }
    acc.max_abs_coeff()
}

/// Smallest `m_k ∈ (n, m_max]` with `x_k^{m_k}` in the ideal of `qs`.
///
/// For each candidate exponent the unknown cofactor coefficients solve the
/// graded linear system of coefficient matches in the minimum-norm
/// least-squares sense; the identity is then re-expanded and accepted when
/// its residual is at most [`CERTIFICATE_TOL`].
pub fn find_nullstellensatz_certificate(
    qs: &[HomogeneousPolynomial],
    k: usize,
    m_max: u32,
) -> Result<NullstellensatzCertificate, ProjectiveError> {
    let first = qs.first().ok_or(ProjectiveError::ZeroForm)?;
    let nv = first.num_vars();
    let n = first.degree();
    if qs.iter().any(|q| q.degree() != n) {
        return Err(ProjectiveError::DegreeMismatch);
    }
    if qs.iter().any(|q| q.num_vars() != nv) || k >= nv {
        return Err(ProjectiveError::DimensionMismatch {
            expected: nv,
            found: k + 1,
        });
    }
    for m in n + 1..=m_max {
        let rows = monomials(nv, m);
        let row_index: std::collections::HashMap<&Vec<u32>, usize> =
            rows.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let cof_monos = monomials(nv, m - n);
        let ncols = cof_monos.len() * qs.len();
        let mut a = DMatrix::<C64>::zeros(rows.len(), ncols);
        for (j, q) in qs.iter().enumerate() {
            for (t, alpha) in cof_monos.iter().enumerate() {
                let col = j * cof_monos.len() + t;
                for (e, c) in q.terms() {
                    let sum: Vec<u32> = e.iter().zip(alpha).map(|(a, b)| a + b).collect();
                    a[(row_index[&sum], col)] += c;
                }
            }
        }
        let mut b = DVector::<C64>::zeros(rows.len());
        b[row_index[&unit(nv, k, m)]] = C64::new(1.0, 0.0);
        let x = least_squares(&a, &b, 1e-12);
        let xmax = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cofactors: Vec<HomogeneousPolynomial> = (0..qs.len())
            .map(|j| {
                HomogeneousPolynomial::new(
                    nv,
                    m - n,
                    cof_monos.iter().enumerate().filter_map(|(t, alpha)| {
                        let c = x[j * cof_monos.len() + t];
                        (c.norm() > COFACTOR_FLUSH * xmax).then(|| (alpha.clone(), c))
                    }),
                )
                .expect("exponents have the cofactor degree")
            })
            .collect();
        let residual = certificate_residual(qs, k, m, &cofactors);
        if residual <= CERTIFICATE_TOL {
            return Ok(NullstellensatzCertificate {
                variable: k,
                exponent: m,
                cofactors,
                residual,
            });
        }
    }
    Err(ProjectiveError::NoCertificate { m_max })
}

/// Certificates for every variable of one `(N+1)`-subset, plus the constant
/// `c₁` of the bound `‖f‖ⁿ ≤ c₁·max_j |Q_j(f)|`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateSet {
    /// Common degree `n` of the forms.
    pub degree: u32,
    pub certificates: Vec<NullstellensatzCertificate>,
    /// `max(1, (N+1)·max_k Σ_j ‖b_{kj}‖₁)`.
    pub c1: f64,
}

#[derive(Serialize)]
struct CertificateJson {
    variable: usize,
    exponent: u32,
    residual: f64,
    cofactors: Vec<String>,
}

impl CertificateSet {
    pub fn max_residual(&self) -> f64 {
        self.certificates.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let certs: Vec<CertificateJson> = self
            .certificates
            .iter()
            .map(|c| CertificateJson {
                variable: c.variable,
                exponent: c.exponent,
                residual: c.residual,
                cofactors: c.cofactors.iter().map(|b| b.to_string()).collect(),
            })
            .collect();
        serde_json::json!({ "degree": self.degree, "c1": self.c1, "certificates": certs })
    }
}

/// Default exponent cap `(N+1)·n + 1`.
pub fn default_m_max(num_vars: usize, n: u32) -> u32 {
    num_vars as u32 * n + 1
}

/// Certificates for all `N + 1` variables of forms of a common degree.
pub fn certificates_for_subset(
    qs: &[HomogeneousPolynomial],
    m_max: Option<u32>,
) -> Result<CertificateSet, ProjectiveError> {
    let first = qs.first().ok_or(ProjectiveError::ZeroForm)?;
    let nv = first.num_vars();
    let n = first.degree();
    let m_max = m_max.unwrap_or_else(|| default_m_max(nv, n));
    let certificates = (0..nv)
        .into_par_iter()
        .map(|k| find_nullstellensatz_certificate(qs, k, m_max))
        .collect::<Result<Vec<_>, _>>()?;
    let mass = certificates
        .iter()
        .map(|c| c.cofactor_mass())
        .fold(0.0, f64::max);
    Ok(CertificateSet {
        degree: n,
        certificates,
        c1: (nv as f64 * mass).max(1.0),
    })
}

/// Largest `‖f(z)‖ⁿ / (c₁·max_j |Q_j(f(z))|)` over the samples, with the max
/// norm `‖x‖ = max_i |x_i|`.
pub fn verify_norm_bound(
    set: &CertificateSet,
    qs: &[HomogeneousPolynomial],
    f: &HolomorphicCurve,
    samples: &[C64],
) -> Result<f64, ProjectiveError> {
    let mut worst = 0.0f64;
    for &z in samples {
        let x = f.evaluate(z);
        let norm = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let qmax = qs
            .iter()
            .map(|q| q.evaluate(&x).norm())
            .fold(0.0, f64::max);
        if qmax == 0.0 {
            return Err(ProjectiveError::CommonVanishing(z));
        }
        worst = worst.max(norm.powi(set.degree as i32) / (set.c1 * qmax));
    }
    Ok(worst)
}
