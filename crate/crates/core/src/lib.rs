//! Numerical laboratory for the value-distribution theory of holomorphic
//! curves `f: ℂ → ℙᴺ(ℂ)` whose components are exponential polynomials.
//!
//! The crate computes the Nevanlinna functionals of such curves (characteristic,
//! proximity and truncated counting functions), builds Nullstellensatz
//! certificates for hypersurfaces in general position, and checks first and
//! second main theorem inequalities, a degeneracy criterion and a uniqueness
//! statement on finite radius grids.
//!
//! Module map:
//!
//! - [`exp_poly`]: the ring of exponential polynomials, Wronskians.
//! - [`projective`]: homogeneous forms, hypersurfaces, certificates.
//! - [`curves`]: reduced representations and nondegeneracy tests.
//! - [`zero_locator`]: zeros with multiplicity inside a disk.
//! - [`nevanlinna`]: `T_f`, `m_f`, `N_f`, `N_f^M` on radius grids.
//! - [`theorems`]: executable reports for the main inequalities.
//! - [`cli`]: scenario files and the `nevlab` command line.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cli;
pub mod curves;
pub mod exp_poly;
pub mod linalg;
pub mod nevanlinna;
pub mod poly;
pub mod projective;
pub mod quadrature;
pub mod theorems;
pub mod zero_locator;

pub use num_complex::Complex64 as C64;

pub use curves::HolomorphicCurve;
pub use exp_poly::{wronskian, ExpPoly};
pub use nevanlinna::{NevanlinnaProfile, RGrid};
pub use poly::UnivariatePoly;
pub use projective::{HomogeneousPolynomial, Hypersurface};
pub use theorems::{TheoremReport, Verdict};
pub use zero_locator::ZeroAtlas;

/// Formats a complex number in the scenario expression syntax.
///
/// Real numbers print bare, others as `(a+bi)`; both parse back bit-exactly.
pub fn format_complex(c: C64) -> String {
    fn num(x: f64) -> String {
        format!("{x:?}")
    }
    if c.im == 0.0 {
        if c.re.is_sign_negative() {
            format!("({})", num(c.re))
        } else {
            num(c.re)
        }
    } else if c.im.is_sign_negative() {
        format!("({}-{}i)", num(c.re), num(-c.im))
    } else {
        format!("({}+{}i)", num(c.re), num(c.im))
    }
}
