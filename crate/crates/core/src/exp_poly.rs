//! Exponential polynomials `Σ p_λ(z) e^{λz}`.
//!
//! The functions `z^k e^{λz}` with distinct `λ` are linearly independent over
//! ℂ, so after canonicalization an [`ExpPoly`] is identically zero exactly when
//! its term list is empty. Ring operations keep that canonical form: frequencies
//! closer than [`FREQ_MERGE_TOL`] are merged, and coefficients that cancel down
//! to [`COEFF_FLUSH_TOL`] of the magnitudes that produced them are dropped.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::poly::UnivariatePoly;

/// Frequencies `λ₁, λ₂` are one term iff `|λ₁ − λ₂| ≤ FREQ_MERGE_TOL·(1 + |λ₁|)`.
pub const FREQ_MERGE_TOL: f64 = 1e-10;
/// Relative threshold below which a coefficient produced by cancellation is zero.
pub const COEFF_FLUSH_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub freq: C64,
    pub poly: UnivariatePoly,
}

/// A finite sum of `p_λ(z) e^{λz}` terms in canonical form.
///
/// Terms are sorted by `(Re λ, Im λ)` and no coefficient polynomial is zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

fn same_freq(a: C64, b: C64) -> bool {
    (a - b).norm() <= FREQ_MERGE_TOL * (1.0 + a.norm())
}

/// Accumulates terms while tracking the magnitude of everything summed into
/// each coefficient, so cancellation can be recognised relative to its inputs.
struct Accumulator {
    entries: Vec<(C64, Vec<C64>, f64)>,
}

impl Accumulator {
    fn new() -> Self {
        Self { entries: Vec::new() }
    }

    fn slot(&mut self, freq: C64) -> &mut (C64, Vec<C64>, f64) {
        let idx = match self.entries.iter().position(|(f, _, _)| same_freq(*f, freq)) {
            Some(i) => i,
            None => {
                self.entries.push((freq, Vec::new(), 0.0));
                self.entries.len() - 1
            }
        };
        &mut self.entries[idx]
    }

    fn push(&mut self, freq: C64, coeffs: &[C64], scale: f64) {
        let (_, acc, s) = self.slot(freq);
        if acc.len() < coeffs.len() {
            acc.resize(coeffs.len(), C64::new(0.0, 0.0));
        }
        for (a, &c) in acc.iter_mut().zip(coeffs) {
            *a += c;
        }
        *s = s.max(scale);
    }

    fn finish(self) -> ExpPoly {
        let mut terms: Vec<Term> = self
            .entries
            .into_iter()
            .filter_map(|(freq, coeffs, scale)| {
                let poly = UnivariatePoly::new(coeffs).flush(COEFF_FLUSH_TOL * scale);
                (!poly.is_zero()).then_some(Term { freq, poly })
            })
            .collect();
        terms.sort_by(|a, b| {
            a.freq
                .re
                .total_cmp(&b.freq.re)
                .then(a.freq.im.total_cmp(&b.freq.im))
        });
        ExpPoly { terms }
    }
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::term(UnivariatePoly::constant(c), C64::new(0.0, 0.0))
    }

    /// The identity function `z`.
    pub fn z() -> Self {
        Self::polynomial(UnivariatePoly::monomial(C64::new(1.0, 0.0), 1))
    }

    /// `e^{λz}`
    pub fn exp(freq: C64) -> Self {
        Self::term(UnivariatePoly::one(), freq)
    }

    pub fn polynomial(p: UnivariatePoly) -> Self {
        Self::term(p, C64::new(0.0, 0.0))
    }

    /// `p(z) e^{λz}`
    pub fn term(poly: UnivariatePoly, freq: C64) -> Self {
        if poly.is_zero() {
            Self::zero()
        } else {
            Self {
                terms: vec![Term { freq, poly }],
            }
        }
    }

    /// Builds from arbitrary `(λ, p_λ)` pairs, merging equal frequencies.
    pub fn from_terms(terms: impl IntoIterator<Item = (C64, UnivariatePoly)>) -> Self {
        let mut acc = Accumulator::new();
        for (freq, poly) in terms {
            acc.push(freq, poly.coeffs(), poly.max_abs_coeff());
        }
        acc.finish()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single `(λ, p)` pair when the function is `p(z) e^{λz}`.
    ///
    /// Such a function has exactly the zeros of `p`.
    pub fn single_frequency(&self) -> Option<(C64, &UnivariatePoly)> {
        match self.terms.as_slice() {
            [t] => Some((t.freq, &t.poly)),
            _ => None,
        }
    }

    /// The underlying polynomial when every term has frequency zero.
    pub fn as_polynomial(&self) -> Option<&UnivariatePoly> {
        match self.terms.as_slice() {
            [] => None,
            [t] if t.freq == C64::new(0.0, 0.0) => Some(&t.poly),
            _ => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.is_empty() || self.as_polynomial().is_some()
    }

    pub fn evaluate(&self, z: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| t.poly.eval(z) * (t.freq * z).exp())
            .sum()
    }

    /// `Σ_λ Σ_k |c_{λ,k}| |z|^k |e^{λz}|`, an upper bound for `|self(z)|`
    /// and the natural scale for deciding when a computed value is round-off.
    pub fn magnitude(&self, z: C64) -> f64 {
        let t = z.norm();
        self.terms
            .iter()
            .map(|term| term.poly.eval_abs(t) * (term.freq * z).re.exp())
            .sum()
    }

    pub fn differentiate(&self) -> Self {
        let mut acc = Accumulator::new();
        for t in &self.terms {
            let dp = t.poly.derivative();
            let lp = t.poly.scale(t.freq);
            let scale = dp.max_abs_coeff().max(lp.max_abs_coeff());
            acc.push(t.freq, dp.coeffs(), scale);
            acc.push(t.freq, lp.coeffs(), scale);
        }
        acc.finish()
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |g, _| g.differentiate())
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    freq: t.freq,
                    poly: t.poly.scale(s),
                })
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Largest polynomial degree over all terms.
    pub fn max_poly_degree(&self) -> usize {
        self.terms
            .iter()
            .filter_map(|t| t.poly.degree())
            .max()
            .unwrap_or(0)
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut acc = Accumulator::new();
        for t in self.terms.iter().chain(&rhs.terms) {
            acc.push(t.freq, t.poly.coeffs(), t.poly.max_abs_coeff());
        }
        acc.finish()
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        let mut acc = Accumulator::new();
        for a in &self.terms {
            for b in &rhs.terms {
                let prod = &a.poly * &b.poly;
                let scale = a.poly.max_abs_coeff()
                    * b.poly.max_abs_coeff()
                    * (a.poly.coeffs().len().min(b.poly.coeffs().len())) as f64;
                acc.push(a.freq + b.freq, prod.coeffs(), scale);
            }
        }
        acc.finish()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ExpPoly {
            type Output = ExpPoly;
            fn $m(self, rhs: ExpPoly) -> ExpPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        -&self
    }
}

/// Determinant of the matrix whose row `i` holds the `i`-th derivatives of
/// `fs`, expanded exactly in the ring.
///
/// The expansion runs over column subsets, row by row (`O(2^k k)` products).
pub fn wronskian(fs: &[ExpPoly]) -> ExpPoly {
    let k = fs.len();
    assert!(k > 0, "wronskian of an empty list");
    assert!(k <= 16, "wronskian expansion supports at most 16 functions");
    let mut rows: Vec<Vec<ExpPoly>> = vec![fs.to_vec()];
    for i in 1..k {
        let next = rows[i - 1].iter().map(ExpPoly::differentiate).collect();
        rows.push(next);
    }
    // minors[S] = determinant of rows 0..|S| restricted to the column set S.
    let mut minors: Vec<Option<ExpPoly>> = vec![None; 1 << k];
    minors[0] = Some(ExpPoly::one());
    for mask in 0usize..(1 << k) {
        let Some(minor) = minors[mask].take() else {
            continue;
        };
        let row = mask.count_ones() as usize;
        if row == k {
            minors[mask] = Some(minor);
            continue;
        }
        if minor.is_identically_zero() {
            continue;
        }
        for j in 0..k {
            if mask & (1 << j) != 0 {
                continue;
            }
            // Sign of moving column j past the later columns already in S.
            let later = (mask >> (j + 1)).count_ones();
            let mut term = &minor * &rows[row][j];
            if later % 2 == 1 {
                term = -term;
            }
            let slot = &mut minors[mask | (1 << j)];
            *slot = Some(match slot.take() {
                Some(prev) => &prev + &term,
                None => term,
            });
        }
    }
    minors[(1 << k) - 1].take().unwrap_or_default()
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for t in &self.terms {
            for (k, &c) in t.poly.coeffs().iter().enumerate() {
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{}", crate::format_complex(c))?;
                match k {
                    0 => {}
                    1 => write!(f, "*z")?,
                    _ => write!(f, "*z^{k}")?,
                }
                if t.freq != C64::new(0.0, 0.0) {
                    write!(f, "*exp({}*z)", crate::format_complex(t.freq))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }
    fn poly(cs: &[f64]) -> ExpPoly {
        ExpPoly::polynomial(UnivariatePoly::from_real(cs))
    }
    fn e(l: f64) -> ExpPoly {
        ExpPoly::exp(c(l))
    }

    #[test]
    fn add_examples() {
        assert!((&ExpPoly::z() + &(-&ExpPoly::z())).is_identically_zero());
        assert_eq!(&e(1.0) + &e(1.0), ExpPoly::exp(c(1.0)).scale(c(2.0)));
        let lhs = &(&ExpPoly::one() + &e(1.0)) + &(&ExpPoly::z() - &e(1.0));
        assert_eq!(lhs, poly(&[1.0, 1.0]));
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(&e(1.0) * &e(-1.0), ExpPoly::one());
        assert_eq!(&ExpPoly::z() * &ExpPoly::z(), poly(&[0.0, 0.0, 1.0]));
        let s = &ExpPoly::one() + &e(1.0);
        let expected = ExpPoly::from_terms([
            (c(0.0), UnivariatePoly::from_real(&[1.0])),
            (c(1.0), UnivariatePoly::from_real(&[2.0])),
            (c(2.0), UnivariatePoly::from_real(&[1.0])),
        ]);
        assert_eq!(&s * &s, expected);
    }

    #[test]
    fn differentiate_examples() {
        assert_eq!(poly(&[0.0, 0.0, 1.0]).differentiate(), poly(&[0.0, 2.0]));
        assert_eq!(e(2.0).differentiate(), e(2.0).scale(c(2.0)));
        let ze2 = ExpPoly::term(UnivariatePoly::from_real(&[0.0, 1.0]), c(2.0));
        let expected = ExpPoly::term(UnivariatePoly::from_real(&[1.0, 2.0]), c(2.0));
        assert_eq!(ze2.differentiate(), expected);
    }

    #[test]
    fn identically_zero_examples() {
        assert!((&(&e(1.0) * &e(1.0)) - &e(2.0)).is_identically_zero());
        assert!(!(&ExpPoly::one() + &e(1.0)).is_identically_zero());
        let one_z = poly(&[1.0, 1.0]);
        assert!((&(&one_z * &one_z) - &poly(&[1.0, 2.0, 1.0])).is_identically_zero());
    }

    #[test]
    fn wronskian_examples() {
        let w = wronskian(&[ExpPoly::one(), ExpPoly::z(), poly(&[0.0, 0.0, 1.0])]);
        assert_eq!(w, ExpPoly::constant(c(2.0)));
        let w = wronskian(&[ExpPoly::one(), ExpPoly::z(), poly(&[0.0, 2.0])]);
        assert!(w.is_identically_zero());
        assert_eq!(wronskian(&[ExpPoly::one(), e(1.0)]), e(1.0));
        let w = wronskian(&[ExpPoly::one(), e(1.0), e(2.0)]);
        assert_eq!(w, e(3.0).scale(c(2.0)));
    }

    #[test]
    fn wronskian_of_single_function_is_itself() {
        let f = &e(0.5) + &ExpPoly::z();
        assert_eq!(wronskian(std::slice::from_ref(&f)), f);
    }

    #[test]
    fn evaluate_examples() {
        assert!((poly(&[0.0, 0.0, 1.0]).evaluate(c(2.0)) - c(4.0)).norm() < 1e-15);
        assert!((e(1.0).evaluate(C64::new(0.0, PI)) + c(1.0)).norm() < 1e-15);
        let g = &ExpPoly::one() + &e(2.0);
        assert!(g.evaluate(C64::new(0.0, PI / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn nearby_frequencies_merge() {
        let a = ExpPoly::exp(c(1.0));
        let b = ExpPoly::exp(c(1.0 + 1e-12));
        assert_eq!((&a + &b).terms().len(), 1);
        let far = ExpPoly::exp(c(1.0 + 1e-6));
        assert_eq!((&a + &far).terms().len(), 2);
    }

    #[test]
    fn terms_sorted_by_frequency() {
        let g = &(&e(2.0) + &e(-1.0)) + &ExpPoly::exp(C64::new(0.0, 1.0));
        let freqs: Vec<_> = g.terms().iter().map(|t| t.freq).collect();
        assert_eq!(freqs, vec![c(-1.0), C64::new(0.0, 1.0), c(2.0)]);
    }

    #[test]
    fn magnitude_bounds_value() {
        let g = &(&e(2.0) - &ExpPoly::z()) + &ExpPoly::exp(C64::new(0.3, -1.0));
        for k in 0..10 {
            let z = C64::from_polar(3.0, k as f64);
            assert!(g.evaluate(z).norm() <= g.magnitude(z) * (1.0 + 1e-14));
        }
    }
}
