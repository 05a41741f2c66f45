//! Dense univariate polynomials over `C64`, ascending coefficient order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

/// Polynomial `c[0] + c[1] z + ... + c[d] z^d` with `c[d] != 0`.
///
/// The zero polynomial has an empty coefficient list.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnivariatePoly {
    coeffs: Vec<C64>,
}

impl UnivariatePoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// `c z^k`
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `Π (z - r)` over the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            &acc * &Self::new(vec![-r, C64::new(1.0, 0.0)])
        })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<C64> {
        self.coeffs.last().copied()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k| t^k`, the scale against which `|p(z)|` is small when `|z| = t`.
    pub fn eval_abs(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lead) => self.scale(lead.inv()),
            None => Self::zero(),
        }
    }

    /// Zeroes every coefficient with modulus `<= threshold`.
    pub fn flush(&self, threshold: f64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.norm() <= threshold { C64::new(0.0, 0.0) } else { c })
                .collect(),
        )
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let lead_inv = divisor.coeffs[dd].inv();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![C64::new(0.0, 0.0); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] * lead_inv;
            quot[k] = q;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= q * d;
            }
            rem[k + dd] = C64::new(0.0, 0.0);
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Numerical monic gcd by the Euclidean algorithm.
    ///
    /// A remainder counts as zero once its largest coefficient drops below
    /// `tol` times the largest coefficient of the current dividend.
    pub fn gcd(a: &Self, b: &Self, tol: f64) -> Self {
        let mut x = a.monic();
        let mut y = b.monic();
        if x.degree() < y.degree() {
            std::mem::swap(&mut x, &mut y);
        }
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            let scale = x.max_abs_coeff().max(y.max_abs_coeff());
            let r = r.flush(tol * scale);
            x = y;
            y = r.monic();
        }
        x.monic()
    }
}

impl Add for &UnivariatePoly {
    type Output = UnivariatePoly;
    fn add(self, rhs: &UnivariatePoly) -> UnivariatePoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        UnivariatePoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + rhs.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }
}

impl Sub for &UnivariatePoly {
    type Output = UnivariatePoly;
    fn sub(self, rhs: &UnivariatePoly) -> UnivariatePoly {
        self + &(-rhs)
    }
}

impl Neg for &UnivariatePoly {
    type Output = UnivariatePoly;
    fn neg(self) -> UnivariatePoly {
        UnivariatePoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Mul for &UnivariatePoly {
    type Output = UnivariatePoly;
    fn mul(self, rhs: &UnivariatePoly) -> UnivariatePoly {
        if self.is_zero() || rhs.is_zero() {
            return UnivariatePoly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UnivariatePoly::new(out)
    }
}

impl fmt::Display for UnivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", crate::format_complex(*c))?;
            match k {
                0 => {}
                1 => write!(f, "*z")?,
                _ => write!(f, "*z^{k}")?,
            }
        }
        Ok(())
    }
}
