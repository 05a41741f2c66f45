//! Expression syntax for curve components (over `z`) and forms (over
//! `w0 … wN`).
//!
//! ```text
//! expr  := ['+'|'-'] term (('+'|'-') term)*
//! term  := power ('*' power)*
//! power := atom ('^' uint)?
//! atom  := number ['i'] | 'i' | 'z' | 'w'uint | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `exp` takes an argument linear in `z`. Numbers are decimal reals with an
//! optional exponent; `2.5i` is imaginary.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::exp_poly::ExpPoly;
use crate::poly::UnivariatePoly;
use crate::projective::HomogeneousPolynomial;

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprError {
    /// Byte offset into the expression.
    pub offset: usize,
    pub message: String,
}

impl ExprError {
    fn at(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

trait Algebra: Sized + Clone {
    fn constant(c: C64) -> Self;
    fn variable(name: &str, offset: usize) -> Result<Self, ExprError>;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn exp(&self, offset: usize) -> Result<Self, ExprError>;
}

impl Algebra for ExpPoly {
    fn constant(c: C64) -> Self {
        ExpPoly::constant(c)
    }

    fn variable(name: &str, offset: usize) -> Result<Self, ExprError> {
        match name {
            "z" => Ok(ExpPoly::z()),
            _ => Err(ExprError::at(offset, format!("unknown variable `{name}` (expected z)"))),
        }
    }

    fn add(&self, o: &Self) -> Self {
        self + o
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }

    fn neg(&self) -> Self {
        -self
    }

    fn exp(&self, offset: usize) -> Result<Self, ExprError> {
        if self.is_identically_zero() {
            return Ok(ExpPoly::one());
        }
        let linear = self
            .single_frequency()
            .filter(|(lambda, p)| *lambda == C64::new(0.0, 0.0) && p.degree().unwrap_or(0) <= 1);
        let Some((_, p)) = linear else {
            return Err(ExprError::at(offset, "exp argument must be a + b*z"));
        };
        let c = p.coeffs();
        let a = c[0];
        let b = c.get(1).copied().unwrap_or_default();
        Ok(ExpPoly::term(UnivariatePoly::constant(a.exp()), b))
    }
}

/// Sparse polynomial in `w0, w1, …` used while parsing forms.
#[derive(Clone, Debug, Default, PartialEq)]
struct Sparse(BTreeMap<Vec<u32>, C64>);

impl Sparse {
    fn width(&self) -> usize {
        self.0.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    fn padded(e: &[u32], n: usize) -> Vec<u32> {
        let mut v = e.to_vec();
        v.resize(n, 0);
        v
    }
}

impl Algebra for Sparse {
    fn constant(c: C64) -> Self {
        let mut m = BTreeMap::new();
        if c != C64::new(0.0, 0.0) {
            m.insert(Vec::new(), c);
        }
        Sparse(m)
    }

    fn variable(name: &str, offset: usize) -> Result<Self, ExprError> {
        let idx = name
            .strip_prefix('w')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| ExprError::at(offset, format!("unknown variable `{name}` (expected w0, w1, ...)")))?;
        let mut e = vec![0; idx + 1];
        e[idx] = 1;
        Ok(Sparse(BTreeMap::from([(e, C64::new(1.0, 0.0))])))
    }

    fn add(&self, o: &Self) -> Self {
        let n = self.width().max(o.width());
        let mut m: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (e, c) in self.0.iter().chain(&o.0) {
            *m.entry(Sparse::padded(e, n)).or_default() += c;
        }
        m.retain(|_, c| *c != C64::new(0.0, 0.0));
        Sparse(m)
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.width().max(o.width());
        let mut m: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &o.0 {
                let a = Sparse::padded(ea, n);
                let b = Sparse::padded(eb, n);
                let e: Vec<u32> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                *m.entry(e).or_default() += ca * cb;
            }
        }
        m.retain(|_, c| *c != C64::new(0.0, 0.0));
        Sparse(m)
    }

    fn neg(&self) -> Self {
        Sparse(self.0.iter().map(|(e, c)| (e.clone(), -c)).collect())
    }

    fn exp(&self, offset: usize) -> Result<Self, ExprError> {
        Err(ExprError::at(offset, "exp is not allowed in a form"))
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr<A: Algebra>(&mut self) -> Result<A, ExprError> {
        let mut acc = if self.eat('-') {
            self.term::<A>()?.neg()
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.add(&self.term::<A>()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<A: Algebra>(&mut self) -> Result<A, ExprError> {
        let mut acc = self.power::<A>()?;
        while self.eat('*') {
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn power<A: Algebra>(&mut self) -> Result<A, ExprError> {
        let base = self.atom::<A>()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let digits: String = self.src[start..].chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(ExprError::at(start, "expected a nonnegative integer exponent"));
        }
        self.pos += digits.len();
        let e: u32 = digits
            .parse()
            .ok()
            .filter(|&e| e <= MAX_EXPONENT)
            .ok_or_else(|| ExprError::at(start, format!("exponent above {MAX_EXPONENT}")))?;
        let mut out = A::constant(C64::new(1.0, 0.0));
        for _ in 0..e {
            out = out.mul(&base);
        }
        Ok(out)
    }

    fn atom<A: Algebra>(&mut self) -> Result<A, ExprError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let Some(c) = self.peek() else {
            return Err(ExprError::at(start, "unexpected end of expression"));
        };
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(')') {
                return Err(ExprError::at(self.pos, "expected `)`"));
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == '.' {
            let x = self.number()?;
            if self.src[self.pos..].starts_with('i') && !self.ident_continues(self.pos + 1) {
                self.pos += 1;
                return Ok(A::constant(C64::new(0.0, x)));
            }
            return Ok(A::constant(C64::new(x, 0.0)));
        }
        if c.is_ascii_alphabetic() {
            let name: String = self.src[start..]
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                .collect();
            self.pos += name.len();
            return match name.as_str() {
                "i" => Ok(A::constant(C64::new(0.0, 1.0))),
                "exp" => {
                    if !self.eat('(') {
                        return Err(ExprError::at(self.pos, "expected `(` after exp"));
                    }
                    let arg_at = self.pos;
                    let arg: A = self.expr()?;
                    if !self.eat(')') {
                        return Err(ExprError::at(self.pos, "expected `)`"));
                    }
                    arg.exp(arg_at)
                }
                _ => A::variable(&name, start),
            };
        }
        Err(ExprError::at(start, format!("unexpected character `{c}`")))
    }

    fn ident_continues(&self, at: usize) -> bool {
        self.src[at..]
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = start;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        // An exponent only when digits follow, so `2exp` stays an error
        // rather than a misread.
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let x: f64 = text
            .parse()
            .map_err(|_| ExprError::at(start, format!("invalid number `{text}`")))?;
        self.pos = i;
        Ok(x)
    }

    fn finish(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(ExprError::at(self.pos, format!("unexpected `{c}`"))),
        }
    }
}

/// Parses an exponential polynomial in `z`.
pub fn parse_exp_poly(src: &str) -> Result<ExpPoly, ExprError> {
    let mut p = Parser { src, pos: 0 };
    let v = p.expr::<ExpPoly>()?;
    p.finish()?;
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormError {
    Syntax(ExprError),
    /// A monomial whose degree differs from the declared one.
    NonHomogeneous { expected: u32, found: u32 },
    /// A variable beyond `w_N`.
    Dimension { max_index: usize, num_vars: usize },
    Zero,
}

/// Parses a form in `num_vars` variables; `degree` defaults to the degree
/// of the first monomial.
pub fn parse_form(
    src: &str,
    num_vars: usize,
    degree: Option<u32>,
) -> Result<HomogeneousPolynomial, FormError> {
    let mut p = Parser { src, pos: 0 };
    let v = p.expr::<Sparse>().map_err(FormError::Syntax)?;
    p.finish().map_err(FormError::Syntax)?;
    if v.width() > num_vars {
        return Err(FormError::Dimension {
            max_index: v.width() - 1,
            num_vars,
        });
    }
    let Some(first) = v.0.keys().next() else {
        return Err(FormError::Zero);
    };
    let d = degree.unwrap_or_else(|| first.iter().sum());
    let mut terms = Vec::with_capacity(v.0.len());
    for (e, c) in v.0 {
        let found: u32 = e.iter().sum();
        if found != d {
            return Err(FormError::NonHomogeneous { expected: d, found });
        }
        terms.push((Sparse::padded(&e, num_vars), c));
    }
    HomogeneousPolynomial::new(num_vars, d, terms).map_err(|_| FormError::Zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format_complex;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn curve_components() {
        assert_eq!(parse_exp_poly("1").unwrap(), ExpPoly::one());
        assert_eq!(parse_exp_poly("exp(z)").unwrap(), ExpPoly::exp(c(1.0, 0.0)));
        assert_eq!(
            parse_exp_poly("-exp(z)").unwrap(),
            ExpPoly::exp(c(1.0, 0.0)).scale(c(-1.0, 0.0))
        );
        let g = parse_exp_poly("1 + exp(2*z)").unwrap();
        assert!(g.evaluate(c(0.0, std::f64::consts::FRAC_PI_2)).norm() < 1e-15);
        let p = parse_exp_poly("z^2 - 3*z + (1+2i)").unwrap();
        assert_eq!(p.evaluate(c(1.0, 0.0)), c(-1.0, 2.0));
        let q = parse_exp_poly("z*exp((0.5-1i)*z + 1)").unwrap();
        let z = c(0.3, 0.2);
        assert!((q.evaluate(z) - z * (c(0.5, -1.0) * z + 1.0).exp()).norm() < 1e-14);
        assert_eq!(parse_exp_poly("2.5e-1").unwrap(), ExpPoly::constant(c(0.25, 0.0)));
    }

    #[test]
    fn formatted_literals_round_trip() {
        for v in [c(0.1, 0.0), c(-2.5, 0.0), c(1.0, -1e-300), c(3.0, 4.25), c(0.0, -7.0)] {
            let s = format_complex(v);
            let back = parse_exp_poly(&s).unwrap();
            let got = back.terms().first().map(|t| t.poly.coeffs()[0]).unwrap_or_default();
            assert_eq!((got.re.to_bits(), got.im.to_bits()), (v.re.to_bits(), v.im.to_bits()) , "{s}");
        }
    }

    #[test]
    fn syntax_errors_have_offsets() {
        let e = parse_exp_poly("1 + * z").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(parse_exp_poly("exp(z^2)").is_err());
        assert!(parse_exp_poly("w0").is_err());
        assert!(parse_exp_poly("(1 + z").is_err());
    }

    #[test]
    fn forms() {
        let q = parse_form("w0^2 + w1^2", 2, Some(2)).unwrap();
        assert_eq!(q.degree(), 2);
        assert_eq!(q.coefficient(&[2, 0]), c(1.0, 0.0));
        assert!(matches!(
            parse_form("w0 + w1^2", 2, None),
            Err(FormError::NonHomogeneous { .. })
        ));
        assert!(matches!(parse_form("w0^2", 2, Some(3)), Err(FormError::NonHomogeneous { .. })));
        assert!(matches!(parse_form("w2", 2, None), Err(FormError::Dimension { .. })));
        assert_eq!(parse_form("w0 - w0", 2, None), Err(FormError::Zero));
        let l = parse_form("w0 + w1 + w2", 3, Some(1)).unwrap();
        assert_eq!(l, HomogeneousPolynomial::coordinate_sum(3));
    }
}
