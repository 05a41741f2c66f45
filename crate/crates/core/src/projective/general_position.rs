//! General position of hypersurfaces: every `N + 1` of them must have no
//! common zero in `ℙᴺ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::certificate::{certificates_for_subset, CertificateSet};
use super::{normalize_degrees, HomogeneousPolynomial, Hypersurface};
use crate::linalg::least_squares;
use crate::poly::UnivariatePoly;
use crate::zero_locator::polynomial_zeros;

/// Relative size of `|Q(x)|` (against `‖Q‖₁·‖x‖^d`) accepted as a zero.
const ZERO_TOL: f64 = 1e-10;
/// Default seed of the randomized common-zero search.
pub const SEARCH_SEED: u64 = 0x6e65_766c_6162;
const SEARCH_LINES: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub enum SubsetStatus {
    Certified(CertificateSet),
    /// A located common projective zero.
    CommonZero(Vec<C64>),
    /// No certificate up to the exponent cap and no common zero found.
    Undecided { m_max: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneralPosition {
    Yes,
    No,
    UndecidedAtBound,
}

impl GeneralPosition {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeneralPosition::Yes => "general-position",
            GeneralPosition::No => "not-general-position",
            GeneralPosition::UndecidedAtBound => "undecided-at-bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralPositionReport {
    pub status: GeneralPosition,
    /// Each `(N+1)`-subset (indices into the input list) with its outcome.
    pub subsets: Vec<(Vec<usize>, SubsetStatus)>,
}

impl GeneralPositionReport {
    pub fn holds(&self) -> bool {
        self.status == GeneralPosition::Yes
    }

    /// First subset that failed, with its common zero when one was found.
    pub fn witness(&self) -> Option<(&[usize], Option<&[C64]>)> {
        self.subsets.iter().find_map(|(idx, s)| match s {
            SubsetStatus::Certified(_) => None,
            SubsetStatus::CommonZero(z) => Some((idx.as_slice(), Some(z.as_slice()))),
            SubsetStatus::Undecided { .. } => Some((idx.as_slice(), None)),
        })
    }
}

pub(crate) fn subsets(q: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, q: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..q {
            cur.push(i);
            rec(i + 1, q, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, q, k, &mut Vec::new(), &mut out);
    out
}

/// Decides general position subset by subset.
///
/// Within a subset the forms are first raised to their lcm degree (same
/// supports). A subset is certified by Nullstellensatz certificates for every
/// variable; otherwise a common zero is searched for, and a subset with
/// neither is reported as undecided rather than failing.
pub fn check_general_position(
    ds: &[Hypersurface],
    n_dim: usize,
    m_max: Option<u32>,
) -> GeneralPositionReport {
    check_general_position_seeded(ds, n_dim, m_max, SEARCH_SEED)
}

/// [`check_general_position`] with an explicit seed for the common-zero
/// search.
pub fn check_general_position_seeded(
    ds: &[Hypersurface],
    n_dim: usize,
    m_max: Option<u32>,
    seed: u64,
) -> GeneralPositionReport {
    let k = n_dim + 1;
    let results: Vec<(Vec<usize>, SubsetStatus)> = subsets(ds.len(), k)
        .into_par_iter()
        .map(|idx| {
            let forms: Vec<HomogeneousPolynomial> =
                idx.iter().map(|&i| ds[i].form().clone()).collect();
            (idx, subset_status(&forms, m_max, seed))
        })
        .collect();
    let status = if results.iter().any(|(_, s)| matches!(s, SubsetStatus::CommonZero(_))) {
        GeneralPosition::No
    } else if results.iter().all(|(_, s)| matches!(s, SubsetStatus::Certified(_))) {
        GeneralPosition::Yes
    } else {
        GeneralPosition::UndecidedAtBound
    };
    GeneralPositionReport {
        status,
        subsets: results,
    }
}

pub(crate) fn subset_status(
    forms: &[HomogeneousPolynomial],
    m_max: Option<u32>,
    seed: u64,
) -> SubsetStatus {
    let (n, _, normalized) = normalize_degrees(forms).expect("normalizing nonzero forms");
    match certificates_for_subset(&normalized, m_max) {
        Ok(set) => SubsetStatus::Certified(set),
        Err(_) => match common_zero(forms, seed) {
            Some(z) => SubsetStatus::CommonZero(z),
            None => SubsetStatus::Undecided {
                m_max: m_max.unwrap_or(forms[0].num_vars() as u32 * n + 1),
            },
        },
    }
}

fn vanishes(q: &HomogeneousPolynomial, x: &[C64]) -> bool {
    let norm = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    q.evaluate(x).norm() <= ZERO_TOL * q.l1_norm() * norm.powi(q.degree() as i32)
}

/// Searches for a common projective zero, normalized so the largest
/// coordinate is 1.
pub(crate) fn common_zero(forms: &[HomogeneousPolynomial], seed: u64) -> Option<Vec<C64>> {
    let nv = forms.first()?.num_vars();
    if nv == 2 {
        return common_zero_binary(forms);
    }
    common_zero_search(forms, seed)
}

/// Binary forms: the point `(0:1)` and the roots of `Q(1, t)`.
fn common_zero_binary(forms: &[HomogeneousPolynomial]) -> Option<Vec<C64>> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let infinity = [zero, one];
    if forms.iter().all(|q| vanishes(q, &infinity)) {
        return Some(infinity.to_vec());
    }
    let dehom = |q: &HomogeneousPolynomial| {
        let mut coeffs = vec![zero; q.degree() as usize + 1];
        for (e, c) in q.terms() {
            coeffs[e[1] as usize] += c;
        }
        UnivariatePoly::new(coeffs)
    };
    let pivot = forms
        .iter()
        .map(dehom)
        .filter(|p| !p.is_zero())
        .min_by_key(|p| p.degree().unwrap_or(0))?;
    for root in polynomial_zeros(&pivot).ok()? {
        let t = root.location;
        let x = if t.norm() > 1.0 { vec![one / t, one] } else { vec![one, t] };
        if forms.iter().all(|q| vanishes(q, &x)) {
            return Some(x);
        }
    }
    None
}

/// Restricts the first form to random lines, and from each of its zeros on
/// the line runs Gauss–Newton on the whole system in an affine chart.
fn common_zero_search(forms: &[HomogeneousPolynomial], seed: u64) -> Option<Vec<C64>> {
    let nv = forms[0].num_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        (0..nv)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    };
    for _ in 0..SEARCH_LINES {
        let p = gauss(&mut rng);
        let q = gauss(&mut rng);
        // Q_0(p + t q) as a polynomial in t, by interpolation at d + 1 nodes.
        let d = forms[0].degree() as usize;
        let nodes: Vec<C64> = (0..=d).map(|k| C64::from_polar(1.0, k as f64 * 0.9 + 0.3)).collect();
        let vals: Vec<C64> = nodes
            .iter()
            .map(|&t| {
                let x: Vec<C64> = p.iter().zip(&q).map(|(a, b)| a + t * b).collect();
                forms[0].evaluate(&x)
            })
            .collect();
        let line = interpolate(&nodes, &vals);
        if line.is_zero() {
            continue;
        }
        let Ok(roots) = polynomial_zeros(&line) else { continue };
        for root in roots {
            let x0: Vec<C64> = p.iter().zip(&q).map(|(a, b)| a + root.location * b).collect();
            if let Some(x) = gauss_newton(forms, x0) {
                return Some(x);
            }
        }
    }
    None
}

fn interpolate(nodes: &[C64], vals: &[C64]) -> UnivariatePoly {
    let n = nodes.len();
    let mut v = DMatrix::<C64>::zeros(n, n);
    for (i, &t) in nodes.iter().enumerate() {
        let mut tk = C64::new(1.0, 0.0);
        for j in 0..n {
            v[(i, j)] = tk;
            tk *= t;
        }
    }
    let c = least_squares(&v, &DVector::from_column_slice(vals), 1e-14);
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    UnivariatePoly::new(c.iter().copied().collect()).flush(1e-12 * scale)
}

fn normalize_point(x: &[C64]) -> Vec<C64> {
    let (imax, _) = x
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("nonempty point");
    let s = x[imax];
    x.iter().map(|v| v / s).collect()
}

fn gauss_newton(forms: &[HomogeneousPolynomial], start: Vec<C64>) -> Option<Vec<C64>> {
    let nv = start.len();
    let mut x = normalize_point(&start);
    for _ in 0..60 {
        if forms.iter().all(|q| vanishes(q, &x)) {
            return Some(x);
        }
        let chart = x.iter().position(|v| *v == C64::new(1.0, 0.0)).unwrap_or(0);
        let free: Vec<usize> = (0..nv).filter(|&i| i != chart).collect();
        let mut jac = DMatrix::<C64>::zeros(forms.len(), free.len());
        let mut rhs = DVector::<C64>::zeros(forms.len());
        for (r, q) in forms.iter().enumerate() {
            rhs[r] = -q.evaluate(&x);
            for (c, &i) in free.iter().enumerate() {
                jac[(r, c)] = q.partial(i).evaluate(&x);
            }
        }
        let step = least_squares(&jac, &rhs, 1e-12);
        for (c, &i) in free.iter().enumerate() {
            x[i] += step[c];
        }
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return None;
        }
        x = normalize_point(&x);
    }
    forms.iter().all(|q| vanishes(q, &x)).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn hyper(q: HomogeneousPolynomial) -> Hypersurface {
        Hypersurface::new("D", q).unwrap()
    }

    fn w(n: usize, i: usize) -> HomogeneousPolynomial {
        HomogeneousPolynomial::variable(n, i)
    }

    #[test]
    fn three_points_on_the_line() {
        let ds = [
            hyper(w(2, 0)),
            hyper(w(2, 1)),
            hyper(HomogeneousPolynomial::coordinate_sum(2)),
        ];
        let rep = check_general_position(&ds, 1, None);
        assert!(rep.holds());
        assert_eq!(rep.subsets.len(), 3);
    }

    #[test]
    fn shared_support_point() {
        let ds = [hyper(w(2, 0)), hyper(w(2, 0).mul(&w(2, 1)).unwrap())];
        let rep = check_general_position(&ds, 1, None);
        assert_eq!(rep.status, GeneralPosition::No);
        let (idx, z) = rep.witness().unwrap();
        assert_eq!(idx, &[0, 1]);
        assert_eq!(z.unwrap(), &[c(0.0), c(1.0)]);
    }

    #[test]
    fn four_hyperplanes_in_the_plane() {
        let ds = [
            hyper(w(3, 0)),
            hyper(w(3, 1)),
            hyper(w(3, 2)),
            hyper(HomogeneousPolynomial::coordinate_sum(3)),
        ];
        let rep = check_general_position(&ds, 2, None);
        assert!(rep.holds());
        assert_eq!(rep.subsets.len(), 4);
    }

    #[test]
    fn concurrent_lines_found() {
        // w0 - w1, w1 - w2, w0 - w2 all pass through (1:1:1).
        let l = |a: usize, b: usize| w(3, a).add(&w(3, b).scale(c(-1.0))).unwrap();
        let ds = [hyper(l(0, 1)), hyper(l(1, 2)), hyper(l(0, 2))];
        let rep = check_general_position(&ds, 2, None);
        assert_eq!(rep.status, GeneralPosition::No);
        let z = rep.witness().unwrap().1.unwrap();
        for v in z {
            assert!((v - c(1.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn invariant_under_permutation_and_scaling() {
        let ds = [
            hyper(w(2, 0).power(2).unwrap()),
            hyper(w(2, 1).power(2).unwrap().scale(C64::new(0.0, 3.0))),
            hyper(w(2, 0).power(2).unwrap().add(&w(2, 1).power(2).unwrap()).unwrap()),
        ];
        let rev: Vec<Hypersurface> = ds.iter().rev().cloned().collect();
        assert!(check_general_position(&ds, 1, None).holds());
        assert!(check_general_position(&rev, 1, None).holds());
    }
}
