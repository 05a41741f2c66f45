use serde::Serialize;
use serde_json::json;

use super::{TheoremReport, Verdict};
use crate::curves::HolomorphicCurve;
use crate::nevanlinna::{Composite, NevanlinnaError};
use crate::projective::Hypersurface;

/// Lower bounds `l_j ≥ 1` on the zero multiplicities of `Q_j∘f`; `None`
/// stands for `∞` (no zeros at all).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiplicityProfile {
    pub entries: Vec<Option<u32>>,
}

impl MultiplicityProfile {
    pub fn new(entries: Vec<Option<u32>>) -> Self {
        Self { entries }
    }

    pub fn finite(ls: &[u32]) -> Self {
        Self::new(ls.iter().map(|&l| Some(l.max(1))).collect())
    }

    /// Smallest multiplicity of a zero of each `Q_j∘f` in `|z| ≤ r`.
    pub fn measure(f: &HolomorphicCurve, ds: &[Hypersurface], r: f64) -> Result<Self, NevanlinnaError> {
        let entries = ds
            .iter()
            .map(|d| Composite::new(f, d, r).map(|c| c.min_multiplicity(r)))
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }

    /// `Σ 1/l_j` with `1/∞ = 0`.
    pub fn reciprocal_sum(&self) -> f64 {
        self.entries
            .iter()
            .map(|l| l.map_or(0.0, |l| 1.0 / l.max(1) as f64))
            .fold(0.0, |acc, v| acc + v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyOutcome {
    pub sum: f64,
    /// `1/(q−1)`.
    pub statement_threshold: f64,
    /// `1/q`, the bound the argument actually reaches.
    pub proof_threshold: f64,
    pub below_statement: bool,
    pub below_proof: bool,
    /// True when the two thresholds disagree on this profile.
    pub flagged: bool,
    pub verdict: Verdict,
}

/// Compares `Σ 1/l_j` with both thresholds; degeneracy is implied only
/// below the stricter `1/q`.
pub fn evaluate_degeneracy_criterion(
    profile: &MultiplicityProfile,
    q: usize,
) -> Result<DegeneracyOutcome, String> {
    if q < 2 {
        return Err(format!("q = {q}; the criterion needs q >= 2"));
    }
    if profile.entries.len() != q + 1 {
        return Err(format!(
            "expected q + 1 = {} multiplicities, found {}",
            q + 1,
            profile.entries.len()
        ));
    }
    let sum = profile.reciprocal_sum();
    let statement_threshold = 1.0 / (q as f64 - 1.0);
    let proof_threshold = 1.0 / q as f64;
    let below_statement = sum < statement_threshold;
    let below_proof = sum < proof_threshold;
    let verdict = if below_proof {
        Verdict::DegeneracyImplied
    } else if below_statement {
        Verdict::ThresholdDependent
    } else {
        Verdict::DegeneracyNotImplied
    };
    Ok(DegeneracyOutcome {
        sum,
        statement_threshold,
        proof_threshold,
        below_statement,
        below_proof,
        flagged: below_statement != below_proof,
        verdict,
    })
}

pub fn degeneracy_report(profile: &MultiplicityProfile, q: usize) -> TheoremReport {
    let mut rep = TheoremReport::new("degeneracy", None);
    let ok = profile.entries.iter().all(|l| l.is_none_or(|l| l >= 1));
    rep.hypotheses.record("l_j >= 1", ok, format!("{:?}", profile.entries));
    match evaluate_degeneracy_criterion(profile, q) {
        Ok(out) => {
            rep.hypotheses.record("q + 1 entries", true, format!("q = {q}"));
            if out.flagged {
                rep.notes.push(format!(
                    "sum {} is below 1/(q-1) = {} but not below 1/q = {}",
                    out.sum, out.statement_threshold, out.proof_threshold
                ));
            }
            rep.verdict = out.verdict.clone();
            rep.details.insert("multiplicities".into(), json!(profile.entries));
            rep.details.insert("criterion".into(), json!(out));
            rep
        }
        Err(e) => {
            rep.hypotheses.record("q + 1 entries", false, e);
            rep.unmet()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_examples() {
        let out = evaluate_degeneracy_criterion(&MultiplicityProfile::finite(&[10, 10, 10]), 2).unwrap();
        assert!((out.sum - 0.3).abs() < 1e-15);
        assert!(out.below_statement && out.below_proof && !out.flagged);
        assert_eq!(out.verdict, Verdict::DegeneracyImplied);

        let out = evaluate_degeneracy_criterion(&MultiplicityProfile::finite(&[4; 4]), 3).unwrap();
        assert_eq!(out.verdict, Verdict::DegeneracyNotImplied);

        let rep = degeneracy_report(&MultiplicityProfile::finite(&[10; 4]), 3);
        assert_eq!(rep.verdict, Verdict::ThresholdDependent);
        assert_eq!(rep.notes.len(), 1);
        assert_eq!(rep.details["criterion"]["flagged"], json!(true));
    }

    #[test]
    fn infinite_multiplicity_and_shape_errors() {
        let p = MultiplicityProfile::new(vec![None, None, Some(3)]);
        assert!((p.reciprocal_sum() - 1.0 / 3.0).abs() < 1e-15);
        let rep = degeneracy_report(&MultiplicityProfile::finite(&[2, 2]), 2);
        assert_eq!(rep.exit_code(), 2);
    }

    #[test]
    fn measured_profile() {
        use crate::exp_poly::ExpPoly;
        use crate::projective::HomogeneousPolynomial;
        use num_complex::Complex64 as C64;
        let f = HolomorphicCurve::new(
            "f",
            vec![ExpPoly::one(), ExpPoly::exp(C64::new(1.0, 0.0))],
        )
        .unwrap();
        let w = |i| HomogeneousPolynomial::variable(2, i);
        let ds = [
            Hypersurface::new("D1", w(0)).unwrap(),
            Hypersurface::new("D2", w(1).power(3).unwrap()).unwrap(),
            Hypersurface::new("D3", w(0).add(&w(1)).unwrap().power(2).unwrap()).unwrap(),
        ];
        let p = MultiplicityProfile::measure(&f, &ds, 10.0).unwrap();
        assert_eq!(p.entries, vec![None, None, Some(2)]);
    }
}
