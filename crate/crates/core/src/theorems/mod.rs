//! Executable checks of the main inequalities on a radius grid, each
//! returning a [`TheoremReport`].

mod algebra;
mod degeneracy;
mod smt;
mod uniqueness;

use std::fmt::Write as _;

use indexmap::IndexMap;
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curves::HolomorphicCurve;
use crate::nevanlinna::{characteristic, Composite, Perturbation, RGrid};
use crate::projective::{check_general_position_seeded, Hypersurface};

pub use algebra::{certificate_report, format_point, general_position_report, NORM_SAMPLES};
pub use degeneracy::{
    degeneracy_report, evaluate_degeneracy_criterion, DegeneracyOutcome, MultiplicityProfile,
};
pub use smt::{
    check_counting_transfer, check_main_smt, check_tf_transfer, counting_transfer_for, smt_setup,
    tf_transfer_for, SmtSetup,
};
pub use uniqueness::run_uniqueness_experiment;

/// Radii at or beyond this are the grid tail used for flatness checks and
/// beyond which the slack constant is no longer fitted.
pub const TAIL_START: f64 = 5.0;
/// Allowed `max − min` style spread of residuals that should be constant.
pub const SPREAD_TOL: f64 = 0.05;

/// Tunables shared by the checks.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    /// `ε` of the slack allowance `ε·T_f + C`.
    pub epsilon: f64,
    /// Overrides the theorem's own truncation level.
    pub truncation: Option<u32>,
    /// Degree bound for the algebraic nondegeneracy test.
    pub degree_bound: u32,
    /// Exponent cap for certificate searches (default `(N+1)n + 1`).
    pub m_max: Option<u32>,
    /// Multiplies the left-hand side; values other than 1 force violations.
    pub lhs_scale: f64,
    /// Fraction of grid points allowed to violate an inequality.
    pub exceptional_fraction: f64,
    /// Seed of the randomized common-zero search.
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            truncation: None,
            degree_bound: crate::curves::DEFAULT_DEGREE_BOUND,
            m_max: None,
            lhs_scale: 1.0,
            exceptional_fraction: 0.05,
            seed: crate::projective::SEARCH_SEED,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisStatus {
    Checked,
    Assumed,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub status: HypothesisStatus,
    pub detail: String,
}

/// Ordered hypothesis checklist.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Checklist(pub IndexMap<String, Hypothesis>);

impl Checklist {
    pub fn record(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let status = if ok {
            HypothesisStatus::Checked
        } else {
            HypothesisStatus::Violated
        };
        self.0.insert(
            name.to_string(),
            Hypothesis {
                status,
                detail: detail.into(),
            },
        );
    }

    pub fn assume(&mut self, name: &str, detail: impl Into<String>) {
        self.0.insert(
            name.to_string(),
            Hypothesis {
                status: HypothesisStatus::Assumed,
                detail: detail.into(),
            },
        );
    }

    /// First violated entry.
    pub fn first_violation(&self) -> Option<&str> {
        self.0
            .iter()
            .find(|(_, h)| h.status == HypothesisStatus::Violated)
            .map(|(k, _)| k.as_str())
    }

    pub fn extend(&mut self, prefix: &str, other: Checklist) {
        for (k, v) in other.0 {
            self.0.insert(format!("{prefix}{k}"), v);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    VerifiedOnGrid,
    ViolatedAtR { r: f64 },
    HypothesisUnmet { item: String },
    DegeneracyImplied,
    DegeneracyNotImplied,
    ThresholdDependent,
    UniquenessImplied,
    SharedSetFails { z0: C64 },
    /// A definite negative answer that has no radius (a located common zero).
    Refuted { witness: String },
}

impl Verdict {
    /// Process exit status: 0 for a positive verdict, 1 for a violation,
    /// 2 when the theorem does not apply.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::VerifiedOnGrid | Verdict::DegeneracyImplied | Verdict::UniquenessImplied => 0,
            Verdict::ViolatedAtR { .. } | Verdict::Refuted { .. } => 1,
            Verdict::HypothesisUnmet { .. }
            | Verdict::DegeneracyNotImplied
            | Verdict::ThresholdDependent
            | Verdict::SharedSetFails { .. } => 2,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Verdict::VerifiedOnGrid => "verified-on-grid".into(),
            Verdict::ViolatedAtR { r } => format!("violated-at-r (r = {r})"),
            Verdict::HypothesisUnmet { item } => format!("hypothesis-unmet ({item})"),
            Verdict::DegeneracyImplied => "degeneracy-implied".into(),
            Verdict::DegeneracyNotImplied => "degeneracy-not-implied".into(),
            Verdict::ThresholdDependent => "threshold-dependent".into(),
            Verdict::UniquenessImplied => "uniqueness-implied".into(),
            Verdict::SharedSetFails { z0 } => {
                format!("shared-set hypothesis fails at z0 = {}", crate::format_complex(*z0))
            }
            Verdict::Refuted { witness } => format!("refuted ({witness})"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Margins {
    /// `min_r (RHS − LHS)`.
    pub min_slack: Option<f64>,
    /// Fitted `O(1)` constant (median residual, or the slack constant `C`).
    pub fitted_constant: Option<f64>,
    /// Largest deviation of a residual from its fitted constant.
    pub residual_spread: Option<f64>,
    pub epsilon: Option<f64>,
    /// Radii excused as the exceptional set.
    pub exceptional_radii: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub theorem: String,
    pub hypotheses: Checklist,
    pub radii: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margins: Margins,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    /// Extra grid-aligned columns for the profile table.
    pub columns: IndexMap<String, Vec<f64>>,
    /// Structured extras (thresholds, certificates, witnesses).
    pub details: IndexMap<String, Value>,
    pub perturbations: Vec<Perturbation>,
}

impl TheoremReport {
    pub fn new(theorem: &str, grid: Option<&RGrid>) -> Self {
        Self {
            theorem: theorem.to_string(),
            hypotheses: Checklist::default(),
            radii: grid.map(|g| g.radii().to_vec()).unwrap_or_default(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            margins: Margins::default(),
            verdict: Verdict::VerifiedOnGrid,
            notes: Vec::new(),
            columns: IndexMap::new(),
            details: IndexMap::new(),
            perturbations: Vec::new(),
        }
    }

    /// Turns the first violated hypothesis into the verdict.
    fn unmet(mut self) -> Self {
        let item = self
            .hypotheses
            .first_violation()
            .unwrap_or("hypothesis")
            .to_string();
        self.verdict = Verdict::HypothesisUnmet { item };
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": 1,
            "theorem": self.theorem,
            "verdict": self.verdict,
            "verdict_label": self.verdict.label(),
            "exit_code": self.exit_code(),
            "hypotheses": self.hypotheses,
            "margins": self.margins,
            "notes": self.notes,
            "details": self.details,
            "perturbations": self.perturbations,
            "radii": self.radii,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "columns": self.columns,
        })
    }

    /// Header row `r,LHS,RHS,<columns>`; empty when the report has no grid.
    pub fn to_csv(&self) -> String {
        let mut cols: Vec<(&str, &[f64])> = Vec::new();
        if !self.lhs.is_empty() {
            cols.push(("LHS", &self.lhs));
            cols.push(("RHS", &self.rhs));
        }
        for (k, v) in &self.columns {
            cols.push((k, v));
        }
        let mut out = String::from("r");
        for (k, _) in &cols {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for (i, r) in self.radii.iter().enumerate() {
            let _ = write!(out, "{r:.16e}");
            for (_, v) in &cols {
                let _ = write!(out, ",{:.16e}", v[i]);
            }
            out.push('\n');
        }
        out
    }

    /// Key-value lines followed by the profile as a CSV block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theorem: {}", self.theorem);
        let _ = writeln!(out, "verdict: {}", self.verdict.label());
        let _ = writeln!(out, "exit_code: {}", self.exit_code());
        for (k, h) in &self.hypotheses.0 {
            let status = match h.status {
                HypothesisStatus::Checked => "checked",
                HypothesisStatus::Assumed => "assumed",
                HypothesisStatus::Violated => "violated",
            };
            let _ = writeln!(out, "hypothesis[{k}]: {status}; {}", h.detail);
        }
        let m = &self.margins;
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.16e}"));
        let _ = writeln!(out, "margin.min_slack: {}", opt(m.min_slack));
        let _ = writeln!(out, "margin.fitted_constant: {}", opt(m.fitted_constant));
        let _ = writeln!(out, "margin.residual_spread: {}", opt(m.residual_spread));
        let _ = writeln!(out, "margin.epsilon: {}", opt(m.epsilon));
        let exc: Vec<String> = m.exceptional_radii.iter().map(|r| format!("{r:.16e}")).collect();
        let _ = writeln!(out, "margin.exceptional_radii: [{}]", exc.join(", "));
        for (k, v) in &self.details {
            let _ = writeln!(out, "detail[{k}]: {v}");
        }
        for p in &self.perturbations {
            let _ = writeln!(
                out,
                "perturbation[{}]: r = {:.16e} -> {:.16e}",
                p.hypersurface, p.requested, p.used
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        if !self.radii.is_empty() {
            out.push_str("\n[profile]\n");
            out.push_str(&self.to_csv());
        }
        out
    }
}

/// Median of a nonempty slice.
fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Verdict for a residual that should be constant on the tail `r ≥ 5`.
fn flatness(radii: &[f64], residual: &[f64]) -> (Margins, Verdict) {
    let mut tail: Vec<usize> = (0..radii.len()).filter(|&i| radii[i] >= TAIL_START).collect();
    if tail.is_empty() {
        tail = (0..radii.len()).collect();
    }
    let vals: Vec<f64> = tail.iter().map(|&i| residual[i]).collect();
    let c = median(&vals);
    let (worst_i, spread) = tail
        .iter()
        .map(|&i| (i, (residual[i] - c).abs()))
        .fold((tail[0], 0.0), |best, x| if x.1 > best.1 { x } else { best });
    let margins = Margins {
        min_slack: None,
        fitted_constant: Some(c),
        residual_spread: Some(spread),
        epsilon: None,
        exceptional_radii: Vec::new(),
    };
    let verdict = if spread <= SPREAD_TOL && spread.is_finite() {
        Verdict::VerifiedOnGrid
    } else {
        Verdict::ViolatedAtR { r: radii[worst_i] }
    };
    (margins, verdict)
}

/// Verdict for `LHS ≤ RHS + ε·T + C`, `C` fitted as the largest excess over
/// `εT` at radii `≤ 5`, with a fraction of grid points excused.
fn slack_verdict(
    radii: &[f64],
    lhs: &[f64],
    rhs: &[f64],
    t: &[f64],
    opts: &CheckOptions,
) -> (Margins, Verdict) {
    let eps = opts.epsilon;
    let c = (0..radii.len())
        .filter(|&i| radii[i] <= TAIL_START)
        .map(|i| lhs[i] - rhs[i] - eps * t[i])
        .fold(0.0, f64::max);
    let violations: Vec<usize> = (0..radii.len())
        .filter(|&i| {
            let slack = rhs[i] - lhs[i];
            !(slack >= -(eps * t[i] + c) - 1e-9 * (1.0 + lhs[i].abs()))
        })
        .collect();
    let allowed = (opts.exceptional_fraction * radii.len() as f64).floor() as usize;
    let min_slack = (0..radii.len())
        .map(|i| rhs[i] - lhs[i])
        .fold(f64::INFINITY, f64::min);
    let mut margins = Margins {
        min_slack: min_slack.is_finite().then_some(min_slack),
        fitted_constant: Some(c),
        residual_spread: None,
        epsilon: Some(eps),
        exceptional_radii: Vec::new(),
    };
    let verdict = if violations.len() <= allowed {
        margins.exceptional_radii = violations.iter().map(|&i| radii[i]).collect();
        Verdict::VerifiedOnGrid
    } else {
        Verdict::ViolatedAtR {
            r: radii[violations[0]],
        }
    };
    (margins, verdict)
}

fn composites(
    f: &HolomorphicCurve,
    ds: &[Hypersurface],
    grid: &RGrid,
) -> Result<Vec<Composite>, (String, String)> {
    ds.iter()
        .map(|d| Composite::new(f, d, grid.r_max()).map_err(|e| (d.label.clone(), e.to_string())))
        .collect()
}

/// First main theorem: `d·T_f − m_f − N_f` is constant in `r`.
pub fn check_fmt(
    f: &HolomorphicCurve,
    d: &Hypersurface,
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let mut rep = TheoremReport::new("fmt", Some(grid));
    if d.form().num_vars() != f.components().len() {
        rep.hypotheses.record("dimension", false, "form and curve dimensions differ");
        return rep.unmet();
    }
    let comp = match Composite::new(f, d, grid.r_max()) {
        Ok(c) => c,
        Err(e) => {
            rep.hypotheses.record("f(C) not in D", false, e.to_string());
            return rep.unmet();
        }
    };
    rep.hypotheses
        .record("f(C) not in D", true, format!("{}∘f is not identically zero", d.label));
    let t = characteristic(f, grid);
    let mut m = Vec::with_capacity(grid.len());
    for (&r, &tr) in grid.radii().iter().zip(&t) {
        match comp.proximity(tr, r) {
            Ok(v) => m.push(v),
            Err(e) => {
                rep.hypotheses.record("quadrature", false, e.to_string());
                return rep.unmet();
            }
        }
    }
    let n: Vec<f64> = grid.radii().iter().map(|&r| comp.counting(r, None)).collect();
    let deg = d.degree() as f64;
    rep.lhs = t.iter().map(|v| opts.lhs_scale * deg * v).collect();
    rep.rhs = m.iter().zip(&n).map(|(a, b)| a + b).collect();
    let residual: Vec<f64> = rep.lhs.iter().zip(&rep.rhs).map(|(a, b)| a - b).collect();
    let (margins, verdict) = flatness(grid.radii(), &residual);
    rep.margins = margins;
    rep.verdict = verdict;
    rep.columns.insert("T_f".into(), t);
    rep.columns.insert(format!("m_f({})", d.label), m);
    rep.columns.insert(format!("N_f({})", d.label), n);
    rep.columns.insert("residual".into(), residual);
    rep.perturbations = grid.radii().iter().filter_map(|&r| comp.perturbation(r)).collect();
    rep
}

/// Cartan's second main theorem for hyperplanes with truncation level `N`.
pub fn check_cartan(
    f: &HolomorphicCurve,
    hs: &[Hypersurface],
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let mut rep = TheoremReport::new("cartan", Some(grid));
    let n_dim = f.dimension();
    let q = hs.len();
    let dims_ok = hs.iter().all(|h| h.form().num_vars() == n_dim + 1);
    rep.hypotheses.record("dimension", dims_ok, format!("N = {n_dim}"));
    let linear = hs.iter().all(|h| h.degree() == 1);
    rep.hypotheses.record("hyperplanes", linear, "every form has degree 1");
    if !dims_ok || !linear {
        return rep.unmet();
    }
    if q > n_dim {
        let gp = check_general_position_seeded(hs, n_dim, opts.m_max, opts.seed);
        rep.hypotheses.record("general position", gp.holds(), gp.status.as_str());
    } else {
        rep.hypotheses
            .record("general position", false, format!("needs more than N = {n_dim} hyperplanes"));
    }
    let nondeg = f.is_linearly_nondegenerate();
    rep.hypotheses.record(
        "linearly nondegenerate",
        nondeg,
        if nondeg { "Wronskian is not identically zero" } else { "Wronskian vanishes identically" },
    );
    if rep.hypotheses.first_violation().is_some() {
        return rep.unmet();
    }
    let comps = match composites(f, hs, grid) {
        Ok(c) => c,
        Err((label, e)) => {
            rep.hypotheses.record(&format!("f(C) not in {label}"), false, e);
            return rep.unmet();
        }
    };
    let level = opts.truncation.unwrap_or(n_dim as u32);
    let t = characteristic(f, grid);
    let coeff = q as f64 - n_dim as f64 - 1.0;
    if coeff <= 0.0 {
        rep.notes.push(format!(
            "vacuous: q = {q} <= N + 1 = {} makes the left-hand side nonpositive",
            n_dim + 1
        ));
    }
    rep.lhs = t.iter().map(|v| opts.lhs_scale * coeff * v).collect();
    rep.rhs = vec![0.0; grid.len()];
    for comp in &comps {
        let col: Vec<f64> = grid.radii().iter().map(|&r| comp.counting(r, Some(level))).collect();
        for (acc, v) in rep.rhs.iter_mut().zip(&col) {
            *acc += v;
        }
        rep.columns.insert(format!("N_f^{level}({})", comp.label), col);
        rep.perturbations
            .extend(grid.radii().iter().filter_map(|&r| comp.perturbation(r)));
    }
    let (margins, verdict) = slack_verdict(grid.radii(), &rep.lhs, &rep.rhs, &t, opts);
    rep.margins = margins;
    rep.verdict = verdict;
    rep.columns.shift_insert(0, "T_f".into(), t);
    rep.details.insert("truncation".into(), json!(level));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exp_poly::ExpPoly;
    use crate::poly::UnivariatePoly;
    use crate::projective::HomogeneousPolynomial;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn curve(fs: Vec<ExpPoly>) -> HolomorphicCurve {
        HolomorphicCurve::new("f", fs).unwrap()
    }

    fn hyper(label: &str, q: HomogeneousPolynomial) -> Hypersurface {
        Hypersurface::new(label, q).unwrap()
    }

    fn grid() -> RGrid {
        RGrid::geometric(2.0, 50.0, 12).unwrap()
    }

    #[test]
    fn fmt_examples() {
        let w = |i| HomogeneousPolynomial::variable(2, i);
        let line = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        let sum = hyper("H", HomogeneousPolynomial::coordinate_sum(2));
        let rep = check_fmt(&line, &sum, &grid(), &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid);
        let rep = check_fmt(&line, &hyper("H1", w(1)), &grid(), &CheckOptions::default());
        assert!(rep.margins.residual_spread.unwrap() < 1e-9);
        let e = curve(vec![ExpPoly::one(), ExpPoly::exp(c(1.0))]);
        let rep = check_fmt(&e, &hyper("H1", w(1)), &grid(), &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid);
    }

    #[test]
    fn fmt_rejects_contained_curve() {
        let z2 = ExpPoly::polynomial(UnivariatePoly::from_real(&[0.0, 0.0, 1.0]));
        let conic_curve = curve(vec![ExpPoly::one(), ExpPoly::z(), z2]);
        let v = |i| HomogeneousPolynomial::variable(3, i);
        let conic = v(0)
            .mul(&v(2))
            .unwrap()
            .add(&v(1).power(2).unwrap().scale(c(-1.0)))
            .unwrap();
        let rep = check_fmt(&conic_curve, &hyper("C", conic), &grid(), &CheckOptions::default());
        assert_eq!(rep.exit_code(), 2);
    }

    #[test]
    fn cartan_examples() {
        let v = |i| HomogeneousPolynomial::variable(3, i);
        let hs = [
            hyper("H0", v(0)),
            hyper("H1", v(1)),
            hyper("H2", v(2)),
            hyper("H3", HomogeneousPolynomial::coordinate_sum(3)),
        ];
        let z2 = ExpPoly::polynomial(UnivariatePoly::from_real(&[0.0, 0.0, 1.0]));
        let f = curve(vec![ExpPoly::one(), ExpPoly::z(), z2]);
        let rep = check_cartan(&f, &hs, &grid(), &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid, "{}", rep.to_text());
        let deg = curve(vec![ExpPoly::one(), ExpPoly::z(), ExpPoly::z().scale(c(2.0))]);
        let rep = check_cartan(&deg, &hs, &grid(), &CheckOptions::default());
        assert_eq!(
            rep.verdict,
            Verdict::HypothesisUnmet {
                item: "linearly nondegenerate".into()
            }
        );
        let w = |i| HomogeneousPolynomial::variable(2, i);
        let line = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        let hs2 = [
            hyper("H0", w(0)),
            hyper("H1", w(1)),
            hyper("H2", HomogeneousPolynomial::coordinate_sum(2)),
        ];
        let rep = check_cartan(&line, &hs2, &grid(), &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid);
    }

    #[test]
    fn forced_violation() {
        let w = |i| HomogeneousPolynomial::variable(2, i);
        let line = curve(vec![ExpPoly::one(), ExpPoly::z()]);
        let hs = [
            hyper("H0", w(0)),
            hyper("H1", w(1)),
            hyper("H2", HomogeneousPolynomial::coordinate_sum(2)),
        ];
        let opts = CheckOptions {
            lhs_scale: 4.0,
            ..CheckOptions::default()
        };
        let rep = check_cartan(&line, &hs, &grid(), &opts);
        assert!(matches!(rep.verdict, Verdict::ViolatedAtR { .. }), "{}", rep.to_text());
        assert_eq!(rep.exit_code(), 1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Verdict::VerifiedOnGrid.exit_code(), 0);
        assert_eq!(Verdict::ViolatedAtR { r: 1.0 }.exit_code(), 1);
        assert_eq!(Verdict::HypothesisUnmet { item: "x".into() }.exit_code(), 2);
        assert_eq!(Verdict::SharedSetFails { z0: c(0.0) }.exit_code(), 2);
    }
}
