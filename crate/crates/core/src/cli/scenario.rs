//! Scenario documents: JSON with curve components and forms written as
//! expression strings.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::expr::{parse_exp_poly, parse_form, ExprError, FormError};
use crate::curves::{reduce_representation, HolomorphicCurve};
use crate::nevanlinna::{RGrid, Spacing};
use crate::projective::Hypersurface;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    ParseError,
    UnresolvedReference,
    NonHomogeneous,
    DimensionMismatch,
    DegreeMismatch,
    InvalidGrid,
    InvalidCurve,
    InvalidCheck,
}

impl DiagnosticCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticCode::ParseError => "PARSE_ERROR",
            DiagnosticCode::UnresolvedReference => "UNRESOLVED_REFERENCE",
            DiagnosticCode::NonHomogeneous => "NON_HOMOGENEOUS",
            DiagnosticCode::DimensionMismatch => "DIMENSION_MISMATCH",
            DiagnosticCode::DegreeMismatch => "DEGREE_MISMATCH",
            DiagnosticCode::InvalidGrid => "INVALID_GRID",
            DiagnosticCode::InvalidCurve => "INVALID_CURVE",
            DiagnosticCode::InvalidCheck => "INVALID_CHECK",
        }
    }
}

/// A scenario error with its location; `line` and `column` are 1-based and
/// zero when unknown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    /// Dotted path of the offending field, e.g. `curves.f[1]`.
    pub path: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code.as_str())?;
        if self.line > 0 {
            write!(f, " at {}:{}", self.line, self.column)?;
        }
        if !self.path.is_empty() {
            write!(f, " ({})", self.path)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Fmt,
    Cartan,
    MainSmt,
    TfTransfer,
    CountingTransfer,
    Degeneracy,
    Uniqueness,
    GeneralPosition,
    Certificate,
    Profile,
}

impl Theorem {
    pub fn tag(&self) -> &'static str {
        match self {
            Theorem::Fmt => "fmt",
            Theorem::Cartan => "cartan",
            Theorem::MainSmt => "main-smt",
            Theorem::TfTransfer => "tf-transfer",
            Theorem::CountingTransfer => "counting-transfer",
            Theorem::Degeneracy => "degeneracy",
            Theorem::Uniqueness => "uniqueness",
            Theorem::GeneralPosition => "general-position",
            Theorem::Certificate => "certificate",
            Theorem::Profile => "profile",
        }
    }

    fn needs_curve(&self) -> bool {
        !matches!(self, Theorem::GeneralPosition | Theorem::Degeneracy | Theorem::Certificate)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptionsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u32>,
    /// Multiplies the left-hand side (forced-violation testing).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs_scale: Option<f64>,
}

impl CheckOptionsSpec {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    /// The second curve of a uniqueness experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other_curve: Option<String>,
    /// Hypersurface labels; empty means all of them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hypersurfaces: Vec<String>,
    /// Explicit multiplicity bounds for the degeneracy criterion; `null` is `∞`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<Option<u32>>>,
    #[serde(default, skip_serializing_if = "CheckOptionsSpec::is_empty")]
    pub options: CheckOptionsSpec,
}

impl CheckSpec {
    pub fn new(theorem: Theorem) -> Self {
        Self {
            theorem,
            curve: None,
            other_curve: None,
            hypersurfaces: Vec::new(),
            multiplicities: None,
            options: CheckOptionsSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn build(&self) -> Result<RGrid, String> {
        RGrid::build(self.r_min, self.r_max, self.points, self.spacing).map_err(|e| e.to_string())
    }

    /// `r_min:r_max:points[:spacing]`.
    pub fn parse_cli(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected r_min:r_max:points[:spacing], got `{s}`"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("invalid radius `{t}`"));
        let spacing = match parts.get(3).map(|t| t.trim()) {
            None | Some("geometric") => Spacing::Geometric,
            Some("linear") => Spacing::Linear,
            Some(other) => return Err(format!("unknown spacing `{other}`")),
        };
        Ok(Self {
            r_min: num(parts[0])?,
            r_max: num(parts[1])?,
            points: parts[2]
                .trim()
                .parse()
                .map_err(|_| format!("invalid point count `{}`", parts[2]))?,
            spacing,
        })
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_min: 2.0,
            r_max: 50.0,
            points: 40,
            spacing: Spacing::Geometric,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHypersurface {
    form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(rename = "N")]
    dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    curves: IndexMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    hypersurfaces: IndexMap<String, RawHypersurface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    checks: Vec<CheckSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveEntry {
    /// Component expressions as written.
    pub source: Vec<String>,
    /// The reduced representation.
    pub curve: HolomorphicCurve,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypersurfaceEntry {
    pub source: String,
    pub declared_degree: Option<u32>,
    pub hypersurface: Hypersurface,
}

/// A fully resolved scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    /// Ambient dimension `N`.
    pub dimension: usize,
    pub seed: Option<u64>,
    pub curves: IndexMap<String, CurveEntry>,
    pub hypersurfaces: IndexMap<String, HypersurfaceEntry>,
    /// The grid as written; `None` selects the default.
    pub grid_spec: Option<GridSpec>,
    pub grid: RGrid,
    pub checks: Vec<CheckSpec>,
}

/// 1-based line and column of byte `offset` in `text`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Locates `"needle"` in the source (the `skip`-th occurrence) and returns
/// the position of `inner` bytes into it.
fn locate(text: &str, needle: &str, skip: usize, inner: usize) -> (usize, usize) {
    let quoted = format!("\"{needle}\"");
    match text.match_indices(&quoted).nth(skip).or_else(|| text.match_indices(&quoted).next()) {
        Some((at, _)) => line_col(text, at + 1 + inner),
        None => (0, 0),
    }
}

struct Resolver<'a> {
    text: &'a str,
}

impl Resolver<'_> {
    fn diag(&self, code: DiagnosticCode, path: String, message: String, at: (usize, usize)) -> Diagnostic {
        Diagnostic {
            code,
            message,
            path,
            line: at.0,
            column: at.1,
        }
    }

    fn expr_diag(&self, path: String, src: &str, e: ExprError) -> Diagnostic {
        let at = locate(self.text, src, 0, e.offset);
        self.diag(DiagnosticCode::ParseError, path, e.message, at)
    }
}

/// Parses and resolves a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, Diagnostic> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| Diagnostic {
        code: DiagnosticCode::ParseError,
        message: e.to_string(),
        path: String::new(),
        line: e.line(),
        column: e.column(),
    })?;
    let res = Resolver { text };
    let n = raw.dimension;
    if n == 0 {
        return Err(res.diag(
            DiagnosticCode::DimensionMismatch,
            "N".into(),
            "N must be at least 1".into(),
            locate(text, "N", 0, 0),
        ));
    }
    let grid_spec = raw.grid;
    let grid = grid_spec
        .unwrap_or_default()
        .build()
        .map_err(|e| res.diag(DiagnosticCode::InvalidGrid, "grid".into(), e, locate(text, "grid", 0, 0)))?;
    let working_radius = 1.1 * grid.r_max() + 1.0;

    let mut curves = IndexMap::new();
    for (label, comps) in &raw.curves {
        let path = format!("curves.{label}");
        if comps.len() != n + 1 {
            return Err(res.diag(
                DiagnosticCode::DimensionMismatch,
                path,
                format!("{} components for N = {n}; expected {}", comps.len(), n + 1),
                locate(text, label, 0, 0),
            ));
        }
        let mut parsed = Vec::with_capacity(comps.len());
        for (i, src) in comps.iter().enumerate() {
            parsed.push(parse_exp_poly(src).map_err(|e| res.expr_diag(format!("{path}[{i}]"), src, e))?);
        }
        let curve = reduce_representation(label.clone(), parsed, working_radius).map_err(|e| {
            res.diag(DiagnosticCode::InvalidCurve, path.clone(), e.to_string(), locate(text, label, 0, 0))
        })?;
        curves.insert(
            label.clone(),
            CurveEntry {
                source: comps.clone(),
                curve,
            },
        );
    }

    let mut hypersurfaces = IndexMap::new();
    for (label, h) in &raw.hypersurfaces {
        let path = format!("hypersurfaces.{label}");
        let at = |inner| locate(text, &h.form, 0, inner);
        let form = parse_form(&h.form, n + 1, None).map_err(|e| match e {
            FormError::Syntax(e) => res.expr_diag(path.clone(), &h.form, e),
            FormError::NonHomogeneous { expected, found } => res.diag(
                DiagnosticCode::NonHomogeneous,
                path.clone(),
                format!("monomials of degrees {expected} and {found}"),
                at(0),
            ),
            FormError::Dimension { max_index, num_vars } => res.diag(
                DiagnosticCode::DimensionMismatch,
                path.clone(),
                format!("variable w{max_index} used with only {num_vars} coordinates"),
                at(0),
            ),
            FormError::Zero => res.diag(
                DiagnosticCode::ParseError,
                path.clone(),
                "the form is identically zero".into(),
                at(0),
            ),
        })?;
        if let Some(d) = h.degree {
            if d != form.degree() {
                return Err(res.diag(
                    DiagnosticCode::DegreeMismatch,
                    path,
                    format!("declared degree {d}, form has degree {}", form.degree()),
                    at(0),
                ));
            }
        }
        let hypersurface = Hypersurface::new(label.clone(), form).expect("nonzero form");
        hypersurfaces.insert(
            label.clone(),
            HypersurfaceEntry {
                source: h.form.clone(),
                declared_degree: h.degree,
                hypersurface,
            },
        );
    }

    for (i, check) in raw.checks.iter().enumerate() {
        let path = format!("checks[{i}]");
        let unresolved = |what: &str, name: &str| {
            res.diag(
                DiagnosticCode::UnresolvedReference,
                path.clone(),
                format!("unknown {what} `{name}`"),
                locate(text, name, 0, 0),
            )
        };
        for name in check.curve.iter().chain(&check.other_curve) {
            if !curves.contains_key(name) {
                return Err(unresolved("curve", name));
            }
        }
        for name in &check.hypersurfaces {
            if !hypersurfaces.contains_key(name) {
                return Err(unresolved("hypersurface", name));
            }
        }
        let invalid = |m: String| res.diag(DiagnosticCode::InvalidCheck, path.clone(), m, (0, 0));
        if check.theorem.needs_curve() && curves.is_empty() {
            return Err(invalid(format!("{} needs a curve", check.theorem.tag())));
        }
        if check.theorem == Theorem::Uniqueness && curves.len() < 2 && check.other_curve.is_none() {
            return Err(invalid("uniqueness needs two curves".into()));
        }
        if check.theorem == Theorem::Fmt && check.hypersurfaces.len() > 1 {
            return Err(invalid("fmt takes a single hypersurface".into()));
        }
        if check.theorem != Theorem::Profile
            && check.theorem != Theorem::Degeneracy
            && hypersurfaces.is_empty()
        {
            return Err(invalid(format!("{} needs hypersurfaces", check.theorem.tag())));
        }
        if check.theorem == Theorem::Degeneracy
            && check.multiplicities.is_none()
            && (curves.is_empty() || hypersurfaces.is_empty())
        {
            return Err(invalid("degeneracy needs multiplicities or a curve with hypersurfaces".into()));
        }
    }

    Ok(Scenario {
        dimension: n,
        seed: raw.seed,
        curves,
        hypersurfaces,
        grid_spec,
        grid,
        checks: raw.checks,
    })
}

impl Scenario {
    fn raw(&self) -> RawScenario {
        RawScenario {
            dimension: self.dimension,
            seed: self.seed,
            curves: self
                .curves
                .iter()
                .map(|(k, v)| (k.clone(), v.source.clone()))
                .collect(),
            hypersurfaces: self
                .hypersurfaces
                .iter()
                .map(|(k, v)| {
                    (
                        k.clone(),
                        RawHypersurface {
                            form: v.source.clone(),
                            degree: v.declared_degree,
                        },
                    )
                })
                .collect(),
            grid: self.grid_spec,
            checks: self.checks.clone(),
        }
    }

    /// Pretty JSON that parses back to an identical scenario.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.raw()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn curve(&self, label: &str) -> Option<&HolomorphicCurve> {
        self.curves.get(label).map(|e| &e.curve)
    }

    pub fn hypersurface(&self, label: &str) -> Option<&Hypersurface> {
        self.hypersurfaces.get(label).map(|e| &e.hypersurface)
    }

    /// The hypersurfaces named by a check, or all of them.
    pub fn selected_hypersurfaces(&self, labels: &[String]) -> Vec<Hypersurface> {
        if labels.is_empty() {
            self.hypersurfaces.values().map(|e| e.hypersurface.clone()).collect()
        } else {
            labels
                .iter()
                .filter_map(|l| self.hypersurface(l).cloned())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIGHT: &str = r#"{
  "N": 1,
  "curves": {"f": ["1", "exp(z)"]},
  "hypersurfaces": {
    "D1": {"form": "w0^2", "degree": 2},
    "D2": {"form": "w1^2", "degree": 2}
  },
  "grid": {"r_min": 2, "r_max": 50, "points": 40, "spacing": "geometric"},
  "checks": [{"theorem": "main-smt", "curve": "f", "hypersurfaces": ["D1", "D2"]}]
}"#;

    #[test]
    fn parses_and_round_trips() {
        let sc = parse_scenario(TIGHT).unwrap();
        assert_eq!(sc.dimension, 1);
        assert_eq!(sc.curve("f").unwrap().components().len(), 2);
        assert_eq!(sc.grid.len(), 40);
        let again = parse_scenario(&sc.to_json()).unwrap();
        assert_eq!(again, sc);
        assert_eq!(again.to_json(), sc.to_json());
    }

    fn code_of(text: &str) -> DiagnosticCode {
        parse_scenario(text).unwrap_err().code
    }

    #[test]
    fn diagnostics() {
        assert_eq!(code_of("{\"N\": 1,"), DiagnosticCode::ParseError);
        let bad = TIGHT.replace("\"w0^2\"", "\"w0 + w1^2\"");
        let d = parse_scenario(&bad).unwrap_err();
        assert_eq!(d.code, DiagnosticCode::NonHomogeneous);
        assert_eq!(d.line, 5);
        assert_eq!(code_of(&TIGHT.replace("\"w1^2\"", "\"w2^2\"")), DiagnosticCode::DimensionMismatch);
        assert_eq!(
            code_of(&TIGHT.replace("\"degree\": 2}", "\"degree\": 3}")),
            DiagnosticCode::DegreeMismatch
        );
        assert_eq!(
            code_of(&TIGHT.replace("[\"D1\", \"D2\"]", "[\"D1\", \"D9\"]")),
            DiagnosticCode::UnresolvedReference
        );
        assert_eq!(code_of(&TIGHT.replace("\"r_min\": 2", "\"r_min\": -1")), DiagnosticCode::InvalidGrid);
        assert_eq!(
            code_of(&TIGHT.replace("[\"1\", \"exp(z)\"]", "[\"1\"]")),
            DiagnosticCode::DimensionMismatch
        );
        let d = parse_scenario(&TIGHT.replace("exp(z)", "exp(z) +* 1")).unwrap_err();
        assert_eq!(d.code, DiagnosticCode::ParseError);
        assert_eq!((d.line, d.column), (3, 34));
        assert_eq!(d.path, "curves.f[1]");
    }

    #[test]
    fn grid_flag() {
        let g = GridSpec::parse_cli("1:10:5:linear").unwrap();
        assert_eq!(g.build().unwrap().radii(), &[1.0, 3.25, 5.5, 7.75, 10.0]);
        assert!(GridSpec::parse_cli("1:10").is_err());
    }
}
