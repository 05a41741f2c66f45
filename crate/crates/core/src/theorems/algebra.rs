use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use super::{CheckOptions, TheoremReport, Verdict};
use crate::curves::HolomorphicCurve;
use crate::format_complex;
use crate::nevanlinna::RGrid;
use crate::projective::{
    certificates_for_subset, check_general_position_seeded, normalize_degrees, verify_norm_bound,
    GeneralPosition, HomogeneousPolynomial, Hypersurface, SubsetStatus,
    CERTIFICATE_TOL,
};

/// Samples on each circle used to spot-check the norm bound.
pub const NORM_SAMPLES: usize = 64;

pub fn format_point(x: &[C64]) -> String {
    let parts: Vec<String> = x.iter().map(|c| format_complex(*c)).collect();
    format!("({})", parts.join(":"))
}

/// General position as a report: one row per `(N+1)`-subset.
pub fn general_position_report(ds: &[Hypersurface], n_dim: usize, opts: &CheckOptions) -> TheoremReport {
    let mut rep = TheoremReport::new("general-position", None);
    let dims_ok = ds.iter().all(|d| d.form().num_vars() == n_dim + 1);
    rep.hypotheses.record("dimension", dims_ok, format!("N = {n_dim}"));
    rep.hypotheses
        .record("at least N + 1 hypersurfaces", ds.len() > n_dim, format!("q = {}", ds.len()));
    if !dims_ok || ds.len() <= n_dim {
        return rep.unmet();
    }
    let gp = check_general_position_seeded(ds, n_dim, opts.m_max, opts.seed);
    let rows: Vec<Value> = gp
        .subsets
        .iter()
        .map(|(idx, status)| {
            let labels: Vec<&str> = idx.iter().map(|&i| ds[i].label.as_str()).collect();
            match status {
                SubsetStatus::Certified(set) => json!({
                    "subset": labels,
                    "status": "certified",
                    "exponents": set.certificates.iter().map(|c| c.exponent).collect::<Vec<_>>(),
                    "c1": set.c1,
                    "max_residual": set.max_residual(),
                }),
                SubsetStatus::CommonZero(z) => json!({
                    "subset": labels,
                    "status": "common-zero",
                    "point": format_point(z),
                }),
                SubsetStatus::Undecided { m_max } => json!({
                    "subset": labels,
                    "status": "undecided",
                    "m_max": m_max,
                }),
            }
        })
        .collect();
    rep.details.insert("status".into(), json!(gp.status.as_str()));
    rep.details.insert("subsets".into(), Value::Array(rows));
    rep.verdict = match gp.status {
        GeneralPosition::Yes => Verdict::VerifiedOnGrid,
        GeneralPosition::No => {
            let (idx, z) = gp.witness().expect("a failing subset");
            let labels: Vec<&str> = idx.iter().map(|&i| ds[i].label.as_str()).collect();
            Verdict::Refuted {
                witness: format!(
                    "{} vanish at {}",
                    labels.join(","),
                    z.map(format_point).unwrap_or_default()
                ),
            }
        }
        GeneralPosition::UndecidedAtBound => Verdict::HypothesisUnmet {
            item: "undecided at the certificate bound".into(),
        },
    };
    rep
}

/// Certificates `x_k^{m_k} = Σ_j b_{kj} Q_j` for one `(N+1)`-subset, with the
/// implied norm bound spot-checked along `f` on the circles of the grid.
pub fn certificate_report(
    ds: &[Hypersurface],
    f: Option<&HolomorphicCurve>,
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let mut rep = TheoremReport::new("certificate", None);
    let nv = ds.first().map_or(0, |d| d.form().num_vars());
    let shape_ok = !ds.is_empty() && ds.len() == nv && ds.iter().all(|d| d.form().num_vars() == nv);
    rep.hypotheses
        .record("subset of N + 1 forms", shape_ok, format!("{} forms in {nv} variables", ds.len()));
    if !shape_ok {
        return rep.unmet();
    }
    let forms: Vec<HomogeneousPolynomial> = ds.iter().map(|d| d.form().clone()).collect();
    let (n, _, normalized) = normalize_degrees(&forms).expect("nonzero forms");
    let set = match certificates_for_subset(&normalized, opts.m_max) {
        Ok(s) => s,
        Err(e) => {
            let gp = crate::projective::subset_status(&forms, opts.m_max, opts.seed);
            if let SubsetStatus::CommonZero(z) = gp {
                rep.verdict = Verdict::Refuted {
                    witness: format!("common zero {}", format_point(&z)),
                };
                rep.hypotheses.record("no common zero", false, format_point(&z));
                return rep;
            }
            rep.hypotheses.record("certificate found", false, e.to_string());
            return rep.unmet();
        }
    };
    let residual = set.max_residual();
    rep.hypotheses.record(
        "certificate found",
        residual <= CERTIFICATE_TOL,
        format!("largest residual {residual:e}"),
    );
    rep.details.insert("degree".into(), json!(n));
    rep.details.insert(
        "subset".into(),
        json!(ds.iter().map(|d| d.label.as_str()).collect::<Vec<_>>()),
    );
    rep.details.insert("certificates".into(), set.to_json());
    let mut worst: Option<(f64, f64)> = None;
    if let Some(f) = f {
        if f.components().len() != nv {
            rep.hypotheses.record("curve dimension", false, "curve and forms differ in dimension");
            return rep.unmet();
        }
        let mut ratios = Vec::with_capacity(grid.len());
        for &r in grid.radii() {
            let samples: Vec<C64> = (0..NORM_SAMPLES)
                .map(|k| C64::from_polar(r, std::f64::consts::TAU * k as f64 / NORM_SAMPLES as f64))
                .collect();
            match verify_norm_bound(&set, &normalized, f, &samples) {
                Ok(v) => {
                    ratios.push(v);
                    if worst.is_none_or(|(w, _)| v > w) {
                        worst = Some((v, r));
                    }
                }
                Err(e) => {
                    rep.hypotheses.record("norm bound", false, e.to_string());
                    return rep.unmet();
                }
            }
        }
        rep.radii = grid.radii().to_vec();
        rep.columns.insert("norm_ratio".into(), ratios);
    }
    rep.verdict = match worst {
        _ if residual > CERTIFICATE_TOL => Verdict::HypothesisUnmet {
            item: "certificate found".into(),
        },
        Some((v, r)) if v > 1.0 + 1e-6 => Verdict::ViolatedAtR { r },
        _ => Verdict::VerifiedOnGrid,
    };
    if let Some((v, _)) = worst {
        rep.details.insert("max_norm_ratio".into(), json!(v));
    }
    rep
}
