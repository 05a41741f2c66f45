use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::scenario::{CheckSpec, GridSpec, Scenario, Theorem};
use crate::nevanlinna::{NevanlinnaProfile, RGrid};
use crate::projective::{build_sum_hypersurface, normalize_degrees, HomogeneousPolynomial};
use crate::theorems::{
    certificate_report, check_cartan, check_fmt, check_main_smt, counting_transfer_for,
    degeneracy_report, general_position_report, run_uniqueness_experiment, tf_transfer_for,
    CheckOptions, MultiplicityProfile, TheoremReport, Verdict,
};

/// Command-line settings that take precedence over the scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub grid: Option<GridSpec>,
    pub epsilon: Option<f64>,
    pub truncation: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunError {
    pub path: PathBuf,
    pub source: io::Error,
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.source)
    }
}

impl std::error::Error for RunError {}

/// One executed check and the directory name its artifacts use.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub report: TheoremReport,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub outcomes: Vec<CheckOutcome>,
    pub seed: Option<u64>,
}

impl RunSummary {
    /// 1 if any check is violated, else 2 if any does not apply, else 0.
    pub fn exit_code(&self) -> i32 {
        combine_exit_codes(self.outcomes.iter().map(|o| o.report.exit_code()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": 1,
            "seed": self.seed,
            "exit_code": self.exit_code(),
            "checks": self.outcomes.iter().map(|o| json!({
                "name": o.name,
                "theorem": o.report.theorem,
                "verdict": o.report.verdict,
                "verdict_label": o.report.verdict.label(),
                "exit_code": o.report.exit_code(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            out.push_str(&format!("{:<28} {}\n", o.name, o.report.verdict.label()));
        }
        out.push_str(&format!("exit_code: {}\n", self.exit_code()));
        out
    }
}

pub fn combine_exit_codes(codes: impl IntoIterator<Item = i32>) -> i32 {
    let codes: Vec<i32> = codes.into_iter().collect();
    if codes.contains(&1) {
        1
    } else if codes.contains(&2) {
        2
    } else {
        0
    }
}

/// The grid after command-line overrides.
pub fn effective_grid(sc: &Scenario, ov: &Overrides) -> Result<RGrid, String> {
    match ov.grid {
        Some(g) => g.build(),
        None => Ok(sc.grid.clone()),
    }
}

pub fn check_options(sc: &Scenario, spec: &CheckSpec, ov: &Overrides) -> CheckOptions {
    let d = CheckOptions::default();
    let o = &spec.options;
    CheckOptions {
        epsilon: ov.epsilon.or(o.epsilon).unwrap_or(d.epsilon),
        truncation: ov.truncation.or(o.truncation),
        degree_bound: o.degree_bound.unwrap_or(d.degree_bound),
        m_max: o.m_max,
        lhs_scale: o.lhs_scale.unwrap_or(d.lhs_scale),
        exceptional_fraction: d.exceptional_fraction,
        seed: ov.seed.or(sc.seed).unwrap_or(d.seed),
    }
}

fn unmet(theorem: &str, grid: Option<&RGrid>, item: &str, detail: String) -> TheoremReport {
    let mut rep = TheoremReport::new(theorem, grid);
    rep.hypotheses.record(item, false, detail);
    rep.verdict = Verdict::HypothesisUnmet { item: item.into() };
    rep
}

/// Runs one check of a scenario.
pub fn execute_check(sc: &Scenario, spec: &CheckSpec, grid: &RGrid, ov: &Overrides) -> TheoremReport {
    let opts = check_options(sc, spec, ov);
    let first_curve = sc.curves.values().next().map(|e| &e.curve);
    let f = spec.curve.as_deref().and_then(|l| sc.curve(l)).or(first_curve);
    let ds = sc.selected_hypersurfaces(&spec.hypersurfaces);
    let n_dim = sc.dimension;
    let tag = spec.theorem.tag();
    match spec.theorem {
        Theorem::Fmt => check_fmt(f.expect("validated"), &ds[0], grid, &opts),
        Theorem::Cartan => check_cartan(f.expect("validated"), &ds, grid, &opts),
        Theorem::MainSmt => check_main_smt(f.expect("validated"), &ds, grid, &opts),
        Theorem::TfTransfer => tf_transfer_for(f.expect("validated"), &ds, grid, &opts),
        Theorem::CountingTransfer => counting_transfer_for(f.expect("validated"), &ds, grid, &opts),
        Theorem::Uniqueness => {
            let f = f.expect("validated");
            let g = spec
                .other_curve
                .as_deref()
                .and_then(|l| sc.curve(l))
                .or_else(|| sc.curves.values().map(|e| &e.curve).find(|c| c.label != f.label))
                .expect("validated");
            run_uniqueness_experiment(f, g, &ds, grid, &opts)
        }
        Theorem::Degeneracy => match &spec.multiplicities {
            Some(ls) => {
                let q = ls.len().saturating_sub(1);
                degeneracy_report(&MultiplicityProfile::new(ls.clone()), q)
            }
            None => {
                let f = f.expect("validated");
                let forms: Vec<HomogeneousPolynomial> = ds.iter().map(|d| d.form().clone()).collect();
                let sum = normalize_degrees(&forms)
                    .map_err(|e| e.to_string())
                    .and_then(|(_, _, p)| {
                        build_sum_hypersurface(&p, format!("D{}", ds.len() + 1)).map_err(|e| e.to_string())
                    });
                let sum = match sum {
                    Ok(s) => s,
                    Err(e) => return unmet(tag, None, "sum form nonzero", e),
                };
                let mut all = ds.clone();
                all.push(sum);
                match MultiplicityProfile::measure(f, &all, grid.r_max()) {
                    Ok(p) => {
                        let mut rep = degeneracy_report(&p, ds.len());
                        rep.notes.push(format!(
                            "multiplicities measured on |z| <= {}; a zero-free composite counts as infinite",
                            grid.r_max()
                        ));
                        rep
                    }
                    Err(e) => unmet(tag, None, "multiplicities", e.to_string()),
                }
            }
        },
        Theorem::GeneralPosition => general_position_report(&ds, n_dim, &opts),
        Theorem::Certificate => {
            let subset: Vec<_> = if spec.hypersurfaces.is_empty() {
                ds.into_iter().take(n_dim + 1).collect()
            } else {
                ds
            };
            let curve = spec.curve.as_deref().and_then(|l| sc.curve(l));
            certificate_report(&subset, curve, grid, &opts)
        }
        Theorem::Profile => {
            let f = f.expect("validated");
            let mut rep = TheoremReport::new(tag, Some(grid));
            let usable: Vec<_> = ds
                .into_iter()
                .filter(|d| d.form().num_vars() == f.components().len())
                .filter(|d| {
                    crate::projective::compose(d.form(), f).is_ok_and(|g| !g.is_identically_zero())
                })
                .collect();
            match NevanlinnaProfile::compute(f, &usable, grid, opts.truncation) {
                Ok(p) => {
                    rep.columns = p.columns;
                    rep.perturbations = p.perturbations;
                    rep.hypotheses
                        .assume("profile", format!("curve {} with {} hypersurfaces", f.label, usable.len()));
                    rep
                }
                Err(e) => unmet(tag, Some(grid), "quadrature", e.to_string()),
            }
        }
    }
}

/// Executes checks in parallel, keeping scenario order.
pub fn execute(sc: &Scenario, checks: &[CheckSpec], ov: &Overrides) -> Result<RunSummary, String> {
    let grid = effective_grid(sc, ov)?;
    let reports: Vec<TheoremReport> = checks
        .par_iter()
        .map(|c| execute_check(sc, c, &grid, ov))
        .collect();
    let outcomes = checks
        .iter()
        .zip(reports)
        .enumerate()
        .map(|(i, (c, report))| CheckOutcome {
            name: format!("{:02}-{}", i + 1, c.theorem.tag()),
            report,
        })
        .collect();
    Ok(RunSummary {
        outcomes,
        seed: ov.seed.or(sc.seed),
    })
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let err = |source| RunError {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(err)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|source| RunError {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(err)
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// `out/NN-tag/{report.json, report.txt, profile.csv}` plus `out/summary.json`.
pub fn write_artifacts(summary: &RunSummary, out: &Path) -> Result<(), RunError> {
    for o in &summary.outcomes {
        let dir = out.join(&o.name);
        write_atomic(&dir.join("report.json"), &pretty(&o.report.to_json()))?;
        write_atomic(&dir.join("report.txt"), o.report.to_text().as_bytes())?;
        write_atomic(&dir.join("profile.csv"), o.report.to_csv().as_bytes())?;
    }
    write_atomic(&out.join("summary.json"), &pretty(&summary.to_json()))
}

/// Runs every check of the scenario and writes the artifacts.
pub fn run(sc: &Scenario, out: &Path, ov: &Overrides) -> Result<RunSummary, Box<dyn std::error::Error>> {
    let summary = execute(sc, &sc.checks, ov)?;
    write_artifacts(&summary, out)?;
    Ok(summary)
}
