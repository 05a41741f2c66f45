use num_complex::Complex64 as C64;
use serde_json::json;

use super::{slack_verdict, smt::smt_setup, CheckOptions, TheoremReport, Verdict};
use crate::curves::HolomorphicCurve;
use crate::exp_poly::ExpPoly;
use crate::nevanlinna::{characteristic, Composite, RGrid};
use crate::projective::Hypersurface;
use crate::zero_locator::{locate_zeros, zero_order};

/// Tolerance of the normalized cross test `|f̂_α ĝ_β − f̂_β ĝ_α|`.
const CROSS_TOL: f64 = 1e-8;
/// Shared-set points closer than this (relative) are merged.
const MERGE_TOL: f64 = 1e-8;

fn normalized(v: Vec<C64>) -> Vec<C64> {
    let m = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    v.into_iter().map(|c| c / m).collect()
}

/// Largest `|f̂_α ĝ_β − f̂_β ĝ_α|` at `z`, with `f̂ = f/‖f‖`.
fn cross_defect(f: &HolomorphicCurve, g: &HolomorphicCurve, z: C64) -> f64 {
    let a = normalized(f.evaluate(z));
    let b = normalized(g.evaluate(z));
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            worst = worst.max((a[i] * b[j] - a[j] * b[i]).norm());
        }
    }
    worst
}

/// Uniqueness for curves agreeing on the preimages of `q + 1` hypersurfaces.
///
/// The steps run in a fixed order: the second-main-theorem hypotheses for
/// both curves, then the shared-set condition on `|z| ≤ r_max`, then the
/// degree condition `n > 2(q² − 1)`. When `f_α g_β ≡ f_β g_α` for every pair
/// the conclusion holds outright; otherwise the inequality
/// `n·T_f ≤ (q² − 1)(T_f + T_g)` from the argument is tested on the grid.
pub fn run_uniqueness_experiment(
    f: &HolomorphicCurve,
    g: &HolomorphicCurve,
    ds: &[Hypersurface],
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let mut rep = TheoremReport::new("uniqueness", Some(grid));
    let r_max = grid.r_max();
    let same_dim = f.dimension() == g.dimension();
    rep.hypotheses
        .record("same dimension", same_dim, format!("N_f = {}, N_g = {}", f.dimension(), g.dimension()));
    if !same_dim {
        return rep.unmet();
    }
    let (hf, setup_f) = smt_setup(f, ds, opts, r_max);
    let (hg, setup_g) = smt_setup(g, ds, opts, r_max);
    rep.hypotheses.extend("f: ", hf);
    rep.hypotheses.extend("g: ", hg);
    let (Some(setup), Some(_)) = (setup_f, setup_g) else {
        return rep.unmet();
    };
    let q = ds.len();

    let mut all: Vec<&Hypersurface> = ds.iter().collect();
    all.push(&setup.sum);
    let mut shared: Vec<C64> = Vec::new();
    for d in &all {
        for curve in [f, g] {
            match Composite::new(curve, d, r_max) {
                Ok(c) => shared.extend(
                    c.atlas
                        .zeros
                        .iter()
                        .map(|z| z.location)
                        .filter(|a| a.norm() <= r_max),
                ),
                Err(e) => {
                    rep.hypotheses
                        .record(&format!("{}(C) not in {}", curve.label, d.label), false, e.to_string());
                    return rep.unmet();
                }
            }
        }
    }
    shared.sort_by(zero_order);
    shared.dedup_by(|a, b| (*a - *b).norm() <= MERGE_TOL * (1.0 + b.norm()));
    rep.details.insert("shared_set_size".into(), json!(shared.len()));
    if let Some(&z0) = shared.iter().find(|&&z| cross_defect(f, g, z) > CROSS_TOL) {
        rep.hypotheses.record(
            "f = g on the shared set",
            false,
            format!("fails at z0 = {}", crate::format_complex(z0)),
        );
        rep.details.insert("z0".into(), json!([z0.re, z0.im]));
        rep.verdict = Verdict::SharedSetFails { z0 };
        return rep;
    }
    rep.hypotheses.record(
        "f = g on the shared set",
        true,
        format!("{} points in |z| <= {r_max}", shared.len()),
    );

    let n = setup.n;
    let bound = 2 * (q * q - 1) as u32;
    rep.hypotheses
        .record("n > 2(q^2 - 1)", n > bound, format!("n = {n}, 2(q^2 - 1) = {bound}"));
    if n <= bound {
        return rep.unmet();
    }

    let fs = f.components();
    let gs = g.components();
    let mut cross: Option<(usize, usize, ExpPoly)> = None;
    'outer: for a in 0..fs.len() {
        for b in a + 1..fs.len() {
            let h = &(&fs[a] * &gs[b]) - &(&fs[b] * &gs[a]);
            if !h.is_identically_zero() {
                cross = Some((a, b, h));
                break 'outer;
            }
        }
    }
    let t_f = characteristic(f, grid);
    let t_g = characteristic(g, grid);
    let Some((a, b, h)) = cross else {
        rep.notes
            .push("trivially consistent: every cross term vanishes identically, so f = g".into());
        rep.verdict = Verdict::UniquenessImplied;
        rep.columns.insert("T_f".into(), t_f);
        rep.columns.insert("T_g".into(), t_g);
        return rep;
    };

    // h vanishes on the shared set; its zeros bound the counting functions.
    match locate_zeros(&h, r_max) {
        Ok(z) => {
            let covered = shared
                .iter()
                .filter(|s| z.atlas.zeros.iter().any(|w| (w.location - **s).norm() <= 1e-6))
                .count();
            rep.details.insert("cross_pair".into(), json!([a, b]));
            rep.details.insert("cross_zeros".into(), json!(z.atlas.total_multiplicity()));
            rep.details.insert("shared_points_among_cross_zeros".into(), json!(covered));
        }
        Err(e) => rep.notes.push(format!("cross-term zeros not located: {e}")),
    }
    let k = (q * q - 1) as f64;
    rep.lhs = t_f.iter().map(|v| opts.lhs_scale * n as f64 * v).collect();
    rep.rhs = t_f.iter().zip(&t_g).map(|(x, y)| k * (x + y)).collect();
    let (margins, verdict) = slack_verdict(grid.radii(), &rep.lhs, &rep.rhs, &t_f, opts);
    rep.margins = margins;
    rep.verdict = verdict;
    rep.notes.push(format!(
        "f_{a} g_{b} - f_{b} g_{a} is not identically zero although the shared-set condition holds on the working disk"
    ));
    rep.columns.insert("T_f".into(), t_f);
    rep.columns.insert("T_g".into(), t_g);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::HomogeneousPolynomial;
    use std::f64::consts::FRAC_PI_2;

    fn w(i: usize) -> HomogeneousPolynomial {
        HomogeneousPolynomial::variable(2, i)
    }

    fn powers(k: u32) -> Vec<Hypersurface> {
        vec![
            Hypersurface::new("D1", w(0).power(k).unwrap()).unwrap(),
            Hypersurface::new("D2", w(1).power(k).unwrap()).unwrap(),
        ]
    }

    fn exp_curve(label: &str, s: f64) -> HolomorphicCurve {
        HolomorphicCurve::new(label, vec![ExpPoly::one(), ExpPoly::exp(C64::new(1.0, 0.0)).scale(C64::new(s, 0.0))])
            .unwrap()
    }

    #[test]
    fn identical_curves() {
        let grid = RGrid::geometric(2.0, 20.0, 6).unwrap();
        let f = exp_curve("f", 1.0);
        let rep = run_uniqueness_experiment(&f, &f, &powers(7), &grid, &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::UniquenessImplied, "{}", rep.to_text());
        assert!(rep.notes[0].contains("trivially consistent"));
    }

    #[test]
    fn shared_set_fails() {
        let grid = RGrid::geometric(2.0, 20.0, 6).unwrap();
        let rep = run_uniqueness_experiment(
            &exp_curve("f", 1.0),
            &exp_curve("g", -1.0),
            &powers(2),
            &grid,
            &CheckOptions::default(),
        );
        match rep.verdict {
            Verdict::SharedSetFails { z0 } => {
                assert!((z0 - C64::new(0.0, FRAC_PI_2)).norm() < 1e-6, "{z0}")
            }
            ref v => panic!("{v:?}"),
        }
        assert_eq!(rep.exit_code(), 2);
    }

    #[test]
    fn degree_condition() {
        let grid = RGrid::geometric(2.0, 20.0, 6).unwrap();
        let f = exp_curve("f", 1.0);
        let rep = run_uniqueness_experiment(&f, &f, &powers(5), &grid, &CheckOptions::default());
        assert_eq!(
            rep.verdict,
            Verdict::HypothesisUnmet {
                item: "n > 2(q^2 - 1)".into()
            }
        );
    }
}
