use serde_json::json;

use super::{flatness, slack_verdict, Checklist, CheckOptions, TheoremReport, Verdict};
use crate::curves::{build_derived_curve, HolomorphicCurve};
use crate::nevanlinna::{characteristic, Composite, RGrid};
use crate::projective::{
    build_sum_hypersurface, check_general_position_seeded, normalize_degrees, HomogeneousPolynomial,
    Hypersurface,
};

/// The objects built while checking the hypotheses of the hypersurface
/// second main theorem.
#[derive(Clone, Debug)]
pub struct SmtSetup {
    /// `n = lcm(d_j)`.
    pub n: u32,
    /// `n / d_j`.
    pub exponents: Vec<u32>,
    /// `Q_j^{n/d_j}`.
    pub normalized: Vec<HomogeneousPolynomial>,
    /// `D_{q+1} = {Σ_j Q_j^{n/d_j} = 0}`.
    pub sum: Hypersurface,
    /// `F = (Q_1^{n/d_1}∘f : … : Q_q^{n/d_q}∘f)`.
    pub derived: HolomorphicCurve,
}

/// Checks every hypothesis and builds `D_{q+1}` and `F` when they hold.
///
/// `working_radius` bounds the disk on which the reducedness of `F` is
/// spot-checked.
pub fn smt_setup(
    f: &HolomorphicCurve,
    ds: &[Hypersurface],
    opts: &CheckOptions,
    working_radius: f64,
) -> (Checklist, Option<SmtSetup>) {
    let mut h = Checklist::default();
    let n_dim = f.dimension();
    let q = ds.len();
    let dims_ok = ds.iter().all(|d| d.form().num_vars() == n_dim + 1);
    h.record("dimension", dims_ok, format!("N = {n_dim}"));
    h.record("q > N", q > n_dim, format!("q = {q}"));
    if !dims_ok || q == 0 {
        return (h, None);
    }
    let forms: Vec<HomogeneousPolynomial> = ds.iter().map(|d| d.form().clone()).collect();
    let (n, exponents, normalized) = match normalize_degrees(&forms) {
        Ok(v) => v,
        Err(e) => {
            h.record("degrees", false, e.to_string());
            return (h, None);
        }
    };
    h.record("n > 1", n > 1, format!("n = lcm(d_j) = {n}"));
    if q > n_dim {
        let gp = check_general_position_seeded(ds, n_dim, opts.m_max, opts.seed);
        h.record("general position", gp.holds(), gp.status.as_str());
    }
    let sum = build_sum_hypersurface(&normalized, format!("D{}", q + 1));
    h.record(
        "sum form nonzero",
        sum.is_ok(),
        match &sum {
            Ok(s) => format!("{} = {}", s.label, s.form()),
            Err(_) => "the powered forms cancel".to_string(),
        },
    );
    let bound = opts.degree_bound;
    match f.algebraic_relation(bound) {
        None => h.record(
            "algebraically nondegenerate",
            true,
            format!("no relation up to degree {bound}; assumed beyond"),
        ),
        Some(rel) => h.record(
            "algebraically nondegenerate",
            false,
            format!("relation {rel} vanishes on f"),
        ),
    }
    if h.first_violation().is_some() {
        return (h, None);
    }
    let sum = sum.expect("checked above");
    let derived = match build_derived_curve(f, &normalized, working_radius) {
        Ok(d) => d,
        Err(e) => {
            h.record("derived curve reduced", false, e.to_string());
            return (h, None);
        }
    };
    h.record(
        "derived curve reduced",
        true,
        format!("no common zero in |z| <= {working_radius}"),
    );
    let lin = derived.is_linearly_nondegenerate();
    h.record(
        "derived curve linearly nondegenerate",
        lin,
        if lin { "Wronskian of F is not identically zero" } else { "Wronskian of F vanishes" },
    );
    if !lin {
        return (h, None);
    }
    (
        h,
        Some(SmtSetup {
            n,
            exponents,
            normalized,
            sum,
            derived,
        }),
    )
}

/// `T_f ≤ Σ (1/d_j) N^{q−1}(D_j) + (1/n) N^{q−1}(D_{q+1}) + o(T_f)`.
pub fn check_main_smt(
    f: &HolomorphicCurve,
    ds: &[Hypersurface],
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let mut rep = TheoremReport::new("main-smt", Some(grid));
    let (h, setup) = smt_setup(f, ds, opts, grid.r_max());
    rep.hypotheses = h;
    let Some(setup) = setup else {
        return rep.unmet();
    };
    let q = ds.len();
    let level = opts.truncation.unwrap_or(q as u32 - 1);
    if q == f.dimension() + 1 {
        rep.notes
            .push(format!("q = N + 1: the truncation level q - 1 equals N = {}", f.dimension()));
    }
    let t = characteristic(f, grid);
    rep.lhs = t.iter().map(|v| opts.lhs_scale * v).collect();
    rep.rhs = vec![0.0; grid.len()];
    let mut weighted: Vec<(&Hypersurface, f64)> =
        ds.iter().map(|d| (d, 1.0 / d.degree() as f64)).collect();
    weighted.push((&setup.sum, 1.0 / setup.n as f64));
    for (d, w) in weighted {
        let comp = match Composite::new(f, d, grid.r_max()) {
            Ok(c) => c,
            Err(e) => {
                rep.hypotheses.record(&format!("f(C) not in {}", d.label), false, e.to_string());
                return rep.unmet();
            }
        };
        let col: Vec<f64> = grid.radii().iter().map(|&r| comp.counting(r, Some(level))).collect();
        for (acc, v) in rep.rhs.iter_mut().zip(&col) {
            *acc += w * v;
        }
        rep.columns.insert(format!("N_f^{level}({})", d.label), col);
        rep.perturbations
            .extend(grid.radii().iter().filter_map(|&r| comp.perturbation(r)));
    }
    let (margins, verdict) = slack_verdict(grid.radii(), &rep.lhs, &rep.rhs, &t, opts);
    rep.margins = margins;
    rep.verdict = verdict;
    let last = grid.len() - 1;
    if rep.lhs[last] > 0.0 {
        rep.details
            .insert("rhs_over_lhs_at_r_max".into(), json!(rep.rhs[last] / rep.lhs[last]));
    }
    rep.details.insert("n".into(), json!(setup.n));
    rep.details.insert("truncation".into(), json!(level));
    rep.details.insert(setup.sum.label.clone(), json!(setup.sum.form().to_string()));
    rep.columns.shift_insert(0, "T_f".into(), t);
    rep
}

/// `T_F − n·T_f` is constant in `r`.
pub fn check_tf_transfer(
    f: &HolomorphicCurve,
    big_f: &HolomorphicCurve,
    n: u32,
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let mut rep = TheoremReport::new("tf-transfer", Some(grid));
    rep.hypotheses
        .assume("derived curve", format!("{} built from degree-{n} forms", big_f.label));
    let t_f = characteristic(f, grid);
    let t_big = characteristic(big_f, grid);
    rep.lhs = t_big.iter().map(|v| opts.lhs_scale * v).collect();
    rep.rhs = t_f.iter().map(|v| n as f64 * v).collect();
    let residual: Vec<f64> = rep.lhs.iter().zip(&rep.rhs).map(|(a, b)| a - b).collect();
    let (margins, verdict) = flatness(grid.radii(), &residual);
    rep.margins = margins;
    rep.verdict = verdict;
    rep.details.insert("n".into(), json!(n));
    rep.columns.insert("T_f".into(), t_f);
    rep.columns.insert(format!("T_{}", big_f.label), t_big);
    rep.columns.insert("residual".into(), residual);
    rep
}

/// Builds the setup first and reports an unmet hypothesis when it fails.
pub fn tf_transfer_for(
    f: &HolomorphicCurve,
    ds: &[Hypersurface],
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let (h, setup) = smt_setup(f, ds, opts, grid.r_max());
    match setup {
        Some(s) => {
            let mut rep = check_tf_transfer(f, &s.derived, s.n, grid, opts);
            rep.hypotheses.extend("", h);
            rep
        }
        None => {
            let mut rep = TheoremReport::new("tf-transfer", Some(grid));
            rep.hypotheses = h;
            rep.unmet()
        }
    }
}

/// Agreement allowed between the two counting paths.
const TRANSFER_TOL: f64 = 1e-6;

/// `N_F^M(r, H_i) = N_f^M(r, D_{i+1})` for the coordinate hyperplanes of
/// `ℙ^{q−1}` and the hyperplane `y_0 + … + y_{q−1} = 0`.
///
/// The left side composes the hyperplanes with `F`; the right side composes
/// the powered forms with `f`. The two zero atlases are located separately.
pub fn check_counting_transfer(
    f: &HolomorphicCurve,
    setup: &SmtSetup,
    grid: &RGrid,
    truncation: Option<u32>,
) -> TheoremReport {
    let mut rep = TheoremReport::new("counting-transfer", Some(grid));
    let q = setup.normalized.len();
    let level = truncation.unwrap_or(q as u32 - 1);
    let mut pairs: Vec<(Hypersurface, Hypersurface)> = Vec::with_capacity(q + 1);
    for (i, form) in setup.normalized.iter().enumerate() {
        let h = Hypersurface::new(format!("H{i}"), HomogeneousPolynomial::variable(q, i))
            .expect("nonzero");
        let d = Hypersurface::new(format!("D{}^{}", i + 1, setup.exponents[i]), form.clone())
            .expect("nonzero");
        pairs.push((h, d));
    }
    pairs.push((
        Hypersurface::new(format!("H{q}"), HomogeneousPolynomial::coordinate_sum(q))
            .expect("nonzero"),
        setup.sum.clone(),
    ));
    rep.lhs = vec![0.0; grid.len()];
    rep.rhs = vec![0.0; grid.len()];
    let mut worst = 0.0f64;
    let mut worst_r = None;
    for (h, d) in &pairs {
        let a = Composite::new(&setup.derived, h, grid.r_max());
        let b = Composite::new(f, d, grid.r_max());
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                rep.hypotheses.record(&format!("f(C) not in {}", d.label), false, e.to_string());
                return rep.unmet();
            }
        };
        let ca: Vec<f64> = grid.radii().iter().map(|&r| a.counting(r, Some(level))).collect();
        let cb: Vec<f64> = grid.radii().iter().map(|&r| b.counting(r, Some(level))).collect();
        for (i, &r) in grid.radii().iter().enumerate() {
            rep.lhs[i] += ca[i];
            rep.rhs[i] += cb[i];
            let dev = (ca[i] - cb[i]).abs() / (1.0 + cb[i].abs());
            if dev > worst {
                worst = dev;
                worst_r = Some(r);
            }
        }
        rep.columns.insert(format!("N_F^{level}({})", h.label), ca);
        rep.columns.insert(format!("N_f^{level}({})", d.label), cb);
    }
    rep.hypotheses.assume("main-smt hypotheses", "checked when the setup was built");
    rep.margins.residual_spread = Some(worst);
    rep.verdict = match worst_r {
        Some(r) if worst > TRANSFER_TOL => Verdict::ViolatedAtR { r },
        _ => Verdict::VerifiedOnGrid,
    };
    rep.details.insert("truncation".into(), json!(level));
    rep
}

pub fn counting_transfer_for(
    f: &HolomorphicCurve,
    ds: &[Hypersurface],
    grid: &RGrid,
    opts: &CheckOptions,
) -> TheoremReport {
    let (h, setup) = smt_setup(f, ds, opts, grid.r_max());
    match setup {
        Some(s) => {
            let mut rep = check_counting_transfer(f, &s, grid, opts.truncation);
            rep.hypotheses.extend("", h);
            rep
        }
        None => {
            let mut rep = TheoremReport::new("counting-transfer", Some(grid));
            rep.hypotheses = h;
            rep.unmet()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exp_poly::ExpPoly;
    use num_complex::Complex64 as C64;

    fn w(i: usize) -> HomogeneousPolynomial {
        HomogeneousPolynomial::variable(2, i)
    }

    fn squares() -> Vec<Hypersurface> {
        vec![
            Hypersurface::new("D1", w(0).power(2).unwrap()).unwrap(),
            Hypersurface::new("D2", w(1).power(2).unwrap()).unwrap(),
        ]
    }

    fn exp_curve() -> HolomorphicCurve {
        HolomorphicCurve::new("f", vec![ExpPoly::one(), ExpPoly::exp(C64::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn tight_case() {
        let grid = RGrid::geometric(2.0, 50.0, 16).unwrap();
        let rep = check_main_smt(&exp_curve(), &squares(), &grid, &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid, "{}", rep.to_text());
        let ratio = rep.details["rhs_over_lhs_at_r_max"].as_f64().unwrap();
        assert!((0.95..=1.10).contains(&ratio), "{ratio}");
    }

    #[test]
    fn polynomial_line() {
        let grid = RGrid::geometric(2.0, 50.0, 12).unwrap();
        let f = HolomorphicCurve::new("f", vec![ExpPoly::one(), ExpPoly::z()]).unwrap();
        let rep = check_main_smt(&f, &squares(), &grid, &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid);
        let last = grid.len() - 1;
        let r = grid.r_max();
        assert!((rep.rhs[last] - 1.5 * r.ln()).abs() < 0.05, "{}", rep.rhs[last]);
    }

    #[test]
    fn linear_forms_are_unmet() {
        let grid = RGrid::geometric(2.0, 20.0, 6).unwrap();
        let ds = vec![
            Hypersurface::new("D1", w(0)).unwrap(),
            Hypersurface::new("D2", w(1)).unwrap(),
        ];
        let rep = check_main_smt(&exp_curve(), &ds, &grid, &CheckOptions::default());
        assert_eq!(rep.verdict, Verdict::HypothesisUnmet { item: "n > 1".into() });
        assert_eq!(rep.exit_code(), 2);
    }

    #[test]
    fn transfers() {
        let grid = RGrid::geometric(2.0, 50.0, 12).unwrap();
        let opts = CheckOptions::default();
        let rep = tf_transfer_for(&exp_curve(), &squares(), &grid, &opts);
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid, "{}", rep.to_text());
        let rep = counting_transfer_for(&exp_curve(), &squares(), &grid, &opts);
        assert_eq!(rep.verdict, Verdict::VerifiedOnGrid, "{}", rep.to_text());
        assert!(rep.margins.residual_spread.unwrap() <= 1e-9);
    }
}
