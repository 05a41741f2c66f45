//! End-to-end acceptance criteria, one line per criterion.
//!
//! Run with `cargo test --test acceptance`; the process fails if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nevlab::cli::{execute, parse_scenario, write_artifacts, Overrides, Scenario, Theorem};
use nevlab::curves::reduce_representation;
use nevlab::nevanlinna::{characteristic_at, Composite};
use nevlab::projective::{
    certificate_residual, certificates_for_subset, monomials, verify_norm_bound, CERTIFICATE_TOL,
};
use nevlab::theorems::{
    check_cartan, check_fmt, check_main_smt, check_tf_transfer, degeneracy_report,
    evaluate_degeneracy_criterion, run_uniqueness_experiment, smt_setup, check_counting_transfer,
    CheckOptions, MultiplicityProfile, Verdict,
};
use nevlab::zero_locator::{locate_zeros_analytic, locate_zeros_polynomial};
use nevlab::{C64, ExpPoly, HolomorphicCurve, HomogeneousPolynomial, Hypersurface, RGrid, UnivariatePoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str) -> Scenario {
    let text = fs::read_to_string(scenarios_dir().join(name)).expect("scenario file");
    parse_scenario(&text).expect("valid scenario")
}

fn grid() -> RGrid {
    RGrid::geometric(2.0, 50.0, 40).unwrap()
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> UnivariatePoly {
    let d = rng.random_range(0..=max_deg);
    UnivariatePoly::new((0..=d).map(|_| random_c(rng)).collect())
}

fn random_curve(rng: &mut ChaCha8Rng, n: usize, max_deg: usize) -> HolomorphicCurve {
    let comps = (0..=n).map(|_| ExpPoly::polynomial(random_poly(rng, max_deg))).collect();
    reduce_representation("f", comps, 100.0).expect("reducible polynomial curve")
}

fn random_form(rng: &mut ChaCha8Rng, nv: usize, d: u32) -> HomogeneousPolynomial {
    let terms: Vec<(Vec<u32>, C64)> = monomials(nv, d).into_iter().map(|e| (e, random_c(rng))).collect();
    HomogeneousPolynomial::new(nv, d, terms).unwrap()
}

fn exp_curve() -> HolomorphicCurve {
    HolomorphicCurve::new("f", vec![ExpPoly::one(), ExpPoly::exp(c(1.0))]).unwrap()
}

fn var(nv: usize, i: usize) -> HomogeneousPolynomial {
    HomogeneousPolynomial::variable(nv, i)
}

fn squares() -> Vec<Hypersurface> {
    vec![
        Hypersurface::new("D1", var(2, 0).power(2).unwrap()).unwrap(),
        Hypersurface::new("D2", var(2, 1).power(2).unwrap()).unwrap(),
    ]
}

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn jensen_route() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = grid();
    let mut worst = 0.0f64;
    for case in 0..20 {
        let n = rng.random_range(1..=3);
        let f = random_curve(&mut rng, n, 4);
        let d = rng.random_range(1..=3);
        let h = Hypersurface::new("D", random_form(&mut rng, n + 1, d)).unwrap();
        let comp = Composite::new(&f, &h, grid.r_max()).map_err(|e| format!("case {case}: {e}"))?;
        for cap in [None, Some(1), Some(n as u32)] {
            for &r in grid.radii() {
                let r = comp.effective_radius(r);
                let a = nevlab::nevanlinna::counting_from_atlas(&comp.atlas, r, cap);
                let b = nevlab::nevanlinna::counting_integral(&comp.atlas, r, cap);
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
        }
    }
    let t = start.elapsed();
    check(
        worst <= 1e-6 && t < Duration::from_secs(60),
        format!("worst relative gap {worst:.2e}, {t:.2?}"),
        format!("worst relative gap {worst:.2e}, {t:.2?}"),
    )
}

fn backend_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let deg = rng.random_range(1..=6);
        let mut roots: Vec<C64> = Vec::new();
        for _ in 0..deg {
            if !roots.is_empty() && rng.random_bool(0.3) {
                roots.push(roots[0]);
                continue;
            }
            let m = 3.0 * rng.random::<f64>().sqrt();
            roots.push(C64::from_polar(m, rng.random::<f64>() * TAU));
        }
        let p = UnivariatePoly::from_roots(&roots);
        let exact = locate_zeros_polynomial(&p, 3.5).map_err(|e| format!("case {case}: {e}"))?;
        let analytic = locate_zeros_analytic(&ExpPoly::polynomial(p), 3.5)
            .map_err(|e| format!("case {case}: {e}"))?;
        if exact.total_multiplicity() != analytic.total_multiplicity()
            || exact.zeros.len() != analytic.zeros.len()
        {
            return Err(format!("case {case}: multiplicities differ"));
        }
        for (a, b) in exact.zeros.iter().zip(&analytic.zeros) {
            if a.multiplicity != b.multiplicity {
                return Err(format!("case {case}: multiplicity {} vs {}", a.multiplicity, b.multiplicity));
            }
            worst = worst.max((a.location - b.location).norm());
        }
    }
    let t = start.elapsed();
    check(
        worst <= 1e-6 && t < Duration::from_secs(60),
        format!("worst location gap {worst:.2e}, {t:.2?}"),
        format!("worst location gap {worst:.2e}, {t:.2?}"),
    )
}

/// Largest deviation from the median on `r ≥ 5`.
fn tail_spread(radii: &[f64], residual: &[f64]) -> f64 {
    let mut tail: Vec<f64> = radii
        .iter()
        .zip(residual)
        .filter(|(r, _)| **r >= 5.0)
        .map(|(_, v)| *v)
        .collect();
    tail.sort_by(f64::total_cmp);
    let k = tail.len();
    let med = if k % 2 == 1 { tail[k / 2] } else { 0.5 * (tail[k / 2 - 1] + tail[k / 2]) };
    tail.iter().map(|v| (v - med).abs()).fold(0.0, f64::max)
}

fn first_main_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = grid();
    let opts = CheckOptions::default();
    let mut worst = 0.0f64;
    for case in 0..10 {
        let n = 1 + case % 2;
        let f = random_curve(&mut rng, n, 3);
        let d = rng.random_range(1..=2);
        let h = Hypersurface::new("D", random_form(&mut rng, n + 1, d)).unwrap();
        let rep = check_fmt(&f, &h, &grid, &opts);
        let spread = tail_spread(&rep.radii, &rep.columns["residual"]);
        if rep.verdict != Verdict::VerifiedOnGrid || spread > 0.05 {
            return Err(format!("polynomial case {case}: spread {spread:.3e}, {}", rep.verdict.label()));
        }
        worst = worst.max(spread);
    }
    let conic = var(2, 0).power(2).unwrap().add(&var(2, 1).power(2).unwrap()).unwrap();
    let rep = check_fmt(&exp_curve(), &Hypersurface::new("D", conic).unwrap(), &grid, &opts);
    let spread = tail_spread(&rep.radii, &rep.columns["residual"]);
    check(
        rep.verdict == Verdict::VerifiedOnGrid && spread <= 0.05,
        format!("10 polynomial spreads <= {worst:.2e}; (1:e^z) spread {spread:.2e}"),
        format!("(1:e^z) spread {spread:.2e}, {}", rep.verdict.label()),
    )
}

fn characteristic_oracle() -> Outcome {
    let t = characteristic_at(&exp_curve(), 40.0);
    let dev = (PI * t / 40.0 - 1.0).abs();
    check(dev <= 1e-3, format!("|pi T/r - 1| = {dev:.2e} at r = 40"), format!("deviation {dev:.2e}"))
}

fn tf_transfer() -> Outcome {
    let grid = grid();
    let opts = CheckOptions::default();
    let poly = load("polynomial_p1.json");
    let cases = [
        ("(1:e^z)", exp_curve()),
        ("f", poly.curve("f").unwrap().clone()),
        ("g", poly.curve("g").unwrap().clone()),
    ];
    let mut msgs = Vec::new();
    for (name, f) in cases {
        let (_, setup) = smt_setup(&f, &squares(), &opts, grid.r_max());
        let setup = setup.ok_or_else(|| format!("{name}: hypotheses fail"))?;
        let rep = check_tf_transfer(&f, &setup.derived, setup.n, &grid, &opts);
        let spread = tail_spread(&rep.radii, &rep.columns["residual"]);
        if spread > 0.05 {
            return Err(format!("{name}: spread {spread:.3e}"));
        }
        msgs.push(format!("{name} {spread:.1e}"));
    }
    Ok(format!("spreads {}", msgs.join(", ")))
}

fn counting_transfer() -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut names: Vec<PathBuf> = fs::read_dir(scenarios_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    for path in names {
        let sc = parse_scenario(&fs::read_to_string(&path).unwrap()).unwrap();
        for spec in sc.checks.iter().filter(|c| c.theorem == Theorem::MainSmt) {
            let f = spec.curve.as_deref().and_then(|l| sc.curve(l)).unwrap();
            let ds = sc.selected_hypersurfaces(&spec.hypersurfaces);
            let (_, setup) = smt_setup(f, &ds, &CheckOptions::default(), sc.grid.r_max());
            let Some(setup) = setup else { continue };
            let rep = check_counting_transfer(f, &setup, &sc.grid, None);
            let cols: Vec<&Vec<f64>> = rep.columns.values().collect();
            for pair in cols.chunks(2) {
                for (a, b) in pair[0].iter().zip(pair[1]) {
                    worst = worst.max((a - b).abs());
                }
            }
            checked += 1;
        }
    }
    check(
        checked > 0 && worst <= 1e-6,
        format!("{checked} scenarios, worst gap {worst:.2e}"),
        format!("{checked} scenarios, worst gap {worst:.2e}"),
    )
}

fn tight_case() -> Outcome {
    let grid = grid();
    let opts = CheckOptions::default();
    let rep = check_main_smt(&exp_curve(), &squares(), &grid, &opts);
    let t = &rep.columns["T_f"];
    let c0 = rep.margins.fitted_constant.unwrap_or(0.0);
    for (i, &r) in rep.radii.iter().enumerate() {
        if r >= 5.0 && rep.rhs[i] - rep.lhs[i] < -(opts.epsilon * t[i] + c0) {
            return Err(format!("violated at r = {r}"));
        }
    }
    let ratio = rep.rhs[grid.len() - 1] / rep.lhs[grid.len() - 1];
    check(
        rep.verdict == Verdict::VerifiedOnGrid && (0.95..=1.10).contains(&ratio),
        format!("holds on r >= 5, RHS/LHS at r = 50 is {ratio:.4}"),
        format!("RHS/LHS {ratio:.4}, {}", rep.verdict.label()),
    )
}

fn cartan() -> Outcome {
    let grid = grid();
    let opts = CheckOptions::default();
    let hs = vec![
        Hypersurface::new("H0", var(3, 0)).unwrap(),
        Hypersurface::new("H1", var(3, 1)).unwrap(),
        Hypersurface::new("H2", var(3, 2)).unwrap(),
        Hypersurface::new("H3", HomogeneousPolynomial::coordinate_sum(3)).unwrap(),
    ];
    let z2 = ExpPoly::polynomial(UnivariatePoly::from_real(&[0.0, 0.0, 1.0]));
    let f = HolomorphicCurve::new("f", vec![ExpPoly::one(), ExpPoly::z(), z2]).unwrap();
    let good = check_cartan(&f, &hs, &grid, &opts);
    let g = HolomorphicCurve::new("g", vec![ExpPoly::one(), ExpPoly::z(), ExpPoly::z().scale(c(2.0))]).unwrap();
    let bad = check_cartan(&g, &hs, &grid, &opts);
    check(
        good.verdict == Verdict::VerifiedOnGrid && matches!(bad.verdict, Verdict::HypothesisUnmet { .. }),
        format!("(1:z:z^2) {}; (1:z:2z) {}", good.verdict.label(), bad.verdict.label()),
        format!("(1:z:z^2) {}; (1:z:2z) {}", good.verdict.label(), bad.verdict.label()),
    )
}

fn certificates() -> Outcome {
    let w2 = |i| var(2, i);
    let w3 = |i| var(3, i);
    let z2 = ExpPoly::polynomial(UnivariatePoly::from_real(&[0.0, 0.0, 1.0]));
    let cases: Vec<(HolomorphicCurve, Vec<HomogeneousPolynomial>)> = vec![
        (exp_curve(), vec![w2(0).power(2).unwrap(), w2(1).power(2).unwrap()]),
        (
            HolomorphicCurve::new("f", vec![ExpPoly::one(), ExpPoly::z()]).unwrap(),
            vec![w2(0), w2(1)],
        ),
        (
            exp_curve(),
            vec![
                w2(0).power(2).unwrap().add(&w2(1).power(2).unwrap()).unwrap(),
                w2(0).mul(&w2(1)).unwrap(),
            ],
        ),
        (
            HolomorphicCurve::new("f", vec![ExpPoly::one(), ExpPoly::z(), z2]).unwrap(),
            vec![w3(0), w3(1), HomogeneousPolynomial::coordinate_sum(3)],
        ),
        (
            HolomorphicCurve::new("f", vec![ExpPoly::one(), ExpPoly::z(), ExpPoly::exp(c(1.0))]).unwrap(),
            vec![
                w3(0).power(2).unwrap(),
                w3(1).power(2).unwrap(),
                w3(2).power(2).unwrap().add(&w3(0).mul(&w3(1)).unwrap()).unwrap(),
            ],
        ),
    ];
    let mut worst_residual = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (i, (f, qs)) in cases.iter().enumerate() {
        let set = certificates_for_subset(qs, None).map_err(|e| format!("case {i}: {e}"))?;
        for cert in &set.certificates {
            let res = certificate_residual(qs, cert.variable, cert.exponent, &cert.cofactors);
            worst_residual = worst_residual.max(res);
        }
        for r in [0.5, 2.0, 10.0] {
            let samples: Vec<C64> = (0..64).map(|k| C64::from_polar(r, TAU * k as f64 / 64.0)).collect();
            let ratio = verify_norm_bound(&set, qs, f, &samples).map_err(|e| format!("case {i}: {e}"))?;
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    check(
        worst_residual <= CERTIFICATE_TOL && worst_ratio <= 1.0 + 1e-6,
        format!("5 scenarios, residual <= {worst_residual:.1e}, norm ratio <= {worst_ratio:.4}"),
        format!("residual {worst_residual:.1e}, norm ratio {worst_ratio:.4}"),
    )
}

fn degeneracy() -> Outcome {
    let a = evaluate_degeneracy_criterion(&MultiplicityProfile::finite(&[10, 10, 10]), 2)?;
    let b = evaluate_degeneracy_criterion(&MultiplicityProfile::finite(&[4, 4, 4, 4]), 3)?;
    let rep = degeneracy_report(&MultiplicityProfile::finite(&[10, 10, 10, 10]), 3);
    let flagged = rep.details["criterion"]["flagged"].as_bool() == Some(true);
    check(
        a.verdict == Verdict::DegeneracyImplied
            && !a.flagged
            && b.verdict == Verdict::DegeneracyNotImplied
            && rep.verdict == Verdict::ThresholdDependent
            && flagged,
        "implied / not implied / threshold-dependent (flagged)".into(),
        format!("{:?} {:?} {:?}", a.verdict, b.verdict, rep.verdict),
    )
}

fn uniqueness() -> Outcome {
    let grid = RGrid::geometric(2.0, 30.0, 20).unwrap();
    let opts = CheckOptions::default();
    let pow = |k| {
        vec![
            Hypersurface::new("D1", var(2, 0).power(k).unwrap()).unwrap(),
            Hypersurface::new("D2", var(2, 1).power(k).unwrap()).unwrap(),
        ]
    };
    let f = exp_curve();
    let g = HolomorphicCurve::new("g", vec![ExpPoly::one(), ExpPoly::exp(c(1.0)).scale(c(-1.0))]).unwrap();
    let same = run_uniqueness_experiment(&f, &f, &pow(7), &grid, &opts);
    let trivially = same.verdict == Verdict::UniquenessImplied
        && same.notes.iter().any(|n| n.contains("trivially consistent"));
    let sign = run_uniqueness_experiment(&f, &g, &pow(2), &grid, &opts);
    let z0_ok = match sign.verdict {
        Verdict::SharedSetFails { z0 } => (z0 - C64::new(0.0, FRAC_PI_2)).norm() <= 1e-6,
        _ => false,
    };
    let low = run_uniqueness_experiment(&f, &f, &pow(5), &grid, &opts);
    check(
        trivially && z0_ok && low.exit_code() == 2,
        format!("f = g trivial; sign flip {}; n = 5 exit {}", sign.verdict.label(), low.exit_code()),
        format!("{} / {} / exit {}", same.verdict.label(), sign.verdict.label(), low.exit_code()),
    )
}

fn collect_files(dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, out);
        } else {
            let rel = p.strip_prefix(dir).unwrap().to_path_buf();
            out.push((rel, fs::read(&p).unwrap()));
        }
    }
}

fn determinism(suite_start: Instant) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut names: Vec<PathBuf> = fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    let ov = Overrides {
        seed: Some(42),
        ..Overrides::default()
    };
    let mut runs = Vec::new();
    for k in 0..2 {
        let root = tmp.path().join(format!("run{k}"));
        for p in &names {
            let sc = parse_scenario(&fs::read_to_string(p).unwrap()).unwrap();
            let summary = execute(&sc, &sc.checks, &ov)?;
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            write_artifacts(&summary, &root.join(stem)).map_err(|e| e.to_string())?;
        }
        let mut files = Vec::new();
        collect_files(&root, &mut files);
        runs.push(files);
    }
    let total = suite_start.elapsed();
    let identical = runs[0] == runs[1];
    check(
        identical && !runs[0].is_empty() && total < Duration::from_secs(300),
        format!("{} artifacts byte-identical; suite {total:.2?}", runs[0].len()),
        format!("identical = {identical}; suite {total:.2?}"),
    )
}

fn main() {
    let start = Instant::now();
    let criteria: Vec<Criterion> = vec![
        ("jensen-route agreement", Box::new(jensen_route)),
        ("backend agreement", Box::new(backend_agreement)),
        ("first main theorem residual", Box::new(first_main_theorem)),
        ("characteristic oracle", Box::new(characteristic_oracle)),
        ("characteristic transfer", Box::new(tf_transfer)),
        ("counting transfer identity", Box::new(counting_transfer)),
        ("tight second main theorem", Box::new(tight_case)),
        ("cartan check", Box::new(cartan)),
        ("certificate validity", Box::new(certificates)),
        ("degeneracy criterion", Box::new(degeneracy)),
        ("uniqueness harness", Box::new(uniqueness)),
        ("determinism", Box::new(move || determinism(start))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({msg})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({msg})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.2?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
