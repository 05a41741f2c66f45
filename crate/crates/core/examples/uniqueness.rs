//! Two curves sharing the preimages of `w0^n, w1^n` and their sum.

use nevlab::cli::expr::{parse_exp_poly, parse_form};
use nevlab::theorems::{run_uniqueness_experiment, CheckOptions};
use nevlab::{HolomorphicCurve, Hypersurface, RGrid};

fn curve(label: &str, second: &str) -> HolomorphicCurve {
    HolomorphicCurve::new(label, vec![parse_exp_poly("1").unwrap(), parse_exp_poly(second).unwrap()]).unwrap()
}

fn powers(n: u32) -> Vec<Hypersurface> {
    (0..2)
        .map(|i| Hypersurface::new(format!("D{}", i + 1), parse_form(&format!("w{i}^{n}"), 2, None).unwrap()).unwrap())
        .collect()
}

fn main() {
    let grid = RGrid::geometric(2.0, 30.0, 12).unwrap();
    let opts = CheckOptions::default();
    let f = curve("f", "exp(z)");
    let g = curve("g", "-exp(z)");
    for (name, a, b, n) in [("f = f, n = 7", &f, &f, 7), ("f vs -f, n = 2", &f, &g, 2), ("f = f, n = 5", &f, &f, 5)] {
        let rep = run_uniqueness_experiment(a, b, &powers(n), &grid, &opts);
        println!("{name:<16} {} (exit {})", rep.verdict.label(), rep.exit_code());
    }
}
