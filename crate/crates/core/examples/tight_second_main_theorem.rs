//! The hypersurface inequality for `(1 : e^z)` with `w0², w1²`, where it is
//! asymptotically sharp.

use nevlab::cli::expr::{parse_exp_poly, parse_form};
use nevlab::theorems::{check_main_smt, CheckOptions};
use nevlab::{HolomorphicCurve, Hypersurface, RGrid};

fn main() {
    let f = HolomorphicCurve::new(
        "f",
        vec![parse_exp_poly("1").unwrap(), parse_exp_poly("exp(z)").unwrap()],
    )
    .unwrap();
    let ds = vec![
        Hypersurface::new("D1", parse_form("w0^2", 2, None).unwrap()).unwrap(),
        Hypersurface::new("D2", parse_form("w1^2", 2, None).unwrap()).unwrap(),
    ];
    let grid = RGrid::geometric(2.0, 50.0, 20).unwrap();
    let rep = check_main_smt(&f, &ds, &grid, &CheckOptions::default());
    println!("verdict: {}", rep.verdict.label());
    println!("{:>10} {:>12} {:>12} {:>8}", "r", "LHS", "RHS", "ratio");
    for i in 0..rep.radii.len() {
        println!(
            "{:>10.4} {:>12.5} {:>12.5} {:>8.4}",
            rep.radii[i],
            rep.lhs[i],
            rep.rhs[i],
            rep.rhs[i] / rep.lhs[i]
        );
    }
    for note in &rep.notes {
        println!("note: {note}");
    }
}
