//! Cartan's inequality for the conic `(1 : z : z²)` and four lines.

use nevlab::cli::expr::{parse_exp_poly, parse_form};
use nevlab::theorems::{check_cartan, CheckOptions};
use nevlab::{HolomorphicCurve, Hypersurface, RGrid};

fn main() {
    let comps = ["1", "z", "z^2"].map(|s| parse_exp_poly(s).unwrap());
    let f = HolomorphicCurve::new("f", comps.to_vec()).unwrap();
    let hs: Vec<Hypersurface> = ["w0", "w1", "w2", "w0 + w1 + w2"]
        .iter()
        .enumerate()
        .map(|(i, s)| Hypersurface::new(format!("H{i}"), parse_form(s, 3, Some(1)).unwrap()).unwrap())
        .collect();
    let grid = RGrid::geometric(2.0, 50.0, 10).unwrap();
    let rep = check_cartan(&f, &hs, &grid, &CheckOptions::default());
    println!("verdict: {}", rep.verdict.label());
    print!("{}", rep.to_csv());
}
