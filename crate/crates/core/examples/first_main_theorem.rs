//! `d·T_f(r) − m_f(r, D) − N_f(r, D)` stays bounded.

use nevlab::cli::expr::{parse_exp_poly, parse_form};
use nevlab::theorems::{check_fmt, CheckOptions};
use nevlab::{HolomorphicCurve, Hypersurface, RGrid};

fn main() {
    let f = HolomorphicCurve::new(
        "f",
        vec![parse_exp_poly("1").unwrap(), parse_exp_poly("exp(z)").unwrap()],
    )
    .unwrap();
    let d = Hypersurface::new("D", parse_form("w0^2 + w1^2", 2, None).unwrap()).unwrap();
    let grid = RGrid::geometric(2.0, 50.0, 12).unwrap();
    let rep = check_fmt(&f, &d, &grid, &CheckOptions::default());
    print!("{}", rep.to_text());
}
