//! Zeros in a disk with both backends.

use nevlab::zero_locator::{locate_zeros, locate_zeros_analytic, locate_zeros_polynomial};
use nevlab::cli::expr::parse_exp_poly;
use nevlab::{ExpPoly, UnivariatePoly, C64};

fn main() {
    let p = UnivariatePoly::from_roots(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 2.0)]);
    let exact = locate_zeros_polynomial(&p, 3.0).unwrap();
    let analytic = locate_zeros_analytic(&ExpPoly::polynomial(p), 3.0).unwrap();
    for (a, b) in exact.zeros.iter().zip(&analytic.zeros) {
        println!("{:>24} x{}   {:>24} x{}", format!("{:.9}", a.location), a.multiplicity, format!("{:.9}", b.location), b.multiplicity);
    }

    // 1 + e^z vanishes at odd multiples of iπ.
    let g = parse_exp_poly("1 + exp(z)").unwrap();
    let located = locate_zeros(&g, 10.0).unwrap();
    println!("1 + e^z has {} zeros in |z| <= 10:", located.atlas.total_multiplicity());
    for z in &located.atlas.zeros {
        println!("  {:.6}", z.location);
    }
}
