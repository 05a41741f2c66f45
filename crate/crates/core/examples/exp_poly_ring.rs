//! Arithmetic in the ring of exponential polynomials.

use nevlab::cli::expr::parse_exp_poly;
use nevlab::{wronskian, ExpPoly, C64};

fn main() {
    let f = parse_exp_poly("z*exp(2*z) + 3 - exp(-z)").expect("valid expression");
    let g = ExpPoly::exp(C64::new(1.0, 0.0));
    println!("f       = {f}");
    println!("f'      = {}", f.differentiate());
    println!("f * g   = {}", &f * &g);
    println!("f - f   = {}", &f - &f);
    println!("W(1, e^z, e^2z) = {}", wronskian(&[ExpPoly::one(), g.clone(), g.pow(2)]));
    let z = C64::new(0.5, -1.0);
    println!("f({z}) = {}", f.evaluate(z));
}
