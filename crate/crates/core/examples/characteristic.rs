//! The characteristic function of `(1 : e^z)` against its closed form `r/π`.

use nevlab::cli::expr::parse_exp_poly;
use nevlab::nevanlinna::characteristic_at;
use nevlab::HolomorphicCurve;

fn main() {
    let f = HolomorphicCurve::new("f", vec![parse_exp_poly("1").unwrap(), parse_exp_poly("exp(z)").unwrap()]).unwrap();
    println!("{:>6} {:>14} {:>14}", "r", "T_f(r)", "r/pi");
    for r in [1.0, 5.0, 10.0, 40.0] {
        println!("{r:>6} {:>14.10} {:>14.10}", characteristic_at(&f, r), r / std::f64::consts::PI);
    }
}
