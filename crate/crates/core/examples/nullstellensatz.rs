//! Certificates `w_k^m = Σ b_j Q_j` for forms without common zeros, and a
//! common zero found when they exist.

use nevlab::cli::expr::parse_form;
use nevlab::theorems::format_point;
use nevlab::projective::{certificates_for_subset, check_general_position, GeneralPosition};
use nevlab::{HomogeneousPolynomial, Hypersurface};

fn main() {
    let forms: Vec<HomogeneousPolynomial> = ["w0^2 + w1^2", "w0*w1"]
        .iter()
        .map(|s| parse_form(s, 2, None).unwrap())
        .collect();
    let set = certificates_for_subset(&forms, None).unwrap();
    println!("c1 = {}", set.c1);
    for cert in &set.certificates {
        println!(
            "w{}^{}: residual {:.1e}, cofactor degrees {:?}",
            cert.variable,
            cert.exponent,
            cert.residual,
            cert.cofactors.iter().map(|b| b.degree()).collect::<Vec<_>>()
        );
    }

    let ds: Vec<Hypersurface> = ["w0^2", "w1^2", "w0*w1"]
        .iter()
        .enumerate()
        .map(|(i, s)| Hypersurface::new(format!("D{}", i + 1), parse_form(s, 2, None).unwrap()).unwrap())
        .collect();
    let gp = check_general_position(&ds, 1, None);
    println!("general position: {}", gp.status.as_str());
    if gp.status == GeneralPosition::No {
        let (idx, z) = gp.witness().unwrap();
        println!("subset {idx:?} vanishes at {}", z.map(format_point).unwrap_or_default());
    }
}
