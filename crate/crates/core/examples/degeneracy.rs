//! The multiplicity criterion for algebraic degeneracy.

use nevlab::theorems::{evaluate_degeneracy_criterion, MultiplicityProfile};

fn main() {
    for (ls, q) in [(vec![10, 10, 10], 2), (vec![4, 4, 4, 4], 3), (vec![10, 10, 10, 10], 3)] {
        let out = evaluate_degeneracy_criterion(&MultiplicityProfile::finite(&ls), q).unwrap();
        println!(
            "l = {ls:?}, q = {q}: sum {:.4}, 1/q = {:.4}, 1/(q-1) = {:.4} -> {}{}",
            out.sum,
            out.proof_threshold,
            out.statement_threshold,
            out.verdict.label(),
            if out.flagged { " (flagged)" } else { "" }
        );
    }
}
