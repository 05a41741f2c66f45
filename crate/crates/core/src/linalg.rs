//! Dense complex linear algebra on top of `nalgebra`'s SVD.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Minimum-norm least-squares solution of `A x ≈ b`.
///
/// Singular values below `rel_cutoff·σ_max` are treated as zero.
pub fn least_squares(a: &DMatrix<C64>, b: &DVector<C64>, rel_cutoff: f64) -> DVector<C64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, rel_cutoff * smax.max(f64::MIN_POSITIVE))
        .expect("SVD computed with both factors")
}

/// Numerical rank of `A` and, when deficient, a unit vector spanning the
/// direction of the smallest singular value (a numerical kernel element).
#[derive(Clone, Debug)]
pub struct RankInfo {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub kernel: Option<DVector<C64>>,
}

pub fn rank_and_kernel(a: &DMatrix<C64>, rel_tol: f64) -> RankInfo {
    let (m, n) = a.shape();
    if n == 0 {
        return RankInfo {
            rank: 0,
            singular_values: Vec::new(),
            kernel: None,
        };
    }
    // Thin SVD only yields the full right factor when rows >= cols.
    let padded = if m < n {
        let mut p = DMatrix::<C64>::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > rel_tol * smax).count()
    };
    let kernel = (rank < n).then(|| {
        let v_t = svd.v_t.as_ref().expect("requested right factor");
        let (imin, _) = sv
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty spectrum");
        v_t.row(imin).transpose().map(|c| c.conj())
    });
    RankInfo {
        rank,
        singular_values: sv,
        kernel,
    }
}
