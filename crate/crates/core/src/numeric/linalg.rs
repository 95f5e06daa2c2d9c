use nalgebra::DMatrix;

/// Relative cutoff below which singular values count as zero.
pub(crate) fn rank_tolerance(m: &DMatrix<f64>, sigma_max: f64) -> f64 {
    (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * sigma_max.max(1.0) * 16.0
}

/// Numerical rank from singular values.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tolerance(m, smax);
    sv.iter().filter(|s| **s > tol).count()
}

/// Moore-Penrose pseudo-inverse through the SVD.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tolerance(m, smax);
    svd.pseudo_inverse(tol).expect("both factors were requested")
}

/// Square upper-triangular `R` with `‖E v‖₂ = ‖R v‖₂`, or `None` when `E`
/// does not have full column rank.
pub fn upper_factor(e: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = e.ncols();
    if e.nrows() < n {
        return None;
    }
    if e.is_square() && is_diagonal(e) {
        return Some(e.abs());
    }
    let r = e.clone().qr().r();
    let dmax = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = rank_tolerance(e, dmax);
    if (0..n).any(|i| r[(i, i)].abs() <= tol) {
        return None;
    }
    Some(r)
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
}
