use serde::{Deserialize, Serialize};

use super::{DualSequence, FrameSystem};
use crate::error::{Error, Result};
use crate::ladder::Ladder;
use crate::numeric::sub;
use crate::sampling;

/// Full-sum residuals at or below this count as exact reconstruction.
pub const EXPANSION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelExpansion {
    pub level: usize,
    /// `max_f ‖f − Σ_i g_i(f) f_i‖_s`.
    pub residual_primal: f64,
    /// `max_g ‖g − Σ_i g(f_i) g_i‖_{s,*}`.
    pub residual_dual: f64,
    /// False when some dual norm was only estimated.
    pub dual_norm_exact: bool,
    /// Entry `n − 1` is the primal residual using the first `n` terms.
    pub decay: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub frame: String,
    pub test_vectors: usize,
    pub test_functionals: usize,
    pub levels: Vec<LevelExpansion>,
    pub max_residual_primal: f64,
    pub max_residual_dual: f64,
    pub passed: bool,
}

/// Canonical vectors followed by seeded random ones.
pub fn default_test_vectors(n: usize, seed: u64) -> Vec<Vec<f64>> {
    sampling::probe_vectors(seed, 3, n, 16)
}

/// Coordinate functionals followed by the frame's own functionals. At
/// truncation these span the dual, so the dual expansion is checked exactly.
pub fn default_test_functionals(frame: &FrameSystem) -> Vec<Vec<f64>> {
    let n = frame.dim();
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|j| crate::CoeffVector::canonical(n, j).into_inner())
        .collect();
    out.extend((0..frame.len()).map(|i| frame.functionals.row(i).to_vec()));
    out
}

/// Residuals of `f = Σ g_i(f) f_i` and `g = Σ g(f_i) g_i` at every level,
/// plus the partial-sum curve of the first.
pub fn verify_expansions(
    frame: &FrameSystem,
    dual: &DualSequence,
    test_vectors: &[Vec<f64>],
    test_functionals: &[Vec<f64>],
) -> Result<ExpansionReport> {
    let n = frame.dim();
    let m = frame.len();
    if dual.vectors.rows() != n || dual.vectors.cols() != m {
        return Err(Error::InvalidFrame("dual does not match the frame".into()));
    }
    if let Some(bad) = test_vectors.iter().chain(test_functionals).find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }

    // Partial sums are shared across levels.
    let mut partial_residuals: Vec<Vec<Vec<f64>>> = Vec::with_capacity(test_vectors.len());
    for f in test_vectors {
        let coeffs = frame.functionals.apply(f)?;
        let mut acc = vec![0.0; n];
        let mut rows = Vec::with_capacity(m);
        for (i, ci) in coeffs.iter().enumerate() {
            for (k, a) in acc.iter_mut().enumerate() {
                *a += ci * dual.vectors.get(k, i);
            }
            rows.push(sub(f, &acc));
        }
        partial_residuals.push(rows);
    }
    let dual_gaps: Vec<Vec<f64>> = test_functionals
        .iter()
        .map(|g| {
            let coeffs = dual.vectors.transpose().apply(g)?;
            let back = frame.functionals.transpose().apply(&coeffs)?;
            Ok(sub(g, &back))
        })
        .collect::<Result<_>>()?;

    let mut levels = Vec::with_capacity(frame.level_count());
    for s in 0..frame.level_count() {
        let spec = frame.x_ladder.level(s)?;
        let mut decay = vec![0.0_f64; m];
        for rows in &partial_residuals {
            for (k, r) in rows.iter().enumerate() {
                decay[k] = decay[k].max(spec.eval(r)?);
            }
        }
        let mut residual_dual = 0.0_f64;
        let mut exact = true;
        for h in &dual_gaps {
            let d = spec.dual_norm(h)?;
            residual_dual = residual_dual.max(d.value);
            exact &= d.exact;
        }
        levels.push(LevelExpansion {
            level: s,
            residual_primal: decay.last().copied().unwrap_or(0.0),
            residual_dual,
            dual_norm_exact: exact,
            decay,
        });
    }
    let max_residual_primal = levels.iter().map(|l| l.residual_primal).fold(0.0, f64::max);
    let max_residual_dual = levels.iter().map(|l| l.residual_dual).fold(0.0, f64::max);
    Ok(ExpansionReport {
        frame: frame.label.clone(),
        test_vectors: test_vectors.len(),
        test_functionals: test_functionals.len(),
        levels,
        max_residual_primal,
        max_residual_dual,
        passed: max_residual_primal <= EXPANSION_TOL && max_residual_dual <= EXPANSION_TOL,
    })
}
