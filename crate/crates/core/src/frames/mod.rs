//! Frame systems on a pair of ladders: analysis, frame bounds per level,
//! dual sequences and verification of the reconstruction expansions.
//!
//! At truncation the extension `g_i^s` of a functional to level `s` is the
//! same row vector measured against the level-`s` norms, so one matrix
//! serves every level.

pub(crate) mod bounds;
mod dual;
mod expansion;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{Ladder, SpaceLadder, ThetaLadder};
use crate::numeric::{self, CoeffMatrix, CoeffVector};

pub use bounds::{estimate_frame_bounds, BoundMethod, BoundMethodTag, LevelBounds};
pub use dual::{dual_sequence, DfSurrogate, DualProvenance, DualSequence, SynthesisBound};
pub use expansion::{
    default_test_functionals, default_test_vectors, verify_expansions, ExpansionReport, LevelExpansion, EXPANSION_TOL,
};

/// Functionals `g_1..g_M` on an `N`-dimensional truncation (row `i` is
/// `g_i`), together with the X-side and Θ-side ladders they are measured
/// against.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSystem {
    pub label: String,
    pub functionals: CoeffMatrix,
    pub x_ladder: SpaceLadder,
    pub theta_ladder: ThetaLadder,
}

/// Serialized form; ladders are referenced by label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDoc {
    pub label: String,
    pub rows: CoeffMatrix,
    pub x_ladder: String,
    pub theta_ladder: String,
}

impl FrameSystem {
    pub fn new(
        label: impl Into<String>,
        functionals: CoeffMatrix,
        x_ladder: SpaceLadder,
        theta_ladder: ThetaLadder,
    ) -> Result<Self> {
        let label = label.into();
        if functionals.cols() != x_ladder.truncation() {
            return Err(Error::InvalidFrame(format!(
                "{label}: {} columns but X ladder has truncation {}",
                functionals.cols(),
                x_ladder.truncation()
            )));
        }
        if functionals.rows() != theta_ladder.truncation() {
            return Err(Error::InvalidFrame(format!(
                "{label}: {} functionals but Θ ladder has truncation {}",
                functionals.rows(),
                theta_ladder.truncation()
            )));
        }
        if x_ladder.level_count() != theta_ladder.level_count() {
            return Err(Error::InvalidFrame(format!(
                "{label}: X ladder has {} levels, Θ ladder {}",
                x_ladder.level_count(),
                theta_ladder.level_count()
            )));
        }
        if let Some(i) = (0..functionals.rows()).find(|&i| functionals.row(i).iter().all(|x| *x == 0.0)) {
            return Err(Error::InvalidFrame(format!("{label}: functional g_{} is zero", i + 1)));
        }
        Ok(FrameSystem {
            label,
            functionals,
            x_ladder,
            theta_ladder,
        })
    }

    pub fn from_doc(doc: &FrameDoc, x_ladder: SpaceLadder, theta_ladder: ThetaLadder) -> Result<Self> {
        if x_ladder.label != doc.x_ladder || theta_ladder.label != doc.theta_ladder {
            return Err(Error::InvalidFrame(format!(
                "{}: ladder labels do not match ({}, {})",
                doc.label, doc.x_ladder, doc.theta_ladder
            )));
        }
        FrameSystem::new(doc.label.clone(), doc.rows.clone(), x_ladder, theta_ladder)
    }

    pub fn to_doc(&self) -> FrameDoc {
        FrameDoc {
            label: self.label.clone(),
            rows: self.functionals.clone(),
            x_ladder: self.x_ladder.label.clone(),
            theta_ladder: self.theta_ladder.label.clone(),
        }
    }

    /// Dimension `N` of the X-side truncation.
    pub fn dim(&self) -> usize {
        self.functionals.cols()
    }

    /// Number `M` of functionals.
    pub fn len(&self) -> usize {
        self.functionals.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level_count(&self) -> usize {
        self.x_ladder.level_count()
    }

    pub fn analysis_matrix(&self) -> DMatrix<f64> {
        self.functionals.to_dmatrix()
    }

    /// Frame with the same functionals measured against other ladders.
    pub fn with_ladders(&self, x_ladder: SpaceLadder, theta_ladder: ThetaLadder) -> Result<Self> {
        FrameSystem::new(self.label.clone(), self.functionals.clone(), x_ladder, theta_ladder)
    }
}

/// `U f = (g_1(f), …, g_M(f))`.
pub fn analyze(frame: &FrameSystem, f: &CoeffVector) -> Result<CoeffVector> {
    CoeffVector::new(frame.functionals.apply(f)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub rank: usize,
    pub dim: usize,
    pub injective: bool,
    /// `1/A_s`, the bound on `‖U_s^{-1}‖`; `None` where the lower inequality fails.
    pub inverse_bounds: Vec<Option<f64>>,
    pub lower_bounds: Vec<f64>,
    /// At finite rank the range of `U` is a finite-dimensional subspace and
    /// therefore closed.
    pub range_closed: bool,
    pub note: String,
}

/// Rank of `U` and the per-level bound `1/A_s` on its inverse.
pub fn check_range_closed(frame: &FrameSystem) -> Result<RangeReport> {
    let rank = numeric::rank(&frame.analysis_matrix());
    let mut inverse_bounds = Vec::new();
    let mut lower_bounds = Vec::new();
    for s in 0..frame.level_count() {
        let b = estimate_frame_bounds(frame, s, &BoundMethod::Auto)?;
        lower_bounds.push(b.lower);
        inverse_bounds.push(b.lower_inequality_holds.then(|| 1.0 / b.lower));
    }
    Ok(RangeReport {
        rank,
        dim: frame.dim(),
        injective: rank == frame.dim(),
        inverse_bounds,
        lower_bounds,
        range_closed: true,
        note: "range closedness is structural at finite rank".into(),
    })
}

/// The shift frame `g_1 = ⟨·, e_1⟩`, `g_i = ⟨·, e_{i−1}⟩` for `i ≥ 2`:
/// `N + 1` rows on `N` columns, a frame that is not a basis.
pub fn shift_functionals(n: usize) -> CoeffMatrix {
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(CoeffVector::canonical(n, 0).into_inner());
    for i in 0..n {
        rows.push(CoeffVector::canonical(n, i).into_inner());
    }
    CoeffMatrix::from_rows(&rows).expect("canonical rows are well formed")
}

/// True when `m` is exactly the shift pattern of [`shift_functionals`].
pub fn is_shift_pattern(m: &CoeffMatrix) -> bool {
    m.rows() == m.cols() + 1 && *m == shift_functionals(m.cols())
}


#[cfg(test)]
mod tests {
    use super::test_support::frame;
    use super::*;

    #[test]
    fn shift_analysis() {
        let f = frame(shift_functionals(4));
        let u = analyze(&f, &CoeffVector::canonical(4, 0)).unwrap();
        assert_eq!(u.as_slice(), &[1.0, 1.0, 0.0, 0.0, 0.0]);
        let u = analyze(&f, &CoeffVector::canonical(4, 1)).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_analysis_is_identity() {
        let f = frame(CoeffMatrix::identity(3));
        let v = CoeffVector::new(vec![0.5, -2.0, 3.0]).unwrap();
        assert_eq!(analyze(&f, &v).unwrap(), v);
    }

    #[test]
    fn dimension_mismatch() {
        let f = frame(CoeffMatrix::identity(3));
        assert!(matches!(
            analyze(&f, &CoeffVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_row_rejected() {
        let rows = CoeffMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let (x, t) = test_support::l2_ladders(2, 2);
        assert!(FrameSystem::new("z", rows, x, t).is_err());
    }

    #[test]
    fn range_reports() {
        let r = check_range_closed(&frame(shift_functionals(4))).unwrap();
        assert_eq!(r.rank, 4);
        assert!(r.injective);
        for (inv, a) in r.inverse_bounds.iter().zip(&r.lower_bounds) {
            assert!((inv.unwrap() - 1.0 / a).abs() < 1e-12);
        }

        let r = check_range_closed(&frame(CoeffMatrix::identity(3))).unwrap();
        assert_eq!(r.rank, 3);
        assert!((r.inverse_bounds[0].unwrap() - 1.0).abs() < 1e-12);

        // Dead second coordinate.
        let rows = CoeffMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]]).unwrap();
        let r = check_range_closed(&frame(rows)).unwrap();
        assert_eq!(r.rank, 2);
        assert!(!r.injective);
        assert!(r.inverse_bounds.iter().all(Option::is_none));
    }

    #[test]
    fn doc_round_trip() {
        let f = frame(shift_functionals(3));
        let doc = f.to_doc();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.starts_with(r#"{"label":"f","rows":[[1.0,0.0,0.0],[1.0,0.0,0.0]"#));
        let back: FrameDoc = serde_json::from_str(&json).unwrap();
        let g = FrameSystem::from_doc(&back, f.x_ladder.clone(), f.theta_ladder.clone()).unwrap();
        assert_eq!(g, f);
    }
}
