use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bounds::{estimate_frame_bounds, whitening, BoundMethod};
use super::FrameSystem;
use crate::error::{Error, Result};
use crate::ladder::Ladder;
use crate::numeric::{pseudo_inverse, upper_factor, CoeffMatrix};
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualProvenance {
    /// Plain Euclidean pseudo-inverse of `U`.
    PseudoInverse,
    /// Pseudo-inverse taken in the level-`s` whitened geometry, i.e. the
    /// orthogonal projection onto the range of `U` for that level's inner
    /// products.
    WhitenedPseudoInverse,
    ClosedForm,
}

/// `sup_c ‖V c‖_s / |||c|||_s` at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisBound {
    pub level: usize,
    pub value: f64,
    pub exact: bool,
}

/// Extreme bounds of `g ↦ (g(f_i))_i` from `X_s*` to `Θ_s*`. This only
/// stands in for the dual frame conditions at truncation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfSurrogate {
    pub level: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Vectors `f_i = V e_i` (column `i` of `vectors`, an `N × M` matrix).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSequence {
    pub vectors: CoeffMatrix,
    pub provenance: DualProvenance,
    /// Level whose geometry produced `V`.
    pub level: usize,
    pub synthesis_bounds: Vec<SynthesisBound>,
    pub df_surrogate: Vec<DfSurrogate>,
}

impl DualSequence {
    /// Wraps externally computed vectors, e.g. from a closed formula.
    pub fn closed_form(frame: &FrameSystem, vectors: CoeffMatrix) -> Result<Self> {
        Self::assemble(frame, vectors, DualProvenance::ClosedForm, 0)
    }

    /// Plain pseudo-inverse without checking the lower frame inequality.
    /// For Bessel-only systems this is the best available synthesis and
    /// lets the reconstruction floor be measured.
    pub fn pseudo_inverse(frame: &FrameSystem) -> Result<Self> {
        let v = pseudo_inverse(&frame.analysis_matrix());
        Self::assemble(frame, CoeffMatrix::from_dmatrix(&v)?, DualProvenance::PseudoInverse, 0)
    }

    fn assemble(frame: &FrameSystem, vectors: CoeffMatrix, provenance: DualProvenance, level: usize) -> Result<Self> {
        if vectors.rows() != frame.dim() || vectors.cols() != frame.len() {
            return Err(Error::InvalidFrame(format!(
                "dual is {}x{}, expected {}x{}",
                vectors.rows(),
                vectors.cols(),
                frame.dim(),
                frame.len()
            )));
        }
        let mut synthesis_bounds = Vec::new();
        let mut df_surrogate = Vec::new();
        for s in 0..frame.level_count() {
            synthesis_bounds.push(synthesis_bound(frame, &vectors, s)?);
            if let Some(d) = df_bounds(frame, &vectors, s)? {
                df_surrogate.push(d);
            }
        }
        Ok(DualSequence {
            vectors,
            provenance,
            level,
            synthesis_bounds,
            df_surrogate,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `f_i` with zero-based `i`.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// `V c = Σ c_i f_i`.
    pub fn synthesize(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.vectors.apply(c)
    }
}

/// `f_i = V e_i` with `V` the pseudo-inverse of `U` in the level-`s`
/// geometry. Refuses when the lower frame inequality fails at `s`.
pub fn dual_sequence(frame: &FrameSystem, s: usize) -> Result<DualSequence> {
    let b = estimate_frame_bounds(frame, s, &BoundMethod::Auto)?;
    if !b.lower_inequality_holds {
        return Err(Error::LowerFrameInequalityFails {
            level: s,
            lower: b.lower,
        });
    }
    let u = frame.analysis_matrix();
    match whitening(frame, s)? {
        Some(w) => {
            let rx_inv = w.rx.clone().try_inverse().expect("upper factor has a nonzero diagonal");
            let v = &rx_inv * pseudo_inverse(&w.whitened_analysis(&u)) * &w.etheta;
            DualSequence::assemble(
                frame,
                CoeffMatrix::from_dmatrix(&v)?,
                DualProvenance::WhitenedPseudoInverse,
                s,
            )
        }
        None => {
            let v = pseudo_inverse(&u);
            DualSequence::assemble(frame, CoeffMatrix::from_dmatrix(&v)?, DualProvenance::PseudoInverse, s)
        }
    }
}

fn theta_factor(frame: &FrameSystem, s: usize) -> Result<Option<DMatrix<f64>>> {
    Ok(frame
        .theta_ladder
        .level(s)?
        .euclidean_factor(frame.len())
        .and_then(|e| upper_factor(&e)))
}

fn x_factor(frame: &FrameSystem, s: usize) -> Result<Option<DMatrix<f64>>> {
    Ok(frame
        .x_ladder
        .level(s)?
        .euclidean_factor(frame.dim())
        .and_then(|e| upper_factor(&e)))
}

fn synthesis_bound(frame: &FrameSystem, v: &CoeffMatrix, s: usize) -> Result<SynthesisBound> {
    if let (Some(rx), Some(rt)) = (x_factor(frame, s)?, theta_factor(frame, s)?) {
        let rt_inv = rt.try_inverse().expect("upper factor has a nonzero diagonal");
        let op = rx * v.to_dmatrix() * rt_inv;
        let value = op.singular_values().iter().cloned().fold(0.0, f64::max);
        return Ok(SynthesisBound {
            level: s,
            value,
            exact: true,
        });
    }
    let mut best = 0.0_f64;
    for c in sampling::probe_vectors(0, 4, frame.len(), 200) {
        let den = frame.theta_ladder.norm_at(s, &c)?;
        if den > 0.0 {
            best = best.max(frame.x_ladder.norm_at(s, &v.apply(&c)?)? / den);
        }
    }
    Ok(SynthesisBound {
        level: s,
        value: best,
        exact: false,
    })
}

/// With `‖g‖_* = ‖R_x^{-T} g‖` and `|||c|||_* = ‖R_θ^{-T} c‖`, the map
/// `g ↦ Vᵀ g` has bounds given by the singular values of `R_θ^{-T} Vᵀ R_xᵀ`.
fn df_bounds(frame: &FrameSystem, v: &CoeffMatrix, s: usize) -> Result<Option<DfSurrogate>> {
    let (Some(rx), Some(rt)) = (x_factor(frame, s)?, theta_factor(frame, s)?) else {
        return Ok(None);
    };
    let rt_inv_t = rt
        .try_inverse()
        .expect("upper factor has a nonzero diagonal")
        .transpose();
    let op = rt_inv_t * v.to_dmatrix().transpose() * rx.transpose();
    let sv = op.singular_values();
    let upper = sv.iter().cloned().fold(0.0, f64::max);
    let lower = if op.nrows() >= op.ncols() {
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    Ok(Some(DfSurrogate { level: s, lower, upper }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::test_support::frame;
    use crate::frames::{analyze, shift_functionals};
    use crate::CoeffVector;
    use approx::assert_relative_eq;

    #[test]
    fn identity_is_self_dual() {
        let d = dual_sequence(&frame(CoeffMatrix::identity(3)), 0).unwrap();
        assert_eq!(d.provenance, DualProvenance::WhitenedPseudoInverse);
        for i in 0..3 {
            let e = CoeffVector::canonical(3, i);
            for (a, b) in d.vector(i).iter().zip(e.iter()) {
                assert_relative_eq!(*a, *b, epsilon = 1e-14);
            }
        }
        assert_relative_eq!(d.synthesis_bounds[0].value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shift_dual_by_hand() {
        let f = frame(shift_functionals(4));
        let d = dual_sequence(&f, 0).unwrap();
        let expect = |i: usize| -> Vec<f64> {
            match i {
                0 | 1 => vec![0.5, 0.0, 0.0, 0.0],
                _ => CoeffVector::canonical(4, i - 1).into_inner(),
            }
        };
        for i in 0..5 {
            for (a, b) in d.vector(i).iter().zip(expect(i)) {
                assert_relative_eq!(*a, b, epsilon = 1e-14);
            }
        }
        // V U = I on every basis vector.
        for j in 0..4 {
            let e = CoeffVector::canonical(4, j);
            let back = d.synthesize(&analyze(&f, &e).unwrap()).unwrap();
            for (a, b) in back.iter().zip(e.iter()) {
                assert_relative_eq!(*a, *b, epsilon = 1e-14);
            }
        }
        // ‖Vᵀa‖² = a₁²/2 + a₂² + a₃² + a₄².
        let df = d.df_surrogate[0];
        assert_relative_eq!(df.lower, 0.5_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(df.upper, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_refused() {
        let rows = CoeffMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let err = dual_sequence(&frame(rows), 0).unwrap_err();
        assert!(matches!(err, Error::LowerFrameInequalityFails { .. }));
        assert!(err.to_string().contains("lower frame inequality fails"));
    }

    #[test]
    fn closed_form_shape_checked() {
        let f = frame(shift_functionals(3));
        assert!(DualSequence::closed_form(&f, CoeffMatrix::identity(3)).is_err());
    }
}
