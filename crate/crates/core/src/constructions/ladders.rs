//! Building one ladder from the other through a frame.

use serde::{Deserialize, Serialize};

use super::conditions::{ConditionId, ConditionReport, Verdict};
use crate::error::{Error, Result};
use crate::frames::{
    default_test_functionals, default_test_vectors, estimate_frame_bounds, verify_expansions, BoundMethod,
    DualSequence, ExpansionReport, FrameSystem, LevelBounds, EXPANSION_TOL,
};
use crate::ladder::{Ladder, SpaceLadder, ThetaLadder};
use crate::numeric::{self, pseudo_inverse, CoeffMatrix, NormSpec};
use crate::sampling;

#[derive(Clone, Debug, PartialEq)]
pub struct XLadderConstruction {
    /// Level 0 is the original X₀ norm (rescaled if needed), level `s ≥ 1`
    /// is `f ↦ |||Uf|||_s`.
    pub ladder: SpaceLadder,
    /// The input functionals measured against the new ladder and `Θ`.
    pub frame: FrameSystem,
    /// Θ₀-frame bounds of the input frame on the original X₀.
    pub base_bounds: LevelBounds,
    /// Factor applied to the X₀ norm so that `A₀ ≥ 1`; 1 when untouched.
    pub x0_scale: f64,
}

/// X ladder induced by a Θ ladder: `‖f‖_s = |||Uf|||_s` for `s ≥ 1`.
///
/// The functionals must satisfy the lower Θ₀ inequality on the frame's own
/// X₀. When `A₀ < 1` the X₀ norm is multiplied by `A₀`, which makes the new
/// lower bound 1 and keeps `‖f‖₀ ≤ ‖f‖₁`.
pub fn construct_x_ladder(theta: &ThetaLadder, frame: &FrameSystem) -> Result<XLadderConstruction> {
    let levels = theta.level_count();
    let x0 = frame.x_ladder.level(0)?.clone();
    let base = SpaceLadder::new(frame.x_ladder.label.clone(), frame.dim(), vec![x0.clone(); levels])?;
    let probe = FrameSystem::new(frame.label.clone(), frame.functionals.clone(), base, theta.clone())?;
    let base_bounds = estimate_frame_bounds(&probe, 0, &BoundMethod::Auto)?;
    if !base_bounds.lower_inequality_holds {
        return Err(Error::LowerFrameInequalityFails {
            level: 0,
            lower: base_bounds.lower,
        });
    }
    let x0_scale = base_bounds.lower.min(1.0);
    let mut specs = Vec::with_capacity(levels);
    specs.push(if x0_scale < 1.0 {
        NormSpec::induced(CoeffMatrix::identity(frame.dim()).scaled(x0_scale), x0)
    } else {
        x0
    });
    for s in 1..levels {
        specs.push(NormSpec::induced(frame.functionals.clone(), theta.level(s)?.clone()));
    }
    let ladder = SpaceLadder::new(format!("{}-induced", theta.label), frame.dim(), specs)?;
    let frame = frame.with_ladders(ladder.clone(), theta.clone())?;
    Ok(XLadderConstruction {
        ladder,
        frame,
        base_bounds,
        x0_scale,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaLadderConstruction {
    pub ladder: ThetaLadder,
    pub rank: usize,
    /// Canonical coefficient vectors all lie in the range of `U`, so every
    /// level has them as a basis.
    pub cb: bool,
    pub off_range_policy: String,
}

/// Θ ladder induced by an X ladder: `|||c|||_s = ‖U†c‖_s`, which equals
/// `‖f‖_s` on `c = Uf`. For `c` off the range this is the norm of the
/// projection onto the range; [`off_range_distance`] reports what was
/// discarded.
pub fn construct_theta_ladder(x: &SpaceLadder, frame: &FrameSystem) -> Result<ThetaLadderConstruction> {
    if frame.dim() != x.truncation() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            got: x.truncation(),
        });
    }
    let u = frame.analysis_matrix();
    let rank = numeric::rank(&u);
    if rank < frame.dim() {
        return Err(Error::RankDeficient {
            rank,
            expected: frame.dim(),
        });
    }
    let pinv = CoeffMatrix::from_dmatrix(&pseudo_inverse(&u))?;
    let levels = x
        .levels
        .iter()
        .map(|spec| NormSpec::induced(pinv.clone(), spec.clone()))
        .collect();
    let ladder = ThetaLadder::new(format!("{}-coefficients", x.label), frame.len(), levels)?;
    Ok(ThetaLadderConstruction {
        ladder,
        rank,
        cb: rank == frame.len(),
        off_range_policy: "norm of the orthogonal projection onto R(U); distance reported separately".into(),
    })
}

/// `‖c − UU†c‖₂`, the part of `c` the induced Θ norm ignores.
pub fn off_range_distance(frame: &FrameSystem, c: &[f64]) -> Result<f64> {
    let u = frame.analysis_matrix();
    let p = &u * pseudo_inverse(&u);
    let cv = nalgebra::DVector::from_column_slice(c);
    if cv.len() != frame.len() {
        return Err(Error::DimensionMismatch {
            expected: frame.len(),
            got: c.len(),
        });
    }
    Ok((&cv - p * &cv).norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionLadderConstruction {
    pub ladder: ThetaLadder,
    pub expansion: ExpansionReport,
    /// Largest sampled `‖Σ c_i f_i‖_s − |||c|||_s`; never positive.
    pub synthesis_dominance: f64,
}

/// Θ ladder of coefficient sequences whose expansion converges:
/// `|||c|||_s = max_n ‖Σ_{i≤n} c_i f_i‖_s`. Requires the expansion
/// `f = Σ g_i(f) f_i` to hold first.
pub fn construct_theta_from_expansion(
    x: &SpaceLadder,
    frame: &FrameSystem,
    dual: &DualSequence,
) -> Result<ExpansionLadderConstruction> {
    let l2 = ThetaLadder::new("l2", frame.len(), vec![NormSpec::l2(); x.level_count()])?;
    let on_x = frame.with_ladders(x.clone(), l2)?;
    let expansion = verify_expansions(
        &on_x,
        dual,
        &default_test_vectors(frame.dim(), 0),
        &default_test_functionals(&on_x),
    )?;
    if expansion.max_residual_primal > EXPANSION_TOL {
        return Err(Error::ExpansionFails(expansion.max_residual_primal));
    }
    let levels: Vec<NormSpec> = x
        .levels
        .iter()
        .map(|spec| NormSpec::PrefixSup {
            synthesis: dual.vectors.clone(),
            inner: Box::new(spec.clone()),
        })
        .collect();
    let ladder = ThetaLadder::new(format!("{}-expansions", x.label), frame.len(), levels)?;
    let mut synthesis_dominance = f64::NEG_INFINITY;
    for c in sampling::probe_vectors(0, 18, frame.len(), 100) {
        let image = dual.synthesize(&c)?;
        for s in 0..x.level_count() {
            synthesis_dominance = synthesis_dominance.max(x.norm_at(s, &image)? - ladder.norm_at(s, &c)?);
        }
    }
    Ok(ExpansionLadderConstruction {
        ladder,
        expansion,
        synthesis_dominance,
    })
}

/// The canonical vectors of the induced Θ levels form a basis exactly when
/// the biorthogonal `f_i` form a basis of every `X_s`. At truncation that
/// amounts to exact full expansions plus a finite bound on the partial-sum
/// operators, which is reported as the estimate.
pub fn cb_test_via_biorthogonal(
    frame: &FrameSystem,
    dual: &DualSequence,
    x: &SpaceLadder,
    samples: usize,
    seed: u64,
) -> Result<Vec<ConditionReport>> {
    let gram = frame.functionals.matmul(&dual.vectors)?;
    let mut dev = 0.0_f64;
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram.get(i, j) - target).abs());
        }
    }
    if dev > 1e-10 {
        return Err(Error::BiorthogonalityViolated(dev));
    }
    let tests = sampling::probe_vectors(seed, 19, frame.dim(), samples);
    let mut reports = Vec::with_capacity(x.level_count());
    for s in 0..x.level_count() {
        let mut residual = 0.0_f64;
        let mut constant = 0.0_f64;
        for f in &tests {
            let nf = x.norm_at(s, f)?;
            if nf == 0.0 {
                continue;
            }
            let coeffs = frame.functionals.apply(f)?;
            let mut partial = vec![0.0; frame.dim()];
            for (i, ci) in coeffs.iter().enumerate() {
                for (k, p) in partial.iter_mut().enumerate() {
                    *p += ci * dual.vectors.get(k, i);
                }
                constant = constant.max(x.norm_at(s, &partial)? / nf);
            }
            residual = residual.max(x.norm_at(s, &numeric::sub(f, &partial))?);
        }
        reports.push(ConditionReport {
            condition: ConditionId::CB,
            level: s,
            verdict: if residual <= EXPANSION_TOL {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            trials: tests.len(),
            seed,
            certificate: Some(format!("full-sum residual {residual:e}")),
            witness: None,
            estimate: Some(constant),
            max_violation: residual,
            curves: Vec::new(),
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::test_support::{frame, l2_ladders};
    use crate::frames::{dual_sequence, shift_functionals};
    use crate::ladder::check_ladder_axioms;
    use approx::assert_relative_eq;

    fn p_ladder(m: usize) -> ThetaLadder {
        ThetaLadder::new(
            "p",
            m,
            (0..4).map(|s| NormSpec::lp(1.0 + 1.0 / (s as f64 + 1.0))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn coordinate_frame_copies_theta() {
        let theta = p_ladder(5);
        let x = SpaceLadder::new("x", 5, vec![NormSpec::l2(); 4]).unwrap();
        let f = FrameSystem::new("id", CoeffMatrix::identity(5), x, theta.clone()).unwrap();
        let built = construct_x_ladder(&theta, &f).unwrap();
        assert_eq!(built.x0_scale, 1.0);
        let v = [0.3, -1.0, 2.0, 0.0, 0.5];
        for s in 0..4 {
            assert_relative_eq!(
                built.ladder.norm_at(s, &v).unwrap(),
                theta.norm_at(s, &v).unwrap(),
                epsilon = 1e-15
            );
            assert_eq!(built.ladder.norm_at(s, &[0.0; 5]).unwrap(), 0.0);
        }
        for s in 1..4 {
            let b = estimate_frame_bounds(&built.frame, s, &BoundMethod::Auto).unwrap();
            assert_relative_eq!(b.lower, 1.0, epsilon = 1e-10);
            assert_relative_eq!(b.upper, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn weak_base_frame_rescales_x0() {
        let theta = ThetaLadder::new("t", 2, vec![NormSpec::l2(), NormSpec::weighted(vec![1.0, 2.0])]).unwrap();
        let rows = CoeffMatrix::diagonal(&[0.5, 1.0]).unwrap();
        let (x, _) = l2_ladders(2, 2);
        let f = FrameSystem::new("d", rows, x, theta.clone()).unwrap();
        let built = construct_x_ladder(&theta, &f).unwrap();
        assert_relative_eq!(built.x0_scale, 0.5, epsilon = 1e-12);
        assert!(check_ladder_axioms(&built.ladder, 200, 0).unwrap().passed);
    }

    #[test]
    fn rank_deficient_refused() {
        let rows = CoeffMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let (x, _) = l2_ladders(2, 2);
        assert!(matches!(
            construct_theta_ladder(&x, &frame(rows)),
            Err(Error::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn permuted_basis_permutes_norms() {
        let x = SpaceLadder::new("x", 3, vec![NormSpec::weighted(vec![1.0, 2.0, 3.0]); 2]).unwrap();
        let perm = CoeffMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let f = FrameSystem::new("p", perm.clone(), x.clone(), l2_ladders(3, 3).1).unwrap();
        let built = construct_theta_ladder(&x, &f).unwrap();
        assert!(built.cb);
        let fvec = [1.0, -2.0, 0.5];
        let c = perm.apply(&fvec).unwrap();
        assert_relative_eq!(
            built.ladder.norm_at(0, &c).unwrap(),
            x.norm_at(0, &fvec).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn shift_theta_is_tight_and_off_range_reported() {
        let f = frame(shift_functionals(3));
        let built = construct_theta_ladder(&f.x_ladder, &f).unwrap();
        assert!(!built.cb);
        let g = f.with_ladders(f.x_ladder.clone(), built.ladder).unwrap();
        for s in 0..2 {
            let b = estimate_frame_bounds(&g, s, &BoundMethod::Auto).unwrap();
            assert_relative_eq!(b.lower, 1.0, epsilon = 1e-10);
            assert_relative_eq!(b.upper, 1.0, epsilon = 1e-10);
        }
        // (1, −1, 0, 0) is orthogonal to the range.
        assert_relative_eq!(
            off_range_distance(&f, &[1.0, -1.0, 0.0, 0.0]).unwrap(),
            2.0_f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(off_range_distance(&f, &[1.0, 1.0, 3.0, 0.0]).unwrap() < 1e-12);
    }

    #[test]
    fn expansion_ladder_hand_values() {
        let f = frame(CoeffMatrix::identity(2));
        let d = dual_sequence(&f, 0).unwrap();
        let built = construct_theta_from_expansion(&f.x_ladder, &f, &d).unwrap();
        assert_relative_eq!(built.ladder.norm_at(0, &[3.0, -4.0]).unwrap(), 5.0, epsilon = 1e-14);
        assert_relative_eq!(built.ladder.norm_at(1, &[1.0, 0.0]).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(built.ladder.norm_at(0, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(built.synthesis_dominance <= 1e-12);
    }

    #[test]
    fn expansion_ladder_refuses_bad_dual() {
        let f = frame(shift_functionals(2));
        let bad = DualSequence::closed_form(
            &f,
            CoeffMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            construct_theta_from_expansion(&f.x_ladder, &f, &bad),
            Err(Error::ExpansionFails(_))
        ));
    }

    #[test]
    fn cb_orthonormal_and_shift() {
        let f = frame(CoeffMatrix::identity(3));
        let d = dual_sequence(&f, 0).unwrap();
        let reports = cb_test_via_biorthogonal(&f, &d, &f.x_ladder, 50, 0).unwrap();
        for r in &reports {
            assert_eq!(r.verdict, Verdict::Pass);
            assert_relative_eq!(r.estimate.unwrap(), 1.0, epsilon = 1e-12);
        }
        let f = frame(shift_functionals(3));
        let d = dual_sequence(&f, 0).unwrap();
        let err = cb_test_via_biorthogonal(&f, &d, &f.x_ladder, 10, 0).unwrap_err();
        assert!(err.to_string().starts_with("biorthogonality violated"));
    }
}
