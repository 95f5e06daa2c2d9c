use approx::assert_relative_eq;
use frechet_frames::constructions::{
    cb_test_via_biorthogonal, check_a1, check_a2, check_a3, check_norm_dominance, check_solidity,
    construct_theta_from_expansion, construct_theta_ladder, construct_x_ladder, Verdict, A3_FLOOR,
};
use frechet_frames::frames::{
    default_test_functionals, default_test_vectors, estimate_frame_bounds, verify_expansions, BoundMethod,
};
use frechet_frames::ladder::check_ladder_axioms;
use frechet_frames::models::{self, Model, ModelName, ModelSpec};

fn small(name: ModelName) -> Model {
    ModelSpec::new(name, 5, 3).build().unwrap()
}

#[test]
fn every_model_satisfies_axioms_and_expansions() {
    for name in ModelName::ALL {
        let m = small(name);
        let ax = check_ladder_axioms(m.x_ladder(), 200, 0).unwrap();
        assert!(ax.passed, "{name:?} X: {ax:?}");
        let at = check_ladder_axioms(m.theta_ladder(), 100, 0).unwrap();
        assert!(at.passed, "{name:?} Θ: {at:?}");
        let r = verify_expansions(
            &m.frame,
            &m.dual,
            &default_test_vectors(m.frame.dim(), 0),
            &default_test_functionals(&m.frame),
        )
        .unwrap();
        assert!(r.passed, "{name:?}: {} {}", r.max_residual_primal, r.max_residual_dual);
    }
}

#[test]
fn p_ladder_monotone_exactly() {
    let t = models::p_ladder(12, 3).unwrap();
    let r = check_ladder_axioms(&t, 500, 9).unwrap();
    assert_eq!(r.max_violation, 0.0);
}

#[test]
fn hermite_theta_construction_is_tight() {
    let m = small(ModelName::Hermite);
    let built = construct_theta_ladder(m.x_ladder(), &m.frame).unwrap();
    assert!(built.cb);
    let f = m.frame.with_ladders(m.x_ladder().clone(), built.ladder).unwrap();
    for s in 0..f.level_count() {
        let b = estimate_frame_bounds(&f, s, &BoundMethod::Auto).unwrap();
        assert_relative_eq!(b.lower, 1.0, epsilon = 1e-10);
        assert_relative_eq!(b.upper, 1.0, epsilon = 1e-10);
    }
}

#[test]
fn coordinate_x_construction_is_tight() {
    let m = small(ModelName::Coordinate);
    let built = construct_x_ladder(m.theta_ladder(), &m.frame).unwrap();
    for s in 1..built.frame.level_count() {
        let b = estimate_frame_bounds(&built.frame, s, &BoundMethod::Auto).unwrap();
        assert_relative_eq!(b.lower, 1.0, epsilon = 1e-10);
        assert_relative_eq!(b.upper, 1.0, epsilon = 1e-10);
    }
}

#[test]
fn weighted_shift_conditions() {
    let m = ModelSpec::new(ModelName::WeightedShift, 4, 2).build().unwrap();
    for s in m.tilde_levels() {
        assert_eq!(check_a1(&m.frame, s, 200, 1).unwrap().verdict, Verdict::Pass);
        let a2 = check_a2(&m.frame, s, 10, 1).unwrap();
        assert_eq!(a2.verdict, Verdict::Pass);
        for c in &a2.curves {
            assert_eq!(*c.last().unwrap(), 0.0);
        }
        let a3 = check_a3(&m.frame, s, 60, 1, A3_FLOOR).unwrap();
        assert_relative_eq!(a3.estimate.unwrap(), 1.0, epsilon = 1e-9);
        assert!(
            check_norm_dominance(&m.frame, m.dominance_reference(), s, 100, 1)
                .unwrap()
                .passed
        );
        assert!(check_solidity(&m.frame, s, 100, 1).unwrap().passed);
    }
}

#[test]
fn expansion_ladder_and_cb() {
    let m = small(ModelName::LpShiftInvariant);
    let built = construct_theta_from_expansion(m.x_ladder(), &m.frame, &m.dual).unwrap();
    assert!(built.expansion.passed);
    assert!(built.synthesis_dominance <= 1e-9);
    let reports = cb_test_via_biorthogonal(&m.frame, &m.dual, m.x_ladder(), 40, 0).unwrap();
    assert!(reports.iter().all(|r| r.verdict == Verdict::Pass));
    // Not biorthogonal: the shift frame has more functionals than dimensions.
    let w = small(ModelName::WeightedShift);
    assert!(cb_test_via_biorthogonal(&w.frame, &w.dual, w.x_ladder(), 10, 0).is_err());
}
