//! Constructions of one ladder from another through a frame, the solid
//! tilde norm, and checkers for the conditions under which it works.

pub mod conditions;
pub mod ladders;
pub mod tilde;

pub use conditions::{
    check_a1, check_a2, check_a3, check_bessel_bound, check_norm_dominance, check_solidity, shift_certificate,
    tail_curve, ConditionId, ConditionReport, PropertyReport, Verdict, Witness, A3_FLOOR,
};
pub use ladders::{
    cb_test_via_biorthogonal, construct_theta_from_expansion, construct_theta_ladder, construct_x_ladder,
    off_range_distance, ExpansionLadderConstruction, ThetaLadderConstruction, XLadderConstruction,
};
pub use tilde::{
    tilde_norm, tilde_norm_exhaustive, tilde_norm_with, ConstraintSet, TildeNormResult, TildeOptions, TildeStatus,
};
