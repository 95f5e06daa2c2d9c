//! Ready-to-run configs, one per shipped model.

use frechet_frames::models::{ModelName, ModelSpec};

use crate::config::{ExperimentConfig, Op, Outputs, Step, Tolerances, SCHEMA_VERSION};

pub const NAMES: [&str; 4] = ["hermite", "weighted_shift", "lp_shift", "coordinate"];

const SEED: u64 = 20240611;

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let (model, pipeline) = match name {
        "hermite" => (
            ModelSpec::new(ModelName::Hermite, 16, 4),
            vec![
                Step::new(Op::Axioms),
                Step::new(Op::Bounds),
                Step::new(Op::Dual),
                Step::new(Op::Expansions),
                Step::new(Op::Range),
                Step::new(Op::ConstructTheta).save_as("hermite-induced"),
                Step::new(Op::Cb),
                Step::new(Op::ConstructExpansion),
                Step::new(Op::A1).trials(200),
                Step::new(Op::A2),
                Step::new(Op::A3),
                Step::new(Op::Dominance),
                Step::new(Op::Solidity),
            ],
        ),
        "weighted_shift" => (
            ModelSpec::new(ModelName::WeightedShift, 8, 4),
            vec![
                Step::new(Op::Axioms),
                Step::new(Op::Bounds),
                Step::new(Op::Dual),
                Step::new(Op::Expansions),
                Step::new(Op::A1),
                Step::new(Op::A2),
                Step::new(Op::A3),
                Step::new(Op::Dominance),
                Step::new(Op::Solidity),
            ],
        ),
        "lp_shift" => (
            ModelSpec::new(ModelName::LpShiftInvariant, 12, 3),
            vec![
                Step::new(Op::Axioms),
                Step::new(Op::Bounds),
                Step::new(Op::Dual),
                Step::new(Op::Expansions),
                Step::new(Op::Range),
                Step::new(Op::ConstructExpansion),
                Step::new(Op::Cb),
                Step::new(Op::Dominance),
                Step::new(Op::Solidity),
            ],
        ),
        "coordinate" => (
            ModelSpec::new(ModelName::Coordinate, 16, 4),
            vec![
                Step::new(Op::Axioms),
                Step::new(Op::ConstructX).save_as("coordinate-induced"),
                Step::new(Op::Dual),
                Step::new(Op::Expansions),
                Step::new(Op::Range),
                Step::new(Op::Cb),
                Step::new(Op::Dominance),
                Step::new(Op::Solidity),
            ],
        ),
        _ => return None,
    };
    Some(ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        seed: SEED,
        model: Some(model),
        frames: Default::default(),
        pipeline,
        outputs: Outputs::default(),
        tolerances: Tolerances::default(),
    })
}
