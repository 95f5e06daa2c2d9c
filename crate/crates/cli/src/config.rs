//! Experiment configuration: what to build and which steps to run on it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use frechet_frames::ladder::{SpaceLadder, ThetaLadder};
use frechet_frames::models::ModelSpec;
use frechet_frames::CoeffMatrix;
use serde::{Deserialize, Serialize};

use crate::error::RunError;

/// Version of the config and report formats.
pub const SCHEMA_VERSION: u32 = 1;

/// Name under which the model's frame is registered.
pub const MODEL_FRAME: &str = "model";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    /// Seeds every sampled step. Required so reruns are reproducible.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Frames given directly, by name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub frames: BTreeMap<String, ExplicitFrame>,
    #[serde(default)]
    pub pipeline: Vec<Step>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitFrame {
    /// One functional per row.
    pub rows: CoeffMatrix,
    pub x_ladder: SpaceLadder,
    pub theta_ladder: ThetaLadder,
    /// Dual vectors as columns; computed by the `dual` step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<CoeffMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "axioms")]
    Axioms,
    #[serde(rename = "bounds")]
    Bounds,
    #[serde(rename = "dual")]
    Dual,
    #[serde(rename = "expansions")]
    Expansions,
    #[serde(rename = "range")]
    Range,
    A1,
    A2,
    A3,
    #[serde(rename = "dominance")]
    Dominance,
    #[serde(rename = "solidity")]
    Solidity,
    #[serde(rename = "bessel")]
    Bessel,
    #[serde(rename = "construct_x")]
    ConstructX,
    #[serde(rename = "construct_theta")]
    ConstructTheta,
    #[serde(rename = "construct_expansion")]
    ConstructExpansion,
    #[serde(rename = "cb")]
    Cb,
}

impl Op {
    pub const ALL: [Op; 15] = [
        Op::Axioms,
        Op::Bounds,
        Op::Dual,
        Op::Expansions,
        Op::Range,
        Op::A1,
        Op::A2,
        Op::A3,
        Op::Dominance,
        Op::Solidity,
        Op::Bessel,
        Op::ConstructX,
        Op::ConstructTheta,
        Op::ConstructExpansion,
        Op::Cb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::Axioms => "axioms",
            Op::Bounds => "bounds",
            Op::Dual => "dual",
            Op::Expansions => "expansions",
            Op::Range => "range",
            Op::A1 => "A1",
            Op::A2 => "A2",
            Op::A3 => "A3",
            Op::Dominance => "dominance",
            Op::Solidity => "solidity",
            Op::Bessel => "bessel",
            Op::ConstructX => "construct_x",
            Op::ConstructTheta => "construct_theta",
            Op::ConstructExpansion => "construct_expansion",
            Op::Cb => "cb",
        }
    }

    pub fn parse(name: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.name() == name)
    }

    /// Steps that register a new frame when given `save_as`.
    pub fn constructs(self) -> bool {
        matches!(self, Op::ConstructX | Op::ConstructTheta)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Auto,
    Svd,
    Sampled,
}

/// One pipeline entry. `op` stays a string here so that an unknown name is
/// reported against its step index rather than as a parse error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    /// Levels to run at; each op has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodChoice>,
    /// Name for the frame a construction step produces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub save_as: Option<String>,
}

impl Step {
    pub fn new(op: Op) -> Self {
        Step {
            op: op.name().to_string(),
            frame: None,
            levels: None,
            trials: None,
            method: None,
            save_as: None,
        }
    }

    pub fn trials(mut self, n: usize) -> Self {
        self.trials = Some(n);
        self
    }

    pub fn on(mut self, frame: &str) -> Self {
        self.frame = Some(frame.to_string());
        self
    }

    pub fn save_as(mut self, name: &str) -> Self {
        self.save_as = Some(name.to_string());
        self
    }
}

/// File names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_json")]
    pub json: String,
    #[serde(default = "default_csv")]
    pub csv: String,
    /// Partial-sum curves; written only when an `expansions` step ran.
    #[serde(default = "default_decay")]
    pub decay_csv: String,
}

fn default_json() -> String {
    "report.json".into()
}

fn default_csv() -> String {
    "report.csv".into()
}

fn default_decay() -> String {
    "decay.csv".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            json: default_json(),
            csv: default_csv(),
            decay_csv: default_decay(),
        }
    }
}

/// Pass/fail thresholds. The defaults are the single reference table; the
/// report schema documents the same values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest full-sum expansion residual counted as exact.
    pub expansion: f64,
    /// Largest excess allowed in sampled norm inequalities and conditions.
    pub inequality: f64,
    /// Smallest acceptable ratio in the A3 check.
    pub a3_floor: f64,
    /// Distance from 1 allowed for bounds of a constructed ladder.
    pub tight: f64,
    /// Largest sampled monotonicity violation between ladder levels.
    pub monotonicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            expansion: 1e-8,
            inequality: 1e-9,
            a3_floor: 1.0 - 1e-9,
            tight: 1e-10,
            monotonicity: 1e-9,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(RunError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Resolves op names and frame references in order, so a frame saved by
    /// step `k` can be used from step `k + 1` on.
    pub fn validate(&self) -> Result<Vec<Op>, RunError> {
        if self.model.is_some() && self.frames.contains_key(MODEL_FRAME) {
            return Err(RunError::Config(format!(
                "frame name {MODEL_FRAME:?} is reserved for the model"
            )));
        }
        let mut known: Vec<String> = self.frames.keys().cloned().collect();
        if self.model.is_some() {
            known.push(MODEL_FRAME.into());
        }
        let mut ops = Vec::with_capacity(self.pipeline.len());
        for (index, step) in self.pipeline.iter().enumerate() {
            let fail = |message: String| RunError::Step {
                index,
                op: step.op.clone(),
                message,
            };
            let op = Op::parse(&step.op).ok_or_else(|| fail(format!("unknown operation {:?}", step.op)))?;
            let frame = self.frame_name(step).map_err(fail)?;
            if !known.contains(&frame) {
                return Err(fail(format!("frame {frame:?} is not defined")));
            }
            if let Some(name) = &step.save_as {
                if !op.constructs() {
                    return Err(fail(format!("{op} does not produce a frame to save")));
                }
                if known.contains(name) {
                    return Err(fail(format!("frame {name:?} is already defined")));
                }
                known.push(name.clone());
            }
            if step.trials == Some(0) {
                return Err(fail("trials must be positive".into()));
            }
            ops.push(op);
        }
        Ok(ops)
    }

    /// Frame a step runs on: its own `frame`, else the model, else the only
    /// explicit frame.
    pub fn frame_name(&self, step: &Step) -> Result<String, String> {
        if let Some(f) = &step.frame {
            return Ok(f.clone());
        }
        if self.model.is_some() {
            return Ok(MODEL_FRAME.into());
        }
        match self.frames.keys().collect::<Vec<_>>().as_slice() {
            [only] => Ok((*only).clone()),
            [] => Err("no model or frame is defined".into()),
            _ => Err("several frames are defined; name one with \"frame\"".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::from_json(r#"{"seed": 3}"#).unwrap();
        assert_eq!(cfg.schema_version, SCHEMA_VERSION);
        assert!(cfg.pipeline.is_empty());
        assert_eq!(cfg.outputs.json, "report.json");
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert!(cfg.validate().unwrap().is_empty());
    }

    #[test]
    fn seed_is_required() {
        assert!(matches!(ExperimentConfig::from_json("{}"), Err(RunError::Config(_))));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"seed": 1, "pipelin": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"seed": 1, "tolerances": {"tight": 1e-6, "x": 1}}"#).is_err());
    }

    #[test]
    fn partial_tolerances_keep_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"seed": 1, "tolerances": {"expansion": 1e-6}}"#).unwrap();
        assert_eq!(cfg.tolerances.expansion, 1e-6);
        assert_eq!(cfg.tolerances.tight, Tolerances::default().tight);
    }

    #[test]
    fn undefined_frame_at_step_zero() {
        let cfg =
            ExperimentConfig::from_json(r#"{"seed": 1, "pipeline": [{"op": "bounds", "frame": "nope"}]}"#).unwrap();
        match cfg.validate() {
            Err(RunError::Step { index, .. }) => assert_eq!(index, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_op_reports_index() {
        let json = r#"{"seed": 1, "model": {"name": "hermite", "truncation": 4, "levels": 2},
                       "pipeline": [{"op": "bounds"}, {"op": "frobnicate"}]}"#;
        match ExperimentConfig::from_json(json).unwrap().validate() {
            Err(RunError::Step { index, op, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(op, "frobnicate");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn saved_frames_become_visible() {
        let json = r#"{"seed": 1, "model": {"name": "hermite", "truncation": 4, "levels": 2},
                       "pipeline": [{"op": "bounds", "frame": "t"},
                                    {"op": "construct_theta", "save_as": "t"}]}"#;
        assert!(ExperimentConfig::from_json(json).unwrap().validate().is_err());
        let json = r#"{"seed": 1, "model": {"name": "hermite", "truncation": 4, "levels": 2},
                       "pipeline": [{"op": "construct_theta", "save_as": "t"},
                                    {"op": "bounds", "frame": "t"}]}"#;
        assert_eq!(
            ExperimentConfig::from_json(json).unwrap().validate().unwrap(),
            vec![Op::ConstructTheta, Op::Bounds]
        );
    }

    #[test]
    fn op_names_round_trip() {
        for op in Op::ALL {
            assert_eq!(Op::parse(op.name()), Some(op));
            let json = serde_json::to_string(&op).unwrap();
            assert_eq!(json, format!("\"{}\"", op.name()));
        }
    }
}
