use frechet_frames::constructions::{ConditionReport, PropertyReport};
use frechet_frames::frames::{DualSequence, ExpansionReport, LevelBounds, RangeReport};
use frechet_frames::ladder::{AxiomReport, SpaceLadder, ThetaLadder};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: String,
    /// The effective config, after any seed override.
    pub config: ExperimentConfig,
    pub notes: Vec<String>,
    pub steps: Vec<StepReport>,
    pub summary: Summary,
    /// The only field allowed to differ between identical runs.
    pub wall_time_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: bool,
    pub steps: usize,
    pub failed_steps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub op: String,
    pub frame: String,
    pub passed: bool,
    pub output: StepOutput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepOutput {
    Axioms {
        x: AxiomReport,
        theta: AxiomReport,
    },
    Bounds {
        levels: Vec<LevelBounds>,
    },
    Dual {
        dual: DualSequence,
    },
    Expansions {
        report: ExpansionReport,
    },
    Range {
        report: RangeReport,
    },
    Conditions {
        reports: Vec<ConditionReport>,
    },
    Properties {
        reports: Vec<PropertyReport>,
    },
    ConstructX {
        ladder: SpaceLadder,
        x0_scale: f64,
        base_bounds: LevelBounds,
        /// Bounds of the frame on the new ladder, levels `1..`.
        bounds: Vec<LevelBounds>,
    },
    ConstructTheta {
        ladder: ThetaLadder,
        rank: usize,
        cb: bool,
        off_range_policy: String,
        bounds: Vec<LevelBounds>,
    },
    ConstructExpansion {
        ladder: ThetaLadder,
        expansion: ExpansionReport,
        synthesis_dominance: f64,
    },
}

impl RunReport {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// JSON with the wall time zeroed: equal for equal configs.
    pub fn canonical_json(&self) -> Result<String, serde_json::Error> {
        let mut copy = self.clone();
        copy.wall_time_seconds = 0.0;
        copy.to_json()
    }

    pub fn step<'a>(&'a self, op: &'a str) -> impl Iterator<Item = &'a StepReport> + 'a {
        self.steps.iter().filter(move |s| s.op == op)
    }

    /// Report of the last `expansions` step.
    pub fn last_expansion(&self) -> Option<&ExpansionReport> {
        self.steps.iter().rev().find_map(|s| match &s.output {
            StepOutput::Expansions { report } => Some(report),
            _ => None,
        })
    }
}
