//! JSON and CSV files for a finished run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use frechet_frames::frames::LevelBounds;
use serde::Serialize;

use crate::config::Outputs;
use crate::error::RunError;
use crate::report::{RunReport, StepOutput};

/// One row of the per-level summary CSV. Empty cells mean no step
/// measured that quantity.
#[derive(Debug, Default, Serialize)]
struct LevelRow {
    frame: String,
    level: usize,
    #[serde(rename = "A")]
    lower: Option<f64>,
    #[serde(rename = "B")]
    upper: Option<f64>,
    tight: Option<bool>,
    residual_primal: Option<f64>,
    residual_dual: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DecayRow {
    n: usize,
    level: usize,
    residual: f64,
}

/// Writes the JSON report, the per-level CSV and, when the run verified
/// expansions, the decay curves. Returns the paths written.
pub fn write_outputs(report: &RunReport, outputs: &Outputs, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let json = dir.join(&outputs.json);
    fs::write(&json, report.to_json()?).map_err(|e| RunError::io(&json, e))?;
    let csv = dir.join(&outputs.csv);
    write_level_csv(report, &csv)?;
    let mut written = vec![json, csv];
    let decay = dir.join(&outputs.decay_csv);
    match emit_decay_curves(report, &decay) {
        Ok(()) => written.push(decay),
        Err(RunError::NothingToEmit) => {}
        Err(e) => return Err(e),
    }
    Ok(written)
}

/// Latest bounds and expansion residuals per `(frame, level)`.
pub fn write_level_csv(report: &RunReport, path: &Path) -> Result<(), RunError> {
    let mut rows: BTreeMap<(String, usize), LevelRow> = BTreeMap::new();
    for step in &report.steps {
        let (frame, bounds): (String, &[LevelBounds]) = match &step.output {
            StepOutput::Bounds { levels } => (step.frame.clone(), levels),
            StepOutput::ConstructX { bounds, .. } | StepOutput::ConstructTheta { bounds, .. } => {
                (constructed_name(report, step.index, &step.frame, &step.op), bounds)
            }
            StepOutput::Expansions { report: e } => {
                for l in &e.levels {
                    let r = row(&mut rows, &step.frame, l.level);
                    r.residual_primal = Some(l.residual_primal);
                    r.residual_dual = Some(l.residual_dual);
                }
                continue;
            }
            _ => continue,
        };
        for b in bounds {
            let r = row(&mut rows, &frame, b.level);
            r.lower = Some(b.lower);
            r.upper = Some(b.upper);
            r.tight = Some(b.tight);
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["frame", "level", "A", "B", "tight", "residual_primal", "residual_dual"])?;
    }
    for r in rows.values() {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| RunError::io(path, e))?;
    Ok(())
}

fn row<'a>(rows: &'a mut BTreeMap<(String, usize), LevelRow>, frame: &str, level: usize) -> &'a mut LevelRow {
    rows.entry((frame.to_string(), level)).or_insert_with(|| LevelRow {
        frame: frame.to_string(),
        level,
        ..LevelRow::default()
    })
}

/// The `save_as` name of a construction step, else `frame:op`.
fn constructed_name(report: &RunReport, index: usize, frame: &str, op: &str) -> String {
    report
        .config
        .pipeline
        .get(index)
        .and_then(|s| s.save_as.clone())
        .unwrap_or_else(|| format!("{frame}:{op}"))
}

/// Partial-sum residual curves `(n, level, residual)` of the last
/// `expansions` step; `residual` at `n` uses the first `n` terms.
pub fn emit_decay_curves(report: &RunReport, path: &Path) -> Result<(), RunError> {
    let expansion = report.last_expansion().ok_or(RunError::NothingToEmit)?;
    let mut w = csv::Writer::from_path(path)?;
    for l in &expansion.levels {
        for (k, residual) in l.decay.iter().enumerate() {
            w.serialize(DecayRow {
                n: k + 1,
                level: l.level,
                residual: *residual,
            })?;
        }
    }
    w.flush().map_err(|e| RunError::io(path, e))?;
    Ok(())
}
