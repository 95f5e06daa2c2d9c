//! Executes a validated pipeline step by step.

use std::collections::BTreeMap;
use std::time::Instant;

use frechet_frames::constructions::{
    cb_test_via_biorthogonal, check_a1, check_a2, check_a3, check_bessel_bound, check_norm_dominance, check_solidity,
    construct_theta_from_expansion, construct_theta_ladder, construct_x_ladder, ConditionReport, PropertyReport,
    Verdict,
};
use frechet_frames::frames::{
    check_range_closed, default_test_functionals, default_test_vectors, dual_sequence, estimate_frame_bounds,
    verify_expansions, BoundMethod, DualSequence, FrameSystem, LevelBounds,
};
use frechet_frames::ladder::{check_ladder_axioms, ThetaLadder, DEFAULT_AXIOM_SAMPLES};
use frechet_frames::{sampling, Error};

use crate::config::{ExperimentConfig, MethodChoice, Op, Step, Tolerances, MODEL_FRAME, SCHEMA_VERSION};
use crate::error::RunError;
use crate::report::{RunReport, StepOutput, StepReport, Summary};

const BOUND_REFINE: usize = 30;
const BOUND_STARTS: usize = 200;

/// A frame available to pipeline steps, with what earlier steps learned
/// about it.
#[derive(Clone, Debug)]
struct Entry {
    frame: FrameSystem,
    dual: Option<DualSequence>,
    /// Solid ladder for the dominance check, when not the frame's own Θ.
    reference: Option<ThetaLadder>,
}

impl Entry {
    fn new(frame: FrameSystem) -> Self {
        Entry {
            frame,
            dual: None,
            reference: None,
        }
    }

    /// Levels whose X norm is Euclidean, where the tilde norm is computable.
    fn tilde_levels(&self) -> Vec<usize> {
        let n = self.frame.dim();
        (0..self.frame.level_count())
            .filter(|&s| self.frame.x_ladder.levels[s].euclidean_factor(n).is_some())
            .collect()
    }
}

struct Outcome {
    output: StepOutput,
    passed: bool,
    saved: Option<Entry>,
}

impl Outcome {
    fn plain(output: StepOutput, passed: bool) -> Self {
        Outcome {
            output,
            passed,
            saved: None,
        }
    }
}

/// Runs every step of `config` in order. Identical configs give identical
/// reports apart from `wall_time_seconds`.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    run_with(config, |_, _| {})
}

/// As [`run`], calling `progress(index, op)` before each step.
pub fn run_with(config: &ExperimentConfig, mut progress: impl FnMut(usize, Op)) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let ops = config.validate()?;
    let mut frames: BTreeMap<String, Entry> = BTreeMap::new();
    let mut notes = Vec::new();

    if let Some(spec) = &config.model {
        let model = spec.build().map_err(|e| RunError::Config(format!("model: {e}")))?;
        notes.extend(model.notes.iter().cloned());
        let entry = Entry {
            reference: model.reference_theta.clone(),
            dual: Some(model.dual),
            frame: model.frame,
        };
        frames.insert(MODEL_FRAME.into(), entry);
    }
    for (name, def) in &config.frames {
        let frame = FrameSystem::new(
            name.clone(),
            def.rows.clone(),
            def.x_ladder.clone(),
            def.theta_ladder.clone(),
        )
        .map_err(|e| RunError::Config(format!("frame {name:?}: {e}")))?;
        let mut entry = Entry::new(frame);
        if let Some(v) = &def.dual {
            entry.dual = Some(
                DualSequence::closed_form(&entry.frame, v.clone())
                    .map_err(|e| RunError::Config(format!("frame {name:?} dual: {e}")))?,
            );
        }
        frames.insert(name.clone(), entry);
    }

    let mut steps = Vec::with_capacity(ops.len());
    for (index, (step, op)) in config.pipeline.iter().zip(ops).enumerate() {
        progress(index, op);
        let name = config.frame_name(step).expect("validated");
        let fail = |message: String| RunError::Step {
            index,
            op: step.op.clone(),
            message,
        };
        let entry = frames.get_mut(&name).expect("validated");
        let outcome = execute(op, step, entry, config.seed, &config.tolerances).map_err(fail)?;
        if let (Some(saved), Some(as_name)) = (outcome.saved, &step.save_as) {
            frames.insert(as_name.clone(), saved);
        }
        steps.push(StepReport {
            index,
            op: op.name().into(),
            frame: name,
            passed: outcome.passed,
            output: outcome.output,
        });
    }

    let failed_steps: Vec<usize> = steps.iter().filter(|s| !s.passed).map(|s| s.index).collect();
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool: concat!("frechet-frames ", env!("CARGO_PKG_VERSION")).into(),
        config: config.clone(),
        notes,
        summary: Summary {
            passed: failed_steps.is_empty(),
            steps: steps.len(),
            failed_steps,
        },
        steps,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

fn execute(op: Op, step: &Step, entry: &mut Entry, seed: u64, tol: &Tolerances) -> Result<Outcome, String> {
    let frame = entry.frame.clone();
    let all_levels: Vec<usize> = (0..frame.level_count()).collect();
    let levels = |default: Vec<usize>| -> Result<Vec<usize>, String> {
        let chosen = step.levels.clone().unwrap_or(default);
        match chosen.iter().find(|&&s| s >= frame.level_count()) {
            Some(s) => Err(format!("level {s} out of range ({} levels)", frame.level_count())),
            None => Ok(chosen),
        }
    };
    let tilde_levels = || -> Result<Vec<usize>, String> {
        let ok = entry.tilde_levels();
        let chosen = levels(ok.clone())?;
        if let Some(s) = chosen.iter().find(|s| !ok.contains(s)) {
            return Err(format!("level {s}: X norm is not Euclidean, tilde norm unavailable"));
        }
        Ok(chosen)
    };
    let need_dual = || {
        entry
            .dual
            .clone()
            .ok_or_else(|| "no dual sequence; run a dual step first".to_string())
    };
    let text = |e: Error| e.to_string();

    Ok(match op {
        Op::Axioms => {
            let samples = step.trials.unwrap_or(DEFAULT_AXIOM_SAMPLES);
            let x = check_ladder_axioms(&frame.x_ladder, samples, seed).map_err(text)?;
            let theta = check_ladder_axioms(&frame.theta_ladder, samples, seed).map_err(text)?;
            let passed = x.max_violation <= tol.monotonicity && theta.max_violation <= tol.monotonicity;
            Outcome::plain(StepOutput::Axioms { x, theta }, passed)
        }
        Op::Bounds => {
            let out = bounds(&frame, &levels(all_levels.clone())?, step, seed)?;
            let passed = out.iter().all(|b| b.lower_inequality_holds);
            Outcome::plain(StepOutput::Bounds { levels: out }, passed)
        }
        Op::Dual => {
            let dual = match (&entry.dual, &step.levels) {
                (Some(d), None) => d.clone(),
                _ => {
                    let s = levels(vec![0])?.first().copied().unwrap_or(0);
                    dual_sequence(&frame, s).map_err(text)?
                }
            };
            entry.dual = Some(dual.clone());
            Outcome::plain(StepOutput::Dual { dual }, true)
        }
        Op::Expansions => {
            let dual = need_dual()?;
            let tests = match step.trials {
                Some(k) => sampling::probe_vectors(seed, 3, frame.dim(), k),
                None => default_test_vectors(frame.dim(), seed),
            };
            let report = verify_expansions(&frame, &dual, &tests, &default_test_functionals(&frame)).map_err(text)?;
            let passed = report.max_residual_primal <= tol.expansion && report.max_residual_dual <= tol.expansion;
            Outcome::plain(StepOutput::Expansions { report }, passed)
        }
        Op::Range => {
            let report = check_range_closed(&frame).map_err(text)?;
            let passed = report.injective;
            Outcome::plain(StepOutput::Range { report }, passed)
        }
        Op::A1 | Op::A2 | Op::A3 => {
            let mut reports = Vec::new();
            for s in tilde_levels()? {
                let r = match op {
                    Op::A1 => check_a1(&frame, s, step.trials.unwrap_or(1000), seed),
                    Op::A2 => check_a2(&frame, s, step.trials.unwrap_or(20), seed),
                    _ => check_a3(&frame, s, step.trials.unwrap_or(200), seed, tol.a3_floor),
                };
                reports.push(r.map_err(text)?);
            }
            let passed = reports.iter().all(|r| condition_passed(r, tol));
            Outcome::plain(StepOutput::Conditions { reports }, passed)
        }
        Op::Dominance | Op::Solidity | Op::Bessel => {
            let samples = step.trials.unwrap_or(500);
            let reference = entry.reference.clone().unwrap_or_else(|| frame.theta_ladder.clone());
            let mut reports = Vec::new();
            for s in tilde_levels()? {
                let r = match op {
                    Op::Dominance => check_norm_dominance(&frame, &reference, s, samples, seed),
                    Op::Solidity => check_solidity(&frame, s, samples, seed),
                    _ => check_bessel_bound(&frame, s, samples, seed),
                };
                reports.push(r.map_err(text)?);
            }
            let passed = reports.iter().all(|r| property_passed(r, tol));
            Outcome::plain(StepOutput::Properties { reports }, passed)
        }
        Op::ConstructX => {
            let built = construct_x_ladder(&frame.theta_ladder, &frame).map_err(text)?;
            let upper: Vec<usize> = (1..built.frame.level_count()).collect();
            let out = bounds(&built.frame, &upper, step, seed)?;
            let passed = out.iter().all(|b| unit_bounds(b, tol));
            let saved = Entry {
                frame: built.frame.clone(),
                dual: entry.dual.clone(),
                reference: entry.reference.clone(),
            };
            Outcome {
                output: StepOutput::ConstructX {
                    ladder: built.ladder,
                    x0_scale: built.x0_scale,
                    base_bounds: built.base_bounds,
                    bounds: out,
                },
                passed,
                saved: Some(saved),
            }
        }
        Op::ConstructTheta => {
            let built = construct_theta_ladder(&frame.x_ladder, &frame).map_err(text)?;
            let on_new = frame
                .with_ladders(frame.x_ladder.clone(), built.ladder.clone())
                .map_err(text)?;
            let out = bounds(&on_new, &all_levels, step, seed)?;
            let passed = out.iter().all(|b| unit_bounds(b, tol));
            let saved = Entry {
                frame: on_new,
                dual: entry.dual.clone(),
                reference: None,
            };
            Outcome {
                output: StepOutput::ConstructTheta {
                    ladder: built.ladder,
                    rank: built.rank,
                    cb: built.cb,
                    off_range_policy: built.off_range_policy,
                    bounds: out,
                },
                passed,
                saved: Some(saved),
            }
        }
        Op::ConstructExpansion => {
            let dual = need_dual()?;
            let built = construct_theta_from_expansion(&frame.x_ladder, &frame, &dual).map_err(text)?;
            let passed =
                built.expansion.max_residual_primal <= tol.expansion && built.synthesis_dominance <= tol.inequality;
            Outcome::plain(
                StepOutput::ConstructExpansion {
                    ladder: built.ladder,
                    expansion: built.expansion,
                    synthesis_dominance: built.synthesis_dominance,
                },
                passed,
            )
        }
        Op::Cb => {
            let dual = need_dual()?;
            let reports = cb_test_via_biorthogonal(&frame, &dual, &frame.x_ladder, step.trials.unwrap_or(100), seed)
                .map_err(text)?;
            let passed = reports.iter().all(|r| r.max_violation <= tol.expansion);
            Outcome::plain(StepOutput::Conditions { reports }, passed)
        }
    })
}

/// Exact bounds where both norms are Euclidean, seeded sampling elsewhere.
fn bounds(frame: &FrameSystem, levels: &[usize], step: &Step, seed: u64) -> Result<Vec<LevelBounds>, String> {
    let sampled = BoundMethod::Sampled {
        starts: step.trials.unwrap_or(BOUND_STARTS),
        refine: BOUND_REFINE,
        seed,
    };
    levels
        .iter()
        .map(|&s| {
            let r = match step.method.unwrap_or_default() {
                MethodChoice::Svd => estimate_frame_bounds(frame, s, &BoundMethod::Svd),
                MethodChoice::Sampled => estimate_frame_bounds(frame, s, &sampled),
                MethodChoice::Auto => match estimate_frame_bounds(frame, s, &BoundMethod::Svd) {
                    Err(Error::Unsupported(_)) => estimate_frame_bounds(frame, s, &sampled),
                    other => other,
                },
            };
            r.map_err(|e| e.to_string())
        })
        .collect()
}

fn unit_bounds(b: &LevelBounds, tol: &Tolerances) -> bool {
    (b.lower - 1.0).abs() <= tol.tight && (b.upper - 1.0).abs() <= tol.tight
}

fn condition_passed(r: &ConditionReport, tol: &Tolerances) -> bool {
    match r.estimate {
        // A3 compares against its floor, which already carries the tolerance.
        Some(_) if r.verdict != Verdict::Fail => true,
        Some(_) => false,
        None => r.max_violation <= tol.inequality,
    }
}

fn property_passed(r: &PropertyReport, tol: &Tolerances) -> bool {
    r.max_violation <= tol.inequality
}
