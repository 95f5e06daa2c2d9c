//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::error::Error;
use std::process::ExitCode;
use std::time::Instant;

use frechet_frames::constructions::{
    check_a1, check_a2, check_a3, check_bessel_bound, check_norm_dominance, check_solidity, construct_theta_ladder,
    construct_x_ladder, tilde_norm, tilde_norm_exhaustive, ConstraintSet, TildeStatus, Verdict, A3_FLOOR,
};
use frechet_frames::frames::{
    default_test_functionals, default_test_vectors, dual_sequence, estimate_frame_bounds, shift_functionals,
    verify_expansions, BoundMethod, DualSequence, FrameSystem, LevelBounds,
};
use frechet_frames::ladder::{check_ladder_axioms, SpaceLadder, ThetaLadder, DEFAULT_AXIOM_SAMPLES};
use frechet_frames::models::{self, Model, ModelName, ModelSpec};
use frechet_frames::{sampling, CoeffMatrix, CoeffVector, Error as CoreError, NormSpec};
use frechet_frames_cli::{presets, run};

type Outcome = Result<(bool, String), Box<dyn Error>>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 20240611;
const SAMPLES: usize = 500;

/// The model sizes the presets use.
fn model(name: ModelName) -> Result<Model, CoreError> {
    let (n, levels) = match name {
        ModelName::Hermite | ModelName::Coordinate => (16, 4),
        ModelName::WeightedShift => (8, 4),
        ModelName::LpShiftInvariant => (12, 3),
    };
    ModelSpec::new(name, n, levels).build()
}

fn models() -> Result<Vec<Model>, CoreError> {
    ModelName::ALL.into_iter().map(model).collect()
}

fn unit_gap(b: &LevelBounds) -> f64 {
    (b.lower - 1.0).abs().max((b.upper - 1.0).abs())
}

fn l2_frame(rows: CoeffMatrix) -> Result<FrameSystem, CoreError> {
    let (n, m) = (rows.cols(), rows.rows());
    let x = SpaceLadder::new("x", n, vec![NormSpec::l2(); 2])?;
    let t = ThetaLadder::new("t", m, vec![NormSpec::l2(); 2])?;
    FrameSystem::new("f", rows, x, t)
}

fn construct_x_tight() -> Outcome {
    let mut worst = 0.0_f64;
    for name in [ModelName::Coordinate, ModelName::WeightedShift] {
        let m = model(name)?;
        let built = construct_x_ladder(m.theta_ladder(), &m.frame)?;
        for s in 1..built.frame.level_count() {
            let b = estimate_frame_bounds(&built.frame, s, &BoundMethod::Auto)?;
            worst = worst.max(unit_gap(&b));
        }
    }
    Ok((
        worst <= 1e-10,
        format!("max |A_s - 1|, |B_s - 1| over s >= 1 = {worst:.2e}"),
    ))
}

fn construct_theta_tight() -> Outcome {
    let m = model(ModelName::Hermite)?;
    let built = construct_theta_ladder(m.x_ladder(), &m.frame)?;
    let f = m.frame.with_ladders(m.x_ladder().clone(), built.ladder)?;
    let mut worst = 0.0_f64;
    for s in 0..f.level_count() {
        worst = worst.max(unit_gap(&estimate_frame_bounds(&f, s, &BoundMethod::Auto)?));
    }
    Ok((worst <= 1e-10, format!("max |A_s - 1|, |B_s - 1| = {worst:.2e}")))
}

fn expansions() -> Outcome {
    let (mut primal, mut dual) = (0.0_f64, 0.0_f64);
    for m in models()? {
        let r = verify_expansions(
            &m.frame,
            &m.dual,
            &default_test_vectors(m.frame.dim(), SEED),
            &default_test_functionals(&m.frame),
        )?;
        primal = primal.max(r.max_residual_primal);
        dual = dual.max(r.max_residual_dual);
    }
    Ok((
        primal <= 1e-8 && dual <= 1e-8,
        format!("4 models, residual_primal {primal:.2e}, residual_dual {dual:.2e}"),
    ))
}

/// Smallest `|x| ≥ bound` on the grid `{−r, −r + h, …, r}`.
fn grid_min(bound: f64, r: f64, h: f64) -> f64 {
    let steps = (2.0 * r / h).round() as i64;
    (0..=steps)
        .map(|k| (-r + k as f64 * h).abs())
        .filter(|x| *x >= bound)
        .fold(f64::INFINITY, f64::min)
}

/// Grid search on the shift frame, whose constraints decouple per coordinate.
fn shift_grid(c: &[f64], weights: &[f64]) -> f64 {
    (0..c.len() - 1)
        .map(|j| {
            let bound = if j == 0 {
                c[0].abs().max(c[1].abs())
            } else {
                c[j + 1].abs()
            };
            (weights[j] * grid_min(bound, 3.0, 1e-5)).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn shift_set(c: &[f64], objective: &NormSpec) -> Result<ConstraintSet, CoreError> {
    ConstraintSet::from_parts(
        shift_functionals(c.len() - 1),
        objective.clone(),
        CoeffVector::new(c.to_vec())?,
    )
}

fn tilde_oracle() -> Outcome {
    let mut rng = sampling::rng(SEED, 0);
    let (mut same_branch, mut grid_gap, mut value_gap) = (0, 0.0_f64, 0.0_f64);
    for k in 0..50 {
        let n = 2 + k % 8;
        let weights: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let (objective, w) = if k % 2 == 0 {
            (NormSpec::l2(), vec![1.0; n])
        } else {
            (NormSpec::weighted(weights.clone()), weights)
        };
        let c: Vec<f64> = sampling::uniform_vector(&mut rng, n + 1)
            .iter()
            .map(|u| 4.0 * u - 2.0)
            .collect();
        let cs = shift_set(&c, &objective)?;
        let bb = tilde_norm(&cs)?;
        let ex = tilde_norm_exhaustive(&cs)?;
        if bb.status == TildeStatus::Optimal && bb.sign_pattern == ex.sign_pattern {
            same_branch += 1;
        }
        value_gap = value_gap.max((bb.value - ex.value).abs());
        grid_gap = grid_gap.max((bb.value - shift_grid(&c, &w)).abs());
    }
    let mut hand_gap = 0.0_f64;
    for (support, expected) in [(vec![0], 1.0), (vec![0, 1], 1.0), (vec![0, 2], 2.0_f64.sqrt())] {
        let mut c = vec![0.0; 6];
        for i in support {
            c[i] = 1.0;
        }
        hand_gap = hand_gap.max((tilde_norm(&shift_set(&c, &NormSpec::l2())?)?.value - expected).abs());
    }
    Ok((
        same_branch == 50 && value_gap <= 1e-12 && grid_gap <= 1e-4 && hand_gap <= 1e-9,
        format!("{same_branch}/50 same branch as brute force, grid gap {grid_gap:.2e}, hand values gap {hand_gap:.2e}"),
    ))
}

fn weighted_shift_conditions() -> Outcome {
    let m = model(ModelName::WeightedShift)?;
    let (mut a1_ok, mut a2_ok, mut a3_gap) = (true, true, 0.0_f64);
    for s in m.tilde_levels() {
        let a1 = check_a1(&m.frame, s, 1000, SEED)?;
        a1_ok &= a1.verdict == Verdict::Pass && a1.certificate.as_deref().is_some_and(|c| c.starts_with("closed-form"));
        let a2 = check_a2(&m.frame, s, 20, SEED)?;
        a2_ok &= a2.verdict == Verdict::Pass
            && a2
                .curves
                .iter()
                .all(|c| c.windows(2).all(|w| w[1] <= w[0]) && c.last() == Some(&0.0));
        let a3 = check_a3(&m.frame, s, 200, SEED, A3_FLOOR)?;
        a3_gap = a3_gap.max(a3.estimate.map_or(f64::INFINITY, |e| (e - 1.0).abs()));
    }
    Ok((
        a1_ok && a2_ok && a3_gap <= 1e-9,
        format!("A1 closed-form pass {a1_ok}, A2 curves monotone to 0 {a2_ok}, |A_s - 1| = {a3_gap:.2e}"),
    ))
}

fn dominance() -> Outcome {
    let mut worst = 0.0_f64;
    let mut checked = 0;
    for m in models()? {
        for s in m.tilde_levels() {
            let r = check_norm_dominance(&m.frame, m.dominance_reference(), s, SAMPLES, SEED)?;
            worst = worst.max(r.max_violation);
            checked += 1;
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{checked} levels x {SAMPLES} samples, max violation {worst:.2e}"),
    ))
}

fn solidity() -> Outcome {
    let mut worst = 0.0_f64;
    let mut checked = 0;
    for m in models()? {
        for s in m.tilde_levels() {
            worst = worst.max(check_solidity(&m.frame, s, SAMPLES, SEED)?.max_violation);
            checked += 1;
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{checked} levels x {SAMPLES} pairs, max violation {worst:.2e}"),
    ))
}

fn axioms() -> Outcome {
    let mut failed = Vec::new();
    for m in models()? {
        let x = check_ladder_axioms(m.x_ladder(), DEFAULT_AXIOM_SAMPLES, SEED)?;
        let t = check_ladder_axioms(m.theta_ladder(), DEFAULT_AXIOM_SAMPLES, SEED)?;
        if !(x.passed && t.passed) {
            failed.push(m.name.as_str());
        }
    }
    let p = check_ladder_axioms(&models::p_ladder(64, 4)?, DEFAULT_AXIOM_SAMPLES, SEED)?;
    Ok((
        failed.is_empty() && p.max_violation == 0.0,
        format!("failing models {failed:?}, p-ladder violation {:e}", p.max_violation),
    ))
}

fn shift_bounds() -> Outcome {
    let mut worst = 0.0_f64;
    for n in [2, 8, 32, 64] {
        let b = estimate_frame_bounds(&l2_frame(shift_functionals(n))?, 0, &BoundMethod::Svd)?;
        worst = worst.max((b.lower - 1.0).abs()).max((b.upper - 2.0_f64.sqrt()).abs());
    }
    Ok((
        worst <= 1e-9,
        format!("N in {{2, 8, 32, 64}}, max gap to (1, sqrt 2) = {worst:.2e}"),
    ))
}

fn negative_controls() -> Outcome {
    let deficient = l2_frame(CoeffMatrix::from_rows(&[
        vec![1.0, 1.0, 0.0],
        vec![2.0, 2.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])?)?;
    let rejected = matches!(
        dual_sequence(&deficient, 0),
        Err(CoreError::LowerFrameInequalityFails { .. })
    ) && !estimate_frame_bounds(&deficient, 0, &BoundMethod::Auto)?.lower_inequality_holds;

    // Nothing sees e₂, so reconstruction misses exactly f₂ e₂.
    let bessel = l2_frame(CoeffMatrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, -1.0],
    ])?)?;
    let d = DualSequence::pseudo_inverse(&bessel)?;
    let tests = vec![vec![0.5, 3.0, -1.0], vec![0.0, -0.25, 2.0]];
    let r = verify_expansions(&bessel, &d, &tests, &default_test_functionals(&bessel))?;
    let floor = r.levels.iter().map(|l| l.residual_primal).fold(0.0, f64::max);
    let still_bessel = check_bessel_bound(&bessel, 0, 200, SEED)?.passed;
    Ok((
        rejected && (floor - 3.0).abs() <= 1e-12 && still_bessel,
        format!(
            "rank-deficient rejected {rejected}, Bessel floor {floor} (predicted 3), upper bound holds {still_bessel}"
        ),
    ))
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for name in presets::NAMES {
        let cfg = presets::preset(name).expect("known preset");
        if run(&cfg)?.canonical_json()? != run(&cfg)?.canonical_json()? {
            differing.push(name);
        }
    }
    Ok((
        differing.is_empty(),
        format!("4 presets run twice, differing {differing:?}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("construct_x tightness (coordinate, weighted shift)", construct_x_tight),
        ("construct_theta tightness (hermite)", construct_theta_tight),
        ("expansion identities", expansions),
        ("tilde norm oracles", tilde_oracle),
        ("weighted-shift conditions A1 A2 A3", weighted_shift_conditions),
        ("norm dominance", dominance),
        ("solidity", solidity),
        ("ladder axioms", axioms),
        ("shift frame l2 bounds", shift_bounds),
        ("negative controls", negative_controls),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!ok);
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
