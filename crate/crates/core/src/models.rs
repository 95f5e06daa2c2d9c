//! Ready-made (ladder, frame) instances.
//!
//! * `hermite`: Hermite coefficients with weights `(2i−1)^s`, coordinate
//!   functionals, canonical dual.
//! * `weighted_shift`: weighted ℓ² levels with the shift frame, measured
//!   against the solid tilde norms it generates.
//! * `lp_shift_invariant`: circular translates of a generator on `ℤ_N`
//!   against `ℓ^{p_s}`, `p_s = 1 + 1/(s+1)`, with the X ladder induced
//!   through the frame and a dual generator from Fourier division.
//! * `coordinate`: the identity frame on a given Θ ladder, with X induced.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::constructions::{construct_theta_ladder, construct_x_ladder};
use crate::error::{Error, Result};
use crate::frames::{dual_sequence, shift_functionals, DualSequence, FrameSystem};
use crate::ladder::{Ladder, SpaceLadder, ThetaLadder};
use crate::numeric::{CoeffMatrix, NormSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Hermite,
    WeightedShift,
    LpShiftInvariant,
    Coordinate,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [
        ModelName::Hermite,
        ModelName::WeightedShift,
        ModelName::LpShiftInvariant,
        ModelName::Coordinate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Hermite => "hermite",
            ModelName::WeightedShift => "weighted_shift",
            ModelName::LpShiftInvariant => "lp_shift_invariant",
            ModelName::Coordinate => "coordinate",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// `weights[s][i]`, weighted-shift only; defaults to `(2i−1)^s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
    /// Generator taps on `ℤ_N`, lp model only; defaults to `(1, 1/2, 0, …)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<f64>>,
    /// Θ ladder, coordinate model only; defaults to the `ℓ^{p_s}` ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaLadder>,
}

/// `{name, truncation, levels, params}`; `levels` counts `s = 0..S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: ModelName,
    pub truncation: usize,
    pub levels: usize,
    #[serde(default)]
    pub params: ModelParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub name: ModelName,
    pub frame: FrameSystem,
    pub dual: DualSequence,
    /// Solid Θ ladder the tilde norms are compared against, where the
    /// frame's own Θ ladder is the tilde ladder itself.
    pub reference_theta: Option<ThetaLadder>,
    pub notes: Vec<String>,
}

impl Model {
    pub fn x_ladder(&self) -> &SpaceLadder {
        &self.frame.x_ladder
    }

    pub fn theta_ladder(&self) -> &ThetaLadder {
        &self.frame.theta_ladder
    }

    /// Ladder the tilde-norm properties are checked against.
    pub fn dominance_reference(&self) -> &ThetaLadder {
        self.reference_theta.as_ref().unwrap_or(&self.frame.theta_ladder)
    }

    /// Levels whose X norm is Euclidean, where tilde norms are computable.
    pub fn tilde_levels(&self) -> Vec<usize> {
        (0..self.frame.level_count())
            .filter(|&s| {
                self.frame.x_ladder.levels[s]
                    .euclidean_factor(self.frame.dim())
                    .is_some()
            })
            .collect()
    }
}

impl ModelSpec {
    pub fn new(name: ModelName, truncation: usize, levels: usize) -> Self {
        ModelSpec {
            name,
            truncation,
            levels,
            params: ModelParams::default(),
        }
    }

    pub fn build(&self) -> Result<Model> {
        if self.levels < 2 {
            return Err(Error::InvalidModel(format!(
                "need at least 2 levels, got {}",
                self.levels
            )));
        }
        let (n, top) = (self.truncation, self.levels - 1);
        let p = &self.params;
        match self.name {
            ModelName::Hermite => build_hermite_model(n, top),
            ModelName::WeightedShift => {
                let w = match &p.weights {
                    Some(w) => w.clone(),
                    None => hermite_weights(n, top),
                };
                build_weighted_shift_model(w, n, top)
            }
            ModelName::LpShiftInvariant => {
                let g = p.generator.clone().unwrap_or_else(|| default_generator(n));
                build_lp_shift_model(&g, top)
            }
            ModelName::Coordinate => {
                let theta = match &p.theta {
                    Some(t) => t.clone(),
                    None => p_ladder(n, top)?,
                };
                build_coordinate_model(&theta)
            }
        }
    }
}

/// `(2i − 1)^s` with 1-based `i`.
pub fn hermite_weight(i: usize, s: usize) -> f64 {
    ((2 * i - 1) as f64).powi(s as i32)
}

/// `weights[s][i − 1] = (2i − 1)^s` for `s = 0..=top`.
pub fn hermite_weights(n: usize, top: usize) -> Vec<Vec<f64>> {
    (0..=top)
        .map(|s| (1..=n).map(|i| hermite_weight(i, s)).collect())
        .collect()
}

/// `p_s = 1 + 1/(s + 1)`.
pub fn p_exponent(s: usize) -> f64 {
    1.0 + 1.0 / (s as f64 + 1.0)
}

pub fn p_ladder(m: usize, top: usize) -> Result<ThetaLadder> {
    ThetaLadder::new("lp", m, (0..=top).map(|s| NormSpec::lp(p_exponent(s))).collect())
}

fn default_generator(n: usize) -> Vec<f64> {
    let mut g = vec![0.0; n];
    g[0] = 1.0;
    if n > 1 {
        g[1] = 0.5;
    }
    g
}

fn check_sizes(n: usize, top: usize) -> Result<()> {
    if n == 0 || top == 0 {
        return Err(Error::InvalidModel(format!(
            "need N >= 1 and S >= 1, got N = {n}, S = {top}"
        )));
    }
    Ok(())
}

fn l2_theta(m: usize, levels: usize) -> Result<ThetaLadder> {
    ThetaLadder::new("l2", m, vec![NormSpec::l2(); levels])
}

/// Coefficient model of Hermite expansions: level `s` is weighted ℓ² with
/// weights `(2i−1)^s`, the functionals are the coordinates, and Θ is
/// induced from X so the frame is tight at every level.
pub fn build_hermite_model(n: usize, top: usize) -> Result<Model> {
    check_sizes(n, top)?;
    let x = SpaceLadder::new(
        "hermite",
        n,
        hermite_weights(n, top).into_iter().map(NormSpec::weighted).collect(),
    )?;
    let coords = CoeffMatrix::identity(n);
    let seed = FrameSystem::new("hermite", coords.clone(), x.clone(), l2_theta(n, top + 1)?)?;
    let theta = construct_theta_ladder(&x, &seed)?.ladder;
    let frame = FrameSystem::new("hermite", coords, x, theta)?;
    let dual = dual_sequence(&frame, 0)?;
    Ok(Model {
        name: ModelName::Hermite,
        frame,
        dual,
        reference_theta: None,
        notes: vec!["Hermite functions are never evaluated; only the eigenvalue weights enter".into()],
    })
}

fn validate_weights(w: &[Vec<f64>], n: usize) -> Result<()> {
    if w.len() < 2 {
        return Err(Error::InvalidModel("weights need at least 2 levels".into()));
    }
    for (s, row) in w.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidModel(format!(
                "level {s} has {} weights, expected {n}",
                row.len()
            )));
        }
        if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 1.0)) {
            return Err(Error::InvalidModel(format!("weight {x} at level {s} is below 1")));
        }
        if s > 0 && row.iter().zip(&w[s - 1]).any(|(a, b)| a < b) {
            return Err(Error::InvalidModel(format!(
                "weights decrease from level {} to {s}",
                s - 1
            )));
        }
    }
    Ok(())
}

/// Weighted ℓ² levels with the shift frame. The frame's Θ ladder is the
/// tilde ladder the functionals generate; the weighted ℓ² ladder with
/// weights `(a_1, a_1, a_2, …, a_N)` is kept as the solid reference.
pub fn build_weighted_shift_model(weights: Vec<Vec<f64>>, n: usize, top: usize) -> Result<Model> {
    check_sizes(n, top)?;
    if weights.len() != top + 1 {
        return Err(Error::InvalidModel(format!(
            "{} weight rows for {} levels",
            weights.len(),
            top + 1
        )));
    }
    validate_weights(&weights, n)?;
    let x = SpaceLadder::new("weighted", n, weights.iter().cloned().map(NormSpec::weighted).collect())?;
    let rows = shift_functionals(n);
    let tilde = ThetaLadder::new(
        "tilde",
        n + 1,
        x.levels
            .iter()
            .map(|spec| NormSpec::Tilde {
                analysis: rows.clone(),
                objective: Box::new(spec.clone()),
            })
            .collect(),
    )?;
    let reference = ThetaLadder::new(
        "weighted-coefficients",
        n + 1,
        weights
            .iter()
            .map(|w| {
                let mut b = Vec::with_capacity(n + 1);
                b.push(w[0]);
                b.extend_from_slice(w);
                NormSpec::weighted(b)
            })
            .collect(),
    )?;
    let on_reference = FrameSystem::new("weighted_shift", rows.clone(), x.clone(), reference.clone())?;
    let v = dual_sequence(&on_reference, 0)?;
    let frame = FrameSystem::new("weighted_shift", rows, x, tilde)?;
    let dual = DualSequence::closed_form(&frame, v.vectors)?;
    Ok(Model {
        name: ModelName::WeightedShift,
        frame,
        dual,
        reference_theta: Some(reference),
        notes: vec!["dual computed in the reference weighted geometry".into()],
    })
}

/// `z_{i,s} = e_i / a_{i,s}`, a unit vector of level `s` (1-based `i`).
pub fn z_vector(weights: &[Vec<f64>], i: usize, s: usize) -> Vec<f64> {
    let mut z = vec![0.0; weights[s].len()];
    z[i - 1] = 1.0 / weights[s][i - 1];
    z
}

/// Inner product of the weighted ℓ² level with weights `w`.
pub fn weighted_inner(w: &[f64], f: &[f64], g: &[f64]) -> f64 {
    w.iter().zip(f).zip(g).map(|((a, x), y)| a * a * x * y).sum()
}

/// Discrete Fourier transform of real taps.
fn dft(x: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn idft_real(x: &[Complex<f64>]) -> Vec<f64> {
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let n = buf.len() as f64;
    buf.iter().map(|c| c.re / n).collect()
}

/// Dual generator with `ψ̂ = φ̂ / |φ̂|²`, refusing when the symbol of `φ`
/// vanishes somewhere.
pub fn dual_generator(phi: &[f64]) -> Result<Vec<f64>> {
    let hat = dft(phi);
    let peak = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let low = hat.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    if low.is_nan() || low <= 1e-12 * peak.max(1.0) {
        return Err(Error::VanishingSymbol(low));
    }
    let psi_hat: Vec<Complex<f64>> = hat.iter().map(|c| c / c.norm_sqr()).collect();
    Ok(idft_real(&psi_hat))
}

/// `M[k][j] = taps[(j − k) mod N]`: row `k` is the translate by `k`.
pub fn circulant_rows(taps: &[f64]) -> Result<CoeffMatrix> {
    let n = taps.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|j| taps[(j + n - k) % n]).collect())
        .collect();
    CoeffMatrix::from_rows(&rows)
}

/// Circular shift-invariant model on `ℤ_N`: functionals are inner
/// products with the translates of `phi`, Θ is the `ℓ^{p_s}` ladder, X is
/// induced from Θ over X₀ = ℓ², and the dual vectors are the translates
/// of the dual generator.
pub fn build_lp_shift_model(phi: &[f64], top: usize) -> Result<Model> {
    let n = phi.len();
    check_sizes(n, top)?;
    crate::numeric::CoeffVector::new(phi.to_vec())?;
    if phi.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidModel("generator is zero".into()));
    }
    let psi = dual_generator(phi)?;
    let rows = circulant_rows(phi)?;
    let theta = p_ladder(n, top)?;
    let x0 = SpaceLadder::new("l2", n, vec![NormSpec::l2(); top + 1])?;
    let seed = FrameSystem::new("lp_shift_invariant", rows, x0, theta.clone())?;
    let built = construct_x_ladder(&theta, &seed)?;
    // Column k of V is ψ(· − k), i.e. the transpose of the circulant rows.
    let v = circulant_rows(&psi)?.transpose();
    let dual = DualSequence::closed_form(&built.frame, v)?;
    let mut notes = vec![
        "circular surrogate on Z_N of a shift-invariant space".into(),
        "one dual generator serves every p by construction, so p-independence is structural".into(),
    ];
    if built.x0_scale < 1.0 {
        notes.push(format!("X_0 norm scaled by {:e} so that A_0 = 1", built.x0_scale));
    }
    Ok(Model {
        name: ModelName::LpShiftInvariant,
        frame: built.frame,
        dual,
        reference_theta: None,
        notes,
    })
}

/// Identity frame on `theta` with X₀ = Θ₀ and X induced level by level.
pub fn build_coordinate_model(theta: &ThetaLadder) -> Result<Model> {
    let m = theta.truncation();
    let x0 = SpaceLadder::new(
        format!("{}-base", theta.label),
        m,
        vec![theta.level(0)?.clone(); theta.level_count()],
    )?;
    let seed = FrameSystem::new("coordinate", CoeffMatrix::identity(m), x0, theta.clone())?;
    let built = construct_x_ladder(theta, &seed)?;
    let dual = DualSequence::closed_form(&built.frame, CoeffMatrix::identity(m))?;
    Ok(Model {
        name: ModelName::Coordinate,
        frame: built.frame,
        dual,
        reference_theta: None,
        notes: Vec::new(),
    })
}
