//! Graded families of norms on one truncated coefficient model.
//!
//! A [`SpaceLadder`] houses the spaces `X_s`, a [`ThetaLadder`] the sequence
//! spaces `Θ_s`. At truncation `N` every level lives on the same
//! `N`-dimensional space, so the nesting axiom and the density of the common
//! core are structural; what remains checkable is norm monotonicity, the
//! BK constants and the prefix (λ-BK) constants, all of which
//! [`check_ladder_axioms`] samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NormSpec;
use crate::sampling;

/// Default number of sampled vectors per axiom check.
pub const DEFAULT_AXIOM_SAMPLES: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceLadderDoc")]
pub struct SpaceLadder {
    pub label: String,
    pub truncation: usize,
    pub levels: Vec<NormSpec>,
}

#[derive(Deserialize)]
struct SpaceLadderDoc {
    label: String,
    truncation: usize,
    levels: Vec<NormSpec>,
}

impl TryFrom<SpaceLadderDoc> for SpaceLadder {
    type Error = Error;

    fn try_from(d: SpaceLadderDoc) -> Result<Self> {
        SpaceLadder::new(d.label, d.truncation, d.levels)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThetaLadderDoc")]
pub struct ThetaLadder {
    pub label: String,
    pub truncation: usize,
    pub levels: Vec<NormSpec>,
    /// λ_s per level: prefix truncation inflates the level-s norm by at most λ_s.
    pub bk_constants: Vec<f64>,
}

#[derive(Deserialize)]
struct ThetaLadderDoc {
    label: String,
    truncation: usize,
    levels: Vec<NormSpec>,
    #[serde(default)]
    bk_constants: Option<Vec<f64>>,
}

impl TryFrom<ThetaLadderDoc> for ThetaLadder {
    type Error = Error;

    fn try_from(d: ThetaLadderDoc) -> Result<Self> {
        let mut t = ThetaLadder::new(d.label, d.truncation, d.levels)?;
        if let Some(bk) = d.bk_constants {
            t = t.with_bk_constants(bk)?;
        }
        Ok(t)
    }
}

/// Common read access to both ladder kinds.
pub trait Ladder {
    fn label(&self) -> &str;
    fn truncation(&self) -> usize;
    fn levels(&self) -> &[NormSpec];

    fn level_count(&self) -> usize {
        self.levels().len()
    }

    fn level(&self, s: usize) -> Result<&NormSpec> {
        self.levels().get(s).ok_or(Error::LevelOutOfRange {
            level: s,
            levels: self.levels().len(),
        })
    }

    fn norm_at(&self, s: usize, v: &[f64]) -> Result<f64> {
        if v.len() != self.truncation() {
            return Err(Error::DimensionMismatch {
                expected: self.truncation(),
                got: v.len(),
            });
        }
        self.level(s)?.eval(v)
    }
}

fn validate_levels(truncation: usize, levels: &[NormSpec]) -> Result<()> {
    if truncation == 0 {
        return Err(Error::InvalidLadder("truncation must be positive".into()));
    }
    if levels.len() < 2 {
        return Err(Error::InvalidLadder(format!(
            "a ladder needs at least 2 levels, got {}",
            levels.len()
        )));
    }
    for (s, spec) in levels.iter().enumerate() {
        spec.validate()
            .map_err(|e| Error::InvalidLadder(format!("level {s}: {e}")))?;
        if let Some(n) = spec.input_dim() {
            if n != truncation {
                return Err(Error::InvalidLadder(format!(
                    "level {s} acts on dimension {n}, truncation is {truncation}"
                )));
            }
        }
    }
    Ok(())
}

impl SpaceLadder {
    pub fn new(label: impl Into<String>, truncation: usize, levels: Vec<NormSpec>) -> Result<Self> {
        validate_levels(truncation, &levels)?;
        Ok(SpaceLadder {
            label: label.into(),
            truncation,
            levels,
        })
    }
}

impl Ladder for SpaceLadder {
    fn label(&self) -> &str {
        &self.label
    }
    fn truncation(&self) -> usize {
        self.truncation
    }
    fn levels(&self) -> &[NormSpec] {
        &self.levels
    }
}

impl ThetaLadder {
    /// Builds the ladder; λ_s is 1 for prefix-contractive levels and is
    /// measured for the rest.
    pub fn new(label: impl Into<String>, truncation: usize, levels: Vec<NormSpec>) -> Result<Self> {
        validate_levels(truncation, &levels)?;
        let mut t = ThetaLadder {
            label: label.into(),
            truncation,
            levels,
            bk_constants: Vec::new(),
        };
        let mut bk = Vec::with_capacity(t.levels.len());
        for s in 0..t.levels.len() {
            bk.push(if t.levels[s].prefix_contractive() {
                1.0
            } else {
                measure_lambda(&t, s, DEFAULT_AXIOM_SAMPLES, 0)?
            });
        }
        t.bk_constants = bk;
        Ok(t)
    }

    pub fn with_bk_constants(mut self, bk: Vec<f64>) -> Result<Self> {
        if bk.len() != self.levels.len() {
            return Err(Error::InvalidLadder(format!(
                "{} BK constants for {} levels",
                bk.len(),
                self.levels.len()
            )));
        }
        if let Some(l) = bk.iter().find(|l| !(l.is_finite() && **l >= 1.0)) {
            return Err(Error::InvalidLadder(format!("BK constant must be >= 1, got {l}")));
        }
        self.bk_constants = bk;
        Ok(self)
    }
}

impl Ladder for ThetaLadder {
    fn label(&self) -> &str {
        &self.label
    }
    fn truncation(&self) -> usize {
        self.truncation
    }
    fn levels(&self) -> &[NormSpec] {
        &self.levels
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    pub lower: usize,
    pub upper: usize,
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub label: String,
    pub seed: u64,
    pub samples: usize,
    /// Largest `‖v‖_s − ‖v‖_{s+1}` seen per adjacent pair (0 when monotone).
    pub monotonicity: Vec<PairViolation>,
    pub max_violation: f64,
    /// Measured λ_s per level.
    pub lambda: Vec<f64>,
    /// Measured `K_{i,s}` with `|c_i| ≤ K_{i,s} ‖c‖_s`, indexed `[s][i]`.
    pub coordinate_bounds: Vec<Vec<f64>>,
    /// `‖e_i‖_s`, indexed `[s][i]`; finite and positive on a valid ladder.
    pub canonical_norms: Vec<Vec<f64>>,
    /// Distance from sampled vectors to their canonical-span reconstruction.
    pub density_residual: f64,
    pub passed: bool,
}

/// Sampled check of the ladder axioms. Passes iff no sampled vector breaks
/// `‖v‖_s ≤ ‖v‖_{s+1}` by more than `1e-9`.
pub fn check_ladder_axioms<L: Ladder + ?Sized>(ladder: &L, samples: usize, seed: u64) -> Result<AxiomReport> {
    if samples == 0 {
        return Err(Error::InvalidLadder("samples must be >= 1".into()));
    }
    let n = ladder.truncation();
    let levels = ladder.level_count();
    let probes = sampling::probe_vectors(seed, 1, n, samples);

    let mut pair_viol = vec![0.0_f64; levels - 1];
    let mut lambda = vec![1.0_f64; levels];
    let mut kbound = vec![vec![0.0_f64; n]; levels];
    let mut density = 0.0_f64;

    for v in &probes {
        let norms = (0..levels).map(|s| ladder.norm_at(s, v)).collect::<Result<Vec<_>>>()?;
        for s in 0..levels - 1 {
            pair_viol[s] = pair_viol[s].max(norms[s] - norms[s + 1]);
        }
        for s in 0..levels {
            if norms[s] <= 0.0 {
                continue;
            }
            for (i, x) in v.iter().enumerate() {
                kbound[s][i] = kbound[s][i].max(x.abs() / norms[s]);
            }
            lambda[s] = lambda[s].max(max_prefix_ratio(ladder, s, v, norms[s])?);
            let mut rebuilt = vec![0.0; n];
            for (i, x) in v.iter().enumerate() {
                rebuilt[i] += x;
            }
            let diff: Vec<f64> = v.iter().zip(&rebuilt).map(|(a, b)| a - b).collect();
            density = density.max(ladder.norm_at(s, &diff)?);
        }
    }

    let canonical_norms = (0..levels)
        .map(|s| {
            (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    ladder.norm_at(s, &e)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let max_violation = pair_viol.iter().cloned().fold(0.0, f64::max);
    Ok(AxiomReport {
        label: ladder.label().to_string(),
        seed,
        samples,
        monotonicity: pair_viol
            .iter()
            .enumerate()
            .map(|(s, v)| PairViolation {
                lower: s,
                upper: s + 1,
                max_violation: v.max(0.0),
            })
            .collect(),
        max_violation: max_violation.max(0.0),
        lambda,
        coordinate_bounds: kbound,
        canonical_norms,
        density_residual: density,
        passed: max_violation <= crate::TOL,
    })
}

fn max_prefix_ratio<L: Ladder + ?Sized>(ladder: &L, s: usize, v: &[f64], full: f64) -> Result<f64> {
    let mut best = 1.0_f64;
    let mut prefix = vec![0.0; v.len()];
    for k in 0..v.len().saturating_sub(1) {
        prefix[k] = v[k];
        let p = ladder.norm_at(s, &prefix)?;
        best = best.max(p / full);
    }
    Ok(best)
}

/// Sampled λ_s: the largest `‖(c_1..c_n, 0..)‖_s / ‖c‖_s`, at least 1.
pub fn measure_lambda<L: Ladder + ?Sized>(ladder: &L, s: usize, samples: usize, seed: u64) -> Result<f64> {
    ladder.level(s)?;
    let n = ladder.truncation();
    let mut best = 1.0_f64;
    for v in sampling::probe_vectors(seed, 2, n, samples) {
        let full = ladder.norm_at(s, &v)?;
        if full > 0.0 {
            best = best.max(max_prefix_ratio(ladder, s, &v, full)?);
        }
    }
    Ok(best)
}
