use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FrameSystem;
use crate::error::{Error, Result};
use crate::ladder::Ladder;
use crate::numeric::{self, upper_factor};
use crate::sampling;

pub const DEFAULT_STARTS: usize = 200;
pub const DEFAULT_REFINE: usize = 30;

/// Relative size below which a lower bound counts as zero.
const LOWER_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// SVD when both level norms are Euclidean, sampling otherwise.
    Auto,
    Svd,
    Sampled {
        starts: usize,
        refine: usize,
        seed: u64,
    },
}

impl BoundMethod {
    pub fn sampled(seed: u64) -> Self {
        BoundMethod::Sampled {
            starts: DEFAULT_STARTS,
            refine: DEFAULT_REFINE,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundMethodTag {
    #[serde(rename = "svd")]
    Svd,
    #[serde(rename = "sampled-optimization")]
    SampledOptimization,
}

/// `A_s ‖f‖_s ≤ |||Uf|||_s ≤ B_s ‖f‖_s` at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelBounds {
    pub level: usize,
    pub lower: f64,
    pub upper: f64,
    pub tight: bool,
    pub method: BoundMethodTag,
    /// Number of optimization starts for sampled estimates.
    pub samples: Option<usize>,
    pub lower_inequality_holds: bool,
    /// Sampled bounds are inner estimates: `lower` may overstate `A_s` and
    /// `upper` may understate `B_s`.
    pub inner_estimate: bool,
}

/// Euclidean factors of one level: `‖f‖_s = ‖R_x f‖`, `|||c|||_s = ‖E_θ c‖`.
pub(crate) struct Whitening {
    pub rx: DMatrix<f64>,
    pub etheta: DMatrix<f64>,
}

impl Whitening {
    /// `E_θ U R_x^{-1}`.
    pub fn whitened_analysis(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let rx_inv = self
            .rx
            .clone()
            .try_inverse()
            .expect("upper factor has a nonzero diagonal");
        &self.etheta * u * rx_inv
    }
}

pub(crate) fn whitening(frame: &FrameSystem, s: usize) -> Result<Option<Whitening>> {
    let x = frame.x_ladder.level(s)?;
    let t = frame.theta_ladder.level(s)?;
    let (Some(ex), Some(etheta)) = (x.euclidean_factor(frame.dim()), t.euclidean_factor(frame.len())) else {
        return Ok(None);
    };
    Ok(upper_factor(&ex).map(|rx| Whitening { rx, etheta }))
}

pub fn estimate_frame_bounds(frame: &FrameSystem, s: usize, method: &BoundMethod) -> Result<LevelBounds> {
    if s >= frame.level_count() {
        return Err(Error::LevelOutOfRange {
            level: s,
            levels: frame.level_count(),
        });
    }
    let full_rank = numeric::rank(&frame.analysis_matrix()) == frame.dim();
    let (mut lower, upper, method, samples) = match method {
        BoundMethod::Auto => match whitening(frame, s)? {
            Some(w) => svd_bounds(frame, &w),
            None => sampled_bounds(frame, s, DEFAULT_STARTS, DEFAULT_REFINE, 0)?,
        },
        BoundMethod::Svd => {
            let w = whitening(frame, s)?
                .ok_or_else(|| Error::Unsupported(format!("level {s} norms are not both Euclidean")))?;
            svd_bounds(frame, &w)
        }
        BoundMethod::Sampled { starts, refine, seed } => sampled_bounds(frame, s, *starts, *refine, *seed)?,
    };
    let holds = full_rank && lower > LOWER_FLOOR * upper.max(1.0);
    if !holds {
        lower = 0.0;
    }
    Ok(LevelBounds {
        level: s,
        lower,
        upper,
        tight: (upper - lower).abs() <= crate::TOL,
        method,
        samples,
        lower_inequality_holds: holds,
        inner_estimate: method == BoundMethodTag::SampledOptimization,
    })
}

fn svd_bounds(frame: &FrameSystem, w: &Whitening) -> (f64, f64, BoundMethodTag, Option<usize>) {
    let m = w.whitened_analysis(&frame.analysis_matrix());
    let sv = m.singular_values();
    let upper = sv.iter().cloned().fold(0.0, f64::max);
    let lower = if m.nrows() >= m.ncols() {
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    (lower, upper, BoundMethodTag::Svd, None)
}

/// Multi-start (1+1) evolution strategy on the ratio `|||Uf||| / ‖f‖`,
/// once downhill and once uphill from every start. Starts run in parallel
/// and are merged in start order.
fn sampled_bounds(
    frame: &FrameSystem,
    s: usize,
    starts: usize,
    refine: usize,
    seed: u64,
) -> Result<(f64, f64, BoundMethodTag, Option<usize>)> {
    let n = frame.dim();
    let starts = starts.max(1);
    let ratio = |f: &[f64]| -> Result<f64> {
        let top = frame.theta_ladder.norm_at(s, &frame.functionals.apply(f)?)?;
        Ok(top / frame.x_ladder.norm_at(s, f)?)
    };
    let runs: Vec<Result<(f64, f64)>> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = sampling::rng(seed, 100 + k as u64);
            let start = if k < n {
                crate::CoeffVector::canonical(n, k).into_inner()
            } else {
                sampling::unit_vector(&mut rng, n)
            };
            let (lo, _) = local_search(&start, refine, &mut rng, ratio)?;
            let (hi, _) = local_search(&start, refine, &mut rng, |f| ratio(f).map(|r| -r))?;
            Ok((lo, -hi))
        })
        .collect();
    let mut lower = f64::INFINITY;
    let mut upper = 0.0_f64;
    for r in runs {
        let (lo, hi) = r?;
        lower = lower.min(lo);
        upper = upper.max(hi);
    }
    Ok((lower, upper, BoundMethodTag::SampledOptimization, Some(starts)))
}

/// Minimizes `obj` over the Euclidean unit sphere; returns the best value
/// and where it was found.
pub(crate) fn local_search(
    start: &[f64],
    iters: usize,
    rng: &mut sampling::SampleRng,
    obj: impl Fn(&[f64]) -> Result<f64>,
) -> Result<(f64, Vec<f64>)> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut fx = obj(&x)?;
    let mut step = 0.5;
    for _ in 0..iters {
        let d = sampling::normal_vector(rng, n);
        let mut y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
        let len = numeric::l2(&y);
        if len <= 1e-300 {
            continue;
        }
        y.iter_mut().for_each(|v| *v /= len);
        let fy = obj(&y)?;
        if fy < fx {
            x = y;
            fx = fy;
            step *= 1.5;
        } else {
            step *= 0.6;
        }
    }
    Ok((fx, x))
}
