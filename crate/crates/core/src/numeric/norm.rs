use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{check_finite, dot, l2, linalg, CoeffMatrix, CoeffVector};
use crate::constructions::tilde;
use crate::error::{Error, Result};

/// Closed-form norm on a finite coefficient space.
///
/// Levels of every ladder are stored as one of these, never as tabulated
/// values, so monotonicity checks compare exact evaluations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum NormSpec {
    /// `(Σ |v_i|^p)^{1/p}` with `1 < p < ∞`.
    Lp { p: f64 },
    /// `(Σ (w_i v_i)^2)^{1/2}` with every `w_i ≥ 1`.
    WeightedL2 { weights: Vec<f64> },
    /// `max |v_i|`.
    Sup,
    /// `inner(matrix · v)`.
    MatrixInduced { matrix: CoeffMatrix, inner: Box<NormSpec> },
    /// `max_n inner(Σ_{i≤n} c_i f_i)` where `f_i` is column `i` of `synthesis`.
    PrefixSup {
        synthesis: CoeffMatrix,
        inner: Box<NormSpec>,
    },
    /// `inf { objective(f) : |c_i| ≤ |g_i(f)| for all i }` with `g_i` the
    /// rows of `analysis`.
    Tilde {
        analysis: CoeffMatrix,
        objective: Box<NormSpec>,
    },
}

/// Value of a dual norm, flagged when only an estimate is available.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualNorm {
    pub value: f64,
    pub exact: bool,
}

/// Evaluate `spec` at `v`.
pub fn norm(v: &CoeffVector, spec: &NormSpec) -> Result<f64> {
    spec.eval(v)
}

impl NormSpec {
    pub fn lp(p: f64) -> Self {
        NormSpec::Lp { p }
    }

    pub fn l2() -> Self {
        NormSpec::Lp { p: 2.0 }
    }

    pub fn weighted(weights: Vec<f64>) -> Self {
        NormSpec::WeightedL2 { weights }
    }

    pub fn induced(matrix: CoeffMatrix, inner: NormSpec) -> Self {
        NormSpec::MatrixInduced {
            matrix,
            inner: Box::new(inner),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::Lp { p } => {
                if !(p.is_finite() && *p > 1.0) {
                    return Err(Error::InvalidNorm(format!("Lp requires 1 < p < inf, got {p}")));
                }
            }
            NormSpec::WeightedL2 { weights } => {
                if weights.is_empty() {
                    return Err(Error::InvalidNorm("empty weight list".into()));
                }
                check_finite(weights)?;
                if let Some(w) = weights.iter().find(|w| **w < 1.0) {
                    return Err(Error::InvalidNorm(format!("weights must be >= 1, got {w}")));
                }
            }
            NormSpec::Sup => {}
            NormSpec::MatrixInduced { matrix, inner } => {
                inner.validate()?;
                check_dim(inner.input_dim(), matrix.rows())?;
            }
            NormSpec::PrefixSup { synthesis, inner } => {
                inner.validate()?;
                check_dim(inner.input_dim(), synthesis.rows())?;
            }
            NormSpec::Tilde { analysis, objective } => {
                objective.validate()?;
                check_dim(objective.input_dim(), analysis.cols())?;
                if objective.euclidean_factor(analysis.cols()).is_none() {
                    return Err(Error::InvalidNorm(
                        "tilde objective must be Euclidean (weighted l2, l2 or induced from them)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Fixed input dimension, if the norm carries one.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            NormSpec::Lp { .. } | NormSpec::Sup => None,
            NormSpec::WeightedL2 { weights } => Some(weights.len()),
            NormSpec::MatrixInduced { matrix, .. } => Some(matrix.cols()),
            NormSpec::PrefixSup { synthesis, .. } => Some(synthesis.cols()),
            NormSpec::Tilde { analysis, .. } => Some(analysis.rows()),
        }
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        if let Some(n) = self.input_dim() {
            if n != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        match self {
            NormSpec::Lp { p } => Ok(lp_norm(v, *p)),
            NormSpec::WeightedL2 { weights } => {
                let scaled: Vec<f64> = v.iter().zip(weights).map(|(x, w)| x * w).collect();
                Ok(l2(&scaled))
            }
            NormSpec::Sup => Ok(v.iter().fold(0.0, |m, x| m.max(x.abs()))),
            NormSpec::MatrixInduced { matrix, inner } => inner.eval(&matrix.apply(v)?),
            NormSpec::PrefixSup { synthesis, inner } => {
                let mut partial = vec![0.0; synthesis.rows()];
                let mut best = 0.0_f64;
                for (i, ci) in v.iter().enumerate() {
                    if *ci != 0.0 {
                        for (k, p) in partial.iter_mut().enumerate() {
                            *p += ci * synthesis.get(k, i);
                        }
                    }
                    best = best.max(inner.eval(&partial)?);
                }
                Ok(best)
            }
            NormSpec::Tilde { analysis, objective } => tilde::tilde_value(analysis, objective, v),
        }
    }

    /// `E` with `self(v) = ‖E v‖_2`, when the norm is Euclidean.
    pub fn euclidean_factor(&self, dim: usize) -> Option<DMatrix<f64>> {
        match self {
            NormSpec::Lp { p } if *p == 2.0 => Some(DMatrix::identity(dim, dim)),
            NormSpec::WeightedL2 { weights } if weights.len() == dim => {
                Some(DMatrix::from_diagonal(&DVector::from_column_slice(weights)))
            }
            NormSpec::MatrixInduced { matrix, inner } if matrix.cols() == dim => {
                let e = inner.euclidean_factor(matrix.rows())?;
                Some(e * matrix.to_dmatrix())
            }
            _ => None,
        }
    }

    /// True when dropping trailing coordinates can never increase the norm,
    /// i.e. the level is a 1-BK space.
    pub fn prefix_contractive(&self) -> bool {
        matches!(
            self,
            NormSpec::Lp { .. }
                | NormSpec::Sup
                | NormSpec::WeightedL2 { .. }
                | NormSpec::PrefixSup { .. }
                | NormSpec::Tilde { .. }
        )
    }

    /// True when `|d_i| ≤ |c_i|` for all `i` forces `self(d) ≤ self(c)`.
    pub fn is_solid(&self) -> bool {
        match self {
            NormSpec::Lp { .. } | NormSpec::Sup | NormSpec::WeightedL2 { .. } | NormSpec::Tilde { .. } => true,
            NormSpec::MatrixInduced { matrix, inner } => is_monomial(matrix) && inner.is_solid(),
            NormSpec::PrefixSup { .. } => false,
        }
    }

    /// Dual norm `sup_v |h·v| / self(v)` of the functional `h`.
    pub fn dual_norm(&self, h: &[f64]) -> Result<DualNorm> {
        let exact = |value| Ok(DualNorm { value, exact: true });
        if let Some(e) = self.euclidean_factor(h.len()) {
            let r = linalg::upper_factor(&e)
                .ok_or_else(|| Error::InvalidNorm("Euclidean factor is rank deficient".into()))?;
            let y = r
                .transpose()
                .solve_lower_triangular(&DVector::from_column_slice(h))
                .ok_or_else(|| Error::InvalidNorm("singular Euclidean factor".into()))?;
            return exact(y.norm());
        }
        match self {
            NormSpec::Lp { p } => exact(lp_norm(h, *p / (*p - 1.0))),
            NormSpec::Sup => exact(h.iter().map(|x| x.abs()).sum()),
            NormSpec::MatrixInduced { matrix, inner } => {
                // Any y with Mᵀy = h gives |h·v| = |y·Mv| ≤ inner*(y) · inner(Mv).
                let m = matrix.to_dmatrix();
                let hv = DVector::from_column_slice(h);
                let (y, square) = if m.is_square() {
                    (m.transpose().lu().solve(&hv), true)
                } else {
                    let gram = m.transpose() * &m;
                    (gram.lu().solve(&hv).map(|z| &m * z), false)
                };
                match y {
                    Some(y) => {
                        let d = inner.dual_norm(y.as_slice())?;
                        Ok(DualNorm {
                            value: d.value,
                            exact: d.exact && square,
                        })
                    }
                    None => self.sampled_dual(h),
                }
            }
            _ => self.sampled_dual(h),
        }
    }

    fn sampled_dual(&self, h: &[f64]) -> Result<DualNorm> {
        let n = h.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d0a1);
        let mut best = 0.0_f64;
        let mut probe = |v: &[f64]| -> Result<()> {
            let nv = self.eval(v)?;
            if nv > 0.0 {
                best = best.max(dot(h, v).abs() / nv);
            }
            Ok(())
        };
        probe(h)?;
        for i in 0..n {
            probe(CoeffVector::canonical(n, i).as_slice())?;
        }
        for _ in 0..256 {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            probe(&v)?;
        }
        Ok(DualNorm {
            value: best,
            exact: false,
        })
    }
}

/// Exactly one nonzero entry in every row and every column.
fn is_monomial(m: &CoeffMatrix) -> bool {
    let one_per = |count: usize, len: usize, at: &dyn Fn(usize, usize) -> f64| {
        (0..count).all(|i| (0..len).filter(|&j| at(i, j) != 0.0).count() == 1)
    };
    m.rows() == m.cols()
        && one_per(m.rows(), m.cols(), &|i, j| m.get(i, j))
        && one_per(m.cols(), m.rows(), &|j, i| m.get(i, j))
}

fn check_dim(fixed: Option<usize>, expected: usize) -> Result<()> {
    match fixed {
        Some(n) if n != expected => Err(Error::DimensionMismatch { expected, got: n }),
        _ => Ok(()),
    }
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}
