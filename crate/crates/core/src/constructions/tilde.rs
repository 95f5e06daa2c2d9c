//! The solid sequence norm
//! `|||c|||~ = inf { ‖f‖ : |c_i| ≤ |g_i(f)| for all i }`.
//!
//! The feasible set is a union of polyhedra, one per sign pattern
//! `σ_i g_i(f) ≥ |c_i|`. Coordinates with `c_i = 0` are vacuous and dropped.
//! Replacing `f` by `−f` maps pattern `σ` to `−σ`, so the first sign is
//! fixed to `+`. Each pattern is a Euclidean least-norm problem.
//!
//! Patterns are searched depth first in lexicographic order (`−1 < +1`).
//! A partial pattern with minimizer `y` bounds every completion `y*` below
//! through `‖y*‖² ≥ ‖y‖² + ‖y* − y‖²`; the second term is at least the
//! squared shortfall of the open constraints at `y`, each scaled by its
//! row length, over a Gershgorin bound on the squared spectral norm of the
//! normalized rows. A
//! greedy dive supplies the first incumbent. A child whose new constraint
//! already holds at the parent's minimizer inherits that minimizer
//! without a solve. Ties within `1e-10` relative go to the
//! lexicographically smallest pattern, matching plain enumeration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSystem;
use crate::ladder::Ladder;
use crate::numeric::qp::{normalize, project_origin, Halfspace};
use crate::numeric::{CoeffMatrix, CoeffVector, EuclideanQp, NormSpec, SolveError};

/// Support sizes up to this are searched without a node cap.
pub const DEFAULT_BRANCH_LIMIT: usize = 20;
/// Node cap for larger supports; hitting it labels the result best-found.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Feasible set `M^c_s = { f : |c_i| ≤ |g_i(f)| }` for one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub c: CoeffVector,
    pub analysis: CoeffMatrix,
    pub objective: NormSpec,
    pub level: usize,
}

impl ConstraintSet {
    /// Constraints from the frame's functionals, measured in the frame's
    /// level-`s` X norm.
    pub fn new(frame: &FrameSystem, s: usize, c: CoeffVector) -> Result<Self> {
        let objective = frame.x_ladder.level(s)?.clone();
        let cs = ConstraintSet {
            c,
            analysis: frame.functionals.clone(),
            objective,
            level: s,
        };
        cs.validate()?;
        Ok(cs)
    }

    pub fn from_parts(analysis: CoeffMatrix, objective: NormSpec, c: CoeffVector) -> Result<Self> {
        let cs = ConstraintSet {
            c,
            analysis,
            objective,
            level: 0,
        };
        cs.validate()?;
        Ok(cs)
    }

    fn validate(&self) -> Result<()> {
        if self.c.len() != self.analysis.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.analysis.rows(),
                got: self.c.len(),
            });
        }
        if self.objective.euclidean_factor(self.analysis.cols()).is_none() {
            return Err(Error::Unsupported(
                "tilde norm needs a weighted l2 or l2 objective at this level".into(),
            ));
        }
        Ok(())
    }

    /// Largest shortfall `|c_i| − |g_i(f)|` over all constraints.
    pub fn violation(&self, f: &[f64]) -> Result<f64> {
        let g = self.analysis.apply(f)?;
        Ok(g.iter()
            .zip(self.c.iter())
            .map(|(gi, ci)| ci.abs() - gi.abs())
            .fold(0.0, f64::max))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TildeStatus {
    Optimal,
    /// Node cap reached before the search finished.
    BestFound,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeNormResult {
    pub value: f64,
    pub minimizer: Option<CoeffVector>,
    /// One entry per functional: `±1` on the support of `c`, 0 elsewhere.
    pub sign_pattern: Vec<i8>,
    pub branches_explored: usize,
    pub status: TildeStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TildeOptions {
    pub branch_limit: usize,
    pub node_cap: usize,
}

impl Default for TildeOptions {
    fn default() -> Self {
        TildeOptions {
            branch_limit: DEFAULT_BRANCH_LIMIT,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

pub fn tilde_norm(cs: &ConstraintSet) -> Result<TildeNormResult> {
    tilde_norm_with(cs, TildeOptions::default())
}

pub fn tilde_norm_with(cs: &ConstraintSet, opts: TildeOptions) -> Result<TildeNormResult> {
    let problem = Problem::new(cs)?;
    let cap = (problem.b.len() > opts.branch_limit).then_some(opts.node_cap);
    let mut search = Search {
        p: &problem,
        best: None,
        nodes: 0,
        cap,
        capped: false,
    };
    search.run()?;
    let status = if search.best.is_none() {
        TildeStatus::Infeasible
    } else if search.capped {
        TildeStatus::BestFound
    } else {
        TildeStatus::Optimal
    };
    problem.finish(search.best, search.nodes, status)
}

/// Plain enumeration of every sign pattern. Exponential; kept as the
/// reference the search is tested against.
pub fn tilde_norm_exhaustive(cs: &ConstraintSet) -> Result<TildeNormResult> {
    let problem = Problem::new(cs)?;
    let k = problem.b.len();
    if k > 24 {
        return Err(Error::Unsupported(format!(
            "exhaustive enumeration over {k} constraints"
        )));
    }
    if k == 0 {
        return problem.finish(Some(Leaf::origin(problem.dim)), 1, TildeStatus::Optimal);
    }
    let mut best: Option<Leaf> = None;
    let mut explored = 0;
    // Bit j (from the top) of `mask` is the sign of support entry j + 1;
    // counting upward visits patterns in lexicographic order.
    for mask in 0..(1_usize << (k - 1)) {
        let mut signs = vec![1_i8];
        for j in (0..k - 1).rev() {
            signs.push(if mask >> j & 1 == 1 { 1 } else { -1 });
        }
        explored += 1;
        if let Some(y) = problem.solve(&signs)? {
            let value = y.norm();
            if best.as_ref().is_none_or(|b| value < b.value - tie_tol(b.value)) {
                best = Some(Leaf { value, signs, y });
            }
        }
    }
    let status = if best.is_some() {
        TildeStatus::Optimal
    } else {
        TildeStatus::Infeasible
    };
    problem.finish(best, explored, status)
}

/// Value of the tilde norm, as used when it backs a ladder level.
pub(crate) fn tilde_value(analysis: &CoeffMatrix, objective: &NormSpec, c: &[f64]) -> Result<f64> {
    let cs = ConstraintSet::from_parts(analysis.clone(), objective.clone(), CoeffVector::new(c.to_vec())?)?;
    let r = tilde_norm(&cs)?;
    match r.status {
        TildeStatus::Infeasible => Err(Error::OutsideDomain("no f satisfies |c_i| <= |g_i(f)|".into())),
        _ => Ok(r.value),
    }
}

fn tie_tol(v: f64) -> f64 {
    1e-10 * (1.0 + v)
}

struct Leaf {
    value: f64,
    signs: Vec<i8>,
    y: DVector<f64>,
}

impl Leaf {
    fn origin(dim: usize) -> Self {
        Leaf {
            value: 0.0,
            signs: Vec::new(),
            y: DVector::zeros(dim),
        }
    }
}

/// Whitened constraints on the support of `c`.
struct Problem {
    qp: EuclideanQp,
    dim: usize,
    m: usize,
    support: Vec<usize>,
    /// `R^{-T} g_i` for each support index.
    w: Vec<DVector<f64>>,
    b: Vec<f64>,
    /// Gershgorin bound on `σ_max²` of the normalized rows `w[k..] / ‖w‖`,
    /// indexed by `k`.
    tail_spread: Vec<f64>,
}

impl Problem {
    fn new(cs: &ConstraintSet) -> Result<Self> {
        let dim = cs.analysis.cols();
        let qp = EuclideanQp::new(&cs.objective, dim)?;
        let support: Vec<usize> = (0..cs.c.len()).filter(|&i| cs.c[i] != 0.0).collect();
        let w: Vec<DVector<f64>> = support
            .iter()
            .map(|&i| qp.whiten_functional(cs.analysis.row(i)))
            .collect();
        let b = support.iter().map(|&i| cs.c[i].abs()).collect();
        let units: Vec<DVector<f64>> = w.iter().map(|v| v / v.norm()).collect();
        let k = units.len();
        let gram = DMatrix::from_fn(k, k, |i, j| units[i].dot(&units[j]).abs());
        let tail_spread = (0..k)
            .map(|d| {
                (d..k)
                    .map(|i| (d..k).map(|j| gram[(i, j)]).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .collect();
        Ok(Problem {
            qp,
            dim,
            m: cs.c.len(),
            support,
            w,
            b,
            tail_spread,
        })
    }

    /// Lower bound on the value of every completion of a partial pattern of
    /// length `depth` whose minimizer is `y`.
    fn lower_bound(&self, depth: usize, y: &DVector<f64>) -> f64 {
        let base = y.norm_squared();
        if depth >= self.b.len() {
            return base.sqrt();
        }
        let mut single = 0.0_f64;
        let mut total = 0.0_f64;
        for k in depth..self.b.len() {
            let gap = (self.b[k] - self.w[k].dot(y).abs()).max(0.0) / self.w[k].norm();
            total += gap * gap;
            single = single.max(gap * gap);
        }
        let joint = total / self.tail_spread[depth];
        // Slightly loosened so rounding never prunes a true optimum.
        ((base + single.max(joint)) * (1.0 - 1e-12)).sqrt()
    }

    /// Least-norm point for the constraints fixed by `signs`, or `None`
    /// when they are inconsistent.
    fn solve(&self, signs: &[i8]) -> Result<Option<DVector<f64>>> {
        let mut cons: Vec<Halfspace> = Vec::with_capacity(signs.len());
        for (k, &s) in signs.iter().enumerate() {
            match normalize(&self.w[k] * f64::from(s), self.b[k], false) {
                Ok(Some(h)) => cons.push(h),
                Ok(None) => {}
                Err(SolveError::Infeasible) => return Ok(None),
                Err(e) => return Err(e.into()),
            }
        }
        match project_origin(&cons, self.dim) {
            Ok(y) => Ok(Some(y)),
            Err(SolveError::Infeasible) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn satisfied(&self, k: usize, sign: i8, y: &DVector<f64>) -> bool {
        f64::from(sign) * self.w[k].dot(y) >= self.b[k] - 1e-12 * self.b[k].max(1.0)
    }

    fn finish(&self, best: Option<Leaf>, explored: usize, status: TildeStatus) -> Result<TildeNormResult> {
        let mut pattern = vec![0_i8; self.m];
        let Some(leaf) = best else {
            return Ok(TildeNormResult {
                value: f64::INFINITY,
                minimizer: None,
                sign_pattern: pattern,
                branches_explored: explored,
                status,
            });
        };
        for (k, &i) in self.support.iter().enumerate() {
            pattern[i] = leaf.signs[k];
        }
        let f = self.qp.unwhiten(&leaf.y);
        Ok(TildeNormResult {
            value: leaf.value,
            minimizer: Some(CoeffVector::new(f.as_slice().to_vec())?),
            sign_pattern: pattern,
            branches_explored: explored,
            status,
        })
    }
}

struct Search<'a> {
    p: &'a Problem,
    best: Option<Leaf>,
    nodes: usize,
    cap: Option<usize>,
    capped: bool,
}

impl Search<'_> {
    fn run(&mut self) -> Result<()> {
        if self.p.b.is_empty() {
            self.best = Some(Leaf::origin(self.p.dim));
            self.nodes = 1;
            return Ok(());
        }
        self.dive()?;
        let mut signs = Vec::with_capacity(self.p.b.len());
        self.dfs(&mut signs, DVector::zeros(self.p.dim))
    }

    /// Greedy incumbent: keep whichever sign the current point already
    /// favours.
    fn dive(&mut self) -> Result<()> {
        let mut signs: Vec<i8> = Vec::new();
        let mut y = DVector::zeros(self.p.dim);
        for k in 0..self.p.b.len() {
            let sign = if k == 0 || self.p.w[k].dot(&y) > 0.0 { 1 } else { -1 };
            signs.push(sign);
            if !self.p.satisfied(k, sign, &y) {
                self.nodes += 1;
                match self.p.solve(&signs)? {
                    Some(next) => y = next,
                    None => return Ok(()),
                }
            }
        }
        self.best = Some(Leaf {
            value: y.norm(),
            signs,
            y,
        });
        Ok(())
    }

    fn dfs(&mut self, signs: &mut Vec<i8>, y: DVector<f64>) -> Result<()> {
        let value = y.norm();
        let depth = signs.len();
        if let Some(b) = &self.best {
            let tol = tie_tol(b.value);
            let bound = self.p.lower_bound(depth, &y);
            if bound > b.value + tol {
                return Ok(());
            }
            if bound >= b.value - tol && signs.as_slice() > &b.signs[..depth] {
                return Ok(());
            }
        }
        if depth == self.p.b.len() {
            let better = self.best.as_ref().is_none_or(|b| {
                let tol = tie_tol(b.value);
                value < b.value - tol || (value <= b.value + tol && *signs < b.signs)
            });
            if better {
                self.best = Some(Leaf {
                    value,
                    signs: signs.clone(),
                    y,
                });
            }
            return Ok(());
        }
        for sign in [-1_i8, 1] {
            if depth == 0 && sign < 0 {
                continue;
            }
            if self.cap.is_some_and(|c| self.nodes >= c) {
                self.capped = true;
                return Ok(());
            }
            signs.push(sign);
            let child = if self.p.satisfied(depth, sign, &y) {
                Some(y.clone())
            } else {
                self.nodes += 1;
                self.p.solve(signs)?
            };
            if let Some(cy) = child {
                self.dfs(signs, cy)?;
            }
            signs.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::shift_functionals;
    use approx::assert_relative_eq;

    fn shift_set(c: &[f64], objective: NormSpec) -> ConstraintSet {
        let n = c.len() - 1;
        ConstraintSet::from_parts(shift_functionals(n), objective, CoeffVector::new(c.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn shift_hand_values() {
        let r = tilde_norm(&shift_set(&[1.0, 0.0, 0.0, 0.0, 0.0], NormSpec::l2())).unwrap();
        assert_eq!(r.status, TildeStatus::Optimal);
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        let f = r.minimizer.unwrap();
        assert_relative_eq!(f[0], 1.0, epsilon = 1e-12);
        assert!(f[1..].iter().all(|x| x.abs() < 1e-12));

        let r = tilde_norm(&shift_set(&[1.0, 1.0, 0.0, 0.0, 0.0], NormSpec::l2())).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        assert_eq!(r.sign_pattern, vec![1, 1, 0, 0, 0]);

        let r = tilde_norm(&shift_set(&[1.0, 0.0, 1.0, 0.0, 0.0], NormSpec::l2())).unwrap();
        assert_relative_eq!(r.value, 2.0_f64.sqrt(), epsilon = 1e-12);
        // (+, −) and (+, +) tie; the smaller pattern wins.
        assert_eq!(r.sign_pattern, vec![1, 0, -1, 0, 0]);
    }

    #[test]
    fn zero_vector_is_free() {
        let r = tilde_norm(&shift_set(&[0.0; 4], NormSpec::l2())).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.sign_pattern, vec![0; 4]);
        assert_eq!(r.status, TildeStatus::Optimal);
    }

    #[test]
    fn identity_frame_reproduces_the_norm() {
        let w = NormSpec::weighted(vec![1.0, 3.0, 5.0]);
        let c = [0.5, -2.0, 1.0];
        let cs = ConstraintSet::from_parts(
            CoeffMatrix::identity(3),
            w.clone(),
            CoeffVector::new(c.to_vec()).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(tilde_norm(&cs).unwrap().value, w.eval(&c).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn search_agrees_with_enumeration() {
        let rows = CoeffMatrix::from_rows(&[
            vec![1.0, 0.5, 0.0],
            vec![0.0, 1.0, -1.0],
            vec![1.0, 1.0, 1.0],
            vec![0.3, -0.2, 1.0],
        ])
        .unwrap();
        for c in [[1.0, 2.0, -1.0, 0.5], [0.0, 1.0, 1.0, 0.0], [3.0, -0.1, 0.2, 2.0]] {
            let cs = ConstraintSet::from_parts(
                rows.clone(),
                NormSpec::weighted(vec![1.0, 2.0, 4.0]),
                CoeffVector::new(c.to_vec()).unwrap(),
            )
            .unwrap();
            let a = tilde_norm(&cs).unwrap();
            let b = tilde_norm_exhaustive(&cs).unwrap();
            assert_relative_eq!(a.value, b.value, epsilon = 1e-10);
            assert_eq!(a.sign_pattern, b.sign_pattern);
            assert!(cs.violation(a.minimizer.unwrap().as_slice()).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn large_support_is_capped_and_labelled() {
        let n = 23;
        let c = vec![1.0; n + 1];
        let cs = shift_set(&c, NormSpec::l2());
        let r = tilde_norm_with(
            &cs,
            TildeOptions {
                branch_limit: 20,
                node_cap: 3,
            },
        )
        .unwrap();
        assert_eq!(r.status, TildeStatus::BestFound);
        assert_relative_eq!(r.value, (n as f64).sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn non_euclidean_objective_rejected() {
        let err = ConstraintSet::from_parts(
            CoeffMatrix::identity(2),
            NormSpec::lp(3.0),
            CoeffVector::new(vec![1.0, 1.0]).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }
}
