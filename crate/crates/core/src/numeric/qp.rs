//! Minimum-norm points of polyhedra under Euclidean-type norms.
//!
//! The objective `‖E f‖₂` is reduced to `‖y‖₂` with `y = R f` (`R` the
//! triangular factor of `E`), and the projection of the origin onto the
//! transformed polyhedron is found with the Goldfarb-Idnani dual active-set
//! method. Starting from the unconstrained minimizer `y = 0`, the method
//! adds violated constraints one at a time and drops active inequalities
//! whose multipliers would turn negative, so no feasible starting point is
//! required and an empty feasible region is detected exactly when a
//! violated constraint is linearly dependent on the active set with no
//! droppable partner.
//!
//! Exactly parallel constraints are merged into one interval per normal
//! first, and the final point is recomputed from the active set. Normals
//! that are nearly but not exactly dependent can still defeat the method;
//! that surfaces as `Degenerate` or `NonConvergence`, never as an
//! infeasible answer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{linalg, CoeffVector, NormSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("feasible region is empty")]
    Infeasible,
    #[error("active-set iteration did not converge after {0} steps")]
    NonConvergence(usize),
    /// Nearly parallel active constraints left the iterate off their
    /// boundary; the least-norm point is too ill-conditioned to trust.
    #[error("nearly dependent constraints: active residual {0:e}")]
    Degenerate(f64),
    #[error("objective is not Euclidean: {0}")]
    InvalidObjective(String),
    #[error("constraint has {got} coefficients, expected {expected}")]
    BadConstraint { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Eq,
    Ge,
    Le,
}

/// `coeffs · f (kind) rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineConstraint {
    pub coeffs: Vec<f64>,
    pub kind: ConstraintKind,
    pub rhs: f64,
}

impl AffineConstraint {
    pub fn ge(coeffs: Vec<f64>, rhs: f64) -> Self {
        AffineConstraint {
            coeffs,
            kind: ConstraintKind::Ge,
            rhs,
        }
    }

    pub fn le(coeffs: Vec<f64>, rhs: f64) -> Self {
        AffineConstraint {
            coeffs,
            kind: ConstraintKind::Le,
            rhs,
        }
    }

    pub fn eq(coeffs: Vec<f64>, rhs: f64) -> Self {
        AffineConstraint {
            coeffs,
            kind: ConstraintKind::Eq,
            rhs,
        }
    }

    /// Amount by which `f` violates the constraint (0 when satisfied).
    pub fn violation(&self, f: &[f64]) -> f64 {
        let s = super::dot(&self.coeffs, f) - self.rhs;
        match self.kind {
            ConstraintKind::Eq => s.abs(),
            ConstraintKind::Ge => (-s).max(0.0),
            ConstraintKind::Le => s.max(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeastNormSolution {
    pub point: CoeffVector,
    pub value: f64,
    pub max_violation: f64,
}

/// Minimize `objective(f)` subject to `constraints`.
///
/// `objective` must be Euclidean (`Lp { p: 2 }`, `WeightedL2`, or
/// `MatrixInduced` over one of those with full column rank).
pub fn least_norm_solve(
    constraints: &[AffineConstraint],
    objective: &NormSpec,
    dim: usize,
) -> Result<LeastNormSolution, SolveError> {
    EuclideanQp::new(objective, dim)?.solve(constraints)
}

/// A Euclidean objective prepared for repeated solves.
#[derive(Clone, Debug)]
pub struct EuclideanQp {
    dim: usize,
    r: DMatrix<f64>,
    objective: NormSpec,
}

/// Constraint `n · y ≥ b` in whitened coordinates with `‖n‖ = 1`.
#[derive(Clone, Debug)]
pub(crate) struct Halfspace {
    pub n: DVector<f64>,
    pub b: f64,
    pub eq: bool,
}

impl EuclideanQp {
    pub fn new(objective: &NormSpec, dim: usize) -> Result<Self, SolveError> {
        let e = objective
            .euclidean_factor(dim)
            .ok_or_else(|| SolveError::InvalidObjective(format!("{objective:?} has no Euclidean factor")))?;
        let r = linalg::upper_factor(&e)
            .ok_or_else(|| SolveError::InvalidObjective("Euclidean factor is rank deficient".into()))?;
        Ok(EuclideanQp {
            dim,
            r,
            objective: objective.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R^{-T} a`: a functional on `f` expressed on whitened `y = R f`.
    pub(crate) fn whiten_functional(&self, a: &[f64]) -> DVector<f64> {
        self.r
            .transpose()
            .solve_lower_triangular(&DVector::from_column_slice(a))
            .expect("upper factor has a nonzero diagonal")
    }

    pub(crate) fn unwhiten(&self, y: &DVector<f64>) -> DVector<f64> {
        self.r
            .solve_upper_triangular(y)
            .expect("upper factor has a nonzero diagonal")
    }

    pub fn solve(&self, constraints: &[AffineConstraint]) -> Result<LeastNormSolution, SolveError> {
        let mut cons = Vec::with_capacity(constraints.len());
        for c in constraints {
            if c.coeffs.len() != self.dim {
                return Err(SolveError::BadConstraint {
                    expected: self.dim,
                    got: c.coeffs.len(),
                });
            }
            let (sign, eq) = match c.kind {
                ConstraintKind::Ge => (1.0, false),
                ConstraintKind::Le => (-1.0, false),
                ConstraintKind::Eq => (1.0, true),
            };
            let n = self.whiten_functional(&c.coeffs) * sign;
            if let Some(h) = normalize(n, sign * c.rhs, eq)? {
                cons.push(h);
            }
        }
        let y = project_origin(&cons, self.dim)?;
        let f = self.unwhiten(&y);
        let point = CoeffVector::new(f.as_slice().to_vec()).map_err(|_| SolveError::NonConvergence(0))?;
        let max_violation = constraints
            .iter()
            .map(|c| c.violation(point.as_slice()))
            .fold(0.0, f64::max);
        let value = self
            .objective
            .eval(point.as_slice())
            .map_err(|e| SolveError::InvalidObjective(e.to_string()))?;
        Ok(LeastNormSolution {
            point,
            value,
            max_violation,
        })
    }
}

/// Scale a whitened constraint to a unit normal; `None` when it is vacuous.
pub(crate) fn normalize(n: DVector<f64>, b: f64, eq: bool) -> Result<Option<Halfspace>, SolveError> {
    let len = n.norm();
    if len <= 1e-300 {
        let ok = if eq { b.abs() <= 1e-12 } else { b <= 1e-12 };
        return if ok { Ok(None) } else { Err(SolveError::Infeasible) };
    }
    Ok(Some(Halfspace {
        n: n / len,
        b: b / len,
        eq,
    }))
}

/// Unit normals closer than this (up to sign) count as parallel.
const PARALLEL: f64 = 1e-12;

fn parallel(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    let sign = a.dot(b).signum();
    a.iter().zip(b.iter()).all(|(x, y)| (x - sign * y).abs() <= PARALLEL)
}

/// Replaces each family of parallel constraints by the interval it imposes
/// on `n · y`, so the active-set loop never meets dependent normals it
/// could have avoided. Returns `Infeasible` for an empty interval.
fn merge_parallel(cons: &[Halfspace]) -> Result<Vec<Halfspace>, SolveError> {
    // (normal, lower, upper) on `n · y`.
    let mut groups: Vec<(DVector<f64>, f64, f64)> = Vec::new();
    for c in cons {
        let slot = groups.iter().position(|(n, _, _)| parallel(n, &c.n));
        let (n, lo, hi) = match slot {
            Some(i) => &mut groups[i],
            None => {
                groups.push((c.n.clone(), f64::NEG_INFINITY, f64::INFINITY));
                groups.last_mut().expect("just pushed")
            }
        };
        let sign = n.dot(&c.n).signum();
        let at = sign * c.b;
        if c.eq {
            *lo = lo.max(at);
            *hi = hi.min(at);
        } else if sign > 0.0 {
            *lo = lo.max(at);
        } else {
            *hi = hi.min(at);
        }
    }
    let mut out = Vec::with_capacity(cons.len());
    for (n, lo, hi) in groups {
        let scale = 1.0
            + [lo, hi]
                .iter()
                .filter(|v| v.is_finite())
                .fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale;
        if lo > hi + tol {
            return Err(SolveError::Infeasible);
        }
        if hi - lo <= tol {
            out.push(Halfspace {
                n,
                b: 0.5 * (lo + hi),
                eq: true,
            });
            continue;
        }
        if hi.is_finite() {
            out.push(Halfspace {
                n: -&n,
                b: -hi,
                eq: false,
            });
        }
        if lo.is_finite() {
            out.push(Halfspace { n, b: lo, eq: false });
        }
    }
    Ok(out)
}

/// Goldfarb-Idnani for `min ½‖y‖²` over the given half-spaces. Projections
/// onto the active normals go through a QR factorization.
pub(crate) fn project_origin(cons: &[Halfspace], dim: usize) -> Result<DVector<f64>, SolveError> {
    let cons = merge_parallel(cons)?;
    let mut y = DVector::zeros(dim);
    let mut active: Vec<usize> = Vec::new();
    let mut normals: Vec<DVector<f64>> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();
    // Signed right-hand sides of the active constraints.
    let mut targets: Vec<f64> = Vec::new();
    let mut polished = false;
    let max_iter = 50 * (cons.len() + dim) + 100;
    let mut iter = 0;

    loop {
        // Most violated inactive constraint.
        let scale = 1.0 + y.norm();
        let mut pick: Option<(usize, f64, f64)> = None;
        for (j, c) in cons.iter().enumerate() {
            if active.contains(&j) {
                continue;
            }
            let s = c.n.dot(&y) - c.b;
            let (viol, sign) = if c.eq {
                (s.abs(), if s > 0.0 { -1.0 } else { 1.0 })
            } else {
                (-s, 1.0)
            };
            let tol = 1e-12 * (scale + c.b.abs());
            if viol > tol && pick.is_none_or(|(_, v, _)| viol > v) {
                pick = Some((j, viol, sign));
            }
        }
        let Some((p, _, sign)) = pick else {
            if !polished && !normals.is_empty() {
                // The incremental steps accumulate rounding; recompute the
                // point from the final active set and re-check everything.
                polished = true;
                let qr = DMatrix::from_columns(&normals).qr();
                let rhs = DVector::from_column_slice(&targets);
                if let Some(u) = qr.r().transpose().solve_lower_triangular(&rhs) {
                    y = qr.q() * u;
                }
                continue;
            }
            let drift = normals
                .iter()
                .zip(&targets)
                .map(|(n, b)| (n.dot(&y) - b).abs() / (scale + b.abs()))
                .fold(0.0, f64::max);
            return if drift <= 1e-9 {
                Ok(y)
            } else {
                Err(SolveError::Degenerate(drift))
            };
        };
        polished = false;
        let np = &cons[p].n * sign;
        let bp = cons[p].b * sign;
        let mut up = 0.0;

        loop {
            iter += 1;
            if iter > max_iter {
                return Err(SolveError::NonConvergence(iter));
            }
            let (z, r) = if normals.is_empty() {
                (np.clone(), Vec::new())
            } else {
                let qr = DMatrix::from_columns(&normals).qr();
                let q = qr.q();
                let qtn = q.transpose() * &np;
                let r = qr
                    .r()
                    .solve_upper_triangular(&qtn)
                    .ok_or(SolveError::NonConvergence(iter))?;
                (&np - &q * &qtn, r.as_slice().to_vec())
            };

            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (k, &rk) in r.iter().enumerate() {
                if !cons[active[k]].eq && rk > 1e-14 {
                    let t = mult[k] / rk;
                    if t < t1 {
                        t1 = t;
                        drop = Some(k);
                    }
                }
            }
            let s = np.dot(&y) - bp;
            // Normals are unit length, so a tiny z means `np` lies in the
            // active span up to rounding; a primal step would be garbage.
            let t2 = if z.norm() > 1e-10 {
                (-s / z.norm_squared()).max(0.0)
            } else {
                f64::INFINITY
            };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(SolveError::Infeasible);
            }
            for (k, rk) in r.iter().enumerate() {
                mult[k] -= t * rk;
            }
            up += t;
            if t2.is_finite() {
                y += &z * t;
            }
            if t2 <= t1 {
                active.push(p);
                normals.push(np);
                targets.push(bp);
                mult.push(up);
                break;
            }
            let k = drop.expect("t1 finite implies a drop candidate");
            active.remove(k);
            normals.remove(k);
            targets.remove(k);
            mult.remove(k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(n: usize, i: usize) -> Vec<f64> {
        CoeffVector::canonical(n, i).into_inner()
    }

    #[test]
    fn single_halfspace() {
        let sol = least_norm_solve(&[AffineConstraint::ge(e(3, 0), 1.0)], &NormSpec::l2(), 3).unwrap();
        assert_abs_diff_eq!(sol.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.point[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.point[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_halfspaces() {
        let cons = [AffineConstraint::ge(e(3, 0), 1.0), AffineConstraint::ge(e(3, 1), 1.0)];
        let sol = least_norm_solve(&cons, &NormSpec::l2(), 3).unwrap();
        assert_abs_diff_eq!(sol.value, 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn weighted_objective_matches_lagrange_solution() {
        // min f1² + 4 f2² s.t. f1 + f2 ≥ 2  →  f = (8/5, 2/5).
        let cons = [AffineConstraint::ge(vec![1.0, 1.0], 2.0)];
        let sol = least_norm_solve(&cons, &NormSpec::weighted(vec![1.0, 2.0]), 2).unwrap();
        assert_abs_diff_eq!(sol.point[0], 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.point[1], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.value, (3.2_f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn infeasible_is_distinct() {
        let cons = [
            AffineConstraint::ge(vec![1.0, 0.0], 1.0),
            AffineConstraint::le(vec![1.0, 0.0], -1.0),
        ];
        assert_eq!(
            least_norm_solve(&cons, &NormSpec::l2(), 2).unwrap_err(),
            SolveError::Infeasible
        );
        let cons = [AffineConstraint::ge(vec![0.0, 0.0], 1.0)];
        assert_eq!(
            least_norm_solve(&cons, &NormSpec::l2(), 2).unwrap_err(),
            SolveError::Infeasible
        );
    }

    #[test]
    fn equalities_and_drops() {
        // f1 + f2 = 2, f1 ≥ 3  →  (3, -1).
        let cons = [
            AffineConstraint::eq(vec![1.0, 1.0], 2.0),
            AffineConstraint::ge(vec![1.0, 0.0], 3.0),
        ];
        let sol = least_norm_solve(&cons, &NormSpec::l2(), 2).unwrap();
        assert_abs_diff_eq!(sol.point[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.point[1], -1.0, epsilon = 1e-12);

        // A constraint that becomes inactive once a stronger one is added.
        let cons = [
            AffineConstraint::ge(vec![1.0, 1.0], 1.0),
            AffineConstraint::ge(vec![1.0, 0.0], 2.0),
        ];
        let sol = least_norm_solve(&cons, &NormSpec::l2(), 2).unwrap();
        assert_abs_diff_eq!(sol.point[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.point[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_euclidean_objective_rejected() {
        let err = least_norm_solve(&[], &NormSpec::Sup, 2).unwrap_err();
        assert!(matches!(err, SolveError::InvalidObjective(_)));
    }

    #[test]
    fn parallel_constraints_merge() {
        // The same half-space three times, once scaled: one active constraint.
        let cons = [
            AffineConstraint::ge(vec![1.0, 1.0], 1.0),
            AffineConstraint::ge(vec![2.0, 2.0], 2.0),
            AffineConstraint::ge(vec![1.0, 1.0], 0.5),
        ];
        let sol = least_norm_solve(&cons, &NormSpec::l2(), 2).unwrap();
        assert_abs_diff_eq!(sol.point[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.point[1], 0.5, epsilon = 1e-15);
        // Opposite half-spaces meeting in a line act as an equality.
        let cons = [
            AffineConstraint::ge(vec![0.0, 3.0], 3.0),
            AffineConstraint::le(vec![0.0, 1.0], 1.0),
            AffineConstraint::ge(vec![1.0, 0.0], 2.0),
        ];
        let sol = least_norm_solve(&cons, &NormSpec::l2(), 2).unwrap();
        assert_abs_diff_eq!(sol.point[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.point[1], 1.0, epsilon = 1e-15);
        // A slab with lower end above its upper end is empty.
        let cons = [
            AffineConstraint::ge(vec![1.0, 0.0], 1.0),
            AffineConstraint::le(vec![2.0, 0.0], 1.0),
        ];
        assert_eq!(
            least_norm_solve(&cons, &NormSpec::l2(), 2).unwrap_err(),
            SolveError::Infeasible
        );
    }

    #[test]
    fn nearly_dependent_constraints_stay_feasible() {
        // Two almost identical normals with different offsets: only the
        // stricter one binds, and the answer must satisfy both.
        let d = 1e-7;
        let cons = [
            AffineConstraint::ge(vec![1.0, 0.0, 0.0], 1.0),
            AffineConstraint::ge(vec![1.0, d, 0.0], 1.2),
            AffineConstraint::ge(vec![0.0, 0.0, 1.0], 0.5),
        ];
        let sol = least_norm_solve(&cons, &NormSpec::l2(), 3).unwrap();
        assert!(sol.max_violation <= 1e-12);
        assert_abs_diff_eq!(sol.point[0], 1.2, epsilon = 1e-6);
    }
}
