//! Dual feasibility certificates for optimal solutions.
//!
//! Given row duals `y`, each column's reduced cost `d_j = c_j − a_jᵀ y` is assigned to the
//! bound it pushes against: positive values to the lower bound, negative ones to the upper
//! bound. The resulting Lagrangian value `bᵀy + Σ d_j·bound_j` is a valid lower bound on the
//! optimum whenever no reduced cost points at an infinite bound and every row dual has the
//! sign its relation allows.

use crate::problem::{LpProblem, Relation};

#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    /// Lagrangian lower bound on the optimum, with infeasible parts dropped.
    pub dual_objective: f64,
    /// Largest reduced cost (or row dual) with the wrong sign for its bound or relation.
    pub max_dual_infeasibility: f64,
    /// `primal_objective − dual_objective`.
    pub gap: f64,
}

/// Build the certificate for `values` and `duals` of `problem`.
///
/// # Panics
/// If `duals` or `values` have the wrong length.
pub fn dual_certificate(problem: &LpProblem, values: &[f64], duals: &[f64]) -> DualCertificate {
    assert_eq!(
        duals.len(),
        problem.num_constraints(),
        "one dual per constraint"
    );
    assert_eq!(values.len(), problem.num_vars(), "one value per variable");

    let mut reduced = problem.objective_dense();
    let mut dual_obj = problem.objective_constant();
    let mut infeas = 0.0f64;
    for (c, &y) in problem.constraints().iter().zip(duals) {
        for &(v, a) in &c.terms {
            reduced[v.0] -= a * y;
        }
        dual_obj += c.rhs * y;
        // Minimization: y ≤ 0 on ≤ rows, y ≥ 0 on ≥ rows.
        let wrong = match c.relation {
            Relation::Le => y.max(0.0),
            Relation::Ge => (-y).max(0.0),
            Relation::Eq => 0.0,
        };
        infeas = infeas.max(wrong);
    }
    for (var, &d) in problem.vars().iter().zip(&reduced) {
        let bound = if d > 0.0 { var.lower } else { var.upper };
        if d == 0.0 {
            continue;
        }
        if bound.is_finite() {
            dual_obj += d * bound;
        } else {
            infeas = infeas.max(d.abs());
        }
    }
    let primal = problem.evaluate_objective(values);
    DualCertificate {
        dual_objective: dual_obj,
        max_dual_infeasibility: infeas,
        gap: primal - dual_obj,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{solve, SolveOptions};

    #[test]
    fn certificate_closes_gap_on_small_lp() {
        // min 2x + 3y s.t. x + y >= 4, x <= 3, y <= 10.
        let mut lp = LpProblem::new("cert");
        let x = lp.add_var("x", 0.0, 3.0);
        let y = lp.add_var("y", 0.0, 10.0);
        lp.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 4.0);
        lp.set_objective(vec![(x, 2.0), (y, 3.0)], 0.0);
        let s = solve(&lp, &SolveOptions::default()).unwrap();
        assert!((s.objective - 9.0).abs() < 1e-9);
        let cert = dual_certificate(&lp, &s.values, &s.duals);
        assert!(cert.max_dual_infeasibility < 1e-9);
        assert!(cert.gap.abs() < 1e-9, "{cert:?}");
    }

    #[test]
    fn wrong_sign_dual_is_flagged() {
        let mut lp = LpProblem::new("sign");
        let x = lp.add_nonneg("x");
        lp.add_constraint("a", vec![(x, 1.0)], Relation::Ge, 1.0);
        lp.set_objective(vec![(x, 1.0)], 0.0);
        let cert = dual_certificate(&lp, &[1.0], &[-2.0]);
        assert!(cert.max_dual_infeasibility >= 2.0);
    }
}
