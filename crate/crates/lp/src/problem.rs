//! Solver-agnostic linear program representation.
//!
//! An [`LpProblem`] is always a minimization. Variables carry box bounds, constraints are
//! sparse linear forms compared against a right-hand side.

use std::fmt;

use crate::LpError;

/// Index of a variable inside an [`LpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Comparison between a linear form and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    /// Evaluate the linear form at `x`.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Amount by which `x` violates this constraint (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Eq => (lhs - self.rhs).abs(),
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
        }
    }
}

/// A linear program `min c·x + c0` subject to sparse constraints and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub name: String,
    vars: Vec<Variable>,
    objective: Vec<(VarId, f64)>,
    objective_constant: f64,
    constraints: Vec<Constraint>,
}

impl LpProblem {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Add a variable with bounds `[lower, upper]`. Use `f64::INFINITY` for no upper bound.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        id
    }

    /// Add a nonnegative variable without upper bound.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, f64::INFINITY)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    /// Replace the objective by `Σ coef·var + constant`.
    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>, constant: f64) {
        self.objective = terms;
        self.objective_constant = constant;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_terms(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.terms.len()).sum()
    }

    /// Dense objective coefficient vector (duplicate terms are summed).
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.vars.len()];
        for &(v, a) in &self.objective {
            c[v.0] += a;
        }
        c
    }

    pub fn evaluate_objective(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(v, a)| a * x[v.0]).sum::<f64>()
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let bounds = self
            .vars
            .iter()
            .zip(x)
            .map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Check that every coefficient references a declared variable and that all data is
    /// finite (bounds may be infinite in the natural direction).
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.vars.len();
        for v in &self.vars {
            let malformed = v.lower.is_nan()
                || v.upper.is_nan()
                || v.lower == f64::INFINITY
                || v.upper == f64::NEG_INFINITY;
            if malformed || v.lower > v.upper {
                return Err(LpError::InvalidBounds {
                    var: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        for &(v, a) in &self.objective {
            if v.0 >= n {
                return Err(LpError::UnknownVariable {
                    location: "objective".into(),
                    index: v.0,
                });
            }
            if !a.is_finite() {
                return Err(LpError::NonFinite {
                    location: format!("objective coefficient of {}", self.vars[v.0].name),
                });
            }
        }
        if !self.objective_constant.is_finite() {
            return Err(LpError::NonFinite {
                location: "objective constant".into(),
            });
        }
        for c in &self.constraints {
            for &(v, a) in &c.terms {
                if v.0 >= n {
                    return Err(LpError::UnknownVariable {
                        location: format!("constraint {}", c.name),
                        index: v.0,
                    });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite {
                        location: format!(
                            "constraint {} coefficient of {}",
                            c.name, self.vars[v.0].name
                        ),
                    });
                }
            }
            if !c.rhs.is_finite() {
                return Err(LpError::NonFinite {
                    location: format!("right-hand side of {}", c.name),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_variable() {
        let mut lp = LpProblem::new("bad");
        let x = lp.add_nonneg("x");
        lp.add_constraint("c", vec![(x, 1.0), (VarId(7), 1.0)], Relation::Le, 1.0);
        assert!(matches!(
            lp.validate(),
            Err(LpError::UnknownVariable { index: 7, .. })
        ));
    }

    #[test]
    fn rejects_nan_coefficient() {
        let mut lp = LpProblem::new("bad");
        let x = lp.add_nonneg("x");
        lp.add_constraint("c", vec![(x, f64::NAN)], Relation::Le, 1.0);
        assert!(matches!(lp.validate(), Err(LpError::NonFinite { .. })));
        let mut lp = LpProblem::new("bad");
        let x = lp.add_nonneg("x");
        lp.set_objective(vec![(x, f64::INFINITY)], 0.0);
        assert!(lp.validate().is_err());
    }

    #[test]
    fn rejects_crossed_bounds() {
        let mut lp = LpProblem::new("bad");
        lp.add_var("x", 2.0, 1.0);
        assert!(matches!(lp.validate(), Err(LpError::InvalidBounds { .. })));
    }

    #[test]
    fn violation_measures() {
        let mut lp = LpProblem::new("v");
        let x = lp.add_nonneg("x");
        lp.add_constraint("le", vec![(x, 1.0)], Relation::Le, 1.0);
        lp.add_constraint("ge", vec![(x, 1.0)], Relation::Ge, 3.0);
        assert_eq!(lp.max_violation(&[2.0]), 1.0);
        assert_eq!(lp.max_violation(&[-1.0]), 4.0);
    }
}
