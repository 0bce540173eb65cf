use std::fmt;

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The solver lost track of feasibility and could not recover.
    NumericalFailure,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration-limit",
            Status::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

/// Position of a variable relative to the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Basis statuses for every structural variable followed by one logical per constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub structural: Vec<BasisStatus>,
    pub logical: Vec<BasisStatus>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: Status,
    /// Objective value (including the constant); NaN unless optimal.
    pub objective: f64,
    /// Variable values; empty unless optimal.
    pub values: Vec<f64>,
    /// Row duals `y` with reduced costs `c - Aᵀy`; empty unless optimal or not available.
    pub duals: Vec<f64>,
    /// Largest constraint or bound violation of `values`.
    pub max_primal_residual: f64,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

impl LpSolution {
    pub fn failed(status: Status, iterations: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            duals: Vec::new(),
            max_primal_residual: f64::NAN,
            iterations,
            basis: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}
