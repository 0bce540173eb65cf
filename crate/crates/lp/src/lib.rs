//! Linear programming layer.
//!
//! [`LpProblem`] is a solver-agnostic minimization model. [`solve`] dispatches it to the
//! built-in sparse revised simplex ([`Backend::Reference`]) or to an external program that
//! exchanges LP text files ([`Backend::External`]). [`solve_lexicographic`] runs the
//! two-stage "optimize, then optimize a secondary objective at that optimum" pattern.

mod certificate;
mod external;
pub mod lpformat;
mod lu;
mod problem;
mod simplex;
mod solution;

use std::path::PathBuf;

pub use certificate::{dual_certificate, DualCertificate};
pub use external::ExternalSolver;
pub use problem::{Constraint, LpProblem, Relation, VarId, Variable};
pub use solution::{Basis, BasisStatus, LpSolution, Status};

/// Errors raised before or around a solve. Solver outcomes such as infeasibility are
/// reported through [`Status`], not through this type.
#[derive(Debug, thiserror::Error)]
pub enum LpError {
    /// A variable has NaN bounds, an upper bound of `-∞`, a lower bound of `+∞`, or
    /// `lower > upper`.
    #[error("variable {var} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: String, lower: f64, upper: f64 },

    /// A coefficient references a variable index that was never declared.
    #[error("{location} references undeclared variable index {index}")]
    UnknownVariable { location: String, index: usize },

    /// A coefficient or right-hand side is NaN or infinite.
    #[error("non-finite value in {location}")]
    NonFinite { location: String },

    /// The secondary objective of a lexicographic solve has a different variable count.
    #[error("secondary objective references variable {index} but the problem has {num_vars}")]
    SecondaryMismatch { index: usize, num_vars: usize },

    /// The first stage of a lexicographic solve did not reach optimality.
    #[error("primary stage ended with status {0}")]
    PrimaryNotOptimal(Status),

    /// LP text could not be parsed.
    #[error("LP format error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The external solver could not be run or produced unusable output.
    #[error("external solver: {0}")]
    External(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which solver handles [`solve`] calls.
#[derive(Debug, Clone, Default)]
pub enum Backend {
    #[default]
    Reference,
    External(ExternalSolver),
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Reference => "reference",
            Backend::External(_) => "external",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Allowed bound and row violation of a basic solution.
    pub primal_tolerance: f64,
    /// Reduced-cost threshold below which a nonbasic variable is considered non-improving.
    pub optimality_tolerance: f64,
    /// Pivot budget; `None` means `50·(rows + columns) + 10000`.
    pub max_iterations: Option<usize>,
    /// Number of eta updates after which the basis is refactorized.
    pub refactor_interval: usize,
    pub backend: Backend,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            primal_tolerance: 1e-9,
            optimality_tolerance: 1e-7,
            max_iterations: None,
            refactor_interval: 100,
            backend: Backend::Reference,
        }
    }
}

/// Relative slack applied to the primary optimum in the second lexicographic stage.
pub const DEFAULT_LEXICOGRAPHIC_SLACK: f64 = 1e-9;

/// Solve `problem` to optimality or report why not.
///
/// Malformed problems are rejected with an error before any solver runs.
pub fn solve(problem: &LpProblem, options: &SolveOptions) -> Result<LpSolution, LpError> {
    solve_warm(problem, options, None)
}

/// Like [`solve`], starting the reference solver from `warm` when it fits the problem.
/// External backends ignore the basis.
pub fn solve_warm(
    problem: &LpProblem,
    options: &SolveOptions,
    warm: Option<&Basis>,
) -> Result<LpSolution, LpError> {
    problem.validate()?;
    match &options.backend {
        Backend::Reference => Ok(simplex::Simplex::new(problem, options, warm).run(problem)),
        Backend::External(ext) => ext.solve(problem),
    }
}

/// Solve `primary`, then minimize `secondary` subject to the primary objective staying
/// within `optimum + slack·max(1, |optimum|)`.
///
/// The returned solution's `objective` is the secondary objective value. A secondary
/// objective that is identically zero returns the primary solution unchanged.
pub fn solve_lexicographic(
    primary: &LpProblem,
    secondary: &[(VarId, f64)],
    slack: f64,
    options: &SolveOptions,
) -> Result<LexicographicSolution, LpError> {
    let n = primary.num_vars();
    if let Some(&(v, _)) = secondary.iter().find(|(v, _)| v.0 >= n) {
        return Err(LpError::SecondaryMismatch {
            index: v.0,
            num_vars: n,
        });
    }
    let first = solve(primary, options)?;
    if !first.is_optimal() {
        return Err(LpError::PrimaryNotOptimal(first.status));
    }
    let primary_optimum = first.objective;
    if secondary.iter().all(|&(_, a)| a == 0.0) {
        return Ok(LexicographicSolution {
            primary_optimum,
            secondary_objective: 0.0,
            solution: first,
        });
    }

    let mut stage2 = primary.clone();
    let cap = primary_optimum + slack * primary_optimum.abs().max(1.0);
    stage2.add_constraint(
        "primary_cap",
        primary.objective_terms().to_vec(),
        Relation::Le,
        cap - primary.objective_constant(),
    );
    stage2.set_objective(secondary.to_vec(), 0.0);

    // The primary basis plus the new row's logical is a valid starting basis.
    let warm = first.basis.as_ref().map(|b| {
        let mut b = b.clone();
        b.logical.push(BasisStatus::Basic);
        b
    });
    let second = solve_warm(&stage2, options, warm.as_ref())?;
    Ok(LexicographicSolution {
        primary_optimum,
        secondary_objective: second.objective,
        solution: second,
    })
}

/// Outcome of [`solve_lexicographic`].
#[derive(Debug, Clone)]
pub struct LexicographicSolution {
    pub primary_optimum: f64,
    /// Secondary objective at the final solution; NaN if the second stage failed.
    pub secondary_objective: f64,
    /// Final solution. When the second stage runs, its `duals` cover one extra row (the
    /// primary cap) appended after the original constraints.
    pub solution: LpSolution,
}
