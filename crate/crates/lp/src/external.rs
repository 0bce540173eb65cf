//! File-based bridge to an external LP solver.
//!
//! The problem is written in LP text format to a temporary directory and a user-supplied
//! command is run with `{lp}` and `{sol}` replaced by the input and output paths. The
//! command must write a solution file of whitespace-separated lines:
//!
//! ```text
//! status optimal
//! objective 12.5
//! x_1 3
//! x_2 0.25
//! ```
//!
//! `status` takes the values of [`Status`]'s display form. Variables are named as in the
//! written LP file and omitted ones default to zero. Lines starting with `#` are ignored.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use crate::lpformat::{exported_var_names, write_lp};
use crate::problem::LpProblem;
use crate::solution::{LpSolution, Status};
use crate::LpError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    /// Program to run.
    pub program: String,
    /// Arguments; `{lp}` and `{sol}` are substituted.
    pub args: Vec<String>,
}

impl ExternalSolver {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
        }
    }

    pub fn solve(&self, problem: &LpProblem) -> Result<LpSolution, LpError> {
        let dir = tempfile::tempdir().map_err(|source| LpError::Io {
            path: std::env::temp_dir(),
            source,
        })?;
        let lp_path = dir.path().join("problem.lp");
        let sol_path = dir.path().join("solution.txt");
        std::fs::write(&lp_path, write_lp(problem)).map_err(|source| LpError::Io {
            path: lp_path.clone(),
            source,
        })?;
        let subst = |a: &String| {
            a.replace("{lp}", &lp_path.to_string_lossy())
                .replace("{sol}", &sol_path.to_string_lossy())
        };
        let output = Command::new(&self.program)
            .args(self.args.iter().map(subst))
            .output()
            .map_err(|e| LpError::External(format!("could not run {}: {e}", self.program)))?;
        if !output.status.success() {
            return Err(LpError::External(format!(
                "{} exited with {}: {}",
                self.program,
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        read_solution(problem, &sol_path)
    }
}

fn read_solution(problem: &LpProblem, path: &Path) -> Result<LpSolution, LpError> {
    let text = std::fs::read_to_string(path).map_err(|source| LpError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_solution(problem, &text)
}

pub(crate) fn parse_solution(problem: &LpProblem, text: &str) -> Result<LpSolution, LpError> {
    let names = exported_var_names(problem);
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut status = None;
    let mut values = vec![0.0; problem.num_vars()];
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(key), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(LpError::External(format!(
                "solution line {}: expected `name value`",
                k + 1
            )));
        };
        match key {
            "status" => {
                status = Some(match val {
                    "optimal" => Status::Optimal,
                    "infeasible" => Status::Infeasible,
                    "unbounded" => Status::Unbounded,
                    "iteration-limit" => Status::IterationLimit,
                    "numerical-failure" => Status::NumericalFailure,
                    other => return Err(LpError::External(format!("unknown status {other}"))),
                })
            }
            // Recomputed from the values so the constant is included consistently.
            "objective" => {}
            name => {
                let &i = index
                    .get(name)
                    .ok_or_else(|| LpError::External(format!("unknown variable {name}")))?;
                values[i] = val
                    .parse()
                    .map_err(|_| LpError::External(format!("bad value for {name}: {val}")))?;
            }
        }
    }
    let status = status.ok_or_else(|| LpError::External("solution file has no status".into()))?;
    if status != Status::Optimal {
        return Ok(LpSolution::failed(status, 0));
    }
    Ok(LpSolution {
        status,
        objective: problem.evaluate_objective(&values),
        max_primal_residual: problem.max_violation(&values),
        values,
        duals: Vec::new(),
        iterations: 0,
        basis: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Relation;

    fn tiny() -> LpProblem {
        let mut lp = LpProblem::new("tiny");
        let x = lp.add_nonneg("x");
        let y = lp.add_nonneg("y");
        lp.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 2.0);
        lp.set_objective(vec![(x, 1.0), (y, 3.0)], 1.0);
        lp
    }

    #[test]
    fn parses_solution_file() {
        let s = parse_solution(&tiny(), "# comment\nstatus optimal\nobjective 3\nx 2\n").unwrap();
        assert!(s.is_optimal());
        assert_eq!(s.values, vec![2.0, 0.0]);
        assert_eq!(s.objective, 3.0);
        assert_eq!(s.max_primal_residual, 0.0);
    }

    #[test]
    fn non_optimal_status_has_no_values() {
        let s = parse_solution(&tiny(), "status infeasible\n").unwrap();
        assert_eq!(s.status, Status::Infeasible);
        assert!(s.values.is_empty());
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(parse_solution(&tiny(), "status optimal\nq 1\n").is_err());
        assert!(parse_solution(&tiny(), "x 1\n").is_err());
    }

    #[cfg(unix)]
    #[test]
    fn runs_a_shell_command() {
        let solver = ExternalSolver::new(
            "sh",
            vec![
                "-c".into(),
                "test -s \"$0\" && printf 'status optimal\\nx 2\\n' > \"$1\"".into(),
                "{lp}".into(),
                "{sol}".into(),
            ],
        );
        let s = solver.solve(&tiny()).unwrap();
        assert_eq!(s.objective, 3.0);
    }

    #[test]
    fn missing_program_is_an_error() {
        let solver = ExternalSolver::new("definitely-not-a-solver-binary", vec![]);
        assert!(matches!(solver.solve(&tiny()), Err(LpError::External(_))));
    }
}
