//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a logical variable `s_i` so that the system reads `A x + s = b` with
//! `s_i ∈ [0, ∞)` for `≤` rows, `(-∞, 0]` for `≥` rows and `[0, 0]` for equalities. The solve
//! starts from the all-logical basis (or a supplied warm basis) and runs a composite phase 1
//! that minimizes the sum of bound infeasibilities of the basic variables, then phase 2 on
//! the true objective. Pricing is Dantzig's rule with a Harris two-pass ratio test; after a
//! run of degenerate pivots the solver switches to Bland's rule until it makes progress.
//!
//! Finite bounds are first widened by tiny deterministic amounts, which breaks the ties
//! that make degenerate vertices stall. Once the widened problem is optimal the exact
//! bounds are restored and the same loop cleans up from the final basis.

use crate::lu::{LuFactors, SparseCol};
use crate::problem::{LpProblem, Relation};
use crate::solution::{Basis, BasisStatus, LpSolution, Status};
use crate::SolveOptions;

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const BLAND_AFTER: usize = 50;
/// Objective change below which a pivot counts as making no progress.
const STALL_PROGRESS: f64 = 1e-11;
/// Relative magnitude of the bound perturbation.
const PERTURBATION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
    Free,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    /// Entering variable moves to its opposite bound; basis unchanged.
    Flip(f64),
    /// Pivot: basic variable at `pos` leaves toward `bound`.
    Pivot {
        theta: f64,
        pos: usize,
        to_upper: bool,
    },
    Unbounded,
}

pub(crate) struct Simplex<'a> {
    opts: &'a SolveOptions,
    m: usize,
    n: usize,
    cols: Vec<SparseCol>,
    b: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    x: Vec<f64>,
    lu: LuFactors,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
    /// Exact bounds while `lower`/`upper` hold perturbed ones.
    exact: Option<(Vec<f64>, Vec<f64>)>,
    // scratch
    row_buf: Vec<f64>,
    pos_buf: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl<'a> Simplex<'a> {
    pub(crate) fn new(problem: &LpProblem, opts: &'a SolveOptions, warm: Option<&Basis>) -> Self {
        let m = problem.num_constraints();
        let n = problem.num_vars();

        let mut cols: Vec<SparseCol> = vec![Vec::new(); n];
        for (i, c) in problem.constraints().iter().enumerate() {
            for &(v, a) in &c.terms {
                let col = &mut cols[v.0];
                if let Some(last) = col.last_mut().filter(|e| e.0 == i) {
                    last.1 += a;
                } else if let Some(e) = col.iter_mut().find(|e| e.0 == i) {
                    e.1 += a;
                } else {
                    col.push((i, a));
                }
            }
        }
        for col in &mut cols {
            col.retain(|e| e.1 != 0.0);
        }

        let mut cost = problem.objective_dense();
        cost.resize(n + m, 0.0);
        let mut lower: Vec<f64> = problem.vars().iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = problem.vars().iter().map(|v| v.upper).collect();
        let b: Vec<f64> = problem.constraints().iter().map(|c| c.rhs).collect();
        for c in problem.constraints() {
            let (l, u) = match c.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }

        let mut state = vec![VarState::Lower; n + m];
        for j in 0..n + m {
            state[j] = nonbasic_state(lower[j], upper[j]);
        }
        let mut head: Vec<usize> = (n..n + m).collect();
        if let Some(basis) = warm.filter(|b| b.structural.len() == n && b.logical.len() == m) {
            let statuses = basis.structural.iter().chain(&basis.logical);
            let basic: Vec<usize> = statuses
                .clone()
                .enumerate()
                .filter(|(_, s)| **s == BasisStatus::Basic)
                .map(|(j, _)| j)
                .collect();
            if basic.len() == m {
                for (j, s) in statuses.enumerate() {
                    state[j] = match s {
                        BasisStatus::Basic => VarState::Basic,
                        BasisStatus::AtUpper if upper[j].is_finite() => VarState::Upper,
                        BasisStatus::AtLower if lower[j].is_finite() => VarState::Lower,
                        _ => nonbasic_state(lower[j], upper[j]),
                    };
                }
                head = basic;
            }
        }
        for &j in &head {
            state[j] = VarState::Basic;
        }

        let mut x = vec![0.0; n + m];
        for j in 0..n + m {
            x[j] = nonbasic_value(state[j], lower[j], upper[j]);
        }

        let lu = LuFactors::factorize(0, &[]).expect("empty factorization");
        Self {
            opts,
            m,
            n,
            cols,
            b,
            cost,
            lower,
            upper,
            state,
            head,
            x,
            lu,
            iterations: 0,
            degenerate_run: 0,
            bland: false,
            exact: None,
            row_buf: vec![0.0; m],
            pos_buf: vec![0.0; m],
            y: vec![0.0; m],
            w: vec![0.0; m],
        }
    }

    fn column(&self, j: usize) -> ColumnRef<'_> {
        column(&self.cols, self.n, j)
    }

    /// Widen every finite bound by `PERTURBATION · (1 + |bound|) · f` with `f ∈ [0.5, 1)`
    /// drawn from a golden-ratio sequence, keeping nonbasic variables on their bounds.
    fn perturb(&mut self) {
        let exact = (self.lower.clone(), self.upper.clone());
        let golden = 0.618_033_988_749_894_9_f64;
        for j in 0..self.n + self.m {
            let f = 0.5 + 0.5 * ((j as f64 + 1.0) * golden).fract();
            if self.lower[j].is_finite() {
                self.lower[j] -= PERTURBATION * (1.0 + self.lower[j].abs()) * f;
            }
            if self.upper[j].is_finite() {
                self.upper[j] += PERTURBATION * (1.0 + self.upper[j].abs()) * f;
            }
            if self.state[j] != VarState::Basic {
                self.x[j] = nonbasic_value(self.state[j], self.lower[j], self.upper[j]);
            }
        }
        self.exact = Some(exact);
    }

    /// Put the exact bounds back and move nonbasic variables onto them.
    fn unperturb(&mut self) {
        let Some((lower, upper)) = self.exact.take() else {
            return;
        };
        self.lower = lower;
        self.upper = upper;
        for j in 0..self.n + self.m {
            if self.state[j] != VarState::Basic {
                self.state[j] = match self.state[j] {
                    VarState::Upper if self.upper[j].is_finite() => VarState::Upper,
                    VarState::Lower if self.lower[j].is_finite() => VarState::Lower,
                    _ => nonbasic_state(self.lower[j], self.upper[j]),
                };
                self.x[j] = nonbasic_value(self.state[j], self.lower[j], self.upper[j]);
            }
        }
        self.degenerate_run = 0;
        self.bland = false;
        self.refactor();
    }

    /// Refactorize the basis, repairing singularities by swapping in logicals.
    fn refactor(&mut self) {
        for _attempt in 0..=self.m {
            let basis_cols: Vec<SparseCol> = self
                .head
                .iter()
                .map(|&j| match self.column(j) {
                    ColumnRef::Structural(c) => c.clone(),
                    ColumnRef::Unit(r) => vec![(r, 1.0)],
                })
                .collect();
            match LuFactors::factorize(self.m, &basis_cols) {
                Ok(lu) => {
                    debug_assert_eq!(lu.dim(), self.m);
                    self.lu = lu;
                    self.recompute_basics();
                    return;
                }
                Err(singular) => {
                    for (&pos, &row) in singular.positions.iter().zip(&singular.rows) {
                        let leaving = self.head[pos];
                        let st = nonbasic_state(self.lower[leaving], self.upper[leaving]);
                        self.state[leaving] = st;
                        self.x[leaving] =
                            nonbasic_value(st, self.lower[leaving], self.upper[leaving]);
                        let logical = self.n + row;
                        self.head[pos] = logical;
                        self.state[logical] = VarState::Basic;
                    }
                }
            }
        }
        panic!("basis repair did not converge");
    }

    fn recompute_basics(&mut self) {
        self.row_buf.copy_from_slice(&self.b);
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            match column(&self.cols, self.n, j) {
                ColumnRef::Structural(c) => {
                    for &(r, a) in c {
                        self.row_buf[r] -= a * xj;
                    }
                }
                ColumnRef::Unit(r) => self.row_buf[r] -= xj,
            }
        }
        let mut out = vec![0.0; self.m];
        self.lu.ftran(&mut self.row_buf, &mut out);
        for (k, &j) in self.head.iter().enumerate() {
            self.x[j] = out[k];
        }
    }

    fn infeasibility_costs(&self, costs: &mut [f64]) -> bool {
        let tol = self.opts.primal_tolerance;
        let mut any = false;
        for (k, &j) in self.head.iter().enumerate() {
            let xj = self.x[j];
            costs[k] = if xj < self.lower[j] - tol {
                any = true;
                -1.0
            } else if xj > self.upper[j] + tol {
                any = true;
                1.0
            } else {
                0.0
            };
        }
        any
    }

    fn dot_y(&self, j: usize) -> f64 {
        match self.column(j) {
            ColumnRef::Structural(c) => c.iter().map(|&(r, a)| a * self.y[r]).sum(),
            ColumnRef::Unit(r) => self.y[r],
        }
    }

    /// Returns the entering variable and its direction (+1 increase, -1 decrease).
    fn price(&self, phase1: bool) -> Option<(usize, f64, f64)> {
        let tol = self.opts.optimality_tolerance;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == VarState::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let cj = if phase1 { 0.0 } else { self.cost[j] };
            let d = cj - self.dot_y(j);
            let dir = match st {
                VarState::Lower if d < -tol => 1.0,
                VarState::Upper if d > tol => -1.0,
                VarState::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir, d.abs()));
            }
            if best.is_none_or(|(_, _, bd)| d.abs() > bd) {
                best = Some((j, dir, d.abs()));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, phase1: bool) -> Step {
        let tol = self.opts.primal_tolerance;
        let range = self.upper[q] - self.lower[q];

        // Pass 1: relaxed bound on the step length.
        let mut theta_max = f64::INFINITY;
        let mut limits: Vec<(usize, f64, f64, bool)> = Vec::new();
        for k in 0..self.m {
            let wk = self.w[k];
            if wk.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.head[k];
            let g = -dir * wk;
            let xj = self.x[j];
            let (lj, uj) = (self.lower[j], self.upper[j]);
            let target = if g > 0.0 {
                if phase1 && xj < lj - tol {
                    Some((lj, false))
                } else if xj > uj + tol {
                    None
                } else if uj.is_finite() {
                    Some((uj, true))
                } else {
                    None
                }
            } else if phase1 && xj > uj + tol {
                Some((uj, true))
            } else if xj < lj - tol {
                None
            } else if lj.is_finite() {
                Some((lj, false))
            } else {
                None
            };
            let Some((bound, to_upper)) = target else {
                continue;
            };
            let dist = (bound - xj) / g;
            // Half the tolerance, so roundoff cannot push a basic past the phase-1 trigger.
            let relaxed = (bound - xj + 0.5 * tol * g.signum()) / g;
            theta_max = theta_max.min(relaxed.max(0.0));
            limits.push((k, dist.max(0.0), g.abs(), to_upper));
        }

        if range.is_finite() && range <= theta_max {
            return Step::Flip(range);
        }
        if limits.is_empty() {
            return if range.is_finite() {
                Step::Flip(range)
            } else {
                Step::Unbounded
            };
        }

        let chosen = if self.bland {
            let min_ratio = limits.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
            limits
                .iter()
                .filter(|l| l.1 <= min_ratio + 1e-12)
                .min_by_key(|l| self.head[l.0])
                .copied()
        } else {
            limits
                .iter()
                .filter(|l| l.1 <= theta_max)
                .max_by(|a, b| a.2.total_cmp(&b.2))
                .copied()
        };
        match chosen {
            Some((pos, theta, _, to_upper)) => Step::Pivot {
                theta,
                pos,
                to_upper,
            },
            None => Step::Unbounded,
        }
    }

    fn load_column(&mut self, q: usize) {
        self.row_buf.iter_mut().for_each(|v| *v = 0.0);
        match column(&self.cols, self.n, q) {
            ColumnRef::Structural(c) => {
                for &(r, a) in c {
                    self.row_buf[r] += a;
                }
            }
            ColumnRef::Unit(r) => self.row_buf[r] = 1.0,
        }
        let mut w = std::mem::take(&mut self.w);
        self.lu.ftran(&mut self.row_buf, &mut w);
        self.w = w;
    }

    fn compute_duals(&mut self, phase1: bool) {
        if phase1 {
            let mut costs = vec![0.0; self.m];
            self.infeasibility_costs(&mut costs);
            self.pos_buf.copy_from_slice(&costs);
        } else {
            for (k, &j) in self.head.iter().enumerate() {
                self.pos_buf[k] = self.cost[j];
            }
        }
        let mut y = std::mem::take(&mut self.y);
        self.lu.btran(&mut self.pos_buf, &mut y);
        self.y = y;
    }

    fn is_primal_feasible(&self) -> bool {
        let tol = self.opts.primal_tolerance;
        self.head
            .iter()
            .all(|&j| self.x[j] >= self.lower[j] - tol && self.x[j] <= self.upper[j] + tol)
    }

    pub(crate) fn run(mut self, problem: &LpProblem) -> LpSolution {
        let max_iter = self
            .opts
            .max_iterations
            .unwrap_or(50 * (self.m + self.n) + 10_000);
        self.perturb();
        self.refactor();
        let mut fresh = true;
        let mut scratch = vec![0.0; self.m];

        loop {
            if self.iterations >= max_iter {
                return LpSolution::failed(Status::IterationLimit, self.iterations);
            }
            if self.lu.num_etas() >= self.opts.refactor_interval {
                self.refactor();
                fresh = true;
            }

            let phase1 = self.infeasibility_costs(&mut scratch);
            self.compute_duals(phase1);
            let Some((q, dir, dq)) = self.price(phase1) else {
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                if phase1 {
                    return LpSolution::failed(Status::Infeasible, self.iterations);
                }
                if self.exact.is_some() {
                    self.unperturb();
                    fresh = true;
                    continue;
                }
                return self.finish(problem);
            };

            self.load_column(q);
            let step = self.ratio_test(q, dir, phase1);
            self.iterations += 1;
            fresh = false;

            let theta = match step {
                Step::Unbounded => {
                    if phase1 {
                        // Phase 1 is bounded below; an unbounded ray here is numerical noise.
                        self.refactor();
                        fresh = true;
                        if self.degenerate_run > BLAND_AFTER * 4 {
                            return LpSolution::failed(Status::NumericalFailure, self.iterations);
                        }
                        self.degenerate_run += BLAND_AFTER;
                        self.bland = true;
                        continue;
                    }
                    return LpSolution::failed(Status::Unbounded, self.iterations);
                }
                Step::Flip(t) => t,
                Step::Pivot { theta, .. } => theta,
            };

            if theta <= DEGENERATE_STEP || theta * dq <= STALL_PROGRESS {
                self.degenerate_run += 1;
                if self.degenerate_run > BLAND_AFTER {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }

            // Move the entering variable and update basic values.
            self.x[q] += dir * theta;
            if theta != 0.0 {
                for k in 0..self.m {
                    let wk = self.w[k];
                    if wk != 0.0 {
                        let j = self.head[k];
                        self.x[j] -= dir * theta * wk;
                    }
                }
            }

            match step {
                Step::Flip(_) => {
                    self.state[q] = if dir > 0.0 {
                        VarState::Upper
                    } else {
                        VarState::Lower
                    };
                    self.x[q] = if dir > 0.0 {
                        self.upper[q]
                    } else {
                        self.lower[q]
                    };
                }
                Step::Pivot { pos, to_upper, .. } => {
                    let leaving = self.head[pos];
                    self.state[leaving] = if to_upper {
                        VarState::Upper
                    } else {
                        VarState::Lower
                    };
                    self.x[leaving] = if to_upper {
                        self.upper[leaving]
                    } else {
                        self.lower[leaving]
                    };
                    self.state[q] = VarState::Basic;
                    self.head[pos] = q;
                    let w = std::mem::take(&mut self.w);
                    self.lu.push_eta(pos, &w);
                    self.w = w;
                }
                Step::Unbounded => unreachable!(),
            }
        }
    }

    fn finish(mut self, problem: &LpProblem) -> LpSolution {
        if !self.is_primal_feasible() {
            return LpSolution::failed(Status::NumericalFailure, self.iterations);
        }
        self.compute_duals(false);
        let mut values: Vec<f64> = self.x[..self.n].to_vec();
        for (j, v) in values.iter_mut().enumerate() {
            *v = v.clamp(self.lower[j], self.upper[j]);
        }
        let to_status = |s: VarState| match s {
            VarState::Basic => BasisStatus::Basic,
            VarState::Lower => BasisStatus::AtLower,
            VarState::Upper => BasisStatus::AtUpper,
            VarState::Free => BasisStatus::Free,
        };
        let basis = Basis {
            structural: self.state[..self.n].iter().map(|&s| to_status(s)).collect(),
            logical: self.state[self.n..].iter().map(|&s| to_status(s)).collect(),
        };
        LpSolution {
            status: Status::Optimal,
            objective: problem.evaluate_objective(&values),
            max_primal_residual: problem.max_violation(&values),
            values,
            duals: self.y.clone(),
            iterations: self.iterations,
            basis: Some(basis),
        }
    }
}

enum ColumnRef<'c> {
    Structural(&'c SparseCol),
    Unit(usize),
}

fn column(cols: &[SparseCol], n: usize, j: usize) -> ColumnRef<'_> {
    if j < n {
        ColumnRef::Structural(&cols[j])
    } else {
        ColumnRef::Unit(j - n)
    }
}

fn nonbasic_state(lower: f64, upper: f64) -> VarState {
    if lower.is_finite() {
        VarState::Lower
    } else if upper.is_finite() {
        VarState::Upper
    } else {
        VarState::Free
    }
}

fn nonbasic_value(state: VarState, lower: f64, upper: f64) -> f64 {
    match state {
        VarState::Lower => lower,
        VarState::Upper => upper,
        VarState::Free | VarState::Basic => 0.0,
    }
}
