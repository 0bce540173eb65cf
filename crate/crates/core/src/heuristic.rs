//! The λ-parameterized three-step heuristic.
//!
//! Step I solves every cell without D2D. Step II marks the slots whose no-D2D load exceeds
//! `λ·F_b` as hot and sends every demand with an allocation in a hot slot to the D2D set;
//! the remaining demands keep their Step I allocations. Step III solves the D2D LP for the
//! D2D set only, on top of the spectrum the other demands already occupy.

use d2dlb_lp::{Relation, SolveOptions, VarId};

use crate::error::{CoreError, Result};
use crate::flow::{build_min_spectrum_d2d, FlowOptions};
use crate::model::{per_slot_load, DemandSet, Node, Schedule, SpectrumResult, Topology};
use crate::nd::{nd_total, NdMethod, NdResult};

/// Slack on the hot-slot test `γ_b(t) > λ·F_b`.
pub const HOT_SLOT_TOLERANCE: f64 = 1e-9;
/// Allocations at or below this many Hz do not count as using a slot.
pub const ALLOCATION_THRESHOLD: f64 = 1e-9;
/// Slack used by [`check_heuristic_bounds`].
pub const BOUND_TOLERANCE: f64 = 1e-6;

/// Split of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSplit {
    pub bs: usize,
    /// `T_b(λ)`, ascending.
    pub hot_slots: Vec<usize>,
    /// Demand ids routed by the Step III LP.
    pub d2d: Vec<usize>,
    /// Demand ids that keep their Step I allocations.
    pub nd: Vec<usize>,
    /// `γ̃_b(t)`: load of the kept demands, indexed `t − 1`.
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub lambda: f64,
    pub cells: Vec<CellSplit>,
}

impl SplitResult {
    /// All D2D-set demand ids, ascending.
    pub fn d2d_demands(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .cells
            .iter()
            .flat_map(|c| c.d2d.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }

    /// `γ̃` for every BS, indexed `[b][t − 1]`.
    pub fn residual_load(&self) -> Vec<Vec<f64>> {
        self.cells.iter().map(|c| c.residual.clone()).collect()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(CoreError::InvalidLambda(lambda))
    }
}

/// Step II for every cell, given the Step I result.
pub fn split_demands(
    topology: &Topology,
    demands: &DemandSet,
    nd: &NdResult,
    lambda: f64,
) -> Result<SplitResult> {
    check_lambda(lambda)?;
    let horizon = demands.horizon();
    let cells = nd
        .cells
        .iter()
        .map(|cell| {
            let b = cell.bs;
            let hot_slots: Vec<usize> = (1..=horizon)
                .filter(|&t| cell.gamma[t - 1] > lambda * cell.spectrum + HOT_SLOT_TOLERANCE)
                .collect();
            let mut is_hot = vec![false; horizon + 1];
            for &t in &hot_slots {
                is_hot[t] = true;
            }
            let mut d2d = Vec::new();
            let mut kept = Vec::new();
            let mut residual = vec![0.0; horizon];
            for d in demands.of_cell(topology, b) {
                let direct: Vec<(usize, f64)> = nd
                    .schedule
                    .of_demand(d.id)
                    .filter(|(k, _)| k.src == Node::User(d.user) && k.dst == Node::Bs(b))
                    .map(|(k, &x)| (k.slot, x))
                    .collect();
                if direct
                    .iter()
                    .any(|&(t, x)| is_hot[t] && x > ALLOCATION_THRESHOLD)
                {
                    d2d.push(d.id);
                } else {
                    for (t, x) in direct {
                        residual[t - 1] += x;
                    }
                    kept.push(d.id);
                }
            }
            CellSplit {
                bs: b,
                hot_slots,
                d2d,
                nd: kept,
                residual,
            }
        })
        .collect();
    Ok(SplitResult { lambda, cells })
}

#[derive(Debug, Clone)]
pub struct HeuristicOptions {
    /// Which optimal no-D2D schedule Step I uses.
    pub step_one: NdMethod,
    pub pruning: bool,
    pub solve: SolveOptions,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        Self {
            step_one: NdMethod::Yds,
            pruning: true,
            solve: SolveOptions::default(),
        }
    }
}

/// Outcome of the three steps for one λ.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicResult {
    /// `F^Heuristic(λ)`.
    pub total: f64,
    pub split: SplitResult,
    /// Kept Step I allocations together with the Step III allocations.
    pub schedule: Schedule,
    /// Peaks are the Step III `F_b`.
    pub spectrum: SpectrumResult,
    /// Variables of the Step III LP.
    pub step3_vars: usize,
    /// `Σ_{j ∈ J^D2D(λ)} r_j`.
    pub d2d_volume: f64,
}

/// Run Step I and then Steps II–III.
pub fn heuristic_min_spectrum(
    topology: &Topology,
    demands: &DemandSet,
    lambda: f64,
    options: &HeuristicOptions,
) -> Result<(NdResult, HeuristicResult)> {
    check_lambda(lambda)?;
    let nd = nd_total(topology, demands, options.step_one, &options.solve)?;
    let h = heuristic_from_nd(topology, demands, &nd, lambda, options)?;
    Ok((nd, h))
}

/// Steps II–III on an existing Step I result.
pub fn heuristic_from_nd(
    topology: &Topology,
    demands: &DemandSet,
    nd: &NdResult,
    lambda: f64,
    options: &HeuristicOptions,
) -> Result<HeuristicResult> {
    let split = split_demands(topology, demands, nd, lambda)?;
    let (model, sol) = solve_step_three(topology, demands, &split, options, None)?;
    Ok(assemble(
        topology,
        demands,
        nd,
        split,
        &model.read(topology, &sol),
        model.lp.num_vars(),
    ))
}

/// Minimum D2D traffic of the D2D-set demands with `Σ_b F_b` capped at
/// `f_heuristic + slack·max(1, f_heuristic)`. The split of `previous` is reused.
pub fn heuristic_min_overhead(
    topology: &Topology,
    demands: &DemandSet,
    nd: &NdResult,
    previous: &HeuristicResult,
    slack: f64,
    options: &HeuristicOptions,
) -> Result<HeuristicResult> {
    let cap = previous.total + slack * previous.total.abs().max(1.0);
    let (model, sol) = solve_step_three(topology, demands, &previous.split, options, Some(cap))?;
    Ok(assemble(
        topology,
        demands,
        nd,
        previous.split.clone(),
        &model.read(topology, &sol),
        model.lp.num_vars(),
    ))
}

fn solve_step_three(
    topology: &Topology,
    demands: &DemandSet,
    split: &SplitResult,
    options: &HeuristicOptions,
    overhead_cap: Option<f64>,
) -> Result<(crate::flow::D2DModel, d2dlb_lp::LpSolution)> {
    let flow = FlowOptions {
        pruning: options.pruning,
        demands: Some(split.d2d_demands()),
        preload: Some(split.residual_load()),
    };
    let mut model = build_min_spectrum_d2d(topology, demands, &flow)?;
    if let Some(cap) = overhead_cap {
        let total: Vec<(VarId, f64)> = model.peak.iter().map(|&f| (f, 1.0)).collect();
        model
            .lp
            .add_constraint("total_spectrum", total, Relation::Le, cap);
        model.lp.set_objective(model.overhead_terms.clone(), 0.0);
    }
    let sol = d2dlb_lp::solve(&model.lp, &options.solve)?;
    if !sol.is_optimal() {
        return Err(CoreError::Solver {
            context: format!("heuristic step III (lambda = {})", split.lambda),
            status: sol.status,
        });
    }
    Ok((model, sol))
}

fn assemble(
    topology: &Topology,
    demands: &DemandSet,
    nd: &NdResult,
    split: SplitResult,
    step3: &crate::flow::D2DSolution,
    step3_vars: usize,
) -> HeuristicResult {
    let mut schedule = step3.schedule.clone();
    for c in &split.cells {
        for &id in &c.nd {
            for (k, x) in nd.schedule.of_demand(id) {
                schedule.add(*k, *x);
            }
        }
    }
    let load = per_slot_load(&schedule, topology, demands.horizon());
    let spectrum = SpectrumResult::with_peaks(
        &schedule,
        topology,
        step3.spectrum.per_bs_peak.clone(),
        load,
    );
    let d2d_volume = split
        .d2d_demands()
        .iter()
        .map(|&j| demands.get(j).volume)
        .sum();
    HeuristicResult {
        total: spectrum.total,
        split,
        schedule,
        spectrum,
        step3_vars,
        d2d_volume,
    }
}

/// Inputs of [`check_heuristic_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicBoundInputs {
    pub lambda: f64,
    /// Spectrum reduction of the exact D2D optimum.
    pub rho: f64,
    pub rho_heuristic: f64,
    pub eta_heuristic: f64,
    pub d_max: usize,
    /// `Σ_{j ∈ J^D2D(λ)} r_j`.
    pub d2d_volume: f64,
    /// `Σ_j r_j`.
    pub total_volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicBoundReport {
    /// `(1 − λ)ρ`.
    pub rho_lower: f64,
    /// `ρ`.
    pub rho_upper: f64,
    /// `(d_max − 1)S / ((d_max − 1)S + Σ_j r_j)`.
    pub eta_upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub eta_ok: bool,
}

impl HeuristicBoundReport {
    pub fn all_ok(&self) -> bool {
        self.lower_ok && self.upper_ok && self.eta_ok
    }
}

/// `(1 − λ)ρ ≤ ρ^H(λ) ≤ ρ` and the D2D-set refinement of the overhead bound, each with
/// slack [`BOUND_TOLERANCE`].
pub fn check_heuristic_bounds(i: &HeuristicBoundInputs) -> HeuristicBoundReport {
    let rho_lower = (1.0 - i.lambda) * i.rho;
    let relay = i.d_max.saturating_sub(1) as f64 * i.d2d_volume;
    let eta_upper = if relay + i.total_volume > 0.0 {
        relay / (relay + i.total_volume)
    } else {
        0.0
    };
    HeuristicBoundReport {
        rho_lower,
        rho_upper: i.rho,
        eta_upper,
        lower_ok: i.rho_heuristic >= rho_lower - BOUND_TOLERANCE,
        upper_ok: i.rho_heuristic <= i.rho + BOUND_TOLERANCE,
        eta_ok: i.eta_heuristic <= eta_upper + BOUND_TOLERANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schedule, Tolerance, TopologyBuilder};

    /// Two cells with three delay-2 tasks each, one user per task and unit rates. Only the
    /// users of the heavy tasks C and D are linked across cells.
    fn two_cells() -> (Topology, DemandSet) {
        let t = TopologyBuilder::new()
            .bs("B1")
            .bs("B2")
            .user("uA", "B1")
            .user("uB", "B1")
            .user("uC", "B1")
            .user("uD", "B2")
            .user("uE", "B2")
            .user("uF", "B2")
            .link("uA", "B1", 1.0)
            .link("uB", "B1", 1.0)
            .link("uC", "B1", 1.0)
            .link("uD", "B2", 1.0)
            .link("uE", "B2", 1.0)
            .link("uF", "B2", 1.0)
            .both_ways("uC", "uD", 1.0)
            .build()
            .unwrap();
        let d = DemandSet::new(
            6,
            [
                (0, 1, 2, 20.0),
                (1, 3, 4, 20.0),
                (2, 5, 6, 80.0),
                (3, 1, 2, 80.0),
                (4, 3, 4, 20.0),
                (5, 5, 6, 20.0),
            ],
        )
        .unwrap();
        (t, d)
    }

    #[test]
    fn lambda_out_of_range() {
        let (t, d) = two_cells();
        assert!(matches!(
            heuristic_min_spectrum(&t, &d, 1.5, &HeuristicOptions::default()),
            Err(CoreError::InvalidLambda(_))
        ));
    }

    #[test]
    fn lambda_one_keeps_every_demand() {
        let (t, d) = two_cells();
        let (nd, h) = heuristic_min_spectrum(&t, &d, 1.0, &HeuristicOptions::default()).unwrap();
        assert!(h.split.d2d_demands().is_empty());
        assert!((h.total - nd.total()).abs() < 1e-9);
        assert!(validate_schedule(&h.schedule, &t, &d, Tolerance::default()).is_valid());
    }

    #[test]
    fn lambda_zero_moves_every_demand() {
        let (t, d) = two_cells();
        let (_, h) = heuristic_min_spectrum(&t, &d, 0.0, &HeuristicOptions::default()).unwrap();
        assert_eq!(h.split.d2d_demands(), (0..6).collect::<Vec<_>>());
        assert!(validate_schedule(&h.schedule, &t, &d, Tolerance::default()).is_valid());
    }

    #[test]
    fn half_lambda_split_and_overhead() {
        let (t, d) = two_cells();
        let opts = HeuristicOptions::default();
        let (nd, h) = heuristic_min_spectrum(&t, &d, 0.5, &opts).unwrap();
        assert_eq!(nd.cells[0].spectrum, 40.0);
        assert_eq!(nd.cells[1].spectrum, 40.0);
        assert_eq!(h.split.cells[0].d2d, vec![2]);
        assert_eq!(h.split.cells[1].d2d, vec![3]);
        assert_eq!(
            h.split.cells[0].residual,
            vec![20.0, 0.0, 20.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            h.split.cells[1].residual,
            vec![0.0, 0.0, 20.0, 0.0, 20.0, 0.0]
        );
        assert!((h.total - 200.0 / 3.0).abs() < 1e-9, "{}", h.total);
        assert!(validate_schedule(&h.schedule, &t, &d, Tolerance::default()).is_valid());
        let o = heuristic_min_overhead(&t, &d, &nd, &h, 1e-9, &opts).unwrap();
        assert!(o.total <= h.total * (1.0 + 1e-8));
        assert!(o.spectrum.v_d2d <= h.spectrum.v_d2d + 1e-6);
        assert!(validate_schedule(&o.schedule, &t, &d, Tolerance::default()).is_valid());
    }

    #[test]
    fn bound_report_flags_violations() {
        let base = HeuristicBoundInputs {
            lambda: 0.5,
            rho: 0.4,
            rho_heuristic: 0.3,
            eta_heuristic: 0.1,
            d_max: 3,
            d2d_volume: 10.0,
            total_volume: 100.0,
        };
        let r = check_heuristic_bounds(&base);
        assert!(r.all_ok());
        assert!((r.eta_upper - 20.0 / 120.0).abs() < 1e-15);
        let low = check_heuristic_bounds(&HeuristicBoundInputs {
            rho_heuristic: 0.1,
            ..base
        });
        assert!(!low.lower_ok);
        let high = check_heuristic_bounds(&HeuristicBoundInputs {
            rho_heuristic: 0.5,
            ..base
        });
        assert!(!high.upper_ok);
        let eta = check_heuristic_bounds(&HeuristicBoundInputs {
            eta_heuristic: 0.2,
            ..base
        });
        assert!(!eta.eta_ok);
    }
}
