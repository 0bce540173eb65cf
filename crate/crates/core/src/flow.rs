//! Time-expanded flow LPs for the minimum total spectrum with D2D relaying, and for the
//! minimum D2D traffic at a given total spectrum.
//!
//! Each demand is a commodity on the time-expanded graph: a transmission on link `(u, v)`
//! in slot `t` moves traffic from `u` at `t` to `v` at `t + 1`, and self-links hold stored
//! traffic. Spectrum is charged to the receiving node's BS.

use d2dlb_lp::{LpProblem, LpSolution, Relation, SolveOptions, VarId, DEFAULT_LEXICOGRAPHIC_SLACK};
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::model::{
    charged_bs, per_slot_load, DemandSet, Key, Node, Schedule, SpectrumResult, Topology,
};

/// Relative agreement required between pruned and unpruned optima.
pub const PRUNE_AGREEMENT: f64 = 1e-6;

/// How the time-expanded model is assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    /// Drop (link, slot) variables that cannot carry traffic of a demand.
    pub pruning: bool,
    /// Only route these demand ids; `None` routes all demands.
    pub demands: Option<Vec<usize>>,
    /// Spectrum already committed per BS and slot, indexed `[b][t − 1]`; it counts against
    /// each `F_b`.
    pub preload: Option<Vec<Vec<f64>>>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            pruning: true,
            demands: None,
            preload: None,
        }
    }
}

impl FlowOptions {
    pub fn unpruned() -> Self {
        Self {
            pruning: false,
            ..Self::default()
        }
    }
}

/// Admissible allocation positions per routed demand.
///
/// With pruning, link `(u, v)` in slot `t` is admissible for demand `j` iff
/// `t ∈ [s_j, e_j]`, `hops(u_j → u) ≤ t − s_j` and a BS is reachable from `v` within
/// `e_j − t` hops. A self-link of `w` in slot `t` is admissible iff `hops(u_j → w) ≤ t − s_j`
/// and, for users, a BS is reachable from `w` within `e_j − t` hops. Without pruning every
/// link and self-link is admissible in every slot of the lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeExpandedIndex {
    demands: Vec<usize>,
    entries: Vec<Vec<Key>>,
    windows: Vec<Vec<Option<(usize, usize)>>>,
}

impl TimeExpandedIndex {
    /// Index the given demands. Demands whose user cannot reach any BS within the lifetime
    /// are rejected.
    pub fn build(
        topology: &Topology,
        demands: &DemandSet,
        routed: &[usize],
        pruning: bool,
    ) -> Result<Self> {
        let to_bs = topology.hops_to_bs();
        for &id in routed {
            let d = demands.get(id);
            let needed = to_bs[topology.node_index(Node::User(d.user))];
            if needed.is_none_or(|h| h > d.delay()) {
                return Err(CoreError::UnreachableDemand {
                    demand: id,
                    user: topology.user_name(d.user).to_string(),
                    needed,
                    available: d.delay(),
                });
            }
        }
        let (entries, windows): (Vec<_>, Vec<_>) = routed
            .par_iter()
            .map(|&id| index_demand(topology, demands, id, &to_bs, pruning))
            .unzip();
        Ok(Self {
            demands: routed.to_vec(),
            entries,
            windows,
        })
    }

    /// Routed demand ids, in the order of their entries.
    pub fn demands(&self) -> &[usize] {
        &self.demands
    }

    /// Admissible keys of the `i`-th routed demand, in (slot, src, dst) order.
    pub fn entries(&self, i: usize) -> &[Key] {
        &self.entries[i]
    }

    /// Slots in which node `n` may hold traffic of the `i`-th routed demand.
    pub fn window(&self, topology: &Topology, i: usize, n: Node) -> Option<(usize, usize)> {
        self.windows[i][topology.node_index(n)]
    }

    /// Number of allocation variables (links and self-links).
    pub fn num_flow_vars(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }
}

fn index_demand(
    topology: &Topology,
    demands: &DemandSet,
    id: usize,
    to_bs: &[Option<usize>],
    pruning: bool,
) -> (Vec<Key>, Vec<Option<(usize, usize)>>) {
    let d = demands.get(id);
    let from_src = topology.hops_from(d.user);
    let n = topology.num_nodes();
    let reach_by = |node: Node, t: usize| {
        !pruning || from_src[topology.node_index(node)].is_some_and(|h| h <= t - d.start)
    };
    let exits_by = |node: Node, t: usize| {
        !pruning || to_bs[topology.node_index(node)].is_some_and(|h| h <= d.end - t)
    };

    let windows = (0..n)
        .map(|i| {
            let node = topology.node_at(i);
            if !pruning {
                return Some((d.start, d.end));
            }
            let first = d.start + from_src[i]?;
            let last = match node {
                Node::Bs(_) => d.end,
                Node::User(_) => d.end.checked_sub(to_bs[i]?)?,
            };
            (first <= last).then_some((first, last))
        })
        .collect();

    let mut keys = Vec::new();
    for t in d.slots() {
        for i in 0..n {
            let node = topology.node_at(i);
            // A user holding traffic during t forwards it from t + 1 onwards.
            let self_ok = match node {
                Node::Bs(_) => reach_by(node, t),
                Node::User(_) => reach_by(node, t) && exits_by(node, t),
            };
            if self_ok {
                keys.push(Key {
                    demand: id,
                    slot: t,
                    src: node,
                    dst: node,
                });
            }
            if let Node::User(u) = node {
                if !reach_by(node, t) {
                    continue;
                }
                for &li in topology.out_links(u) {
                    let dst = topology.links()[li].dst;
                    if exits_by(dst, t) {
                        keys.push(Key {
                            demand: id,
                            slot: t,
                            src: node,
                            dst,
                        });
                    }
                }
            }
        }
    }
    keys.sort_unstable();
    (keys, windows)
}

/// An assembled minimum-total-spectrum LP and the variable maps needed to read it back.
#[derive(Debug, Clone)]
pub struct D2DModel {
    pub lp: LpProblem,
    pub index: TimeExpandedIndex,
    /// Allocation variable of each admissible key.
    pub flows: Vec<(Key, VarId)>,
    /// `α_b(t)`, indexed `[b][t − 1]`.
    pub alpha: Vec<Vec<VarId>>,
    /// `β_b(t)`, indexed `[b][t − 1]`.
    pub beta: Vec<Vec<VarId>>,
    /// `F_b`.
    pub peak: Vec<VarId>,
    /// D2D traffic `Σ x·R` over user → user links in slots before each deadline.
    pub overhead_terms: Vec<(VarId, f64)>,
    horizon: usize,
}

/// Assemble the minimum-total-spectrum LP.
///
/// Rows per routed demand: the source emits `r_j` at `s_j` (with no other node emitting
/// then), BSs hold `r_j` at `e_j`, and flow is conserved between consecutive slots. Rows
/// per BS and slot: `α_b(t)` is spectrum on links into `b`, `β_b(t)` spectrum on real links
/// into users of `b`, and `α_b(t) + β_b(t) + preload_b(t) ≤ F_b`.
pub fn build_min_spectrum_d2d(
    topology: &Topology,
    demands: &DemandSet,
    options: &FlowOptions,
) -> Result<D2DModel> {
    demands.check_users(topology)?;
    let routed: Vec<usize> = match &options.demands {
        Some(ids) => {
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            if let Some(&bad) = ids.iter().find(|&&j| j >= demands.len()) {
                return Err(CoreError::InvalidParameter {
                    name: "demands",
                    reason: format!("demand id {bad} does not exist"),
                });
            }
            ids
        }
        None => (0..demands.len()).collect(),
    };
    let horizon = demands.horizon();
    let nb = topology.num_bs();
    if let Some(pre) = &options.preload {
        if pre.len() != nb || pre.iter().any(|row| row.len() != horizon) {
            return Err(CoreError::InvalidParameter {
                name: "preload",
                reason: format!("expected {nb} rows of {horizon} slots"),
            });
        }
    }
    let index = TimeExpandedIndex::build(topology, demands, &routed, options.pruning)?;

    let mut lp = LpProblem::new("min_spectrum_d2d");
    let n = topology.num_nodes();
    let mut flows = Vec::with_capacity(index.num_flow_vars());
    let mut overhead_terms = Vec::new();
    // Spectrum charged per (BS, slot), split into α (into BSs) and β (into users).
    let mut alpha_terms: Vec<Vec<Vec<(VarId, f64)>>> = vec![vec![Vec::new(); horizon]; nb];
    let mut beta_terms: Vec<Vec<Vec<(VarId, f64)>>> = vec![vec![Vec::new(); horizon]; nb];

    for (i, &id) in index.demands().iter().enumerate() {
        let d = demands.get(id);
        let len = d.delay();
        let mut inflow: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); len * n];
        let mut outflow: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); len * n];
        for key in index.entries(i) {
            let rate = topology
                .rate(key.src, key.dst)
                .expect("indexed keys are links");
            let name = format!(
                "x_{}_{}_{}_{}",
                id,
                topology.node_name(key.src),
                topology.node_name(key.dst),
                key.slot
            );
            let x = lp.add_nonneg(name);
            flows.push((*key, x));
            let t = key.slot - d.start;
            outflow[t * n + topology.node_index(key.src)].push((x, rate));
            inflow[t * n + topology.node_index(key.dst)].push((x, rate));
            if let Some(b) = charged_bs(topology, key) {
                match key.dst {
                    Node::Bs(_) => alpha_terms[b][key.slot - 1].push((x, 1.0)),
                    Node::User(_) => beta_terms[b][key.slot - 1].push((x, 1.0)),
                }
            }
            if matches!((key.src, key.dst), (Node::User(_), Node::User(_)))
                && !key.is_self_link()
                && key.slot < d.end
            {
                overhead_terms.push((x, rate));
            }
        }

        let src = topology.node_index(Node::User(d.user));
        lp.add_constraint(
            format!("source_{id}"),
            outflow[src].clone(),
            Relation::Eq,
            d.volume,
        );
        for w in (0..n).filter(|&w| w != src && !outflow[w].is_empty()) {
            lp.add_constraint(
                format!("origin_{id}_{w}"),
                outflow[w].clone(),
                Relation::Eq,
                0.0,
            );
        }
        let arrival: Vec<(VarId, f64)> = (0..topology.num_bs())
            .flat_map(|b| inflow[(len - 1) * n + b].iter().copied())
            .collect();
        lp.add_constraint(format!("arrival_{id}"), arrival, Relation::Eq, d.volume);
        for t in 0..len - 1 {
            for w in 0..n {
                let ins = &inflow[t * n + w];
                let outs = &outflow[(t + 1) * n + w];
                if ins.is_empty() && outs.is_empty() {
                    continue;
                }
                let mut row = ins.clone();
                row.extend(outs.iter().map(|&(v, c)| (v, -c)));
                lp.add_constraint(
                    format!("conserve_{id}_{w}_{}", d.start + t),
                    row,
                    Relation::Eq,
                    0.0,
                );
            }
        }
    }

    let peak: Vec<VarId> = (0..nb)
        .map(|b| lp.add_nonneg(format!("F_{}", topology.bs_name(b))))
        .collect();
    let mut alpha = vec![Vec::with_capacity(horizon); nb];
    let mut beta = vec![Vec::with_capacity(horizon); nb];
    for b in 0..nb {
        for t in 0..horizon {
            let a = lp.add_nonneg(format!("alpha_{}_{}", topology.bs_name(b), t + 1));
            let be = lp.add_nonneg(format!("beta_{}_{}", topology.bs_name(b), t + 1));
            let mut row = std::mem::take(&mut alpha_terms[b][t]);
            row.push((a, -1.0));
            lp.add_constraint(format!("alpha_{b}_{}", t + 1), row, Relation::Eq, 0.0);
            let mut row = std::mem::take(&mut beta_terms[b][t]);
            row.push((be, -1.0));
            lp.add_constraint(format!("beta_{b}_{}", t + 1), row, Relation::Eq, 0.0);
            let pre = options.preload.as_ref().map_or(0.0, |p| p[b][t]);
            lp.add_constraint(
                format!("peak_{b}_{}", t + 1),
                vec![(a, 1.0), (be, 1.0), (peak[b], -1.0)],
                Relation::Le,
                -pre,
            );
            alpha[b].push(a);
            beta[b].push(be);
        }
    }
    lp.set_objective(peak.iter().map(|&f| (f, 1.0)).collect(), 0.0);
    Ok(D2DModel {
        lp,
        index,
        flows,
        alpha,
        beta,
        peak,
        overhead_terms,
        horizon,
    })
}

/// A solved D2D model read back into domain terms.
#[derive(Debug, Clone, PartialEq)]
pub struct D2DSolution {
    /// Peaks are the LP's `F_b`; loads and volumes are measured on the schedule.
    pub spectrum: SpectrumResult,
    /// Allocations of the routed demands, including storage.
    pub schedule: Schedule,
    /// `α_b(t)` from the LP, indexed `[b][t − 1]`.
    pub lp_alpha: Vec<Vec<f64>>,
    /// `β_b(t)` from the LP, indexed `[b][t − 1]`.
    pub lp_beta: Vec<Vec<f64>>,
    pub num_vars: usize,
    pub num_constraints: usize,
    pub iterations: usize,
}

impl D2DModel {
    /// Read a solution vector back. Allocations are kept only where positive.
    pub fn read(&self, topology: &Topology, sol: &LpSolution) -> D2DSolution {
        let v = &sol.values;
        let mut schedule = Schedule::new();
        for &(key, x) in &self.flows {
            if v[x.0] > 0.0 {
                schedule.add(key, v[x.0]);
            }
        }
        let read = |m: &Vec<Vec<VarId>>| {
            m.iter()
                .map(|row| row.iter().map(|x| v[x.0]).collect())
                .collect()
        };
        let peaks = self.peak.iter().map(|x| v[x.0]).collect();
        let load = per_slot_load(&schedule, topology, self.horizon);
        D2DSolution {
            spectrum: SpectrumResult::with_peaks(&schedule, topology, peaks, load),
            schedule,
            lp_alpha: read(&self.alpha),
            lp_beta: read(&self.beta),
            num_vars: self.lp.num_vars(),
            num_constraints: self.lp.num_constraints(),
            iterations: sol.iterations,
        }
    }
}

fn require_optimal(sol: &LpSolution, context: &str) -> Result<()> {
    if sol.is_optimal() {
        Ok(())
    } else {
        Err(CoreError::Solver {
            context: context.to_string(),
            status: sol.status,
        })
    }
}

/// Minimum total spectrum `F^D2D` and an optimal schedule.
pub fn solve_min_spectrum_d2d(
    topology: &Topology,
    demands: &DemandSet,
    flow: &FlowOptions,
    options: &SolveOptions,
) -> Result<D2DSolution> {
    let model = build_min_spectrum_d2d(topology, demands, flow)?;
    let sol = d2dlb_lp::solve(&model.lp, options)?;
    require_optimal(&sol, "minimum-spectrum D2D LP")?;
    Ok(model.read(topology, &sol))
}

/// Minimum D2D traffic subject to `Σ_b F_b ≤ f_d2d + slack·max(1, f_d2d)`.
pub fn solve_min_overhead(
    topology: &Topology,
    demands: &DemandSet,
    f_d2d: f64,
    slack: f64,
    flow: &FlowOptions,
    options: &SolveOptions,
) -> Result<D2DSolution> {
    let mut model = build_min_spectrum_d2d(topology, demands, flow)?;
    let cap = f_d2d + slack * f_d2d.abs().max(1.0);
    let total: Vec<(VarId, f64)> = model.peak.iter().map(|&f| (f, 1.0)).collect();
    model
        .lp
        .add_constraint("total_spectrum", total, Relation::Le, cap);
    model.lp.set_objective(model.overhead_terms.clone(), 0.0);
    let sol = d2dlb_lp::solve(&model.lp, options)?;
    require_optimal(&sol, "minimum-overhead LP")?;
    Ok(model.read(topology, &sol))
}

/// Both stages in one go: minimum spectrum, then minimum D2D traffic at that spectrum
/// (warm-started from the first stage's basis). Returns `(F^D2D, schedule of stage two)`.
pub fn solve_d2d_lexicographic(
    topology: &Topology,
    demands: &DemandSet,
    flow: &FlowOptions,
    options: &SolveOptions,
) -> Result<(f64, D2DSolution)> {
    solve_d2d_lexicographic_with_slack(
        topology,
        demands,
        flow,
        options,
        DEFAULT_LEXICOGRAPHIC_SLACK,
    )
}

pub fn solve_d2d_lexicographic_with_slack(
    topology: &Topology,
    demands: &DemandSet,
    flow: &FlowOptions,
    options: &SolveOptions,
    slack: f64,
) -> Result<(f64, D2DSolution)> {
    let model = build_min_spectrum_d2d(topology, demands, flow)?;
    let lex = d2dlb_lp::solve_lexicographic(&model.lp, &model.overhead_terms, slack, options)
        .map_err(|e| match e {
            d2dlb_lp::LpError::PrimaryNotOptimal(status) => CoreError::Solver {
                context: "minimum-spectrum D2D LP".into(),
                status,
            },
            other => other.into(),
        })?;
    require_optimal(&lex.solution, "minimum-overhead LP")?;
    Ok((lex.primary_optimum, model.read(topology, &lex.solution)))
}

/// Pruned versus unpruned optimum of the same instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneReport {
    pub pruned_optimum: f64,
    pub full_optimum: f64,
    pub pruned_vars: usize,
    pub full_vars: usize,
    /// `| pruned − full | ≤ 1e-6 · max(1, |full|)`.
    pub agree: bool,
}

impl PruneReport {
    /// Fraction of allocation variables removed by pruning.
    pub fn reduction(&self) -> f64 {
        if self.full_vars == 0 {
            0.0
        } else {
            1.0 - self.pruned_vars as f64 / self.full_vars as f64
        }
    }
}

/// Solve the minimum-spectrum LP with and without pruning and compare.
pub fn prune_equivalence_check(
    topology: &Topology,
    demands: &DemandSet,
    options: &SolveOptions,
) -> Result<PruneReport> {
    let solve = |pruning| -> Result<(f64, usize)> {
        let model = build_min_spectrum_d2d(
            topology,
            demands,
            &FlowOptions {
                pruning,
                ..FlowOptions::default()
            },
        )?;
        let sol = d2dlb_lp::solve(&model.lp, options)?;
        require_optimal(&sol, "minimum-spectrum D2D LP")?;
        Ok((sol.objective, model.index.num_flow_vars()))
    };
    let (pruned_optimum, pruned_vars) = solve(true)?;
    let (full_optimum, full_vars) = solve(false)?;
    Ok(PruneReport {
        pruned_optimum,
        full_optimum,
        pruned_vars,
        full_vars,
        agree: (pruned_optimum - full_optimum).abs()
            <= PRUNE_AGREEMENT * full_optimum.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{metrics, validate_schedule, Tolerance, TopologyBuilder};

    /// Two cells, two users each; users b and c are linked both ways; every user has
    /// three unit packets and delay 2, cell α busy in slots 1–2 and cell β in 3–4.
    fn toy() -> (Topology, DemandSet) {
        let t = TopologyBuilder::new()
            .bs("alpha")
            .bs("beta")
            .user("a", "alpha")
            .user("b", "alpha")
            .user("c", "beta")
            .user("d", "beta")
            .link("a", "alpha", 1.0)
            .link("b", "alpha", 1.0)
            .link("c", "beta", 1.0)
            .link("d", "beta", 1.0)
            .both_ways("b", "c", 1.0)
            .build()
            .unwrap();
        let d = DemandSet::new(
            4,
            [
                (0, 1, 2, 3.0),
                (1, 1, 2, 3.0),
                (2, 3, 4, 3.0),
                (3, 3, 4, 3.0),
            ],
        )
        .unwrap();
        (t, d)
    }

    #[test]
    fn toy_optimum_and_overhead() {
        let (t, d) = toy();
        let opts = SolveOptions::default();
        let primary = solve_min_spectrum_d2d(&t, &d, &FlowOptions::default(), &opts).unwrap();
        assert!(
            (primary.spectrum.total - 4.0).abs() < 1e-9,
            "{}",
            primary.spectrum.total
        );
        assert!(validate_schedule(&primary.schedule, &t, &d, Tolerance::default()).is_valid());
        let (f, second) = solve_d2d_lexicographic(&t, &d, &FlowOptions::default(), &opts).unwrap();
        assert!((f - 4.0).abs() < 1e-9);
        assert!(
            (second.spectrum.v_d2d - 4.0).abs() < 1e-6,
            "{}",
            second.spectrum.v_d2d
        );
        let m = metrics(6.0, f, second.spectrum.v_d2d, second.spectrum.v_bs).unwrap();
        assert!((m.eta - 0.25).abs() < 1e-6);
        let standalone =
            solve_min_overhead(&t, &d, f, 0.0, &FlowOptions::default(), &opts).unwrap();
        assert!((standalone.spectrum.v_d2d - 4.0).abs() < 1e-6);
    }

    #[test]
    fn lp_beta_matches_schedule() {
        let (t, d) = toy();
        let s = solve_min_spectrum_d2d(&t, &d, &FlowOptions::default(), &SolveOptions::default())
            .unwrap();
        for b in 0..2 {
            for tt in 0..4 {
                let total = s.lp_alpha[b][tt] + s.lp_beta[b][tt];
                assert!((total - s.spectrum.per_slot_load[b][tt]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn without_d2d_links_matches_nd() {
        let t = TopologyBuilder::new()
            .bs("B")
            .bs("C")
            .user("a", "B")
            .user("b", "C")
            .link("a", "B", 2.0)
            .link("b", "C", 1.0)
            .build()
            .unwrap();
        let d = DemandSet::new(3, [(0, 1, 3, 6.0), (1, 2, 3, 4.0), (0, 2, 2, 1.0)]).unwrap();
        let s = solve_min_spectrum_d2d(&t, &d, &FlowOptions::default(), &SolveOptions::default())
            .unwrap();
        // Cell B: works 3 over [1,3] and 0.5 in slot 2 → 3.5/3; cell C: 4 over [2,3] → 2.
        assert!((s.spectrum.total - (3.5 / 3.0 + 2.0)).abs() < 1e-9);
        assert_eq!(s.spectrum.v_d2d, 0.0);
    }

    #[test]
    fn unreachable_demand_is_named() {
        let t = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .user("far", "B")
            .link("a", "B", 1.0)
            .link("far", "a", 1.0)
            .build()
            .unwrap();
        let d = DemandSet::new(3, [(1, 1, 1, 1.0)]).unwrap();
        match build_min_spectrum_d2d(&t, &d, &FlowOptions::default()) {
            Err(CoreError::UnreachableDemand {
                demand,
                user,
                needed,
                available,
            }) => {
                assert_eq!(
                    (demand, user.as_str(), needed, available),
                    (0, "far", Some(2), 1)
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pruning_preserves_the_optimum() {
        let (t, d) = toy();
        let r = prune_equivalence_check(&t, &d, &SolveOptions::default()).unwrap();
        assert!(r.agree, "{r:?}");
        assert!(r.pruned_vars < r.full_vars);
        assert!(r.reduction() > 0.0);
    }

    #[test]
    fn delay_one_demands_cannot_relay() {
        let (t, _) = toy();
        let d = DemandSet::new(2, [(0, 1, 1, 2.0), (1, 1, 1, 2.0), (2, 2, 2, 1.0)]).unwrap();
        for flow in [FlowOptions::default(), FlowOptions::unpruned()] {
            let s = solve_min_spectrum_d2d(&t, &d, &flow, &SolveOptions::default()).unwrap();
            assert!((s.spectrum.total - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn preload_counts_against_peaks() {
        let (t, d) = toy();
        let flow = FlowOptions {
            demands: Some(vec![]),
            preload: Some(vec![vec![1.0, 2.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 5.0]]),
            ..FlowOptions::default()
        };
        let s = solve_min_spectrum_d2d(&t, &d, &flow, &SolveOptions::default()).unwrap();
        assert!((s.spectrum.total - 7.0).abs() < 1e-9);
        assert!(s.schedule.is_empty());
    }
}
