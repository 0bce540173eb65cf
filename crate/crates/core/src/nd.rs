//! Minimum per-cell spectrum without D2D.
//!
//! Without relaying, every demand of cell `b` travels on its user's direct link to `b`, so
//! demand `j` needs `w_j = r_j / R_{u_j,b}` Hz-slots of spectrum inside `[s_j, e_j]`. The
//! minimum peak equals the largest intensity `Σ_{[s_j,e_j] ⊆ I} w_j / |I|` over intervals
//! `I`, and fluid earliest-deadline-first service at that peak meets every deadline.

use d2dlb_lp::{LpProblem, Relation, SolveOptions, VarId};
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::model::{per_slot_load, DemandSet, Key, Node, Schedule, SpectrumResult, Topology};

/// Relative tolerance on a demand's unfinished work in [`edf_feasible`].
pub const EDF_TOLERANCE: f64 = 1e-9;

/// One demand as seen by a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellDemand {
    /// Global demand id.
    pub id: usize,
    pub user: usize,
    pub start: usize,
    pub end: usize,
    /// Bits.
    pub volume: f64,
    /// Direct-link rate `R_{u_j,b}`.
    pub rate: f64,
}

impl CellDemand {
    /// Spectrum-slots needed on the direct link, `r_j / R_{u_j,b}`.
    pub fn work(&self) -> f64 {
        self.volume / self.rate
    }
}

/// The demands of one cell and their direct-link rates, in ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellInstance {
    pub bs: usize,
    pub horizon: usize,
    pub demands: Vec<CellDemand>,
}

impl CellInstance {
    /// Collect the demands of users homed at `b`.
    pub fn new(topology: &Topology, demands: &DemandSet, b: usize) -> Result<Self> {
        let cell = demands
            .of_cell(topology, b)
            .map(|d| {
                let rate = topology.home_rate(d.user).ok_or_else(|| {
                    CoreError::MissingHomeLink(topology.user_name(d.user).to_string())
                })?;
                Ok(CellDemand {
                    id: d.id,
                    user: d.user,
                    start: d.start,
                    end: d.end,
                    volume: d.volume,
                    rate,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bs: b,
            horizon: demands.horizon(),
            demands: cell,
        })
    }

    /// Build a cell directly, e.g. a fictitious BS. Volumes may be zero.
    pub fn from_parts(bs: usize, horizon: usize, mut demands: Vec<CellDemand>) -> Result<Self> {
        demands.sort_by_key(|d| d.id);
        for d in &demands {
            let fail = |reason: String| Err(CoreError::InvalidDemand { id: d.id, reason });
            if d.start < 1 || d.start > d.end || d.end > horizon {
                return fail(format!(
                    "lifetime [{}, {}] not within [1, {horizon}]",
                    d.start, d.end
                ));
            }
            if !(d.volume.is_finite() && d.volume >= 0.0) {
                return fail(format!(
                    "volume {} must be nonnegative and finite",
                    d.volume
                ));
            }
            if !(d.rate.is_finite() && d.rate > 0.0) {
                return fail(format!("rate {} must be positive and finite", d.rate));
            }
        }
        Ok(Self {
            bs,
            horizon,
            demands,
        })
    }
}

/// Intensity `g(I)` of `I = [z, z2]`: total work of demands whose lifetime lies inside
/// `I`, divided by the interval length.
pub fn intensity(cell: &CellInstance, z: usize, z2: usize) -> Result<f64> {
    if z < 1 || z > z2 || z2 > cell.horizon {
        return Err(CoreError::InvalidInterval {
            start: z,
            end: z2,
            horizon: cell.horizon,
        });
    }
    Ok(intensity_unchecked(cell, z, z2))
}

fn intensity_unchecked(cell: &CellInstance, z: usize, z2: usize) -> f64 {
    let work: f64 = cell
        .demands
        .iter()
        .filter(|d| z <= d.start && d.end <= z2)
        .map(CellDemand::work)
        .sum();
    work / (z2 - z + 1) as f64
}

/// Maximum intensity and the first interval (smallest start, then smallest end) that
/// attains it. Candidates are generation times × deadlines. Empty cells give `(0, None)`.
pub fn yds_min_spectrum(cell: &CellInstance) -> (f64, Option<(usize, usize)>) {
    let mut starts: Vec<usize> = cell.demands.iter().map(|d| d.start).collect();
    let mut ends: Vec<usize> = cell.demands.iter().map(|d| d.end).collect();
    starts.sort_unstable();
    starts.dedup();
    ends.sort_unstable();
    ends.dedup();
    let mut best = 0.0;
    let mut arg = None;
    for &z in &starts {
        for &z2 in ends.iter().filter(|&&e| e >= z) {
            let g = intensity_unchecked(cell, z, z2);
            if arg.is_none() || g > best {
                best = g;
                arg = Some((z, z2));
            }
        }
    }
    (best, arg)
}

/// Outcome of fluid EDF service at a fixed per-slot capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfOutcome {
    pub feasible: bool,
    /// Direct-link allocations and storage; present only when feasible.
    pub schedule: Option<Schedule>,
    /// Spectrum used per slot, indexed `t − 1`.
    pub load: Vec<f64>,
}

/// Serve slots `1..=T` with capacity `f` Hz, giving each slot's capacity to released,
/// unfinished demands in ascending (deadline, id) order.
pub fn edf_feasible(cell: &CellInstance, f: f64) -> EdfOutcome {
    let mut order: Vec<usize> = (0..cell.demands.len()).collect();
    order.sort_by_key(|&i| (cell.demands[i].end, cell.demands[i].id));
    let mut remaining: Vec<f64> = cell.demands.iter().map(CellDemand::work).collect();
    let mut load = vec![0.0; cell.horizon];
    let mut direct = Schedule::new();
    let mut feasible = true;
    for t in 1..=cell.horizon {
        let mut cap = f;
        for &i in &order {
            let d = &cell.demands[i];
            if !(d.start <= t && t <= d.end) || remaining[i] <= 0.0 {
                continue;
            }
            if cap <= 0.0 {
                break;
            }
            let x = remaining[i].min(cap);
            cap -= x;
            remaining[i] -= x;
            if remaining[i] <= EDF_TOLERANCE * d.work() {
                remaining[i] = 0.0;
            }
            load[t - 1] += x;
            direct.put(d.id, t, Node::User(d.user), Node::Bs(cell.bs), x);
        }
        if cell
            .demands
            .iter()
            .zip(&remaining)
            .any(|(d, &rem)| d.end == t && rem > 0.0)
        {
            feasible = false;
            break;
        }
    }
    let schedule = feasible.then(|| {
        add_direct_storage(cell, &mut direct);
        direct
    });
    EdfOutcome {
        feasible,
        schedule,
        load,
    }
}

/// Insert the self-link entries implied by direct transmissions: the user keeps what it
/// has not sent yet and the BS keeps what it has already received.
fn add_direct_storage(cell: &CellInstance, schedule: &mut Schedule) {
    let (u_bs, bs) = (Node::Bs(cell.bs), cell.bs);
    for d in &cell.demands {
        let user = Node::User(d.user);
        let mut held = d.volume;
        let mut delivered = 0.0;
        for t in d.start..=d.end {
            let key = Key {
                demand: d.id,
                slot: t,
                src: user,
                dst: Node::Bs(bs),
            };
            let sent = schedule.get(&key) * d.rate;
            held -= sent;
            if delivered > 0.0 {
                schedule.put(d.id, t, u_bs, u_bs, delivered);
            }
            if t < d.end && held > 0.0 {
                schedule.put(d.id, t, user, user, held);
            }
            delivered += sent;
        }
    }
}

/// Smallest EDF-feasible capacity, by bisection on `[0, Σ_j w_j]` down to a bracket width
/// of `1e-9 · Σ_j w_j`.
pub fn binary_search_min_spectrum(cell: &CellInstance) -> f64 {
    let upper: f64 = cell.demands.iter().map(CellDemand::work).sum();
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > 1e-9 * upper {
        let mid = 0.5 * (lo + hi);
        if edf_feasible(cell, mid).feasible {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The per-cell no-D2D LP: allocations `x_j(t)`, loads `γ(t)` and the peak `F`.
pub fn build_min_spectrum_nd(
    cell: &CellInstance,
) -> (LpProblem, Vec<(usize, usize, VarId)>, VarId) {
    let mut lp = LpProblem::new(format!("min_spectrum_nd_b{}", cell.bs));
    let f = lp.add_nonneg("F");
    let gamma: Vec<VarId> = (1..=cell.horizon)
        .map(|t| lp.add_nonneg(format!("gamma_{t}")))
        .collect();
    let mut per_slot: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); cell.horizon];
    let mut xs = Vec::new();
    for (i, d) in cell.demands.iter().enumerate() {
        let mut row = Vec::with_capacity(d.end - d.start + 1);
        for t in d.start..=d.end {
            let x = lp.add_nonneg(format!("x_{}_{t}", d.id));
            row.push((x, d.rate));
            per_slot[t - 1].push((x, 1.0));
            xs.push((i, t, x));
        }
        lp.add_constraint(format!("volume_{}", d.id), row, Relation::Eq, d.volume);
    }
    for (t, mut terms) in per_slot.into_iter().enumerate() {
        terms.push((gamma[t], -1.0));
        lp.add_constraint(format!("load_{}", t + 1), terms, Relation::Eq, 0.0);
        lp.add_constraint(
            format!("peak_{}", t + 1),
            vec![(gamma[t], 1.0), (f, -1.0)],
            Relation::Le,
            0.0,
        );
    }
    lp.set_objective(vec![(f, 1.0)], 0.0);
    (lp, xs, f)
}

/// Solve the per-cell no-D2D LP; returns the optimum and its schedule.
pub fn min_spectrum_nd_lp(cell: &CellInstance, options: &SolveOptions) -> Result<(f64, Schedule)> {
    let (lp, xs, _) = build_min_spectrum_nd(cell);
    let sol = d2dlb_lp::solve(&lp, options)?;
    if !sol.is_optimal() {
        return Err(CoreError::Solver {
            context: format!("no-D2D LP of BS {}", cell.bs),
            status: sol.status,
        });
    }
    let mut schedule = Schedule::new();
    for (i, t, x) in xs {
        let v = sol.values[x.0];
        if v > 0.0 {
            let d = &cell.demands[i];
            schedule.put(d.id, t, Node::User(d.user), Node::Bs(cell.bs), v);
        }
    }
    add_direct_storage(cell, &mut schedule);
    Ok((sol.objective.max(0.0), schedule))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NdMethod {
    /// Maximum intensity, with the EDF schedule at that capacity.
    #[default]
    Yds,
    /// The per-cell LP and its optimal schedule.
    Lp,
}

/// Per-cell outcome of [`nd_total`].
#[derive(Debug, Clone, PartialEq)]
pub struct NdCellResult {
    pub bs: usize,
    /// `F_b^ND`.
    pub spectrum: f64,
    /// Critical interval from the intensity search; `None` for empty cells and the LP.
    pub critical_interval: Option<(usize, usize)>,
    /// `γ_b(t)`, indexed `t − 1`.
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdResult {
    pub cells: Vec<NdCellResult>,
    /// Peaks are the provisioned `F_b^ND`.
    pub spectrum: SpectrumResult,
    pub schedule: Schedule,
}

impl NdResult {
    pub fn total(&self) -> f64 {
        self.spectrum.total
    }
}

/// `F^ND = Σ_b F_b^ND` with the union of the per-cell schedules.
pub fn nd_total(
    topology: &Topology,
    demands: &DemandSet,
    method: NdMethod,
    options: &SolveOptions,
) -> Result<NdResult> {
    demands.check_users(topology)?;
    let per_cell = (0..topology.num_bs())
        .into_par_iter()
        .map(|b| -> Result<(NdCellResult, Schedule)> {
            let cell = CellInstance::new(topology, demands, b)?;
            let (f, interval, schedule) = match method {
                NdMethod::Yds => {
                    let (f, interval) = yds_min_spectrum(&cell);
                    let edf = edf_feasible(&cell, f);
                    let schedule = edf.schedule.ok_or_else(|| CoreError::InvalidParameter {
                        name: "edf",
                        reason: format!(
                            "EDF at the maximum intensity {f} missed a deadline in BS {b}"
                        ),
                    })?;
                    (f, interval, schedule)
                }
                NdMethod::Lp => {
                    let (f, s) = min_spectrum_nd_lp(&cell, options)?;
                    (f, None, s)
                }
            };
            let gamma = per_slot_load(&schedule, topology, demands.horizon()).swap_remove(b);
            Ok((
                NdCellResult {
                    bs: b,
                    spectrum: f,
                    critical_interval: interval,
                    gamma,
                },
                schedule,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut schedule = Schedule::new();
    let mut cells = Vec::with_capacity(per_cell.len());
    for (c, s) in per_cell {
        schedule.merge(&s);
        cells.push(c);
    }
    let load = per_slot_load(&schedule, topology, demands.horizon());
    let peaks = cells.iter().map(|c| c.spectrum).collect();
    let spectrum = SpectrumResult::with_peaks(&schedule, topology, peaks, load);
    Ok(NdResult {
        cells,
        spectrum,
        schedule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schedule, Tolerance, TopologyBuilder};

    fn cd(id: usize, start: usize, end: usize, volume: f64, rate: f64) -> CellDemand {
        CellDemand {
            id,
            user: id,
            start,
            end,
            volume,
            rate,
        }
    }

    /// Cell α of the two-cell toy network: two users with 3 units each over [1, 2].
    fn alpha() -> CellInstance {
        CellInstance::from_parts(0, 4, vec![cd(0, 1, 2, 3.0, 1.0), cd(1, 1, 2, 3.0, 1.0)]).unwrap()
    }

    #[test]
    fn intensity_examples() {
        assert_eq!(intensity(&alpha(), 1, 2).unwrap(), 3.0);
        assert_eq!(intensity(&alpha(), 2, 4).unwrap(), 0.0);
        let c = CellInstance::from_parts(0, 3, vec![cd(0, 1, 3, 6.0, 2.0)]).unwrap();
        assert_eq!(intensity(&c, 1, 3).unwrap(), 1.0);
        assert!(intensity(&c, 2, 1).is_err());
        assert!(intensity(&c, 0, 1).is_err());
        assert!(intensity(&c, 1, 4).is_err());
    }

    #[test]
    fn yds_toy_cell() {
        let (f, i) = yds_min_spectrum(&alpha());
        assert_eq!((f, i), (3.0, Some((1, 2))));
        let empty = CellInstance::from_parts(0, 3, vec![]).unwrap();
        assert_eq!(yds_min_spectrum(&empty), (0.0, None));
    }

    #[test]
    fn yds_single_demand() {
        let c = CellInstance::from_parts(0, 9, vec![cd(0, 3, 7, 10.0, 4.0)]).unwrap();
        assert_eq!(yds_min_spectrum(&c).0, 10.0 / (4.0 * 5.0));
    }

    #[test]
    fn edf_threshold_on_toy_cell() {
        assert!(edf_feasible(&alpha(), 3.0).feasible);
        assert!(!edf_feasible(&alpha(), 2.9).feasible);
        assert!(edf_feasible(&alpha(), 2.9).schedule.is_none());
    }

    #[test]
    fn edf_orders_by_deadline_then_id() {
        let c = CellInstance::from_parts(
            0,
            2,
            vec![
                cd(0, 1, 2, 1.0, 1.0),
                cd(1, 1, 1, 1.0, 1.0),
                cd(2, 1, 2, 1.0, 1.0),
            ],
        )
        .unwrap();
        let out = edf_feasible(&c, 1.5);
        assert!(out.feasible);
        let s = out.schedule.unwrap();
        let x = |id, t| {
            s.get(&Key {
                demand: id,
                slot: t,
                src: Node::User(id),
                dst: Node::Bs(0),
            })
        };
        assert_eq!((x(1, 1), x(0, 1), x(2, 1)), (1.0, 0.5, 0.0));
        assert_eq!((x(0, 2), x(2, 2)), (0.5, 1.0));
    }

    #[test]
    fn lp_and_binary_search_match_yds_on_toy_cell() {
        let opts = SolveOptions::default();
        let (f, _) = min_spectrum_nd_lp(&alpha(), &opts).unwrap();
        assert!((f - 3.0).abs() < 1e-9);
        assert!((binary_search_min_spectrum(&alpha()) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn zero_volume_cell_needs_no_spectrum() {
        let c = CellInstance::from_parts(0, 3, vec![cd(0, 1, 2, 0.0, 1.0), cd(1, 2, 3, 0.0, 2.0)])
            .unwrap();
        let (f, _) = min_spectrum_nd_lp(&c, &SolveOptions::default()).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(yds_min_spectrum(&c).0, 0.0);
    }

    #[test]
    fn nd_total_on_toy_network_validates() {
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
            .link("b", "c", 1.0)
            .link("c", "b", 1.0)
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
        let opts = SolveOptions::default();
        for method in [NdMethod::Yds, NdMethod::Lp] {
            let res = nd_total(&t, &d, method, &opts).unwrap();
            assert!((res.total() - 6.0).abs() < 1e-9);
            let rep = validate_schedule(&res.schedule, &t, &d, Tolerance::default());
            assert!(rep.is_valid(), "{method:?}: {rep}");
            assert_eq!(res.spectrum.v_d2d, 0.0);
            assert!((res.spectrum.v_bs - 12.0).abs() < 1e-9);
        }
    }

    #[test]
    fn nd_total_single_bs_without_demands() {
        let t = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .link("a", "B", 1.0)
            .build()
            .unwrap();
        let res = nd_total(
            &t,
            &DemandSet::empty(5),
            NdMethod::Yds,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(res.total(), 0.0);
    }
}
