//! Closed-form bounds on the spectrum reduction and overhead ratios, and explicit
//! instances whose schedules attain known ratios exactly.

use num_rational::Rational64;

use crate::error::{CoreError, Result};
use crate::model::{
    build_d2d_comm_graph, compute_volumes, discrepancy_params, metrics, peaks, per_slot_load,
    DemandSet, Metrics, Node, Schedule, Topology, TopologyBuilder,
};
use crate::nd::{yds_min_spectrum, CellDemand, CellInstance};
use crate::scalar::Scalar;

/// Slack used for the `satisfied` flag of a [`BoundReport`].
pub const BOUND_SLACK: f64 = 1e-6;

/// One upper bound, optionally compared with an observed value.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: &'static str,
    pub bound: f64,
    pub observed: Option<f64>,
    /// `observed ≤ bound + 1e-6`; `None` without an observation.
    pub satisfied: Option<bool>,
    /// Parameters the bound was computed from.
    pub inputs: Vec<(&'static str, f64)>,
}

impl BoundReport {
    pub fn upper(
        name: &'static str,
        bound: f64,
        observed: Option<f64>,
        inputs: Vec<(&'static str, f64)>,
    ) -> Self {
        Self {
            name,
            bound,
            observed,
            satisfied: observed.map(|o| o <= bound + BOUND_SLACK),
            inputs,
        }
    }
}

/// The demands of every cell served by one fictitious BS whose link rate is `R_max`.
pub fn grand_bs_instance(topology: &Topology, demands: &DemandSet) -> Result<CellInstance> {
    if let Some(&u) = topology.users_without_home_link().first() {
        return Err(CoreError::MissingHomeLink(
            topology.user_name(u).to_string(),
        ));
    }
    let r_max = topology.max_home_rate().unwrap_or(1.0);
    let all = demands
        .demands()
        .iter()
        .map(|d| CellDemand {
            id: d.id,
            user: d.user,
            start: d.start,
            end: d.end,
            volume: d.volume,
            rate: r_max,
        })
        .collect();
    CellInstance::from_parts(0, demands.horizon(), all)
}

/// Lower bound on `F^D2D` and the resulting upper bound on `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleBound {
    pub f_nd: f64,
    /// `F̲^D2D`: the maximum intensity of the grand-BS instance.
    pub f_lower: f64,
    pub critical_interval: Option<(usize, usize)>,
    /// `(F^ND − F̲^D2D) / F^ND`.
    pub rho_bound: f64,
}

/// Bound on `ρ` from the grand-BS relaxation, in which D2D transfers are free.
pub fn simple_rho_upper_bound(topology: &Topology, demands: &DemandSet) -> Result<SimpleBound> {
    let f_nd: f64 = (0..topology.num_bs())
        .map(|b| CellInstance::new(topology, demands, b).map(|c| yds_min_spectrum(&c).0))
        .sum::<Result<f64>>()?;
    let (f_lower, critical_interval) = yds_min_spectrum(&grand_bs_instance(topology, demands)?);
    if f_nd == 0.0 {
        return Err(CoreError::UndefinedMetric("F^ND is zero"));
    }
    Ok(SimpleBound {
        f_nd,
        f_lower,
        critical_interval,
        rho_bound: (f_nd - f_lower) / f_nd,
    })
}

/// `(max{r,1} + r̃Δ⁻ − 1) / (max{r,1} + r̃Δ⁻)`.
pub fn general_bound_formula(r: f64, r_tilde: f64, max_in_degree: usize) -> f64 {
    let denom = r.max(1.0) + r_tilde * max_in_degree as f64;
    (denom - 1.0) / denom
}

/// `(max{r,1} − 1) / max{r,1}`.
pub fn intra_cell_bound_formula(r: f64) -> f64 {
    let m = r.max(1.0);
    (m - 1.0) / m
}

/// `r̃Δ⁻ / (1 + r̃Δ⁻)`.
pub fn inter_cell_bound_formula(r_tilde: f64, max_in_degree: usize) -> f64 {
    let x = r_tilde * max_in_degree as f64;
    x / (1.0 + x)
}

/// General bound on `ρ` from the discrepancy ratios and the BS-level D2D graph.
pub fn general_rho_upper_bound(topology: &Topology) -> Result<f64> {
    let p = discrepancy_params(topology)?;
    let g = build_d2d_comm_graph(topology);
    Ok(general_bound_formula(p.r, p.r_tilde, g.max_in_degree))
}

/// Bound on `ρ` when only intra-cell D2D links exist.
pub fn intra_cell_bound(topology: &Topology) -> Result<f64> {
    Ok(intra_cell_bound_formula(discrepancy_params(topology)?.r))
}

/// Bound on `ρ` when only inter-cell D2D links exist.
pub fn inter_cell_bound(topology: &Topology) -> Result<f64> {
    let p = discrepancy_params(topology)?;
    Ok(inter_cell_bound_formula(
        p.r_tilde,
        build_d2d_comm_graph(topology).max_in_degree,
    ))
}

/// `(d_max − 1) / d_max`.
pub fn overhead_upper_bound(d_max: usize) -> Result<f64> {
    if d_max == 0 {
        return Err(CoreError::InvalidParameter {
            name: "d_max",
            reason: "must be at least 1".into(),
        });
    }
    Ok((d_max - 1) as f64 / d_max as f64)
}

/// Spectrum reduction after accounting for reuse factors, `1 − (K / K_d2d)(1 − ρ)`.
pub fn frequency_reuse_adjusted(rho: f64, k: f64, k_d2d: f64) -> Result<f64> {
    if !(k_d2d > 0.0 && k_d2d <= k && k.is_finite()) {
        return Err(CoreError::InvalidReuse { k, k_d2d });
    }
    Ok(1.0 - (k / k_d2d) * (1.0 - rho))
}

/// Every bound that applies to an instance, each checked against an observation when
/// one is supplied.
pub fn bound_suite(
    topology: &Topology,
    demands: &DemandSet,
    observed_rho: Option<f64>,
    observed_eta: Option<f64>,
) -> Result<Vec<BoundReport>> {
    let p = discrepancy_params(topology)?;
    let delta = build_d2d_comm_graph(topology).max_in_degree;
    let mut out = Vec::new();
    let simple = simple_rho_upper_bound(topology, demands)?;
    out.push(BoundReport::upper(
        "grand_bs_rho",
        simple.rho_bound,
        observed_rho,
        vec![("f_nd", simple.f_nd), ("f_lower", simple.f_lower)],
    ));
    let inputs = vec![
        ("r", p.r),
        ("r_tilde", p.r_tilde),
        ("max_in_degree", delta as f64),
    ];
    out.push(BoundReport::upper(
        "general_rho",
        general_bound_formula(p.r, p.r_tilde, delta),
        observed_rho,
        inputs.clone(),
    ));
    out.push(BoundReport::upper(
        "intra_cell_rho",
        intra_cell_bound_formula(p.r),
        None,
        vec![("r", p.r)],
    ));
    out.push(BoundReport::upper(
        "inter_cell_rho",
        inter_cell_bound_formula(p.r_tilde, delta),
        None,
        inputs[1..].to_vec(),
    ));
    let d_max = demands.d_max().max(1);
    out.push(BoundReport::upper(
        "overhead_eta",
        overhead_upper_bound(d_max)?,
        observed_eta,
        vec![("d_max", d_max as f64)],
    ));
    Ok(out)
}

/// An instance with an explicit schedule in exact arithmetic and its closed-form ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub topology: Topology,
    pub demands: DemandSet,
    pub schedule: Schedule<Rational64>,
    /// Closed-form `F^ND`.
    pub f_nd: Rational64,
    /// Closed-form per-BS peak of the schedule.
    pub f_d2d_per_bs: Rational64,
    /// Closed-form `ρ` and `η`.
    pub expected: Metrics<Rational64>,
}

/// Exact measurements of a [`Construction`]'s schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionCheck {
    pub per_bs_peak: Vec<Rational64>,
    pub f_nd: Rational64,
    pub v_d2d: Rational64,
    pub v_bs: Rational64,
    pub metrics: Metrics<Rational64>,
}

impl Construction {
    /// Measure peaks and volumes of the schedule and the no-D2D optimum, all exactly.
    pub fn measure(&self) -> Result<ConstructionCheck> {
        let load = per_slot_load(&self.schedule, &self.topology, self.demands.horizon());
        let per_bs_peak = peaks(&load);
        let f_d2d = per_bs_peak
            .iter()
            .fold(Rational64::from_integer(0), |a, &b| a + b);
        let (v_d2d, v_bs) = compute_volumes(&self.schedule, &self.topology);
        let f_nd = exact_nd_total(&self.topology, &self.demands)?;
        Ok(ConstructionCheck {
            metrics: metrics(f_nd, f_d2d, v_d2d, v_bs)?,
            per_bs_peak,
            f_nd,
            v_d2d,
            v_bs,
        })
    }
}

/// `F^ND` in exact arithmetic: per cell, the maximum intensity over generation times ×
/// deadlines.
pub fn exact_nd_total<T: Scalar>(topology: &Topology, demands: &DemandSet) -> Result<T> {
    let mut total = T::zero();
    for b in 0..topology.num_bs() {
        let cell = CellInstance::new(topology, demands, b)?;
        let mut best = T::zero();
        for z in cell.demands.iter().map(|d| d.start) {
            for z2 in cell.demands.iter().map(|d| d.end).filter(|&e| e >= z) {
                let work = cell
                    .demands
                    .iter()
                    .filter(|d| z <= d.start && d.end <= z2)
                    .fold(T::zero(), |acc, d| {
                        acc + T::from_f64(d.volume) / T::from_f64(d.rate)
                    });
                best = best.max_val(work / T::from_f64((z2 - z + 1) as f64));
            }
        }
        total = total + best;
    }
    Ok(total)
}

fn q(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn check_at_least(name: &'static str, value: usize, min: usize) -> Result<()> {
    if value < min {
        return Err(CoreError::InvalidParameter {
            name,
            reason: format!("must be at least {min}, got {value}"),
        });
    }
    Ok(())
}

/// One demand of volume `v` per user with disjoint lifetimes: user `i` (0-based) is active
/// in `[D·i + 1, D·(i + 1)]`.
fn singleton_decoupled(n: usize, d: usize, v: i64) -> DemandSet {
    DemandSet::new(n * d, (0..n).map(|i| (i, d * i + 1, d * (i + 1), v as f64)))
        .expect("lifetimes lie within the horizon")
}

/// `N` BSs with one user each and all rates 1. Users are joined to their home BS and, both
/// ways, to the users in `neighbours`.
fn one_user_per_cell(n: usize, neighbours: impl Fn(usize) -> Vec<usize>) -> Topology {
    let mut b = TopologyBuilder::new();
    for i in 1..=n {
        b = b.bs(format!("b{i}"));
    }
    for i in 1..=n {
        b = b
            .user(format!("u{i}"), format!("b{i}"))
            .link(format!("u{i}"), format!("b{i}"), 1.0);
    }
    for i in 0..n {
        for j in neighbours(i) {
            b = b.link(format!("u{}", i + 1), format!("u{}", j + 1), 1.0);
        }
    }
    b.build().expect("construction topologies are well formed")
}

/// Bidirectional ring of `N = 2D − 1` single-user cells with singleton-decoupled demands.
///
/// Each user sends `F = V/(3D − 2)` straight to its BS in every slot of its lifetime and
/// pushes `F` per slot along both ring directions: the `k`-th hop of a chain carries `F`
/// in the lifetime's slots `k..D − 1`, and every chain user hands `F` to its own BS in the
/// last slot.
pub fn build_ring_instance(d: usize, v: i64) -> Result<Construction> {
    check_at_least("D", d, 2)?;
    let n = 2 * d - 1;
    let topology = one_user_per_cell(n, |i| vec![(i + 1) % n, (i + n - 1) % n]);
    let demands = singleton_decoupled(n, d, v);
    let f = Rational64::new(v, (3 * d - 2) as i64);
    let mut schedule = Schedule::new();
    for i in 0..n {
        let s = d * i + 1;
        for t in s..s + d {
            schedule.put(i, t, Node::User(i), Node::Bs(i), f);
        }
        for dir in [1, n - 1] {
            let hop = |k: usize| (i + k * dir) % n;
            for k in 1..d {
                for t in s + k - 1..s + d - 1 {
                    schedule.put(i, t, Node::User(hop(k - 1)), Node::User(hop(k)), f);
                }
                schedule.put(i, s + d - 1, Node::User(hop(k)), Node::Bs(hop(k)), f);
            }
        }
    }
    schedule.fill_storage(&topology, &demands);
    let (di, ni) = (d as i64, n as i64);
    Ok(Construction {
        f_nd: Rational64::new(ni * v, di),
        f_d2d_per_bs: f,
        expected: Metrics {
            rho: Rational64::new(2 * (di - 1), 3 * di - 2),
            eta: Rational64::new(di * (di - 1), di * di + 2 * di - 2),
        },
        topology,
        demands,
        schedule,
    })
}

/// Bidirectional complete graph of `N` single-user cells with singleton-decoupled demands.
///
/// Each user sends `F = 2V/((N + 1)D)` straight to its BS in every slot and relays through
/// every other user: `F` per slot over the first half of the lifetime, forwarded to the
/// relay's BS over the second half. For odd `D` the middle slot carries `F/2` on both hops.
pub fn build_complete_instance(n: usize, d: usize, v: i64) -> Result<Construction> {
    check_at_least("N", n, 2)?;
    check_at_least("D", d, 2)?;
    let topology = one_user_per_cell(n, |i| (0..n).filter(|&j| j != i).collect());
    let demands = singleton_decoupled(n, d, v);
    let (ni, di) = (n as i64, d as i64);
    let f = Rational64::new(2 * v, (ni + 1) * di);
    let half = d / 2;
    let mut schedule = Schedule::new();
    for i in 0..n {
        let s = d * i + 1;
        for t in s..s + d {
            schedule.put(i, t, Node::User(i), Node::Bs(i), f);
        }
        for relay in (0..n).filter(|&j| j != i) {
            for t in s..s + half {
                schedule.put(i, t, Node::User(i), Node::User(relay), f);
            }
            for t in s + d - half..s + d {
                schedule.put(i, t, Node::User(relay), Node::Bs(relay), f);
            }
            if d % 2 == 1 {
                let mid = s + half;
                schedule.put(i, mid, Node::User(i), Node::User(relay), f / q(2));
                schedule.put(i, mid, Node::User(relay), Node::Bs(relay), f / q(2));
            }
        }
    }
    schedule.fill_storage(&topology, &demands);
    Ok(Construction {
        f_nd: Rational64::new(ni * v, di),
        f_d2d_per_bs: f,
        expected: Metrics {
            rho: Rational64::new(ni - 1, ni + 1),
            eta: Rational64::new(ni - 1, 2 * ni),
        },
        topology,
        demands,
        schedule,
    })
}

/// One cell with users `a` and `b`: `a → BS` at rate 1, `a → b` at rate `r0` and
/// `b → BS` at rate `(D − 1)·r0`. User `a` has one demand of volume `V` over `[1, D]`.
///
/// The schedule sends `V/(D − 1)` bits per slot from `a` to `b` in slots `1..D − 1` and
/// all `V` bits from `b` to the BS in slot `D`, so every bit crosses one D2D link and
/// `η = 1/2`. `r0` must be an integer.
pub fn build_intra_cell_instance(r0: i64, d: usize, v: i64) -> Result<Construction> {
    check_at_least("D", d, 2)?;
    if r0 < 1 {
        return Err(CoreError::InvalidParameter {
            name: "r",
            reason: format!("must be a positive integer, got {r0}"),
        });
    }
    let dm1 = (d - 1) as i64;
    let topology = TopologyBuilder::new()
        .bs("bs")
        .user("a", "bs")
        .user("b", "bs")
        .link("a", "bs", 1.0)
        .link("a", "b", r0 as f64)
        .link("b", "bs", (dm1 * r0) as f64)
        .build()?;
    let demands = DemandSet::new(d, [(0, 1, d, v as f64)])?;
    let relay = Rational64::new(v, dm1 * r0);
    let mut schedule = Schedule::new();
    for t in 1..d {
        schedule.put(0, t, Node::User(0), Node::User(1), relay);
    }
    schedule.put(0, d, Node::User(1), Node::Bs(0), relay);
    schedule.fill_storage(&topology, &demands);
    let di = d as i64;
    let f_nd = Rational64::new(v, di);
    let rho = q(1) - Rational64::new(di, dm1 * r0);
    Ok(Construction {
        f_nd,
        f_d2d_per_bs: relay,
        expected: Metrics {
            rho,
            eta: Rational64::new(1, 2),
        },
        topology,
        demands,
        schedule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schedule, Tolerance};

    #[test]
    fn formula_examples() {
        assert!((general_bound_formula(1.0, 1.0, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(general_bound_formula(0.5, 0.0, 0), 0.0);
        assert!((general_bound_formula(2.0, 1.0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(intra_cell_bound_formula(0.7), 0.0);
        assert_eq!(intra_cell_bound_formula(2.0), 0.5);
        assert!((inter_cell_bound_formula(1.0, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(inter_cell_bound_formula(1.0, 0), 0.0);
        assert_eq!(overhead_upper_bound(2).unwrap(), 0.5);
        assert_eq!(overhead_upper_bound(1).unwrap(), 0.0);
        assert_eq!(overhead_upper_bound(5).unwrap(), 0.8);
        assert!(overhead_upper_bound(0).is_err());
    }

    #[test]
    fn reuse_adjustment() {
        assert_eq!(frequency_reuse_adjusted(0.25, 0.5, 0.5).unwrap(), 0.25);
        assert_eq!(frequency_reuse_adjusted(0.5, 1.0, 0.5).unwrap(), 0.0);
        let x = frequency_reuse_adjusted(0.25, 1.0 / 7.0, 1.0 / 8.0).unwrap();
        assert!((x - (1.0 - 8.0 / 7.0 * 0.75)).abs() < 1e-15);
        assert!((x - 0.142857).abs() < 1e-6);
        assert!(matches!(
            frequency_reuse_adjusted(0.2, 0.1, 0.2),
            Err(CoreError::InvalidReuse { .. })
        ));
    }

    #[test]
    fn ring_construction_is_exact() {
        for (d, rho, eta) in [
            (2, Rational64::new(1, 2), Rational64::new(1, 3)),
            (3, Rational64::new(4, 7), Rational64::new(6, 13)),
        ] {
            let c = build_ring_instance(d, 7).unwrap();
            assert_eq!(c.topology.num_bs(), 2 * d - 1);
            assert_eq!(c.expected.rho, rho);
            assert_eq!(c.expected.eta, eta);
            let rep = validate_schedule(&c.schedule, &c.topology, &c.demands, Tolerance::default());
            assert!(rep.is_valid(), "D={d}: {rep}");
            let m = c.measure().unwrap();
            assert!(m.per_bs_peak.iter().all(|&p| p == c.f_d2d_per_bs));
            assert_eq!(m.f_nd, c.f_nd);
            assert_eq!(m.metrics, c.expected);
        }
    }

    #[test]
    fn complete_construction_covers_both_parities() {
        for (n, d) in [(2, 2), (3, 2), (3, 3), (4, 5)] {
            let c = build_complete_instance(n, d, 6).unwrap();
            let rep = validate_schedule(&c.schedule, &c.topology, &c.demands, Tolerance::default());
            assert!(rep.is_valid(), "N={n} D={d}: {rep}");
            let m = c.measure().unwrap();
            assert!(m.per_bs_peak.iter().all(|&p| p == c.f_d2d_per_bs));
            assert_eq!(m.metrics, c.expected);
        }
        let c = build_complete_instance(2, 2, 6).unwrap();
        assert_eq!(c.expected.rho, Rational64::new(1, 3));
        assert_eq!(c.expected.eta, Rational64::new(1, 4));
    }

    #[test]
    fn intra_cell_example() {
        let c = build_intra_cell_instance(3, 4, 12).unwrap();
        assert!(
            validate_schedule(&c.schedule, &c.topology, &c.demands, Tolerance::default())
                .is_valid()
        );
        let m = c.measure().unwrap();
        assert_eq!(m.metrics.rho, q(1) - Rational64::new(4, 9));
        assert_eq!(m.metrics.rho, c.expected.rho);
        let p = discrepancy_params(&c.topology).unwrap();
        assert_eq!(p.r_user, vec![3.0, 0.0]);
    }

    #[test]
    fn bad_construction_parameters() {
        assert!(build_ring_instance(1, 1).is_err());
        assert!(build_complete_instance(1, 2, 1).is_err());
        assert!(build_complete_instance(2, 1, 1).is_err());
        assert!(build_intra_cell_instance(0, 3, 1).is_err());
    }
}
