use crate::error::{CoreError, Result};
use crate::model::{charged_bs, Node, Schedule, Topology};
use crate::scalar::Scalar;

/// D2D volume (user → user, excluding self-links) and user → BS volume of a schedule.
pub fn compute_volumes<T: Scalar>(schedule: &Schedule<T>, topology: &Topology) -> (T, T) {
    let mut v_d2d = T::zero();
    let mut v_bs = T::zero();
    for (k, x) in schedule.iter() {
        if k.is_self_link() || k.src.is_bs() {
            continue;
        }
        let Some(bits) = schedule.bits(topology, k, x) else {
            continue;
        };
        match k.dst {
            Node::User(_) => v_d2d = v_d2d + bits,
            Node::Bs(_) => v_bs = v_bs + bits,
        }
    }
    (v_d2d, v_bs)
}

/// Spectrum charged to each BS in each slot, `α_b(t) + β_b(t)`, indexed `[b][t − 1]`.
pub fn per_slot_load<T: Scalar>(
    schedule: &Schedule<T>,
    topology: &Topology,
    horizon: usize,
) -> Vec<Vec<T>> {
    let mut load = vec![vec![T::zero(); horizon]; topology.num_bs()];
    for (k, x) in schedule.iter() {
        if let Some(b) = charged_bs(topology, k) {
            if (1..=horizon).contains(&k.slot) {
                let cell = &mut load[b][k.slot - 1];
                *cell = cell.clone() + x.clone();
            }
        }
    }
    load
}

/// Peak of each row of a load table; 0 for an empty horizon.
pub fn peaks<T: Scalar>(load: &[Vec<T>]) -> Vec<T> {
    load.iter()
        .map(|row| row.iter().cloned().fold(T::zero(), T::max_val))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<T = f64> {
    /// Spectrum reduction ratio `(F^ND − F^D2D) / F^ND`.
    pub rho: T,
    /// Overhead ratio `V^D2D / (V^D2D + V^BS)`.
    pub eta: T,
}

/// Spectrum reduction and overhead ratios.
pub fn metrics<T: Scalar>(f_nd: T, f_d2d: T, v_d2d: T, v_bs: T) -> Result<Metrics<T>> {
    if f_nd == T::zero() {
        return Err(CoreError::UndefinedMetric("F^ND is zero"));
    }
    let total = v_d2d.clone() + v_bs;
    if total == T::zero() {
        return Err(CoreError::UndefinedMetric("no traffic was transmitted"));
    }
    Ok(Metrics {
        rho: (f_nd.clone() - f_d2d) / f_nd,
        eta: v_d2d / total,
    })
}

/// Spectrum and volume summary of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult<T = f64> {
    /// `F_b` per BS.
    pub per_bs_peak: Vec<T>,
    /// `Σ_b F_b`.
    pub total: T,
    pub v_d2d: T,
    pub v_bs: T,
    /// `α_b(t) + β_b(t)`, indexed `[b][t − 1]`.
    pub per_slot_load: Vec<Vec<T>>,
}

impl<T: Scalar> SpectrumResult<T> {
    /// Measure a schedule. Peaks are the realized per-slot maxima.
    pub fn from_schedule(schedule: &Schedule<T>, topology: &Topology, horizon: usize) -> Self {
        let load = per_slot_load(schedule, topology, horizon);
        Self::with_peaks(schedule, topology, peaks(&load), load)
    }

    /// Measure a schedule with provisioned peaks, e.g. LP `F_b` values that may exceed
    /// the realized load.
    pub fn with_peaks(
        schedule: &Schedule<T>,
        topology: &Topology,
        per_bs_peak: Vec<T>,
        load: Vec<Vec<T>>,
    ) -> Self {
        let (v_d2d, v_bs) = compute_volumes(schedule, topology);
        let total = per_bs_peak.iter().cloned().fold(T::zero(), |a, b| a + b);
        Self {
            per_bs_peak,
            total,
            v_d2d,
            v_bs,
            per_slot_load: load,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TopologyBuilder;
    use num_rational::Rational64;

    #[test]
    fn toy_metric_values() {
        let m = metrics(6.0, 4.0, 4.0, 12.0).unwrap();
        assert!((m.rho - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.eta, 0.25);
        let r = |n| Rational64::from_integer(n);
        let exact = metrics(r(6), r(4), r(4), r(12)).unwrap();
        assert_eq!(exact.rho, Rational64::new(1, 3));
        assert_eq!(exact.eta, Rational64::new(1, 4));
    }

    #[test]
    fn degenerate_metrics() {
        assert_eq!(
            metrics(5.0, 5.0, 0.0, 3.0).unwrap(),
            Metrics { rho: 0.0, eta: 0.0 }
        );
        assert!(metrics(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(metrics(1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn receiver_takeover_charging() {
        let t = TopologyBuilder::new()
            .bs("B")
            .bs("C")
            .user("a", "B")
            .user("b", "C")
            .link("a", "b", 2.0)
            .link("b", "C", 1.0)
            .build()
            .unwrap();
        let mut s: Schedule = Schedule::new();
        s.put(0, 1, Node::User(0), Node::User(1), 1.5);
        s.put(0, 1, Node::User(0), Node::User(0), 9.0);
        s.put(0, 2, Node::User(1), Node::Bs(1), 3.0);
        let res = SpectrumResult::from_schedule(&s, &t, 2);
        assert_eq!(res.per_slot_load, vec![vec![0.0, 0.0], vec![1.5, 3.0]]);
        assert_eq!(res.per_bs_peak, vec![0.0, 3.0]);
        assert_eq!(res.total, 3.0);
        assert_eq!((res.v_d2d, res.v_bs), (3.0, 3.0));
    }
}
