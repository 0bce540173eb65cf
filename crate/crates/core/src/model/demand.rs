use crate::error::{CoreError, Result};
use crate::model::Topology;

/// A delay-constrained uplink demand: `volume` bits generated at user `user` in slot
/// `start` that must reach some BS by slot `end` (both 1-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub id: usize,
    pub user: usize,
    pub start: usize,
    pub end: usize,
    pub volume: f64,
}

impl Demand {
    /// Number of slots in the lifetime, `e − s + 1`.
    pub fn delay(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_active(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn slots(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

/// All demands over a horizon of `T` slots. Ids equal positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSet {
    horizon: usize,
    demands: Vec<Demand>,
}

impl DemandSet {
    /// Build from `(user, start, end, volume)` tuples; ids are assigned in order.
    pub fn new(
        horizon: usize,
        demands: impl IntoIterator<Item = (usize, usize, usize, f64)>,
    ) -> Result<Self> {
        let demands: Vec<Demand> = demands
            .into_iter()
            .enumerate()
            .map(|(id, (user, start, end, volume))| Demand {
                id,
                user,
                start,
                end,
                volume,
            })
            .collect();
        for d in &demands {
            let fail = |reason: String| Err(CoreError::InvalidDemand { id: d.id, reason });
            if d.start < 1 || d.start > d.end || d.end > horizon {
                return fail(format!(
                    "lifetime [{}, {}] not within [1, {horizon}]",
                    d.start, d.end
                ));
            }
            if !(d.volume.is_finite() && d.volume > 0.0) {
                return fail(format!("volume {} must be positive and finite", d.volume));
            }
        }
        Ok(Self { horizon, demands })
    }

    pub fn empty(horizon: usize) -> Self {
        Self {
            horizon,
            demands: Vec::new(),
        }
    }

    /// Check that every demand's user exists in `topology`.
    pub fn check_users(&self, topology: &Topology) -> Result<()> {
        match self.demands.iter().find(|d| d.user >= topology.num_users()) {
            Some(d) => Err(CoreError::InvalidDemand {
                id: d.id,
                reason: format!("user index {} does not exist", d.user),
            }),
            None => Ok(()),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    pub fn get(&self, id: usize) -> &Demand {
        &self.demands[id]
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    /// Longest lifetime `d_max`; 0 for an empty set.
    pub fn d_max(&self) -> usize {
        self.demands.iter().map(Demand::delay).max().unwrap_or(0)
    }

    pub fn total_volume(&self) -> f64 {
        self.demands.iter().map(|d| d.volume).sum()
    }

    /// Demands whose user is homed at `b`, in id order.
    pub fn of_cell<'a>(
        &'a self,
        topology: &'a Topology,
        b: usize,
    ) -> impl Iterator<Item = &'a Demand> + 'a {
        self.demands
            .iter()
            .filter(move |d| topology.home(d.user) == b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_lifetimes_and_volumes() {
        assert!(DemandSet::new(4, [(0, 1, 2, 3.0)]).is_ok());
        assert!(DemandSet::new(4, [(0, 0, 2, 3.0)]).is_err());
        assert!(DemandSet::new(4, [(0, 3, 2, 3.0)]).is_err());
        assert!(DemandSet::new(4, [(0, 3, 5, 3.0)]).is_err());
        assert!(DemandSet::new(4, [(0, 1, 1, 0.0)]).is_err());
        assert!(DemandSet::new(4, [(0, 1, 1, f64::INFINITY)]).is_err());
    }

    #[test]
    fn d_max_and_ids() {
        let d = DemandSet::new(10, [(0, 1, 3, 1.0), (1, 2, 7, 2.0)]).unwrap();
        assert_eq!(d.d_max(), 6);
        assert_eq!(d.get(1).id, 1);
        assert_eq!(d.total_volume(), 3.0);
        assert_eq!(DemandSet::empty(3).d_max(), 0);
    }
}
