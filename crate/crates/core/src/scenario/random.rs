use rand::Rng;

use crate::error::{CoreError, Result};
use crate::model::{DemandSet, Instance};
use crate::scenario::{cell_rng, generate_topology, hex_positions, GeoParams};

/// Parameters of [`random_instance`]: a hexagonal cluster of geometric cells with
/// uniformly random demands.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub geo: GeoParams,
    pub cells: usize,
    /// Distance between neighbouring BSs in meters.
    pub bs_spacing: f64,
    pub demands: usize,
    pub horizon: usize,
    /// Delays are drawn uniformly from `1..=max_delay` and clipped to the horizon.
    pub max_delay: usize,
    /// Volumes are drawn uniformly from `(0, max_volume]`.
    pub max_volume: f64,
}

impl Default for RandomInstance {
    fn default() -> Self {
        Self {
            geo: GeoParams {
                users_per_cell: 5,
                d2d_range: 150.0,
                ..GeoParams::default()
            },
            cells: 3,
            bs_spacing: 450.0,
            demands: 60,
            horizon: 12,
            max_delay: 4,
            max_volume: 100.0,
        }
    }
}

/// Generate an instance; the topology uses `geo.seed` and the demands a stream derived
/// from it.
pub fn random_instance(p: &RandomInstance) -> Result<Instance> {
    if p.cells == 0
        || p.horizon == 0
        || p.max_delay == 0
        || p.max_volume.is_nan()
        || p.max_volume <= 0.0
    {
        return Err(CoreError::InvalidParameter {
            name: "random_instance",
            reason: "cells, horizon, max_delay and max_volume must be positive".into(),
        });
    }
    let topology = generate_topology(&hex_positions(p.cells, p.bs_spacing), &p.geo)?.topology;
    let nu = topology.num_users();
    if nu == 0 && p.demands > 0 {
        return Err(CoreError::InvalidParameter {
            name: "users_per_cell",
            reason: "demands need at least one user".into(),
        });
    }
    let mut rng = cell_rng(p.geo.seed, usize::MAX);
    let tuples: Vec<_> = (0..p.demands)
        .map(|_| {
            let user = rng.random_range(0..nu);
            let start = rng.random_range(1..=p.horizon);
            let end = (start + rng.random_range(0..p.max_delay)).min(p.horizon);
            let volume = p.max_volume * (1.0 - rng.random::<f64>());
            (user, start, end, volume)
        })
        .collect();
    Instance::new(topology, DemandSet::new(p.horizon, tuples)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let p = RandomInstance::default();
        let a = random_instance(&p).unwrap();
        assert_eq!(a.topology.num_users(), 15);
        assert_eq!(a.demands.len(), 60);
        assert!(a.demands.demands().iter().all(|d| d.delay() <= 4));
        assert_eq!(a, random_instance(&p).unwrap());
    }
}
