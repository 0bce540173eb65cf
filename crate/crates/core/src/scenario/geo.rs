use rand::Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::model::{Link, Node, Topology};
use crate::scenario::cell_rng;

/// Distances below this many meters are treated as this distance when computing rates,
/// which keeps co-located nodes at a finite rate.
const MIN_DISTANCE: f64 = 1.0;

/// Geometry and radio parameters for [`generate_topology`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeoParams {
    /// Cell radius in meters; also the user→BS communication range.
    pub cell_radius: f64,
    /// User→user communication range in meters.
    pub d2d_range: f64,
    pub users_per_cell: usize,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub path_loss_exponent: f64,
    pub seed: u64,
}

impl Default for GeoParams {
    fn default() -> Self {
        Self {
            cell_radius: 300.0,
            d2d_range: 30.0,
            users_per_cell: 40,
            tx_power_dbm: 21.0,
            noise_dbm: -102.0,
            path_loss_exponent: 3.5,
            seed: 0,
        }
    }
}

impl GeoParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(CoreError::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.cell_radius.is_finite() && self.cell_radius > 0.0) {
            return bad("cell_radius", "must be positive");
        }
        if !(self.d2d_range.is_finite() && self.d2d_range > 0.0) {
            return bad("d2d_range", "must be positive");
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent > 2.0) {
            return bad("path_loss_exponent", "must exceed 2");
        }
        if !(self.tx_power_dbm.is_finite() && self.noise_dbm.is_finite()) {
            return bad("power", "transmit and noise power must be finite");
        }
        Ok(())
    }

    /// Linear transmit-power to noise ratio, `10^((P_t − N)/10)`.
    fn snr_scale(&self) -> f64 {
        10f64.powf((self.tx_power_dbm - self.noise_dbm) / 10.0)
    }
}

/// Shannon rate `log2(1 + P_t·d^(−γ)/N)` in bits per slot per Hz for a link of length
/// `distance` meters.
pub fn shannon_rate(distance: f64, params: &GeoParams) -> f64 {
    let d = distance.max(MIN_DISTANCE);
    (1.0 + params.snr_scale() * d.powf(-params.path_loss_exponent)).log2()
}

/// A generated topology and the users left without any D2D neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTopology {
    pub topology: Topology,
    pub isolated_users: Vec<usize>,
}

/// Place `users_per_cell` users uniformly in the disc around each BS and connect every
/// user to every BS within `cell_radius` and every other user within `d2d_range`.
///
/// BSs are named `bs{b}` and users `c{b}u{k}`. A user is always homed at the BS whose disc
/// it was drawn in, even when it also lies inside another disc.
pub fn generate_topology(
    bs_positions: &[[f64; 2]],
    params: &GeoParams,
) -> Result<GeneratedTopology> {
    params.validate()?;
    for (i, p) in bs_positions.iter().enumerate() {
        if bs_positions[..i].contains(p) {
            return Err(CoreError::InvalidParameter {
                name: "bs_positions",
                reason: format!("position {p:?} appears more than once"),
            });
        }
    }
    let n = params.users_per_cell;
    let user_positions: Vec<[f64; 2]> = bs_positions
        .par_iter()
        .enumerate()
        .map(|(b, centre)| {
            let mut rng = cell_rng(params.seed, b);
            (0..n)
                .map(|_| {
                    let r = params.cell_radius * rng.random::<f64>().sqrt();
                    let theta = std::f64::consts::TAU * rng.random::<f64>();
                    [centre[0] + r * theta.cos(), centre[1] + r * theta.sin()]
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();

    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut links = Vec::new();
    for (u, &pu) in user_positions.iter().enumerate() {
        for (b, &pb) in bs_positions.iter().enumerate() {
            let d = dist(pu, pb);
            if d <= params.cell_radius {
                links.push(Link {
                    src: u,
                    dst: Node::Bs(b),
                    rate: shannon_rate(d, params),
                });
            }
        }
        for (v, &pv) in user_positions.iter().enumerate() {
            let d = dist(pu, pv);
            if u != v && d <= params.d2d_range {
                links.push(Link {
                    src: u,
                    dst: Node::User(v),
                    rate: shannon_rate(d, params),
                });
            }
        }
    }
    let isolated_users = (0..user_positions.len())
        .filter(|&u| !links.iter().any(|l| l.src == u && !l.dst.is_bs()))
        .collect();
    let bs_names = (0..bs_positions.len()).map(|b| format!("bs{b}")).collect();
    let users = (0..user_positions.len())
        .map(|u| (format!("c{}u{}", u / n, u % n), u / n))
        .collect();
    let topology = Topology::new(bs_names, users, links)?
        .with_positions(bs_positions.to_vec(), user_positions)?;
    Ok(GeneratedTopology {
        topology,
        isolated_users,
    })
}

/// The `n` hexagonal-lattice sites with spacing `spacing` closest to the origin, ordered
/// by lattice ring and then by angle.
pub fn hex_positions(n: usize, spacing: f64) -> Vec<[f64; 2]> {
    let mut k: i64 = 0;
    while 3 * k * (k + 1) + 1 < n as i64 {
        k += 1;
    }
    let mut sites = Vec::new();
    for q in -k..=k {
        for r in (-k).max(-q - k)..=k.min(-q + k) {
            let ring = q.abs().max(r.abs()).max((q + r).abs());
            let x = spacing * (q as f64 + r as f64 / 2.0);
            let y = spacing * (r as f64 * 3f64.sqrt() / 2.0);
            sites.push((ring, y.atan2(x), [x, y]));
        }
    }
    sites.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    sites.into_iter().take(n).map(|s| s.2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_at_reference_distances() {
        let p = GeoParams::default();
        let oracle = |d: f64| (1.0 + 10f64.powf(12.3) * d.powf(-3.5)).log2();
        assert!((shannon_rate(300.0, &p) - oracle(300.0)).abs() < 1e-12);
        assert!((shannon_rate(300.0, &p) - 12.06).abs() < 0.01);
        assert!((shannon_rate(30.0, &p) - oracle(30.0)).abs() < 1e-12);
        assert!((shannon_rate(30.0, &p) - 23.7).abs() < 0.05);
    }

    #[test]
    fn geometry_is_respected() {
        let params = GeoParams {
            users_per_cell: 25,
            d2d_range: 80.0,
            seed: 7,
            ..GeoParams::default()
        };
        let bs = hex_positions(3, 450.0);
        let g = generate_topology(&bs, &params).unwrap();
        let t = &g.topology;
        let (bp, up) = (t.bs_positions().unwrap(), t.user_positions().unwrap());
        let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
        for u in 0..t.num_users() {
            assert!(dist(up[u], bp[t.home(u)]) <= params.cell_radius);
            assert!(t.home_rate(u).is_some());
        }
        for l in t.links() {
            let (end, range) = match l.dst {
                Node::Bs(b) => (bp[b], params.cell_radius),
                Node::User(v) => (up[v], params.d2d_range),
            };
            let d = dist(up[l.src], end);
            assert!(d <= range);
            assert_eq!(l.rate, shannon_rate(d, &params));
        }
    }

    #[test]
    fn distant_cells_have_no_inter_cell_d2d_links() {
        let params = GeoParams {
            users_per_cell: 40,
            seed: 3,
            ..GeoParams::default()
        };
        let g = generate_topology(&[[0.0, 0.0], [700.0, 0.0]], &params).unwrap();
        let t = &g.topology;
        assert!(t
            .links()
            .iter()
            .all(|l| l.dst.user().is_none_or(|v| t.home(v) == t.home(l.src))));
    }

    #[test]
    fn same_seed_same_topology() {
        let params = GeoParams {
            users_per_cell: 10,
            seed: 11,
            ..GeoParams::default()
        };
        let bs = hex_positions(4, 500.0);
        assert_eq!(
            generate_topology(&bs, &params).unwrap(),
            generate_topology(&bs, &params).unwrap()
        );
        let other = GeoParams { seed: 12, ..params };
        assert_ne!(
            generate_topology(&bs, &params).unwrap(),
            generate_topology(&bs, &other).unwrap()
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        let params = GeoParams {
            path_loss_exponent: 2.0,
            ..GeoParams::default()
        };
        assert!(generate_topology(&[[0.0, 0.0]], &params).is_err());
        assert!(generate_topology(&[[0.0, 0.0], [0.0, 0.0]], &GeoParams::default()).is_err());
    }

    #[test]
    fn hex_sites_are_distinct_and_spaced() {
        let sites = hex_positions(7, 100.0);
        assert_eq!(sites.len(), 7);
        assert_eq!(sites[0], [0.0, 0.0]);
        for (i, a) in sites.iter().enumerate() {
            for b in &sites[..i] {
                assert!((a[0] - b[0]).hypot(a[1] - b[1]) >= 100.0 - 1e-9);
            }
        }
    }
}
