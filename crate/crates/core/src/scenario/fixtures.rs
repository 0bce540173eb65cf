use std::fmt;
use std::str::FromStr;

use crate::bounds::{
    build_complete_instance, build_intra_cell_instance, build_ring_instance, Construction,
};
use crate::error::{CoreError, Result};
use crate::model::{DemandSet, Instance, TopologyBuilder};

/// A named canonical instance.
///
/// Names are `toy-fig1`, `heuristic-appF`, `intra-fig3` or `intra-fig3(r,D,V)`,
/// `ring(D)` or `ring(D,V)`, and `complete(N,D)` or `complete(N,D,V)`. Omitted volumes
/// default to `(3D − 2)·D` for rings and `(N + 1)·D` for complete graphs, which make all
/// closed-form spectra integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureSpec {
    /// Two cells with two users each and one inter-cell D2D pair.
    ToyFig1,
    /// Two cells with three tasks each, used to illustrate the heuristic.
    HeuristicAppF,
    /// One cell where a relay with a fast BS link beats the direct path.
    IntraFig3 { r: i64, d: usize, v: i64 },
    /// Bidirectional ring of `2D − 1` single-user cells.
    Ring { d: usize, v: i64 },
    /// Complete D2D graph over `N` single-user cells.
    Complete { n: usize, d: usize, v: i64 },
}

impl FixtureSpec {
    pub fn instance(&self) -> Result<Instance> {
        match *self {
            FixtureSpec::ToyFig1 => toy_fig1(),
            FixtureSpec::HeuristicAppF => heuristic_app_f(),
            _ => {
                let c = self
                    .construction()
                    .expect("constructive fixtures have a schedule")?;
                Instance::new(c.topology, c.demands)
            }
        }
    }

    /// The instance with its explicit exact schedule, for the constructive fixtures.
    pub fn construction(&self) -> Option<Result<Construction>> {
        match *self {
            FixtureSpec::IntraFig3 { r, d, v } => Some(build_intra_cell_instance(r, d, v)),
            FixtureSpec::Ring { d, v } => Some(build_ring_instance(d, v)),
            FixtureSpec::Complete { n, d, v } => Some(build_complete_instance(n, d, v)),
            FixtureSpec::ToyFig1 | FixtureSpec::HeuristicAppF => None,
        }
    }
}

impl fmt::Display for FixtureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureSpec::ToyFig1 => write!(f, "toy-fig1"),
            FixtureSpec::HeuristicAppF => write!(f, "heuristic-appF"),
            FixtureSpec::IntraFig3 { r, d, v } => write!(f, "intra-fig3({r},{d},{v})"),
            FixtureSpec::Ring { d, v } => write!(f, "ring({d},{v})"),
            FixtureSpec::Complete { n, d, v } => write!(f, "complete({n},{d},{v})"),
        }
    }
}

impl FromStr for FixtureSpec {
    type Err = CoreError;

    fn from_str(name: &str) -> Result<Self> {
        let unknown = || CoreError::UnknownFixture(name.to_string());
        let name_trim = name.trim();
        let (head, args) = match name_trim.split_once('(') {
            Some((head, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(unknown)?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<i64>().ok().filter(|&x| x > 0))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(unknown)?;
                (head.trim(), args)
            }
            None => (name_trim, Vec::new()),
        };
        let u = |x: i64| x as usize;
        let spec = match (head, args.as_slice()) {
            ("toy-fig1", []) => FixtureSpec::ToyFig1,
            ("heuristic-appF", []) => FixtureSpec::HeuristicAppF,
            ("intra-fig3", []) => FixtureSpec::IntraFig3 { r: 4, d: 3, v: 12 },
            ("intra-fig3", &[r, d, v]) => FixtureSpec::IntraFig3 { r, d: u(d), v },
            ("ring", &[d]) => FixtureSpec::Ring {
                d: u(d),
                v: (3 * d - 2) * d,
            },
            ("ring", &[d, v]) => FixtureSpec::Ring { d: u(d), v },
            ("complete", &[n, d]) => FixtureSpec::Complete {
                n: u(n),
                d: u(d),
                v: (n + 1) * d,
            },
            ("complete", &[n, d, v]) => FixtureSpec::Complete {
                n: u(n),
                d: u(d),
                v,
            },
            _ => return Err(unknown()),
        };
        Ok(spec)
    }
}

/// Resolve a fixture by name; see [`FixtureSpec`] for the grammar.
pub fn fixture(name: &str) -> Result<Instance> {
    name.parse::<FixtureSpec>()?.instance()
}

/// Cells `alpha` (users `a`, `b`) and `beta` (users `c`, `d`) with unit rates and a D2D
/// link both ways between `b` and `c`. `a` and `b` each generate 3 packets with lifetime
/// `[1, 2]`; `c` and `d` each generate 3 with lifetime `[3, 4]`.
fn toy_fig1() -> Result<Instance> {
    let topology = TopologyBuilder::new()
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
        .build()?;
    let demands = DemandSet::new(
        4,
        [
            (0, 1, 2, 3.0),
            (1, 1, 2, 3.0),
            (2, 3, 4, 3.0),
            (3, 3, 4, 3.0),
        ],
    )?;
    Instance::new(topology, demands)
}

/// BS `B1` serves tasks A, B, C and BS `B2` serves tasks D, E, F, one user per task, all
/// rates 1, and the users of C and D are D2D neighbours both ways. Every task has delay 2.
fn heuristic_app_f() -> Result<Instance> {
    let mut b = TopologyBuilder::new().bs("B1").bs("B2");
    for (task, bs) in [
        ("A", "B1"),
        ("B", "B1"),
        ("C", "B1"),
        ("D", "B2"),
        ("E", "B2"),
        ("F", "B2"),
    ] {
        let user = format!("u{task}");
        b = b.user(user.clone(), bs).link(user, bs, 1.0);
    }
    let topology = b.both_ways("uC", "uD", 1.0).build()?;
    let demands = DemandSet::new(
        6,
        [
            (0, 1, 2, 20.0),
            (1, 3, 4, 20.0),
            (2, 5, 6, 80.0),
            (3, 1, 2, 80.0),
            (4, 3, 4, 20.0),
            (5, 5, 6, 20.0),
        ],
    )?;
    Instance::new(topology, demands)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        assert_eq!(
            "toy-fig1".parse::<FixtureSpec>().unwrap(),
            FixtureSpec::ToyFig1
        );
        assert_eq!(
            "ring(3)".parse::<FixtureSpec>().unwrap(),
            FixtureSpec::Ring { d: 3, v: 21 }
        );
        assert_eq!(
            "complete( 4, 2 )".parse::<FixtureSpec>().unwrap(),
            FixtureSpec::Complete { n: 4, d: 2, v: 10 }
        );
        let s = FixtureSpec::IntraFig3 { r: 5, d: 4, v: 30 };
        assert_eq!(s.to_string().parse::<FixtureSpec>().unwrap(), s);
        for bad in [
            "toy",
            "ring",
            "ring(0)",
            "ring(2,3,4)",
            "complete(2,x)",
            "ring(2",
        ] {
            assert!(
                matches!(
                    bad.parse::<FixtureSpec>(),
                    Err(CoreError::UnknownFixture(_))
                ),
                "{bad}"
            );
        }
    }

    #[test]
    fn toy_fig1_shape() {
        let inst = fixture("toy-fig1").unwrap();
        assert_eq!(inst.topology.num_bs(), 2);
        assert_eq!(inst.topology.num_users(), 4);
        assert_eq!(inst.topology.links().len(), 6);
        assert_eq!(inst.demands.total_volume(), 12.0);
        assert_eq!(inst.demands.d_max(), 2);
    }

    #[test]
    fn heuristic_app_f_shape() {
        let inst = fixture("heuristic-appF").unwrap();
        let vols: Vec<f64> = inst.demands.demands().iter().map(|d| d.volume).collect();
        assert_eq!(vols, [20.0, 20.0, 80.0, 80.0, 20.0, 20.0]);
        assert_eq!(inst.topology.users_of(0).len(), 3);
    }

    #[test]
    fn constructive_fixtures_build() {
        for name in ["ring(2)", "complete(3,3)", "intra-fig3"] {
            let spec: FixtureSpec = name.parse().unwrap();
            let c = spec.construction().unwrap().unwrap();
            assert_eq!(spec.instance().unwrap().demands, c.demands);
        }
        assert!(FixtureSpec::ToyFig1.construction().is_none());
    }
}
