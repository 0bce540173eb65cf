//! JSON instance files and schedule CSV.
//!
//! Instance schema (all node references are by identifier):
//!
//! ```json
//! {
//!   "horizon": 4,
//!   "base_stations": [{ "id": "alpha", "position": [0.0, 0.0] }],
//!   "users": [{ "id": "a", "home": "alpha", "position": [10.0, 5.0] }],
//!   "links": [{ "src": "a", "dst": "alpha", "rate": 1.0 }],
//!   "demands": [{ "user": "a", "start": 1, "end": 2, "volume": 3.0 }]
//! }
//! ```
//!
//! Positions are optional but must be given for all nodes or none. Demand ids are the
//! positions in `demands`. Schedule CSV has the header
//! `demand,src,dst,slot,spectrum,bits`, with node identifiers in `src`/`dst`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::{DemandSet, Key, Link, Node, Schedule, Topology};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BsRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct UserRecord {
    id: String,
    home: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LinkRecord {
    src: String,
    dst: String,
    rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DemandRecord {
    user: String,
    start: usize,
    end: usize,
    volume: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    horizon: usize,
    base_stations: Vec<BsRecord>,
    users: Vec<UserRecord>,
    links: Vec<LinkRecord>,
    #[serde(default)]
    demands: Vec<DemandRecord>,
}

/// A topology together with the demands placed on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub topology: Topology,
    pub demands: DemandSet,
}

impl Instance {
    /// Bundle a topology and demands after checking that every demand's user exists.
    pub fn new(topology: Topology, demands: DemandSet) -> Result<Self> {
        demands.check_users(&topology)?;
        Ok(Self { topology, demands })
    }

    pub fn to_json(&self) -> Result<String> {
        let t = &self.topology;
        let bs_pos = t.bs_positions();
        let user_pos = t.user_positions();
        let file = InstanceFile {
            horizon: self.demands.horizon(),
            base_stations: (0..t.num_bs())
                .map(|b| BsRecord {
                    id: t.bs_name(b).to_string(),
                    position: bs_pos.map(|p| p[b]),
                })
                .collect(),
            users: (0..t.num_users())
                .map(|u| UserRecord {
                    id: t.user_name(u).to_string(),
                    home: t.bs_name(t.home(u)).to_string(),
                    position: user_pos.map(|p| p[u]),
                })
                .collect(),
            links: t
                .links()
                .iter()
                .map(|l| LinkRecord {
                    src: t.user_name(l.src).to_string(),
                    dst: t.node_name(l.dst).to_string(),
                    rate: l.rate,
                })
                .collect(),
            demands: self
                .demands
                .demands()
                .iter()
                .map(|d| DemandRecord {
                    user: t.user_name(d.user).to_string(),
                    start: d.start,
                    end: d.end,
                    volume: d.volume,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let bs_names: Vec<String> = file.base_stations.iter().map(|b| b.id.clone()).collect();
        let home_of = |u: &UserRecord| {
            bs_names
                .iter()
                .position(|b| *b == u.home)
                .ok_or_else(|| CoreError::InvalidHome {
                    user: u.id.clone(),
                    home: u.home.clone(),
                })
        };
        let users = file
            .users
            .iter()
            .map(|u| Ok((u.id.clone(), home_of(u)?)))
            .collect::<Result<Vec<_>>>()?;

        // Resolve names against a link-free topology first.
        let skeleton = Topology::new(bs_names.clone(), users.clone(), Vec::new())?;
        let resolve = |name: &str| {
            skeleton
                .node_by_name(name)
                .ok_or_else(|| CoreError::UnknownNode(name.to_string()))
        };
        let mut links = Vec::with_capacity(file.links.len());
        for l in &file.links {
            let src = match resolve(&l.src)? {
                Node::User(u) => u,
                Node::Bs(_) => {
                    return Err(CoreError::InvalidLink {
                        src: l.src.clone(),
                        dst: l.dst.clone(),
                        reason: "links must start at a user",
                    })
                }
            };
            links.push(Link {
                src,
                dst: resolve(&l.dst)?,
                rate: l.rate,
            });
        }
        let mut topology = Topology::new(bs_names, users, links)?;

        let bs_pos: Option<Vec<[f64; 2]>> = file.base_stations.iter().map(|b| b.position).collect();
        let user_pos: Option<Vec<[f64; 2]>> = file.users.iter().map(|u| u.position).collect();
        let any_pos = file.base_stations.iter().any(|b| b.position.is_some())
            || file.users.iter().any(|u| u.position.is_some());
        match (bs_pos, user_pos) {
            (Some(b), Some(u)) if any_pos => topology = topology.with_positions(b, u)?,
            (_, _) if any_pos => {
                return Err(CoreError::InvalidParameter {
                    name: "position",
                    reason: "positions must be given for all nodes or none".into(),
                })
            }
            _ => {}
        }

        let mut tuples = Vec::with_capacity(file.demands.len());
        for d in &file.demands {
            match topology.node_by_name(&d.user) {
                Some(Node::User(u)) => tuples.push((u, d.start, d.end, d.volume)),
                _ => return Err(CoreError::UnknownNode(d.user.clone())),
            }
        }
        let demands = DemandSet::new(file.horizon, tuples)?;
        Ok(Self { topology, demands })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_json()?)
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| CoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(s)
}

pub(crate) fn write_string(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleRow {
    demand: usize,
    src: String,
    dst: String,
    slot: usize,
    spectrum: f64,
    bits: f64,
}

/// Write `schedule` as CSV. `bits` is `spectrum · R` (the stored volume on self-links).
pub fn write_schedule_csv<W: Write>(
    schedule: &Schedule,
    topology: &Topology,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (k, x) in schedule.iter() {
        w.serialize(ScheduleRow {
            demand: k.demand,
            src: topology.node_name(k.src).to_string(),
            dst: topology.node_name(k.dst).to_string(),
            slot: k.slot,
            spectrum: *x,
            bits: schedule.bits(topology, k, x).unwrap_or(f64::NAN),
        })?;
    }
    w.flush().map_err(|source| CoreError::Io {
        path: "<schedule csv>".into(),
        source,
    })?;
    Ok(())
}

/// Read a schedule written by [`write_schedule_csv`]. The `bits` column is ignored, as
/// are lines starting with `#`.
pub fn read_schedule_csv<R: Read>(input: R, topology: &Topology, origin: &str) -> Result<Schedule> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = r.headers()?.clone();
    let mut schedule = Schedule::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: ScheduleRow = record.deserialize(Some(&headers))?;
        let node = |name: &str| {
            topology
                .node_by_name(name)
                .ok_or_else(|| CoreError::Format {
                    path: origin.to_string(),
                    line,
                    message: format!("unknown node `{name}`"),
                })
        };
        let key = Key {
            demand: row.demand,
            slot: row.slot,
            src: node(&row.src)?,
            dst: node(&row.dst)?,
        };
        schedule.add(key, row.spectrum);
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TopologyBuilder;

    fn sample() -> Instance {
        let t = TopologyBuilder::new()
            .bs("alpha")
            .user("a", "alpha")
            .user("b", "alpha")
            .link("a", "alpha", 1.5)
            .link("b", "alpha", 0.1)
            .link("a", "b", 2.0)
            .build()
            .unwrap();
        let d = DemandSet::new(3, [(0, 1, 2, 3.0), (1, 2, 3, 0.3)]).unwrap();
        Instance::new(t, d).unwrap()
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = sample();
        let back = Instance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn positions_round_trip() {
        let inst = sample();
        let t = inst
            .topology
            .clone()
            .with_positions(vec![[0.0, 0.0]], vec![[1.0, 2.0], [3.5, -4.0]])
            .unwrap();
        let inst = Instance::new(t, inst.demands).unwrap();
        let back = Instance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back.topology.user_positions().unwrap()[1], [3.5, -4.0]);
    }

    #[test]
    fn rejects_unknown_nodes() {
        let text = r#"{"horizon":1,"base_stations":[{"id":"B"}],"users":[{"id":"a","home":"B"}],
            "links":[{"src":"a","dst":"zz","rate":1.0}]}"#;
        assert!(matches!(Instance::from_json(text), Err(CoreError::UnknownNode(n)) if n == "zz"));
    }

    #[test]
    fn schedule_csv_round_trip() {
        let inst = sample();
        let mut s: Schedule = Schedule::new();
        s.put(0, 1, Node::User(0), Node::User(1), 1.0 / 3.0);
        s.put(0, 2, Node::User(1), Node::Bs(0), 0.1 + 0.2);
        s.put(0, 2, Node::Bs(0), Node::Bs(0), 7.25);
        let mut buf = Vec::new();
        write_schedule_csv(&s, &inst.topology, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("demand,src,dst,slot,spectrum,bits\n"));
        let back = read_schedule_csv(buf.as_slice(), &inst.topology, "mem").unwrap();
        assert_eq!(back, s);
        let commented = format!("# seed: 1\n{text}");
        assert_eq!(
            read_schedule_csv(commented.as_bytes(), &inst.topology, "mem").unwrap(),
            s
        );
    }
}
