use std::collections::BTreeSet;

use crate::error::{CoreError, Result};
use crate::model::{Node, Topology};

/// BS-level graph with an edge `(b, b')` whenever some user of `b` has a D2D link to a
/// user of `b' ≠ b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct D2DCommGraph {
    pub edges: BTreeSet<(usize, usize)>,
    /// `δ⁻_b` per BS.
    pub in_degree: Vec<usize>,
    /// `Δ⁻`; 0 for an empty graph.
    pub max_in_degree: usize,
}

impl D2DCommGraph {
    pub fn contains(&self, b: usize, b2: usize) -> bool {
        self.edges.contains(&(b, b2))
    }
}

pub fn build_d2d_comm_graph(topology: &Topology) -> D2DCommGraph {
    let edges: BTreeSet<(usize, usize)> = topology
        .links()
        .iter()
        .filter_map(|l| match l.dst {
            Node::User(v) => {
                let (b, b2) = (topology.home(l.src), topology.home(v));
                (b != b2).then_some((b, b2))
            }
            Node::Bs(_) => None,
        })
        .collect();
    let mut in_degree = vec![0; topology.num_bs()];
    for &(_, b2) in &edges {
        in_degree[b2] += 1;
    }
    let max_in_degree = in_degree.iter().copied().max().unwrap_or(0);
    D2DCommGraph {
        edges,
        in_degree,
        max_in_degree,
    }
}

/// Ratios of D2D link rates to the sender's home-link rate. Maxima over empty sets are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyParams {
    /// `r_s`: best intra-cell D2D ratio of user `s`.
    pub r_user: Vec<f64>,
    /// `r̃_s^b`: best ratio of user `s` towards users of BS `b`, indexed `[s][b]`.
    pub r_tilde_user: Vec<Vec<f64>>,
    /// `r_b = max_{s ∈ U_b} r_s`.
    pub r_bs: Vec<f64>,
    /// `r̃_{b,b'} = max_{s ∈ U_b} r̃_s^{b'}`, indexed `[b][b']`.
    pub r_tilde_bs: Vec<Vec<f64>>,
    /// `r = max_b r_b`.
    pub r: f64,
    /// `r̃`: maximum of `r̃_{b,b'}` over edges of the D2D communication graph.
    pub r_tilde: f64,
}

pub fn discrepancy_params(topology: &Topology) -> Result<DiscrepancyParams> {
    if let Some(&u) = topology.users_without_home_link().first() {
        return Err(CoreError::MissingHomeLink(
            topology.user_name(u).to_string(),
        ));
    }
    let nb = topology.num_bs();
    let nu = topology.num_users();
    let mut r_tilde_user = vec![vec![0.0f64; nb]; nu];
    for l in topology.links() {
        if let Node::User(v) = l.dst {
            let home_rate = topology.home_rate(l.src).expect("checked above");
            let cell = &mut r_tilde_user[l.src][topology.home(v)];
            *cell = cell.max(l.rate / home_rate);
        }
    }
    let r_user: Vec<f64> = (0..nu).map(|s| r_tilde_user[s][topology.home(s)]).collect();
    let mut r_bs = vec![0.0f64; nb];
    let mut r_tilde_bs = vec![vec![0.0f64; nb]; nb];
    for s in 0..nu {
        let b = topology.home(s);
        r_bs[b] = r_bs[b].max(r_user[s]);
        for b2 in 0..nb {
            r_tilde_bs[b][b2] = r_tilde_bs[b][b2].max(r_tilde_user[s][b2]);
        }
    }
    let r = r_bs.iter().copied().fold(0.0, f64::max);
    let graph = build_d2d_comm_graph(topology);
    let r_tilde = graph
        .edges
        .iter()
        .map(|&(b, b2)| r_tilde_bs[b][b2])
        .fold(0.0, f64::max);
    Ok(DiscrepancyParams {
        r_user,
        r_tilde_user,
        r_bs,
        r_tilde_bs,
        r,
        r_tilde,
    })
}
