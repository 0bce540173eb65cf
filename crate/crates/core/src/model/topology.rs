use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{CoreError, Result};

/// A vertex of the network graph. Base stations order before users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Bs(usize),
    User(usize),
}

impl Node {
    pub fn is_bs(self) -> bool {
        matches!(self, Node::Bs(_))
    }

    pub fn user(self) -> Option<usize> {
        match self {
            Node::User(u) => Some(u),
            Node::Bs(_) => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Bs(b) => write!(f, "bs#{b}"),
            Node::User(u) => write!(f, "user#{u}"),
        }
    }
}

/// Directed wireless link from a user to a user or BS, with rate in bits per slot per Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub src: usize,
    pub dst: Node,
    pub rate: f64,
}

/// Cellular network: base stations, users with a home BS each, and directed links.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    bs_names: Vec<String>,
    user_names: Vec<String>,
    home: Vec<usize>,
    links: Vec<Link>,
    bs_positions: Option<Vec<[f64; 2]>>,
    user_positions: Option<Vec<[f64; 2]>>,
    out_links: Vec<Vec<usize>>,
    into_bs: Vec<Vec<usize>>,
    into_user: Vec<Vec<usize>>,
    link_index: HashMap<(usize, Node), usize>,
    users_of: Vec<Vec<usize>>,
}

impl Topology {
    /// Build and validate a topology.
    ///
    /// `users` pairs each user name with the index of its home BS. Identifiers must be
    /// unique across BSs and users because links address both by name.
    pub fn new(
        bs_names: Vec<String>,
        users: Vec<(String, usize)>,
        links: Vec<Link>,
    ) -> Result<Self> {
        let mut seen = HashMap::new();
        for name in bs_names.iter().chain(users.iter().map(|u| &u.0)) {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(CoreError::DuplicateName(name.clone()));
            }
        }
        let (user_names, home): (Vec<String>, Vec<usize>) = users.into_iter().unzip();
        for (u, &b) in home.iter().enumerate() {
            if b >= bs_names.len() {
                return Err(CoreError::InvalidHome {
                    user: user_names[u].clone(),
                    home: format!("bs#{b}"),
                });
            }
        }
        let nb = bs_names.len();
        let nu = user_names.len();
        let mut topo = Topology {
            bs_names,
            user_names,
            home,
            links: Vec::with_capacity(links.len()),
            bs_positions: None,
            user_positions: None,
            out_links: vec![Vec::new(); nu],
            into_bs: vec![Vec::new(); nb],
            into_user: vec![Vec::new(); nu],
            link_index: HashMap::new(),
            users_of: vec![Vec::new(); nb],
        };
        for (u, &b) in topo.home.iter().enumerate() {
            topo.users_of[b].push(u);
        }
        for link in links {
            topo.push_link(link)?;
        }
        Ok(topo)
    }

    fn push_link(&mut self, link: Link) -> Result<()> {
        let src_ok = link.src < self.num_users();
        let dst_ok = match link.dst {
            Node::Bs(b) => b < self.num_bs(),
            Node::User(v) => v < self.num_users(),
        };
        if !src_ok || !dst_ok {
            let name = if src_ok {
                link.dst.to_string()
            } else {
                format!("user#{}", link.src)
            };
            return Err(CoreError::UnknownNode(name));
        }
        let src = self.user_names[link.src].clone();
        let dst = self.node_name(link.dst).to_string();
        if link.dst == Node::User(link.src) {
            return Err(CoreError::InvalidLink {
                src,
                dst,
                reason: "self-links are implicit",
            });
        }
        if !(link.rate.is_finite() && link.rate > 0.0) {
            return Err(CoreError::InvalidRate {
                src,
                dst,
                rate: link.rate,
            });
        }
        let idx = self.links.len();
        if self.link_index.insert((link.src, link.dst), idx).is_some() {
            return Err(CoreError::DuplicateLink { src, dst });
        }
        self.out_links[link.src].push(idx);
        match link.dst {
            Node::Bs(b) => self.into_bs[b].push(idx),
            Node::User(v) => self.into_user[v].push(idx),
        }
        self.links.push(link);
        Ok(())
    }

    /// Attach coordinates in meters, one per BS and one per user.
    pub fn with_positions(mut self, bs: Vec<[f64; 2]>, users: Vec<[f64; 2]>) -> Result<Self> {
        if bs.len() != self.num_bs() || users.len() != self.num_users() {
            return Err(CoreError::InvalidParameter {
                name: "positions",
                reason: "one position per node is required".into(),
            });
        }
        self.bs_positions = Some(bs);
        self.user_positions = Some(users);
        Ok(self)
    }

    pub fn num_bs(&self) -> usize {
        self.bs_names.len()
    }

    pub fn num_users(&self) -> usize {
        self.user_names.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_bs() + self.num_users()
    }

    pub fn bs_name(&self, b: usize) -> &str {
        &self.bs_names[b]
    }

    pub fn user_name(&self, u: usize) -> &str {
        &self.user_names[u]
    }

    pub fn node_name(&self, n: Node) -> &str {
        match n {
            Node::Bs(b) => &self.bs_names[b],
            Node::User(u) => &self.user_names[u],
        }
    }

    /// Look a node up by identifier.
    pub fn node_by_name(&self, name: &str) -> Option<Node> {
        if let Some(b) = self.bs_names.iter().position(|n| n == name) {
            return Some(Node::Bs(b));
        }
        self.user_names
            .iter()
            .position(|n| n == name)
            .map(Node::User)
    }

    pub fn home(&self, u: usize) -> usize {
        self.home[u]
    }

    pub fn users_of(&self, b: usize) -> &[usize] {
        &self.users_of[b]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Indices of links leaving user `u`.
    pub fn out_links(&self, u: usize) -> &[usize] {
        &self.out_links[u]
    }

    /// Indices of links entering `n`.
    pub fn in_links(&self, n: Node) -> &[usize] {
        match n {
            Node::Bs(b) => &self.into_bs[b],
            Node::User(u) => &self.into_user[u],
        }
    }

    pub fn find_link(&self, src: usize, dst: Node) -> Option<&Link> {
        self.link_index.get(&(src, dst)).map(|&i| &self.links[i])
    }

    /// Rate of `src → dst`; self-links have rate 1.
    pub fn rate(&self, src: Node, dst: Node) -> Option<f64> {
        if src == dst {
            return Some(1.0);
        }
        let u = src.user()?;
        self.find_link(u, dst).map(|l| l.rate)
    }

    /// Rate of the direct link from `u` to its home BS.
    pub fn home_rate(&self, u: usize) -> Option<f64> {
        self.find_link(u, Node::Bs(self.home[u])).map(|l| l.rate)
    }

    /// Users whose home link is missing, in index order.
    pub fn users_without_home_link(&self) -> Vec<usize> {
        (0..self.num_users())
            .filter(|&u| self.home_rate(u).is_none())
            .collect()
    }

    pub fn bs_positions(&self) -> Option<&[[f64; 2]]> {
        self.bs_positions.as_deref()
    }

    pub fn user_positions(&self) -> Option<&[[f64; 2]]> {
        self.user_positions.as_deref()
    }

    /// Dense index of a node: BSs first, then users.
    pub fn node_index(&self, n: Node) -> usize {
        match n {
            Node::Bs(b) => b,
            Node::User(u) => self.num_bs() + u,
        }
    }

    pub fn node_at(&self, index: usize) -> Node {
        if index < self.num_bs() {
            Node::Bs(index)
        } else {
            Node::User(index - self.num_bs())
        }
    }

    /// Hop counts from user `u` to every node (indexed by [`Topology::node_index`]).
    pub fn hops_from(&self, u: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes()];
        let mut queue = VecDeque::new();
        dist[self.node_index(Node::User(u))] = Some(0);
        queue.push_back(u);
        while let Some(w) = queue.pop_front() {
            let d = dist[self.node_index(Node::User(w))].unwrap_or(0);
            for &li in &self.out_links[w] {
                let dst = self.links[li].dst;
                let di = self.node_index(dst);
                if dist[di].is_none() {
                    dist[di] = Some(d + 1);
                    if let Node::User(v) = dst {
                        queue.push_back(v);
                    }
                }
            }
        }
        dist
    }

    /// Hop count from every node to its nearest BS (0 for BSs).
    pub fn hops_to_bs(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes()];
        let mut queue = VecDeque::new();
        for (b, d) in dist.iter_mut().enumerate().take(self.num_bs()) {
            *d = Some(0);
            queue.push_back(Node::Bs(b));
        }
        while let Some(n) = queue.pop_front() {
            let d = dist[self.node_index(n)].unwrap_or(0);
            for &li in self.in_links(n) {
                let src = self.links[li].src;
                let si = self.node_index(Node::User(src));
                if dist[si].is_none() {
                    dist[si] = Some(d + 1);
                    queue.push_back(Node::User(src));
                }
            }
        }
        dist
    }

    /// Largest home-link rate, `R_max`.
    pub fn max_home_rate(&self) -> Option<f64> {
        (0..self.num_users())
            .filter_map(|u| self.home_rate(u))
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

/// Convenience builder that resolves node names.
#[derive(Debug, Default, Clone)]
pub struct TopologyBuilder {
    bs: Vec<String>,
    users: Vec<(String, String)>,
    links: Vec<(String, String, f64)>,
}

impl TopologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bs(mut self, name: impl Into<String>) -> Self {
        self.bs.push(name.into());
        self
    }

    pub fn user(mut self, name: impl Into<String>, home: impl Into<String>) -> Self {
        self.users.push((name.into(), home.into()));
        self
    }

    pub fn link(mut self, src: impl Into<String>, dst: impl Into<String>, rate: f64) -> Self {
        self.links.push((src.into(), dst.into(), rate));
        self
    }

    /// Add `a → b` and `b → a` with the same rate.
    pub fn both_ways(self, a: impl Into<String>, b: impl Into<String>, rate: f64) -> Self {
        let (a, b) = (a.into(), b.into());
        self.link(a.clone(), b.clone(), rate).link(b, a, rate)
    }

    pub fn build(self) -> Result<Topology> {
        let bs_index: HashMap<&str, usize> = self
            .bs
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let user_index: HashMap<&str, usize> = self
            .users
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), i))
            .collect();
        let mut users = Vec::with_capacity(self.users.len());
        for (name, home) in &self.users {
            let &b = bs_index
                .get(home.as_str())
                .ok_or_else(|| CoreError::InvalidHome {
                    user: name.clone(),
                    home: home.clone(),
                })?;
            users.push((name.clone(), b));
        }
        let mut links = Vec::with_capacity(self.links.len());
        for (src, dst, rate) in &self.links {
            let &s = user_index.get(src.as_str()).ok_or_else(|| {
                if bs_index.contains_key(src.as_str()) {
                    CoreError::InvalidLink {
                        src: src.clone(),
                        dst: dst.clone(),
                        reason: "links must start at a user",
                    }
                } else {
                    CoreError::UnknownNode(src.clone())
                }
            })?;
            let d = if let Some(&b) = bs_index.get(dst.as_str()) {
                Node::Bs(b)
            } else if let Some(&v) = user_index.get(dst.as_str()) {
                Node::User(v)
            } else {
                return Err(CoreError::UnknownNode(dst.clone()));
            };
            links.push(Link {
                src: s,
                dst: d,
                rate: *rate,
            });
        }
        Topology::new(self.bs.clone(), users, links)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Topology {
        TopologyBuilder::new()
            .bs("B")
            .bs("C")
            .user("a", "B")
            .user("b", "B")
            .user("c", "C")
            .link("a", "b", 2.0)
            .link("b", "c", 1.0)
            .link("c", "C", 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn rejects_duplicates_and_bad_rates() {
        let dup = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .link("a", "B", 1.0)
            .link("a", "B", 2.0);
        assert!(matches!(dup.build(), Err(CoreError::DuplicateLink { .. })));
        let bad = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .link("a", "B", 0.0);
        assert!(matches!(bad.build(), Err(CoreError::InvalidRate { .. })));
        let nan = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .link("a", "B", f64::NAN);
        assert!(matches!(nan.build(), Err(CoreError::InvalidRate { .. })));
        let name = TopologyBuilder::new().bs("B").user("B", "B");
        assert!(matches!(name.build(), Err(CoreError::DuplicateName(_))));
        let home = TopologyBuilder::new().bs("B").user("a", "Z");
        assert!(matches!(home.build(), Err(CoreError::InvalidHome { .. })));
        let unknown = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .link("a", "q", 1.0);
        assert!(matches!(unknown.build(), Err(CoreError::UnknownNode(_))));
        let selfl = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .link("a", "a", 1.0);
        assert!(matches!(selfl.build(), Err(CoreError::InvalidLink { .. })));
        let from_bs = TopologyBuilder::new()
            .bs("B")
            .user("a", "B")
            .link("B", "a", 1.0);
        assert!(matches!(
            from_bs.build(),
            Err(CoreError::InvalidLink { .. })
        ));
    }

    #[test]
    fn hop_distances() {
        let t = chain();
        let from_a = t.hops_from(0);
        assert_eq!(from_a[t.node_index(Node::User(2))], Some(2));
        assert_eq!(from_a[t.node_index(Node::Bs(1))], Some(3));
        assert_eq!(from_a[t.node_index(Node::Bs(0))], None);
        let to_bs = t.hops_to_bs();
        assert_eq!(to_bs[t.node_index(Node::User(0))], Some(3));
        assert_eq!(to_bs[t.node_index(Node::User(2))], Some(1));
        assert_eq!(to_bs[t.node_index(Node::Bs(0))], Some(0));
    }

    #[test]
    fn rates_and_lookup() {
        let t = chain();
        assert_eq!(t.rate(Node::User(0), Node::User(1)), Some(2.0));
        assert_eq!(t.rate(Node::Bs(0), Node::Bs(0)), Some(1.0));
        assert_eq!(t.rate(Node::User(1), Node::User(0)), None);
        assert_eq!(t.home_rate(2), Some(1.0));
        assert_eq!(t.users_without_home_link(), vec![0, 1]);
        assert_eq!(t.node_by_name("c"), Some(Node::User(2)));
        assert_eq!(t.users_of(0), &[0, 1]);
        assert_eq!(t.max_home_rate(), Some(1.0));
    }
}
