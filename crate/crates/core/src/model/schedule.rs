use std::collections::BTreeMap;

use crate::model::{DemandSet, Node, Topology};
use crate::scalar::Scalar;

/// Position of one allocation: demand `demand` on link `src → dst` in slot `slot`.
/// `src == dst` denotes the node's self-link, whose value is stored volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub demand: usize,
    pub slot: usize,
    pub src: Node,
    pub dst: Node,
}

impl Key {
    pub fn is_self_link(&self) -> bool {
        self.src == self.dst
    }
}

/// Sparse traffic scheduling policy `x^j_{u,v}(t)`.
///
/// Values on real links are spectrum in Hz; on self-links they equal the stored volume
/// because self-links have rate 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T = f64> {
    entries: BTreeMap<Key, T>,
}

impl<T: Scalar> Default for Schedule<T> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> Schedule<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `value` to the entry at `key`.
    pub fn add(&mut self, key: Key, value: T) {
        let slot = self.entries.entry(key).or_insert_with(T::zero);
        *slot = slot.clone() + value;
    }

    /// Shorthand for [`Schedule::add`].
    pub fn put(&mut self, demand: usize, slot: usize, src: Node, dst: Node, value: T) {
        self.add(
            Key {
                demand,
                slot,
                src,
                dst,
            },
            value,
        );
    }

    pub fn get(&self, key: &Key) -> T {
        self.entries.get(key).cloned().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &T)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one demand in (slot, src, dst) order.
    pub fn of_demand(&self, demand: usize) -> impl Iterator<Item = (&Key, &T)> {
        let lo = Key {
            demand,
            slot: 0,
            src: Node::Bs(0),
            dst: Node::Bs(0),
        };
        self.entries
            .range(lo..)
            .take_while(move |(k, _)| k.demand == demand)
    }

    /// Drop entries whose magnitude is at most `threshold`.
    pub fn prune(&mut self, threshold: T) {
        self.entries.retain(|_, v| v.abs_val() > threshold);
    }

    /// Union of two schedules; overlapping entries are summed.
    pub fn merge(&mut self, other: &Schedule<T>) {
        for (k, v) in other.iter() {
            self.add(*k, v.clone());
        }
    }

    /// Rebuild all self-link entries from conservation so that traffic received in a slot
    /// and not forwarded in the next is stored.
    ///
    /// Existing self-link entries are discarded. For demand `j`, the source stores
    /// `r_j` minus what it sends at `s_j`; every node then stores what it received in the
    /// previous slot (including storage) minus what it sends over real links.
    pub fn fill_storage(&mut self, topology: &Topology, demands: &DemandSet) {
        self.entries.retain(|k, _| !k.is_self_link());
        let mut added = Vec::new();
        for d in demands.demands() {
            let n = topology.num_nodes();
            let len = d.delay();
            let mut in_real = vec![vec![T::zero(); n]; len];
            let mut out_real = vec![vec![T::zero(); n]; len];
            for (k, x) in self.of_demand(d.id) {
                if !d.is_active(k.slot) {
                    continue;
                }
                let Some(rate) = topology.rate(k.src, k.dst) else {
                    continue;
                };
                let bits = x.clone() * T::from_f64(rate);
                let t = k.slot - d.start;
                let si = topology.node_index(k.src);
                let di = topology.node_index(k.dst);
                out_real[t][si] = out_real[t][si].clone() + bits.clone();
                in_real[t][di] = in_real[t][di].clone() + bits;
            }
            let mut store = vec![T::zero(); n];
            let src_idx = topology.node_index(Node::User(d.user));
            store[src_idx] = T::from_f64(d.volume) - out_real[0][src_idx].clone();
            for t in 0..len {
                if t > 0 {
                    for i in 0..n {
                        let received = in_real[t - 1][i].clone() + store[i].clone();
                        store[i] = received - out_real[t][i].clone();
                    }
                }
                for (i, s) in store.iter().enumerate() {
                    if *s != T::zero() {
                        let node = topology.node_at(i);
                        added.push((
                            Key {
                                demand: d.id,
                                slot: d.start + t,
                                src: node,
                                dst: node,
                            },
                            s.clone(),
                        ));
                    }
                }
            }
        }
        for (k, v) in added {
            self.entries.insert(k, v);
        }
    }

    /// Convert each value with `f`.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Schedule<U> {
        Schedule {
            entries: self.entries.iter().map(|(k, v)| (*k, f(v))).collect(),
        }
    }

    /// Volume (bits) carried by each entry, `x · R`.
    pub fn bits(&self, topology: &Topology, key: &Key, value: &T) -> Option<T> {
        topology
            .rate(key.src, key.dst)
            .map(|r| value.clone() * T::from_f64(r))
    }
}

/// BS charged for an entry under receiver-takeover accounting: the destination BS, or
/// the home BS of a receiving user. Self-links are never charged.
pub fn charged_bs(topology: &Topology, key: &Key) -> Option<usize> {
    if key.is_self_link() {
        return None;
    }
    match key.dst {
        Node::Bs(b) => Some(b),
        Node::User(v) => Some(topology.home(v)),
    }
}
