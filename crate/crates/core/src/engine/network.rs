use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::ids::{DesId, NodeId};
use crate::time::SimTime;
use crate::topology::{DistanceMap, TopologyGraph};

use super::state::{Process, ReplicaIndex};

/// What a selection policy is asked to route.
#[derive(Debug, Clone, Copy)]
pub struct Request<'a> {
    pub app: &'a str,
    pub message: &'a str,
    pub dst_module: &'a str,
    pub src_des: DesId,
    pub src_node: NodeId,
    /// Live replica of `dst_module` that already served this message id,
    /// most recent first. Policies use it to answer the original requester.
    pub claimant: Option<DesId>,
}

/// A chosen destination replica and the node path to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub dst: DesId,
    pub path: Vec<NodeId>,
}

/// Distance maps keyed by destination node, valid for one topology
/// generation.
#[derive(Debug, Default)]
pub(crate) struct RouteCache {
    generation: u64,
    to: HashMap<NodeId, Rc<DistanceMap>>,
}

/// Read-only network state handed to selection policies.
pub struct NetworkView<'a> {
    pub(crate) topology: &'a TopologyGraph,
    pub(crate) replicas: &'a ReplicaIndex,
    pub(crate) processes: &'a [Process],
    pub(crate) cache: &'a RefCell<RouteCache>,
    pub(crate) now: SimTime,
}

impl<'a> NetworkView<'a> {
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn topology(&self) -> &'a TopologyGraph {
        self.topology
    }

    /// Live replicas of `app/module` in ascending DES id, with their nodes.
    pub fn replicas(&self, app: &str, module: &str) -> Vec<(DesId, NodeId)> {
        self.replicas
            .get(app)
            .and_then(|m| m.get(module))
            .map(|set: &BTreeSet<DesId>| {
                set.iter()
                    .filter_map(|&d| self.node_of(d).map(|n| (d, n)))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn is_alive(&self, des: DesId) -> bool {
        self.processes.get(des.0 as usize).is_some_and(|p| p.alive)
    }

    /// Hosting node of a live process.
    pub fn node_of(&self, des: DesId) -> Option<NodeId> {
        self.processes
            .get(des.0 as usize)
            .filter(|p| p.alive)
            .and_then(|p| p.node)
    }

    /// Hop distances from every reachable node to `node`.
    pub fn distances_to(&self, node: NodeId) -> Option<Rc<DistanceMap>> {
        if !self.topology.contains_node(node) {
            return None;
        }
        let mut cache = self.cache.borrow_mut();
        if cache.generation != self.topology.generation() {
            cache.generation = self.topology.generation();
            cache.to.clear();
        }
        let map = cache
            .to
            .entry(node)
            .or_insert_with(|| Rc::new(self.topology.hop_distances(node).expect("node exists")));
        Some(Rc::clone(map))
    }

    pub fn hop_distance(&self, from: NodeId, to: NodeId) -> Option<u32> {
        self.distances_to(to)?.get(&from).copied()
    }

    /// Lexicographically smallest shortest path.
    pub fn path(&self, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
        let dist = self.distances_to(to)?;
        self.topology.lexicographic_path(from, to, &dist)
    }
}
