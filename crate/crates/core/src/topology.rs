//! Attributed-graph model of the network infrastructure.
//!
//! The graph is undirected. Routing uses hop counts only; bandwidth and
//! propagation delay affect transmission timing, never path choice.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ids::NodeId;
use crate::time::SimTime;

/// Hop distances from (or to) one node, indexed by node id.
pub type DistanceMap = HashMap<NodeId, u32>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("link {0}-{1} already exists")]
    DuplicateLink(NodeId, NodeId),
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(NodeId),
    #[error("link {0}-{1} references unknown node {2}")]
    DanglingLink(NodeId, NodeId, NodeId),
    #[error("{element}: {reason}")]
    InvalidAttribute { element: String, reason: String },
    #[error("topology document error at {location}: {message}")]
    Document { location: String, message: String },
    #[error("edge list line {line}: {message}")]
    EdgeList { line: usize, message: String },
}

/// Attributes of one network entity.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAttrs {
    pub id: NodeId,
    /// Instructions per time unit.
    pub ipt: f64,
    pub ram: f64,
    /// Untyped user tags; never interpreted by the engine.
    pub custom: BTreeMap<String, Value>,
}

impl NodeAttrs {
    pub fn new(id: impl Into<NodeId>, ipt: f64, ram: f64) -> Self {
        NodeAttrs {
            id: id.into(),
            ipt,
            ram,
            custom: BTreeMap::new(),
        }
    }

    pub fn with_custom(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.custom.insert(key.into(), value.into());
        self
    }

    fn check(&self) -> Result<(), TopologyError> {
        let bad = |reason: &str| TopologyError::InvalidAttribute {
            element: format!("node {}", self.id),
            reason: reason.to_string(),
        };
        if !self.ipt.is_finite() || self.ipt < 0.0 {
            return Err(bad("IPT must be a finite non-negative number"));
        }
        if !self.ram.is_finite() || self.ram < 0.0 {
            return Err(bad("RAM must be a finite non-negative number"));
        }
        Ok(())
    }
}

/// Unordered node pair identifying a link. Always stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkKey(NodeId, NodeId);

impl LinkKey {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            LinkKey(a, b)
        } else {
            LinkKey(b, a)
        }
    }

    pub fn endpoints(self) -> (NodeId, NodeId) {
        (self.0, self.1)
    }

    pub fn contains(self, node: NodeId) -> bool {
        self.0 == node || self.1 == node
    }
}

/// Attributes of one undirected link. Both directions share them.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkAttrs {
    pub a: NodeId,
    pub b: NodeId,
    /// Bytes per time unit.
    pub bw: f64,
    /// Propagation delay in time units.
    pub pr: f64,
    pub custom: BTreeMap<String, Value>,
}

impl LinkAttrs {
    pub fn new(a: impl Into<NodeId>, b: impl Into<NodeId>, bw: f64, pr: f64) -> Self {
        LinkAttrs {
            a: a.into(),
            b: b.into(),
            bw,
            pr,
            custom: BTreeMap::new(),
        }
    }

    pub fn key(&self) -> LinkKey {
        LinkKey::new(self.a, self.b)
    }

    /// Time the link is occupied sending `bytes`.
    pub fn transmission_time(&self, bytes: f64) -> SimTime {
        SimTime::from_units(bytes / self.bw)
    }

    pub fn propagation(&self) -> SimTime {
        SimTime::from_units(self.pr)
    }

    /// Per-hop latency `bytes/BW + PR`.
    pub fn latency(&self, bytes: f64) -> SimTime {
        self.transmission_time(bytes) + self.propagation()
    }

    fn check(&self) -> Result<(), TopologyError> {
        let bad = |reason: &str| TopologyError::InvalidAttribute {
            element: format!("link {}-{}", self.a, self.b),
            reason: reason.to_string(),
        };
        if !self.bw.is_finite() || self.bw <= 0.0 {
            return Err(bad("BW must be a finite positive number"));
        }
        if !self.pr.is_finite() || self.pr < 0.0 {
            return Err(bad("PR must be a finite non-negative number"));
        }
        Ok(())
    }
}

/// Undirected attributed graph with a mutation counter.
#[derive(Debug, Clone, Default)]
pub struct TopologyGraph {
    nodes: BTreeMap<NodeId, NodeAttrs>,
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
    links: BTreeMap<LinkKey, LinkAttrs>,
    generation: u64,
}

impl TopologyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Incremented on every add/remove of a node or link.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn add_node(&mut self, attrs: NodeAttrs) -> Result<NodeId, TopologyError> {
        attrs.check()?;
        let id = attrs.id;
        if self.nodes.contains_key(&id) {
            return Err(TopologyError::DuplicateNode(id));
        }
        self.nodes.insert(id, attrs);
        self.adjacency.insert(id, BTreeSet::new());
        self.generation += 1;
        Ok(id)
    }

    /// Removes a node and every incident link; returns the removed links.
    pub fn remove_node(&mut self, id: NodeId) -> Result<Vec<LinkKey>, TopologyError> {
        let neighbors = self
            .adjacency
            .remove(&id)
            .ok_or(TopologyError::UnknownNode(id))?;
        self.nodes.remove(&id);
        let mut removed = Vec::with_capacity(neighbors.len());
        for n in neighbors {
            let key = LinkKey::new(id, n);
            self.links.remove(&key);
            if let Some(adj) = self.adjacency.get_mut(&n) {
                adj.remove(&id);
            }
            removed.push(key);
        }
        self.generation += 1;
        Ok(removed)
    }

    pub fn add_link(&mut self, attrs: LinkAttrs) -> Result<(), TopologyError> {
        attrs.check()?;
        let (a, b) = (attrs.a, attrs.b);
        if a == b {
            return Err(TopologyError::SelfLoop(a));
        }
        for n in [a, b] {
            if !self.nodes.contains_key(&n) {
                return Err(TopologyError::DanglingLink(a, b, n));
            }
        }
        let key = attrs.key();
        if self.links.contains_key(&key) {
            return Err(TopologyError::DuplicateLink(a, b));
        }
        self.links.insert(key, attrs);
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
        self.generation += 1;
        Ok(())
    }

    pub fn remove_link(&mut self, a: NodeId, b: NodeId) -> Result<LinkAttrs, TopologyError> {
        let key = LinkKey::new(a, b);
        let attrs = self.links.remove(&key).ok_or(TopologyError::UnknownNode(
            if self.contains_node(a) { b } else { a },
        ))?;
        if let Some(adj) = self.adjacency.get_mut(&a) {
            adj.remove(&b);
        }
        if let Some(adj) = self.adjacency.get_mut(&b) {
            adj.remove(&a);
        }
        self.generation += 1;
        Ok(attrs)
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeAttrs> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeAttrs> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link(&self, a: NodeId, b: NodeId) -> Option<&LinkAttrs> {
        self.links.get(&LinkKey::new(a, b))
    }

    pub fn links(&self) -> impl Iterator<Item = &LinkAttrs> {
        self.links.values()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Neighbors in ascending id order. Empty for unknown nodes.
    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.get(&id).into_iter().flatten().copied()
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency.get(&id).map_or(0, BTreeSet::len)
    }

    /// Referential integrity: every link endpoint exists and adjacency agrees
    /// with the link table.
    pub fn is_consistent(&self) -> bool {
        let links_ok = self.links.iter().all(|(key, attrs)| {
            let (a, b) = key.endpoints();
            *key == attrs.key()
                && self.nodes.contains_key(&a)
                && self.nodes.contains_key(&b)
                && self.adjacency.get(&a).is_some_and(|s| s.contains(&b))
                && self.adjacency.get(&b).is_some_and(|s| s.contains(&a))
        });
        let adj_count: usize = self.adjacency.values().map(BTreeSet::len).sum();
        links_ok && adj_count == 2 * self.links.len() && self.adjacency.len() == self.nodes.len()
    }

    /// Breadth-first hop distances from `from` to every reachable node.
    pub fn hop_distances(&self, from: NodeId) -> Result<DistanceMap, TopologyError> {
        if !self.contains_node(from) {
            return Err(TopologyError::UnknownNode(from));
        }
        let mut dist = DistanceMap::with_capacity(self.nodes.len());
        let mut queue = VecDeque::new();
        dist.insert(from, 0);
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            for v in self.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    pub fn hop_distance(&self, a: NodeId, b: NodeId) -> Result<Option<u32>, TopologyError> {
        if !self.contains_node(b) {
            return Err(TopologyError::UnknownNode(b));
        }
        Ok(self.hop_distances(a)?.get(&b).copied())
    }

    /// The lexicographically smallest hop-minimal path, given the distances
    /// *to* `dst` (as returned by `hop_distances(dst)`).
    pub fn lexicographic_path(
        &self,
        src: NodeId,
        dst: NodeId,
        dist_to_dst: &DistanceMap,
    ) -> Option<Vec<NodeId>> {
        let mut remaining = *dist_to_dst.get(&src)?;
        let mut path = Vec::with_capacity(remaining as usize + 1);
        let mut current = src;
        path.push(current);
        while remaining > 0 {
            // Neighbors iterate in ascending order, so the first hit is the
            // smallest id that stays on a shortest path.
            current = self
                .neighbors(current)
                .find(|n| dist_to_dst.get(n) == Some(&(remaining - 1)))?;
            path.push(current);
            remaining -= 1;
        }
        debug_assert_eq!(current, dst);
        Some(path)
    }

    /// The lexicographically smallest shortest path, or `None` when
    /// disconnected.
    pub fn shortest_path(
        &self,
        src: NodeId,
        dst: NodeId,
    ) -> Result<Option<Vec<NodeId>>, TopologyError> {
        if !self.contains_node(src) {
            return Err(TopologyError::UnknownNode(src));
        }
        let dist = self.hop_distances(dst)?;
        Ok(self.lexicographic_path(src, dst, &dist))
    }

    /// All hop-minimal simple paths from `src` to `dst`, in lexicographic
    /// order. Empty when disconnected.
    pub fn shortest_paths(
        &self,
        src: NodeId,
        dst: NodeId,
    ) -> Result<Vec<Vec<NodeId>>, TopologyError> {
        if !self.contains_node(src) {
            return Err(TopologyError::UnknownNode(src));
        }
        let dist = self.hop_distances(dst)?;
        let mut out = Vec::new();
        if let Some(&d) = dist.get(&src) {
            let mut prefix = Vec::with_capacity(d as usize + 1);
            prefix.push(src);
            self.extend_paths(&dist, &mut prefix, d, &mut out);
        }
        Ok(out)
    }

    fn extend_paths(
        &self,
        dist: &DistanceMap,
        prefix: &mut Vec<NodeId>,
        remaining: u32,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        let current = *prefix.last().expect("non-empty prefix");
        let next: Vec<NodeId> = self
            .neighbors(current)
            .filter(|n| dist.get(n) == Some(&(remaining - 1)))
            .collect();
        for n in next {
            prefix.push(n);
            self.extend_paths(dist, prefix, remaining - 1, out);
            prefix.pop();
        }
    }

    /// Unweighted shortest-path betweenness (Brandes), normalized by
    /// `(n-1)(n-2)/2` for undirected graphs.
    pub fn betweenness_centrality(&self) -> BTreeMap<NodeId, f64> {
        let ids: Vec<NodeId> = self.nodes.keys().copied().collect();
        let n = ids.len();
        let index: HashMap<NodeId, usize> =
            ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let adj: Vec<Vec<usize>> = ids
            .iter()
            .map(|id| self.neighbors(*id).map(|v| index[&v]).collect())
            .collect();

        let mut score = vec![0.0f64; n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        let mut delta = vec![0.0f64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut stack = Vec::with_capacity(n);
        let mut queue = VecDeque::with_capacity(n);

        for s in 0..n {
            stack.clear();
            for v in 0..n {
                preds[v].clear();
                sigma[v] = 0.0;
                dist[v] = -1;
                delta[v] = 0.0;
            }
            sigma[s] = 1.0;
            dist[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                stack.push(v);
                for &w in &adj[v] {
                    if dist[w] < 0 {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            while let Some(w) = stack.pop() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    score[w] += delta[w];
                }
            }
        }

        // Each unordered pair was counted from both ends.
        let scale = if n > 2 {
            1.0 / ((n - 1) as f64 * (n - 2) as f64)
        } else {
            0.0
        };
        ids.into_iter()
            .zip(score)
            .map(|(id, s)| (id, s * scale))
            .collect()
    }

    /// Node ids ranked by descending betweenness; ties go to the lower id.
    pub fn rank_by_betweenness(&self) -> Vec<NodeId> {
        let scores = self.betweenness_centrality();
        let mut ranked: Vec<(NodeId, f64)> = scores.into_iter().collect();
        ranked.sort_by(|(ia, sa), (ib, sb)| sb.total_cmp(sa).then(ia.cmp(ib)));
        ranked.into_iter().map(|(id, _)| id).collect()
    }

    /// Serializes the graph back to the JSON document shape.
    pub fn to_document(&self) -> TopologyDocument {
        TopologyDocument {
            entity: self
                .nodes
                .values()
                .map(|n| NodeDoc {
                    id: n.id,
                    ipt: n.ipt,
                    ram: n.ram,
                    custom: n.custom.clone(),
                })
                .collect(),
            link: self
                .links
                .values()
                .map(|l| LinkDoc {
                    s: l.a,
                    d: l.b,
                    bw: l.bw,
                    pr: l.pr,
                    custom: l.custom.clone(),
                })
                .collect(),
        }
    }
}

/// JSON topology document: `{"entity": [...], "link": [...]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopologyDocument {
    #[serde(default)]
    pub entity: Vec<NodeDoc>,
    #[serde(default)]
    pub link: Vec<LinkDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: NodeId,
    #[serde(rename = "IPT")]
    pub ipt: f64,
    #[serde(rename = "RAM")]
    pub ram: f64,
    #[serde(flatten)]
    pub custom: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDoc {
    pub s: NodeId,
    pub d: NodeId,
    #[serde(rename = "BW")]
    pub bw: f64,
    #[serde(rename = "PR")]
    pub pr: f64,
    #[serde(flatten)]
    pub custom: BTreeMap<String, Value>,
}

impl TopologyDocument {
    pub fn from_json_str(text: &str) -> Result<Self, TopologyError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| TopologyError::Document {
            location: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
}

/// Builds a graph from a topology document.
pub fn load_topology(doc: &TopologyDocument) -> Result<TopologyGraph, TopologyError> {
    let mut g = TopologyGraph::new();
    for (i, n) in doc.entity.iter().enumerate() {
        let attrs = NodeAttrs {
            id: n.id,
            ipt: n.ipt,
            ram: n.ram,
            custom: n.custom.clone(),
        };
        g.add_node(attrs)
            .map_err(|e| locate(e, format!("entity[{i}]")))?;
    }
    for (i, l) in doc.link.iter().enumerate() {
        let attrs = LinkAttrs {
            a: l.s,
            b: l.d,
            bw: l.bw,
            pr: l.pr,
            custom: l.custom.clone(),
        };
        g.add_link(attrs)
            .map_err(|e| locate(e, format!("link[{i}]")))?;
    }
    Ok(g)
}

fn locate(err: TopologyError, location: String) -> TopologyError {
    TopologyError::Document {
        location,
        message: err.to_string(),
    }
}

/// Parses a whitespace-separated edge list (`s d BW PR` per line). Nodes are
/// created on first mention with the given IPT and RAM. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_edge_list(text: &str, ipt: f64, ram: f64) -> Result<TopologyGraph, TopologyError> {
    let mut g = TopologyGraph::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| TopologyError::EdgeList {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let s: NodeId = fields[0]
            .parse()
            .map_err(|e| bad(format!("source id: {e}")))?;
        let d: NodeId = fields[1]
            .parse()
            .map_err(|e| bad(format!("target id: {e}")))?;
        let bw: f64 = fields[2].parse().map_err(|e| bad(format!("BW: {e}")))?;
        let pr: f64 = fields[3].parse().map_err(|e| bad(format!("PR: {e}")))?;
        for id in [s, d] {
            if !g.contains_node(id) {
                g.add_node(NodeAttrs::new(id, ipt, ram))
                    .map_err(|e| bad(e.to_string()))?;
            }
        }
        g.add_link(LinkAttrs::new(s, d, bw, pr))
            .map_err(|e| bad(e.to_string()))?;
    }
    Ok(g)
}
