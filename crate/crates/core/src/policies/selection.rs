use std::collections::HashMap;

use crate::engine::{NetworkView, Request, Route};
use crate::ids::{DesId, NodeId};

use super::SelectionPolicy;

/// Route back to the claimant replica, if it is reachable.
fn claimant_route(view: &NetworkView<'_>, req: &Request<'_>) -> Option<Route> {
    let dst = req.claimant?;
    let node = view.node_of(dst)?;
    view.path(req.src_node, node)
        .map(|path| Route { dst, path })
}

/// Nearest replica by hop count; ties by lower node id, then lower DES id.
/// Replies go back to the claimant replica.
#[derive(Debug, Clone, Default)]
pub struct ShortestPathSelection;

impl ShortestPathSelection {
    pub fn new() -> Self {
        ShortestPathSelection
    }

    fn nearest(view: &NetworkView<'_>, req: &Request<'_>, from: NodeId) -> Option<Route> {
        let (_, node, dst) = view
            .replicas(req.app, req.dst_module)
            .into_iter()
            .filter_map(|(des, node)| view.hop_distance(from, node).map(|d| (d, node, des)))
            .min()?;
        view.path(from, node).map(|path| Route { dst, path })
    }
}

impl SelectionPolicy for ShortestPathSelection {
    fn name(&self) -> &str {
        "shortest_path"
    }

    fn select(&mut self, view: &NetworkView<'_>, req: &Request<'_>) -> Option<Route> {
        claimant_route(view, req).or_else(|| Self::nearest(view, req, req.src_node))
    }

    fn reroute(
        &mut self,
        view: &NetworkView<'_>,
        req: &Request<'_>,
        _current: DesId,
        from: NodeId,
    ) -> Option<Route> {
        Self::nearest(view, req, from)
    }
}

/// Cycles through replicas in ascending DES id, separately for every
/// (source process, message type) pair. Unreachable replicas are skipped.
#[derive(Debug, Clone, Default)]
pub struct RoundRobinSelection {
    last: HashMap<(DesId, String), DesId>,
}

impl RoundRobinSelection {
    pub fn new() -> Self {
        Self::default()
    }

    fn next(&mut self, view: &NetworkView<'_>, req: &Request<'_>, from: NodeId) -> Option<Route> {
        let replicas = view.replicas(req.app, req.dst_module);
        if replicas.is_empty() {
            return None;
        }
        let key = (req.src_des, req.message.to_string());
        let start = match self.last.get(&key) {
            Some(&last) => replicas.iter().position(|(d, _)| *d > last).unwrap_or(0),
            None => 0,
        };
        let n = replicas.len();
        for k in 0..n {
            let (dst, node) = replicas[(start + k) % n];
            if let Some(path) = view.path(from, node) {
                self.last.insert(key, dst);
                return Some(Route { dst, path });
            }
        }
        None
    }
}

impl SelectionPolicy for RoundRobinSelection {
    fn name(&self) -> &str {
        "round_robin"
    }

    fn select(&mut self, view: &NetworkView<'_>, req: &Request<'_>) -> Option<Route> {
        claimant_route(view, req).or_else(|| self.next(view, req, req.src_node))
    }

    fn reroute(
        &mut self,
        view: &NetworkView<'_>,
        req: &Request<'_>,
        current: DesId,
        from: NodeId,
    ) -> Option<Route> {
        if let Some(node) = view.node_of(current) {
            if let Some(path) = view.path(from, node) {
                return Some(Route { dst: current, path });
            }
        }
        self.next(view, req, from)
    }
}
