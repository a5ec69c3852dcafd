use crate::distributions::TemporalDistribution;
use crate::engine::{Control, EngineError};
use crate::ids::NodeId;

use super::CustomProcess;

/// Moves every workload source of an application one hop toward the node of
/// the replica it last sent to, by redeploying it on the second node of the
/// shortest path.
#[derive(Debug, Clone)]
pub struct MovementProcess {
    name: String,
    app: String,
    activation: TemporalDistribution,
}

impl MovementProcess {
    pub fn new(
        name: impl Into<String>,
        app: impl Into<String>,
        activation: TemporalDistribution,
    ) -> Self {
        MovementProcess {
            name: name.into(),
            app: app.into(),
            activation,
        }
    }

    fn target(
        ctl: &Control<'_>,
        app: &str,
        des: crate::ids::DesId,
        message: &str,
        node: NodeId,
    ) -> Option<NodeId> {
        if let Some(dst) = ctl.last_destination(des, message) {
            if let Some(n) = ctl.process(dst).filter(|p| p.alive).and_then(|p| p.node) {
                return Some(n);
            }
        }
        let dst_module = ctl.application(app)?.message(message)?.dst.clone();
        ctl.replicas(app, &dst_module)
            .into_iter()
            .filter_map(|(_, n)| ctl.hop_distance(node, n).map(|d| (d, n)))
            .min()
            .map(|(_, n)| n)
    }
}

impl CustomProcess for MovementProcess {
    fn name(&self) -> &str {
        &self.name
    }

    fn activation(&self) -> TemporalDistribution {
        self.activation
    }

    fn run(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        let mut before = 0u64;
        let mut after = 0u64;
        for src in ctl.sources(Some(&self.app)) {
            let (Some(node), Some(message), Some(dist)) =
                (src.node, src.message.clone(), src.distribution)
            else {
                continue;
            };
            let Some(target) = Self::target(ctl, &self.app, src.des, &message, node) else {
                ctl.log_note(format!(
                    "{}: source {} on node {node} has no reachable receiver",
                    self.name, src.des
                ));
                continue;
            };
            let Some(path) = ctl.path(node, target) else {
                ctl.log_note(format!(
                    "{}: source {} on node {node} is disconnected",
                    self.name, src.des
                ));
                continue;
            };
            let hops = (path.len() - 1) as u64;
            before += hops;
            if hops == 0 {
                continue;
            }
            ctl.undeploy(src.des)?;
            ctl.deploy_source(&self.app, &message, path[1], dist)?;
            after += hops - 1;
        }
        ctl.log_metric("hops_before", before as f64, None);
        ctl.log_metric("hops_after", after as f64, None);
        Ok(())
    }
}
