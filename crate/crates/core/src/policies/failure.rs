use std::collections::BTreeSet;

use crate::distributions::TemporalDistribution;
use crate::engine::{Control, EngineError, ProcessRole};
use crate::ids::NodeId;

use super::CustomProcess;

/// Fails one node per tick, walking a fixed candidate list.
#[derive(Debug, Clone)]
pub struct FailureProcess {
    name: String,
    candidates: Vec<NodeId>,
    activation: TemporalDistribution,
    protect: BTreeSet<NodeId>,
    protect_sources: bool,
    next: usize,
}

impl FailureProcess {
    pub fn new(
        name: impl Into<String>,
        candidates: Vec<NodeId>,
        activation: TemporalDistribution,
    ) -> Self {
        FailureProcess {
            name: name.into(),
            candidates,
            activation,
            protect: BTreeSet::new(),
            protect_sources: false,
            next: 0,
        }
    }

    pub fn protect(mut self, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        self.protect.extend(nodes);
        self
    }

    /// Never fail a node that hosts a live workload source.
    pub fn protect_sources(mut self) -> Self {
        self.protect_sources = true;
        self
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }
}

impl CustomProcess for FailureProcess {
    fn name(&self) -> &str {
        &self.name
    }

    fn activation(&self) -> TemporalDistribution {
        self.activation
    }

    fn run(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        let hosts: BTreeSet<NodeId> = if self.protect_sources {
            ctl.sources(None)
                .into_iter()
                .filter_map(|s| s.node)
                .collect()
        } else {
            BTreeSet::new()
        };
        while let Some(&node) = self.candidates.get(self.next) {
            self.next += 1;
            if !ctl.topology().contains_node(node)
                || self.protect.contains(&node)
                || hosts.contains(&node)
            {
                continue;
            }
            let report = ctl.fail_node(node)?;
            let lost = report
                .stopped
                .iter()
                .filter(|d| {
                    ctl.process(**d)
                        .is_some_and(|p| p.role == ProcessRole::Module)
                })
                .count();
            if lost > 0 {
                ctl.log_note(format!(
                    "{}: node {node} hosted {lost} module replicas",
                    self.name
                ));
            }
            return Ok(());
        }
        Ok(())
    }
}
