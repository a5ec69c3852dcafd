use crate::application::ModuleKind;
use crate::distributions::TemporalDistribution;
use crate::engine::{Control, EngineError};
use crate::ids::{DesId, NodeId};

use super::PlacementPolicy;

fn deploy(
    ctl: &mut Control<'_>,
    app: &str,
    module: &str,
    node: NodeId,
) -> Result<DesId, EngineError> {
    let kind = ctl
        .application(app)
        .ok_or_else(|| EngineError::UnknownApp(app.to_string()))?
        .module(module)
        .map(|m| m.kind)
        .ok_or_else(|| EngineError::UnknownModule {
            app: app.to_string(),
            module: module.to_string(),
        })?;
    match kind {
        ModuleKind::Module => ctl.deploy_module(app, module, node),
        ModuleKind::Sink => ctl.deploy_sink(app, module, node),
        ModuleKind::Source => Err(EngineError::WrongKind {
            app: app.to_string(),
            module: module.to_string(),
            expected: "MODULE or SINK",
        }),
    }
}

/// Fixed module-to-nodes map, deployed once. A node listed twice gets two
/// replicas.
#[derive(Debug, Clone)]
pub struct StaticPlacement {
    name: String,
    app: String,
    assignments: Vec<(String, Vec<NodeId>)>,
}

impl StaticPlacement {
    pub fn new(name: impl Into<String>, app: impl Into<String>) -> Self {
        StaticPlacement {
            name: name.into(),
            app: app.into(),
            assignments: Vec::new(),
        }
    }

    pub fn assign(
        mut self,
        module: impl Into<String>,
        nodes: impl IntoIterator<Item = NodeId>,
    ) -> Self {
        self.assignments
            .push((module.into(), nodes.into_iter().collect()));
        self
    }
}

impl PlacementPolicy for StaticPlacement {
    fn name(&self) -> &str {
        &self.name
    }

    fn initial_allocation(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        for (module, nodes) in &self.assignments {
            for &node in nodes {
                deploy(ctl, &self.app, module, node)?;
            }
        }
        Ok(())
    }
}

/// Deploys a module on the highest-betweenness nodes (ties to the lower
/// id). With an activation, each tick adds one more replica on the next
/// ranked node until `max` replicas exist.
#[derive(Debug, Clone)]
pub struct BetweennessPlacement {
    name: String,
    app: String,
    module: String,
    initial: usize,
    max: usize,
    colocated: bool,
    activation: Option<TemporalDistribution>,
    ranking: Vec<NodeId>,
    deployed: usize,
}

impl BetweennessPlacement {
    pub fn new(
        name: impl Into<String>,
        app: impl Into<String>,
        module: impl Into<String>,
        count: usize,
    ) -> Self {
        BetweennessPlacement {
            name: name.into(),
            app: app.into(),
            module: module.into(),
            initial: count,
            max: count,
            colocated: false,
            activation: None,
            ranking: Vec::new(),
            deployed: 0,
        }
    }

    /// Adds one replica per activation tick until `max` are deployed.
    pub fn evolving(mut self, max: usize, activation: TemporalDistribution) -> Self {
        self.max = max;
        self.activation = Some(activation);
        self
    }

    /// Put every replica on the single top-ranked node.
    pub fn colocated(mut self) -> Self {
        self.colocated = true;
        self
    }

    fn deploy_next(&mut self, ctl: &mut Control<'_>) -> Result<Option<NodeId>, EngineError> {
        let node = if self.colocated {
            self.ranking.first().copied()
        } else {
            self.ranking.get(self.deployed).copied()
        };
        let Some(node) = node else {
            return Ok(None);
        };
        deploy(ctl, &self.app, &self.module, node)?;
        self.deployed += 1;
        Ok(Some(node))
    }
}

impl PlacementPolicy for BetweennessPlacement {
    fn name(&self) -> &str {
        &self.name
    }

    fn activation(&self) -> Option<TemporalDistribution> {
        self.activation
    }

    fn initial_allocation(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        self.ranking = ctl.topology().rank_by_betweenness();
        let distinct = if self.colocated { 1 } else { self.max };
        if self.ranking.is_empty() || (!self.colocated && distinct > self.ranking.len()) {
            return Err(EngineError::Policy {
                policy: self.name.clone(),
                reason: format!(
                    "{} replicas requested on {} nodes",
                    self.max,
                    self.ranking.len()
                ),
            });
        }
        for _ in 0..self.initial {
            self.deploy_next(ctl)?;
        }
        Ok(())
    }

    fn run(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        if self.deployed >= self.max {
            return Ok(());
        }
        // Skip ranked nodes that failed since the ranking was computed.
        while !self.colocated
            && self
                .ranking
                .get(self.deployed)
                .is_some_and(|n| !ctl.topology().contains_node(*n))
        {
            self.ranking.remove(self.deployed);
        }
        if self.deploy_next(ctl)?.is_none() {
            ctl.log_note(format!("{}: no node left for {}", self.name, self.module));
        }
        Ok(())
    }
}
