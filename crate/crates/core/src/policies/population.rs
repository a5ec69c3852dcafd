use crate::distributions::TemporalDistribution;
use crate::engine::{Control, EngineError};
use crate::ids::NodeId;

use super::PopulationPolicy;

/// Workload sources to deploy: `number` copies on each listed node.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceControl {
    pub app: String,
    pub message: String,
    pub distribution: TemporalDistribution,
    pub nodes: Vec<NodeId>,
    pub number: usize,
}

/// Sinks to deploy: `number` copies on each listed node.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkControl {
    pub app: String,
    pub module: String,
    pub nodes: Vec<NodeId>,
    pub number: usize,
}

fn deploy_sinks(ctl: &mut Control<'_>, sinks: &[SinkControl]) -> Result<(), EngineError> {
    for s in sinks {
        for &node in &s.nodes {
            for _ in 0..s.number {
                ctl.deploy_sink(&s.app, &s.module, node)?;
            }
        }
    }
    Ok(())
}

/// Everything deployed at start, nothing afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticPopulation {
    name: String,
    pub sources: Vec<SourceControl>,
    pub sinks: Vec<SinkControl>,
}

impl StaticPopulation {
    pub fn new(name: impl Into<String>) -> Self {
        StaticPopulation {
            name: name.into(),
            sources: Vec::new(),
            sinks: Vec::new(),
        }
    }

    pub fn with_source(mut self, source: SourceControl) -> Self {
        self.sources.push(source);
        self
    }

    pub fn with_sink(mut self, sink: SinkControl) -> Self {
        self.sinks.push(sink);
        self
    }
}

impl PopulationPolicy for StaticPopulation {
    fn name(&self) -> &str {
        &self.name
    }

    fn initial_allocation(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        deploy_sinks(ctl, &self.sinks)?;
        for s in &self.sources {
            for &node in &s.nodes {
                for _ in 0..s.number {
                    ctl.deploy_source(&s.app, &s.message, node, s.distribution)?;
                }
            }
        }
        Ok(())
    }
}

/// Sinks at start, then one new source per activation tick on the next
/// target node.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutivePopulation {
    name: String,
    app: String,
    message: String,
    distribution: TemporalDistribution,
    targets: Vec<NodeId>,
    activation: TemporalDistribution,
    initial: usize,
    sinks: Vec<SinkControl>,
    next: usize,
}

impl EvolutivePopulation {
    pub fn new(
        name: impl Into<String>,
        app: impl Into<String>,
        message: impl Into<String>,
        distribution: TemporalDistribution,
        targets: Vec<NodeId>,
        activation: TemporalDistribution,
    ) -> Self {
        EvolutivePopulation {
            name: name.into(),
            app: app.into(),
            message: message.into(),
            distribution,
            targets,
            activation,
            initial: 0,
            sinks: Vec::new(),
            next: 0,
        }
    }

    /// Sources deployed on the first `n` targets at start.
    pub fn with_initial(mut self, n: usize) -> Self {
        self.initial = n;
        self
    }

    pub fn with_sink(mut self, sink: SinkControl) -> Self {
        self.sinks.push(sink);
        self
    }

    fn deploy_next(&mut self, ctl: &mut Control<'_>) -> Result<bool, EngineError> {
        while let Some(&node) = self.targets.get(self.next) {
            self.next += 1;
            if ctl.topology().contains_node(node) {
                ctl.deploy_source(&self.app, &self.message, node, self.distribution)?;
                return Ok(true);
            }
        }
        Ok(false)
    }
}

impl PopulationPolicy for EvolutivePopulation {
    fn name(&self) -> &str {
        &self.name
    }

    fn activation(&self) -> Option<TemporalDistribution> {
        Some(self.activation)
    }

    fn initial_allocation(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        deploy_sinks(ctl, &self.sinks)?;
        for _ in 0..self.initial {
            self.deploy_next(ctl)?;
        }
        Ok(())
    }

    fn run(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError> {
        if !self.deploy_next(ctl)? {
            ctl.log_note(format!("{}: target list exhausted", self.name));
        }
        Ok(())
    }
}
