//! Placement, population and selection strategies, plus custom processes.

mod failure;
mod movement;
mod placement;
mod population;
mod selection;

pub use failure::FailureProcess;
pub use movement::MovementProcess;
pub use placement::{BetweennessPlacement, StaticPlacement};
pub use population::{EvolutivePopulation, SinkControl, SourceControl, StaticPopulation};
pub use selection::{RoundRobinSelection, ShortestPathSelection};

use crate::distributions::TemporalDistribution;
use crate::engine::{Control, EngineError, NetworkView, Request, Route};
use crate::ids::{DesId, NodeId};

/// Decides where application modules run.
pub trait PlacementPolicy {
    fn name(&self) -> &str;

    /// Schedule for [`PlacementPolicy::run`]; `None` means never.
    fn activation(&self) -> Option<TemporalDistribution> {
        None
    }

    fn initial_allocation(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError>;

    fn run(&mut self, _ctl: &mut Control<'_>) -> Result<(), EngineError> {
        Ok(())
    }
}

/// Decides where workload sources and sinks live.
pub trait PopulationPolicy {
    fn name(&self) -> &str;

    fn activation(&self) -> Option<TemporalDistribution> {
        None
    }

    fn initial_allocation(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError>;

    fn run(&mut self, _ctl: &mut Control<'_>) -> Result<(), EngineError> {
        Ok(())
    }
}

/// Arbitrary code invoked on a schedule.
pub trait CustomProcess {
    fn name(&self) -> &str;

    fn activation(&self) -> TemporalDistribution;

    fn initial_allocation(&mut self, _ctl: &mut Control<'_>) -> Result<(), EngineError> {
        Ok(())
    }

    fn run(&mut self, ctl: &mut Control<'_>) -> Result<(), EngineError>;
}

/// Chooses the serving replica and the path for every emitted message.
pub trait SelectionPolicy {
    fn name(&self) -> &str;

    fn select(&mut self, view: &NetworkView<'_>, req: &Request<'_>) -> Option<Route>;

    /// Route for a message whose path or destination was invalidated.
    /// `from` is the node the message resumes from; `current` is the
    /// destination it was heading to, which may no longer be alive.
    fn reroute(
        &mut self,
        view: &NetworkView<'_>,
        req: &Request<'_>,
        current: DesId,
        from: NodeId,
    ) -> Option<Route>;
}
