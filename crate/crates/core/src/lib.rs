//! Deterministic discrete-event simulator for fog and edge computing.
//!
//! A run combines a [`TopologyGraph`], one or more [`Application`]s and a set
//! of policies into a [`Simulation`]; the result is a [`ResultSet`] of
//! compute, link, drop and control records.

pub mod application;
pub mod distributions;
pub mod engine;
pub mod ids;
pub mod policies;
pub mod results;
pub mod scenario;
pub mod time;
pub mod topology;

pub use application::{AppError, Application, MessageType, ModuleKind, TransmissionMode};
pub use distributions::{RandomStream, TemporalDistribution};
pub use engine::{Control, EngineError, EngineOptions, Simulation};
pub use ids::{DesId, MessageId, NodeId};
pub use results::{ComputeRecord, DropRecord, LinkRecord, ResultSet};
pub use time::SimTime;
pub use topology::{LinkAttrs, NodeAttrs, TopologyError, TopologyGraph};
