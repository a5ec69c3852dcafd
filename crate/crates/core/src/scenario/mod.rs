//! JSON scenarios and the built-in experiment presets.

mod geometric;
pub mod presets;
mod schema;

pub use geometric::{euclidean_graph, EuclideanGraph};
pub use presets::{EggPolicy, PresetParams};
pub use schema::{
    load_scenario, PlacementSpec, PopulationSpec, ProcessSpec, Scenario, ScenarioError,
    SelectionSpec, SinkSpec, SourceSpec, TopologySpec,
};
