//! Shared fixtures for the benchmarks.

use fogsim::scenario::presets::{self, EggPolicy};
use fogsim::scenario::Scenario;
use fogsim::{ResultSet, SimTime, TopologyGraph};

pub fn egg(gateways: usize, until: f64) -> Scenario {
    let mut s = presets::egg(gateways, EggPolicy::Edge);
    s.until = until;
    s
}

pub fn run(s: &Scenario) -> ResultSet {
    s.build()
        .unwrap()
        .run(SimTime::from_units(s.until))
        .unwrap()
}

/// The 400-node random geometric network used by the sensing presets.
pub fn geometric() -> TopologyGraph {
    presets::geometric_topology(1)
}
