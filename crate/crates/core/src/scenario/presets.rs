//! Built-in experiment setups.
//!
//! Parameters the experiments leave open (link speeds, compute rates,
//! message sizes) are calibrated constants, listed below.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::application::{Application, MessageType, ModuleKind, TransmissionMode};
use crate::distributions::{RandomStream, TemporalDistribution};
use crate::ids::NodeId;
use crate::topology::{LinkAttrs, NodeAttrs, TopologyGraph};

use super::geometric::euclidean_graph;
use super::schema::{
    PlacementSpec, PopulationSpec, ProcessSpec, Scenario, SelectionSpec, SinkSpec, SourceSpec,
    TopologySpec,
};

pub const NAMES: [&str; 4] = ["egg", "scaling", "failures", "mobility"];

/// Module placement for the game preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EggPolicy {
    /// Every module in the cloud node.
    Cloud,
    /// Client on the player devices, Calculator on the gateways,
    /// Coordinator in the cloud.
    Edge,
}

impl FromStr for EggPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cloud" => Ok(EggPolicy::Cloud),
            "edge" => Ok(EggPolicy::Edge),
            other => Err(format!("unknown policy '{other}' (expected cloud or edge)")),
        }
    }
}

impl std::fmt::Display for EggPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EggPolicy::Cloud => "cloud",
            EggPolicy::Edge => "edge",
        })
    }
}

/// Arguments accepted by [`by_name`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetParams {
    pub seed: u64,
    pub gateways: usize,
    pub policy: EggPolicy,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            seed: 1,
            gateways: 4,
            policy: EggPolicy::Edge,
        }
    }
}

pub fn by_name(name: &str, params: &PresetParams) -> Result<Scenario, String> {
    match name {
        "egg" => {
            if params.gateways == 0 {
                return Err("egg needs at least one gateway".into());
            }
            let mut s = egg(params.gateways, params.policy);
            s.seed = params.seed;
            Ok(s)
        }
        "scaling" => Ok(scaling(params.seed)),
        "failures" => Ok(failures(params.seed)),
        "mobility" => Ok(mobility(params.seed)),
        other => Err(format!(
            "unknown preset '{other}' (expected one of {})",
            NAMES.join(", ")
        )),
    }
}

// ---- game on a cloud / proxy / gateway / device tree ----

pub const EGG_APP: &str = "EGG_GAME";
pub const EGG_LOOP: [&str; 3] = ["M.EGG", "M.Sensor", "M.Concentration"];
pub const EGG_CLIENTS_PER_GATEWAY: usize = 4;
pub const EGG_PERIOD: f64 = 100.0;

const CLOUD_IPT: f64 = 1e11;
const PROXY_IPT: f64 = 4e9;
const GATEWAY_IPT: f64 = 4e9;
const DEVICE_IPT: f64 = 1e9;
/// Sensor and display links: 500 bytes in 4 units.
const DEVICE_BW: f64 = 125.0;
const DEVICE_PR: f64 = 5e-6;
const ACCESS_BW: f64 = 500.0;
const ACCESS_PR: f64 = 0.6;
const METRO_BW: f64 = 500.0;
const METRO_PR: f64 = 2.0;
const CORE_BW: f64 = 200.0;
const CORE_PR: f64 = 5.0;

pub fn egg_application() -> Application {
    let det = TemporalDistribution::deterministic(EGG_PERIOD);
    Application::new(EGG_APP)
        .with_module("EGG", ModuleKind::Source)
        .with_module("Display", ModuleKind::Sink)
        .with_module("Client", ModuleKind::Module)
        .with_module("Calculator", ModuleKind::Module)
        .with_module("Coordinator", ModuleKind::Module)
        .with_message(MessageType::new("M.EGG", "EGG", "Client", 2000e6, 500.0))
        .with_message(MessageType::new(
            "M.Sensor",
            "Client",
            "Calculator",
            3500e6,
            500.0,
        ))
        .with_message(MessageType::new(
            "M.Player_Game_State",
            "Calculator",
            "Coordinator",
            1000e6,
            1000.0,
        ))
        .with_message(MessageType::new(
            "M.Concentration",
            "Calculator",
            "Client",
            14e6,
            500.0,
        ))
        .with_message(MessageType::new(
            "M.Global_Game_State",
            "Coordinator",
            "Client",
            28e6,
            1000.0,
        ))
        .with_message(MessageType::new(
            "M.Global_State_Update",
            "Client",
            "Display",
            1000e6,
            500.0,
        ))
        .with_message(MessageType::new(
            "M.Self_State_Update",
            "Client",
            "Display",
            1000e6,
            500.0,
        ))
        .with_service_source("Calculator", "M.Player_Game_State", det)
        .with_service_source("Coordinator", "M.Global_Game_State", det)
        .with_rule(
            "Client",
            "M.EGG",
            Some("M.Sensor"),
            TransmissionMode::Fractional(0.9),
        )
        .with_rule(
            "Client",
            "M.Concentration",
            Some("M.Self_State_Update"),
            TransmissionMode::Fractional(1.0),
        )
        .with_rule(
            "Client",
            "M.Global_Game_State",
            Some("M.Global_State_Update"),
            TransmissionMode::Fractional(1.0),
        )
        .with_rule(
            "Calculator",
            "M.Sensor",
            Some("M.Concentration"),
            TransmissionMode::Fractional(1.0),
        )
        .with_rule(
            "Coordinator",
            "M.Player_Game_State",
            None,
            TransmissionMode::Sink,
        )
}

/// Node ids of one gateway subtree. Ids depend only on the gateway index,
/// so subtree `i` is numbered the same whatever the gateway count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EggSubtree {
    pub gateway: NodeId,
    /// `(device, sensor, display)` per player.
    pub players: Vec<(NodeId, NodeId, NodeId)>,
}

pub const EGG_CLOUD: NodeId = NodeId(0);
pub const EGG_PROXY: NodeId = NodeId(1);

pub fn egg_subtree(i: usize) -> EggSubtree {
    let block = 1 + 3 * EGG_CLIENTS_PER_GATEWAY;
    let base = (2 + i * block) as u32;
    EggSubtree {
        gateway: NodeId(base),
        players: (0..EGG_CLIENTS_PER_GATEWAY as u32)
            .map(|j| {
                let d = base + 1 + 3 * j;
                (NodeId(d), NodeId(d + 1), NodeId(d + 2))
            })
            .collect(),
    }
}

pub fn egg_topology(gateways: usize) -> TopologyGraph {
    let mut g = TopologyGraph::new();
    let mut node = |id: NodeId, ipt: f64, role: &str| {
        g.add_node(NodeAttrs::new(id, ipt, 1.0).with_custom("role", role))
            .expect("fresh id");
    };
    node(EGG_CLOUD, CLOUD_IPT, "cloud");
    node(EGG_PROXY, PROXY_IPT, "proxy");
    let subtrees: Vec<EggSubtree> = (0..gateways).map(egg_subtree).collect();
    for t in &subtrees {
        node(t.gateway, GATEWAY_IPT, "gateway");
        for &(d, s, a) in &t.players {
            node(d, DEVICE_IPT, "client");
            node(s, DEVICE_IPT, "sensor");
            node(a, DEVICE_IPT, "display");
        }
    }
    let mut link = |a: NodeId, b: NodeId, bw: f64, pr: f64| {
        g.add_link(LinkAttrs::new(a, b, bw, pr)).expect("tree link");
    };
    link(EGG_CLOUD, EGG_PROXY, CORE_BW, CORE_PR);
    for t in &subtrees {
        link(EGG_PROXY, t.gateway, METRO_BW, METRO_PR);
        for &(d, s, a) in &t.players {
            link(t.gateway, d, ACCESS_BW, ACCESS_PR);
            link(s, d, DEVICE_BW, DEVICE_PR);
            link(d, a, DEVICE_BW, DEVICE_PR);
        }
    }
    g
}

/// The game on `gateways` gateway subtrees, seed 1, horizon 10^5.
pub fn egg(gateways: usize, policy: EggPolicy) -> Scenario {
    let subtrees: Vec<EggSubtree> = (0..gateways).map(egg_subtree).collect();
    let devices: Vec<NodeId> = subtrees
        .iter()
        .flat_map(|t| t.players.iter().map(|p| p.0))
        .collect();
    let sensors: Vec<NodeId> = subtrees
        .iter()
        .flat_map(|t| t.players.iter().map(|p| p.1))
        .collect();
    let displays: Vec<NodeId> = subtrees
        .iter()
        .flat_map(|t| t.players.iter().map(|p| p.2))
        .collect();
    let mut assign = BTreeMap::new();
    match policy {
        EggPolicy::Cloud => {
            for m in ["Client", "Calculator", "Coordinator"] {
                assign.insert(m.to_string(), vec![EGG_CLOUD]);
            }
        }
        EggPolicy::Edge => {
            assign.insert("Client".to_string(), devices);
            assign.insert(
                "Calculator".to_string(),
                subtrees.iter().map(|t| t.gateway).collect(),
            );
            assign.insert("Coordinator".to_string(), vec![EGG_CLOUD]);
        }
    }
    Scenario {
        seed: 1,
        until: 1e5,
        topology: TopologySpec::inline(egg_topology(gateways).to_document()),
        application: vec![egg_application().to_document()],
        placement: vec![PlacementSpec::Static {
            name: Some(format!("{policy}")),
            app: EGG_APP.into(),
            assign,
        }],
        population: vec![PopulationSpec::Static {
            name: Some("players".into()),
            sources: vec![SourceSpec {
                app: EGG_APP.into(),
                message: "M.EGG".into(),
                distribution: TemporalDistribution::deterministic(EGG_PERIOD),
                nodes: sensors,
                number: 1,
            }],
            sinks: vec![SinkSpec {
                app: EGG_APP.into(),
                module: "Display".into(),
                nodes: displays,
                number: 1,
            }],
        }],
        selection: SelectionSpec::ShortestPath,
        process: Vec::new(),
        loops: vec![EGG_LOOP.iter().map(|s| s.to_string()).collect()],
    }
}

// ---- sender / receiver experiments on a random geometric graph ----

pub const SENSE_APP: &str = "SENSING";
pub const SENSE_MESSAGE: &str = "M.A";
pub const GRAPH_NODES: usize = 400;
pub const GRAPH_EDGES: usize = 2242;
pub const SENDERS: usize = 100;
pub const RECEIVERS: usize = 20;
const GRAPH_BW: f64 = 400.0;
const GRAPH_PR: f64 = 1.0;
/// Half a unit on the wire per hop.
const LOAD_BYTES: f64 = 200.0;
/// Negligible transmission time, so latency tracks hop count.
const LIGHT_BYTES: f64 = 0.4;

fn sensing_application(bytes: f64) -> Application {
    Application::new(SENSE_APP)
        .with_module("Sender", ModuleKind::Source)
        .with_module("Receiver", ModuleKind::Module)
        .with_message(MessageType::new(
            SENSE_MESSAGE,
            "Sender",
            "Receiver",
            0.0,
            bytes,
        ))
        .with_rule("Receiver", SENSE_MESSAGE, None, TransmissionMode::Sink)
}

/// The shared random graph for `seed`, with point coordinates as node
/// attributes.
pub fn geometric_topology(seed: u64) -> TopologyGraph {
    let eg = euclidean_graph(GRAPH_NODES, GRAPH_EDGES, seed);
    let mut g = TopologyGraph::new();
    for (i, &(x, y)) in eg.points.iter().enumerate() {
        g.add_node(
            NodeAttrs::new(i as u32, 1.0, 1.0)
                .with_custom("x", x)
                .with_custom("y", y),
        )
        .expect("fresh id");
    }
    for &(a, b) in &eg.edges {
        g.add_link(LinkAttrs::new(a as u32, b as u32, GRAPH_BW, GRAPH_PR))
            .expect("distinct pair");
    }
    g
}

/// Sender nodes: `SENDERS` distinct nodes drawn from the seed, ascending.
pub fn sender_nodes(seed: u64) -> Vec<NodeId> {
    let mut ids: Vec<NodeId> = (0..GRAPH_NODES as u32).map(NodeId).collect();
    RandomStream::substream(seed, "preset:senders").shuffle(&mut ids);
    let mut chosen = ids[..SENDERS].to_vec();
    chosen.sort();
    chosen
}

fn sensing(seed: u64, bytes: f64, period: f64, until: f64, receivers: PlacementSpec) -> Scenario {
    Scenario {
        seed,
        until,
        topology: TopologySpec::inline(geometric_topology(seed).to_document()),
        application: vec![sensing_application(bytes).to_document()],
        placement: vec![receivers],
        population: vec![PopulationSpec::Static {
            name: Some("senders".into()),
            sources: vec![SourceSpec {
                app: SENSE_APP.into(),
                message: SENSE_MESSAGE.into(),
                distribution: TemporalDistribution::deterministic(period),
                nodes: sender_nodes(seed),
                number: 1,
            }],
            sinks: Vec::new(),
        }],
        selection: SelectionSpec::ShortestPath,
        process: Vec::new(),
        loops: vec![vec![SENSE_MESSAGE.into()]],
    }
}

pub const SCALING_START: f64 = 3000.0;
pub const SCALING_PERIOD: f64 = 300.0;

/// One receiver on the most central node, then one more every 300 units
/// from t=3000 until there are 20.
pub fn scaling(seed: u64) -> Scenario {
    sensing(
        seed,
        LOAD_BYTES,
        10.0,
        10_000.0,
        PlacementSpec::Betweenness {
            name: Some("receivers".into()),
            app: SENSE_APP.into(),
            module: "Receiver".into(),
            count: 1,
            max: Some(RECEIVERS),
            activation: Some(TemporalDistribution::deterministic_start(
                SCALING_START,
                SCALING_PERIOD,
            )),
            colocated: false,
        },
    )
}

pub const FAILURE_START: f64 = 500.0;
pub const FAILURE_MEAN: f64 = 100.0;

/// Twenty receivers from the start; nodes fail from t=500 with exponential
/// gaps of mean 100, in an order drawn from the seed. Sender nodes never
/// fail.
pub fn failures(seed: u64) -> Scenario {
    let mut s = sensing(
        seed,
        LOAD_BYTES,
        10.0,
        10_000.0,
        PlacementSpec::Betweenness {
            name: Some("receivers".into()),
            app: SENSE_APP.into(),
            module: "Receiver".into(),
            count: RECEIVERS,
            max: None,
            activation: None,
            colocated: false,
        },
    );
    let senders = sender_nodes(seed);
    let mut candidates: Vec<NodeId> = (0..GRAPH_NODES as u32)
        .map(NodeId)
        .filter(|n| senders.binary_search(n).is_err())
        .collect();
    RandomStream::substream(seed, "preset:failures").shuffle(&mut candidates);
    s.process.push(ProcessSpec::Failure {
        name: Some("failures".into()),
        candidates,
        activation: TemporalDistribution::exponential_start(FAILURE_START, FAILURE_MEAN),
        protect: Vec::new(),
        protect_sources: true,
    });
    s
}

pub const MOVEMENT_PERIOD: f64 = 400.0;

/// Twenty receivers on the most central node, round-robin selection, and
/// every sender one hop closer to its receiver every 400 units.
pub fn mobility(seed: u64) -> Scenario {
    let mut s = sensing(
        seed,
        LIGHT_BYTES,
        100.0,
        10_000.0,
        PlacementSpec::Betweenness {
            name: Some("receivers".into()),
            app: SENSE_APP.into(),
            module: "Receiver".into(),
            count: RECEIVERS,
            max: None,
            activation: None,
            colocated: true,
        },
    );
    s.selection = SelectionSpec::RoundRobin;
    s.process.push(ProcessSpec::Movement {
        name: Some("movement".into()),
        app: SENSE_APP.into(),
        activation: TemporalDistribution::deterministic(MOVEMENT_PERIOD),
    });
    s
}
