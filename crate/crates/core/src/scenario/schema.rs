use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::application::{Application, ApplicationDoc, ModuleKind};
use crate::distributions::TemporalDistribution;
use crate::engine::{EngineError, EngineOptions, Simulation};
use crate::ids::NodeId;
use crate::policies::{
    BetweennessPlacement, EvolutivePopulation, FailureProcess, MovementProcess,
    RoundRobinSelection, SelectionPolicy, ShortestPathSelection, SinkControl, SourceControl,
    StaticPlacement, StaticPopulation,
};
use crate::topology::{
    load_topology, parse_edge_list, LinkDoc, NodeDoc, TopologyDocument, TopologyError,
    TopologyGraph,
};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ScenarioError {
    fn invalid(location: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for problems with the scenario itself rather than the file system.
    pub fn is_validation(&self) -> bool {
        !matches!(self, ScenarioError::Io { .. })
    }
}

/// A complete, self-contained simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub until: f64,
    pub topology: TopologySpec,
    #[serde(default)]
    pub application: Vec<ApplicationDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub placement: Vec<PlacementSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub population: Vec<PopulationSpec>,
    #[serde(default)]
    pub selection: SelectionSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub process: Vec<ProcessSpec>,
    /// Message chains reported as sequence latencies.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loops: Vec<Vec<String>>,
}

/// Inline nodes and links, or a whitespace edge list (`s d BW PR` per line)
/// whose nodes all get `ipt` and `ram`. Relative edge-list paths resolve
/// against the scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entity: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub link: Vec<LinkDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_list: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ram: Option<f64>,
}

impl TopologySpec {
    pub fn inline(doc: TopologyDocument) -> Self {
        TopologySpec {
            entity: doc.entity,
            link: doc.link,
            ..Default::default()
        }
    }

    fn graph(&self, base: Option<&Path>) -> Result<TopologyGraph, ScenarioError> {
        match &self.edge_list {
            None => {
                if self.ipt.is_some() || self.ram.is_some() {
                    return Err(ScenarioError::invalid(
                        "topology",
                        "'ipt' and 'ram' only apply to 'edge_list'",
                    ));
                }
                let doc = TopologyDocument {
                    entity: self.entity.clone(),
                    link: self.link.clone(),
                };
                Ok(load_topology(&doc)?)
            }
            Some(file) => {
                if !self.entity.is_empty() || !self.link.is_empty() {
                    return Err(ScenarioError::invalid(
                        "topology",
                        "'edge_list' cannot be combined with 'entity' or 'link'",
                    ));
                }
                let path = match base {
                    Some(dir) => dir.join(file),
                    None => PathBuf::from(file),
                };
                let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
                    path: path.clone(),
                    source,
                })?;
                let ipt = self.ipt.unwrap_or(1.0);
                let ram = self.ram.unwrap_or(0.0);
                Ok(parse_edge_list(&text, ipt, ram)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlacementSpec {
    /// Fixed module-to-nodes map.
    Static {
        #[serde(default)]
        name: Option<String>,
        app: String,
        assign: BTreeMap<String, Vec<NodeId>>,
    },
    /// Replicas on the most central nodes, optionally growing over time.
    Betweenness {
        #[serde(default)]
        name: Option<String>,
        app: String,
        module: String,
        count: usize,
        #[serde(default)]
        max: Option<usize>,
        #[serde(default)]
        activation: Option<TemporalDistribution>,
        #[serde(default)]
        colocated: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub app: String,
    pub message: String,
    pub distribution: TemporalDistribution,
    pub nodes: Vec<NodeId>,
    #[serde(default = "one")]
    pub number: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinkSpec {
    pub app: String,
    pub module: String,
    pub nodes: Vec<NodeId>,
    #[serde(default = "one")]
    pub number: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PopulationSpec {
    Static {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        sources: Vec<SourceSpec>,
        #[serde(default)]
        sinks: Vec<SinkSpec>,
    },
    /// One more source per activation tick, walking `targets`.
    Evolutive {
        #[serde(default)]
        name: Option<String>,
        app: String,
        message: String,
        distribution: TemporalDistribution,
        targets: Vec<NodeId>,
        activation: TemporalDistribution,
        #[serde(default)]
        initial: usize,
        #[serde(default)]
        sinks: Vec<SinkSpec>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionSpec {
    #[default]
    ShortestPath,
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Failure {
        #[serde(default)]
        name: Option<String>,
        candidates: Vec<NodeId>,
        activation: TemporalDistribution,
        #[serde(default)]
        protect: Vec<NodeId>,
        #[serde(default)]
        protect_sources: bool,
    },
    Movement {
        #[serde(default)]
        name: Option<String>,
        app: String,
        activation: TemporalDistribution,
    },
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scenario = Scenario::from_json_str(&text)?;
    if scenario.topology.edge_list.is_some() {
        // Inline the edge list so the scenario no longer depends on its file.
        let base = path.parent().filter(|p| !p.as_os_str().is_empty());
        let graph = scenario.topology.graph(base)?;
        scenario.topology = TopologySpec::inline(graph.to_document());
    }
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    /// Parses without cross-validation.
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let mut message = inner.to_string();
            if let Some(i) = message.rfind(" at line ") {
                message.truncate(i);
            }
            let location = if path == "." || path.is_empty() {
                format!("line {} column {}", inner.line(), inner.column())
            } else {
                format!("{path} (line {} column {})", inner.line(), inner.column())
            };
            ScenarioError::Parse { location, message }
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    pub fn applications(&self) -> Result<Vec<Application>, ScenarioError> {
        let mut seen = BTreeSet::new();
        let mut apps = Vec::with_capacity(self.application.len());
        for (i, doc) in self.application.iter().enumerate() {
            let location = format!("application[{i}]");
            let app = doc
                .clone()
                .into_application()
                .map_err(|e| ScenarioError::invalid(&location, e.to_string()))?;
            app.validate()
                .map_err(|e| ScenarioError::invalid(&location, e.to_string()))?;
            if !seen.insert(app.name.clone()) {
                return Err(ScenarioError::invalid(
                    location,
                    format!("duplicate application '{}'", app.name),
                ));
            }
            apps.push(app);
        }
        Ok(apps)
    }

    pub fn topology_graph(&self) -> Result<TopologyGraph, ScenarioError> {
        self.topology.graph(None)
    }

    /// Checks every cross reference, so that a valid scenario never fails
    /// name resolution once running.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.until.is_finite() && self.until > 0.0) {
            return Err(ScenarioError::invalid(
                "until",
                format!("must be finite and > 0, got {}", self.until),
            ));
        }
        let graph = self.topology_graph()?;
        let apps = self.applications()?;
        let app = |location: &str, name: &str| {
            apps.iter().find(|a| a.name == name).ok_or_else(|| {
                ScenarioError::invalid(location, format!("unknown application '{name}'"))
            })
        };
        let module = |location: &str, a: &Application, name: &str, kinds: &[ModuleKind]| {
            let m = a.module(name).ok_or_else(|| {
                ScenarioError::invalid(
                    location,
                    format!("module '{name}' not in application '{}'", a.name),
                )
            })?;
            if !kinds.contains(&m.kind) {
                return Err(ScenarioError::invalid(
                    location,
                    format!(
                        "module '{name}' of application '{}' has kind {:?}",
                        a.name, m.kind
                    ),
                ));
            }
            Ok(())
        };
        let nodes = |location: &str, list: &[NodeId], compute: bool| {
            for &n in list {
                match graph.node(n) {
                    None => {
                        return Err(ScenarioError::invalid(
                            location,
                            format!("unknown node {n}"),
                        ))
                    }
                    Some(attrs) if compute && attrs.ipt <= 0.0 => {
                        return Err(ScenarioError::invalid(
                            location,
                            format!("node {n} has no compute capacity"),
                        ))
                    }
                    _ => {}
                }
            }
            Ok(())
        };
        let source = |location: &str, a: &Application, message: &str| {
            if a.source_messages().contains(&message) {
                Ok(())
            } else {
                Err(ScenarioError::invalid(
                    location,
                    format!(
                        "message '{message}' is not a source message of application '{}'",
                        a.name
                    ),
                ))
            }
        };
        let sinks = |location: &str, list: &[SinkSpec]| {
            for (j, s) in list.iter().enumerate() {
                let location = format!("{location}.sinks[{j}]");
                let a = app(&location, &s.app)?;
                module(&location, a, &s.module, &[ModuleKind::Sink])?;
                nodes(&location, &s.nodes, false)?;
            }
            Ok::<(), ScenarioError>(())
        };

        for (i, p) in self.placement.iter().enumerate() {
            let location = format!("placement[{i}]");
            match p {
                PlacementSpec::Static {
                    app: name, assign, ..
                } => {
                    let a = app(&location, name)?;
                    for (m, list) in assign {
                        let location = format!("{location}.assign.{m}");
                        module(&location, a, m, &[ModuleKind::Module, ModuleKind::Sink])?;
                        let compute = a.module(m).is_some_and(|x| x.kind == ModuleKind::Module);
                        nodes(&location, list, compute)?;
                    }
                }
                PlacementSpec::Betweenness {
                    app: name,
                    module: m,
                    count,
                    max,
                    activation,
                    colocated,
                    ..
                } => {
                    let a = app(&location, name)?;
                    module(&location, a, m, &[ModuleKind::Module, ModuleKind::Sink])?;
                    let max = max.unwrap_or(*count);
                    if *count == 0 && activation.is_none() {
                        return Err(ScenarioError::invalid(location, "count must be at least 1"));
                    }
                    if max < *count {
                        return Err(ScenarioError::invalid(
                            location,
                            format!("max {max} below count {count}"),
                        ));
                    }
                    if max > *count && activation.is_none() {
                        return Err(ScenarioError::invalid(
                            location,
                            "max above count needs an activation",
                        ));
                    }
                    if !colocated && max > graph.node_count() {
                        return Err(ScenarioError::invalid(
                            location,
                            format!("{max} replicas requested on {} nodes", graph.node_count()),
                        ));
                    }
                }
            }
        }
        for (i, p) in self.population.iter().enumerate() {
            let location = format!("population[{i}]");
            match p {
                PopulationSpec::Static {
                    sources, sinks: s, ..
                } => {
                    for (j, src) in sources.iter().enumerate() {
                        let location = format!("{location}.sources[{j}]");
                        let a = app(&location, &src.app)?;
                        source(&location, a, &src.message)?;
                        nodes(&location, &src.nodes, false)?;
                    }
                    sinks(&location, s)?;
                }
                PopulationSpec::Evolutive {
                    app: name,
                    message,
                    targets,
                    initial,
                    sinks: s,
                    ..
                } => {
                    let a = app(&location, name)?;
                    source(&location, a, message)?;
                    nodes(&location, targets, false)?;
                    if *initial > targets.len() {
                        return Err(ScenarioError::invalid(
                            location,
                            format!("initial {initial} exceeds {} targets", targets.len()),
                        ));
                    }
                    sinks(&location, s)?;
                }
            }
        }
        for (i, p) in self.process.iter().enumerate() {
            let location = format!("process[{i}]");
            match p {
                ProcessSpec::Failure {
                    candidates,
                    protect,
                    ..
                } => {
                    nodes(&location, candidates, false)?;
                    nodes(&location, protect, false)?;
                }
                ProcessSpec::Movement { app: name, .. } => {
                    app(&location, name)?;
                }
            }
        }
        for (i, chain) in self.loops.iter().enumerate() {
            let location = format!("loops[{i}]");
            if chain.is_empty() {
                return Err(ScenarioError::invalid(location, "empty message chain"));
            }
            for m in chain {
                if !apps.iter().any(|a| a.message(m).is_some()) {
                    return Err(ScenarioError::invalid(
                        &location,
                        format!("unknown message '{m}'"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Validates, then assembles a ready-to-run simulation.
    pub fn build(&self) -> Result<Simulation, ScenarioError> {
        self.build_with(EngineOptions::default())
    }

    pub fn build_with(&self, options: EngineOptions) -> Result<Simulation, ScenarioError> {
        self.validate()?;
        let selection: Box<dyn SelectionPolicy> = match self.selection {
            SelectionSpec::ShortestPath => Box::new(ShortestPathSelection::new()),
            SelectionSpec::RoundRobin => Box::new(RoundRobinSelection::new()),
        };
        let mut sim = Simulation::with_options(
            self.topology_graph()?,
            self.applications()?,
            self.seed,
            selection,
            options,
        )?;
        let label = |name: &Option<String>, kind: &str, i: usize| {
            name.clone().unwrap_or_else(|| format!("{kind}{i}"))
        };
        let sink = |s: &SinkSpec| SinkControl {
            app: s.app.clone(),
            module: s.module.clone(),
            nodes: s.nodes.clone(),
            number: s.number,
        };
        for (i, p) in self.placement.iter().enumerate() {
            match p {
                PlacementSpec::Static { name, app, assign } => {
                    let mut policy = StaticPlacement::new(label(name, "placement", i), app);
                    for (m, nodes) in assign {
                        policy = policy.assign(m, nodes.iter().copied());
                    }
                    sim.add_placement(Box::new(policy));
                }
                PlacementSpec::Betweenness {
                    name,
                    app,
                    module,
                    count,
                    max,
                    activation,
                    colocated,
                } => {
                    let mut policy =
                        BetweennessPlacement::new(label(name, "placement", i), app, module, *count);
                    if let Some(act) = activation {
                        policy = policy.evolving(max.unwrap_or(*count), *act);
                    }
                    if *colocated {
                        policy = policy.colocated();
                    }
                    sim.add_placement(Box::new(policy));
                }
            }
        }
        for (i, p) in self.population.iter().enumerate() {
            match p {
                PopulationSpec::Static {
                    name,
                    sources,
                    sinks,
                } => {
                    let mut policy = StaticPopulation::new(label(name, "population", i));
                    for s in sources {
                        policy = policy.with_source(SourceControl {
                            app: s.app.clone(),
                            message: s.message.clone(),
                            distribution: s.distribution,
                            nodes: s.nodes.clone(),
                            number: s.number,
                        });
                    }
                    for s in sinks {
                        policy = policy.with_sink(sink(s));
                    }
                    sim.add_population(Box::new(policy));
                }
                PopulationSpec::Evolutive {
                    name,
                    app,
                    message,
                    distribution,
                    targets,
                    activation,
                    initial,
                    sinks,
                } => {
                    let mut policy = EvolutivePopulation::new(
                        label(name, "population", i),
                        app,
                        message,
                        *distribution,
                        targets.clone(),
                        *activation,
                    )
                    .with_initial(*initial);
                    for s in sinks {
                        policy = policy.with_sink(sink(s));
                    }
                    sim.add_population(Box::new(policy));
                }
            }
        }
        for (i, p) in self.process.iter().enumerate() {
            match p {
                ProcessSpec::Failure {
                    name,
                    candidates,
                    activation,
                    protect,
                    protect_sources,
                } => {
                    let mut process = FailureProcess::new(
                        label(name, "failure", i),
                        candidates.clone(),
                        *activation,
                    )
                    .protect(protect.iter().copied());
                    if *protect_sources {
                        process = process.protect_sources();
                    }
                    sim.add_process(Box::new(process));
                }
                ProcessSpec::Movement {
                    name,
                    app,
                    activation,
                } => {
                    sim.add_process(Box::new(MovementProcess::new(
                        label(name, "movement", i),
                        app,
                        *activation,
                    )));
                }
            }
        }
        Ok(sim)
    }

    /// Nodes hosting workload sources at start.
    pub fn sender_nodes(&self) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for p in &self.population {
            match p {
                PopulationSpec::Static { sources, .. } => {
                    out.extend(sources.iter().flat_map(|s| s.nodes.iter().copied()));
                }
                PopulationSpec::Evolutive {
                    targets, initial, ..
                } => {
                    out.extend(targets.iter().take(*initial).copied());
                }
            }
        }
        out
    }

    /// Failure candidates of every failure process, in order.
    pub fn failure_candidates(&self) -> Vec<NodeId> {
        self.process
            .iter()
            .flat_map(|p| match p {
                ProcessSpec::Failure { candidates, .. } => candidates.clone(),
                ProcessSpec::Movement { .. } => Vec::new(),
            })
            .collect()
    }
}
