use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::application::{Application, ModuleKind};
use crate::distributions::{RandomStream, TemporalDistribution};
use crate::ids::{DesId, MessageId, NodeId};
use crate::policies::SelectionPolicy;
use crate::results::{
    AffectedMessage, ComputeKind, ComputeRecord, ControlEvent, ControlRecord, DropReason,
    DropRecord, FailureReport, LinkKind, LinkRecord, LinkTraceEntry, Outcome, ResultSet,
};
use crate::time::SimTime;
use crate::topology::TopologyGraph;

use super::network::{NetworkView, Request, Route, RouteCache};
use super::queue::EventQueue;
use super::EngineError;

pub(crate) type ReplicaIndex = HashMap<String, HashMap<String, BTreeSet<DesId>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Placement(usize),
    Population(usize),
    Custom(usize),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Event {
    Tick(DesId),
    LinkFree {
        from: NodeId,
        to: NodeId,
        epoch: u64,
    },
    Arrival(u64),
    ServiceDone {
        server: DesId,
        job: u64,
    },
}

/// A message instance travelling through the network.
#[derive(Debug, Clone)]
pub(crate) struct Message {
    id: MessageId,
    app: usize,
    name: Arc<str>,
    dst_module: Arc<str>,
    module_src: Arc<str>,
    src_des: DesId,
    src_node: NodeId,
    dst_des: DesId,
    path: Vec<NodeId>,
    hop: usize,
    bytes: f64,
    instructions: f64,
    time_emit: SimTime,
    broadcast: bool,
    /// Replicas that served this id so far, oldest first.
    trail: Arc<[(Arc<str>, DesId)]>,
}

#[derive(Debug, Clone, Copy)]
enum FlightState {
    Queued {
        from: NodeId,
        to: NodeId,
        buffer: u64,
        enqueue: SimTime,
    },
    Transit {
        from: NodeId,
        to: NodeId,
    },
}

#[derive(Debug)]
struct Flight {
    msg: Message,
    state: FlightState,
}

#[derive(Debug)]
struct Channel {
    busy: bool,
    queue: VecDeque<u64>,
    epoch: u64,
}

#[derive(Debug)]
struct Job {
    msg: Message,
    reception: SimTime,
}

#[derive(Debug)]
pub(crate) struct Server {
    app: usize,
    module: Arc<str>,
    ipt: f64,
    queue: VecDeque<Job>,
    current: Option<(u64, Job, SimTime)>,
    stream: RandomStream,
}

#[derive(Debug)]
pub(crate) enum ProcKind {
    Source {
        app: usize,
        message: Arc<str>,
        dist: TemporalDistribution,
        stream: RandomStream,
        first: bool,
    },
    ServiceSource {
        app: usize,
        module: Arc<str>,
        message: Arc<str>,
        server: DesId,
        dist: TemporalDistribution,
        stream: RandomStream,
        first: bool,
    },
    Module(Box<Server>),
    Sink {
        app: usize,
        module: Arc<str>,
    },
    Driver {
        slot: Slot,
        dist: TemporalDistribution,
        stream: RandomStream,
        first: bool,
    },
}

#[derive(Debug)]
pub(crate) struct Process {
    pub(crate) node: Option<NodeId>,
    pub(crate) alive: bool,
    pub(crate) kind: ProcKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessRole {
    Source,
    ServiceSource,
    Module,
    Sink,
    Driver,
}

/// Public snapshot of one DES process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessInfo {
    pub des: DesId,
    pub role: ProcessRole,
    pub node: Option<NodeId>,
    pub alive: bool,
    pub app: Option<String>,
    pub module: Option<String>,
    pub message: Option<String>,
    pub distribution: Option<TemporalDistribution>,
}

pub(crate) struct EngineState {
    pub(crate) now: SimTime,
    seed: u64,
    pub(crate) topology: TopologyGraph,
    apps: Vec<Arc<Application>>,
    app_index: HashMap<String, usize>,
    pub(crate) processes: Vec<Process>,
    replicas: ReplicaIndex,
    pub(crate) queue: EventQueue<Event>,
    channels: HashMap<(NodeId, NodeId), Channel>,
    next_epoch: u64,
    flights: BTreeMap<u64, Flight>,
    next_token: u64,
    gauge: u64,
    next_message: u64,
    next_job: u64,
    stream_counters: HashMap<String, u32>,
    cache: RefCell<RouteCache>,
    last_dst: HashMap<DesId, HashMap<Arc<str>, DesId>>,
    names: HashSet<Arc<str>>,
    pub(crate) results: ResultSet,
    trace_links: bool,
}

fn view(st: &EngineState) -> NetworkView<'_> {
    NetworkView {
        topology: &st.topology,
        replicas: &st.replicas,
        processes: &st.processes,
        cache: &st.cache,
        now: st.now,
    }
}

impl EngineState {
    pub(crate) fn new(
        topology: TopologyGraph,
        apps: Vec<Application>,
        seed: u64,
        trace_links: bool,
    ) -> Result<Self, EngineError> {
        let mut app_index = HashMap::new();
        for (i, app) in apps.iter().enumerate() {
            app.validate()?;
            if app_index.insert(app.name.clone(), i).is_some() {
                return Err(EngineError::DuplicateApp(app.name.clone()));
            }
        }
        Ok(EngineState {
            now: SimTime::ZERO,
            seed,
            topology,
            apps: apps.into_iter().map(Arc::new).collect(),
            app_index,
            processes: Vec::new(),
            replicas: HashMap::new(),
            queue: EventQueue::new(),
            channels: HashMap::new(),
            next_epoch: 0,
            flights: BTreeMap::new(),
            next_token: 0,
            gauge: 0,
            next_message: 1,
            next_job: 0,
            stream_counters: HashMap::new(),
            cache: RefCell::new(RouteCache::default()),
            last_dst: HashMap::new(),
            names: HashSet::new(),
            results: ResultSet::default(),
            trace_links,
        })
    }

    fn app_idx(&self, name: &str) -> Result<usize, EngineError> {
        self.app_index
            .get(name)
            .copied()
            .ok_or_else(|| EngineError::UnknownApp(name.to_string()))
    }

    fn intern(&mut self, s: &str) -> Arc<str> {
        if let Some(a) = self.names.get(s) {
            return Arc::clone(a);
        }
        let a: Arc<str> = Arc::from(s);
        self.names.insert(Arc::clone(&a));
        a
    }

    /// Fresh substream; the label counter keeps repeated deployments with the
    /// same label independent.
    pub(crate) fn stream(&mut self, prefix: String) -> RandomStream {
        let k = self.stream_counters.entry(prefix.clone()).or_insert(0);
        let label = format!("{prefix}:{k}");
        *k += 1;
        RandomStream::substream(self.seed, &label)
    }

    pub(crate) fn spawn(&mut self, node: Option<NodeId>, kind: ProcKind) -> DesId {
        let des = DesId(self.processes.len() as u64);
        self.processes.push(Process {
            node,
            alive: true,
            kind,
        });
        des
    }

    /// Schedules the next firing of a distribution-driven process.
    pub(crate) fn schedule_tick(&mut self, des: DesId) {
        let now = self.now;
        let proc = &mut self.processes[des.0 as usize];
        let (dist, stream, first) = match &mut proc.kind {
            ProcKind::Source {
                dist,
                stream,
                first,
                ..
            }
            | ProcKind::ServiceSource {
                dist,
                stream,
                first,
                ..
            }
            | ProcKind::Driver {
                dist,
                stream,
                first,
                ..
            } => (dist, stream, first),
            _ => return,
        };
        let delta = dist.next_interval(stream, *first);
        *first = false;
        self.queue.push(now + delta, Event::Tick(des));
    }

    pub(crate) fn log(
        &mut self,
        event: ControlEvent,
        des: Option<DesId>,
        node: Option<NodeId>,
        name: String,
        value: Option<f64>,
        detail: String,
    ) {
        self.results.control.push(ControlRecord {
            time: self.now,
            event,
            des,
            node,
            name,
            value,
            detail,
        });
    }

    fn drop_message(&mut self, id: MessageId, reason: DropReason, context: String) {
        self.results.drops.push(DropRecord {
            id,
            reason,
            ctime: self.now,
            context,
        });
    }

    fn add_replica(&mut self, app: usize, module: &str, des: DesId) {
        let app = self.apps[app].name.clone();
        self.replicas
            .entry(app)
            .or_default()
            .entry(module.to_string())
            .or_default()
            .insert(des);
    }

    fn remove_replica(&mut self, app: usize, module: &str, des: DesId) {
        let app = &self.apps[app].name;
        if let Some(set) = self.replicas.get_mut(app).and_then(|m| m.get_mut(module)) {
            set.remove(&des);
        }
    }

    pub(crate) fn info(&self, des: DesId) -> Option<ProcessInfo> {
        let p = self.processes.get(des.0 as usize)?;
        let name = |app: &usize| Some(self.apps[*app].name.clone());
        let (role, app, module, message, distribution) = match &p.kind {
            ProcKind::Source {
                app, message, dist, ..
            } => (
                ProcessRole::Source,
                name(app),
                self.apps[*app].message(message).map(|m| m.src.clone()),
                Some(message.to_string()),
                Some(*dist),
            ),
            ProcKind::ServiceSource {
                app,
                module,
                message,
                dist,
                ..
            } => (
                ProcessRole::ServiceSource,
                name(app),
                Some(module.to_string()),
                Some(message.to_string()),
                Some(*dist),
            ),
            ProcKind::Module(s) => (
                ProcessRole::Module,
                name(&s.app),
                Some(s.module.to_string()),
                None,
                None,
            ),
            ProcKind::Sink { app, module } => (
                ProcessRole::Sink,
                name(app),
                Some(module.to_string()),
                None,
                None,
            ),
            ProcKind::Driver { dist, .. } => (ProcessRole::Driver, None, None, None, Some(*dist)),
        };
        Some(ProcessInfo {
            des,
            role,
            node: p.node,
            alive: p.alive,
            app,
            module,
            message,
            distribution,
        })
    }
}

/// Capability handle given to policies and custom processes, and used by
/// the engine itself to process events.
pub struct Control<'a> {
    pub(crate) st: &'a mut EngineState,
    pub(crate) sel: &'a mut dyn SelectionPolicy,
}

impl<'a> Control<'a> {
    pub fn now(&self) -> SimTime {
        self.st.now
    }

    pub fn seed(&self) -> u64 {
        self.st.seed
    }

    pub fn topology(&self) -> &TopologyGraph {
        &self.st.topology
    }

    pub fn application(&self, name: &str) -> Option<&Application> {
        self.st.app_index.get(name).map(|&i| &*self.st.apps[i])
    }

    pub fn applications(&self) -> impl Iterator<Item = &Application> {
        self.st.apps.iter().map(|a| &**a)
    }

    /// Independent random stream for policy use, derived from the run seed.
    pub fn random_stream(&mut self, label: &str) -> RandomStream {
        self.st.stream(format!("policy:{label}"))
    }

    pub fn view(&self) -> NetworkView<'_> {
        view(self.st)
    }

    fn check_node(&self, node: NodeId) -> Result<(), EngineError> {
        if self.st.topology.contains_node(node) {
            Ok(())
        } else {
            Err(EngineError::UnknownNode(node))
        }
    }

    pub fn deploy_source(
        &mut self,
        app: &str,
        message: &str,
        node: NodeId,
        dist: TemporalDistribution,
    ) -> Result<DesId, EngineError> {
        self.check_node(node)?;
        let a = self.st.app_idx(app)?;
        if !self.st.apps[a].source_messages().contains(&message) {
            return Err(EngineError::NotSourceMessage {
                app: app.to_string(),
                message: message.to_string(),
            });
        }
        dist.validate()
            .map_err(|e| EngineError::InvalidDistribution(e.to_string()))?;
        let message = self.st.intern(message);
        let stream = self.st.stream(format!("source:{app}:{message}:{node}"));
        let des = self.st.spawn(
            Some(node),
            ProcKind::Source {
                app: a,
                message: Arc::clone(&message),
                dist,
                stream,
                first: true,
            },
        );
        self.st.schedule_tick(des);
        self.st.log(
            ControlEvent::Deploy,
            Some(des),
            Some(node),
            format!("{app}/{message}"),
            None,
            "source".into(),
        );
        Ok(des)
    }

    fn module_kind(&self, app: usize, module: &str) -> Result<ModuleKind, EngineError> {
        self.st.apps[app]
            .module(module)
            .map(|m| m.kind)
            .ok_or_else(|| EngineError::UnknownModule {
                app: self.st.apps[app].name.clone(),
                module: module.to_string(),
            })
    }

    pub fn deploy_module(
        &mut self,
        app: &str,
        module: &str,
        node: NodeId,
    ) -> Result<DesId, EngineError> {
        self.check_node(node)?;
        let a = self.st.app_idx(app)?;
        let kind = self.module_kind(a, module)?;
        if kind != ModuleKind::Module {
            return Err(EngineError::WrongKind {
                app: app.to_string(),
                module: module.to_string(),
                expected: "MODULE",
            });
        }
        let ipt = self.st.topology.node(node).map_or(0.0, |n| n.ipt);
        if ipt <= 0.0 {
            return Err(EngineError::NoCompute(node));
        }
        let module_name = self.st.intern(module);
        let stream = self.st.stream(format!("module:{app}:{module}:{node}"));
        let des = self.st.spawn(
            Some(node),
            ProcKind::Module(Box::new(Server {
                app: a,
                module: Arc::clone(&module_name),
                ipt,
                queue: VecDeque::new(),
                current: None,
                stream,
            })),
        );
        self.st.add_replica(a, module, des);
        self.st.log(
            ControlEvent::Deploy,
            Some(des),
            Some(node),
            format!("{app}/{module}"),
            None,
            "module".into(),
        );
        let services: Vec<_> = self.st.apps[a]
            .service_sources
            .iter()
            .filter(|s| s.module == module)
            .map(|s| (s.message_out.clone(), s.distribution))
            .collect();
        for (message, dist) in services {
            let message = self.st.intern(&message);
            let stream = self
                .st
                .stream(format!("service:{app}:{module}:{message}:{node}"));
            let ss = self.st.spawn(
                Some(node),
                ProcKind::ServiceSource {
                    app: a,
                    module: Arc::clone(&module_name),
                    message,
                    server: des,
                    dist,
                    stream,
                    first: true,
                },
            );
            self.st.schedule_tick(ss);
        }
        Ok(des)
    }

    pub fn deploy_sink(
        &mut self,
        app: &str,
        module: &str,
        node: NodeId,
    ) -> Result<DesId, EngineError> {
        self.check_node(node)?;
        let a = self.st.app_idx(app)?;
        if self.module_kind(a, module)? != ModuleKind::Sink {
            return Err(EngineError::WrongKind {
                app: app.to_string(),
                module: module.to_string(),
                expected: "SINK",
            });
        }
        let module_name = self.st.intern(module);
        let des = self.st.spawn(
            Some(node),
            ProcKind::Sink {
                app: a,
                module: module_name,
            },
        );
        self.st.add_replica(a, module, des);
        self.st.log(
            ControlEvent::Deploy,
            Some(des),
            Some(node),
            format!("{app}/{module}"),
            None,
            "sink".into(),
        );
        Ok(des)
    }

    /// Stops a process. Messages queued at an undeployed module are dropped.
    pub fn undeploy(&mut self, des: DesId) -> Result<(), EngineError> {
        match self.st.processes.get(des.0 as usize) {
            None => return Err(EngineError::UnknownProcess(des)),
            Some(p) if !p.alive => return Ok(()),
            Some(_) => {}
        }
        let node = self.st.processes[des.0 as usize].node;
        self.stop(des, DropReason::Undeployed);
        self.st.log(
            ControlEvent::Undeploy,
            Some(des),
            node,
            String::new(),
            None,
            String::new(),
        );
        Ok(())
    }

    fn stop(&mut self, des: DesId, reason: DropReason) {
        let idx = des.0 as usize;
        if !self.st.processes[idx].alive {
            return;
        }
        self.st.processes[idx].alive = false;
        let node = self.st.processes[idx].node;
        let mut dropped = Vec::new();
        let mut bound = Vec::new();
        match &mut self.st.processes[idx].kind {
            ProcKind::Module(server) => {
                if let Some((_, job, _)) = server.current.take() {
                    dropped.push(job.msg.id);
                }
                dropped.extend(server.queue.drain(..).map(|j| j.msg.id));
                let (app, module) = (server.app, Arc::clone(&server.module));
                self.st.remove_replica(app, &module, des);
                bound = self
                    .st
                    .processes
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| {
                        p.alive && matches!(p.kind, ProcKind::ServiceSource { server, .. } if server == des)
                    })
                    .map(|(i, _)| DesId(i as u64))
                    .collect();
            }
            ProcKind::Sink { app, module } => {
                let (app, module) = (*app, Arc::clone(module));
                self.st.remove_replica(app, &module, des);
            }
            _ => {}
        }
        for id in dropped {
            let context = match node {
                Some(n) => format!("process {des} on node {n}"),
                None => format!("process {des}"),
            };
            self.st.drop_message(id, reason, context);
        }
        for b in bound {
            self.st.processes[b.0 as usize].alive = false;
        }
    }

    pub fn replicas(&self, app: &str, module: &str) -> Vec<(DesId, NodeId)> {
        view(self.st).replicas(app, module)
    }

    /// Live workload sources, optionally restricted to one application.
    pub fn sources(&self, app: Option<&str>) -> Vec<ProcessInfo> {
        (0..self.st.processes.len())
            .filter(|&i| {
                let p = &self.st.processes[i];
                p.alive
                    && matches!(&p.kind, ProcKind::Source { app: a, .. }
                        if app.map_or(true, |name| self.st.apps[*a].name == name))
            })
            .filter_map(|i| self.st.info(DesId(i as u64)))
            .collect()
    }

    pub fn process(&self, des: DesId) -> Option<ProcessInfo> {
        self.st.info(des)
    }

    pub fn hop_distance(&self, from: NodeId, to: NodeId) -> Option<u32> {
        view(self.st).hop_distance(from, to)
    }

    pub fn path(&self, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
        view(self.st).path(from, to)
    }

    /// Destination most recently selected for messages of type `message`
    /// from process `src`.
    pub fn last_destination(&self, src: DesId, message: &str) -> Option<DesId> {
        self.st
            .last_dst
            .get(&src)
            .and_then(|m| m.get(message))
            .copied()
    }

    pub fn log_metric(&mut self, name: &str, value: f64, node: Option<NodeId>) {
        self.st.log(
            ControlEvent::Metric,
            None,
            node,
            name.to_string(),
            Some(value),
            String::new(),
        );
    }

    pub fn log_note(&mut self, detail: impl Into<String>) {
        self.st.log(
            ControlEvent::Note,
            None,
            None,
            String::new(),
            None,
            detail.into(),
        );
    }

    /// Removes a node with its links, stops everything it hosts and repairs
    /// or drops the messages whose route crossed it.
    pub fn fail_node(&mut self, node: NodeId) -> Result<FailureReport, EngineError> {
        self.check_node(node)?;
        let hosted: Vec<DesId> = self
            .st
            .processes
            .iter()
            .enumerate()
            .filter(|(_, p)| p.alive && p.node == Some(node))
            .map(|(i, _)| DesId(i as u64))
            .collect();
        for &des in &hosted {
            self.stop(des, DropReason::NodeRemoved);
        }
        let removed_links = self.st.topology.remove_node(node)?;

        let mut affected = Vec::new();
        let tokens: Vec<u64> = self.st.flights.keys().copied().collect();
        for token in tokens {
            let flight = &self.st.flights[&token];
            let (from, to, queued) = match flight.state {
                FlightState::Queued { from, to, .. } => (from, to, true),
                FlightState::Transit { from, to } => (from, to, false),
            };
            let id = flight.msg.id;
            // Queued at a surviving endpoint: not yet on the wire, reroute below.
            if from == node || (to == node && !queued) {
                self.st.flights.remove(&token);
                if queued {
                    self.st.gauge -= 1;
                }
                self.st.drop_message(
                    id,
                    DropReason::LinkRemoved,
                    format!("link {from}-{to} of failed node {node}"),
                );
                affected.push(AffectedMessage {
                    id,
                    outcome: Outcome::Dropped(DropReason::LinkRemoved),
                });
                continue;
            }
            let resume_at = if queued {
                flight.msg.hop
            } else {
                flight.msg.hop + 1
            };
            if !flight.msg.path[resume_at..].contains(&node) {
                continue;
            }
            let mut flight = self.st.flights.remove(&token).expect("present");
            if queued {
                self.st.gauge -= 1;
                if let Some(ch) = self.st.channels.get_mut(&(from, to)) {
                    ch.queue.retain(|&t| t != token);
                }
            }
            let resume = flight.msg.path[resume_at];
            match self.reroute(&flight.msg, resume) {
                Some(route) => {
                    flight.msg.path.truncate(resume_at);
                    flight.msg.path.extend_from_slice(&route.path);
                    flight.msg.dst_des = route.dst;
                    affected.push(AffectedMessage {
                        id,
                        outcome: Outcome::Rerouted(route.path),
                    });
                    if queued {
                        self.forward(flight.msg);
                    } else {
                        self.st.flights.insert(token, flight);
                    }
                }
                None => {
                    self.st.drop_message(
                        id,
                        DropReason::NoPath,
                        format!("no route from node {resume} after failure of node {node}"),
                    );
                    affected.push(AffectedMessage {
                        id,
                        outcome: Outcome::Dropped(DropReason::NoPath),
                    });
                }
            }
        }

        // Drop the channels that belonged to removed links.
        for key in &removed_links {
            let (a, b) = key.endpoints();
            self.st.channels.remove(&(a, b));
            self.st.channels.remove(&(b, a));
        }

        let report = FailureReport {
            time: self.st.now,
            node,
            removed_links,
            stopped: hosted,
            affected,
        };
        self.st.log(
            ControlEvent::NodeFailure,
            None,
            Some(node),
            "removed_links".into(),
            Some(report.removed_links.len() as f64),
            format!(
                "stopped {} processes; {} messages affected",
                report.stopped.len(),
                report.affected.len()
            ),
        );
        self.st.results.failures.push(report.clone());
        Ok(report)
    }

    // ---- event handling ----

    fn reroute(&mut self, msg: &Message, from: NodeId) -> Option<Route> {
        let v = view(self.st);
        if msg.broadcast {
            let node = v.node_of(msg.dst_des)?;
            return v.path(from, node).map(|path| Route {
                dst: msg.dst_des,
                path,
            });
        }
        let app = Arc::clone(&self.st.apps[msg.app]);
        let req = Request {
            app: &app.name,
            message: &msg.name,
            dst_module: &msg.dst_module,
            src_des: msg.src_des,
            src_node: from,
            claimant: None,
        };
        self.sel.reroute(&v, &req, msg.dst_des, from)
    }

    pub(crate) fn tick(&mut self, des: DesId) {
        let idx = des.0 as usize;
        if !self.st.processes[idx].alive {
            return;
        }
        let node = self.st.processes[idx].node.expect("sources are hosted");
        match &self.st.processes[idx].kind {
            ProcKind::Source { app, message, .. } => {
                let (app, message) = (*app, Arc::clone(message));
                let src = self.st.apps[app]
                    .message(&message)
                    .expect("validated")
                    .src
                    .clone();
                let module_src = self.st.intern(&src);
                let id = self.st.next_id();
                self.emit(
                    app,
                    &message,
                    id,
                    des,
                    node,
                    module_src,
                    false,
                    Arc::from([]),
                );
            }
            ProcKind::ServiceSource {
                app,
                module,
                message,
                server,
                ..
            } => {
                let (app, module, message, server) =
                    (*app, Arc::clone(module), Arc::clone(message), *server);
                let id = self.st.next_id();
                self.emit(
                    app,
                    &message,
                    id,
                    server,
                    node,
                    module,
                    false,
                    Arc::from([]),
                );
            }
            _ => return,
        }
        self.st.schedule_tick(des);
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &mut self,
        app: usize,
        name: &Arc<str>,
        id: MessageId,
        src_des: DesId,
        src_node: NodeId,
        module_src: Arc<str>,
        broadcast: bool,
        trail: Arc<[(Arc<str>, DesId)]>,
    ) {
        let application = Arc::clone(&self.st.apps[app]);
        let mt = application.message(name).expect("validated message");
        let dst_module = self.st.intern(&mt.dst);
        let base = Message {
            id,
            app,
            name: Arc::clone(name),
            dst_module: Arc::clone(&dst_module),
            module_src,
            src_des,
            src_node,
            dst_des: DesId(0),
            path: Vec::new(),
            hop: 0,
            bytes: mt.bytes,
            instructions: mt.instructions,
            time_emit: self.st.now,
            broadcast: broadcast || mt.broadcast,
            trail,
        };
        if base.broadcast {
            let targets = view(self.st).replicas(&application.name, &dst_module);
            if targets.is_empty() {
                self.st.drop_message(
                    id,
                    DropReason::NoPath,
                    format!("no replica of {} for {}", dst_module, name),
                );
            }
            for (dst, node) in targets {
                match view(self.st).path(src_node, node) {
                    Some(path) => {
                        let mut msg = base.clone();
                        msg.dst_des = dst;
                        msg.path = path;
                        self.forward(msg);
                    }
                    None => self.st.drop_message(
                        id,
                        DropReason::NoPath,
                        format!("node {src_node} cannot reach node {node}"),
                    ),
                }
            }
            return;
        }
        let route = {
            let v = view(self.st);
            let claimant = base
                .trail
                .iter()
                .rev()
                .find(|(m, _)| **m == *dst_module)
                .map(|&(_, d)| d)
                .filter(|&d| v.is_alive(d));
            let req = Request {
                app: &application.name,
                message: name,
                dst_module: &dst_module,
                src_des,
                src_node,
                claimant,
            };
            self.sel.select(&v, &req)
        };
        match route {
            Some(route) => {
                self.st
                    .last_dst
                    .entry(src_des)
                    .or_default()
                    .insert(Arc::clone(name), route.dst);
                let mut msg = base;
                msg.dst_des = route.dst;
                msg.path = route.path;
                self.forward(msg);
            }
            None => self.st.drop_message(
                id,
                DropReason::NoPath,
                format!(
                    "no reachable {} from node {src_node} for {}",
                    dst_module, name
                ),
            ),
        }
    }

    /// Moves a message on from `path[hop]`: delivers it when that is the
    /// last node, otherwise queues it on the next link.
    fn forward(&mut self, msg: Message) {
        if msg.hop + 1 >= msg.path.len() {
            self.deliver(msg);
            return;
        }
        let (from, to) = (msg.path[msg.hop], msg.path[msg.hop + 1]);
        if self.st.topology.link(from, to).is_none() {
            self.repair(msg, from);
            return;
        }
        let token = self.st.next_token;
        self.st.next_token += 1;
        let epoch = &mut self.st.next_epoch;
        let ch = self.st.channels.entry((from, to)).or_insert_with(|| {
            *epoch += 1;
            Channel {
                busy: false,
                queue: VecDeque::new(),
                epoch: *epoch,
            }
        });
        if !ch.busy && ch.queue.is_empty() {
            self.st.flights.insert(
                token,
                Flight {
                    msg,
                    state: FlightState::Transit { from, to },
                },
            );
            self.start_service(token, from, to, 0, self.st.now);
        } else {
            ch.queue.push_back(token);
            self.st.gauge += 1;
            let state = FlightState::Queued {
                from,
                to,
                buffer: self.st.gauge,
                enqueue: self.st.now,
            };
            self.st.flights.insert(token, Flight { msg, state });
        }
    }

    fn start_service(
        &mut self,
        token: u64,
        from: NodeId,
        to: NodeId,
        buffer: u64,
        enqueue: SimTime,
    ) {
        let now = self.st.now;
        let link = self.st.topology.link(from, to).expect("live link");
        let flight = self.st.flights.get_mut(&token).expect("flight");
        let tx = link.transmission_time(flight.msg.bytes);
        let latency = tx + link.propagation();
        flight.state = FlightState::Transit { from, to };
        let ch = self.st.channels.get_mut(&(from, to)).expect("channel");
        ch.busy = true;
        let epoch = ch.epoch;
        self.st
            .queue
            .push(now + tx, Event::LinkFree { from, to, epoch });
        self.st.queue.push(now + latency, Event::Arrival(token));
        let msg = &flight.msg;
        self.st.results.links.push(LinkRecord {
            id: msg.id,
            kind: LinkKind::Link,
            src: from,
            dst: to,
            app: self.st.apps[msg.app].name.clone(),
            latency,
            message: msg.name.to_string(),
            ctime: now,
            size: msg.bytes,
            buffer,
        });
        if self.st.trace_links {
            self.st.results.link_trace.push(LinkTraceEntry {
                id: msg.id,
                from,
                to,
                enqueue,
                start: now,
                arrival: now + latency,
            });
        }
    }

    pub(crate) fn link_free(&mut self, from: NodeId, to: NodeId, epoch: u64) {
        let Some(ch) = self.st.channels.get_mut(&(from, to)) else {
            return;
        };
        if ch.epoch != epoch {
            return;
        }
        ch.busy = false;
        let Some(token) = ch.queue.pop_front() else {
            return;
        };
        self.st.gauge -= 1;
        let (buffer, enqueue) = match self.st.flights[&token].state {
            FlightState::Queued {
                buffer, enqueue, ..
            } => (buffer, enqueue),
            FlightState::Transit { .. } => unreachable!("queued token in transit"),
        };
        self.start_service(token, from, to, buffer, enqueue);
    }

    pub(crate) fn arrival(&mut self, token: u64) {
        let Some(flight) = self.st.flights.remove(&token) else {
            return;
        };
        let mut msg = flight.msg;
        msg.hop += 1;
        self.forward(msg);
    }

    /// Route repair for a message stuck at `at`: its next link or its
    /// destination disappeared.
    fn repair(&mut self, mut msg: Message, at: NodeId) {
        match self.reroute(&msg, at) {
            Some(route) => {
                msg.path.truncate(msg.hop);
                msg.path.extend_from_slice(&route.path);
                msg.dst_des = route.dst;
                self.forward(msg);
            }
            None => self.st.drop_message(
                msg.id,
                DropReason::NoPath,
                format!(
                    "no live destination for {} reachable from node {at}",
                    msg.name
                ),
            ),
        }
    }

    fn deliver(&mut self, msg: Message) {
        let node = *msg.path.last().expect("non-empty path");
        let idx = msg.dst_des.0 as usize;
        let live = self
            .st
            .processes
            .get(idx)
            .is_some_and(|p| p.alive && p.node == Some(node));
        if !live {
            self.repair(msg, node);
            return;
        }
        let now = self.st.now;
        let sink = match &self.st.processes[idx].kind {
            ProcKind::Module(_) => None,
            ProcKind::Sink { app, module } => Some((*app, Arc::clone(module))),
            _ => unreachable!("messages are addressed to modules or sinks"),
        };
        match sink {
            None => {
                let job = Job {
                    msg,
                    reception: now,
                };
                let ProcKind::Module(server) = &mut self.st.processes[idx].kind else {
                    unreachable!()
                };
                if server.current.is_some() {
                    server.queue.push_back(job);
                    return;
                }
                let id = self.st.next_job;
                self.st.next_job += 1;
                self.begin(idx, id, job);
            }
            Some((app, module)) => {
                let from_source = self.st.apps[app]
                    .module(&msg.module_src)
                    .is_some_and(|m| m.kind == ModuleKind::Source);
                let record = ComputeRecord {
                    id: msg.id,
                    kind: ComputeKind::Sink,
                    app: self.st.apps[app].name.clone(),
                    module: module.to_string(),
                    message: msg.name.to_string(),
                    des_src: msg.src_des,
                    des_dst: msg.dst_des,
                    topo_src: msg.src_node,
                    topo_dst: node,
                    module_src: msg.module_src.to_string(),
                    service: if from_source {
                        None
                    } else {
                        Some(SimTime::ZERO)
                    },
                    time_in: now,
                    time_out: now,
                    time_emit: msg.time_emit,
                    time_reception: now,
                };
                self.st.results.compute.push(record);
            }
        }
    }

    fn begin(&mut self, idx: usize, job_id: u64, job: Job) {
        let now = self.st.now;
        let ProcKind::Module(server) = &mut self.st.processes[idx].kind else {
            unreachable!()
        };
        let service = SimTime::from_units(job.msg.instructions / server.ipt);
        server.current = Some((job_id, job, now));
        self.st.queue.push(
            now + service,
            Event::ServiceDone {
                server: DesId(idx as u64),
                job: job_id,
            },
        );
    }

    pub(crate) fn service_done(&mut self, server_des: DesId, job_id: u64) {
        let idx = server_des.0 as usize;
        let now = self.st.now;
        let node = self.st.processes[idx].node.expect("hosted");
        if !self.st.processes[idx].alive {
            return;
        }
        let ProcKind::Module(server) = &mut self.st.processes[idx].kind else {
            return;
        };
        match &server.current {
            Some((id, _, _)) if *id == job_id => {}
            _ => return,
        }
        let (_, job, time_in) = server.current.take().expect("checked");
        let app = Arc::clone(&self.st.apps[server.app]);
        let module = Arc::clone(&server.module);
        let msg = job.msg;
        self.st.results.compute.push(ComputeRecord {
            id: msg.id,
            kind: ComputeKind::Compute,
            app: app.name.clone(),
            module: module.to_string(),
            message: msg.name.to_string(),
            des_src: msg.src_des,
            des_dst: server_des,
            topo_src: msg.src_node,
            topo_dst: node,
            module_src: msg.module_src.to_string(),
            service: Some(now - time_in),
            time_in,
            time_out: now,
            time_emit: msg.time_emit,
            time_reception: job.reception,
        });

        let (a, outgoing) = {
            let ProcKind::Module(server) = &mut self.st.processes[idx].kind else {
                unreachable!()
            };
            let out = app
                .transmissions_for(&module, &msg.name, &mut server.stream)
                .map(|list| {
                    list.into_iter()
                        .map(|t| (t.message.to_string(), t.broadcast))
                        .collect::<Vec<_>>()
                });
            (server.app, out)
        };
        let outgoing = match outgoing {
            Ok(list) => list,
            Err(e) => {
                self.st.log(
                    ControlEvent::Note,
                    Some(server_des),
                    Some(node),
                    String::new(),
                    None,
                    e.to_string(),
                );
                Vec::new()
            }
        };
        let trail: Arc<[(Arc<str>, DesId)]> = msg
            .trail
            .iter()
            .cloned()
            .chain(std::iter::once((Arc::clone(&module), server_des)))
            .collect();
        for (name, broadcast) in outgoing {
            let name = self.st.intern(&name);
            self.emit(
                a,
                &name,
                msg.id,
                server_des,
                node,
                Arc::clone(&module),
                broadcast,
                Arc::clone(&trail),
            );
        }

        if !self.st.processes[idx].alive {
            return;
        }
        let ProcKind::Module(server) = &mut self.st.processes[idx].kind else {
            unreachable!()
        };
        if server.current.is_none() {
            if let Some(next) = server.queue.pop_front() {
                let id = self.st.next_job;
                self.st.next_job += 1;
                self.begin(idx, id, next);
            }
        }
    }
}

impl EngineState {
    fn next_id(&mut self) -> MessageId {
        let id = MessageId(self.next_message);
        self.next_message += 1;
        id
    }

    pub(crate) fn driver_slot(&self, des: DesId) -> Option<Slot> {
        let p = self.processes.get(des.0 as usize)?;
        match p.kind {
            ProcKind::Driver { slot, .. } if p.alive => Some(slot),
            _ => None,
        }
    }
}
