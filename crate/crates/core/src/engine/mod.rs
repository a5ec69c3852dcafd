//! The discrete-event core.

mod network;
mod queue;
mod state;

pub use network::{NetworkView, Request, Route};
pub use queue::EventQueue;
pub use state::{Control, ProcessInfo, ProcessRole};

use crate::application::{AppError, Application};
use crate::ids::{DesId, NodeId};
use crate::policies::{CustomProcess, PlacementPolicy, PopulationPolicy, SelectionPolicy};
use crate::results::ResultSet;
use crate::time::SimTime;
use crate::topology::{TopologyError, TopologyGraph};

use state::{EngineState, Event, ProcKind, Slot};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("duplicate application '{0}'")]
    DuplicateApp(String),
    #[error("unknown application '{0}'")]
    UnknownApp(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("application '{app}' has no module '{module}'")]
    UnknownModule { app: String, module: String },
    #[error("'{message}' is not a source message of application '{app}'")]
    NotSourceMessage { app: String, message: String },
    #[error("module '{app}/{module}' is not of kind {expected}")]
    WrongKind {
        app: String,
        module: String,
        expected: &'static str,
    },
    #[error("node {0} has no compute capacity (IPT must be > 0)")]
    NoCompute(NodeId),
    #[error("unknown process {0}")]
    UnknownProcess(DesId),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("simulation horizon must be positive")]
    InvalidUntil,
    #[error("simulation already ran")]
    AlreadyRan,
    #[error("policy '{policy}': {reason}")]
    Policy { policy: String, reason: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineOptions {
    /// Collect enqueue/start/arrival times of every link traversal.
    pub trace_links: bool,
}

/// One simulation run: topology, applications, policies and the event loop.
pub struct Simulation {
    state: EngineState,
    selection: Box<dyn SelectionPolicy>,
    placements: Vec<Box<dyn PlacementPolicy>>,
    populations: Vec<Box<dyn PopulationPolicy>>,
    processes: Vec<Box<dyn CustomProcess>>,
    ran: bool,
}

impl Simulation {
    pub fn new(
        topology: TopologyGraph,
        applications: Vec<Application>,
        seed: u64,
        selection: Box<dyn SelectionPolicy>,
    ) -> Result<Self, EngineError> {
        Self::with_options(
            topology,
            applications,
            seed,
            selection,
            EngineOptions::default(),
        )
    }

    pub fn with_options(
        topology: TopologyGraph,
        applications: Vec<Application>,
        seed: u64,
        selection: Box<dyn SelectionPolicy>,
        options: EngineOptions,
    ) -> Result<Self, EngineError> {
        Ok(Simulation {
            state: EngineState::new(topology, applications, seed, options.trace_links)?,
            selection,
            placements: Vec::new(),
            populations: Vec::new(),
            processes: Vec::new(),
            ran: false,
        })
    }

    pub fn add_placement(&mut self, policy: Box<dyn PlacementPolicy>) {
        self.placements.push(policy);
    }

    pub fn add_population(&mut self, policy: Box<dyn PopulationPolicy>) {
        self.populations.push(policy);
    }

    pub fn add_process(&mut self, process: Box<dyn CustomProcess>) {
        self.processes.push(process);
    }

    /// Direct engine access, e.g. to deploy by hand before running.
    pub fn control(&mut self) -> Control<'_> {
        Control {
            st: &mut self.state,
            sel: self.selection.as_mut(),
        }
    }

    pub fn topology(&self) -> &TopologyGraph {
        &self.state.topology
    }

    pub fn now(&self) -> SimTime {
        self.state.now
    }

    /// Runs every event with timestamp `<= until` and returns the logs.
    pub fn run(&mut self, until: SimTime) -> Result<ResultSet, EngineError> {
        if self.ran {
            return Err(EngineError::AlreadyRan);
        }
        if until.is_zero() {
            return Err(EngineError::InvalidUntil);
        }
        self.ran = true;
        let Simulation {
            state,
            selection,
            placements,
            populations,
            processes,
            ..
        } = self;

        let mut ctl = Control {
            st: state,
            sel: selection.as_mut(),
        };
        for p in placements.iter_mut() {
            p.initial_allocation(&mut ctl)?;
        }
        for p in populations.iter_mut() {
            p.initial_allocation(&mut ctl)?;
        }
        for p in processes.iter_mut() {
            p.initial_allocation(&mut ctl)?;
        }

        let mut drivers = Vec::new();
        for (i, p) in placements.iter().enumerate() {
            if let Some(d) = p.activation() {
                drivers.push((Slot::Placement(i), d));
            }
        }
        for (i, p) in populations.iter().enumerate() {
            if let Some(d) = p.activation() {
                drivers.push((Slot::Population(i), d));
            }
        }
        for (i, p) in processes.iter().enumerate() {
            drivers.push((Slot::Custom(i), p.activation()));
        }
        for (slot, dist) in drivers {
            dist.validate()
                .map_err(|e| EngineError::InvalidDistribution(e.to_string()))?;
            let label = match slot {
                Slot::Placement(i) => format!("driver:placement:{i}"),
                Slot::Population(i) => format!("driver:population:{i}"),
                Slot::Custom(i) => format!("driver:process:{i}"),
            };
            let stream = ctl.st.stream(label);
            let des = ctl.st.spawn(
                None,
                ProcKind::Driver {
                    slot,
                    dist,
                    stream,
                    first: true,
                },
            );
            ctl.st.schedule_tick(des);
        }

        while let Some(t) = ctl.st.queue.peek_time() {
            if t > until {
                break;
            }
            let (t, event) = ctl.st.queue.pop().expect("peeked");
            debug_assert!(t >= ctl.st.now);
            ctl.st.now = t;
            match event {
                Event::Tick(des) => match ctl.st.driver_slot(des) {
                    Some(slot) => {
                        let outcome = match slot {
                            Slot::Placement(i) => {
                                let p = &mut placements[i];
                                p.run(&mut ctl).map_err(|e| (p.name().to_string(), e))
                            }
                            Slot::Population(i) => {
                                let p = &mut populations[i];
                                p.run(&mut ctl).map_err(|e| (p.name().to_string(), e))
                            }
                            Slot::Custom(i) => {
                                let p = &mut processes[i];
                                p.run(&mut ctl).map_err(|e| (p.name().to_string(), e))
                            }
                        };
                        if let Err((name, e)) = outcome {
                            ctl.log_note(format!("{name}: {e}"));
                        }
                        ctl.st.schedule_tick(des);
                    }
                    None => ctl.tick(des),
                },
                Event::LinkFree { from, to, epoch } => ctl.link_free(from, to, epoch),
                Event::Arrival(token) => ctl.arrival(token),
                Event::ServiceDone { server, job } => ctl.service_done(server, job),
            }
        }
        ctl.st.now = until.max(ctl.st.now);

        let mut results = std::mem::take(&mut ctl.st.results);
        results.until = until;
        Ok(results)
    }
}
