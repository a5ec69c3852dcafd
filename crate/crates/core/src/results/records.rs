use serde::{Deserialize, Serialize};

use crate::ids::{DesId, MessageId, NodeId};
use crate::time::SimTime;
use crate::topology::LinkKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComputeKind {
    #[serde(rename = "COMP_M")]
    Compute,
    #[serde(rename = "SINK_M")]
    Sink,
}

/// A message served (or absorbed) by a module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeRecord {
    pub id: MessageId,
    #[serde(rename = "type")]
    pub kind: ComputeKind,
    pub app: String,
    pub module: String,
    pub message: String,
    #[serde(rename = "DES.src")]
    pub des_src: DesId,
    #[serde(rename = "DES.dst")]
    pub des_dst: DesId,
    #[serde(rename = "TOPO.src")]
    pub topo_src: NodeId,
    #[serde(rename = "TOPO.dst")]
    pub topo_dst: NodeId,
    #[serde(rename = "module.src")]
    pub module_src: String,
    #[serde(with = "opt_time_text")]
    pub service: Option<SimTime>,
    #[serde(with = "time_text")]
    pub time_in: SimTime,
    #[serde(with = "time_text")]
    pub time_out: SimTime,
    #[serde(with = "time_text")]
    pub time_emit: SimTime,
    #[serde(with = "time_text")]
    pub time_reception: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    #[serde(rename = "LINK")]
    Link,
}

/// One hop of one message across one link direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub id: MessageId,
    #[serde(rename = "type")]
    pub kind: LinkKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub app: String,
    #[serde(with = "time_text")]
    pub latency: SimTime,
    pub message: String,
    /// Start of transmission on the link.
    #[serde(with = "time_text")]
    pub ctime: SimTime,
    pub size: f64,
    /// Messages waiting for link service network-wide when this one was
    /// enqueued, itself included if it had to wait.
    pub buffer: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DropReason {
    NoPath,
    NodeRemoved,
    LinkRemoved,
    Undeployed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub id: MessageId,
    pub reason: DropReason,
    #[serde(with = "time_text")]
    pub ctime: SimTime,
    pub context: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlEvent {
    Deploy,
    Undeploy,
    NodeFailure,
    Metric,
    Note,
}

/// Lifecycle, policy and custom-process events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlRecord {
    #[serde(with = "time_text")]
    pub time: SimTime,
    pub event: ControlEvent,
    pub des: Option<DesId>,
    pub node: Option<NodeId>,
    pub name: String,
    pub value: Option<f64>,
    pub detail: String,
}

/// What happened to one in-flight message touched by a node failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// New remaining route, starting at the hop the message resumes from.
    Rerouted(Vec<NodeId>),
    Dropped(DropReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffectedMessage {
    pub id: MessageId,
    pub outcome: Outcome,
}

/// Bookkeeping for one node failure.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    pub time: SimTime,
    pub node: NodeId,
    pub removed_links: Vec<LinkKey>,
    pub stopped: Vec<DesId>,
    pub affected: Vec<AffectedMessage>,
}

/// Full timing of one link traversal; collected only when tracing is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkTraceEntry {
    pub id: MessageId,
    pub from: NodeId,
    pub to: NodeId,
    pub enqueue: SimTime,
    pub start: SimTime,
    pub arrival: SimTime,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultSet {
    pub compute: Vec<ComputeRecord>,
    pub links: Vec<LinkRecord>,
    pub drops: Vec<DropRecord>,
    pub control: Vec<ControlRecord>,
    pub failures: Vec<FailureReport>,
    pub link_trace: Vec<LinkTraceEntry>,
    pub until: SimTime,
}

impl ResultSet {
    pub fn is_empty(&self) -> bool {
        self.compute.is_empty() && self.links.is_empty() && self.drops.is_empty()
    }

    pub fn metrics<'a>(&'a self, name: &'a str) -> impl Iterator<Item = (SimTime, f64)> + 'a {
        self.control
            .iter()
            .filter(move |c| c.event == ControlEvent::Metric && c.name == name)
            .filter_map(|c| c.value.map(|v| (c.time, v)))
    }
}

mod time_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::time::SimTime;

    pub fn serialize<S: Serializer>(t: &SimTime, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(t)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SimTime, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

mod opt_time_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::time::SimTime;

    pub fn serialize<S: Serializer>(t: &Option<SimTime>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(t) => s.collect_str(t),
            None => s.serialize_str(""),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<SimTime>, D::Error> {
        let text = String::deserialize(d)?;
        if text.trim().is_empty() {
            return Ok(None);
        }
        text.parse().map(Some).map_err(serde::de::Error::custom)
    }
}
