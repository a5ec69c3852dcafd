//! Event records, CSV persistence and post-run metrics.

mod io;
pub mod metrics;
mod records;

pub use io::{
    read_results, write_results, CsvError, COMPUTE_FILE, CONTROL_FILE, DROP_FILE, LINK_FILE,
};
pub use metrics::{
    compute_series, saturation_by, saturation_series, sequence_latency, windowed, Anchor, Bucket,
    Metric, MetricError, MetricSeries, SequenceLatency, Summary, Times,
};
pub use records::{
    AffectedMessage, ComputeKind, ComputeRecord, ControlEvent, ControlRecord, DropReason,
    DropRecord, FailureReport, LinkKind, LinkRecord, LinkTraceEntry, Outcome, ResultSet,
};
