//! Timestamp algebra and aggregation over event records.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::records::{ComputeRecord, LinkRecord};
use crate::ids::MessageId;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("record {id} ({message}): timestamps out of order")]
    Malformed { id: MessageId, message: String },
    #[error("unknown message '{0}' in sequence")]
    UnknownMessage(String),
    #[error("empty message sequence")]
    EmptySequence,
    #[error("window must be positive")]
    ZeroWindow,
}

/// The five per-record durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Times {
    pub latency: SimTime,
    pub waiting: SimTime,
    pub service: SimTime,
    pub response: SimTime,
    pub total_response: SimTime,
}

impl ComputeRecord {
    pub fn times(&self) -> Result<Times, MetricError> {
        let malformed = || MetricError::Malformed {
            id: self.id,
            message: self.message.clone(),
        };
        let d = |later: SimTime, earlier: SimTime| later.checked_sub(earlier).ok_or_else(malformed);
        Ok(Times {
            latency: d(self.time_reception, self.time_emit)?,
            waiting: d(self.time_in, self.time_reception)?,
            service: d(self.time_out, self.time_in)?,
            response: d(self.time_out, self.time_reception)?,
            total_response: d(self.time_out, self.time_emit)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Latency,
    Waiting,
    Service,
    Response,
    TotalResponse,
}

impl Metric {
    pub fn of(self, t: &Times) -> SimTime {
        match self {
            Metric::Latency => t.latency,
            Metric::Waiting => t.waiting,
            Metric::Service => t.service,
            Metric::Response => t.response,
            Metric::TotalResponse => t.total_response,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "latency" => Metric::Latency,
            "waiting" => Metric::Waiting,
            "service" => Metric::Service,
            "response" => Metric::Response,
            "total_response" | "total" => Metric::TotalResponse,
            other => return Err(format!("unknown metric '{other}'")),
        })
    }
}

/// Which timestamp places a record in a window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Emit,
    Reception,
    #[default]
    In,
    Out,
}

impl Anchor {
    pub fn of(self, r: &ComputeRecord) -> SimTime {
        match self {
            Anchor::Emit => r.time_emit,
            Anchor::Reception => r.time_reception,
            Anchor::In => r.time_in,
            Anchor::Out => r.time_out,
        }
    }
}

impl std::str::FromStr for Anchor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "emit" => Anchor::Emit,
            "reception" => Anchor::Reception,
            "in" => Anchor::In,
            "out" => Anchor::Out,
            other => return Err(format!("unknown anchor '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceLatency {
    /// Mean over complete instances; `None` when there are none.
    pub mean: Option<f64>,
    pub complete: usize,
    pub incomplete: usize,
    /// Per complete instance, in id order.
    pub values: Vec<(MessageId, SimTime)>,
}

/// End-to-end time along an ordered chain of message types sharing one id.
///
/// Each stage contributes `latency + response` of the first record of that
/// message type for the id. Instances missing a stage are counted as
/// incomplete and excluded from the mean.
pub fn sequence_latency(
    records: &[ComputeRecord],
    sequence: &[&str],
) -> Result<SequenceLatency, MetricError> {
    if sequence.is_empty() {
        return Err(MetricError::EmptySequence);
    }
    if !records.is_empty() {
        let seen: BTreeSet<&str> = records.iter().map(|r| r.message.as_str()).collect();
        if let Some(missing) = sequence.iter().find(|m| !seen.contains(*m)) {
            return Err(MetricError::UnknownMessage(missing.to_string()));
        }
    }
    let stage: HashMap<&str, usize> = sequence.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut per_id: BTreeMap<MessageId, Vec<Option<SimTime>>> = BTreeMap::new();
    for r in records {
        let Some(&k) = stage.get(r.message.as_str()) else {
            continue;
        };
        let slots = per_id
            .entry(r.id)
            .or_insert_with(|| vec![None; sequence.len()]);
        if slots[k].is_none() {
            let t = r.times()?;
            slots[k] = Some(t.latency + t.response);
        }
    }
    let mut values = Vec::new();
    let mut incomplete = 0;
    for (id, slots) in per_id {
        match slots
            .into_iter()
            .try_fold(SimTime::ZERO, |acc, s| s.map(|s| acc + s))
        {
            Some(total) => values.push((id, total)),
            None => incomplete += 1,
        }
    }
    let mean = if values.is_empty() {
        None
    } else {
        Some(values.iter().map(|(_, v)| v.as_units()).sum::<f64>() / values.len() as f64)
    };
    Ok(SequenceLatency {
        mean,
        complete: values.len(),
        incomplete,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    pub start: SimTime,
    pub count: usize,
    pub sum: f64,
    pub max: Option<f64>,
}

impl Bucket {
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

/// Fixed-width buckets tiling `[0, n * window)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub window: SimTime,
    pub buckets: Vec<Bucket>,
}

impl MetricSeries {
    pub fn total_count(&self) -> usize {
        self.buckets.iter().map(|b| b.count).sum()
    }

    pub fn means(&self) -> Vec<Option<f64>> {
        self.buckets.iter().map(Bucket::mean).collect()
    }

    pub fn maxima(&self) -> Vec<Option<f64>> {
        self.buckets.iter().map(|b| b.max).collect()
    }

    /// Bucket containing `t`, if any.
    pub fn bucket_at(&self, t: SimTime) -> Option<&Bucket> {
        self.buckets.get((t.ticks() / self.window.ticks()) as usize)
    }
}

/// Buckets `(time, value)` samples. Enough buckets are emitted to cover both
/// `[0, until)` and every sample; empty buckets are kept.
pub fn windowed(
    samples: impl IntoIterator<Item = (SimTime, f64)>,
    window: SimTime,
    until: SimTime,
) -> Result<MetricSeries, MetricError> {
    if window.is_zero() {
        return Err(MetricError::ZeroWindow);
    }
    let w = window.ticks();
    let mut n = until.ticks().div_ceil(w) as usize;
    let mut buckets: Vec<Bucket> = Vec::with_capacity(n);
    let fill = |buckets: &mut Vec<Bucket>, upto: usize| {
        while buckets.len() < upto {
            let start = SimTime::from_ticks(buckets.len() as u64 * w);
            buckets.push(Bucket {
                start,
                count: 0,
                sum: 0.0,
                max: None,
            });
        }
    };
    fill(&mut buckets, n);
    for (t, v) in samples {
        let k = (t.ticks() / w) as usize;
        if k >= n {
            n = k + 1;
            fill(&mut buckets, n);
        }
        let b = &mut buckets[k];
        b.count += 1;
        b.sum += v;
        b.max = Some(b.max.map_or(v, |m: f64| m.max(v)));
    }
    Ok(MetricSeries { window, buckets })
}

/// Windowed compute metric, bucketed by `time_in`, over the records
/// accepted by `filter`.
pub fn compute_series(
    records: &[ComputeRecord],
    metric: Metric,
    anchor: Anchor,
    window: SimTime,
    until: SimTime,
    filter: impl Fn(&ComputeRecord) -> bool,
) -> Result<MetricSeries, MetricError> {
    let mut samples = Vec::new();
    for r in records.iter().filter(|r| filter(r)) {
        samples.push((anchor.of(r), metric.of(&r.times()?).as_units()));
    }
    windowed(samples, window, until)
}

/// Windowed buffer gauge, bucketed by `ctime`.
pub fn saturation_series(
    links: &[LinkRecord],
    window: SimTime,
    until: SimTime,
) -> Result<MetricSeries, MetricError> {
    windowed(
        links.iter().map(|l| (l.ctime, l.buffer as f64)),
        window,
        until,
    )
}

/// Saturation grouped by an arbitrary key, e.g. a node tag.
pub fn saturation_by<K: Ord>(
    links: &[LinkRecord],
    window: SimTime,
    until: SimTime,
    key: impl Fn(&LinkRecord) -> K,
) -> Result<BTreeMap<K, MetricSeries>, MetricError> {
    let mut groups: BTreeMap<K, Vec<(SimTime, f64)>> = BTreeMap::new();
    for l in links {
        groups
            .entry(key(l))
            .or_default()
            .push((l.ctime, l.buffer as f64));
    }
    groups
        .into_iter()
        .map(|(k, s)| windowed(s, window, until).map(|series| (k, series)))
        .collect()
}

/// Mean, sample variance, min and max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Summary {
            n,
            mean,
            var,
            min,
            max,
        })
    }
}
