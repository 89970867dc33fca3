//! Shared domain types: sensor readings, location events, the floor-plan
//! transition model, and the fusion operation that keeps event logs free of
//! consecutive same-location duplicates.
//!
//! All types are immutable values after construction and safe to share
//! across threads.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{NaiveDateTime, Timelike};

use crate::{Error, Result};

/// Timestamps carry 1-second resolution; sub-second input is truncated.
pub type Timestamp = NaiveDateTime;

/// Drop any sub-second component. Returns the truncated timestamp and
/// whether truncation actually happened (callers may warn).
pub fn truncate_to_second(ts: Timestamp) -> (Timestamp, bool) {
    if ts.nanosecond() == 0 {
        (ts, false)
    } else {
        (ts.with_nanosecond(0).expect("zero nanosecond is valid"), true)
    }
}

/// One timestamped binary sensor measurement (a raw log row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorReading {
    pub timestamp: Timestamp,
    pub sensor_id: String,
    /// Binary value, 0 or 1. Only 1-values carry event semantics.
    pub value: u8,
}

impl SensorReading {
    pub fn new(timestamp: Timestamp, sensor_id: impl Into<String>, value: u8) -> Self {
        let (timestamp, _) = truncate_to_second(timestamp);
        SensorReading {
            timestamp,
            sensor_id: sensor_id.into(),
            value,
        }
    }
}

/// Sensor hardware categories present in the home.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Pir,
    Contact,
    Power,
    Gas,
}

impl SensorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SensorKind::Pir => "PIR",
            SensorKind::Contact => "contact",
            SensorKind::Power => "power",
            SensorKind::Gas => "gas",
        }
    }

    pub fn parse(s: &str) -> Option<SensorKind> {
        match s {
            "PIR" | "pir" => Some(SensorKind::Pir),
            "contact" => Some(SensorKind::Contact),
            "power" => Some(SensorKind::Power),
            "gas" => Some(SensorKind::Gas),
            _ => None,
        }
    }
}

/// Installation metadata for one sensor: its kind and the area it observes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorMeta {
    pub sensor_id: String,
    pub kind: SensorKind,
    pub location: String,
}

/// A raw sensor log: readings sorted by (timestamp, sensor_id) plus the
/// metadata for every sensor that appears in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorLog {
    readings: Vec<SensorReading>,
    meta: BTreeMap<String, SensorMeta>,
}

impl SensorLog {
    /// Build a log; readings are sorted by (timestamp, sensor_id), ties kept
    /// in a stable order.
    pub fn new(mut readings: Vec<SensorReading>, meta: Vec<SensorMeta>) -> Self {
        readings.sort_by(|a, b| {
            (a.timestamp, a.sensor_id.as_str()).cmp(&(b.timestamp, b.sensor_id.as_str()))
        });
        let meta = meta
            .into_iter()
            .map(|m| (m.sensor_id.clone(), m))
            .collect();
        SensorLog { readings, meta }
    }

    pub fn readings(&self) -> &[SensorReading] {
        &self.readings
    }

    pub fn meta(&self) -> &BTreeMap<String, SensorMeta> {
        &self.meta
    }

    /// [first, last] reading timestamps; `None` for an empty log.
    pub fn span(&self) -> Option<(Timestamp, Timestamp)> {
        match (self.readings.first(), self.readings.last()) {
            (Some(a), Some(b)) => Some((a.timestamp, b.timestamp)),
            _ => None,
        }
    }
}

/// An abstracted presence interval in one home area.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationEvent {
    pub location: String,
    pub start: Timestamp,
    pub end: Timestamp,
    /// Number of raw readings abstracted into this event; 0 for
    /// synthetically inserted events.
    pub support_count: u32,
}

impl LocationEvent {
    pub fn new(
        location: impl Into<String>,
        start: Timestamp,
        end: Timestamp,
        support_count: u32,
    ) -> Self {
        LocationEvent {
            location: location.into(),
            start,
            end,
            support_count,
        }
    }

    pub fn duration_secs(&self) -> i64 {
        (self.end - self.start).num_seconds()
    }
}

/// Fallback evidence weight when an event's support count is unknown:
/// one unit per started minute, at least one.
pub fn support_from_duration(duration_secs: i64) -> u32 {
    let minutes = (duration_secs as f64 / 60.0).round() as i64;
    minutes.max(1) as u32
}

/// Where an event log came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogOrigin {
    Abstracted,
    Simulated,
    Repaired,
}

/// An ordered sequence of location events.
///
/// A well-formed log is sorted by start, has no overlapping neighbors
/// (`e.end <= next.start`), and no two consecutive events in the same
/// location. [`fuse_adjacent`] establishes the last property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<LocationEvent>,
    pub origin: LogOrigin,
}

impl EventLog {
    pub fn new(events: Vec<LocationEvent>, origin: LogOrigin) -> Self {
        EventLog { events, origin }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Check the ordering invariants, returning the first violation.
    pub fn check_ordering(&self) -> Result<()> {
        for (i, pair) in self.events.windows(2).enumerate() {
            if pair[0].start > pair[1].start || pair[0].end > pair[1].start {
                return Err(Error::OverlappingEvents(i, i + 1));
            }
        }
        Ok(())
    }
}

/// Record of one fusion: the absorbed event's index in the input sequence
/// and the location of the surviving event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fusion {
    pub position: usize,
    pub location: String,
}

/// Merge maximal runs of consecutive same-location events into one event
/// spanning first start to last end, with summed support. Each run of k
/// events yields k-1 fusion records.
pub fn fuse_adjacent(log: &EventLog) -> Result<(EventLog, Vec<Fusion>)> {
    log.check_ordering()?;
    let indexed: Vec<(LocationEvent, usize)> = log
        .events
        .iter()
        .cloned()
        .zip(0..)
        .collect();
    let (events, fusions) = fuse_indexed(indexed);
    Ok((EventLog::new(events, log.origin), fusions))
}

/// Fusion over events tagged with their original index; the index of an
/// absorbed event ends up in the fusion record. Shared by the repair
/// engines, which need edit positions relative to the original log.
pub(crate) fn fuse_indexed(
    events: Vec<(LocationEvent, usize)>,
) -> (Vec<LocationEvent>, Vec<Fusion>) {
    let mut out: Vec<LocationEvent> = Vec::with_capacity(events.len());
    let mut fusions = Vec::new();
    for (event, pos) in events {
        match out.last_mut() {
            Some(last) if last.location == event.location => {
                last.end = event.end;
                last.support_count += event.support_count;
                fusions.push(Fusion {
                    position: pos,
                    location: event.location,
                });
            }
            _ => out.push(event),
        }
    }
    (out, fusions)
}

/// The floor-plan graph: home areas plus symmetric adjacency.
///
/// Edges are unordered pairs stored in normalized (sorted) form; self-loops
/// are rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionModel {
    areas: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
}

impl TransitionModel {
    pub fn new() -> Self {
        TransitionModel::default()
    }

    pub fn add_area(&mut self, area: impl Into<String>) {
        self.areas.insert(area.into());
    }

    /// Add a symmetric edge; both endpoints become areas. Self-loops are a
    /// configuration error.
    pub fn add_edge(&mut self, a: impl Into<String>, b: impl Into<String>) -> Result<()> {
        let a = a.into();
        let b = b.into();
        if a == b {
            return Err(Error::Config(format!("self-loop edge on `{a}`")));
        }
        self.areas.insert(a.clone());
        self.areas.insert(b.clone());
        let pair = if a < b { (a, b) } else { (b, a) };
        self.edges.insert(pair);
        Ok(())
    }

    pub fn areas(&self) -> impl Iterator<Item = &str> {
        self.areas.iter().map(|s| s.as_str())
    }

    pub fn area_count(&self) -> usize {
        self.areas.len()
    }

    pub fn contains_area(&self, area: &str) -> bool {
        self.areas.contains(area)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        let pair = if a < b { (a, b) } else { (b, a) };
        self.edges
            .contains(&(pair.0.to_string(), pair.1.to_string()))
    }

    /// Neighbors of an area, in lexicographic order.
    pub fn neighbors<'a>(&'a self, area: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter_map(move |(a, b)| {
            if a == area {
                Some(b.as_str())
            } else if b == area {
                Some(a.as_str())
            } else {
                None
            }
        })
    }
}
