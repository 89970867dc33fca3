//! File formats: CSV for sensor readings, sensor metadata, events and
//! edits; line-oriented text for the transition model and duration rules;
//! TOML for run configuration.
//!
//! All writers emit deterministic output so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDateTime;
use serde::Deserialize;

use crate::model::{
    support_from_duration, EventLog, LocationEvent, LogOrigin, SensorKind, SensorLog, SensorMeta,
    SensorReading, Timestamp, TransitionModel,
};
use crate::repair::EditOp;
use crate::rules::{DurationRule, RuleMethod};
use crate::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).ok()
}

pub fn format_timestamp(ts: Timestamp) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

struct CsvFile {
    path: String,
    records: Vec<(u64, csv::StringRecord)>,
}

/// Read a CSV file and check its exact header; records come back with
/// 1-based line numbers.
fn read_csv(path: &Path, expected_header: &[&str]) -> Result<CsvFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::parse(&path_str(path), 0, 0, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| Error::parse(&path_str(path), 1, 1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != expected_header {
        return Err(Error::parse(
            &path_str(path),
            1,
            1,
            format!("expected header `{}`", expected_header.join(",")),
        ));
    }
    let mut records = Vec::new();
    for record in reader.into_records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(&path_str(path), line, 1, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != expected_header.len() {
            return Err(Error::parse(
                &path_str(path),
                line,
                1,
                format!(
                    "expected {} fields, found {}",
                    expected_header.len(),
                    record.len()
                ),
            ));
        }
        records.push((line, record));
    }
    Ok(CsvFile {
        path: path_str(path),
        records,
    })
}

/// Sensor log rows: `timestamp,sensor_id,value`.
pub fn read_sensor_csv(path: &Path) -> Result<Vec<SensorReading>> {
    let file = read_csv(path, &["timestamp", "sensor_id", "value"])?;
    let mut readings = Vec::with_capacity(file.records.len());
    for (line, record) in &file.records {
        let ts = parse_timestamp(&record[0]).ok_or_else(|| {
            Error::parse(
                &file.path,
                *line,
                1,
                format!("invalid timestamp `{}` (expected YYYY-MM-DD HH:MM:SS)", &record[0]),
            )
        })?;
        let value = match &record[2] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::parse(
                    &file.path,
                    *line,
                    3,
                    format!("invalid binary value `{other}`"),
                ))
            }
        };
        readings.push(SensorReading::new(ts, record[1].to_string(), value));
    }
    Ok(readings)
}

pub fn write_sensor_csv(readings: &[SensorReading]) -> String {
    let mut out = String::from("timestamp,sensor_id,value\n");
    for r in readings {
        writeln!(
            out,
            "{},{},{}",
            format_timestamp(r.timestamp),
            r.sensor_id,
            r.value
        )
        .unwrap();
    }
    out
}

/// Sensor metadata rows: `sensor_id,kind,location`.
pub fn read_meta_csv(path: &Path) -> Result<Vec<SensorMeta>> {
    let file = read_csv(path, &["sensor_id", "kind", "location"])?;
    let mut metas = Vec::with_capacity(file.records.len());
    for (line, record) in &file.records {
        let kind = SensorKind::parse(&record[1]).ok_or_else(|| {
            Error::parse(
                &file.path,
                *line,
                2,
                format!("unknown sensor kind `{}` (expected PIR, contact, power or gas)", &record[1]),
            )
        })?;
        metas.push(SensorMeta {
            sensor_id: record[0].to_string(),
            kind,
            location: record[2].to_string(),
        });
    }
    Ok(metas)
}

pub fn write_meta_csv(metas: &[SensorMeta]) -> String {
    let mut out = String::from("sensor_id,kind,location\n");
    for m in metas {
        writeln!(out, "{},{},{}", m.sensor_id, m.kind.as_str(), m.location).unwrap();
    }
    out
}

pub fn read_sensor_log(sensor_path: &Path, meta_path: &Path) -> Result<SensorLog> {
    let readings = read_sensor_csv(sensor_path)?;
    let metas = read_meta_csv(meta_path)?;
    Ok(SensorLog::new(readings, metas))
}

/// Event log rows: `location,start,end,support`. An empty support field
/// falls back to the duration-derived estimate.
pub fn read_event_csv(path: &Path, origin: LogOrigin) -> Result<EventLog> {
    let file = read_csv(path, &["location", "start", "end", "support"])?;
    let mut events = Vec::with_capacity(file.records.len());
    for (line, record) in &file.records {
        let start = parse_timestamp(&record[1]).ok_or_else(|| {
            Error::parse(&file.path, *line, 2, format!("invalid timestamp `{}`", &record[1]))
        })?;
        let end = parse_timestamp(&record[2]).ok_or_else(|| {
            Error::parse(&file.path, *line, 3, format!("invalid timestamp `{}`", &record[2]))
        })?;
        if end < start {
            return Err(Error::parse(&file.path, *line, 3, "event ends before it starts"));
        }
        let support = if record[3].is_empty() {
            support_from_duration((end - start).num_seconds())
        } else {
            record[3].parse::<u32>().map_err(|_| {
                Error::parse(&file.path, *line, 4, format!("invalid support count `{}`", &record[3]))
            })?
        };
        events.push(LocationEvent::new(record[0].to_string(), start, end, support));
    }
    let log = EventLog::new(events, origin);
    log.check_ordering()
        .map_err(|e| Error::parse(&file.path, 0, 0, e.to_string()))?;
    Ok(log)
}

pub fn write_event_csv(log: &EventLog) -> String {
    let mut out = String::from("location,start,end,support\n");
    for e in &log.events {
        writeln!(
            out,
            "{},{},{},{}",
            e.location,
            format_timestamp(e.start),
            format_timestamp(e.end),
            e.support_count
        )
        .unwrap();
    }
    out
}

/// Edit list rows: `kind,position,location,cost`.
pub fn write_edits_csv(edits: &[EditOp]) -> String {
    let mut out = String::from("kind,position,location,cost\n");
    for e in edits {
        writeln!(out, "{},{},{},{}", e.kind.as_str(), e.position, e.location, e.cost).unwrap();
    }
    out
}

/// Transition model file: one `AreaA -- AreaB` edge per line, `#` comments
/// and blank lines ignored. Labels are case-sensitive tokens without
/// whitespace.
pub fn read_model(path: &Path) -> Result<TransitionModel> {
    let text = std::fs::read_to_string(path)?;
    let mut model = TransitionModel::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split("--").map(|s| s.trim()).collect();
        let lineno = idx as u64 + 1;
        match parts.as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() => {
                if a.split_whitespace().count() != 1 || b.split_whitespace().count() != 1 {
                    return Err(Error::parse(
                        &path_str(path),
                        lineno,
                        1,
                        "area labels must not contain whitespace",
                    ));
                }
                model
                    .add_edge(*a, *b)
                    .map_err(|e| Error::parse(&path_str(path), lineno, 1, e.to_string()))?;
            }
            _ => {
                return Err(Error::parse(
                    &path_str(path),
                    lineno,
                    1,
                    format!("expected `AreaA -- AreaB`, found `{line}`"),
                ))
            }
        }
    }
    Ok(model)
}

pub fn write_model(model: &TransitionModel) -> String {
    let mut out = String::from("# transition model: one edge per line\n");
    for (a, b) in model.edges() {
        writeln!(out, "{a} -- {b}").unwrap();
    }
    out
}

fn parse_duration_field(s: &str) -> Option<Option<i64>> {
    if s == "-" {
        return Some(None);
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let h: i64 = parts[0].parse().ok()?;
    let m: i64 = parts[1].parse().ok()?;
    let sec: i64 = parts[2].parse().ok()?;
    if !(0..60).contains(&m) || !(0..60).contains(&sec) || h < 0 {
        return None;
    }
    Some(Some(h * 3600 + m * 60 + sec))
}

/// Duration rules file: one rule per line,
/// `location min=<HH:MM:SS|-> max=<HH:MM:SS|-> method=<mean2std|pct2.5|manual>`.
pub fn read_rules(path: &Path) -> Result<Vec<DurationRule>> {
    let text = std::fs::read_to_string(path)?;
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx as u64 + 1;
        let bad = |msg: String| Error::parse(&path_str(path), lineno, 1, msg);
        let mut tokens = line.split_whitespace();
        let location = tokens.next().unwrap().to_string();
        let mut min = None;
        let mut max = None;
        let mut method = None;
        for token in tokens {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, found `{token}`")))?;
            match key {
                "min" => {
                    min = parse_duration_field(value)
                        .ok_or_else(|| bad(format!("invalid duration `{value}`")))?
                }
                "max" => {
                    max = parse_duration_field(value)
                        .ok_or_else(|| bad(format!("invalid duration `{value}`")))?
                }
                "method" => {
                    method = Some(
                        RuleMethod::parse(value)
                            .ok_or_else(|| bad(format!("unknown method `{value}`")))?,
                    )
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        if let (Some(lo), Some(hi)) = (min, max) {
            if lo > hi {
                return Err(bad(format!("min {lo}s exceeds max {hi}s")));
            }
        }
        rules.push(DurationRule {
            location,
            min_secs: min,
            max_secs: max,
            method: method.ok_or_else(|| bad("missing method=".to_string()))?,
        });
    }
    Ok(rules)
}

pub fn write_rules(rules: &[DurationRule]) -> String {
    let fmt = |v: Option<i64>| match v {
        None => "-".to_string(),
        Some(secs) => crate::report::format_hms(secs),
    };
    let mut out = String::from("# location duration thresholds\n");
    for r in rules {
        writeln!(
            out,
            "{} min={} max={} method={}",
            r.location,
            fmt(r.min_secs),
            fmt(r.max_secs),
            r.method.as_str()
        )
        .unwrap();
    }
    out
}

// ---- run configuration ----

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    pub insert_cost: Option<f64>,
    pub remove_base: Option<f64>,
    pub remove_per_support: Option<f64>,
    pub max_consecutive_insertions: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DwellSection {
    pub median_secs: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub seed: Option<u64>,
    pub start: Option<String>,
    pub horizon_secs: Option<u64>,
    pub pir_period_secs: Option<u32>,
    pub default_dwell: Option<DwellSection>,
    #[serde(default)]
    pub dwell: BTreeMap<String, DwellSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSection {
    pub p_miss: Option<f64>,
    pub p_noise: Option<f64>,
    pub jitter_secs: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    /// `drop`, `connector` or `flag-only`.
    pub action: Option<String>,
    pub interactive: Option<bool>,
}

/// The optional TOML run configuration; command-line flags override any
/// value set here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub penalty: PenaltySection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub errors: ErrorSection,
    #[serde(default)]
    pub policy: PolicySection,
}

pub fn read_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path_str(path))))
}
