//! Seeded ground-truth simulation: a random walk over the floor-plan graph
//! with log-normal dwell times, a synthetic PIR-style sensor log, error
//! injection for the two error classes (missing readings, adjacent-area
//! noise with timestamp jitter), and scoring of a corrected log against the
//! ground truth.
//!
//! All randomness flows from explicit seeds; there is no global RNG state.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;

use crate::conformance::validate;
use crate::model::{
    EventLog, LocationEvent, LogOrigin, SensorKind, SensorLog, SensorMeta, SensorReading,
    Timestamp, TransitionModel,
};
use crate::{Error, Result};

/// Log-normal dwell parameters for one location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellParams {
    pub median_secs: f64,
    pub sigma: f64,
}

impl Default for DwellParams {
    fn default() -> Self {
        DwellParams {
            median_secs: 300.0,
            sigma: 0.5,
        }
    }
}

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub start: Timestamp,
    pub horizon_secs: u64,
    /// Seconds between repeat firings of a location's sensor while the
    /// resident stays there.
    pub pir_period_secs: u32,
    /// Per-location dwell overrides; locations not listed use `default_dwell`.
    pub dwell: BTreeMap<String, DwellParams>,
    pub default_dwell: DwellParams,
}

impl SimConfig {
    pub fn new(seed: u64) -> Self {
        SimConfig {
            seed,
            start: chrono::NaiveDate::from_ymd_opt(2020, 1, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            horizon_secs: 86_400,
            pir_period_secs: 60,
            dwell: BTreeMap::new(),
            default_dwell: DwellParams::default(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.pir_period_secs == 0 {
            return Err(Error::Config("pir_period must be positive".into()));
        }
        for (loc, d) in self
            .dwell
            .iter()
            .map(|(l, d)| (l.as_str(), d))
            .chain(std::iter::once(("default", &self.default_dwell)))
        {
            if !(d.median_secs > 0.0) || !(d.sigma >= 0.0) {
                return Err(Error::Config(format!(
                    "dwell parameters for {loc} must have positive median and nonnegative sigma"
                )));
            }
        }
        Ok(())
    }
}

/// Error-injection parameters for the two error classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSpec {
    /// Probability each reading is dropped (missing event).
    pub p_miss: f64,
    /// Probability a spurious same-timestamp reading from an adjacent area
    /// follows a true reading (overlap noise).
    pub p_noise: f64,
    /// Maximum absolute timestamp perturbation in seconds (timing noise).
    pub jitter_secs: u32,
}

impl Default for ErrorSpec {
    fn default() -> Self {
        ErrorSpec {
            p_miss: 0.05,
            p_noise: 0.05,
            jitter_secs: 5,
        }
    }
}

impl ErrorSpec {
    fn check(&self) -> Result<()> {
        for (name, p) in [("p_miss", self.p_miss), ("p_noise", self.p_noise)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0,1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Sensor id used for a simulated area's presence sensor.
pub fn sensor_id_for(area: &str) -> String {
    format!("pir_{area}")
}

/// Simulate one resident trajectory: a random walk over the model's edges
/// with per-location dwell times. Returns the ground-truth event log and
/// the corresponding clean sensor log (one reading at each location entry
/// plus repeats every `pir_period_secs`). Deterministic given the seed.
pub fn simulate_trajectory(
    model: &TransitionModel,
    cfg: &SimConfig,
) -> Result<(EventLog, SensorLog)> {
    cfg.check()?;
    let areas: Vec<&str> = model.areas().collect();
    if areas.is_empty() {
        return Err(Error::Config("transition model has no areas".into()));
    }
    for a in &areas {
        if model.neighbors(a).next().is_none() {
            return Err(Error::Config(format!(
                "area `{a}` has no neighbors; the walk cannot leave it"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut events = Vec::new();
    let mut readings = Vec::new();
    let mut current = areas[rng.gen_range(0..areas.len())].to_string();
    let mut t: u64 = 0;

    while t < cfg.horizon_secs {
        let params = cfg.dwell.get(&current).unwrap_or(&cfg.default_dwell);
        let dist = LogNormal::new(params.median_secs.ln(), params.sigma)
            .map_err(|e| Error::Config(format!("bad dwell distribution: {e}")))?;
        let dwell = dist.sample(&mut rng).round().max(1.0) as u64;
        let end = (t + dwell).min(cfg.horizon_secs);

        let start_ts = cfg.start + chrono::Duration::seconds(t as i64);
        let end_ts = cfg.start + chrono::Duration::seconds(end as i64);
        let mut support = 0;
        let mut fire = t;
        while fire < end || fire == t {
            readings.push(SensorReading::new(
                cfg.start + chrono::Duration::seconds(fire as i64),
                sensor_id_for(&current),
                1,
            ));
            support += 1;
            fire += cfg.pir_period_secs as u64;
            if fire >= end {
                break;
            }
        }
        events.push(LocationEvent::new(current.clone(), start_ts, end_ts, support));

        let neighbors: Vec<&str> = model.neighbors(&current).collect();
        current = neighbors[rng.gen_range(0..neighbors.len())].to_string();
        t = end;
    }

    let meta = model
        .areas()
        .map(|a| SensorMeta {
            sensor_id: sensor_id_for(a),
            kind: SensorKind::Pir,
            location: a.to_string(),
        })
        .collect();
    Ok((
        EventLog::new(events, LogOrigin::Simulated),
        SensorLog::new(readings, meta),
    ))
}

/// Apply the error model to a sensor log: independent drops, spurious
/// same-timestamp readings from adjacent areas, then uniform timestamp
/// jitter and a re-sort. Deterministic given the seed.
pub fn inject(
    log: &SensorLog,
    model: &TransitionModel,
    spec: &ErrorSpec,
    seed: u64,
) -> Result<SensorLog> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // sensors per area, sorted for determinism
    let mut by_area: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for meta in log.meta().values() {
        by_area
            .entry(meta.location.as_str())
            .or_default()
            .push(meta.sensor_id.as_str());
    }
    for ids in by_area.values_mut() {
        ids.sort_unstable();
    }

    let mut out: Vec<SensorReading> = Vec::with_capacity(log.readings().len());
    for reading in log.readings() {
        if rng.gen_bool(spec.p_miss) {
            continue;
        }
        out.push(reading.clone());
        if spec.p_noise > 0.0 && rng.gen_bool(spec.p_noise) {
            let area = log
                .meta()
                .get(&reading.sensor_id)
                .map(|m| m.location.as_str());
            if let Some(area) = area {
                let neighbors: Vec<&str> = model.neighbors(area).collect();
                if !neighbors.is_empty() {
                    let pick = neighbors[rng.gen_range(0..neighbors.len())];
                    if let Some(ids) = by_area.get(pick) {
                        let id = ids[rng.gen_range(0..ids.len())];
                        out.push(SensorReading::new(reading.timestamp, id, reading.value));
                    }
                }
            }
        }
    }

    if spec.jitter_secs > 0 {
        let j = spec.jitter_secs as i64;
        for reading in &mut out {
            let shift = rng.gen_range(-j..=j);
            reading.timestamp += chrono::Duration::seconds(shift);
        }
    }

    Ok(SensorLog::new(out, log.meta().values().cloned().collect()))
}

/// Per-location match counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LocationCounts {
    pub matched: usize,
    /// Corrected events with no truth counterpart.
    pub spurious: usize,
    /// Truth events with no corrected counterpart.
    pub missed: usize,
}

/// Quality of a corrected log against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub invalid_rate: f64,
    pub matched: usize,
    pub corrected_total: usize,
    pub truth_total: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: BTreeMap<String, LocationCounts>,
}

fn overlap_matches(a: &LocationEvent, b: &LocationEvent) -> bool {
    if a.location != b.location {
        return false;
    }
    let inter_start = a.start.max(b.start);
    let inter_end = a.end.min(b.end);
    if inter_start > inter_end {
        return false;
    }
    let inter = (inter_end - inter_start).num_seconds() as f64;
    let shorter = a.duration_secs().min(b.duration_secs()) as f64;
    inter >= 0.5 * shorter
}

/// Score a corrected log against the ground truth.
///
/// A corrected event matches a truth event of the same location when their
/// temporal overlap covers at least half of the shorter event; matching is
/// greedy one-to-one in time order.
pub fn evaluate(
    corrected: &EventLog,
    truth: &EventLog,
    model: &TransitionModel,
) -> Result<EvalReport> {
    let invalid_rate = validate(corrected, model)?.invalid_rate();

    let mut taken = vec![false; truth.events.len()];
    let mut matched = 0usize;
    let mut confusion: BTreeMap<String, LocationCounts> = BTreeMap::new();
    for e in corrected.events.iter().chain(truth.events.iter()) {
        confusion.entry(e.location.clone()).or_default();
    }

    for event in &corrected.events {
        let hit = truth
            .events
            .iter()
            .enumerate()
            .find(|(j, t)| !taken[*j] && overlap_matches(event, t));
        match hit {
            Some((j, _)) => {
                taken[j] = true;
                matched += 1;
                confusion.get_mut(&event.location).unwrap().matched += 1;
            }
            None => confusion.get_mut(&event.location).unwrap().spurious += 1,
        }
    }
    for (j, t) in truth.events.iter().enumerate() {
        if !taken[j] {
            confusion.get_mut(&t.location).unwrap().missed += 1;
        }
    }

    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let precision = ratio(matched, corrected.events.len());
    let recall = ratio(matched, truth.events.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalReport {
        invalid_rate,
        matched,
        corrected_total: corrected.events.len(),
        truth_total: truth.events.len(),
        precision,
        recall,
        f1,
        confusion,
    })
}
