//! Sensor log to location event log conversion.
//!
//! A presence event opens at the first 1-valued reading in an area and
//! closes at the timestamp of the first subsequent reading mapped to a
//! different area. Consecutive readings from the same area extend the open
//! event and add to its support count. Readings with value 0 carry no event
//! semantics; they are only tallied for diagnostics.

use crate::model::{EventLog, LocationEvent, LogOrigin, SensorLog};
use crate::{Error, Result};

/// Controls for the abstraction pass. The sensor-to-location mapping itself
/// travels with the [`SensorLog`]'s metadata.
#[derive(Debug, Clone)]
pub struct AbstractionConfig {
    /// Close the final open event at the log's last timestamp instead of at
    /// its own last reading.
    pub close_open_tail: bool,
}

impl Default for AbstractionConfig {
    fn default() -> Self {
        AbstractionConfig {
            close_open_tail: false,
        }
    }
}

/// Result of an abstraction pass.
#[derive(Debug, Clone)]
pub struct AbstractionOutcome {
    pub log: EventLog,
    /// 0-valued readings seen and ignored.
    pub ignored_zero_values: usize,
}

/// Convert a sensor log into a location event log.
///
/// Every 1-valued reading must map to a known location; an unmapped sensor
/// is a configuration error naming the sensor id. An empty input yields an
/// empty event log.
pub fn abstract_log(sensors: &SensorLog, cfg: &AbstractionConfig) -> Result<AbstractionOutcome> {
    let mut events: Vec<LocationEvent> = Vec::new();
    let mut ignored_zero_values = 0usize;

    // (location, start, last reading timestamp, support)
    let mut open: Option<(String, crate::model::Timestamp, crate::model::Timestamp, u32)> = None;

    for reading in sensors.readings() {
        if reading.value == 0 {
            ignored_zero_values += 1;
            continue;
        }
        let location = sensors
            .meta()
            .get(&reading.sensor_id)
            .map(|m| m.location.clone())
            .ok_or_else(|| Error::UnknownSensor(reading.sensor_id.clone()))?;

        match open.take() {
            None => open = Some((location, reading.timestamp, reading.timestamp, 1)),
            Some((loc, start, _last, support)) if loc == location => {
                open = Some((loc, start, reading.timestamp, support + 1));
            }
            Some((loc, start, _last, support)) => {
                // first foreign reading closes the open event at its own time
                events.push(LocationEvent::new(loc, start, reading.timestamp, support));
                open = Some((location, reading.timestamp, reading.timestamp, 1));
            }
        }
    }

    if let Some((loc, start, last, support)) = open {
        let end = if cfg.close_open_tail {
            sensors.span().map(|(_, e)| e).unwrap_or(last)
        } else {
            last
        };
        events.push(LocationEvent::new(loc, start, end, support));
    }

    Ok(AbstractionOutcome {
        log: EventLog::new(events, LogOrigin::Abstracted),
        ignored_zero_values,
    })
}
