//! Validation of event sequences against the floor-plan transition model.

use std::collections::{BTreeMap, VecDeque};

use crate::model::{EventLog, TransitionModel};
use crate::{Error, Result};

/// One impossible direct transition: the index of the first event of the
/// pair plus the two locations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidTransition {
    pub index: usize,
    pub from: String,
    pub to: String,
}

/// Outcome of validating every consecutive event pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionReport {
    pub total_transitions: usize,
    pub invalid: Vec<InvalidTransition>,
}

impl TransitionReport {
    pub fn invalid_rate(&self) -> f64 {
        if self.total_transitions == 0 {
            0.0
        } else {
            self.invalid.len() as f64 / self.total_transitions as f64
        }
    }

    pub fn is_clean(&self) -> bool {
        self.invalid.is_empty()
    }
}

/// Check each consecutive pair of events against the model's edges.
///
/// A transition is valid iff its location pair is a model edge. Every event
/// location must be a model area. Gaps between events are ignored; all
/// consecutive pairs count.
pub fn validate(log: &EventLog, model: &TransitionModel) -> Result<TransitionReport> {
    for event in &log.events {
        if !model.contains_area(&event.location) {
            return Err(Error::UnknownLocation(event.location.clone()));
        }
    }
    let mut invalid = Vec::new();
    for (i, pair) in log.events.windows(2).enumerate() {
        let (from, to) = (&pair[0].location, &pair[1].location);
        if !model.has_edge(from, to) {
            invalid.push(InvalidTransition {
                index: i,
                from: from.clone(),
                to: to.clone(),
            });
        }
    }
    Ok(TransitionReport {
        total_transitions: log.events.len().saturating_sub(1),
        invalid,
    })
}

/// Intermediate areas of a shortest path between two areas, excluding the
/// endpoints. Adjacent or equal endpoints give an empty connector.
///
/// Ties between equally short paths break toward the lexicographically
/// smallest label sequence, so the result is deterministic.
pub fn shortest_connector(model: &TransitionModel, from: &str, to: &str) -> Result<Vec<String>> {
    for label in [from, to] {
        if !model.contains_area(label) {
            return Err(Error::UnknownLocation(label.to_string()));
        }
    }
    if from == to || model.has_edge(from, to) {
        return Ok(Vec::new());
    }

    // BFS distances from the target, then greedily walk from the source
    // choosing the smallest neighbor that moves strictly closer.
    let mut dist: BTreeMap<&str, usize> = BTreeMap::new();
    dist.insert(to, 0);
    let mut queue = VecDeque::from([to]);
    while let Some(area) = queue.pop_front() {
        let d = dist[area];
        for next in model.neighbors(area) {
            if !dist.contains_key(next) {
                dist.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    let Some(&total) = dist.get(from) else {
        return Err(Error::DisconnectedModel {
            from: from.to_string(),
            to: to.to_string(),
        });
    };

    let mut path = Vec::with_capacity(total.saturating_sub(1));
    let mut current = from;
    for step in (1..total).rev() {
        // neighbors() iterates in lexicographic order; first match wins
        current = model
            .neighbors(current)
            .find(|n| dist.get(n) == Some(&step))
            .expect("BFS distance map admits a descending step");
        path.push(current.to_string());
    }
    Ok(path)
}
