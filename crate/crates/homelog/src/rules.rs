//! Duration-threshold rules: derive per-location bounds from data, flag
//! violating events as noise candidates, and resolve them, optionally
//! followed by the minimum-penalty repair (the hybrid pipeline).

use std::collections::BTreeMap;

use crate::conformance::shortest_connector;
use crate::model::{fuse_indexed, EventLog, LocationEvent, LogOrigin, TransitionModel};
use crate::repair::{repair, EditKind, EditOp, PenaltyConfig, RepairResult};
use crate::Result;

/// How a rule's thresholds were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleMethod {
    /// max = mean + 2 * population standard deviation; no min.
    MeanPlus2Std,
    /// min = 2.5th percentile, max = 97.5th percentile, nearest-rank.
    TwoSided2_5Pct,
    Manual,
}

impl RuleMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleMethod::MeanPlus2Std => "mean2std",
            RuleMethod::TwoSided2_5Pct => "pct2.5",
            RuleMethod::Manual => "manual",
        }
    }

    pub fn parse(s: &str) -> Option<RuleMethod> {
        match s {
            "mean2std" => Some(RuleMethod::MeanPlus2Std),
            "pct2.5" => Some(RuleMethod::TwoSided2_5Pct),
            "manual" => Some(RuleMethod::Manual),
            _ => None,
        }
    }
}

/// Duration bounds for one location, in whole seconds. Events exactly at a
/// threshold are in range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurationRule {
    pub location: String,
    pub min_secs: Option<i64>,
    pub max_secs: Option<i64>,
    pub method: RuleMethod,
}

/// Rules derived from a log, plus the locations that had to be skipped
/// (absent from the log or too few events for the method).
#[derive(Debug, Clone, Default)]
pub struct DerivedRules {
    pub rules: Vec<DurationRule>,
    pub skipped: Vec<String>,
}

/// Nearest-rank percentile over sorted samples: the ceil(p * n)-th value,
/// 1-indexed, clamped into the sample range.
fn nearest_rank(sorted: &[i64], p: f64) -> i64 {
    debug_assert!(!sorted.is_empty());
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Derive one rule per requested location from the log's event durations.
///
/// `MeanPlus2Std` needs at least 2 events, percentiles at least 1; a
/// location that does not qualify lands in `skipped`. `Manual` entries are
/// skipped too: manual thresholds come from a rules file, not from data.
pub fn derive_rules(log: &EventLog, spec: &BTreeMap<String, RuleMethod>) -> DerivedRules {
    let mut by_location: BTreeMap<&str, Vec<i64>> = BTreeMap::new();
    for e in &log.events {
        by_location
            .entry(e.location.as_str())
            .or_default()
            .push(e.duration_secs());
    }

    let mut out = DerivedRules::default();
    for (location, method) in spec {
        let durations = by_location.get(location.as_str());
        let rule = match (method, durations) {
            (RuleMethod::MeanPlus2Std, Some(ds)) if ds.len() >= 2 => {
                let n = ds.len() as f64;
                let mean = ds.iter().sum::<i64>() as f64 / n;
                let var = ds.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / n;
                Some(DurationRule {
                    location: location.clone(),
                    min_secs: None,
                    max_secs: Some((mean + 2.0 * var.sqrt()).floor() as i64),
                    method: *method,
                })
            }
            (RuleMethod::TwoSided2_5Pct, Some(ds)) if !ds.is_empty() => {
                let mut sorted = ds.clone();
                sorted.sort_unstable();
                Some(DurationRule {
                    location: location.clone(),
                    min_secs: Some(nearest_rank(&sorted, 0.025)),
                    max_secs: Some(nearest_rank(&sorted, 0.975)),
                    method: *method,
                })
            }
            _ => None,
        };
        match rule {
            Some(r) => out.rules.push(r),
            None => out.skipped.push(location.clone()),
        }
    }
    out
}

/// Which bound a flagged event violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolatedBound {
    /// Shorter than the minimum threshold (suspected noise detection).
    Min(i64),
    /// Longer than the maximum threshold (suspected stuck or missed exit).
    Max(i64),
}

/// A noise candidate: event index plus the bound it broke.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flag {
    pub index: usize,
    pub bound: ViolatedBound,
}

/// Flag events whose duration falls outside their location's rule. Events
/// exactly at a threshold pass; locations without a rule are never flagged.
pub fn flag(log: &EventLog, rules: &[DurationRule]) -> Vec<Flag> {
    let by_location: BTreeMap<&str, &DurationRule> =
        rules.iter().map(|r| (r.location.as_str(), r)).collect();
    let mut flags = Vec::new();
    for (index, e) in log.events.iter().enumerate() {
        let Some(rule) = by_location.get(e.location.as_str()) else {
            continue;
        };
        let d = e.duration_secs();
        if let Some(min) = rule.min_secs {
            if d < min {
                flags.push(Flag {
                    index,
                    bound: ViolatedBound::Min(min),
                });
                continue;
            }
        }
        if let Some(max) = rule.max_secs {
            if d > max {
                flags.push(Flag {
                    index,
                    bound: ViolatedBound::Max(max),
                });
            }
        }
    }
    flags
}

/// What to do with flagged events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionAction {
    Drop,
    /// Drop, but when the removal leaves an impossible neighbor transition,
    /// bridge the gap with zero-duration connector events instead.
    RelabelToConnector,
    FlagOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolutionPolicy {
    pub action: ResolutionAction,
    /// Per-flag confirmation; the CLI prompts and filters the flag list
    /// before calling [`resolve`], falling back to `FlagOnly` without a
    /// terminal.
    pub interactive: bool,
}

/// Apply a resolution policy to a set of flags.
///
/// Edit costs use the supplied penalty parameters so rule-stage and
/// PM-stage reports stay comparable; `FlagOnly` leaves the log untouched.
pub fn resolve(
    log: &EventLog,
    flags: &[Flag],
    policy: ResolutionPolicy,
    model: &TransitionModel,
    cost_cfg: &PenaltyConfig,
) -> Result<RepairResult> {
    if flags.is_empty() || policy.action == ResolutionAction::FlagOnly {
        return Ok(RepairResult::unchanged(log));
    }
    let flagged: std::collections::BTreeSet<usize> = flags.iter().map(|f| f.index).collect();

    let mut kept: Vec<(LocationEvent, usize)> = Vec::with_capacity(log.events.len());
    let mut edits: Vec<EditOp> = Vec::new();
    let mut total = 0.0;

    for (i, event) in log.events.iter().enumerate() {
        if !flagged.contains(&i) {
            kept.push((event.clone(), i));
            continue;
        }
        let cost = cost_cfg.remove_base + cost_cfg.remove_per_support * event.support_count as f64;
        total += cost;
        edits.push(EditOp {
            kind: EditKind::Remove,
            position: i,
            location: event.location.clone(),
            cost,
        });

        if policy.action == ResolutionAction::RelabelToConnector {
            if let (Some((prev, _)), Some(next)) = (kept.last(), next_survivor(log, &flagged, i)) {
                let prev_loc = prev.location.clone();
                if prev_loc != next.location && !model.has_edge(&prev_loc, &next.location) {
                    let connector = shortest_connector(model, &prev_loc, &next.location)?;
                    for area in connector {
                        total += cost_cfg.insert_cost;
                        edits.push(EditOp {
                            kind: EditKind::Insert,
                            position: i,
                            location: area.clone(),
                            cost: cost_cfg.insert_cost,
                        });
                        kept.push((LocationEvent::new(area, event.start, event.start, 0), i));
                    }
                }
            }
        }
    }

    let (events, fusions) = fuse_indexed(kept);
    for f in fusions {
        edits.push(EditOp {
            kind: EditKind::Fuse,
            position: f.position,
            location: f.location,
            cost: 0.0,
        });
    }
    Ok(RepairResult {
        corrected: EventLog::new(events, LogOrigin::Repaired),
        edits,
        total_penalty: total,
    })
}

fn next_survivor<'a>(
    log: &'a EventLog,
    flagged: &std::collections::BTreeSet<usize>,
    after: usize,
) -> Option<&'a LocationEvent> {
    log.events
        .iter()
        .enumerate()
        .skip(after + 1)
        .find(|(j, _)| !flagged.contains(j))
        .map(|(_, e)| e)
}

/// Stage order for the hybrid pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StageOrder {
    #[default]
    RulesThenPm,
    PmThenRules,
}

/// Run the rule stage and the minimum-penalty repair in sequence, with the
/// edit lists concatenated in stage order.
///
/// Positions of second-stage edits index into that stage's input log, not
/// the original.
pub fn hybrid(
    log: &EventLog,
    rules: &[DurationRule],
    policy: ResolutionPolicy,
    model: &TransitionModel,
    cfg: &PenaltyConfig,
    order: StageOrder,
) -> Result<RepairResult> {
    let rules_stage = |input: &EventLog| -> Result<RepairResult> {
        let flags = flag(input, rules);
        resolve(input, &flags, policy, model, cfg)
    };
    let (first, second): (RepairResult, RepairResult) = match order {
        StageOrder::RulesThenPm => {
            let a = rules_stage(log)?;
            let b = repair(&a.corrected, model, cfg)?;
            (a, b)
        }
        StageOrder::PmThenRules => {
            let a = repair(log, model, cfg)?;
            let b = rules_stage(&a.corrected)?;
            (a, b)
        }
    };
    let mut edits = first.edits;
    edits.extend(second.edits);
    Ok(RepairResult {
        corrected: second.corrected,
        edits,
        total_penalty: first.total_penalty + second.total_penalty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformance::validate;
    use crate::model::Timestamp;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn ts(secs: i64) -> Timestamp {
        NaiveDate::from_ymd_opt(2020, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
            + chrono::Duration::seconds(secs)
    }

    fn durations_log(location: &str, durations: &[i64]) -> EventLog {
        let mut t = 0;
        let mut events = Vec::new();
        for d in durations {
            events.push(LocationEvent::new(location, ts(t), ts(t + d), 1));
            t += d + 1;
        }
        EventLog::new(events, LogOrigin::Abstracted)
    }

    fn spec_of(location: &str, method: RuleMethod) -> BTreeMap<String, RuleMethod> {
        BTreeMap::from([(location.to_string(), method)])
    }

    fn model(edges: &[(&str, &str)]) -> TransitionModel {
        let mut m = TransitionModel::new();
        for (a, b) in edges {
            m.add_edge(*a, *b).unwrap();
        }
        m
    }

    #[test]
    fn mean2std_zero_variance() {
        let log = durations_log("WC", &[60, 60, 60, 60]);
        let derived = derive_rules(&log, &spec_of("WC", RuleMethod::MeanPlus2Std));
        assert_eq!(derived.rules.len(), 1);
        assert_eq!(derived.rules[0].min_secs, None);
        assert_eq!(derived.rules[0].max_secs, Some(60));
    }

    #[test]
    fn mean2std_floors_to_whole_seconds() {
        // mean 25, population sigma sqrt(125) ~= 11.18, max = floor(47.36)
        let log = durations_log("Corridor", &[10, 20, 30, 40]);
        let derived = derive_rules(&log, &spec_of("Corridor", RuleMethod::MeanPlus2Std));
        assert_eq!(derived.rules[0].max_secs, Some(47));
    }

    #[test]
    fn nearest_rank_on_forty_samples() {
        let samples: Vec<i64> = (1..=40).map(|i| i * 10).collect();
        let log = durations_log("Kitchen", &samples);
        let derived = derive_rules(&log, &spec_of("Kitchen", RuleMethod::TwoSided2_5Pct));
        // ceil(0.025*40) = 1st sample, ceil(0.975*40) = 39th sample
        assert_eq!(derived.rules[0].min_secs, Some(10));
        assert_eq!(derived.rules[0].max_secs, Some(390));
    }

    #[test]
    fn absent_location_is_skipped() {
        let log = durations_log("Kitchen", &[10, 20]);
        let derived = derive_rules(&log, &spec_of("Bedroom", RuleMethod::TwoSided2_5Pct));
        assert!(derived.rules.is_empty());
        assert_eq!(derived.skipped, vec!["Bedroom"]);
    }

    #[test]
    fn mean2std_needs_two_events() {
        let log = durations_log("WC", &[60]);
        let derived = derive_rules(&log, &spec_of("WC", RuleMethod::MeanPlus2Std));
        assert!(derived.rules.is_empty());
        assert_eq!(derived.skipped, vec!["WC"]);
    }

    fn rule(location: &str, min: Option<i64>, max: Option<i64>) -> DurationRule {
        DurationRule {
            location: location.to_string(),
            min_secs: min,
            max_secs: max,
            method: RuleMethod::Manual,
        }
    }

    #[test]
    fn flag_max_violation() {
        // ten-minute corridor event against the 00:08:29 ceiling
        let log = durations_log("Corridor", &[600]);
        let flags = flag(&log, &[rule("Corridor", None, Some(509))]);
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].bound, ViolatedBound::Max(509));
    }

    #[test]
    fn flag_min_violation() {
        // three-second kitchen event against the 00:00:06 floor
        let log = durations_log("Kitchen", &[3]);
        let flags = flag(&log, &[rule("Kitchen", Some(6), None)]);
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].bound, ViolatedBound::Min(6));
    }

    #[test]
    fn no_rules_no_flags_and_thresholds_are_inclusive() {
        let log = durations_log("Kitchen", &[6, 100]);
        assert!(flag(&log, &[]).is_empty());
        assert!(flag(&log, &[rule("Kitchen", Some(6), Some(100))]).is_empty());
    }

    #[test]
    fn resolve_without_flags_is_identity() {
        let log = durations_log("Kitchen", &[60]);
        let m = model(&[("Kitchen", "Corridor")]);
        let policy = ResolutionPolicy {
            action: ResolutionAction::Drop,
            interactive: false,
        };
        let r = resolve(&log, &[], policy, &m, &PenaltyConfig::default()).unwrap();
        assert!(r.edits.is_empty());
        assert_eq!(r.corrected.events, log.events);
    }

    fn trace(locs: &[&str]) -> EventLog {
        let events = locs
            .iter()
            .enumerate()
            .map(|(i, l)| LocationEvent::new(*l, ts(i as i64 * 60), ts(i as i64 * 60 + 60), 1))
            .collect();
        EventLog::new(events, LogOrigin::Abstracted)
    }

    #[test]
    fn drop_then_fuse() {
        let log = trace(&["A", "X", "A"]);
        let m = model(&[("A", "X")]);
        let flags = vec![Flag {
            index: 1,
            bound: ViolatedBound::Max(10),
        }];
        let policy = ResolutionPolicy {
            action: ResolutionAction::Drop,
            interactive: false,
        };
        let r = resolve(&log, &flags, policy, &m, &PenaltyConfig::default()).unwrap();
        assert_eq!(r.corrected.len(), 1);
        assert_eq!(r.corrected.events[0].location, "A");
        let kinds: Vec<_> = r.edits.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EditKind::Remove, EditKind::Fuse]);
    }

    #[test]
    fn connector_reinstated_when_drop_breaks_the_walk() {
        let log = trace(&["Bedroom", "Corridor", "Bathroom"]);
        let m = model(&[("Bedroom", "Corridor"), ("Corridor", "Bathroom")]);
        let flags = vec![Flag {
            index: 1,
            bound: ViolatedBound::Max(509),
        }];
        let policy = ResolutionPolicy {
            action: ResolutionAction::RelabelToConnector,
            interactive: false,
        };
        let r = resolve(&log, &flags, policy, &m, &PenaltyConfig::default()).unwrap();
        let locs: Vec<_> = r.corrected.events.iter().map(|e| e.location.as_str()).collect();
        assert_eq!(locs, vec!["Bedroom", "Corridor", "Bathroom"]);
        assert_eq!(r.corrected.events[1].duration_secs(), 0);
        assert_eq!(r.corrected.events[1].support_count, 0);
        assert!(validate(&r.corrected, &m).unwrap().is_clean());
    }

    #[test]
    fn hybrid_identity_on_clean_valid_log() {
        let log = trace(&["A", "B"]);
        let m = model(&[("A", "B")]);
        let policy = ResolutionPolicy {
            action: ResolutionAction::Drop,
            interactive: false,
        };
        let r = hybrid(&log, &[], policy, &m, &PenaltyConfig::default(), StageOrder::default())
            .unwrap();
        assert!(r.edits.is_empty());
        assert_eq!(r.total_penalty, 0.0);
    }

    #[test]
    fn hybrid_runs_both_stages_in_order() {
        // rules stage drops the over-long X, PM stage inserts the missing C
        let m = model(&[("A", "X"), ("X", "B"), ("A", "C"), ("C", "D"), ("D", "B")]);
        let events = vec![
            LocationEvent::new("A", ts(0), ts(60), 3),
            LocationEvent::new("X", ts(60), ts(10060), 1),
            LocationEvent::new("B", ts(10060), ts(10120), 3),
            LocationEvent::new("A", ts(10120), ts(10180), 3),
            LocationEvent::new("D", ts(10180), ts(10240), 3),
        ];
        let log = EventLog::new(events, LogOrigin::Abstracted);
        let rules = [rule("X", None, Some(500))];
        let policy = ResolutionPolicy {
            action: ResolutionAction::Drop,
            interactive: false,
        };
        let r = hybrid(&log, &rules, policy, &m, &PenaltyConfig::default(), StageOrder::RulesThenPm)
            .unwrap();
        assert!(validate(&r.corrected, &m).unwrap().is_clean());
        let kinds: Vec<_> = r.edits.iter().map(|e| (e.kind, e.location.as_str())).collect();
        assert!(kinds.contains(&(EditKind::Remove, "X")));
        assert!(kinds.iter().any(|(k, _)| *k == EditKind::Insert));
        // rule edit precedes PM edits
        assert_eq!(r.edits[0].kind, EditKind::Remove);
        assert_eq!(r.edits[0].location, "X");
    }

    #[test]
    fn hybrid_pm_stage_contributes_nothing_when_rules_suffice() {
        let m = model(&[("A", "X"), ("X", "B"), ("A", "B")]);
        let log = trace(&["A", "X", "B"]);
        let rules = [rule("X", None, Some(10))];
        let policy = ResolutionPolicy {
            action: ResolutionAction::Drop,
            interactive: false,
        };
        let r = hybrid(&log, &rules, policy, &m, &PenaltyConfig::default(), StageOrder::RulesThenPm)
            .unwrap();
        assert!(validate(&r.corrected, &m).unwrap().is_clean());
        let kinds: Vec<_> = r.edits.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EditKind::Remove]);
    }

    proptest! {
        // widening the accepted range never adds flags
        #[test]
        fn flag_is_monotone(durations in proptest::collection::vec(0i64..5000, 1..30),
                            min in 0i64..100, max in 100i64..5000, widen in 1i64..500) {
            let log = durations_log("K", &durations);
            let narrow = flag(&log, &[rule("K", Some(min), Some(max))]);
            let wide = flag(&log, &[rule("K", Some((min - widen).max(0)), Some(max + widen))]);
            let narrow_idx: std::collections::BTreeSet<_> = narrow.iter().map(|f| f.index).collect();
            for f in &wide {
                prop_assert!(narrow_idx.contains(&f.index));
            }
        }

        // percentile thresholds stay inside the sample range even after
        // out-of-range events join the log
        #[test]
        fn percentiles_stay_in_sample_range(durations in proptest::collection::vec(10i64..1000, 4..40)) {
            let log = durations_log("K", &durations);
            let derived = derive_rules(&log, &spec_of("K", RuleMethod::TwoSided2_5Pct));
            let min = *durations.iter().min().unwrap();
            let max = *durations.iter().max().unwrap();
            let r = &derived.rules[0];
            prop_assert!(r.min_secs.unwrap() >= min && r.min_secs.unwrap() <= max);
            prop_assert!(r.max_secs.unwrap() >= min && r.max_secs.unwrap() <= max);
            prop_assert!(r.min_secs.unwrap() <= r.max_secs.unwrap());
        }
    }
}
