//! Per-location and per-day summaries of what a repair changed.
//!
//! The per-location table uses the after-correction event count as the
//! percentage denominator. Duration percentages are relative to elapsed
//! wall-clock time: 86400 s for a single day, the log's span for totals.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::model::EventLog;
use crate::repair::{EditKind, RepairResult};
use crate::{Error, Result};

pub const SECS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq)]
pub struct LocationRow {
    pub location: String,
    pub before: usize,
    pub after: usize,
    pub corrections: usize,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyRow {
    pub day: NaiveDate,
    pub change_count: usize,
    pub changed_secs: i64,
    pub pct: f64,
}

/// Correction summary: per-location counts plus per-day change totals.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeReport {
    pub per_location: Vec<LocationRow>,
    pub totals: LocationRow,
    pub daily: Vec<DailyRow>,
    pub daily_avg_changes: f64,
    pub daily_max_changes: usize,
    pub daily_avg_secs: f64,
    pub daily_max_secs: i64,
    pub daily_max_pct: f64,
    pub total_changed_secs: i64,
    pub total_changed_pct: f64,
    /// Wall-clock span of the uncorrected log, in seconds.
    pub horizon_secs: i64,
}

/// corrections / after-correction count, as a percentage.
pub fn correction_pct(corrections: usize, after: usize) -> f64 {
    if after == 0 {
        0.0
    } else {
        corrections as f64 / after as f64 * 100.0
    }
}

/// changed seconds relative to an elapsed-time base, as a percentage.
pub fn duration_pct(changed_secs: i64, base_secs: i64) -> f64 {
    if base_secs <= 0 {
        0.0
    } else {
        changed_secs as f64 / base_secs as f64 * 100.0
    }
}

pub fn format_hms(secs: i64) -> String {
    format!("{:02}:{:02}:{:02}", secs / 3600, secs % 3600 / 60, secs % 60)
}

/// Build the change report for a repair of `before`.
///
/// Every edit is counted at its location; a fusion counts once, at the
/// surviving location. An edit's day and duration delta come from the
/// original event at its position (insertions contribute zero duration;
/// edits at the one-past-the-end insertion point use the last event's end).
pub fn change_report(before: &EventLog, result: &RepairResult) -> Result<ChangeReport> {
    let n = before.events.len();
    for edit in &result.edits {
        let limit = if edit.kind == EditKind::Insert { n } else { n.saturating_sub(1) };
        if edit.position > limit {
            return Err(Error::Integrity(format!(
                "edit position {} out of range for a log of {} events",
                edit.position, n
            )));
        }
    }

    let mut before_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &before.events {
        *before_counts.entry(e.location.as_str()).or_default() += 1;
    }
    let mut after_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &result.corrected.events {
        *after_counts.entry(e.location.as_str()).or_default() += 1;
    }
    let mut corrections: BTreeMap<&str, usize> = BTreeMap::new();
    for edit in &result.edits {
        *corrections.entry(edit.location.as_str()).or_default() += 1;
    }

    let mut locations: Vec<&str> = before_counts
        .keys()
        .chain(after_counts.keys())
        .chain(corrections.keys())
        .copied()
        .collect();
    locations.sort_unstable();
    locations.dedup();

    let mut per_location = Vec::new();
    for loc in locations {
        let after = after_counts.get(loc).copied().unwrap_or(0);
        let corr = corrections.get(loc).copied().unwrap_or(0);
        per_location.push(LocationRow {
            location: loc.to_string(),
            before: before_counts.get(loc).copied().unwrap_or(0),
            after,
            corrections: corr,
            pct: correction_pct(corr, after),
        });
    }
    let sum = |f: fn(&LocationRow) -> usize| per_location.iter().map(f).sum::<usize>();
    let (tb, ta, tc) = (sum(|r| r.before), sum(|r| r.after), sum(|r| r.corrections));
    let totals = LocationRow {
        location: "Total".to_string(),
        before: tb,
        after: ta,
        corrections: tc,
        pct: correction_pct(tc, ta),
    };

    // day of an edit = day of the original event at its position
    let mut daily_map: BTreeMap<NaiveDate, (usize, i64)> = BTreeMap::new();
    for edit in &result.edits {
        let (stamp, delta) = if edit.position < n {
            let e = &before.events[edit.position];
            let delta = match edit.kind {
                EditKind::Insert => 0,
                EditKind::Remove | EditKind::Fuse => e.duration_secs(),
            };
            (e.start, delta)
        } else {
            (before.events[n - 1].end, 0)
        };
        let entry = daily_map.entry(stamp.date()).or_default();
        entry.0 += 1;
        entry.1 += delta;
    }
    let daily: Vec<DailyRow> = daily_map
        .into_iter()
        .map(|(day, (count, secs))| DailyRow {
            day,
            change_count: count,
            changed_secs: secs,
            pct: duration_pct(secs, SECS_PER_DAY),
        })
        .collect();

    let horizon_secs = match (before.events.first(), before.events.last()) {
        (Some(first), Some(last)) => (last.end - first.start).num_seconds(),
        _ => 0,
    };
    let days = if horizon_secs > 0 {
        horizon_secs as f64 / SECS_PER_DAY as f64
    } else {
        1.0
    };
    let total_changed_secs: i64 = daily.iter().map(|d| d.changed_secs).sum();
    let total_changes: usize = daily.iter().map(|d| d.change_count).sum();
    debug_assert_eq!(total_changes, result.edits.len());

    Ok(ChangeReport {
        daily_avg_changes: total_changes as f64 / days,
        daily_max_changes: daily.iter().map(|d| d.change_count).max().unwrap_or(0),
        daily_avg_secs: total_changed_secs as f64 / days,
        daily_max_secs: daily.iter().map(|d| d.changed_secs).max().unwrap_or(0),
        daily_max_pct: daily.iter().map(|d| d.pct).fold(0.0, f64::max),
        total_changed_secs,
        total_changed_pct: duration_pct(total_changed_secs, horizon_secs),
        horizon_secs,
        daily,
        per_location,
        totals,
    })
}

/// Aligned plain-text rendering of the per-location table and daily
/// aggregates.
pub fn render_text(report: &ChangeReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>8} {:>8} {:>12} {:>9}\n",
        "Location", "Before", "After", "Corrections", "Pct"
    ));
    for row in report.per_location.iter().chain(std::iter::once(&report.totals)) {
        out.push_str(&format!(
            "{:<12} {:>8} {:>8} {:>12} {:>8.3}%\n",
            row.location, row.before, row.after, row.corrections, row.pct
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "Changes: daily avg {:.1}, daily max {}, total {}\n",
        report.daily_avg_changes,
        report.daily_max_changes,
        report.totals.corrections
    ));
    out.push_str(&format!(
        "Changed duration: daily avg {} ({:.3}%), daily max {} ({:.3}%), total {} ({:.3}%)\n",
        format_hms(report.daily_avg_secs.round() as i64),
        duration_pct(report.daily_avg_secs.round() as i64, SECS_PER_DAY),
        format_hms(report.daily_max_secs),
        report.daily_max_pct,
        format_hms(report.total_changed_secs),
        report.total_changed_pct
    ));
    out.push_str("Percentages: corrections relative to after-correction counts; durations relative to elapsed time.\n");
    out
}

/// CSV rendering of the per-location table (`location,before,after,corrections,pct`).
pub fn render_csv(report: &ChangeReport) -> String {
    let mut out = String::from("location,before,after,corrections,pct\n");
    for row in report.per_location.iter().chain(std::iter::once(&report.totals)) {
        out.push_str(&format!(
            "{},{},{},{},{:.3}\n",
            row.location, row.before, row.after, row.corrections, row.pct
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LocationEvent, LogOrigin, Timestamp, TransitionModel};
    use crate::repair::{repair, PenaltyConfig};

    fn ts(secs: i64) -> Timestamp {
        NaiveDate::from_ymd_opt(2020, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
            + chrono::Duration::seconds(secs)
    }

    fn trace(specs: &[(&str, i64, i64, u32)]) -> EventLog {
        let events = specs
            .iter()
            .map(|(l, s, e, sup)| LocationEvent::new(*l, ts(*s), ts(*e), *sup))
            .collect();
        EventLog::new(events, LogOrigin::Abstracted)
    }

    #[test]
    fn printed_percentage_convention() {
        // per-location convention: corrections over after-correction counts
        let rows = [
            (1655usize, 1653usize, 10usize, "0.605"),
            (1436, 1369, 86, "6.282"),
            (2371, 2375, 133, "5.600"),
            (242, 233, 17, "7.296"),
            (3279, 3179, 158, "4.970"),
            (2795, 2842, 92, "3.237"),
            (716, 716, 4, "0.559"),
            (12494, 12367, 398, "3.218"),
        ];
        for (_before, after, corr, want) in rows {
            assert_eq!(format!("{:.3}", correction_pct(corr, after)), want);
        }
    }

    #[test]
    fn daily_duration_convention() {
        assert_eq!(format!("{:.3}", duration_pct(138, SECS_PER_DAY)), "0.160");
        assert_eq!(format!("{:.3}", duration_pct(1655, SECS_PER_DAY)), "1.916");
    }

    #[test]
    fn zero_edits_zero_percentages() {
        let log = trace(&[("A", 0, 60, 1), ("B", 60, 120, 1)]);
        let mut m = TransitionModel::new();
        m.add_edge("A", "B").unwrap();
        let result = repair(&log, &m, &PenaltyConfig::default()).unwrap();
        let report = change_report(&log, &result).unwrap();
        assert_eq!(report.totals.corrections, 0);
        assert_eq!(report.totals.pct, 0.0);
        assert!(report.daily.is_empty());
        assert_eq!(report.total_changed_secs, 0);
    }

    #[test]
    fn counts_balance_per_location() {
        // B is invalid between the two A events and gets removed + fused
        let log = trace(&[("A", 0, 60, 5), ("B", 60, 120, 1), ("A", 120, 180, 5)]);
        let mut m = TransitionModel::new();
        m.add_edge("A", "C").unwrap();
        m.add_edge("C", "B").unwrap();
        let result = repair(&log, &m, &PenaltyConfig::default()).unwrap();
        let report = change_report(&log, &result).unwrap();
        for row in &report.per_location {
            let removes = result
                .edits
                .iter()
                .filter(|e| e.kind == EditKind::Remove && e.location == row.location)
                .count();
            let fuses = result
                .edits
                .iter()
                .filter(|e| e.kind == EditKind::Fuse && e.location == row.location)
                .count();
            let inserts = result
                .edits
                .iter()
                .filter(|e| e.kind == EditKind::Insert && e.location == row.location)
                .count();
            assert_eq!(row.after, row.before - removes - fuses + inserts, "{}", row.location);
        }
        let total_corr: usize = report.per_location.iter().map(|r| r.corrections).sum();
        assert_eq!(total_corr, result.edits.len());
    }

    #[test]
    fn report_is_reproducible() {
        let log = trace(&[("A", 0, 60, 5), ("B", 60, 120, 1), ("A", 120, 180, 5)]);
        let mut m = TransitionModel::new();
        m.add_edge("A", "C").unwrap();
        m.add_edge("C", "B").unwrap();
        let result = repair(&log, &m, &PenaltyConfig::default()).unwrap();
        let a = change_report(&log, &result).unwrap();
        let b = change_report(&log, &result).unwrap();
        assert_eq!(render_text(&a), render_text(&b));
        assert_eq!(render_csv(&a), render_csv(&b));
    }

    #[test]
    fn out_of_range_edit_is_an_integrity_error() {
        let log = trace(&[("A", 0, 60, 1)]);
        let result = crate::repair::RepairResult {
            corrected: log.clone(),
            edits: vec![crate::repair::EditOp {
                kind: EditKind::Remove,
                position: 5,
                location: "A".into(),
                cost: 1.0,
            }],
            total_penalty: 1.0,
        };
        assert!(matches!(
            change_report(&log, &result),
            Err(Error::Integrity(_))
        ));
    }
}
