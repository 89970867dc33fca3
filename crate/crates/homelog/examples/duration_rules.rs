//! Derive per-location duration thresholds from history, flag outliers,
//! and resolve them.
//!
//! Run with `cargo run --example duration_rules`.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use homelog::io;
use homelog::model::{EventLog, LocationEvent, LogOrigin};
use homelog::repair::PenaltyConfig;
use homelog::rules::{
    derive_rules, flag, resolve, ResolutionAction, ResolutionPolicy, RuleMethod,
};

fn main() -> homelog::Result<()> {
    let model = io::read_model(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/floor_plan.txt"),
    )?;

    // a week of corridor crossings, plus one implausible 20-minute stay
    let day0 = NaiveDate::from_ymd_opt(2019, 6, 1).unwrap();
    let mut events = Vec::new();
    for day in 0..7 {
        let start = (day0 + chrono::Duration::days(day)).and_hms_opt(8, 0, 0).unwrap();
        let dwell = 20 + 5 * day; // 20s..50s, the usual crossing time
        events.push(LocationEvent::new("Bedroom", start - chrono::Duration::hours(8), start, 60));
        events.push(LocationEvent::new(
            "Corridor",
            start,
            start + chrono::Duration::seconds(dwell),
            1,
        ));
        events.push(LocationEvent::new(
            "Kitchen",
            start + chrono::Duration::seconds(dwell),
            start + chrono::Duration::minutes(30),
            25,
        ));
    }
    // the outlier: twenty minutes in the corridor
    let t = day0.and_hms_opt(20, 0, 0).unwrap() + chrono::Duration::days(7);
    events.push(LocationEvent::new("Bedroom", t - chrono::Duration::hours(1), t, 30));
    events.push(LocationEvent::new("Corridor", t, t + chrono::Duration::minutes(20), 2));
    events.push(LocationEvent::new(
        "Kitchen",
        t + chrono::Duration::minutes(20),
        t + chrono::Duration::minutes(40),
        18,
    ));
    events.sort_by_key(|e| e.start);
    let log = EventLog::new(events, LogOrigin::Abstracted);

    let mut spec = BTreeMap::new();
    spec.insert("Corridor".to_string(), RuleMethod::MeanPlus2Std);
    let derived = derive_rules(&log, &spec);
    for rule in &derived.rules {
        println!(
            "rule for {}: min {:?}, max {:?} ({})",
            rule.location,
            rule.min_secs,
            rule.max_secs,
            rule.method.as_str()
        );
    }

    let flags = flag(&log, &derived.rules);
    println!("\n{} event(s) flagged:", flags.len());
    for f in &flags {
        let e = &log.events[f.index];
        println!(
            "  #{} {} for {}s violates {:?}",
            f.index,
            e.location,
            e.duration_secs(),
            f.bound
        );
    }

    let policy = ResolutionPolicy {
        action: ResolutionAction::RelabelToConnector,
        interactive: false,
    };
    let result = resolve(&log, &flags, policy, &model, &PenaltyConfig::default())?;
    println!("\nresolution edits:");
    for edit in &result.edits {
        println!("  {:<6} at {} ({})", edit.kind.as_str(), edit.position, edit.location);
    }
    Ok(())
}
