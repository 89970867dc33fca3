//! Repair an event log with the minimum-penalty edit search.
//!
//! Insertions cost a flat amount; removals cost more the better
//! supported the event is, so the search prefers to bridge gaps with
//! zero-duration connector events and only deletes weakly supported
//! outliers.
//!
//! Run with `cargo run --example repair_log`.

use std::path::Path;

use chrono::NaiveDate;
use homelog::io;
use homelog::model::{EventLog, LocationEvent, LogOrigin};
use homelog::repair::{repair, PenaltyConfig};

fn ts(h: u32, m: u32, s: u32) -> chrono::NaiveDateTime {
    NaiveDate::from_ymd_opt(2019, 6, 1).unwrap().and_hms_opt(h, m, s).unwrap()
}

fn main() -> homelog::Result<()> {
    let model = io::read_model(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/floor_plan.txt"),
    )?;

    // a missed corridor reading and a single spurious kitchen blip
    let log = EventLog::new(
        vec![
            LocationEvent::new("Bedroom", ts(7, 0, 0), ts(7, 10, 0), 10),
            LocationEvent::new("Kitchen", ts(7, 10, 0), ts(7, 10, 5), 1),
            LocationEvent::new("Bedroom", ts(7, 10, 5), ts(7, 20, 0), 9),
            LocationEvent::new("Bathroom", ts(7, 20, 0), ts(7, 30, 0), 10),
        ],
        LogOrigin::Abstracted,
    );

    let result = repair(&log, &model, &PenaltyConfig::default())?;
    println!("total penalty {:.3}, edits:", result.total_penalty);
    for edit in &result.edits {
        println!(
            "  {:<6} at {} ({}, cost {:.3})",
            edit.kind.as_str(),
            edit.position,
            edit.location,
            edit.cost
        );
    }
    println!("\ncorrected log:");
    print!("{}", io::write_event_csv(&result.corrected));
    Ok(())
}
