//! Check an event log against a floor-plan transition model and list
//! every physically impossible transition.
//!
//! Run with `cargo run --example validate_transitions`.

use std::path::Path;

use chrono::NaiveDate;
use homelog::conformance::{shortest_connector, validate};
use homelog::io;
use homelog::model::{EventLog, LocationEvent, LogOrigin};

fn ts(h: u32, m: u32, s: u32) -> chrono::NaiveDateTime {
    NaiveDate::from_ymd_opt(2019, 6, 1).unwrap().and_hms_opt(h, m, s).unwrap()
}

fn main() -> homelog::Result<()> {
    let model = io::read_model(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/floor_plan.txt"),
    )?;

    // the Bedroom -> Kitchen hop skips the corridor, so it cannot happen
    let log = EventLog::new(
        vec![
            LocationEvent::new("Bedroom", ts(7, 0, 0), ts(7, 10, 0), 10),
            LocationEvent::new("Kitchen", ts(7, 10, 0), ts(7, 25, 0), 15),
            LocationEvent::new("LivingRoom", ts(7, 25, 0), ts(8, 0, 0), 35),
        ],
        LogOrigin::Abstracted,
    );

    let report = validate(&log, &model)?;
    println!(
        "{} of {} transitions invalid (rate {:.2}%)",
        report.invalid.len(),
        report.total_transitions,
        report.invalid_rate() * 100.0
    );
    for inv in &report.invalid {
        let connector = shortest_connector(&model, &inv.from, &inv.to)?;
        println!(
            "  transition #{}: {} -> {}  (shortest connection passes through {:?})",
            inv.index, inv.from, inv.to, connector
        );
    }
    Ok(())
}
