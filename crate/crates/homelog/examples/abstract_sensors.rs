//! Turn a raw binary sensor CSV into a location event log.
//!
//! An event opens at the first 1-valued reading in a location and closes
//! at the first later reading mapped somewhere else; 0-valued readings
//! only mark the end of activity and never open or close events.
//!
//! Run with `cargo run --example abstract_sensors`.

use std::path::Path;

use homelog::abstraction::{abstract_log, AbstractionConfig};
use homelog::io;

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn main() -> homelog::Result<()> {
    let sensors = io::read_sensor_log(&data("sensors.csv"), &data("meta.csv"))?;
    println!("{} raw readings", sensors.readings().len());

    let outcome = abstract_log(&sensors, &AbstractionConfig::default())?;
    println!(
        "{} location events ({} zero-valued readings ignored):\n",
        outcome.log.len(),
        outcome.ignored_zero_values
    );
    for event in &outcome.log.events {
        println!(
            "{} .. {}  {:<12} support {}",
            io::format_timestamp(event.start),
            io::format_timestamp(event.end),
            event.location,
            event.support_count
        );
    }
    Ok(())
}
