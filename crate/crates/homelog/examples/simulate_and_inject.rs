//! Generate a seeded ground-truth trajectory, corrupt its sensor log
//! with missed and spurious readings, and show the damage after
//! re-abstraction.
//!
//! Run with `cargo run --example simulate_and_inject`.

use std::path::Path;

use homelog::abstraction::{abstract_log, AbstractionConfig};
use homelog::conformance::validate;
use homelog::io;
use homelog::simulate::{inject, simulate_trajectory, ErrorSpec, SimConfig};

fn main() -> homelog::Result<()> {
    let model = io::read_model(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/floor_plan.txt"),
    )?;

    let mut cfg = SimConfig::new(42);
    cfg.horizon_secs = 6 * 3600;
    let (truth, clean) = simulate_trajectory(&model, &cfg)?;
    println!(
        "simulated {} ground-truth events, {} clean readings",
        truth.len(),
        clean.readings().len()
    );

    let spec = ErrorSpec {
        p_miss: 0.08,
        p_noise: 0.08,
        jitter_secs: 5,
    };
    let noisy = inject(&clean, &model, &spec, 42)?;
    println!("after injection: {} readings", noisy.readings().len());

    let abstracted = abstract_log(&noisy, &AbstractionConfig::default())?.log;
    let report = validate(&abstracted, &model)?;
    println!(
        "abstracted noisy log: {} events, {}/{} transitions invalid ({:.2}%)",
        abstracted.len(),
        report.invalid.len(),
        report.total_transitions,
        report.invalid_rate() * 100.0
    );
    for inv in report.invalid.iter().take(5) {
        println!("  #{}: {} -> {}", inv.index, inv.from, inv.to);
    }
    Ok(())
}
