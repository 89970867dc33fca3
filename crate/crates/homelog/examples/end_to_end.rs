//! The full pipeline on synthetic data with known ground truth:
//! simulate, inject errors, abstract, repair with the hybrid
//! rules-then-search strategy, and score the result.
//!
//! Run with `cargo run --example end_to_end`.

use std::path::Path;

use homelog::abstraction::{abstract_log, AbstractionConfig};
use homelog::conformance::validate;
use homelog::io;
use homelog::repair::PenaltyConfig;
use homelog::report::{change_report, render_text};
use homelog::rules::{
    hybrid, DurationRule, ResolutionAction, ResolutionPolicy, RuleMethod, StageOrder,
};
use homelog::simulate::{evaluate, inject, simulate_trajectory, ErrorSpec, SimConfig};

fn main() -> homelog::Result<()> {
    let model = io::read_model(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/floor_plan.txt"),
    )?;

    let mut cfg = SimConfig::new(7);
    cfg.horizon_secs = 7 * 86_400;
    let (truth, clean) = simulate_trajectory(&model, &cfg)?;
    let noisy = inject(&clean, &model, &ErrorSpec::default(), 7)?;
    let abstracted = abstract_log(&noisy, &AbstractionConfig::default())?.log;

    let before = validate(&abstracted, &model)?;
    println!(
        "before repair: {}/{} transitions invalid",
        before.invalid.len(),
        before.total_transitions
    );

    // spurious noise events last at most one sensor period; real stays
    // are an order of magnitude longer
    let rules: Vec<DurationRule> = model
        .areas()
        .map(|area| DurationRule {
            location: area.to_string(),
            min_secs: Some(90),
            max_secs: None,
            method: RuleMethod::Manual,
        })
        .collect();
    let policy = ResolutionPolicy {
        action: ResolutionAction::RelabelToConnector,
        interactive: false,
    };
    let result = hybrid(
        &abstracted,
        &rules,
        policy,
        &model,
        &PenaltyConfig::default(),
        StageOrder::RulesThenPm,
    )?;

    let after = validate(&result.corrected, &model)?;
    println!(
        "after repair:  {}/{} transitions invalid, penalty {:.3}",
        after.invalid.len(),
        after.total_transitions,
        result.total_penalty
    );

    let eval = evaluate(&result.corrected, &truth, &model)?;
    println!(
        "vs ground truth: precision {:.3}, recall {:.3}, F1 {:.3}\n",
        eval.precision, eval.recall, eval.f1
    );

    print!("{}", render_text(&change_report(&abstracted, &result)?));
    Ok(())
}
