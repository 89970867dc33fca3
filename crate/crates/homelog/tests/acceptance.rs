//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line (run with `--nocapture` to see them on success).
//!
//! All tolerances are pinned here, not configurable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use homelog::abstraction::{abstract_log, AbstractionConfig};
use homelog::conformance::validate;
use homelog::io;
use homelog::model::{EventLog, LocationEvent, LogOrigin, TransitionModel};
use homelog::repair::{brute_force_repair, repair, EditKind, EditOp, PenaltyConfig, RepairResult};
use homelog::report::{change_report, correction_pct, duration_pct, render_text, SECS_PER_DAY};
use homelog::rules::{
    derive_rules, hybrid, DurationRule, ResolutionAction, ResolutionPolicy, RuleMethod, StageOrder,
};
use homelog::simulate::{evaluate, inject, simulate_trajectory, ErrorSpec, SimConfig};

fn floor_plan() -> TransitionModel {
    io::read_model(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/floor_plan.txt"),
    )
    .unwrap()
}

fn ts(secs: i64) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
        + chrono::Duration::seconds(secs)
}

fn min90_rules(model: &TransitionModel) -> Vec<DurationRule> {
    model
        .areas()
        .map(|area| DurationRule {
            location: area.to_string(),
            min_secs: Some(90),
            max_secs: None,
            method: RuleMethod::Manual,
        })
        .collect()
}

fn connector_policy() -> ResolutionPolicy {
    ResolutionPolicy {
        action: ResolutionAction::RelabelToConnector,
        interactive: false,
    }
}

/// Random connected model plus a random trace over its areas, mirroring
/// the bounds of the exhaustive oracle.
fn random_instance(seed: u64, max_areas: usize, max_events: usize) -> (EventLog, TransitionModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = ["A", "B", "C", "D", "E"];
    let areas = rng.gen_range(2..=max_areas.min(labels.len()));
    let mut m = TransitionModel::new();
    for i in 1..areas {
        let j = rng.gen_range(0..i);
        m.add_edge(labels[i], labels[j]).unwrap();
    }
    for _ in 0..rng.gen_range(0..areas) {
        let a = rng.gen_range(0..areas);
        let b = rng.gen_range(0..areas);
        if a != b {
            m.add_edge(labels[a], labels[b]).unwrap();
        }
    }
    let len = rng.gen_range(1..=max_events);
    let mut events = Vec::new();
    for i in 0..len {
        let start = 60 * i as i64;
        events.push(LocationEvent::new(
            labels[rng.gen_range(0..areas)],
            ts(start),
            ts(start + 60),
            rng.gen_range(1..5),
        ));
    }
    (EventLog::new(events, LogOrigin::Abstracted), m)
}

#[test]
fn criterion_1_repair_matches_exhaustive_oracle() {
    let cfg = PenaltyConfig::default();
    let started = Instant::now();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 200 {
        let (log, model) = random_instance(seed, 5, 8);
        seed += 1;
        let fast = repair(&log, &model, &cfg).unwrap();
        // the oracle is bounded at 5 edits; skip the rare instance whose
        // optimum needs more, drawing a replacement seed instead
        if fast.edits.iter().filter(|e| e.kind != EditKind::Fuse).count() > 5 {
            continue;
        }
        let slow = brute_force_repair(&log, &model, &cfg, 5).unwrap();
        assert_eq!(
            fast.total_penalty, slow.total_penalty,
            "instance seed {}: search penalty {} != oracle penalty {}",
            seed - 1,
            fast.total_penalty,
            slow.total_penalty
        );
        checked += 1;
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "200 oracle comparisons took {elapsed:?}, limit is 10 s"
    );
    println!("criterion 1 (repair optimality, 200 instances in {elapsed:?}): PASS");
}

#[test]
fn criterion_2_corrected_logs_are_always_valid() {
    let model = floor_plan();
    let cfg = PenaltyConfig::default();
    for seed in 0..100u64 {
        let mut sim = SimConfig::new(seed);
        sim.horizon_secs = 86_400;
        let (_truth, clean) = simulate_trajectory(&model, &sim).unwrap();
        let noisy = inject(&clean, &model, &ErrorSpec::default(), seed.wrapping_add(1)).unwrap();
        let abstracted = abstract_log(&noisy, &AbstractionConfig::default()).unwrap().log;
        let result = repair(&abstracted, &model, &cfg).unwrap();
        let report = validate(&result.corrected, &model).unwrap();
        assert_eq!(
            report.invalid.len(),
            0,
            "seed {seed}: corrected log still has invalid transitions"
        );
    }
    println!("criterion 2 (validity guarantee, 100 pipeline runs): PASS");
}

#[test]
fn criterion_3_per_location_percentage_convention() {
    let rows = [
        (1653usize, 10usize, "0.605"),
        (1369, 86, "6.282"),
        (2375, 133, "5.600"),
        (233, 17, "7.296"),
        (3179, 158, "4.970"),
        (2842, 92, "3.237"),
        (716, 4, "0.559"),
        (12367, 398, "3.218"),
    ];
    for (after, corrections, want) in rows {
        assert_eq!(
            format!("{:.3}", correction_pct(corrections, after)),
            want,
            "{corrections}/{after}"
        );
    }
    println!("criterion 3 (per-location percentage convention, 8 rows): PASS");
}

#[test]
fn criterion_4_duration_percentage_convention() {
    assert_eq!(format!("{:.3}", duration_pct(138, SECS_PER_DAY)), "0.160");
    assert_eq!(format!("{:.3}", duration_pct(1655, SECS_PER_DAY)), "1.916");

    // 147 calendar days elapse 146 whole days; a change total of 20141 s
    // over that span prints as 0.160% and averages 138 s (00:02:18) per day
    let before = EventLog::new(
        vec![
            LocationEvent::new("A", ts(0), ts(10), 1),
            LocationEvent::new("B", ts(10), ts(10 + 20_141), 1),
            LocationEvent::new("A", ts(10 + 20_141), ts(146 * SECS_PER_DAY), 100),
        ],
        LogOrigin::Abstracted,
    );
    let result = RepairResult {
        corrected: EventLog::new(
            vec![before.events[0].clone(), before.events[2].clone()],
            LogOrigin::Repaired,
        ),
        edits: vec![EditOp {
            kind: EditKind::Remove,
            position: 1,
            location: "B".to_string(),
            cost: 1.1,
        }],
        total_penalty: 1.1,
    };
    let report = change_report(&before, &result).unwrap();
    assert_eq!(report.horizon_secs, 146 * SECS_PER_DAY);
    assert_eq!(report.total_changed_secs, 20_141);
    assert_eq!(format!("{:.3}", report.total_changed_pct), "0.160");
    let text = render_text(&report);
    assert!(text.contains("daily avg 00:02:18 (0.160%)"), "{text}");
    assert!(text.contains("total 05:35:41 (0.160%)"), "{text}");
    println!("criterion 4 (duration percentage convention): PASS");
}

#[test]
fn criterion_5_thresholds_match_straight_line_oracle() {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=60);
        let durations: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5000)).collect();

        let mut events = Vec::new();
        let mut t = 0i64;
        for &d in &durations {
            events.push(LocationEvent::new("Room", ts(t), ts(t + d), 1));
            t += d;
        }
        let log = EventLog::new(events, LogOrigin::Abstracted);

        // straight-line mean + 2 * population sigma
        let mean = durations.iter().sum::<i64>() as f64 / n as f64;
        let var = durations
            .iter()
            .map(|&d| (d as f64 - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        let expect_max = (mean + 2.0 * var.sqrt()).floor() as i64;

        // straight-line nearest-rank percentiles, 1-indexed ceil(p * n)
        let mut sorted = durations.clone();
        sorted.sort_unstable();
        let rank = |p: f64| {
            let r = (p * n as f64).ceil() as usize;
            sorted[r.clamp(1, n) - 1]
        };
        let (expect_lo, expect_hi) = (rank(0.025), rank(0.975));

        let mut spec = BTreeMap::new();
        spec.insert("Room".to_string(), RuleMethod::MeanPlus2Std);
        let mean_rule = &derive_rules(&log, &spec).rules[0];
        assert!(mean_rule.min_secs.is_none());
        assert!(
            (mean_rule.max_secs.unwrap() - expect_max).abs() <= 1,
            "seed {seed}: mean2std {} vs oracle {expect_max}",
            mean_rule.max_secs.unwrap()
        );

        spec.insert("Room".to_string(), RuleMethod::TwoSided2_5Pct);
        let pct_rule = &derive_rules(&log, &spec).rules[0];
        assert!(
            (pct_rule.min_secs.unwrap() - expect_lo).abs() <= 1
                && (pct_rule.max_secs.unwrap() - expect_hi).abs() <= 1,
            "seed {seed}: percentiles {:?}/{:?} vs oracle {expect_lo}/{expect_hi}",
            pct_rule.min_secs,
            pct_rule.max_secs
        );
    }
    println!("criterion 5 (threshold derivation vs straight-line oracle, 50 samples): PASS");
}

#[test]
fn criterion_6_hybrid_repair_efficacy() {
    let model = floor_plan();
    let cfg = PenaltyConfig::default();
    let rules = min90_rules(&model);
    let mut invalid_reduced = 0;
    let mut f1_kept = 0;
    for seed in 0..100u64 {
        let mut sim = SimConfig::new(seed);
        sim.horizon_secs = 7 * 86_400;
        let (truth, clean) = simulate_trajectory(&model, &sim).unwrap();
        let spec = ErrorSpec {
            p_miss: 0.05,
            p_noise: 0.05,
            jitter_secs: 5,
        };
        let noisy = inject(&clean, &model, &spec, seed.wrapping_add(1)).unwrap();
        let abstracted = abstract_log(&noisy, &AbstractionConfig::default()).unwrap().log;

        let before = validate(&abstracted, &model).unwrap();
        let base_eval = evaluate(&abstracted, &truth, &model).unwrap();

        let result = hybrid(
            &abstracted,
            &rules,
            connector_policy(),
            &model,
            &cfg,
            StageOrder::RulesThenPm,
        )
        .unwrap();
        let after = validate(&result.corrected, &model).unwrap();
        let eval = evaluate(&result.corrected, &truth, &model).unwrap();

        if before.invalid_rate() > 0.0 && after.invalid_rate() < before.invalid_rate() {
            invalid_reduced += 1;
        }
        if eval.f1 >= base_eval.f1 {
            f1_kept += 1;
        }
    }
    assert!(
        invalid_reduced >= 95,
        "invalid rate strictly reduced on only {invalid_reduced}/100 seeds"
    );
    assert!(f1_kept >= 90, "F1 non-decreasing on only {f1_kept}/100 seeds");
    println!(
        "criterion 6 (hybrid efficacy: invalid rate reduced {invalid_reduced}/100, F1 kept {f1_kept}/100): PASS"
    );
}

#[test]
fn criterion_7_cli_outputs_are_byte_identical_across_reruns() {
    let bin = env!("CARGO_BIN_EXE_homelog");
    let model = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/floor_plan.txt");
    let tmp = tempfile::tempdir().unwrap();

    let run = |out: &Path| {
        let output = std::process::Command::new(bin)
            .args([
                "pipeline",
                "--model",
                model.to_str().unwrap(),
                "--seed",
                "11",
                "--horizon",
                "172800",
                "--out-dir",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        output.stdout
    };
    let (dir_a, dir_b) = (tmp.path().join("a"), tmp.path().join("b"));
    let stdout_a = run(&dir_a);
    let stdout_b = run(&dir_b);
    assert_eq!(stdout_a, stdout_b, "pipeline stdout differs between reruns");

    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir_a)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty());
    for file in files {
        let name = file.file_name().unwrap();
        let a = std::fs::read(&file).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between reruns");
    }
    println!("criterion 7 (CLI determinism): PASS");
}

#[test]
fn criterion_8_clean_round_trip_recovers_ground_truth() {
    let model = floor_plan();
    for seed in 0..20u64 {
        let mut sim = SimConfig::new(seed);
        sim.horizon_secs = 86_400;
        let (truth, clean) = simulate_trajectory(&model, &sim).unwrap();
        let outcome = abstract_log(&clean, &AbstractionConfig { close_open_tail: true }).unwrap();
        let got = &outcome.log.events;
        assert_eq!(got.len(), truth.events.len(), "seed {seed}: event count");
        let period = sim.pir_period_secs as i64;
        for (g, t) in got.iter().zip(&truth.events) {
            assert_eq!(g.location, t.location, "seed {seed}");
            assert!(
                (g.start - t.start).num_seconds().abs() <= period
                    && (g.end - t.end).num_seconds().abs() <= period,
                "seed {seed}: boundary drift beyond one sensor period"
            );
        }
    }
    println!("criterion 8 (clean simulate/abstract round-trip, 20 seeds): PASS");
}
