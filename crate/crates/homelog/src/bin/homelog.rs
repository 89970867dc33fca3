//! Command-line interface over the homelog library: abstraction,
//! validation, repair, rule derivation, simulation, error injection and
//! evaluation, all file-based and deterministic given their inputs.
//!
//! Exit codes: 0 success/clean, 1 validation failures found, 2 input or
//! parse error, 3 infeasible operation.

use std::collections::BTreeMap;
use std::io::{BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use homelog::abstraction::{abstract_log, AbstractionConfig};
use homelog::conformance::validate;
use homelog::io;
use homelog::model::{EventLog, LogOrigin, TransitionModel};
use homelog::repair::{repair, PenaltyConfig, RepairResult};
use homelog::report::{change_report, render_csv, render_text};
use homelog::rules::{
    derive_rules, flag, hybrid, resolve, DurationRule, Flag, ResolutionAction, ResolutionPolicy,
    RuleMethod, StageOrder,
};
use homelog::simulate::{evaluate, inject, simulate_trajectory, ErrorSpec, SimConfig};
use homelog::Error;

#[derive(Parser)]
#[command(name = "homelog", version, about = "Location event log abstraction, validation and repair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// TOML configuration file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct PenaltyArgs {
    /// Cost of inserting one event
    #[arg(long)]
    insert_cost: Option<f64>,
    /// Base cost of removing an event
    #[arg(long)]
    remove_base: Option<f64>,
    /// Additional removal cost per unit of support
    #[arg(long)]
    remove_per_support: Option<f64>,
    /// Bound on consecutive insertions (default: number of model areas)
    #[arg(long)]
    max_consecutive_insertions: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct ErrorArgs {
    /// Probability each reading is dropped
    #[arg(long)]
    p_miss: Option<f64>,
    /// Probability of a spurious adjacent-area reading after a true one
    #[arg(long)]
    p_noise: Option<f64>,
    /// Maximum absolute timestamp perturbation in seconds
    #[arg(long)]
    jitter: Option<u32>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RepairMode {
    Pm,
    Rules,
    Hybrid,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Drop,
    Connector,
    FlagOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw sensor CSV into a location event CSV
    Abstract {
        #[arg(long)]
        sensors: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Close the final open event at the log's last timestamp
        #[arg(long)]
        close_open_tail: bool,
    },
    /// Check an event log against a transition model; exits 1 when invalid
    /// transitions are found
    Validate {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Derive per-location duration rules from an event log
    DeriveRules {
        #[arg(long)]
        events: PathBuf,
        /// Comma-separated location=method pairs, e.g.
        /// `Corridor=mean2std,Kitchen=pct2.5`
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repair an event log; writes the corrected log, the edit list and a
    /// change report
    Repair {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: RepairMode,
        /// Duration rules file (rules and hybrid modes)
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Resolution for flagged events (rules and hybrid modes)
        #[arg(long, value_enum, default_value = "connector")]
        policy: PolicyArg,
        /// Confirm each flagged event on the terminal before resolving it
        #[arg(long)]
        interactive: bool,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        penalty: PenaltyArgs,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a seeded ground-truth trajectory and clean sensor log
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated horizon in seconds
        #[arg(long)]
        horizon: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Inject missing-reading and adjacent-noise errors into a sensor log
    Inject {
        #[arg(long)]
        sensors: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        errors: ErrorArgs,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score a corrected event log against a ground-truth log
    Evaluate {
        #[arg(long)]
        corrected: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// End-to-end seeded run: simulate, inject, abstract, repair, evaluate
    Pipeline {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, value_enum, default_value = "hybrid")]
        mode: RepairMode,
        /// Duration rules file for the hybrid rules stage
        #[arg(long)]
        rules: Option<PathBuf>,
        #[command(flatten)]
        errors: ErrorArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InfeasibleRepair | Error::DisconnectedModel { .. } => 3,
        _ => 2,
    }
}

fn load_config(args: &ConfigArgs) -> Result<io::RunConfig, Error> {
    match &args.config {
        Some(path) => io::read_run_config(path),
        None => Ok(io::RunConfig::default()),
    }
}

fn penalty_config(file: &io::RunConfig, flags: &PenaltyArgs) -> PenaltyConfig {
    let defaults = PenaltyConfig::default();
    PenaltyConfig {
        insert_cost: flags
            .insert_cost
            .or(file.penalty.insert_cost)
            .unwrap_or(defaults.insert_cost),
        remove_base: flags
            .remove_base
            .or(file.penalty.remove_base)
            .unwrap_or(defaults.remove_base),
        remove_per_support: flags
            .remove_per_support
            .or(file.penalty.remove_per_support)
            .unwrap_or(defaults.remove_per_support),
        max_consecutive_insertions: flags
            .max_consecutive_insertions
            .or(file.penalty.max_consecutive_insertions),
    }
}

fn sim_config(file: &io::RunConfig, seed: Option<u64>, horizon: Option<u64>) -> Result<SimConfig, Error> {
    let section = &file.simulate;
    let mut cfg = SimConfig::new(seed.or(section.seed).unwrap_or(0));
    if let Some(start) = &section.start {
        cfg.start = io::parse_timestamp(start)
            .ok_or_else(|| Error::Config(format!("invalid simulate.start `{start}`")))?;
    }
    if let Some(h) = horizon.or(section.horizon_secs) {
        cfg.horizon_secs = h;
    }
    if let Some(p) = section.pir_period_secs {
        cfg.pir_period_secs = p;
    }
    if let Some(d) = &section.default_dwell {
        cfg.default_dwell = homelog::simulate::DwellParams {
            median_secs: d.median_secs,
            sigma: d.sigma,
        };
    }
    for (loc, d) in &section.dwell {
        cfg.dwell.insert(
            loc.clone(),
            homelog::simulate::DwellParams {
                median_secs: d.median_secs,
                sigma: d.sigma,
            },
        );
    }
    Ok(cfg)
}

fn error_spec(file: &io::RunConfig, flags: &ErrorArgs) -> ErrorSpec {
    let defaults = ErrorSpec::default();
    ErrorSpec {
        p_miss: flags.p_miss.or(file.errors.p_miss).unwrap_or(defaults.p_miss),
        p_noise: flags.p_noise.or(file.errors.p_noise).unwrap_or(defaults.p_noise),
        jitter_secs: flags.jitter.or(file.errors.jitter_secs).unwrap_or(defaults.jitter_secs),
    }
}

fn policy_from(file: &io::RunConfig, flag: PolicyArg, interactive: bool) -> Result<ResolutionPolicy, Error> {
    let action = match file.policy.action.as_deref() {
        Some("drop") => ResolutionAction::Drop,
        Some("connector") => ResolutionAction::RelabelToConnector,
        Some("flag-only") => ResolutionAction::FlagOnly,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown policy action `{other}` (expected drop, connector or flag-only)"
            )))
        }
        None => match flag {
            PolicyArg::Drop => ResolutionAction::Drop,
            PolicyArg::Connector => ResolutionAction::RelabelToConnector,
            PolicyArg::FlagOnly => ResolutionAction::FlagOnly,
        },
    };
    Ok(ResolutionPolicy {
        action,
        interactive: interactive || file.policy.interactive.unwrap_or(false),
    })
}

fn write_file(path: &Path, content: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Per-flag confirmation on the terminal; without one, fall back to
/// reporting only.
fn confirm_flags(log: &EventLog, flags: Vec<Flag>) -> (Vec<Flag>, bool) {
    if !std::io::stdin().is_terminal() {
        eprintln!("warning: interactive mode without a terminal; falling back to flag-only");
        return (flags, false);
    }
    let stdin = std::io::stdin();
    let mut kept = Vec::new();
    for f in flags {
        let e = &log.events[f.index];
        eprint!(
            "event {} `{}` [{} .. {}] violates {:?}; resolve it? [y/N] ",
            f.index,
            e.location,
            io::format_timestamp(e.start),
            io::format_timestamp(e.end),
            f.bound
        );
        std::io::stderr().flush().ok();
        let mut answer = String::new();
        stdin.lock().read_line(&mut answer).ok();
        if answer.trim().eq_ignore_ascii_case("y") {
            kept.push(f);
        }
    }
    (kept, true)
}

fn run_repair_stage(
    log: &EventLog,
    model: &TransitionModel,
    mode: RepairMode,
    rules: &[DurationRule],
    mut policy: ResolutionPolicy,
    cfg: &PenaltyConfig,
) -> Result<RepairResult, Error> {
    let flags = flag(log, rules);
    let flags = if policy.interactive && mode != RepairMode::Pm {
        let (confirmed, tty) = confirm_flags(log, flags);
        if !tty {
            policy.action = ResolutionAction::FlagOnly;
        }
        confirmed
    } else {
        flags
    };
    match mode {
        RepairMode::Pm => repair(log, model, cfg),
        RepairMode::Rules => resolve(log, &flags, policy, model, cfg),
        RepairMode::Hybrid => {
            // flags were possibly filtered interactively; resolve directly,
            // then run the PM stage, mirroring the hybrid stage order
            let first = resolve(log, &flags, policy, model, cfg)?;
            let second = repair(&first.corrected, model, cfg)?;
            let mut edits = first.edits;
            edits.extend(second.edits);
            Ok(RepairResult {
                corrected: second.corrected,
                edits,
                total_penalty: first.total_penalty + second.total_penalty,
            })
        }
    }
}

fn parse_rule_spec(spec: &str) -> Result<BTreeMap<String, RuleMethod>, Error> {
    let mut map = BTreeMap::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (loc, method) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected location=method, found `{part}`")))?;
        let method = RuleMethod::parse(method)
            .ok_or_else(|| Error::Config(format!("unknown method `{method}`")))?;
        map.insert(loc.to_string(), method);
    }
    Ok(map)
}

fn print_eval(report: &homelog::simulate::EvalReport) {
    println!("invalid_rate: {:.6}", report.invalid_rate);
    println!(
        "matched: {} / corrected {} / truth {}",
        report.matched, report.corrected_total, report.truth_total
    );
    println!("precision: {:.6}", report.precision);
    println!("recall: {:.6}", report.recall);
    println!("f1: {:.6}", report.f1);
    for (loc, c) in &report.confusion {
        println!(
            "location {loc}: matched {} spurious {} missed {}",
            c.matched, c.spurious, c.missed
        );
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Abstract {
            sensors,
            meta,
            out,
            close_open_tail,
        } => {
            let log = io::read_sensor_log(&sensors, &meta)?;
            let outcome = abstract_log(&log, &AbstractionConfig { close_open_tail })?;
            write_file(&out, &io::write_event_csv(&outcome.log))?;
            eprintln!(
                "abstracted {} readings into {} events ({} zero-values ignored)",
                log.readings().len(),
                outcome.log.len(),
                outcome.ignored_zero_values
            );
            Ok(0)
        }
        Command::Validate { events, model } => {
            let log = io::read_event_csv(&events, LogOrigin::Abstracted)?;
            let model = io::read_model(&model)?;
            let report = validate(&log, &model)?;
            println!(
                "{}/{} transitions invalid ({:.2}%)",
                report.invalid.len(),
                report.total_transitions,
                report.invalid_rate() * 100.0
            );
            for inv in &report.invalid {
                println!("  #{}: {} -> {}", inv.index, inv.from, inv.to);
            }
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::DeriveRules { events, spec, out } => {
            let log = io::read_event_csv(&events, LogOrigin::Abstracted)?;
            let spec = parse_rule_spec(&spec)?;
            let derived = derive_rules(&log, &spec);
            for loc in &derived.skipped {
                eprintln!("warning: no rule derived for `{loc}` (absent or too few events)");
            }
            write_file(&out, &io::write_rules(&derived.rules))?;
            eprintln!("wrote {} rules", derived.rules.len());
            Ok(0)
        }
        Command::Repair {
            events,
            model,
            mode,
            rules,
            policy,
            interactive,
            out_dir,
            penalty,
            config,
        } => {
            let file_cfg = load_config(&config)?;
            let log = io::read_event_csv(&events, LogOrigin::Abstracted)?;
            let model = io::read_model(&model)?;
            let cfg = penalty_config(&file_cfg, &penalty);
            let rules = match &rules {
                Some(path) => io::read_rules(path)?,
                None if mode != RepairMode::Pm => {
                    return Err(Error::Config(
                        "rules and hybrid modes need --rules <file>".into(),
                    ))
                }
                None => Vec::new(),
            };
            let policy = policy_from(&file_cfg, policy, interactive)?;
            let result = run_repair_stage(&log, &model, mode, &rules, policy, &cfg)?;
            let report = change_report(&log, &result)?;
            write_file(&out_dir.join("corrected.csv"), &io::write_event_csv(&result.corrected))?;
            write_file(&out_dir.join("edits.csv"), &io::write_edits_csv(&result.edits))?;
            write_file(&out_dir.join("report.txt"), &render_text(&report))?;
            write_file(&out_dir.join("report.csv"), &render_csv(&report))?;
            print!("{}", render_text(&report));
            println!("total penalty: {:.3}", result.total_penalty);
            Ok(0)
        }
        Command::Simulate {
            model,
            out_dir,
            seed,
            horizon,
            config,
        } => {
            let file_cfg = load_config(&config)?;
            let model = io::read_model(&model)?;
            let cfg = sim_config(&file_cfg, seed, horizon)?;
            let (truth, sensors) = simulate_trajectory(&model, &cfg)?;
            write_file(&out_dir.join("truth.csv"), &io::write_event_csv(&truth))?;
            write_file(
                &out_dir.join("sensors.csv"),
                &io::write_sensor_csv(sensors.readings()),
            )?;
            let metas: Vec<_> = sensors.meta().values().cloned().collect();
            write_file(&out_dir.join("meta.csv"), &io::write_meta_csv(&metas))?;
            eprintln!(
                "simulated {} events, {} readings",
                truth.len(),
                sensors.readings().len()
            );
            Ok(0)
        }
        Command::Inject {
            sensors,
            meta,
            model,
            out,
            seed,
            errors,
            config,
        } => {
            let file_cfg = load_config(&config)?;
            let log = io::read_sensor_log(&sensors, &meta)?;
            let model = io::read_model(&model)?;
            let spec = error_spec(&file_cfg, &errors);
            let seed = seed.or(file_cfg.simulate.seed).unwrap_or(0);
            let injected = inject(&log, &model, &spec, seed)?;
            write_file(&out, &io::write_sensor_csv(injected.readings()))?;
            eprintln!(
                "injected: {} readings in, {} out",
                log.readings().len(),
                injected.readings().len()
            );
            Ok(0)
        }
        Command::Evaluate {
            corrected,
            truth,
            model,
        } => {
            let corrected = io::read_event_csv(&corrected, LogOrigin::Repaired)?;
            let truth = io::read_event_csv(&truth, LogOrigin::Simulated)?;
            let model = io::read_model(&model)?;
            let report = evaluate(&corrected, &truth, &model)?;
            print_eval(&report);
            Ok(0)
        }
        Command::Pipeline {
            model,
            out_dir,
            seed,
            horizon,
            mode,
            rules,
            errors,
            penalty,
            config,
        } => {
            let file_cfg = load_config(&config)?;
            let model = io::read_model(&model)?;
            let sim_cfg = sim_config(&file_cfg, seed, horizon)?;
            let spec = error_spec(&file_cfg, &errors);
            let cfg = penalty_config(&file_cfg, &penalty);
            let rules = match &rules {
                Some(path) => io::read_rules(path)?,
                None => Vec::new(),
            };
            let policy = ResolutionPolicy {
                action: ResolutionAction::RelabelToConnector,
                interactive: false,
            };

            let (truth, clean) = simulate_trajectory(&model, &sim_cfg)?;
            let noisy = inject(&clean, &model, &spec, sim_cfg.seed.wrapping_add(1))?;
            let abstracted = abstract_log(&noisy, &AbstractionConfig::default())?.log;
            let before = validate(&abstracted, &model)?;
            let result = match mode {
                RepairMode::Pm => repair(&abstracted, &model, &cfg)?,
                RepairMode::Rules => {
                    let flags = flag(&abstracted, &rules);
                    resolve(&abstracted, &flags, policy, &model, &cfg)?
                }
                RepairMode::Hybrid => hybrid(
                    &abstracted,
                    &rules,
                    policy,
                    &model,
                    &cfg,
                    StageOrder::RulesThenPm,
                )?,
            };
            let eval = evaluate(&result.corrected, &truth, &model)?;

            write_file(&out_dir.join("truth.csv"), &io::write_event_csv(&truth))?;
            write_file(&out_dir.join("sensors.csv"), &io::write_sensor_csv(noisy.readings()))?;
            write_file(&out_dir.join("abstracted.csv"), &io::write_event_csv(&abstracted))?;
            write_file(
                &out_dir.join("corrected.csv"),
                &io::write_event_csv(&result.corrected),
            )?;
            write_file(&out_dir.join("edits.csv"), &io::write_edits_csv(&result.edits))?;
            let change = change_report(&abstracted, &result)?;
            write_file(&out_dir.join("report.txt"), &render_text(&change))?;
            write_file(&out_dir.join("report.csv"), &render_csv(&change))?;

            println!(
                "uncorrected invalid_rate: {:.6} ({}/{})",
                before.invalid_rate(),
                before.invalid.len(),
                before.total_transitions
            );
            print_eval(&eval);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
