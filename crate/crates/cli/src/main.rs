//! Command-line front end: single episodes, seeded benchmarks and trace
//! replay.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 when
//! running the simulation fails.

mod replay;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crowdnav::env::run_episode;
use crowdnav::{run_benchmark, DwaParams, PolicySpec, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "crowdnav", version, about = "Deterministic 2D crowd navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one episode and write its JSONL trace.
    Run(RunArgs),
    /// Evaluate a policy over seeded trials and report SR/CR/TR/NT.
    Bench(BenchArgs),
    /// Print a trace step by step, or render it as SVG.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// zero, straight, dwa or orca.
    #[arg(long, default_value = "dwa")]
    policy: String,
    /// Scenario config JSON; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// DWA parameter JSON, merged over the defaults.
    #[arg(long)]
    dwa_params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Trial `i` runs with seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; all cores when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Metrics JSON destination; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial outcomes as JSONL.
    #[arg(long)]
    outcomes: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Write an SVG of the whole episode here instead of the text dump.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Replay(args) => cmd_replay(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Runtime(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}

fn load_setup(args: &PolicyArgs) -> Result<(ScenarioConfig, PolicySpec), CliError> {
    let config = match &args.config {
        Some(path) => ScenarioConfig::load(path).map_err(usage)?,
        None => ScenarioConfig::default(),
    };
    let mut spec: PolicySpec = args.policy.parse().map_err(usage)?;
    if let Some(path) = &args.dwa_params {
        let PolicySpec::Dwa(_) = spec else {
            return Err(usage("--dwa-params only applies to --policy dwa"));
        };
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let params: DwaParams =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        params.validate().map_err(usage)?;
        spec = PolicySpec::Dwa(params);
    }
    Ok((config, spec))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let (config, spec) = load_setup(&args.policy)?;
    let mut policy = spec.build();
    let trace = run_episode(&config, args.seed, policy.as_mut()).map_err(runtime)?;
    let mut out = create(&args.out)?;
    trace
        .write_jsonl(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| runtime(format!("{}: {e}", args.out.display())))?;
    println!(
        "{} seed {}: {} after {} steps ({:.1} s)",
        spec,
        args.seed,
        trace.terminal(),
        trace.steps(),
        trace.summary.nav_time_s
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let (config, spec) = load_setup(&args.policy)?;
    let trials = usize::try_from(args.trials).map_err(usage)?;
    let threads = args.threads.map(|t| t as usize);
    let report = run_benchmark(&config, &spec, trials, args.seed, threads).map_err(usage)?;

    let json = report.to_json();
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            writeln!(out, "{json}")
                .and_then(|_| out.flush())
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            print!("{}", report.table());
        }
        None => {
            println!("{json}");
            eprint!("{}", report.table());
        }
    }
    if let Some(path) = &args.outcomes {
        let mut out = create(path)?;
        for o in &report.per_seed_outcomes {
            serde_json::to_writer(&mut out, o).map_err(runtime)?;
            writeln!(out).map_err(runtime)?;
        }
        out.flush().map_err(runtime)?;
    }
    let failed = report.per_seed_outcomes.iter().filter(|o| o.status.is_failure()).count();
    if failed > 0 {
        return Err(runtime(format!("{failed} trial(s) failed; see per-trial outcomes")));
    }
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.trace).map_err(|e| usage(format!("{}: {e}", args.trace.display())))?;
    let (records, summary) =
        crowdnav::EpisodeTrace::read_jsonl(&text).map_err(|e| usage(format!("{}: {e}", args.trace.display())))?;
    match &args.svg {
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(replay::render_svg(&records, &summary).as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        }
        None => print!("{}", replay::render_text(&records, &summary)),
    }
    Ok(())
}
