//! `protolife`: runs reactor experiments, ARMS sweeps and replicator ODEs,
//! and analyzes recorded event logs.

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use protolife_core::arms::{sweep, ArmsError, SweepParams};
use protolife_core::fmt::g17;
use protolife_core::info::entropy_series;
use protolife_core::lambda::{parse, ReductionBudget};
use protolife_core::organization::{
    build_network, classify_organizations, detect_hypercycles, detect_replicators, CycleLimits, DetectError,
    EquivalenceSpec, FunctionalProbe, OrganizationReport, ReplicatorReport,
};
use protolife_core::reactor::{run, LogError, RunError, RunSummary};
use protolife_core::replicator::{write_trajectory_csv, OdeSpec};
use protolife_core::tile::Symmetry;
use protolife_core::{EventLog, ReactorConfig, DEFAULT_SEED};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "protolife", version, about = "Artificial chemistry experiments")]
struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a reactor experiment.
    Run { config: PathBuf },
    /// Sweeps random ARMS systems over the order parameter.
    Sweep { config: PathBuf },
    /// Integrates replicator dynamics.
    Ode {
        config: PathBuf,
        /// Trajectory CSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finds organizations, replicators and hypercycles in an event log.
    Analyze {
        log: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        eq: Equivalence,
        #[arg(long, default_value_t = 8)]
        max_period: usize,
        #[arg(long)]
        report: PathBuf,
        /// Population time series of the run, to derive an entropy series.
        #[arg(long)]
        timeseries: Option<PathBuf>,
        /// Where to write the entropy series; next to the report by default.
        #[arg(long)]
        entropy_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Equivalence {
    Exact,
    Tileshape,
    Functional,
}

/// Exit 1 for bad input, exit 2 for failures while running.
enum Failure {
    Input(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(m) => Failure::Input(m),
            RunError::Io(e) => Failure::Runtime(e.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config, cli.seed),
        Command::Sweep { config } => cmd_sweep(&config, cli.seed),
        Command::Ode { config, out } => cmd_ode(&config, out.as_deref()),
        Command::Analyze {
            log,
            eq,
            max_period,
            report,
            timeseries,
            entropy_out,
        } => cmd_analyze(&AnalyzeArgs {
            log,
            eq,
            max_period,
            report,
            timeseries,
            entropy_out,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Strict JSON; errors name the offending key path.
fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Runtime)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        if key == "." {
            Failure::Input(e.into_inner().to_string())
        } else {
            Failure::Input(format!("{key}: {}", e.into_inner()))
        }
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).context("serializing report")?;
    writeln!(out)
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    reactor: ReactorConfig,
    outputs: Outputs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Outputs {
    event_log: PathBuf,
    timeseries: PathBuf,
    #[serde(default)]
    report: Option<PathBuf>,
}

impl Outputs {
    fn validate(&self) -> Outcome {
        let mut seen: Vec<(&str, &Path)> = vec![("event_log", &self.event_log)];
        let rest = [("timeseries", Some(&self.timeseries)), ("report", self.report.as_ref())];
        for (key, path) in rest {
            let Some(path) = path else { continue };
            if let Some((other, _)) = seen.iter().find(|(_, p)| *p == path.as_path()) {
                return Err(Failure::Input(format!("outputs.{key}: same path as outputs.{other}")));
            }
            seen.push((key, path));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a ExperimentConfig,
    summary: &'a RunSummary,
}

fn cmd_run(path: &Path, seed: Option<u64>) -> Outcome {
    let mut config: ExperimentConfig = read_config(path)?;
    if let Some(seed) = seed {
        config.reactor.seed = seed;
    }
    config.outputs.validate()?;
    config.reactor.validate()?;
    config.reactor = config.reactor.effective();

    let mut events = create(&config.outputs.event_log)?;
    let mut series = create(&config.outputs.timeseries)?;
    let summary = run(&config.reactor, &mut events, &mut series)?;
    events.flush().context("writing event log")?;
    series.flush().context("writing time series")?;
    if let Some(report) = &config.outputs.report {
        write_json(
            report,
            &RunReport {
                config: &config,
                summary: &summary,
            },
        )?;
    }

    println!("steps {}", summary.steps);
    println!("events {}", summary.events);
    println!("final_population {}", summary.final_total);
    println!("final_entropy_bits {}", g17(summary.final_entropy_bits));
    Ok(())
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    #[serde(default = "default_seed")]
    seed: u64,
    grid: Vec<f64>,
    runs_per_point: usize,
    #[serde(default)]
    params: SweepParams,
    output: PathBuf,
}

fn cmd_sweep(path: &Path, seed: Option<u64>) -> Outcome {
    let config: SweepConfig = read_config(path)?;
    if config.grid.is_empty() {
        return Err(Failure::Input("grid: must not be empty".into()));
    }
    if let Some(bad) = config.grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Failure::Input(format!("grid: {bad} is outside [0, 1]")));
    }
    if config.runs_per_point == 0 {
        return Err(Failure::Input("runs_per_point: must be at least 1".into()));
    }
    let rows = sweep(
        seed.unwrap_or(config.seed),
        &config.grid,
        config.runs_per_point,
        &config.params,
    )
    .map_err(|e| match e {
        ArmsError::Config(m) => Failure::Input(format!("params: {m}")),
        other => Failure::Runtime(other.into()),
    })?;

    let mut out = create(&config.output)?;
    let mut text = String::from("target,cycling,terminated,exhausted\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            g17(r.target),
            g17(r.cycling),
            g17(r.terminated),
            g17(r.exhausted)
        ));
    }
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", config.output.display()))?;
    Ok(())
}

fn cmd_ode(path: &Path, out: Option<&Path>) -> Outcome {
    let spec: OdeSpec = read_config(path)?;
    let traj = spec.solve().map_err(|e| Failure::Input(e.to_string()))?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            write_trajectory_csv(&mut w, &traj)
                .and_then(|_| w.flush())
                .with_context(|| format!("writing {}", p.display()))?;
        }
        None => {
            let stdout = io::stdout();
            write_trajectory_csv(stdout.lock(), &traj).context("writing trajectory")?;
        }
    }
    Ok(())
}

struct AnalyzeArgs {
    log: PathBuf,
    eq: Equivalence,
    max_period: usize,
    report: PathBuf,
    timeseries: Option<PathBuf>,
    entropy_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct AnalysisOptions<'a> {
    log: &'a Path,
    eq: Equivalence,
    max_period: usize,
    timeseries: Option<&'a Path>,
}

#[derive(Serialize)]
struct AnalysisReport<'a> {
    config: AnalysisOptions<'a>,
    organizations: OrganizationReport,
    replicators: Vec<ReplicatorReport>,
    hypercycles: Vec<Vec<String>>,
    entropy_series_file: Option<PathBuf>,
}

const PROBES: [&str; 3] = ["λx.x", "λx.λy.x", "λx.λy.y"];

fn equivalence_spec(eq: Equivalence) -> EquivalenceSpec {
    match eq {
        Equivalence::Exact => EquivalenceSpec::Exact,
        Equivalence::Tileshape => EquivalenceSpec::TileShapeOnly {
            symmetry: Symmetry {
                use_rotations: true,
                use_reflections: true,
            },
        },
        Equivalence::Functional => EquivalenceSpec::FunctionalProbe(FunctionalProbe {
            probes: PROBES.iter().map(|p| parse(p).expect("probe terms parse")).collect(),
            budget: ReductionBudget::default(),
        }),
    }
}

fn read_log(path: &Path) -> Result<EventLog, Failure> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    EventLog::read_jsonl(BufReader::new(file)).map_err(|e| match e {
        LogError::Malformed { .. } => Failure::Input(format!("{}: {e}", path.display())),
        LogError::Io(e) => Failure::Runtime(anyhow::Error::new(e).context(format!("reading {}", path.display()))),
    })
}

/// Rows of a `t,species_key,count` time series.
fn read_series(path: &Path) -> Result<Vec<(u64, String, u64)>, Failure> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if headers != vec!["t", "species_key", "count"] {
        return Err(Failure::Input(format!(
            "{}: expected header t,species_key,count",
            path.display()
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Failure::Input(format!("{}: {e}", path.display()))))
        .collect()
}

fn cmd_analyze(args: &AnalyzeArgs) -> Outcome {
    if args.max_period == 0 {
        return Err(Failure::Input("max-period: must be at least 1".into()));
    }
    let log = read_log(&args.log)?;
    let replicators = detect_replicators(&log, &equivalence_spec(args.eq), args.max_period).map_err(|e| match e {
        DetectError::ChemistryMismatch { .. } => Failure::Input(format!("eq: {e}; the log's chemistry does not match")),
        DetectError::MissingInstanceIds { .. } => Failure::Input(format!("{}: {e}", args.log.display())),
    })?;
    let net = build_network(&log);
    let organizations = classify_organizations(&net, &replicators);
    let hypercycles = detect_hypercycles(&net, CycleLimits::default());

    let entropy_series_file = match &args.timeseries {
        Some(ts) => {
            let rows = read_series(ts)?;
            let series = entropy_series(rows.iter().map(|(t, k, c)| (*t, k.as_str(), *c)));
            let out_path = args
                .entropy_out
                .clone()
                .unwrap_or_else(|| args.report.with_extension("entropy.csv"));
            let mut text = String::from("t,H_bits\n");
            for (t, h) in series {
                text.push_str(&format!("{t},{}\n", g17(h)));
            }
            let mut out = create(&out_path)?;
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .with_context(|| format!("writing {}", out_path.display()))?;
            Some(out_path)
        }
        None => None,
    };

    let report = AnalysisReport {
        config: AnalysisOptions {
            log: &args.log,
            eq: args.eq,
            max_period: args.max_period,
            timeseries: args.timeseries.as_deref(),
        },
        organizations,
        replicators,
        hypercycles,
        entropy_series_file,
    };
    write_json(&args.report, &report)
}
