//! Command-line front end. Subcommands: `exact` (finite-size table), `mcmc`
//! (one chain), `predict` (regime + limit law), `sweep` (convergence
//! experiment), `verify` (gate checks). Every parameter can come from flags
//! or a TOML config file (`--config`); on conflict the file wins, and the
//! fully resolved job is echoed as `config.toml` into the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_table, Budget, LogWeightTable};
use crate::harness::{run_experiment, ExperimentConfig};
use crate::predictions::{classify, limit_law, LimitLaw, RegimeClassification, ScheduleSpec};
use crate::sampler::run_chain;
use crate::util::sig12;
use crate::verify::{verify_suite, Level};

#[derive(Parser, Debug)]
#[command(
    name = "blockspin",
    about = "Exact laws, chains, and limit-law checks for bottleneck-coupled spin blocks",
    version
)]
struct Cli {
    /// Worker threads (default: all cores; BLOCKSPIN_THREADS also works).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the exact block-magnetization law at one size.
    Exact(ExactArgs),
    /// Run one Monte Carlo chain and record the trajectory.
    Mcmc(McmcArgs),
    /// Classify a coupling schedule and export its limit law.
    Predict(PredictArgs),
    /// Compare finite-size well masses against the limit law across sizes.
    Sweep(SweepArgs),
    /// Run the verification gate checks.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModelArg {
    TwoBlock,
    Diluted,
    ThreeBlock,
}

impl ModelArg {
    fn key(self) -> &'static str {
        match self {
            ModelArg::TwoBlock => "two_block",
            ModelArg::Diluted => "diluted",
            ModelArg::ThreeBlock => "three_block",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MethodArg {
    Exact,
    Mcmc,
    Auto,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DynamicsArg {
    Glauber,
    Metropolis,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum InitArg {
    Random,
    AllPlus,
    AllMinus,
}

/// Power-law schedule parameters; every piece optional on the command line
/// so a config file can supply the rest.
#[derive(Args, Debug, Clone)]
struct ScheduleArgs {
    /// Model family.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// Coupling prefactor in alpha_N = A * N^-rho.
    #[arg(long = "A")]
    a: Option<f64>,
    /// Coupling decay exponent rho.
    #[arg(long)]
    rho: Option<f64>,
    /// Middle-block prefactor in b_N = floor(B * N^gamma).
    #[arg(long = "B")]
    b: Option<f64>,
    /// Middle-block growth exponent gamma.
    #[arg(long)]
    gamma: Option<f64>,
    /// Retention prefactor in p(N) = min(1, P * N^-pi).
    #[arg(long = "P")]
    p: Option<f64>,
    /// Retention decay exponent pi.
    #[arg(long)]
    pi: Option<f64>,
}

impl ScheduleArgs {
    fn to_table(&self) -> toml::Table {
        let mut t = toml::Table::new();
        if let Some(model) = self.model {
            t.insert("model".into(), toml::Value::String(model.key().into()));
        }
        for (key, value) in [
            ("beta", self.beta),
            ("A", self.a),
            ("rho", self.rho),
            ("B", self.b),
            ("gamma", self.gamma),
            ("P", self.p),
            ("pi", self.pi),
        ] {
            if let Some(v) = value {
                t.insert(key.into(), toml::Value::Float(v));
            }
        }
        t
    }
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// System size.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Dilution-mask seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Table artifact format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output directory for the table and the resolved config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; its values win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McmcArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// System size.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Chain length in sweeps (N proposals each).
    #[arg(long)]
    sweeps: Option<usize>,
    /// Sweeps discarded before recording.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Record every k-th sweep after burn-in.
    #[arg(long)]
    thin: Option<usize>,
    /// Chain seed (also the dilution-mask seed unless mask_seed is set in
    /// the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Proposal dynamics.
    #[arg(long, value_enum)]
    dynamics: Option<DynamicsArg>,
    /// Initial configuration.
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// Trajectory artifact format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output directory for the trajectory and the resolved config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; its values win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Output directory for prediction.json and the resolved config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; its values win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// System sizes, strictly increasing (comma-separated or repeated).
    #[arg(long = "N", value_delimiter = ',', num_args = 1..)]
    n: Vec<usize>,
    /// Well-mass computation method.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Chain length in sweeps for the Monte Carlo path.
    #[arg(long)]
    sweeps: Option<usize>,
    /// Chain/mask seeds (comma-separated or repeated).
    #[arg(long = "seed", value_delimiter = ',', num_args = 1..)]
    seeds: Vec<u64>,
    /// Half-width of the well boxes.
    #[arg(long)]
    wells_eps: Option<f64>,
    /// Output directory for rows.csv, report.json, and plots.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; its values win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// fast caps sizes at 400 spins and chains at 1e5 sweeps.
    #[arg(long, value_enum)]
    level: Option<LevelArg>,
    /// Output directory for report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; its values win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Job resolution: flags -> TOML fragment, overlaid by the config file.
// ---------------------------------------------------------------------------

/// Merge two TOML values; `file` wins on every conflicting leaf.
fn merge_value(flags: toml::Value, file: toml::Value) -> toml::Value {
    match (flags, file) {
        (toml::Value::Table(mut merged), toml::Value::Table(file)) => {
            for (key, file_value) in file {
                let value = match merged.remove(&key) {
                    Some(flag_value) => merge_value(flag_value, file_value),
                    None => file_value,
                };
                merged.insert(key, value);
            }
            toml::Value::Table(merged)
        }
        (_, file) => file,
    }
}

fn resolve_job<T: DeserializeOwned>(flags: toml::Table, config: Option<&Path>) -> Result<T> {
    let merged = match config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let file: toml::Table = text
                .parse()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge_value(toml::Value::Table(flags), toml::Value::Table(file))
        }
        None => toml::Value::Table(flags),
    };
    merged
        .try_into()
        .map_err(|e| Error::Config(e.to_string()))
}

fn insert_opt(t: &mut toml::Table, key: &str, value: Option<toml::Value>) {
    if let Some(v) = value {
        t.insert(key.into(), v);
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn echo_config<T: Serialize>(job: &T, dir: &Path) -> Result<()> {
    let text = toml::to_string_pretty(job)
        .map_err(|e| Error::Config(format!("config serialization failed: {e}")))?;
    write_text(&dir.join("config.toml"), &text)
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

// ---------------------------------------------------------------------------
// Subcommand jobs
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OutputFormat {
    Csv,
    Json,
}

impl Default for OutputFormat {
    fn default() -> Self {
        OutputFormat::Csv
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactJob {
    schedule: ScheduleSpec,
    n: usize,
    #[serde(default)]
    mask_seed: u64,
    #[serde(default)]
    budget: Budget,
    #[serde(default)]
    format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
}

/// Whole-table JSON dump; log-weights are unnormalized, subtract
/// `log_partition` for probabilities.
#[derive(Serialize)]
struct TableDump<'a> {
    block_sizes: &'a [usize],
    log_partition: f64,
    log_weights: Vec<f64>,
}

fn table_json(table: &LogWeightTable) -> Result<String> {
    let dump = TableDump {
        block_sizes: table.block_sizes(),
        log_partition: table.log_partition(),
        log_weights: (0..table.len()).map(|i| table.log_weight_at(i)).collect(),
    };
    to_json_pretty(&dump)
}

fn run_exact(args: ExactArgs) -> Result<ExitCode> {
    let mut flags = toml::Table::new();
    flags.insert("schedule".into(), toml::Value::Table(args.schedule.to_table()));
    insert_opt(&mut flags, "n", args.n.map(|n| toml::Value::Integer(n as i64)));
    insert_opt(
        &mut flags,
        "mask_seed",
        args.seed.map(|s| toml::Value::Integer(s as i64)),
    );
    insert_opt(
        &mut flags,
        "format",
        args.format.map(|f| {
            toml::Value::String(match f {
                FormatArg::Csv => "csv".into(),
                FormatArg::Json => "json".into(),
            })
        }),
    );
    insert_opt(
        &mut flags,
        "output_dir",
        args.out.map(|p| toml::Value::String(p.display().to_string())),
    );
    let job: ExactJob = resolve_job(flags, args.config.as_deref())?;

    let spec = job.schedule.instantiate(job.n, job.mask_seed)?;
    let table = exact_table(&spec, &job.budget)?;
    println!(
        "N = {}, blocks {:?}, {} grid points",
        job.n,
        table.block_sizes(),
        table.len()
    );
    println!("log partition: {}", sig12(table.log_partition()));
    if let Some(dir) = &job.output_dir {
        ensure_dir(dir)?;
        match job.format {
            OutputFormat::Csv => write_text(&dir.join("table.csv"), &table.to_csv_string())?,
            OutputFormat::Json => write_text(&dir.join("table.json"), &table_json(&table)?)?,
        }
        echo_config(&job, dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct McmcJob {
    schedule: ScheduleSpec,
    n: usize,
    /// Dilution-mask seed; defaults to the chain seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask_seed: Option<u64>,
    #[serde(default)]
    chain: crate::sampler::ChainConfig,
    #[serde(default)]
    format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct TrajectoryDump<'a> {
    block_sizes: &'a [usize],
    sample_sweeps: &'a [u64],
    magnetizations: Vec<Vec<f64>>,
    acceptance_rate: Option<f64>,
}

fn run_mcmc(args: McmcArgs) -> Result<ExitCode> {
    let mut chain = toml::Table::new();
    insert_opt(
        &mut chain,
        "seed",
        args.seed.map(|s| toml::Value::Integer(s as i64)),
    );
    insert_opt(
        &mut chain,
        "sweeps",
        args.sweeps.map(|s| toml::Value::Integer(s as i64)),
    );
    insert_opt(
        &mut chain,
        "burn_in",
        args.burn_in.map(|s| toml::Value::Integer(s as i64)),
    );
    insert_opt(
        &mut chain,
        "thin",
        args.thin.map(|s| toml::Value::Integer(s as i64)),
    );
    insert_opt(
        &mut chain,
        "dynamics",
        args.dynamics.map(|d| {
            toml::Value::String(match d {
                DynamicsArg::Glauber => "glauber".into(),
                DynamicsArg::Metropolis => "metropolis".into(),
            })
        }),
    );
    insert_opt(
        &mut chain,
        "init",
        args.init.map(|i| {
            toml::Value::String(match i {
                InitArg::Random => "random".into(),
                InitArg::AllPlus => "all_plus".into(),
                InitArg::AllMinus => "all_minus".into(),
            })
        }),
    );
    let mut flags = toml::Table::new();
    flags.insert("schedule".into(), toml::Value::Table(args.schedule.to_table()));
    insert_opt(&mut flags, "n", args.n.map(|n| toml::Value::Integer(n as i64)));
    if !chain.is_empty() {
        flags.insert("chain".into(), toml::Value::Table(chain));
    }
    insert_opt(
        &mut flags,
        "format",
        args.format.map(|f| {
            toml::Value::String(match f {
                FormatArg::Csv => "csv".into(),
                FormatArg::Json => "json".into(),
            })
        }),
    );
    insert_opt(
        &mut flags,
        "output_dir",
        args.out.map(|p| toml::Value::String(p.display().to_string())),
    );
    let job: McmcJob = resolve_job(flags, args.config.as_deref())?;

    let mask_seed = job.mask_seed.unwrap_or(job.chain.seed);
    let spec = job.schedule.instantiate(job.n, mask_seed)?;
    let trajectory = run_chain(&spec, &job.chain)?;
    println!(
        "N = {}, {} samples ({} sweeps, burn-in {}, thin {})",
        job.n,
        trajectory.len(),
        job.chain.sweeps,
        job.chain.burn_in,
        job.chain.thin
    );
    let means: Vec<String> = (0..trajectory.block_sizes().len())
        .map(|j| format!("{:.6}", trajectory.mean_magnetization(j)))
        .collect();
    println!("mean block magnetizations: [{}]", means.join(", "));
    if let Some(rate) = trajectory.acceptance_rate() {
        println!("acceptance rate: {rate:.4}");
    }
    if let Some(dir) = &job.output_dir {
        ensure_dir(dir)?;
        match job.format {
            OutputFormat::Csv => {
                write_text(&dir.join("trajectory.csv"), &trajectory.to_csv_string())?
            }
            OutputFormat::Json => {
                let dump = TrajectoryDump {
                    block_sizes: trajectory.block_sizes(),
                    sample_sweeps: trajectory.sample_sweeps(),
                    magnetizations: trajectory.magnetization_vectors(),
                    acceptance_rate: trajectory.acceptance_rate(),
                };
                write_text(&dir.join("trajectory.json"), &to_json_pretty(&dump)?)?
            }
        }
        echo_config(&job, dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictJob {
    schedule: ScheduleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct PredictReport<'a> {
    schedule: &'a ScheduleSpec,
    classification: RegimeClassification,
    #[serde(skip_serializing_if = "Option::is_none")]
    law: Option<LimitLaw>,
}

fn run_predict(args: PredictArgs) -> Result<ExitCode> {
    let mut flags = toml::Table::new();
    flags.insert("schedule".into(), toml::Value::Table(args.schedule.to_table()));
    insert_opt(
        &mut flags,
        "output_dir",
        args.out.map(|p| toml::Value::String(p.display().to_string())),
    );
    let job: PredictJob = resolve_job(flags, args.config.as_deref())?;

    let classification = classify(&job.schedule)?;
    let law = if classification.covered {
        Some(limit_law(&job.schedule)?)
    } else {
        None
    };
    let report = PredictReport {
        schedule: &job.schedule,
        classification,
        law,
    };
    let json = to_json_pretty(&report)?;
    print!("{json}");
    if let Some(dir) = &job.output_dir {
        ensure_dir(dir)?;
        write_text(&dir.join("prediction.json"), &json)?;
        echo_config(&job, dir)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut flags = toml::Table::new();
    flags.insert("schedule".into(), toml::Value::Table(args.schedule.to_table()));
    if !args.n.is_empty() {
        flags.insert(
            "n_list".into(),
            toml::Value::Array(
                args.n
                    .iter()
                    .map(|&n| toml::Value::Integer(n as i64))
                    .collect(),
            ),
        );
    }
    insert_opt(
        &mut flags,
        "method",
        args.method.map(|m| {
            toml::Value::String(match m {
                MethodArg::Exact => "exact".into(),
                MethodArg::Mcmc => "mcmc".into(),
                MethodArg::Auto => "auto".into(),
            })
        }),
    );
    if !args.seeds.is_empty() {
        flags.insert(
            "seeds".into(),
            toml::Value::Array(
                args.seeds
                    .iter()
                    .map(|&s| toml::Value::Integer(s as i64))
                    .collect(),
            ),
        );
    }
    if let Some(sweeps) = args.sweeps {
        let mut chain = toml::Table::new();
        chain.insert("sweeps".into(), toml::Value::Integer(sweeps as i64));
        flags.insert("chain".into(), toml::Value::Table(chain));
    }
    insert_opt(
        &mut flags,
        "wells_eps",
        args.wells_eps.map(toml::Value::Float),
    );
    insert_opt(
        &mut flags,
        "output_dir",
        args.out.map(|p| toml::Value::String(p.display().to_string())),
    );
    let config: ExperimentConfig = resolve_job(flags, args.config.as_deref())?;

    let outcome = run_experiment(&config)?;
    for row in &outcome.rows {
        let tv = row
            .tv
            .map(|tv| format!("{tv:.6}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "N = {:>6}  method = {:<5}  residual = {:.6}  tv = {tv}",
            row.n,
            row.method.label(),
            row.residual_mass
        );
    }
    for note in &outcome.notes {
        println!("note: {note}");
    }
    if let Some(dir) = &config.output_dir {
        println!("wrote {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn default_level() -> Level {
    Level::Fast
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyJob {
    #[serde(default = "default_level")]
    level: Level,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode> {
    let mut flags = toml::Table::new();
    insert_opt(
        &mut flags,
        "level",
        args.level.map(|l| {
            toml::Value::String(match l {
                LevelArg::Fast => "fast".into(),
                LevelArg::Full => "full".into(),
            })
        }),
    );
    insert_opt(
        &mut flags,
        "output_dir",
        args.out.map(|p| toml::Value::String(p.display().to_string())),
    );
    let job: VerifyJob = resolve_job(flags, args.config.as_deref())?;

    let report = verify_suite(job.level);
    print!("{}", report.render());
    if let Some(dir) = &job.output_dir {
        ensure_dir(dir)?;
        write_text(&dir.join("report.json"), &to_json_pretty(&report)?)?;
        echo_config(&job, dir)?;
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// Entry point for the `blockspin` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("BLOCKSPIN_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(threads) = threads {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match cli.command {
        Command::Exact(args) => run_exact(args),
        Command::Mcmc(args) => run_mcmc(args),
        Command::Predict(args) => run_predict(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
