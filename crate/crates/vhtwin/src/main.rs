use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vhtwin::{emit, twinfile, Error, ExperimentConfig, Format, Output, Result, Runner};

/// VH-Twin network twinning simulator.
#[derive(Parser)]
#[command(name = "vhtwin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file of `section.key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the report and any produced files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Overrides one config key, e.g. `--set twinning.psi=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the stations and write `bs_id,cluster_id`.
    Cluster(Common),
    /// Hierarchical initial mapping; saves the global twin.
    Vtwin(Common),
    /// Threshold-gated updating from a saved twin.
    Htwin {
        #[command(flatten)]
        common: Common,
        /// Twin file written by `vtwin`.
        #[arg(long)]
        twin: PathBuf,
    },
    /// Single-level FedAvg in both phases.
    Baseline(Common),
    /// Hierarchical pipeline against the baseline, with optional sweeps.
    E2e(Common),
    /// Export synthetic traffic and a station roster as CSV.
    Synth(Common),
}

fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    for pair in &common.overrides {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| Error::io(path, e))
}

fn finish(name: &str, common: &Common, output: Output) -> Result<()> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for a in &output.artifacts {
        write(&dir, a.name, &a.bytes)?;
    }
    if let Some(set) = &output.report {
        let bytes = emit(set, common.format);
        if common.out.is_some() {
            write(&dir, &format!("{name}.{}", common.format.extension()), &bytes)?;
        }
        print!("{}", String::from_utf8_lossy(&bytes));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let runner = Runner::from_env()?;
    match &cli.command {
        Command::Cluster(c) => finish("cluster", c, runner.cmd_cluster(&resolve(c)?)?),
        Command::Vtwin(c) => finish("vtwin", c, runner.cmd_vtwin(&resolve(c)?)?),
        Command::Htwin { common, twin } => {
            let cfg = resolve(common)?;
            let model = twinfile::load(twin)?;
            finish("htwin", common, runner.cmd_htwin(&cfg, &model)?)
        }
        Command::Baseline(c) => finish("baseline", c, runner.cmd_baseline(&resolve(c)?)?),
        Command::E2e(c) => finish("e2e", c, runner.cmd_e2e(&resolve(c)?)?),
        Command::Synth(c) => finish("synth", c, runner.cmd_synth(&resolve(c)?)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
