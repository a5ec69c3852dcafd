//! `fogsim` command-line front end.

mod error;
mod export;
mod run;
mod stats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fogsim::scenario::{load_scenario, presets, EggPolicy, PresetParams, Scenario};

use error::CliError;

#[derive(Parser)]
#[command(
    name = "fogsim",
    version,
    about = "Deterministic discrete-event fog/edge simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario or preset and write CSV logs plus a manifest.
    Run(run::RunArgs),
    /// Summarize a results directory.
    Stats(stats::StatsArgs),
    /// Write the topology with node roles and betweenness.
    ExportGraph(export::ExportArgs),
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
}

/// Where the scenario comes from: a file or a named preset.
#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in preset: egg, scaling, failures or mobility.
    #[arg(long)]
    pub preset: Option<String>,
    /// Gateway subtrees (egg preset only).
    #[arg(long, default_value_t = 4)]
    pub gateways: usize,
    /// Placement policy (egg preset only).
    #[arg(long, default_value_t = EggPolicy::Edge)]
    pub policy: EggPolicy,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the simulation horizon.
    #[arg(long)]
    pub until: Option<f64>,
}

impl Source {
    /// Loads the scenario with `offset` added to the seed.
    pub fn load(&self, offset: u64) -> Result<Scenario, CliError> {
        let mut s = match (&self.scenario, &self.preset) {
            (Some(path), _) => load_scenario(path)?,
            (None, Some(name)) => {
                let params = PresetParams {
                    seed: self.seed.unwrap_or(1) + offset,
                    gateways: self.gateways,
                    policy: self.policy,
                };
                presets::by_name(name, &params).map_err(CliError::Validation)?
            }
            (None, None) => return Err(CliError::Validation("need --scenario or --preset".into())),
        };
        if self.scenario.is_some() {
            s.seed = self.seed.unwrap_or(s.seed) + offset;
        }
        if let Some(until) = self.until {
            s.until = until;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn label(&self) -> String {
        match (&self.scenario, &self.preset) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(name)) if name == "egg" => {
                format!("egg ({} gateways, {})", self.gateways, self.policy)
            }
            (None, Some(name)) => name.clone(),
            (None, None) => String::new(),
        }
    }
}

/// Writes to stdout; a closed pipe is not an error.
pub fn emit(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("stdout", e)),
        _ => Ok(()),
    }
}

fn validate(path: &Path) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    let g = s.topology_graph()?;
    emit(&format!(
        "{}: ok ({} nodes, {} links, {} applications, seed {}, until {})\n",
        path.display(),
        g.node_count(),
        g.link_count(),
        s.application.len(),
        s.seed,
        s.until
    ))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run::run(args),
        Command::Stats(args) => stats::stats(args),
        Command::ExportGraph(args) => export::export(args),
        Command::Validate { scenario } => validate(scenario),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
