use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use fogsim::results::write_results;
use fogsim::{ResultSet, SimTime};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::{emit, Source};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCENARIO_FILE: &str = "scenario.json";

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    pub output: PathBuf,
    /// Independent runs with seeds seed, seed+1, ...; each in its own
    /// subdirectory.
    #[arg(long)]
    pub replications: Option<u64>,
}

#[derive(Serialize)]
struct Counts {
    compute: usize,
    link: usize,
    drop: usize,
    control: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    source: &'a str,
    seed: u64,
    until: f64,
    replication: Option<u64>,
    wall_time_s: f64,
    records: Counts,
}

#[derive(Serialize)]
struct Index<'a> {
    source: &'a str,
    seed: u64,
    replications: Vec<String>,
}

pub fn replication_dir(r: u64, total: u64) -> String {
    let width = (total.max(2) - 1).to_string().len().max(3);
    format!("rep{r:0width$}")
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path.display(), e))
}

fn one(args: &RunArgs, dir: &Path, replication: Option<u64>) -> Result<ResultSet, CliError> {
    let scenario = args.source.load(replication.unwrap_or(0))?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let started = Instant::now();
    let results = scenario.build()?.run(SimTime::from_units(scenario.until))?;
    let wall = started.elapsed().as_secs_f64();
    write_results(dir, &results)?;
    fs::write(dir.join(SCENARIO_FILE), scenario.to_json_string() + "\n")
        .map_err(|e| CliError::io(dir.join(SCENARIO_FILE).display(), e))?;
    write_json(
        &dir.join(MANIFEST_FILE),
        &Manifest {
            source: &args.source.label(),
            seed: scenario.seed,
            until: scenario.until,
            replication,
            wall_time_s: wall,
            records: Counts {
                compute: results.compute.len(),
                link: results.links.len(),
                drop: results.drops.len(),
                control: results.control.len(),
            },
        },
    )?;
    Ok(results)
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let Some(n) = args.replications else {
        let rs = one(args, &args.output, None)?;
        emit(&format!(
            "{}: {} compute, {} link, {} drop records -> {}\n",
            args.source.label(),
            rs.compute.len(),
            rs.links.len(),
            rs.drops.len(),
            args.output.display()
        ))?;
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::Validation(
            "--replications must be at least 1".into(),
        ));
    }
    let first = args.source.load(0)?;
    let names: Vec<String> = (0..n).map(|r| replication_dir(r, n)).collect();
    let outcomes: Vec<Result<usize, CliError>> = (0..n)
        .into_par_iter()
        .map(|r| {
            one(args, &args.output.join(&names[r as usize]), Some(r)).map(|rs| rs.compute.len())
        })
        .collect();
    let mut total = 0;
    for o in outcomes {
        total += o?;
    }
    write_json(
        &args.output.join(MANIFEST_FILE),
        &Index {
            source: &args.source.label(),
            seed: first.seed,
            replications: names,
        },
    )?;
    emit(&format!(
        "{}: {n} replications, {total} compute records -> {}\n",
        args.source.label(),
        args.output.display()
    ))?;
    Ok(())
}
