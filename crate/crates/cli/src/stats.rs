use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use fogsim::results::{
    compute_series, read_results, saturation_series, sequence_latency, Anchor, Metric,
    MetricSeries, Summary, COMPUTE_FILE,
};
use fogsim::scenario::Scenario;
use fogsim::{ResultSet, SimTime};

use crate::emit;
use crate::error::CliError;
use crate::run::SCENARIO_FILE;

const METRICS: [(&str, Metric); 5] = [
    ("latency", Metric::Latency),
    ("waiting", Metric::Waiting),
    ("service", Metric::Service),
    ("response", Metric::Response),
    ("total_response", Metric::TotalResponse),
];

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// A run directory, or a directory of replication subdirectories.
    pub dir: PathBuf,
    /// Message chain for sequence latency, comma separated; repeatable.
    /// Defaults to the loops stored with the run.
    #[arg(long = "loop", value_delimiter = ',', action = clap::ArgAction::Append)]
    pub loops: Vec<String>,
    /// Emit a windowed series with this bucket width instead of the summary.
    #[arg(long)]
    pub window: Option<f64>,
    /// Metric for the windowed series: latency, waiting, service, response,
    /// total_response or buffer.
    #[arg(long, default_value = "latency")]
    pub metric: String,
    /// Timestamp that places a record in a window: emit, reception, in, out.
    #[arg(long, default_value = "in")]
    pub by: Anchor,
    /// Only records of this module.
    #[arg(long)]
    pub module: Option<String>,
}

struct Run {
    name: String,
    results: ResultSet,
    loops: Vec<Vec<String>>,
    until: Option<f64>,
}

fn load_run(dir: &Path, name: String) -> Result<Run, CliError> {
    let results = read_results(dir)?;
    let (loops, until) = match fs::read_to_string(dir.join(SCENARIO_FILE)) {
        Ok(text) => {
            let s = Scenario::from_json_str(&text)?;
            (s.loops, Some(s.until))
        }
        Err(_) => (Vec::new(), None),
    };
    Ok(Run {
        name,
        results,
        loops,
        until,
    })
}

fn load_runs(dir: &Path) -> Result<Vec<Run>, CliError> {
    if dir.join(COMPUTE_FILE).exists() {
        return Ok(vec![load_run(dir, ".".into())?]);
    }
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut subdirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(COMPUTE_FILE).exists())
        .collect();
    subdirs.sort();
    subdirs
        .iter()
        .map(|p| load_run(p, p.file_name().unwrap().to_string_lossy().into_owned()))
        .collect()
}

fn fmt(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e7) {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}

fn summary_line(out: &mut String, label: &str, s: Option<Summary>) {
    match s {
        Some(s) => writeln!(
            out,
            "{label}: mean {} var {} min {} max {} (n={})",
            fmt(s.mean),
            fmt(s.var),
            fmt(s.min),
            fmt(s.max),
            s.n
        )
        .unwrap(),
        None => writeln!(out, "{label}: no records").unwrap(),
    }
}

/// The text summary for `runs`.
fn report(runs: &[Run], loops: &[Vec<String>], module: Option<&str>) -> Result<String, CliError> {
    let mut out = String::new();
    let keep = |m: &str| module.map_or(true, |x| x == m);
    let total: usize = runs.iter().map(|r| r.results.compute.len()).sum();
    let links: usize = runs.iter().map(|r| r.results.links.len()).sum();
    let drops: usize = runs.iter().map(|r| r.results.drops.len()).sum();
    writeln!(out, "replications: {}", runs.len()).unwrap();
    writeln!(out, "records: compute {total} link {links} drop {drops}").unwrap();
    if total == 0 {
        writeln!(out, "no records").unwrap();
        return Ok(out);
    }
    let multi = runs.len() > 1;

    let loops: Vec<Vec<String>> = if loops.is_empty() {
        runs[0].loops.clone()
    } else {
        loops.to_vec()
    };
    for chain in &loops {
        let names: Vec<&str> = chain.iter().map(String::as_str).collect();
        let mut means = Vec::new();
        let mut values = Vec::new();
        let (mut complete, mut incomplete) = (0, 0);
        for r in runs {
            let seq = sequence_latency(&r.results.compute, &names)?;
            complete += seq.complete;
            incomplete += seq.incomplete;
            means.extend(seq.mean);
            values.extend(seq.values.iter().map(|(_, t)| t.as_units()));
        }
        let label = format!("loop {}", chain.join(","));
        summary_line(
            &mut out,
            &label,
            Summary::of(if multi { &means } else { &values }),
        );
        writeln!(
            out,
            "  instances: complete {complete} incomplete {incomplete}"
        )
        .unwrap();
    }

    writeln!(
        out,
        "{}",
        if multi {
            "per-replication means:"
        } else {
            "per-record metrics:"
        }
    )
    .unwrap();
    for (name, metric) in METRICS {
        let mut samples = Vec::new();
        for r in runs {
            let mut vals = Vec::new();
            for rec in r.results.compute.iter().filter(|c| keep(&c.module)) {
                vals.push(metric.of(&rec.times()?).as_units());
            }
            if multi {
                samples.extend(Summary::of(&vals).map(|s| s.mean));
            } else {
                samples = vals;
            }
        }
        summary_line(&mut out, &format!("  {name}"), Summary::of(&samples));
    }
    let buffers: Vec<f64> = runs
        .iter()
        .flat_map(|r| r.results.links.iter().map(|l| l.buffer as f64))
        .collect();
    summary_line(&mut out, "  buffer", Summary::of(&buffers));
    Ok(out)
}

/// Windowed series as CSV, one row per bucket (and replication).
fn series(
    runs: &[Run],
    window: f64,
    metric: &str,
    by: Anchor,
    module: Option<&str>,
) -> Result<String, CliError> {
    if !(window.is_finite() && window > 0.0) {
        return Err(CliError::Validation(format!(
            "--window must be positive, got {window}"
        )));
    }
    let w = SimTime::from_units(window);
    let multi = runs.len() > 1;
    let mut out = String::new();
    if multi {
        out.push_str("replication,");
    }
    out.push_str("start,count,mean,max\n");
    for r in runs {
        let until = SimTime::from_units(r.until.unwrap_or(0.0));
        let s: MetricSeries = if metric == "buffer" {
            saturation_series(&r.results.links, w, until)?
        } else {
            let m: Metric = metric.parse().map_err(CliError::Validation)?;
            compute_series(&r.results.compute, m, by, w, until, |c| {
                module.map_or(true, |x| x == c.module)
            })?
        };
        for b in &s.buckets {
            if multi {
                write!(out, "{},", r.name).unwrap();
            }
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                b.start,
                b.count,
                opt(b.mean()),
                opt(b.max)
            )
            .unwrap();
        }
    }
    Ok(out)
}

pub fn stats(args: &StatsArgs) -> Result<(), CliError> {
    if !args.dir.is_dir() {
        return Err(CliError::Io(format!(
            "{}: not a directory",
            args.dir.display()
        )));
    }
    let runs = load_runs(&args.dir)?;
    if runs.is_empty() {
        println!("{}: no records", args.dir.display());
        return Ok(());
    }
    let loops: Vec<Vec<String>> = if args.loops.is_empty() {
        Vec::new()
    } else {
        vec![args.loops.clone()]
    };
    let text = match args.window {
        Some(w) => series(&runs, w, &args.metric, args.by, args.module.as_deref())?,
        None => report(&runs, &loops, args.module.as_deref())?,
    };
    emit(&text)
}
