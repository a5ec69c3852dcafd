use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fogsim::application::ModuleKind;
use fogsim::scenario::{PlacementSpec, PopulationSpec, Scenario};
use fogsim::{NodeId, TopologyGraph};

use crate::emit;
use crate::error::CliError;
use crate::Source;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Dot,
    Edgelist,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Derived roles per node: sender, receiver, failure candidate.
fn roles(s: &Scenario, g: &TopologyGraph) -> BTreeMap<NodeId, Vec<&'static str>> {
    let mut out: BTreeMap<NodeId, Vec<&'static str>> = BTreeMap::new();
    for n in s.sender_nodes() {
        out.entry(n).or_default().push("sender");
    }
    let mut receivers = BTreeSet::new();
    let ranking = g.rank_by_betweenness();
    let apps = s.applications().unwrap_or_default();
    for p in &s.placement {
        match p {
            PlacementSpec::Static { app, assign, .. } => {
                let app = apps.iter().find(|a| &a.name == app);
                for (module, nodes) in assign {
                    let compute = app
                        .and_then(|a| a.module(module))
                        .is_some_and(|m| m.kind == ModuleKind::Module);
                    if compute {
                        receivers.extend(nodes.iter().copied());
                    }
                }
            }
            PlacementSpec::Betweenness {
                count, colocated, ..
            } => {
                let k = if *colocated { 1 } else { *count };
                receivers.extend(ranking.iter().take(k).copied());
            }
        }
    }
    for p in &s.population {
        let sinks = match p {
            PopulationSpec::Static { sinks, .. } | PopulationSpec::Evolutive { sinks, .. } => sinks,
        };
        receivers.extend(sinks.iter().flat_map(|k| k.nodes.iter().copied()));
    }
    for n in receivers {
        out.entry(n).or_default().push("receiver");
    }
    for n in s.failure_candidates().into_iter().collect::<BTreeSet<_>>() {
        out.entry(n).or_default().push("failure-candidate");
    }
    out
}

fn quote(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => format!("\"{}\"", s.replace('"', "\\\"")),
        other => other.to_string(),
    }
}

pub fn render(s: &Scenario, format: Format) -> Result<String, CliError> {
    let g = s.topology_graph()?;
    let mut out = String::new();
    match format {
        Format::Edgelist => {
            out.push_str("# s d BW PR\n");
            for l in g.links() {
                let (a, b) = l.key().endpoints();
                writeln!(out, "{a} {b} {} {}", l.bw, l.pr).unwrap();
            }
        }
        Format::Dot => {
            let roles = roles(s, &g);
            let centrality = g.betweenness_centrality();
            out.push_str("graph topology {\n");
            for n in g.nodes() {
                let mut attrs = vec![
                    format!("IPT={}", n.ipt),
                    format!("RAM={}", n.ram),
                    format!("betweenness={}", centrality[&n.id]),
                ];
                for (k, v) in &n.custom {
                    attrs.push(format!("{k}={}", quote(v)));
                }
                if let Some(r) = roles.get(&n.id) {
                    attrs.push(format!("roles=\"{}\"", r.join(",")));
                }
                writeln!(out, "  {} [{}];", n.id, attrs.join(", ")).unwrap();
            }
            for l in g.links() {
                let (a, b) = l.key().endpoints();
                writeln!(out, "  {a} -- {b} [BW={}, PR={}];", l.bw, l.pr).unwrap();
            }
            out.push_str("}\n");
        }
    }
    Ok(out)
}

pub fn export(args: &ExportArgs) -> Result<(), CliError> {
    let s = args.source.load(0)?;
    let text = render(&s, args.format)?;
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path.display(), e)),
        None => emit(&text),
    }
}
