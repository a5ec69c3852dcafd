//! Hand-built micro scenarios, run through both the engine and the oracle.
//!
//! All sizes and rates are binary fractions so float and tick arithmetic
//! agree exactly on event order.

use fogsim::policies::ShortestPathSelection;
use fogsim::results::ComputeKind;
use fogsim::*;

use crate::oracle::{Deploy, Kind, Log, Micro, Msg};

fn msg(
    name: &'static str,
    src: &'static str,
    dst: &'static str,
    instructions: f64,
    bytes: f64,
) -> Msg {
    Msg {
        name,
        src,
        dst,
        instructions,
        bytes,
        broadcast: false,
    }
}

pub fn all() -> Vec<Micro> {
    vec![
        // Backlog on a zero-delay link feeding a slower one, so dequeues and
        // landings coincide; the module queue grows too.
        Micro {
            name: "line",
            nodes: vec![(0, 1.0), (1, 1.0), (2, 1.0)],
            links: vec![(0, 1, 100.0, 0.0), (1, 2, 50.0, 0.25)],
            modules: vec![("S", Kind::Source), ("A", Kind::Module)],
            messages: vec![msg("m", "S", "A", 2.0, 150.0)],
            rules: vec![("A", "m", None)],
            deploy: vec![Deploy::Module("A", 2), Deploy::Source("m", 0, None, 1.0)],
            until: 8.0,
        },
        // Two sources share one slow link.
        Micro {
            name: "contention",
            nodes: vec![(0, 1.0), (1, 2.0)],
            links: vec![(0, 1, 50.0, 0.125)],
            modules: vec![("S", Kind::Source), ("A", Kind::Module)],
            messages: vec![msg("m", "S", "A", 1.0, 100.0)],
            rules: vec![("A", "m", None)],
            deploy: vec![
                Deploy::Module("A", 1),
                Deploy::Source("m", 0, Some(0.0), 3.0),
                Deploy::Source("m", 0, Some(0.5), 1.5),
            ],
            until: 7.0,
        },
        // Three-stage chain over a diamond with equal-length alternatives.
        Micro {
            name: "diamond",
            nodes: vec![(0, 2.0), (1, 1.0), (2, 1.0), (3, 4.0)],
            links: vec![
                (0, 1, 64.0, 0.5),
                (0, 2, 128.0, 0.25),
                (1, 3, 32.0, 0.125),
                (2, 3, 256.0, 1.0),
            ],
            modules: vec![
                ("S", Kind::Source),
                ("A", Kind::Module),
                ("B", Kind::Module),
                ("D", Kind::Sink),
            ],
            messages: vec![
                msg("m1", "S", "A", 2.0, 64.0),
                msg("m2", "A", "B", 1.0, 32.0),
                msg("m3", "B", "D", 0.0, 16.0),
            ],
            rules: vec![("A", "m1", Some("m2")), ("B", "m2", Some("m3"))],
            deploy: vec![
                Deploy::Module("A", 3),
                Deploy::Module("B", 0),
                Deploy::Sink("D", 2),
                Deploy::Source("m1", 0, Some(0.0), 4.0),
            ],
            until: 12.0,
        },
        // Broadcast fan-out to four replicas, replies converge on the hub.
        Micro {
            name: "broadcast",
            nodes: vec![(0, 1.0), (1, 1.0), (2, 2.0), (3, 0.5)],
            links: vec![(0, 1, 32.0, 0.25), (0, 2, 64.0, 0.5), (0, 3, 16.0, 0.125)],
            modules: vec![
                ("S", Kind::Source),
                ("R", Kind::Module),
                ("C", Kind::Module),
            ],
            messages: vec![
                Msg {
                    broadcast: true,
                    ..msg("b", "S", "R", 1.0, 16.0)
                },
                msg("r", "R", "C", 0.5, 8.0),
            ],
            rules: vec![("R", "b", Some("r")), ("C", "r", None)],
            deploy: vec![
                Deploy::Module("R", 1),
                Deploy::Module("R", 2),
                Deploy::Module("R", 3),
                Deploy::Module("R", 3),
                Deploy::Module("C", 0),
                Deploy::Source("b", 0, Some(0.0), 8.0),
            ],
            until: 6.0,
        },
        // Ring with a chord; each source is nearest to a different replica.
        Micro {
            name: "ring",
            nodes: vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 2.0), (4, 2.0)],
            links: vec![
                (0, 1, 64.0, 0.25),
                (1, 2, 64.0, 0.25),
                (2, 3, 64.0, 0.0),
                (3, 4, 64.0, 0.25),
                (4, 0, 64.0, 0.25),
                (1, 3, 32.0, 0.5),
            ],
            modules: vec![("S", Kind::Source), ("A", Kind::Module), ("K", Kind::Sink)],
            messages: vec![msg("m", "S", "A", 1.0, 32.0), msg("n", "A", "K", 0.0, 16.0)],
            rules: vec![("A", "m", Some("n"))],
            deploy: vec![
                Deploy::Module("A", 3),
                Deploy::Module("A", 4),
                Deploy::Sink("K", 1),
                Deploy::Source("m", 0, None, 3.0),
                Deploy::Source("m", 2, Some(1.0), 4.0),
            ],
            until: 9.0,
        },
    ]
}

pub fn run_engine(m: &Micro) -> ResultSet {
    let mut g = TopologyGraph::new();
    for &(id, ipt) in &m.nodes {
        g.add_node(NodeAttrs::new(id, ipt, 0.0)).unwrap();
    }
    for &(a, b, bw, pr) in &m.links {
        g.add_link(LinkAttrs::new(a, b, bw, pr)).unwrap();
    }
    let mut app = Application::new("micro");
    for &(name, kind) in &m.modules {
        let kind = match kind {
            Kind::Source => ModuleKind::Source,
            Kind::Module => ModuleKind::Module,
            Kind::Sink => ModuleKind::Sink,
        };
        app = app.with_module(name, kind);
    }
    for x in &m.messages {
        let mut mt = MessageType::new(x.name, x.src, x.dst, x.instructions, x.bytes);
        if x.broadcast {
            mt = mt.broadcast();
        }
        app = app.with_message(mt);
    }
    for &(module, input, output) in &m.rules {
        let mode = if output.is_some() {
            TransmissionMode::Fractional(1.0)
        } else {
            TransmissionMode::Sink
        };
        app = app.with_rule(module, input, output, mode);
    }
    let mut sim = Simulation::new(g, vec![app], 1, Box::new(ShortestPathSelection::new())).unwrap();
    let mut ctl = sim.control();
    for d in &m.deploy {
        match *d {
            Deploy::Module(module, node) => {
                ctl.deploy_module("micro", module, NodeId(node)).unwrap();
            }
            Deploy::Sink(module, node) => {
                ctl.deploy_sink("micro", module, NodeId(node)).unwrap();
            }
            Deploy::Source(message, node, first, period) => {
                let dist = match first {
                    Some(start) => TemporalDistribution::deterministic_start(start, period),
                    None => TemporalDistribution::deterministic(period),
                };
                ctl.deploy_source("micro", message, NodeId(node), dist)
                    .unwrap();
            }
        }
    }
    sim.run(SimTime::from_units(m.until)).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

pub fn compare(m: &Micro, want: &Log, got: &ResultSet) -> Result<(), String> {
    let fail = |what: String| Err(format!("{}: {what}", m.name));
    if want.compute.len() != got.compute.len() {
        return fail(format!(
            "{} compute records, oracle {}",
            got.compute.len(),
            want.compute.len()
        ));
    }
    if want.links.len() != got.links.len() {
        return fail(format!(
            "{} link records, oracle {}",
            got.links.len(),
            want.links.len()
        ));
    }
    if want.compute.is_empty() || want.links.is_empty() {
        return fail("degenerate scenario".into());
    }
    for (i, (w, g)) in want.compute.iter().zip(&got.compute).enumerate() {
        let same = g.id.0 == w.id
            && (g.kind == ComputeKind::Sink) == w.sink
            && g.module == w.module
            && g.message == w.message
            && g.des_src.0 == w.des_src
            && g.des_dst.0 == w.des_dst
            && g.topo_src.0 == w.topo_src
            && g.topo_dst.0 == w.topo_dst
            && g.module_src == w.module_src
            && match (g.service, w.service) {
                (Some(a), Some(b)) => close(a.as_units(), b),
                (None, None) => true,
                _ => false,
            }
            && close(g.time_in.as_units(), w.time_in)
            && close(g.time_out.as_units(), w.time_out)
            && close(g.time_emit.as_units(), w.time_emit)
            && close(g.time_reception.as_units(), w.time_reception);
        if !same {
            return fail(format!(
                "compute record {i} differs:\n  engine {g:?}\n  oracle {w:?}"
            ));
        }
    }
    for (i, (w, g)) in want.links.iter().zip(&got.links).enumerate() {
        let same = g.id.0 == w.id
            && g.src.0 == w.src
            && g.dst.0 == w.dst
            && g.message == w.message
            && g.buffer == w.buffer
            && close(g.size, w.size)
            && close(g.latency.as_units(), w.latency)
            && close(g.ctime.as_units(), w.ctime);
        if !same {
            return fail(format!(
                "link record {i} differs:\n  engine {g:?}\n  oracle {w:?}"
            ));
        }
    }
    if !got.drops.is_empty() {
        return fail(format!("{} unexpected drops", got.drops.len()));
    }
    Ok(())
}
