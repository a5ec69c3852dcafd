//! Acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p fogsim-core --test acceptance`; pass criterion numbers
//! (`-- 2 5`) to run a subset. Exits nonzero if any selected criterion fails.

mod micro;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fogsim::results::{
    compute_series, read_results, saturation_series, sequence_latency, write_results, Anchor,
    ComputeKind, ControlEvent, Metric, Outcome, COMPUTE_FILE, CONTROL_FILE, DROP_FILE, LINK_FILE,
};
use fogsim::scenario::presets::{self, EggPolicy, EGG_LOOP};
use fogsim::scenario::Scenario;
use fogsim::*;

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(s: &Scenario, trace_links: bool) -> ResultSet {
    s.build_with(EngineOptions { trace_links })
        .expect("scenario builds")
        .run(SimTime::from_units(s.until))
        .expect("scenario runs")
}

fn egg(gateways: usize, policy: EggPolicy, until: f64, seed: u64) -> Scenario {
    let mut s = presets::egg(gateways, policy);
    s.until = until;
    s.seed = seed;
    s
}

fn egg_latency(rs: &ResultSet) -> f64 {
    sequence_latency(&rs.compute, &EGG_LOOP)
        .unwrap()
        .mean
        .expect("complete loops")
}

/// Identities and ordering on every compute record.
fn check_algebra(rs: &ResultSet) -> Result<usize, String> {
    for r in &rs.compute {
        let t = r.times().map_err(|e| e.to_string())?;
        ensure(
            r.time_emit <= r.time_reception
                && r.time_reception <= r.time_in
                && r.time_in <= r.time_out,
            || format!("id {} {}: timestamps out of order", r.id, r.message),
        )?;
        ensure(t.waiting + t.service == t.response, || {
            format!("id {}: waiting + service != response", r.id)
        })?;
        ensure(t.latency + t.response == t.total_response, || {
            format!("id {}: latency + response != total", r.id)
        })?;
        if r.kind == ComputeKind::Compute {
            ensure(r.service == Some(t.service), || {
                format!("id {}: service column mismatch", r.id)
            })?;
        }
    }
    Ok(rs.compute.len())
}

fn c1_timestamp_algebra() -> Check {
    let row = ComputeRecord {
        id: MessageId(1),
        kind: ComputeKind::Compute,
        app: "EGG_GAME".into(),
        module: "Client".into(),
        message: "M.EGG".into(),
        des_src: DesId(0),
        des_dst: DesId(258),
        topo_src: NodeId(4),
        topo_dst: NodeId(3),
        module_src: "EGG".into(),
        service: Some(SimTime::from_units(105.9994 - 104.005)),
        time_in: "104.005".parse().unwrap(),
        time_out: "105.9994".parse().unwrap(),
        time_emit: "100.0".parse().unwrap(),
        time_reception: "104.0005".parse().unwrap(),
    };
    let t = row.times().map_err(|e| e.to_string())?;
    let want = [
        ("latency", t.latency, "4.0005"),
        ("waiting", t.waiting, "0.0045"),
        ("service", t.service, "1.9944"),
        ("response", t.response, "1.9989"),
        ("total_response", t.total_response, "5.9994"),
    ];
    for (name, got, expect) in want {
        ensure(got == expect.parse::<SimTime>().unwrap(), || {
            format!("worked example {name}: got {got}, want {expect}")
        })?;
    }

    let mut scenarios = vec![
        egg(4, EggPolicy::Edge, 1e4, 1),
        egg(4, EggPolicy::Cloud, 2e3, 1),
        presets::scaling(1),
        presets::failures(1),
        presets::mobility(1),
    ];
    for s in &mut scenarios[2..] {
        s.until = 4000.0;
    }
    let mut total = 0;
    for s in &scenarios {
        total += check_algebra(&run(s, false))?;
    }
    Ok(format!(
        "worked example latency {} total {}; identities hold on {total} records",
        t.latency, t.total_response
    ))
}

fn c2_edge_flatness() -> Check {
    let means: Vec<f64> = [4, 8, 12, 16]
        .iter()
        .map(|&g| egg_latency(&run(&egg(g, EggPolicy::Edge, 1e4, 1), false)))
        .collect();
    let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let near = means.iter().all(|m| (m - 11.27).abs() <= 1.127);
    ensure(hi - lo <= 0.05, || {
        format!("spread {:.4} > 0.05 over {means:?}", hi - lo)
    })?;
    Ok(format!(
        "means {:?}, spread {:.4} <= 0.05 (within 10% of 11.27: {})",
        means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
        hi - lo,
        if near { "yes" } else { "no, not gated" }
    ))
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn replicated_means(gateways: usize, replications: u64) -> Vec<f64> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let mut out = vec![0.0; replications as usize];
    std::thread::scope(|scope| {
        for (w, chunk) in out
            .chunks_mut(replications.div_ceil(workers) as usize)
            .enumerate()
        {
            let base = w as u64 * replications.div_ceil(workers);
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let seed = 1 + base + i as u64;
                    *slot = egg_latency(&run(&egg(gateways, EggPolicy::Edge, 1e4, seed), false));
                }
            });
        }
    });
    out
}

fn c3_convergence() -> Check {
    let vars: Vec<(usize, f64)> = [4, 8, 12, 16]
        .iter()
        .map(|&g| (g, sample_variance(&replicated_means(g, 50))))
        .collect();
    let shown = vars
        .iter()
        .map(|(g, v)| format!("{g}:{v:.3e}"))
        .collect::<Vec<_>>()
        .join(" ");
    ensure(vars.windows(2).all(|w| w[1].1 <= w[0].1), || {
        format!("variance increases: {shown}")
    })?;
    ensure(vars[3].1 * 2.0 < vars[0].1, || {
        format!("less than 2x tightening: {shown}")
    })?;
    Ok(format!(
        "variance {shown}, ratio {:.1}x",
        vars[0].1 / vars[3].1
    ))
}

fn c4_cloud_saturation() -> Check {
    let short = run(&egg(16, EggPolicy::Cloud, 1e3, 1), false);
    let long = run(&egg(16, EggPolicy::Cloud, 1e4, 1), false);
    let (a, b) = (egg_latency(&short), egg_latency(&long));
    ensure(b >= 5.0 * a, || {
        format!("latency {a:.1} -> {b:.1} is only {:.2}x", b / a)
    })?;
    let until = SimTime::from_units(1e4);
    let sat = saturation_series(&long.links, SimTime::from_units(1e3), until)
        .map_err(|e| e.to_string())?;
    let maxima: Vec<f64> = sat
        .buckets
        .iter()
        .filter(|b| b.start < until)
        .map(|b| b.max.unwrap_or(0.0))
        .collect();
    ensure(maxima.iter().any(|&m| m > 0.0), || {
        "buffer never above 0".into()
    })?;
    ensure(
        maxima.windows(2).all(|w| w[1] >= w[0]) && maxima.last() > maxima.first(),
        || format!("windowed buffer max not trending up: {maxima:?}"),
    )?;
    Ok(format!(
        "latency {a:.1} -> {b:.1} ({:.1}x), buffer max per 1000 units {maxima:?}",
        b / a
    ))
}

fn c5_scaling() -> Check {
    let s = presets::scaling(1);
    let until = SimTime::from_units(s.until);
    let rs = run(&s, false);
    let w = SimTime::from_units(100.0);
    let series = compute_series(&rs.compute, Metric::Latency, Anchor::Emit, w, until, |_| {
        true
    })
    .map_err(|e| e.to_string())?;
    let means: Vec<f64> = series
        .means()
        .into_iter()
        .map(|m| m.unwrap_or(0.0))
        .collect();
    let before = &means[..30];
    ensure(before.windows(2).all(|p| p[1] >= p[0]), || {
        format!("not non-decreasing before 3000: {before:?}")
    })?;
    let reference = means[29];
    let after = means[30..36].iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(after <= 0.7 * reference, || {
        format!("window before 3000 {reference:.2}, best within 600 after {after:.2}")
    })?;

    let mut deploys: Vec<SimTime> = rs
        .control
        .iter()
        .filter(|c| c.event == ControlEvent::Deploy && c.name == "SENSING/Receiver")
        .map(|c| c.time)
        .collect();
    deploys.sort();
    let expected = |t: f64| -> usize {
        let extra = if t < 3000.0 {
            0
        } else {
            ((t - 3000.0) / 300.0).floor() as usize + 1
        };
        (1 + extra).min(20)
    };
    let mut t = 0.0;
    while t <= s.until {
        let got = deploys.iter().filter(|d| d.as_units() <= t).count();
        ensure(got == expected(t), || {
            format!("t={t}: {got} receivers, expected {}", expected(t))
        })?;
        t += 50.0;
    }
    for d in &deploys[1..] {
        let x = d.as_units();
        ensure(expected(x) > expected(x - 1e-6), || {
            format!("deployment at {x} off the step grid")
        })?;
    }
    Ok(format!(
        "window [2900,3000) {reference:.1}, min over [3000,3600) {after:.1} ({:.0}% drop), {} receivers by t={}",
        100.0 * (1.0 - after / reference),
        deploys.len(),
        s.until
    ))
}

fn c6_failures() -> Check {
    let s = presets::failures(1);
    let mut sim = s
        .build_with(EngineOptions { trace_links: true })
        .map_err(|e| e.to_string())?;
    let initial = (sim.topology().node_count(), sim.topology().link_count());
    let rs = sim
        .run(SimTime::from_units(s.until))
        .map_err(|e| e.to_string())?;
    let fails = &rs.failures;
    ensure(!fails.is_empty(), || "no failures happened".into())?;
    ensure(fails.iter().all(|f| f.time.as_units() > 500.0), || {
        "failure at or before t=500".into()
    })?;
    let removed: usize = fails.iter().map(|f| f.removed_links.len()).sum();
    let now = (sim.topology().node_count(), sim.topology().link_count());
    ensure(initial == (400, 2242), || {
        format!("initial graph {initial:?}")
    })?;
    ensure(now == (400 - fails.len(), 2242 - removed), || {
        format!(
            "final {now:?} vs {} failures and {removed} removed links",
            fails.len()
        )
    })?;

    let mut drops: BTreeMap<MessageId, usize> = BTreeMap::new();
    for d in &rs.drops {
        *drops.entry(d.id).or_default() += 1;
    }
    let (mut rerouted, mut dropped) = (0, 0);
    for f in fails {
        for a in &f.affected {
            match &a.outcome {
                Outcome::Rerouted(path) => {
                    ensure(!path.contains(&f.node), || {
                        format!("id {} rerouted through {}", a.id, f.node)
                    })?;
                    // Nothing of this message may touch the node afterwards.
                    ensure(
                        rs.link_trace
                            .iter()
                            .filter(|e| e.id == a.id && e.enqueue >= f.time)
                            .all(|e| e.from != f.node && e.to != f.node),
                        || format!("id {} crossed failed node {}", a.id, f.node),
                    )?;
                    rerouted += 1;
                }
                Outcome::Dropped(_) => {
                    ensure(drops.get(&a.id) == Some(&1), || {
                        format!("id {} has {:?} drop records", a.id, drops.get(&a.id))
                    })?;
                    dropped += 1;
                }
            }
        }
    }
    // No traversal of any link incident to a node after it failed.
    for f in fails {
        ensure(
            rs.link_trace
                .iter()
                .all(|e| e.start < f.time || (e.from != f.node && e.to != f.node)),
            || format!("traffic through node {} after it failed", f.node),
        )?;
    }
    Ok(format!(
        "{} failures from t={:.1}, {removed} links removed, final {}/{}; {rerouted} rerouted, {dropped} dropped",
        fails.len(),
        fails[0].time.as_units(),
        now.0,
        now.1
    ))
}

fn c7_mobility() -> Check {
    let s = presets::mobility(1);
    let until = SimTime::from_units(s.until);
    let rs = run(&s, false);
    let hops: Vec<f64> = rs.metrics("hops_before").map(|(_, v)| v).collect();
    let zero = hops
        .iter()
        .position(|&h| h == 0.0)
        .ok_or("hop distance never reached 0")?;
    ensure(hops[..=zero].windows(2).all(|w| w[1] < w[0]), || {
        format!("hops not strictly decreasing: {hops:?}")
    })?;
    ensure(hops[zero..].iter().all(|&h| h == 0.0), || {
        format!("hops rose after reaching 0: {hops:?}")
    })?;

    let w = SimTime::from_units(presets::MOVEMENT_PERIOD);
    let series = compute_series(&rs.compute, Metric::Latency, Anchor::Emit, w, until, |_| {
        true
    })
    .map_err(|e| e.to_string())?;
    let means: Vec<f64> = series
        .buckets
        .iter()
        .filter(|b| b.start < until)
        .filter_map(|b| b.mean())
        .collect();
    ensure(means.windows(2).all(|p| p[1] <= p[0] + 1e-9), || {
        format!("latency rose: {means:?}")
    })?;
    let (first, last) = (means[0], *means.last().unwrap());
    ensure(last <= 0.5 * first, || {
        format!("final {last} > half of initial {first}")
    })?;
    Ok(format!(
        "hops {:?} reach 0 at tick {}; latency {first:.2} -> {last:.2}",
        &hops[..=zero.min(11)],
        zero + 1
    ))
}

fn c8_oracle() -> Check {
    let mut lines = Vec::new();
    for m in micro::all() {
        let want = oracle::simulate(&m);
        ensure(want.events <= 50, || {
            format!("{}: {} events", m.name, want.events)
        })?;
        let got = micro::run_engine(&m);
        micro::compare(&m, &want, &got)?;
        lines.push(format!("{} ({} events)", m.name, want.events));
    }
    Ok(format!("engine matches oracle on {}", lines.join(", ")))
}

fn csv_bytes(rs: &ResultSet) -> Vec<Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    write_results(dir.path(), rs).unwrap();
    [COMPUTE_FILE, LINK_FILE, DROP_FILE, CONTROL_FILE]
        .iter()
        .map(|f| std::fs::read(dir.path().join(f)).unwrap())
        .collect()
}

fn header(bytes: &[u8]) -> &[u8] {
    bytes.split(|&b| b == b'\n').next().unwrap_or(&[])
}

fn c9_determinism() -> Check {
    let mut cases = vec![
        ("egg-edge", egg(4, EggPolicy::Edge, 5e3, 1)),
        ("egg-cloud", egg(4, EggPolicy::Cloud, 5e3, 1)),
    ];
    for (name, f) in [
        ("scaling", presets::scaling as fn(u64) -> Scenario),
        ("failures", presets::failures),
        ("mobility", presets::mobility),
    ] {
        let mut s = f(1);
        s.until = 4000.0;
        cases.push((name, s));
        let mut other = f(2);
        other.until = 4000.0;
        let (a, b) = (cases.last().unwrap().1.sender_nodes(), other.sender_nodes());
        ensure(a != b, || format!("{name}: seed 2 keeps the same senders"))?;
        let (ra, rb) = (run(&cases.last().unwrap().1, false), run(&other, false));
        let (ca, cb) = (csv_bytes(&ra), csv_bytes(&rb));
        for (x, y) in ca.iter().zip(&cb) {
            ensure(header(x) == header(y), || {
                format!("{name}: header changed with the seed")
            })?;
        }
        check_algebra(&rb)?;
        let back = {
            let dir = tempfile::tempdir().unwrap();
            write_results(dir.path(), &rb).unwrap();
            read_results(dir.path()).map_err(|e| e.to_string())?
        };
        ensure(back.compute == rb.compute && back.links == rb.links, || {
            format!("{name}: seed 2 output does not round-trip")
        })?;
    }
    for (name, s) in &cases {
        let a = csv_bytes(&run(s, false));
        let b = csv_bytes(&run(s, false));
        ensure(a == b, || {
            format!("{name}: CSV output differs between identical runs")
        })?;
        ensure(!a[0].is_empty() && !a[1].is_empty(), || {
            format!("{name}: empty output")
        })?;
    }
    Ok(format!(
        "{} presets byte-identical on rerun; seed change moves senders, keeps headers and identities",
        cases.len()
    ))
}

#[derive(serde::Deserialize)]
struct CorpusGraph {
    name: String,
    nodes: Vec<u32>,
    edges: Vec<(u32, u32)>,
    betweenness: BTreeMap<String, f64>,
}

/// Normalized betweenness by enumerating every shortest path explicitly.
fn brute_betweenness(nodes: &[u32], edges: &[(u32, u32)]) -> BTreeMap<u32, f64> {
    let adj: BTreeMap<u32, Vec<u32>> = nodes
        .iter()
        .map(|&n| {
            let mut v: Vec<u32> = edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == n {
                        Some(b)
                    } else if b == n {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            v.sort();
            (n, v)
        })
        .collect();
    let dist = |s: u32| -> BTreeMap<u32, usize> {
        let mut d = BTreeMap::from([(s, 0)]);
        let mut frontier = vec![s];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for u in frontier {
                for &v in &adj[&u] {
                    if !d.contains_key(&v) {
                        d.insert(v, d[&u] + 1);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        d
    };
    fn paths(
        adj: &BTreeMap<u32, Vec<u32>>,
        path: &mut Vec<u32>,
        t: u32,
        len: usize,
        out: &mut Vec<Vec<u32>>,
    ) {
        let u = *path.last().unwrap();
        if path.len() - 1 == len {
            if u == t {
                out.push(path.clone());
            }
            return;
        }
        for &v in &adj[&u] {
            if !path.contains(&v) {
                path.push(v);
                paths(adj, path, t, len, out);
                path.pop();
            }
        }
    }
    let mut score: BTreeMap<u32, f64> = nodes.iter().map(|&n| (n, 0.0)).collect();
    for &s in nodes {
        let d = dist(s);
        for &t in nodes {
            let Some(&len) = d.get(&t) else { continue };
            if s == t {
                continue;
            }
            let mut all = Vec::new();
            paths(&adj, &mut vec![s], t, len, &mut all);
            for p in &all {
                for v in &p[1..p.len() - 1] {
                    *score.get_mut(v).unwrap() += 1.0 / all.len() as f64;
                }
            }
        }
    }
    let n = nodes.len() as f64;
    let scale = if n > 2.0 {
        1.0 / ((n - 1.0) * (n - 2.0))
    } else {
        0.0
    };
    score.values_mut().for_each(|v| *v *= scale);
    score
}

fn c10_betweenness() -> Check {
    let text = include_str!("../data/betweenness.json");
    let corpus: Vec<CorpusGraph> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for g in &corpus {
        ensure(g.nodes.len() <= 30, || {
            format!("{}: {} nodes", g.name, g.nodes.len())
        })?;
        let mut topo = TopologyGraph::new();
        for &n in &g.nodes {
            topo.add_node(NodeAttrs::new(n, 1.0, 0.0)).unwrap();
        }
        for &(a, b) in &g.edges {
            topo.add_link(LinkAttrs::new(a, b, 1.0, 0.0)).unwrap();
        }
        let ours = topo.betweenness_centrality();
        let brute = brute_betweenness(&g.nodes, &g.edges);
        for &n in &g.nodes {
            let got = ours[&NodeId(n)];
            let reference = g.betweenness[&n.to_string()];
            let err = (got - brute[&n]).abs().max((got - reference).abs());
            ensure(err <= 1e-9, || {
                format!(
                    "{} node {n}: ours {got}, brute {}, reference {reference}",
                    g.name, brute[&n]
                )
            })?;
            worst = worst.max(err);
        }
    }
    Ok(format!(
        "{} graphs, max abs error {worst:.1e}",
        corpus.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "timestamp algebra", c1_timestamp_algebra),
        (2, "edge policy flatness", c2_edge_flatness),
        (3, "convergence tightening", c3_convergence),
        (4, "cloud saturation", c4_cloud_saturation),
        (5, "dynamic scaling", c5_scaling),
        (6, "node failures", c6_failures),
        (7, "mobility", c7_mobility),
        (8, "oracle equivalence", c8_oracle),
        (9, "determinism", c9_determinism),
        (10, "betweenness oracle", c10_betweenness),
    ];
    let picked: BTreeSet<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !picked.is_empty() && !picked.contains(&n) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
