//! Brute-force reference simulator for tiny scenarios.
//!
//! Floating-point clock, linear-scan event list, exhaustive path search.
//! Shares no code with the engine: it is written from the model rules
//! alone (FIFO links and servers, nearest replica, lexicographically
//! smallest shortest path, FIFO among simultaneous events).

use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Source,
    Module,
    Sink,
}

#[derive(Debug, Clone)]
pub struct Msg {
    pub name: &'static str,
    pub src: &'static str,
    pub dst: &'static str,
    pub instructions: f64,
    pub bytes: f64,
    pub broadcast: bool,
}

#[derive(Debug, Clone)]
pub enum Deploy {
    Module(&'static str, u32),
    Sink(&'static str, u32),
    /// message, node, first firing, period
    Source(&'static str, u32, Option<f64>, f64),
}

#[derive(Debug, Clone)]
pub struct Micro {
    pub name: &'static str,
    pub nodes: Vec<(u32, f64)>,
    pub links: Vec<(u32, u32, f64, f64)>,
    pub modules: Vec<(&'static str, Kind)>,
    pub messages: Vec<Msg>,
    /// module, message in, message out (None absorbs)
    pub rules: Vec<(&'static str, &'static str, Option<&'static str>)>,
    pub deploy: Vec<Deploy>,
    pub until: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comp {
    pub id: u64,
    pub sink: bool,
    pub module: String,
    pub message: String,
    pub des_src: u64,
    pub des_dst: u64,
    pub topo_src: u32,
    pub topo_dst: u32,
    pub module_src: String,
    pub service: Option<f64>,
    pub time_in: f64,
    pub time_out: f64,
    pub time_emit: f64,
    pub time_reception: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: u64,
    pub src: u32,
    pub dst: u32,
    pub latency: f64,
    pub message: String,
    pub ctime: f64,
    pub size: f64,
    pub buffer: u64,
}

#[derive(Debug, Default)]
pub struct Log {
    pub compute: Vec<Comp>,
    pub links: Vec<Link>,
    pub events: usize,
}

#[derive(Debug, Clone)]
struct Packet {
    id: u64,
    msg: usize,
    src_des: u64,
    src_node: u32,
    module_src: String,
    emit: f64,
    dst_des: u64,
    path: Vec<u32>,
    at: usize,
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    Fire(usize),
    Free(u32, u32),
    Land(usize),
    Done(u64),
}

#[derive(Debug)]
enum Proc {
    Server {
        module: &'static str,
        node: u32,
        busy: Option<(Packet, f64, f64)>,
        waiting: VecDeque<(Packet, f64)>,
    },
    Sink {
        module: &'static str,
        node: u32,
    },
    Source,
}

/// Busy flag plus waiting (packet, gauge at enqueue) pairs.
type Channel = (bool, VecDeque<(usize, u64)>);

struct World<'a> {
    m: &'a Micro,
    now: f64,
    seq: u64,
    events: Vec<(f64, u64, Ev)>,
    procs: Vec<Proc>,
    packets: Vec<Packet>,
    channels: BTreeMap<(u32, u32), Channel>,
    gauge: u64,
    next_id: u64,
    log: Log,
}

/// All shortest simple paths from `a` to `b`, lexicographically smallest
/// first. Empty when unreachable.
pub fn shortest_paths(links: &[(u32, u32, f64, f64)], a: u32, b: u32) -> Vec<Vec<u32>> {
    fn walk(links: &[(u32, u32, f64, f64)], path: &mut Vec<u32>, b: u32, out: &mut Vec<Vec<u32>>) {
        let here = *path.last().unwrap();
        if here == b {
            out.push(path.clone());
            return;
        }
        for &(x, y, _, _) in links {
            let next = if x == here {
                y
            } else if y == here {
                x
            } else {
                continue;
            };
            if !path.contains(&next) {
                path.push(next);
                walk(links, path, b, out);
                path.pop();
            }
        }
    }
    let mut all = Vec::new();
    walk(links, &mut vec![a], b, &mut all);
    let Some(best) = all.iter().map(Vec::len).min() else {
        return all;
    };
    all.retain(|p| p.len() == best);
    all.sort();
    all
}

impl<'a> World<'a> {
    fn push(&mut self, t: f64, ev: Ev) {
        self.events.push((t, self.seq, ev));
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<(f64, Ev)> {
        let (i, _) = self
            .events
            .iter()
            .enumerate()
            .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0).then(x.1 .1.cmp(&y.1 .1)))?;
        let (t, _, ev) = self.events.swap_remove(i);
        Some((t, ev))
    }

    fn msg(&self, name: &str) -> usize {
        self.m.messages.iter().position(|x| x.name == name).unwrap()
    }

    fn kind(&self, module: &str) -> Kind {
        self.m.modules.iter().find(|x| x.0 == module).unwrap().1
    }

    fn link(&self, a: u32, b: u32) -> (f64, f64) {
        let l = self
            .m
            .links
            .iter()
            .find(|l| (l.0, l.1) == (a, b) || (l.0, l.1) == (b, a))
            .unwrap();
        (l.2, l.3)
    }

    fn replicas(&self, module: &str) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        for (i, p) in self.procs.iter().enumerate() {
            match p {
                Proc::Server {
                    module: m, node, ..
                }
                | Proc::Sink { module: m, node }
                    if *m == module =>
                {
                    out.push((i as u64, *node))
                }
                _ => {}
            }
        }
        out
    }

    fn emit(&mut self, msg: usize, id: u64, src_des: u64, src_node: u32, module_src: String) {
        let spec = &self.m.messages[msg];
        let mut targets = Vec::new();
        if spec.broadcast {
            for (des, node) in self.replicas(spec.dst) {
                if let Some(p) = shortest_paths(&self.m.links, src_node, node)
                    .into_iter()
                    .next()
                {
                    targets.push((des, p));
                }
            }
        } else {
            let mut best: Option<(usize, u32, u64, Vec<u32>)> = None;
            for (des, node) in self.replicas(spec.dst) {
                if let Some(p) = shortest_paths(&self.m.links, src_node, node)
                    .into_iter()
                    .next()
                {
                    let key = (p.len(), node, des);
                    if best.as_ref().map_or(true, |b| key < (b.0, b.1, b.2)) {
                        best = Some((p.len(), node, des, p));
                    }
                }
            }
            targets.extend(best.map(|b| (b.2, b.3)));
        }
        assert!(!targets.is_empty(), "micro scenarios never drop");
        for (des, path) in targets {
            let k = self.packets.len();
            self.packets.push(Packet {
                id,
                msg,
                src_des,
                src_node,
                module_src: module_src.clone(),
                emit: self.now,
                dst_des: des,
                path,
                at: 0,
            });
            self.advance(k);
        }
    }

    /// Packet `k` sits at `path[at]`.
    fn advance(&mut self, k: usize) {
        let p = &self.packets[k];
        if p.at + 1 == p.path.len() {
            self.arrive(k);
            return;
        }
        let (a, b) = (p.path[p.at], p.path[p.at + 1]);
        let ch = self
            .channels
            .entry((a, b))
            .or_insert((false, VecDeque::new()));
        if !ch.0 && ch.1.is_empty() {
            self.send(k, a, b, 0);
        } else {
            self.gauge += 1;
            let g = self.gauge;
            self.channels.get_mut(&(a, b)).unwrap().1.push_back((k, g));
        }
    }

    fn send(&mut self, k: usize, a: u32, b: u32, buffer: u64) {
        let (bw, pr) = self.link(a, b);
        let p = &self.packets[k];
        let spec = &self.m.messages[p.msg];
        let tx = spec.bytes / bw;
        self.log.links.push(Link {
            id: p.id,
            src: a,
            dst: b,
            latency: tx + pr,
            message: spec.name.to_string(),
            ctime: self.now,
            size: spec.bytes,
            buffer,
        });
        self.channels.get_mut(&(a, b)).unwrap().0 = true;
        let now = self.now;
        self.push(now + tx, Ev::Free(a, b));
        self.push(now + tx + pr, Ev::Land(k));
    }

    fn arrive(&mut self, k: usize) {
        let p = self.packets[k].clone();
        let now = self.now;
        match &mut self.procs[p.dst_des as usize] {
            Proc::Sink { module, node } => {
                let module = *module;
                let node = *node;
                let from_source = self.kind(&p.module_src) == Kind::Source;
                self.log.compute.push(Comp {
                    id: p.id,
                    sink: true,
                    module: module.to_string(),
                    message: self.m.messages[p.msg].name.to_string(),
                    des_src: p.src_des,
                    des_dst: p.dst_des,
                    topo_src: p.src_node,
                    topo_dst: node,
                    module_src: p.module_src.clone(),
                    service: if from_source { None } else { Some(0.0) },
                    time_in: now,
                    time_out: now,
                    time_emit: p.emit,
                    time_reception: now,
                });
            }
            Proc::Server { busy, waiting, .. } => {
                if busy.is_some() {
                    waiting.push_back((p, now));
                } else {
                    self.start(p.dst_des, p, now);
                }
            }
            Proc::Source => unreachable!(),
        }
    }

    fn start(&mut self, des: u64, p: Packet, reception: f64) {
        let now = self.now;
        let ipt = {
            let Proc::Server { node, .. } = &self.procs[des as usize] else {
                unreachable!()
            };
            self.m.nodes.iter().find(|n| n.0 == *node).unwrap().1
        };
        let service = self.m.messages[p.msg].instructions / ipt;
        let Proc::Server { busy, .. } = &mut self.procs[des as usize] else {
            unreachable!()
        };
        *busy = Some((p, reception, now));
        self.push(now + service, Ev::Done(des));
    }

    fn done(&mut self, des: u64) {
        let now = self.now;
        let Proc::Server {
            module, node, busy, ..
        } = &mut self.procs[des as usize]
        else {
            unreachable!()
        };
        let (module, node) = (*module, *node);
        let (p, reception, time_in) = busy.take().unwrap();
        let name = self.m.messages[p.msg].name;
        self.log.compute.push(Comp {
            id: p.id,
            sink: false,
            module: module.to_string(),
            message: name.to_string(),
            des_src: p.src_des,
            des_dst: des,
            topo_src: p.src_node,
            topo_dst: node,
            module_src: p.module_src.clone(),
            service: Some(now - time_in),
            time_in,
            time_out: now,
            time_emit: p.emit,
            time_reception: reception,
        });
        let outs: Vec<&'static str> = self
            .m
            .rules
            .iter()
            .filter(|r| r.0 == module && r.1 == name)
            .filter_map(|r| r.2)
            .collect();
        for out in outs {
            let k = self.msg(out);
            self.emit(k, p.id, des, node, module.to_string());
        }
        let Proc::Server { waiting, .. } = &mut self.procs[des as usize] else {
            unreachable!()
        };
        if let Some((next, reception)) = waiting.pop_front() {
            self.start(des, next, reception);
        }
    }
}

pub fn simulate(m: &Micro) -> Log {
    let mut w = World {
        m,
        now: 0.0,
        seq: 0,
        events: Vec::new(),
        procs: Vec::new(),
        packets: Vec::new(),
        channels: BTreeMap::new(),
        gauge: 0,
        next_id: 1,
        log: Log::default(),
    };
    let mut sources = Vec::new();
    for d in &m.deploy {
        match *d {
            Deploy::Module(module, node) => w.procs.push(Proc::Server {
                module,
                node,
                busy: None,
                waiting: VecDeque::new(),
            }),
            Deploy::Sink(module, node) => w.procs.push(Proc::Sink { module, node }),
            Deploy::Source(msg, node, first, period) => {
                sources.push((w.procs.len() as u64, w.msg(msg), node, period));
                w.procs.push(Proc::Source);
                let k = sources.len() - 1;
                w.push(first.unwrap_or(period), Ev::Fire(k));
            }
        }
    }
    while let Some((t, ev)) = w.pop() {
        if t > m.until {
            break;
        }
        w.now = t;
        w.log.events += 1;
        match ev {
            Ev::Fire(k) => {
                let (des, msg, node, period) = sources[k];
                let id = w.next_id;
                w.next_id += 1;
                let src = m.messages[msg].src.to_string();
                w.emit(msg, id, des, node, src);
                w.push(t + period, Ev::Fire(k));
            }
            Ev::Free(a, b) => {
                let ch = w.channels.get_mut(&(a, b)).unwrap();
                ch.0 = false;
                if let Some((k, buffer)) = ch.1.pop_front() {
                    w.gauge -= 1;
                    w.send(k, a, b, buffer);
                }
            }
            Ev::Land(k) => {
                w.packets[k].at += 1;
                w.advance(k);
            }
            Ev::Done(des) => w.done(des),
        }
    }
    w.log
}
