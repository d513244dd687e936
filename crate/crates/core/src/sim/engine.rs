use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{BestResponseOutcome, EpochRecord, IntervalRow, NodeSummary, SimReport};
use super::{dcf_star_update, execute_txop, SimError, SimScenario, StrategyPolicy};
use crate::channel::{rbar_select_rate, LinkModel, TimeBlockFading};
use crate::game::{strictly_better, BurstPolicy, Discipline};
use crate::phy::{frame_airtime, max_burst_frames, Strategy};

const STREAM_CHANNEL: u64 = 1 << 32;
const STREAM_BACKOFF: u64 = 2 << 32;

fn secs_to_ns(s: f64) -> u64 {
    (s * 1e9).round() as u64
}

fn ns_to_secs(ns: u64) -> f64 {
    ns as f64 * 1e-9
}

fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
struct Counters {
    txops: u64,
    collisions: u64,
    attempted: u64,
    succeeded: u64,
    channel_ns: u64,
    bits: u64,
}

#[derive(Debug, Clone, Copy)]
struct StrategyTiming {
    airtime_ns: u64,
    burst: u32,
    min_fade: f64,
}

struct Node {
    name: String,
    link: LinkModel,
    policy: StrategyPolicy,
    strategy: Strategy,
    timing: BTreeMap<Strategy, StrategyTiming>,
    cw: f64,
    cw_min_eff: f64,
    backoff: u64,
    fading: TimeBlockFading,
    rng_channel: ChaCha8Rng,
    rng_backoff: ChaCha8Rng,
    c: Counters,
}

impl Node {
    fn draw_backoff(&mut self) {
        let u: f64 = self.rng_backoff.random();
        self.backoff = (u * (self.cw + 1.0)).floor() as u64;
    }

    fn set_strategy(&mut self, s: Strategy) {
        if s != self.strategy {
            self.strategy = s;
            self.fading.reset();
        }
    }

    /// Strategy for an access starting at `now`. Auto-rate nodes pick the
    /// rate from the fade level at that instant.
    fn access_strategy(&mut self, now: u64, sc: &SimScenario) -> Strategy {
        if let (StrategyPolicy::AutoRate { payload_bits }, LinkModel::Fading(ch)) = (&self.policy, &self.link) {
            let fade = self.fading.fade_at(now, &mut self.rng_channel);
            let rate = rbar_select_rate(ch, &sc.phy, ch.power_dbm(fade));
            self.strategy = Strategy::new(rate, *payload_bits);
        }
        self.strategy
    }

    fn fail(&mut self, cw_max: f64) {
        self.cw = (2.0 * self.cw + 1.0).min(cw_max).max(self.cw_min_eff);
    }
}

struct Probe {
    node: usize,
    start: u64,
    candidates: Vec<Strategy>,
    incumbent: Strategy,
    idx: usize,
    measuring: bool,
    phase_end: u64,
    bits0: u64,
    t0: u64,
    results: Vec<(Strategy, f64)>,
}

struct BrState {
    order: Vec<usize>,
    turn: usize,
    switches: u32,
    epochs: u32,
    done: bool,
    converged_at: Option<u64>,
    bits_at_convergence: Vec<u64>,
    probe: Option<Probe>,
    history: Vec<EpochRecord>,
}

pub(super) struct Engine<'a> {
    sc: &'a SimScenario,
    nodes: Vec<Node>,
    now: u64,
    end: u64,
    slot_ns: u64,
    cw_max: f64,
    burst: Option<BurstPolicy>,
    idle_ns: u64,
    collision_ns: u64,

    report_ns: u64,
    next_report: u64,
    last_report: u64,
    report_snap: Vec<Counters>,
    intervals: Vec<IntervalRow>,

    controller: bool,
    ctrl_ns: u64,
    next_ctrl: u64,
    ctrl_snap: Vec<u64>,
    ctrl_est: Vec<f64>,
    targets: Vec<f64>,

    br: Option<BrState>,
}

impl<'a> Engine<'a> {
    pub(super) fn new(sc: &'a SimScenario) -> Result<Self, SimError> {
        let phy = &sc.phy;
        let mut nodes = Vec::with_capacity(sc.nodes.len());
        for (i, cfg) in sc.nodes.iter().enumerate() {
            let mut timing = BTreeMap::new();
            for s in cfg.policy.reachable(phy) {
                timing.insert(
                    s,
                    StrategyTiming {
                        airtime_ns: secs_to_ns(frame_airtime(&s, phy)?).max(1),
                        burst: max_burst_frames(&s, phy)?,
                        min_fade: cfg.link.min_fade(&s)?,
                    },
                );
            }
            let shortest = timing.values().map(|t| t.airtime_ns).min().unwrap_or(1);
            let block_ns = shortest * u64::from(cfg.link.coherence_samples());
            let mut node = Node {
                name: cfg.name.clone(),
                link: cfg.link.clone(),
                policy: cfg.policy.clone(),
                strategy: cfg.policy.initial(phy),
                timing,
                cw: phy.cw_min as f64,
                cw_min_eff: phy.cw_min as f64,
                backoff: 0,
                fading: TimeBlockFading::new(block_ns),
                rng_channel: sub_rng(sc.seed, STREAM_CHANNEL + i as u64),
                rng_backoff: sub_rng(sc.seed, STREAM_BACKOFF + i as u64),
                c: Counters::default(),
            };
            node.draw_backoff();
            nodes.push(node);
        }
        let n = nodes.len();
        let report_ns = secs_to_ns(sc.report_interval).max(1);
        let ctrl_ns = secs_to_ns(sc.dcf_star.period).max(1);
        let order: Vec<usize> = sc
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c.policy, StrategyPolicy::BestResponse { .. }))
            .map(|(i, _)| i)
            .collect();
        let br = (!order.is_empty()).then(|| BrState {
            order,
            turn: 0,
            switches: 0,
            epochs: 0,
            done: false,
            converged_at: None,
            bits_at_convergence: Vec::new(),
            probe: None,
            history: Vec::new(),
        });
        Ok(Engine {
            sc,
            nodes,
            now: 0,
            end: secs_to_ns(sc.duration),
            slot_ns: secs_to_ns(phy.slot_time).max(1),
            cw_max: phy.cw_max as f64,
            burst: match sc.discipline {
                Discipline::Edcf(p) => Some(p),
                _ => None,
            },
            idle_ns: 0,
            collision_ns: 0,
            report_ns,
            next_report: report_ns,
            last_report: 0,
            report_snap: vec![Counters::default(); n],
            intervals: Vec::new(),
            controller: sc.discipline == Discipline::TimeFair,
            ctrl_ns,
            next_ctrl: ctrl_ns,
            ctrl_snap: vec![0; n],
            ctrl_est: vec![0.0; n],
            targets: sc.dcf_star.normalised_targets(n),
            br,
        })
    }

    pub(super) fn run(mut self) -> SimReport {
        if self.br.is_some() {
            self.start_probe();
        }
        while self.now < self.end {
            self.hooks();
            self.step();
        }
        self.hooks();
        if self.now > self.last_report {
            self.emit_interval();
        }
        self.finish()
    }

    fn step(&mut self) {
        let k = self.nodes.iter().map(|n| n.backoff).min().unwrap_or(0);
        let idle = k * self.slot_ns;
        self.now += idle;
        self.idle_ns += idle;
        for n in &mut self.nodes {
            n.backoff -= k;
        }
        let winners: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.nodes[i].backoff == 0).collect();
        if let [w] = winners[..] {
            self.transmit(w);
        } else {
            self.collide(&winners);
        }
        for w in winners {
            self.nodes[w].draw_backoff();
        }
    }

    fn transmit(&mut self, i: usize) {
        let now = self.now;
        let sc = self.sc;
        let node = &mut self.nodes[i];
        let s = node.access_strategy(now, sc);
        let t = node.timing[&s];
        let (policy, max_frames) = match self.burst {
            Some(p) => (p, t.burst),
            None => (BurstPolicy::Bfl, 1),
        };
        let (fading, rng) = (&mut node.fading, &mut node.rng_channel);
        let res = execute_txop(policy, max_frames, t.airtime_ns, now, |at| fading.fade_at(at, rng) >= t.min_fade);
        node.c.txops += 1;
        node.c.attempted += u64::from(res.frames);
        node.c.succeeded += u64::from(res.successes);
        node.c.channel_ns += res.time_ns;
        node.c.bits += u64::from(res.successes) * u64::from(s.payload_bits);
        if res.last_ok {
            node.cw = node.cw_min_eff;
        } else {
            node.fail(self.cw_max);
        }
        self.now += res.time_ns;
    }

    fn collide(&mut self, winners: &[usize]) {
        let now = self.now;
        let mut dur = 0;
        for &w in winners {
            let node = &mut self.nodes[w];
            let s = node.access_strategy(now, self.sc);
            dur = dur.max(node.timing[&s].airtime_ns);
            node.c.collisions += 1;
            node.c.attempted += 1;
            node.fail(self.cw_max);
        }
        self.now += dur;
        self.collision_ns += dur;
    }

    fn hooks(&mut self) {
        if self.now >= self.next_report {
            self.emit_interval();
            self.next_report = (self.now / self.report_ns + 1) * self.report_ns;
        }
        if self.controller && self.now >= self.next_ctrl {
            self.adapt_windows();
            self.next_ctrl = (self.now / self.ctrl_ns + 1) * self.ctrl_ns;
        }
        self.advance_best_response();
    }

    fn emit_interval(&mut self) {
        let dt = ns_to_secs(self.now - self.last_report);
        for (node, snap) in self.nodes.iter().zip(self.report_snap.iter_mut()) {
            let att = node.c.attempted - snap.attempted;
            let ok = node.c.succeeded - snap.succeeded;
            self.intervals.push(IntervalRow {
                time_s: ns_to_secs(self.now),
                node: node.name.clone(),
                throughput_mbps: (node.c.bits - snap.bits) as f64 / dt / 1e6,
                share: ns_to_secs(node.c.channel_ns - snap.channel_ns) / dt,
                loss_rate: if att == 0 { 0.0 } else { 1.0 - ok as f64 / att as f64 },
                cw_min_eff: node.cw_min_eff,
                strategy: self.sc.label(&node.strategy),
            });
            *snap = node.c;
        }
        self.last_report = self.now;
    }

    fn adapt_windows(&mut self) {
        let cfg = &self.sc.dcf_star;
        for ((est, snap), node) in self.ctrl_est.iter_mut().zip(&mut self.ctrl_snap).zip(&self.nodes) {
            let window = (node.c.channel_ns - *snap) as f64;
            *est = cfg.smoothing * *est + (1.0 - cfg.smoothing) * window;
            *snap = node.c.channel_ns;
        }
        let total: f64 = self.ctrl_est.iter().sum();
        if total <= 0.0 {
            return;
        }
        for ((node, est), target) in self.nodes.iter_mut().zip(&self.ctrl_est).zip(&self.targets) {
            node.cw_min_eff = dcf_star_update(node.cw_min_eff, est / total, *target, cfg);
            node.cw = node.cw.max(node.cw_min_eff);
        }
    }

    fn start_probe(&mut self) {
        let now = self.now;
        let settle = secs_to_ns(self.sc.best_response.settle);
        let Some(br) = self.br.as_mut() else { return };
        let i = br.order[br.turn];
        let node = &mut self.nodes[i];
        let StrategyPolicy::BestResponse { candidates, .. } = &node.policy else {
            unreachable!("only best-response nodes are scheduled")
        };
        let candidates = candidates.clone();
        let incumbent = node.strategy;
        node.set_strategy(candidates[0]);
        br.probe = Some(Probe {
            node: i,
            start: now,
            candidates,
            incumbent,
            idx: 0,
            measuring: false,
            phase_end: now + settle,
            bits0: 0,
            t0: 0,
            results: Vec::new(),
        });
    }

    fn advance_best_response(&mut self) {
        let now = self.now;
        let settle = secs_to_ns(self.sc.best_response.settle);
        let window = secs_to_ns(self.sc.best_response.probe_window).max(1);
        loop {
            let Some(br) = self.br.as_mut() else { return };
            if br.done {
                return;
            }
            let Some(probe) = br.probe.as_mut() else { return };
            if now < probe.phase_end {
                return;
            }
            let node = &mut self.nodes[probe.node];
            if !probe.measuring {
                probe.measuring = true;
                probe.bits0 = node.c.bits;
                probe.t0 = now;
                probe.phase_end = now + window;
                return;
            }
            let rate = (node.c.bits - probe.bits0) as f64 / ns_to_secs(now - probe.t0);
            probe.results.push((probe.candidates[probe.idx], rate));
            probe.idx += 1;
            if probe.idx < probe.candidates.len() {
                node.set_strategy(probe.candidates[probe.idx]);
                probe.measuring = false;
                probe.phase_end = now + settle;
                continue;
            }

            let margin = 1.0 + self.sc.best_response.switch_margin;
            let incumbent_rate = probe
                .results
                .iter()
                .find(|(s, _)| *s == probe.incumbent)
                .map(|r| r.1)
                .unwrap_or(f64::NEG_INFINITY);
            let mut chosen = (probe.incumbent, incumbent_rate);
            for &(s, v) in &probe.results {
                if s != probe.incumbent && strictly_better(v, chosen.1) && v >= incumbent_rate * margin {
                    chosen = (s, v);
                }
            }
            node.set_strategy(chosen.0);
            if chosen.0 != probe.incumbent {
                br.switches += 1;
            }
            br.history.push(EpochRecord {
                node: node.name.clone(),
                start_s: ns_to_secs(probe.start),
                incumbent: probe.incumbent,
                chosen: chosen.0,
                measured: std::mem::take(&mut probe.results),
            });
            br.probe = None;
            br.epochs += 1;
            br.turn += 1;
            if br.turn == br.order.len() {
                if br.switches == 0 {
                    br.done = true;
                    br.converged_at = Some(now);
                    br.bits_at_convergence = self.nodes.iter().map(|n| n.c.bits).collect();
                    return;
                }
                br.switches = 0;
                br.turn = 0;
            }
            if br.epochs >= self.sc.best_response.max_epochs {
                br.done = true;
                return;
            }
            self.start_probe();
        }
    }

    fn finish(self) -> SimReport {
        let elapsed_ns = self.now.max(1);
        let elapsed = ns_to_secs(elapsed_ns);
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSummary {
                name: n.name.clone(),
                throughput: n.c.bits as f64 / elapsed,
                share: n.c.channel_ns as f64 / elapsed_ns as f64,
                loss_rate: if n.c.attempted == 0 {
                    0.0
                } else {
                    1.0 - n.c.succeeded as f64 / n.c.attempted as f64
                },
                txops: n.c.txops,
                collisions: n.c.collisions,
                frames_attempted: n.c.attempted,
                frames_succeeded: n.c.succeeded,
                channel_time_ns: n.c.channel_ns,
                delivered_bits: n.c.bits,
                final_strategy: n.strategy,
                cw_min_effective: n.cw_min_eff,
            })
            .collect();
        let best_response = self.br.map(|br| {
            let post = br.converged_at.filter(|&t| self.now > t).map(|t| {
                let dt = ns_to_secs(self.now - t);
                self.nodes
                    .iter()
                    .zip(&br.bits_at_convergence)
                    .map(|(n, b0)| (n.c.bits - b0) as f64 / dt)
                    .collect()
            });
            BestResponseOutcome {
                converged: br.converged_at.is_some(),
                epochs: br.epochs,
                converged_at_s: br.converged_at.map(ns_to_secs),
                final_strategies: self.nodes.iter().map(|n| n.strategy).collect(),
                history: br.history,
                post_convergence_throughput: post,
            }
        });
        SimReport {
            nodes,
            elapsed_ns: self.now,
            idle_ns: self.idle_ns,
            collision_ns: self.collision_ns,
            intervals: self.intervals,
            best_response,
        }
    }
}
