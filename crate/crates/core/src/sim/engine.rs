//! The event loop.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::arrivals::{arrival_stream, protocol_stream, ArrivalProcess};
use super::medium::Medium;
use super::node::{node_step, Emit, Frame, NodeEvent, NodeState, StepContext, Timing};
use super::stats::{measure, PacketRecord, SimStats};
use super::time::Nanos;
use super::{SimConfig, SimError};
use crate::technique::AccessTechnique;

/// One frame put on the air.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxRecord {
    pub node: u32,
    pub packet: u64,
    pub frame: Frame,
    pub channel: u32,
    pub start: Nanos,
    pub end: Nanos,
    pub collided: bool,
    pub corrupted: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stats: SimStats,
    pub packets: Vec<PacketRecord>,
    pub transmissions: Vec<TxRecord>,
    /// Longest queue seen at any node.
    pub max_queue: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    TxEnd(usize),
    Arrival,
    SlotTick(u64),
    Node(NodeEvent),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    at: Nanos,
    node: u32,
    kind: Kind,
    seq: u64,
}

struct NodeRt {
    state: NodeState,
    queue: VecDeque<usize>,
    arrivals: Box<dyn Iterator<Item = Nanos>>,
    rng: ChaCha8Rng,
}

struct Engine<'a> {
    config: &'a SimConfig,
    timing: Timing,
    horizon: Nanos,
    nodes: Vec<NodeRt>,
    packets: Vec<PacketRecord>,
    txs: Vec<TxRecord>,
    medium: Medium,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    max_queue: usize,
}

fn timing_for(config: &SimConfig) -> Timing {
    let p = &config.params;
    let frame_secs = p.frame_time();
    let data_secs = match config.technique {
        AccessTechnique::Fdma => p.nodes as f64 * p.frame_bits as f64 / p.channel_rate,
        _ => frame_secs,
    };
    let bits = |n: u32| Nanos::from_secs(n as f64 / p.channel_rate);
    Timing {
        technique: config.technique,
        data: Nanos::from_secs(data_secs),
        frame: Nanos::from_secs(frame_secs),
        slot: Nanos::from_secs(p.slot),
        prop: Nanos::from_secs(p.prop_delay * frame_secs),
        sifs: Nanos::from_secs(config.csma.sifs),
        rts: bits(config.csma.rts_bits),
        cts: bits(config.csma.cts_bits),
        ack: bits(config.csma.ack_bits),
        backoff_window: config.backoff_window,
        retry_limit: match config.technique {
            AccessTechnique::CsmaCa => Some(config.csma.max_retries),
            AccessTechnique::PureAloha | AccessTechnique::SlottedAloha => config.aloha_max_retries,
            AccessTechnique::Tdma | AccessTechnique::Fdma => None,
        },
    }
}

impl<'a> Engine<'a> {
    fn new(config: &'a SimConfig, arrivals: Vec<Box<dyn Iterator<Item = Nanos>>>) -> Self {
        let timing = timing_for(config);
        let channels = match config.technique {
            AccessTechnique::Fdma => config.params.nodes as usize,
            _ => 1,
        };
        let nodes = arrivals
            .into_iter()
            .enumerate()
            .map(|(i, arrivals)| NodeRt {
                state: NodeState::Idle,
                queue: VecDeque::new(),
                arrivals,
                rng: protocol_stream(config.seed, i as u32),
            })
            .collect();
        Engine {
            config,
            timing,
            horizon: Nanos::from_secs(config.horizon),
            nodes,
            packets: Vec::new(),
            txs: Vec::new(),
            medium: Medium::new(channels, timing.prop),
            heap: BinaryHeap::new(),
            seq: 0,
            max_queue: 0,
        }
    }

    fn push(&mut self, at: Nanos, node: u32, kind: Kind) {
        self.seq += 1;
        self.heap.push(Reverse(Event { at, node, kind, seq: self.seq }));
    }

    fn schedule_arrival(&mut self, node: u32) {
        if let Some(at) = self.nodes[node as usize].arrivals.next() {
            if at < self.horizon {
                self.push(at, node, Kind::Arrival);
            }
        }
    }

    fn run(mut self) -> Result<RunOutput, SimError> {
        for n in 0..self.nodes.len() as u32 {
            self.schedule_arrival(n);
        }
        if self.config.technique == AccessTechnique::Tdma {
            self.push(Nanos::ZERO, 0, Kind::SlotTick(0));
        }

        while let Some(Reverse(ev)) = self.heap.pop() {
            if ev.at >= self.horizon {
                break;
            }
            let now = ev.at;
            match ev.kind {
                Kind::Arrival => {
                    let id = self.packets.len();
                    self.packets.push(PacketRecord {
                        id: id as u64,
                        source: ev.node,
                        created_at: now,
                        attempts: 0,
                        collisions: 0,
                        delivered_at: None,
                        dropped_at: None,
                    });
                    let queue = &mut self.nodes[ev.node as usize].queue;
                    queue.push_back(id);
                    self.max_queue = self.max_queue.max(queue.len());
                    self.schedule_arrival(ev.node);
                    self.step(ev.node, NodeEvent::Arrival, now)?;
                }
                Kind::SlotTick(k) => {
                    let n = self.nodes.len() as u64;
                    let next = k + 1;
                    self.push(self.timing.slot * next, (next % n) as u32, Kind::SlotTick(next));
                    self.step(ev.node, NodeEvent::SlotStart, now)?;
                }
                Kind::TxEnd(tx) => {
                    let ok = self.finish(tx);
                    self.step(ev.node, NodeEvent::TxEnd { ok }, now)?;
                }
                Kind::Node(event) => self.step(ev.node, event, now)?,
            }
        }

        let stats = measure(&self.packets, self.config);
        Ok(RunOutput { stats, packets: self.packets, transmissions: self.txs, max_queue: self.max_queue })
    }

    /// Settles the outcome of a transmission at its end.
    fn finish(&mut self, tx: usize) -> bool {
        let record = self.txs[tx];
        let packet = &mut self.packets[record.packet as usize];
        if record.collided {
            packet.collisions += 1;
            return false;
        }
        if record.frame == Frame::Data {
            if let Some(p) = self.config.params.failure_prob {
                let rng = &mut self.nodes[record.node as usize].rng;
                if rng.random::<f64>() < p {
                    self.txs[tx].corrupted = true;
                    return false;
                }
            }
        }
        true
    }

    fn step(&mut self, node: u32, event: NodeEvent, now: Nanos) -> Result<(), SimError> {
        let rt = &mut self.nodes[node as usize];
        let head_attempts = rt.queue.front().map_or(0, |&id| self.packets[id].attempts);
        let medium_busy = self.timing.technique == AccessTechnique::CsmaCa && self.medium.busy(0, node, now);
        let ctx = StepContext { now, queue_len: rt.queue.len(), head_attempts, medium_busy };
        let (state, emits) = node_step(&self.timing, rt.state, event, &ctx, &mut rt.rng)?;
        rt.state = state;

        for emit in emits {
            match emit {
                Emit::Delivered => {
                    let id = self.pop_head(node)?;
                    self.packets[id].delivered_at = Some(now + self.timing.prop);
                }
                Emit::Dropped => {
                    let id = self.pop_head(node)?;
                    self.packets[id].dropped_at = Some(now);
                }
                Emit::Timer { at, event } => self.push(at, node, Kind::Node(event)),
                Emit::Transmit(frame) => self.transmit(node, frame, now)?,
            }
        }
        Ok(())
    }

    fn pop_head(&mut self, node: u32) -> Result<usize, SimError> {
        self.nodes[node as usize].queue.pop_front().ok_or(SimError::Internal("empty queue popped"))
    }

    fn transmit(&mut self, node: u32, frame: Frame, now: Nanos) -> Result<(), SimError> {
        let t = self.timing;
        let &packet = self.nodes[node as usize]
            .queue
            .front()
            .ok_or(SimError::Internal("transmit with empty queue"))?;
        let counts_attempt = frame == Frame::Rts || t.technique != AccessTechnique::CsmaCa;
        if counts_attempt {
            self.packets[packet].attempts += 1;
        }

        let airtime = match frame {
            Frame::Rts => t.rts,
            Frame::Data => t.data,
        };
        let end = now + airtime;
        // occupancy seen by the collision check
        let extent = match t.technique {
            AccessTechnique::SlottedAloha => end.ceil_to(t.slot),
            _ => end,
        };
        let hold = match (t.technique, frame) {
            (AccessTechnique::CsmaCa, Frame::Rts) => end + t.exchange_after_rts(),
            (AccessTechnique::CsmaCa, Frame::Data) => end + t.sifs + t.ack,
            _ => extent,
        };
        let channel = match t.technique {
            AccessTechnique::Fdma => node,
            _ => 0,
        };

        let id = self.txs.len();
        let hits = self.medium.begin(id, node, channel, now, extent, hold);
        for &h in &hits {
            self.txs[h].collided = true;
        }
        self.txs.push(TxRecord {
            node,
            packet: packet as u64,
            frame,
            channel,
            start: now,
            end,
            collided: !hits.is_empty(),
            corrupted: false,
        });
        self.push(end, node, Kind::TxEnd(id));
        Ok(())
    }
}

/// Full run with Poisson arrivals: stats, packet log, every transmission.
pub fn run_detailed(config: &SimConfig) -> Result<RunOutput, SimError> {
    config.validate()?;
    let rate = config.params.require_arrival_rate(config.technique)?;
    let horizon = Nanos::from_secs(config.horizon);
    let arrivals = (0..config.params.nodes)
        .map(|n| {
            Box::new(ArrivalProcess::new(arrival_stream(config.seed, n), rate, horizon))
                as Box<dyn Iterator<Item = Nanos>>
        })
        .collect();
    Engine::new(config, arrivals).run()
}

pub fn run(config: &SimConfig) -> Result<(SimStats, Vec<PacketRecord>), SimError> {
    run_detailed(config).map(|o| (o.stats, o.packets))
}

/// Runs with fixed arrival times instead of Poisson arrivals; `arrivals[n]`
/// lists the packet creation times of node `n` in increasing order. The
/// config's arrival rate is ignored.
pub fn run_scripted(config: &SimConfig, arrivals: &[Vec<Nanos>]) -> Result<RunOutput, SimError> {
    let mut config = *config;
    config.params.arrival_rate.get_or_insert(0.0);
    config.validate()?;
    if arrivals.len() != config.params.nodes as usize {
        return Err(SimError::Config(format!(
            "{} arrival lists for {} nodes",
            arrivals.len(),
            config.params.nodes
        )));
    }
    if arrivals.iter().any(|a| a.windows(2).any(|w| w[0] > w[1])) {
        return Err(SimError::Config("scripted arrivals must be sorted".into()));
    }
    let arrivals = arrivals
        .iter()
        .map(|a| Box::new(a.clone().into_iter()) as Box<dyn Iterator<Item = Nanos>>)
        .collect();
    Engine::new(&config, arrivals).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TechniqueParams;

    fn params(tech: AccessTechnique, nodes: u32) -> TechniqueParams {
        TechniqueParams { nodes, ..TechniqueParams::defaults(tech) }
    }

    #[test]
    fn pure_aloha_overlap_collides_both() {
        let c = SimConfig { aloha_max_retries: Some(0), ..SimConfig::new(AccessTechnique::PureAloha, params(AccessTechnique::PureAloha, 2), 1.0, 1) };
        let out = run_scripted(&c, &[vec![Nanos(0)], vec![Nanos(3_000_000)]]).unwrap();
        assert_eq!(out.stats.collided_transmissions, 2);
        assert_eq!(out.stats.dropped, 2);
    }

    #[test]
    fn slotted_arrivals_start_on_boundaries() {
        let p = TechniqueParams { failure_prob: None, ..params(AccessTechnique::SlottedAloha, 2) };
        let c = SimConfig::new(AccessTechnique::SlottedAloha, p, 1.0, 1);
        let out = run_scripted(&c, &[vec![Nanos(1_000_000)], vec![Nanos(6_000_000)]]).unwrap();
        let starts: Vec<_> = out.transmissions.iter().map(|t| t.start).collect();
        assert_eq!(starts, vec![Nanos(5_000_000), Nanos(10_000_000)]);
        assert_eq!(out.stats.delivered, 2);
        // same slot: both collide although airtimes barely touch
        let out = run_scripted(&c, &[vec![Nanos(1_000_000)], vec![Nanos(4_999_999)]]).unwrap();
        assert!(out.transmissions[..2].iter().all(|t| t.collided));
    }

    #[test]
    fn csma_separated_packets_do_not_collide() {
        let c = SimConfig::new(AccessTechnique::CsmaCa, params(AccessTechnique::CsmaCa, 2), 1.0, 3);
        // second packet 100 µs after the first, more than the 40 µs propagation delay
        let out = run_scripted(&c, &[vec![Nanos(0)], vec![Nanos(100_000)]]).unwrap();
        assert_eq!(out.stats.collided_transmissions, 0);
        assert_eq!(out.stats.delivered, 2);
        let data: Vec<_> = out.transmissions.iter().filter(|t| t.frame == Frame::Data).collect();
        assert_eq!(data.len(), 2);
        assert!(data[0].end <= data[1].start);
    }

    #[test]
    fn csma_within_propagation_window_collides() {
        let c = SimConfig::new(AccessTechnique::CsmaCa, params(AccessTechnique::CsmaCa, 2), 1.0, 3);
        let out = run_scripted(&c, &[vec![Nanos(0)], vec![Nanos(10_000)]]).unwrap();
        assert_eq!(out.stats.collided_transmissions, 2);
        assert_eq!(out.stats.delivered, 2);
    }

    #[test]
    fn tdma_owner_schedule() {
        let c = SimConfig::new(AccessTechnique::Tdma, params(AccessTechnique::Tdma, 4), 1.0, 0);
        let out = run_scripted(&c, &[vec![], vec![], vec![Nanos(1)], vec![]]).unwrap();
        // node 2 owns slots 2, 6, 10, ...
        assert_eq!(out.transmissions[0].start, Nanos(10_000_000));
        assert_eq!(out.packets[0].delivered_at, Some(Nanos(10_000_000 + 4_000_000 + 40_000)));
    }

    #[test]
    fn fdma_uses_subband_airtime() {
        let p = TechniqueParams { failure_prob: None, ..params(AccessTechnique::Fdma, 4) };
        let c = SimConfig::new(AccessTechnique::Fdma, p, 1.0, 0);
        let out = run_scripted(&c, &[vec![Nanos(0)], vec![Nanos(0)], vec![], vec![]]).unwrap();
        assert_eq!(out.stats.collided_transmissions, 0);
        assert!(out.transmissions.iter().all(|t| t.end - t.start == Nanos(16_000_000)));
    }

    #[test]
    fn horizon_cuts_in_flight() {
        let c = SimConfig::new(AccessTechnique::Tdma, params(AccessTechnique::Tdma, 1), 0.002, 0);
        let out = run_scripted(&c, &[vec![Nanos(0)]]).unwrap();
        assert_eq!((out.stats.generated, out.stats.in_flight), (1, 1));
    }
}
