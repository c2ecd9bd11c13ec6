//! Collision resolution on the shared medium.

use rand::Rng;

use super::time::Nanos;

/// Airtime of one transmission on one channel, half-open `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxInterval {
    pub start: Nanos,
    pub end: Nanos,
    pub channel: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Delivered,
    Collided,
    Corrupted,
}

/// Flags every transmission that overlaps another on the same channel.
/// With `slot` set, intervals are widened to whole slots first.
pub fn collisions(txs: &[TxInterval], slot: Option<Nanos>) -> Vec<bool> {
    let extent = |t: &TxInterval| match slot {
        Some(s) => (Nanos(t.start.0 / s.0 * s.0), t.end.ceil_to(s)),
        None => (t.start, t.end),
    };
    let mut order: Vec<usize> = (0..txs.len()).collect();
    order.sort_by_key(|&i| (txs[i].channel, extent(&txs[i]).0, i));

    let mut collided = vec![false; txs.len()];
    let mut reach: Option<(u32, Nanos, usize)> = None;
    for &i in &order {
        let (start, end) = extent(&txs[i]);
        match reach {
            Some((ch, far, owner)) if ch == txs[i].channel => {
                if start < far {
                    collided[i] = true;
                    collided[owner] = true;
                }
                if end > far {
                    reach = Some((ch, end, i));
                }
            }
            _ => reach = Some((txs[i].channel, end, i)),
        }
    }
    collided
}

/// A transmission succeeds iff nothing else overlaps it on its channel;
/// each otherwise-successful one is then lost with probability
/// `failure_prob`, drawn in input order.
pub fn resolve_medium<R: Rng + ?Sized>(
    txs: &[TxInterval],
    slot: Option<Nanos>,
    failure_prob: Option<f64>,
    rng: &mut R,
) -> Vec<Outcome> {
    collisions(txs, slot)
        .into_iter()
        .map(|hit| {
            if hit {
                Outcome::Collided
            } else if failure_prob.is_some_and(|p| rng.random::<f64>() < p) {
                Outcome::Corrupted
            } else {
                Outcome::Delivered
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Active {
    tx: usize,
    node: u32,
    start: Nanos,
    end: Nanos,
    /// How long other nodes sense the channel as reserved if this
    /// transmission is not collided (covers a granted RTS/CTS exchange).
    hold: Nanos,
    collided: bool,
}

impl Active {
    fn sensed_until(&self) -> Nanos {
        if self.collided { self.end } else { self.hold.max(self.end) }
    }
}

/// Incremental view of the channels used by the event loop. Transmissions
/// are registered when they start; overlap with anything still on air is
/// detected immediately.
#[derive(Debug)]
pub(crate) struct Medium {
    channels: Vec<Vec<Active>>,
    prop: Nanos,
}

impl Medium {
    pub(crate) fn new(channels: usize, prop: Nanos) -> Self {
        Medium { channels: vec![Vec::new(); channels], prop }
    }

    fn prune(&mut self, channel: usize, now: Nanos) {
        let prop = self.prop;
        self.channels[channel].retain(|a| a.sensed_until() + prop > now);
    }

    /// Registers transmission `tx` and returns the ids of every transmission
    /// it collides with (including earlier ones already flagged).
    pub(crate) fn begin(
        &mut self,
        tx: usize,
        node: u32,
        channel: u32,
        start: Nanos,
        end: Nanos,
        hold: Nanos,
    ) -> Vec<usize> {
        let ch = channel as usize;
        self.prune(ch, start);
        let mut hits = Vec::new();
        for other in self.channels[ch].iter_mut() {
            if other.start <= start && start < other.end {
                other.collided = true;
                hits.push(other.tx);
            }
        }
        self.channels[ch].push(Active { tx, node, start, end, hold, collided: !hits.is_empty() });
        hits
    }

    /// Carrier sense at `node`: another node's signal has propagated here
    /// and its reservation has not yet cleared.
    pub(crate) fn busy(&mut self, channel: u32, node: u32, now: Nanos) -> bool {
        let ch = channel as usize;
        self.prune(ch, now);
        let prop = self.prop;
        self.channels[ch]
            .iter()
            .any(|a| a.node != node && a.start + prop <= now && now < a.sensed_until() + prop)
    }
}
