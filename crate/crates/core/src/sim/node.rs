//! Per-technique node state machines.
//!
//! [`node_step`] advances one node by one transition. It never touches the
//! packet queue or the medium directly; it returns [`Emit`]s that the event
//! loop applies.

use std::fmt;

use rand::Rng;

use super::time::Nanos;
use super::SimError;
use crate::technique::AccessTechnique;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeState {
    /// Nothing queued.
    Idle,
    /// Packet queued, waiting for a slot boundary or an owned slot.
    Waiting,
    /// Waiting out a random backoff.
    Backoff,
    /// RTS on air.
    Handshake,
    /// RTS finished; waiting for CTS or its timeout.
    AwaitCts,
    /// Data frame on air.
    Transmitting,
    /// Data finished; waiting for ACK or its timeout.
    AwaitAck,
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Events delivered to a node. The derived order is the tie-break between
/// events of one node at the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeEvent {
    /// A frame of this node left the air; `ok` is false if it collided or was corrupted.
    TxEnd { ok: bool },
    /// A new packet was appended to the queue.
    Arrival,
    /// Start of a slot owned by this node (TDMA).
    SlotStart,
    /// Deferred transmission start (slot boundary or end of ALOHA backoff).
    TxStart,
    BackoffExpired,
    CtsReceived,
    CtsTimeout,
    AckReceived,
    AckTimeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Rts,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emit {
    /// Put a frame for the head packet on the air now.
    Transmit(Frame),
    /// Deliver `event` to this node at `at`.
    Timer { at: Nanos, event: NodeEvent },
    /// Head packet received; remove it from the queue.
    Delivered,
    /// Head packet abandoned after exhausting its retries.
    Dropped,
}

/// Durations and policy constants of one run, resolved to integer time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub technique: AccessTechnique,
    /// Airtime of one data frame (N·L/C on an FDMA sub-band, L/C otherwise).
    pub data: Nanos,
    /// L/C, one frame time on the full channel.
    pub frame: Nanos,
    pub slot: Nanos,
    pub prop: Nanos,
    pub sifs: Nanos,
    pub rts: Nanos,
    pub cts: Nanos,
    pub ack: Nanos,
    pub backoff_window: u32,
    /// Attempts allowed beyond the first; `None` retries forever.
    pub retry_limit: Option<u32>,
}

impl Timing {
    /// Carrier-sense reservation of a granted RTS: the remaining handshake,
    /// the data frame and the ACK.
    pub fn exchange_after_rts(&self) -> Nanos {
        self.sifs + self.cts + self.sifs + self.data + self.sifs + self.ack
    }
}

/// What the node can observe when an event is delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepContext {
    pub now: Nanos,
    /// Packets in this node's queue, head included.
    pub queue_len: usize,
    /// Attempts already made for the head packet.
    pub head_attempts: u32,
    /// Carrier sense result (only consulted by CSMA/CA).
    pub medium_busy: bool,
}

type Step = (NodeState, Vec<Emit>);

fn illegal(timing: &Timing, state: NodeState, event: NodeEvent) -> SimError {
    SimError::IllegalTransition { technique: timing.technique, state, event }
}

fn backoff_draw<R: Rng + ?Sized>(timing: &Timing, rng: &mut R) -> Nanos {
    timing.slot * rng.random_range(1..=timing.backoff_window) as u64
}

/// CSMA/CA: sense, then RTS on a free medium or back off on a busy one.
fn sense<R: Rng + ?Sized>(timing: &Timing, ctx: &StepContext, rng: &mut R) -> Step {
    if ctx.medium_busy {
        let at = ctx.now + backoff_draw(timing, rng);
        (NodeState::Backoff, vec![Emit::Timer { at, event: NodeEvent::BackoffExpired }])
    } else {
        (NodeState::Handshake, vec![Emit::Transmit(Frame::Rts)])
    }
}

/// Next move once the head packet has left the queue and `remaining` are left.
fn next_packet<R: Rng + ?Sized>(timing: &Timing, ctx: &StepContext, remaining: usize, rng: &mut R) -> Step {
    if remaining == 0 {
        return (NodeState::Idle, Vec::new());
    }
    match timing.technique {
        AccessTechnique::PureAloha | AccessTechnique::Fdma => {
            (NodeState::Transmitting, vec![Emit::Transmit(Frame::Data)])
        }
        AccessTechnique::SlottedAloha => {
            let at = ctx.now.ceil_to(timing.slot);
            (NodeState::Waiting, vec![Emit::Timer { at, event: NodeEvent::TxStart }])
        }
        AccessTechnique::Tdma => (NodeState::Waiting, Vec::new()),
        AccessTechnique::CsmaCa => sense(timing, ctx, rng),
    }
}

fn delivered<R: Rng + ?Sized>(timing: &Timing, ctx: &StepContext, rng: &mut R) -> Step {
    let (state, mut emits) = next_packet(timing, ctx, ctx.queue_len.saturating_sub(1), rng);
    emits.insert(0, Emit::Delivered);
    (state, emits)
}

/// A failed attempt: drop once the retry limit is exhausted, otherwise
/// schedule the retransmission the technique prescribes.
fn failed<R: Rng + ?Sized>(timing: &Timing, ctx: &StepContext, rng: &mut R) -> Step {
    if timing.retry_limit.is_some_and(|limit| ctx.head_attempts > limit) {
        let (state, mut emits) = next_packet(timing, ctx, ctx.queue_len.saturating_sub(1), rng);
        emits.insert(0, Emit::Dropped);
        return (state, emits);
    }
    match timing.technique {
        AccessTechnique::PureAloha => {
            let at = ctx.now + backoff_draw(timing, rng);
            (NodeState::Backoff, vec![Emit::Timer { at, event: NodeEvent::TxStart }])
        }
        AccessTechnique::SlottedAloha => {
            let at = (ctx.now + backoff_draw(timing, rng)).ceil_to(timing.slot);
            (NodeState::Backoff, vec![Emit::Timer { at, event: NodeEvent::TxStart }])
        }
        AccessTechnique::CsmaCa => {
            let at = ctx.now + backoff_draw(timing, rng);
            (NodeState::Backoff, vec![Emit::Timer { at, event: NodeEvent::BackoffExpired }])
        }
        // retried in the next owned slot
        AccessTechnique::Tdma => (NodeState::Waiting, Vec::new()),
        AccessTechnique::Fdma => (NodeState::Transmitting, vec![Emit::Transmit(Frame::Data)]),
    }
}

/// Advances one node by exactly one transition.
///
/// Returns [`SimError::IllegalTransition`] for an event the current state
/// cannot receive; that always indicates a bug in the event loop.
pub fn node_step<R: Rng + ?Sized>(
    timing: &Timing,
    state: NodeState,
    event: NodeEvent,
    ctx: &StepContext,
    rng: &mut R,
) -> Result<(NodeState, Vec<Emit>), SimError> {
    use AccessTechnique as T;
    use NodeEvent as E;
    use NodeState as S;

    let step = match (timing.technique, state, event) {
        (_, s, E::Arrival) if s != S::Idle => (s, Vec::new()),

        (T::PureAloha | T::Fdma, S::Idle, E::Arrival) => (S::Transmitting, vec![Emit::Transmit(Frame::Data)]),
        (T::SlottedAloha, S::Idle, E::Arrival) => {
            let at = ctx.now.ceil_to(timing.slot);
            (S::Waiting, vec![Emit::Timer { at, event: E::TxStart }])
        }
        (T::Tdma, S::Idle, E::Arrival) => (S::Waiting, Vec::new()),
        (T::CsmaCa, S::Idle, E::Arrival) => sense(timing, ctx, rng),

        (T::PureAloha, S::Backoff, E::TxStart) | (T::SlottedAloha, S::Waiting | S::Backoff, E::TxStart) => {
            (S::Transmitting, vec![Emit::Transmit(Frame::Data)])
        }

        (T::Tdma, S::Idle, E::SlotStart) => (S::Idle, Vec::new()),
        (T::Tdma, S::Waiting, E::SlotStart) if ctx.queue_len > 0 => {
            (S::Transmitting, vec![Emit::Transmit(Frame::Data)])
        }

        (T::PureAloha | T::SlottedAloha | T::Tdma | T::Fdma, S::Transmitting, E::TxEnd { ok }) => {
            if ok {
                delivered(timing, ctx, rng)
            } else {
                failed(timing, ctx, rng)
            }
        }

        (T::CsmaCa, S::Backoff, E::BackoffExpired) => sense(timing, ctx, rng),
        (T::CsmaCa, S::Handshake, E::TxEnd { ok: true }) => {
            let at = ctx.now + timing.sifs + timing.cts + timing.sifs;
            (S::AwaitCts, vec![Emit::Timer { at, event: E::CtsReceived }])
        }
        (T::CsmaCa, S::Handshake, E::TxEnd { ok: false }) => {
            let at = ctx.now + timing.sifs + timing.cts;
            (S::AwaitCts, vec![Emit::Timer { at, event: E::CtsTimeout }])
        }
        (T::CsmaCa, S::AwaitCts, E::CtsReceived) => (S::Transmitting, vec![Emit::Transmit(Frame::Data)]),
        (T::CsmaCa, S::AwaitCts, E::CtsTimeout) | (T::CsmaCa, S::AwaitAck, E::AckTimeout) => {
            failed(timing, ctx, rng)
        }
        (T::CsmaCa, S::Transmitting, E::TxEnd { ok }) => {
            let at = ctx.now + timing.sifs + timing.ack;
            if ok {
                (S::AwaitAck, vec![Emit::Delivered, Emit::Timer { at, event: E::AckReceived }])
            } else {
                (S::AwaitAck, vec![Emit::Timer { at, event: E::AckTimeout }])
            }
        }
        // the delivered packet already left the queue at the end of the data frame
        (T::CsmaCa, S::AwaitAck, E::AckReceived) => next_packet(timing, ctx, ctx.queue_len, rng),

        _ => return Err(illegal(timing, state, event)),
    };
    Ok(step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn timing(technique: AccessTechnique) -> Timing {
        Timing {
            technique,
            data: Nanos(4_000),
            frame: Nanos(4_000),
            slot: Nanos(5_000),
            prop: Nanos(40),
            sifs: Nanos(100),
            rts: Nanos(2_500),
            cts: Nanos(2_500),
            ack: Nanos(1_375),
            backoff_window: 16,
            retry_limit: Some(7),
        }
    }

    fn ctx(now: u64, queue_len: usize) -> StepContext {
        StepContext { now: Nanos(now), queue_len, head_attempts: 1, medium_busy: false }
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn tdma_waits_for_owned_slot() {
        let t = timing(AccessTechnique::Tdma);
        let (s, e) = node_step(&t, NodeState::Idle, NodeEvent::Arrival, &ctx(1_234, 1), &mut rng()).unwrap();
        assert_eq!(s, NodeState::Waiting);
        assert!(e.is_empty());
        let (s, e) = node_step(&t, s, NodeEvent::SlotStart, &ctx(5_000, 1), &mut rng()).unwrap();
        assert_eq!(s, NodeState::Transmitting);
        assert_eq!(e, vec![Emit::Transmit(Frame::Data)]);
    }

    #[test]
    fn csma_busy_medium_backs_off() {
        let t = timing(AccessTechnique::CsmaCa);
        let c = StepContext { medium_busy: true, ..ctx(10_000, 1) };
        let (s, e) = node_step(&t, NodeState::Idle, NodeEvent::Arrival, &c, &mut rng()).unwrap();
        assert_eq!(s, NodeState::Backoff);
        match e.as_slice() {
            [Emit::Timer { at, event: NodeEvent::BackoffExpired }] => {
                let wait = at.0 - 10_000;
                assert!(wait % 5_000 == 0 && (1..=16).contains(&(wait / 5_000)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slotted_arrival_waits_for_boundary() {
        let t = timing(AccessTechnique::SlottedAloha);
        let (s, e) = node_step(&t, NodeState::Idle, NodeEvent::Arrival, &ctx(7_300, 1), &mut rng()).unwrap();
        assert_eq!(s, NodeState::Waiting);
        assert_eq!(e, vec![Emit::Timer { at: Nanos(10_000), event: NodeEvent::TxStart }]);
    }

    #[test]
    fn pure_aloha_transmits_on_arrival() {
        let t = timing(AccessTechnique::PureAloha);
        let (s, e) = node_step(&t, NodeState::Idle, NodeEvent::Arrival, &ctx(7_300, 1), &mut rng()).unwrap();
        assert_eq!((s, e), (NodeState::Transmitting, vec![Emit::Transmit(Frame::Data)]));
    }

    #[test]
    fn csma_full_exchange() {
        let t = timing(AccessTechnique::CsmaCa);
        let mut r = rng();
        let (s, e) = node_step(&t, NodeState::Idle, NodeEvent::Arrival, &ctx(0, 1), &mut r).unwrap();
        assert_eq!((s, e.as_slice()), (NodeState::Handshake, [Emit::Transmit(Frame::Rts)].as_slice()));
        let (s, e) = node_step(&t, s, NodeEvent::TxEnd { ok: true }, &ctx(2_500, 1), &mut r).unwrap();
        assert_eq!(e, vec![Emit::Timer { at: Nanos(2_500 + 100 + 2_500 + 100), event: NodeEvent::CtsReceived }]);
        let (s, e) = node_step(&t, s, NodeEvent::CtsReceived, &ctx(5_200, 1), &mut r).unwrap();
        assert_eq!(e, vec![Emit::Transmit(Frame::Data)]);
        let (s, e) = node_step(&t, s, NodeEvent::TxEnd { ok: true }, &ctx(9_200, 1), &mut r).unwrap();
        assert_eq!(s, NodeState::AwaitAck);
        assert_eq!(e[0], Emit::Delivered);
        let (s, e) = node_step(&t, s, NodeEvent::AckReceived, &ctx(10_675, 0), &mut r).unwrap();
        assert_eq!((s, e), (NodeState::Idle, vec![]));
    }

    #[test]
    fn csma_missing_cts_backs_off_then_drops() {
        let t = timing(AccessTechnique::CsmaCa);
        let mut r = rng();
        let (s, e) = node_step(&t, NodeState::Handshake, NodeEvent::TxEnd { ok: false }, &ctx(2_500, 1), &mut r).unwrap();
        assert_eq!(e, vec![Emit::Timer { at: Nanos(5_100), event: NodeEvent::CtsTimeout }]);
        let (s2, _) = node_step(&t, s, NodeEvent::CtsTimeout, &ctx(5_100, 1), &mut r).unwrap();
        assert_eq!(s2, NodeState::Backoff);
        let exhausted = StepContext { head_attempts: 8, ..ctx(5_100, 2) };
        let (s3, e) = node_step(&t, s, NodeEvent::CtsTimeout, &exhausted, &mut r).unwrap();
        assert_eq!(e[0], Emit::Dropped);
        assert_eq!(s3, NodeState::Handshake);
    }

    #[test]
    fn aloha_retry_limit_zero_drops() {
        let t = Timing { retry_limit: Some(0), ..timing(AccessTechnique::PureAloha) };
        let (s, e) = node_step(&t, NodeState::Transmitting, NodeEvent::TxEnd { ok: false }, &ctx(4_000, 1), &mut rng()).unwrap();
        assert_eq!((s, e), (NodeState::Idle, vec![Emit::Dropped]));
    }

    #[test]
    fn illegal_transitions_are_errors() {
        let t = timing(AccessTechnique::Tdma);
        assert!(matches!(
            node_step(&t, NodeState::Transmitting, NodeEvent::SlotStart, &ctx(0, 1), &mut rng()),
            Err(SimError::IllegalTransition { .. })
        ));
        let t = timing(AccessTechnique::PureAloha);
        assert!(node_step(&t, NodeState::Idle, NodeEvent::TxEnd { ok: true }, &ctx(0, 0), &mut rng()).is_err());
    }
}
