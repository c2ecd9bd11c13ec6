//! Discrete-event simulation of the five access techniques.
//!
//! A run is single-threaded and a pure function of its [`SimConfig`]: time
//! is kept in integer nanoseconds, every node draws from its own seeded
//! ChaCha streams, and simultaneous events are ordered by node index and
//! then event kind. Independent runs can be fanned out with [`run_batch`].

mod arrivals;
mod engine;
mod medium;
mod node;
mod stats;
mod time;
mod trace;

pub use arrivals::{arrival_stream, generate_arrivals, protocol_stream, ArrivalProcess};
pub use engine::{run, run_detailed, run_scripted, RunOutput, TxRecord};
pub use medium::{collisions, resolve_medium, Outcome, TxInterval};
pub use node::{node_step, Emit, Frame, NodeEvent, NodeState, StepContext, Timing};
pub use stats::{measure, PacketRecord, SimStats};
pub use time::Nanos;
pub use trace::{trace_csv, write_trace, TRACE_HEADER};

use crate::exec::{map_ordered, Execution};
use crate::params::{ParamError, TechniqueParams};
use crate::technique::AccessTechnique;

/// RTS/CTS handshake settings. Sizes are in bits, `sifs` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsmaSettings {
    pub sifs: f64,
    pub rts_bits: u32,
    pub cts_bits: u32,
    pub ack_bits: u32,
    /// Retransmissions allowed after the first attempt before a packet is dropped.
    pub max_retries: u32,
}

impl CsmaSettings {
    /// SIFS of one fiftieth of a slot, 20-byte RTS and CTS, 11-byte ACK, 7 retries.
    pub fn defaults_for(slot: f64) -> Self {
        CsmaSettings { sifs: slot / 50.0, rts_bits: 160, cts_bits: 160, ack_bits: 88, max_retries: 7 }
    }
}

pub const DEFAULT_BACKOFF_WINDOW: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub technique: AccessTechnique,
    /// `arrival_rate` must be set; it is the per-node Poisson rate.
    pub params: TechniqueParams,
    /// Simulated duration in seconds.
    pub horizon: f64,
    pub seed: u64,
    /// Retransmission delays are uniform over `[1, backoff_window]` slots.
    pub backoff_window: u32,
    /// Retry limit for the two ALOHA variants. `None` retries until delivery.
    pub aloha_max_retries: Option<u32>,
    pub csma: CsmaSettings,
}

impl SimConfig {
    pub fn new(technique: AccessTechnique, params: TechniqueParams, horizon: f64, seed: u64) -> Self {
        SimConfig {
            technique,
            params,
            horizon,
            seed,
            backoff_window: DEFAULT_BACKOFF_WINDOW,
            aloha_max_retries: None,
            csma: CsmaSettings::defaults_for(params.slot),
        }
    }

    /// Config whose per-node arrival rate offers an aggregate load of `load`
    /// (see [`TechniqueParams::arrival_rate_for_load`]).
    pub fn at_load(technique: AccessTechnique, params: TechniqueParams, load: f64, horizon: f64, seed: u64) -> Self {
        let lambda = params.arrival_rate_for_load(technique, load);
        SimConfig::new(technique, TechniqueParams { arrival_rate: Some(lambda), ..params }, horizon, seed)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let p = self.params.validate()?;
        p.require_arrival_rate(self.technique)?;
        if !(self.horizon > 0.0 && self.horizon < 1.0e9) {
            return Err(SimError::Config(format!("horizon must be in (0, 1e9) s (got {})", self.horizon)));
        }
        if self.backoff_window < 1 {
            return Err(SimError::Config("backoff_window must be ≥ 1".into()));
        }
        if !(self.csma.sifs >= 0.0 && self.csma.sifs.is_finite()) {
            return Err(SimError::Config(format!("sifs must be ≥ 0 (got {})", self.csma.sifs)));
        }
        let frame = p.frame_time();
        if Nanos::from_secs(frame) == Nanos::ZERO || Nanos::from_secs(p.slot) == Nanos::ZERO {
            return Err(SimError::Config("frame time and slot must be at least 1 ns".into()));
        }
        if self.technique == AccessTechnique::Tdma && Nanos::from_secs(frame) > Nanos::from_secs(p.slot) {
            return Err(SimError::Config(format!(
                "TDMA needs the frame time L/C ({frame} s) to fit in one slot ({} s)",
                p.slot
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("simulator bug: {technique} node in state {state} received {event:?}")]
    IllegalTransition { technique: AccessTechnique, state: NodeState, event: NodeEvent },
    #[error("simulator bug: {0}")]
    Internal(&'static str),
}

/// Runs every config and returns the stats in input order.
pub fn run_batch(configs: &[SimConfig], execution: Execution) -> Vec<Result<SimStats, SimError>> {
    map_ordered(configs, execution, |c| run(c).map(|(stats, _)| stats))
}
