//! Per-packet records and the statistics derived from them.

use super::time::Nanos;
use super::SimConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    pub id: u64,
    pub source: u32,
    pub created_at: Nanos,
    /// Transmission attempts; for CSMA/CA one attempt is one RTS.
    pub attempts: u32,
    /// Attempts that ended in a collision.
    pub collisions: u32,
    pub delivered_at: Option<Nanos>,
    pub dropped_at: Option<Nanos>,
}

impl PacketRecord {
    pub fn delay(&self) -> Option<Nanos> {
        self.delivered_at.map(|d| d - self.created_at)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimStats {
    pub generated: u64,
    pub delivered: u64,
    pub collided_transmissions: u64,
    pub dropped: u64,
    pub in_flight: u64,
    pub transmissions: u64,
    /// Offered load in frame times per frame time.
    pub measured_g: f64,
    /// Throughput in frame times per frame time.
    pub measured_t: f64,
    /// Offered load per load unit of the technique (slots for slotted ALOHA).
    pub native_g: f64,
    pub native_t: f64,
    /// Seconds.
    pub mean_delay: Option<f64>,
    pub max_delay: Option<f64>,
    /// Mean delay in frame times.
    pub normalized_delay: Option<f64>,
}

impl SimStats {
    pub fn delivery_ratio(&self) -> Option<f64> {
        (self.generated > 0).then(|| self.delivered as f64 / self.generated as f64)
    }
}

pub fn measure(records: &[PacketRecord], config: &SimConfig) -> SimStats {
    let frame = config.params.frame_time();
    let unit = config.params.load_unit(config.technique);
    let horizon = config.horizon;

    let mut s = SimStats::default();
    let mut total_delay = 0u128;
    let mut max_delay = Nanos::ZERO;
    for r in records {
        s.generated += 1;
        s.transmissions += r.attempts as u64;
        s.collided_transmissions += r.collisions as u64;
        match (r.delay(), r.dropped_at) {
            (Some(d), _) => {
                s.delivered += 1;
                total_delay += d.0 as u128;
                max_delay = max_delay.max(d);
            }
            (None, Some(_)) => s.dropped += 1,
            (None, None) => s.in_flight += 1,
        }
    }
    s.measured_g = s.generated as f64 * frame / horizon;
    s.measured_t = s.delivered as f64 * frame / horizon;
    s.native_g = s.generated as f64 * unit / horizon;
    s.native_t = s.delivered as f64 * unit / horizon;
    if s.delivered > 0 {
        let mean = total_delay as f64 / s.delivered as f64 / 1e9;
        s.mean_delay = Some(mean);
        s.max_delay = Some(max_delay.as_secs());
        s.normalized_delay = Some(mean / frame);
    }
    s
}
