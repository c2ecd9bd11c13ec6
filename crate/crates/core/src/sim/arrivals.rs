//! Per-node Poisson arrivals and the seeded random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::time::Nanos;

/// Random stream for the arrival process of `node`.
pub fn arrival_stream(seed: u64, node: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * node as u64);
    rng
}

/// Random stream for the protocol decisions (backoff draws, corruption) of `node`.
pub fn protocol_stream(seed: u64, node: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * node as u64 + 1);
    rng
}

/// Homogeneous Poisson arrivals in `[0, horizon)`.
#[derive(Debug, Clone)]
pub struct ArrivalProcess {
    rng: ChaCha8Rng,
    gap: Option<Exp<f64>>,
    clock: f64,
    horizon: Nanos,
}

impl ArrivalProcess {
    pub fn new(rng: ChaCha8Rng, rate: f64, horizon: Nanos) -> Self {
        let gap = if rate > 0.0 { Exp::new(rate).ok() } else { None };
        ArrivalProcess { rng, gap, clock: 0.0, horizon }
    }
}

impl Iterator for ArrivalProcess {
    type Item = Nanos;

    fn next(&mut self) -> Option<Nanos> {
        let gap = self.gap.as_ref()?;
        self.clock += gap.sample(&mut self.rng);
        let at = Nanos::from_secs(self.clock);
        if at >= self.horizon {
            self.gap = None;
            return None;
        }
        Some(at)
    }
}

/// Arrival times of `node` at `rate` packets/s, up to `horizon`.
pub fn generate_arrivals(seed: u64, node: u32, rate: f64, horizon: Nanos) -> Vec<Nanos> {
    ArrivalProcess::new(arrival_stream(seed, node), rate, horizon).collect()
}
