//! Per-frame delay built from its components, and the delay-to-throughput
//! conversion applied to every technique.

use crate::technique::AccessTechnique;

/// Bit counts of one frame exchange and the rate they are sent at.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BitBudget {
    /// N_oh, overhead bits.
    pub overhead: u64,
    /// N_ack, ACK/NACK bits.
    pub ack: u64,
    /// N_syn, synchronisation bits.
    pub sync: u64,
    /// N_data, data bits.
    pub data: u64,
    /// f_c in bits/s.
    pub rate: f64,
}

/// Time components, all in seconds, that are inputs rather than derived
/// from a [`BitBudget`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingBudget {
    pub guard: f64,
    /// Turnaround time for the techniques where it is an input (TDMA, FDMA, S-ALOHA).
    pub turnaround: f64,
    pub queuing: f64,
    pub idle: f64,
    /// Wait for the next slot boundary.
    pub boundary_wait: f64,
    pub rts: f64,
    pub cts: f64,
    pub backoff_slots: u32,
    pub backoff_slot: f64,
}

/// Switches for the component sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOptions {
    /// With acknowledgements disabled both T_ack and T_ta are zero.
    pub acknowledged: bool,
    /// Add T_data to the TDMA sum, which as printed leaves it out.
    pub tdma_counts_data: bool,
}

impl Default for DelayOptions {
    fn default() -> Self {
        DelayOptions { acknowledged: true, tdma_counts_data: false }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComponentError {
    #[error("data rate must be > 0 (got {0})")]
    Rate(f64),
    #[error("{what} must be ≥ 0 (got {value})")]
    Negative { what: &'static str, value: f64 },
    #[error("inter-frame space would be negative: T_data {data} < T_ack {ack}")]
    NegativeIfs { data: f64, ack: f64 },
    #[error("delay must be > 0 (got {0})")]
    Delay(f64),
}

pub fn bit_time(bits: u64, rate: f64) -> Result<f64, ComponentError> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(ComponentError::Rate(rate));
    }
    Ok(bits as f64 / rate)
}

pub fn backoff_time(slots: u32, slot_time: f64) -> f64 {
    slots as f64 * slot_time
}

pub fn turnaround_time(data: f64, ack: f64) -> f64 {
    data + ack
}

pub fn ifs_time(data: f64, ack: f64) -> Result<f64, ComponentError> {
    let ifs = data - ack;
    if ifs < 0.0 {
        return Err(ComponentError::NegativeIfs { data, ack });
    }
    Ok(ifs)
}

impl TimingBudget {
    fn check(&self) -> Result<(), ComponentError> {
        let fields = [
            ("T_g", self.guard),
            ("T_ta", self.turnaround),
            ("T_que", self.queuing),
            ("T_idle", self.idle),
            ("T_bon", self.boundary_wait),
            ("T_rts", self.rts),
            ("T_cts", self.cts),
            ("T_boslot", self.backoff_slot),
        ];
        for (what, value) in fields {
            if !(value >= 0.0) {
                return Err(ComponentError::Negative { what, value });
            }
        }
        Ok(())
    }
}

/// Sum of the delay components each technique's frame goes through:
///
/// | technique | components |
/// |---|---|
/// | Pure ALOHA | T_data + T_que |
/// | TDMA | T_oh + T_ack + T_g + T_sync + T_ta |
/// | S-ALOHA | T_ack + T_syn + T_ta + T_idle + T_bon |
/// | FDMA | T_oh + T_ack + T_g + T_ta + T_data |
/// | CSMA/CA | T_bo + T_data + T_ta + T_ack + T_ifs + T_rts + T_cts |
///
/// Bit-derived terms come from [`bit_time`]. For CSMA/CA, T_ta and T_ifs
/// are derived from T_data and T_ack; the other techniques take T_ta from
/// the timing budget.
pub fn frame_delay(
    tech: AccessTechnique,
    bits: &BitBudget,
    timing: &TimingBudget,
    options: DelayOptions,
) -> Result<f64, ComponentError> {
    timing.check()?;
    let t_oh = bit_time(bits.overhead, bits.rate)?;
    let t_sync = bit_time(bits.sync, bits.rate)?;
    let t_data = bit_time(bits.data, bits.rate)?;
    let t_ack = if options.acknowledged { bit_time(bits.ack, bits.rate)? } else { 0.0 };
    let t_ta_input = if options.acknowledged { timing.turnaround } else { 0.0 };

    Ok(match tech {
        AccessTechnique::PureAloha => t_data + timing.queuing,
        AccessTechnique::Tdma => {
            let sum = t_oh + t_ack + timing.guard + t_sync + t_ta_input;
            if options.tdma_counts_data { sum + t_data } else { sum }
        }
        AccessTechnique::SlottedAloha => t_ack + t_sync + t_ta_input + timing.idle + timing.boundary_wait,
        AccessTechnique::Fdma => t_oh + t_ack + timing.guard + t_ta_input + t_data,
        AccessTechnique::CsmaCa => {
            let t_bo = backoff_time(timing.backoff_slots, timing.backoff_slot);
            let t_ta = if options.acknowledged { turnaround_time(t_data, t_ack) } else { 0.0 };
            let t_ifs = ifs_time(t_data, t_ack)?;
            t_bo + t_data + t_ta + t_ack + t_ifs + timing.rts + timing.cts
        }
    })
}

/// `8 x / D`. The factor 8 is kept as printed although `x` is described as a
/// bit count; callers decide what unit `x` carries.
pub fn throughput_from_delay(x: f64, delay: f64) -> Result<f64, ComponentError> {
    if !(x >= 0.0) {
        return Err(ComponentError::Negative { what: "x", value: x });
    }
    if !(delay > 0.0) {
        return Err(ComponentError::Delay(delay));
    }
    Ok(8.0 * x / delay)
}
