//! Technique parameters and their validation.

use crate::technique::AccessTechnique;

/// Scalar parameters shared by the analytic models and the simulator.
///
/// Units are SI: `channel_rate` in bits/s, `slot` in seconds. Values a
/// technique has no default for are `None`; operations that
/// need one of them fail with [`ParamError::NotApplicable`] instead of
/// substituting a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechniqueParams {
    /// N, node count.
    pub nodes: u32,
    /// L, frame length in bits.
    pub frame_bits: u32,
    /// C, channel rate in bits/s.
    pub channel_rate: f64,
    /// tau, slot duration in seconds.
    pub slot: f64,
    /// P, per-packet failure probability.
    pub failure_prob: Option<f64>,
    /// lambda, packet arrival rate per node in packets/s.
    pub arrival_rate: Option<f64>,
    /// K, the retransmission/backoff factor.
    pub kappa: Option<f64>,
    /// a, end-to-end propagation delay normalised to one frame time.
    pub prop_delay: f64,
}

/// Default normalised propagation delay.
pub const DEFAULT_PROP_DELAY: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("{field} {bound} violated (got {value})")]
    OutOfRange {
        field: &'static str,
        bound: &'static str,
        value: f64,
    },
    #[error("{field} is not applicable to {technique} (no value set)")]
    NotApplicable {
        field: &'static str,
        technique: AccessTechnique,
    },
}

impl TechniqueParams {
    /// Default parameters for `tech`, with `a` set to [`DEFAULT_PROP_DELAY`].
    /// Values without a default stay `None`.
    pub fn defaults(tech: AccessTechnique) -> Self {
        let base = TechniqueParams {
            nodes: 100,
            frame_bits: 256,
            channel_rate: 64_000.0,
            slot: 0.005,
            failure_prob: None,
            arrival_rate: None,
            kappa: None,
            prop_delay: DEFAULT_PROP_DELAY,
        };
        match tech {
            AccessTechnique::Fdma | AccessTechnique::SlottedAloha => TechniqueParams {
                failure_prob: Some(2e-4),
                arrival_rate: Some(2.0),
                ..base
            },
            AccessTechnique::Tdma | AccessTechnique::CsmaCa => TechniqueParams {
                kappa: Some(2.0),
                ..base
            },
            AccessTechnique::PureAloha => base,
        }
    }

    /// Checks every bound and returns the record unchanged. The first
    /// violated bound is reported.
    pub fn validate(self) -> Result<Self, ParamError> {
        fn check(ok: bool, field: &'static str, bound: &'static str, value: f64) -> Result<(), ParamError> {
            if ok {
                Ok(())
            } else {
                Err(ParamError::OutOfRange { field, bound, value })
            }
        }
        check(self.nodes >= 1, "N", "≥ 1", self.nodes as f64)?;
        check(self.frame_bits >= 1, "L", "≥ 1", self.frame_bits as f64)?;
        check(self.channel_rate > 0.0 && self.channel_rate.is_finite(), "C", "> 0", self.channel_rate)?;
        check(self.slot > 0.0 && self.slot.is_finite(), "tau", "> 0", self.slot)?;
        if let Some(p) = self.failure_prob {
            check(p >= 0.0, "P", "≥ 0", p)?;
            check(p <= 1.0, "P", "≤ 1", p)?;
        }
        if let Some(lambda) = self.arrival_rate {
            check(lambda >= 0.0 && lambda.is_finite(), "lambda", "≥ 0", lambda)?;
        }
        if let Some(k) = self.kappa {
            check(k >= 1.0 && k.is_finite(), "K", "≥ 1", k)?;
        }
        check(self.prop_delay >= 0.0 && self.prop_delay.is_finite(), "a", "≥ 0", self.prop_delay)?;
        Ok(self)
    }

    /// Frame transmission time L/C in seconds.
    pub fn frame_time(&self) -> f64 {
        self.frame_bits as f64 / self.channel_rate
    }

    pub fn require_kappa(&self, tech: AccessTechnique) -> Result<f64, ParamError> {
        self.kappa.ok_or(ParamError::NotApplicable { field: "K", technique: tech })
    }

    pub fn require_arrival_rate(&self, tech: AccessTechnique) -> Result<f64, ParamError> {
        self.arrival_rate
            .ok_or(ParamError::NotApplicable { field: "lambda", technique: tech })
    }

    /// Duration of one unit of offered load for `tech`: the slot for slotted
    /// ALOHA, one frame time otherwise.
    pub fn load_unit(&self, tech: AccessTechnique) -> f64 {
        match tech {
            AccessTechnique::SlottedAloha => self.slot,
            _ => self.frame_time(),
        }
    }

    /// Per-node arrival rate that offers an aggregate load of `load` units
    /// per [`load_unit`](Self::load_unit).
    pub fn arrival_rate_for_load(&self, tech: AccessTechnique, load: f64) -> f64 {
        load / (self.nodes as f64 * self.load_unit(tech))
    }
}
