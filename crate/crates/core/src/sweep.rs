//! Offered-load and throughput axes.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Logarithmic,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Linear => "lin",
            Scale::Logarithmic => "log",
        }
    }
}

impl FromStr for Scale {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lin" | "linear" => Ok(Scale::Linear),
            "log" | "logarithmic" => Ok(Scale::Logarithmic),
            other => Err(SweepError::Syntax(format!("unknown scale `{other}`"))),
        }
    }
}

/// A sweep of `points` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("sweep start must be ≥ 0 (got {0})")]
    NegativeStart(f64),
    #[error("sweep stop must exceed start (start {start}, stop {stop})")]
    EmptyRange { start: f64, stop: f64 },
    #[error("sweep needs at least 2 points (got {0})")]
    TooFewPoints(usize),
    #[error("logarithmic sweep needs start > 0")]
    LogFromZero,
    #[error("sweep values are not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("invalid sweep: {0}")]
    Syntax(String),
}

impl SweepSpec {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        SweepSpec { start, stop, points, scale: Scale::Linear }
    }

    pub fn logarithmic(start: f64, stop: f64, points: usize) -> Self {
        SweepSpec { start, stop, points, scale: Scale::Logarithmic }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.start >= 0.0) || !self.start.is_finite() {
            return Err(SweepError::NegativeStart(self.start));
        }
        if !(self.stop > self.start) || !self.stop.is_finite() {
            return Err(SweepError::EmptyRange { start: self.start, stop: self.stop });
        }
        if self.points < 2 {
            return Err(SweepError::TooFewPoints(self.points));
        }
        if self.scale == Scale::Logarithmic && self.start <= 0.0 {
            return Err(SweepError::LogFromZero);
        }
        Ok(())
    }

    /// The sweep values, strictly increasing, with the end points exact.
    pub fn values(&self) -> Result<Vec<f64>, SweepError> {
        self.validate()?;
        let last = self.points - 1;
        let mut out: Vec<f64> = (0..self.points)
            .map(|i| {
                let frac = i as f64 / last as f64;
                match self.scale {
                    Scale::Linear => self.start + frac * (self.stop - self.start),
                    Scale::Logarithmic => {
                        let (lo, hi) = (self.start.ln(), self.stop.ln());
                        (lo + frac * (hi - lo)).exp()
                    }
                }
            })
            .collect();
        out[0] = self.start;
        out[last] = self.stop;
        if let Some(i) = out.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(SweepError::NotIncreasing(i + 1));
        }
        Ok(out)
    }
}

/// `make_sweep`: validate the spec and expand it.
pub fn make_sweep(spec: &SweepSpec) -> Result<Vec<f64>, SweepError> {
    spec.values()
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.start, self.stop, self.points, self.scale.name())
    }
}

impl FromStr for SweepSpec {
    type Err = SweepError;

    /// Parses `start:stop:points:lin|log`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(SweepError::Syntax(format!("expected start:stop:points:lin|log, got `{s}`")));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| SweepError::Syntax(format!("`{t}` is not a number")))
        };
        let points = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| SweepError::Syntax(format!("`{}` is not a point count", parts[2])))?;
        let spec = SweepSpec {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            points,
            scale: parts[3].parse()?,
        };
        spec.validate()?;
        Ok(spec)
    }
}
