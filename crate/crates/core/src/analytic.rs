//! Closed-form throughput and delay relations for the five techniques.
//!
//! The contention models (pure/slotted ALOHA, 1-persistent CSMA) work in
//! normalised units: load and throughput per frame (or slot) time, delay in
//! frame times. The TDMA and FDMA relations are queueing delays in seconds;
//! their "throughput" relations keep the same time-like units.
//!
//! Several of the printed relations are unbalanced. The forms used here:
//!
//! * CSMA/CA delay vs throughput uses the ALOHA delay pattern
//!   `(e^(2S) - 1)((K-1)/2 + 2a + 1) + 1 + a`; the printed divisor
//!   `(2+2*a+1)` is read as `/2 + 2a + 1`.
//! * CSMA/CA throughput vs load is the classical 1-persistent CSMA curve.
//! * CSMA/CA delay vs load composes the two above.
//! * Pure ALOHA delay vs load closes the parenthesis after `exp(G) - 1`.
//! * TDMA throughput vs load reads the `*` before `N*L/(2*C)` as `+`.
//! * TDMA/FDMA delay vs load read the divisor `a` as the channel rate C.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use crate::exec::{self, Execution};
use crate::params::{ParamError, TechniqueParams};
use crate::technique::AccessTechnique;

/// The three curve families that can be generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioKind {
    DelayVsThroughput,
    DelayVsLoad,
    ThroughputVsLoad,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::DelayVsThroughput,
        ScenarioKind::DelayVsLoad,
        ScenarioKind::ThroughputVsLoad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::DelayVsThroughput => "delay-vs-throughput",
            ScenarioKind::DelayVsLoad => "delay-vs-load",
            ScenarioKind::ThroughputVsLoad => "throughput-vs-load",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "delayvsthroughput" | "throughputdelay" => Ok(ScenarioKind::DelayVsThroughput),
            "delayvsload" | "delayload" => Ok(ScenarioKind::DelayVsLoad),
            "throughputvsload" | "throughputload" => Ok(ScenarioKind::ThroughputVsLoad),
            _ => Err(format!("unknown scenario `{s}`")),
        }
    }
}

/// One evaluated point. The swept axis is always present; the dependent
/// value is `None` when the point lies outside the technique's domain, in
/// which case `saturated` is set. The axis not involved in the scenario is
/// `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub load: Option<f64>,
    pub throughput: Option<f64>,
    pub delay: Option<f64>,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("{what} must be ≥ 0 (got {value})")]
    Negative { what: &'static str, value: f64 },
    #[error("{technique} saturates at {value} (queue term requires < 1)")]
    Saturated { technique: AccessTechnique, value: f64 },
    #[error("peak throughput is not defined for {0}")]
    Unsupported(AccessTechnique),
    #[error(transparent)]
    Param(#[from] ParamError),
}

fn non_negative(what: &'static str, value: f64) -> Result<(), AnalyticError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AnalyticError::Negative { what, value })
    }
}

/// `q / (2 (1 - q))`, the queueing term of the TDMA/FDMA relations.
fn queue_term(tech: AccessTechnique, q: f64) -> Result<f64, AnalyticError> {
    if q >= 1.0 {
        return Err(AnalyticError::Saturated { technique: tech, value: q });
    }
    Ok(q / (2.0 * (1.0 - q)))
}

/// TDMA delay: `L/C + q/(2(1-q)) N L/C + N L/(2C)`.
fn tdma_delay(p: &TechniqueParams, q: f64) -> Result<f64, AnalyticError> {
    let frame = p.frame_time();
    let n = p.nodes as f64;
    Ok(frame + queue_term(AccessTechnique::Tdma, q)? * n * frame + n * frame / 2.0)
}

/// FDMA delay: `N L/C + q/(2(1-q)) N L/C`.
fn fdma_delay(p: &TechniqueParams, q: f64) -> Result<f64, AnalyticError> {
    let cycle = p.nodes as f64 * p.frame_time();
    Ok(cycle + queue_term(AccessTechnique::Fdma, q)? * cycle)
}

/// `(K-1)/2 + 2a + 1`, the retransmission factor of the ALOHA-family delay relations.
fn retry_factor(tech: AccessTechnique, p: &TechniqueParams) -> Result<f64, AnalyticError> {
    let k = p.require_kappa(tech)?;
    Ok((k - 1.0) / 2.0 + 2.0 * p.prop_delay + 1.0)
}

/// Arithmetic shared by `f64` and [`Dual`], so the contention curves can be
/// differentiated exactly.
trait Real: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    fn lift(v: f64) -> Self;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
}

impl Real for f64 {
    fn lift(v: f64) -> Self {
        v
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }
}

/// Forward-mode dual number `v + d·ε`.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
}

impl Real for Dual {
    fn lift(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual { v: e, d: self.d * e }
    }
    fn exp_m1(self) -> Self {
        Dual { v: self.v.exp_m1(), d: self.d * self.v.exp() }
    }
}

/// 1-persistent CSMA throughput:
/// `G(1+G+aG(1+G+aG/2)) e^(-G(1+2a)) / (G(1+2a) - (1-e^(-aG)) + (1+aG) e^(-G(1+a)))`.
fn csma_throughput<R: Real>(g: R, a: f64) -> R {
    let c = R::lift;
    let ag = c(a) * g;
    let num = g * (c(1.0) + g + ag * (c(1.0) + g + ag / c(2.0))) * (c(0.0) - g * c(1.0 + 2.0 * a)).exp();
    let den = g * c(1.0 + 2.0 * a) + (c(0.0) - ag).exp_m1() + (c(1.0) + ag) * (c(0.0) - g * c(1.0 + a)).exp();
    num / den
}

fn contention_throughput<R: Real>(tech: AccessTechnique, g: R, a: f64) -> R {
    match tech {
        AccessTechnique::PureAloha => g * (R::lift(-2.0) * g).exp(),
        AccessTechnique::SlottedAloha => g * (R::lift(-1.0) * g).exp(),
        _ => csma_throughput(g, a),
    }
}

/// Throughput as a function of offered load.
pub fn throughput_vs_load(
    tech: AccessTechnique,
    load: f64,
    params: &TechniqueParams,
) -> Result<f64, AnalyticError> {
    non_negative("offered load", load)?;
    let g = load;
    Ok(match tech {
        AccessTechnique::PureAloha | AccessTechnique::SlottedAloha | AccessTechnique::CsmaCa => {
            contention_throughput(tech, g, params.prop_delay)
        }
        AccessTechnique::Tdma => tdma_delay(params, g)?,
        AccessTechnique::Fdma => fdma_delay(params, g)?,
    })
}

/// Delay as a function of throughput. For TDMA and FDMA the throughput
/// argument stands for the queue occupancy `q`.
pub fn delay_vs_throughput(
    tech: AccessTechnique,
    throughput: f64,
    params: &TechniqueParams,
) -> Result<f64, AnalyticError> {
    non_negative("throughput", throughput)?;
    let s = throughput;
    let a = params.prop_delay;
    Ok(match tech {
        AccessTechnique::PureAloha | AccessTechnique::CsmaCa => {
            (2.0 * s).exp_m1() * retry_factor(tech, params)? + 1.0 + a
        }
        AccessTechnique::SlottedAloha => s.exp_m1() * retry_factor(tech, params)? + 1.5 + a,
        AccessTechnique::Tdma => tdma_delay(params, s)?,
        AccessTechnique::Fdma => fdma_delay(params, s)?,
    })
}

/// Delay as a function of offered load. For TDMA and FDMA the load stands
/// for the queue occupancy `q`.
pub fn delay_vs_load(
    tech: AccessTechnique,
    load: f64,
    params: &TechniqueParams,
) -> Result<f64, AnalyticError> {
    non_negative("offered load", load)?;
    let g = load;
    let a = params.prop_delay;
    Ok(match tech {
        AccessTechnique::PureAloha => g.exp_m1() * retry_factor(tech, params)? + 1.0 + a,
        AccessTechnique::SlottedAloha => g.exp_m1() * retry_factor(tech, params)? + 1.5 + a,
        AccessTechnique::CsmaCa => {
            let s = throughput_vs_load(tech, g, params)?;
            delay_vs_throughput(tech, s, params)?
        }
        AccessTechnique::Tdma => tdma_delay(params, g)?,
        AccessTechnique::Fdma => fdma_delay(params, g)?,
    })
}

fn evaluate(
    tech: AccessTechnique,
    scenario: ScenarioKind,
    x: f64,
    params: &TechniqueParams,
) -> Result<CurvePoint, AnalyticError> {
    let value = match scenario {
        ScenarioKind::DelayVsThroughput => delay_vs_throughput(tech, x, params),
        ScenarioKind::DelayVsLoad => delay_vs_load(tech, x, params),
        ScenarioKind::ThroughputVsLoad => throughput_vs_load(tech, x, params),
    };
    let (value, saturated) = match value {
        Ok(v) => (Some(v), false),
        Err(AnalyticError::Saturated { .. }) => (None, true),
        Err(e) => return Err(e),
    };
    Ok(match scenario {
        ScenarioKind::DelayVsThroughput => CurvePoint { load: None, throughput: Some(x), delay: value, saturated },
        ScenarioKind::DelayVsLoad => CurvePoint { load: Some(x), throughput: None, delay: value, saturated },
        ScenarioKind::ThroughputVsLoad => CurvePoint { load: Some(x), throughput: value, delay: None, saturated },
    })
}

/// One point per sweep value; out-of-domain points are kept and marked saturated.
pub fn generate_curve(
    tech: AccessTechnique,
    scenario: ScenarioKind,
    sweep: &[f64],
    params: &TechniqueParams,
) -> Result<Vec<CurvePoint>, AnalyticError> {
    params.validate()?;
    sweep.iter().map(|&x| evaluate(tech, scenario, x, params)).collect()
}

/// Curves for several techniques, in input order, optionally evaluated in parallel.
pub fn generate_family(
    jobs: &[(AccessTechnique, TechniqueParams)],
    scenario: ScenarioKind,
    sweep: &[f64],
    execution: Execution,
) -> Result<Vec<Vec<CurvePoint>>, AnalyticError> {
    exec::map_ordered(jobs, execution, |(tech, params)| generate_curve(*tech, scenario, sweep, params))
        .into_iter()
        .collect()
}

/// Location of the maximum of a unimodal `f` on `[lo, hi]`, given its exact
/// derivative `df`. A coarse grid brackets the peak, then the sign change
/// of the derivative is bisected down to adjacent floats. Searching on the
/// derivative avoids the flat top of `f`, where values stop resolving the
/// abscissa below about 1e-8.
fn maximise(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const GRID: usize = 1000;
    let step = (hi - lo) / GRID as f64;
    let best = (0..=GRID)
        .map(|i| lo + i as f64 * step)
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(lo);
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    if df(a) <= 0.0 || df(b) >= 0.0 {
        return best;
    }
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return if f(a) >= f(b) { a } else { b };
        }
        if df(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
}

/// Load at which throughput peaks, and the peak throughput, searched on
/// `G ∈ (0, 10]` to 1e-9 in G. Only defined for the contention techniques.
pub fn peak_throughput(
    tech: AccessTechnique,
    params: &TechniqueParams,
) -> Result<(f64, f64), AnalyticError> {
    if !tech.is_contention() {
        return Err(AnalyticError::Unsupported(tech));
    }
    params.validate()?;
    let a = params.prop_delay;
    let g = maximise(
        |g| contention_throughput(tech, g, a),
        |g| contention_throughput(tech, Dual { v: g, d: 1.0 }, a).d,
        1e-12,
        10.0,
    );
    Ok((g, throughput_vs_load(tech, g, params)?))
}
