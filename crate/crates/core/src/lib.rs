//! Throughput, delay and offered-load models for five medium access
//! techniques, plus a deterministic discrete-event simulator of the same
//! techniques on a shared medium.
//!
//! * [`analytic`] evaluates the closed-form curves.
//! * [`components`] sums per-frame delay components and converts delay to throughput.
//! * [`sim`] runs seeded simulations and measures offered load, throughput and delay.
//! * [`exec`] fans independent evaluations out over a thread pool when the
//!   `parallel` feature is enabled.

pub mod analytic;
pub mod components;
pub mod exec;
pub mod params;
pub mod sim;
pub mod sweep;
pub mod technique;

pub use analytic::{CurvePoint, ScenarioKind};
pub use exec::Execution;
pub use params::{ParamError, TechniqueParams};
pub use sweep::{Scale, SweepError, SweepSpec};
pub use technique::AccessTechnique;
