//! Open-system evolution of the joint spin register.
//!
//! The density matrix evolves under the secular ZZ Hamiltonian, pulse drives
//! and per-site Lindblad dissipators. Pulses are either exact instantaneous
//! rotations (ideal mode) or finite drives including off-resonant cross-talk
//! on every other spin (finite mode).

mod analytic;
mod crosstalk;
mod evolve;
mod integrator;
mod liouvillian;
mod noise;
mod state;
mod trace;

pub use analytic::{analytic_p0_direct, analytic_p0_hybrid};
pub use crosstalk::{crosstalk_hamiltonian, Drive, DriveSegment};
pub use evolve::{evolve, rotation, EvolveOptions, Trajectory};
pub use integrator::{Dopri5, IntegrationError, StepStats};
pub use liouvillian::{dissipator_channels, lindblad_rhs, Channel, Liouvillian};
pub use noise::{NoiseParams, SiteRates};
pub use state::{nv_population, thermal_initial_state, Diagnostics, EvolutionState};
pub use trace::{p0_trace, TraceRequest};

use thiserror::Error;

use crate::sequence::SequenceError;
use crate::spinsys::SpinError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("integrator step underflow at t = {time} µs (h = {step:e})")]
    StepUnderflow { time: f64, step: f64 },
    #[error("non-finite density matrix at t = {time} µs")]
    NonFinite { time: f64 },
    #[error("trace drifted by {drift:e} at t = {time} µs")]
    TraceDrift { time: f64, drift: f64 },
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error("sample time {time} µs lies outside [{start}, {end}]")]
    SampleOutOfRange { time: f64, start: f64, end: f64 },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Spin(#[from] SpinError),
}

impl From<IntegrationError> for DynamicsError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::StepUnderflow { time, step } => DynamicsError::StepUnderflow { time, step },
            IntegrationError::NonFinite { time } => DynamicsError::NonFinite { time },
        }
    }
}
