//! Simulation of NV-centre DEER relay sequences through a dark electron spin.
//!
//! A spin register (NV, optional dangling bond, two labels) is built from
//! geometry, driven by a compiled echo sequence, evolved under a Lindblad
//! master equation and read out through finite-shot sampling, spectra and a
//! maximum-likelihood fit of the label coupling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod experiment;
pub mod hilbert;
pub mod sequence;
pub mod shots;
pub mod spinsys;
pub mod table;
pub mod units;

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] experiment::ConfigError),
    #[error(transparent)]
    Spin(#[from] spinsys::SpinError),
    #[error(transparent)]
    Sequence(#[from] sequence::SequenceError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Shots(#[from] shots::ShotsError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// 2 for invalid input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use dynamics::DynamicsError as D;
        match self {
            Error::Config(_) | Error::Spin(_) | Error::Sequence(_) | Error::Io { .. } => 2,
            Error::Dynamics(D::Spin(_) | D::Sequence(_) | D::InvalidNoise(_) | D::SampleOutOfRange { .. }) => 2,
            Error::Dynamics(_) | Error::Shots(_) | Error::Analysis(_) => 3,
        }
    }
}
