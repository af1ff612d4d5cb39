//! Config-driven experiments: single runs, parameter sweeps and SNR curves.

mod config;
pub mod presets;
mod run;
mod sweep;

pub use config::{
    AnalysisSection, ConfigError, ExperimentConfig, ExplicitTimings, FitSection, ModeName, NoiseSection,
    SamplingSection, SequenceSection, ShotsSetting, SiteEntry, SiteNoise, SweepOutput, SweepSpec, SystemSection, TGrid,
    TimingsSetting,
};
pub use presets::{preset, preset_text, PRESET_NAMES};
pub use run::{clean_trace, couplings, couplings_table, run, validate, FitRecord, Metadata, ProtocolRun, RunArtifacts};
pub use sweep::{snr_curve, sweep, Table};
