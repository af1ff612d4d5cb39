//! Experiment configuration (TOML).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequence::{Protocol, ProtocolTimings, PulseMode};
use crate::shots::Shots;
use crate::spinsys::{build_system, CouplingOverride, SiteSpec, SpinError, SpinKind, SpinSystem, SystemConfig};
use crate::units::mhz_to_angular;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("unknown sweep parameter `{0}`")]
    UnknownPath(String),
    #[error("unknown preset `{0}` (available: {1})")]
    UnknownPreset(String, String),
    #[error("system: {0}")]
    System(#[from] SpinError),
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub noise: NoiseSection,
    pub sequence: SequenceSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "default_field")]
    pub field_direction: [f64; 3],
    pub sites: Vec<SiteEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<CouplingOverride>,
}

fn default_field() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    pub name: String,
    pub kind: SpinKind,
    /// nm
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    pub larmor_mhz: f64,
}

/// `temperature`, optional `m_override`, and one `[noise.<site>]` table of
/// `t1`/`t2` (µs) per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSection {
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_override: Option<f64>,
    #[serde(flatten)]
    pub sites: BTreeMap<String, SiteNoise>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteNoise {
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Ideal,
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub protocol: Protocol,
    pub mode: ModeName,
    #[serde(default = "default_rabi")]
    pub rabi_mhz: f64,
    #[serde(default)]
    pub timings: TimingsSetting,
    #[serde(default)]
    pub t_grid: TGrid,
}

fn default_rabi() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    /// µs
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for TGrid {
    fn default() -> Self {
        Self { t_max: 3.0, n_points: 121 }
    }
}

impl TGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![0.0];
        }
        let dt = self.t_max / (self.n_points - 1) as f64;
        (0..self.n_points).map(|i| i as f64 * dt).collect()
    }
}

/// `"auto"` or an explicit table of half-lengths in µs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "TimingsRepr", into = "TimingsRepr")]
pub enum TimingsSetting {
    #[default]
    Auto,
    Explicit(ExplicitTimings),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitTimings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau3: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TimingsRepr {
    Word(String),
    Table(ExplicitTimings),
}

impl TryFrom<TimingsRepr> for TimingsSetting {
    type Error = String;
    fn try_from(r: TimingsRepr) -> Result<Self, String> {
        match r {
            TimingsRepr::Word(w) if w == "auto" => Ok(TimingsSetting::Auto),
            TimingsRepr::Word(w) => Err(format!("timings must be \"auto\" or a table, got \"{w}\"")),
            TimingsRepr::Table(t) => Ok(TimingsSetting::Explicit(t)),
        }
    }
}

impl From<TimingsSetting> for TimingsRepr {
    fn from(t: TimingsSetting) -> Self {
        match t {
            TimingsSetting::Auto => TimingsRepr::Word("auto".into()),
            TimingsSetting::Explicit(e) => TimingsRepr::Table(e),
        }
    }
}

/// Shot count per point, or `"inf"` for noiseless records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub struct ShotsSetting(pub Shots);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u64),
    Word(String),
}

impl TryFrom<ShotsRepr> for ShotsSetting {
    type Error = String;
    fn try_from(r: ShotsRepr) -> Result<Self, String> {
        match r {
            ShotsRepr::Count(0) => Err("shots must be at least 1".into()),
            ShotsRepr::Count(n) => Ok(ShotsSetting(Shots::Finite(n))),
            ShotsRepr::Word(w) if w == "inf" => Ok(ShotsSetting(Shots::Infinite)),
            ShotsRepr::Word(w) => Err(format!("shots must be a positive integer or \"inf\", got \"{w}\"")),
        }
    }
}

impl From<ShotsSetting> for ShotsRepr {
    fn from(s: ShotsSetting) -> Self {
        match s.0 {
            Shots::Finite(n) => ShotsRepr::Count(n),
            Shots::Infinite => ShotsRepr::Word("inf".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub shots: ShotsSetting,
    pub seed: u64,
    /// Number of independent seeds, `seed, seed + 1, …`.
    #[serde(default = "one")]
    pub repeats: usize,
}

fn one() -> usize {
    1
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self { shots: ShotsSetting(Shots::Finite(50_000)), seed: 0, repeats: 1 }
    }
}

impl SamplingSection {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.repeats as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_pad")]
    pub zero_pad: usize,
    #[serde(default)]
    pub fit: FitSection,
}

fn default_pad() -> usize {
    crate::analysis::DEFAULT_ZERO_PAD
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self { zero_pad: default_pad(), fit: FitSection::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Number of spectral peaks used as frequency starts.
    pub starts: usize,
}

impl Default for FitSection {
    fn default() -> Self {
        Self { starts: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    /// g estimate and its uncertainty per seed.
    Fit,
    /// Spectral SNR per seed, plus the hybrid/direct ratio.
    Snr,
    /// Ratio of noiseless spectral maxima, hybrid over direct.
    PeakRatio,
    /// Peak-to-peak amplitude of the noiseless trace.
    Contrast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `noise.<site>.t1`, `noise.<site>.t2`, `noise.temperature`,
    /// `radial.<site>` (nm, along x), `sequence.rabi_mhz` or `sampling.shots`.
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<SweepOutput>,
}

fn default_outputs() -> Vec<SweepOutput> {
    vec![SweepOutput::Fit]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The configuration with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for s in &self.system.sites {
            if !self.noise.sites.contains_key(&s.name) {
                return Err(invalid(format!("noise.{}", s.name), "missing t1/t2 table for this site"));
            }
        }
        for name in self.noise.sites.keys() {
            if !self.system.sites.iter().any(|s| &s.name == name) {
                return Err(invalid(format!("noise.{name}"), "no site of this name"));
            }
        }
        for (name, n) in &self.noise.sites {
            for (field, v) in [("t1", n.t1), ("t2", n.t2)] {
                if !(v > 0.0) {
                    return Err(invalid(format!("noise.{name}.{field}"), format!("must be positive, got {v}")));
                }
            }
        }
        if self.noise.temperature.is_nan() || self.noise.temperature < 0.0 {
            return Err(invalid("noise.temperature", "must be non-negative"));
        }
        if let Some(m) = self.noise.m_override {
            if !(0.0..=1.0).contains(&m) {
                return Err(invalid("noise.m_override", format!("must lie in [0, 1], got {m}")));
            }
        }
        if !(self.sequence.rabi_mhz > 0.0 && self.sequence.rabi_mhz.is_finite()) {
            return Err(invalid("sequence.rabi_mhz", "must be positive"));
        }
        let g = self.sequence.t_grid;
        if g.n_points == 0 || !(g.t_max >= 0.0 && g.t_max.is_finite()) || (g.n_points > 1 && g.t_max == 0.0) {
            return Err(invalid("sequence.t_grid", "need n_points ≥ 1 and t_max > 0"));
        }
        if let TimingsSetting::Explicit(e) = self.sequence.timings {
            let needed: &[(&str, Option<f64>)] = match self.sequence.protocol {
                Protocol::Hybrid => &[("tau1", e.tau1), ("tau2", e.tau2)],
                Protocol::Direct => &[("tau3", e.tau3)],
            };
            for (name, v) in needed {
                match v {
                    Some(x) if *x > 0.0 && x.is_finite() => {}
                    Some(x) => {
                        return Err(invalid(format!("sequence.timings.{name}"), format!("must be positive, got {x}")))
                    }
                    None => return Err(invalid(format!("sequence.timings.{name}"), "required by this protocol")),
                }
            }
        }
        if self.sampling.repeats == 0 {
            return Err(invalid("sampling.repeats", "must be at least 1"));
        }
        if self.analysis.zero_pad == 0 {
            return Err(invalid("analysis.zero_pad", "must be at least 1"));
        }
        if self.analysis.fit.starts == 0 {
            return Err(invalid("analysis.fit.starts", "must be at least 1"));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(invalid("sweep.values", "empty list"));
            }
            for &v in &sw.values {
                self.with_parameter(&sw.parameter, v)?;
            }
        }
        self.system_config().and_then(|c| build_system(&c).map_err(ConfigError::from))?;
        Ok(())
    }

    pub fn system_config(&self) -> Result<SystemConfig, ConfigError> {
        let sites = self
            .system
            .sites
            .iter()
            .map(|s| {
                let n = self
                    .noise
                    .sites
                    .get(&s.name)
                    .ok_or_else(|| invalid(format!("noise.{}", s.name), "missing t1/t2 table for this site"))?;
                Ok(SiteSpec {
                    name: s.name.clone(),
                    kind: s.kind,
                    position: s.position,
                    larmor_mhz: s.larmor_mhz,
                    t1: n.t1,
                    t2: n.t2,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Ok(SystemConfig {
            sites,
            field_direction: self.system.field_direction,
            overrides: self.system.overrides.clone(),
        })
    }

    pub fn build_system(&self) -> Result<SpinSystem, ConfigError> {
        Ok(build_system(&self.system_config()?)?)
    }

    pub fn noise_params(&self, sys: &SpinSystem) -> crate::dynamics::NoiseParams {
        let mut n = crate::dynamics::NoiseParams::from_system(sys, self.noise.temperature);
        n.m_override = self.noise.m_override;
        n
    }

    pub fn pulse_mode(&self) -> PulseMode {
        match self.sequence.mode {
            ModeName::Ideal => PulseMode::Ideal,
            ModeName::Finite => PulseMode::Finite { rabi: mhz_to_angular(self.sequence.rabi_mhz) },
        }
    }

    /// Explicit timings for `protocol`, or `None` for automatic timing.
    pub fn explicit_timings(&self, protocol: Protocol) -> Option<ProtocolTimings> {
        match (self.sequence.timings, protocol) {
            (
                TimingsSetting::Explicit(ExplicitTimings { tau1: Some(tau1), tau2: Some(tau2), .. }),
                Protocol::Hybrid,
            ) => Some(ProtocolTimings::Hybrid { tau1, tau2 }),
            (TimingsSetting::Explicit(ExplicitTimings { tau3: Some(tau3), .. }), Protocol::Direct) => {
                Some(ProtocolTimings::Direct { tau3 })
            }
            _ => None,
        }
    }

    /// A copy with one sweepable parameter set to `value`.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Self, ConfigError> {
        let unknown = || ConfigError::UnknownPath(path.to_string());
        let mut cfg = self.clone();
        cfg.sweep = None;
        let parts: Vec<&str> = path.split('.').collect();
        match parts.as_slice() {
            ["noise", "temperature"] => cfg.noise.temperature = value,
            ["noise", site, field @ ("t1" | "t2")] => {
                let n = cfg.noise.sites.get_mut(*site).ok_or_else(unknown)?;
                if *field == "t1" {
                    n.t1 = value;
                } else {
                    n.t2 = value;
                }
            }
            ["radial", site] => {
                let entry = cfg.system.sites.iter_mut().find(|s| s.name == *site).ok_or_else(unknown)?;
                let base = self
                    .system
                    .sites
                    .iter()
                    .find(|s| s.name == *site)
                    .and_then(|s| s.position)
                    .ok_or_else(|| invalid(path, "radial displacement needs a site position"))?;
                entry.position = Some([base[0] + value, base[1], base[2]]);
            }
            ["sequence", "rabi_mhz"] => cfg.sequence.rabi_mhz = value,
            ["sampling", "shots"] => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(invalid(path, format!("shot count must be a positive integer, got {value}")));
                }
                cfg.sampling.shots = ShotsSetting(Shots::Finite(value as u64));
            }
            _ => return Err(unknown()),
        }
        Ok(cfg)
    }
}
