//! Relaxation and dephasing parameters.

use crate::spinsys::SpinSystem;
use crate::units::boltzmann_factor;

use super::DynamicsError;

/// Per-site T1/T2 (µs) plus the bath temperature that sets the thermal
/// excitation ratio `m = exp(−h f / k_B T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseParams {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// Kelvin.
    pub temperature: f64,
    /// Replaces the Boltzmann factor of every site when set.
    pub m_override: Option<f64>,
}

/// Dissipative rates of one site, 1/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteRates {
    /// Coherence decay rate from pure dephasing, `1/T2`.
    pub dephasing: f64,
    /// `|1⟩ → |0⟩` rate.
    pub down: f64,
    /// `|0⟩ → |1⟩` rate.
    pub up: f64,
}

impl NoiseParams {
    /// Relaxation times taken from the sites of `sys`.
    pub fn from_system(sys: &SpinSystem, temperature: f64) -> Self {
        Self {
            t1: sys.sites().iter().map(|s| s.t1).collect(),
            t2: sys.sites().iter().map(|s| s.t2).collect(),
            temperature,
            m_override: None,
        }
    }

    /// No dissipation at all.
    pub fn noiseless(n_sites: usize) -> Self {
        Self {
            t1: vec![f64::INFINITY; n_sites],
            t2: vec![f64::INFINITY; n_sites],
            temperature: f64::INFINITY,
            m_override: Some(1.0),
        }
    }

    pub fn with_m_override(mut self, m: f64) -> Self {
        self.m_override = Some(m);
        self
    }

    pub fn validate(&self, sys: &SpinSystem) -> Result<(), DynamicsError> {
        let n = sys.len();
        if self.t1.len() != n || self.t2.len() != n {
            return Err(DynamicsError::DimensionMismatch { expected: n, found: self.t1.len().min(self.t2.len()) });
        }
        for (k, (&t1, &t2)) in self.t1.iter().zip(&self.t2).enumerate() {
            if !(t1 > 0.0) || !(t2 > 0.0) {
                return Err(DynamicsError::InvalidNoise(format!(
                    "site {}: T1 and T2 must be positive (got {t1}, {t2})",
                    sys.sites()[k].name
                )));
            }
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(DynamicsError::InvalidNoise(format!("temperature {} K", self.temperature)));
        }
        if let Some(m) = self.m_override {
            if !(0.0..=1.0).contains(&m) {
                return Err(DynamicsError::InvalidNoise(format!("m_override {m} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Thermal excitation ratio `p(|1⟩)/p(|0⟩)` of site `k`.
    pub fn thermal_factor(&self, sys: &SpinSystem, k: usize) -> f64 {
        self.m_override.unwrap_or_else(|| boltzmann_factor(sys.sites()[k].larmor, self.temperature))
    }

    /// Rates obeying detailed balance: populations relax as `exp(−t/T1)`
    /// towards `diag(1, m)/(1 + m)` and coherences dephase as `exp(−t/T2)`.
    pub fn rates(&self, sys: &SpinSystem) -> Result<Vec<SiteRates>, DynamicsError> {
        self.validate(sys)?;
        Ok((0..sys.len())
            .map(|k| {
                let m = self.thermal_factor(sys, k);
                let g1 = 1.0 / self.t1[k];
                SiteRates { dephasing: 1.0 / self.t2[k], down: g1 / (1.0 + m), up: g1 * m / (1.0 + m) }
            })
            .collect())
    }
}
