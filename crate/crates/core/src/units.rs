//! Unit conventions and physical constants.
//!
//! Internally every frequency is an angular frequency in rad/µs and every
//! time is in µs, so `ω·t` is a phase in radians with no further scaling.
//! User-facing values (configs, tables) are ordinary frequencies in MHz.
//! The conversion between the two is exactly 2π.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// CODATA 2018 values in SI units.
pub mod codata {
    /// Vacuum magnetic permeability, N A⁻².
    pub const MU0: f64 = 1.256_637_062_12e-6;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Planck constant, J s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Boltzmann constant, J K⁻¹.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Magnitude of the electron gyromagnetic ratio, rad s⁻¹ T⁻¹
    /// (2π × 28.025 GHz/T).
    pub const GAMMA_E: f64 = 1.760_859_630_23e11;
}

/// MHz → rad/µs.
#[inline]
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    f_mhz * TWO_PI
}

/// rad/µs → MHz.
#[inline]
pub fn angular_to_mhz(w: f64) -> f64 {
    w / TWO_PI
}

/// Prefactor `µ0 γe² ħ / 4π` of the electron–electron dipolar interaction,
/// stored in rad/µs · nm³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipolarConstant(f64);

impl DipolarConstant {
    pub fn codata() -> Self {
        use codata::*;
        // rad/s · m³
        let si = MU0 / (4.0 * PI) * GAMMA_E * GAMMA_E * HBAR;
        // 1 m³ = 1e27 nm³, 1 s⁻¹ = 1e-6 µs⁻¹
        Self(si * 1e27 * 1e-6)
    }

    /// rad/µs · nm³
    pub fn value(self) -> f64 {
        self.0
    }

    /// MHz · nm³
    pub fn value_mhz(self) -> f64 {
        angular_to_mhz(self.0)
    }
}

impl Default for DipolarConstant {
    fn default() -> Self {
        Self::codata()
    }
}

/// Boltzmann factor `exp(−h f / k_B T)` of a two-level transition at angular
/// frequency `larmor` (rad/µs) and temperature `kelvin`.
pub fn boltzmann_factor(larmor: f64, kelvin: f64) -> f64 {
    if kelvin <= 0.0 {
        return 0.0;
    }
    if !kelvin.is_finite() {
        return 1.0;
    }
    let f_hz = angular_to_mhz(larmor.abs()) * 1e6;
    (-codata::PLANCK * f_hz / (codata::BOLTZMANN * kelvin)).exp()
}
