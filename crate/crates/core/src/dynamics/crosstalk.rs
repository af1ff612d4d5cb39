//! Finite-width microwave drive in the multi-site rotating frame.
//!
//! Each drive tone is resonant with its target. Every other site sees the
//! same tone detuned by `δ_k = ω_k − ω_drive`, so its transverse field
//! rotates at `δ_k` and averages out when `|δ_k| ≫ Ω`.

use num_complex::Complex64 as C64;

use crate::hilbert::{embed, Op};
use crate::spinsys::SpinSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    /// rad/µs
    pub carrier: f64,
    /// Rabi frequency Ω, rad/µs.
    pub amplitude: f64,
    /// 0 for X, π/2 for Y.
    pub phase: f64,
    /// Site the tone is meant to address.
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSegment {
    pub drives: Vec<Drive>,
    /// µs
    pub start: f64,
    /// µs
    pub end: f64,
    /// When false each tone acts on its target only.
    pub crosstalk: bool,
}

impl DriveSegment {
    /// Coefficient of `|1⟩⟨0|` on each site at `time`:
    /// `Σ_drives (Ω/2) e^{i(δ_k t + φ)}`.
    pub fn coefficients(&self, time: f64, sys: &SpinSystem, out: &mut [C64]) {
        for (k, (o, site)) in out.iter_mut().zip(sys.sites()).enumerate() {
            *o = C64::new(0.0, 0.0);
            for d in &self.drives {
                if !self.crosstalk && d.target != k {
                    continue;
                }
                let delta = if d.target == k { 0.0 } else { site.larmor - d.carrier };
                *o += C64::from_polar(0.5 * d.amplitude, delta * time + d.phase);
            }
        }
    }

    /// Largest off-resonant detuning any site sees, rad/µs.
    pub fn max_detuning(&self, sys: &SpinSystem) -> f64 {
        if !self.crosstalk {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for d in &self.drives {
            for (k, site) in sys.sites().iter().enumerate() {
                if k != d.target {
                    worst = worst.max((site.larmor - d.carrier).abs());
                }
            }
        }
        worst
    }
}

/// `Σ_k (h_k σ⁻_k + h_k* σ⁺_k)` with `σ⁻ = |1⟩⟨0|`; a resonant tone of
/// phase φ is `(Ω/2)(cos φ σx + sin φ σy)` on its target.
pub fn crosstalk_hamiltonian(time: f64, segment: &DriveSegment, sys: &SpinSystem) -> Op {
    let n = sys.len();
    let mut h = vec![C64::new(0.0, 0.0); n];
    segment.coefficients(time, sys, &mut h);
    let zero = C64::new(0.0, 0.0);
    let mut out = Op::zeros(1 << n, 1 << n);
    for (k, hk) in h.into_iter().enumerate() {
        out += embed(&[[zero, hk.conj()], [hk, zero]], n, k);
    }
    out
}
