//! Density-matrix state and readout.

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;

use crate::hilbert::{product_state, site_mask, Op};
use crate::spinsys::{SpinError, SpinSystem};

use super::NoiseParams;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Largest `|tr ρ − 1|` seen so far.
    pub trace_drift: f64,
    /// Smallest eigenvalue of ρ at the last check.
    pub min_eigenvalue: f64,
    pub step_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub rho: Op,
    /// µs
    pub time: f64,
    pub n_sites: usize,
    /// Index of the NV site.
    pub nv: usize,
    pub diagnostics: Diagnostics,
}

impl EvolutionState {
    pub fn new(rho: Op, n_sites: usize, nv: usize) -> Self {
        let mut s = Self { rho, time: 0.0, n_sites, nv, diagnostics: Diagnostics::default() };
        s.diagnostics.min_eigenvalue = s.min_eigenvalue();
        s
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    /// Largest deviation from Hermiticity, entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.rho.nrows();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.rho[(r, c)] - self.rho[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// NV in `|0⟩`, every other site in its thermal state `diag(1, m)/(1 + m)`.
pub fn thermal_initial_state(sys: &SpinSystem, noise: &NoiseParams) -> Result<EvolutionState, SpinError> {
    let nv = sys.roles().map(|r| r.nv).or_else(|_| {
        sys.sites().iter().position(|s| s.kind == crate::spinsys::SpinKind::Nv).ok_or(SpinError::NvCount(0))
    })?;
    let zero = C64::new(0.0, 0.0);
    let factors: Vec<[[C64; 2]; 2]> = (0..sys.len())
        .map(|k| {
            if k == nv {
                [[C64::new(1.0, 0.0), zero], [zero, zero]]
            } else {
                let m = noise.thermal_factor(sys, k);
                [[C64::new(1.0 / (1.0 + m), 0.0), zero], [zero, C64::new(m / (1.0 + m), 0.0)]]
            }
        })
        .collect();
    Ok(EvolutionState::new(product_state(&factors), sys.len(), nv))
}

/// `Tr(ρ |0⟩⟨0|_NV)`, clamped to [0, 1].
pub fn nv_population(state: &EvolutionState) -> f64 {
    let mask = site_mask(state.n_sites, state.nv);
    let p: f64 = (0..state.rho.nrows()).filter(|i| i & mask == 0).map(|i| state.rho[(i, i)].re).sum();
    if !(-1e-8..=1.0 + 1e-8).contains(&p) {
        log::warn!("NV population {p} outside [0, 1] beyond tolerance; clamping");
    }
    p.clamp(0.0, 1.0)
}
