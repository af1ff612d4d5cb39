//! Closed-form NV populations for ideal pulses and no dissipation.

/// Hybrid protocol:
/// `½[1 − sin²φ1 sin²φ2 cos gt + cos²φ1 sin η_NV − sin²φ1 cos²φ2 sin η_DB]`.
pub fn analytic_p0_hybrid(phi1: f64, phi2: f64, g: f64, t: f64, eta_nv: f64, eta_db: f64) -> f64 {
    let (s1, c1) = (phi1.sin().powi(2), phi1.cos().powi(2));
    let (s2, c2) = (phi2.sin().powi(2), phi2.cos().powi(2));
    0.5 * (1.0 - s1 * s2 * (g * t).cos() + c1 * eta_nv.sin() - s1 * c2 * eta_db.sin())
}

/// Direct protocol: `½[1 − sin²φ3 cos gt + cos²φ3 sin η_NV]`.
pub fn analytic_p0_direct(phi3: f64, g: f64, t: f64, eta_nv: f64) -> f64 {
    0.5 * (1.0 - phi3.sin().powi(2) * (g * t).cos() + phi3.cos().powi(2) * eta_nv.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn optimal_phases_remove_noise_terms() {
        for eta in [-2.0, 0.0, 0.7] {
            let p = analytic_p0_hybrid(FRAC_PI_2, FRAC_PI_2, 2.0, 0.8, eta, -eta);
            assert!((p - 0.5 * (1.0 - (1.6f64).cos())).abs() < 1e-15);
        }
    }

    #[test]
    fn no_transfer_leaves_nv_phase() {
        let p = analytic_p0_hybrid(0.0, 1.0, 2.0, 0.3, 0.4, 0.9);
        assert!((p - 0.5 * (1.0 + 0.4f64.sin())).abs() < 1e-15);
        assert!((analytic_p0_direct(0.0, 1.0, 1.0, 0.4) - 0.5 * (1.0 + 0.4f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn direct_quarter_phase() {
        let p = analytic_p0_direct(FRAC_PI_4, 3.0, 0.5, 0.0);
        assert!((p - 0.5 * (1.0 - 0.5 * 1.5f64.cos())).abs() < 1e-15);
        assert!((analytic_p0_direct(FRAC_PI_2, 1.0, PI, 0.3) - 1.0).abs() < 1e-15);
    }
}
