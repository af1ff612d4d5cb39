//! Noiseless ideal-pulse simulation against the closed-form NV population.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

use nvdb::dynamics::{analytic_p0_direct, analytic_p0_hybrid, p0_trace, EvolveOptions, NoiseParams, TraceRequest};
use nvdb::experiment::preset;
use nvdb::sequence::{ProtocolTimings, PulseMode};

pub fn run_example() -> Result<String, nvdb::Error> {
    let sys = preset("fig2-hybrid")?.build_system()?;
    let direct = sys.without_db();
    let (nv, db, l1, l2) = (0, 1, 2, 3);
    let (a1, a2, g) = (sys.coupling(nv, db).abs(), sys.coupling(db, l1).abs(), sys.coupling(l1, l2));
    let grid: Vec<f64> = (0..=12).map(|k| k as f64 * PI / 6.0 / g.abs()).collect();
    let (eta_nv, eta_db) = (0.4, -1.1);
    let opts = EvolveOptions { eta_nv, eta_db, ..Default::default() };
    let mut out = String::from("protocol,phi_a,phi_b,max_abs_error\n");

    let noise = NoiseParams::noiseless(4);
    for phi1 in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
        for phi2 in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
            let timings = ProtocolTimings::Hybrid { tau1: phi1 / a1, tau2: phi2 / a2 };
            let req = TraceRequest {
                sys: &sys,
                noise: &noise,
                timings,
                mode: PulseMode::Ideal,
                t_grid: &grid,
                opts: opts.clone(),
            };
            let err = p0_trace(&req)?
                .iter()
                .zip(&grid)
                .map(|(p, &t)| (p - analytic_p0_hybrid(phi1, phi2, g, t, eta_nv, eta_db)).abs())
                .fold(0.0, f64::max);
            out.push_str(&format!("hybrid,{phi1:.6},{phi2:.6},{err:.3e}\n"));
        }
    }

    let noise = NoiseParams::noiseless(3);
    let (a3, g3) = (direct.coupling(0, 1).abs(), direct.coupling(1, 2));
    for phi3 in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
        let timings = ProtocolTimings::Direct { tau3: phi3 / a3 };
        let req = TraceRequest {
            sys: &direct,
            noise: &noise,
            timings,
            mode: PulseMode::Ideal,
            t_grid: &grid,
            opts: opts.clone(),
        };
        let err = p0_trace(&req)?
            .iter()
            .zip(&grid)
            .map(|(p, &t)| (p - analytic_p0_direct(phi3, g3, t, eta_nv)).abs())
            .fold(0.0, f64::max);
        out.push_str(&format!("direct,{phi3:.6},,{err:.3e}\n"));
    }
    Ok(out)
}

fn main() {
    match run_example() {
        Ok(s) => print!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
