//! NV population as a function of the label evolution time.

use rayon::prelude::*;

use crate::sequence::{compile, ProtocolTimings, PulseMode};
use crate::spinsys::SpinSystem;

use super::evolve::{events, Engine, Event};
use super::{nv_population, thermal_initial_state, DynamicsError, EvolveOptions, NoiseParams};

#[derive(Debug, Clone)]
pub struct TraceRequest<'a> {
    pub sys: &'a SpinSystem,
    pub noise: &'a NoiseParams,
    pub timings: ProtocolTimings,
    pub mode: PulseMode,
    /// Values of `t` (µs).
    pub t_grid: &'a [f64],
    /// Sample times are ignored; only the final population is kept.
    pub opts: EvolveOptions,
}

/// Final `P0` for every `t` in the grid, starting from the thermal state.
///
/// Everything before the central window is independent of `t`, so that part
/// is propagated once and shared by all grid points, which run in parallel.
pub fn p0_trace(req: &TraceRequest<'_>) -> Result<Vec<f64>, DynamicsError> {
    let Some(&first) = req.t_grid.first() else {
        return Ok(Vec::new());
    };
    let mut opts = req.opts.clone();
    opts.sample_times.clear();
    opts.check_positivity = false;
    let init = thermal_initial_state(req.sys, req.noise)?;

    let tl0 = compile(&req.timings, first, req.mode, req.sys)?;
    let ev0 = events(&tl0);
    let split = ev0.iter().position(|e| *e == Event::Kick).unwrap_or(0);
    let prefix = &ev0[..split];
    let mut engine = Engine::new(&init, req.sys, req.noise, &opts)?;
    engine.run(&tl0, prefix)?;
    let cached = engine.state();

    req.t_grid
        .par_iter()
        .map(|&t| {
            let tl = compile(&req.timings, t, req.mode, req.sys)?;
            let ev = events(&tl);
            let (start, rest) =
                if ev.len() >= split && ev[..split] == *prefix { (&cached, &ev[split..]) } else { (&init, &ev[..]) };
            let mut engine = Engine::new(start, req.sys, req.noise, &opts)?;
            engine.run(&tl, rest)?;
            Ok(nv_population(&engine.finish().final_state))
        })
        .collect()
}
