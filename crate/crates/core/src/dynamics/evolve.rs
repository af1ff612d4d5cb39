//! Piecewise propagation of a state through a pulse timeline.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::hilbert::{conjugate_site, Op};
use crate::sequence::{PulseMode, PulseTimeline};
use crate::spinsys::SpinSystem;

use super::{
    nv_population, Dopri5, Drive, DriveSegment, DynamicsError, EvolutionState, Liouvillian, NoiseParams, StepStats,
};

/// Trace drift beyond which evolution aborts.
const TRACE_ABORT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub integrator: Dopri5,
    /// Times (µs) at which to record the state, ascending. A sample taken at
    /// the instant of an ideal pulse sees the pulse already applied.
    pub sample_times: Vec<f64>,
    /// Quasi-static phases applied to the NV and DB at the start of the
    /// central window as `exp(−i η σz / 2)`.
    pub eta_nv: f64,
    pub eta_db: f64,
    /// Off-resonant driving of non-target sites in finite mode.
    pub crosstalk: bool,
    /// Compute the minimum eigenvalue at every sample.
    pub check_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            integrator: Dopri5::default(),
            sample_times: Vec::new(),
            eta_nv: 0.0,
            eta_db: 0.0,
            crosstalk: true,
            check_positivity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<EvolutionState>,
    pub final_state: EvolutionState,
}

impl Trajectory {
    /// `t_us,p0,trace_drift` records, one per sample.
    pub fn to_table(&self) -> String {
        let mut s = String::from("t_us,p0,trace_drift\n");
        for st in &self.samples {
            let _ = writeln!(
                s,
                "{},{},{}",
                crate::table::sig9(st.time),
                crate::table::sig9(nv_population(st)),
                crate::table::sig9(st.diagnostics.trace_drift)
            );
        }
        s
    }
}

/// `exp(−i θ (cos φ σx + sin φ σy) / 2)`.
pub fn rotation(angle: f64, phase: f64) -> [[C64; 2]; 2] {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let mi = C64::new(0.0, -1.0);
    [
        [C64::new(c, 0.0), mi * s * C64::from_polar(1.0, -phase)],
        [mi * s * C64::from_polar(1.0, phase), C64::new(c, 0.0)],
    ]
}

fn z_phase(eta: f64) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    [[C64::from_polar(1.0, -eta / 2.0), z], [z, C64::from_polar(1.0, eta / 2.0)]]
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Event {
    Free { end: f64 },
    Pulses { range: Range<usize>, start: f64, end: f64 },
    Kick,
}

pub(crate) fn events(tl: &PulseTimeline) -> Vec<Event> {
    let mut out = Vec::new();
    let mut clock = 0.0;
    let mut kicked = false;
    for g in tl.groups() {
        if !kicked && g.start >= tl.central_first_pulse {
            if tl.central.start > clock {
                out.push(Event::Free { end: tl.central.start });
                clock = tl.central.start;
            }
            out.push(Event::Kick);
            kicked = true;
        }
        let start = tl.pulses[g.start].start;
        let end = tl.pulses[g.clone()].iter().map(|p| p.end()).fold(start, f64::max);
        if start > clock {
            out.push(Event::Free { end: start });
        }
        out.push(Event::Pulses { range: g, start, end });
        clock = end;
    }
    if !kicked {
        out.push(Event::Kick);
    }
    if tl.total_duration > clock {
        out.push(Event::Free { end: tl.total_duration });
    }
    out
}

pub(crate) struct Engine<'a> {
    sys: &'a SpinSystem,
    liou: Liouvillian,
    opts: &'a EvolveOptions,
    dim: usize,
    y: Vec<C64>,
    time: f64,
    n_sites: usize,
    nv: usize,
    db: Option<usize>,
    diagnostics: super::Diagnostics,
    stats: StepStats,
    pending: Vec<f64>,
    pub(crate) samples: Vec<EvolutionState>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(
        state: &EvolutionState,
        sys: &'a SpinSystem,
        noise: &NoiseParams,
        opts: &'a EvolveOptions,
    ) -> Result<Self, DynamicsError> {
        let dim = sys.dim();
        if state.rho.nrows() != dim || state.n_sites != sys.len() {
            return Err(DynamicsError::DimensionMismatch { expected: dim, found: state.rho.nrows() });
        }
        let liou = Liouvillian::from_system(sys, noise)?;
        let y: Vec<C64> = state.rho.transpose().iter().cloned().collect();
        let db = sys.roles().ok().and_then(|r| r.db);
        let mut pending: Vec<f64> = opts.sample_times.iter().rev().cloned().collect();
        pending.retain(|&s| s >= state.time - 1e-12);
        Ok(Self {
            sys,
            liou,
            opts,
            dim,
            y,
            time: state.time,
            n_sites: state.n_sites,
            nv: state.nv,
            db,
            diagnostics: state.diagnostics,
            stats: StepStats::default(),
            pending,
            samples: Vec::new(),
        })
    }

    pub(crate) fn state(&self) -> EvolutionState {
        let rho = Op::from_row_slice(self.dim, self.dim, &self.y);
        EvolutionState { rho, time: self.time, n_sites: self.n_sites, nv: self.nv, diagnostics: self.diagnostics }
    }

    fn set_rho(&mut self, rho: &Op) {
        self.y = rho.transpose().iter().cloned().collect();
    }

    fn check_trace(&mut self) -> Result<(), DynamicsError> {
        let tr: f64 = (0..self.dim).map(|i| self.y[i * self.dim + i].re).sum();
        let drift = (tr - 1.0).abs();
        if !drift.is_finite() {
            return Err(DynamicsError::NonFinite { time: self.time });
        }
        self.diagnostics.trace_drift = self.diagnostics.trace_drift.max(drift);
        if drift > TRACE_ABORT {
            return Err(DynamicsError::TraceDrift { time: self.time, drift });
        }
        Ok(())
    }

    fn record(&mut self) {
        let mut st = self.state();
        if self.opts.check_positivity {
            st.diagnostics.min_eigenvalue = st.min_eigenvalue();
            self.diagnostics.min_eigenvalue = st.diagnostics.min_eigenvalue;
        }
        st.diagnostics.step_count = self.stats.accepted;
        self.samples.push(st);
    }

    fn integrate(&mut self, to: f64, segment: Option<&DriveSegment>) -> Result<(), DynamicsError> {
        if to <= self.time {
            return Ok(());
        }
        let mut integrator = self.opts.integrator;
        let sys = self.sys;
        let liou = &self.liou;
        match segment {
            None => {
                integrator.integrate(
                    |_, y, dy| liou.apply(y, None, dy),
                    self.time,
                    to,
                    &mut self.y,
                    &mut self.stats,
                )?;
            }
            Some(seg) => {
                let detuning = seg.max_detuning(sys);
                if detuning > 0.0 {
                    integrator.max_step = integrator.max_step.min(TAU / (20.0 * detuning));
                }
                let mut h = vec![C64::new(0.0, 0.0); sys.len()];
                // the pulse step history is a poor guess for the next free window and vice versa
                let mut stats = StepStats { last_step: 0.0, ..self.stats };
                integrator.integrate(
                    |t, y, dy| {
                        seg.coefficients(t, sys, &mut h);
                        liou.apply(y, Some(&h), dy)
                    },
                    self.time,
                    to,
                    &mut self.y,
                    &mut stats,
                )?;
                self.stats.accepted = stats.accepted;
                self.stats.rejected = stats.rejected;
            }
        }
        self.time = to;
        self.diagnostics.step_count = self.stats.accepted;
        self.check_trace()
    }

    /// Integrate to `to`, stopping to record samples strictly before it.
    fn advance(&mut self, to: f64, segment: Option<&DriveSegment>) -> Result<(), DynamicsError> {
        while let Some(&s) = self.pending.last() {
            if s >= to {
                break;
            }
            self.integrate(s.max(self.time), segment)?;
            self.pending.pop();
            self.record();
        }
        self.integrate(to, segment)
    }

    pub(crate) fn run(&mut self, tl: &PulseTimeline, events: &[Event]) -> Result<(), DynamicsError> {
        for ev in events {
            match ev {
                Event::Free { end } => self.advance(*end, None)?,
                Event::Kick => self.kick(),
                Event::Pulses { range, start, end } => match tl.mode {
                    PulseMode::Ideal => {
                        self.advance(*start, None)?;
                        let mut rho = Op::from_row_slice(self.dim, self.dim, &self.y);
                        for p in &tl.pulses[range.clone()] {
                            conjugate_site(
                                &mut rho,
                                &rotation(p.angle.radians(), p.axis.phase()),
                                self.n_sites,
                                p.site,
                            );
                        }
                        self.set_rho(&rho);
                    }
                    PulseMode::Finite { .. } => {
                        self.advance(*start, None)?;
                        let pulses = &tl.pulses[range.clone()];
                        let mut cuts: Vec<f64> = pulses.iter().map(|p| p.end()).collect();
                        cuts.sort_by(f64::total_cmp);
                        cuts.dedup();
                        for cut in cuts.into_iter().filter(|&c| c <= *end) {
                            let seg = DriveSegment {
                                drives: pulses
                                    .iter()
                                    .filter(|p| p.end() >= cut)
                                    .map(|p| Drive {
                                        carrier: p.carrier.unwrap_or(self.sys.sites()[p.site].larmor),
                                        amplitude: p.rabi.unwrap_or(0.0),
                                        phase: p.axis.phase(),
                                        target: p.site,
                                    })
                                    .collect(),
                                start: self.time,
                                end: cut,
                                crosstalk: self.opts.crosstalk,
                            };
                            self.advance(cut, Some(&seg))?;
                        }
                    }
                },
            }
        }
        Ok(())
    }

    fn kick(&mut self) {
        let mut kicks = vec![(self.nv, self.opts.eta_nv)];
        if let Some(db) = self.db {
            kicks.push((db, self.opts.eta_db));
        }
        if kicks.iter().all(|&(_, eta)| eta == 0.0) {
            return;
        }
        let mut rho = Op::from_row_slice(self.dim, self.dim, &self.y);
        for (site, eta) in kicks {
            if eta != 0.0 {
                conjugate_site(&mut rho, &z_phase(eta), self.n_sites, site);
            }
        }
        self.set_rho(&rho);
    }

    pub(crate) fn finish(mut self) -> Trajectory {
        while self.pending.pop().is_some() {
            self.record();
        }
        let mut final_state = self.state();
        if self.opts.check_positivity {
            final_state.diagnostics.min_eigenvalue = final_state.min_eigenvalue();
        }
        Trajectory { samples: self.samples, final_state }
    }
}

fn check_timeline(tl: &PulseTimeline, sys: &SpinSystem) -> Result<(), DynamicsError> {
    for p in &tl.pulses {
        match sys.sites().get(p.site) {
            Some(s) if s.name == p.target => {}
            _ => {
                return Err(DynamicsError::Spin(crate::spinsys::SpinError::UnknownSite(p.target.clone())));
            }
        }
    }
    Ok(())
}

/// Propagate `state` through `timeline`, recording the requested samples.
/// The timeline is played from its beginning and the state's clock is
/// reset to zero.
pub fn evolve(
    state: &EvolutionState,
    timeline: &PulseTimeline,
    sys: &SpinSystem,
    noise: &NoiseParams,
    opts: &EvolveOptions,
) -> Result<Trajectory, DynamicsError> {
    check_timeline(timeline, sys)?;
    let mut state = state.clone();
    state.time = 0.0;
    for &s in &opts.sample_times {
        if !(s >= state.time - 1e-12 && s <= timeline.total_duration + 1e-12) {
            return Err(DynamicsError::SampleOutOfRange { time: s, start: state.time, end: timeline.total_duration });
        }
    }
    let mut engine = Engine::new(&state, sys, noise, opts)?;
    engine.run(timeline, &events(timeline))?;
    Ok(engine.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{analytic_p0_direct, analytic_p0_hybrid, p0_trace, thermal_initial_state, TraceRequest};
    use crate::sequence::{auto_timings, compile_direct, compile_hybrid, Protocol, ProtocolTimings};
    use crate::spinsys::{build_system, CouplingOverride, SiteSpec, SpinKind, SystemConfig};
    use crate::units::mhz_to_angular;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    pub(crate) fn reference_register() -> SpinSystem {
        let site =
            |name: &str, kind, f, t1, t2| SiteSpec { name: name.into(), kind, position: None, larmor_mhz: f, t1, t2 };
        let ov = |a: &str, b: &str, mhz| CouplingOverride { a: a.into(), b: b.into(), mhz };
        build_system(&SystemConfig {
            sites: vec![
                site("nv", SpinKind::Nv, 3290.0, 20.0, 5.0),
                site("db", SpinKind::Db, 826.0, 29.4, 1.0),
                site("l1", SpinKind::Label, 1240.0, 4.0, 1.0),
                site("l2", SpinKind::Label, 1550.0, 4.0, 1.0),
            ],
            field_direction: [0.0, 0.0, 1.0],
            overrides: vec![
                ov("nv", "db", -0.550),
                ov("nv", "l1", -0.066),
                ov("nv", "l2", -0.032),
                ov("db", "l1", -0.511),
                ov("db", "l2", -0.130),
                ov("l1", "l2", -1.734),
            ],
        })
        .unwrap()
    }

    fn final_p0(tl: &PulseTimeline, sys: &SpinSystem, noise: &NoiseParams, opts: &EvolveOptions) -> f64 {
        let init = thermal_initial_state(sys, noise).unwrap();
        nv_population(&evolve(&init, tl, sys, noise, opts).unwrap().final_state)
    }

    #[test]
    fn ideal_hybrid_matches_closed_form_with_phases() {
        let sys = reference_register();
        let noise = NoiseParams::noiseless(4);
        let a1 = sys.coupling(0, 1).abs();
        let a2 = sys.coupling(1, 2).abs();
        let g = sys.coupling(2, 3);
        for phi1 in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
            for phi2 in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
                for gt in [0.0, FRAC_PI_3, PI] {
                    let timings = ProtocolTimings::Hybrid { tau1: phi1 / a1, tau2: phi2 / a2 };
                    let t = gt / g.abs();
                    let tl = compile_hybrid(&timings, t, PulseMode::Ideal, &sys).unwrap();
                    let opts = EvolveOptions { eta_nv: 0.4, eta_db: -1.1, ..Default::default() };
                    let p = final_p0(&tl, &sys, &noise, &opts);
                    let expect = analytic_p0_hybrid(phi1, phi2, g, t, 0.4, -1.1);
                    assert!((p - expect).abs() < 1e-6, "{phi1} {phi2} {gt}: {p} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn ideal_direct_matches_closed_form() {
        let sys = reference_register().without_db();
        let noise = NoiseParams::noiseless(3);
        let a = sys.coupling(0, 1).abs();
        let g = sys.coupling(1, 2);
        for phi3 in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
            for gt in [0.0, FRAC_PI_3, PI] {
                let tl =
                    compile_direct(&ProtocolTimings::Direct { tau3: phi3 / a }, gt / g.abs(), PulseMode::Ideal, &sys)
                        .unwrap();
                let opts = EvolveOptions { eta_nv: 0.8, ..Default::default() };
                let p = final_p0(&tl, &sys, &noise, &opts);
                assert!((p - analytic_p0_direct(phi3, g, gt / g.abs(), 0.8)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn reference_noisy_start_values() {
        // independent dense-propagator computation of the same model
        let sys = reference_register();
        let noise = NoiseParams::from_system(&sys, 300.0).with_m_override(1.0);
        for (protocol, sys, expect) in
            [(Protocol::Hybrid, sys.clone(), 0.4681), (Protocol::Direct, sys.without_db(), 0.4968)]
        {
            let timings = auto_timings(&sys, protocol).unwrap();
            let noise = NoiseParams::from_system(&sys, 300.0).with_m_override(noise.m_override.unwrap());
            let p = p0_trace(&TraceRequest {
                sys: &sys,
                noise: &noise,
                timings,
                mode: PulseMode::Ideal,
                t_grid: &[0.0],
                opts: EvolveOptions::default(),
            })
            .unwrap();
            assert!((p[0] - expect).abs() < 1e-3, "{protocol}: {}", p[0]);
        }
    }

    #[test]
    fn finite_resonant_pi_pulse_swaps_populations() {
        let mut cfg_sys = reference_register();
        for i in 0..4 {
            for j in 0..4 {
                cfg_sys = cfg_sys.with_coupling(i, j, 0.0);
            }
        }
        let sys = cfg_sys;
        let noise = NoiseParams::noiseless(4);
        let h = ProtocolTimings::Hybrid { tau1: 0.5, tau2: 0.5 };
        let tl = compile_hybrid(&h, 0.0, PulseMode::Finite { rabi: mhz_to_angular(10.0) }, &sys).unwrap();
        // the opening π/2 on the NV alone, then check a π from its DEER partner
        let mut one = tl.clone();
        one.pulses.truncate(1);
        one.pulses[0].angle = crate::sequence::Rotation::Pi;
        one.pulses[0].duration = 0.05;
        one.total_duration = 0.05;
        one.central_first_pulse = 1;
        one.central = crate::sequence::Window { start: 0.05, end: 0.05 };
        let opts = EvolveOptions { crosstalk: false, ..Default::default() };
        let p = final_p0(&one, &sys, &noise, &opts);
        assert!(p < 1e-4, "{p}");
    }
}
