//! Multi-tone dynamical-decoupling sequences.
//!
//! Both protocols are spin-echo cascades. The hybrid protocol hands the NV
//! coherence to the DB, from the DB to the first label, lets the label pair
//! evolve for `2t`, and then walks the same path back:
//!
//! ```text
//! NV   π/2x ─τ1─ πx ─τ1─ π/2y ───────────────── πx ──── πx ────── π/2x ─τ1─ πx ─τ1─ π/2y
//! DB             πx ─── π/2x ─τ2─ πx ─τ2─ π/2y ─────────────── π/2x ─τ2─ πx ─τ2─ π/2y ─ πx
//! L1                              πx ─── π/2y ─t─ πx ─t─ π/2y ─τ2─ πx ─τ2─
//! L2                                              πx
//! ```
//!
//! Every free interval is bracketed by simultaneous π pulses on the two spins
//! whose coupling should act (DEER blocks), so all other ZZ terms refocus.
//! The NV is echoed twice inside the central window (at `t/2` and `3t/2`),
//! which removes the NV–DB coupling there while leaving the label pair
//! untouched.
//!
//! In ideal mode pulses are instantaneous. In finite mode every pulse lasts
//! `angle / rabi` and the adjacent free intervals are shortened by half the
//! pulse durations so pulse centres sit where the ideal pulses would be.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spinsys::{Roles, SpinError, SpinSystem};
use crate::units::angular_to_mhz;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("{name} must be non-negative and finite, got {value}")]
    NegativeTime { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositiveTime { name: &'static str, value: f64 },
    #[error("the {0} protocol needs a {1} site")]
    MissingRole(Protocol, &'static str),
    #[error("coupling {0} vanishes (magic-angle geometry?); cannot time the transfer")]
    VanishingCoupling(String),
    #[error("timings do not match the {0} protocol")]
    TimingMismatch(Protocol),
    #[error("rabi frequency must be positive, got {0}")]
    InvalidRabi(f64),
    #[error(transparent)]
    Spin(#[from] SpinError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Hybrid,
    Direct,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Hybrid => "hybrid",
            Protocol::Direct => "direct",
        })
    }
}

/// Drive phase: 0 for X, π/2 for Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn phase(self) -> f64 {
        match self {
            Axis::X => 0.0,
            Axis::Y => FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    Pi,
    PiHalf,
}

impl Rotation {
    pub fn radians(self) -> f64 {
        match self {
            Rotation::Pi => PI,
            Rotation::PiHalf => FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseMode {
    Ideal,
    /// Finite-width pulses at Rabi frequency `rabi` (rad/µs).
    Finite {
        rabi: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub target: String,
    /// Index of the target in the system the timeline was compiled for.
    pub site: usize,
    pub axis: Axis,
    pub angle: Rotation,
    /// µs
    pub start: f64,
    /// µs; zero in ideal mode.
    pub duration: f64,
    /// Drive frequency (rad/µs), finite mode only.
    pub carrier: Option<f64>,
    /// Rabi frequency (rad/µs), finite mode only.
    pub rabi: Option<f64>,
    /// Pulses sharing a group id are played simultaneously.
    pub group: usize,
}

impl Pulse {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Echo half-lengths of a protocol, µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolTimings {
    Hybrid { tau1: f64, tau2: f64 },
    Direct { tau3: f64 },
}

impl ProtocolTimings {
    pub fn protocol(&self) -> Protocol {
        match self {
            ProtocolTimings::Hybrid { .. } => Protocol::Hybrid,
            ProtocolTimings::Direct { .. } => Protocol::Direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTimeline {
    pub pulses: Vec<Pulse>,
    pub windows: Vec<Window>,
    pub total_duration: f64,
    pub protocol: Protocol,
    pub mode: PulseMode,
    pub timings: ProtocolTimings,
    /// Label-pair evolution half-length, µs.
    pub t: f64,
    /// The label-pair window, where quasi-static NV/DB phases are injected.
    pub central: Window,
    /// Index of the first pulse inside the central window.
    pub central_first_pulse: usize,
}

/// `(π/2) / |A|` for the links a protocol relies on, giving π/2 accumulated
/// conditional phase per echo.
pub fn auto_timings(sys: &SpinSystem, protocol: Protocol) -> Result<ProtocolTimings, SequenceError> {
    let roles = sys.roles()?;
    let quarter = |i: usize, j: usize| -> Result<f64, SequenceError> {
        let a = sys.coupling(i, j).abs();
        if a < 1e-9 {
            return Err(SequenceError::VanishingCoupling(format!("{}-{}", sys.sites()[i].name, sys.sites()[j].name)));
        }
        Ok(FRAC_PI_2 / a)
    };
    match protocol {
        Protocol::Hybrid => {
            let db = roles.db.ok_or(SequenceError::MissingRole(protocol, "DB"))?;
            Ok(ProtocolTimings::Hybrid { tau1: quarter(roles.nv, db)?, tau2: quarter(db, roles.l1)? })
        }
        Protocol::Direct => Ok(ProtocolTimings::Direct { tau3: quarter(roles.nv, roles.l1)? }),
    }
}

enum Block {
    Wait(f64),
    Group(Vec<(usize, Axis, Rotation)>),
    CentralStart,
    CentralEnd,
}

use Axis::{X, Y};
use Rotation::{Pi, PiHalf};

pub fn compile_hybrid(
    timings: &ProtocolTimings,
    t: f64,
    mode: PulseMode,
    sys: &SpinSystem,
) -> Result<PulseTimeline, SequenceError> {
    let (tau1, tau2) = match *timings {
        ProtocolTimings::Hybrid { tau1, tau2 } => (tau1, tau2),
        _ => return Err(SequenceError::TimingMismatch(Protocol::Hybrid)),
    };
    check_positive("tau1", tau1)?;
    check_positive("tau2", tau2)?;
    check_non_negative("t", t)?;
    let Roles { nv, db, l1, l2 } = sys.roles()?;
    let db = db.ok_or(SequenceError::MissingRole(Protocol::Hybrid, "DB"))?;

    use Block::*;
    let program = vec![
        Group(vec![(nv, X, PiHalf)]),
        Wait(tau1),
        Group(vec![(nv, X, Pi), (db, X, Pi)]),
        Wait(tau1),
        Group(vec![(nv, Y, PiHalf), (db, X, PiHalf)]),
        Wait(tau2),
        Group(vec![(db, X, Pi), (l1, X, Pi)]),
        Wait(tau2),
        Group(vec![(db, Y, PiHalf), (l1, Y, PiHalf)]),
        CentralStart,
        Wait(t / 2.0),
        Group(vec![(nv, X, Pi)]),
        Wait(t / 2.0),
        Group(vec![(l1, X, Pi), (l2, X, Pi)]),
        Wait(t / 2.0),
        Group(vec![(nv, X, Pi)]),
        Wait(t / 2.0),
        CentralEnd,
        Group(vec![(db, X, PiHalf), (l1, Y, PiHalf)]),
        Wait(tau2),
        Group(vec![(db, X, Pi), (l1, X, Pi)]),
        Wait(tau2),
        Group(vec![(nv, X, PiHalf), (db, Y, PiHalf)]),
        Wait(tau1),
        Group(vec![(nv, X, Pi), (db, X, Pi)]),
        Wait(tau1),
        Group(vec![(nv, Y, PiHalf)]),
    ];
    lay_out(program, Protocol::Hybrid, *timings, t, mode, sys)
}

pub fn compile_direct(
    timings: &ProtocolTimings,
    t: f64,
    mode: PulseMode,
    sys: &SpinSystem,
) -> Result<PulseTimeline, SequenceError> {
    let tau3 = match *timings {
        ProtocolTimings::Direct { tau3 } => tau3,
        _ => return Err(SequenceError::TimingMismatch(Protocol::Direct)),
    };
    check_positive("tau3", tau3)?;
    check_non_negative("t", t)?;
    let Roles { nv, l1, l2, .. } = sys.roles()?;

    use Block::*;
    let program = vec![
        Group(vec![(nv, X, PiHalf)]),
        Wait(tau3),
        Group(vec![(nv, X, Pi), (l1, X, Pi)]),
        Wait(tau3),
        Group(vec![(nv, Y, PiHalf), (l1, X, PiHalf)]),
        CentralStart,
        Wait(t),
        Group(vec![(l1, X, Pi), (l2, X, Pi)]),
        Wait(t),
        CentralEnd,
        Group(vec![(nv, X, PiHalf), (l1, X, PiHalf)]),
        Wait(tau3),
        Group(vec![(nv, X, Pi), (l1, X, Pi)]),
        Wait(tau3),
        Group(vec![(nv, Y, PiHalf)]),
    ];
    lay_out(program, Protocol::Direct, *timings, t, mode, sys)
}

/// Dispatch on the protocol encoded in `timings`.
pub fn compile(
    timings: &ProtocolTimings,
    t: f64,
    mode: PulseMode,
    sys: &SpinSystem,
) -> Result<PulseTimeline, SequenceError> {
    match timings.protocol() {
        Protocol::Hybrid => compile_hybrid(timings, t, mode, sys),
        Protocol::Direct => compile_direct(timings, t, mode, sys),
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<(), SequenceError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SequenceError::NonPositiveTime { name, value: v })
    }
}

fn check_non_negative(name: &'static str, v: f64) -> Result<(), SequenceError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(SequenceError::NegativeTime { name, value: v })
    }
}

fn lay_out(
    program: Vec<Block>,
    protocol: Protocol,
    timings: ProtocolTimings,
    t: f64,
    mode: PulseMode,
    sys: &SpinSystem,
) -> Result<PulseTimeline, SequenceError> {
    let rabi = match mode {
        PulseMode::Ideal => None,
        PulseMode::Finite { rabi } if rabi.is_finite() && rabi > 0.0 => Some(rabi),
        PulseMode::Finite { rabi } => return Err(SequenceError::InvalidRabi(rabi)),
    };
    let group_duration = |members: &[(usize, Axis, Rotation)]| -> f64 {
        match rabi {
            None => 0.0,
            Some(w) => members.iter().map(|m| m.2.radians() / w).fold(0.0, f64::max),
        }
    };

    // Duration of the pulse group just before / after each block.
    let durations: Vec<Option<f64>> = program
        .iter()
        .map(|b| match b {
            Block::Group(m) => Some(group_duration(m)),
            _ => None,
        })
        .collect();
    let neighbour = |from: usize, step: isize| -> f64 {
        let mut i = from as isize + step;
        while i >= 0 && (i as usize) < program.len() {
            match &program[i as usize] {
                Block::Group(_) => return durations[i as usize].unwrap_or(0.0),
                Block::Wait(_) => return 0.0,
                _ => i += step,
            }
        }
        0.0
    };

    let mut clock = 0.0;
    let mut pulses = Vec::new();
    let mut windows = Vec::new();
    let mut central = Window { start: 0.0, end: 0.0 };
    let mut central_first_pulse = 0;
    let mut group_id = 0;
    for (i, block) in program.iter().enumerate() {
        match block {
            Block::Wait(nominal) => {
                let trimmed = (nominal - 0.5 * neighbour(i, -1) - 0.5 * neighbour(i, 1)).max(0.0);
                if trimmed > 0.0 {
                    windows.push(Window { start: clock, end: clock + trimmed });
                }
                clock += trimmed;
            }
            Block::Group(members) => {
                let duration = durations[i].unwrap_or(0.0);
                for &(site, axis, angle) in members {
                    pulses.push(Pulse {
                        target: sys.sites()[site].name.clone(),
                        site,
                        axis,
                        angle,
                        start: clock,
                        duration,
                        carrier: rabi.map(|_| sys.sites()[site].larmor),
                        rabi,
                        group: group_id,
                    });
                }
                group_id += 1;
                clock += duration;
            }
            Block::CentralStart => {
                central.start = clock;
                central_first_pulse = pulses.len();
            }
            Block::CentralEnd => central.end = clock,
        }
    }

    Ok(PulseTimeline {
        pulses,
        windows,
        total_duration: clock,
        protocol,
        mode,
        timings,
        t,
        central,
        central_first_pulse,
    })
}

impl PulseTimeline {
    /// Total free-evolution time, µs.
    pub fn free_evolution_time(&self) -> f64 {
        self.windows.iter().map(Window::duration).sum()
    }

    /// Time spent inside pulses (counting simultaneous groups once), µs.
    pub fn pulse_overhead(&self) -> f64 {
        let mut seen = std::collections::HashSet::new();
        self.pulses.iter().filter(|p| seen.insert(p.group)).map(|p| p.duration).sum()
    }

    /// Pulse groups in play order as ranges into `pulses`.
    pub fn groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut out: Vec<std::ops::Range<usize>> = Vec::new();
        for (i, p) in self.pulses.iter().enumerate() {
            match out.last_mut() {
                Some(r) if self.pulses[r.start].group == p.group => r.end = i + 1,
                _ => out.push(i..i + 1),
            }
        }
        out
    }

    /// One comma-separated record per pulse: target, axis, angle, start (µs),
    /// duration (µs), carrier (MHz), group.
    pub fn schedule_text(&self) -> String {
        let mut s = String::from("target,axis,angle,start_us,duration_us,carrier_mhz,group\n");
        for p in &self.pulses {
            let carrier = p.carrier.map(|c| format!("{:.6}", angular_to_mhz(c))).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{:.9},{:.9},{},{}",
                p.target,
                match p.axis {
                    X => "x",
                    Y => "y",
                },
                match p.angle {
                    Pi => "pi",
                    PiHalf => "pi/2",
                },
                p.start,
                p.duration,
                carrier,
                p.group
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Unordered { index: usize },
    NegativeDuration { index: usize },
    Overlap { target: String, first: usize, second: usize },
    Simultaneity { group: usize },
    TotalDuration { expected: f64, found: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unordered { index } => write!(f, "pulse {index} starts before its predecessor"),
            Violation::NegativeDuration { index } => write!(f, "pulse {index} has a negative duration"),
            Violation::Overlap { target, first, second } => {
                write!(f, "pulses {first} and {second} overlap on `{target}`")
            }
            Violation::Simultaneity { group } => {
                write!(f, "group {group} members differ in start or duration")
            }
            Violation::TotalDuration { expected, found } => {
                write!(f, "total duration {found} µs, last pulse ends at {expected} µs")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_timeline(tl: &PulseTimeline) -> ValidationReport {
    const EPS: f64 = 1e-12;
    let mut violations = Vec::new();
    for (i, p) in tl.pulses.iter().enumerate() {
        if p.duration < 0.0 {
            violations.push(Violation::NegativeDuration { index: i });
        }
        if i > 0 && p.start + EPS < tl.pulses[i - 1].start {
            violations.push(Violation::Unordered { index: i });
        }
    }
    for i in 0..tl.pulses.len() {
        for j in (i + 1)..tl.pulses.len() {
            let (a, b) = (&tl.pulses[i], &tl.pulses[j]);
            if a.site != b.site {
                continue;
            }
            let overlap = if a.duration == 0.0 && b.duration == 0.0 {
                // Instantaneous pulses may share an instant only in sequence.
                false
            } else {
                a.start < b.end() - EPS && b.start < a.end() - EPS
            };
            if overlap {
                violations.push(Violation::Overlap { target: a.target.clone(), first: i, second: j });
            }
        }
    }
    let mut groups: Vec<usize> = tl.pulses.iter().map(|p| p.group).collect();
    groups.dedup();
    for g in groups {
        let members: Vec<&Pulse> = tl.pulses.iter().filter(|p| p.group == g).collect();
        let first = members[0];
        if members.iter().any(|p| (p.start - first.start).abs() > EPS || (p.duration - first.duration).abs() > EPS) {
            violations.push(Violation::Simultaneity { group: g });
        }
    }
    let last_end = tl.pulses.iter().map(Pulse::end).fold(0.0, f64::max);
    if (last_end - tl.total_duration).abs() > 1e-9 {
        violations.push(Violation::TotalDuration { expected: last_end, found: tl.total_duration });
    }
    ValidationReport { violations }
}
