//! Maximum-likelihood fit of a damped cosine,
//! `y(t) = 1/2 + p1 e^{p2 t} cos(2π p3 t + p4)`, under Gaussian errors.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use serde::Serialize;

use crate::shots::SignalTrace;

use super::{power_spectrum, AnalysisError};

const NAMES: [&str; 4] = ["p1", "p2", "p3", "p4"];

#[derive(Debug, Clone, PartialEq)]
pub struct MleOptions {
    /// Number of spectral peaks used as frequency starts.
    pub starts: usize,
    /// Decay-rate starts (1/µs) tried at every frequency.
    pub decay_starts: Vec<f64>,
    /// Error bar assigned to every point of a noiseless trace.
    pub uniform_sigma: f64,
    pub zero_pad: usize,
    pub max_iters: u64,
    /// Simplex spread in −log L at which a local search stops.
    pub tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            starts: 3,
            decay_starts: vec![-0.2, -1.0],
            uniform_sigma: 1e-3,
            zero_pad: super::DEFAULT_ZERO_PAD,
            max_iters: 5000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub starts: usize,
    pub converged_starts: usize,
    pub iterations: u64,
    /// Norm of the numerical log-likelihood gradient at the optimum.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleFit {
    pub p1: f64,
    /// 1/µs
    pub p2: f64,
    /// MHz
    pub p3: f64,
    /// rad
    pub p4: f64,
    pub sigmas: [f64; 4],
    pub loglik: f64,
    pub diagnostics: FitDiagnostics,
}

impl MleFit {
    pub fn params(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }

    /// Estimated coupling `|p3|`, MHz.
    pub fn g(&self) -> f64 {
        self.p3.abs()
    }

    pub fn sigma_g(&self) -> f64 {
        self.sigmas[2]
    }
}

pub fn model(p: &[f64; 4], t: f64) -> f64 {
    0.5 + p[0] * (p[1] * t).exp() * (TAU * p[2] * t + p[3]).cos()
}

struct NegLogLik<'a> {
    t: &'a [f64],
    y: &'a [f64],
    inv_var: Vec<f64>,
}

impl NegLogLik<'_> {
    fn eval(&self, p: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for ((&t, &y), &w) in self.t.iter().zip(self.y).zip(&self.inv_var) {
            let r = y - model(p, t);
            s += 0.5 * r * r * w;
        }
        s
    }
}

impl CostFunction for NegLogLik<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        let v = self.eval(&[p[0], p[1], p[2], p[3]]);
        Ok(if v.is_finite() { v } else { f64::MAX })
    }
}

fn sigmas_of(trace: &SignalTrace, opts: &MleOptions) -> Result<Vec<f64>, AnalysisError> {
    if trace.is_noiseless() {
        return Ok(vec![opts.uniform_sigma; trace.len()]);
    }
    trace
        .stderr
        .iter()
        .enumerate()
        .map(
            |(i, &s)| if s > 0.0 && s.is_finite() { Ok(s) } else { Err(AnalysisError::NonPositiveStderr { index: i }) },
        )
        .collect()
}

fn objective<'a>(trace: &'a SignalTrace, sig: &[f64]) -> NegLogLik<'a> {
    NegLogLik { t: &trace.times, y: &trace.values, inv_var: sig.iter().map(|s| 1.0 / (s * s)).collect() }
}

fn normalise(mut p: [f64; 4]) -> [f64; 4] {
    if p[2] < 0.0 {
        p[2] = -p[2];
        p[3] = -p[3];
    }
    p[3] = (p[3] + PI).rem_euclid(TAU) - PI;
    if p[3] > FRAC_PI_2 {
        p[3] -= PI;
        p[0] = -p[0];
    } else if p[3] <= -FRAC_PI_2 {
        p[3] += PI;
        p[0] = -p[0];
    }
    p
}

/// Amplitude and phase minimising the weighted squared residual for a fixed
/// decay rate and frequency.
fn linear_start(f: &NegLogLik<'_>, p2: f64, p3: f64) -> [f64; 4] {
    let (mut saa, mut sab, mut sbb, mut sya, mut syb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&t, &y), &w) in f.t.iter().zip(f.y).zip(&f.inv_var) {
        let env = (p2 * t).exp();
        let (a, b) = (env * (TAU * p3 * t).cos(), -env * (TAU * p3 * t).sin());
        let r = y - 0.5;
        saa += w * a * a;
        sab += w * a * b;
        sbb += w * b * b;
        sya += w * r * a;
        syb += w * r * b;
    }
    let det = saa * sbb - sab * sab;
    let (u, v) =
        if det.abs() > 1e-300 { ((sya * sbb - syb * sab) / det, (syb * saa - sya * sab) / det) } else { (0.0, 0.0) };
    // u cos + v (−sin) = p1 cos(x + p4) with u = p1 cos p4, v = p1 sin p4
    [u.hypot(v), p2, p3, v.atan2(u)]
}

struct LocalResult {
    p: [f64; 4],
    cost: f64,
    iterations: u64,
    converged: bool,
}

fn local_search(f: &NegLogLik<'_>, start: [f64; 4], opts: &MleOptions) -> LocalResult {
    let steps = [0.1 * start[0].abs() + 0.01, 0.2, 0.05, 0.2];
    let mut best = start;
    let mut best_cost = f.eval(&start);
    let mut iterations = 0;
    let mut converged = false;
    // restart from the optimum until a full restart no longer improves it
    for round in 0..6 {
        let scale = if round == 0 { 1.0 } else { 0.1 };
        let mut simplex = vec![best.to_vec()];
        for j in 0..4 {
            let mut v = best.to_vec();
            v[j] += steps[j] * scale;
            simplex.push(v);
        }
        let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(opts.tolerance) else {
            break;
        };
        let problem = NegLogLik { t: f.t, y: f.y, inv_var: f.inv_var.clone() };
        let Ok(res) = Executor::new(problem, solver).configure(|s| s.max_iters(opts.max_iters)).run() else {
            break;
        };
        let state = res.state();
        iterations += state.get_iter();
        converged =
            matches!(state.get_termination_status(), TerminationStatus::Terminated(TerminationReason::SolverConverged));
        let Some(p) = state.get_best_param() else { break };
        let cost = state.get_best_cost();
        let improvement = best_cost - cost;
        if cost < best_cost {
            best = [p[0], p[1], p[2], p[3]];
            best_cost = cost;
        }
        if round > 0 && improvement < opts.tolerance {
            break;
        }
    }
    LocalResult { p: best, cost: best_cost, iterations, converged }
}

/// Multi-start maximum-likelihood fit. Frequency starts are the strongest
/// spectral peaks; amplitude and phase starts come from linear least squares.
pub fn mle_fit(trace: &SignalTrace, init: Option<[f64; 4]>, opts: &MleOptions) -> Result<MleFit, AnalysisError> {
    if trace.len() < 5 {
        return Err(AnalysisError::TooShort { needed: 5, got: trace.len() });
    }
    let sig = sigmas_of(trace, opts)?;
    let f = objective(trace, &sig);

    let mut starts: Vec<[f64; 4]> = init.into_iter().collect();
    let spectrum = power_spectrum(trace, opts.zero_pad)?;
    let mut freqs = spectrum.top_peaks(opts.starts);
    if freqs.is_empty() {
        freqs.push(spectrum.bin_width());
    }
    for &f0 in &freqs {
        for &d in &opts.decay_starts {
            starts.push(linear_start(&f, d, f0));
        }
    }

    let mut best: Option<LocalResult> = None;
    let mut converged_starts = 0;
    let mut iterations = 0;
    for s in &starts {
        let r = local_search(&f, *s, opts);
        iterations += r.iterations;
        if r.converged {
            converged_starts += 1;
        }
        if r.cost.is_finite() && best.as_ref().is_none_or(|b| r.cost < b.cost) {
            best = Some(r);
        }
    }
    let best = match best {
        Some(b) if converged_starts > 0 => b,
        b => {
            return Err(AnalysisError::NoConvergence {
                starts: starts.len(),
                best: b.map_or(f64::INFINITY, |b| b.cost),
            })
        }
    };
    let p = normalise(best.p);
    let norm_const: f64 = sig.iter().map(|s| (s * (TAU).sqrt()).ln()).sum();
    let mut fit = MleFit {
        p1: p[0],
        p2: p[1],
        p3: p[2],
        p4: p[3],
        sigmas: [f64::NAN; 4],
        loglik: -f.eval(&p) - norm_const,
        diagnostics: FitDiagnostics {
            starts: starts.len(),
            converged_starts,
            iterations,
            gradient_norm: gradient(&f, &p).iter().map(|g| g * g).sum::<f64>().sqrt(),
        },
    };
    fit.sigmas = fit_uncertainty(&fit, trace, opts)?;
    Ok(fit)
}

fn step(p: f64) -> f64 {
    1e-4 * p.abs().max(1e-2)
}

fn gradient(f: &NegLogLik<'_>, p: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|j| {
        let h = step(p[j]);
        let (mut a, mut b) = (*p, *p);
        a[j] += h;
        b[j] -= h;
        -(f.eval(&a) - f.eval(&b)) / (2.0 * h)
    })
}

/// `σ_j = (−∂²log L/∂p_j²)^{−1/2}` by central differences at the optimum.
pub fn fit_uncertainty(fit: &MleFit, trace: &SignalTrace, opts: &MleOptions) -> Result<[f64; 4], AnalysisError> {
    let sig = sigmas_of(trace, opts)?;
    let f = objective(trace, &sig);
    let p = fit.params();
    let centre = f.eval(&p);
    let mut out = [0.0; 4];
    for j in 0..4 {
        let h = step(p[j]);
        let (mut a, mut b) = (p, p);
        a[j] += h;
        b[j] -= h;
        let curvature = -(f.eval(&a) - 2.0 * centre + f.eval(&b)) / (h * h);
        if !(curvature < 0.0) {
            return Err(AnalysisError::Degenerate { param: NAMES[j], curvature });
        }
        out[j] = 1.0 / (-curvature).sqrt();
    }
    Ok(out)
}

/// `sqrt(diag(H⁻¹))` with `H` the full central-difference Hessian of
/// `−log L`: marginal uncertainties that account for parameter correlations.
pub fn marginal_uncertainty(fit: &MleFit, trace: &SignalTrace, opts: &MleOptions) -> Result<[f64; 4], AnalysisError> {
    let sig = sigmas_of(trace, opts)?;
    let f = objective(trace, &sig);
    let p = fit.params();
    let h: [f64; 4] = std::array::from_fn(|j| step(p[j]));
    let at = |di: [f64; 4]| f.eval(&std::array::from_fn(|k| p[k] + di[k]));
    let hess = nalgebra::Matrix4::from_fn(|i, j| {
        let mut e = [[0.0; 4]; 4];
        for (s, (a, b)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
            e[s][i] += a * h[i];
            e[s][j] += b * h[j];
        }
        (at(e[0]) - at(e[1]) - at(e[2]) + at(e[3])) / (4.0 * h[i] * h[j])
    });
    let inv = hess.try_inverse().ok_or(AnalysisError::Degenerate { param: "hessian", curvature: 0.0 })?;
    let mut out = [0.0; 4];
    for j in 0..4 {
        let v = inv[(j, j)];
        if !(v > 0.0) {
            return Err(AnalysisError::Degenerate { param: NAMES[j], curvature: v });
        }
        out[j] = v.sqrt();
    }
    Ok(out)
}
