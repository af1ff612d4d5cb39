//! Single runs and configuration checks.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{mle_fit, power_spectrum, MleFit, MleOptions, Spectrum};
use crate::dynamics::{p0_trace, EvolveOptions, TraceRequest};
use crate::sequence::{auto_timings, compile, validate_timeline, Protocol, ProtocolTimings};
use crate::shots::{sample_trace, Shots, SignalTrace, RNG_ALGORITHM};
use crate::spinsys::{CouplingRow, CouplingSource, SpinSystem};
use crate::table::{csv, sig9};
use crate::Error;

use super::ExperimentConfig;

/// Noiseless trace of one protocol together with what produced it.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub protocol: Protocol,
    /// The simulated register (the DB is dropped for the direct protocol).
    pub system: SpinSystem,
    pub timings: ProtocolTimings,
    /// Sequence length at the largest `t`, µs.
    pub total_duration: f64,
    pub pulse_overhead: f64,
    pub clean: SignalTrace,
}

pub fn clean_trace(cfg: &ExperimentConfig, protocol: Protocol) -> Result<ProtocolRun, Error> {
    let full = cfg.build_system()?;
    let sys = match protocol {
        Protocol::Hybrid => full,
        Protocol::Direct => full.without_db(),
    };
    let noise = cfg.noise_params(&sys);
    let timings = match cfg.explicit_timings(protocol) {
        Some(t) => t,
        None => auto_timings(&sys, protocol)?,
    };
    let grid = cfg.sequence.t_grid.values();
    let mode = cfg.pulse_mode();
    let longest = compile(&timings, *grid.last().unwrap_or(&0.0), mode, &sys)?;
    let values = p0_trace(&TraceRequest {
        sys: &sys,
        noise: &noise,
        timings,
        mode,
        t_grid: &grid,
        opts: EvolveOptions::default(),
    })?;
    Ok(ProtocolRun {
        protocol,
        system: sys,
        timings,
        total_duration: longest.total_duration,
        pulse_overhead: longest.pulse_overhead(),
        clean: SignalTrace::noiseless(grid, values)?,
    })
}

pub(crate) fn fit_options(cfg: &ExperimentConfig) -> MleOptions {
    MleOptions { starts: cfg.analysis.fit.starts, zero_pad: cfg.analysis.zero_pad, ..MleOptions::default() }
}

/// Sampled records, one per seed, or the clean trace alone when shots are
/// infinite.
pub(crate) fn sampled(cfg: &ExperimentConfig, clean: &SignalTrace, seeds: &[u64]) -> Result<Vec<SignalTrace>, Error> {
    match cfg.sampling.shots.0 {
        Shots::Infinite => Ok(vec![clean.clone()]),
        Shots::Finite(n) => seeds.iter().map(|&s| Ok(sample_trace(clean, n, s)?)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub seed: u64,
    pub fit: MleFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub crate_version: String,
    pub config_sha256: String,
    pub rng: String,
    pub seeds: Vec<u64>,
    pub protocol: Protocol,
    pub mode: String,
    pub timings_us: std::collections::BTreeMap<String, f64>,
    pub total_duration_us: f64,
    pub pulse_overhead_us: f64,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: ExperimentConfig,
    pub clean: SignalTrace,
    /// One record per seed (the clean trace when shots are infinite).
    pub signals: Vec<SignalTrace>,
    /// Spectrum of the first record.
    pub spectrum: Spectrum,
    pub fits: Vec<FitRecord>,
    pub metadata: Metadata,
}

pub(crate) fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunArtifacts, Error> {
    cfg.validate()?;
    let pr = clean_trace(cfg, cfg.sequence.protocol)?;
    let seeds = cfg.sampling.seeds();
    let signals = sampled(cfg, &pr.clean, &seeds)?;
    let opts = fit_options(cfg);
    let fits = signals
        .iter()
        .zip(&seeds)
        .map(|(s, &seed)| Ok(FitRecord { seed, fit: mle_fit(s, None, &opts)? }))
        .collect::<Result<Vec<_>, Error>>()?;
    let spectrum = power_spectrum(&signals[0], cfg.analysis.zero_pad)?;
    let timings_us = match pr.timings {
        ProtocolTimings::Hybrid { tau1, tau2 } => [("tau1".into(), tau1), ("tau2".into(), tau2)].into(),
        ProtocolTimings::Direct { tau3 } => [("tau3".into(), tau3)].into(),
    };
    let metadata = Metadata {
        crate_version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: config_hash(cfg),
        rng: RNG_ALGORITHM.into(),
        seeds: if signals[0].is_noiseless() { Vec::new() } else { seeds },
        protocol: pr.protocol,
        mode: format!("{:?}", cfg.sequence.mode).to_lowercase(),
        timings_us,
        total_duration_us: pr.total_duration,
        pulse_overhead_us: pr.pulse_overhead,
    };
    Ok(RunArtifacts { config: cfg.clone(), clean: pr.clean, signals, spectrum, fits, metadata })
}

impl RunArtifacts {
    /// One row per seed: parameters, uncertainties, log-likelihood and
    /// optimizer diagnostics.
    pub fn fits_table(&self) -> String {
        let header = [
            "seed",
            "p1",
            "p2",
            "p3_MHz",
            "p4",
            "sigma_p1",
            "sigma_p2",
            "sigma_p3_MHz",
            "sigma_p4",
            "g_est_MHz",
            "loglik",
            "starts",
            "converged_starts",
            "iterations",
            "gradient_norm",
        ];
        csv(
            &header,
            self.fits.iter().map(|r| {
                let f = &r.fit;
                let d = &f.diagnostics;
                vec![
                    r.seed as f64,
                    f.p1,
                    f.p2,
                    f.p3,
                    f.p4,
                    f.sigmas[0],
                    f.sigmas[1],
                    f.sigmas[2],
                    f.sigmas[3],
                    f.g(),
                    f.loglik,
                    d.starts as f64,
                    d.converged_starts as f64,
                    d.iterations as f64,
                    d.gradient_norm,
                ]
            }),
        )
    }

    pub fn metadata_toml(&self) -> String {
        toml::to_string(&self.metadata).expect("metadata serialises")
    }

    /// Write `signal.csv`, `clean.csv`, `spectrum.csv`, `fits.csv`,
    /// `metadata.toml` and the resolved `config.toml` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), Error> {
        let files = [
            ("signal.csv", self.signals[0].to_table()),
            ("clean.csv", self.clean.to_table()),
            ("spectrum.csv", self.spectrum.to_table()),
            ("fits.csv", self.fits_table()),
            ("metadata.toml", self.metadata_toml()),
            ("config.toml", self.config.to_toml()),
        ];
        write_files(dir, &files)
    }
}

pub(crate) fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

pub fn couplings(cfg: &ExperimentConfig) -> Result<Vec<CouplingRow>, Error> {
    Ok(cfg.build_system()?.coupling_rows())
}

/// Printable table of all pairwise couplings. Pairs within a degree of the
/// magic angle are flagged and logged.
pub fn couplings_table(rows: &[CouplingRow]) -> String {
    let mut s = String::from("a,b,distance_nm,angle_deg,coupling_MHz,source,near_magic_angle\n");
    for r in rows {
        if r.near_magic_angle {
            log::warn!("{}-{} lies near the magic angle; its coupling nearly vanishes", r.a, r.b);
        }
        let opt = |v: Option<f64>| v.map(sig9).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.a,
            r.b,
            opt(r.distance_nm),
            opt(r.angle_deg),
            sig9(r.coupling_mhz),
            match r.source {
                CouplingSource::Geometry => "geometry",
                CouplingSource::Override => "override",
            },
            r.near_magic_angle
        );
    }
    s
}

/// Check a configuration without simulating: schema, system, timings and the
/// compiled timeline at the longest `t`. Returns a short report.
pub fn validate(cfg: &ExperimentConfig) -> Result<String, Error> {
    cfg.validate()?;
    let full = cfg.build_system()?;
    let protocol = cfg.sequence.protocol;
    let sys = match protocol {
        Protocol::Hybrid => full,
        Protocol::Direct => full.without_db(),
    };
    cfg.noise_params(&sys).validate(&sys)?;
    let timings = match cfg.explicit_timings(protocol) {
        Some(t) => t,
        None => auto_timings(&sys, protocol)?,
    };
    let t_max = cfg.sequence.t_grid.values().last().copied().unwrap_or(0.0);
    let tl = compile(&timings, t_max, cfg.pulse_mode(), &sys)?;
    let report = validate_timeline(&tl);
    if !report.is_valid() {
        let reasons: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Config(super::ConfigError::Invalid { path: "sequence".into(), reason: reasons.join("; ") }));
    }
    Ok(format!(
        "ok: {protocol} protocol, {} pulses, {} µs at t = {t_max} µs (pulse overhead {} µs)\n",
        tl.pulses.len(),
        sig9(tl.total_duration),
        sig9(tl.pulse_overhead())
    ))
}
