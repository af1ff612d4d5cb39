//! Parameter sweeps and SNR-versus-shots curves.

use std::path::Path;

use rayon::prelude::*;

use crate::analysis::{mle_fit, peak_ratio, snr_with_scale, spectrum, SpectrumScale};
use crate::sequence::Protocol;
use crate::shots::{sample_trace, Shots, SignalTrace};
use crate::table::csv;
use crate::Error;

use super::run::{clean_trace, fit_options, sampled, write_files};
use super::{ConfigError, ExperimentConfig, SweepOutput};

/// Numeric table with a one-line header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let h: Vec<&str> = self.header.iter().map(String::as_str).collect();
        csv(&h, self.rows.iter().cloned())
    }

    /// Median of every other column over rows sharing the key in column 0;
    /// the column at `drop` (a seed index) is omitted.
    pub fn medians(&self, drop: usize) -> Table {
        let mut keys: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !keys.contains(&r[0]) {
                keys.push(r[0]);
            }
        }
        let header = self.header.iter().enumerate().filter(|(j, _)| *j != drop).map(|(_, h)| h.clone()).collect();
        let rows = keys
            .into_iter()
            .map(|k| {
                let group: Vec<&Vec<f64>> = self.rows.iter().filter(|r| r[0] == k).collect();
                (0..self.header.len())
                    .filter(|&j| j != drop)
                    .map(|j| if j == 0 { k } else { median(group.iter().map(|r| r[j]).collect()) })
                    .collect()
            })
            .collect();
        Table { header, rows }
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<(), Error> {
        write_files(dir, &[(name, self.to_csv())])
    }
}

pub(crate) fn median(mut v: Vec<f64>) -> f64 {
    v.retain(|x| !x.is_nan());
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn amplitude(t: &SignalTrace) -> f64 {
    let max = t.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = t.values.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// One row per (swept value, seed). Columns depend on the requested outputs:
/// `fit` adds `g_est_MHz,sigma_g_MHz` for the configured protocol, `snr`
/// adds `snr_hybrid,snr_direct,snr_ratio`. `peak_ratio` (hybrid over direct
/// maximum of the Fourier magnitude, with the power ratio alongside) and
/// `contrast` are properties of the noiseless traces.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Table, Error> {
    cfg.validate()?;
    let spec = cfg.sweep.clone().ok_or_else(|| {
        Error::Config(ConfigError::Invalid { path: "sweep".into(), reason: "no [sweep] section".into() })
    })?;
    let outputs = &spec.outputs;
    let wants = |o: SweepOutput| outputs.contains(&o);
    let mut header = vec![spec.parameter.clone(), "seed".into()];
    if wants(SweepOutput::Fit) {
        header.extend(["g_est_MHz".into(), "sigma_g_MHz".into()]);
    }
    if wants(SweepOutput::Snr) {
        header.extend(["snr_hybrid".into(), "snr_direct".into(), "snr_ratio".into()]);
    }
    if wants(SweepOutput::PeakRatio) {
        header.extend(["peak_ratio".into(), "peak_ratio_power".into()]);
    }
    if wants(SweepOutput::Contrast) {
        header.push("contrast".into());
    }

    let per_value: Vec<Result<Vec<Vec<f64>>, Error>> = spec
        .values
        .par_iter()
        .map(|&value| {
            let c = cfg.with_parameter(&spec.parameter, value)?;
            let primary = c.sequence.protocol;
            let need_both = wants(SweepOutput::Snr) || wants(SweepOutput::PeakRatio);
            let main = clean_trace(&c, primary)?;
            let other = if need_both {
                let second = match primary {
                    Protocol::Hybrid => Protocol::Direct,
                    Protocol::Direct => Protocol::Hybrid,
                };
                Some(clean_trace(&c, second)?)
            } else {
                None
            };
            let (hyb, dir) = match (&other, primary) {
                (Some(o), Protocol::Hybrid) => (Some(&main.clean), Some(&o.clean)),
                (Some(o), Protocol::Direct) => (Some(&o.clean), Some(&main.clean)),
                _ => (None, None),
            };
            let pad = c.analysis.zero_pad;
            let ratio = match (hyb, dir) {
                (Some(h), Some(d)) if wants(SweepOutput::PeakRatio) => {
                    let r = |scale| -> Result<f64, Error> {
                        Ok(peak_ratio(&spectrum(h, pad, scale)?, &spectrum(d, pad, scale)?)?)
                    };
                    Some([r(SpectrumScale::Magnitude)?, r(SpectrumScale::Power)?])
                }
                _ => None,
            };
            let seeds = match c.sampling.shots.0 {
                Shots::Infinite => vec![c.sampling.seed],
                Shots::Finite(_) => c.sampling.seeds(),
            };
            let opts = fit_options(&c);
            let records = sampled(&c, &main.clean, &seeds)?;
            let mut rows = Vec::new();
            for (i, &seed) in seeds.iter().enumerate() {
                let mut row = vec![value, seed as f64];
                if wants(SweepOutput::Fit) {
                    let f = mle_fit(&records[i], None, &opts)?;
                    row.extend([f.g(), f.sigma_g()]);
                }
                if wants(SweepOutput::Snr) {
                    let (h, d) = (hyb.expect("both traces"), dir.expect("both traces"));
                    let (sh, sd) = match c.sampling.shots.0 {
                        Shots::Infinite => (f64::INFINITY, f64::INFINITY),
                        Shots::Finite(n) => (
                            snr_with_scale(h, &sample_trace(h, n, seed)?, pad, SpectrumScale::Power)?,
                            snr_with_scale(d, &sample_trace(d, n, seed)?, pad, SpectrumScale::Power)?,
                        ),
                    };
                    row.extend([sh, sd, sh / sd]);
                }
                if let Some(r) = ratio {
                    row.extend(r);
                }
                if wants(SweepOutput::Contrast) {
                    row.push(amplitude(&main.clean));
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_value {
        rows.extend(r?);
    }
    Ok(Table { header, rows })
}

/// SNR of both protocols for every shot count and seed, with their ratio.
/// The `*_mag` columns repeat the computation on magnitude spectra.
pub fn snr_curve(cfg: &ExperimentConfig, n_values: &[u64], seeds: &[u64]) -> Result<Table, Error> {
    cfg.validate()?;
    if n_values.is_empty() || seeds.is_empty() || n_values.contains(&0) {
        return Err(Error::Config(ConfigError::Invalid {
            path: "snr-curve".into(),
            reason: "need at least one positive shot count and one seed".into(),
        }));
    }
    let h = clean_trace(cfg, Protocol::Hybrid)?.clean;
    let d = clean_trace(cfg, Protocol::Direct)?.clean;
    let pad = cfg.analysis.zero_pad;
    let header =
        ["n_shots", "seed", "snr_hybrid", "snr_direct", "ratio", "snr_hybrid_mag", "snr_direct_mag", "ratio_mag"];
    let pairs: Vec<(u64, u64)> = n_values.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(n, seed)| {
            let hs = sample_trace(&h, n, seed)?;
            let ds = sample_trace(&d, n, seed)?;
            let mut row = vec![n as f64, seed as f64];
            for scale in [SpectrumScale::Power, SpectrumScale::Magnitude] {
                let a = snr_with_scale(&h, &hs, pad, scale)?;
                let b = snr_with_scale(&d, &ds, pad, scale)?;
                row.extend([a, b, a / b]);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Table { header: header.iter().map(|s| s.to_string()).collect(), rows })
}
