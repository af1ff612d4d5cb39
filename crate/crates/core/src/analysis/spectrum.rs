//! One-sided spectra of mean-subtracted, zero-padded traces.

use rustfft::num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::shots::SignalTrace;

use super::AnalysisError;

pub const DEFAULT_ZERO_PAD: usize = 8;

/// Bin values are `|X_k|²/n` (power) or `|X_k|/√n` (magnitude).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumScale {
    Power,
    Magnitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// MHz, from 0 to the Nyquist frequency.
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Divisor applied to `|X|²`: the number of samples.
    pub rescale: f64,
    /// Length of the padded transform.
    pub padded_len: usize,
    pub scale: SpectrumScale,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }

    pub fn peak_index(&self) -> usize {
        self.power
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }

    pub fn peak_frequency(&self) -> f64 {
        self.freqs[self.peak_index()]
    }

    pub fn max_power(&self) -> f64 {
        self.power.iter().cloned().fold(0.0, f64::max)
    }

    /// Frequencies of the `k` strongest local maxima above DC, strongest first.
    pub fn top_peaks(&self, k: usize) -> Vec<f64> {
        let p = &self.power;
        let mut peaks: Vec<usize> =
            (1..p.len()).filter(|&i| p[i] >= p[i - 1] && p.get(i + 1).is_none_or(|&next| p[i] > next)).collect();
        peaks.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
        peaks.into_iter().take(k).map(|i| self.freqs[i]).collect()
    }

    /// Sum over the full two-sided power spectrum; equals `padded_len`
    /// times the sample variance for the power scale.
    pub fn two_sided_total(&self) -> f64 {
        let m = self.padded_len;
        let last = self.power.len() - 1;
        self.power
            .iter()
            .enumerate()
            .map(|(k, &v)| if k == 0 || (m.is_multiple_of(2) && k == last) { v } else { 2.0 * v })
            .sum()
    }

    /// `f_MHz,power` records.
    pub fn to_table(&self) -> String {
        crate::table::csv(&["f_MHz", "power"], self.freqs.iter().zip(&self.power).map(|(f, p)| vec![*f, *p]))
    }
}

fn uniform_step(times: &[f64]) -> Result<f64, AnalysisError> {
    if times.len() < 2 {
        return Err(AnalysisError::TooShort { needed: 2, got: times.len() });
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, w) in times.windows(2).enumerate() {
        if !(dt > 0.0) || ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(AnalysisError::NonUniformGrid { index: i + 1 });
        }
    }
    Ok(dt)
}

fn spectrum_of(
    times: &[f64],
    values: &[f64],
    zero_pad: usize,
    scale: SpectrumScale,
) -> Result<Spectrum, AnalysisError> {
    if zero_pad == 0 {
        return Err(AnalysisError::InvalidZeroPad);
    }
    let dt = uniform_step(times)?;
    let n = values.len();
    let m = n * zero_pad;
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<C64> = values.iter().map(|v| C64::new(v - mean, 0.0)).collect();
    buf.resize(m, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2;
    let power = buf[..=half]
        .iter()
        .map(|x| match scale {
            SpectrumScale::Power => x.norm_sqr() / n as f64,
            SpectrumScale::Magnitude => x.norm() / (n as f64).sqrt(),
        })
        .collect();
    let freqs = (0..=half).map(|k| k as f64 / (m as f64 * dt)).collect();
    Ok(Spectrum { freqs, power, rescale: n as f64, padded_len: m, scale })
}

/// Spectrum of `trace` in the requested scale.
pub fn spectrum(trace: &SignalTrace, zero_pad: usize, scale: SpectrumScale) -> Result<Spectrum, AnalysisError> {
    spectrum_of(&trace.times, &trace.values, zero_pad, scale)
}

/// Mean-subtracted, zero-padded periodogram `|X_k|²/n` on `[0, 1/(2Δt)]`.
pub fn power_spectrum(trace: &SignalTrace, zero_pad: usize) -> Result<Spectrum, AnalysisError> {
    spectrum_of(&trace.times, &trace.values, zero_pad, SpectrumScale::Power)
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}

/// Peak of the clean spectrum over the standard deviation of the spectral
/// difference, excluding the three bins around the clean peak. Identical
/// traces give `+∞`.
pub fn snr(clean: &SignalTrace, sampled: &SignalTrace, zero_pad: usize) -> Result<f64, AnalysisError> {
    snr_with_scale(clean, sampled, zero_pad, SpectrumScale::Power)
}

pub fn snr_with_scale(
    clean: &SignalTrace,
    sampled: &SignalTrace,
    zero_pad: usize,
    scale: SpectrumScale,
) -> Result<f64, AnalysisError> {
    if !same_grid(&clean.times, &sampled.times) {
        return Err(AnalysisError::GridMismatch);
    }
    let sc = spectrum_of(&clean.times, &clean.values, zero_pad, scale)?;
    let ss = spectrum_of(&sampled.times, &sampled.values, zero_pad, scale)?;
    let peak = sc.peak_index();
    let diff: Vec<f64> =
        (0..sc.power.len()).filter(|&k| k + 1 < peak || k > peak + 1).map(|k| ss.power[k] - sc.power[k]).collect();
    if diff.is_empty() {
        return Err(AnalysisError::TooShort { needed: 4, got: sc.power.len() });
    }
    let mean = diff.iter().sum::<f64>() / diff.len() as f64;
    let std = (diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diff.len() as f64).sqrt();
    if std == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(sc.power[peak] / std)
}

/// `max(a) / max(b)` for spectra on the same frequency grid and scale.
pub fn peak_ratio(a: &Spectrum, b: &Spectrum) -> Result<f64, AnalysisError> {
    if !same_grid(&a.freqs, &b.freqs) || a.scale != b.scale {
        return Err(AnalysisError::GridMismatch);
    }
    let denom = b.max_power();
    if denom == 0.0 {
        return Err(AnalysisError::ZeroDenominator);
    }
    Ok(a.max_power() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid() -> Vec<f64> {
        (0..121).map(|i| i as f64 * 0.025).collect()
    }

    fn trace(f: impl Fn(f64) -> f64) -> SignalTrace {
        let t = grid();
        let v = t.iter().map(|&x| f(x)).collect();
        SignalTrace::noiseless(t, v).unwrap()
    }

    #[test]
    fn peak_at_signal_frequency() {
        let s = power_spectrum(&trace(|t| 0.5 + 0.4 * (TAU * 1.734 * t).cos()), 8).unwrap();
        assert!((s.peak_frequency() - 1.734).abs() <= s.bin_width());
        assert!((s.freqs.last().unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(s.power.len(), 121 * 4 + 1);
    }

    #[test]
    fn constant_trace_has_empty_spectrum() {
        let s = power_spectrum(&trace(|_| 0.37), 8).unwrap();
        assert!(s.power.iter().all(|&p| p < 1e-28));
    }

    #[test]
    fn parseval() {
        for pad in [1, 3, 8] {
            let tr = trace(|t| 0.5 + 0.3 * (TAU * 2.1 * t).sin() * (-t).exp() + 0.05 * (17.0 * t).cos());
            let s = power_spectrum(&tr, pad).unwrap();
            let n = tr.len() as f64;
            let mean = tr.values.iter().sum::<f64>() / n;
            let var = tr.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let expect = s.padded_len as f64 * var;
            assert!((s.two_sided_total() - expect).abs() / expect < 1e-9);
        }
    }

    #[test]
    fn grid_errors() {
        let mut tr = trace(|t| t);
        tr.times[5] += 0.01;
        assert_eq!(power_spectrum(&tr, 8), Err(AnalysisError::NonUniformGrid { index: 5 }));
        let a = power_spectrum(&trace(|t| t), 8).unwrap();
        let b = power_spectrum(&trace(|t| t), 4).unwrap();
        assert_eq!(peak_ratio(&a, &b), Err(AnalysisError::GridMismatch));
        let z = power_spectrum(&trace(|_| 0.5), 8).unwrap();
        assert_eq!(peak_ratio(&a, &z), Err(AnalysisError::ZeroDenominator));
        assert_eq!(peak_ratio(&a, &a), Ok(1.0));
        let m = spectrum(&trace(|t| t), 8, SpectrumScale::Magnitude).unwrap();
        assert_eq!(peak_ratio(&a, &m), Err(AnalysisError::GridMismatch));
        assert!((peak_ratio(&m, &m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_traces_are_infinitely_clean() {
        let tr = trace(|t| 0.5 - 0.5 * (TAU * 1.7 * t).cos());
        assert_eq!(snr(&tr, &tr, 8), Ok(f64::INFINITY));
    }

    #[test]
    fn top_peaks_are_ordered() {
        let s =
            power_spectrum(&trace(|t| 0.5 + 0.4 * (TAU * 1.734 * t).cos() + 0.2 * (TAU * 6.0 * t).cos()), 8).unwrap();
        let p = s.top_peaks(2);
        assert!((p[0] - 1.734).abs() < s.bin_width() * 2.0);
        assert!((p[1] - 6.0).abs() < s.bin_width() * 2.0);
    }
}
