//! Stand-ins for the four waveform features of the earlier detector (W1-W4).
//!
//! The original four are not specified anywhere we can recover, so these are
//! common seismological summaries chosen to play the same role: an amplitude
//! feature and three shape features. Frequencies are in cycles per sample so
//! the features do not depend on the sampling rate.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub const CODES: [&str; 4] = ["W1", "W2", "W3", "W4"];

pub const NAMES: [&str; 4] = [
    "trace_rms",
    "dominant_frequency",
    "spectral_centroid",
    "max_sta_lta",
];

pub const MIN_LEN: [usize; 4] = [2, 4, 4, 10];

/// Only W1 carries absolute amplitude; the rest are unchanged by a·x + b, a > 0.
pub const AFFINE_INVARIANT: [bool; 4] = [false, true, true, true];

pub const FUNCS: [fn(&[f64]) -> Option<f64>; 4] =
    [trace_rms, dominant_frequency, spectral_centroid, max_sta_lta];

pub fn trace_rms(x: &[f64]) -> Option<f64> {
    let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    Some(ms.sqrt())
}

// One-sided power spectrum of the demeaned series, bins 1..=n/2.
fn power_spectrum(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (1..=n / 2)
        .map(|k| (k as f64 / n as f64, buf[k].norm_sqr()))
        .collect()
}

/// Frequency of the largest periodogram bin (lowest bin wins ties).
pub fn dominant_frequency(x: &[f64]) -> Option<f64> {
    let spec = power_spectrum(x);
    let mut best = *spec.first()?;
    for &(f, p) in &spec[1..] {
        if p > best.1 {
            best = (f, p);
        }
    }
    (best.1 > 0.0).then_some(best.0)
}

/// Power-weighted mean frequency.
pub fn spectral_centroid(x: &[f64]) -> Option<f64> {
    let spec = power_spectrum(x);
    let total: f64 = spec.iter().map(|s| s.1).sum();
    if !(total > 0.0) {
        return None;
    }
    Some(spec.iter().map(|(f, p)| f * p).sum::<f64>() / total)
}

/// Largest short-term / long-term average energy ratio with trailing
/// windows of n/50 and n/5 samples (at least 1 and 5).
pub fn max_sta_lta(x: &[f64]) -> Option<f64> {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let e: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    let sta = (n / 50).max(1);
    let lta = (n / 5).max(5 * sta);
    if lta > n {
        return None;
    }
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + e[i];
    }
    let mut best = f64::NEG_INFINITY;
    for end in lta..=n {
        let s = (prefix[end] - prefix[end - sta]) / sta as f64;
        let l = (prefix[end] - prefix[end - lta]) / lta as f64;
        if l > 0.0 {
            best = best.max(s / l);
        }
    }
    best.is_finite().then_some(best)
}
