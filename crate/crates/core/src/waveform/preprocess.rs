use serde::{Deserialize, Serialize};

use super::filter::{butter_bandpass, butter_lowpass, filtfilt};
use super::{WaveformError, WaveformRecord};

/// Preprocessing parameters. Defaults: 4th-order 5-25 Hz band-pass and
/// decimation by 2 (200 Hz to 100 Hz for the reference network).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub filter_order: usize,
    pub downsample_factor: usize,
    /// Samples kept (center crop) after decimation. `None` keeps everything.
    pub window_len: Option<usize>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            band_low_hz: 5.0,
            band_high_hz: 25.0,
            filter_order: 4,
            downsample_factor: 2,
            window_len: None,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self, sample_rate: f64) -> Result<(), WaveformError> {
        if self.filter_order == 0 {
            return Err(WaveformError::InvalidConfig("filter_order must be >= 1".into()));
        }
        if self.downsample_factor == 0 {
            return Err(WaveformError::InvalidFactor(0));
        }
        if self.window_len == Some(0) {
            return Err(WaveformError::InvalidConfig("window_len must be >= 1".into()));
        }
        let nyq = sample_rate / 2.0;
        if !(self.band_low_hz > 0.0 && self.band_low_hz < self.band_high_hz && self.band_high_hz < nyq)
        {
            return Err(WaveformError::InvalidBand {
                low_hz: self.band_low_hz,
                high_hz: self.band_high_hz,
                nyquist_hz: nyq,
            });
        }
        Ok(())
    }
}

fn require_samples(x: &[f64], min: usize, what: &str) -> Result<(), WaveformError> {
    if x.len() < min {
        return Err(WaveformError::DegenerateInput(format!(
            "{what} needs at least {min} samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(WaveformError::DegenerateInput(format!("{what}: non-finite sample")));
    }
    Ok(())
}

/// Subtracts the least-squares line fitted against the sample index.
pub fn detrend_linear(x: &[f64]) -> Result<Vec<f64>, WaveformError> {
    require_samples(x, 2, "detrend")?;
    let n = x.len() as f64;
    let tbar = (n - 1.0) / 2.0;
    let xbar = x.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in x.iter().enumerate() {
        let dt = i as f64 - tbar;
        sxy += dt * (v - xbar);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    let once: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| v - xbar - slope * (i as f64 - tbar))
        .collect();
    // Second pass mops up rounding left by a large offset.
    let xbar2 = once.iter().sum::<f64>() / n;
    let sxy2: f64 = once
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as f64 - tbar) * (v - xbar2))
        .sum();
    let slope2 = sxy2 / sxx;
    Ok(once
        .iter()
        .enumerate()
        .map(|(i, &v)| v - xbar2 - slope2 * (i as f64 - tbar))
        .collect())
}

pub fn demean(x: &[f64]) -> Result<Vec<f64>, WaveformError> {
    require_samples(x, 1, "demean")?;
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let once: Vec<f64> = x.iter().map(|v| v - m).collect();
    let m2 = once.iter().sum::<f64>() / n;
    Ok(once.into_iter().map(|v| v - m2).collect())
}

/// Zero-phase Butterworth band-pass.
pub fn bandpass(
    x: &[f64],
    fs: f64,
    low_hz: f64,
    high_hz: f64,
    order: usize,
) -> Result<Vec<f64>, WaveformError> {
    let sos = butter_bandpass(order, low_hz, high_hz, fs)?;
    require_samples(x, 2, "bandpass")?;
    Ok(filtfilt(&sos, x))
}

const ANTI_ALIAS_ORDER: usize = 8;
const ANTI_ALIAS_FRACTION: f64 = 0.8;

/// Decimates by `factor` after a zero-phase anti-alias low-pass at 0.8 of
/// the new Nyquist. Output length is `ceil(n / factor)`.
pub fn downsample(x: &[f64], factor: usize) -> Result<Vec<f64>, WaveformError> {
    if factor == 0 {
        return Err(WaveformError::InvalidFactor(0));
    }
    require_samples(x, 1, "downsample")?;
    if factor == 1 {
        return Ok(x.to_vec());
    }
    // Normalised units: fs = 1, new Nyquist = 0.5 / factor.
    let cutoff = ANTI_ALIAS_FRACTION * 0.5 / factor as f64;
    let sos = butter_lowpass(ANTI_ALIAS_ORDER, cutoff, 1.0)?;
    let smooth = filtfilt(&sos, x);
    Ok(smooth.into_iter().step_by(factor).collect())
}

/// Center crop to `window` samples.
pub fn crop_center(record: &WaveformRecord, window: usize) -> Result<WaveformRecord, WaveformError> {
    let n = record.samples.len();
    if n < window {
        return Err(WaveformError::TraceTooShort {
            trace_id: record.trace_id.clone(),
            len: n,
            window,
        });
    }
    let start = (n - window) / 2;
    let mut out = record.clone();
    out.samples = record.samples[start..start + window].to_vec();
    Ok(out)
}

/// detrend → demean → band-pass → decimate. The band-pass already removes
/// everything above the new Nyquist when `band_high_hz` is below it, in which
/// case decimation is plain sample dropping; otherwise the anti-aliased
/// [`downsample`] is used.
pub fn preprocess(
    record: &WaveformRecord,
    cfg: &PreprocessConfig,
) -> Result<WaveformRecord, WaveformError> {
    record.validate()?;
    cfg.validate(record.sample_rate)?;
    let x = detrend_linear(&record.samples)?;
    let x = demean(&x)?;
    let x = bandpass(
        &x,
        record.sample_rate,
        cfg.band_low_hz,
        cfg.band_high_hz,
        cfg.filter_order,
    )?;
    let k = cfg.downsample_factor;
    let new_rate = record.sample_rate / k as f64;
    let x = if k == 1 {
        x
    } else if cfg.band_high_hz < new_rate / 2.0 {
        x.into_iter().step_by(k).collect()
    } else {
        downsample(&x, k)?
    };
    let mut out = record.clone();
    out.samples = x;
    out.sample_rate = new_rate;
    Ok(out)
}

/// [`preprocess`] followed by the optional center crop.
pub fn prepare(
    record: &WaveformRecord,
    cfg: &PreprocessConfig,
) -> Result<WaveformRecord, WaveformError> {
    let out = preprocess(record, cfg)?;
    match cfg.window_len {
        Some(w) => crop_center(&out, w),
        None => Ok(out),
    }
}
