//! Butterworth design in second-order sections and zero-phase application.

use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

use super::WaveformError;

/// Cascade of biquads. Each row is `[b0, b1, b2, a1, a2]` with `a0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<[f64; 5]>,
}

// Butterworth prototype poles on the unit circle, left half plane.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

fn bilinear(s: Complex64, fs2: f64) -> Complex64 {
    (Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s)
}

// Splits digital poles into conjugate pairs and leftover reals, each
// returned as denominator coefficients (a1, a2).
fn pole_sections(poles: &[Complex64]) -> Vec<(f64, f64)> {
    let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > 1e-12).collect();
    let mut real: Vec<f64> = poles
        .iter()
        .filter(|p| p.im.abs() <= 1e-12)
        .map(|p| p.re)
        .collect();
    complex.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    real.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<(f64, f64)> = complex
        .iter()
        .map(|p| (-2.0 * p.re, p.norm_sqr()))
        .collect();
    for pair in real.chunks(2) {
        if pair.len() == 2 {
            out.push((-(pair[0] + pair[1]), pair[0] * pair[1]));
        } else {
            out.push((-pair[0], 0.0));
        }
    }
    out
}

fn section_response(b: [f64; 3], a: (f64, f64), omega: f64) -> f64 {
    let z1 = Complex64::from_polar(1.0, -omega);
    let z2 = z1 * z1;
    let num = b[0] + z1 * b[1] + z2 * b[2];
    let den = Complex64::new(1.0, 0.0) + z1 * a.0 + z2 * a.1;
    (num / den).norm()
}

/// Digital Butterworth band-pass of the given prototype order, unit gain at
/// the geometric center of the (prewarped) band.
pub fn butter_bandpass(
    order: usize,
    low_hz: f64,
    high_hz: f64,
    fs: f64,
) -> Result<SosFilter, WaveformError> {
    let nyq = fs / 2.0;
    if order == 0 {
        return Err(WaveformError::InvalidConfig("filter order must be >= 1".into()));
    }
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyq) {
        return Err(WaveformError::InvalidBand {
            low_hz,
            high_hz,
            nyquist_hz: nyq,
        });
    }
    let fs2 = 2.0 * fs;
    let wl = fs2 * (PI * low_hz / fs).tan();
    let wh = fs2 * (PI * high_hz / fs).tan();
    let bw = wh - wl;
    let w0sq = wl * wh;
    let mut poles = Vec::with_capacity(2 * order);
    for p in prototype_poles(order) {
        let half = p * (bw / 2.0);
        let disc = (half * half - w0sq).sqrt();
        poles.push(bilinear(half + disc, fs2));
        poles.push(bilinear(half - disc, fs2));
    }
    let center = 2.0 * (w0sq.sqrt() / fs2).atan();
    let sections = pole_sections(&poles)
        .into_iter()
        .map(|a| {
            let b = [1.0, 0.0, -1.0];
            let g = section_response(b, a, center);
            [b[0] / g, b[1] / g, b[2] / g, a.0, a.1]
        })
        .collect();
    Ok(SosFilter { sections })
}

/// Digital Butterworth low-pass with unit DC gain.
pub fn butter_lowpass(order: usize, cutoff_hz: f64, fs: f64) -> Result<SosFilter, WaveformError> {
    let nyq = fs / 2.0;
    if order == 0 {
        return Err(WaveformError::InvalidConfig("filter order must be >= 1".into()));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < nyq) {
        return Err(WaveformError::InvalidBand {
            low_hz: 0.0,
            high_hz: cutoff_hz,
            nyquist_hz: nyq,
        });
    }
    let fs2 = 2.0 * fs;
    let wc = fs2 * (PI * cutoff_hz / fs).tan();
    let poles: Vec<Complex64> = prototype_poles(order)
        .into_iter()
        .map(|p| bilinear(p * wc, fs2))
        .collect();
    let sections = pole_sections(&poles)
        .into_iter()
        .map(|a| {
            let b = if a.1 == 0.0 { [1.0, 1.0, 0.0] } else { [1.0, 2.0, 1.0] };
            let g = (b[0] + b[1] + b[2]) / (1.0 + a.0 + a.1);
            [b[0] / g, b[1] / g, b[2] / g, a.0, a.1]
        })
        .collect();
    Ok(SosFilter { sections })
}

impl SosFilter {
    /// Samples for the slowest pole to decay below 1e-6 of its initial value.
    pub fn settle_len(&self) -> usize {
        let rmax = self
            .sections
            .iter()
            .map(|s| {
                // |pole| of a biquad: sqrt(a2) for complex pairs, else largest real root.
                let (a1, a2) = (s[3], s[4]);
                let disc = a1 * a1 - 4.0 * a2;
                if disc < 0.0 {
                    a2.sqrt()
                } else {
                    let r = disc.sqrt();
                    ((-a1 + r) / 2.0).abs().max(((-a1 - r) / 2.0).abs())
                }
            })
            .fold(0.0_f64, f64::max);
        if rmax <= 0.0 {
            return 1;
        }
        ((1e-6_f64).ln() / rmax.ln()).ceil().max(1.0) as usize
    }

    fn dc_gain(s: &[f64; 5]) -> f64 {
        (s[0] + s[1] + s[2]) / (1.0 + s[3] + s[4])
    }

    /// Causal filtering, with section states initialised to the steady state
    /// for a constant input equal to `x[0]`.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        let mut u0 = x.first().copied().unwrap_or(0.0);
        for s in &self.sections {
            let [b0, b1, b2, a1, a2] = *s;
            let y0 = Self::dc_gain(s) * u0;
            let mut z1 = (b1 + b2) * u0 - (a1 + a2) * y0;
            let mut z2 = b2 * u0 - a2 * y0;
            for v in y.iter_mut() {
                let xin = *v;
                let out = b0 * xin + z1;
                z1 = b1 * xin - a1 * out + z2;
                z2 = b2 * xin - a2 * out;
                *v = out;
            }
            u0 = y0;
        }
        y
    }
}

/// Forward-backward filtering with odd reflective padding of one settling
/// length (capped at `n - 1`).
pub fn filtfilt(sos: &SosFilter, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return sos.filter(x);
    }
    let pad = sos.settle_len().min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
    let mut y = sos.filter(&ext);
    y.reverse();
    let mut y = sos.filter(&y);
    y.reverse();
    y[pad..pad + n].to_vec()
}
