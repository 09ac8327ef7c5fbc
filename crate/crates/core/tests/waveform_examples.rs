//! Preprocessing behaviour checked against independent oracles: an FFT
//! magnitude estimate for filters and an orthogonal-basis line fit for
//! detrending.

use proptest::prelude::*;
use quakelr::bench::{generate_synthetic, SyntheticSpec};
use quakelr::waveform::{bandpass, demean, detrend_linear, downsample, preprocess, PreprocessConfig};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

fn sine(f: f64, fs: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()
}

/// Single-sided amplitude at `f` over a window holding a whole number of
/// cycles.
fn amplitude(x: &[f64], fs: f64, f: f64) -> f64 {
    let n = x.len();
    let k = (f * n as f64 / fs).round() as usize;
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    2.0 * buf[k].norm() / n as f64
}

/// Least-squares line via an orthonormal {1, t - tbar} basis.
fn line_fit_residual(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let tbar = (n as f64 - 1.0) / 2.0;
    let e0 = 1.0 / (n as f64).sqrt();
    let norm1 = (0..n).map(|i| (i as f64 - tbar).powi(2)).sum::<f64>().sqrt();
    let e1: Vec<f64> = (0..n).map(|i| (i as f64 - tbar) / norm1).collect();
    let c0: f64 = x.iter().map(|v| v * e0).sum();
    let c1: f64 = x.iter().zip(&e1).map(|(v, e)| v * e).sum();
    x.iter().zip(&e1).map(|(v, e)| v - c0 * e0 - c1 * e).collect()
}

#[test]
fn detrend_examples() {
    let y = detrend_linear(&[0.0, 1.0, 2.0, 3.0]).unwrap();
    assert!(y.iter().all(|v| v.abs() < 1e-12));
    assert!(detrend_linear(&[7.5; 33]).unwrap().iter().all(|v| v.abs() < 1e-12));

    let s = sine(10.0, 200.0, 400);
    let x: Vec<f64> = s.iter().enumerate().map(|(i, v)| v + 3.0 - 0.02 * i as f64).collect();
    let got = detrend_linear(&x).unwrap();
    let want = line_fit_residual(&s);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn bandpass_15hz_passes_1hz_rejected() {
    let fs = 200.0;
    let n = 3000;
    // Steady state: drop the first and last 1000 samples, keep 1000 (whole cycles).
    let y = bandpass(&sine(15.0, fs, n), fs, 5.0, 25.0, 4).unwrap();
    let a = amplitude(&y[1000..2000], fs, 15.0);
    assert!((a - 1.0).abs() < 0.05, "15 Hz amplitude {a}");
    let y = bandpass(&sine(1.0, fs, n), fs, 5.0, 25.0, 4).unwrap();
    let a = amplitude(&y[1000..2000], fs, 1.0);
    assert!(a < 0.05, "1 Hz amplitude {a}");
    let z = bandpass(&[0.0; 256], fs, 5.0, 25.0, 4).unwrap();
    assert!(z.iter().all(|v| *v == 0.0));
}

#[test]
fn downsample_keeps_band_and_drops_alias() {
    let fs = 200.0;
    let n = 4000;
    let tones = [(7.0, 1.0), (13.0, 0.7), (21.0, 0.5)];
    let x: Vec<f64> = (0..n)
        .map(|i| tones.iter().map(|(f, a)| a * (2.0 * PI * f * i as f64 / fs).sin()).sum())
        .collect();
    let y = downsample(&x, 2).unwrap();
    assert_eq!(y.len(), 2000);
    let seg = &y[500..1500];
    for (f, a) in tones {
        let got = amplitude(seg, fs / 2.0, f);
        assert!((got / a - 1.0).abs() < 0.05, "{f} Hz: {got} vs {a}");
    }
    // Nothing between the band edge and the new Nyquist.
    let mut buf: Vec<Complex64> = seg.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(seg.len()).process(&mut buf);
    let hi = (30 * seg.len() / 100)..=(seg.len() / 2);
    let leak = hi.map(|k| 2.0 * buf[k].norm() / seg.len() as f64).fold(0.0, f64::max);
    assert!(leak < 0.01, "leak {leak}");

    // A 70 Hz tone would alias to 30 Hz without the anti-alias stage.
    let y = downsample(&sine(70.0, fs, n), 2).unwrap();
    assert!(amplitude(&y[500..1500], fs / 2.0, 30.0) < 0.05);
}

#[test]
fn preprocess_examples() {
    let mut spec = SyntheticSpec { n_events: 1, traces_per_event: [1, 1], n_noise: 1, seed: 5, ..Default::default() };
    spec.snr_range = [4.0, 4.0];
    let recs = generate_synthetic(&spec).unwrap();
    let ev = &recs[0];
    let cfg = PreprocessConfig::default();
    let out = preprocess(ev, &cfg).unwrap();
    assert_eq!(out.sample_rate, 100.0);
    assert_eq!((out.trace_id.as_str(), out.event_id.as_deref()), (ev.trace_id.as_str(), ev.event_id.as_deref()));
    let m = demean(&detrend_linear(&ev.samples).unwrap()).unwrap();
    let m = bandpass(&m, ev.sample_rate, 5.0, 25.0, 4).unwrap();
    let m: Vec<f64> = m.into_iter().step_by(2).collect();
    assert_eq!(out.samples, m);

    let mut flat = ev.clone();
    flat.samples = vec![3.25; 500];
    assert!(preprocess(&flat, &cfg).unwrap().samples.iter().all(|v| v.abs() < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn demean_and_detrend_are_idempotent(xs in prop::collection::vec(-1e3f64..1e3, 2..300)) {
        let d = demean(&xs).unwrap();
        let dd = demean(&d).unwrap();
        let t = detrend_linear(&xs).unwrap();
        let tt = detrend_linear(&t).unwrap();
        for i in 0..xs.len() {
            prop_assert!((d[i] - dd[i]).abs() < 1e-10);
            prop_assert!((t[i] - tt[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn demean_and_detrend_are_linear(
        x in prop::collection::vec(-100.0f64..100.0, 2..200),
        a in -5.0f64..5.0, b in -5.0f64..5.0,
    ) {
        let y: Vec<f64> = x.iter().map(|v| (v * 1.7).cos() * 50.0).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        for f in [demean as fn(&[f64]) -> _, detrend_linear] {
            let (fx, fy, fm) = (f(&x).unwrap(), f(&y).unwrap(), f(&mix).unwrap());
            for i in 0..x.len() {
                prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
            }
        }
    }
}
