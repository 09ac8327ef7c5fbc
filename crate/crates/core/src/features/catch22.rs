//! The catch22 catalog.
//!
//! Every function here expects an already z-scored series (mean 0, sample
//! std 1); [`compute`] does the normalization. Numerics follow the reference
//! C implementation closely, including its quirks (bin assignment by
//! truncation, quantile interpolation, the two-segment fluctuation fit), so
//! that values agree to floating-point rounding.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub const CODES: [&str; 22] = [
    "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11", "C12", "C13", "C14",
    "C15", "C16", "C17", "C18", "C19", "C20", "C21", "C22",
];

pub const NAMES: [&str; 22] = [
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "CO_HistogramAMI_even_2_5",
    "CO_trev_1_num",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_mean_longstretch1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "FC_LocalSimple_mean1_tauresrat",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "SP_Summaries_welch_rect_area_5_1",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
];

/// Shortest series each feature accepts.
pub const MIN_LEN: [usize; 22] = [
    3, 3, 4, 4, 4, 3, 3, 3, 8, 10, 12, 8, 4, 3, 3, 3, 3, 4, 12, 12, 3, 6,
];

pub type Catch22Fn = fn(&[f64]) -> f64;

pub const FUNCS: [Catch22Fn; 22] = [
    histogram_mode_5,
    histogram_mode_10,
    f1ecac,
    first_min_ac,
    histogram_ami_even_2_5,
    trev_1_num,
    hrv_classic_pnn40,
    binary_stats_mean_longstretch1,
    transition_matrix_3ac_sumdiagcov,
    periodicity_wang_th0_01,
    embed2_dist_tau_d_expfit_meandiff,
    auto_mutual_info_stats_40_gaussian_fmmi,
    local_simple_mean1_tauresrat,
    outlier_include_p_001_mdrmd,
    outlier_include_n_001_mdrmd,
    welch_rect_area_5_1,
    binary_stats_diff_longstretch0,
    motif_three_quantile_hh,
    fluct_anal_rsrangefit,
    fluct_anal_dfa,
    welch_rect_centroid,
    local_simple_mean3_stderr,
];

// ---------------------------------------------------------------- helpers

pub fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn stddev(a: &[f64]) -> f64 {
    let m = mean(a);
    let ss: f64 = a.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (a.len() as f64 - 1.0)).sqrt()
}

pub fn zscore(a: &[f64]) -> Vec<f64> {
    let m = mean(a);
    let sd = stddev(a);
    a.iter().map(|v| (v - m) / sd).collect()
}

fn min_(a: &[f64]) -> f64 {
    a.iter().skip(1).fold(a[0], |m, &v| if v < m { v } else { m })
}

fn max_(a: &[f64]) -> f64 {
    a.iter().skip(1).fold(a[0], |m, &v| if v > m { v } else { m })
}

fn sorted(a: &[f64]) -> Vec<f64> {
    let mut b = a.to_vec();
    b.sort_by(|x, y| x.total_cmp(y));
    b
}

fn median(a: &[f64]) -> f64 {
    let n = a.len();
    if n == 0 {
        return f64::NAN;
    }
    let b = sorted(a);
    if n % 2 == 1 {
        b[n / 2]
    } else {
        (b[n / 2] + b[n / 2 - 1]) / 2.0
    }
}

fn quantile(a: &[f64], quant: f64) -> f64 {
    let n = a.len();
    let tmp = sorted(a);
    let q = 0.5 / n as f64;
    if quant < q {
        return tmp[0];
    }
    if quant > 1.0 - q {
        return tmp[n - 1];
    }
    let idx = n as f64 * quant - 0.5;
    let l = idx.floor() as usize;
    let r = idx.ceil() as usize;
    if l == r {
        return tmp[l];
    }
    tmp[l] + (idx - l as f64) * (tmp[r] - tmp[l]) / (r - l) as f64
}

fn diff(a: &[f64]) -> Vec<f64> {
    a.windows(2).map(|w| w[1] - w[0]).collect()
}

fn cov(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    s / (x.len() as f64 - 1.0)
}

fn corr(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut num, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        num += (a - mx) * (b - my);
        dx += (a - mx) * (a - mx);
        dy += (b - my) * (b - my);
    }
    num / (dx * dy).sqrt()
}

fn autocorr_lag(x: &[f64], lag: usize) -> f64 {
    let n = x.len() - lag;
    corr(&x[..n], &x[lag..lag + n])
}

fn autocov_lag(x: &[f64], lag: usize) -> f64 {
    let n = x.len() - lag;
    let s: f64 = (0..n).map(|i| x[i] * x[i + lag]).sum();
    s / n as f64
}

/// Returns (slope, intercept); both 0 when x is degenerate.
fn linreg(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mut sx, mut sx2, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sx2 += a * a;
        sxy += a * b;
        sy += b;
    }
    let denom = n * sx2 - sx * sx;
    if denom == 0.0 {
        return (0.0, 0.0);
    }
    ((n * sxy - sx * sy) / denom, (sy * sx2 - sx * sxy) / denom)
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

fn fft_forward(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Autocorrelation at every lag of a zero-padded FFT of length 2·nextpow2(n).
fn autocorrs(y: &[f64]) -> Vec<f64> {
    let m = mean(y);
    let nfft = next_pow2(y.len()) << 1;
    let mut f = vec![Complex64::new(0.0, 0.0); nfft];
    for (slot, v) in f.iter_mut().zip(y) {
        *slot = Complex64::new(v - m, 0.0);
    }
    fft_forward(&mut f);
    for v in f.iter_mut() {
        *v *= v.conj();
    }
    fft_forward(&mut f);
    let d = f[0];
    f.iter().map(|v| (v / d).re).collect()
}

fn first_zero(y: &[f64], max_tau: usize) -> usize {
    let ac = autocorrs(y);
    let mut i = 0;
    while i < max_tau && ac[i] > 0.0 {
        i += 1;
    }
    i
}

/// Equal-width histogram over [min, max] with truncating bin assignment.
fn histcounts(y: &[f64], n_bins: usize) -> (Vec<usize>, Vec<f64>) {
    let lo = min_(y);
    let hi = max_(y);
    let step = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in y {
        let raw = (v - lo) / step;
        let idx = if raw.is_nan() || raw < 0.0 {
            0
        } else {
            (raw as usize).min(n_bins - 1)
        };
        counts[idx] += 1;
    }
    let edges = (0..=n_bins).map(|i| i as f64 * step + lo).collect();
    (counts, edges)
}

fn num_bins_auto(y: &[f64]) -> usize {
    let sd = stddev(y);
    if sd < 0.001 {
        return 0;
    }
    let n = y.len() as f64;
    ((max_(y) - min_(y)) / (3.5 * sd / n.powf(1.0 / 3.0))).ceil() as usize
}

fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    let step = (end - start) / (n as f64 - 1.0);
    let mut out = Vec::with_capacity(n);
    let mut v = start;
    for _ in 0..n {
        out.push(v);
        v += step;
    }
    out
}

/// Labels 1..=groups by equiprobable quantile bins.
fn coarsegrain(y: &[f64], groups: usize) -> Vec<usize> {
    let ls = linspace(0.0, 1.0, groups + 1);
    let mut th: Vec<f64> = ls.iter().map(|&q| quantile(y, q)).collect();
    th[0] -= 1.0;
    let mut labels = vec![0usize; y.len()];
    for i in 0..groups {
        for (j, &v) in y.iter().enumerate() {
            if v > th[i] && v <= th[i + 1] {
                labels[j] = i + 1;
            }
        }
    }
    labels
}

// ---------------------------------------------------------------- features

fn histogram_mode(y: &[f64], n_bins: usize) -> f64 {
    let (counts, edges) = histcounts(y, n_bins);
    let mut max_count = 0usize;
    let mut num_maxs = 1usize;
    let mut out = 0.0;
    for i in 0..n_bins {
        let centre = (edges[i] + edges[i + 1]) * 0.5;
        if counts[i] > max_count {
            max_count = counts[i];
            num_maxs = 1;
            out = centre;
        } else if counts[i] == max_count {
            num_maxs += 1;
            out += centre;
        }
    }
    out / num_maxs as f64
}

pub fn histogram_mode_5(y: &[f64]) -> f64 {
    histogram_mode(y, 5)
}

pub fn histogram_mode_10(y: &[f64]) -> f64 {
    histogram_mode(y, 10)
}

/// First 1/e crossing of the autocorrelation, linearly interpolated.
pub fn f1ecac(y: &[f64]) -> f64 {
    let n = y.len();
    let ac = autocorrs(y);
    let thresh = 1.0 / 1f64.exp();
    for i in 0..n.saturating_sub(2) {
        if ac[i + 1] < thresh {
            let m = ac[i + 1] - ac[i];
            return i as f64 + (thresh - ac[i]) / m;
        }
    }
    n as f64
}

pub fn first_min_ac(y: &[f64]) -> f64 {
    let n = y.len();
    let ac = autocorrs(y);
    for i in 1..n.saturating_sub(1) {
        if ac[i] < ac[i - 1] && ac[i] < ac[i + 1] {
            return i as f64;
        }
    }
    n as f64
}

/// Automutual information at lag 2 over five equal bins.
pub fn histogram_ami_even_2_5(y: &[f64]) -> f64 {
    const TAU: usize = 2;
    const BINS: usize = 5;
    let lo = min_(y);
    let hi = max_(y);
    let step = (hi - lo + 0.2) / BINS as f64;
    let edges: Vec<f64> = (0..=BINS).map(|i| lo + step * i as f64 - 0.1).collect();
    let assign = |v: f64| edges.iter().position(|&e| v < e).unwrap_or(0);
    let mut joint = [[0f64; BINS]; BINS];
    let m = y.len() - TAU;
    let mut total = 0.0;
    for i in 0..m {
        let (a, b) = (assign(y[i]), assign(y[i + TAU]));
        if (1..=BINS).contains(&a) && (1..=BINS).contains(&b) {
            joint[a - 1][b - 1] += 1.0;
            total += 1.0;
        }
    }
    let mut pi = [0f64; BINS];
    let mut pj = [0f64; BINS];
    for i in 0..BINS {
        for j in 0..BINS {
            joint[i][j] /= total;
            pi[i] += joint[i][j];
            pj[j] += joint[i][j];
        }
    }
    let mut ami = 0.0;
    for i in 0..BINS {
        for j in 0..BINS {
            if joint[i][j] > 0.0 {
                ami += joint[i][j] * (joint[i][j] / (pi[i] * pj[j])).ln();
            }
        }
    }
    ami
}

pub fn trev_1_num(y: &[f64]) -> f64 {
    let d: Vec<f64> = diff(y).into_iter().map(|v| v.powi(3)).collect();
    mean(&d)
}

pub fn hrv_classic_pnn40(y: &[f64]) -> f64 {
    let d = diff(y);
    let hits = d.iter().filter(|v| v.abs() * 1000.0 > 40.0).count();
    hits as f64 / d.len() as f64
}

// Longest run between "break" symbols over the first n-1 binary entries.
fn longest_stretch(bins: &[u8], breaker: u8) -> f64 {
    let len = bins.len();
    let mut best = 0usize;
    let mut last = 0usize;
    for (i, &b) in bins.iter().enumerate() {
        if b == breaker || i + 1 == len {
            let stretch = i - last;
            if stretch > best {
                best = stretch;
            }
            last = i;
        }
    }
    best as f64
}

pub fn binary_stats_mean_longstretch1(y: &[f64]) -> f64 {
    let m = mean(y);
    let bins: Vec<u8> = y[..y.len() - 1]
        .iter()
        .map(|v| if v - m <= 0.0 { 0 } else { 1 })
        .collect();
    longest_stretch(&bins, 0)
}

pub fn binary_stats_diff_longstretch0(y: &[f64]) -> f64 {
    let bins: Vec<u8> = diff(y).iter().map(|&d| if d < 0.0 { 0 } else { 1 }).collect();
    longest_stretch(&bins, 1)
}

pub fn transition_matrix_3ac_sumdiagcov(y: &[f64]) -> f64 {
    let n = y.len();
    let tau = first_zero(y, n).max(1);
    let n_down = (n - 1) / tau + 1;
    let down: Vec<f64> = (0..n_down).map(|i| y[i * tau]).collect();
    let cg = coarsegrain(&down, 3);
    let mut t = [[0f64; 3]; 3];
    for j in 0..n_down - 1 {
        if cg[j] > 0 && cg[j + 1] > 0 {
            t[cg[j] - 1][cg[j + 1] - 1] += 1.0;
        }
    }
    let denom = (n_down - 1) as f64;
    for row in t.iter_mut() {
        for v in row.iter_mut() {
            *v /= denom;
        }
    }
    (0..3)
        .map(|c| {
            let col = [t[0][c], t[1][c], t[2][c]];
            cov(&col, &col)
        })
        .sum()
}

/// Least-squares cubic spline with a single interior knot at floor(n/2)-1,
/// evaluated on the sample grid.
fn spline_fit(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let span = (n - 1) as f64;
    let knot = ((n / 2) as f64 - 1.0) / span;
    let basis = |i: usize| -> [f64; 5] {
        let s = i as f64 / span;
        let k = (s - knot).max(0.0);
        [1.0, s, s * s, s * s * s, k * k * k]
    };
    let mut ata = [[0f64; 5]; 5];
    let mut aty = [0f64; 5];
    for (i, &v) in y.iter().enumerate() {
        let b = basis(i);
        for r in 0..5 {
            aty[r] += b[r] * v;
            for c in 0..5 {
                ata[r][c] += b[r] * b[c];
            }
        }
    }
    let coef = solve5(ata, aty);
    (0..n)
        .map(|i| basis(i).iter().zip(&coef).map(|(b, c)| b * c).sum())
        .collect()
}

// Gaussian elimination with partial pivoting.
fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> [f64; 5] {
    for col in 0..5 {
        let piv = (col..5)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        if d == 0.0 {
            continue;
        }
        for r in col + 1..5 {
            let f = a[r][col] / d;
            for c in col..5 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0f64; 5];
    for r in (0..5).rev() {
        let mut acc = b[r];
        for c in r + 1..5 {
            acc -= a[r][c] * x[c];
        }
        x[r] = if a[r][r] == 0.0 { 0.0 } else { acc / a[r][r] };
    }
    x
}

pub fn periodicity_wang_th0_01(y: &[f64]) -> f64 {
    const TH: f64 = 0.01;
    let n = y.len();
    let spline = spline_fit(y);
    let sub: Vec<f64> = y.iter().zip(&spline).map(|(a, b)| a - b).collect();
    let acmax = n.div_ceil(3);
    let acf: Vec<f64> = (1..=acmax).map(|tau| autocov_lag(&sub, tau)).collect();
    let mut troughs = Vec::new();
    let mut peaks = Vec::new();
    for i in 1..acmax.saturating_sub(1) {
        let slope_in = acf[i] - acf[i - 1];
        let slope_out = acf[i + 1] - acf[i];
        if slope_in < 0.0 && slope_out > 0.0 {
            troughs.push(i);
        } else if slope_in > 0.0 && slope_out < 0.0 {
            peaks.push(i);
        }
    }
    for &ip in &peaks {
        let Some(&it) = troughs.iter().take_while(|&&t| t < ip).last() else {
            continue;
        };
        if acf[ip] - acf[it] < TH || acf[ip] < 0.0 {
            continue;
        }
        return ip as f64;
    }
    0.0
}

pub fn embed2_dist_tau_d_expfit_meandiff(y: &[f64]) -> f64 {
    let n = y.len();
    let mut tau = first_zero(y, n);
    if tau as f64 > n as f64 / 10.0 {
        tau = n / 10;
    }
    let m = n - tau - 1;
    let d: Vec<f64> = (0..m)
        .map(|i| {
            let a = y[i + 1] - y[i];
            let b = y[i + tau] - y[i + tau + 1];
            (a * a + b * b).sqrt()
        })
        .collect();
    let l = mean(&d);
    let n_bins = num_bins_auto(&d);
    if n_bins == 0 {
        return 0.0;
    }
    let (counts, edges) = histcounts(&d, n_bins);
    let diffs: Vec<f64> = (0..n_bins)
        .map(|i| {
            let p = counts[i] as f64 / m as f64;
            let expf = ((-(edges[i] + edges[i + 1]) * 0.5 / l).exp() / l).max(0.0);
            (p - expf).abs()
        })
        .collect();
    mean(&diffs)
}

pub fn auto_mutual_info_stats_40_gaussian_fmmi(y: &[f64]) -> f64 {
    let n = y.len();
    let tau = 40.min(n.div_ceil(2));
    let ami: Vec<f64> = (0..tau)
        .map(|i| {
            let ac = autocorr_lag(y, i + 1);
            -0.5 * (1.0 - ac * ac).ln()
        })
        .collect();
    for i in 1..tau.saturating_sub(1) {
        if ami[i] < ami[i - 1] && ami[i] < ami[i + 1] {
            return i as f64;
        }
    }
    tau as f64
}

pub fn local_simple_mean1_tauresrat(y: &[f64]) -> f64 {
    let res = diff(y);
    first_zero(&res, res.len()) as f64 / first_zero(y, y.len()) as f64
}

pub fn local_simple_mean3_stderr(y: &[f64]) -> f64 {
    let res: Vec<f64> = (0..y.len() - 3)
        .map(|i| y[i + 3] - (y[i] + y[i + 1] + y[i + 2]) / 3.0)
        .collect();
    stddev(&res)
}

fn outlier_include(y: &[f64], sign: f64) -> f64 {
    const INC: f64 = 0.01;
    let n = y.len();
    if y.iter().all(|&v| v == y[0]) {
        return 0.0;
    }
    let work: Vec<f64> = y.iter().map(|v| sign * v).collect();
    let tot = work.iter().filter(|&&v| v >= 0.0).count() as f64;
    let max_val = max_(&work);
    if max_val < INC {
        return 0.0;
    }
    let n_thresh = (max_val / INC + 1.0) as usize;
    let mut ms1 = vec![0f64; n_thresh];
    let mut ms3 = vec![0f64; n_thresh];
    let mut ms4 = vec![0f64; n_thresh];
    for j in 0..n_thresh {
        let r: Vec<f64> = work
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= j as f64 * INC)
            .map(|(i, _)| (i + 1) as f64)
            .collect();
        let gaps = diff(&r);
        ms1[j] = if gaps.is_empty() { f64::NAN } else { mean(&gaps) };
        ms3[j] = (r.len() as f64 - 1.0) * 100.0 / tot;
        ms4[j] = median(&r) / (n as f64 / 2.0) - 1.0;
    }
    let mj = (0..n_thresh).filter(|&i| ms3[i] > 2.0).last().unwrap_or(0);
    let fbi = (0..n_thresh)
        .find(|&i| ms1[i].is_nan())
        .unwrap_or(n_thresh - 1);
    median(&ms4[..mj.min(fbi) + 1])
}

pub fn outlier_include_p_001_mdrmd(y: &[f64]) -> f64 {
    outlier_include(y, 1.0)
}

pub fn outlier_include_n_001_mdrmd(y: &[f64]) -> f64 {
    outlier_include(y, -1.0)
}

// Rectangular-window periodogram in angular frequency: (w, Sw).
fn welch_rect(y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let nfft = next_pow2(n);
    let m = mean(y);
    let mut f = vec![Complex64::new(0.0, 0.0); nfft];
    for (slot, v) in f.iter_mut().zip(y) {
        *slot = Complex64::new(v - m, 0.0);
    }
    fft_forward(&mut f);
    let nout = nfft / 2 + 1;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = Vec::with_capacity(nout);
    let mut sw = Vec::with_capacity(nout);
    for (i, c) in f.iter().take(nout).enumerate() {
        let mut p = c.norm_sqr() / n as f64;
        if i > 0 && i < nout - 1 {
            p *= 2.0;
        }
        w.push(two_pi * i as f64 / nfft as f64);
        sw.push(p / two_pi);
    }
    (w, sw)
}

pub fn welch_rect_area_5_1(y: &[f64]) -> f64 {
    let (w, sw) = welch_rect(y);
    let dw = w[1] - w[0];
    sw[..sw.len() / 5].iter().sum::<f64>() * dw
}

pub fn welch_rect_centroid(y: &[f64]) -> f64 {
    let (w, sw) = welch_rect(y);
    let mut cs = Vec::with_capacity(sw.len());
    let mut acc = 0.0;
    for v in &sw {
        acc += v;
        cs.push(acc);
    }
    let half = cs[cs.len() - 1] * 0.5;
    cs.iter()
        .position(|&c| c > half)
        .map(|i| w[i])
        .unwrap_or(0.0)
}

#[derive(Clone, Copy)]
enum Fluct {
    RsRange,
    Dfa,
}

fn fluct_anal(y: &[f64], lag: usize, how: Fluct) -> f64 {
    const STEPS: usize = 50;
    let size = y.len();
    let lin_low = 5f64.ln();
    let lin_high = ((size / 2) as f64).ln();
    let step = (lin_high - lin_low) / (STEPS - 1) as f64;
    let mut tau = [0i64; STEPS];
    for (i, t) in tau.iter_mut().enumerate() {
        *t = (lin_low + i as f64 * step).exp().round() as i64;
    }
    // Reproduces the reference dedup pass, including its in-place shifting.
    let mut n_tau = STEPS;
    for i in 0..STEPS - 1 {
        while tau[i] == tau[i + 1] && i + 1 < n_tau {
            for j in i + 1..STEPS - 1 {
                tau[j] = tau[j + 1];
            }
            n_tau -= 1;
        }
    }
    if n_tau < 12 {
        return 0.0;
    }
    let size_cs = size / lag;
    let mut ycs = vec![0f64; size_cs];
    ycs[0] = y[0];
    for i in 0..size_cs - 1 {
        ycs[i + 1] = ycs[i] + y[(i + 1) * lag];
    }
    let taus: Vec<usize> = tau[..n_tau].iter().map(|&t| t.max(1) as usize).collect();
    let xreg: Vec<f64> = (1..=*taus.iter().max().unwrap_or(&1)).map(|v| v as f64).collect();
    let mut fl = vec![0f64; n_tau];
    for (i, &t) in taus.iter().enumerate() {
        let n_buf = size_cs / t;
        let mut acc = 0.0;
        let mut buf = vec![0f64; t];
        for j in 0..n_buf {
            let seg = &ycs[j * t..(j + 1) * t];
            let (m, b) = linreg(&xreg[..t], seg);
            for k in 0..t {
                buf[k] = seg[k] - (m * (k + 1) as f64 + b);
            }
            match how {
                Fluct::RsRange => acc += (max_(&buf) - min_(&buf)).powi(2),
                Fluct::Dfa => acc += buf.iter().map(|v| v * v).sum::<f64>(),
            }
        }
        fl[i] = match how {
            Fluct::RsRange => (acc / n_buf as f64).sqrt(),
            Fluct::Dfa => (acc / (n_buf * t) as f64).sqrt(),
        };
    }
    let ntt = n_tau;
    let logtt: Vec<f64> = taus.iter().map(|&t| (t as f64).ln()).collect();
    let logff: Vec<f64> = fl.iter().map(|v| v.ln()).collect();
    const MIN_POINTS: usize = 6;
    let mut sserr = Vec::with_capacity(ntt - 2 * MIN_POINTS + 1);
    for i in MIN_POINTS..ntt - MIN_POINTS + 1 {
        let (m1, b1) = linreg(&logtt[..i], &logff[..i]);
        let (m2, b2) = linreg(&logtt[i - 1..], &logff[i - 1..]);
        let r1: Vec<f64> = (0..i).map(|j| logtt[j] * m1 + b1 - logff[j]).collect();
        let r2: Vec<f64> = (i - 1..ntt)
            .map(|j| logtt[j] * m2 + b2 - logff[j])
            .collect();
        sserr.push(norm(&r1) + norm(&r2));
    }
    let minimum = min_(&sserr);
    let first_min = sserr
        .iter()
        .position(|&v| v == minimum)
        .map(|i| (i + MIN_POINTS - 1) as f64)
        .unwrap_or(0.0);
    (first_min + 1.0) / ntt as f64
}

pub fn fluct_anal_rsrangefit(y: &[f64]) -> f64 {
    fluct_anal(y, 1, Fluct::RsRange)
}

pub fn fluct_anal_dfa(y: &[f64]) -> f64 {
    fluct_anal(y, 2, Fluct::Dfa)
}

pub fn motif_three_quantile_hh(y: &[f64]) -> f64 {
    let n = y.len();
    let yt = coarsegrain(y, 3);
    let mut counts = [[0usize; 3]; 3];
    for k in 0..n - 1 {
        if yt[k] > 0 && yt[k + 1] > 0 {
            counts[yt[k] - 1][yt[k + 1] - 1] += 1;
        }
    }
    let denom = n as f64 - 1.0;
    let mut hh = 0.0;
    for row in counts {
        for c in row {
            let p = c as f64 / denom;
            if p > 0.0 {
                hh -= p * p.ln();
            }
        }
    }
    hh
}

/// Index of `code` in the catalog.
pub fn index_of(code: &str) -> Option<usize> {
    CODES.iter().position(|&c| c == code)
}

/// Z-scores `y` and evaluates catalog entry `index`. Returns `None` for
/// constant or too-short input.
pub fn compute(index: usize, y: &[f64]) -> Option<f64> {
    if y.len() < MIN_LEN[index] || y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sd = stddev(y);
    if !(sd > 0.0) || !sd.is_finite() {
        return None;
    }
    let z = zscore(y);
    let v = FUNCS[index](&z);
    v.is_finite().then_some(v)
}
