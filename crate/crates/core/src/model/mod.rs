//! Elastic-net penalized logistic regression.
//!
//! Objective: mean negative log-likelihood plus
//! `lambda * (alpha * Σ|β| + (1 - alpha) * Σβ²)`, with the bias excluded from
//! the penalty unless `penalize_bias` is set.
//!
//! Training is cyclic coordinate descent. Each coordinate step minimizes a
//! quadratic upper bound of the NLL (curvature `0.25 * mean(x_j²)`) plus the
//! exact penalty, which has a closed-form soft-threshold solution. Because
//! every step minimizes a majorizer, the objective never increases and L1
//! weights land on exact zeros.

pub mod io;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureId, FeatureVector, StandardizationParams};
use crate::waveform::Label;

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),
    #[error("invalid threshold {0}: must lie in (0, 1)")]
    InvalidThreshold(f64),
    #[error("trace {trace_id} lacks feature {feature}")]
    MissingFeature { trace_id: String, feature: FeatureId },
    #[error("training data must contain both classes")]
    DegenerateLabels,
    #[error("empty data")]
    EmptyData,
    #[error("invalid training options: {0}")]
    InvalidOptions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyConfig {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(default)]
    pub penalize_bias: bool,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            lambda: 0.01,
            penalize_bias: false,
        }
    }
}

impl PenaltyConfig {
    pub fn new(alpha: f64, lambda: f64) -> Self {
        Self {
            alpha,
            lambda,
            penalize_bias: false,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ModelError::InvalidPenalty(format!(
                "alpha = {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(ModelError::InvalidPenalty(format!(
                "lambda = {} must be finite and >= 0",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub alpha: f64,
    pub lambda: f64,
    pub penalize_bias: bool,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub bias: f64,
    pub weights: IndexMap<FeatureId, f64>,
    pub threshold: f64,
    /// Parameters the inputs were standardized with at training time.
    #[serde(default)]
    pub standardization: Option<StandardizationParams>,
    #[serde(default)]
    pub training_meta: Option<TrainingMeta>,
}

impl LinearModel {
    pub fn zeros(features: &[FeatureId]) -> Self {
        Self {
            bias: 0.0,
            weights: features.iter().map(|f| (f.clone(), 0.0)).collect(),
            threshold: 0.5,
            standardization: None,
            training_meta: None,
        }
    }

    pub fn feature_ids(&self) -> Vec<FeatureId> {
        self.weights.keys().cloned().collect()
    }

    pub fn nonzero_count(&self) -> usize {
        self.weights.values().filter(|w| **w != 0.0).count()
    }

    /// Probability for a raw (unstandardized) vector, using the stored
    /// standardization if present.
    pub fn predict_raw(&self, x: &FeatureVector) -> Result<f64, Box<dyn std::error::Error>> {
        let mut z = self.bias;
        for (id, w) in &self.weights {
            let v = x.get(id).ok_or_else(|| ModelError::MissingFeature {
                trace_id: x.trace_id.clone(),
                feature: id.clone(),
            })?;
            let v = match &self.standardization {
                Some(p) => p.apply_value(id, v)?,
                None => v,
            };
            z += w * v;
        }
        Ok(sigmoid(z))
    }

    pub fn classify_raw(&self, x: &FeatureVector) -> Result<Label, Box<dyn std::error::Error>> {
        Ok(label_for(self.predict_raw(x)?, self.threshold))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Event iff `p >= threshold`; a probability exactly at the threshold is an event.
pub fn label_for(p: f64, threshold: f64) -> Label {
    if p >= threshold {
        Label::Event
    } else {
        Label::Noise
    }
}

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// `lambda * (alpha * Σ|β| + (1 - alpha) * Σβ²)` over the given weights.
pub fn penalty(weights: &[f64], cfg: &PenaltyConfig) -> f64 {
    let l1: f64 = weights.iter().map(|w| w.abs()).sum();
    let l2: f64 = weights.iter().map(|w| w * w).sum();
    cfg.lambda * (cfg.alpha * l1 + (1.0 - cfg.alpha) * l2)
}

fn model_penalty(bias: f64, weights: &[f64], cfg: &PenaltyConfig) -> f64 {
    let mut p = penalty(weights, cfg);
    if cfg.penalize_bias {
        p += penalty(&[bias], cfg);
    }
    p
}

fn linear(model: &LinearModel, x: &FeatureVector) -> Result<f64, ModelError> {
    let mut z = model.bias;
    for (id, w) in &model.weights {
        let v = x.get(id).ok_or_else(|| ModelError::MissingFeature {
            trace_id: x.trace_id.clone(),
            feature: id.clone(),
        })?;
        z += w * v;
    }
    Ok(z)
}

/// `sigmoid(bias + Σ w·x)` on an already standardized vector.
pub fn predict_proba(model: &LinearModel, x: &FeatureVector) -> Result<f64, ModelError> {
    Ok(sigmoid(linear(model, x)?))
}

pub fn classify(model: &LinearModel, x: &FeatureVector, threshold: f64) -> Result<Label, ModelError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(ModelError::InvalidThreshold(threshold));
    }
    Ok(label_for(predict_proba(model, x)?, threshold))
}

fn nll_term(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean NLL plus penalty.
pub fn loss(model: &LinearModel, data: &[FeatureVector], cfg: &PenaltyConfig) -> Result<f64, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    let mut nll = 0.0;
    for x in data {
        let p = predict_proba(model, x)?;
        nll += nll_term(p, label_value(x.label));
    }
    let w: Vec<f64> = model.weights.values().copied().collect();
    Ok(nll / data.len() as f64 + model_penalty(model.bias, &w, cfg))
}

fn label_value(l: Label) -> f64 {
    if l.is_event() {
        1.0
    } else {
        0.0
    }
}

/// Column-major design matrix with 0/1 targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub features: Vec<FeatureId>,
    pub columns: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Design {
    pub fn from_vectors(data: &[FeatureVector], features: &[FeatureId]) -> Result<Self, ModelError> {
        let mut columns = vec![Vec::with_capacity(data.len()); features.len()];
        for x in data {
            for (j, id) in features.iter().enumerate() {
                let v = x.get(id).ok_or_else(|| ModelError::MissingFeature {
                    trace_id: x.trace_id.clone(),
                    feature: id.clone(),
                })?;
                columns[j].push(v);
            }
        }
        Ok(Self {
            features: features.to_vec(),
            columns,
            y: data.iter().map(|x| label_value(x.label)).collect(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    fn eta(&self, bias: f64, w: &[f64]) -> Vec<f64> {
        let mut eta = vec![bias; self.n_rows()];
        for (col, &wj) in self.columns.iter().zip(w) {
            if wj != 0.0 {
                for (e, x) in eta.iter_mut().zip(col) {
                    *e += wj * x;
                }
            }
        }
        eta
    }

    /// Mean NLL (clamped) at the given parameters.
    pub fn nll(&self, bias: f64, w: &[f64]) -> f64 {
        let eta = self.eta(bias, w);
        eta.iter()
            .zip(&self.y)
            .map(|(&e, &y)| nll_term(sigmoid(e), y))
            .sum::<f64>()
            / self.n_rows() as f64
    }

    /// Gradient of the mean NLL: (d/d bias, d/d w).
    pub fn nll_gradient(&self, bias: f64, w: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n_rows() as f64;
        let r: Vec<f64> = self
            .eta(bias, w)
            .iter()
            .zip(&self.y)
            .map(|(&e, &y)| sigmoid(e) - y)
            .collect();
        let g0 = r.iter().sum::<f64>() / n;
        let g = self
            .columns
            .iter()
            .map(|c| c.iter().zip(&r).map(|(x, ri)| x * ri).sum::<f64>() / n)
            .collect();
        (g0, g)
    }

    pub fn objective(&self, bias: f64, w: &[f64], cfg: &PenaltyConfig) -> f64 {
        self.nll(bias, w) + model_penalty(bias, w, cfg)
    }
}

/// Result of [`train_design`]: fitted parameters plus the objective after
/// every sweep (index 0 is the starting point).
#[derive(Debug, Clone)]
pub struct Fit {
    pub bias: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

pub fn train_design(
    d: &Design,
    cfg: &PenaltyConfig,
    opt: &TrainOptions,
    trace_objective: bool,
) -> Result<Fit, ModelError> {
    cfg.validate()?;
    if opt.max_iters == 0 || !(opt.tol > 0.0) {
        return Err(ModelError::InvalidOptions(
            "max_iters must be >= 1 and tol > 0".into(),
        ));
    }
    let n = d.n_rows();
    if n == 0 {
        return Err(ModelError::EmptyData);
    }
    let pos = d.y.iter().filter(|&&y| y == 1.0).count();
    if pos == 0 || pos == n {
        return Err(ModelError::DegenerateLabels);
    }
    let nf = n as f64;
    let p = d.columns.len();
    let l1 = cfg.lambda * cfg.alpha;
    let l2 = 2.0 * cfg.lambda * (1.0 - cfg.alpha);
    let curv: Vec<f64> = d
        .columns
        .iter()
        .map(|c| 0.25 * c.iter().map(|x| x * x).sum::<f64>() / nf)
        .collect();

    let mut bias = 0.0;
    let mut w = vec![0.0; p];
    let mut eta = vec![0.0; n];
    let mut resid: Vec<f64> = eta.iter().zip(&d.y).map(|(&e, &y)| sigmoid(e) - y).collect();
    let mut trace = Vec::new();
    if trace_objective {
        trace.push(d.objective(bias, &w, cfg));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opt.max_iters {
        iterations += 1;
        let mut max_delta: f64 = 0.0;

        let g0 = resid.iter().sum::<f64>() / nf;
        let new_bias = if cfg.penalize_bias {
            soft_threshold(0.25 * bias - g0, l1) / (0.25 + l2)
        } else {
            bias - g0 / 0.25
        };
        let delta = new_bias - bias;
        if delta != 0.0 {
            for i in 0..n {
                eta[i] += delta;
                resid[i] = sigmoid(eta[i]) - d.y[i];
            }
            bias = new_bias;
            max_delta = max_delta.max(delta.abs());
        }

        for j in 0..p {
            let col = &d.columns[j];
            let denom = curv[j] + l2;
            if denom <= 0.0 {
                continue;
            }
            let g = col.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / nf;
            let new_w = soft_threshold(curv[j] * w[j] - g, l1) / denom;
            let delta = new_w - w[j];
            if delta != 0.0 {
                for i in 0..n {
                    eta[i] += delta * col[i];
                    resid[i] = sigmoid(eta[i]) - d.y[i];
                }
                w[j] = new_w;
                max_delta = max_delta.max(delta.abs());
            }
        }

        if trace_objective {
            trace.push(d.objective(bias, &w, cfg));
        }
        if max_delta < opt.tol {
            converged = true;
            break;
        }
    }
    Ok(Fit {
        bias,
        weights: w,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Fits on standardized vectors. Non-convergence is reported in
/// `training_meta.converged`, not as an error.
pub fn train(
    data: &[FeatureVector],
    features: &[FeatureId],
    cfg: &PenaltyConfig,
    opt: &TrainOptions,
) -> Result<LinearModel, ModelError> {
    let d = Design::from_vectors(data, features)?;
    let fit = train_design(&d, cfg, opt, false)?;
    Ok(model_from_fit(features, &fit, cfg, opt))
}

pub fn model_from_fit(
    features: &[FeatureId],
    fit: &Fit,
    cfg: &PenaltyConfig,
    opt: &TrainOptions,
) -> LinearModel {
    LinearModel {
        bias: fit.bias,
        weights: features.iter().cloned().zip(fit.weights.iter().copied()).collect(),
        threshold: 0.5,
        standardization: None,
        training_meta: Some(TrainingMeta {
            alpha: cfg.alpha,
            lambda: cfg.lambda,
            penalize_bias: cfg.penalize_bias,
            seed: opt.seed,
            iterations: fit.iterations,
            converged: fit.converged,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn vec_of(trace: &str, label: Label, vals: &[(&str, f64)]) -> FeatureVector {
        FeatureVector {
            trace_id: trace.into(),
            label,
            values: vals.iter().map(|(k, v)| (FeatureId::from(*k), *v)).collect(),
        }
    }

    fn random_design(seed: u64, n: usize, p: usize) -> Design {
        let mut rng = crate::seed::rng(seed);
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let mut y: Vec<f64> = (0..n)
            .map(|i| {
                let z = columns.iter().take(2).map(|c| c[i]).sum::<f64>();
                if rng.random::<f64>() < sigmoid(z) { 1.0 } else { 0.0 }
            })
            .collect();
        y[0] = 1.0;
        y[1] = 0.0;
        Design {
            features: (0..p).map(|j| FeatureId::new(format!("F{j}"))).collect(),
            columns,
            y,
        }
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty(&[0.0, 0.0], &PenaltyConfig::new(0.5, 1.0)), 0.0);
        assert_eq!(penalty(&[1.0, -2.0], &PenaltyConfig::new(0.5, 1.0)), 4.0);
        assert_eq!(penalty(&[3.0, -4.0], &PenaltyConfig::new(1.0, 1.0)), 7.0);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold(-5.0, 2.0), -3.0);
        assert_eq!(soft_threshold(1.0, 2.0), 0.0);
    }

    #[test]
    fn predict_and_classify_examples() {
        let mut m = LinearModel::zeros(&["A".into()]);
        let x0 = vec_of("t", Label::Noise, &[("A", 0.0)]);
        let x = vec_of("t", Label::Noise, &[("A", 3f64.ln())]);
        assert_eq!(predict_proba(&m, &x).unwrap(), 0.5);
        m.weights[0] = 1.0;
        assert_eq!(predict_proba(&m, &x0).unwrap(), 0.5);
        assert!((predict_proba(&m, &x).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(classify(&m, &x0, 0.5).unwrap(), Label::Event);
        assert_eq!(label_for(0.49, 0.5), Label::Noise);
        assert_eq!(label_for(0.9, 0.95), Label::Noise);
        let missing = vec_of("t", Label::Noise, &[("B", 0.0)]);
        assert!(matches!(
            predict_proba(&m, &missing),
            Err(ModelError::MissingFeature { .. })
        ));
    }

    #[test]
    fn loss_examples() {
        let m = LinearModel::zeros(&["A".into()]);
        let data = vec![
            vec_of("a", Label::Event, &[("A", 1.0)]),
            vec_of("b", Label::Noise, &[("A", -1.0)]),
        ];
        let l0 = loss(&m, &data, &PenaltyConfig::new(0.5, 0.0)).unwrap();
        let l10 = loss(&m, &data, &PenaltyConfig::new(0.5, 10.0)).unwrap();
        assert!((l0 - 2f64.ln()).abs() < 1e-15);
        assert_eq!(l0, l10);
        let mut big = m.clone();
        big.weights[0] = 50.0;
        assert!(loss(&big, &data, &PenaltyConfig::new(0.5, 0.0)).unwrap() < 0.01);
    }

    #[test]
    fn separable_pair_is_fit_perfectly() {
        let data = vec![
            vec_of("a", Label::Event, &[("A", 1.0)]),
            vec_of("b", Label::Noise, &[("A", -1.0)]),
        ];
        let m = train(
            &data,
            &["A".into()],
            &PenaltyConfig::new(0.5, 0.0),
            &TrainOptions { max_iters: 500, ..Default::default() },
        )
        .unwrap();
        assert!(!m.training_meta.as_ref().unwrap().converged);
        for x in &data {
            assert_eq!(classify(&m, x, 0.5).unwrap(), x.label);
        }
    }

    #[test]
    fn huge_lambda_gives_log_odds_intercept() {
        let d = random_design(3, 120, 5);
        let fit = train_design(&d, &PenaltyConfig::new(1.0, 1e3), &TrainOptions::default(), false)
            .unwrap();
        assert!(fit.weights.iter().all(|&w| w == 0.0));
        let pos = d.y.iter().sum::<f64>();
        let expect = (pos / (d.n_rows() as f64 - pos)).ln();
        assert!((fit.bias - expect).abs() < 1e-6);
    }

    #[test]
    fn single_class_is_rejected() {
        let data = vec![
            vec_of("a", Label::Event, &[("A", 1.0)]),
            vec_of("b", Label::Event, &[("A", -1.0)]),
        ];
        let r = train(&data, &["A".into()], &PenaltyConfig::default(), &TrainOptions::default());
        assert_eq!(r.unwrap_err(), ModelError::DegenerateLabels);
        assert!(PenaltyConfig::new(1.5, 0.1).validate().is_err());
        assert!(PenaltyConfig::new(0.5, -0.1).validate().is_err());
    }

    #[test]
    fn training_is_bit_deterministic() {
        let d = random_design(11, 80, 4);
        let cfg = PenaltyConfig::new(0.7, 0.02);
        let a = train_design(&d, &cfg, &TrainOptions::default(), false).unwrap();
        let b = train_design(&d, &cfg, &TrainOptions::default(), false).unwrap();
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
        assert!(a.weights.iter().zip(&b.weights).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn penalized_bias_shrinks_toward_zero() {
        let d = random_design(5, 100, 3);
        let mut cfg = PenaltyConfig::new(1.0, 10.0);
        let free = train_design(&d, &cfg, &TrainOptions::default(), false).unwrap();
        cfg.penalize_bias = true;
        let pen = train_design(&d, &cfg, &TrainOptions::default(), false).unwrap();
        assert!(pen.bias.abs() <= free.bias.abs());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn objective_never_increases(seed in 0u64..1000, alpha in 0.0f64..=1.0, lambda in 0.0f64..0.2) {
            let d = random_design(seed, 40, 4);
            let fit = train_design(&d, &PenaltyConfig::new(alpha, lambda),
                &TrainOptions { max_iters: 300, ..Default::default() }, true).unwrap();
            for w in fit.objective_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
            }
        }

        #[test]
        fn scaling_parameters_keeps_decisions(seed in 0u64..1000, c in 1.0f64..50.0) {
            let d = random_design(seed, 30, 3);
            let fit = train_design(&d, &PenaltyConfig::new(0.5, 0.01), &TrainOptions::default(), false).unwrap();
            for i in 0..d.n_rows() {
                let z: f64 = fit.bias + (0..3).map(|j| fit.weights[j] * d.columns[j][i]).sum::<f64>();
                prop_assert_eq!(label_for(sigmoid(z), 0.5), label_for(sigmoid(c * z), 0.5));
            }
        }
    }
}
