//! Confusion matrices, MCC, accuracy and the exact McNemar test.
//!
//! `Label::Event` is the positive class.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::waveform::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn n_pos(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn n_neg(&self) -> u64 {
        self.tn + self.fp
    }
}

pub fn confusion(labels: &[Label], preds: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if labels.len() != preds.len() {
        return Err(EvalError::ShapeMismatch(format!(
            "{} labels vs {} predictions",
            labels.len(),
            preds.len()
        )));
    }
    if labels.is_empty() {
        return Err(EvalError::DegenerateInput("no predictions".into()));
    }
    let mut m = ConfusionMatrix::default();
    for (l, p) in labels.iter().zip(preds) {
        match (l, p) {
            (Label::Event, Label::Event) => m.tp += 1,
            (Label::Noise, Label::Noise) => m.tn += 1,
            (Label::Noise, Label::Event) => m.fp += 1,
            (Label::Event, Label::Noise) => m.fn_ += 1,
        }
    }
    Ok(m)
}

fn nonempty(m: &ConfusionMatrix) -> Result<(), EvalError> {
    if m.total() == 0 {
        return Err(EvalError::DegenerateInput("empty confusion matrix".into()));
    }
    Ok(())
}

/// Matthews correlation coefficient. Numerator and the four-factor product
/// are exact integers; only the final square root is floating point. Any zero
/// factor gives 0.
pub fn mcc(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    nonempty(m)?;
    let (tp, tn, fp, fn_) = (m.tp as i128, m.tn as i128, m.fp as i128, m.fn_ as i128);
    let num = tp * tn - fp * fn_;
    let factors = [
        (m.tp + m.fp) as u128,
        (m.tp + m.fn_) as u128,
        (m.tn + m.fp) as u128,
        (m.tn + m.fn_) as u128,
    ];
    if factors.contains(&0) {
        return Ok(0.0);
    }
    // Two partial products keep each square root argument exact in u128 and
    // well inside f64's integer range for realistic counts.
    let left = factors[0] * factors[1];
    let right = factors[2] * factors[3];
    let den = (left as f64).sqrt() * (right as f64).sqrt();
    Ok((num as f64 / den).clamp(-1.0, 1.0))
}

pub fn accuracy(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    nonempty(m)?;
    Ok((m.tp + m.tn) as f64 / m.total() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// A correct, B wrong.
    pub b: u64,
    /// A wrong, B correct.
    pub c: u64,
    pub p_value: f64,
    pub significant: bool,
}

/// Two-sided exact binomial p-value for the discordant counts, capped at 1.
pub fn mcnemar_exact_p(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let k = b.min(c);
    let ln_half_n = n as f64 * 0.5f64.ln();
    // ln C(n, i) by the running product, then log-sum-exp over the tail.
    let mut ln_terms = Vec::with_capacity(k as usize + 1);
    let mut ln_binom = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_binom += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        ln_terms.push(ln_binom + ln_half_n);
    }
    let top = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = top.exp() * ln_terms.iter().map(|t| (t - top).exp()).sum::<f64>();
    (2.0 * tail).min(1.0)
}

pub fn mcnemar_test(
    labels: &[Label],
    preds_a: &[Label],
    preds_b: &[Label],
    level: f64,
) -> Result<McNemarResult, EvalError> {
    if labels.len() != preds_a.len() || labels.len() != preds_b.len() {
        return Err(EvalError::ShapeMismatch(format!(
            "{} labels, {} and {} predictions",
            labels.len(),
            preds_a.len(),
            preds_b.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(EvalError::DegenerateInput(format!("level {level} outside (0, 1)")));
    }
    let (mut b, mut c) = (0u64, 0u64);
    for ((l, a), bb) in labels.iter().zip(preds_a).zip(preds_b) {
        match (a == l, bb == l) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    let p_value = mcnemar_exact_p(b, c);
    Ok(McNemarResult {
        b,
        c,
        p_value,
        significant: p_value <= level,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub matrix: ConfusionMatrix,
    pub mcc: f64,
    pub accuracy: f64,
    pub n_pos: u64,
    pub n_neg: u64,
    /// Noise examples per event example.
    pub noise_ratio: f64,
}

impl EvalReport {
    pub fn from_matrix(matrix: ConfusionMatrix) -> Result<Self, EvalError> {
        let n_pos = matrix.n_pos();
        let n_neg = matrix.n_neg();
        Ok(Self {
            mcc: mcc(&matrix)?,
            accuracy: accuracy(&matrix)?,
            n_pos,
            n_neg,
            noise_ratio: if n_pos == 0 {
                f64::INFINITY
            } else {
                n_neg as f64 / n_pos as f64
            },
            matrix,
        })
    }

    pub fn from_predictions(labels: &[Label], preds: &[Label]) -> Result<Self, EvalError> {
        Self::from_matrix(confusion(labels, preds)?)
    }
}
