//! Ratio sweep: fixed predictors evaluated on datasets with a growing
//! noise:event ratio. Predictors are never retrained per ratio.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

use super::ratio::{build_ratio_dataset, RatioError, RatioSpec};
use crate::eval::{EvalError, EvalReport};
use crate::features::FeatureVector;
use crate::model::LinearModel;
use crate::waveform::Label;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Ratio(#[from] RatioError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("predictor {predictor}: {message}")]
    Predictor { predictor: String, message: String },
    #[error("duplicate predictor name {0}")]
    DuplicateName(String),
}

#[derive(Debug, Clone)]
pub enum Predictor {
    Model { name: String, model: LinearModel },
    /// Labels from an outside system, keyed by trace id.
    External {
        name: String,
        preds: IndexMap<String, Label>,
    },
}

impl Predictor {
    pub fn name(&self) -> &str {
        match self {
            Predictor::Model { name, .. } | Predictor::External { name, .. } => name,
        }
    }

    fn predict(&self, x: &FeatureVector) -> Result<Label, SweepError> {
        let err = |message: String| SweepError::Predictor {
            predictor: self.name().to_string(),
            message,
        };
        match self {
            Predictor::Model { model, .. } => model.classify_raw(x).map_err(|e| err(e.to_string())),
            Predictor::External { preds, .. } => preds
                .get(&x.trace_id)
                .copied()
                .ok_or_else(|| err(format!("no prediction for {}", x.trace_id))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub predictor: String,
    pub ratio: f64,
    pub n_pos: usize,
    pub n_noise: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub ratios: Vec<f64>,
    pub predictors: Vec<String>,
    /// Ratio-major: all predictors at the first ratio, then the next.
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn mcc(&self, predictor: &str, ratio_index: usize) -> Option<f64> {
        let p = self.predictors.iter().position(|n| n == predictor)?;
        self.rows
            .get(ratio_index * self.predictors.len() + p)
            .map(|r| r.report.mcc)
    }

    /// MCC series for one predictor in ratio order.
    pub fn mcc_series(&self, predictor: &str) -> Vec<f64> {
        (0..self.ratios.len())
            .filter_map(|i| self.mcc(predictor, i))
            .collect()
    }

    /// Predictor × ratio grid of MCC values.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("predictor");
        for r in &self.ratios {
            let _ = write!(s, ",{r}");
        }
        s.push('\n');
        for p in &self.predictors {
            s.push_str(p);
            for v in self.mcc_series(p) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let w = self.predictors.iter().map(|p| p.len()).max().unwrap_or(0).max(9);
        let mut s = format!("{:<w$}", "MCC");
        for r in &self.ratios {
            let _ = write!(s, " {:>8}", format!("{r}:1"));
        }
        s.push('\n');
        for p in &self.predictors {
            let _ = write!(s, "{p:<w$}");
            for v in self.mcc_series(p) {
                let _ = write!(s, " {v:>8.3}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn sweep(
    predictors: &[Predictor],
    positives: &[FeatureVector],
    noise_pool: &[FeatureVector],
    spec: &RatioSpec,
) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let mut names = Vec::with_capacity(predictors.len());
    for p in predictors {
        if names.iter().any(|n: &String| n == p.name()) {
            return Err(SweepError::DuplicateName(p.name().into()));
        }
        names.push(p.name().to_string());
    }
    // Every item is scored once; ratio datasets only pick subsets.
    let all: Vec<&FeatureVector> = positives.iter().chain(noise_pool).collect();
    let mut cache: Vec<HashMap<&str, Label>> = Vec::with_capacity(predictors.len());
    for p in predictors {
        let mut m = HashMap::with_capacity(all.len());
        for x in &all {
            m.insert(x.trace_id.as_str(), p.predict(x)?);
        }
        cache.push(m);
    }
    let pos_idx: Vec<usize> = (0..positives.len()).collect();
    let pool_idx: Vec<usize> = (positives.len()..all.len()).collect();
    let mut rows = Vec::with_capacity(spec.ratios.len() * predictors.len());
    for &ratio in &spec.ratios {
        let ds = build_ratio_dataset(&pos_idx, &pool_idx, ratio, spec.seed)?;
        let labels: Vec<Label> = ds.items.iter().map(|&i| all[i].label).collect();
        for (p, m) in names.iter().zip(&cache) {
            let preds: Vec<Label> = ds
                .items
                .iter()
                .map(|&i| m[all[i].trace_id.as_str()])
                .collect();
            rows.push(SweepRow {
                predictor: p.clone(),
                ratio,
                n_pos: ds.n_pos,
                n_noise: ds.n_noise,
                report: EvalReport::from_predictions(&labels, &preds)?,
            });
        }
    }
    Ok(SweepTable {
        ratios: spec.ratios.clone(),
        predictors: names,
        rows,
    })
}
