//! Ensemble feature discovery.
//!
//! Many elastic-net fits are run with per-run variation, the runs sharing the
//! best validation MCC form the tie-set, per-feature weight statistics are
//! summarized over the tie-set, and a two-threshold rule turns those
//! statistics into a feature set.
//!
//! Variation axes:
//! * `lambda_grid`: run `r` uses `lambda_grid[r % len]`.
//! * `subsample`: run `r` trains on a seeded draw, without replacement, of
//!   `subsample_fraction` of the training rows.
//! * `seed`: run `r` is trained under its own derived seed. The solver starts
//!   from zero and is deterministic, so this axis alone changes nothing.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

use crate::eval::{confusion, mcc};
use crate::features::{FeatureId, FeatureVector};
use crate::model::{self, label_for, Design, ModelError, PenaltyConfig, TrainOptions};
use crate::seed;
use crate::waveform::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("invalid ensemble config: {0}")]
    InvalidConfig(String),
    #[error("run {run_id}: {source}")]
    Run {
        run_id: usize,
        #[source]
        source: ModelError,
    },
    #[error("validation set: {0}")]
    Validation(String),
    #[error("empty input: {0}")]
    Empty(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VaryAxes {
    pub seed: bool,
    pub lambda_grid: bool,
    pub subsample: bool,
}

impl Default for VaryAxes {
    fn default() -> Self {
        Self {
            seed: false,
            lambda_grid: true,
            subsample: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_runs: usize,
    pub vary: VaryAxes,
    pub alpha: f64,
    /// Used when the λ grid axis is off.
    pub lambda: f64,
    pub lambda_grid: Vec<f64>,
    pub subsample_fraction: f64,
    pub tie_tolerance: f64,
    pub threshold: f64,
    pub penalize_bias: bool,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_runs: 200,
            vary: VaryAxes::default(),
            alpha: 0.9,
            lambda: 0.05,
            lambda_grid: log_grid(0.02, 0.5, 10),
            subsample_fraction: 0.8,
            tie_tolerance: 0.0,
            threshold: 0.5,
            penalize_bias: false,
            max_iters: 10_000,
            tol: 1e-8,
            seed: 0,
        }
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), SelectionError> {
        let bad = |m: String| Err(SelectionError::InvalidConfig(m));
        if self.n_runs == 0 {
            return bad("n_runs must be >= 1".into());
        }
        if !(self.tie_tolerance >= 0.0) {
            return bad("tie_tolerance must be >= 0".into());
        }
        if self.vary.lambda_grid && self.lambda_grid.is_empty() {
            return bad("lambda_grid must be non-empty when varied".into());
        }
        if self.lambda_grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return bad("lambda_grid entries must be finite and >= 0".into());
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return bad("subsample_fraction must be in (0, 1]".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad("threshold must be in (0, 1)".into());
        }
        PenaltyConfig::new(self.alpha, self.lambda)
            .validate()
            .map_err(|e| SelectionError::InvalidConfig(e.to_string()))
    }

    fn options(&self, seed: u64) -> TrainOptions {
        TrainOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfigUsed {
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    /// Training rows used, when subsampled.
    pub subsample_size: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRunResult {
    pub run_id: usize,
    pub bias: f64,
    pub weights: IndexMap<FeatureId, f64>,
    pub val_mcc: f64,
    pub config_used: RunConfigUsed,
}

/// Trains `cfg.n_runs` models on standardized `train` and scores each on
/// standardized `val`. Results are in run order.
pub fn run_ensemble(
    train: &[FeatureVector],
    val: &[FeatureVector],
    features: &[FeatureId],
    cfg: &EnsembleConfig,
) -> Result<Vec<EnsembleRunResult>, SelectionError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(SelectionError::Empty("training set".into()));
    }
    if val.is_empty() {
        return Err(SelectionError::Empty("validation set".into()));
    }
    let full = Design::from_vectors(train, features)
        .map_err(|source| SelectionError::Run { run_id: 0, source })?;
    let val_design =
        Design::from_vectors(val, features).map_err(|e| SelectionError::Validation(e.to_string()))?;
    let val_labels: Vec<Label> = val.iter().map(|v| v.label).collect();
    let sub_stage = seed::stage_seed(cfg.seed, "ensemble.subsample");
    let run_stage = seed::stage_seed(cfg.seed, "ensemble.run");
    let keep = ((cfg.subsample_fraction * train.len() as f64).floor() as usize).max(2);

    let mut out = Vec::with_capacity(cfg.n_runs);
    for run_id in 0..cfg.n_runs {
        let lambda = if cfg.vary.lambda_grid {
            cfg.lambda_grid[run_id % cfg.lambda_grid.len()]
        } else {
            cfg.lambda
        };
        let run_seed = if cfg.vary.seed {
            seed::indexed_seed(run_stage, run_id as u64)
        } else {
            cfg.seed
        };
        let (design, subsample_size) = if cfg.vary.subsample && keep < train.len() {
            let mut idx: Vec<usize> = (0..train.len()).collect();
            idx.shuffle(&mut seed::rng(seed::indexed_seed(sub_stage, run_id as u64)));
            idx.truncate(keep);
            idx.sort_unstable();
            (subset(&full, &idx), Some(keep))
        } else {
            (full.clone(), None)
        };
        let pen = PenaltyConfig {
            alpha: cfg.alpha,
            lambda,
            penalize_bias: cfg.penalize_bias,
        };
        let fit = model::train_design(&design, &pen, &cfg.options(run_seed), false)
            .map_err(|source| SelectionError::Run { run_id, source })?;
        let preds: Vec<Label> = (0..val_design.n_rows())
            .map(|i| {
                let z = fit.bias
                    + val_design
                        .columns
                        .iter()
                        .zip(&fit.weights)
                        .map(|(c, w)| w * c[i])
                        .sum::<f64>();
                label_for(model::sigmoid(z), cfg.threshold)
            })
            .collect();
        let val_mcc = confusion(&val_labels, &preds)
            .and_then(|m| mcc(&m))
            .map_err(|e| SelectionError::Validation(e.to_string()))?;
        out.push(EnsembleRunResult {
            run_id,
            bias: fit.bias,
            weights: features.iter().cloned().zip(fit.weights).collect(),
            val_mcc,
            config_used: RunConfigUsed {
                alpha: cfg.alpha,
                lambda,
                seed: run_seed,
                subsample_size,
                iterations: fit.iterations,
                converged: fit.converged,
            },
        });
    }
    Ok(out)
}

fn subset(d: &Design, rows: &[usize]) -> Design {
    Design {
        features: d.features.clone(),
        columns: d
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect(),
        y: rows.iter().map(|&i| d.y[i]).collect(),
    }
}

/// Runs with `val_mcc >= max - tie_tolerance`, ordered by run id.
pub fn best_models(results: &[EnsembleRunResult], tie_tolerance: f64) -> Vec<EnsembleRunResult> {
    let Some(best) = results.iter().map(|r| r.val_mcc).reduce(f64::max) else {
        return Vec::new();
    };
    let mut tie: Vec<EnsembleRunResult> = results
        .iter()
        .filter(|r| r.val_mcc >= best - tie_tolerance)
        .cloned()
        .collect();
    tie.sort_by_key(|r| r.run_id);
    tie
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub mean_abs: f64,
    pub median_abs: f64,
    pub fraction_nonzero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pub n_models: usize,
    pub features: IndexMap<FeatureId, WeightStats>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn weight_distributions(
    tie_set: &[EnsembleRunResult],
) -> Result<WeightDistribution, SelectionError> {
    let first = tie_set
        .first()
        .ok_or_else(|| SelectionError::Empty("tie-set".into()))?;
    let n = tie_set.len() as f64;
    let mut features = IndexMap::new();
    for id in first.weights.keys() {
        let mut w: Vec<f64> = tie_set
            .iter()
            .map(|r| r.weights.get(id).copied().unwrap_or(0.0))
            .collect();
        let mut abs: Vec<f64> = w.iter().map(|v| v.abs()).collect();
        let stats = WeightStats {
            min: w.iter().copied().fold(f64::INFINITY, f64::min),
            max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_abs: abs.iter().sum::<f64>() / n,
            fraction_nonzero: w.iter().filter(|v| **v != 0.0).count() as f64 / n,
            median: median(&mut w),
            median_abs: median(&mut abs),
        };
        features.insert(id.clone(), stats);
    }
    Ok(WeightDistribution {
        n_models: tie_set.len(),
        features,
    })
}

impl WeightDistribution {
    /// Plot-data table, one row per feature.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("feature,min,max,median,mean_abs,median_abs,fraction_nonzero\n");
        for (id, w) in &self.features {
            let _ = writeln!(
                s,
                "{id},{},{},{},{},{},{}",
                w.min, w.max, w.median, w.mean_abs, w.median_abs, w.fraction_nonzero
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionRule {
    pub min_fraction_nonzero: f64,
    pub min_median_abs: f64,
}

impl Default for SelectionRule {
    fn default() -> Self {
        Self {
            min_fraction_nonzero: 0.9,
            min_median_abs: 0.05,
        }
    }
}

/// Features passing both thresholds, in distribution order, followed by any
/// base features not already included.
pub fn select_features(
    dist: &WeightDistribution,
    rule: &SelectionRule,
    base: &[FeatureId],
) -> Vec<FeatureId> {
    let mut out: Vec<FeatureId> = dist
        .features
        .iter()
        .filter(|(id, s)| {
            base.contains(id)
                || (s.fraction_nonzero >= rule.min_fraction_nonzero
                    && s.median_abs >= rule.min_median_abs
                    && s.fraction_nonzero > 0.0)
        })
        .map(|(id, _)| id.clone())
        .collect();
    for id in base {
        if !out.contains(id) {
            out.push(id.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    pub rule: SelectionRule,
    pub base: Vec<FeatureId>,
    pub runs: Vec<EnsembleRunResult>,
    pub best_mcc: f64,
    pub tie_set: Vec<usize>,
    pub distribution: WeightDistribution,
    pub selected: Vec<FeatureId>,
}

/// The whole workflow: ensemble, tie-set, distribution, selection.
pub fn discover(
    train: &[FeatureVector],
    val: &[FeatureVector],
    features: &[FeatureId],
    cfg: &EnsembleConfig,
    rule: &SelectionRule,
    base: &[FeatureId],
) -> Result<EnsembleReport, SelectionError> {
    let runs = run_ensemble(train, val, features, cfg)?;
    let tie = best_models(&runs, cfg.tie_tolerance);
    let distribution = weight_distributions(&tie)?;
    let selected = select_features(&distribution, rule, base);
    Ok(EnsembleReport {
        config: cfg.clone(),
        rule: *rule,
        base: base.to_vec(),
        best_mcc: tie[0].val_mcc,
        tie_set: tie.iter().map(|r| r.run_id).collect(),
        runs,
        distribution,
        selected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::planted::{planted_corpus, PlantedSpec};
    use proptest::prelude::*;

    fn result(run_id: usize, val_mcc: f64, w: &[(&str, f64)]) -> EnsembleRunResult {
        EnsembleRunResult {
            run_id,
            bias: 0.0,
            weights: w.iter().map(|(k, v)| (FeatureId::from(*k), *v)).collect(),
            val_mcc,
            config_used: RunConfigUsed {
                alpha: 1.0,
                lambda: 0.1,
                seed: 0,
                subsample_size: None,
                iterations: 1,
                converged: true,
            },
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.02, 0.5, 10);
        assert_eq!(g.len(), 10);
        assert!((g[0] - 0.02).abs() < 1e-15 && (g[9] - 0.5).abs() < 1e-15);
        assert!(g.windows(2).all(|w| (w[1] / w[0] - (25f64).powf(1.0 / 9.0)).abs() < 1e-12));
    }

    #[test]
    fn best_models_examples() {
        let r = vec![result(0, 0.9, &[]), result(1, 0.9, &[]), result(2, 0.8, &[])];
        assert_eq!(best_models(&r, 0.0).iter().map(|x| x.run_id).collect::<Vec<_>>(), vec![0, 1]);
        let same = vec![result(0, 0.5, &[]), result(1, 0.5, &[])];
        assert_eq!(best_models(&same, 0.0).len(), 2);
        let r = vec![result(0, 0.90, &[]), result(1, 0.86, &[]), result(2, 0.84, &[])];
        assert_eq!(best_models(&r, 0.05).iter().map(|x| x.run_id).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn distribution_examples() {
        let one = weight_distributions(&[result(0, 1.0, &[("A", 0.3), ("B", -2.0)])]).unwrap();
        let a = one.features[&FeatureId::from("A")];
        assert_eq!((a.min, a.max, a.median), (0.3, 0.3, 0.3));
        let tie = vec![
            result(0, 1.0, &[("A", 1.0), ("Z", 0.0)]),
            result(1, 1.0, &[("A", 0.0), ("Z", 0.0)]),
            result(2, 1.0, &[("A", -1.0), ("Z", 0.0)]),
        ];
        let d = weight_distributions(&tie).unwrap();
        let a = d.features[&FeatureId::from("A")];
        assert_eq!(a.median, 0.0);
        assert!((a.mean_abs - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.features[&FeatureId::from("Z")].fraction_nonzero, 0.0);
        assert!(d.to_csv().starts_with("feature,min,max"));
    }

    #[test]
    fn select_examples() {
        let tie = vec![
            result(0, 1.0, &[("A", 1.0), ("Z", 0.0), ("W1", 0.0)]),
            result(1, 1.0, &[("A", 0.8), ("Z", 0.0), ("W1", 0.0)]),
        ];
        let d = weight_distributions(&tie).unwrap();
        let sel = select_features(&d, &SelectionRule::default(), &["W1".into()]);
        assert_eq!(sel, vec![FeatureId::from("A"), "W1".into()]);
        let strict = SelectionRule { min_fraction_nonzero: 0.0, min_median_abs: 0.0 };
        assert!(!select_features(&d, &strict, &[]).contains(&"Z".into()));
    }

    #[test]
    fn seed_only_runs_are_identical() {
        let c = planted_corpus(&PlantedSpec { seed: 4, n_train: 120, n_val: 80, ..Default::default() });
        let cfg = EnsembleConfig {
            n_runs: 6,
            vary: VaryAxes { seed: true, lambda_grid: false, subsample: false },
            ..Default::default()
        };
        let runs = run_ensemble(&c.train, &c.val, &c.features, &cfg).unwrap();
        assert_eq!(runs.len(), 6);
        for r in &runs[1..] {
            assert_eq!(r.weights, runs[0].weights);
        }
        assert_eq!(best_models(&runs, 0.0).len(), 6);
    }

    #[test]
    fn single_run_and_determinism() {
        let c = planted_corpus(&PlantedSpec { seed: 8, n_train: 100, n_val: 60, ..Default::default() });
        let cfg = EnsembleConfig { n_runs: 1, ..Default::default() };
        assert_eq!(run_ensemble(&c.train, &c.val, &c.features, &cfg).unwrap().len(), 1);
        let cfg = EnsembleConfig { n_runs: 12, ..Default::default() };
        let rule = SelectionRule::default();
        let a = discover(&c.train, &c.val, &c.features, &cfg, &rule, &[]).unwrap();
        let b = discover(&c.train, &c.val, &c.features, &cfg, &rule, &[]).unwrap();
        assert_eq!(a, b);
        assert!(!a.tie_set.is_empty() && a.tie_set.len() <= 12);
    }

    proptest! {
        #[test]
        fn best_models_permutation_invariant(
            mccs in prop::collection::vec(-1.0f64..=1.0, 1..30), rot in 0usize..30,
        ) {
            let rs: Vec<_> = mccs.iter().enumerate().map(|(i, &m)| result(i, (m * 20.0).round() / 20.0, &[])).collect();
            let mut perm = rs.clone();
            let k = rot % perm.len();
            perm.rotate_left(k);
            perm.reverse();
            prop_assert_eq!(best_models(&rs, 0.0), best_models(&perm, 0.0));
        }

        #[test]
        fn tightening_rule_never_adds(
            ws in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..10),
            f1 in 0.0f64..1.0, f2 in 0.0f64..1.0, m1 in 0.0f64..0.5, m2 in 0.0f64..0.5,
        ) {
            let names = ["A", "B", "C", "D"];
            let tie: Vec<_> = ws.iter().enumerate().map(|(i, w)| {
                let pairs: Vec<(&str, f64)> = names.iter().zip(w).map(|(n, v)| (*n, if v.abs() < 0.3 { 0.0 } else { *v })).collect();
                result(i, 1.0, &pairs)
            }).collect();
            let d = weight_distributions(&tie).unwrap();
            let loose = SelectionRule { min_fraction_nonzero: f1.min(f2), min_median_abs: m1.min(m2) };
            let tight = SelectionRule { min_fraction_nonzero: f1.max(f2), min_median_abs: m1.max(m2) };
            let a = select_features(&d, &loose, &[]);
            for id in select_features(&d, &tight, &[]) {
                prop_assert!(a.contains(&id));
            }
        }
    }
}
