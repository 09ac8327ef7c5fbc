//! TOML run configuration. Every section is optional; missing fields take
//! library defaults. All stage seeds derive from `master_seed`.

use anyhow::{bail, Context, Result};
use quakelr::bench::{RatioSpec, SplitSpec, SyntheticSpec};
use quakelr::seed::stage_seed;
use quakelr::selection::{EnsembleConfig, SelectionRule};
use quakelr::waveform::WaveformError;
use quakelr::{FeatureId, FeatureRegistry, PenaltyConfig, PreprocessConfig};
use serde::Deserialize;
use std::path::Path;

pub const TEST_PARTITION: &str = "test";

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub synth: SyntheticSpec,
    /// Extra noise-only corpus for the ratio sweep.
    pub pool: SyntheticSpec,
    pub preprocess: PreprocessConfig,
    pub split: SplitSpec,
    pub extract: ExtractConfig,
    pub select: SelectConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub sweep: RatioSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            synth: SyntheticSpec::default(),
            pool: SyntheticSpec {
                n_noise: 40_000,
                id_prefix: "P".into(),
                ..SyntheticSpec::default()
            },
            preprocess: PreprocessConfig::default(),
            split: SplitSpec::default(),
            extract: ExtractConfig::default(),
            select: SelectConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
            sweep: RatioSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    /// `reproduction` (W1-W4 + C1-C22), `canonical`, `surrogates`, or
    /// ignored when `features` is set.
    pub profile: String,
    pub features: Option<Vec<String>>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            profile: "reproduction".into(),
            features: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfig {
    pub ensemble: EnsembleConfig,
    pub rule: SelectionRule,
    /// Always kept.
    pub base: Vec<String>,
    pub train_partition: String,
    pub validation_partition: String,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            ensemble: EnsembleConfig::default(),
            rule: SelectionRule::default(),
            base: ["W1", "W2", "W3", "W4"].map(String::from).to_vec(),
            train_partition: "train".into(),
            validation_partition: "validation".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub penalize_bias: bool,
    pub max_iters: usize,
    pub tol: f64,
    pub threshold: f64,
    pub partition: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let p = PenaltyConfig::default();
        Self {
            alpha: p.alpha,
            lambda: p.lambda,
            penalize_bias: p.penalize_bias,
            max_iters: 10_000,
            tol: 1e-8,
            threshold: 0.5,
            partition: "train".into(),
        }
    }
}

impl TrainConfig {
    pub fn penalty(&self) -> PenaltyConfig {
        PenaltyConfig {
            alpha: self.alpha,
            lambda: self.lambda,
            penalize_bias: self.penalize_bias,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub partition: String,
    pub significance: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            partition: TEST_PARTITION.into(),
            significance: 0.05,
        }
    }
}

fn inner(e: WaveformError) -> String {
    match e {
        WaveformError::InvalidConfig(m) => m,
        other => other.to_string(),
    }
}

fn no_seed(section: &str, seed: u64) -> Result<()> {
    if seed != 0 {
        bail!("{section}.seed: stage seeds derive from master_seed; set master_seed instead");
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: Option<&Path>, seed_override: Option<u64>) -> Result<Self> {
        let mut cfg: RunConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        cfg.validate()
            .with_context(|| match path {
                Some(p) => format!("invalid config {}", p.display()),
                None => "invalid default config".into(),
            })?;
        if let Some(s) = seed_override {
            cfg.master_seed = s;
        }
        cfg.derive_seeds();
        Ok(cfg)
    }

    fn derive_seeds(&mut self) {
        let m = self.master_seed;
        self.synth.seed = stage_seed(m, "synth");
        self.pool.seed = stage_seed(m, "pool");
        self.split.seed = stage_seed(m, "split");
        self.select.ensemble.seed = stage_seed(m, "select");
        self.sweep.seed = stage_seed(m, "sweep");
    }

    pub fn train_seed(&self) -> u64 {
        stage_seed(self.master_seed, "train")
    }

    pub fn validate(&self) -> Result<()> {
        no_seed("synth", self.synth.seed)?;
        no_seed("pool", self.pool.seed)?;
        no_seed("split", self.split.seed)?;
        no_seed("select.ensemble", self.select.ensemble.seed)?;
        no_seed("sweep", self.sweep.seed)?;
        self.synth.validate().map_err(|e| anyhow::anyhow!("synth.{}", inner(e)))?;
        self.pool.validate().map_err(|e| anyhow::anyhow!("pool.{}", inner(e)))?;
        if self.pool.id_prefix.is_empty() || self.pool.id_prefix == self.synth.id_prefix {
            bail!("pool.id_prefix: must be non-empty and differ from synth.id_prefix");
        }
        let p = &self.preprocess;
        if p.filter_order == 0 {
            bail!("preprocess.filter_order: must be >= 1");
        }
        if p.downsample_factor == 0 {
            bail!("preprocess.downsample_factor: must be >= 1");
        }
        if !(p.band_low_hz > 0.0 && p.band_low_hz < p.band_high_hz) {
            bail!("preprocess.band_low_hz/band_high_hz: need 0 < low < high");
        }
        if p.window_len == Some(0) {
            bail!("preprocess.window_len: must be >= 1");
        }
        for (name, spec) in [("synth", &self.synth), ("pool", &self.pool)] {
            p.validate(spec.fs).map_err(|e| anyhow::anyhow!("preprocess (against {name}.fs): {e}"))?;
            if let Some(w) = p.window_len {
                let have = spec.window_len.div_ceil(p.downsample_factor);
                if w > have {
                    bail!("preprocess.window_len: {w} exceeds the {have} samples {name} traces have after decimation");
                }
            }
        }
        self.split
            .validate()
            .map_err(|e| anyhow::anyhow!("split: {e}"))?;
        self.extract_features().context("extract")?;
        self.select
            .ensemble
            .validate()
            .map_err(|e| anyhow::anyhow!("select.ensemble: {e}"))?;
        let r = &self.select.rule;
        if !(0.0..=1.0).contains(&r.min_fraction_nonzero) || !(r.min_median_abs >= 0.0) {
            bail!("select.rule: min_fraction_nonzero must lie in [0, 1] and min_median_abs >= 0");
        }
        let reg = FeatureRegistry::reproduction();
        for b in &self.select.base {
            if !reg.contains(&FeatureId::from(b.as_str())) {
                bail!("select.base: unknown feature {b}");
            }
        }
        for (field, part) in [
            ("select.train_partition", &self.select.train_partition),
            ("select.validation_partition", &self.select.validation_partition),
            ("train.partition", &self.train.partition),
        ] {
            if part == TEST_PARTITION {
                bail!("{field}: the test partition may not be read during training or selection");
            }
        }
        if self.select.train_partition == self.select.validation_partition {
            bail!("select.validation_partition: must differ from select.train_partition");
        }
        self.train
            .penalty()
            .validate()
            .map_err(|e| anyhow::anyhow!("train: {e}"))?;
        if self.train.max_iters == 0 || !(self.train.tol > 0.0) {
            bail!("train.max_iters/tol: need max_iters >= 1 and tol > 0");
        }
        if !(self.train.threshold > 0.0 && self.train.threshold < 1.0) {
            bail!("train.threshold: must lie in (0, 1)");
        }
        if !(self.eval.significance > 0.0 && self.eval.significance < 1.0) {
            bail!("eval.significance: must lie in (0, 1)");
        }
        self.sweep
            .validate()
            .map_err(|e| anyhow::anyhow!("sweep.ratios: {e}"))?;
        Ok(())
    }

    /// Feature ids named by the `[extract]` section.
    pub fn extract_features(&self) -> Result<Vec<FeatureId>> {
        let reg = FeatureRegistry::reproduction();
        if let Some(list) = &self.extract.features {
            if list.is_empty() {
                bail!("features: must name at least one feature");
            }
            let ids: Vec<FeatureId> = list.iter().map(|s| FeatureId::from(s.as_str())).collect();
            for id in &ids {
                if !reg.contains(id) {
                    bail!("features: unknown feature {id}");
                }
            }
            return Ok(ids);
        }
        Ok(match self.extract.profile.as_str() {
            "reproduction" => reg.list_features(),
            "canonical" => FeatureRegistry::canonical().list_features(),
            "surrogates" => FeatureRegistry::surrogates().list_features(),
            other => bail!("profile: unknown profile {other:?} (reproduction, canonical, surrogates)"),
        })
    }
}
