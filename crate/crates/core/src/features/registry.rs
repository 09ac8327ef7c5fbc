use indexmap::IndexMap;
use std::collections::HashMap;
use std::sync::Arc;

use super::{catch22, surrogate, FeatureError, FeatureId, FeatureVector};
use crate::waveform::WaveformRecord;

/// Feature function on the raw series. `None` marks a degenerate input.
pub type FeatureFn = Arc<dyn Fn(&[f64]) -> Option<f64> + Send + Sync>;

#[derive(Clone)]
pub struct FeatureSpec {
    pub id: FeatureId,
    pub name: String,
    /// Shortest accepted series.
    pub min_len: usize,
    /// Whether the value is unchanged by `a·x + b` with `a > 0`.
    pub affine_invariant: bool,
    pub func: FeatureFn,
}

impl std::fmt::Debug for FeatureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeatureSpec")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("min_len", &self.min_len)
            .field("affine_invariant", &self.affine_invariant)
            .finish()
    }
}

/// Ordered, immutable-after-build set of features.
#[derive(Clone, Debug, Default)]
pub struct FeatureRegistry {
    specs: Vec<FeatureSpec>,
    index: HashMap<FeatureId, usize>,
}

impl FeatureRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The 22 catch22 features, C1..C22.
    pub fn canonical() -> Self {
        let mut r = Self::empty();
        r.add_catch22();
        r
    }

    /// W1..W4 surrogates only.
    pub fn surrogates() -> Self {
        let mut r = Self::empty();
        r.add_surrogates();
        r
    }

    /// W1..W4 followed by C1..C22: the 26-input profile.
    pub fn reproduction() -> Self {
        let mut r = Self::empty();
        r.add_surrogates();
        r.add_catch22();
        r
    }

    fn add_catch22(&mut self) {
        for i in 0..22 {
            let spec = FeatureSpec {
                id: FeatureId::from(catch22::CODES[i]),
                name: catch22::NAMES[i].to_string(),
                min_len: catch22::MIN_LEN[i],
                affine_invariant: true,
                func: Arc::new(move |y: &[f64]| catch22::compute(i, y)),
            };
            self.register(spec).expect("catalog codes are unique");
        }
    }

    fn add_surrogates(&mut self) {
        for i in 0..4 {
            let f = surrogate::FUNCS[i];
            let spec = FeatureSpec {
                id: FeatureId::from(surrogate::CODES[i]),
                name: surrogate::NAMES[i].to_string(),
                min_len: surrogate::MIN_LEN[i],
                affine_invariant: surrogate::AFFINE_INVARIANT[i],
                func: Arc::new(f),
            };
            self.register(spec).expect("surrogate codes are unique");
        }
    }

    pub fn register(&mut self, spec: FeatureSpec) -> Result<(), FeatureError> {
        if self.index.contains_key(&spec.id) {
            return Err(FeatureError::DuplicateFeature(spec.id));
        }
        self.index.insert(spec.id.clone(), self.specs.len());
        self.specs.push(spec);
        Ok(())
    }

    pub fn list_features(&self) -> Vec<FeatureId> {
        self.specs.iter().map(|s| s.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn contains(&self, id: &FeatureId) -> bool {
        self.index.contains_key(id)
    }

    pub fn spec(&self, id: &FeatureId) -> Result<&FeatureSpec, FeatureError> {
        self.index
            .get(id)
            .map(|&i| &self.specs[i])
            .ok_or_else(|| FeatureError::UnknownFeature(id.clone()))
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    /// Evaluates one feature. Constant, too-short or non-finite input and
    /// non-finite results are all `DegenerateSeries`.
    pub fn extract_feature(&self, samples: &[f64], id: &FeatureId) -> Result<f64, FeatureError> {
        let spec = self.spec(id)?;
        let degenerate = |reason: &str| FeatureError::DegenerateSeries {
            feature: id.clone(),
            reason: reason.to_string(),
        };
        if samples.len() < spec.min_len {
            return Err(degenerate(&format!(
                "length {} below minimum {}",
                samples.len(),
                spec.min_len
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(degenerate("non-finite sample"));
        }
        if samples.iter().all(|&v| v == samples[0]) {
            return Err(degenerate("constant series"));
        }
        match (spec.func)(samples) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(degenerate("feature undefined for this series")),
        }
    }

    /// Extracts `selected` (in the given order) from a preprocessed record.
    pub fn extract_vector(
        &self,
        record: &WaveformRecord,
        selected: &[FeatureId],
    ) -> Result<FeatureVector, FeatureError> {
        let mut values = IndexMap::with_capacity(selected.len());
        for id in selected {
            let v = self
                .extract_feature(&record.samples, id)
                .map_err(|e| FeatureError::Trace {
                    trace_id: record.trace_id.clone(),
                    source: Box::new(e),
                })?;
            values.insert(id.clone(), v);
        }
        Ok(FeatureVector {
            trace_id: record.trace_id.clone(),
            label: record.label,
            values,
        })
    }
}
