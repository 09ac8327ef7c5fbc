//! Feature catalog, registry, extraction and standardization.

pub mod catch22;
pub mod io;
mod registry;
mod standardize;
pub mod surrogate;

pub use registry::{FeatureFn, FeatureRegistry, FeatureSpec};
pub use standardize::{standardize_apply, standardize_fit, ColumnStats, StandardizationParams};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::waveform::Label;

/// Feature code such as `C10` or `W2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureId(pub String);

impl FeatureId {
    pub fn new(code: impl Into<String>) -> Self {
        Self(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FeatureId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

pub fn ids(codes: &[&str]) -> Vec<FeatureId> {
    codes.iter().map(|&c| FeatureId::from(c)).collect()
}

/// Extracted statistics of one trace, in extraction order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub trace_id: String,
    pub label: Label,
    pub values: IndexMap<FeatureId, f64>,
}

impl FeatureVector {
    pub fn get(&self, id: &FeatureId) -> Option<f64> {
        self.values.get(id).copied()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("degenerate series for {feature}: {reason}")]
    DegenerateSeries { feature: FeatureId, reason: String },
    #[error("unknown feature {0}")]
    UnknownFeature(FeatureId),
    #[error("feature {0} registered twice")]
    DuplicateFeature(FeatureId),
    #[error("zero variance in feature(s) {}", join(.0))]
    ZeroVariance(Vec<FeatureId>),
    #[error("no standardization parameters for feature {0}")]
    MissingParams(FeatureId),
    #[error("feature {feature} missing from vector {trace_id}")]
    MissingValue { trace_id: String, feature: FeatureId },
    #[error("empty feature collection")]
    EmptyCollection,
    #[error("trace {trace_id}: {source}")]
    Trace {
        trace_id: String,
        #[source]
        source: Box<FeatureError>,
    },
}

fn join(ids: &[FeatureId]) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
}
