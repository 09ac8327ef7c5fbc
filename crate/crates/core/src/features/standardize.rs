//! Z-score standardization. The std is the population estimator (divide by
//! n), so applying fitted params to their own data gives unit variance under
//! the same convention.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureId, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub columns: IndexMap<FeatureId, ColumnStats>,
}

impl StandardizationParams {
    pub fn get(&self, id: &FeatureId) -> Result<ColumnStats, FeatureError> {
        self.columns
            .get(id)
            .copied()
            .ok_or_else(|| FeatureError::MissingParams(id.clone()))
    }

    pub fn apply_value(&self, id: &FeatureId, v: f64) -> Result<f64, FeatureError> {
        let s = self.get(id)?;
        Ok((v - s.mean) / s.std)
    }
}

/// Fits per-feature mean and population std over the features of the first
/// vector. Every feature must vary across the collection.
pub fn standardize_fit(rows: &[FeatureVector]) -> Result<StandardizationParams, FeatureError> {
    let first = rows.first().ok_or(FeatureError::EmptyCollection)?;
    let mut columns = IndexMap::new();
    let mut constant = Vec::new();
    for id in first.values.keys() {
        let mut col = Vec::with_capacity(rows.len());
        for r in rows {
            col.push(r.get(id).ok_or_else(|| FeatureError::MissingValue {
                trace_id: r.trace_id.clone(),
                feature: id.clone(),
            })?);
        }
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if col.iter().all(|&v| v == col[0]) || !(std > 0.0) {
            constant.push(id.clone());
            continue;
        }
        columns.insert(id.clone(), ColumnStats { mean, std });
    }
    if !constant.is_empty() {
        return Err(FeatureError::ZeroVariance(constant));
    }
    Ok(StandardizationParams { columns })
}

pub fn standardize_apply(
    rows: &[FeatureVector],
    params: &StandardizationParams,
) -> Result<Vec<FeatureVector>, FeatureError> {
    rows.iter()
        .map(|r| {
            let mut values = IndexMap::with_capacity(r.values.len());
            for (id, &v) in &r.values {
                values.insert(id.clone(), params.apply_value(id, v)?);
            }
            Ok(FeatureVector {
                trace_id: r.trace_id.clone(),
                label: r.label,
                values,
            })
        })
        .collect()
}
