//! Feature-matrix CSV: `trace_id,label,partition,<codes...>`.
//!
//! Floats are written in shortest round-trip form, so a write/read cycle is
//! lossless. `partition` may be empty.

use std::path::Path;
use thiserror::Error;

use super::{FeatureId, FeatureVector};
use crate::waveform::Label;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub vector: FeatureVector,
    pub partition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub feature_ids: Vec<FeatureId>,
    pub rows: Vec<FeatureRow>,
}

const FIXED: [&str; 3] = ["trace_id", "label", "partition"];

impl FeatureTable {
    pub fn vectors(&self) -> Vec<FeatureVector> {
        self.rows.iter().map(|r| r.vector.clone()).collect()
    }

    pub fn partition(&self, name: &str) -> Vec<FeatureVector> {
        self.rows
            .iter()
            .filter(|r| r.partition.as_deref() == Some(name))
            .map(|r| r.vector.clone())
            .collect()
    }

    /// Keeps only `keep`, in that order.
    pub fn project(&self, keep: &[FeatureId]) -> Result<FeatureTable, String> {
        for id in keep {
            if !self.feature_ids.contains(id) {
                return Err(format!("feature {id} not in table"));
            }
        }
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureRow {
                vector: FeatureVector {
                    trace_id: r.vector.trace_id.clone(),
                    label: r.vector.label,
                    values: keep
                        .iter()
                        .map(|id| (id.clone(), r.vector.values[id]))
                        .collect(),
                },
                partition: r.partition.clone(),
            })
            .collect();
        Ok(FeatureTable {
            feature_ids: keep.to_vec(),
            rows,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), TableError> {
        let p = path.display().to_string();
        let err = |source| TableError::Csv {
            path: p.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        let mut header: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
        header.extend(self.feature_ids.iter().map(|f| f.0.clone()));
        w.write_record(&header).map_err(err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.vector.trace_id.clone(),
                row.vector.label.to_string(),
                row.partition.clone().unwrap_or_default(),
            ];
            for id in &self.feature_ids {
                rec.push(format!("{}", row.vector.values[id]));
            }
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| err(e.into()))
    }

    pub fn read_csv(path: &Path) -> Result<FeatureTable, TableError> {
        let p = path.display().to_string();
        let err = |source| TableError::Csv {
            path: p.clone(),
            source,
        };
        let fmt = |line: usize, message: String| TableError::Format {
            path: p.clone(),
            line,
            message,
        };
        let mut r = csv::Reader::from_path(path).map_err(err)?;
        let header = r.headers().map_err(err)?.clone();
        if header.len() < 3 || header.iter().take(3).ne(FIXED.iter().copied()) {
            return Err(fmt(1, "header must start with trace_id,label,partition".into()));
        }
        let feature_ids: Vec<FeatureId> = header.iter().skip(3).map(FeatureId::from).collect();
        let mut seen = std::collections::HashSet::new();
        for id in &feature_ids {
            if !seen.insert(id.clone()) {
                return Err(fmt(1, format!("duplicate column {id}")));
            }
        }
        let mut rows = Vec::new();
        let mut trace_ids = std::collections::HashSet::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(err)?;
            let trace_id = rec[0].to_string();
            if !trace_ids.insert(trace_id.clone()) {
                return Err(fmt(line, format!("duplicate trace_id {trace_id}")));
            }
            let label: Label = rec[1].parse().map_err(|e: String| fmt(line, e))?;
            let partition = (!rec[2].is_empty()).then(|| rec[2].to_string());
            let mut values = indexmap::IndexMap::with_capacity(feature_ids.len());
            for (j, id) in feature_ids.iter().enumerate() {
                let v: f64 = rec[j + 3]
                    .parse()
                    .map_err(|e| fmt(line, format!("column {id}: {e}")))?;
                if !v.is_finite() {
                    return Err(fmt(line, format!("column {id}: non-finite value")));
                }
                values.insert(id.clone(), v);
            }
            rows.push(FeatureRow {
                vector: FeatureVector {
                    trace_id,
                    label,
                    values,
                },
                partition,
            });
        }
        Ok(FeatureTable { feature_ids, rows })
    }
}
