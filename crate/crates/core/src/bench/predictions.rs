//! External predictor output.
//!
//! CSV with a `trace_id` column and either a `label` column (`event`/`noise`
//! or `1`/`0`) or a `probability` column. Probabilities are thresholded at
//! 0.5 unless a `threshold` column gives a per-row value. Ids outside the
//! expected set are ignored.

use indexmap::IndexMap;
use std::path::Path;
use thiserror::Error;

use crate::model::label_for;
use crate::waveform::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Row {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: duplicate trace ids {ids:?}")]
    Duplicate { path: String, ids: Vec<String> },
    #[error("{path}: missing predictions for {} trace ids: {ids:?}", ids.len())]
    Missing { path: String, ids: Vec<String> },
}

enum Column {
    Label(usize),
    Probability(usize),
}

pub fn parse_predictions(
    text: &str,
    path: &str,
    expected: &[String],
) -> Result<IndexMap<String, Label>, IngestError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| IngestError::Format {
            path: path.into(),
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let tid = find("trace_id").ok_or_else(|| IngestError::Format {
        path: path.into(),
        message: "missing trace_id column".into(),
    })?;
    let col = match (find("label"), find("probability")) {
        (Some(i), _) => Column::Label(i),
        (None, Some(i)) => Column::Probability(i),
        _ => {
            return Err(IngestError::Format {
                path: path.into(),
                message: "need a label or probability column".into(),
            })
        }
    };
    let thr_col = find("threshold");
    let row_err = |line, message| IngestError::Row {
        path: path.into(),
        line,
        message,
    };
    let mut seen: IndexMap<String, Label> = IndexMap::new();
    let mut dups = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| row_err(line, e.to_string()))?;
        let id = rec.get(tid).unwrap_or_default().to_string();
        let label = match col {
            Column::Label(j) => rec
                .get(j)
                .unwrap_or_default()
                .parse::<Label>()
                .map_err(|e| row_err(line, e))?,
            Column::Probability(j) => {
                let p: f64 = rec
                    .get(j)
                    .unwrap_or_default()
                    .parse()
                    .map_err(|e| row_err(line, format!("probability: {e}")))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(row_err(line, format!("probability {p} outside [0, 1]")));
                }
                let threshold = match thr_col {
                    Some(k) => rec
                        .get(k)
                        .unwrap_or_default()
                        .parse::<f64>()
                        .ok()
                        .filter(|t| *t > 0.0 && *t < 1.0)
                        .ok_or_else(|| row_err(line, "threshold must be a number in (0, 1)".into()))?,
                    None => 0.5,
                };
                label_for(p, threshold)
            }
        };
        if seen.insert(id.clone(), label).is_some() {
            dups.push(id);
        }
    }
    if !dups.is_empty() {
        dups.sort();
        dups.dedup();
        return Err(IngestError::Duplicate {
            path: path.into(),
            ids: dups,
        });
    }
    let missing: Vec<String> = expected
        .iter()
        .filter(|id| !seen.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::Missing {
            path: path.into(),
            ids: missing,
        });
    }
    Ok(expected.iter().map(|id| (id.clone(), seen[id])).collect())
}

pub fn ingest_predictions(
    path: &Path,
    expected: &[String],
) -> Result<IndexMap<String, Label>, IngestError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Format {
        path: p.clone(),
        message: e.to_string(),
    })?;
    parse_predictions(&text, &p, expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn labels_and_probabilities() {
        let m = parse_predictions("trace_id,label\na,event\nb,0\nz,1\n", "p", &ids(&["a", "b"])).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m["a"], Label::Event);
        let m = parse_predictions("trace_id,probability\na,0.5\nb,0.49\n", "p", &ids(&["b", "a"])).unwrap();
        assert_eq!(m.keys().collect::<Vec<_>>(), vec!["b", "a"]);
        assert_eq!((m["a"], m["b"]), (Label::Event, Label::Noise));
        let m = parse_predictions("trace_id,probability\na,0.7\n", "p", &ids(&["a"])).unwrap();
        assert_eq!(m["a"], Label::Event);
        let m = parse_predictions("trace_id,probability,threshold\na,0.7,0.8\n", "p", &ids(&["a"])).unwrap();
        assert_eq!(m["a"], Label::Noise);
    }

    #[test]
    fn missing_ids_are_listed() {
        match parse_predictions("trace_id,label\na,event\n", "p", &ids(&["a", "b", "c"])) {
            Err(IngestError::Missing { ids, .. }) => assert_eq!(ids, vec!["b", "c"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_bad_rows() {
        assert!(matches!(
            parse_predictions("trace_id,label\na,event\na,noise\n", "p", &ids(&["a"])),
            Err(IngestError::Duplicate { .. })
        ));
        assert!(matches!(
            parse_predictions("trace_id,label\na,maybe\n", "p", &ids(&["a"])),
            Err(IngestError::Row { line: 2, .. })
        ));
        assert!(matches!(
            parse_predictions("id,label\n", "p", &[]),
            Err(IngestError::Format { .. })
        ));
    }
}
