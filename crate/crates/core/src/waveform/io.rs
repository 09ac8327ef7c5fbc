//! JSON-lines waveform corpora: one [`WaveformRecord`] object per line.
//!
//! An optional `partition` field (`train`, `validation`, `test`) tags records
//! written by the splitter; it is carried alongside the record.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

use super::{WaveformError, WaveformRecord};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: String,
        line: usize,
        #[source]
        source: WaveformError,
    },
    #[error("{path}: duplicate trace_id {trace_id} at line {line}")]
    DuplicateTrace {
        path: String,
        line: usize,
        trace_id: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedRecord {
    #[serde(flatten)]
    pub record: WaveformRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
}

pub fn parse_jsonl(text: &str, path: &str) -> Result<Vec<TaggedRecord>, CorpusError> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TaggedRecord = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            path: path.to_string(),
            line: line_no,
            message: e.to_string(),
        })?;
        rec.record.validate().map_err(|source| CorpusError::Invalid {
            path: path.to_string(),
            line: line_no,
            source,
        })?;
        if !seen.insert(rec.record.trace_id.clone()) {
            return Err(CorpusError::DuplicateTrace {
                path: path.to_string(),
                line: line_no,
                trace_id: rec.record.trace_id,
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TaggedRecord>, CorpusError> {
    let p = path.display().to_string();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: p.clone(),
        source,
    })?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| CorpusError::Io {
            path: p.clone(),
            source,
        })?;
        text.push_str(&line);
        text.push('\n');
    }
    parse_jsonl(&text, &p)
}

pub fn write_jsonl(path: &Path, records: &[TaggedRecord]) -> Result<(), CorpusError> {
    let p = path.display().to_string();
    let io_err = |source| CorpusError::Io {
        path: p.clone(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| CorpusError::Parse {
            path: p.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
