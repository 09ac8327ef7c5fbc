use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::WaveformError;

/// Catalog selection cut on local magnitude.
pub const MIN_CATALOG_MAGNITUDE: f64 = 0.2;

/// Class of a trace. `Event` is the positive class everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Event,
    Noise,
}

impl Label {
    pub fn is_event(self) -> bool {
        matches!(self, Label::Event)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Event => "event",
            Label::Noise => "noise",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "event" | "1" | "positive" => Ok(Label::Event),
            "noise" | "0" | "negative" => Ok(Label::Noise),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// One seismogram trace with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformRecord {
    pub trace_id: String,
    pub event_id: Option<String>,
    pub station: String,
    pub channel: String,
    pub sample_rate: f64,
    pub label: Label,
    pub magnitude: Option<f64>,
    pub samples: Vec<f64>,
}

impl WaveformRecord {
    pub fn validate(&self) -> Result<(), WaveformError> {
        let bad = |reason: &str| WaveformError::InvalidRecord {
            trace_id: self.trace_id.clone(),
            reason: reason.to_string(),
        };
        if self.trace_id.is_empty() {
            return Err(bad("empty trace_id"));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(bad("sample_rate must be positive"));
        }
        if self.samples.is_empty() {
            return Err(bad("samples must be non-empty"));
        }
        if self.samples.iter().any(|v| !v.is_finite()) {
            return Err(bad("samples must be finite"));
        }
        match (self.label, &self.event_id) {
            (Label::Event, None) => return Err(bad("event record without event_id")),
            (Label::Event, Some(id)) if id.is_empty() => {
                return Err(bad("event record with empty event_id"))
            }
            (Label::Noise, Some(_)) => return Err(bad("noise record with event_id")),
            _ => {}
        }
        if let Some(m) = self.magnitude {
            if self.label == Label::Noise {
                return Err(bad("noise record with magnitude"));
            }
            if !(m.is_finite() && m >= MIN_CATALOG_MAGNITUDE) {
                return Err(bad("magnitude below catalog cut of 0.2"));
            }
        }
        Ok(())
    }

    /// Event grouping key used by event-wise splitting: the event id for
    /// events and the trace id for noise.
    pub fn group_key(&self) -> &str {
        self.event_id.as_deref().unwrap_or(&self.trace_id)
    }
}
