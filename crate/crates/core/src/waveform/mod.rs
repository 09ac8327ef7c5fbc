//! Seismogram records and the preprocessing chain.

mod filter;
pub mod io;
mod preprocess;
mod record;

pub use filter::{butter_bandpass, butter_lowpass, filtfilt, SosFilter};
pub use preprocess::{
    bandpass, crop_center, demean, detrend_linear, downsample, prepare, preprocess,
    PreprocessConfig,
};
pub use record::{Label, WaveformRecord, MIN_CATALOG_MAGNITUDE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveformError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid band {low_hz}-{high_hz} Hz for Nyquist {nyquist_hz} Hz")]
    InvalidBand {
        low_hz: f64,
        high_hz: f64,
        nyquist_hz: f64,
    },
    #[error("invalid downsample factor {0}")]
    InvalidFactor(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid record {trace_id}: {reason}")]
    InvalidRecord { trace_id: String, reason: String },
    #[error("trace {trace_id} has {len} samples, shorter than window {window}")]
    TraceTooShort {
        trace_id: String,
        len: usize,
        window: usize,
    },
}
