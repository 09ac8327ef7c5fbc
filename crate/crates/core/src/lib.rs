//! White-box earthquake detection.
//!
//! The crate is organised as a pipeline:
//!
//! * [`waveform`]: seismogram records and the detrend → demean → band-pass →
//!   decimate preprocessing chain.
//! * [`features`]: the 22-feature catch22 catalog, surrogate prior-work
//!   features, a pluggable registry and standardization.
//! * [`model`]: elastic-net penalized logistic regression trained by cyclic
//!   coordinate descent.
//! * [`selection`]: ensemble feature discovery over many elastic-net fits.
//! * [`eval`]: confusion matrices, MCC, accuracy and the exact McNemar test.
//! * [`bench`]: event-wise partitioning, noise-ratio datasets, the ratio sweep,
//!   the synthetic corpus generator and external prediction ingestion.

pub mod bench;
pub mod eval;
pub mod features;
pub mod model;
pub mod seed;
pub mod selection;
pub mod waveform;

pub use features::{FeatureId, FeatureRegistry, FeatureVector, StandardizationParams};
pub use model::{LinearModel, PenaltyConfig};
pub use waveform::{Label, PreprocessConfig, WaveformRecord};
