//! Benchmark protocol: event-wise splits, noise-ratio datasets, the ratio
//! sweep, synthetic corpora and external prediction ingestion.

pub mod planted;
pub mod predictions;
pub mod ratio;
pub mod split;
pub mod sweep;
pub mod synth;

pub use planted::{planted_corpus, PlantedCorpus, PlantedSpec};
pub use predictions::{ingest_predictions, parse_predictions, IngestError};
pub use ratio::{build_ratio_dataset, RatioDataset, RatioError, RatioSpec};
pub use split::{partition_by_event, Partition, SplitError, SplitSpec};
pub use sweep::{sweep, Predictor, SweepError, SweepRow, SweepTable};
pub use synth::{generate_noise_pool, generate_synthetic, SyntheticSpec};
