//! Event-wise train/validation/test partitioning.
//!
//! Event ids are sorted, shuffled with the split seed, and cut at
//! `floor(f_train * N)` and `floor(f_val * N)`; the test split takes the
//! remainder. Noise traces, which have no event, are cut the same way by
//! trace id. Every trace of one event therefore lands in one split.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

use crate::seed;
use crate::waveform::WaveformRecord;

pub const PARTITIONS: [&str; 3] = ["train", "validation", "test"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("invalid split fractions: {0}")]
    InvalidFractions(String),
    #[error("{n_events} events cannot fill train/validation/test ({counts:?})")]
    TooFewEvents { n_events: usize, counts: [usize; 3] },
    #[error("event trace {0} has no event_id")]
    MissingEventId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), SplitError> {
        let f = [self.train, self.validation, self.test];
        if f.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(SplitError::InvalidFractions(format!(
                "each fraction must lie in (0, 1), got {f:?}"
            )));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(SplitError::InvalidFractions(format!("fractions sum to {}", f.iter().sum::<f64>())));
        }
        Ok(())
    }

    /// Group counts per split for `n` groups.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        // The small slack keeps 0.6 * 5 from landing on 2.9999999.
        let tr = ((self.train * n as f64) + 1e-9).floor() as usize;
        let va = ((self.validation * n as f64) + 1e-9).floor() as usize;
        let tr = tr.min(n);
        let va = va.min(n - tr);
        [tr, va, n - tr - va]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Partition {
    pub train: Vec<WaveformRecord>,
    pub validation: Vec<WaveformRecord>,
    pub test: Vec<WaveformRecord>,
}

impl Partition {
    pub fn parts(&self) -> [(&'static str, &[WaveformRecord]); 3] {
        [
            (PARTITIONS[0], &self.train),
            (PARTITIONS[1], &self.validation),
            (PARTITIONS[2], &self.test),
        ]
    }
}

fn assign(keys: BTreeSet<String>, counts: [usize; 3], seed: u64) -> HashMap<String, usize> {
    let mut keys: Vec<String> = keys.into_iter().collect();
    keys.shuffle(&mut seed::rng(seed));
    let mut out = HashMap::with_capacity(keys.len());
    let mut it = keys.into_iter();
    for (part, &c) in counts.iter().enumerate() {
        for k in it.by_ref().take(c) {
            out.insert(k, part);
        }
    }
    out
}

/// Splits records by event. Input order is preserved within each split.
pub fn partition_by_event(records: &[WaveformRecord], spec: &SplitSpec) -> Result<Partition, SplitError> {
    spec.validate()?;
    let mut events = BTreeSet::new();
    let mut noise = BTreeSet::new();
    for r in records {
        if r.label.is_event() {
            let e = r
                .event_id
                .clone()
                .ok_or_else(|| SplitError::MissingEventId(r.trace_id.clone()))?;
            events.insert(e);
        } else {
            noise.insert(r.trace_id.clone());
        }
    }
    let n_events = events.len();
    let counts = spec.counts(n_events);
    if counts.contains(&0) {
        return Err(SplitError::TooFewEvents { n_events, counts });
    }
    let ev = assign(events, counts, seed::stage_seed(spec.seed, "split.events"));
    let nz = assign(noise.clone(), spec.counts(noise.len()), seed::stage_seed(spec.seed, "split.noise"));
    let mut p = Partition::default();
    for r in records {
        let part = if r.label.is_event() {
            ev[r.event_id.as_ref().expect("checked above")]
        } else {
            nz[&r.trace_id]
        };
        match part {
            0 => p.train.push(r.clone()),
            1 => p.validation.push(r.clone()),
            _ => p.test.push(r.clone()),
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::Label;
    use proptest::prelude::*;

    fn ev(trace: &str, event: &str) -> WaveformRecord {
        WaveformRecord {
            trace_id: trace.into(),
            event_id: Some(event.into()),
            station: "S".into(),
            channel: "HHZ".into(),
            sample_rate: 100.0,
            label: Label::Event,
            magnitude: Some(1.0),
            samples: vec![0.0, 1.0],
        }
    }

    fn nz(trace: &str) -> WaveformRecord {
        WaveformRecord {
            trace_id: trace.into(),
            event_id: None,
            station: "S".into(),
            channel: "HHZ".into(),
            sample_rate: 100.0,
            label: Label::Noise,
            magnitude: None,
            samples: vec![0.0, 1.0],
        }
    }

    fn events_of(rs: &[WaveformRecord]) -> BTreeSet<String> {
        rs.iter().filter_map(|r| r.event_id.clone()).collect()
    }

    #[test]
    fn counts_examples() {
        let s = SplitSpec::default();
        assert_eq!(s.counts(5), [3, 1, 1]);
        assert_eq!(s.counts(100), [60, 20, 20]);
        assert_eq!(s.counts(47), [28, 9, 10]);
    }

    #[test]
    fn five_events_eleven_traces() {
        let mut rs = Vec::new();
        for (e, k) in [("E1", 3), ("E2", 2), ("E3", 2), ("E4", 2), ("E5", 2)] {
            for i in 0..k {
                rs.push(ev(&format!("{e}.{i}"), e));
            }
        }
        let p = partition_by_event(&rs, &SplitSpec::default()).unwrap();
        assert_eq!(events_of(&p.train).len(), 3);
        assert_eq!(events_of(&p.validation).len(), 1);
        assert_eq!(events_of(&p.test).len(), 1);
        assert_eq!(p.train.len() + p.validation.len() + p.test.len(), 11);
    }

    #[test]
    fn too_few_events() {
        let rs = vec![ev("a", "E1"), ev("b", "E2")];
        assert!(matches!(
            partition_by_event(&rs, &SplitSpec::default()),
            Err(SplitError::TooFewEvents { n_events: 2, .. })
        ));
    }

    #[test]
    fn bad_fractions() {
        let s = SplitSpec { train: 0.7, ..Default::default() };
        assert!(matches!(s.validate(), Err(SplitError::InvalidFractions(_))));
    }

    proptest! {
        #[test]
        fn events_never_straddle(sizes in prop::collection::vec(1usize..5, 5..40), n_noise in 0usize..30, seed in any::<u64>()) {
            let mut rs = Vec::new();
            for (e, k) in sizes.iter().enumerate() {
                for i in 0..*k {
                    rs.push(ev(&format!("E{e}.{i}"), &format!("E{e}")));
                }
            }
            for i in 0..n_noise {
                rs.push(nz(&format!("N{i}")));
            }
            let spec = SplitSpec { seed, ..Default::default() };
            let p = partition_by_event(&rs, &spec).unwrap();
            let (a, b, c) = (events_of(&p.train), events_of(&p.validation), events_of(&p.test));
            prop_assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
            prop_assert_eq!(a.len() + b.len() + c.len(), sizes.len());
            prop_assert_eq!([a.len(), b.len(), c.len()], spec.counts(sizes.len()));
            prop_assert_eq!(p.train.len() + p.validation.len() + p.test.len(), rs.len());
            prop_assert_eq!(partition_by_event(&rs, &spec).unwrap(), p);
        }
    }
}
