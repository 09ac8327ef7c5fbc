//! catch22 values against the reference library's output on a fixed bank of
//! series (see fixtures/gen_catch22_reference.py).

use quakelr::features::catch22;
use quakelr::{FeatureId, FeatureRegistry};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    name: String,
    series: Vec<f64>,
    features: Vec<f64>,
    feature_names: Vec<String>,
}

#[derive(Deserialize)]
struct Fixture {
    cases: Vec<Case>,
}

fn fixture() -> Fixture {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/catch22_reference.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Relative agreement, with an absolute floor for reference values at zero.
fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-6 * want.abs().max(got.abs()) || (got - want).abs() <= 1e-12
}

#[test]
fn all_22_features_match_reference_on_10_series() {
    let fx = fixture();
    assert_eq!(fx.cases.len(), 10);
    let reg = FeatureRegistry::canonical();
    let mut bad = Vec::new();
    for case in &fx.cases {
        assert_eq!(case.feature_names, catch22::NAMES);
        for (i, want) in case.features.iter().enumerate() {
            let id = FeatureId::from(catch22::CODES[i]);
            let got = reg.extract_feature(&case.series, &id).unwrap();
            if !close(got, *want) {
                bad.push(format!("{} {}: got {got}, want {want}", case.name, catch22::NAMES[i]));
            }
        }
    }
    assert!(bad.is_empty(), "{} mismatches:\n{}", bad.len(), bad.join("\n"));
}
