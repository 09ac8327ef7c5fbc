use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"master_seed = 7

[synth]
n_events = 12
traces_per_event = [3, 6]
n_noise = 80
window_len = 600

[pool]
n_noise = 1500
window_len = 600
id_prefix = "P"

[preprocess]
window_len = 256

[select.ensemble]
n_runs = 10
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quakelr"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "quakelr {}: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(!out.status.success(), "quakelr {} unexpectedly succeeded", args.join(" "));
    String::from_utf8(out.stderr).unwrap()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), config).unwrap();
    dir
}

/// synth, split and extract with the given config.
fn features(config: &str) -> tempfile::TempDir {
    let dir = setup(config);
    let d = dir.path();
    ok(d, &["--config", "c.toml", "synth"]);
    ok(d, &["--config", "c.toml", "split", "--input", "waveforms.jsonl"]);
    ok(d, &["--config", "c.toml", "extract", "--input", "split.jsonl"]);
    dir
}

fn header(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn config_errors_name_the_field() {
    let dir = setup("[synth]\nfs = 0.0\n");
    let err = fails(dir.path(), &["--config", "c.toml", "synth"]);
    assert!(err.contains("synth.fs"), "{err}");
    assert!(!dir.path().join("waveforms.jsonl").exists());
    let dir = setup("[train]\npartition = \"test\"\n");
    let err = fails(dir.path(), &["--config", "c.toml", "synth"]);
    assert!(err.contains("train.partition"), "{err}");
    let dir = setup("[split]\nseed = 3\n");
    let err = fails(dir.path(), &["--config", "c.toml", "synth"]);
    assert!(err.contains("split.seed"), "{err}");
}

#[test]
fn synth_is_reproducible_per_seed() {
    let a = setup(SMALL);
    let b = setup(SMALL);
    ok(a.path(), &["--config", "c.toml", "synth"]);
    ok(b.path(), &["--config", "c.toml", "synth"]);
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("waveforms.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));
    ok(b.path(), &["--config", "c.toml", "--seed", "8", "synth"]);
    assert_ne!(read(&a), read(&b));
}

#[test]
fn extract_rejects_empty_input() {
    let dir = setup(SMALL);
    std::fs::write(dir.path().join("empty.jsonl"), "").unwrap();
    let err = fails(dir.path(), &["--config", "c.toml", "extract", "--input", "empty.jsonl"]);
    assert!(err.contains("no records"), "{err}");
    assert!(!dir.path().join("features.csv").exists());
}

#[test]
fn extract_names_degenerate_traces_and_writes_nothing() {
    let dir = setup(SMALL);
    let d = dir.path();
    ok(d, &["--config", "c.toml", "synth"]);
    let text = std::fs::read_to_string(d.join("waveforms.jsonl")).unwrap();
    let mut lines: Vec<String> = text.lines().take(3).map(String::from).collect();
    let mut flat: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    let n = flat["samples"].as_array().unwrap().len();
    flat["samples"] = serde_json::json!(vec![1.5; n]);
    let bad_id = flat["trace_id"].as_str().unwrap().to_string();
    lines[1] = flat.to_string();
    std::fs::write(d.join("bad.jsonl"), lines.join("\n") + "\n").unwrap();
    let err = fails(d, &["--config", "c.toml", "extract", "--input", "bad.jsonl"]);
    assert!(err.contains(&bad_id), "{err}");
    assert!(!d.join("features.csv").exists());
}

#[test]
fn extract_column_counts() {
    let dir = features(SMALL);
    let h = header(&dir.path().join("features.csv"));
    assert_eq!(&h[..3], ["trace_id", "label", "partition"]);
    assert_eq!(h.len() - 3, 26);
    let eight = format!("{SMALL}\n[extract]\nfeatures = [\"W1\", \"W2\", \"W3\", \"W4\", \"C10\", \"C11\", \"C14\", \"C15\"]\n");
    let dir = features(&eight);
    let h = header(&dir.path().join("features.csv"));
    assert_eq!(h[3..], ["W1", "W2", "W3", "W4", "C10", "C11", "C14", "C15"]);
}

/// A predictions file holding the true labels of every row.
fn oracle_predictions(features: &Path, out: &Path, flip_events: bool) {
    let mut r = csv::Reader::from_path(features).unwrap();
    let mut text = String::from("trace_id,label\n");
    for rec in r.records() {
        let rec = rec.unwrap();
        let label = if flip_events { "noise" } else { &rec[1] };
        text.push_str(&format!("{},{label}\n", &rec[0]));
    }
    std::fs::write(out, text).unwrap();
}

#[test]
fn eval_and_sweep_on_fixed_predictions() {
    let dir = features(SMALL);
    let d = dir.path();
    oracle_predictions(&d.join("features.csv"), &d.join("truth.csv"), false);
    oracle_predictions(&d.join("features.csv"), &d.join("silent.csv"), true);
    ok(
        d,
        &[
            "--config", "c.toml", "eval", "--features", "features.csv",
            "--predictions", "truth.csv", "--predictions", "silent.csv",
        ],
    );
    let e = read_json(&d.join("eval.json"));
    assert_eq!(e["partition"], "test");
    assert_eq!(e["reports"][0]["report"]["mcc"], 1.0);
    assert_eq!(e["reports"][1]["report"]["mcc"], 0.0);
    assert_eq!(e["mcnemar"][0]["a"], "truth");

    let sweep_cfg = format!("{SMALL}\n[sweep]\nratios = [0.5, 1.0]\n");
    std::fs::write(d.join("c.toml"), sweep_cfg).unwrap();
    ok(
        d,
        &[
            "--config", "c.toml", "sweep", "--features", "features.csv",
            "--predictions", "silent.csv", "--predictions", "truth.csv",
        ],
    );
    let csv = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["predictor,0.5,1", "silent,0,0", "truth,1,1"]);
}

#[test]
fn training_refuses_the_test_partition() {
    let dir = features(SMALL);
    let d = dir.path();
    let cfg = format!("{SMALL}\n[train]\npartition = \"test\"\n");
    std::fs::write(d.join("c.toml"), cfg).unwrap();
    let err = fails(d, &["--config", "c.toml", "train", "--features", "features.csv"]);
    assert!(err.contains("train.partition"), "{err}");
    assert!(!d.join("model.json").exists());
}

#[test]
fn train_refuses_untagged_tables() {
    let dir = setup(SMALL);
    let d = dir.path();
    ok(d, &["--config", "c.toml", "synth"]);
    ok(d, &["--config", "c.toml", "extract", "--input", "waveforms.jsonl"]);
    let err = fails(d, &["--config", "c.toml", "train", "--features", "features.csv"]);
    assert!(err.contains("partition"), "{err}");
}

#[test]
fn loud_events_are_separable() {
    let cfg = r#"master_seed = 3

[synth]
n_events = 20
traces_per_event = [4, 8]
n_noise = 200
window_len = 600
snr_range = [20.0, 40.0]

[preprocess]
window_len = 256

[extract]
features = ["W1", "W2", "W3", "W4", "C10", "C11", "C14", "C15"]
"#;
    let dir = features(cfg);
    let d = dir.path();
    ok(d, &["--config", "c.toml", "train", "--features", "features.csv"]);
    let out = ok(d, &["--config", "c.toml", "eval", "--features", "features.csv", "--model", "model.json"]);
    let mcc = read_json(&d.join("eval.json"))["reports"][0]["report"]["mcc"].as_f64().unwrap();
    assert!(mcc > 0.95, "{out}");
}

#[test]
fn full_recipe_with_selection() {
    let dir = features(SMALL);
    let d = dir.path();
    ok(d, &["--config", "c.toml", "synth", "--pool"]);
    ok(d, &["--config", "c.toml", "extract", "--input", "pool.jsonl", "--output", "pool.csv"]);
    let out = ok(d, &["--config", "c.toml", "select", "--features", "features.csv"]);
    assert!(out.contains("selected"), "{out}");
    let sel = read_json(&d.join("selection.json"));
    assert_eq!(sel["runs"].as_array().unwrap().len(), 10);
    let selected: Vec<&str> = sel["selected"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for w in ["W1", "W2", "W3", "W4"] {
        assert!(selected.contains(&w), "{selected:?}");
    }
    assert!(header(&d.join("weights.csv")).starts_with(&["feature".to_string(), "min".to_string()]));
    ok(d, &["--config", "c.toml", "extract", "--input", "split.jsonl", "--selection", "selection.json", "--output", "sel.csv"]);
    assert_eq!(header(&d.join("sel.csv")).len() - 3, selected.len());
    ok(d, &["--config", "c.toml", "train", "--features", "features.csv", "--selection", "selection.json"]);
    let m = read_json(&d.join("model.json"));
    assert_eq!(m["weights"].as_object().unwrap().len(), selected.len());
    ok(d, &["--config", "c.toml", "sweep", "--features", "sel.csv", "--noise-pool", "pool.csv", "--model", "model.json"]);
    let sweep = std::fs::read_to_string(d.join("sweep.txt")).unwrap();
    assert!(sweep.contains("50:1"), "{sweep}");
}
