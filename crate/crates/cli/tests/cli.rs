use std::path::{Path, PathBuf};
use std::process::Command;

use bpae_core::dataset::{read_labels, read_store, write_labels, write_store, LabelTable, SegmentStore};
use bpae_core::signal::Channel;
use serde_json::Value;

const TINY: &str = r#"
[unet]
width = 4
n_features = 8

[train]
max_epochs = 2
patience = 2
batch_size = 16

[regressor.mlp]
hidden = 8
max_epochs = 20
"#;

struct Env {
    dir: tempfile::TempDir,
    cfg: PathBuf,
}

impl Env {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("tiny.toml");
        std::fs::write(&cfg, TINY).unwrap();
        Env { dir, cfg }
    }

    fn p(&self, rel: &str) -> String {
        self.dir.path().join(rel).to_string_lossy().into_owned()
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn args(&self, rest: &[&str]) -> Vec<String> {
        let mut a: Vec<String> = [
            "bpae",
            "--config",
            &self.cfg.to_string_lossy(),
            "--threads",
            "1",
            "--seed",
            "3",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        a.extend(rest.iter().map(|s| s.to_string()));
        a
    }

    fn run(&self, rest: &[&str]) {
        bpae_cli::run(self.args(rest)).unwrap_or_else(|e| panic!("{rest:?}: {e}"));
    }

    /// Exit status of the real binary.
    fn status(&self, rest: &[&str]) -> i32 {
        Command::new(env!("CARGO_BIN_EXE_bpae"))
            .args(&self.args(rest)[1..])
            .env_remove(bpae_cli::CONFIG_ENV)
            .env("RUST_LOG", "error")
            .status()
            .unwrap()
            .code()
            .unwrap()
    }

    fn synth_pre(&self, n: usize) {
        self.run(&["synth", "--n", &n.to_string(), "--out", &self.p("raw")]);
        self.run(&["preprocess", "--in", &self.p("raw/raw.bpst"), "--out", &self.p("pre")]);
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn synthetic_segments_all_pass_preprocessing() {
    let env = Env::new();
    env.synth_pre(100);
    let store = read_store(&env.path("pre/segments.bpst")).unwrap();
    assert_eq!(store.len(), 100);
    assert_eq!(
        store.channels(),
        &[Channel::Ppg, Channel::Vpg, Channel::Apg, Channel::Ecg, Channel::Abp]
    );
    assert_eq!(read_labels(&env.path("pre/labels.csv")).unwrap().rows.len(), 100);
    let screening = std::fs::read_to_string(env.path("pre/screening.csv")).unwrap();
    assert_eq!(screening.lines().filter(|l| l.contains("accept")).count(), 100);
}

#[test]
fn flat_abp_is_rejected_as_blank() {
    let env = Env::new();
    env.run(&["synth", "--n", "3", "--out", &env.p("raw")]);
    let raw = read_store(&env.path("raw/raw.bpst")).unwrap();
    let abp = raw.channel_index(Channel::Abp).unwrap();
    let mut edited = SegmentStore::new(raw.segment_length(), raw.channels().to_vec()).unwrap();
    for i in 0..raw.len() {
        let mut chans: Vec<Vec<f64>> = (0..raw.channels().len()).map(|c| raw.samples_f64(i, c)).collect();
        if i == 1 {
            chans[abp].iter_mut().for_each(|v| *v = 90.0);
        }
        let refs: Vec<&[f64]> = chans.iter().map(|c| c.as_slice()).collect();
        edited.push(raw.ids()[i], &refs).unwrap();
    }
    write_store(&edited, &env.path("flat.bpst")).unwrap();
    std::fs::copy(env.path("raw/subjects.txt"), env.path("subjects.txt")).unwrap();
    env.run(&["preprocess", "--in", &env.p("flat.bpst"), "--out", &env.p("pre")]);

    assert_eq!(read_store(&env.path("pre/segments.bpst")).unwrap().len(), 2);
    let screening = std::fs::read_to_string(env.path("pre/screening.csv")).unwrap();
    let row = screening
        .lines()
        .find(|l| l.starts_with(&format!("{},", raw.ids()[1])))
        .unwrap();
    assert!(row.contains("reject") && row.contains("blank"), "{row}");
}

#[test]
fn pipeline_rerun_is_byte_identical() {
    let runs: Vec<Env> = (0..2).map(|_| Env::new()).collect();
    for env in &runs {
        env.synth_pre(40);
        env.run(&["train-ae", "--in", &env.p("pre"), "--out", &env.p("ae")]);
        env.run(&[
            "features",
            "--model",
            &env.p("ae/model.bpun"),
            "--in",
            &env.p("pre"),
            "--out",
            &env.p("f.bpft"),
        ]);
    }
    for f in [
        "pre/segments.bpst",
        "ae/model.bpun",
        "ae/history.csv",
        "ae/split.json",
        "f.bpft",
    ] {
        assert_eq!(
            std::fs::read(runs[0].path(f)).unwrap(),
            std::fs::read(runs[1].path(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn predict_with_wrong_feature_width_is_a_compatibility_error() {
    let env = Env::new();
    env.synth_pre(40);
    env.run(&["train-ae", "--in", &env.p("pre"), "--out", &env.p("ae")]);
    env.run(&[
        "features",
        "--model",
        &env.p("ae/model.bpun"),
        "--in",
        &env.p("pre"),
        "--out",
        &env.p("f8.bpft"),
    ]);
    env.run(&[
        "train-reg",
        "--features",
        &env.p("f8.bpft"),
        "--labels",
        &env.p("pre/labels.csv"),
        "--split",
        &env.p("ae/split.json"),
        "--out",
        &env.p("reg"),
    ]);
    env.run(&[
        "--set",
        "unet.n_features=6",
        "train-ae",
        "--in",
        &env.p("pre"),
        "--out",
        &env.p("ae6"),
    ]);
    env.run(&[
        "features",
        "--model",
        &env.p("ae6/model.bpun"),
        "--in",
        &env.p("pre"),
        "--out",
        &env.p("f6.bpft"),
    ]);
    let code = env.status(&[
        "predict",
        "--features",
        &env.p("f6.bpft"),
        "--regressors",
        &env.p("reg"),
        "--out",
        &env.p("p.csv"),
    ]);
    assert_eq!(code, bpae_cli::exit::COMPATIBILITY);
    assert!(!env.path("p.csv").exists());
}

#[test]
fn perfect_predictions_grade_a_and_pass_aami() {
    let env = Env::new();
    let mut table = LabelTable::default();
    let mut csv = String::from("id,sbp_pred,dbp_pred\n");
    for i in 0..120u64 {
        let sbp = 100.0 + (i % 50) as f64;
        let dbp = 60.0 + (i % 30) as f64;
        table.rows.push((
            i,
            bpae_core::quality::SegmentLabel::new(sbp, dbp, format!("s{}", i % 90)).unwrap(),
        ));
        csv.push_str(&format!("{i},{sbp},{dbp}\n"));
    }
    write_labels(&table, &env.path("labels.csv")).unwrap();
    std::fs::write(env.path("pred.csv"), csv).unwrap();
    env.run(&[
        "evaluate",
        "--predictions",
        &env.p("pred.csv"),
        "--labels",
        &env.p("labels.csv"),
        "--out",
        &env.p("ev"),
    ]);
    let report = read_json(&env.path("ev/report.json"));
    let targets = report["targets"].as_array().unwrap();
    assert_eq!(targets.len(), 2);
    for t in targets {
        assert_eq!(t["mae"].as_f64(), Some(0.0));
        assert_eq!(t["n_subjects"].as_u64(), Some(90));
        assert_eq!(t["bhs"]["grade"], "A");
        assert_eq!(t["aami"]["pass"], true);
    }
    for f in [
        "sbp/regression_points.csv",
        "dbp/bland_altman.csv",
        "dbp/error_hist.csv",
    ] {
        assert!(env.path("ev").join(f).exists(), "{f}");
    }
}

#[test]
fn kfold_writes_five_runs_and_an_aggregate() {
    let env = Env::new();
    env.synth_pre(50);
    env.run(&[
        "experiment",
        "--mode",
        "kfold",
        "--in",
        &env.p("pre"),
        "--out",
        &env.p("kf"),
    ]);
    for k in 0..5 {
        assert!(env.path(&format!("kf/fold{k}/report/report.json")).exists(), "fold {k}");
    }
    let agg = read_json(&env.path("kf/aggregate.json"));
    assert_eq!(agg["folds"].as_array().unwrap().len(), 5);
    assert_eq!(agg["aggregate"].as_array().unwrap().len(), 2);
}

#[test]
fn outputs_are_write_once() {
    let env = Env::new();
    env.run(&["synth", "--n", "5", "--out", &env.p("raw")]);
    let before = std::fs::read(env.path("raw/raw.bpst")).unwrap();
    let code = env.status(&["synth", "--n", "6", "--out", &env.p("raw")]);
    assert_eq!(code, bpae_cli::exit::USAGE);
    assert_eq!(std::fs::read(env.path("raw/raw.bpst")).unwrap(), before);
    assert_eq!(env.status(&["--force", "synth", "--n", "6", "--out", &env.p("raw")]), 0);
    assert_eq!(read_store(&env.path("raw/raw.bpst")).unwrap().len(), 6);
}

#[test]
fn grid_expands_to_one_run_per_combination() {
    let env = Env::new();
    env.synth_pre(40);
    env.run(&[
        "experiment",
        "--mode",
        "holdout",
        "--in",
        &env.p("pre"),
        "--grid",
        "channels=ppg,ppg+ecg",
        "--out",
        &env.p("g"),
    ]);
    let rows = read_json(&env.path("g/grid.json"));
    assert_eq!(rows.as_array().unwrap().len(), 2);
    let model = bpae_core::autoencoder::read_model(&env.path("g/grid001/model.bpun")).unwrap();
    assert_eq!(model.input_channels(), &[Channel::Ppg, Channel::Ecg]);
    assert_eq!(model.config().in_channels, 2);
}

#[test]
fn bad_usage_and_missing_inputs_map_to_exit_codes() {
    let env = Env::new();
    assert_eq!(env.status(&["param-count", "--grid", "unet.width=8,16"]), 0);
    assert_eq!(
        env.status(&["--set", "unet.nope=1", "param-count"]),
        bpae_cli::exit::USAGE
    );
    assert_eq!(env.status(&["frobnicate"]), bpae_cli::exit::USAGE);
    assert_eq!(
        env.status(&["preprocess", "--in", &env.p("missing.bpst"), "--out", &env.p("pre")]),
        bpae_cli::exit::IO
    );
    std::fs::write(env.path("junk.bpst"), b"not a store").unwrap();
    assert_eq!(
        env.status(&["preprocess", "--in", &env.p("junk.bpst"), "--out", &env.p("pre2")]),
        bpae_cli::exit::FORMAT
    );
}
