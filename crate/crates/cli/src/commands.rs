use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use bpae_core::autoencoder::{
    extract_features, param_count, read_features, read_model, write_features, write_model, History,
};
use bpae_core::dataset::{
    ingest_csv, read_labels, read_store, synth_generate, write_labels, write_store, LabelTable, SegmentStore, SplitPlan,
};
use bpae_core::evaluation::{evaluate, write_report, PredictionSet};
use bpae_core::pipeline::{
    aggregate, cross_dataset, fit_regressors, holdout, holdout_plan, kfold, preprocess, train_autoencoder,
    FoldAggregate, RunOutput,
};
use bpae_core::regressor::{read_regressor, write_regressor, BpTarget, RegressorModel};
use bpae_core::signal::Channel;

use crate::config::{expand_grid, PipelineConfig, CONFIG_ENV};
use crate::error::{CliError, WithPath};
use crate::files::{
    ensure_dir, read_json, read_lines, read_predictions, write_json, write_prediction_rows, write_predictions,
    write_screening, write_text, Outputs, Prediction,
};

pub const STORE_FILE: &str = "segments.bpst";
pub const LABELS_FILE: &str = "labels.csv";
pub const SCREENING_FILE: &str = "screening.csv";
pub const RAW_FILE: &str = "raw.bpst";
pub const SUBJECTS_FILE: &str = "subjects.txt";
pub const MODEL_FILE: &str = "model.bpun";
pub const HISTORY_FILE: &str = "history.csv";
pub const SPLIT_FILE: &str = "split.json";
pub const FEATURES_FILE: &str = "features.bpft";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(name = "bpae", version, about = "Two-stage cuffless blood pressure estimation")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML pipeline config; built-in defaults when absent.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Seed for network init, shuffling, splits and regressors.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Training worker threads; results are bit-reproducible for a fixed count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Config override, `key=value` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic raw PPG/ECG/ABP windows.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Baseline, derivatives, normalization, labelling and screening.
    Preprocess {
        /// Raw store (.bpst), a CSV recording or a directory of CSVs.
        #[arg(long = "in")]
        input: PathBuf,
        /// One subject name per raw segment (raw store input only).
        #[arg(long)]
        subjects: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the autoencoder on the development part of a hold-out split.
    TrainAe {
        /// Preprocessed directory.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bottleneck features for every segment of a store.
    Features {
        #[arg(long)]
        model: PathBuf,
        /// Preprocessed directory or store file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the SBP and DBP regressors.
    TrainReg {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Restrict fitting to the development ids of this split.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict SBP and DBP from features.
    Predict {
        #[arg(long)]
        features: PathBuf,
        /// Directory holding sbp.bprg and dbp.bprg.
        #[arg(long)]
        regressors: PathBuf,
        /// Restrict prediction to the test ids of this split.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against labels.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train, fit and evaluate under one of the experiment protocols.
    Experiment {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Preprocessed directory.
        #[arg(long = "in")]
        input: PathBuf,
        /// Preprocessed test directory (cross-dataset only).
        #[arg(long)]
        test_in: Option<PathBuf>,
        /// Sweep axis, `key=v1,v2,...` (repeatable).
        #[arg(long)]
        grid: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parameter counts of the configured network.
    ParamCount {
        #[arg(long)]
        grid: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Holdout,
    Kfold,
    CrossDataset,
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.global.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    for kv in &cli.global.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = cli.global.seed {
        cfg.set_seed(s);
    }
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        cfg.train.threads = t;
    }
    let force = cli.global.force;
    match cli.command {
        Command::Synth { n, out } => synth(&cfg, n, &out, force),
        Command::Preprocess { input, subjects, out } => cmd_preprocess(&cfg, &input, subjects.as_deref(), &out, force),
        Command::TrainAe { input, out } => train_ae(&cfg, &input, &out, force),
        Command::Features { model, input, out } => features(&model, &input, &out, force),
        Command::TrainReg {
            features,
            labels,
            split,
            out,
        } => train_reg(&cfg, &features, &labels, split.as_deref(), &out, force),
        Command::Predict {
            features,
            regressors,
            split,
            out,
        } => predict(&features, &regressors, split.as_deref(), &out, force),
        Command::Evaluate {
            predictions,
            labels,
            out,
        } => cmd_evaluate(&cfg, &predictions, &labels, &out, force),
        Command::Experiment {
            mode,
            input,
            test_in,
            grid,
            out,
        } => experiment(&cfg, mode, &input, test_in.as_deref(), &grid, &out, force),
        Command::ParamCount { grid } => cmd_param_count(&cfg, &grid),
    }
}

fn store_file(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(STORE_FILE)
    } else {
        p.to_path_buf()
    }
}

fn load_preprocessed(dir: &Path) -> Result<(SegmentStore, LabelTable), CliError> {
    let sp = store_file(dir);
    let store = read_store(&sp).at(&sp)?;
    let lp = dir.join(LABELS_FILE);
    let labels = read_labels(&lp).at(&lp)?;
    Ok((store, labels))
}

fn synth(cfg: &PipelineConfig, n: usize, out: &Path, force: bool) -> Result<(), CliError> {
    let mut outs = Outputs::new(force, &[]);
    let paths = outs.dir(out, &[RAW_FILE, SUBJECTS_FILE, LABELS_FILE])?;
    let s = synth_generate(n, cfg.split_seed, &cfg.synth)?;
    ensure_dir(out)?;
    write_store(&s.store, &paths[0]).at(&paths[0])?;
    let subjects: String = s
        .labels
        .rows
        .iter()
        .map(|(_, l)| format!("{}\n", l.subject_id))
        .collect();
    write_text(&paths[1], &subjects)?;
    write_labels(&s.labels, &paths[2]).at(&paths[2])?;
    info!("wrote {n} synthetic windows to {}", out.display());
    Ok(())
}

fn cmd_preprocess(
    cfg: &PipelineConfig,
    input: &Path,
    subjects: Option<&Path>,
    out: &Path,
    force: bool,
) -> Result<(), CliError> {
    let mut ins = vec![input];
    ins.extend(subjects);
    let mut outs = Outputs::new(force, &ins);
    let paths = outs.dir(out, &[STORE_FILE, LABELS_FILE, SCREENING_FILE])?;

    let is_store = input.extension().is_some_and(|e| e == "bpst");
    let (raw, names) = if is_store {
        let raw = read_store(input).at(input)?;
        let sibling = input.with_file_name(SUBJECTS_FILE);
        let names = match subjects {
            Some(p) => Some(read_lines(p)?),
            None if sibling.is_file() => Some(read_lines(&sibling)?),
            None => None,
        };
        (raw, names)
    } else {
        let mapping: Vec<(String, Channel)> = cfg.ingest.columns.iter().map(|(c, h)| (h.clone(), *c)).collect();
        let r = ingest_csv(input, &mapping, &cfg.ingest.options()).at(input)?;
        for w in &r.warnings {
            warn!("{w}");
        }
        (r.store, Some(r.subjects))
    };
    let res = preprocess(&raw, names.as_deref(), &cfg.preprocess)?;
    if !res.edge_filled.is_empty() {
        warn!("{} segments needed reflected derivative context", res.edge_filled.len());
    }
    ensure_dir(out)?;
    write_store(&res.store, &paths[0]).at(&paths[0])?;
    write_labels(&res.labels, &paths[1]).at(&paths[1])?;
    write_screening(&paths[2], &res.report)?;
    info!("accepted {} of {} segments", res.store.len(), raw.len());
    Ok(())
}

fn train_ae(cfg: &PipelineConfig, input: &Path, out: &Path, force: bool) -> Result<(), CliError> {
    let exp = cfg.experiment();
    exp.validate()?;
    let mut outs = Outputs::new(force, &[input]);
    let paths = outs.dir(out, &[MODEL_FILE, HISTORY_FILE, SPLIT_FILE])?;
    let (store, _) = load_preprocessed(input)?;
    let plan = holdout_plan(&store, &exp)?;
    let (model, history) = train_autoencoder(&store, &plan.train_ids, &plan.val_ids, &exp)?;
    ensure_dir(out)?;
    write_model(&model, &paths[0]).at(&paths[0])?;
    write_history(&paths[1], &history)?;
    write_json(&paths[2], &plan)?;
    info!("best epoch {} of {}", history.best_epoch, history.epochs.len());
    Ok(())
}

fn write_history(path: &Path, h: &History) -> Result<(), CliError> {
    let mut buf = Vec::new();
    h.write_csv(&mut buf)?;
    write_text(path, &String::from_utf8(buf).expect("ascii"))
}

fn features(model: &Path, input: &Path, out: &Path, force: bool) -> Result<(), CliError> {
    let sp = store_file(input);
    let mut outs = Outputs::new(force, &[model, &sp]);
    let out = outs.claim(out.to_path_buf())?;
    let m = read_model(model).at(model)?;
    let store = read_store(&sp).at(&sp)?;
    let f = extract_features(&m, &store)?;
    if let Some(d) = out.parent() {
        ensure_dir(d)?;
    }
    write_features(&f, &out).at(&out)?;
    Ok(())
}

fn read_split(p: Option<&Path>) -> Result<Option<SplitPlan>, CliError> {
    p.map(read_json).transpose()
}

fn train_reg(
    cfg: &PipelineConfig,
    features: &Path,
    labels: &Path,
    split: Option<&Path>,
    out: &Path,
    force: bool,
) -> Result<(), CliError> {
    let mut ins = vec![features, labels];
    ins.extend(split);
    let mut outs = Outputs::new(force, &ins);
    let paths = outs.dir(out, &["sbp.bprg", "dbp.bprg"])?;
    let mut f = read_features(features).at(features)?;
    let table = read_labels(labels).at(labels)?;
    if let Some(plan) = read_split(split)? {
        f = f.select_ids(&plan.development_ids())?;
    }
    let regs = fit_regressors(&f, &table, &cfg.regressor)?;
    ensure_dir(out)?;
    for (r, p) in regs.iter().zip(&paths) {
        write_regressor(r, p).at(p)?;
    }
    Ok(())
}

fn load_regressors(dir: &Path) -> Result<[RegressorModel; 2], CliError> {
    let load = |t: BpTarget| -> Result<RegressorModel, CliError> {
        let p = dir.join(format!("{}.bprg", t.name().to_lowercase()));
        let r = read_regressor(&p).at(&p)?;
        if r.target != t {
            return Err(CliError::InFile {
                path: p,
                source: bpae_core::Error::Compatibility(format!("regressor predicts {}", r.target.name())),
            });
        }
        Ok(r)
    };
    Ok([load(BpTarget::Sbp)?, load(BpTarget::Dbp)?])
}

fn predict(features: &Path, regressors: &Path, split: Option<&Path>, out: &Path, force: bool) -> Result<(), CliError> {
    let mut ins = vec![features];
    ins.extend(split);
    let mut outs = Outputs::new(force, &ins);
    let out = outs.claim(out.to_path_buf())?;
    let regs = load_regressors(regressors)?;
    let mut f = read_features(features).at(features)?;
    for r in &regs {
        if r.n_features() != f.n_features {
            return Err(bpae_core::Error::Compatibility(format!(
                "regressor expects {} features, {} has {}",
                r.n_features(),
                features.display(),
                f.n_features
            ))
            .into());
        }
    }
    if let Some(plan) = read_split(split)? {
        f = f.select_ids(&plan.test_ids)?;
    }
    let sbp = regs[0].predict(&f)?;
    let dbp = regs[1].predict(&f)?;
    let rows: Vec<Prediction> = f
        .ids
        .iter()
        .enumerate()
        .map(|(i, &id)| Prediction {
            id,
            sbp_pred: sbp[i],
            dbp_pred: dbp[i],
        })
        .collect();
    write_predictions(&out, &rows)
}

/// Prediction sets joined with truth from the label table.
pub fn joined_sets(preds: &[Prediction], labels: &LabelTable) -> Result<Vec<PredictionSet>, CliError> {
    let ids: Vec<u64> = preds.iter().map(|p| p.id).collect();
    let truth = labels.lookup(&ids)?;
    let n_subjects = truth
        .iter()
        .map(|l| l.subject_id.as_str())
        .collect::<HashSet<_>>()
        .len();
    let set = |t: BpTarget, pick: fn(&Prediction) -> f64| {
        PredictionSet::new(
            truth.iter().map(|l| l.value(t)).collect(),
            preds.iter().map(pick).collect(),
            t,
            n_subjects,
        )
    };
    Ok(vec![
        set(BpTarget::Sbp, |p| p.sbp_pred)?,
        set(BpTarget::Dbp, |p| p.dbp_pred)?,
    ])
}

const REPORT_FILES: [&str; 7] = [
    "report.json",
    "sbp/regression_points.csv",
    "sbp/bland_altman.csv",
    "sbp/error_hist.csv",
    "dbp/regression_points.csv",
    "dbp/bland_altman.csv",
    "dbp/error_hist.csv",
];

fn cmd_evaluate(
    cfg: &PipelineConfig,
    predictions: &Path,
    labels: &Path,
    out: &Path,
    force: bool,
) -> Result<(), CliError> {
    let mut outs = Outputs::new(force, &[predictions, labels]);
    outs.dir(out, &REPORT_FILES)?;
    let preds = read_predictions(predictions)?;
    let table = read_labels(labels).at(labels)?;
    let sets = joined_sets(&preds, &table)?;
    let report = evaluate(&sets, cfg.histogram_bin_width)?;
    ensure_dir(out)?;
    write_report(&report, &sets, out)?;
    for t in &report.targets {
        info!(
            "{}: MAE {:.3} ME {:.3} STD {:.3} BHS {:?}",
            t.target.name(),
            t.mae,
            t.me,
            t.std,
            t.bhs.grade
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct RunSummary {
    train_segments: usize,
    val_segments: usize,
    test_segments: usize,
    best_epoch: usize,
    epochs_run: usize,
    stopped_early: bool,
    /// Test MAE of predicting the development-set mean.
    baseline_mae_sbp: f64,
    baseline_mae_dbp: f64,
    mae_sbp: f64,
    mae_dbp: f64,
}

const RUN_FILES: [&str; 7] = [
    SPLIT_FILE,
    MODEL_FILE,
    HISTORY_FILE,
    "sbp.bprg",
    "dbp.bprg",
    PREDICTIONS_FILE,
    SUMMARY_FILE,
];

fn claim_run(outs: &mut Outputs, dir: &Path) -> Result<(), CliError> {
    outs.dir(dir, &RUN_FILES)?;
    outs.dir(&dir.join("report"), &REPORT_FILES)?;
    Ok(())
}

fn write_run(dir: &Path, plan: &SplitPlan, run: &RunOutput, test_labels: &LabelTable) -> Result<RunSummary, CliError> {
    ensure_dir(dir)?;
    write_json(&dir.join(SPLIT_FILE), plan)?;
    let mp = dir.join(MODEL_FILE);
    write_model(&run.model, &mp).at(&mp)?;
    write_history(&dir.join(HISTORY_FILE), &run.history)?;
    for r in &run.regressors {
        let p = dir.join(format!("{}.bprg", r.target.name().to_lowercase()));
        write_regressor(r, &p).at(&p)?;
    }
    write_prediction_rows(&dir.join(PREDICTIONS_FILE), &run.predictions)?;
    let sets = bpae_core::pipeline::prediction_sets(&run.predictions, test_labels)?;
    write_report(&run.report, &sets, &dir.join("report"))?;
    let mae = |t| run.report.get(t).map_or(f64::NAN, |r| r.mae);
    let s = RunSummary {
        train_segments: plan.train_ids.len(),
        val_segments: plan.val_ids.len(),
        test_segments: plan.test_ids.len(),
        best_epoch: run.history.best_epoch,
        epochs_run: run.history.epochs.len(),
        stopped_early: run.history.stopped_early,
        baseline_mae_sbp: run.mean_baseline_mae[0],
        baseline_mae_dbp: run.mean_baseline_mae[1],
        mae_sbp: mae(BpTarget::Sbp),
        mae_dbp: mae(BpTarget::Dbp),
    };
    write_json(&dir.join(SUMMARY_FILE), &s)?;
    info!(
        "{}: MAE SBP {:.3} (baseline {:.3}), DBP {:.3} (baseline {:.3})",
        dir.display(),
        s.mae_sbp,
        s.baseline_mae_sbp,
        s.mae_dbp,
        s.baseline_mae_dbp
    );
    Ok(s)
}

fn experiment(
    base: &PipelineConfig,
    mode: Mode,
    input: &Path,
    test_in: Option<&Path>,
    grid: &[String],
    out: &Path,
    force: bool,
) -> Result<(), CliError> {
    if (mode == Mode::CrossDataset) != test_in.is_some() {
        return Err(CliError::Usage(
            "--test-in is required for, and only for, --mode cross-dataset".into(),
        ));
    }
    let combos = expand_grid(grid)?;
    let mut cfgs = Vec::with_capacity(combos.len());
    for c in &combos {
        let mut cfg = base.clone();
        for (k, v) in c {
            cfg.set(k, v)?;
        }
        // A swept channel set implies the network's input width.
        if c.iter().any(|(k, _)| k == "channels") && !c.iter().any(|(k, _)| k == "unet.in_channels") {
            cfg.unet.in_channels = cfg.channels.len();
        }
        cfg.validate()?;
        cfgs.push(cfg);
    }
    let dirs: Vec<PathBuf> = if grid.is_empty() {
        vec![out.to_path_buf()]
    } else {
        (0..cfgs.len()).map(|i| out.join(format!("grid{i:03}"))).collect()
    };

    let mut ins = vec![input];
    ins.extend(test_in);
    let mut outs = Outputs::new(force, &ins);
    for (d, cfg) in dirs.iter().zip(&cfgs) {
        outs.claim(d.join("config.toml"))?;
        match mode {
            Mode::Kfold => {
                for k in 0..cfg.folds {
                    claim_run(&mut outs, &d.join(format!("fold{k}")))?;
                }
                outs.claim(d.join("aggregate.json"))?;
            }
            _ => claim_run(&mut outs, d)?,
        }
    }
    if !grid.is_empty() {
        outs.claim(out.join("grid.json"))?;
    }

    let (store, labels) = load_preprocessed(input)?;
    let test = test_in.map(load_preprocessed).transpose()?;
    let mut grid_rows = Vec::new();
    for ((d, cfg), combo) in dirs.iter().zip(&cfgs).zip(&combos) {
        let exp = cfg.experiment();
        ensure_dir(d)?;
        write_text(&d.join("config.toml"), &cfg.to_toml())?;
        let result = match mode {
            Mode::Holdout => {
                let (plan, run) = holdout(&store, &labels, &exp)?;
                let s = write_run(d, &plan, &run, &labels)?;
                serde_json::to_value(s).expect("serializable")
            }
            Mode::CrossDataset => {
                let (ts, tl) = test.as_ref().expect("checked above");
                let (plan, run) = cross_dataset(&store, &labels, ts, tl, &exp)?;
                let s = write_run(d, &plan, &run, tl)?;
                serde_json::to_value(s).expect("serializable")
            }
            Mode::Kfold => {
                let (plans, runs) = kfold(&store, &labels, &exp)?;
                let mut folds = Vec::new();
                for (k, (p, r)) in plans.iter().zip(&runs).enumerate() {
                    folds.push(write_run(&d.join(format!("fold{k}")), p, r, &labels)?);
                }
                let reports: Vec<_> = runs.iter().map(|r| r.report.clone()).collect();
                let agg: Vec<FoldAggregate> = aggregate(&reports);
                let doc = serde_json::json!({ "folds": folds, "aggregate": agg });
                write_json(&d.join("aggregate.json"), &doc)?;
                doc
            }
        };
        grid_rows.push(serde_json::json!({
            "dir": d.file_name().map(|f| f.to_string_lossy().into_owned()),
            "overrides": combo.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>(),
            "result": result,
        }));
    }
    if !grid.is_empty() {
        write_json(&out.join("grid.json"), &grid_rows)?;
    }
    Ok(())
}

fn cmd_param_count(base: &PipelineConfig, grid: &[String]) -> Result<(), CliError> {
    for combo in expand_grid(grid)? {
        let mut cfg = base.clone();
        for (k, v) in &combo {
            cfg.set(k, v)?;
        }
        let c = param_count(&cfg.unet)?;
        let row = serde_json::json!({
            "overrides": combo.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>(),
            "conv": c.conv,
            "dense": c.dense,
            "compress_weights": c.compress_weights,
            "total": c.total,
        });
        println!("{row}");
    }
    Ok(())
}
