//! Stage orchestration: raw windows to model-ready segments, and the
//! hold-out, k-fold and cross-dataset experiment harnesses.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::autoencoder::{
    extract_features, train, FeatureMatrix, History, Target, TrainData, TrainSpec, UNetConfig, UNetModel,
};
use crate::dataset::{make_folds, make_split, LabelTable, SegmentStore, SplitFractions, SplitPlan};
use crate::error::{invalid, Error, Result};
use crate::evaluation::{evaluate, EvaluationReport, PredictionSet};
use crate::quality::{extract_label, screen_segment, BpTarget, Decision, RejectReason, ScreenConfig, SegmentLabel};
use crate::regressor::{fit, RegressorModel, RegressorSpec};
use crate::signal::{
    correct_baseline, derivative_chain_len, design_bandpass, range_normalize, BaselineConfig, Channel, GlobalMinMax,
    SignalSegment, Units, FS, SEGMENT_LEN,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSettings {
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub taps: usize,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self {
            low_cut_hz: 0.5,
            high_cut_hz: 8.0,
            taps: 65,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub baseline: BaselineConfig,
    pub filter: FilterSettings,
    pub screen: ScreenConfig,
}

/// One line of the screening report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRow {
    pub segment_id: u64,
    pub decision: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessOutput {
    /// Accepted segments with channels PPG, VPG, APG, [ECG,] ABP.
    pub store: SegmentStore,
    pub labels: LabelTable,
    pub report: Vec<ScreenRow>,
    /// Ids whose derivative context had to be reflected.
    pub edge_filled: Vec<u64>,
}

impl PreprocessOutput {
    pub fn rejected(&self) -> usize {
        self.report.iter().filter(|r| r.decision == "reject").count()
    }
}

enum Outcome {
    Accept(Vec<Vec<f64>>, SegmentLabel, bool),
    Reject(RejectReason),
}

fn centre(x: &[f64], len: usize) -> Vec<f64> {
    let start = (x.len() - len) / 2;
    x[start..start + len].to_vec()
}

/// Baseline correction, derivatives, per-segment normalization, labelling
/// and screening for every window of a raw store. `raw` holds PPG and ABP
/// (mmHg), optionally ECG, as `SEGMENT_LEN` samples with or without
/// derivative context on both sides. `subjects[i]` names the source of row
/// `i`; the id is used when absent.
pub fn preprocess(raw: &SegmentStore, subjects: Option<&[String]>, cfg: &PreprocessConfig) -> Result<PreprocessOutput> {
    let ppg_c = raw
        .channel_index(Channel::Ppg)
        .ok_or_else(|| Error::Compatibility("raw store has no PPG channel".into()))?;
    let abp_c = raw
        .channel_index(Channel::Abp)
        .ok_or_else(|| Error::Compatibility("raw store has no ABP channel".into()))?;
    let ecg_c = raw.channel_index(Channel::Ecg);
    if raw.segment_length() < SEGMENT_LEN {
        return Err(Error::Length {
            needed: SEGMENT_LEN,
            got: raw.segment_length(),
        });
    }
    if let Some(s) = subjects {
        if s.len() != raw.len() {
            return Err(invalid("one subject per raw segment is required"));
        }
    }
    let filt = design_bandpass(FS, cfg.filter.low_cut_hz, cfg.filter.high_cut_hz, cfg.filter.taps)?;
    cfg.baseline.validate()?;

    let mut channels = vec![Channel::Ppg, Channel::Vpg, Channel::Apg];
    if ecg_c.is_some() {
        channels.push(Channel::Ecg);
    }
    channels.push(Channel::Abp);
    let mut out = PreprocessOutput {
        store: SegmentStore::new(SEGMENT_LEN, channels)?,
        labels: LabelTable::default(),
        report: Vec::with_capacity(raw.len()),
        edge_filled: Vec::new(),
    };

    for i in 0..raw.len() {
        let id = raw.ids()[i];
        let subject = subjects.map_or_else(|| id.to_string(), |s| s[i].clone());
        let outcome = process_one(raw, i, ppg_c, abp_c, ecg_c, &filt, cfg, &subject)?;
        match outcome {
            Outcome::Accept(rows, label, edge) => {
                let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
                out.store.push(id, &refs)?;
                out.labels.rows.push((id, label));
                if edge {
                    out.edge_filled.push(id);
                }
                out.report.push(ScreenRow {
                    segment_id: id,
                    decision: "accept".into(),
                    reason: String::new(),
                });
            }
            Outcome::Reject(reason) => out.report.push(ScreenRow {
                segment_id: id,
                decision: "reject".into(),
                reason: reason.as_str().into(),
            }),
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn process_one(
    raw: &SegmentStore,
    i: usize,
    ppg_c: usize,
    abp_c: usize,
    ecg_c: Option<usize>,
    filt: &crate::signal::FilterSpec,
    cfg: &PreprocessConfig,
    subject: &str,
) -> Result<Outcome> {
    let seg = |c: usize, units| SignalSegment::new(raw.samples_f64(i, c), FS, Channel::Ppg, units);
    let abp_full = raw.samples_f64(i, abp_c);
    let abp = SignalSegment::new(centre(&abp_full, SEGMENT_LEN), FS, Channel::Abp, Units::MmHg)?;
    let ppg_full = seg(ppg_c, Units::Normalized)?;
    let ecg_full = ecg_c.map(|c| raw.samples_f64(i, c));

    let flat = |x: &[f64]| {
        let c = centre(x, SEGMENT_LEN);
        let (lo, hi) = crate::signal::min_max(&c);
        hi <= lo
    };
    if flat(ppg_full.samples()) || flat(&abp_full) || ecg_full.as_deref().is_some_and(flat) {
        return Ok(Outcome::Reject(RejectReason::Blank));
    }

    let ppg_bc = correct_baseline(&ppg_full, &cfg.baseline)?;
    let deriv = match derivative_chain_len(&ppg_bc, filt, SEGMENT_LEN) {
        Ok(d) => d,
        Err(Error::DegenerateSignal(_)) => return Ok(Outcome::Reject(RejectReason::Blank)),
        Err(e) => return Err(e),
    };
    let normalize = |x: Vec<f64>, ch| -> Result<Option<SignalSegment>> {
        match range_normalize(&SignalSegment::new(x, FS, ch, Units::Normalized)?) {
            Ok(s) => Ok(Some(s)),
            Err(Error::DegenerateSignal(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let Some(ppg) = normalize(centre(ppg_bc.samples(), SEGMENT_LEN), Channel::Ppg)? else {
        return Ok(Outcome::Reject(RejectReason::Blank));
    };
    let ecg = match ecg_full {
        Some(x) => {
            let bc = correct_baseline(
                &SignalSegment::new(x, FS, Channel::Ecg, Units::Normalized)?,
                &cfg.baseline,
            )?;
            match normalize(centre(bc.samples(), SEGMENT_LEN), Channel::Ecg)? {
                Some(s) => Some(s),
                None => return Ok(Outcome::Reject(RejectReason::Blank)),
            }
        }
        None => None,
    };

    let mut label = match extract_label(&abp, &cfg.screen.peaks) {
        Ok(l) => l,
        Err(Error::Unlabelable(_)) | Err(Error::InvalidArgument(_)) => {
            return Ok(Outcome::Reject(RejectReason::DistortedIntervals))
        }
        Err(e) => return Err(e),
    };
    label.subject_id = subject.to_string();

    let mut screened = vec![ppg.clone(), abp.clone()];
    if let Some(e) = &ecg {
        screened.push(e.clone());
    }
    if let Decision::Reject(r) = screen_segment(&screened, &label, &cfg.screen) {
        return Ok(Outcome::Reject(r));
    }
    let mut rows = vec![ppg.into_samples(), deriv.vpg.into_samples(), deriv.apg.into_samples()];
    if let Some(e) = ecg {
        rows.push(e.into_samples());
    }
    rows.push(abp.into_samples());
    Ok(Outcome::Accept(rows, label, deriv.edge_filled))
}

/// The four supported input channel sets.
pub const CHANNEL_SETS: [&[Channel]; 4] = [
    &[Channel::Ppg],
    &[Channel::Ppg, Channel::Ecg],
    &[Channel::Ppg, Channel::Vpg, Channel::Apg],
    &[Channel::Ppg, Channel::Vpg, Channel::Apg, Channel::Ecg],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub channels: Vec<Channel>,
    pub unet: UNetConfig,
    pub train: TrainSpec,
    pub regressor: RegressorSpec,
    pub split: SplitFractions,
    pub split_seed: u64,
    pub folds: usize,
    pub histogram_bin_width: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channels: CHANNEL_SETS[3].to_vec(),
            unet: UNetConfig::default(),
            train: TrainSpec::default(),
            regressor: RegressorSpec::default(),
            split: SplitFractions::default(),
            split_seed: 0,
            folds: 5,
            histogram_bin_width: 5.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !CHANNEL_SETS.contains(&self.channels.as_slice()) {
            return Err(invalid(format!(
                "channel set {:?} is not one of PPG | PPG,ECG | PPG,VPG,APG | PPG,VPG,APG,ECG",
                self.channels
            )));
        }
        if self.unet.in_channels != self.channels.len() {
            return Err(invalid(format!(
                "unet.in_channels is {} but {} channels are selected",
                self.unet.in_channels,
                self.channels.len()
            )));
        }
        self.unet.validate()?;
        self.train.validate()?;
        if !(self.histogram_bin_width > 0.0) {
            return Err(invalid("histogram bin width must be positive"));
        }
        Ok(())
    }
}

/// Targets for the autoencoder: globally scaled ABP, or the PPG channel.
pub fn train_data(store: &SegmentStore, cfg: &ExperimentConfig, scale: Option<&GlobalMinMax>) -> Result<TrainData> {
    match cfg.unet.target {
        Target::Abp => TrainData::from_store(store, &cfg.channels, Channel::Abp, scale),
        Target::Ppg => TrainData::from_store(store, &cfg.channels, Channel::Ppg, None),
    }
}

/// ABP min-max over the given segments.
pub fn abp_scale(store: &SegmentStore) -> Result<GlobalMinMax> {
    let c = store
        .channel_index(Channel::Abp)
        .ok_or_else(|| Error::Compatibility("store has no ABP channel".into()))?;
    let all: Vec<Vec<f64>> = (0..store.len()).map(|i| store.samples_f64(i, c)).collect();
    GlobalMinMax::from_slices(all.iter().map(|v| v.as_slice()))
}

fn subset(store: &SegmentStore, ids: &[u64]) -> Result<SegmentStore> {
    let pos = ids
        .iter()
        .map(|&id| {
            store
                .position_of(id)
                .ok_or_else(|| Error::Compatibility(format!("segment {id} is not in the store")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(store.select(&pos))
}

/// Trains the autoencoder on `train_ids`, stopping on `val_ids`.
pub fn train_autoencoder(
    store: &SegmentStore,
    train_ids: &[u64],
    val_ids: &[u64],
    cfg: &ExperimentConfig,
) -> Result<(UNetModel, History)> {
    cfg.validate()?;
    let dev = subset(store, &[train_ids, val_ids].concat())?;
    let scale = match cfg.unet.target {
        Target::Abp => Some(abp_scale(&dev)?),
        Target::Ppg => None,
    };
    let tr = train_data(&subset(store, train_ids)?, cfg, scale.as_ref())?;
    let va = train_data(&subset(store, val_ids)?, cfg, scale.as_ref())?;
    let mut model = UNetModel::init(cfg.unet, cfg.train.seed)?;
    model.set_input_channels(cfg.channels.clone())?;
    model.target_scale = scale;
    train(model, &tr, &va, &cfg.train)
}

/// Fits the SBP and DBP regressors on features of the given rows.
pub fn fit_regressors(
    features: &FeatureMatrix,
    labels: &LabelTable,
    spec: &RegressorSpec,
) -> Result<[RegressorModel; 2]> {
    let l = labels.lookup(&features.ids)?;
    let fit_one = |t: BpTarget| {
        let y: Vec<f64> = l.iter().map(|x| x.value(t)).collect();
        fit(features, &y, t, spec)
    };
    Ok([fit_one(BpTarget::Sbp)?, fit_one(BpTarget::Dbp)?])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: u64,
    pub sbp_true: f64,
    pub sbp_pred: f64,
    pub dbp_true: f64,
    pub dbp_pred: f64,
}

/// Prediction sets per target, with subject counts from the labels.
pub fn prediction_sets(rows: &[PredictionRow], labels: &LabelTable) -> Result<Vec<PredictionSet>> {
    let subjects: HashSet<String> = labels
        .lookup(&rows.iter().map(|r| r.id).collect::<Vec<_>>())?
        .into_iter()
        .map(|l| l.subject_id)
        .collect();
    Ok(vec![
        PredictionSet::new(
            rows.iter().map(|r| r.sbp_true).collect(),
            rows.iter().map(|r| r.sbp_pred).collect(),
            BpTarget::Sbp,
            subjects.len(),
        )?,
        PredictionSet::new(
            rows.iter().map(|r| r.dbp_true).collect(),
            rows.iter().map(|r| r.dbp_pred).collect(),
            BpTarget::Dbp,
            subjects.len(),
        )?,
    ])
}

pub fn predict_rows(
    features: &FeatureMatrix,
    regressors: &[RegressorModel; 2],
    labels: &LabelTable,
) -> Result<Vec<PredictionRow>> {
    let sbp = regressors[0].predict(features)?;
    let dbp = regressors[1].predict(features)?;
    let truth = labels.lookup(&features.ids)?;
    Ok(features
        .ids
        .iter()
        .zip(truth)
        .enumerate()
        .map(|(i, (&id, l))| PredictionRow {
            id,
            sbp_true: l.sbp,
            sbp_pred: sbp[i],
            dbp_true: l.dbp,
            dbp_pred: dbp[i],
        })
        .collect())
}

/// Result of one train/evaluate cycle.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub model: UNetModel,
    pub history: History,
    pub regressors: [RegressorModel; 2],
    pub predictions: Vec<PredictionRow>,
    pub report: EvaluationReport,
    /// Test MAE of predicting the development-set mean, SBP then DBP.
    pub mean_baseline_mae: [f64; 2],
}

/// Full two-stage run: the autoencoder is trained on `train_ids` with
/// early stopping on `val_ids`; the regressors are fitted on the features
/// of both and evaluated on `test_ids`, which may come from another store.
#[allow(clippy::too_many_arguments)]
pub fn run_once(
    store: &SegmentStore,
    labels: &LabelTable,
    train_ids: &[u64],
    val_ids: &[u64],
    test_store: &SegmentStore,
    test_labels: &LabelTable,
    test_ids: &[u64],
    cfg: &ExperimentConfig,
) -> Result<RunOutput> {
    if train_ids.is_empty() || val_ids.is_empty() || test_ids.is_empty() {
        return Err(invalid("train, validation and test sets must all be non-empty"));
    }
    let (model, history) = train_autoencoder(store, train_ids, val_ids, cfg)?;
    let dev_ids = [train_ids, val_ids].concat();
    let dev_features = extract_features(&model, &subset(store, &dev_ids)?)?;
    let regressors = fit_regressors(&dev_features, labels, &cfg.regressor)?;
    let test_features = extract_features(&model, &subset(test_store, test_ids)?)?;
    let predictions = predict_rows(&test_features, &regressors, test_labels)?;
    let sets = prediction_sets(&predictions, test_labels)?;
    let report = evaluate(&sets, cfg.histogram_bin_width)?;
    let dev_labels = labels.lookup(&dev_ids)?;
    let mut mean_baseline_mae = [0.0; 2];
    for (k, t) in BpTarget::BOTH.into_iter().enumerate() {
        let mean = dev_labels.iter().map(|l| l.value(t)).sum::<f64>() / dev_labels.len() as f64;
        mean_baseline_mae[k] = sets[k].truth.iter().map(|y| (y - mean).abs()).sum::<f64>() / sets[k].len() as f64;
    }
    Ok(RunOutput {
        model,
        history,
        regressors,
        predictions,
        report,
        mean_baseline_mae,
    })
}

pub fn holdout_plan(store: &SegmentStore, cfg: &ExperimentConfig) -> Result<SplitPlan> {
    make_split(store.ids(), &cfg.split, cfg.split_seed)
}

pub fn holdout(store: &SegmentStore, labels: &LabelTable, cfg: &ExperimentConfig) -> Result<(SplitPlan, RunOutput)> {
    let plan = holdout_plan(store, cfg)?;
    let run = run_once(
        store,
        labels,
        &plan.train_ids,
        &plan.val_ids,
        store,
        labels,
        &plan.test_ids,
        cfg,
    )?;
    Ok((plan, run))
}

/// Per fold: the other folds are split into training and validation by the
/// configured validation share, and the fold itself is the test set.
pub fn fold_splits(store: &SegmentStore, cfg: &ExperimentConfig) -> Result<Vec<SplitPlan>> {
    let plan = make_folds(store.ids(), cfg.folds, cfg.split_seed)?;
    let carve = SplitFractions {
        train: 1.0,
        test: 0.0,
        validation: cfg.split.validation,
    };
    (0..cfg.folds)
        .map(|k| {
            let (rest, test) = plan.fold(k);
            let inner = make_split(&rest, &carve, cfg.split_seed.wrapping_add(k as u64 + 1))?;
            Ok(SplitPlan {
                train_ids: inner.train_ids,
                val_ids: inner.val_ids,
                test_ids: test,
                seed: cfg.split_seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Mean and standard deviation across folds of the headline metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAggregate {
    pub target: BpTarget,
    pub mae: MeanStd,
    pub me: MeanStd,
    pub std: MeanStd,
}

pub fn aggregate(reports: &[EvaluationReport]) -> Vec<FoldAggregate> {
    BpTarget::BOTH
        .iter()
        .filter_map(|&t| {
            let rows: Vec<_> = reports.iter().filter_map(|r| r.get(t)).collect();
            if rows.is_empty() {
                return None;
            }
            let col = |f: fn(&crate::evaluation::TargetReport) -> f64| {
                MeanStd::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            Some(FoldAggregate {
                target: t,
                mae: col(|r| r.mae),
                me: col(|r| r.me),
                std: col(|r| r.std),
            })
        })
        .collect()
}

pub fn kfold(
    store: &SegmentStore,
    labels: &LabelTable,
    cfg: &ExperimentConfig,
) -> Result<(Vec<SplitPlan>, Vec<RunOutput>)> {
    let plans = fold_splits(store, cfg)?;
    let runs = plans
        .iter()
        .map(|p| run_once(store, labels, &p.train_ids, &p.val_ids, store, labels, &p.test_ids, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok((plans, runs))
}

/// Trains on all of store A (with a validation carve-out) and tests on all
/// of store B.
pub fn cross_dataset(
    train_store: &SegmentStore,
    train_labels: &LabelTable,
    test_store: &SegmentStore,
    test_labels: &LabelTable,
    cfg: &ExperimentConfig,
) -> Result<(SplitPlan, RunOutput)> {
    let carve = SplitFractions {
        train: 1.0,
        test: 0.0,
        validation: cfg.split.validation,
    };
    let mut plan = make_split(train_store.ids(), &carve, cfg.split_seed)?;
    plan.test_ids = test_store.ids().to_vec();
    let run = run_once(
        train_store,
        train_labels,
        &plan.train_ids,
        &plan.val_ids,
        test_store,
        test_labels,
        &plan.test_ids,
        cfg,
    )?;
    Ok((plan, run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_generate, SynthConfig};

    #[test]
    fn synthetic_windows_all_pass() {
        let raw = synth_generate(20, 7, &SynthConfig::default()).unwrap();
        let subjects: Vec<String> = raw.labels.rows.iter().map(|(_, l)| l.subject_id.clone()).collect();
        let out = preprocess(&raw.store, Some(&subjects), &PreprocessConfig::default()).unwrap();
        assert_eq!(out.store.len(), 20, "{:?}", out.report);
        assert_eq!(out.rejected(), 0);
        assert!(out.edge_filled.is_empty());
        assert_eq!(
            out.store.channels(),
            &[Channel::Ppg, Channel::Vpg, Channel::Apg, Channel::Ecg, Channel::Abp]
        );
        for ((_, got), (_, want)) in out.labels.rows.iter().zip(&raw.labels.rows) {
            assert!((got.sbp - want.sbp).abs() < 1.0 && (got.dbp - want.dbp).abs() < 1.0);
            assert_eq!(got.subject_id, want.subject_id);
        }
        for i in 0..out.store.len() {
            for c in 0..4 {
                let (lo, hi) = crate::signal::min_max(&out.store.samples_f64(i, c));
                assert!(lo.abs() < 1e-6 && (hi - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn flat_abp_is_blank() {
        let raw = synth_generate(3, 1, &SynthConfig::default()).unwrap();
        let mut store = SegmentStore::new(raw.store.segment_length(), raw.store.channels().to_vec()).unwrap();
        for i in 0..3 {
            let mut rows: Vec<Vec<f64>> = (0..3).map(|c| raw.store.samples_f64(i, c)).collect();
            if i == 1 {
                rows[2] = vec![95.0; rows[2].len()];
            }
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            store.push(raw.store.ids()[i], &refs).unwrap();
        }
        let out = preprocess(&store, None, &PreprocessConfig::default()).unwrap();
        assert_eq!(out.store.len(), 2);
        assert_eq!(out.report[1].reason, "blank");
        assert_eq!(out.labels.rows[0].1.subject_id, "0");
    }

    #[test]
    fn fold_plans_cover_and_carve() {
        let mut store = SegmentStore::new(4, vec![Channel::Ppg]).unwrap();
        for id in 0..50 {
            store.push(id, &[&[0.0, 1.0, 0.5, 0.2]]).unwrap();
        }
        let cfg = ExperimentConfig::default();
        let plans = fold_splits(&store, &cfg).unwrap();
        let mut tests: Vec<u64> = plans.iter().flat_map(|p| p.test_ids.clone()).collect();
        tests.sort();
        assert_eq!(tests, (0..50).collect::<Vec<_>>());
        for p in &plans {
            assert_eq!(p.train_ids.len() + p.val_ids.len() + p.test_ids.len(), 50);
            assert_eq!(p.val_ids.len(), 8);
        }
    }

    #[test]
    fn channel_sets_are_checked() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.channels = vec![Channel::Ecg];
        cfg.unet.in_channels = 1;
        assert!(cfg.validate().is_err());
        cfg.channels = vec![Channel::Ppg, Channel::Ecg];
        assert!(cfg.validate().is_err());
        cfg.unet.in_channels = 2;
        assert!(cfg.validate().is_ok());
    }
}
