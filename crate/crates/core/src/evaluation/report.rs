use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classify::{classify_bp, confusion_and_scores, ClassificationReport};
use super::metrics::{aami_check, bhs_grade, mae, me_std, AamiResult, BhsResult, PredictionSet};
use super::stats::{bland_altman, error_histogram, pearson_and_fit, BlandAltmanStats, HistogramBin, LinearFit};
use crate::error::{Error, Result};
use crate::quality::BpTarget;

/// Every metric for one target. The per-pair plot data is written to CSV
/// rather than embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: BpTarget,
    pub n: usize,
    pub n_subjects: usize,
    pub mae: f64,
    pub me: f64,
    pub std: f64,
    pub bhs: BhsResult,
    pub aami: AamiResult,
    /// Absent when either variable is constant.
    pub fit: Option<LinearFit>,
    #[serde(skip)]
    pub bland_altman: Option<BlandAltmanStats>,
    pub bland_altman_mu: f64,
    pub bland_altman_sigma: f64,
    pub bland_altman_limits: (f64, f64),
    pub bland_altman_abs_mu: f64,
    pub bland_altman_abs_limits: (f64, f64),
    pub classification: ClassificationReport,
    pub histogram_bin_width: f64,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub targets: Vec<TargetReport>,
}

impl EvaluationReport {
    pub fn get(&self, target: BpTarget) -> Option<&TargetReport> {
        self.targets.iter().find(|t| t.target == target)
    }
}

fn target_report(ps: &PredictionSet, bin_width: f64) -> Result<TargetReport> {
    let (me, std) = me_std(ps)?;
    let fit = match pearson_and_fit(ps) {
        Ok(f) => Some(f),
        Err(Error::UndefinedCorrelation(_)) => None,
        Err(e) => return Err(e),
    };
    let ba = bland_altman(ps)?;
    let truth: Vec<_> = ps.truth.iter().map(|&v| classify_bp(v, ps.target)).collect();
    let pred: Vec<_> = ps.pred.iter().map(|&v| classify_bp(v, ps.target)).collect();
    Ok(TargetReport {
        target: ps.target,
        n: ps.len(),
        n_subjects: ps.n_subjects,
        mae: mae(ps),
        me,
        std,
        bhs: bhs_grade(ps),
        aami: aami_check(me, std, ps.n_subjects),
        fit,
        bland_altman_mu: ba.mu,
        bland_altman_sigma: ba.sigma,
        bland_altman_limits: (ba.lower, ba.upper),
        bland_altman_abs_mu: ba.abs_mu,
        bland_altman_abs_limits: (ba.abs_lower, ba.abs_upper),
        bland_altman: Some(ba),
        classification: confusion_and_scores(&truth, &pred)?,
        histogram_bin_width: bin_width,
        histogram: error_histogram(ps, bin_width)?,
    })
}

pub fn evaluate(sets: &[PredictionSet], bin_width: f64) -> Result<EvaluationReport> {
    Ok(EvaluationReport {
        targets: sets
            .iter()
            .map(|ps| target_report(ps, bin_width))
            .collect::<Result<_>>()?,
    })
}

/// Writes `report.json` into `dir` and, per target, a subdirectory holding
/// `regression_points.csv`, `bland_altman.csv` and `error_hist.csv`.
pub fn write_report(report: &EvaluationReport, sets: &[PredictionSet], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Numeric(e.to_string()))?;
    fs::write(dir.join("report.json"), json + "\n")?;
    for (tr, ps) in report.targets.iter().zip(sets) {
        let sub = dir.join(tr.target.name().to_lowercase());
        fs::create_dir_all(&sub)?;
        let mut w = csv::Writer::from_path(sub.join("regression_points.csv"))?;
        w.write_record(["truth", "pred"])?;
        for (t, p) in ps.truth.iter().zip(&ps.pred) {
            w.write_record([t.to_string(), p.to_string()])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(sub.join("bland_altman.csv"))?;
        w.write_record(["mean", "diff"])?;
        if let Some(ba) = &tr.bland_altman {
            for (m, d) in &ba.points {
                w.write_record([m.to_string(), d.to_string()])?;
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(sub.join("error_hist.csv"))?;
        w.write_record(["bin_lo", "bin_hi", "count"])?;
        for b in &tr.histogram {
            w.write_record([b.lo.to_string(), b.hi.to_string(), b.count.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}
