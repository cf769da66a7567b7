//! Error metrics, BHS/AAMI standards, hypertension classification,
//! correlation and Bland-Altman statistics, and report assembly.

mod classify;
mod metrics;
mod report;
mod stats;

pub use crate::quality::BpTarget;
pub use classify::{classify_bp, confusion_and_scores, BpClass, ClassScores, ClassificationReport, ConfusionMatrix};
pub use metrics::{
    aami_check, bhs_grade, grade_from_percentages, mae, me_std, AamiResult, AamiViolation, BhsGrade, BhsResult,
    PredictionSet,
};
pub use report::{evaluate, write_report, EvaluationReport, TargetReport};
pub use stats::{bland_altman, error_histogram, pearson_and_fit, BlandAltmanStats, HistogramBin, LinearFit};
