use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quality::BpTarget;

/// Ground truth and predictions (mmHg) for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub truth: Vec<f64>,
    pub pred: Vec<f64>,
    pub target: BpTarget,
    pub n_subjects: usize,
}

impl PredictionSet {
    pub fn new(truth: Vec<f64>, pred: Vec<f64>, target: BpTarget, n_subjects: usize) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(invalid(format!(
                "{} truths but {} predictions",
                truth.len(),
                pred.len()
            )));
        }
        if truth.is_empty() {
            return Err(invalid("prediction set is empty"));
        }
        if truth.iter().chain(&pred).any(|v| !v.is_finite()) {
            return Err(invalid("prediction set has non-finite values"));
        }
        Ok(Self {
            truth,
            pred,
            target,
            n_subjects,
        })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    /// Signed errors `pred - truth`.
    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.pred.iter().zip(&self.truth).map(|(p, t)| p - t)
    }
}

pub fn mae(ps: &PredictionSet) -> f64 {
    ps.errors().map(f64::abs).sum::<f64>() / ps.len() as f64
}

/// Mean error and its sample (n-1) standard deviation.
pub fn me_std(ps: &PredictionSet) -> Result<(f64, f64)> {
    let n = ps.len();
    if n < 2 {
        return Err(invalid("standard deviation needs at least two pairs"));
    }
    let me = ps.errors().sum::<f64>() / n as f64;
    let ss = ps.errors().map(|e| (e - me) * (e - me)).sum::<f64>();
    Ok((me, (ss / (n - 1) as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BhsGrade {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhsResult {
    pub pct5: f64,
    pub pct10: f64,
    pub pct15: f64,
    pub grade: BhsGrade,
}

/// Best grade whose three cumulative thresholds are all met.
pub fn grade_from_percentages(pct5: f64, pct10: f64, pct15: f64) -> BhsGrade {
    const ROWS: [(BhsGrade, [f64; 3]); 3] = [
        (BhsGrade::A, [60.0, 85.0, 95.0]),
        (BhsGrade::B, [50.0, 75.0, 90.0]),
        (BhsGrade::C, [40.0, 65.0, 85.0]),
    ];
    ROWS.iter()
        .find(|(_, t)| pct5 >= t[0] && pct10 >= t[1] && pct15 >= t[2])
        .map_or(BhsGrade::D, |(g, _)| *g)
}

/// Share of absolute errors at or below 5, 10 and 15 mmHg.
pub fn bhs_grade(ps: &PredictionSet) -> BhsResult {
    let n = ps.len() as f64;
    let pct = |lim: f64| 100.0 * ps.errors().filter(|e| e.abs() <= lim).count() as f64 / n;
    let (pct5, pct10, pct15) = (pct(5.0), pct(10.0), pct(15.0));
    BhsResult {
        pct5,
        pct10,
        pct15,
        grade: grade_from_percentages(pct5, pct10, pct15),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AamiViolation {
    MeanError,
    StdDev,
    Subjects,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AamiResult {
    pub pass: bool,
    pub violations: Vec<AamiViolation>,
}

/// `|ME| <= 5`, `STD <= 8` and at least 85 subjects.
pub fn aami_check(me: f64, std: f64, n_subjects: usize) -> AamiResult {
    let mut violations = Vec::new();
    if me.abs() > 5.0 || me.is_nan() {
        violations.push(AamiViolation::MeanError);
    }
    if std > 8.0 || std.is_nan() {
        violations.push(AamiViolation::StdDev);
    }
    if n_subjects < 85 {
        violations.push(AamiViolation::Subjects);
    }
    AamiResult {
        pass: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(truth: &[f64], pred: &[f64]) -> PredictionSet {
        PredictionSet::new(truth.to_vec(), pred.to_vec(), BpTarget::Sbp, 1).unwrap()
    }

    #[test]
    fn hand_arithmetic() {
        let p = ps(&[100.0, 110.0, 120.0], &[101.0, 108.0, 123.0]);
        assert!((mae(&p) - 2.0).abs() < 1e-15);
        let (me, sd) = me_std(&p).unwrap();
        assert!((me - 2.0 / 3.0).abs() < 1e-15);
        // errors 1, -2, 3
        let direct = (((1.0 - me) * (1.0 - me) + (-2.0 - me) * (-2.0 - me) + (3.0 - me) * (3.0 - me)) / 2.0f64).sqrt();
        assert!((sd - direct).abs() < 1e-15);
        let same = ps(&[90.0, 91.0], &[90.0, 91.0]);
        assert_eq!(mae(&same), 0.0);
        assert_eq!(me_std(&same).unwrap(), (0.0, 0.0));
        assert!(me_std(&ps(&[1.0], &[2.0])).is_err());
    }

    #[test]
    fn grade_thresholds() {
        assert_eq!(grade_from_percentages(60.0, 85.0, 95.0), BhsGrade::A);
        assert_eq!(grade_from_percentages(59.99, 85.0, 95.0), BhsGrade::B);
        assert_eq!(grade_from_percentages(100.0, 100.0, 84.9), BhsGrade::D);
        let p = ps(&[0.0; 4], &[5.0, -10.0, 15.0, 15.01]);
        let r = bhs_grade(&p);
        assert_eq!((r.pct5, r.pct10, r.pct15), (25.0, 50.0, 75.0));
        assert_eq!(r.grade, BhsGrade::D);
    }

    #[test]
    fn aami_clauses() {
        assert!(aami_check(-5.0, 8.0, 85).pass);
        assert_eq!(aami_check(6.0, 7.0, 942).violations, vec![AamiViolation::MeanError]);
        assert_eq!(
            aami_check(6.0, 9.0, 10).violations,
            vec![AamiViolation::MeanError, AamiViolation::StdDev, AamiViolation::Subjects]
        );
    }
}
