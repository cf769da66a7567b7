use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quality::BpTarget;

/// Ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BpClass {
    Normotension,
    Prehypertension,
    Hypertension,
}

impl BpClass {
    pub const ALL: [BpClass; 3] = [BpClass::Normotension, BpClass::Prehypertension, BpClass::Hypertension];

    fn index(self) -> usize {
        self as usize
    }
}

/// Upper bounds are inclusive: SBP 120 and DBP 80 are normotensive.
pub fn classify_bp(value: f64, target: BpTarget) -> BpClass {
    let (normal, pre) = match target {
        BpTarget::Sbp => (120.0, 140.0),
        BpTarget::Dbp => (80.0, 90.0),
    };
    if value <= normal {
        BpClass::Normotension
    } else if value <= pre {
        BpClass::Prehypertension
    } else {
        BpClass::Hypertension
    }
}

/// Rows are true classes, columns predicted classes, both in `BpClass::ALL`
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn tp(&self, c: BpClass) -> usize {
        self.counts[c.index()][c.index()]
    }

    pub fn fp(&self, c: BpClass) -> usize {
        (0..3).map(|r| self.counts[r][c.index()]).sum::<usize>() - self.tp(c)
    }

    pub fn fn_(&self, c: BpClass) -> usize {
        self.counts[c.index()].iter().sum::<usize>() - self.tp(c)
    }

    pub fn tn(&self, c: BpClass) -> usize {
        self.total() - self.tp(c) - self.fp(c) - self.fn_(c)
    }
}

/// One-vs-rest scores; a ratio with a zero denominator is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: BpClass,
    pub support: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub confusion: ConfusionMatrix,
    pub scores: Vec<ClassScores>,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion_and_scores(truth: &[BpClass], pred: &[BpClass]) -> Result<ClassificationReport> {
    if truth.len() != pred.len() || truth.is_empty() {
        return Err(invalid(format!(
            "class lists must be non-empty and equal length, got {} and {}",
            truth.len(),
            pred.len()
        )));
    }
    let mut counts = [[0usize; 3]; 3];
    for (t, p) in truth.iter().zip(pred) {
        counts[t.index()][p.index()] += 1;
    }
    let confusion = ConfusionMatrix { counts };
    let scores = BpClass::ALL
        .iter()
        .map(|&c| {
            let (tp, fp, fn_) = (confusion.tp(c), confusion.fp(c), confusion.fn_(c));
            ClassScores {
                class: c,
                support: tp + fn_,
                precision: ratio(tp, tp + fp),
                recall: ratio(tp, tp + fn_),
                f1: ratio(2 * tp, 2 * tp + fp + fn_),
            }
        })
        .collect();
    let trace: usize = (0..3).map(|i| counts[i][i]).sum();
    Ok(ClassificationReport {
        confusion,
        scores,
        accuracy: trace as f64 / truth.len() as f64,
    })
}
