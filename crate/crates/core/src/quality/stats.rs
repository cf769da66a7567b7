use serde::{Deserialize, Serialize};

use super::label::SegmentLabel;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 for a single value.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("summary of an empty list"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let (min, max) = crate::signal::min_max(values);
        Ok(Self { min, max, mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatistics {
    pub count: usize,
    pub sbp: Summary,
    pub dbp: Summary,
    pub map: Summary,
}

pub fn dataset_statistics(labels: &[SegmentLabel]) -> Result<DatasetStatistics> {
    if labels.is_empty() {
        return Err(invalid("dataset statistics of an empty label list"));
    }
    let col = |f: fn(&SegmentLabel) -> f64| labels.iter().map(f).collect::<Vec<_>>();
    Ok(DatasetStatistics {
        count: labels.len(),
        sbp: Summary::of(&col(|l| l.sbp))?,
        dbp: Summary::of(&col(|l| l.dbp))?,
        map: Summary::of(&col(|l| l.map))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(sbp: f64) -> SegmentLabel {
        SegmentLabel::new(sbp, 70.0, "x").unwrap()
    }

    #[test]
    fn singleton_and_triplet() {
        let s = dataset_statistics(&[l(100.0)]).unwrap();
        assert_eq!(
            (s.sbp.min, s.sbp.max, s.sbp.mean, s.sbp.std),
            (100.0, 100.0, 100.0, 0.0)
        );
        let s = dataset_statistics(&[l(100.0), l(110.0), l(120.0)]).unwrap();
        assert!((s.sbp.mean - 110.0).abs() < 1e-12);
        assert!((s.sbp.std - 10.0).abs() < 1e-12);
        assert!(dataset_statistics(&[]).is_err());
    }

    #[test]
    fn permutation_invariant() {
        let a = dataset_statistics(&[l(100.0), l(130.0), l(117.5)]).unwrap();
        let b = dataset_statistics(&[l(117.5), l(100.0), l(130.0)]).unwrap();
        assert!((a.sbp.mean - b.sbp.mean).abs() < 1e-12);
        assert!((a.sbp.std - b.sbp.std).abs() < 1e-12);
        assert_eq!(a.sbp.min, b.sbp.min);
        assert_eq!(a.sbp.max, b.sbp.max);
    }
}
