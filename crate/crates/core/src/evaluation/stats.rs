use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::metrics::{me_std, PredictionSet};
use crate::error::{invalid, Error, Result};

/// Least-squares line `pred = beta0 + beta1 * truth` and the sample Pearson
/// correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub beta0: f64,
    pub beta1: f64,
    pub r: f64,
    /// Two-sided p-value of the t-test on `r` with n-2 degrees of freedom.
    pub p_value: f64,
    pub p_below_005: bool,
}

pub fn pearson_and_fit(ps: &PredictionSet) -> Result<LinearFit> {
    let n = ps.len();
    if n < 3 {
        return Err(invalid("correlation needs at least three pairs"));
    }
    let (x, y) = (&ps.truth, &ps.pred);
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("one of the variables is constant".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let beta1 = r * (syy / sxx).sqrt();
    let beta0 = my - beta1 * mx;
    let df = (n - 2) as f64;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numeric(e.to_string()))?;
        2.0 * dist.sf(t.abs())
    };
    Ok(LinearFit {
        beta0,
        beta1,
        r,
        p_value,
        p_below_005: p_value < 0.05,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltmanStats {
    pub mu: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    /// `(mean of pair, pred - truth)` per pair.
    pub points: Vec<(f64, f64)>,
    /// Same statistics over absolute differences.
    pub abs_mu: f64,
    pub abs_sigma: f64,
    pub abs_lower: f64,
    pub abs_upper: f64,
}

pub fn bland_altman(ps: &PredictionSet) -> Result<BlandAltmanStats> {
    let (mu, sigma) = me_std(ps)?;
    let n = ps.len() as f64;
    let abs_mu = ps.errors().map(f64::abs).sum::<f64>() / n;
    let abs_sigma = (ps.errors().map(|e| (e.abs() - abs_mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(BlandAltmanStats {
        mu,
        sigma,
        lower: mu - 1.96 * sigma,
        upper: mu + 1.96 * sigma,
        points: ps
            .truth
            .iter()
            .zip(&ps.pred)
            .map(|(t, p)| ((p + t) / 2.0, p - t))
            .collect(),
        abs_mu,
        abs_sigma,
        abs_lower: abs_mu - 1.96 * abs_sigma,
        abs_upper: abs_mu + 1.96 * abs_sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Counts of absolute errors in `[k w, (k+1) w)` bins, from 0 up to the
/// bin holding the largest error.
pub fn error_histogram(ps: &PredictionSet, bin_width: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(invalid("bin width must be positive"));
    }
    let idx: Vec<usize> = ps.errors().map(|e| (e.abs() / bin_width).floor() as usize).collect();
    let n_bins = idx.iter().max().map_or(0, |m| m + 1);
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|k| HistogramBin {
            lo: k as f64 * bin_width,
            hi: (k + 1) as f64 * bin_width,
            count: 0,
        })
        .collect();
    for i in idx {
        bins[i].count += 1;
    }
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::BpTarget;

    fn ps(truth: Vec<f64>, pred: Vec<f64>) -> PredictionSet {
        PredictionSet::new(truth, pred, BpTarget::Dbp, 1).unwrap()
    }

    #[test]
    fn perfect_and_anti_correlation() {
        let y = vec![70.0, 80.0, 95.0, 60.0];
        let f = pearson_and_fit(&ps(y.clone(), y.clone())).unwrap();
        assert_eq!((f.r, f.beta1), (1.0, 1.0));
        assert!(f.beta0.abs() < 1e-12);
        let anti: Vec<f64> = y.iter().map(|v| 200.0 - v).collect();
        let f = pearson_and_fit(&ps(y.clone(), anti)).unwrap();
        assert!((f.r + 1.0).abs() < 1e-15 && (f.beta1 + 1.0).abs() < 1e-12);
        assert!(matches!(
            pearson_and_fit(&ps(y, vec![5.0; 4])),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn p_value_against_known_critical_value() {
        // For df = 10 the two-sided 5% critical t is 2.228139; r = t / sqrt(t^2 + df).
        let t: f64 = 2.228139;
        let r_crit = t / (t * t + 10.0).sqrt();
        let n = 12;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        // Build y with a chosen correlation: y = r x_c + sqrt(1-r^2) e_c, e orthogonal to x.
        let e: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * ((i / 2) as f64 - 2.5))
            .collect();
        let center = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| a - m).collect::<Vec<_>>()
        };
        let xc = center(&x);
        let mut ec = center(&e);
        let proj = ec.iter().zip(&xc).map(|(a, b)| a * b).sum::<f64>() / xc.iter().map(|a| a * a).sum::<f64>();
        ec.iter_mut().zip(&xc).for_each(|(a, b)| *a -= proj * b);
        let nx = xc.iter().map(|a| a * a).sum::<f64>().sqrt();
        let ne = ec.iter().map(|a| a * a).sum::<f64>().sqrt();
        for (r, below) in [(r_crit + 0.01, true), (r_crit - 0.01, false)] {
            let y: Vec<f64> = xc
                .iter()
                .zip(&ec)
                .map(|(a, b)| 100.0 + r * a / nx + (1.0 - r * r).sqrt() * b / ne)
                .collect();
            let f = pearson_and_fit(&ps(x.clone(), y)).unwrap();
            assert!((f.r - r).abs() < 1e-12);
            assert_eq!(f.p_below_005, below);
        }
    }

    #[test]
    fn bland_altman_cases() {
        let t = vec![100.0, 120.0, 140.0];
        let b = bland_altman(&ps(t.clone(), t.clone())).unwrap();
        assert_eq!((b.mu, b.sigma, b.lower, b.upper), (0.0, 0.0, 0.0, 0.0));
        let shifted: Vec<f64> = t.iter().map(|v| v + 3.0).collect();
        let b = bland_altman(&ps(t.clone(), shifted)).unwrap();
        assert_eq!((b.mu, b.sigma), (3.0, 0.0));
        assert_eq!(b.points[1], (121.5, 3.0));
        let b = bland_altman(&ps(t, vec![98.0, 120.0, 142.0])).unwrap();
        assert_eq!(b.mu, 0.0);
        assert!((b.abs_mu - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_binning() {
        let h = error_histogram(&ps(vec![0.0; 3], vec![1.0, -6.0, 11.0]), 5.0).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1, 1]);
        assert_eq!((h[1].lo, h[1].hi), (5.0, 10.0));
        let h = error_histogram(&ps(vec![1.0; 4], vec![1.0; 4]), 2.0).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].count, 4);
        let h = error_histogram(&ps(vec![0.0], vec![5.0]), 5.0).unwrap();
        assert_eq!(h[1].count, 1);
        assert!(error_histogram(&ps(vec![0.0], vec![5.0]), 0.0).is_err());
    }
}
