use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitFractions {
    pub train: f64,
    pub test: f64,
    /// Share of the training part carved out for validation.
    pub validation: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.75,
            test: 0.25,
            validation: 0.20,
        }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        if !(self.train >= 0.0 && self.test >= 0.0 && (self.train + self.test - 1.0).abs() < 1e-9) {
            return Err(invalid(format!(
                "train and test fractions must be non-negative and sum to 1, got {} + {}",
                self.train, self.test
            )));
        }
        if !(0.0..1.0).contains(&self.validation) {
            return Err(invalid(format!(
                "validation fraction must be in [0, 1), got {}",
                self.validation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_ids: Vec<u64>,
    pub val_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
    pub seed: u64,
}

impl SplitPlan {
    /// Training and validation ids together.
    pub fn development_ids(&self) -> Vec<u64> {
        let mut v = self.train_ids.clone();
        v.extend_from_slice(&self.val_ids);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<u64>>,
    pub seed: u64,
}

impl FoldPlan {
    /// (training ids, held-out ids) for fold `k`.
    pub fn fold(&self, k: usize) -> (Vec<u64>, Vec<u64>) {
        let train = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        (train, self.folds[k].clone())
    }
}

fn shuffled_unique(ids: &[u64], seed: u64) -> Result<Vec<u64>> {
    if ids.is_empty() {
        return Err(invalid("cannot split an empty id list"));
    }
    let mut v = ids.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != ids.len() {
        return Err(invalid("segment ids must be unique"));
    }
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(v)
}

/// Random instance-level split. The result depends only on the id set and
/// the seed, not on input order.
pub fn make_split(ids: &[u64], fractions: &SplitFractions, seed: u64) -> Result<SplitPlan> {
    fractions.validate()?;
    let v = shuffled_unique(ids, seed)?;
    let n_test = (fractions.test * v.len() as f64).round() as usize;
    let (dev, test) = v.split_at(v.len() - n_test);
    let n_val = (fractions.validation * dev.len() as f64).round() as usize;
    let (train, val) = dev.split_at(dev.len() - n_val);
    Ok(SplitPlan {
        train_ids: train.to_vec(),
        val_ids: val.to_vec(),
        test_ids: test.to_vec(),
        seed,
    })
}

/// Split that keeps every subject's segments on one side. Subjects are
/// shuffled and assigned to the test side until it holds the requested share
/// of segments; validation is carved from the remaining subjects the same way.
pub fn make_split_grouped(
    ids: &[u64],
    subjects: &[String],
    fractions: &SplitFractions,
    seed: u64,
) -> Result<SplitPlan> {
    fractions.validate()?;
    if ids.len() != subjects.len() {
        return Err(invalid("ids and subjects differ in length"));
    }
    if ids.is_empty() {
        return Err(invalid("cannot split an empty id list"));
    }
    if ids.iter().collect::<HashSet<_>>().len() != ids.len() {
        return Err(invalid("segment ids must be unique"));
    }
    let mut groups: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for (id, s) in ids.iter().zip(subjects) {
        groups.entry(s.as_str()).or_default().push(*id);
    }
    let mut order: Vec<&str> = groups.keys().copied().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let take = |order: &[&str], target: usize| -> (Vec<u64>, usize) {
        let mut out = Vec::new();
        let mut used = 0;
        for s in order {
            if out.len() >= target {
                break;
            }
            out.extend(groups[s].iter().copied());
            used += 1;
        }
        (out, used)
    };
    let n_test = (fractions.test * ids.len() as f64).round() as usize;
    let (mut test, used) = take(&order, n_test);
    let rest = &order[used..];
    let dev_len: usize = rest.iter().map(|s| groups[s].len()).sum();
    let n_val = (fractions.validation * dev_len as f64).round() as usize;
    let (mut val, used_val) = take(rest, n_val);
    let mut train: Vec<u64> = rest[used_val..]
        .iter()
        .flat_map(|s| groups[s].iter().copied())
        .collect();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train_ids: train,
        val_ids: val,
        test_ids: test,
        seed,
    })
}

/// Balanced k-fold partition: the first `n % k` folds hold one extra id.
pub fn make_folds(ids: &[u64], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > ids.len() {
        return Err(invalid(format!("{k} folds for {} ids", ids.len())));
    }
    let v = shuffled_unique(ids, seed)?;
    let base = v.len() / k;
    let extra = v.len() % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(v[start..start + size].to_vec());
        start += size;
    }
    Ok(FoldPlan { folds, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disjoint_cover(parts: &[&[u64]], all: &[u64]) -> bool {
        let mut seen = HashSet::new();
        for p in parts {
            for id in p.iter() {
                if !seen.insert(*id) {
                    return false;
                }
            }
        }
        seen.len() == all.len() && all.iter().all(|id| seen.contains(id))
    }

    #[test]
    fn holdout_sizes() {
        let ids: Vec<u64> = (0..12000).collect();
        let p = make_split(&ids, &SplitFractions::default(), 42).unwrap();
        assert_eq!(p.train_ids.len() + p.val_ids.len(), 9000);
        assert_eq!(p.test_ids.len(), 3000);
        assert_eq!(p.val_ids.len(), 1800);
        assert!(disjoint_cover(&[&p.train_ids, &p.val_ids, &p.test_ids], &ids));
        assert_eq!(p, make_split(&ids, &SplitFractions::default(), 42).unwrap());
        assert_ne!(p, make_split(&ids, &SplitFractions::default(), 43).unwrap());
    }

    #[test]
    fn fold_sizes() {
        let ids: Vec<u64> = (0..1872).collect();
        let f = make_folds(&ids, 5, 1).unwrap();
        let sizes: Vec<usize> = f.folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![375, 375, 374, 374, 374]);
        let parts: Vec<&[u64]> = f.folds.iter().map(|v| v.as_slice()).collect();
        assert!(disjoint_cover(&parts, &ids));
        assert!(make_folds(&ids[..3], 4, 1).is_err());
        assert!(make_folds(&ids, 1, 1).is_err());
    }

    #[test]
    fn bad_fractions() {
        let bad = SplitFractions {
            train: 0.7,
            test: 0.2,
            validation: 0.2,
        };
        assert!(make_split(&[1, 2, 3], &bad, 0).is_err());
        assert!(make_split(&[], &SplitFractions::default(), 0).is_err());
        assert!(make_split(&[1, 1], &SplitFractions::default(), 0).is_err());
    }

    #[test]
    fn grouped_split_keeps_subjects_together() {
        let ids: Vec<u64> = (0..200).collect();
        let subjects: Vec<String> = ids.iter().map(|i| format!("s{}", i / 5)).collect();
        let p = make_split_grouped(&ids, &subjects, &SplitFractions::default(), 9).unwrap();
        assert!(disjoint_cover(&[&p.train_ids, &p.val_ids, &p.test_ids], &ids));
        let side = |id: u64| {
            if p.test_ids.contains(&id) {
                2
            } else if p.val_ids.contains(&id) {
                1
            } else {
                0
            }
        };
        for chunk in ids.chunks(5) {
            assert!(chunk.iter().all(|&i| side(i) == side(chunk[0])));
        }
        assert_eq!(p.test_ids.len(), 50);
    }

    proptest! {
        #[test]
        fn split_is_order_independent(n in 2usize..300, seed in any::<u64>()) {
            let ids: Vec<u64> = (0..n as u64).map(|i| i * 7 + 3).collect();
            let mut rev = ids.clone();
            rev.reverse();
            let a = make_split(&ids, &SplitFractions::default(), seed).unwrap();
            let b = make_split(&rev, &SplitFractions::default(), seed).unwrap();
            prop_assert!(disjoint_cover(&[&a.train_ids, &a.val_ids, &a.test_ids], &ids));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn folds_balanced(n in 2usize..400, k in 2usize..10, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let ids: Vec<u64> = (0..n as u64).collect();
            let f = make_folds(&ids, k, seed).unwrap();
            let sizes: Vec<usize> = f.folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let parts: Vec<&[u64]> = f.folds.iter().map(|v| v.as_slice()).collect();
            prop_assert!(disjoint_cover(&parts, &ids));
        }
    }
}
