use std::collections::HashSet;

use bpae_core::autoencoder::FeatureMatrix;
use bpae_core::dataset::{make_folds, make_split, SegmentStore, SplitFractions};
use bpae_core::evaluation::{classify_bp, grade_from_percentages, pearson_and_fit, PredictionSet};
use bpae_core::regressor::{fit, BpTarget, RegressorKind, RegressorSpec};
use bpae_core::signal::Channel;
use proptest::prelude::*;

fn id_set(n: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::hash_set(any::<u64>(), n..n + 1).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn holdout_partitions_ids(ids in (3usize..400).prop_flat_map(id_set), seed in any::<u64>()) {
        let plan = make_split(&ids, &SplitFractions::default(), seed).unwrap();
        let all: Vec<u64> = [plan.train_ids.clone(), plan.val_ids.clone(), plan.test_ids.clone()].concat();
        prop_assert_eq!(all.len(), ids.len());
        prop_assert_eq!(all.iter().collect::<HashSet<_>>(), ids.iter().collect::<HashSet<_>>());
        prop_assert_eq!(make_split(&ids, &SplitFractions::default(), seed).unwrap(), plan);
    }

    #[test]
    fn folds_partition_ids(ids in (10usize..300).prop_flat_map(id_set), k in 2usize..8, seed in any::<u64>()) {
        let plan = make_folds(&ids, k, seed).unwrap();
        prop_assert_eq!(plan.folds.len(), k);
        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let all: HashSet<u64> = plan.folds.concat().into_iter().collect();
        prop_assert_eq!(all.len(), ids.len());
        for i in 0..k {
            let (rest, test) = plan.fold(i);
            let rest: HashSet<_> = rest.into_iter().collect();
            prop_assert!(test.iter().all(|t| !rest.contains(t)));
        }
    }

    #[test]
    fn bp_class_is_monotone(a in 40.0f64..220.0, b in 40.0f64..220.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for t in BpTarget::BOTH {
            prop_assert!(classify_bp(lo, t) <= classify_bp(hi, t));
        }
    }

    #[test]
    fn bhs_grade_is_monotone(p in prop::array::uniform3(0.0f64..100.0), bump in prop::array::uniform3(0.0f64..20.0)) {
        let mut q = p;
        q.sort_by(f64::total_cmp);
        let r: Vec<f64> = q.iter().zip(bump).map(|(v, d)| (v + d).min(100.0)).collect();
        // Better percentages never give a worse grade (A < B < C < D).
        prop_assert!(grade_from_percentages(r[0], r[1], r[2]) <= grade_from_percentages(q[0], q[1], q[2]));
    }

    #[test]
    fn pearson_is_affine_invariant(
        pairs in prop::collection::vec((50.0f64..200.0, 50.0f64..200.0), 5..80),
        a in 0.1f64..10.0,
        c in -50.0f64..50.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let base = PredictionSet::new(x.clone(), y.clone(), BpTarget::Sbp, 1).unwrap();
        let moved = PredictionSet::new(x, y.iter().map(|v| a * v + c).collect(), BpTarget::Sbp, 1).unwrap();
        if let (Ok(f0), Ok(f1)) = (pearson_and_fit(&base), pearson_and_fit(&moved)) {
            prop_assert!((f0.r - f1.r).abs() < 1e-9, "{} vs {}", f0.r, f1.r);
            prop_assert!((a * f0.beta1 - f1.beta1).abs() < 1e-9 * f1.beta1.abs().max(1.0));
        }
    }

    #[test]
    fn store_round_trip_is_lossless(raw in prop::collection::vec(any::<u32>(), 16 * 2 * 3)) {
        let vals: Vec<f64> = raw
            .iter()
            .map(|&b| f32::from_bits(b))
            .map(|v| if v.is_finite() { v as f64 } else { 0.0 })
            .collect();
        let mut s = SegmentStore::new(16, vec![Channel::Ppg, Channel::Abp]).unwrap();
        for (i, seg) in vals.chunks(32).enumerate() {
            s.push(i as u64 * 7, &[&seg[..16], &seg[16..]]).unwrap();
        }
        let back = SegmentStore::from_bytes(&s.to_bytes()).unwrap();
        prop_assert_eq!(back.to_bytes(), s.to_bytes());
        for i in 0..3 {
            for c in 0..2 {
                let a: Vec<u32> = s.samples(i, c).iter().map(|v| v.to_bits()).collect();
                let b: Vec<u32> = back.samples(i, c).iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn regressors_ignore_row_order(seed in any::<u64>(), rot in 1usize..29) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 30;
        let f = 3;
        let ids: Vec<u64> = (0..n as u64).map(|i| i * 3 + 1).collect();
        let data: Vec<f64> = (0..n * f).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|i| 120.0 + 10.0 * data[i * f] + rng.gen_range(-1.0..1.0)).collect();
        let fm = FeatureMatrix::new(ids.clone(), f, data).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left(rot);
        let perm_ids: Vec<u64> = order.iter().map(|&i| ids[i]).collect();
        let perm = fm.select_ids(&perm_ids).unwrap();
        let perm_y: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        for kind in [RegressorKind::Mlp, RegressorKind::Knn, RegressorKind::SgdLinear] {
            let mut spec = RegressorSpec { kind, ..RegressorSpec::default() };
            spec.mlp.max_epochs = 20;
            spec.mlp.hidden = 4;
            let a = fit(&fm, &y, BpTarget::Sbp, &spec).unwrap().predict(&fm).unwrap();
            let b = fit(&perm, &perm_y, BpTarget::Sbp, &spec).unwrap().predict(&fm).unwrap();
            prop_assert_eq!(a, b, "{:?}", kind);
        }
    }
}
