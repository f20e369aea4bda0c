//! Property tests for the metric and split invariants that hold for all
//! inputs, not just the worked examples.

use cate_select::data::{build_split_plan, gen_partially_linear, DataSource, SplitPlan};
use cate_select::harness::analysis::{spearman, summarize};
use cate_select::metrics::truth::{e_ate, pehe};
use proptest::prelude::*;

fn effect_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pehe_is_symmetric_and_dominates_the_mean_gap(
        pair in effect_vec(1..40).prop_flat_map(|a| {
            let n = a.len();
            (Just(a), prop::collection::vec(-50.0..50.0f64, n))
        })
    ) {
        let (a, b) = pair;
        let p_ab = pehe(&a, &b).unwrap();
        let p_ba = pehe(&b, &a).unwrap();
        prop_assert!((p_ab - p_ba).abs() < 1e-12);
        // Jensen: the RMSE of differences dominates the absolute mean gap
        prop_assert!(p_ab + 1e-12 >= e_ate(&a, &b).unwrap());
    }

    #[test]
    fn e_ate_scales_with_common_factor(
        pair in effect_vec(1..30).prop_flat_map(|a| {
            let n = a.len();
            (Just(a), prop::collection::vec(-50.0..50.0f64, n))
        }),
        c in -5.0..5.0f64
    ) {
        let (a, b) = pair;
        let scaled_a: Vec<f64> = a.iter().map(|v| c * v).collect();
        let scaled_b: Vec<f64> = b.iter().map(|v| c * v).collect();
        let lhs = e_ate(&scaled_a, &scaled_b).unwrap();
        let rhs = c.abs() * e_ate(&a, &b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn summarize_is_permutation_invariant(values in effect_vec(2..20), seed in 0u64..1000) {
        let cell = summarize(&values).unwrap();
        let mut shuffled = values.clone();
        // deterministic shuffle from the seed
        let n = shuffled.len();
        let mut state = seed.wrapping_add(1);
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let cell2 = summarize(&shuffled).unwrap();
        prop_assert!((cell.mean - cell2.mean).abs() < 1e-9);
        prop_assert!((cell.std_err.unwrap() - cell2.std_err.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn spearman_stays_in_unit_interval(
        pair in effect_vec(3..25).prop_flat_map(|a| {
            let n = a.len();
            (Just(a), prop::collection::vec(-50.0..50.0f64, n))
        })
    ) {
        let (a, b) = pair;
        if let Some(rho) = spearman(&a, &b) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&rho));
        }
        // perfect monotone agreement with itself when there is variance
        if let Some(self_rho) = spearman(&a, &a) {
            prop_assert!((self_rho - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    // split building runs a full generator + plan per case; keep it light
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn split_plans_always_satisfy_their_invariants(
        n in 60..240usize,
        folds in 2..6usize,
        test_frac in 0.05..0.4f64,
        seed in 0u64..500,
    ) {
        let ds = match gen_partially_linear(n, 2, 1.0, 0.3, 1.0, seed) {
            Ok(ds) => ds,
            Err(_) => return Ok(()), // degenerate draw (empty arm)
        };
        let t: Vec<u8> = ds.t().to_vec();
        let source = DataSource::Single(ds);
        let plan = match build_split_plan(&source, 2, test_frac, folds, seed) {
            Ok(p) => p,
            Err(_) => return Ok(()), // arm too small to stratify
        };
        plan.validate().unwrap();
        // stratification bound: per-fold treated counts differ by <= 1
        for it in &plan.iterations {
            let counts: Vec<usize> = it
                .folds
                .iter()
                .map(|f| f.val_idx.iter().filter(|&&i| t[i] == 1).count())
                .collect();
            let lo = counts.iter().min().unwrap();
            let hi = counts.iter().max().unwrap();
            prop_assert!(hi - lo <= 1, "unbalanced folds: {counts:?}");
        }
        // serialization round-trip is byte-identical
        let text = plan.to_text();
        let back = SplitPlan::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
    }
}
