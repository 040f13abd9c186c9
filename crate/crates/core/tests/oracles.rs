mod common;

use proptest::prelude::*;

use wideboost::beta::BetaKind;
use wideboost::objective::LossKind;
use wideboost::rng;
use wideboost::tree::{fit_tree, TreeParams};

use common::*;

fn loss_strategy() -> impl Strategy<Value = LossKind> {
    prop_oneof![
        Just(LossKind::SquaredError),
        Just(LossKind::BinaryLogloss),
        Just(LossKind::MulticlassLogloss)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grad_hess_match_finite_differences(seed in any::<u64>(), loss in loss_strategy(), kind in 0usize..4) {
        let mut gen = rng::seeded(seed);
        let inst = fd_instance(&mut gen, loss, BetaKind::ALL[kind]);
        let (g, h) = fd_violation(&inst);
        prop_assert!(g <= 1.0, "gradient off by {g} tolerances");
        prop_assert!(h <= 1.0, "hessian off by {h} tolerances");
    }

    #[test]
    fn tree_matches_enumerator_on_grid(seed in any::<u64>()) {
        let mut gen = rng::seeded(seed);
        let inst = tree_instance(&mut gen);
        let fitted = to_brute(&fit_instance(&inst));
        let oracle = brute_force_tree(inst.x.view(), &inst.g, &inst.h, &inst.params);
        prop_assert_eq!(fitted, oracle);
    }
}

#[test]
fn tree_matches_enumerator_on_continuous_values() {
    let mut gen = rng::seeded(77);
    for _ in 0..200 {
        let n = rng::uniform_int(&mut gen, 2, 25);
        let p = rng::uniform_int(&mut gen, 1, 4);
        let x = random_matrix(&mut gen, n, p, -3.0, 3.0);
        let g: Vec<f64> = (0..n).map(|_| uniform(&mut gen, -1.0, 1.0)).collect();
        let h: Vec<f64> = (0..n).map(|_| uniform(&mut gen, 0.01, 1.0)).collect();
        let params = TreeParams {
            max_depth: 2,
            min_child_weight: 0.1,
            lambda: 0.5,
            gamma: 0.0,
            min_samples_leaf: 1,
        };
        let fitted = fit_tree(x.view(), &g, &h, &params).unwrap();
        let oracle = brute_force_tree(x.view(), &g, &h, &params);
        let a = fitted.total_gain();
        let b = oracle.total_gain();
        assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "gain {a} vs oracle {b}");
    }
}

#[test]
fn depth_one_is_the_best_stump() {
    // A stump cannot do better than the best single split, which the
    // enumerator finds by construction.
    let mut gen = rng::seeded(5);
    for _ in 0..50 {
        let mut inst = tree_instance(&mut gen);
        inst.params.max_depth = 1;
        let fitted = to_brute(&fit_instance(&inst));
        let oracle = brute_force_tree(inst.x.view(), &inst.g, &inst.h, &inst.params);
        assert_eq!(fitted.total_gain(), oracle.total_gain());
    }
}

#[test]
fn wide_path_reduces_to_reference_boosting() {
    for (i, loss) in [LossKind::SquaredError, LossKind::BinaryLogloss, LossKind::MulticlassLogloss]
        .into_iter()
        .enumerate()
    {
        let (gap, losses) = reduction_gap(loss, 200 + i as u64, 10);
        assert!(gap <= 1e-9, "{loss}: gap {gap}");
        assert!(non_increasing(&losses), "{loss}: {losses:?}");
    }
}
