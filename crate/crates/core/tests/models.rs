mod support;

use fngcast_core::models::forest::{ForestCriterion, ForestParams, RandomForest};
use fngcast_core::models::gbm::{BoostingParams, GradientBoosting};
use fngcast_core::models::linear::LinearModel;
use fngcast_core::models::mlp::{Mlp, MlpParams};
use fngcast_core::models::svr::{solve_dual, Kernel, SvrModel, SvrParams};
use fngcast_core::models::tree::{
    newton_gain, newton_weight, GrowParams, GrowthLog, Node, Presorted, SplitRule, TreeGrower,
};
use fngcast_core::models::xgb::{BoosterKind, XgbModel, XgbParams};
use fngcast_core::models::{fit, Family, HyperValue, ModelSpec, Predictor};
use fngcast_core::rng::rng_from_seed;
use fngcast_core::Matrix;
use proptest::prelude::*;
use rand::Rng;
use support::{fixtures, oracles};

fn linear_targets(x: &[Vec<f64>], seed: u64, noise: f64) -> Vec<f64> {
    let mut r = fixtures::rng(seed);
    let w: Vec<f64> = (0..x[0].len()).map(|_| r.random_range(-1.0..1.0)).collect();
    x.iter()
        .map(|row| 0.3 + row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + noise * r.random_range(-1.0..1.0))
        .collect()
}

#[test]
fn ols_matches_normal_equations() {
    for seed in 0..20 {
        let x = fixtures::random_matrix(50, 5, seed);
        let y = linear_targets(&x, seed + 100, 0.1);
        let m = LinearModel::fit(&fixtures::to_matrix(&x), &y).unwrap();
        let (coef, intercept) = oracles::ols_normal_equations(&x, &y);
        let diff = m
            .coef
            .iter()
            .zip(&coef)
            .map(|(a, b)| (a - b).abs())
            .fold((m.intercept - intercept).abs(), f64::max);
        assert!(diff < 1e-8, "seed {seed}: {diff}");
    }
}

#[test]
fn ols_residuals_are_orthogonal() {
    for seed in 0..20 {
        let x = fixtures::random_matrix(50, 5, seed);
        let y = linear_targets(&x, seed, 0.2);
        let m = LinearModel::fit(&fixtures::to_matrix(&x), &y).unwrap();
        let resid: Vec<f64> = x.iter().zip(&y).map(|(r, t)| t - m.predict_row(r)).collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        for j in 0..5 {
            let dot: f64 = x.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
            assert!(dot.abs() < 1e-8, "column {j}: {dot}");
        }
    }
}

#[test]
fn ols_examples() {
    let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [5.0]]).unwrap();
    let m = LinearModel::fit(&x, &[1.0, 3.0, 5.0, 11.0]).unwrap();
    assert!((m.coef[0] - 2.0).abs() < 1e-10 && (m.intercept - 1.0).abs() < 1e-10);
    let c = LinearModel::fit(&x, &[4.0; 4]).unwrap();
    assert!(c.coef[0].abs() < 1e-10 && (c.intercept - 4.0).abs() < 1e-10);
}

fn svr_fixture(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x = fixtures::random_matrix(20, 3, seed);
    let mut r = fixtures::rng(seed + 1);
    let y = x
        .iter()
        .map(|row| 0.2 + 0.5 * row[0] - 0.3 * row[1] * row[2] + 0.05 * r.random_range(-1.0..1.0))
        .collect();
    (x, y)
}

fn svr_cases() -> Vec<(f64, Kernel)> {
    vec![
        (0.1, Kernel::Linear),
        (1.0, Kernel::Linear),
        (1.0, Kernel::Rbf { gamma: 1.0 / 3.0 }),
        (0.01, Kernel::Rbf { gamma: 1.0 / 3.0 }),
    ]
}

fn kernel_fn(k: Kernel) -> Box<oracles::KernelFn> {
    match k {
        Kernel::Linear => Box::new(oracles::linear_kernel),
        Kernel::Rbf { gamma } => Box::new(oracles::rbf_kernel(gamma)),
    }
}

#[test]
fn svr_dual_objective_matches_reference_qp() {
    for seed in 0..5 {
        let (x, y) = svr_fixture(seed);
        for (c, kernel) in svr_cases() {
            // Default tolerance bounds KKT violations only; the objective is checked near the optimum.
            let params = SvrParams {
                tol: 1e-9,
                ..SvrParams::new(c, kernel)
            };
            let sol = solve_dual(&fixtures::to_matrix(&x), &y, &params).unwrap();
            let dual = oracles::SvrDual::new(&x, &y, c, params.epsilon, &*kernel_fn(kernel));
            let (_, reference) = dual.solve(20_000);
            let mine = dual.objective(&sol.beta);
            assert!((mine - sol.objective).abs() < 1e-9, "reported objective");
            assert!((mine - reference).abs() < 1e-6, "seed {seed} C {c} {kernel:?}: {mine} vs {reference}");
        }
    }
}

#[test]
fn svr_kkt_conditions_hold_at_solver_tolerance() {
    for seed in 0..5 {
        let (x, y) = svr_fixture(seed);
        for (c, kernel) in svr_cases() {
            let params = SvrParams::new(c, kernel);
            let sol = solve_dual(&fixtures::to_matrix(&x), &y, &params).unwrap();
            assert!(sol.converged);
            let v = oracles::svr_kkt_violation(&x, &y, c, params.epsilon, &*kernel_fn(kernel), &sol.beta, sol.rho);
            assert!(v < params.tol, "seed {seed}: violation {v}");
        }
    }
}

#[test]
fn svr_duplicated_points_predict_the_same() {
    // Targets inside the tube of a linear fit keep every dual variable off the bound.
    let x = fixtures::random_matrix(20, 3, 11);
    let mut r = fixtures::rng(12);
    let y: Vec<f64> = x
        .iter()
        .map(|row| 0.2 + 0.5 * row[0] - 0.3 * row[1] + 0.004 * r.random_range(-1.0..1.0))
        .collect();
    let mut params = SvrParams::new(100.0, Kernel::Linear);
    params.tol = 1e-10;
    let once = SvrModel::fit(&fixtures::to_matrix(&x), &y, &params).unwrap();
    let sol = solve_dual(&fixtures::to_matrix(&x), &y, &params).unwrap();
    assert!(sol.beta.iter().all(|b| *b < params.c), "needs an interior solution");
    let x2: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
    let y2: Vec<f64> = y.iter().chain(&y).copied().collect();
    let twice = SvrModel::fit(&fixtures::to_matrix(&x2), &y2, &params).unwrap();
    for probe in fixtures::random_matrix(30, 3, 5) {
        let (a, b) = (once.predict_row(&probe), twice.predict_row(&probe));
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn svr_iteration_cap_is_reported() {
    let (x, y) = svr_fixture(3);
    let mut params = SvrParams::new(1.0, Kernel::Linear);
    params.max_iter = Some(2);
    let m = SvrModel::fit(&fixtures::to_matrix(&x), &y, &params).unwrap();
    assert!(!m.converged);
    assert_eq!(m.iterations, 2);
}

#[test]
fn tree_split_matches_exhaustive_search() {
    let x = vec![
        vec![0.1, 5.0],
        vec![0.4, 3.0],
        vec![0.35, 1.0],
        vec![0.8, 4.0],
        vec![0.9, 2.0],
        vec![0.2, 6.0],
    ];
    let y = [1.0, 2.0, 2.2, 7.0, 7.5, 0.8];
    let m = fixtures::to_matrix(&x);
    let pre = Presorted::new(&m);
    let params = GrowParams {
        max_depth: None,
        max_leaf_nodes: Some(2),
        min_samples_leaf: 1,
        max_features: None,
    };
    let tree = TreeGrower::new(&m, &pre).grow(&y, None, SplitRule::SquaredError, &params, &mut rng_from_seed(0), None);
    let (feat, thr, _) = oracles::best_sse_split(&x, &y, 1).unwrap();
    match tree.nodes[0] {
        Node::Split { feature, threshold, .. } => {
            assert_eq!(feature as usize, feat);
            assert!((threshold - thr).abs() < 1e-12);
        }
        _ => panic!("no split"),
    }
}

#[test]
fn forest_memorizes_without_bootstrap() {
    let x = fixtures::random_matrix(40, 4, 2);
    let y: Vec<f64> = (0..40).map(|i| 0.1 + (i as f64 * 0.37).sin().abs()).collect();
    for criterion in [ForestCriterion::SquaredError, ForestCriterion::Poisson] {
        let params = ForestParams {
            criterion,
            n_estimators: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        let f = RandomForest::fit(&fixtures::to_matrix(&x), &y, &params).unwrap();
        for (row, t) in x.iter().zip(&y) {
            assert!((f.predict_row(row) - t).abs() < 1e-12);
        }
    }
}

#[test]
fn forest_beats_its_worst_tree_on_held_out_data() {
    for seed in 0..3 {
        let x = fixtures::random_matrix(160, 6, seed);
        let y = linear_targets(&x, seed, 0.2);
        let (xt, yt) = (&x[..120], &y[..120]);
        let (xv, yv) = (&x[120..], &y[120..]);
        let forest = RandomForest::fit(
            &fixtures::to_matrix(xt),
            yt,
            &ForestParams {
                seed,
                ..ForestParams::default()
            },
        )
        .unwrap();
        let forest_mse = oracles::mse(yv, &xv.iter().map(|r| forest.predict_row(r)).collect::<Vec<_>>());
        let worst = forest
            .trees
            .iter()
            .map(|t| oracles::mse(yv, &xv.iter().map(|r| t.predict_row(r)).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        assert!(forest_mse <= worst, "{forest_mse} vs {worst}");
    }
}

#[test]
fn boosting_matches_staged_stump_oracle() {
    let x: Vec<Vec<f64>> = [0.05, 0.93, 0.41, 0.22, 0.67, 0.15, 0.81, 0.55]
        .iter()
        .zip([3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.3, 5.8])
        .map(|(&a, b)| vec![a, b])
        .collect();
    let y = [0.1, 0.9, 0.35, 0.2, 0.7, 0.18, 0.85, 0.5];
    let params = BoostingParams {
        learning_rate: 0.1,
        n_estimators: 3,
        max_depth: Some(1),
        max_leaf_nodes: None,
        min_samples_leaf: 1,
    };
    let m = GradientBoosting::fit(&fixtures::to_matrix(&x), &y, &params).unwrap();
    let want = oracles::boosted_stumps(&x, &y, 0.1, 3);
    for (row, w) in x.iter().zip(&want) {
        assert!((m.predict_row(row) - w).abs() < 1e-10);
    }
}

#[test]
fn zero_stage_boosting_predicts_mean() {
    let x = fixtures::random_matrix(10, 2, 1);
    let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let params = BoostingParams {
        learning_rate: 0.1,
        n_estimators: 0,
        max_depth: Some(3),
        max_leaf_nodes: None,
        min_samples_leaf: 1,
    };
    let m = GradientBoosting::fit(&fixtures::to_matrix(&x), &y, &params).unwrap();
    assert!(x.iter().all(|r| m.predict_row(r) == 4.5));
}

#[test]
fn xgb_closed_forms() {
    // Gradients summing to -2 over two points, lambda 2.
    assert_eq!(newton_weight(-2.0, 2.0, 2.0, 0.0), 0.5);
    // Unconstrained -G/(H+lambda) = 5, clamped to max_delta_step 1.
    assert_eq!(newton_weight(-10.0, 1.0, 1.0, 1.0), 1.0);
    assert_eq!(newton_weight(10.0, 1.0, 1.0, 1.0), -1.0);
    let g = 0.5 * (4.0 / 3.0 + 1.0 / 3.0 - 1.0 / 5.0);
    assert!((newton_gain(-2.0, 2.0, 1.0, 2.0, 1.0) - g).abs() < 1e-15);
}

#[test]
fn xgb_huge_lambda_collapses_to_base_score() {
    let x = fixtures::random_matrix(60, 4, 3);
    let y = linear_targets(&x, 3, 0.1);
    for booster in [BoosterKind::Gbtree, BoosterKind::Gblinear, BoosterKind::Dart] {
        let params = XgbParams {
            lambda: 1e12,
            ..XgbParams::new(booster)
        };
        let m = XgbModel::fit(&fixtures::to_matrix(&x), &y, &params).unwrap();
        for row in &x {
            assert!((m.predict_row(row) - m.base_score).abs() < 1e-6);
        }
    }
}

#[test]
fn mlp_zero_network_outputs_bias() {
    let mut net = Mlp::zeros(5, &[10, 10, 10]);
    net.layers.last_mut().unwrap().bias[0] = -0.3;
    for row in fixtures::random_matrix(5, 5, 1) {
        assert_eq!(net.predict_row(&row), -0.3);
    }
}

/// Max relative error between backprop and central differences.
fn gradient_check(hidden: &[usize], n_features: usize, seed: u64) -> f64 {
    let x = fixtures::to_matrix(&fixtures::random_matrix(3, n_features, seed));
    let y: Vec<f64> = fixtures::random_matrix(3, 1, seed + 1).into_iter().map(|r| r[0]).collect();
    let rows = [0usize, 1, 2];
    let net = Mlp::init(n_features, hidden, &mut rng_from_seed(seed));
    let (_, grad) = net.loss_gradient(&x, &y, &rows);
    let mut probe = net.clone();
    let numeric = oracles::numeric_gradient(
        |t| {
            probe.set_parameters(t).unwrap();
            probe.loss_gradient(&x, &y, &rows).0
        },
        &net.parameters(),
        1e-5,
    );
    oracles::max_relative_error(&grad, &numeric, 1e-9)
}

#[test]
fn mlp_gradient_check_small_network() {
    let e = gradient_check(&[4, 3], 5, 1);
    assert!(e < 1e-4, "{e}");
}

#[test]
fn mlp_gradient_check_grid_architectures() {
    for hidden in [vec![10, 10, 10], vec![10, 10, 10, 10, 10]] {
        for seed in 0..5 {
            let e = gradient_check(&hidden, 60, seed);
            assert!(e < 1e-4, "{hidden:?} seed {seed}: {e}");
        }
    }
}

#[test]
fn mlp_loss_decreases_over_first_epoch() {
    let xs = fixtures::random_matrix(200, 8, 4);
    let y = linear_targets(&xs, 4, 0.05);
    let x = fixtures::to_matrix(&xs);
    let rows: Vec<usize> = (0..200).collect();
    let params = MlpParams {
        seed: 9,
        early_stopping: false,
        ..MlpParams::new(vec![10, 10, 10], 0.001, 1)
    };
    let init = Mlp::init(8, &[10, 10, 10], &mut rng_from_seed(9));
    let trained = Mlp::fit(&x, &y, &params).unwrap();
    assert!(trained.loss_gradient(&x, &y, &rows).0 < init.loss_gradient(&x, &y, &rows).0);
}

fn every_family() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(Family::LinearRegression),
        ModelSpec::new(Family::Svr).with("C", 0.1).with("kernel", "linear"),
        ModelSpec::new(Family::Svr).with("C", 1.0).with("kernel", "rbf"),
        ModelSpec::new(Family::RandomForest).with("n_estimators", 15i64).with("max_leaf_nodes", 10i64),
        ModelSpec::new(Family::GradientBoosting).with("n_estimators", 30i64).with("max_leaf_nodes", HyperValue::None),
        ModelSpec::new(Family::XgbVariant).with("booster", "dart").with("lambda", 3i64),
        ModelSpec::new(Family::Mlp)
            .with("hidden_layer_sizes", HyperValue::Layers(vec![10, 10, 10]))
            .with("max_iter", 30i64),
    ]
}

#[test]
fn predictions_are_deterministic_and_row_independent() {
    let xs = fixtures::random_matrix(80, 5, 6);
    let y: Vec<f64> = linear_targets(&xs, 6, 0.05).iter().map(|v| v.clamp(0.0, 2.0) / 2.0).collect();
    let x = fixtures::to_matrix(&xs);
    let perm: Vec<usize> = (0..80).rev().collect();
    let xp = x.select_rows(&perm);
    for spec in every_family() {
        let spec = spec.with_seed(21);
        let a = fit(&spec, &x, &y).unwrap();
        let b = fit(&spec, &x, &y).unwrap();
        let pa = a.predict(&x).unwrap();
        let pb = b.predict(&x).unwrap();
        let again = a.predict(&x).unwrap();
        assert!(pa.iter().zip(&pb).chain(pa.iter().zip(&again)).all(|(u, v)| u.to_bits() == v.to_bits()));
        let pp = a.predict(&xp).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(pp[k].to_bits(), pa[i].to_bits(), "{}", spec.label());
        }
    }
}

#[test]
fn poisson_rejects_negative_targets() {
    let spec = ModelSpec::new(Family::RandomForest).with("criterion", "poisson");
    let x = fixtures::to_matrix(&fixtures::random_matrix(5, 2, 1));
    assert!(fit(&spec, &x, &[0.1, -0.2, 0.3, 0.4, 0.5]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn boosting_training_error_never_increases(seed in 0u64..10_000, lr in 0.05f64..1.0, depth in 1usize..4) {
        let x = fixtures::random_matrix(40, 3, seed);
        let y = linear_targets(&x, seed + 1, 0.3);
        let params = BoostingParams {
            learning_rate: lr,
            n_estimators: 25,
            max_depth: Some(depth),
            max_leaf_nodes: None,
            min_samples_leaf: 1,
        };
        let m = GradientBoosting::fit(&fixtures::to_matrix(&x), &y, &params).unwrap();
        let staged: Vec<Vec<f64>> = x.iter().map(|r| m.staged_predict_row(r)).collect();
        let mut prev = f64::INFINITY;
        for s in 0..staged[0].len() {
            let pred: Vec<f64> = staged.iter().map(|v| v[s]).collect();
            let e = oracles::mse(&y, &pred);
            prop_assert!(e <= prev + 1e-12, "stage {}: {} > {}", s, e, prev);
            prev = e;
        }
    }

    #[test]
    fn newton_gains_are_nonnegative(seed in 0u64..10_000, lambda in 0.0f64..100.0, mds in 0.0f64..5.0) {
        let x = fixtures::random_matrix(50, 4, seed);
        let g: Vec<f64> = fixtures::random_matrix(50, 1, seed + 9).iter().map(|r| r[0] - 0.5).collect();
        let m = fixtures::to_matrix(&x);
        let pre = Presorted::new(&m);
        let params = GrowParams { max_depth: Some(6), max_leaf_nodes: None, min_samples_leaf: 1, max_features: None };
        let mut log = GrowthLog::default();
        let rule = SplitRule::Newton { lambda, max_delta_step: mds };
        TreeGrower::new(&m, &pre).grow(&g, None, rule, &params, &mut rng_from_seed(0), Some(&mut log));
        prop_assert!(log.gains.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn leaf_weights_shrink_monotonically_in_lambda(gsum in -50.0f64..50.0, hsum in 1.0f64..50.0, l1 in 0.0f64..100.0, dl in 0.0f64..1e6) {
        let a = newton_weight(gsum, hsum, l1, 0.0).abs();
        let b = newton_weight(gsum, hsum, l1 + dl, 0.0).abs();
        prop_assert!(b <= a);
        prop_assert!(newton_weight(gsum, hsum, 1e12, 0.0).abs() < 1e-9);
    }
}
