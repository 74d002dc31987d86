use clr_spca::io::{labeled_csv, parse_labeled_csv, LabeledMatrix};
use clr_spca::linalg::{
    orthonormality_defect, projector_distance_sq, sin_theta_sq, spectral_decomposition, OrthonormalBasis,
};
use clr_spca::simulation::{
    build_covariance, generate_col_sparse_basis, generate_row_sparse_basis, run_scenario, scenario_truth,
    LogBasisDistribution, Method, ScenarioConfig,
};
use clr_spca::solver::{prox_row, PreparedProblem};
use clr_spca::transforms::TransformTag;
use clr_spca::{Execution, Penalty, Preprocessing, SolverConfig, SparsityMode, SubspaceFit};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn small_cell(sparsity: SparsityMode, q: Penalty, distribution: LogBasisDistribution) -> ScenarioConfig {
    ScenarioConfig {
        n: 80,
        p: 40,
        d: 2,
        r0: 5,
        sparsity,
        q,
        distribution,
        methods: Method::ALL.to_vec(),
        alpha_grid: Some(vec![0.05, 0.2, 0.8, 3.0]),
        replicates: 3,
        seed: 12,
        folds: 5,
        power_a: 0.5,
        max_iter: 500,
        tol: 1e-5,
    }
}

#[test]
fn small_cells_order_oracle_below_raw_and_stay_in_range() {
    let cells = [
        small_cell(SparsityMode::Row, Penalty::L0, LogBasisDistribution::Normal),
        small_cell(SparsityMode::Column, Penalty::L1, LogBasisDistribution::Gamma),
    ];
    for cfg in cells {
        let t = run_scenario(&cfg, Execution::Parallel).unwrap();
        assert!(t.failures.is_empty(), "{:?}", t.failures);
        for r in &t.records {
            assert!((0.0..=cfg.d as f64 + 1e-12).contains(&r.error), "{r:?}");
        }
        let oracle = t.summary(Method::Oracle).unwrap().mean;
        let raw = t.summary(Method::Raw).unwrap().mean;
        assert!(oracle <= raw, "{:?}: oracle {oracle} > raw {raw}", cfg.sparsity);
    }
}

#[test]
fn generated_covariances_keep_the_true_basis_invariant() {
    let cfg = ScenarioConfig {
        p: 60,
        r0: 8,
        d: 3,
        ..small_cell(SparsityMode::Row, Penalty::L0, LogBasisDistribution::Normal)
    };
    for rep in 0..3 {
        let truth = scenario_truth(&cfg, rep).unwrap();
        let omega = truth.omega.as_matrix();
        let v = truth.v_true.as_matrix();
        let sp = spectral_decomposition(&truth.omega);
        let lmin = sp.eigenvalues[sp.eigenvalues.len() - 1];
        assert!(lmin >= -1e-8 * truth.omega.spectral_norm());
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&truth.lambdas[..3]));
        assert!((omega * v - v * d).amax() < 1e-10);
        let lead = sp.leading(3).unwrap();
        assert!(sin_theta_sq(&lead, &truth.v_true).unwrap() < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v = generate_col_sparse_basis(50, 4, 6, &mut rng).unwrap();
    let truth = build_covariance(&v, &mut ChaCha8Rng::seed_from_u64(5), &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    assert!(
        (truth.omega.as_matrix() * v.as_matrix()
            - v.as_matrix() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&truth.lambdas[..4])))
        .amax()
            < 1e-10
    );
}

#[test]
fn fit_json_round_trips() {
    let x = gaussian(50, 8, 1);
    let z = clr_spca::TransformedMatrix::new(x, TransformTag::Precomputed).unwrap();
    let problem = PreparedProblem::new(clr_spca::linalg::sample_covariance(&z).unwrap(), 2).unwrap();
    for mode in [SparsityMode::Row, SparsityMode::Column] {
        let cfg = SolverConfig::from_hyper(problem.default_hyperparameters().unwrap(), mode, Penalty::Half, 0.3);
        let fit = problem.fit(&cfg).unwrap();
        let text = serde_json::to_string(&fit).unwrap();
        let back: SubspaceFit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, fit);
    }
}

#[test]
fn zero_penalty_recovers_the_eigenspace() {
    let x = gaussian(200, 10, 2);
    let z = clr_spca::TransformedMatrix::new(x, TransformTag::Precomputed).unwrap();
    let s = clr_spca::linalg::sample_covariance(&z).unwrap();
    let problem = PreparedProblem::new(s, 3).unwrap();
    let cfg = SolverConfig::from_hyper(problem.default_hyperparameters().unwrap(), SparsityMode::Row, Penalty::L1, 0.0);
    let fit = problem.fit(&cfg).unwrap();
    let dist = projector_distance_sq(&fit.v_hat, problem.initial_basis().as_matrix()).unwrap();
    assert!(dist < 1e-8, "{dist}");
    assert!(orthonormality_defect(&fit.v_hat) < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clr_pipeline_rows_sum_to_zero_and_ignore_row_scale(
        rows in 1usize..6,
        cols in 2usize..8,
        seed in any::<u64>(),
        scale in 0.01f64..100.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = DMatrix::from_fn(rows, cols, |_, _| {
            let u: f64 = rand::Rng::random(&mut rng);
            (u * 20.0).floor()
        });
        let pre = Preprocessing::default();
        let a = pre.apply(&counts).unwrap();
        for row in a.values().row_iter() {
            prop_assert!(row.sum().abs() < 1e-12);
        }
        // scaling positive counts (no zeros) leaves the clr unchanged
        let positive = counts.map(|c| c + 1.0);
        let b = pre.apply(&positive).unwrap();
        let c = pre.apply(&(positive * scale)).unwrap();
        prop_assert!((b.values() - c.values()).amax() < 1e-10);
    }

    #[test]
    fn sin_theta_is_symmetric_bounded_and_rotation_invariant(
        p in 3usize..12,
        seed in any::<u64>(),
        angle in 0.0f64..6.3,
    ) {
        let d = 2;
        let e = OrthonormalBasis::new(gaussian(p, d, seed).qr().q()).unwrap();
        let f = OrthonormalBasis::new(gaussian(p, d, seed ^ 0xabcd).qr().q()).unwrap();
        let ef = sin_theta_sq(&e, &f).unwrap();
        prop_assert!((ef - sin_theta_sq(&f, &e).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=d as f64 + 1e-12).contains(&ef));
        let rot = DMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()]);
        let er = OrthonormalBasis::new(e.as_matrix() * rot).unwrap();
        prop_assert!((sin_theta_sq(&er, &f).unwrap() - ef).abs() < 1e-10);
        prop_assert!(sin_theta_sq(&e, &er).unwrap().abs() < 1e-12);
    }

    #[test]
    fn row_prox_points_against_b_and_shrinks(
        b in proptest::collection::vec(-10.0f64..10.0, 1..6),
        alpha in 0.0f64..5.0,
        beta in 0.1f64..5.0,
        rho in 0.1f64..5.0,
        qi in 0usize..4,
    ) {
        let q = [Penalty::L0, Penalty::Half, Penalty::TwoThirds, Penalty::L1][qi];
        let v = prox_row(&b, q, alpha, beta, rho).unwrap();
        let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(vn <= bn / (beta + rho) + 1e-12);
        if vn > 0.0 {
            let cos = v.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / (vn * bn);
            prop_assert!((cos + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn labeled_csv_round_trips_exactly(
        vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..30),
        cols in 1usize..5,
    ) {
        let rows = vals.len() / cols;
        prop_assume!(rows > 0);
        let m = LabeledMatrix {
            corner: "id".into(),
            row_ids: (0..rows).map(|i| format!("r{i}")).collect(),
            col_ids: (0..cols).map(|j| format!("c,{j}")).collect(),
            values: DMatrix::from_row_slice(rows, cols, &vals[..rows * cols]),
        };
        prop_assert_eq!(parse_labeled_csv(&labeled_csv(&m)).unwrap(), m);
    }
}

#[test]
fn row_basis_has_exact_row_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let v = generate_row_sparse_basis(30, 3, 7, &mut rng).unwrap();
    let nonzero = v.as_matrix().row_iter().filter(|r| r.iter().any(|x| *x != 0.0)).count();
    assert_eq!(nonzero, 7);
}
