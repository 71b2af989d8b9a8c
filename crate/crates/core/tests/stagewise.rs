mod common;

use common::*;
use ndarray::{array, Array1, Array2};
use stagewise::data::IndexBy;
use stagewise::experiment::compare_paths;
use stagewise::lars::monotone_move_direction;
use stagewise::stagewise::{
    default_response, fs_epsilon, generalized_incremental, glm_move_direction, integrate_monotone_path,
    monotone_incremental, newton_direction, total_loss, IntegratorConfig, StagewiseConfig,
};
use stagewise::{
    collapse, logistic_loss, solve_path, squared_error_loss, Dataset, Error, ExpandedDesign, Mode, SolverConfig,
};

fn binary_dataset(seed: u64, n: usize, p: usize) -> Dataset {
    let d = random_dataset(seed, n, p, 0.5);
    let med = {
        let mut v = d.y.to_vec();
        v.sort_by(f64::total_cmp);
        v[n / 2]
    };
    // flip a few labels so the classes are not separable
    let y: Array1<f64> = d
        .y
        .iter()
        .enumerate()
        .map(|(i, &v)| f64::from(u8::from((v > med) != (i % 7 == 0))))
        .collect();
    Dataset::new(d.x, y).unwrap()
}

#[test]
fn fs_epsilon_and_monotone_incremental_coincide() {
    for seed in 0..10 {
        let e = expanded(&random_dataset(seed, 20, 5, 0.8));
        let cfg = StagewiseConfig::with_epsilon(0.01);
        let a = fs_epsilon(e.base(), &cfg).unwrap();
        let b = monotone_incremental(&e, &cfg).unwrap();
        assert_eq!(a.breakpoints, b.breakpoints, "seed {seed}");
        for (u, v) in a.vertices.iter().zip(&b.vertices) {
            assert_eq!(collapse(u), collapse(v));
        }
        assert!(b.is_monotone_expanded());
    }
}

#[test]
fn single_predictor_takes_ols_over_epsilon_steps() {
    let x = Array2::from_shape_vec((5, 1), vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let y = array![1.1, 1.9, 3.2, 3.9, 5.1];
    let e = ExpandedDesign::new(Dataset::new(x, y).unwrap().standardize().unwrap());
    let ols = normal_equations(e.base().xs(), e.y())[0];
    for eps in [0.1, 0.01, 0.001] {
        let path = fs_epsilon(e.base(), &StagewiseConfig::with_epsilon(eps)).unwrap();
        let steps = (path.end() / eps).round() as i64;
        let want = (ols.abs() / eps).ceil() as i64;
        assert!((steps - want).abs() <= 1, "eps {eps}: {steps} vs {want}");
    }
}

#[test]
fn fs_epsilon_converges_to_fs0() {
    let e = expanded(&random_dataset(31, 20, 5, 0.6));
    let fs0 = solve_path(&e, &SolverConfig::new(Mode::Fs0)).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let path = fs_epsilon(e.base(), &StagewiseConfig::with_epsilon(eps)).unwrap();
        let sup = compare_paths(&path, &fs0, IndexBy::ArcLength).unwrap().sup_difference;
        assert!(sup < last);
        assert!(sup <= 5.0 * eps * 5f64.sqrt(), "eps {eps}: {sup}");
        last = sup;
    }
}

#[test]
fn stride_thins_the_record_but_keeps_the_endpoint() {
    let e = expanded(&random_dataset(3, 20, 5, 0.6));
    let full = fs_epsilon(e.base(), &StagewiseConfig::with_epsilon(0.01)).unwrap();
    let cfg = StagewiseConfig {
        record_stride: 25,
        ..StagewiseConfig::with_epsilon(0.01)
    };
    let thin = fs_epsilon(e.base(), &cfg).unwrap();
    assert!(thin.vertices.len() < full.vertices.len());
    assert_eq!(thin.end(), full.end());
    assert_eq!(thin.last_vertex(), full.last_vertex());
    // every thinned vertex is one of the full vertices
    for (ell, v) in thin.breakpoints.iter().zip(&thin.vertices) {
        let k = full.breakpoints.iter().position(|b| b == ell).unwrap();
        assert_eq!(&full.vertices[k], v);
    }
}

#[test]
fn iteration_budget_is_reported() {
    let e = expanded(&random_dataset(3, 20, 5, 0.6));
    let cfg = StagewiseConfig {
        max_iterations: 10,
        ..StagewiseConfig::with_epsilon(1e-3)
    };
    match fs_epsilon(e.base(), &cfg) {
        Ok(path) => assert!(path.truncated),
        Err(Error::StepBudget { partial, .. }) => assert!(partial.truncated),
        Err(other) => panic!("unexpected {other}"),
    }
    assert!(matches!(
        fs_epsilon(e.base(), &StagewiseConfig::with_epsilon(0.0)),
        Err(Error::Config(_))
    ));
}

#[test]
fn squared_loss_direction_matches_the_exact_engine() {
    let e = expanded(&random_dataset(8, 20, 6, 0.9));
    let loss = squared_error_loss();
    let response = default_response(&e, &loss);
    let fs0 = solve_path(&e, &SolverConfig::new(Mode::Fs0)).unwrap();
    for v in fs0.vertices.iter().take(fs0.vertices.len() - 1) {
        let glm = glm_move_direction(&e, v, &loss, response.view()).unwrap();
        let exact = monotone_move_direction(&e, v).unwrap();
        let diff = glm.rho.iter().zip(&exact.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }
}

#[test]
fn generalized_squared_loss_reproduces_monotone_incremental() {
    let e = expanded(&random_dataset(14, 20, 5, 0.6));
    let loss = squared_error_loss();
    let response = default_response(&e, &loss);
    let cfg = StagewiseConfig::with_epsilon(0.01);
    let g = generalized_incremental(&e, &loss, response.view(), &cfg).unwrap();
    let m = monotone_incremental(&e, &cfg).unwrap();
    let common = g.end().min(m.end());
    let cmp = compare_paths(&g, &m, IndexBy::ArcLength).unwrap();
    assert!(cmp.range >= common - 1e-12);
    assert!(cmp.sup_difference < 1e-12, "{}", cmp.sup_difference);
}

#[test]
fn integrator_tracks_fs0_for_squared_loss() {
    let e = expanded(&random_dataset(5, 20, 5, 0.6));
    let loss = squared_error_loss();
    let response = default_response(&e, &loss);
    let fs0 = solve_path(&e, &SolverConfig::new(Mode::Fs0)).unwrap();
    let mut last = f64::INFINITY;
    for h in [1e-2, 1e-3] {
        let path = integrate_monotone_path(&e, &loss, response.view(), &IntegratorConfig::with_step(h)).unwrap();
        assert!(path.is_monotone_expanded());
        let sup = compare_paths(&path, &fs0, IndexBy::ArcLength).unwrap().sup_difference;
        assert!(sup < last && sup < 10.0 * h, "h {h}: {sup}");
        last = sup;
    }
}

#[test]
fn logistic_stagewise_is_monotone_and_descends() {
    let d = binary_dataset(2, 60, 5);
    let e = ExpandedDesign::new(d.standardize().unwrap());
    let loss = logistic_loss();
    let response = default_response(&e, &loss);
    assert_eq!(response.to_vec(), d.y.to_vec());
    let cfg = StagewiseConfig {
        max_iterations: 5000,
        ..StagewiseConfig::with_epsilon(0.01)
    };
    let path = generalized_incremental(&e, &loss, response.view(), &cfg).unwrap();
    assert!(path.is_monotone_expanded());
    let losses: Vec<f64> = path.vertices.iter().map(|v| total_loss(&e, v, &loss, response.view())).collect();
    assert!(losses.windows(2).all(|w| w[1] <= w[0] + 1e-12));

    let ipath = integrate_monotone_path(&e, &loss, response.view(), &IntegratorConfig::with_step(1e-2)).unwrap();
    assert!(ipath.is_monotone_expanded());
    let end = total_loss(&e, ipath.last_vertex(), &loss, response.view());
    assert!(end < losses[0]);
}

#[test]
fn newton_step_from_zero_is_least_squares() {
    let e = expanded(&random_dataset(9, 25, 4, 0.3));
    let loss = squared_error_loss();
    let response = default_response(&e, &loss);
    let step = newton_direction(e.base(), Array1::zeros(4).view(), &loss, response.view()).unwrap();
    let ols = normal_equations(e.base().xs(), e.y());
    assert!(sup_abs(step.view(), ols.view()) < 1e-10);
}

#[test]
fn vanishing_curvature_is_reported() {
    let d = binary_dataset(4, 30, 3);
    let e = ExpandedDesign::new(d.standardize().unwrap());
    let loss = logistic_loss();
    let response = default_response(&e, &loss);
    let mut beta = vec![0.0; 6];
    beta[0] = 1e4;
    assert!(matches!(
        glm_move_direction(&e, &beta, &loss, response.view()),
        Err(Error::CurvatureDegeneracy { .. })
    ));
}
