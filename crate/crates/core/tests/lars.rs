mod common;

use common::*;
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use stagewise::data::EventKind;
use stagewise::experiment::{compare_paths, gen_sine, SineSpec};
use stagewise::lars::{lasso_move_direction, monotone_move_direction, next_event};
use stagewise::{
    collapse, kkt_certify, l1_norm, solve_path, Dataset, Error, ExpandedDesign, Mode, PiecewiseLinearPath,
    SolverConfig,
};

fn solve(e: &ExpandedDesign, mode: Mode) -> PiecewiseLinearPath {
    solve_path(e, &SolverConfig::new(mode)).unwrap()
}

fn ols(e: &ExpandedDesign) -> Array1<f64> {
    normal_equations(e.base().xs(), e.y())
}

#[test]
fn lasso_vertices_match_qp_oracle() {
    for seed in 0..10 {
        let d = random_dataset(seed, 20, 5, 0.7);
        let e = expanded(&d);
        let path = solve(&e, Mode::Lasso);
        for v in &path.vertices {
            let b = collapse(v);
            let s = l1_norm(b.as_slice().unwrap());
            let oracle = qp_lasso(e.base().xs(), e.y(), s);
            let err = sup_abs(b.view(), oracle.view());
            assert!(err <= 1e-6, "seed {seed}: s = {s}, error {err}");
        }
    }
}

#[test]
fn lasso_vertices_are_certified() {
    for seed in 0..10 {
        let e = expanded(&random_dataset(seed, 20, 5, 0.7));
        let path = solve(&e, Mode::Lasso);
        for (v, &lambda) in path.vertices.iter().zip(&path.max_correlations) {
            let report = kkt_certify(&e, v, lambda, 1e-8);
            assert!(report.pass, "seed {seed}: worst {}", report.worst_violation);
        }
    }
}

#[test]
fn lar_takes_p_steps_in_general_position() {
    for seed in 0..20 {
        let e = expanded(&random_dataset(seed, 30, 7, 0.5));
        let path = solve(&e, Mode::Lar);
        assert_eq!(path.segments(), 7, "seed {seed}");
        let joins = path.events.iter().filter(|ev| ev.kind == EventKind::Join).count();
        assert_eq!(joins, 6);
        assert_eq!(path.events.last().unwrap().kind, EventKind::FullLeastSquares);
    }
}

#[test]
fn all_methods_end_at_least_squares() {
    for seed in 0..20 {
        let e = expanded(&random_dataset(seed, 25, 6, 0.9));
        let target = ols(&e);
        for mode in [Mode::Lar, Mode::Lasso, Mode::Fs0] {
            let end = collapse(solve(&e, mode).last_vertex());
            let err = sup_abs(end.view(), target.view());
            assert!(err < 1e-8 * (1.0 + l1_norm(target.as_slice().unwrap())), "seed {seed} {mode:?}: {err}");
        }
    }
}

#[test]
fn fs0_is_monotone_and_arc_length_equals_norm() {
    for seed in 0..20 {
        let e = expanded(&random_dataset(seed, 20, 8, 1.2));
        let path = solve(&e, Mode::Fs0);
        assert!(path.is_monotone_expanded(), "seed {seed}");
        for (&ell, v) in path.breakpoints.iter().zip(&path.vertices) {
            assert!((path.arc_length(ell).unwrap() - l1_norm(v)).abs() < 1e-10);
        }
        // a decreasing coefficient grows its negative partner, so the
        // collapsed norm can fall below the expanded one
        for v in &path.vertices {
            assert!(l1_norm(collapse(v).as_slice().unwrap()) <= l1_norm(v) + 1e-12);
        }
    }
}

#[test]
fn lar_and_lasso_agree_until_the_first_drop() {
    let d = gen_sine(&SineSpec::default()).unwrap();
    let e = ExpandedDesign::new(d.standardize().unwrap());
    let lar = solve(&e, Mode::Lar);
    let lasso = solve(&e, Mode::Lasso);
    let drop = lasso
        .events
        .iter()
        .position(|ev| ev.kind == EventKind::HitZero)
        .expect("the sine example drops a coefficient");
    for k in 0..=drop {
        assert!((lar.breakpoints[k] - lasso.breakpoints[k]).abs() < 1e-12);
        assert_eq!(lar.vertices[k], lasso.vertices[k]);
    }
    // LAR passes the coefficient through zero instead
    assert!(lar.events.iter().all(|ev| ev.kind != EventKind::HitZero));
    let cmp = compare_paths(&lar, &lasso, stagewise::data::IndexBy::Norm).unwrap();
    assert!(cmp.divergence.is_some());
}

#[test]
fn first_segment_follows_the_most_correlated_column() {
    let e = expanded(&random_dataset(12, 20, 4, 0.3));
    let beta = vec![0.0; e.width()];
    let c = e.correlations(&beta);
    let top = (0..e.width()).max_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
    let dir = lasso_move_direction(&e, &beta).unwrap();
    assert_eq!(dir.support, vec![top]);
    assert_eq!(dir.rho[top], 1.0);

    // join time from the linear correlation decay c(γ) = c − γ a
    let a = e.gram_times(&dir.rho);
    let want = (0..e.width())
        .filter(|&k| k != top && k != e.partner(top) && a[top] > a[k])
        .map(|k| (c[top] - c[k]) / (a[top] - a[k]))
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let ev = next_event(&e, &beta, &dir, Mode::Lasso).unwrap();
    assert_eq!(ev.kind, EventKind::Join);
    assert!((ev.gamma - want).abs() < 1e-12 * want);
    let path = solve(&e, Mode::Lasso);
    assert!((path.breakpoints[1] - want).abs() < 1e-12 * want);
}

#[test]
fn monotone_direction_is_the_normalized_nnls_fit_on_the_band() {
    for seed in 0..10 {
        let e = expanded(&random_dataset(seed, 20, 6, 1.0));
        let path = solve(&e, Mode::Fs0);
        for v in path.vertices.iter().take(path.vertices.len() - 1) {
            let dir = monotone_move_direction(&e, v).unwrap();
            let band = &dir.active;
            let g = e.gram_submatrix(band);
            let c = e.correlations(v);
            let cb: Array1<f64> = band.iter().map(|&k| c[k]).collect();
            let theta = nnls_enumerate(g.view(), cb.view());
            let total = theta.sum();
            for (i, &k) in band.iter().enumerate() {
                assert!((dir.rho[k] - theta[i] / total).abs() < 1e-8, "seed {seed}");
            }
            assert!((dir.rho.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn stop_bounds_truncate_the_path_exactly() {
    let e = expanded(&random_dataset(6, 20, 5, 0.4));
    let full = solve(&e, Mode::Lasso);
    let bound = 0.6 * full.end();
    let cfg = SolverConfig {
        stop_l1_norm: Some(bound),
        ..SolverConfig::new(Mode::Lasso)
    };
    let path = solve_path(&e, &cfg).unwrap();
    assert!((path.end() - bound).abs() < 1e-12);
    let want = full.evaluate(bound).unwrap();
    let got = Array1::from(path.last_vertex().to_vec());
    assert!(sup_abs(got.view(), want.view()) < 1e-10);
    assert_eq!(path.events.last().unwrap().kind, EventKind::EarlyStop);

    let lambda = 0.5 * full.max_correlations[0];
    let cfg = SolverConfig {
        stop_lambda: Some(lambda),
        ..SolverConfig::new(Mode::Lasso)
    };
    let path = solve_path(&e, &cfg).unwrap();
    let c = e.correlations(path.last_vertex());
    let cmax = c.iter().copied().fold(f64::MIN, f64::max);
    assert!((cmax - lambda).abs() < 1e-9 * lambda);
}

#[test]
fn wide_lasso_reaches_an_interpolating_fit() {
    let e = expanded(&random_dataset(21, 10, 25, 0.2));
    let path = solve(&e, Mode::Lasso);
    let rss = e.base().rss(collapse(path.last_vertex()).view());
    let tss = e.y().dot(&e.y());
    assert!(rss < 1e-12 * tss, "rss {rss}");
    let support = collapse(path.last_vertex()).iter().filter(|&&b| b != 0.0).count();
    assert!(support <= 10);
    for (v, &lambda) in path.vertices.iter().zip(&path.max_correlations) {
        assert!(kkt_certify(&e, v, lambda, 1e-8).pass);
    }
}

#[test]
fn budget_exhaustion_returns_partial_path() {
    let e = expanded(&random_dataset(1, 20, 6, 0.5));
    let cfg = SolverConfig {
        max_steps: Some(2),
        ..SolverConfig::new(Mode::Lasso)
    };
    match solve_path(&e, &cfg) {
        Err(Error::StepBudget { steps, partial }) => {
            assert_eq!(steps, 2);
            assert!(partial.truncated);
            assert_eq!(partial.segments(), 2);
        }
        other => panic!("expected a budget error, got {other:?}"),
    }
}

#[test]
fn invalid_configuration_is_rejected() {
    let e = expanded(&random_dataset(1, 20, 3, 0.5));
    let cfg = SolverConfig {
        tie_tolerance: -1.0,
        ..SolverConfig::default()
    };
    assert!(matches!(solve_path(&e, &cfg), Err(Error::Config(_))));
}

#[test]
fn zero_response_gives_an_empty_path() {
    let mut r = rng(4);
    let x = gaussian_matrix(&mut r, 10, 3);
    let e = expanded(&Dataset::new(x, Array1::from_elem(10, 2.5)).unwrap());
    let path = solve(&e, Mode::Fs0);
    assert_eq!(path.segments(), 0);
}

#[test]
fn orthogonal_designs_give_identical_paths() {
    // Walsh columns are orthogonal and centered
    let n = 16;
    let x = Array2::from_shape_fn((n, 4), |(i, j)| if (i >> j) & 1 == 1 { 1.0 } else { -1.0 });
    let mut r = rng(2);
    let noise = gaussian_matrix(&mut r, n, 1).column(0).to_owned();
    let y = x.dot(&Array1::from(vec![3.0, -2.0, 1.0, 0.5])) + noise;
    let e = expanded(&Dataset::new(x, y).unwrap());
    let lar = solve(&e, Mode::Lar);
    let lasso = solve(&e, Mode::Lasso);
    let fs0 = solve(&e, Mode::Fs0);
    for other in [&lasso, &fs0] {
        let cmp = compare_paths(&lar, other, stagewise::data::IndexBy::Norm).unwrap();
        assert!(cmp.sup_difference < 1e-10);
        assert!(cmp.divergence.is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn active_correlations_stay_tied_at_the_maximum(seed in 0u64..10_000, p in 2usize..7, mix in 0.0f64..1.5) {
        let e = expanded(&random_dataset(seed, 20, p, mix));
        for mode in [Mode::Lar, Mode::Lasso, Mode::Fs0] {
            let path = solve(&e, mode);
            let cm = &path.max_correlations;
            prop_assert!(cm.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
            for (k, active) in path.segment_active_sets.iter().enumerate() {
                // the moving coordinates share the maximal correlation at the segment's start
                let c = e.correlations(&path.vertices[k]);
                for &j in active {
                    prop_assert!((c[j] - cm[k]).abs() <= 1e-8 * cm[0], "{:?} seg {}: {} vs {}", mode, k, c[j], cm[k]);
                }
            }
        }
    }
}
