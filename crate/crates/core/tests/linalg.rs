mod common;

use common::*;
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use stagewise::linalg::{
    factor_downdate, factor_update, gram, solve_least_squares, solve_nnls, solve_nnls_gram, CholeskyFactor,
    NnlsOptions,
};
use stagewise::Error;

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-3.0f64..3.0, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn least_squares_matches_normal_equations() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let a = gaussian_matrix(&mut r, 30, 6);
        let b = gaussian_matrix(&mut r, 30, 1).column(0).to_owned();
        let got = solve_least_squares(a.view(), b.view()).unwrap();
        let want = normal_equations(a.view(), b.view());
        assert!(sup_abs(got.view(), want.view()) < 1e-10, "seed {seed}");
    }
}

#[test]
fn least_squares_on_exact_system() {
    let a = array![[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]];
    let x = array![0.5, -1.5];
    let got = solve_least_squares(a.view(), a.dot(&x).view()).unwrap();
    assert!(sup_abs(got.view(), x.view()) < 1e-12);
}

#[test]
fn rank_deficient_least_squares_is_rejected() {
    let a = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
    let b = array![1.0, 2.0, 3.0];
    assert!(solve_least_squares(a.view(), b.view()).is_err());
}

#[test]
fn nnls_trivial_cases() {
    // unconstrained minimizer already feasible
    let a = Array2::<f64>::eye(3);
    let b = array![1.0, 2.0, 3.0];
    assert!(sup_abs(solve_nnls(a.view(), b.view()).unwrap().view(), b.view()) < 1e-14);
    // negative target is clipped to zero
    let b = array![1.0, -2.0, 3.0];
    assert!(sup_abs(solve_nnls(a.view(), b.view()).unwrap().view(), array![1.0, 0.0, 3.0].view()) < 1e-14);
}

#[test]
fn dense_and_gram_nnls_agree() {
    for seed in 0..50 {
        let mut r = rng(100 + seed);
        let a = gaussian_matrix(&mut r, 15, 6);
        let b = gaussian_matrix(&mut r, 15, 1).column(0).to_owned();
        let dense = solve_nnls(a.view(), b.view()).unwrap();
        let g = gram(a.view());
        let c = a.t().dot(&b);
        let via_gram = solve_nnls_gram(g.view(), c.view(), NnlsOptions::default()).unwrap();
        assert!(sup_abs(dense.view(), via_gram.view()) < 1e-9, "seed {seed}");
    }
}

#[test]
fn nnls_pivot_cap_reports_stall() {
    let mut r = rng(7);
    let a = gaussian_matrix(&mut r, 20, 8);
    let b = gaussian_matrix(&mut r, 20, 1).column(0).to_owned();
    let opts = NnlsOptions {
        max_pivots: Some(0),
        ..NnlsOptions::default()
    };
    let g = gram(a.view());
    let c = a.t().dot(&b);
    match solve_nnls_gram(g.view(), c.view(), opts) {
        Err(Error::SolverStall { .. }) => {}
        other => panic!("expected a stall, got {other:?}"),
    }
}

#[test]
fn cholesky_append_remove_sequence_matches_fresh_factor() {
    let mut r = rng(3);
    let x = gaussian_matrix(&mut r, 40, 8);
    let g = gram(x.view());
    let mut active: Vec<usize> = Vec::new();
    let mut factor = CholeskyFactor::empty();
    let ops: [(bool, usize); 11] = [
        (true, 0),
        (true, 3),
        (true, 5),
        (false, 1),
        (true, 7),
        (true, 1),
        (false, 0),
        (true, 2),
        (true, 4),
        (false, 2),
        (true, 6),
    ];
    for (add, k) in ops {
        if add {
            let row: Vec<f64> = active.iter().chain([&k]).map(|&i| g[[k, i]]).collect();
            factor = factor_update(factor, &row).unwrap();
            active.push(k);
        } else {
            factor = factor_downdate(factor, k);
            active.remove(k);
        }
        let sub = Array2::from_shape_fn((active.len(), active.len()), |(a, b)| g[[active[a], active[b]]]);
        let fresh = CholeskyFactor::factor(sub.view()).unwrap();
        assert!(max_abs_diff(&factor.lower(), &fresh.lower()) < 1e-10);
        assert!(max_abs_diff(&factor.reconstruct(), &sub) < 1e-10);
    }
}

#[test]
fn dependent_column_is_rejected_on_append() {
    let x = array![[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]];
    let g = gram(x.view());
    let f = factor_update(CholeskyFactor::empty(), &[g[[0, 0]]]).unwrap();
    assert!(factor_update(f, &[g[[1, 0]], g[[1, 1]]]).is_err());
}

#[test]
fn cholesky_solve_inverts_gram() {
    let mut r = rng(11);
    let x = gaussian_matrix(&mut r, 25, 5);
    let g = gram(x.view());
    let f = CholeskyFactor::factor(g.view()).unwrap();
    let b = [1.0, -2.0, 0.5, 3.0, 0.0];
    let sol = Array1::from(f.solve(&b));
    let want = invert(g.view()).dot(&Array1::from(b.to_vec()));
    assert!(sup_abs(sol.view(), want.view()) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn nnls_matches_support_enumeration(a in matrix_strategy(10, 5), b in prop::collection::vec(-3.0f64..3.0, 10)) {
        let g = gram(a.view());
        // enumeration needs every passive subproblem well posed
        prop_assume!(CholeskyFactor::factor(g.view()).is_ok());
        let min_pivot = CholeskyFactor::factor(g.view()).unwrap().diagonal().fold(f64::INFINITY, f64::min);
        prop_assume!(min_pivot > 1e-3);
        let b = Array1::from(b);
        let c = a.t().dot(&b);
        let got = solve_nnls_gram(g.view(), c.view(), NnlsOptions::default()).unwrap();
        let want = nnls_enumerate(g.view(), c.view());
        prop_assert!(got.iter().all(|&t| t >= 0.0));
        prop_assert!(sup_abs(got.view(), want.view()) < 1e-8 * (1.0 + want.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn nnls_kkt_conditions(a in matrix_strategy(12, 4), b in prop::collection::vec(-3.0f64..3.0, 12)) {
        let b = Array1::from(b);
        let Ok(theta) = solve_nnls(a.view(), b.view()) else {
            return Ok(());
        };
        let grad = a.t().dot(&(&b - &a.dot(&theta)));
        let scale = 1.0 + grad.iter().fold(0.0f64, |m, v| m.max(v.abs())) + b.dot(&b).sqrt();
        for (t, g) in theta.iter().zip(&grad) {
            prop_assert!(*t >= 0.0);
            prop_assert!(*g <= 1e-9 * scale);
            if *t > 0.0 {
                prop_assert!(g.abs() <= 1e-8 * scale);
            }
        }
    }
}
