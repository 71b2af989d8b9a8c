//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use stagewise::{Dataset, ExpandedDesign};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.sample(StandardNormal))
}

/// Correlated Gaussian design (shared factor with weight `mix`) and a noisy
/// linear response with a few signals of mixed sign.
pub fn random_dataset(seed: u64, n: usize, p: usize, mix: f64) -> Dataset {
    let mut r = rng(seed);
    let z = gaussian_matrix(&mut r, n, p);
    let f: Array1<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let x = Array2::from_shape_fn((n, p), |(i, j)| z[[i, j]] + mix * f[i]);
    let beta: Array1<f64> = (0..p)
        .map(|j| {
            let b: f64 = r.sample(StandardNormal);
            if j % 3 == 2 { 0.0 } else { 2.0 * b }
        })
        .collect();
    let y = x.dot(&beta) + (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect::<Array1<f64>>();
    Dataset::new(x, y).unwrap()
}

pub fn expanded(d: &Dataset) -> ExpandedDesign {
    ExpandedDesign::new(d.standardize().unwrap())
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: ArrayView2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut inv = Array2::eye(n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .unwrap();
        for k in 0..n {
            m.swap([col, k], [piv, k]);
            inv.swap([col, k], [piv, k]);
        }
        let d = m[[col, col]];
        for k in 0..n {
            m[[col, k]] /= d;
            inv[[col, k]] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[[i, col]];
                for k in 0..n {
                    m[[i, k]] -= f * m[[col, k]];
                    inv[[i, k]] -= f * inv[[col, k]];
                }
            }
        }
    }
    inv
}

/// Least squares through the explicitly inverted normal equations.
pub fn normal_equations(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    invert(a.t().dot(&a).view()).dot(&a.t().dot(&b))
}

/// Minimize `½θᵀGθ − cᵀθ` over `θ ≥ 0` by trying every support.
pub fn nnls_enumerate(g: ArrayView2<f64>, c: ArrayView1<f64>) -> Array1<f64> {
    let n = c.len();
    let mut best = Array1::zeros(n);
    let mut best_obj = 0.0;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let gs = Array2::from_shape_fn((idx.len(), idx.len()), |(a, b)| g[[idx[a], idx[b]]]);
        let cs: Array1<f64> = idx.iter().map(|&i| c[i]).collect();
        let ts = invert(gs.view()).dot(&cs);
        if ts.iter().any(|&t| t < 0.0) {
            continue;
        }
        let mut theta = Array1::zeros(n);
        for (k, &i) in idx.iter().enumerate() {
            theta[i] = ts[k];
        }
        let obj = 0.5 * theta.dot(&g.dot(&theta)) - c.dot(&theta);
        if obj < best_obj {
            best_obj = obj;
            best = theta;
        }
    }
    best
}

/// Euclidean projection onto `{β : ‖β‖₁ ≤ s}`.
fn project_l1(v: &Array1<f64>, s: f64) -> Array1<f64> {
    if s <= 0.0 {
        return Array1::zeros(v.len());
    }
    if v.iter().map(|x| x.abs()).sum::<f64>() <= s {
        return v.clone();
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - s) / (k as f64 + 1.0);
        if uk > t {
            theta = t;
        }
    }
    v.mapv(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// `min ½‖y − Xβ‖²` subject to `‖β‖₁ ≤ s`, by accelerated projected gradient.
pub fn qp_lasso(x: ArrayView2<f64>, y: ArrayView1<f64>, s: f64) -> Array1<f64> {
    let g = x.t().dot(&x);
    let xty = x.t().dot(&y);
    // power iteration for the Lipschitz constant
    let mut v = Array1::from_elem(g.nrows(), 1.0);
    let mut lip = 0.0;
    for _ in 0..500 {
        let w = g.dot(&v);
        lip = w.dot(&w).sqrt();
        v = w / lip;
    }
    let step = 1.0 / (1.01 * lip);
    let obj = |b: &Array1<f64>| 0.5 * b.dot(&g.dot(b)) - xty.dot(b);
    let mut beta = Array1::zeros(g.nrows());
    let mut z = beta.clone();
    let mut t = 1.0f64;
    for it in 0..2_000_000 {
        let grad = g.dot(&z) - &xty;
        let next = project_l1(&(&z - &(step * &grad)), s);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        let diff = &next - &beta;
        z = &next + &(momentum * &diff);
        // restart when the objective goes up
        if obj(&next) > obj(&beta) {
            z = next.clone();
            t = 1.0;
        } else {
            t = t_next;
        }
        let change = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        beta = next;
        if change < 1e-15 && it > 10 {
            break;
        }
    }
    beta
}

/// Smallest `γ` on a grid of spacing `h` at which `f` changes sign from
/// positive.
pub fn grid_crossing(f: impl Fn(f64) -> f64, h: f64, max: f64) -> Option<f64> {
    let mut g = 0.0;
    while g <= max {
        if f(g) <= 0.0 {
            return Some(g);
        }
        g += h;
    }
    None
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn sup_abs(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Indicator columns `I(x > t)` for 1 to 8 random distinct knots on a random
/// grid, with a noisy step response.
pub fn random_pc_dataset(r: &mut ChaCha8Rng) -> Dataset {
    let n = r.random_range(20..80usize);
    let k = r.random_range(1..=8usize).min(n - 2);
    let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() < k {
        let c = r.random_range(0..n - 1);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    let m = Array2::from_shape_fn((n, k), |(i, j)| if x[i] > cuts[j] as f64 { 1.0 } else { 0.0 });
    let y: Array1<f64> = (0..n)
        .map(|i| (x[i] / n as f64 * 6.0).sin() + 0.3 * r.sample::<f64, _>(StandardNormal))
        .collect();
    Dataset::new(m, y).unwrap()
}
