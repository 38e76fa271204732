#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use pareto_bandit::linalg::{cholesky, sample_mvn, sherman_morrison, spd_inverse, spd_solve};
use pareto_bandit::{LowerTriangular, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn two_by_two_factor() {
    let a = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
    let l = cholesky(&a, 0.0).unwrap();
    let expect = [[2.0, 0.0], [1.0, 2f64.sqrt()]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((l.get(i, j) - expect[i][j]).abs() < 1e-12);
        }
    }
    assert!(l.reconstruct().max_abs_diff(&a) < 1e-12);
}

#[test]
fn solve_matches_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let rows = random_spd_rows(6, &mut rng);
        let b: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
        let x = spd_solve(&SymMatrix::from_rows(&rows).unwrap(), &b).unwrap();
        let oracle = gauss_solve(&rows, &b);
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-8, "{x:?} vs {oracle:?}");
        }
    }
}

#[test]
fn inverse_matches_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=12 {
        let rows = random_spd_rows(n, &mut rng);
        let inv = spd_inverse(&SymMatrix::from_rows(&rows).unwrap()).unwrap();
        assert!(max_abs_diff(&to_rows(&inv), &gauss_inverse(&rows)) < 1e-10);
    }
}

#[test]
fn sherman_morrison_unit_vector() {
    let out = sherman_morrison(&SymMatrix::identity(2), &[1.0, 0.0]).unwrap();
    assert_eq!(to_rows(&out), vec![vec![0.5, 0.0], vec![0.0, 1.0]]);
}

#[test]
fn sherman_morrison_five_by_five() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let rows = random_spd_rows(5, &mut rng);
    let a = SymMatrix::from_rows(&rows).unwrap();
    let v: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let got = sherman_morrison(&spd_inverse(&a).unwrap(), &v).unwrap();
    let mut plus = a.clone();
    plus.scale_add_outer(1.0, &v);
    assert!(got.max_abs_diff(&spd_inverse(&plus).unwrap()) <= 1e-9);
}

#[test]
fn random_spd_suite() {
    let s = linalg_suite(1000, 2024);
    assert!(s.worst_cholesky_rel <= 1e-10, "cholesky {}", s.worst_cholesky_rel);
    assert!(s.worst_sherman_morrison <= 1e-9, "sherman-morrison {}", s.worst_sherman_morrison);
}

#[test]
fn mvn_identity_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let l = LowerTriangular::identity(2);
    let n = 100_000;
    let mut s = [[0.0; 2]; 2];
    for _ in 0..n {
        let x = sample_mvn(&[0.0, 0.0], 1.0, &l, &mut rng).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += x[i] * x[j];
            }
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            let cov = s[i][j] / n as f64;
            let target = if i == j { 1.0 } else { 0.0 };
            // off-diagonal: 5% of the unit diagonal scale
            assert!((cov - target).abs() < 0.05, "cov[{i}][{j}] = {cov}");
        }
    }
}

#[test]
fn mvn_mean_within_three_se() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let l = LowerTriangular::identity(2);
    let n = 10_000;
    let draws: Vec<Vec<f64>> = (0..n)
        .map(|_| sample_mvn(&[1.0, 1.0], 0.1, &l, &mut rng).unwrap())
        .collect();
    for i in 0..2 {
        let col: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let (m, se) = mean_se(&col);
        assert!((m - 1.0).abs() < 3.0 * se, "mean {m} se {se}");
    }
}

#[test]
fn mvn_general_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let a = SymMatrix::from_rows(&[vec![2.0, 0.6], vec![0.6, 1.0]]).unwrap();
    let l = cholesky(&a, 0.0).unwrap();
    let n = 100_000;
    let mut s = [[0.0; 2]; 2];
    for _ in 0..n {
        let x = sample_mvn(&[0.0, 0.0], 1.0, &l, &mut rng).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += x[i] * x[j];
            }
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            let cov = s[i][j] / n as f64;
            assert!((cov - a.get(i, j)).abs() < 0.05 * a.get(i, i).max(a.get(j, j)));
        }
    }
}
