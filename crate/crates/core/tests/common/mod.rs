//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use pareto_bandit::SymMatrix;
use rand::Rng;

/// Dense Gaussian elimination with partial pivoting on a row-major copy.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Inverse by solving against each unit vector.
pub fn gauss_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            gauss_solve(a, &e)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// `M Mᵀ + n·I` with `M` uniform in [-1, 1].
pub fn random_spd_rows<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = (0..n).map(|k| m[i][k] * m[j][k]).sum();
                    s + if i == j { n as f64 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

pub fn to_rows(a: &SymMatrix) -> Vec<Vec<f64>> {
    (0..a.order()).map(|i| a.row(i).to_vec()).collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// `(mean_a − mean_b) / sqrt(se_a² + se_b²)`.
pub fn separation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_se(a);
    let (mb, sb) = mean_se(b);
    (ma - mb) / sa.hypot(sb)
}

/// Ridge solution `(I + Σ ccᵀ)⁻¹ Σ c·r` by elimination.
pub fn batch_ridge(history: &[(Vec<f64>, f64)], dim: usize) -> Vec<f64> {
    let mut a: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut b = vec![0.0; dim];
    for (c, r) in history {
        for i in 0..dim {
            for j in 0..dim {
                a[i][j] += c[i] * c[j];
            }
            b[i] += c[i] * r;
        }
    }
    gauss_solve(&a, &b)
}

/// Brute-force dominance filter over minimized pairs.
pub fn brute_pareto(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|&p| {
            !points
                .iter()
                .any(|&q| q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1))
        })
        .collect()
}

/// Contexts and rewards seen by one arm.
type History = Vec<(Vec<f64>, f64)>;

pub struct LinalgSuite {
    pub cases: usize,
    pub worst_cholesky_rel: f64,
    pub worst_sherman_morrison: f64,
}

/// Random SPD matrices of order 1..=12: Cholesky reconstruction error
/// (relative Frobenius) and Sherman–Morrison versus an elimination inverse
/// of `A + vvᵀ` (max-abs).
pub fn linalg_suite(cases: usize, seed: u64) -> LinalgSuite {
    use pareto_bandit::linalg::{cholesky, sherman_morrison};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst_chol: f64 = 0.0;
    let mut worst_sm: f64 = 0.0;
    for case in 0..cases {
        let n = 1 + case % 12;
        let rows = random_spd_rows(n, &mut rng);
        let a = SymMatrix::from_rows(&rows).unwrap();

        let l = cholesky(&a, 0.0).unwrap();
        let mut diff = a.clone();
        let rec = l.reconstruct();
        for i in 0..n {
            for j in 0..n {
                diff.set(i, j, rec.get(i, j) - a.get(i, j));
            }
        }
        worst_chol = worst_chol.max(diff.frobenius() / a.frobenius());

        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a_inv = SymMatrix::from_rows(&symmetrize(gauss_inverse(&rows))).unwrap();
        let updated = sherman_morrison(&a_inv, &v).unwrap();
        let mut plus: Vec<Vec<f64>> = rows.clone();
        for i in 0..n {
            for j in 0..n {
                plus[i][j] += v[i] * v[j];
            }
        }
        worst_sm = worst_sm.max(max_abs_diff(&to_rows(&updated), &gauss_inverse(&plus)));
    }
    LinalgSuite {
        cases,
        worst_cholesky_rel: worst_chol,
        worst_sherman_morrison: worst_sm,
    }
}

/// Averages mirrored entries so rounding in an oracle inverse cannot
/// trip the symmetry check.
pub fn symmetrize(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = m;
            a[j][i] = m;
        }
    }
    a
}

/// Largest gap between CCTSB's incremental `θ̂` and a batch ridge solve
/// over random histories: one action dimension per arm count, random
/// contexts and rewards, every played arm checked after every step.
pub fn posterior_consistency(seeds: u64, steps: usize) -> f64 {
    use pareto_bandit::{ActionSpace, CctsbConfig, CctsbState, Context, Feedback, RewardMixer};
    use rand::SeedableRng;
    let dim = 4;
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let space = ActionSpace::new(vec![3, 2]).unwrap();
        let mixer = RewardMixer::convex(1.0).unwrap();
        let mut state = CctsbState::new(&space, CctsbConfig::new(0.1, dim, mixer)).unwrap();
        let mut history: Vec<Vec<History>> = vec![vec![Vec::new(); 3], vec![Vec::new(); 2]];
        for _ in 0..steps {
            let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let ctx = Context::new(c.clone()).unwrap();
            let action = state.select(&ctx, &mut rng).unwrap();
            let r: f64 = rng.random();
            state.update(&ctx, &action, &Feedback { reward: r, cost: 1.0 }).unwrap();
            for (k, &arm) in action.arms().iter().enumerate() {
                history[k][arm].push((c.clone(), r));
                let oracle = batch_ridge(&history[k][arm], dim);
                let got = state.posterior(k, arm).theta_hat();
                for (g, o) in got.iter().zip(&oracle) {
                    worst = worst.max((g - o).abs());
                }
            }
        }
    }
    worst
}

/// Fraction of steps 900..=1000 in which IndComb-TS plays the better arm
/// of a Bernoulli(0.8) / Bernoulli(0.2) problem, pooled over `seeds` runs.
pub fn ts_bernoulli_best_rate(seeds: u64) -> f64 {
    use pareto_bandit::{ActionSpace, Context, Feedback, PolicyConfig, RewardMixer};
    use rand::SeedableRng;
    let space = ActionSpace::new(vec![2]).unwrap();
    let means = [0.8, 0.2];
    let ctx = Context::new(vec![1.0]).unwrap();
    let (mut best, mut total) = (0usize, 0usize);
    for seed in 0..seeds {
        let mut policy = PolicyConfig::IndCombTs
            .build::<f64>(&space, 1, RewardMixer::convex(1.0).unwrap())
            .unwrap();
        policy.reset(seed);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut env_rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for t in 1..=1000 {
            let a = policy.select(&ctx, &mut rng).unwrap();
            let arm = a.arms()[0];
            let reward = if env_rng.random::<f64>() < means[arm] { 1.0 } else { 0.0 };
            policy.observe(&ctx, &a, &Feedback { reward, cost: 1.0 }).unwrap();
            if t >= 900 {
                total += 1;
                best += usize::from(arm == 0);
            }
        }
    }
    best as f64 / total as f64
}

/// Largest deviation of any arm's empirical frequency from uniform for the
/// Random policy, over `draws` selections per arm count in `arm_counts`.
pub fn random_uniformity(arm_counts: &[usize], draws: usize, seed: u64) -> f64 {
    use pareto_bandit::{ActionSpace, Context, PolicyConfig, RewardMixer};
    use rand::SeedableRng;
    let mut worst: f64 = 0.0;
    for &n in arm_counts {
        let space = ActionSpace::new(vec![n]).unwrap();
        let mut policy = PolicyConfig::Random
            .build::<f64>(&space, 1, RewardMixer::convex(1.0).unwrap())
            .unwrap();
        let ctx = Context::new(vec![1.0]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            counts[policy.select(&ctx, &mut rng).unwrap().arms()[0]] += 1;
        }
        for c in counts {
            worst = worst.max((c as f64 / draws as f64 - 1.0 / n as f64).abs());
        }
    }
    worst
}
