//! Small dense symmetric positive-definite linear algebra.
//!
//! Orders here are at most a few dozen, so everything is plain row-major
//! `Vec` storage with straightforward loops.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

pub const DEFAULT_JITTER: f64 = 1e-10;
const JITTER_GROWTH: f64 = 10.0;
const JITTER_RETRIES: usize = 3;
const SM_MIN_DENOMINATOR: f64 = 1e-12;

/// Dense symmetric matrix. Writes go through [`SymMatrix::set`], which
/// mirrors the entry, so symmetry holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds from square rows; rejects asymmetric or non-finite input.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) not finite")));
                }
                if j < i && v != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
                m.data[i * n + j] = v;
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self ← scale·self + v·vᵀ`
    pub fn scale_add_outer(&mut self, scale: T, v: &[T]) {
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                let x = scale * self.data[i * n + j] + v[i] * v[j];
                self.set(i, j, x);
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }
}

/// Lower-triangular factor; entries above the diagonal are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> LowerTriangular<T> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// `L·x`
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..i * self.n + i + 1], &x[..=i]))
            .collect()
    }

    /// `L·Lᵀ`
    pub fn reconstruct(&self) -> SymMatrix<T> {
        let n = self.n;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let s = dot(&self.data[i * n..i * n + j + 1], &self.data[j * n..j * n + j + 1]);
                m.set(i, j, s);
            }
        }
        m
    }

    /// Solves `L·y = b`.
    fn forward(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let s = b[i] - dot(&self.data[i * n..i * n + i], &y[..i]);
            y[i] = s / self.data[i * n + i];
        }
        y
    }

    /// Solves `Lᵀ·x = y`.
    fn backward(&self, y: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.data[k * n + i] * x[k];
            }
            x[i] = s / self.data[i * n + i];
        }
        x
    }
}

fn try_factor<T: Scalar>(a: &SymMatrix<T>, jitter: T) -> std::result::Result<LowerTriangular<T>, usize> {
    let n = a.n;
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let d = a.get(j, j) + jitter - dot(&l[j * n..j * n + j], &l[j * n..j * n + j]);
        if !(d > T::zero()) || !d.is_finite() {
            return Err(j);
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let s = a.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            l[i * n + j] = s / djj;
        }
    }
    Ok(LowerTriangular { n, data: l })
}

/// Cholesky factor of `a + jitter·I`.
///
/// A failed pivot retries with the jitter grown tenfold (or seeded at
/// [`DEFAULT_JITTER`] when zero), at most three times.
pub fn cholesky<T: Scalar>(a: &SymMatrix<T>, jitter: T) -> Result<LowerTriangular<T>> {
    if jitter < T::zero() {
        return Err(Error::InvalidInput(format!("negative jitter {jitter}")));
    }
    let mut j = jitter;
    let mut attempt = 0;
    loop {
        match try_factor(a, j) {
            Ok(l) => return Ok(l),
            Err(pivot) if attempt == JITTER_RETRIES => {
                return Err(Error::NotPositiveDefinite {
                    pivot,
                    jitter: j.as_f64(),
                })
            }
            Err(_) => {
                j = if j > T::zero() {
                    j * T::of(JITTER_GROWTH)
                } else {
                    T::of(DEFAULT_JITTER)
                };
                attempt += 1;
            }
        }
    }
}

/// Solves `a·x = b` for symmetric positive-definite `a`.
pub fn spd_solve<T: Scalar>(a: &SymMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.order() {
        return Err(Error::DimensionMismatch {
            expected: a.order(),
            got: b.len(),
        });
    }
    let l = cholesky(a, T::zero())?;
    Ok(l.backward(&l.forward(b)))
}

/// Full inverse of an SPD matrix through its Cholesky factor.
pub fn spd_inverse<T: Scalar>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let n = a.order();
    let l = cholesky(a, T::zero())?;
    let mut inv = SymMatrix::zeros(n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = T::zero());
        e[j] = T::one();
        let col = l.backward(&l.forward(&e));
        for (i, &v) in col.iter().enumerate().skip(j) {
            inv.set(i, j, v);
        }
    }
    Ok(inv)
}

/// Rank-one inverse update: given `A⁻¹`, returns `(A + v·vᵀ)⁻¹`.
pub fn sherman_morrison<T: Scalar>(a_inv: &SymMatrix<T>, v: &[T]) -> Result<SymMatrix<T>> {
    let n = a_inv.order();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let u = a_inv.mul_vec(v);
    let denom = T::one() + dot(v, &u);
    if !(denom > T::of(SM_MIN_DENOMINATOR)) {
        return Err(Error::DegenerateDenominator(denom.as_f64()));
    }
    let mut out = a_inv.clone();
    for i in 0..n {
        for j in i..n {
            out.set(i, j, a_inv.get(i, j) - u[i] * u[j] / denom);
        }
    }
    Ok(out)
}

/// Draws `mean + α·L·g` with `g` a vector of independent standard normals,
/// so the sample has covariance `α²·L·Lᵀ`.
pub fn sample_mvn<T: Scalar, R: Rng + ?Sized>(
    mean: &[T],
    scale: T,
    factor: &LowerTriangular<T>,
    rng: &mut R,
) -> Result<Vec<T>> {
    if mean.len() != factor.order() {
        return Err(Error::DimensionMismatch {
            expected: factor.order(),
            got: mean.len(),
        });
    }
    if scale == T::zero() {
        return Ok(mean.to_vec());
    }
    let g: Vec<T> = (0..mean.len())
        .map(|_| T::of(StandardNormal.sample(rng)))
        .collect();
    let lg = factor.mul_vec(&g);
    Ok(mean.iter().zip(lg).map(|(&m, x)| m + scale * x).collect())
}
