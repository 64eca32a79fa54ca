//! Small dense linear algebra: vector helpers, a square matrix type and a
//! cyclic Jacobi eigensolver for symmetric matrices.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Euclidean norm; rescales when the plain sum of squares over- or
/// underflows.
pub fn norm<T: Real>(a: &[T]) -> T {
    let n = dot(a, a).sqrt();
    if n.is_finite() && n > T::min_positive_value() {
        return n;
    }
    let big = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if big == T::zero() || !big.is_finite() {
        return if a.iter().any(|v| v.is_nan()) { T::nan() } else { big };
    }
    let s: T = a.iter().map(|&v| (v / big) * (v / big)).sum();
    big * s.sqrt()
}

/// `y += alpha * x`
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Real>(alpha: T, a: &[T]) -> Vec<T> {
    a.iter().map(|&x| alpha * x).collect()
}

pub fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

pub fn is_finite<T: Real>(a: &[T]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from row-major data; panics if `data.len() != n * n`.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data length");
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix must be square");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[T]) -> T {
        dot(x, &self.matvec(x))
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j) == T::zero()))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// Eigen-decomposition of a symmetric matrix: `A = V diag(values) V^T`,
/// eigenvalues ascending, `vectors` holds the eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

const MAX_SWEEPS: usize = 100;

impl<T: Real> SymmetricEigen<T> {
    /// Cyclic Jacobi rotations. Diagonal input returns after a single scan.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        let n = a.dim();
        let scale = a.frobenius().max(T::min_positive_value());
        let sym_tol = T::lit(1e-10) * scale.max(T::one());
        if a.max_asymmetry() > sym_tol {
            return Err(Error::NotSymmetric);
        }
        if a.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }

        let mut m = a.clone();
        let mut v = Matrix::identity(n);
        let tol = T::epsilon() * scale;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let off: T = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| m.get(i, j) * m.get(i, j))
                .sum::<T>()
                .sqrt();
            if off <= tol {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m.get(p, q);
                    if apq.abs() <= T::min_positive_value() {
                        continue;
                    }
                    let app = m.get(p, p);
                    let aqq = m.get(q, q);
                    let theta = (aqq - app) / (T::lit(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = m.get(k, p);
                        let akq = m.get(k, q);
                        m.set(k, p, c * akp - s * akq);
                        m.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = m.get(p, k);
                        let aqk = m.get(q, k);
                        m.set(p, k, c * apk - s * aqk);
                        m.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        if !converged {
            return Err(Error::EigenFailure);
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
        let values = order.iter().map(|&i| m.get(i, i)).collect();
        let mut vectors = Matrix::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            for k in 0..n {
                vectors.set(k, dst, v.get(k, src));
            }
        }
        Ok(Self { values, vectors })
    }

    pub fn min_value(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    /// `V diag(d) V^T`
    pub fn reconstruct_with(&self, d: &[T]) -> Matrix<T> {
        let n = self.vectors.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc += self.vectors.get(i, k) * d[k] * self.vectors.get(j, k);
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min<T: Real>(a: &Matrix<T>) -> Result<T> {
    if a.is_diagonal() {
        return Ok(a
            .diagonal()
            .into_iter()
            .fold(T::infinity(), |m, v| m.min(v)));
    }
    Ok(SymmetricEigen::new(a)?.min_value())
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm_sym<T: Real>(a: &Matrix<T>) -> Result<T> {
    let e = SymmetricEigen::new(a)?;
    Ok(e.values.iter().fold(T::zero(), |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_two_by_two() {
        let a = Matrix::<f64>::from_rows(&[vec![0.0, -2.0], vec![-2.0, 0.0]]);
        let e = SymmetricEigen::new(&a).unwrap();
        assert!((e.values[0] + 2.0).abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
        let v0 = e.vectors.column(0);
        // eigenvector of -2 is (1,1)/sqrt2 up to sign
        assert!((v0[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((v0[0] - v0[1]).abs() < 1e-12);
    }

    #[test]
    fn jacobi_reconstructs_and_is_orthogonal() {
        let a = Matrix::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, -3.0, 0.0, 1.5],
            vec![-2.0, 0.0, 1.0, 2.0],
            vec![0.5, 1.5, 2.0, 0.0],
        ]);
        let e = SymmetricEigen::new(&a).unwrap();
        let back = e.reconstruct_with(&e.values);
        assert!(back.max_abs_diff(&a) < 1e-12);
        let vtv = e.vectors.transpose().matmul(&e.vectors);
        assert!(vtv.max_abs_diff(&Matrix::identity(4)) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(SymmetricEigen::new(&a), Err(Error::NotSymmetric)));
    }

    #[test]
    fn diagonal_lambda_min() {
        let a = Matrix::from_diagonal(&[1.0, -0.01, 1.0]);
        assert_eq!(lambda_min(&a).unwrap(), -0.01);
    }

    #[test]
    fn norm_survives_extreme_scales() {
        assert!((norm(&[3e200f64, 4e200]) / 5e200 - 1.0).abs() < 1e-15);
        assert!((norm(&[3e-200f64, 4e-200]) / 5e-200 - 1.0).abs() < 1e-15);
        assert_eq!(norm(&[0.0f64, 0.0]), 0.0);
        assert!(norm(&[f64::NAN, 1.0]).is_nan());
        assert_eq!(norm(&[f64::INFINITY, 1.0]), f64::INFINITY);
    }
}
