//! Dense row-major matrices and a jitter-escalating Cholesky factorization.
//!
//! Only what the GP engine needs: symmetric positive-definite factorization,
//! triangular solves, log-determinants and appending one row/column to an
//! existing factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Single-column matrix, one scalar input per row.
    pub fn column(values: &[T]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    /// Append a row (all rows share `cols`).
    pub fn push_row(&mut self, row: &[T]) -> Result<()> {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let split = n - n % 4;
    let mut acc = [T::zero(); 4];
    for (ca, cb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        for k in 0..4 {
            acc[k] = acc[k] + ca[k] * cb[k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in split..n {
        s = s + a[k] * b[k];
    }
    s
}

/// Dot products of four rows against a shared vector, loading `b` once.
#[inline]
fn dot4<T: Scalar>(r0: &[T], r1: &[T], r2: &[T], r3: &[T], b: &[T]) -> [T; 4] {
    let n = b.len();
    let (r0, r1, r2, r3) = (&r0[..n], &r1[..n], &r2[..n], &r3[..n]);
    let mut a0 = [T::zero(); 2];
    let mut a1 = [T::zero(); 2];
    let mut a2 = [T::zero(); 2];
    let mut a3 = [T::zero(); 2];
    let split = n - n % 2;
    let mut k = 0;
    while k < split {
        for l in 0..2 {
            let bv = b[k + l];
            a0[l] = a0[l] + r0[k + l] * bv;
            a1[l] = a1[l] + r1[k + l] * bv;
            a2[l] = a2[l] + r2[k + l] * bv;
            a3[l] = a3[l] + r3[k + l] * bv;
        }
        k += 2;
    }
    let mut out = [a0[0] + a0[1], a1[0] + a1[1], a2[0] + a2[1], a3[0] + a3[1]];
    if split < n {
        let bv = b[split];
        out[0] = out[0] + r0[split] * bv;
        out[1] = out[1] + r1[split] * bv;
        out[2] = out[2] + r2[split] * bv;
        out[3] = out[3] + r3[split] * bv;
    }
    out
}

/// Lower-triangular Cholesky factor `L` with `A + jitter·I = L Lᵀ`.
///
/// Stored as a full row-major square; the strict upper triangle is zero.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
    jitter: T,
}

impl<T: Scalar> Cholesky<T> {
    /// Plain factorization, no jitter. `None` if a pivot is not strictly positive.
    pub fn factor(a: &Matrix<T>) -> Option<Self> {
        Self::factor_shifted(a, T::zero())
    }

    /// Factorize `a + shift·I`.
    pub fn factor_shifted(a: &Matrix<T>, shift: T) -> Option<Self> {
        assert_eq!(a.rows(), a.cols(), "Cholesky needs a square matrix");
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        let mut i0 = 0;
        // Rows are produced four at a time so each finished row j is streamed
        // once per block instead of once per row.
        while i0 < n {
            let block = (n - i0).min(4);
            if block == 4 {
                for j in 0..i0 {
                    let (head, tail) = l.data.split_at_mut(i0 * n);
                    let rj = &head[j * n..j * n + j];
                    let r0 = &tail[..n];
                    let r1 = &tail[n..2 * n];
                    let r2 = &tail[2 * n..3 * n];
                    let r3 = &tail[3 * n..4 * n];
                    let s = dot4(r0, r1, r2, r3, rj);
                    let ljj = head[j * n + j];
                    for (b, sb) in s.iter().enumerate() {
                        let v = (a.get(i0 + b, j) - *sb) / ljj;
                        tail[b * n + j] = v;
                    }
                }
            } else {
                for b in 0..block {
                    let i = i0 + b;
                    for j in 0..i0 {
                        let s = dot(&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
                        let v = (a.get(i, j) - s) / l.data[j * n + j];
                        l.data[i * n + j] = v;
                    }
                }
            }
            for b in 0..block {
                let i = i0 + b;
                for j in i0..=i {
                    let s = dot(&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
                    if i == j {
                        let d = a.get(i, i) + shift - s;
                        if !(d > T::zero()) || !d.is_finite() {
                            return None;
                        }
                        l.data[i * n + i] = d.sqrt();
                    } else {
                        l.data[i * n + j] = (a.get(i, j) - s) / l.data[j * n + j];
                    }
                }
            }
            i0 += block;
        }
        Some(Self { l, jitter: shift })
    }

    /// Factorize `a`, escalating a diagonal jitter ×10 from `start` up to `max`
    /// whenever the factorization breaks down. A zero `start` first tries `a`
    /// unshifted and then begins escalation at `max·1e-4`.
    pub fn factor_with_jitter(a: &Matrix<T>, start: T, max: T) -> Result<Self> {
        if let Some(c) = Self::factor_shifted(a, start) {
            return Ok(c);
        }
        let ten = T::lit(10.0);
        let mut jitter = if start > T::zero() {
            start * ten
        } else {
            max * T::lit(1e-4)
        };
        while jitter <= max * T::lit(1.000001) {
            if let Some(c) = Self::factor_shifted(a, jitter) {
                return Ok(c);
            }
            jitter = jitter * ten;
        }
        Err(Error::NotPositiveDefinite {
            jitter: max.to_f64_lossy(),
        })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Extra diagonal shift that was needed for the factorization to succeed.
    pub fn jitter(&self) -> T {
        self.jitter
    }

    pub fn factor_matrix(&self) -> &Matrix<T> {
        &self.l
    }

    /// Reconstruct `L Lᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.l.row(i)[..k], &self.l.row(j)[..k])
        })
    }

    /// Solve `L x = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let row = self.l.row(i);
            let s = dot(&row[..i], &b[..i]);
            b[i] = (b[i] - s) / row[i];
        }
    }

    /// Solve `Lᵀ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in (0..n).rev() {
            let xi = b[i] / self.l.get(i, i);
            b[i] = xi;
            let row = self.l.row(i);
            for k in 0..i {
                b[k] = b[k] - row[k] * xi;
            }
        }
    }

    /// Solve `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `log det(L Lᵀ)`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.dim()).map(|i| self.l.get(i, i).ln()).sum::<T>() * two
    }

    /// Extend the factor of `A` to the factor of `[[A, c], [cᵀ, d]]`.
    ///
    /// `d` should already include any noise and the original jitter. Returns
    /// `false` (leaving `self` untouched) if the new pivot is not positive.
    pub fn append(&mut self, cross: &[T], d: T) -> bool {
        let n = self.dim();
        assert_eq!(cross.len(), n);
        let mut w = cross.to_vec();
        self.solve_lower_in_place(&mut w);
        let pivot = d + self.jitter - dot(&w, &w);
        if !(pivot > T::zero()) || !pivot.is_finite() {
            return false;
        }
        let m = n + 1;
        let mut data = Vec::with_capacity(m * m);
        for i in 0..n {
            data.extend_from_slice(self.l.row(i));
            data.push(T::zero());
        }
        data.extend_from_slice(&w);
        data.push(pivot.sqrt());
        self.l = Matrix {
            rows: m,
            cols: m,
            data,
        };
        true
    }
}
