//! Covariance functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Covariance function `k(x, x')`, optionally composed by sum and product.
///
/// Stationary leaves are parametrized by an output variance and a
/// lengthscale in input units. The hyperparameter search tunes the
/// leftmost stationary leaf, see [`KernelSpec::scale`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec<T> {
    Matern52 { signal_var: T, lengthscale: T },
    SquaredExponential { signal_var: T, lengthscale: T },
    Constant { value: T },
    /// `signal_var · ⟨x, x'⟩`
    Linear { signal_var: T },
    Sum { left: Box<KernelSpec<T>>, right: Box<KernelSpec<T>> },
    Product { left: Box<KernelSpec<T>>, right: Box<KernelSpec<T>> },
}

impl<T: Scalar> KernelSpec<T> {
    pub fn matern52(signal_var: T, lengthscale: T) -> Self {
        Self::Matern52 {
            signal_var,
            lengthscale,
        }
    }

    pub fn squared_exponential(signal_var: T, lengthscale: T) -> Self {
        Self::SquaredExponential {
            signal_var,
            lengthscale,
        }
    }

    pub fn plus(self, other: Self) -> Self {
        Self::Sum {
            left: Box::new(self),
            right: Box::new(other),
        }
    }

    pub fn times(self, other: Self) -> Self {
        Self::Product {
            left: Box::new(self),
            right: Box::new(other),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    name,
                    value: v.to_f64_lossy(),
                    reason: "must be positive and finite",
                })
            }
        };
        match self {
            Self::Matern52 {
                signal_var,
                lengthscale,
            }
            | Self::SquaredExponential {
                signal_var,
                lengthscale,
            } => {
                positive("signal_var", *signal_var)?;
                positive("lengthscale", *lengthscale)
            }
            Self::Constant { value } => {
                if *value >= T::zero() && value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        name: "constant kernel value",
                        value: value.to_f64_lossy(),
                        reason: "must be non-negative",
                    })
                }
            }
            Self::Linear { signal_var } => positive("signal_var", *signal_var),
            Self::Sum { left, right } | Self::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
        }
    }

    /// `(signal_var, lengthscale)` of the leftmost stationary leaf.
    pub fn scale(&self) -> Option<(T, T)> {
        match self {
            Self::Matern52 {
                signal_var,
                lengthscale,
            }
            | Self::SquaredExponential {
                signal_var,
                lengthscale,
            } => Some((*signal_var, *lengthscale)),
            Self::Constant { .. } | Self::Linear { .. } => None,
            Self::Sum { left, right } | Self::Product { left, right } => {
                left.scale().or_else(|| right.scale())
            }
        }
    }

    /// Copy with the leftmost stationary leaf rescaled.
    pub fn with_scale(&self, signal_var: T, lengthscale: T) -> Option<Self> {
        let mut out = self.clone();
        out.set_scale(signal_var, lengthscale).then_some(out)
    }

    fn set_scale(&mut self, sv: T, ls: T) -> bool {
        match self {
            Self::Matern52 {
                signal_var,
                lengthscale,
            }
            | Self::SquaredExponential {
                signal_var,
                lengthscale,
            } => {
                *signal_var = sv;
                *lengthscale = ls;
                true
            }
            Self::Constant { .. } | Self::Linear { .. } => false,
            Self::Sum { left, right } | Self::Product { left, right } => {
                left.set_scale(sv, ls) || right.set_scale(sv, ls)
            }
        }
    }

    /// `k(x, x')` with a dimension check.
    pub fn eval(&self, x: &[T], x_prime: &[T]) -> Result<T> {
        if x.len() != x_prime.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: x_prime.len(),
            });
        }
        Ok(self.eval_unchecked(x, x_prime))
    }

    pub(crate) fn eval_unchecked(&self, x: &[T], x_prime: &[T]) -> T {
        match self {
            Self::Matern52 {
                signal_var,
                lengthscale,
            } => {
                let r = sq_dist(x, x_prime).sqrt();
                matern52(r / *lengthscale) * *signal_var
            }
            Self::SquaredExponential {
                signal_var,
                lengthscale,
            } => {
                let r2 = sq_dist(x, x_prime) / (*lengthscale * *lengthscale);
                *signal_var * (-r2 * T::lit(0.5)).exp()
            }
            Self::Constant { value } => *value,
            Self::Linear { signal_var } => *signal_var * dot(x, x_prime),
            Self::Sum { left, right } => {
                left.eval_unchecked(x, x_prime) + right.eval_unchecked(x, x_prime)
            }
            Self::Product { left, right } => {
                left.eval_unchecked(x, x_prime) * right.eval_unchecked(x, x_prime)
            }
        }
    }

    /// Symmetric Gram matrix `K(X, X)`.
    pub fn gram(&self, x: &Matrix<T>) -> Matrix<T> {
        let n = x.rows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval_unchecked(x.row(i), x.row(j));
                k.set(i, j, v);
                k.set(j, i, v);
            }
        }
        k
    }

    /// Cross covariance `K(A, B)`.
    pub fn cross(&self, a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
        if a.rows() > 0 && b.rows() > 0 && a.cols() != b.cols() {
            return Err(Error::DimensionMismatch {
                expected: b.cols(),
                got: a.cols(),
            });
        }
        Ok(Matrix::from_fn(a.rows(), b.rows(), |i, j| {
            self.eval_unchecked(a.row(i), b.row(j))
        }))
    }
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&u, &v)| (u - v) * (u - v))
        .fold(T::zero(), |s, d| s + d)
}

/// Unit-variance Matérn-5/2 profile of the scaled distance `r/ℓ`.
#[inline]
fn matern52<T: Scalar>(scaled: T) -> T {
    let s = T::lit(5.0f64.sqrt()) * scaled;
    (T::one() + s + s * s / T::lit(3.0)) * (-s).exp()
}
