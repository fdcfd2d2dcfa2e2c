//! Exact GP conditioning on a Cholesky factor of `K + diag(noise) + floor·I`.

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Default diagonal floor added to every training point.
pub const NOISE_FLOOR: f64 = 1e-6;
/// Largest jitter tried before giving up on a factorization.
pub const MAX_JITTER: f64 = 1e-2;

/// Label noise variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise<T> {
    Homoscedastic(T),
    PerPoint(Vec<T>),
}

impl<T: Scalar> Noise<T> {
    pub fn at(&self, i: usize) -> T {
        match self {
            Self::Homoscedastic(v) => *v,
            Self::PerPoint(v) => v[i],
        }
    }

    /// Same noise plus a constant extra variance on every point.
    pub fn offset(&self, extra: T) -> Self {
        match self {
            Self::Homoscedastic(v) => Self::Homoscedastic(*v + extra),
            Self::PerPoint(v) => Self::PerPoint(v.iter().map(|&x| x + extra).collect()),
        }
    }
}

/// Training inputs `X` (one row per point), labels `y` and label noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpDataset<T> {
    pub inputs: Matrix<T>,
    pub labels: Vec<T>,
    pub noise: Noise<T>,
}

impl<T: Scalar> GpDataset<T> {
    pub fn new(inputs: Matrix<T>, labels: Vec<T>, noise: Noise<T>) -> Result<Self> {
        let ds = Self {
            inputs,
            labels,
            noise,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn empty(dim: usize, noise_var: T) -> Self {
        Self {
            inputs: Matrix::zeros(0, dim),
            labels: Vec::new(),
            noise: Noise::Homoscedastic(noise_var),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.rows() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs.rows(),
                got: self.labels.len(),
            });
        }
        let bad_noise = |v: T| !(v >= T::zero()) || !v.is_finite();
        match &self.noise {
            Noise::Homoscedastic(v) if bad_noise(*v) => {
                return Err(Error::OutOfRange {
                    name: "noise variance",
                    value: v.to_f64_lossy(),
                    reason: "must be finite and non-negative",
                })
            }
            Noise::PerPoint(v) => {
                if v.len() != self.labels.len() {
                    return Err(Error::DimensionMismatch {
                        expected: self.labels.len(),
                        got: v.len(),
                    });
                }
                if let Some(&b) = v.iter().find(|&&x| bad_noise(x)) {
                    return Err(Error::OutOfRange {
                        name: "noise variance",
                        value: b.to_f64_lossy(),
                        reason: "must be finite and non-negative",
                    });
                }
            }
            _ => {}
        }
        if self.labels.iter().any(|y| !y.is_finite()) || self.inputs.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("training data"));
        }
        Ok(())
    }
}

/// Posterior at a set of test inputs.
#[derive(Clone, Debug)]
pub struct GpPrediction<T> {
    pub mean: Vec<T>,
    pub cov: Matrix<T>,
    pub std: Vec<T>,
}

/// GP with constant prior mean, conditioned on a dataset.
///
/// Immutable apart from [`GpModel::push`], which appends one observation
/// under the current hyperparameters.
#[derive(Clone, Debug)]
pub struct GpModel<T> {
    kernel: KernelSpec<T>,
    mean_const: T,
    dataset: GpDataset<T>,
    noise_floor: T,
    factor: Option<Cholesky<T>>,
    alpha: Vec<T>,
}

impl<T: Scalar> GpModel<T> {
    pub fn new(kernel: KernelSpec<T>, mean_const: T, dataset: GpDataset<T>) -> Result<Self> {
        Self::with_noise_floor(kernel, mean_const, dataset, T::lit(NOISE_FLOOR))
    }

    pub fn with_noise_floor(
        kernel: KernelSpec<T>,
        mean_const: T,
        dataset: GpDataset<T>,
        noise_floor: T,
    ) -> Result<Self> {
        kernel.validate()?;
        dataset.validate()?;
        if !mean_const.is_finite() {
            return Err(Error::NonFinite("mean constant"));
        }
        let mut model = Self {
            kernel,
            mean_const,
            dataset,
            noise_floor,
            factor: None,
            alpha: Vec::new(),
        };
        model.refactor()?;
        Ok(model)
    }

    /// `K(X,X) + diag(noise) + floor·I`, before any escalation jitter.
    pub fn train_covariance(&self) -> Matrix<T> {
        let mut k = self.kernel.gram(&self.dataset.inputs);
        for i in 0..self.dataset.len() {
            let v = k.get(i, i) + self.dataset.noise.at(i) + self.noise_floor;
            k.set(i, i, v);
        }
        k
    }

    fn refactor(&mut self) -> Result<()> {
        if self.dataset.is_empty() {
            self.factor = None;
            self.alpha.clear();
            return Ok(());
        }
        let k = self.train_covariance();
        let chol = Cholesky::factor_with_jitter(&k, T::zero(), T::lit(MAX_JITTER))?;
        self.alpha = chol.solve(&self.centered_labels());
        self.factor = Some(chol);
        Ok(())
    }

    fn centered_labels(&self) -> Vec<T> {
        self.dataset.labels.iter().map(|&y| y - self.mean_const).collect()
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    pub fn mean_const(&self) -> T {
        self.mean_const
    }

    pub fn dataset(&self) -> &GpDataset<T> {
        &self.dataset
    }

    pub fn noise_floor(&self) -> T {
        self.noise_floor
    }

    pub fn factor(&self) -> Option<&Cholesky<T>> {
        self.factor.as_ref()
    }

    /// Extra diagonal jitter the factorization needed on top of the floor.
    pub fn jitter(&self) -> T {
        self.factor.as_ref().map_or(T::zero(), |c| c.jitter())
    }

    /// Condition on one more observation, keeping hyperparameters fixed.
    ///
    /// Extends the factor in place when possible and falls back to a full
    /// refactorization otherwise.
    pub fn push(&mut self, x: &[T], y: T, noise_var: T) -> Result<()> {
        if x.len() != self.dataset.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dataset.dim(),
                got: x.len(),
            });
        }
        if !y.is_finite() || !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        let noise = match &mut self.dataset.noise {
            Noise::Homoscedastic(v) => *v,
            Noise::PerPoint(v) => {
                v.push(noise_var);
                noise_var
            }
        };
        let cross: Vec<T> = (0..self.dataset.len())
            .map(|i| self.kernel.eval_unchecked(self.dataset.inputs.row(i), x))
            .collect();
        self.dataset.inputs.push_row(x)?;
        self.dataset.labels.push(y);
        let d = self.kernel.eval_unchecked(x, x) + noise + self.noise_floor;
        let extended = match &mut self.factor {
            Some(f) => f.append(&cross, d),
            None => false,
        };
        if extended {
            let f = self.factor.as_ref().expect("factor present");
            self.alpha = f.solve(&self.centered_labels());
            Ok(())
        } else {
            self.refactor()
        }
    }

    fn check_test_inputs(&self, test: &Matrix<T>) -> Result<()> {
        if test.rows() > 0 && test.cols() != self.dataset.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dataset.dim(),
                got: test.cols(),
            });
        }
        Ok(())
    }

    /// Full joint posterior (mean and covariance) at `test`.
    pub fn posterior_predict(&self, test: &Matrix<T>) -> Result<GpPrediction<T>> {
        self.check_test_inputs(test)?;
        let m = test.rows();
        let mut cov = self.kernel.gram(test);
        let mut mean = vec![self.mean_const; m];
        if let Some(f) = &self.factor {
            let cross = self.kernel.cross(test, &self.dataset.inputs)?;
            // Rows of V = L⁻¹ K(X, X*)ᵀ, one per test point.
            let mut v = Vec::with_capacity(m);
            for (i, mu) in mean.iter_mut().enumerate() {
                let row = cross.row(i);
                *mu = *mu + dot(row, &self.alpha);
                let mut w = row.to_vec();
                f.solve_lower_in_place(&mut w);
                v.push(w);
            }
            for i in 0..m {
                for j in 0..=i {
                    let c = cov.get(i, j) - dot(&v[i], &v[j]);
                    cov.set(i, j, c);
                    cov.set(j, i, c);
                }
            }
        }
        let std = (0..m).map(|i| cov.get(i, i).max(T::zero()).sqrt()).collect();
        Ok(GpPrediction { mean, cov, std })
    }

    /// Posterior mean and variance at each test point, skipping the
    /// off-diagonal covariance.
    pub fn predict_marginal(&self, test: &Matrix<T>) -> Result<(Vec<T>, Vec<T>)> {
        self.check_test_inputs(test)?;
        let m = test.rows();
        let mut mean = Vec::with_capacity(m);
        let mut var = Vec::with_capacity(m);
        let n = self.dataset.len();
        let mut w = vec![T::zero(); n];
        for i in 0..m {
            let x = test.row(i);
            let prior = self.kernel.eval_unchecked(x, x);
            match &self.factor {
                Some(f) => {
                    for (j, wj) in w.iter_mut().enumerate() {
                        *wj = self.kernel.eval_unchecked(x, self.dataset.inputs.row(j));
                    }
                    mean.push(self.mean_const + dot(&w, &self.alpha));
                    f.solve_lower_in_place(&mut w);
                    var.push(prior - dot(&w, &w));
                }
                None => {
                    mean.push(self.mean_const);
                    var.push(prior);
                }
            }
        }
        Ok((mean, var))
    }

    /// Posterior mean only; `O(n)` per test point.
    pub fn predict_mean(&self, test: &Matrix<T>) -> Result<Vec<T>> {
        self.check_test_inputs(test)?;
        Ok((0..test.rows())
            .map(|i| {
                let x = test.row(i);
                let k: T = (0..self.dataset.len())
                    .map(|j| self.kernel.eval_unchecked(x, self.dataset.inputs.row(j)) * self.alpha[j])
                    .sum();
                self.mean_const + k
            })
            .collect())
    }

    /// Gaussian evidence `log p(y | X)` of the training labels.
    pub fn log_marginal_likelihood(&self) -> Result<T> {
        let f = self
            .factor
            .as_ref()
            .ok_or(Error::InsufficientData("log marginal likelihood needs at least one point"))?;
        let n = T::from_usize(self.dataset.len()).expect("usize fits scalar");
        let r = self.centered_labels();
        let half = T::lit(0.5);
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        Ok(-half * dot(&r, &self.alpha) - half * f.log_det() - half * n * two_pi.ln())
    }
}
