//! Type-II maximum likelihood over kernel scale hyperparameters.
//!
//! The search works in natural-log space on a box: a coarse grid is
//! evaluated first, the best grid cells seed bounded Nelder–Mead ascents,
//! and the overall best point wins. An optional third coordinate learns a
//! homoscedastic noise variance added on top of the dataset's own noise.
//!
//! A plain Matérn-5/2 kernel on scalar inputs is scored with the exact
//! linear-time recursion in [`super::state_space`]; everything else goes
//! through a dense Cholesky factorization.

use super::kernel::KernelSpec;
use super::model::{GpDataset, GpModel, NOISE_FLOOR};
use super::state_space;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    /// Bounds on `ln(signal_var)`.
    pub log_signal_var: (f64, f64),
    /// Bounds on `ln(lengthscale)`.
    pub log_lengthscale: (f64, f64),
    /// Bounds on `ln(extra noise variance)`; `None` keeps the dataset noise as is.
    pub log_extra_noise: Option<(f64, f64)>,
    /// Grid points per coordinate.
    pub grid: usize,
    /// Number of local ascents, started from the best grid cells.
    pub starts: usize,
    /// Objective evaluations allowed per local ascent.
    pub max_evals_per_start: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            log_signal_var: (-6.0, 4.0),
            log_lengthscale: (-4.0, 4.0),
            log_extra_noise: None,
            grid: 8,
            starts: 8,
            max_evals_per_start: 60,
        }
    }
}

impl FitOptions {
    pub fn with_extra_noise(mut self, lo: f64, hi: f64) -> Self {
        self.log_extra_noise = Some((lo, hi));
        self
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![self.log_signal_var, self.log_lengthscale];
        b.extend(self.log_extra_noise);
        b
    }
}

/// Best hyperparameters found by [`fit_hyperparams_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitSummary {
    pub signal_var: f64,
    pub lengthscale: f64,
    /// Learned homoscedastic noise added to the dataset noise (0 if not learned).
    pub extra_noise: f64,
    pub log_marginal_likelihood: f64,
    pub evaluations: usize,
}

/// Fit with [`FitOptions::default`].
pub fn fit_hyperparams<T: Scalar>(
    dataset: GpDataset<T>,
    spec: &KernelSpec<T>,
    mean_const: T,
) -> Result<GpModel<T>> {
    fit_hyperparams_with(dataset, spec, mean_const, &FitOptions::default()).map(|(m, _)| m)
}

pub fn fit_hyperparams_with<T: Scalar>(
    dataset: GpDataset<T>,
    spec: &KernelSpec<T>,
    mean_const: T,
    opts: &FitOptions,
) -> Result<(GpModel<T>, FitSummary)> {
    if dataset.len() < 2 {
        return Err(Error::InsufficientData("hyperparameter fitting needs at least two points"));
    }
    if spec.scale().is_none() {
        return Err(Error::Degenerate("kernel has no tunable signal variance / lengthscale"));
    }
    dataset.validate()?;
    let bounds = opts.bounds();
    let mut evaluations = 0usize;
    let scalar_matern = dataset.dim() == 1 && matches!(spec, KernelSpec::Matern52 { .. });
    let xs: Vec<f64> = dataset.inputs.as_slice().iter().map(|v| v.to_f64_lossy()).collect();
    let ys: Vec<f64> = dataset.labels.iter().map(|v| v.to_f64_lossy()).collect();
    let base_noise: Vec<f64> = (0..dataset.len()).map(|i| dataset.noise.at(i).to_f64_lossy()).collect();
    let mean_f = mean_const.to_f64_lossy();
    let mut objective = |theta: &[f64]| -> f64 {
        evaluations += 1;
        let value = if scalar_matern {
            let extra = theta.get(2).map_or(0.0, |v| v.exp()) + NOISE_FLOOR;
            state_space::matern52_lml(&xs, &ys, |i| base_noise[i] + extra, mean_f, theta[0].exp(), theta[1].exp())
        } else {
            build(&dataset, spec, mean_const, theta)
                .and_then(|m| m.log_marginal_likelihood())
                .ok()
                .map(|v| v.to_f64_lossy())
        };
        match value {
            Some(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };

    let mut candidates: Vec<(f64, Vec<f64>)> = grid_points(&bounds, opts.grid.max(1))
        .into_iter()
        .map(|p| (objective(&p), p))
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = candidates
        .first()
        .cloned()
        .ok_or(Error::Degenerate("empty hyperparameter grid"))?;
    let step: Vec<f64> = bounds
        .iter()
        .map(|(lo, hi)| (hi - lo) / (2.0 * opts.grid.max(2) as f64))
        .collect();
    for (start_val, start) in candidates.iter().take(opts.starts).cloned().collect::<Vec<_>>() {
        if !start_val.is_finite() {
            continue;
        }
        let (v, p) = nelder_mead_max(&mut objective, start, start_val, &step, &bounds, opts.max_evals_per_start);
        if v > best.0 {
            best = (v, p);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NotPositiveDefinite {
            jitter: super::model::MAX_JITTER,
        });
    }
    let model = build(&dataset, spec, mean_const, &best.1)?;
    let summary = FitSummary {
        signal_var: best.1[0].exp(),
        lengthscale: best.1[1].exp(),
        extra_noise: best.1.get(2).map_or(0.0, |v| v.exp()),
        log_marginal_likelihood: model.log_marginal_likelihood()?.to_f64_lossy(),
        evaluations,
    };
    Ok((model, summary))
}

fn build<T: Scalar>(
    dataset: &GpDataset<T>,
    spec: &KernelSpec<T>,
    mean_const: T,
    theta: &[f64],
) -> Result<GpModel<T>> {
    let kernel = spec
        .with_scale(T::lit(theta[0].exp()), T::lit(theta[1].exp()))
        .ok_or(Error::Degenerate("kernel has no tunable scale"))?;
    let mut ds = dataset.clone();
    if let Some(&ln) = theta.get(2) {
        ds.noise = ds.noise.offset(T::lit(ln.exp()));
    }
    GpModel::new(kernel, mean_const, ds)
}

/// Cell-centred grid over a box, row-major in the coordinates.
fn grid_points(bounds: &[(f64, f64)], per_dim: usize) -> Vec<Vec<f64>> {
    let axis = |&(lo, hi): &(f64, f64)| -> Vec<f64> {
        (0..per_dim)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / per_dim as f64)
            .collect::<Vec<_>>()
    };
    bounds.iter().fold(vec![Vec::new()], |acc, b| {
        let ax = axis(b);
        acc.into_iter()
            .flat_map(|p| {
                ax.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

fn clamp_to(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, (lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Nelder–Mead maximization with every vertex projected onto the box.
pub(crate) fn nelder_mead_max(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: Vec<f64>,
    start_val: f64,
    step: &[f64],
    bounds: &[(f64, f64)],
    max_evals: usize,
) -> (f64, Vec<f64>) {
    let dim = start.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = vec![(start_val, start.clone())];
    let mut evals = 0;
    for d in 0..dim {
        let mut p = start.clone();
        p[d] += step[d];
        if p[d] > bounds[d].1 {
            p[d] = start[d] - step[d];
        }
        clamp_to(&mut p, bounds);
        simplex.push((f(&p), p));
        evals += 1;
    }
    let eval = |p: &mut Vec<f64>, f: &mut dyn FnMut(&[f64]) -> f64, evals: &mut usize| -> f64 {
        clamp_to(p, bounds);
        *evals += 1;
        f(p)
    };
    while evals < max_evals {
        simplex.sort_by(|a, b| b.0.total_cmp(&a.0));
        let spread = simplex[0].0 - simplex[dim].0;
        let size = simplex[1..]
            .iter()
            .flat_map(|(_, p)| p.iter().zip(&simplex[0].1).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread.abs() < 1e-9) || size < 1e-4 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..dim].iter().map(|(_, p)| p[d]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.1)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let mut reflected = along(1.0);
        let fr = eval(&mut reflected, f, &mut evals);
        if fr > simplex[0].0 {
            let mut expanded = along(2.0);
            let fe = eval(&mut expanded, f, &mut evals);
            simplex[dim] = if fe > fr { (fe, expanded) } else { (fr, reflected) };
        } else if fr > simplex[dim - 1].0 {
            simplex[dim] = (fr, reflected);
        } else {
            let t = if fr > worst.0 { 0.5 } else { -0.5 };
            let mut contracted = along(t);
            let fc = eval(&mut contracted, f, &mut evals);
            if fc > worst.0.max(fr) {
                simplex[dim] = (fc, contracted);
            } else {
                let best = simplex[0].1.clone();
                for v in simplex.iter_mut().skip(1) {
                    let mut p: Vec<f64> = best.iter().zip(&v.1).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let fp = eval(&mut p, f, &mut evals);
                    *v = (fp, p);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.0.total_cmp(&a.0));
    simplex.swap_remove(0)
}
