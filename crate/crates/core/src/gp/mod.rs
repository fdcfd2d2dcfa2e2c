//! Gaussian-process regression: kernels, exact conditioning, evidence
//! maximization and goodness-of-fit.

mod fit;
mod kernel;
mod metrics;
mod model;
mod state_space;

pub use fit::{fit_hyperparams, fit_hyperparams_with, FitOptions, FitSummary};
pub use kernel::KernelSpec;
pub use metrics::r2_score;
pub use model::{GpDataset, GpModel, GpPrediction, Noise, MAX_JITTER, NOISE_FLOOR};
