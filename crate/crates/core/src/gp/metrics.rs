use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2_score<T: Scalar>(truth: &[T], predictions: &[T]) -> Result<T> {
    if truth.len() != predictions.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predictions.len(),
        });
    }
    if truth.len() < 2 {
        return Err(Error::InsufficientData("R² needs at least two points"));
    }
    let n = T::from_usize(truth.len()).expect("usize fits scalar");
    let mean = truth.iter().copied().sum::<T>() / n;
    let ss_tot: T = truth.iter().map(|&t| (t - mean) * (t - mean)).sum();
    if ss_tot == T::zero() {
        return Err(Error::Degenerate("R² is undefined for constant truth"));
    }
    let ss_res: T = truth
        .iter()
        .zip(predictions)
        .map(|(&t, &p)| (t - p) * (t - p))
        .sum();
    Ok(T::one() - ss_res / ss_tot)
}
