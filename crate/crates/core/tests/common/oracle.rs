//! Dense GP conditioning written out directly: explicit inverse of the
//! joint training covariance, no Cholesky, no shared code with the crate.

use std::f64::consts::PI;

pub fn matern52(x: &[f64], y: &[f64], signal_var: f64, lengthscale: f64) -> f64 {
    let r = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let s = 5f64.sqrt() * r / lengthscale;
    signal_var * (1.0 + s + s * s / 3.0) * (-s).exp()
}

/// Gauss-Jordan inverse with partial pivoting, plus `ln |det|`.
pub fn invert(a: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut log_det = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        inv.swap(c, p);
        let piv = m[c][c];
        log_det += piv.abs().ln();
        for j in 0..n {
            m[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for j in 0..n {
                        m[r][j] -= f * m[c][j];
                        inv[r][j] -= f * inv[c][j];
                    }
                }
            }
        }
    }
    (inv, log_det)
}

pub struct DensePosterior {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub lml: f64,
}

/// Posterior of a constant-mean Matern-5/2 GP with diagonal noise `diag`
/// (already including any floor or jitter).
pub fn posterior(
    x: &[Vec<f64>],
    y: &[f64],
    diag: &[f64],
    mean: f64,
    signal_var: f64,
    lengthscale: f64,
    test: &[Vec<f64>],
) -> DensePosterior {
    let n = x.len();
    let k = |a: &[f64], b: &[f64]| matern52(a, b, signal_var, lengthscale);
    let kxx: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| k(&x[i], &x[j]) + if i == j { diag[i] } else { 0.0 }).collect())
        .collect();
    let (kinv, log_det) = invert(&kxx);
    let r: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let alpha: Vec<f64> = (0..n).map(|i| (0..n).map(|j| kinv[i][j] * r[j]).sum()).collect();
    let ks: Vec<Vec<f64>> = test.iter().map(|t| x.iter().map(|xi| k(t, xi)).collect()).collect();
    let m = test.len();
    let mu = (0..m).map(|a| mean + (0..n).map(|i| ks[a][i] * alpha[i]).sum::<f64>()).collect();
    let cov = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let mut q = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            q += ks[a][i] * kinv[i][j] * ks[b][j];
                        }
                    }
                    k(&test[a], &test[b]) - q
                })
                .collect()
        })
        .collect();
    let quad: f64 = r.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let lml = -0.5 * quad - 0.5 * log_det - 0.5 * n as f64 * (2.0 * PI).ln();
    DensePosterior { mean: mu, cov, lml }
}
