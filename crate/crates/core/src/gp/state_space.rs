//! Exact `O(n)` log marginal likelihood for one-dimensional Matérn-5/2 GPs.
//!
//! A Matérn-5/2 process on the line is the first coordinate of a linear
//! SDE with a three-dimensional state, so the evidence of sorted scalar
//! inputs follows from a Kalman filter. The transition over a gap `Δ` is
//! `exp(FΔ)`; `F` has the single eigenvalue `-λ` (`λ = √5/ℓ`), hence
//! `F + λI` is nilpotent and the exponential is a finite sum.

type M3 = [[f64; 3]; 3];

fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

fn mat_mul_bt(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[j][0] + a[i][1] * b[j][1] + a[i][2] * b[j][2];
        }
    }
    c
}

/// Stationary state covariance.
fn stationary(signal_var: f64, lambda: f64) -> M3 {
    let k2 = signal_var * lambda * lambda / 3.0;
    let k4 = signal_var * lambda.powi(4);
    [[signal_var, 0.0, -k2], [0.0, k2, 0.0], [-k2, 0.0, k4]]
}

/// `exp(F·dt)`.
fn transition(lambda: f64, dt: f64) -> M3 {
    let l = lambda;
    // N = F + λI
    let n: M3 = [[l, 1.0, 0.0], [0.0, l, 1.0], [-l * l * l, -3.0 * l * l, -2.0 * l]];
    let n2 = mat_mul(&n, &n);
    let e = (-l * dt).exp();
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            a[i][j] = e * (id + n[i][j] * dt + 0.5 * n2[i][j] * dt * dt);
        }
    }
    a
}

/// Evidence of `labels` at scalar `inputs` under a Matérn-5/2 prior with
/// constant mean plus independent per-point noise `noise[i]`.
///
/// Inputs need not be sorted. Returns `None` if an innovation variance is
/// not positive.
pub(crate) fn matern52_lml(
    inputs: &[f64],
    labels: &[f64],
    noise: impl Fn(usize) -> f64,
    mean: f64,
    signal_var: f64,
    lengthscale: f64,
) -> Option<f64> {
    let n = inputs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| inputs[a].total_cmp(&inputs[b]));
    let lambda = 5f64.sqrt() / lengthscale;
    let pinf = stationary(signal_var, lambda);
    let mut m = [0.0f64; 3];
    let mut p = pinf;
    let mut lml = 0.0;
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let mut prev: Option<f64> = None;
    for &k in &order {
        let x = inputs[k];
        if let Some(xp) = prev {
            let dt = x - xp;
            if dt > 0.0 {
                let a = transition(lambda, dt);
                m = [
                    a[0][0] * m[0] + a[0][1] * m[1] + a[0][2] * m[2],
                    a[1][0] * m[0] + a[1][1] * m[1] + a[1][2] * m[2],
                    a[2][0] * m[0] + a[2][1] * m[1] + a[2][2] * m[2],
                ];
                // P ← A (P − P∞) Aᵀ + P∞
                let mut d = p;
                for i in 0..3 {
                    for j in 0..3 {
                        d[i][j] -= pinf[i][j];
                    }
                }
                let ad = mat_mul(&a, &d);
                let adat = mat_mul_bt(&ad, &a);
                for i in 0..3 {
                    for j in 0..3 {
                        p[i][j] = adat[i][j] + pinf[i][j];
                    }
                }
            }
        }
        prev = Some(x);
        let s = p[0][0] + noise(k);
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        let v = labels[k] - mean - m[0];
        lml -= 0.5 * (ln_2pi + s.ln() + v * v / s);
        let g = [p[0][0] / s, p[1][0] / s, p[2][0] / s];
        for i in 0..3 {
            m[i] += g[i] * v;
        }
        let col = [p[0][0], p[1][0], p[2][0]];
        for i in 0..3 {
            for j in 0..3 {
                p[i][j] -= g[i] * col[j];
            }
        }
        for i in 0..3 {
            for j in 0..i {
                let avg = 0.5 * (p[i][j] + p[j][i]);
                p[i][j] = avg;
                p[j][i] = avg;
            }
        }
    }
    Some(lml)
}
