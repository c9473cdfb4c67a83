use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{center_columns, fix_sign, sym_eigen_desc, DrError, TsneParams};
use crate::control::JobControl;
use crate::exec::Execution;
use crate::features::FeatureMatrix;

const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;
const MOMENTUM_SWITCH: usize = 250;
const MIN_GAIN: f64 = 0.01;
const P_FLOOR: f64 = 1e-12;
const ENTROPY_TOL: f64 = 1e-10;
const SEARCH_STEPS: usize = 200;

fn sq_dists(x: &DMatrix<f64>, exec: Execution) -> Vec<f64> {
    let n = x.nrows();
    let rows = exec.map_indexed(n, |i| (0..n).map(|j| if i == j { 0.0 } else { (x.row(i) - x.row(j)).norm_squared() }).collect::<Vec<_>>());
    rows.concat()
}

/// Row-major `n x n` squared Euclidean distances between matrix rows.
pub fn pairwise_sq_distances(matrix: &FeatureMatrix, exec: Execution) -> Vec<f64> {
    let x = DMatrix::from_row_slice(matrix.n_rows(), matrix.n_cols(), matrix.values());
    sq_dists(&x, exec)
}

/// Gaussian row `p_{j|i}` for precision `beta`, returning the row and its
/// entropy in nats.
fn gaussian_row(d: &[f64], i: usize, beta: f64, dmin: f64) -> (Vec<f64>, f64) {
    let mut p: Vec<f64> = d.iter().enumerate().map(|(j, &dj)| if j == i { 0.0 } else { (-beta * (dj - dmin)).exp() }).collect();
    let z: f64 = p.iter().sum();
    let weighted: f64 = p.iter().zip(d).enumerate().filter(|(j, _)| *j != i).map(|(_, (pj, dj))| pj * (dj - dmin)).sum();
    let h = z.ln() + beta * weighted / z;
    p.iter_mut().for_each(|v| *v /= z);
    (p, h)
}

fn search_row(d: &[f64], i: usize, perplexity: f64) -> (Vec<f64>, f64) {
    let target = perplexity.ln();
    let others = d.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &v)| v);
    let dmin = others.clone().fold(f64::INFINITY, f64::min);
    let mean = others.clone().map(|v| v - dmin).sum::<f64>() / (d.len() - 1) as f64;
    let mut beta = if mean > 0.0 { 1.0 / mean } else { 1.0 };
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut best = gaussian_row(d, i, beta, dmin);
    for _ in 0..SEARCH_STEPS {
        let diff = best.1 - target;
        if diff.abs() < ENTROPY_TOL {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
        best = gaussian_row(d, i, beta, dmin);
    }
    (best.0, beta)
}

/// Per-point conditional affinities `p_{j|i}` (row-major) with each row's
/// bandwidth found by binary search so that its perplexity matches the
/// target. Also returns the Gaussian precisions `1 / (2 sigma_i^2)`.
pub fn conditional_affinities(d2: &[f64], n: usize, perplexity: f64, exec: Execution) -> (Vec<f64>, Vec<f64>) {
    let rows = exec.map_indexed(n, |i| search_row(&d2[i * n..(i + 1) * n], i, perplexity));
    let mut p = Vec::with_capacity(n * n);
    let mut betas = Vec::with_capacity(n);
    for (row, beta) in rows {
        p.extend(row);
        betas.push(beta);
    }
    (p, betas)
}

/// `2^H(P_i)` with `H` in bits.
pub fn row_perplexity(row: &[f64]) -> f64 {
    let h: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    2f64.powf(h)
}

/// `p_ij = (p_{j|i} + p_{i|j}) / 2n`.
pub fn joint_affinities(p_cond: &[f64], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (p_cond[i * n + j] + p_cond[j * n + i]) / (2.0 * n as f64);
        }
    }
    p
}

fn pca_init(x: &DMatrix<f64>, seed: u64) -> Vec<[f64; 2]> {
    let n = x.nrows();
    let xc = center_columns(x);
    let cov = xc.transpose() * &xc;
    let mut y = vec![[0.0; 2]; n];
    for (axis, (_, mut v)) in sym_eigen_desc(cov).into_iter().take(2).enumerate() {
        fix_sign(&mut v);
        for i in 0..n {
            y[i][axis] = xc.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
        }
    }
    let mean0 = y.iter().map(|r| r[0]).sum::<f64>() / n as f64;
    let std0 = (y.iter().map(|r| (r[0] - mean0).powi(2)).sum::<f64>() / n as f64).sqrt();
    let scale = if std0 > 0.0 { 1e-4 / std0 } else { 1e-4 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in &mut y {
        for c in r.iter_mut() {
            *c = *c * scale + rng.gen_range(-1e-7..1e-7);
        }
    }
    y
}

pub(super) fn tsne(x: &DMatrix<f64>, params: &TsneParams, exec: Execution, control: &JobControl) -> Result<Vec<[f64; 2]>, DrError> {
    let n = x.nrows();
    let d2 = sq_dists(x, exec);
    let (p_cond, _) = conditional_affinities(&d2, n, params.perplexity, exec);
    let mut p = joint_affinities(&p_cond, n);
    p.iter_mut().enumerate().for_each(|(k, v)| {
        if k / n != k % n {
            *v = v.max(P_FLOOR);
        }
    });

    let mut y = pca_init(x, params.seed);
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let exaggeration_iters = EXAGGERATION_ITERS.min(params.iterations / 4);

    for it in 0..params.iterations {
        if control.is_cancelled() {
            return Err(DrError::Cancelled);
        }
        let exag = if it < exaggeration_iters { EXAGGERATION } else { 1.0 };
        let momentum = if it < MOMENTUM_SWITCH { 0.5 } else { 0.8 };

        let num_rows: Vec<(Vec<f64>, f64)> = exec.map_indexed(n, |i| {
            let row: Vec<f64> = (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let dx = y[i][0] - y[j][0];
                        let dy = y[i][1] - y[j][1];
                        1.0 / (1.0 + dx * dx + dy * dy)
                    }
                })
                .collect();
            let s = row.iter().sum();
            (row, s)
        });
        let z: f64 = num_rows.iter().map(|r| r.1).sum();
        let grads: Vec<[f64; 2]> = exec.map_indexed(n, |i| {
            let num = &num_rows[i].0;
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let m = (exag * p[i * n + j] - num[j] / z) * num[j];
                g[0] += m * (y[i][0] - y[j][0]);
                g[1] += m * (y[i][1] - y[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        });

        for i in 0..n {
            for c in 0..2 {
                let g = grads[i][c];
                gains[i][c] = if (g > 0.0) != (update[i][c] > 0.0) { gains[i][c] + 0.2 } else { gains[i][c] * 0.8 };
                gains[i][c] = gains[i][c].max(MIN_GAIN);
                update[i][c] = momentum * update[i][c] - params.learning_rate * gains[i][c] * g;
                y[i][c] += update[i][c];
            }
        }
        for c in 0..2 {
            let mean = y.iter().map(|r| r[c]).sum::<f64>() / n as f64;
            y.iter_mut().for_each(|r| r[c] -= mean);
        }
        if y.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DrError::DidNotConverge);
        }
        control.report((it + 1) as f64 / params.iterations as f64);
    }
    Ok(y)
}
