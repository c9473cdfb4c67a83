use nalgebra::DMatrix;

use super::{fix_sign, sym_eigen_desc, Kernel, EIGEN_TOL};
use crate::exec::Execution;

fn kernel_value(kernel: Kernel, a: &[f64], b: &[f64]) -> f64 {
    match kernel {
        Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Kernel::Rbf { gamma } => (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp(),
        Kernel::Poly { degree } => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            (dot / a.len().max(1) as f64 + 1.0).powi(degree as i32)
        }
    }
}

/// Uncentred `n x n` kernel matrix of the rows of `x`.
pub fn kernel_matrix(x: &DMatrix<f64>, kernel: Kernel, exec: Execution) -> DMatrix<f64> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();
    let flat = exec.map_indexed(n, |i| (0..n).map(|j| kernel_value(kernel, &rows[i], &rows[j])).collect::<Vec<_>>());
    DMatrix::from_row_slice(n, n, &flat.concat())
}

/// Project onto the top two kernel principal components: the centred
/// kernel matrix's eigenvectors scaled by the square roots of their
/// eigenvalues. Axes with a (numerically) zero eigenvalue are all zero.
pub(super) fn kpca(x: &DMatrix<f64>, kernel: Kernel, exec: Execution) -> Vec<[f64; 2]> {
    let n = x.nrows();
    let k = kernel_matrix(x, kernel, exec);
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).mean()).collect();
    let total = row_means.iter().sum::<f64>() / n as f64;
    let centred = DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - row_means[j] + total);
    let pairs = sym_eigen_desc(centred);
    let top = pairs.first().map_or(0.0, |p| p.0).max(0.0);
    let mut out = vec![[0.0; 2]; n];
    for (axis, (lambda, mut v)) in pairs.into_iter().take(2).enumerate() {
        if lambda <= EIGEN_TOL * top.max(1.0) {
            continue;
        }
        fix_sign(&mut v);
        let s = lambda.sqrt();
        for i in 0..n {
            out[i][axis] = s * v[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimred::{reduce, DrSpec};
    use crate::features::FeatureMatrix;

    #[test]
    fn collinear_points() {
        let m = FeatureMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let e = reduce(&m, &DrSpec::Kpca { kernel: Kernel::Linear }, None).unwrap();
        let r2 = 2f64.sqrt();
        for (c, want) in e.coords.iter().zip([-r2, 0.0, r2]) {
            assert!((c[0] - want).abs() < 1e-12, "{c:?}");
            assert_eq!(c[1], 0.0);
        }
    }

    #[test]
    fn kernels_are_symmetric() {
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 2.0, 0.5, -1.0, 3.0]);
        for kernel in [Kernel::Linear, Kernel::Rbf { gamma: 0.3 }, Kernel::Poly { degree: 3 }] {
            let k = kernel_matrix(&x, kernel, Execution::Sequential);
            assert_eq!(k, k.transpose());
        }
    }
}
