use nalgebra::{DMatrix, DVector};

use super::{fix_sign, sym_eigen_desc};
use crate::exec::Execution;
use crate::features::FeatureMatrix;

/// Tikhonov regularisation of each local Gram matrix, relative to its trace.
const REG: f64 = 1e-3;

/// Reconstruction of one point from its neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborWeights {
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
}

fn nearest(x: &DMatrix<f64>, i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..x.nrows()).filter(|&j| j != i).map(|j| ((x.row(i) - x.row(j)).norm_squared(), j)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

fn local_weights(x: &DMatrix<f64>, i: usize, k: usize) -> NeighborWeights {
    let neighbors = nearest(x, i, k);
    let z = DMatrix::from_fn(k, x.ncols(), |a, c| x[(neighbors[a], c)] - x[(i, c)]);
    let mut gram = &z * z.transpose();
    let trace = gram.trace();
    let reg = if trace > 0.0 { REG * trace } else { REG };
    for a in 0..k {
        gram[(a, a)] += reg;
    }
    let ones = DVector::from_element(k, 1.0);
    let w = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&ones),
        None => gram.lu().solve(&ones).unwrap_or(ones),
    };
    let sum = w.sum();
    NeighborWeights { neighbors, weights: w.iter().map(|v| v / sum).collect() }
}

/// Barycentric reconstruction weights of every row from its `k` nearest
/// neighbours (Euclidean, ties broken by row index). Each weight vector
/// sums to 1.
pub fn lle_weights(matrix: &FeatureMatrix, k: usize, exec: Execution) -> Vec<NeighborWeights> {
    let x = DMatrix::from_row_slice(matrix.n_rows(), matrix.n_cols(), matrix.values());
    exec.map_indexed(x.nrows(), |i| local_weights(&x, i, k))
}

/// Bottom non-constant eigenvectors of `(I - W)^T (I - W)`.
pub(super) fn lle(x: &DMatrix<f64>, k: usize, exec: Execution) -> Vec<[f64; 2]> {
    let n = x.nrows();
    let weights = exec.map_indexed(n, |i| local_weights(x, i, k));
    let mut iw = DMatrix::<f64>::identity(n, n);
    for (i, nw) in weights.iter().enumerate() {
        for (&j, &w) in nw.neighbors.iter().zip(&nw.weights) {
            iw[(i, j)] -= w;
        }
    }
    let m = iw.transpose() * &iw;
    let mut pairs = sym_eigen_desc(m);
    pairs.reverse();
    let mut out = vec![[0.0; 2]; n];
    for (axis, (_, mut v)) in pairs.into_iter().skip(1).take(2).enumerate() {
        fix_sign(&mut v);
        for i in 0..n {
            out[i][axis] = v[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimred::{reduce, DrSpec};

    #[test]
    fn weights_sum_to_one() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos(), i as f64 * 0.1]).collect();
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        for nw in lle_weights(&m, 5, Execution::Sequential) {
            assert!((nw.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(nw.neighbors.len(), 5);
        }
    }

    #[test]
    fn line_is_unrolled_monotonically() {
        let rows: Vec<Vec<f64>> = (0..6).map(|t| vec![t as f64, 2.0 * t as f64 + 1.0, -(t as f64)]).collect();
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        let e = reduce(&m, &DrSpec::Lle { k_neighbors: 2 }, None).unwrap();
        let a: Vec<f64> = e.coords.iter().map(|c| c[0]).collect();
        let inc = a.windows(2).all(|w| w[0] < w[1]);
        let dec = a.windows(2).all(|w| w[0] > w[1]);
        assert!(inc || dec, "{a:?}");
    }
}
