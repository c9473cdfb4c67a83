use serde::{Deserialize, Serialize};

use super::DrError;
use crate::features::FeatureMatrix;

/// Per-column rescaling applied before a reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Transform {
    #[default]
    None,
    /// `(x - min) / (max - min)`
    Minmax,
    /// `(x - mean) / population std`
    Zscore,
}

/// Constant columns map to all zeros under both rescalings.
pub fn transform(matrix: &FeatureMatrix, spec: Transform) -> Result<FeatureMatrix, DrError> {
    if matrix.values().iter().any(|v| !v.is_finite()) {
        return Err(DrError::NonFiniteInput);
    }
    let (n, m) = (matrix.n_rows(), matrix.n_cols());
    let mut out = matrix.values().to_vec();
    if spec == Transform::None || n == 0 {
        return matrix.with_values(out).map_err(|_| DrError::NonFiniteInput);
    }
    for c in 0..m {
        let col = matrix.column(c);
        let (shift, scale) = match spec {
            Transform::Minmax => {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi - lo)
            }
            Transform::Zscore => {
                let mean = col.iter().sum::<f64>() / n as f64;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                (mean, var.sqrt())
            }
            Transform::None => unreachable!(),
        };
        let constant = col.iter().all(|&v| v == col[0]);
        for r in 0..n {
            out[r * m + c] = if constant || scale == 0.0 { 0.0 } else { (col[r] - shift) / scale };
        }
    }
    matrix.with_values(out).map_err(|_| DrError::NonFiniteInput)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&v.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(transform(&col(&[2.0, 4.0, 6.0]), Transform::Minmax).unwrap().column(0), [0.0, 0.5, 1.0]);
        let z = transform(&col(&[2.0, 4.0, 6.0]), Transform::Zscore).unwrap().column(0);
        let s = (8.0f64 / 3.0).sqrt();
        assert!((z[0] + 2.0 / s).abs() < 1e-12 && z[1] == 0.0 && (z[2] - 2.0 / s).abs() < 1e-12);
        assert!((z[2] - 1.224_744_871).abs() < 1e-9);
        for t in [Transform::Minmax, Transform::Zscore] {
            assert_eq!(transform(&col(&[5.0, 5.0, 5.0]), t).unwrap().column(0), [0.0; 3]);
        }
        assert_eq!(transform(&col(&[1.0, 9.0]), Transform::None).unwrap().column(0), [1.0, 9.0]);
    }

    proptest! {
        #[test]
        fn minmax_idempotent(v in proptest::collection::vec(-1e6f64..1e6, 2..30)) {
            let once = transform(&col(&v), Transform::Minmax).unwrap();
            let twice = transform(&once, Transform::Minmax).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
