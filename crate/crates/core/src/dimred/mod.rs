//! Column transforms and 2-D embeddings of the account feature matrix.
//!
//! Every method is deterministic for a given input and spec (t-SNE's seed
//! included). Eigenvector signs are fixed so that the component of largest
//! magnitude is positive; when several components tie for the largest
//! magnitude the last of them is made positive.

mod fisher;
mod kpca;
mod lle;
mod transform;
mod tsne;

pub use kpca::kernel_matrix;
pub use lle::{lle_weights, NeighborWeights};
pub use transform::{transform, Transform};
pub use tsne::{conditional_affinities, joint_affinities, pairwise_sq_distances, row_perplexity};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::control::JobControl;
use crate::exec::Execution;
use crate::features::FeatureMatrix;
use crate::session::LabelClass;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DrError {
    #[error("need at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },
    #[error("supervised reduction needs two labeled classes with at least two members each")]
    InsufficientClasses,
    #[error("invalid hyperparameter {0}")]
    InvalidHyperparameter(&'static str),
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("optimisation diverged (non-finite coordinates)")]
    DidNotConverge,
    #[error("cancelled")]
    Cancelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf {
        gamma: f64,
    },
    /// `(x.y / n_features + 1)^degree`
    Poly {
        degree: u32,
    },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Rbf { gamma: 1.0 / 50.0 }
    }
}

fn default_perplexity() -> f64 {
    30.0
}
fn default_iterations() -> usize {
    1000
}
fn default_learning_rate() -> f64 {
    200.0
}
fn default_k() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneParams {
    #[serde(default = "default_perplexity")]
    pub perplexity: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams { perplexity: default_perplexity(), iterations: default_iterations(), learning_rate: default_learning_rate(), seed: 0 }
    }
}

/// Reduction method and hyperparameters. The output is always 2-D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum DrSpec {
    Kpca {
        #[serde(default)]
        kernel: Kernel,
    },
    LdaSupervised,
    Lle {
        #[serde(default = "default_k")]
        k_neighbors: usize,
    },
    Tsne(TsneParams),
}

impl DrSpec {
    pub fn validate(&self) -> Result<(), DrError> {
        match *self {
            DrSpec::Kpca { kernel: Kernel::Rbf { gamma } } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(DrError::InvalidHyperparameter("gamma"))
            }
            DrSpec::Kpca { kernel: Kernel::Poly { degree } } if degree < 2 => Err(DrError::InvalidHyperparameter("degree")),
            DrSpec::Lle { k_neighbors } if k_neighbors < 2 => Err(DrError::InvalidHyperparameter("k_neighbors")),
            DrSpec::Tsne(p) => {
                if !(p.perplexity > 1.0 && p.perplexity.is_finite()) {
                    Err(DrError::InvalidHyperparameter("perplexity"))
                } else if p.iterations < 250 {
                    Err(DrError::InvalidHyperparameter("iterations"))
                } else if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
                    Err(DrError::InvalidHyperparameter("learning_rate"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Stable cache key.
    pub fn key(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub account_ids: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    pub spec: DrSpec,
}

pub fn reduce(matrix: &FeatureMatrix, spec: &DrSpec, labels: Option<&[LabelClass]>) -> Result<Embedding2D, DrError> {
    reduce_with(matrix, spec, labels, Execution::default(), &JobControl::new())
}

pub fn reduce_with(
    matrix: &FeatureMatrix,
    spec: &DrSpec,
    labels: Option<&[LabelClass]>,
    exec: Execution,
    control: &JobControl,
) -> Result<Embedding2D, DrError> {
    let n = matrix.n_rows();
    if matrix.values().iter().any(|v| !v.is_finite()) {
        return Err(DrError::NonFiniteInput);
    }
    if n < 3 {
        return Err(DrError::TooFewPoints { n, min: 3 });
    }
    spec.validate()?;
    match *spec {
        DrSpec::Lle { k_neighbors } if k_neighbors >= n => return Err(DrError::InvalidHyperparameter("k_neighbors")),
        DrSpec::Tsne(p) if 3.0 * p.perplexity >= n as f64 => return Err(DrError::InvalidHyperparameter("perplexity")),
        DrSpec::LdaSupervised => fisher::check_classes(labels, n)?,
        _ => {}
    }

    let x = to_dmatrix(matrix);
    let coords = if all_rows_equal(matrix) {
        vec![[0.0; 2]; n]
    } else {
        match *spec {
            DrSpec::Kpca { kernel } => kpca::kpca(&x, kernel, exec),
            DrSpec::LdaSupervised => fisher::fisher(&x, labels.expect("checked")),
            DrSpec::Lle { k_neighbors } => lle::lle(&x, k_neighbors, exec),
            DrSpec::Tsne(p) => tsne::tsne(&x, &p, exec, control)?,
        }
    };
    if coords.iter().flatten().any(|v| !v.is_finite()) {
        return Err(DrError::DidNotConverge);
    }
    Ok(Embedding2D { account_ids: matrix.account_ids().to_vec(), coords, spec: *spec })
}

fn to_dmatrix(m: &FeatureMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.n_rows(), m.n_cols(), m.values())
}

fn all_rows_equal(m: &FeatureMatrix) -> bool {
    let first = m.row(0);
    (1..m.n_rows()).all(|r| m.row(r) == first)
}

/// Flip `v` so its largest-magnitude component (the last one, on ties) is
/// positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().rposition(|x| x.abs() >= max * (1.0 - 1e-9)).expect("max exists");
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Symmetric eigendecomposition, eigenpairs sorted by descending value.
pub(crate) fn sym_eigen_desc(m: DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<f64>)> =
        eig.eigenvalues.iter().enumerate().map(|(i, &l)| (l, eig.eigenvectors.column(i).iter().copied().collect())).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Column-centred copy.
pub(crate) fn center_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for j in 0..x.ncols() {
        let mean = x.column(j).mean();
        c.column_mut(j).iter_mut().for_each(|v| *v -= mean);
    }
    c
}

/// Relative threshold below which an eigenvalue is treated as zero.
pub(crate) const EIGEN_TOL: f64 = 1e-10;
