use nalgebra::{DMatrix, DVector};

use super::{center_columns, fix_sign, sym_eigen_desc, DrError, EIGEN_TOL};
use crate::session::LabelClass;

pub(super) fn check_classes(labels: Option<&[LabelClass]>, n: usize) -> Result<(), DrError> {
    let labels = labels.ok_or(DrError::InsufficientClasses)?;
    if labels.len() != n {
        return Err(DrError::InsufficientClasses);
    }
    let count = |c| labels.iter().filter(|&&l| l == c).count();
    if count(LabelClass::Genuine) < 2 || count(LabelClass::Spambot) < 2 {
        return Err(DrError::InsufficientClasses);
    }
    Ok(())
}

/// Two-class Fisher discriminant. Axis 1 projects the centred data on the
/// discriminant direction `(S_w + eps I)^-1 (mu_spambot - mu_genuine)`;
/// axis 2 is the top principal component of what remains after removing
/// that direction. Unlabeled rows are projected but do not shape the fit.
pub(super) fn fisher(x: &DMatrix<f64>, labels: &[LabelClass]) -> Vec<[f64; 2]> {
    let (n, d) = x.shape();
    let class_mean = |c: LabelClass| {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let mut mu = DVector::zeros(d);
        for &i in &rows {
            mu += x.row(i).transpose();
        }
        (mu / rows.len() as f64, rows)
    };
    let (mu_g, rows_g) = class_mean(LabelClass::Genuine);
    let (mu_s, rows_s) = class_mean(LabelClass::Spambot);

    let mut sw = DMatrix::zeros(d, d);
    for (mu, rows) in [(&mu_g, &rows_g), (&mu_s, &rows_s)] {
        for &i in rows {
            let dv = x.row(i).transpose() - mu;
            sw += &dv * dv.transpose();
        }
    }
    let ridge = 1e-6 * (sw.trace() / d as f64) + 1e-12;
    for i in 0..d {
        sw[(i, i)] += ridge;
    }
    let diff = &mu_s - &mu_g;
    let w = match sw.clone().cholesky() {
        Some(ch) => ch.solve(&diff),
        None => sw.lu().solve(&diff).unwrap_or_else(|| diff.clone()),
    };

    let xc = center_columns(x);
    let mut out = vec![[0.0; 2]; n];
    let norm = w.norm();
    let residual = if norm > 0.0 && norm.is_finite() {
        let mut w: Vec<f64> = (w / norm).iter().copied().collect();
        fix_sign(&mut w);
        let w = DVector::from_vec(w);
        let proj = &xc * &w;
        for i in 0..n {
            out[i][0] = proj[i];
        }
        &xc - &proj * w.transpose()
    } else {
        xc
    };

    let pairs = sym_eigen_desc(residual.transpose() * &residual);
    if let Some((lambda, mut u)) = pairs.into_iter().next() {
        if lambda > EIGEN_TOL * lambda.abs().max(1.0) {
            fix_sign(&mut u);
            let proj = &residual * DVector::from_vec(u);
            for i in 0..n {
                out[i][1] = proj[i];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::dimred::{reduce, DrSpec};
    use crate::features::FeatureMatrix;
    use crate::session::LabelClass::*;

    #[test]
    fn separates_two_columns() {
        let m = FeatureMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![4.0, 0.0], vec![4.0, 1.0]]).unwrap();
        let labels = [Genuine, Genuine, Spambot, Spambot];
        let e = reduce(&m, &DrSpec::LdaSupervised, Some(&labels)).unwrap();
        let a: Vec<f64> = e.coords.iter().map(|c| c[0]).collect();
        assert!((a[0] - a[1]).abs() < 1e-9 && (a[2] - a[3]).abs() < 1e-9);
        assert!((a[2] - a[0] - 4.0).abs() < 1e-6, "{a:?}");
        // Residual axis is the y direction.
        assert!((e.coords[1][1] - e.coords[0][1]).abs() > 0.99);
    }

    #[test]
    fn needs_two_members_per_class() {
        let m = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        for labels in [[Genuine, Genuine, Spambot, Unlabeled], [Genuine, Genuine, Genuine, Genuine]] {
            assert!(reduce(&m, &DrSpec::LdaSupervised, Some(&labels)).is_err());
        }
    }
}
