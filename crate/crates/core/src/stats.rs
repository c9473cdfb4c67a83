//! Order statistics and Gaussian kernel density estimates behind the
//! timeline box plots and the feature-explorer violin curves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::features::FeatureMatrix;
use crate::session::LabelClass;

/// Number of grid points of every density curve.
pub const GRID_POINTS: usize = 128;
/// Grid padding beyond the data range, in bandwidths.
pub const GRID_PAD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("bandwidth must be finite and positive, got {0}")]
    NonFiniteBandwidth(f64),
    #[error("length mismatch: {0} values, {1} labels")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub bandwidth: f64,
    pub n: usize,
}

fn check(values: &[f64]) -> Result<(), StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    Ok(())
}

/// Quantile of sorted data by linear interpolation at position `p * (n - 1)`
/// (Hyndman-Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats, StatsError> {
    check(values)?;
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(BoxStats {
        n: v.len(),
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q3: quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
    })
}

/// `0.9 * min(sigma, IQR / 1.34) * n^(-1/5)` with population sigma; 1 when
/// that is zero.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64, StatsError> {
    check(values)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sigma = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let b = box_stats(values)?;
    let iqr = b.q3 - b.q1;
    let spread = if iqr > 0.0 { sigma.min(iqr / 1.34) } else { sigma };
    let h = 0.9 * spread * n.powf(-0.2);
    Ok(if h > 0.0 && h.is_finite() { h } else { 1.0 })
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel density estimate with bandwidth `h`, evaluated at `x`.
pub fn density_at(values: &[f64], h: f64, x: f64) -> f64 {
    let s: f64 = values
        .iter()
        .map(|&v| {
            let u = (x - v) / h;
            (-0.5 * u * u).exp()
        })
        .sum();
    s * INV_SQRT_2PI / (values.len() as f64 * h)
}

pub fn kde(values: &[f64], bandwidth: Option<f64>) -> Result<DensityCurve, StatsError> {
    check(values)?;
    let h = match bandwidth {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => return Err(StatsError::NonFiniteBandwidth(h)),
        None => silverman_bandwidth(values)?,
    };
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (start, end) = (lo - GRID_PAD * h, hi + GRID_PAD * h);
    let step = (end - start) / (GRID_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..GRID_POINTS).map(|i| start + step * i as f64).collect();
    let ys = xs.iter().map(|&x| density_at(values, h, x)).collect();
    Ok(DensityCurve { xs, ys, bandwidth: h, n: values.len() })
}

/// Groups shown in the feature explorer. An account may be in its label
/// group and in `Selected` at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Spambot,
    Genuine,
    Unlabeled,
    Selected,
}

impl From<LabelClass> for Group {
    fn from(c: LabelClass) -> Self {
        match c {
            LabelClass::Spambot => Group::Spambot,
            LabelClass::Genuine => Group::Genuine,
            LabelClass::Unlabeled => Group::Unlabeled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistribution {
    pub box_stats: BoxStats,
    pub density: DensityCurve,
}

/// Distribution of `column` within each nonempty group. `labels` is
/// aligned with `column`; `selection` holds row indices.
pub fn class_distributions(
    column: &[f64],
    labels: &[LabelClass],
    selection: &BTreeSet<usize>,
) -> Result<BTreeMap<Group, GroupDistribution>, StatsError> {
    if column.len() != labels.len() {
        return Err(StatsError::LengthMismatch(column.len(), labels.len()));
    }
    let mut groups: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
    for (i, (&v, &c)) in column.iter().zip(labels).enumerate() {
        groups.entry(c.into()).or_default().push(v);
        if selection.contains(&i) {
            groups.entry(Group::Selected).or_default().push(v);
        }
    }
    groups.into_iter().map(|(g, vals)| Ok((g, GroupDistribution { box_stats: box_stats(&vals)?, density: kde(&vals, None)? }))).collect()
}

/// [`class_distributions`] for several columns of a matrix.
pub fn feature_distributions(
    matrix: &FeatureMatrix,
    columns: &[usize],
    labels: &[LabelClass],
    selection: &BTreeSet<usize>,
    exec: Execution,
) -> Result<Vec<BTreeMap<Group, GroupDistribution>>, StatsError> {
    exec.map_indexed(columns.len(), |i| class_distributions(&matrix.column(columns[i]), labels, selection)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quartiles_of_small_samples() {
        let b = box_stats(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((b.min, b.q1, b.median, b.q3, b.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        let b = box_stats(&[7.0]).unwrap();
        assert_eq!((b.min, b.q1, b.median, b.q3, b.max, b.n), (7.0, 7.0, 7.0, 7.0, 7.0, 1));
        assert_eq!(box_stats(&[]), Err(StatsError::EmptyInput));
        assert_eq!(box_stats(&[1.0, f64::NAN]), Err(StatsError::NonFiniteInput));
    }

    #[test]
    fn single_point_peak() {
        let c = kde(&[2.5], Some(1.0)).unwrap();
        let peak = c.ys.iter().cloned().fold(0.0, f64::max);
        assert!(peak < INV_SQRT_2PI);
        assert!((density_at(&[2.5], 1.0, 2.5) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
        assert_eq!(c.ys[0], density_at(&[2.5], 1.0, c.xs[0]));
    }

    #[test]
    fn constant_data_fallback_is_symmetric() {
        let c = kde(&[5.0; 4], None).unwrap();
        assert_eq!(c.bandwidth, 1.0);
        for i in 0..GRID_POINTS {
            let j = GRID_POINTS - 1 - i;
            assert!((c.ys[i] - c.ys[j]).abs() < 1e-12);
            assert!(((c.xs[i] - 5.0) + (c.xs[j] - 5.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_bandwidth() {
        assert_eq!(kde(&[1.0], Some(0.0)), Err(StatsError::NonFiniteBandwidth(0.0)));
        assert!(matches!(kde(&[1.0], Some(f64::NAN)), Err(StatsError::NonFiniteBandwidth(_))));
    }

    #[test]
    fn group_presence() {
        let col = [1.0, 2.0, 3.0];
        let labels = [LabelClass::Unlabeled; 3];
        let d = class_distributions(&col, &labels, &BTreeSet::new()).unwrap();
        assert_eq!(d.keys().copied().collect::<Vec<_>>(), [Group::Unlabeled]);
        let d = class_distributions(&col, &labels, &BTreeSet::from([1])).unwrap();
        let s = d[&Group::Selected].box_stats;
        assert_eq!((s.min, s.max), (2.0, 2.0));
        assert_eq!(class_distributions(&col, &labels[..2], &BTreeSet::new()), Err(StatsError::LengthMismatch(3, 2)));
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut v in proptest::collection::vec(-1e3f64..1e3, 1..60), seed in any::<u64>()) {
            let a = box_stats(&v).unwrap();
            let n = v.len();
            v.rotate_left((seed as usize) % n);
            v.reverse();
            prop_assert_eq!(a, box_stats(&v).unwrap());
            prop_assert!(a.min <= a.q1 && a.q1 <= a.median && a.median <= a.q3 && a.q3 <= a.max);
        }

        #[test]
        fn kde_shift(v in proptest::collection::vec(-50f64..50.0, 1..40), c in -100f64..100.0) {
            let a = kde(&v, None).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let b = kde(&shifted, None).unwrap();
            for i in 0..GRID_POINTS {
                prop_assert!((b.xs[i] - a.xs[i] - c).abs() < 1e-9);
                prop_assert!((b.ys[i] - a.ys[i]).abs() < 1e-12);
            }
            prop_assert!(a.xs.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(a.ys.iter().all(|&y| y >= 0.0));
        }
    }
}
