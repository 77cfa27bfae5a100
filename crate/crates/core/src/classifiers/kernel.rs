use ndarray::{ArrayView1, ArrayView2, Axis};

use crate::distance::{inverse_scales, scaled_distance, DistanceConfig, RangeVector};

/// `sum_{i : y_i = c} (1 + d_i)^-kappa` for every class `c`.
///
/// Each term lies in (0, 1], so the sums are bounded by the class counts and can be
/// accumulated in linear space. With `kappa = 0` every term is exactly 1.
pub(super) fn class_sums(
    train: ArrayView2<'_, f64>,
    labels: &[usize],
    query: ArrayView1<'_, f64>,
    ranges: &RangeVector,
    cfg: DistanceConfig,
    kappa: f64,
    n_classes: usize,
) -> Vec<f64> {
    let inv = inverse_scales(ranges, cfg);
    let mut sums = vec![0.0; n_classes];
    for (row, &c) in train.axis_iter(Axis(0)).zip(labels) {
        let d = scaled_distance(row, query, &inv);
        sums[c] += (1.0 + d).powf(-kappa);
    }
    sums
}
