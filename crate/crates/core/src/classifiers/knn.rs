use ndarray::{ArrayView1, ArrayView2, Axis};

use crate::distance::{inverse_scales, scaled_distance, DistanceConfig, RangeVector};

/// Per-class vote counts among the `k` nearest training rows. Equal distances are
/// ordered by training-row index.
pub(super) fn vote(
    train: ArrayView2<'_, f64>,
    labels: &[usize],
    query: ArrayView1<'_, f64>,
    ranges: &RangeVector,
    cfg: DistanceConfig,
    k: usize,
    n_classes: usize,
) -> Vec<f64> {
    let inv = inverse_scales(ranges, cfg);
    let mut dists: Vec<(f64, usize)> = train
        .axis_iter(Axis(0))
        .enumerate()
        .map(|(i, row)| (scaled_distance(row, query, &inv), i))
        .collect();
    let k = k.min(dists.len());
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dists.len() {
        dists.select_nth_unstable_by(k - 1, by_distance);
    }
    let mut votes = vec![0.0; n_classes];
    for &(_, i) in &dists[..k] {
        votes[labels[i]] += 1.0;
    }
    votes
}
