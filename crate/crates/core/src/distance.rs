//! Range-normalised Euclidean distance.
//!
//! Each attribute difference is divided by that attribute's training range
//! `max - min`. Attributes with zero range are constant on the training set and
//! are skipped. With normalisation switched off every range is taken as 1.

use ndarray::{ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Per-attribute training range, `max - min`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeVector(Vec<f64>);

impl RangeVector {
    pub fn new(ranges: Vec<f64>) -> Result<Self> {
        if ranges.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::invalid("ranges must be finite and non-negative"));
        }
        Ok(RangeVector(ranges))
    }

    pub fn ones(n: usize) -> Self {
        RangeVector(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceConfig {
    pub normalize: bool,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig { normalize: true }
    }
}

pub fn compute_ranges(x_train: ArrayView2<'_, f64>) -> Result<RangeVector> {
    if x_train.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let ranges = x_train
        .axis_iter(Axis(1))
        .map(|col| {
            let (lo, hi) = col
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            hi - lo
        })
        .collect();
    RangeVector::new(ranges)
}

/// Reciprocal scale per attribute: `1/r_j`, or 0 for a constant attribute.
/// All ones when normalisation is off.
pub(crate) fn inverse_scales(ranges: &RangeVector, cfg: DistanceConfig) -> Vec<f64> {
    ranges
        .0
        .iter()
        .map(|&r| match (cfg.normalize, r > 0.0) {
            (false, _) => 1.0,
            (true, true) => 1.0 / r,
            (true, false) => 0.0,
        })
        .collect()
}

#[inline]
pub(crate) fn scaled_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, inv: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .zip(inv)
        .map(|((&p, &q), &s)| {
            let t = (p - q) * s;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

pub fn distance(
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    ranges: &RangeVector,
    cfg: DistanceConfig,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    if ranges.len() != a.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: ranges.len(),
        });
    }
    Ok(scaled_distance(a, b, &inverse_scales(ranges, cfg)))
}
