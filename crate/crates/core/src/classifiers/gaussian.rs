use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::distance::RangeVector;

/// Per-class, per-attribute mean and population variance (divisor `n_c`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    /// `[class, attribute]`; NaN rows for classes without training samples.
    means: Array2<f64>,
    variances: Array2<f64>,
}

impl GaussianParams {
    pub(super) fn fit(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        class_counts: &[usize],
        ranges: &RangeVector,
        floor_coefficient: f64,
    ) -> Self {
        let n_classes = class_counts.len();
        let n = x.ncols();
        let mut means = Array2::<f64>::zeros((n_classes, n));
        for (row, &c) in x.axis_iter(Axis(0)).zip(y) {
            let mut acc = means.row_mut(c);
            acc += &row;
        }
        for (c, &n_c) in class_counts.iter().enumerate() {
            let mut mean = means.row_mut(c);
            if n_c == 0 {
                mean.fill(f64::NAN);
            } else {
                mean /= n_c as f64;
            }
        }

        let mut variances = Array2::<f64>::zeros((n_classes, n));
        for (row, &c) in x.axis_iter(Axis(0)).zip(y) {
            for j in 0..n {
                let dev = row[j] - means[[c, j]];
                variances[[c, j]] += dev * dev;
            }
        }
        let floors: Vec<f64> = ranges
            .as_slice()
            .iter()
            .map(|r| floor_coefficient * (r * r).max(1.0))
            .collect();
        for (c, &n_c) in class_counts.iter().enumerate() {
            for j in 0..n {
                variances[[c, j]] = if n_c == 0 {
                    f64::NAN
                } else {
                    (variances[[c, j]] / n_c as f64).max(floors[j])
                };
            }
        }
        GaussianParams { means, variances }
    }

    pub fn mean(&self, class: usize, attribute: usize) -> f64 {
        self.means[[class, attribute]]
    }

    pub fn variance(&self, class: usize, attribute: usize) -> f64 {
        self.variances[[class, attribute]]
    }

    /// `sum_j ln N(x_j; mu_cj, var_cj)`.
    pub fn log_likelihood(&self, x: ArrayView1<'_, f64>, class: usize) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let var = self.variances[[class, j]];
                let dev = v - self.means[[class, j]];
                -0.5 * (2.0 * PI * var).ln() - dev * dev / (2.0 * var)
            })
            .sum()
    }
}
