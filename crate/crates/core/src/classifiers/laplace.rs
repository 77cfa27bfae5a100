use std::collections::BTreeMap;

use ndarray::{ArrayView1, ArrayView2};

/// How a zero count for (attribute value, class) is smoothed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// `(n_ci + 1) / (n_c + V_i)` with `V_i` the number of distinct training values of
    /// attribute `i`. This is the M-estimate with `m = V_i` and a uniform value prior.
    AddOne,
    /// `(n_ci + m q) / (n_c + m)` where `q = (count(v) + 1) / (N + V_i)` is the
    /// add-one estimate of the value's overall frequency.
    MEstimate { weight: f64 },
}

fn value_key(v: f64) -> u64 {
    // -0.0 and 0.0 are the same category
    if v == 0.0 {
        0.0f64.to_bits()
    } else {
        v.to_bits()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct AttributeCounts {
    /// value bits -> per-class counts
    by_value: BTreeMap<u64, Vec<usize>>,
}

/// Count tables for Naive Bayes over discrete attribute values. Every distinct real
/// value is its own category.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceTables {
    attributes: Vec<AttributeCounts>,
    n_train: usize,
    smoothing: Smoothing,
}

impl LaplaceTables {
    pub(super) fn fit(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        n_classes: usize,
        smoothing: Smoothing,
    ) -> Self {
        let attributes = x
            .columns()
            .into_iter()
            .map(|col| {
                let mut by_value: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
                for (&v, &c) in col.iter().zip(y) {
                    by_value
                        .entry(value_key(v))
                        .or_insert_with(|| vec![0; n_classes])[c] += 1;
                }
                AttributeCounts { by_value }
            })
            .collect();
        LaplaceTables {
            attributes,
            n_train: y.len(),
            smoothing,
        }
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    /// `V_i`: distinct training values of the attribute.
    pub fn distinct_values(&self, attribute: usize) -> usize {
        self.attributes[attribute].by_value.len()
    }

    /// Distinct training values of the attribute in ascending bit order.
    pub fn values(&self, attribute: usize) -> Vec<f64> {
        self.attributes[attribute]
            .by_value
            .keys()
            .map(|&b| f64::from_bits(b))
            .collect()
    }

    /// `n_ci`: training samples of `class` whose attribute equals `value`.
    pub fn count(&self, attribute: usize, value: f64, class: usize) -> usize {
        self.attributes[attribute]
            .by_value
            .get(&value_key(value))
            .map_or(0, |per_class| per_class[class])
    }

    fn value_total(&self, attribute: usize, value: f64) -> usize {
        self.attributes[attribute]
            .by_value
            .get(&value_key(value))
            .map_or(0, |per_class| per_class.iter().sum())
    }

    /// Smoothed `p(X_i = value | C = class)` given the class size `n_c`.
    pub fn conditional(&self, attribute: usize, value: f64, class: usize, n_c: usize) -> f64 {
        let n_ci = self.count(attribute, value, class) as f64;
        let v_i = self.distinct_values(attribute) as f64;
        match self.smoothing {
            Smoothing::AddOne => (n_ci + 1.0) / (n_c as f64 + v_i),
            Smoothing::MEstimate { weight } => {
                let q =
                    (self.value_total(attribute, value) as f64 + 1.0) / (self.n_train as f64 + v_i);
                (n_ci + weight * q) / (n_c as f64 + weight)
            }
        }
    }

    pub(super) fn log_likelihood(&self, x: ArrayView1<'_, f64>, class: usize, n_c: usize) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, &v)| self.conditional(i, v, class, n_c).ln())
            .sum()
    }
}
