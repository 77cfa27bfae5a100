//! Classifiers behind a common fit / score / predict interface.
//!
//! * `kappa_bayes` sums a `(1 + d)^-kappa` kernel over the training samples of each
//!   class, with `d` the range-normalised distance to the query. The sum is the class
//!   prior times the neighbourhood density estimate, up to a constant `1/m`.
//! * `laplace_nb` is Naive Bayes over attribute values with add-one smoothing.
//! * `gaussian_nb` models each attribute per class with a normal density.
//! * `knn` is a majority vote among the `k` nearest training samples.
//!
//! Every kind reports one score per class (larger is better) and picks the best class
//! with a fixed tie-break: larger training count first, then the smaller class id.
//! Classes without training samples are never predicted.

mod gaussian;
mod kernel;
mod knn;
mod laplace;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::distance::{compute_ranges, DistanceConfig, RangeVector};
use crate::error::{Error, Result};
use crate::kv;

pub use gaussian::GaussianParams;
pub use laplace::{LaplaceTables, Smoothing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    KappaBayes,
    LaplaceNb,
    GaussianNb,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::LaplaceNb,
        ClassifierKind::GaussianNb,
        ClassifierKind::Knn,
        ClassifierKind::KappaBayes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::KappaBayes => "kappa_bayes",
            ClassifierKind::LaplaceNb => "laplace_nb",
            ClassifierKind::GaussianNb => "gaussian_nb",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "kappa_bayes" | "kappa" | "proposed" => Ok(ClassifierKind::KappaBayes),
            "laplace_nb" | "laplace" => Ok(ClassifierKind::LaplaceNb),
            "gaussian_nb" | "gaussian" => Ok(ClassifierKind::GaussianNb),
            "knn" | "k_nn" => Ok(ClassifierKind::Knn),
            other => Err(Error::invalid(format!("unknown classifier kind `{other}`"))),
        }
    }
}

/// Classifier choice plus hyperparameters. Fields that do not apply to `kind` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Kernel exponent for `kappa_bayes`, `>= 0`.
    pub kappa: f64,
    pub k_neighbors: usize,
    /// Range-normalise distances (`kappa_bayes`, `knn`).
    pub normalize: bool,
    /// Additive constant of the smoothed class prior (both NB kinds).
    pub laplace_k: f64,
    /// Gaussian variance floor coefficient; the floor for attribute `j` is
    /// `variance_floor * max(r_j^2, 1)`.
    pub variance_floor: f64,
    /// Weight `m` of the M-estimate conditional for `laplace_nb`. `None` selects add-one.
    pub m_estimate: Option<f64>,
}

impl ClassifierSpec {
    pub const DEFAULT_KAPPA: f64 = 60.0;
    pub const DEFAULT_K: usize = 5;

    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec {
            kind,
            kappa: Self::DEFAULT_KAPPA,
            k_neighbors: Self::DEFAULT_K,
            normalize: true,
            laplace_k: 1.0,
            variance_floor: 1e-9,
            m_estimate: None,
        }
    }

    pub fn kappa_bayes(kappa: f64) -> Self {
        ClassifierSpec {
            kappa,
            ..Self::new(ClassifierKind::KappaBayes)
        }
    }

    pub fn laplace_nb() -> Self {
        Self::new(ClassifierKind::LaplaceNb)
    }

    pub fn gaussian_nb() -> Self {
        Self::new(ClassifierKind::GaussianNb)
    }

    pub fn knn(k: usize) -> Self {
        ClassifierSpec {
            k_neighbors: k,
            ..Self::new(ClassifierKind::Knn)
        }
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::invalid(format!(
                "kappa must be >= 0, got {}",
                self.kappa
            )));
        }
        if self.k_neighbors == 0 {
            return Err(Error::invalid("k_neighbors must be >= 1"));
        }
        if !(self.laplace_k.is_finite() && self.laplace_k > 0.0) {
            return Err(Error::invalid("laplace_k must be > 0"));
        }
        if !(self.variance_floor.is_finite() && self.variance_floor > 0.0) {
            return Err(Error::invalid("variance_floor must be > 0"));
        }
        if let Some(m) = self.m_estimate {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::invalid("m_estimate must be > 0"));
            }
        }
        Ok(())
    }

    /// The value swept for this kind, if any.
    pub fn hyperparameter(&self) -> Option<f64> {
        match self.kind {
            ClassifierKind::KappaBayes => Some(self.kappa),
            ClassifierKind::Knn => Some(self.k_neighbors as f64),
            _ => None,
        }
    }

    /// Short display name.
    pub fn label(&self) -> String {
        match self.kind {
            ClassifierKind::KappaBayes => format!("Proposed (κ={})", self.kappa),
            ClassifierKind::LaplaceNb => "Laplace NB".into(),
            ClassifierKind::GaussianNb => "Gaussian NB".into(),
            ClassifierKind::Knn => format!("k-NN (k={})", self.k_neighbors),
        }
    }

    pub fn to_kv(&self) -> String {
        let mut out = format!(
            "kind = {}\nkappa = {}\nk_neighbors = {}\nnormalize = {}\nlaplace_k = {}\nvariance_floor = {:e}\n",
            self.kind, self.kappa, self.k_neighbors, self.normalize, self.laplace_k, self.variance_floor
        );
        if let Some(m) = self.m_estimate {
            out += &format!("m_estimate = {m}\n");
        }
        out
    }

    /// Parses a `key = value` block. `kind` is required; other keys default.
    pub fn from_kv(text: &str) -> Result<Self> {
        let origin = "classifier spec";
        let entries = kv::parse(text, origin)?;
        let kind = entries
            .iter()
            .find(|e| e.key == "kind")
            .ok_or_else(|| Error::Config {
                origin: origin.into(),
                line: 0,
                message: "missing `kind`".into(),
            })?
            .value
            .parse::<ClassifierKind>()?;
        let mut spec = ClassifierSpec::new(kind);
        for e in &entries {
            match e.key.as_str() {
                "kind" => {}
                "kappa" => spec.kappa = kv::parse_num(origin, e)?,
                "k_neighbors" | "k" => spec.k_neighbors = kv::parse_num(origin, e)?,
                "normalize" => spec.normalize = kv::parse_bool(origin, e)?,
                "laplace_k" => spec.laplace_k = kv::parse_num(origin, e)?,
                "variance_floor" => spec.variance_floor = kv::parse_num(origin, e)?,
                "m_estimate" => spec.m_estimate = Some(kv::parse_num(origin, e)?),
                other => return Err(kv::config_err(origin, e, format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Per-class decision values for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub scores: Vec<f64>,
    pub predicted: usize,
    /// Scores are natural logs (Naive Bayes kinds).
    pub log_space: bool,
}

/// Index of the best score among classes with training samples. Ties go to the larger
/// class count, then to the smaller class id.
pub(crate) fn select_class(scores: &[f64], counts: &[usize]) -> usize {
    let mut best: Option<usize> = None;
    for c in (0..scores.len()).filter(|&c| counts[c] > 0) {
        best = match best {
            None => Some(c),
            Some(b) => {
                let better =
                    scores[c] > scores[b] || (scores[c] == scores[b] && counts[c] > counts[b]);
                Some(if better { c } else { b })
            }
        };
    }
    best.expect("fitted models have at least one populated class")
}

#[derive(Debug, Clone, PartialEq)]
enum Payload {
    /// Stored training samples (`kappa_bayes`, `knn`).
    Instances {
        x: Array2<f64>,
        y: Vec<usize>,
    },
    Laplace(LaplaceTables),
    Gaussian(GaussianParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    spec: ClassifierSpec,
    class_counts: Vec<usize>,
    ranges: RangeVector,
    payload: Payload,
}

pub fn fit(
    spec: &ClassifierSpec,
    x_train: ArrayView2<'_, f64>,
    y_train: &[usize],
    n_classes: usize,
) -> Result<FittedModel> {
    spec.validate()?;
    let m = x_train.nrows();
    if m == 0 || x_train.ncols() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y_train.len() != m {
        return Err(Error::Dimension {
            expected: m,
            found: y_train.len(),
        });
    }
    let mut class_counts = vec![0usize; n_classes];
    for &c in y_train {
        if c >= n_classes {
            return Err(Error::IndexOutOfBounds {
                index: c,
                len: n_classes,
            });
        }
        class_counts[c] += 1;
    }
    let ranges = compute_ranges(x_train)?;
    let payload = match spec.kind {
        ClassifierKind::KappaBayes | ClassifierKind::Knn => {
            if spec.kind == ClassifierKind::Knn && spec.k_neighbors > m {
                return Err(Error::invalid(format!(
                    "k_neighbors = {} exceeds the {m} training samples",
                    spec.k_neighbors
                )));
            }
            Payload::Instances {
                x: x_train.to_owned(),
                y: y_train.to_vec(),
            }
        }
        ClassifierKind::LaplaceNb => {
            let smoothing = match spec.m_estimate {
                None => Smoothing::AddOne,
                Some(weight) => Smoothing::MEstimate { weight },
            };
            Payload::Laplace(LaplaceTables::fit(x_train, y_train, n_classes, smoothing))
        }
        ClassifierKind::GaussianNb => Payload::Gaussian(GaussianParams::fit(
            x_train,
            y_train,
            &class_counts,
            &ranges,
            spec.variance_floor,
        )),
    };
    Ok(FittedModel {
        spec: spec.clone(),
        class_counts,
        ranges,
        payload,
    })
}

impl FittedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn n_features(&self) -> usize {
        self.ranges.len()
    }

    /// Number of training samples.
    pub fn n_train(&self) -> usize {
        self.class_counts.iter().sum()
    }

    pub fn ranges(&self) -> &RangeVector {
        &self.ranges
    }

    fn distance_config(&self) -> DistanceConfig {
        DistanceConfig {
            normalize: self.spec.normalize,
        }
    }

    /// Smoothed class prior `(n_c + k) / (m + k * |classes seen|)` used by both NB kinds.
    pub fn smoothed_prior(&self, class: usize) -> Option<f64> {
        let n_c = *self.class_counts.get(class)?;
        if n_c == 0 {
            return None;
        }
        let seen = self.class_counts.iter().filter(|&&n| n > 0).count() as f64;
        let k = self.spec.laplace_k;
        Some((n_c as f64 + k) / (self.n_train() as f64 + k * seen))
    }

    pub fn laplace_tables(&self) -> Option<&LaplaceTables> {
        match &self.payload {
            Payload::Laplace(t) => Some(t),
            _ => None,
        }
    }

    pub fn gaussian_params(&self) -> Option<&GaussianParams> {
        match &self.payload {
            Payload::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    pub fn score(&self, x: ArrayView1<'_, f64>) -> Result<ClassScore> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let (scores, log_space) = match &self.payload {
            Payload::Instances { x: train, y } => match self.spec.kind {
                ClassifierKind::Knn => (
                    knn::vote(
                        train.view(),
                        y,
                        x,
                        &self.ranges,
                        self.distance_config(),
                        self.spec.k_neighbors,
                        self.n_classes(),
                    ),
                    false,
                ),
                _ => (
                    kernel::class_sums(
                        train.view(),
                        y,
                        x,
                        &self.ranges,
                        self.distance_config(),
                        self.spec.kappa,
                        self.n_classes(),
                    ),
                    false,
                ),
            },
            Payload::Laplace(tables) => {
                let scores = (0..self.n_classes())
                    .map(|c| match self.smoothed_prior(c) {
                        Some(p) => p.ln() + tables.log_likelihood(x, c, self.class_counts[c]),
                        None => f64::NEG_INFINITY,
                    })
                    .collect();
                (scores, true)
            }
            Payload::Gaussian(params) => {
                let scores = (0..self.n_classes())
                    .map(|c| match self.smoothed_prior(c) {
                        Some(p) => p.ln() + params.log_likelihood(x, c),
                        None => f64::NEG_INFINITY,
                    })
                    .collect();
                (scores, true)
            }
        };
        let predicted = select_class(&scores, &self.class_counts);
        Ok(ClassScore {
            scores,
            predicted,
            log_space,
        })
    }

    fn check_width(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x_test: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        self.check_width(&x_test)?;
        x_test
            .axis_iter(Axis(0))
            .map(|row| self.score(row).map(|s| s.predicted))
            .collect()
    }

    /// Row-parallel [`predict`](Self::predict); the output is identical.
    pub fn predict_parallel(&self, x_test: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        self.check_width(&x_test)?;
        (0..x_test.nrows())
            .into_par_iter()
            .map(|i| self.score(x_test.row(i)).map(|s| s.predicted))
            .collect()
    }
}

/// Anything that can be trained on a fold and then label held-out rows.
pub trait Learner: Sync {
    type Model: Predictor;

    fn fit_model(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        n_classes: usize,
    ) -> Result<Self::Model>;
}

pub trait Predictor {
    fn predict_rows(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>>;
}

impl Learner for ClassifierSpec {
    type Model = FittedModel;

    fn fit_model(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        n_classes: usize,
    ) -> Result<FittedModel> {
        fit(self, x, y, n_classes)
    }
}

impl Predictor for FittedModel {
    fn predict_rows(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        self.predict(x)
    }
}

#[cfg(test)]
mod tests;
