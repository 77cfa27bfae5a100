//! Distance-kernel Bayes classification with Naive Bayes and k-NN baselines,
//! resampled cross-validation, and hyperparameter sweeps.
//!
//! ```
//! use kbayes::classifiers::{fit, ClassifierSpec};
//! use ndarray::array;
//!
//! let x = array![[5.0], [10.0], [11.0], [1.0], [2.0], [7.0], [8.0]];
//! let y = [0, 0, 0, 1, 1, 1, 1];
//! let spec = ClassifierSpec::kappa_bayes(60.0).with_normalize(false);
//! let model = fit(&spec, x.view(), &y, 2).unwrap();
//! assert_eq!(model.predict(array![[4.0]].view()).unwrap(), vec![0]);
//! ```

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod evaluation;
mod kv;

pub use classifiers::{
    fit, ClassScore, ClassifierKind, ClassifierSpec, FittedModel, Learner, Predictor,
};
pub use dataset::{load_csv, make_folds, Dataset, DatasetManifest, FoldPlan, LoadOptions};
pub use distance::{compute_ranges, distance, DistanceConfig, RangeVector};
pub use error::{Error, Result};
pub use evaluation::{
    compare, cross_validate, sweep, CvOutcome, EvalReport, ExperimentConfig, SweepCurve,
};
pub use kv::parse_index_list;
