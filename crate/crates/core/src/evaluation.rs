//! Resampled k-fold cross-validation, hyperparameter sweeps and comparison reports.
//!
//! Resample `t` draws a fresh fold plan seeded with `base_seed + t`, so every classifier
//! and every grid point sees the same partitions. Within a fold all statistics
//! (ranges, counts, means) come from the training rows only.

use std::borrow::Cow;
use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::classifiers::{ClassifierKind, ClassifierSpec, Learner, Predictor};
use crate::dataset::{make_folds, Dataset, FoldPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub resamples: usize,
    pub base_seed: u64,
    /// Stratify fold assignment by class. Off by default: plain shuffled folds.
    pub stratified: bool,
    pub specs: Vec<ClassifierSpec>,
    pub feature_subset: Option<Vec<usize>>,
    pub kappa_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    /// After the coarse kappa sweep, also try every integer within 4 of the best value.
    pub refine_kappa: bool,
    /// Run resamples and grid points on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            folds: 10,
            resamples: 10,
            base_seed: 0,
            stratified: false,
            specs: vec![
                ClassifierSpec::laplace_nb(),
                ClassifierSpec::gaussian_nb(),
                ClassifierSpec::knn(ClassifierSpec::DEFAULT_K),
                ClassifierSpec::kappa_bayes(ClassifierSpec::DEFAULT_KAPPA),
            ],
            feature_subset: None,
            kappa_grid: default_kappa_grid(),
            k_grid: default_k_grid(),
            refine_kappa: false,
            parallel: true,
        }
    }
}

/// 0, 5, ..., 95.
pub fn default_kappa_grid() -> Vec<f64> {
    (0..20).map(|i| 5.0 * i as f64).collect()
}

/// 1, 3, ..., 31.
pub fn default_k_grid() -> Vec<usize> {
    (1..=31).step_by(2).collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid("folds must be >= 2"));
        }
        if self.resamples == 0 {
            return Err(Error::invalid("resamples must be >= 1"));
        }
        for spec in &self.specs {
            spec.validate()?;
        }
        Ok(())
    }

    fn prepare<'a>(&self, ds: &'a Dataset) -> Result<Cow<'a, Dataset>> {
        self.validate()?;
        if ds.n_samples() < self.folds {
            return Err(Error::invalid(format!(
                "{} folds requested for {} samples",
                self.folds,
                ds.n_samples()
            )));
        }
        Ok(match &self.feature_subset {
            Some(subset) => Cow::Owned(ds.select_features(subset)?),
            None => Cow::Borrowed(ds),
        })
    }

    pub fn fold_plan(&self, ds: &Dataset, resample: usize) -> Result<FoldPlan> {
        make_folds(
            &ds.y,
            self.folds,
            self.base_seed.wrapping_add(resample as u64),
            self.stratified,
        )
    }

    /// Resolved settings as `key = value` text, written next to run outputs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "folds = {}", self.folds);
        let _ = writeln!(out, "resamples = {}", self.resamples);
        let _ = writeln!(out, "base_seed = {}", self.base_seed);
        let _ = writeln!(out, "stratified = {}", self.stratified);
        if let Some(fs) = &self.feature_subset {
            let _ = writeln!(out, "feature_subset = {fs:?}");
        }
        let _ = writeln!(out, "kappa_grid = {:?}", self.kappa_grid);
        let _ = writeln!(out, "k_grid = {:?}", self.k_grid);
        let _ = writeln!(out, "refine_kappa = {}", self.refine_kappa);
        for (i, spec) in self.specs.iter().enumerate() {
            let _ = writeln!(out, "\n[spec {i}]");
            out += &spec.to_kv();
        }
        out
    }
}

/// Result of one resampled cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    /// Correct predictions over all held-out rows, one entry per resample.
    pub resample_accuracies: Vec<f64>,
    /// Total time spent in fit + predict.
    pub fit_predict_time: Duration,
    /// Hash of each resample's fold assignment.
    pub plan_digests: Vec<u64>,
    /// Folds whose training rows missed at least one class of the dataset.
    pub degenerate_folds: usize,
}

impl CvOutcome {
    pub fn mean_accuracy(&self) -> f64 {
        mean(&self.resample_accuracies)
    }

    pub fn std_accuracy(&self) -> f64 {
        sample_std(&self.resample_accuracies)
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn digest(plan: &FoldPlan) -> u64 {
    let mut h = DefaultHasher::new();
    plan.assignments.hash(&mut h);
    h.finish()
}

struct ResampleResult {
    accuracy: f64,
    time: Duration,
    digest: u64,
    degenerate: usize,
}

fn run_resample<L: Learner>(
    ds: &Dataset,
    learner: &L,
    cfg: &ExperimentConfig,
    resample: usize,
) -> Result<ResampleResult> {
    let plan = cfg.fold_plan(ds, resample)?;
    let present = ds.class_counts();
    let mut correct = 0usize;
    let mut total = 0usize;
    let mut time = Duration::ZERO;
    let mut degenerate = 0;
    for fold in 0..plan.folds {
        let test = plan.test_indices(fold);
        if test.is_empty() {
            continue;
        }
        let train = plan.train_indices(fold);
        let train_ds = ds.subset_rows(&train);
        let test_ds = ds.subset_rows(&test);
        let train_counts = train_ds.class_counts();
        if present
            .iter()
            .zip(&train_counts)
            .any(|(&all, &tr)| all > 0 && tr == 0)
        {
            degenerate += 1;
        }

        let start = Instant::now();
        let model = learner.fit_model(train_ds.x.view(), &train_ds.y, ds.n_classes())?;
        let predicted = model.predict_rows(test_ds.x.view())?;
        time += start.elapsed();

        correct += predicted
            .iter()
            .zip(&test_ds.y)
            .filter(|(p, t)| p == t)
            .count();
        total += test.len();
    }
    Ok(ResampleResult {
        accuracy: correct as f64 / total as f64,
        time,
        digest: digest(&plan),
        degenerate,
    })
}

fn cross_validate_prepared<L: Learner>(
    ds: &Dataset,
    learner: &L,
    cfg: &ExperimentConfig,
) -> Result<CvOutcome> {
    let results: Vec<ResampleResult> = if cfg.parallel {
        (0..cfg.resamples)
            .into_par_iter()
            .map(|t| run_resample(ds, learner, cfg, t))
            .collect::<Result<_>>()?
    } else {
        (0..cfg.resamples)
            .map(|t| run_resample(ds, learner, cfg, t))
            .collect::<Result<_>>()?
    };
    Ok(CvOutcome {
        resample_accuracies: results.iter().map(|r| r.accuracy).collect(),
        fit_predict_time: results.iter().map(|r| r.time).sum(),
        plan_digests: results.iter().map(|r| r.digest).collect(),
        degenerate_folds: results.iter().map(|r| r.degenerate).sum(),
    })
}

/// Mean accuracy per resample of `learner` under `cfg` (feature subset applied first).
pub fn cross_validate<L: Learner>(
    ds: &Dataset,
    learner: &L,
    cfg: &ExperimentConfig,
) -> Result<CvOutcome> {
    let ds = cfg.prepare(ds)?;
    cross_validate_prepared(&ds, learner, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: CvOutcome,
}

impl SweepPoint {
    pub fn mean_accuracy(&self) -> f64 {
        self.outcome.mean_accuracy()
    }
}

/// Accuracy as a function of one hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub dataset: String,
    pub kind: ClassifierKind,
    /// Sorted by value.
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    /// Point with the highest mean accuracy; ties go to the smaller value.
    pub fn best(&self) -> &SweepPoint {
        let mut best = &self.points[0];
        for p in &self.points[1..] {
            let (a, b) = (p.mean_accuracy(), best.mean_accuracy());
            if a > b || (a == b && p.value < best.value) {
                best = p;
            }
        }
        best
    }

    pub fn best_value(&self) -> f64 {
        self.best().value
    }

    /// Two columns, `value,accuracy`, one line per grid point, no header.
    pub fn to_csv(&self) -> String {
        self.points
            .iter()
            .map(|p| format!("{},{}\n", p.value, p.mean_accuracy()))
            .collect()
    }
}

fn spec_at(base: &ClassifierSpec, value: f64) -> Result<ClassifierSpec> {
    let mut spec = base.clone();
    match base.kind {
        ClassifierKind::KappaBayes => spec.kappa = value,
        ClassifierKind::Knn => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::invalid(format!(
                    "k must be a positive integer, got {value}"
                )));
            }
            spec.k_neighbors = value as usize;
        }
        other => {
            return Err(Error::invalid(format!(
                "{other} has no hyperparameter to sweep"
            )));
        }
    }
    Ok(spec)
}

fn evaluate_grid(
    ds: &Dataset,
    base: &ClassifierSpec,
    grid: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Vec<SweepPoint>> {
    let run = |&value: &f64| -> Result<SweepPoint> {
        let spec = spec_at(base, value)?;
        Ok(SweepPoint {
            value,
            outcome: cross_validate_prepared(ds, &spec, cfg)?,
        })
    };
    if cfg.parallel {
        grid.par_iter().map(run).collect()
    } else {
        grid.iter().map(run).collect()
    }
}

fn sweep_prepared(
    ds: &Dataset,
    base: &ClassifierSpec,
    grid: &[f64],
    cfg: &ExperimentConfig,
) -> Result<SweepCurve> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    let mut seen = Vec::new();
    for &v in grid {
        if !seen.contains(&v) {
            seen.push(v);
        }
    }
    let mut curve = SweepCurve {
        dataset: ds.name.clone(),
        kind: base.kind,
        points: evaluate_grid(ds, base, &seen, cfg)?,
    };
    if cfg.refine_kappa && base.kind == ClassifierKind::KappaBayes {
        let center = curve.best_value().round();
        let extra: Vec<f64> = (-4..=4)
            .map(|o| center + o as f64)
            .filter(|v| *v >= 0.0 && !seen.contains(v))
            .collect();
        curve.points.extend(evaluate_grid(ds, base, &extra, cfg)?);
    }
    curve.points.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(curve)
}

/// One cross-validation run per grid value with identical fold plans throughout.
/// Other hyperparameters come from the first spec of `kind` in `cfg.specs`.
pub fn sweep(
    ds: &Dataset,
    kind: ClassifierKind,
    grid: &[f64],
    cfg: &ExperimentConfig,
) -> Result<SweepCurve> {
    let ds = cfg.prepare(ds)?;
    let base = cfg
        .specs
        .iter()
        .find(|s| s.kind == kind)
        .cloned()
        .unwrap_or_else(|| ClassifierSpec::new(kind));
    sweep_prepared(&ds, &base, grid, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierResult {
    pub label: String,
    pub kind: ClassifierKind,
    pub hyperparameter: Option<f64>,
    pub mean_accuracy: f64,
    pub std: f64,
    pub resample_accuracies: Vec<f64>,
    pub wall_time: Duration,
}

impl ClassifierResult {
    fn from_outcome(
        label: String,
        kind: ClassifierKind,
        hyper: Option<f64>,
        o: &CvOutcome,
    ) -> Self {
        ClassifierResult {
            label,
            kind,
            hyperparameter: hyper,
            mean_accuracy: o.mean_accuracy(),
            std: o.std_accuracy(),
            resample_accuracies: o.resample_accuracies.clone(),
            wall_time: o.fit_predict_time,
        }
    }
}

pub const LABEL_KAPPA_OPTIMAL: &str = "Proposed (optimal κ)";
pub const LABEL_KNN_OPTIMAL: &str = "k-NN (optimal k)";

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub results: Vec<ClassifierResult>,
    pub sweeps: Vec<SweepCurve>,
}

pub const REPORT_CSV_HEADER: &str =
    "dataset,classifier,hyperparameter,mean_accuracy,std,wall_time_s";

impl EvalReport {
    pub fn result(&self, label: &str) -> Option<&ClassifierResult> {
        self.results.iter().find(|r| r.label == label)
    }

    pub fn to_csv(&self) -> String {
        reports_to_csv(std::slice::from_ref(self))
    }

    pub fn to_table(&self) -> String {
        reports_to_table(std::slice::from_ref(self))
    }
}

fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

/// Machine-readable rows for several reports under one header.
pub fn reports_to_csv(reports: &[EvalReport]) -> String {
    let mut out = format!("{REPORT_CSV_HEADER}\n");
    for rep in reports {
        for r in &rep.results {
            let hyper = r.hyperparameter.map(|h| h.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&rep.dataset),
                csv_field(&r.label),
                hyper,
                r.mean_accuracy,
                r.std,
                r.wall_time.as_secs_f64()
            );
        }
    }
    out
}

/// Aligned plain-text table.
pub fn reports_to_table(reports: &[EvalReport]) -> String {
    let header = [
        "dataset",
        "classifier",
        "param",
        "accuracy",
        "std",
        "time_s",
    ];
    let mut rows: Vec<[String; 6]> = Vec::new();
    for rep in reports {
        for r in &rep.results {
            rows.push([
                rep.dataset.clone(),
                r.label.clone(),
                r.hyperparameter
                    .map(|h| h.to_string())
                    .unwrap_or_else(|| "-".into()),
                format!("{:.4}", r.mean_accuracy),
                format!("{:.4}", r.std),
                format!("{:.4}", r.wall_time.as_secs_f64()),
            ]);
        }
    }
    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let fmt_row = |cells: &[String]| -> String {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            let pad = widths[i] - cell.chars().count();
            if i >= 2 {
                line += &" ".repeat(pad);
                line += cell;
            } else {
                line += cell;
                line += &" ".repeat(pad);
            }
            if i + 1 < cells.len() {
                line += "  ";
            }
        }
        line.trim_end().to_string() + "\n"
    };
    let mut out = fmt_row(&header.map(String::from));
    let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out += &"-".repeat(rule);
    out.push('\n');
    for row in &rows {
        out += &fmt_row(row);
    }
    out
}

/// Runs every spec in `cfg.specs`. Naive Bayes kinds are cross-validated as given;
/// `knn` is swept over `k_grid` and reported at its best `k`; `kappa_bayes` is reported
/// both at its own `kappa` and at the best value of `kappa_grid`.
pub fn compare(ds: &Dataset, cfg: &ExperimentConfig) -> Result<EvalReport> {
    let mut report = EvalReport {
        dataset: ds.name.clone(),
        results: Vec::new(),
        sweeps: Vec::new(),
    };
    if cfg.specs.is_empty() {
        return Ok(report);
    }
    let ds = cfg.prepare(ds)?;
    for spec in &cfg.specs {
        match spec.kind {
            ClassifierKind::LaplaceNb | ClassifierKind::GaussianNb => {
                let o = cross_validate_prepared(&ds, spec, cfg)?;
                report.results.push(ClassifierResult::from_outcome(
                    spec.label(),
                    spec.kind,
                    None,
                    &o,
                ));
            }
            ClassifierKind::Knn => {
                let max_k = ds.n_samples() - ds.n_samples().div_ceil(cfg.folds);
                let grid: Vec<f64> = cfg
                    .k_grid
                    .iter()
                    .filter(|&&k| k >= 1 && k <= max_k)
                    .map(|&k| k as f64)
                    .collect();
                let curve = sweep_prepared(&ds, spec, &grid, cfg)?;
                let best = curve.best();
                report.results.push(ClassifierResult::from_outcome(
                    LABEL_KNN_OPTIMAL.into(),
                    spec.kind,
                    Some(best.value),
                    &best.outcome,
                ));
                report.sweeps.push(curve);
            }
            ClassifierKind::KappaBayes => {
                let fixed = cross_validate_prepared(&ds, spec, cfg)?;
                report.results.push(ClassifierResult::from_outcome(
                    spec.label(),
                    spec.kind,
                    Some(spec.kappa),
                    &fixed,
                ));
                let curve = sweep_prepared(&ds, spec, &cfg.kappa_grid, cfg)?;
                let best = curve.best();
                report.results.push(ClassifierResult::from_outcome(
                    LABEL_KAPPA_OPTIMAL.into(),
                    spec.kind,
                    Some(best.value),
                    &best.outcome,
                ));
                report.sweeps.push(curve);
            }
        }
    }
    Ok(report)
}

/// Mean accuracy per classifier label across reports, in first-seen label order.
pub fn average_by_label(reports: &[EvalReport]) -> Vec<(String, f64, usize)> {
    let mut out: Vec<(String, f64, usize)> = Vec::new();
    for rep in reports {
        for r in &rep.results {
            match out.iter_mut().find(|(l, _, _)| *l == r.label) {
                Some(entry) => {
                    entry.1 += r.mean_accuracy;
                    entry.2 += 1;
                }
                None => out.push((r.label.clone(), r.mean_accuracy, 1)),
            }
        }
    }
    for entry in &mut out {
        entry.1 /= entry.2 as f64;
    }
    out
}
