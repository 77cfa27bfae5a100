//! Command-line front end: `example`, `evaluate`, `sweep`, `compare`.
//!
//! Tables and curves go to stdout, diagnostics to stderr. With `--out DIR` every command
//! also writes its CSV outputs plus `config.txt` holding the resolved settings.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::array;

use crate::classifiers::{fit, ClassifierKind, ClassifierSpec};
use crate::dataset::{known_feature_subset, DatasetManifest};
use crate::error::{Error, Result};
use crate::evaluation::{
    self, average_by_label, reports_to_csv, reports_to_table, ClassifierResult, EvalReport,
    ExperimentConfig,
};
use crate::kv::parse_index_list;

#[derive(Debug, Parser)]
#[command(
    name = "kbayes",
    version,
    about = "Distance-kernel Bayes classifier experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Walk through the seven-sample red/green toy problem.
    Example,
    /// Cross-validate classifiers at fixed hyperparameters on one dataset.
    Evaluate {
        manifest: PathBuf,
        /// Laplace NB, Gaussian NB, k-NN and the kernel classifier.
        #[arg(long)]
        all: bool,
        /// Classifier to run; repeatable. Defaults to all four.
        #[arg(long = "classifier", value_name = "KIND")]
        classifiers: Vec<ClassifierKind>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Accuracy curve over a hyperparameter grid.
    Sweep {
        manifest: PathBuf,
        /// `kappa_bayes` (default) or `knn`.
        #[arg(
            long = "classifier",
            value_name = "KIND",
            default_value = "kappa_bayes"
        )]
        classifier: ClassifierKind,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Full comparison (baselines, best k, kappa fixed and best) over several datasets.
    Compare {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Skip datasets whose data file is absent instead of failing.
        #[arg(long)]
        skip_missing: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Kernel exponent for the kernel classifier.
    #[arg(long)]
    kappa: Option<f64>,
    /// Neighbour count for k-NN.
    #[arg(long)]
    k: Option<usize>,
    /// `start:stop:step` (inclusive) or a comma list.
    #[arg(long, value_name = "GRID")]
    kappa_grid: Option<String>,
    #[arg(long, value_name = "GRID")]
    k_grid: Option<String>,
    /// Zero-based attribute indices, e.g. `3,2`. Overrides the manifest.
    #[arg(long, value_name = "LIST")]
    features: Option<String>,
    /// Use the published attribute subset for known dataset names.
    #[arg(long)]
    paper: bool,
    /// Use every attribute, ignoring manifest and published subsets.
    #[arg(long, conflicts_with_all = ["features", "paper"])]
    all_features: bool,
    #[arg(long)]
    no_normalize: bool,
    /// Stratify folds by class.
    #[arg(long)]
    stratified: bool,
    /// After the coarse kappa sweep, try every integer within 4 of the best value.
    #[arg(long)]
    refine: bool,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// Either a usage error from argument parsing or a failure while running.
#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

/// Parses `args` (program name first) and runs the command, printing data to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> std::result::Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    match cli.command {
        Command::Example => emit(out, &example_report()?)?,
        Command::Evaluate {
            manifest,
            all,
            classifiers,
            run,
        } => cmd_evaluate(&manifest, all, &classifiers, &run, out)?,
        Command::Sweep {
            manifest,
            classifier,
            run,
        } => cmd_sweep(&manifest, classifier, &run, out)?,
        Command::Compare {
            manifests,
            skip_missing,
            run,
        } => cmd_compare(&manifests, skip_missing, &run, out)?,
    }
    Ok(())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Inclusive `start:stop:step` or a comma / space separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::invalid(format!("grid `{text}`: {msg}"));
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_>>()?;
        let (start, stop, step) = match nums[..] {
            [a, b] => (a, b, 1.0),
            [a, b, s] => (a, b, s),
            _ => return Err(bad("expected start:stop[:step]".into())),
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop >= start".into()));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    let values: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| bad(e.to_string())))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(bad("empty".into()));
    }
    Ok(values)
}

fn parse_k_grid(text: &str) -> Result<Vec<usize>> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!(
                    "k grid value {v} is not a positive integer"
                )))
            }
        })
        .collect()
}

impl RunArgs {
    fn config(&self, specs: Vec<ClassifierSpec>) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig {
            folds: self.folds,
            resamples: self.resamples,
            base_seed: self.seed,
            stratified: self.stratified,
            specs,
            refine_kappa: self.refine,
            parallel: !self.sequential,
            ..Default::default()
        };
        if let Some(g) = &self.kappa_grid {
            cfg.kappa_grid = parse_grid(g)?;
        }
        if let Some(g) = &self.k_grid {
            cfg.k_grid = parse_k_grid(g)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn spec(&self, kind: ClassifierKind) -> ClassifierSpec {
        let mut spec = ClassifierSpec::new(kind).with_normalize(!self.no_normalize);
        if let Some(kappa) = self.kappa {
            spec.kappa = kappa;
        }
        if let Some(k) = self.k {
            spec.k_neighbors = k;
        }
        spec
    }

    /// `--features`, else `--all-features`, else the manifest's subset, else (with
    /// `--paper`) the published subset for the dataset name.
    fn feature_subset(&self, manifest: &DatasetManifest) -> Result<Option<Vec<usize>>> {
        if let Some(f) = &self.features {
            let list = parse_index_list(f).map_err(Error::invalid)?;
            return Ok((!list.is_empty()).then_some(list));
        }
        if self.all_features {
            return Ok(None);
        }
        if manifest.feature_subset.is_some() {
            return Ok(manifest.feature_subset.clone());
        }
        Ok(if self.paper {
            known_feature_subset(&manifest.name)
        } else {
            None
        })
    }
}

fn load(
    manifest_path: &Path,
    run: &RunArgs,
) -> Result<(DatasetManifest, crate::Dataset, Option<Vec<usize>>)> {
    let manifest = DatasetManifest::from_file(manifest_path)?;
    let ds = manifest.load()?;
    let subset = run.feature_subset(&manifest)?;
    Ok((manifest, ds, subset))
}

fn config_text(cfg: &ExperimentConfig, manifests: &[DatasetManifest]) -> String {
    let mut text = cfg.to_text();
    for m in manifests {
        let _ = write!(text, "\n[dataset {}]\n{}", m.name, m.to_text());
    }
    text
}

fn warn_degenerate(dataset: &str, results: &[(String, usize)]) {
    for (label, n) in results {
        if *n > 0 {
            eprintln!("warning: {dataset}/{label}: {n} folds trained without some class");
        }
    }
}

fn cmd_evaluate(
    manifest_path: &Path,
    all: bool,
    kinds: &[ClassifierKind],
    run: &RunArgs,
    out: &mut dyn Write,
) -> Result<()> {
    let kinds: Vec<ClassifierKind> = if all {
        ClassifierKind::ALL.to_vec()
    } else if !kinds.is_empty() {
        kinds.to_vec()
    } else if run.kappa.is_some() && run.k.is_none() {
        vec![ClassifierKind::KappaBayes]
    } else if run.k.is_some() && run.kappa.is_none() {
        vec![ClassifierKind::Knn]
    } else {
        ClassifierKind::ALL.to_vec()
    };
    let specs: Vec<ClassifierSpec> = kinds.iter().map(|&k| run.spec(k)).collect();
    let (manifest, ds, subset) = load(manifest_path, run)?;
    let mut cfg = run.config(specs)?;
    cfg.feature_subset = subset;

    let mut report = EvalReport {
        dataset: ds.name.clone(),
        results: Vec::new(),
        sweeps: Vec::new(),
    };
    let mut degenerate = Vec::new();
    for spec in &cfg.specs {
        let o = evaluation::cross_validate(&ds, spec, &cfg)?;
        degenerate.push((spec.label(), o.degenerate_folds));
        report.results.push(ClassifierResult {
            label: spec.label(),
            kind: spec.kind,
            hyperparameter: spec.hyperparameter(),
            mean_accuracy: o.mean_accuracy(),
            std: o.std_accuracy(),
            resample_accuracies: o.resample_accuracies.clone(),
            wall_time: o.fit_predict_time,
        });
    }
    warn_degenerate(&ds.name, &degenerate);
    emit(out, &report.to_table())?;
    if let Some(dir) = &run.out {
        prepare_out(dir)?;
        write_file(
            &dir.join(format!("{}_evaluate.csv", ds.name)),
            &report.to_csv(),
        )?;
        write_file(&dir.join("config.txt"), &config_text(&cfg, &[manifest]))?;
    }
    Ok(())
}

fn cmd_sweep(
    manifest_path: &Path,
    kind: ClassifierKind,
    run: &RunArgs,
    out: &mut dyn Write,
) -> Result<()> {
    let (manifest, ds, subset) = load(manifest_path, run)?;
    let mut cfg = run.config(vec![run.spec(kind)])?;
    cfg.feature_subset = subset;
    let grid: Vec<f64> = match kind {
        ClassifierKind::KappaBayes => cfg.kappa_grid.clone(),
        ClassifierKind::Knn => cfg.k_grid.iter().map(|&k| k as f64).collect(),
        other => {
            return Err(Error::invalid(format!(
                "{other} has no hyperparameter to sweep"
            )))
        }
    };
    let curve = evaluation::sweep(&ds, kind, &grid, &cfg)?;
    let best = curve.best();
    eprintln!(
        "{}: best {} = {} (mean accuracy {:.4})",
        ds.name,
        if kind == ClassifierKind::Knn {
            "k"
        } else {
            "kappa"
        },
        best.value,
        best.mean_accuracy()
    );
    let csv = curve.to_csv();
    emit(out, &csv)?;
    if let Some(dir) = &run.out {
        prepare_out(dir)?;
        write_file(&dir.join(format!("{}_sweep_{}.csv", ds.name, kind)), &csv)?;
        write_file(&dir.join("config.txt"), &config_text(&cfg, &[manifest]))?;
    }
    Ok(())
}

fn cmd_compare(
    manifest_paths: &[PathBuf],
    skip_missing: bool,
    run: &RunArgs,
    out: &mut dyn Write,
) -> Result<()> {
    let specs = vec![
        run.spec(ClassifierKind::LaplaceNb),
        run.spec(ClassifierKind::GaussianNb),
        run.spec(ClassifierKind::Knn),
        run.spec(ClassifierKind::KappaBayes),
    ];
    let base = run.config(specs)?;
    let mut reports = Vec::new();
    let mut manifests = Vec::new();
    for path in manifest_paths {
        let manifest = DatasetManifest::from_file(path)?;
        if skip_missing && !manifest.path.exists() {
            eprintln!(
                "skipping {}: {} not found",
                manifest.name,
                manifest.path.display()
            );
            continue;
        }
        let ds = manifest.load()?;
        let cfg = ExperimentConfig {
            feature_subset: run.feature_subset(&manifest)?,
            ..base.clone()
        };
        eprintln!(
            "{}: {} samples, {} attributes",
            ds.name,
            ds.n_samples(),
            ds.n_features()
        );
        reports.push(evaluation::compare(&ds, &cfg)?);
        manifests.push(manifest);
    }
    if reports.is_empty() {
        return Err(Error::invalid("no dataset could be loaded"));
    }

    let mut text = reports_to_table(&reports);
    text += "\naverage over datasets\n";
    for (label, acc, n) in average_by_label(&reports) {
        let _ = writeln!(text, "{label:<24} {acc:.4}  ({n} datasets)");
    }
    emit(out, &text)?;
    if let Some(dir) = &run.out {
        prepare_out(dir)?;
        write_file(&dir.join("compare.csv"), &reports_to_csv(&reports))?;
        for rep in &reports {
            for curve in &rep.sweeps {
                let name = format!("{}_sweep_{}.csv", rep.dataset, curve.kind);
                write_file(&dir.join(name), &curve.to_csv())?;
            }
        }
        write_file(&dir.join("config.txt"), &config_text(&base, &manifests))?;
    }
    Ok(())
}

/// Kernel scores on the toy problem with raw (unnormalised) distances.
fn toy_kernel_ratio(kappa: f64) -> Result<(f64, usize)> {
    let (x, y) = toy_data();
    let spec = ClassifierSpec::kappa_bayes(kappa).with_normalize(false);
    let model = fit(&spec, x.view(), &y, 2)?;
    let s = model.score(array![4.0].view())?;
    Ok((s.scores[0] / s.scores[1], s.predicted))
}

fn toy_data() -> (ndarray::Array2<f64>, Vec<usize>) {
    let x = array![[5.0], [10.0], [11.0], [1.0], [2.0], [7.0], [8.0]];
    (x, vec![0, 0, 0, 1, 1, 1, 1])
}

/// Smallest kappa at which the toy query flips to green, by bisection on the ratio.
pub fn toy_crossing() -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if toy_kernel_ratio(mid)?.0 > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Text printed by the `example` command.
pub fn example_report() -> Result<String> {
    const NAMES: [&str; 2] = ["green", "red"];
    let (x, y) = toy_data();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "training: green x = 5, 10, 11; red x = 1, 2, 7, 8; query x = 4 (truth: green)\n"
    );

    let laplace = fit(&ClassifierSpec::laplace_nb(), x.view(), &y, 2)?;
    let s = laplace.score(array![4.0].view())?;
    let _ = writeln!(out, "Laplace NB");
    let _ = writeln!(out, "  priors      green 4/9, red 5/9");
    let _ = writeln!(out, "  p(x=4 | c)  green 1/10, red 1/11");
    let _ = writeln!(
        out,
        "  products    green {:.6} (4/90), red {:.6} (5/99)",
        s.scores[0].exp(),
        s.scores[1].exp()
    );
    let _ = writeln!(out, "  Laplace → {}\n", NAMES[s.predicted]);

    let gauss = fit(&ClassifierSpec::gaussian_nb(), x.view(), &y, 2)?;
    let g = gauss.gaussian_params().expect("gaussian model");
    let s = gauss.score(array![4.0].view())?;
    let _ = writeln!(out, "Gaussian NB");
    for (c, name) in NAMES.iter().enumerate() {
        let prior = gauss.smoothed_prior(c).expect("prior");
        let _ = writeln!(
            out,
            "  {:<5}  mean {:.4}  sd {:.4}  density {:.4}  posterior {:.4}",
            name,
            g.mean(c, 0),
            g.variance(c, 0).sqrt(),
            s.scores[c].exp() / prior,
            s.scores[c].exp()
        );
    }
    let _ = writeln!(out, "  Gaussian → {}\n", NAMES[s.predicted]);

    let _ = writeln!(
        out,
        "Proposed, unnormalised distance, F(κ) = green sum / red sum"
    );
    for kappa in [1.0, 2.0, 5.0, 60.0] {
        let (ratio, predicted) = toy_kernel_ratio(kappa)?;
        let _ = writeln!(
            out,
            "  κ={kappa:<3} F = {ratio:.6e}  proposed κ={kappa} → {}",
            NAMES[predicted]
        );
    }
    let _ = writeln!(out, "  F crosses 1 at κ ≈ {:.4}", toy_crossing()?);
    Ok(out)
}
