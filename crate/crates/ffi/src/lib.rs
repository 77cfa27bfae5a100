//! C ABI over the `kbayes` classifiers.
//!
//! Objects are opaque handles created by `kb_*_new`/`_parse`/`_load`/`_fit` calls and
//! released with the matching `_free`. Fallible calls return a [`KbStatus`]; on failure
//! `kb_last_error()` describes the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kbayes::classifiers::{fit, ClassifierSpec, FittedModel};
use kbayes::dataset::{Dataset, DatasetManifest};
use kbayes::evaluation::{cross_validate, ExperimentConfig};
use kbayes::Error;
use ndarray::ArrayView2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Dimension = 5,
    Panic = 6,
}

/// Classifier kind and hyperparameters.
pub struct KbSpec(ClassifierSpec);

/// Encoded dataset: numeric attribute matrix plus class ids.
pub struct KbDataset(Dataset);

pub struct KbModel(FittedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> KbStatus {
    match err {
        Error::Io { .. } => KbStatus::Io,
        Error::Csv(_) | Error::MalformedRow { .. } | Error::Config { .. } | Error::EmptyDataset => {
            KbStatus::Parse
        }
        Error::Dimension { .. } | Error::IndexOutOfBounds { .. } => KbStatus::Dimension,
        Error::InvalidParameter(_) => KbStatus::InvalidArgument,
    }
}

fn fail(status: KbStatus, msg: impl Into<String>) -> KbStatus {
    set_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), KbStatus>) -> KbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KbStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(KbStatus::Panic, "internal panic"),
    }
}

fn lib_err(err: Error) -> KbStatus {
    fail(status_of(&err), err.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, KbStatus> {
    if p.is_null() {
        return Err(fail(KbStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(KbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, KbStatus> {
    p.as_ref()
        .ok_or_else(|| fail(KbStatus::NullPointer, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), KbStatus> {
    if p.is_null() {
        Err(fail(KbStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn matrix<'a>(
    p: *const f64,
    rows: usize,
    cols: usize,
) -> Result<ArrayView2<'a, f64>, KbStatus> {
    if p.is_null() {
        return Err(fail(KbStatus::NullPointer, "matrix pointer is null"));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| fail(KbStatus::InvalidArgument, "matrix size overflows"))?;
    let data = std::slice::from_raw_parts(p, len);
    ArrayView2::from_shape((rows, cols), data)
        .map_err(|e| fail(KbStatus::InvalidArgument, e.to_string()))
}

/// Message for the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn kb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a `key = value` classifier block (`kind` required).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_spec_parse(text: *const c_char, out: *mut *mut KbSpec) -> KbStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let spec = ClassifierSpec::from_kv(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(KbSpec(spec)));
        Ok(())
    })
}

/// # Safety
/// `spec` must come from `kb_spec_parse` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn kb_spec_free(spec: *mut KbSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Loads the dataset described by a manifest file. The manifest's feature subset is
/// applied.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_dataset_load_manifest(
    path: *const c_char,
    out: *mut *mut KbDataset,
) -> KbStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let manifest = DatasetManifest::from_file(path).map_err(lib_err)?;
        let mut ds = manifest.load().map_err(lib_err)?;
        if let Some(subset) = &manifest.feature_subset {
            ds = ds.select_features(subset).map_err(lib_err)?;
        }
        *out = Box::into_raw(Box::new(KbDataset(ds)));
        Ok(())
    })
}

/// Builds a dataset from a row-major `rows x cols` matrix and `rows` class ids.
///
/// # Safety
/// `x` must hold `rows * cols` doubles, `y` `rows` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_dataset_from_arrays(
    x: *const f64,
    rows: usize,
    cols: usize,
    y: *const usize,
    n_classes: usize,
    out: *mut *mut KbDataset,
) -> KbStatus {
    guard(|| {
        out_arg(out, "out")?;
        let view = matrix(x, rows, cols)?;
        if y.is_null() {
            return Err(fail(KbStatus::NullPointer, "y is null"));
        }
        let labels = std::slice::from_raw_parts(y, rows).to_vec();
        let ds = Dataset::from_parts(view.to_owned(), labels, n_classes).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(KbDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be a live dataset handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn kb_dataset_rows(ds: *const KbDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_samples())
}

/// # Safety
/// `ds` must be a live dataset handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn kb_dataset_cols(ds: *const KbDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_features())
}

/// # Safety
/// `ds` must be a live dataset handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn kb_dataset_n_classes(ds: *const KbDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_classes())
}

/// New dataset with the listed attribute columns, in the given order.
///
/// # Safety
/// `indices` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_dataset_select_features(
    ds: *const KbDataset,
    indices: *const usize,
    n: usize,
    out: *mut *mut KbDataset,
) -> KbStatus {
    guard(|| {
        out_arg(out, "out")?;
        let ds = ref_arg(ds, "ds")?;
        if indices.is_null() {
            return Err(fail(KbStatus::NullPointer, "indices is null"));
        }
        let idx = std::slice::from_raw_parts(indices, n);
        let sub = ds.0.select_features(idx).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(KbDataset(sub)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be a dataset handle not used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn kb_dataset_free(ds: *mut KbDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Trains on every row of `ds`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_model_fit(
    spec: *const KbSpec,
    ds: *const KbDataset,
    out: *mut *mut KbModel,
) -> KbStatus {
    guard(|| {
        out_arg(out, "out")?;
        let spec = ref_arg(spec, "spec")?;
        let ds = ref_arg(ds, "ds")?;
        let model = fit(&spec.0, ds.0.x.view(), &ds.0.y, ds.0.n_classes()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(KbModel(model)));
        Ok(())
    })
}

/// Predicts a class id for each row of a row-major `rows x cols` matrix.
///
/// # Safety
/// `x` must hold `rows * cols` doubles and `labels` room for `rows` values.
#[no_mangle]
pub unsafe extern "C" fn kb_model_predict(
    model: *const KbModel,
    x: *const f64,
    rows: usize,
    cols: usize,
    labels: *mut usize,
) -> KbStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        out_arg(labels, "labels")?;
        let view = matrix(x, rows, cols)?;
        let predicted = model.0.predict(view).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(labels, rows).copy_from_slice(&predicted);
        Ok(())
    })
}

/// Per-class scores for one query row. Naive Bayes kinds report natural logs.
///
/// # Safety
/// `x` must hold `cols` doubles, `scores` room for `n_scores` values (at least the
/// class count); `predicted` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn kb_model_score(
    model: *const KbModel,
    x: *const f64,
    cols: usize,
    scores: *mut f64,
    n_scores: usize,
    predicted: *mut usize,
) -> KbStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        out_arg(scores, "scores")?;
        let view = matrix(x, 1, cols)?;
        let s = model.0.score(view.row(0)).map_err(lib_err)?;
        if n_scores < s.scores.len() {
            return Err(fail(
                KbStatus::Dimension,
                format!("scores buffer holds {n_scores}, need {}", s.scores.len()),
            ));
        }
        std::slice::from_raw_parts_mut(scores, s.scores.len()).copy_from_slice(&s.scores);
        if !predicted.is_null() {
            *predicted = s.predicted;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be a model handle not used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn kb_model_free(model: *mut KbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Resampled k-fold cross-validation; writes the mean accuracy over resamples and,
/// when `per_resample` is not NULL, each resample's accuracy (`resamples` values).
///
/// # Safety
/// Handles must be live; `mean` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kb_cross_validate(
    spec: *const KbSpec,
    ds: *const KbDataset,
    folds: usize,
    resamples: usize,
    seed: u64,
    stratified: bool,
    mean: *mut f64,
    per_resample: *mut f64,
) -> KbStatus {
    guard(|| {
        let spec = ref_arg(spec, "spec")?;
        let ds = ref_arg(ds, "ds")?;
        out_arg(mean, "mean")?;
        let cfg = ExperimentConfig {
            folds,
            resamples,
            base_seed: seed,
            stratified,
            specs: vec![spec.0.clone()],
            ..Default::default()
        };
        let outcome = cross_validate(&ds.0, &spec.0, &cfg).map_err(lib_err)?;
        *mean = outcome.mean_accuracy();
        if !per_resample.is_null() {
            std::slice::from_raw_parts_mut(per_resample, resamples)
                .copy_from_slice(&outcome.resample_accuracies);
        }
        Ok(())
    })
}
