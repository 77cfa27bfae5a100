use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use kbayes_ffi::*;

const HEADER: &str = include_str!("../include/kbayes.h");

fn last_error() -> String {
    let p = kb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn spec(text: &str) -> *mut KbSpec {
    let text = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { kb_spec_parse(text.as_ptr(), &mut out) },
        KbStatus::Ok
    );
    out
}

fn toy() -> *mut KbDataset {
    let x = [5.0, 10.0, 11.0, 1.0, 2.0, 7.0, 8.0];
    let y = [0usize, 0, 0, 1, 1, 1, 1];
    let mut out = ptr::null_mut();
    let status = unsafe { kb_dataset_from_arrays(x.as_ptr(), 7, 1, y.as_ptr(), 2, &mut out) };
    assert_eq!(status, KbStatus::Ok);
    out
}

#[test]
fn toy_round_trip() {
    let ds = toy();
    unsafe {
        assert_eq!(kb_dataset_rows(ds), 7);
        assert_eq!(kb_dataset_cols(ds), 1);
        assert_eq!(kb_dataset_n_classes(ds), 2);
    }
    for (text, expected) in [
        ("kind = laplace_nb", 1usize),
        ("kind = gaussian_nb", 1),
        ("kind = kappa_bayes\nkappa = 1\nnormalize = false", 1),
        ("kind = kappa_bayes\nkappa = 60\nnormalize = false", 0),
    ] {
        let s = spec(text);
        let mut model = ptr::null_mut();
        unsafe {
            assert_eq!(kb_model_fit(s, ds, &mut model), KbStatus::Ok);
            let q = [4.0];
            let mut label = usize::MAX;
            assert_eq!(
                kb_model_predict(model, q.as_ptr(), 1, 1, &mut label),
                KbStatus::Ok
            );
            assert_eq!(label, expected, "{text}");
            let mut scores = [0.0; 2];
            let mut predicted = usize::MAX;
            let st = kb_model_score(model, q.as_ptr(), 1, scores.as_mut_ptr(), 2, &mut predicted);
            assert_eq!(st, KbStatus::Ok);
            assert_eq!(predicted, expected);
            kb_model_free(model);
            kb_spec_free(s);
        }
    }
    unsafe { kb_dataset_free(ds) };
}

#[test]
fn laplace_scores_are_logs_of_golden_products() {
    let ds = toy();
    let s = spec("kind = laplace_nb");
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(kb_model_fit(s, ds, &mut model), KbStatus::Ok);
        let mut scores = [0.0; 2];
        let q = [4.0];
        let st = kb_model_score(
            model,
            q.as_ptr(),
            1,
            scores.as_mut_ptr(),
            2,
            ptr::null_mut(),
        );
        assert_eq!(st, KbStatus::Ok);
        assert!((scores[0].exp() - 4.0 / 90.0).abs() < 1e-15);
        assert!((scores[1].exp() - 5.0 / 99.0).abs() < 1e-15);

        let mut short = [0.0; 1];
        let st = kb_model_score(model, q.as_ptr(), 1, short.as_mut_ptr(), 1, ptr::null_mut());
        assert_eq!(st, KbStatus::Dimension);
        let wide = [4.0, 1.0];
        let mut label = 0;
        assert_eq!(
            kb_model_predict(model, wide.as_ptr(), 1, 2, &mut label),
            KbStatus::Dimension
        );
        kb_model_free(model);
        kb_spec_free(s);
        kb_dataset_free(ds);
    }
}

#[test]
fn error_codes() {
    let mut out = ptr::null_mut();
    let bad = CString::new("kind = nope").unwrap();
    assert_eq!(
        unsafe { kb_spec_parse(bad.as_ptr(), &mut out) },
        KbStatus::InvalidArgument
    );
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { kb_spec_parse(ptr::null(), &mut out) },
        KbStatus::NullPointer
    );
    let missing = CString::new("/nonexistent/x.manifest").unwrap();
    let mut ds = ptr::null_mut();
    assert_eq!(
        unsafe { kb_dataset_load_manifest(missing.as_ptr(), &mut ds) },
        KbStatus::Io
    );
    assert!(last_error().contains("nonexistent"));

    let s = spec("kind = knn\nk = 3");
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { kb_model_fit(s, ptr::null(), &mut model) },
        KbStatus::NullPointer
    );
    unsafe { kb_spec_free(s) };

    let y = [0usize, 5];
    let x = [0.0, 1.0];
    assert_eq!(
        unsafe { kb_dataset_from_arrays(x.as_ptr(), 2, 1, y.as_ptr(), 2, &mut ds) },
        KbStatus::Dimension
    );
    let nan = [f64::NAN, 1.0];
    let ok_y = [0usize, 1];
    assert_eq!(
        unsafe { kb_dataset_from_arrays(nan.as_ptr(), 2, 1, ok_y.as_ptr(), 2, &mut ds) },
        KbStatus::InvalidArgument
    );
    unsafe {
        kb_spec_free(ptr::null_mut());
        kb_dataset_free(ptr::null_mut());
        kb_model_free(ptr::null_mut());
        assert_eq!(kb_dataset_rows(ptr::null()), 0);
    }
}

#[test]
fn success_clears_last_error() {
    let bad = CString::new("kind = nope").unwrap();
    let mut out = ptr::null_mut();
    unsafe { kb_spec_parse(bad.as_ptr(), &mut out) };
    assert!(!kb_last_error().is_null());
    let s = spec("kind = gaussian_nb");
    assert!(kb_last_error().is_null());
    unsafe { kb_spec_free(s) };
}

#[test]
fn manifest_and_cross_validation() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../datasets/iris.manifest");
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(
            kb_dataset_load_manifest(path.as_ptr(), &mut ds),
            KbStatus::Ok
        );
        assert_eq!(kb_dataset_rows(ds), 150);
        assert_eq!(kb_dataset_cols(ds), 2);
        assert_eq!(kb_dataset_n_classes(ds), 3);

        let idx = [1usize];
        let mut one = ptr::null_mut();
        assert_eq!(
            kb_dataset_select_features(ds, idx.as_ptr(), 1, &mut one),
            KbStatus::Ok
        );
        assert_eq!(kb_dataset_cols(one), 1);
        kb_dataset_free(one);

        let s = spec("kind = gaussian_nb");
        let mut mean = 0.0;
        let mut each = [0.0; 3];
        let st = kb_cross_validate(s, ds, 10, 3, 0, false, &mut mean, each.as_mut_ptr());
        assert_eq!(st, KbStatus::Ok);
        assert!((mean - each.iter().sum::<f64>() / 3.0).abs() < 1e-12);
        assert!(mean > 0.9);
        let st = kb_cross_validate(s, ds, 1, 3, 0, false, &mut mean, ptr::null_mut());
        assert_eq!(st, KbStatus::InvalidArgument);
        kb_spec_free(s);
        kb_dataset_free(ds);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(kb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    for name in [
        "typedef struct KbSpec KbSpec;",
        "typedef struct KbDataset KbDataset;",
        "typedef struct KbModel KbModel;",
        "KB_STATUS_OK = 0",
        "KB_STATUS_PANIC",
        "kb_last_error(void)",
        "kb_version(void)",
        "kb_spec_parse(",
        "kb_spec_free(",
        "kb_dataset_load_manifest(",
        "kb_dataset_from_arrays(",
        "kb_dataset_rows(",
        "kb_dataset_cols(",
        "kb_dataset_n_classes(",
        "kb_dataset_select_features(",
        "kb_dataset_free(",
        "kb_model_fit(",
        "kb_model_predict(",
        "kb_model_score(",
        "kb_model_free(",
        "kb_cross_validate(",
    ] {
        assert!(HEADER.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(cc.status.success());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"kbayes.h\"\nint main(void) { KbSpec *s = 0; return kb_spec_parse(\"kind = knn\", &s) == KB_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi-header");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
