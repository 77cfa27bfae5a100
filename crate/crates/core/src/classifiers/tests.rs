use approx::assert_abs_diff_eq;
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;

use super::*;

const GREEN: usize = 0;
const RED: usize = 1;

/// Seven-sample training pool: green {5, 10, 11}, red {1, 2, 7, 8}; query x = 4.
fn toy() -> (Array2<f64>, Vec<usize>) {
    let x = Array2::from_shape_vec((7, 1), vec![5.0, 10.0, 11.0, 1.0, 2.0, 7.0, 8.0]).unwrap();
    (x, vec![GREEN, GREEN, GREEN, RED, RED, RED, RED])
}

fn query() -> Array1<f64> {
    array![4.0]
}

/// Green-to-red kernel ratio evaluated straight from the closed form.
fn ratio_oracle(k: f64) -> f64 {
    let p = |b: f64| b.powf(-k);
    (p(2.0) + p(7.0) + p(8.0)) / (p(4.0) + p(3.0) + p(4.0) + p(5.0))
}

#[test]
fn laplace_toy_values() {
    let (x, y) = toy();
    let model = fit(&ClassifierSpec::laplace_nb(), x.view(), &y, 2).unwrap();
    assert_abs_diff_eq!(
        model.smoothed_prior(GREEN).unwrap(),
        4.0 / 9.0,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        model.smoothed_prior(RED).unwrap(),
        5.0 / 9.0,
        epsilon = 1e-15
    );
    let t = model.laplace_tables().unwrap();
    assert_eq!(t.distinct_values(0), 7);
    assert_abs_diff_eq!(t.conditional(0, 4.0, GREEN, 3), 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(t.conditional(0, 4.0, RED, 4), 1.0 / 11.0, epsilon = 1e-15);

    let s = model.score(query().view()).unwrap();
    assert!(s.log_space);
    assert_abs_diff_eq!(s.scores[GREEN].exp(), 4.0 / 90.0, epsilon = 1e-15);
    assert_abs_diff_eq!(s.scores[RED].exp(), 5.0 / 99.0, epsilon = 1e-15);
    assert_eq!(s.predicted, RED);
}

#[test]
fn gaussian_toy_values() {
    let (x, y) = toy();
    let model = fit(&ClassifierSpec::gaussian_nb(), x.view(), &y, 2).unwrap();
    let g = model.gaussian_params().unwrap();
    assert_abs_diff_eq!(g.mean(GREEN, 0), 26.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(g.variance(GREEN, 0).sqrt(), 2.6247, epsilon = 1e-4);
    assert_abs_diff_eq!(g.mean(RED, 0), 4.5, epsilon = 1e-12);
    assert_abs_diff_eq!(g.variance(RED, 0).sqrt(), 3.0414, epsilon = 1e-4);

    let s = model.score(query().view()).unwrap();
    let green = s.scores[GREEN].exp();
    let red = s.scores[RED].exp();
    // densities times the smoothed priors 4/9 and 5/9
    assert_abs_diff_eq!(
        green / (4.0 / 9.0),
        0.031_287_438_172_044_32,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(red / (5.0 / 9.0), 0.129_410_750_278_417_36, epsilon = 1e-12);
    assert_abs_diff_eq!(green, 0.014, epsilon = 1e-3);
    assert_abs_diff_eq!(red, 0.0718, epsilon = 1e-3);
    assert_eq!(s.predicted, RED);
}

#[test]
fn gaussian_constant_column_uses_floor() {
    let x = array![[2.0, 1.0], [2.0, 3.0], [2.0, 5.0]];
    let model = fit(&ClassifierSpec::gaussian_nb(), x.view(), &[0, 0, 0], 1).unwrap();
    let g = model.gaussian_params().unwrap();
    assert_eq!(g.variance(0, 0), 1e-9);
    let s = model.score(array![2.5, 2.0].view()).unwrap();
    assert!(s.scores[0].is_finite());
}

#[test]
fn kappa_toy_sums_and_ratio() {
    let (x, y) = toy();
    for kappa in [1.0, 2.0] {
        let spec = ClassifierSpec::kappa_bayes(kappa).with_normalize(false);
        let model = fit(&spec, x.view(), &y, 2).unwrap();
        let s = model.score(query().view()).unwrap();
        assert!(!s.log_space);
        let p = |b: f64| b.powf(-kappa);
        assert_abs_diff_eq!(s.scores[GREEN], p(2.0) + p(7.0) + p(8.0), epsilon = 1e-15);
        assert_abs_diff_eq!(
            s.scores[RED],
            2.0 * p(4.0) + p(3.0) + p(5.0),
            epsilon = 1e-15
        );
    }
    let score_ratio = |kappa: f64| {
        let spec = ClassifierSpec::kappa_bayes(kappa).with_normalize(false);
        let s = fit(&spec, x.view(), &y, 2)
            .unwrap()
            .score(query().view())
            .unwrap();
        (s.scores[GREEN] / s.scores[RED], s.predicted)
    };
    let (f1, p1) = score_ratio(1.0);
    assert_abs_diff_eq!(f1, 0.743_087_557_603_686_6, epsilon = 1e-12);
    assert_eq!(p1, RED);
    let (f2, p2) = score_ratio(2.0);
    assert_abs_diff_eq!(f2, 1.035_934_997_741_551_5, epsilon = 1e-12);
    assert_eq!(p2, GREEN);
    assert_eq!(score_ratio(60.0).1, GREEN);
}

#[test]
fn kappa_ratio_matches_closed_form_for_integer_kappas() {
    let (x, y) = toy();
    for kappa in 1..=100 {
        let kappa = f64::from(kappa);
        let spec = ClassifierSpec::kappa_bayes(kappa).with_normalize(false);
        let s = fit(&spec, x.view(), &y, 2)
            .unwrap()
            .score(query().view())
            .unwrap();
        let ratio = s.scores[GREEN] / s.scores[RED];
        let expected = ratio_oracle(kappa);
        assert!((ratio - expected).abs() <= 1e-9 * expected, "kappa {kappa}");
        assert_eq!(
            s.predicted,
            if kappa >= 2.0 { GREEN } else { RED },
            "kappa {kappa}"
        );
    }
}

#[test]
fn kappa_zero_scores_are_class_counts() {
    let (x, y) = toy();
    let model = fit(&ClassifierSpec::kappa_bayes(0.0), x.view(), &y, 2).unwrap();
    let s = model.score(query().view()).unwrap();
    assert_eq!(s.scores, vec![3.0, 4.0]);
    assert_eq!(s.predicted, RED);
}

#[test]
fn ties_prefer_larger_class_then_smaller_id() {
    assert_eq!(select_class(&[1.0, 1.0, 1.0], &[2, 5, 5]), 1);
    assert_eq!(select_class(&[1.0, 1.0], &[3, 3]), 0);
    assert_eq!(select_class(&[0.0, 2.0], &[3, 0]), 0);
}

#[test]
fn empty_class_is_never_predicted() {
    let x = array![[0.0], [1.0]];
    let model = fit(&ClassifierSpec::laplace_nb(), x.view(), &[1, 1], 3).unwrap();
    let s = model.score(array![5.0].view()).unwrap();
    assert_eq!(s.predicted, 1);
    assert_eq!(s.scores[0], f64::NEG_INFINITY);
    let model = fit(&ClassifierSpec::gaussian_nb(), x.view(), &[1, 1], 3).unwrap();
    assert_eq!(model.score(array![5.0].view()).unwrap().predicted, 1);
}

#[test]
fn knn_on_training_point_returns_its_class() {
    let x = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 5.0]];
    let y = [0, 0, 1, 1];
    let model = fit(&ClassifierSpec::knn(1), x.view(), &y, 2).unwrap();
    for (i, row) in x.rows().into_iter().enumerate() {
        assert_eq!(model.score(row).unwrap().predicted, y[i]);
    }
}

#[test]
fn fit_errors() {
    let x = Array2::<f64>::zeros((0, 2));
    assert!(matches!(
        fit(&ClassifierSpec::gaussian_nb(), x.view(), &[], 2),
        Err(Error::EmptyDataset)
    ));
    let x = array![[0.0], [1.0]];
    assert!(fit(&ClassifierSpec::knn(3), x.view(), &[0, 1], 2).is_err());
    assert!(fit(&ClassifierSpec::knn(2), x.view(), &[0], 2).is_err());
    assert!(fit(&ClassifierSpec::knn(2), x.view(), &[0, 2], 2).is_err());
    assert!(fit(&ClassifierSpec::kappa_bayes(-1.0), x.view(), &[0, 1], 2).is_err());
}

#[test]
fn score_dimension_mismatch() {
    let (x, y) = toy();
    for spec in [
        ClassifierSpec::kappa_bayes(2.0),
        ClassifierSpec::laplace_nb(),
        ClassifierSpec::gaussian_nb(),
        ClassifierSpec::knn(3),
    ] {
        let model = fit(&spec, x.view(), &y, 2).unwrap();
        assert!(matches!(
            model.score(array![1.0, 2.0].view()),
            Err(Error::Dimension {
                expected: 1,
                found: 2
            })
        ));
        assert!(model.predict(Array2::zeros((2, 3)).view()).is_err());
    }
}

#[test]
fn predict_matches_score_row_by_row() {
    let (x, y) = toy();
    let model = fit(&ClassifierSpec::kappa_bayes(3.0), x.view(), &y, 2).unwrap();
    let test = array![[4.0], [9.5], [0.0]];
    let labels = model.predict(test.view()).unwrap();
    for (i, row) in test.rows().into_iter().enumerate() {
        assert_eq!(labels[i], model.score(row).unwrap().predicted);
    }
    assert_eq!(labels, model.predict_parallel(test.view()).unwrap());
}

#[test]
fn m_estimate_conditional() {
    let (x, y) = toy();
    let spec = ClassifierSpec {
        m_estimate: Some(1.0),
        ..ClassifierSpec::laplace_nb()
    };
    let model = fit(&spec, x.view(), &y, 2).unwrap();
    let t = model.laplace_tables().unwrap();
    // unseen value: q = 1 / (7 + 7)
    assert_abs_diff_eq!(
        t.conditional(0, 4.0, GREEN, 3),
        (1.0 / 14.0) / 4.0,
        epsilon = 1e-15
    );
    // seen once, in green: q = 2 / 14
    assert_abs_diff_eq!(
        t.conditional(0, 5.0, GREEN, 3),
        (1.0 + 2.0 / 14.0) / 4.0,
        epsilon = 1e-15
    );
}

#[test]
fn spec_kv_round_trip_and_errors() {
    let spec = ClassifierSpec {
        m_estimate: Some(2.5),
        ..ClassifierSpec::kappa_bayes(12.5).with_normalize(false)
    };
    assert_eq!(ClassifierSpec::from_kv(&spec.to_kv()).unwrap(), spec);
    let knn = ClassifierSpec::from_kv("kind = knn\nk_neighbors = 7\n").unwrap();
    assert_eq!(knn, ClassifierSpec::knn(7));
    assert!(ClassifierSpec::from_kv("kappa = 3\n").is_err());
    assert!(ClassifierSpec::from_kv("kind = svm\n").is_err());
    assert!(ClassifierSpec::from_kv("kind = knn\nk_neighbors = 0\n").is_err());
    assert!(ClassifierSpec::from_kv("kind = knn\nwidth = 2\n").is_err());
}

/// Direct double loop over the training rows, written independently of `kernel`.
fn naive_kernel_scores(
    x: &Array2<f64>,
    y: &[usize],
    q: &[f64],
    kappa: f64,
    n_classes: usize,
) -> Vec<f64> {
    let n = x.ncols();
    let mut ranges = vec![0.0; n];
    for j in 0..n {
        let col: Vec<f64> = (0..x.nrows()).map(|i| x[[i, j]]).collect();
        let hi = col.iter().cloned().fold(f64::MIN, f64::max);
        let lo = col.iter().cloned().fold(f64::MAX, f64::min);
        ranges[j] = hi - lo;
    }
    let mut out = vec![0.0; n_classes];
    for i in 0..x.nrows() {
        let mut acc = 0.0;
        for j in 0..n {
            if ranges[j] > 0.0 {
                acc += ((x[[i, j]] - q[j]) / ranges[j]).powi(2);
            }
        }
        out[y[i]] += 1.0 / (1.0 + acc.sqrt()).powf(kappa);
    }
    out
}

/// Full sort of all training rows by (distance, index), then a vote over the first k.
fn brute_force_knn(x: &Array2<f64>, y: &[usize], q: &[f64], k: usize, n_classes: usize) -> usize {
    let model_ranges = crate::distance::compute_ranges(x.view()).unwrap();
    let cfg = DistanceConfig { normalize: true };
    let mut all: Vec<(f64, usize)> = (0..x.nrows())
        .map(|i| {
            let d = crate::distance::distance(
                x.row(i),
                ndarray::ArrayView1::from(q),
                &model_ranges,
                cfg,
            )
            .unwrap();
            (d, i)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; n_classes];
    for &(_, i) in &all[..k] {
        votes[y[i]] += 1;
    }
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    (0..n_classes)
        .filter(|&c| counts[c] > 0)
        .max_by(|&a, &b| {
            votes[a]
                .cmp(&votes[b])
                .then(counts[a].cmp(&counts[b]))
                .then(b.cmp(&a))
        })
        .unwrap()
}

fn instance() -> impl Strategy<Value = (Array2<f64>, Vec<usize>, Vec<f64>)> {
    (4usize..30, 1usize..4).prop_flat_map(|(m, n)| {
        (
            proptest::collection::vec(-5i32..5, m * n),
            proptest::collection::vec(0usize..3, m),
            proptest::collection::vec(-6i32..6, n),
        )
            .prop_map(move |(xs, y, q)| {
                let x = Array2::from_shape_vec((m, n), xs.into_iter().map(f64::from).collect())
                    .unwrap();
                (x, y, q.into_iter().map(f64::from).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_scores_match_naive_loop((x, y, q) in instance(), kappa in 0.0f64..30.0) {
        let model = fit(&ClassifierSpec::kappa_bayes(kappa), x.view(), &y, 3).unwrap();
        let got = model.score(Array1::from(q.clone()).view()).unwrap().scores;
        let want = naive_kernel_scores(&x, &y, &q, kappa, 3);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * w.abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn knn_matches_full_sort((x, y, q) in instance(), k in 1usize..6) {
        prop_assume!(k <= x.nrows());
        let model = fit(&ClassifierSpec::knn(k), x.view(), &y, 3).unwrap();
        let got = model.score(Array1::from(q.clone()).view()).unwrap().predicted;
        prop_assert_eq!(got, brute_force_knn(&x, &y, &q, k, 3));
    }

    #[test]
    fn nb_scores_are_finite((x, y, q) in instance()) {
        let q = Array1::from(q);
        let lap = fit(&ClassifierSpec::laplace_nb(), x.view(), &y, 3).unwrap().score(q.view()).unwrap();
        let gau = fit(&ClassifierSpec::gaussian_nb(), x.view(), &y, 3).unwrap().score(q.view()).unwrap();
        for c in 0..3 {
            if y.contains(&c) {
                prop_assert!(lap.scores[c].is_finite());
                prop_assert!(!gau.scores[c].is_nan());
            }
        }
    }

    #[test]
    fn huge_kappa_picks_majority_among_exact_matches(
        (x, y, _) in instance(),
        pick in any::<prop::sample::Index>(),
    ) {
        let q = x.row(pick.index(x.nrows())).to_owned();
        let model = fit(&ClassifierSpec::kappa_bayes(1e4), x.view(), &y, 3).unwrap();
        let got = model.score(q.view()).unwrap().predicted;
        let mut exact = [0usize; 3];
        for (i, row) in x.rows().into_iter().enumerate() {
            if row == q { exact[y[i]] += 1; }
        }
        let best = *exact.iter().max().unwrap();
        prop_assert_eq!(exact[got], best);
    }
}
