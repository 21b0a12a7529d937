//! Fixed reference values, each checked against an independent oracle.

mod oracles;

use patrec::dataset::{gen_iris, relabel_one_vs_rest};
use patrec::eval::{kfolds, roc, roc_from_scores};
use patrec::preproc::{pca_train, zmuv_train};
use patrec::{ActionSpec, Execution, Transform};

fn iris_rows() -> Vec<Vec<f64>> {
    let iris = gen_iris();
    (0..iris.n_observations()).map(|i| iris.row(i)).collect()
}

#[test]
fn iris_tallies() {
    let iris = gen_iris();
    assert_eq!((iris.n_observations(), iris.n_features()), (150, 4));
    let labels = iris.class_labels().unwrap();
    assert_eq!(labels.counts().values().copied().collect::<Vec<_>>(), [50, 50, 50]);
    let setosa = labels.resolve("setosa").unwrap();
    let binary = relabel_one_vs_rest(&iris, setosa).unwrap();
    assert_eq!(binary.class_labels().unwrap().counts().values().copied().collect::<Vec<_>>(), [100, 50]);
}

#[test]
fn zmuv_matches_brute_force_std() {
    let iris = gen_iris();
    let state = zmuv_train(&iris).unwrap();
    let rows = iris_rows();
    for j in 0..4 {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        assert!((state.means[j] - oracles::mean(&col)).abs() < 1e-13);
        assert!((state.stds[j] - oracles::sample_std(&col)).abs() < 1e-13);
    }
}

#[test]
fn pca_spectrum_matches_jacobi() {
    let iris = gen_iris();
    let z = zmuv_train(&iris).unwrap().apply(&iris, Execution::Sequential).unwrap();
    let rows: Vec<Vec<f64>> = (0..150).map(|i| z.row(i)).collect();
    let (_, cov) = oracles::covariance(&rows);
    let ev = oracles::jacobi_eigenvalues(cov);
    assert!((ev.iter().sum::<f64>() - 4.0).abs() < 1e-12);

    let pca = pca_train(&z, 4).unwrap();
    for (a, b) in pca.eigenvalues.iter().zip(&ev) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    let two = pca_train(&z, 2).unwrap();
    let ratio = two.explained_variance_ratio();
    assert!((ratio - (ev[0] + ev[1]) / ev.iter().sum::<f64>()).abs() < 1e-8);
    assert!((ratio - 0.958_132_072_000_016_5).abs() < 1e-8);
}

#[test]
fn small_roc_example() {
    let scores = [0.1, 0.4, 0.35, 0.8];
    let truth = [false, false, true, true];
    let r = roc_from_scores(&scores, &truth).unwrap();
    assert_eq!(r.auc, 0.75);
    assert_eq!(r.auc, oracles::pairwise_auc(&scores, &truth));
}

#[test]
fn setosa_cross_validated_auc_matches_pairwise() {
    let iris = gen_iris();
    let setosa = iris.class_labels().unwrap().resolve("setosa").unwrap();
    let ds = relabel_one_vs_rest(&iris, setosa).unwrap();
    let algo = ActionSpec::Zmuv + ActionSpec::pca(2).unwrap() + ActionSpec::Map;
    let out = kfolds(&algo, &ds, 5, 42).unwrap();
    let truth: Vec<bool> = out.class_labels().unwrap().labels().iter().map(|&l| l == 1).collect();
    let r = roc(&out).unwrap();
    assert_eq!(r.auc, oracles::pairwise_auc(out.column(0), &truth));
    assert!((r.auc - 1.0).abs() < 1e-9);
}
