mod instances;
mod oracles;

use patrec::action::{par, seq};
use patrec::classify::{map_train, COVARIANCE_EPSILON};
use patrec::dsl::{compile, parse, print_canonical, DslError};
use patrec::eval::{assign_folds, confusion_at_threshold, cross_validate, kfolds, roc, roc_from_scores};
use patrec::preproc::zmuv_train;
use patrec::{ActionSpec, DataSet, Execution, TrainedAction, Transform};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rows(ds: &DataSet) -> Vec<Vec<f64>> {
    (0..ds.n_observations()).map(|i| ds.row(i)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn roc_auc_is_pairwise_statistic(seed in any::<u64>()) {
        let (scores, truth) = instances::roc_instance(&mut rng(seed));
        let r = roc_from_scores(&scores, &truth).unwrap();
        prop_assert!((r.auc - oracles::pairwise_auc(&scores, &truth)).abs() < 1e-12);
        prop_assert_eq!((r.pf[0], r.pd[0]), (0.0, 0.0));
        prop_assert_eq!((*r.pf.last().unwrap(), *r.pd.last().unwrap()), (1.0, 1.0));
        prop_assert!(r.pf.windows(2).all(|w| w[0] <= w[1]) && r.pd.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn roc_ignores_monotone_transforms(seed in any::<u64>()) {
        let (scores, truth) = instances::roc_instance(&mut rng(seed));
        let warped: Vec<f64> = scores.iter().map(|s| (2.0 * s).exp() - 7.0).collect();
        let mut idx: Vec<usize> = (0..scores.len()).collect();
        idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        prop_assume!(idx.windows(2).all(|w| (scores[w[0]] < scores[w[1]]) == (warped[w[0]] < warped[w[1]])));
        let a = roc_from_scores(&scores, &truth).unwrap();
        let b = roc_from_scores(&warped, &truth).unwrap();
        prop_assert_eq!(&a.pf, &b.pf);
        prop_assert_eq!(&a.pd, &b.pd);
        prop_assert_eq!(a.auc, b.auc);
    }

    #[test]
    fn confusion_reproduces_curve_points(seed in any::<u64>()) {
        let (scores, truth) = instances::roc_instance(&mut rng(seed));
        let ds = instances::binary_scored(&scores, &truth);
        let r = roc(&ds).unwrap();
        for (i, &t) in r.thresholds.iter().enumerate() {
            let c = confusion_at_threshold(&ds, t).unwrap();
            prop_assert_eq!(c.tp + c.fp + c.tn + c.fn_, scores.len());
            prop_assert_eq!(c.tp as f64 / r.n_positive as f64, r.pd[i]);
            prop_assert_eq!(c.fp as f64 / r.n_negative as f64, r.pf[i]);
        }
    }

    #[test]
    fn zmuv_standardizes_training_data(seed in any::<u64>()) {
        let ds = instances::zmuv_instance(&mut rng(seed));
        let state = zmuv_train(&ds).unwrap();
        let out = state.apply(&ds, Execution::Sequential).unwrap();
        for j in 0..ds.n_features() {
            let col = out.column(j);
            if state.stds[j] == 0.0 {
                prop_assert!(col.iter().all(|&x| x == 0.0));
            } else {
                prop_assert!(oracles::mean(col).abs() < 1e-10);
                prop_assert!((oracles::sample_std(col) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn map_matches_density_oracle(seed in any::<u64>(), d in 1usize..=3) {
        let ds = instances::gaussian_two_class(&mut rng(seed), 100, d);
        let labels = ds.class_labels().unwrap().labels().to_vec();
        let oracle = oracles::GaussianPosterior::fit(&rows(&ds), &labels, COVARIANCE_EPSILON);
        let state = map_train(&ds).unwrap();
        let out = state.apply(&ds, Execution::Parallel).unwrap();
        for i in 0..ds.n_observations() {
            let x = ds.row(i);
            let expect = oracle.posterior(&x);
            let got = state.posterior(&x).unwrap();
            prop_assert!((got[0] - expect[0]).abs() < 1e-10 && (got[1] - expect[1]).abs() < 1e-10);
            prop_assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert_eq!(out.row(i)[0], got[1]);
        }
    }

    #[test]
    fn sequential_is_associative(seed in any::<u64>()) {
        let ds = instances::gaussian_two_class(&mut rng(seed), 60, 3);
        let (a, b, c) = (ActionSpec::Zmuv, ActionSpec::pca(2).unwrap(), ActionSpec::Map);
        let left = seq(seq(a.clone(), b.clone()), c.clone()).train(&ds).unwrap().run(&ds).unwrap();
        let right = seq(a, seq(b, c)).train(&ds).unwrap().run(&ds).unwrap();
        prop_assert_eq!(left.observations(), right.observations());
    }

    #[test]
    fn parallel_twins_are_identical(seed in any::<u64>()) {
        let ds = instances::gaussian_two_class(&mut rng(seed), 60, 3);
        let spec = par(ActionSpec::pca(1).unwrap(), ActionSpec::pca(1).unwrap());
        let out = spec.train(&ds).unwrap().run(&ds).unwrap();
        prop_assert_eq!(out.n_features(), 2);
        prop_assert_eq!(out.column(0), out.column(1));
    }

    #[test]
    fn folds_partition_evenly(n in 2usize..300, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let k = 2 + ((n - 2) as f64 * k_frac) as usize;
        let folds = assign_folds(n, k, seed).unwrap();
        let sizes = folds.sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(&folds, &assign_folds(n, k, seed).unwrap());
    }

    #[test]
    fn dsl_round_trips(seed in any::<u64>()) {
        let spec = instances::random_spec(&mut rng(seed), 5);
        let text = print_canonical(&spec);
        prop_assert_eq!(compile(&text).unwrap(), spec, "{}", text);
    }

    #[test]
    fn dsl_error_spans_stay_in_bounds(text in "[a-z0-9()+/,=. \n-]{0,40}") {
        if let Err(e) = parse(&text) {
            let s = e.span();
            prop_assert!(s.start <= s.end && s.end <= text.len());
            if let DslError::Syntax { expected, .. } = e {
                prop_assert!(!expected.is_empty());
            }
        }
    }
}

#[test]
fn precedence_and_grouping() {
    assert_eq!(parse("a + b / c").unwrap().sexpr(), parse("a + (b / c)").unwrap().sexpr());
    assert_ne!(parse("a + b / c").unwrap().sexpr(), parse("(a + b) / c").unwrap().sexpr());
}

#[test]
fn kfolds_is_deterministic_and_schedule_free() {
    let ds = instances::blobs(&mut rng(5), 25, 2, 1.0);
    let algo = ActionSpec::Zmuv + ActionSpec::rvm(1.0).unwrap();
    let seq = cross_validate(&algo, &ds, 5, 9, Execution::Sequential).unwrap();
    let par = cross_validate(&algo, &ds, 5, 9, Execution::Parallel).unwrap();
    assert_eq!(seq.output.observations(), par.output.observations());
    assert_eq!(seq.models, par.models);
    assert_eq!(kfolds(&algo, &ds, 5, 9).unwrap().observations(), seq.output.observations());
    assert_eq!(seq.output.observation_ids(), ds.observation_ids());
}

#[test]
fn leave_one_out_never_sees_the_scored_point() {
    let ds = instances::gaussian_two_class(&mut rng(11), 12, 1);
    let n = ds.n_observations();
    let cv = cross_validate(&ActionSpec::Zmuv, &ds, n, 3, Execution::Sequential).unwrap();
    for f in 0..n {
        let TrainedAction::Zmuv(z) = &cv.models[f] else { panic!() };
        let held = cv.folds.members(f)[0];
        let rest: Vec<f64> = (0..n).filter(|&i| i != held).map(|i| ds.row(i)[0]).collect();
        assert!((z.means[0] - oracles::mean(&rest)).abs() < 1e-12);
    }
}

#[test]
fn composites_go_wherever_leaves_go() {
    let ds = instances::gaussian_two_class(&mut rng(2), 60, 3);
    let leaf = kfolds(&ActionSpec::Map, &ds, 4, 1).unwrap();
    let fused = (ActionSpec::Map / (ActionSpec::Zmuv + ActionSpec::Map)) + ActionSpec::Map;
    let composite = kfolds(&fused, &ds, 4, 1).unwrap();
    assert_eq!(leaf.n_observations(), composite.n_observations());
    assert_eq!(composite.feature_names(), ["score"]);
}

#[test]
fn trained_json_round_trip_is_bit_exact() {
    let ds = instances::blobs(&mut rng(8), 20, 3, 1.5);
    let algo = compile("zmuv + pca(2) / map + rvm(bandwidth=0.7)").unwrap();
    let trained = algo.train(&ds).unwrap();
    let json = serde_json::to_string(&trained).unwrap();
    let back: TrainedAction = serde_json::from_str(&json).unwrap();
    assert_eq!(back, trained);
    assert_eq!(back.run(&ds).unwrap().observations(), trained.run(&ds).unwrap().observations());
}

#[test]
fn map_argmax_follows_log_joint() {
    let iris = patrec::dataset::gen_iris();
    let state = map_train(&iris).unwrap();
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    for i in 0..iris.n_observations() {
        let x = iris.row(i);
        let lj = state.log_joint(&x).unwrap();
        let post = state.posterior(&x).unwrap();
        assert_eq!(argmax(&post), argmax(&lj));
        let shifted: Vec<f64> = lj.iter().map(|l| l + 123.0).collect();
        assert_eq!(argmax(&shifted), argmax(&lj));
        assert!(post.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
