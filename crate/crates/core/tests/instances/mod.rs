//! Seeded random problem instances shared by the property and acceptance tests.
#![allow(dead_code)]

use patrec::action::RvmParams;
use patrec::classify::{IterationLimits, Kernel};
use patrec::{ActionSpec, ClassLabels, DataSet, Targets};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn normal(rng: &mut impl Rng) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Scores and truth with both classes present; about half the instances
/// draw scores from a small pool so that ties are common.
pub fn roc_instance(rng: &mut impl Rng) -> (Vec<f64>, Vec<bool>) {
    let n = rng.random_range(2..=200);
    let mut truth: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    truth[0] = true;
    truth[1] = false;
    let pool: Vec<f64> = (0..rng.random_range(1..=8)).map(|_| rng.random()).collect();
    let tied = rng.random_bool(0.5);
    let scores = truth
        .iter()
        .map(|&t| if tied { *pool.choose(rng).unwrap() } else { normal(rng) + if t { 0.7 } else { 0.0 } })
        .collect();
    (scores, truth)
}

pub fn binary_scored(scores: &[f64], truth: &[bool]) -> DataSet {
    let rows: Vec<[f64; 1]> = scores.iter().map(|&s| [s]).collect();
    DataSet::from_rows(&rows, 1)
        .unwrap()
        .with_feature_names(vec!["score".into()])
        .unwrap()
        .with_targets(Targets::Classes(
            ClassLabels::new(truth.iter().map(|&t| i64::from(t)).collect(), vec![0, 1]).unwrap(),
        ))
        .unwrap()
}

/// Unlabeled data with varied offsets and scales; some columns constant.
pub fn zmuv_instance(rng: &mut impl Rng) -> DataSet {
    let n = rng.random_range(2..=80);
    let d = rng.random_range(1..=6);
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|_| {
            let offset = rng.random_range(-100.0..100.0);
            if rng.random_bool(0.2) {
                vec![offset; n]
            } else {
                let scale = 10f64.powf(rng.random_range(-1.0..1.0));
                (0..n).map(|_| offset + scale * normal(rng)).collect()
            }
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    DataSet::from_rows(&rows, d).unwrap()
}

/// Two Gaussian classes in `d` dimensions, at least `d + 2` per class, with
/// random means and correlated covariances.
pub fn gaussian_two_class(rng: &mut impl Rng, n_max: usize, d: usize) -> DataSet {
    let per_min = d + 2;
    let n = rng.random_range(2 * per_min..=n_max.max(2 * per_min));
    let n0 = rng.random_range(per_min..=n - per_min);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for class in 0..2 {
        let mu: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mix: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let count = if class == 0 { n0 } else { n - n0 };
        for _ in 0..count {
            let z: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
            let x: Vec<f64> = (0..d).map(|a| mu[a] + z[a] + (0..d).map(|b| mix[a][b] * z[b]).sum::<f64>()).collect();
            rows.push(x);
            labels.push(class as i64);
        }
    }
    DataSet::from_rows(&rows, d)
        .unwrap()
        .with_targets(Targets::Classes(ClassLabels::new(labels, vec![0, 1]).unwrap()))
        .unwrap()
}

/// Two well separated blobs: class 1 centred at `+sep`, class 0 at `-sep`
/// on every axis, unit noise.
pub fn blobs(rng: &mut impl Rng, per_class: usize, d: usize, sep: f64) -> DataSet {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2i64 {
        let centre = if class == 1 { sep } else { -sep };
        for _ in 0..per_class {
            rows.push((0..d).map(|_| centre + normal(rng)).collect::<Vec<f64>>());
            labels.push(class);
        }
    }
    DataSet::from_rows(&rows, d)
        .unwrap()
        .with_targets(Targets::Classes(ClassLabels::from_labels(labels).unwrap()))
        .unwrap()
}

fn random_leaf(rng: &mut impl Rng) -> ActionSpec {
    match rng.random_range(0..4) {
        0 => ActionSpec::Zmuv,
        1 => ActionSpec::Pca { n_components: rng.random_range(1..=6) },
        2 => ActionSpec::Map,
        _ => {
            let d = RvmParams::default();
            ActionSpec::Rvm(RvmParams {
                kernel: if rng.random_bool(0.3) {
                    d.kernel
                } else {
                    Kernel::Rbf { bandwidth: 10f64.powf(rng.random_range(-3.0..3.0)) }
                },
                limits: IterationLimits {
                    max_outer: if rng.random_bool(0.5) { d.limits.max_outer } else { rng.random_range(1..2000) },
                    max_inner: if rng.random_bool(0.5) { d.limits.max_inner } else { rng.random_range(1..500) },
                },
            })
        }
    }
}

/// A random spec tree with at most `depth` levels (a lone leaf is depth 1).
/// Composites have 2 to 4 children and may nest the same kind.
pub fn random_spec(rng: &mut impl Rng, depth: usize) -> ActionSpec {
    if depth <= 1 || rng.random_bool(0.35) {
        return random_leaf(rng);
    }
    let children = (0..rng.random_range(2..=4)).map(|_| random_spec(rng, depth - 1)).collect();
    if rng.random_bool(0.5) {
        ActionSpec::Sequential(children)
    } else {
        ActionSpec::Parallel(children)
    }
}

pub fn depth(spec: &ActionSpec) -> usize {
    1 + spec.children().iter().map(depth).max().unwrap_or(0)
}
