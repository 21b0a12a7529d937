//! K-fold cross-validation over any action, and ROC scoring.

use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action::{ActionSpec, TrainedAction};
use crate::dataset::{format_real, DataSet};
use crate::error::{Error, Result};
use crate::Execution;

/// A seeded, balanced, unstratified partition of `0..n` into `k` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    /// Observation indices in fold `f`, ascending.
    pub fn members(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == f).collect()
    }

    /// Observation indices outside fold `f`, ascending.
    pub fn complement(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != f).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles `0..n` with ChaCha8 seeded by `seed` and deals the permutation
/// round-robin into `k` folds, so fold sizes differ by at most one.
pub fn assign_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut fold_of = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment { k, fold_of, seed })
}

/// Everything produced by a cross-validation run.
#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub folds: FoldAssignment,
    /// `models[f]` was trained without fold `f` and scored it.
    pub models: Vec<TrainedAction>,
    /// Out-of-fold outputs in the original observation order, with the
    /// original targets and ids.
    pub output: DataSet,
}

pub fn kfolds(spec: &ActionSpec, ds: &DataSet, k: usize, seed: u64) -> Result<DataSet> {
    Ok(cross_validate(spec, ds, k, seed, Execution::default())?.output)
}

/// For each fold, trains `spec` on the other folds and runs it on this one.
/// Folds may train concurrently; results are merged by fold index.
pub fn cross_validate(
    spec: &ActionSpec,
    ds: &DataSet,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<CrossValidation> {
    let folds = assign_folds(ds.n_observations(), k, seed)?;
    let per_fold = exec.try_map(k, |f| {
        let annotate = |e: Error| Error::Fold { fold: f, source: Box::new(e) };
        let members = folds.members(f);
        let model = spec.train_with(&ds.select_rows(&folds.complement(f)), exec).map_err(annotate)?;
        let out = model.run_with(&ds.select_rows(&members), exec).map_err(annotate)?;
        Ok::<_, Error>((members, model, out))
    })?;

    let names = per_fold[0].2.feature_names().to_vec();
    let d = names.len();
    let mut merged = DMatrix::zeros(ds.n_observations(), d);
    let mut models = Vec::with_capacity(k);
    for (f, (members, model, out)) in per_fold.into_iter().enumerate() {
        if out.feature_names() != names.as_slice() {
            return Err(Error::Fold {
                fold: f,
                source: Box::new(Error::DimensionMismatch { expected: d, found: out.n_features() }),
            });
        }
        for (row, &i) in members.iter().enumerate() {
            for j in 0..d {
                merged[(i, j)] = out.observations()[(row, j)];
            }
        }
        models.push(model);
    }
    Ok(CrossValidation { folds, models, output: ds.with_features(merged, names)? })
}

/// Binary ground truth: `true` for the larger label of a two-label set.
pub fn binary_truth(ds: &DataSet) -> Result<Vec<bool>> {
    let labels = ds.require_class_labels()?;
    let set = labels.label_set();
    if set.len() > 2 {
        return Err(Error::NotBinary(set.len()));
    }
    let positive = *set.last().expect("label set is non-empty");
    let truth: Vec<bool> = labels.labels().iter().map(|&l| l == positive && set.len() == 2).collect();
    let n_pos = truth.iter().filter(|&&t| t).count();
    if n_pos == 0 || n_pos == truth.len() {
        return Err(Error::OneClassOnly);
    }
    Ok(truth)
}

fn score_column(ds: &DataSet) -> Result<&[f64]> {
    match ds.n_features() {
        1 => Ok(ds.column(0)),
        d => Err(Error::MultipleScoreColumns(d)),
    }
}

/// Receiver operating characteristic of a scored binary dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// False-alarm rates, non-decreasing from 0 to 1.
    pub pf: Vec<f64>,
    /// Detection rates, non-decreasing from 0 to 1.
    pub pd: Vec<f64>,
    /// Score cutoff of each point (`score >= threshold` is declared
    /// positive). The first is `+inf`.
    pub thresholds: Vec<f64>,
    pub auc: f64,
    pub n_positive: usize,
    pub n_negative: usize,
}

impl RocCurve {
    /// `threshold,pf,pd` rows, 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["threshold", "pf", "pd"])?;
        for i in 0..self.pf.len() {
            w.write_record([format_real(self.thresholds[i]), format_real(self.pf[i]), format_real(self.pd[i])])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// ROC of the single score column against binary class targets.
pub fn roc(scored: &DataSet) -> Result<RocCurve> {
    let truth = binary_truth(scored)?;
    roc_from_scores(score_column(scored)?, &truth)
}

/// Sweeps the threshold from `+inf` down through every distinct score. Tied
/// scores cross the threshold together, as one step. The area is the
/// trapezoidal rule, accumulated in integer counts and divided once.
pub fn roc_from_scores(scores: &[f64], truth: &[bool]) -> Result<RocCurve> {
    assert_eq!(scores.len(), truth.len(), "one score per observation");
    let n_pos = truth.iter().filter(|&&t| t).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::OneClassOnly);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut thresholds = vec![f64::INFINITY];
    let mut tps: Vec<usize> = vec![0];
    let mut fps: Vec<usize> = vec![0];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut doubled_area: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        doubled_area += ((fp - fp0) as u128) * ((tp + tp0) as u128);
        thresholds.push(s);
        tps.push(tp);
        fps.push(fp);
    }
    Ok(RocCurve {
        pf: fps.iter().map(|&f| f as f64 / n_neg as f64).collect(),
        pd: tps.iter().map(|&t| t as f64 / n_pos as f64).collect(),
        thresholds,
        auc: doubled_area as f64 / (2.0 * n_pos as f64 * n_neg as f64),
        n_positive: n_pos,
        n_negative: n_neg,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Counts with `score >= threshold` declared positive.
pub fn confusion_at_threshold(scored: &DataSet, threshold: f64) -> Result<Confusion> {
    let truth = binary_truth(scored)?;
    let scores = score_column(scored)?;
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&s, &t) in scores.iter().zip(&truth) {
        match (s >= threshold, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}
