//! Zero-mean/unit-variance normalization and principal components projection.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::action::Transform;
use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::Execution;

/// Per-feature means and sample standard deviations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZmuvState {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Learns per-column mean and sample (`n - 1`) standard deviation.
///
/// A single observation or a constant column yields standard deviation 0.
pub fn zmuv_train(ds: &DataSet) -> Result<ZmuvState> {
    let n = ds.n_observations();
    if n == 0 {
        return Err(Error::EmptyDataSet);
    }
    let (means, stds) = (0..ds.n_features())
        .map(|j| {
            let col = ds.column(j);
            // a constant column must give std 0 exactly, not rounding noise
            if col.iter().all(|&x| x == col[0]) {
                return (col[0], 0.0);
            }
            let mean = col.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                let ss: f64 = col.iter().map(|x| (x - mean) * (x - mean)).sum();
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            (mean, std)
        })
        .unzip();
    Ok(ZmuvState { means, stds })
}

impl Transform for ZmuvState {
    fn input_dim(&self) -> usize {
        self.means.len()
    }

    /// `(x - mean) / std` per column; zero-variance columns divide by 1.
    fn apply(&self, ds: &DataSet, _exec: Execution) -> Result<DataSet> {
        let mut obs = ds.observations().clone();
        for (j, mut col) in obs.column_iter_mut().enumerate() {
            let scale = if self.stds[j] > 0.0 { self.stds[j] } else { 1.0 };
            col.apply(|x| *x = (*x - self.means[j]) / scale);
        }
        ds.with_features(obs, ds.feature_names().to_vec())
    }
}

/// Principal axes of the training covariance.
///
/// `components` is `d x m` with orthonormal columns sorted by descending
/// eigenvalue. Each column's largest-magnitude entry is positive (lowest
/// index wins ties), which fixes the sign of every axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaState {
    pub mean: Vec<f64>,
    #[serde(with = "crate::serde_matrix")]
    pub components: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Trace of the training covariance (sum of all `d` eigenvalues).
    pub total_variance: f64,
}

impl PcaState {
    pub fn n_components(&self) -> usize {
        self.components.ncols()
    }

    /// Fraction of the total variance captured by the retained components.
    pub fn explained_variance_ratio(&self) -> f64 {
        if self.total_variance > 0.0 {
            self.eigenvalues.iter().sum::<f64>() / self.total_variance
        } else {
            0.0
        }
    }
}

/// Column means and the sample covariance (`n - 1` denominator).
pub fn sample_covariance(ds: &DataSet) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = ds.n_observations();
    if n < 2 {
        return Err(Error::EmptyDataSet);
    }
    let x = ds.observations();
    let mean = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n as f64));
    let mut centered = x.clone();
    for (mut col, m) in centered.column_iter_mut().zip(mean.iter()) {
        col.add_scalar_mut(-m);
    }
    let mut cov = centered.transpose() * &centered / (n - 1) as f64;
    cov = (&cov + cov.transpose()) * 0.5;
    Ok((mean, cov))
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending,
/// eigenvectors sign-normalized.
pub fn sorted_eigen(sym: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let d = sym.nrows();
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = eig.eigenvectors.select_columns(&order);
    for mut col in vectors.column_iter_mut() {
        let mut pivot = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
    (values, vectors)
}

/// Learns the top `n_components` principal axes. Data is always centered;
/// no standardization is applied (compose with ZMUV for that).
pub fn pca_train(ds: &DataSet, n_components: usize) -> Result<PcaState> {
    let n = ds.n_observations();
    if n == 0 {
        return Err(Error::EmptyDataSet);
    }
    let max = (n - 1).min(ds.n_features());
    if n_components == 0 || n_components > max {
        return Err(Error::TooManyComponents { requested: n_components, max });
    }
    let (mean, cov) = sample_covariance(ds)?;
    let total_variance = cov.trace();
    let (values, vectors) = sorted_eigen(cov);
    Ok(PcaState {
        mean: mean.iter().copied().collect(),
        components: vectors.columns(0, n_components).into_owned(),
        eigenvalues: values[..n_components].to_vec(),
        total_variance,
    })
}

impl Transform for PcaState {
    fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// `(X - mean) * components`; features are named `pc1..pcm`.
    fn apply(&self, ds: &DataSet, _exec: Execution) -> Result<DataSet> {
        let mut centered = ds.observations().clone();
        for (mut col, m) in centered.column_iter_mut().zip(&self.mean) {
            col.add_scalar_mut(-m);
        }
        let projected = centered * &self.components;
        let names = (1..=self.n_components()).map(|i| format!("pc{i}")).collect();
        ds.with_features(projected, names)
    }
}
