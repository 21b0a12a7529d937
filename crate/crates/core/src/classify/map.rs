use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::{open_unit, SCORE_COLUMN};
use crate::action::Transform;
use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::Execution;

/// Initial ridge, relative to the mean covariance diagonal.
pub const COVARIANCE_EPSILON: f64 = 1e-6;
const MAX_RIDGE_ESCALATIONS: usize = 16;

/// Full-covariance Gaussian class conditionals with empirical priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapState {
    pub classes: Vec<i64>,
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Regularized sample covariances, one per class.
    #[serde(with = "crate::serde_matrix::list")]
    pub covariances: Vec<DMatrix<f64>>,
}

/// Adds `eps * (trace / d) * I`, escalating `eps` tenfold until the matrix
/// factors. A zero-trace matrix uses scale 1.
fn regularize(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = cov.nrows();
    let scale = match cov.trace() / d as f64 {
        s if s > 0.0 && s.is_finite() => s,
        _ => 1.0,
    };
    let mut eps = COVARIANCE_EPSILON;
    for _ in 0..MAX_RIDGE_ESCALATIONS {
        let mut reg = cov.clone();
        for i in 0..d {
            reg[(i, i)] += eps * scale;
        }
        if Cholesky::new(reg.clone()).is_some() {
            return Ok(reg);
        }
        eps *= 10.0;
    }
    Err(Error::DegenerateData("class covariance is not positive definite".into()))
}

/// Fits one Gaussian per class: mean, sample covariance (`n_c - 1`) and
/// prior `n_c / n`.
pub fn map_train(ds: &DataSet) -> Result<MapState> {
    let labels = ds.require_class_labels()?;
    let counts = labels.counts();
    if counts.values().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::SingleClass);
    }
    if let Some((&label, &count)) = counts.iter().find(|(_, &c)| c < 2) {
        return Err(Error::TooFewPerClass { label, count, min: 2 });
    }
    let n = ds.n_observations() as f64;
    let mut state = MapState { classes: Vec::new(), priors: Vec::new(), means: Vec::new(), covariances: Vec::new() };
    for (&class, &count) in &counts {
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels.labels()[i] == class).collect();
        let (mean, cov) = crate::preproc::sample_covariance(&ds.select_rows(&rows))?;
        state.classes.push(class);
        state.priors.push(count as f64 / n);
        state.means.push(mean.iter().copied().collect());
        state.covariances.push(regularize(&cov)?);
    }
    Ok(state)
}

struct ClassDensity {
    log_prior: f64,
    mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    log_norm: f64,
}

impl MapState {
    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn densities(&self) -> Result<Vec<ClassDensity>> {
        let d = self.n_features() as f64;
        self.covariances
            .iter()
            .zip(&self.means)
            .zip(&self.priors)
            .map(|((cov, mean), prior)| {
                let chol = Cholesky::new(cov.clone())
                    .ok_or_else(|| Error::DegenerateData("stored covariance is not positive definite".into()))?;
                let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                Ok(ClassDensity {
                    log_prior: prior.ln(),
                    mean: DVector::from_column_slice(mean),
                    log_norm: -0.5 * (d * (2.0 * PI).ln() + log_det),
                    chol,
                })
            })
            .collect()
    }

    fn log_joint_with(dens: &[ClassDensity], x: &DVector<f64>) -> Vec<f64> {
        dens.iter()
            .map(|c| {
                let diff = x - &c.mean;
                let z =
                    c.chol.l_dirty().solve_lower_triangular(&diff).expect("cholesky factor has a positive diagonal");
                c.log_prior + c.log_norm - 0.5 * z.norm_squared()
            })
            .collect()
    }

    /// `ln prior_c + ln N(x; mean_c, cov_c)` for every class.
    pub fn log_joint(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(Self::log_joint_with(&self.densities()?, &DVector::from_column_slice(x)))
    }

    /// Class posteriors for one observation, normalized to sum to 1 and kept
    /// strictly inside (0, 1).
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(normalize(self.log_joint(x)?))
    }
}

fn normalize(log_joint: Vec<f64>) -> Vec<f64> {
    let max = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = log_joint.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|p| open_unit(p / total)).collect()
}

impl Transform for MapState {
    fn input_dim(&self) -> usize {
        self.n_features()
    }

    /// Binary problems emit the larger label's posterior as `score`;
    /// otherwise one `p_<label>` column per class.
    fn apply(&self, ds: &DataSet, exec: Execution) -> Result<DataSet> {
        let dens = self.densities()?;
        let x = ds.observations();
        let rows = exec.map(ds.n_observations(), |i| normalize(Self::log_joint_with(&dens, &x.row(i).transpose())));
        let k = self.classes.len();
        let (obs, names) = if k == 2 {
            (DMatrix::from_fn(rows.len(), 1, |i, _| rows[i][1]), vec![SCORE_COLUMN.to_owned()])
        } else {
            (
                DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]),
                self.classes.iter().map(|c| format!("p_{c}")).collect(),
            )
        };
        ds.with_features(obs, names)
    }
}
