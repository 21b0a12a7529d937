//! Sparse Bayesian kernel logistic regression (relevance vector machine).
//!
//! Every training point contributes one kernel basis function, plus a bias.
//! Each basis weight has a zero-mean Gaussian prior with its own precision
//! `alpha_i`. Training alternates a Laplace approximation of the weight
//! posterior (penalized IRLS) with the evidence update
//! `alpha_i <- gamma_i / mu_i^2`, `gamma_i = 1 - alpha_i * Sigma_ii`.
//! Bases whose precision diverges are pruned; the survivors are the
//! relevance vectors.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{logistic, open_unit, softplus, SCORE_COLUMN};
use crate::action::Transform;
use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::Execution;

/// Bases whose precision exceeds this are removed.
pub const PRUNE_THRESHOLD: f64 = 1e8;
/// Outer loop stops once `max |delta ln alpha|` falls below this.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;
/// IRLS stops once the gradient norm falls below this.
pub const IRLS_TOLERANCE: f64 = 1e-8;
const INITIAL_ALPHA: f64 = 1.0;
const MAX_STEP_HALVINGS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(-|x - z|^2 / (2 bandwidth^2))`
    Rbf { bandwidth: f64 },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Rbf { bandwidth: 1.0 }
    }
}

impl Kernel {
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { bandwidth } => {
                let sq: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * bandwidth * bandwidth)).exp()
            }
        }
    }

    pub fn bandwidth(&self) -> f64 {
        match *self {
            Kernel::Rbf { bandwidth } => bandwidth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationLimits {
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for IterationLimits {
    fn default() -> Self {
        Self { max_outer: 500, max_inner: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RvmState {
    pub kernel: Kernel,
    pub limits: IterationLimits,
    pub input_dim: usize,
    /// `r x d` retained training inputs.
    #[serde(with = "crate::serde_matrix")]
    pub relevance_vectors: DMatrix<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Training-set row of each relevance vector.
    pub active_indices: Vec<usize>,
    /// The label scored as positive.
    pub positive_label: i64,
    /// False when the outer iteration cap was reached first.
    pub converged: bool,
    pub iterations: usize,
}

impl RvmState {
    pub fn n_relevance_vectors(&self) -> usize {
        self.weights.len()
    }

    /// `bias + sum_j w_j k(x, rv_j)`
    pub fn expansion(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.input_dim];
        let mut acc = self.bias;
        for (j, w) in self.weights.iter().enumerate() {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = self.relevance_vectors[(j, k)];
            }
            acc += w * self.kernel.eval(x, &buf);
        }
        acc
    }

    /// Positive-class probability, strictly inside (0, 1).
    pub fn score(&self, x: &[f64]) -> f64 {
        open_unit(logistic(self.expansion(x)))
    }
}

impl Transform for RvmState {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn apply(&self, ds: &DataSet, exec: Execution) -> Result<DataSet> {
        let scores = exec.map(ds.n_observations(), |i| self.score(&ds.row(i)));
        ds.with_features(DMatrix::from_vec(scores.len(), 1, scores), vec![SCORE_COLUMN.to_owned()])
    }
}

/// Penalized negative log-likelihood
/// `sum_i [softplus(a_i) - t_i a_i] + 0.5 sum_j alpha_j w_j^2` with `a = Phi w`.
fn objective(phi: &DMatrix<f64>, t: &DVector<f64>, alpha: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let a = phi * w;
    let nll: f64 = a.iter().zip(t.iter()).map(|(a, t)| softplus(*a) - t * a).sum();
    nll + 0.5 * alpha.iter().zip(w.iter()).map(|(al, w)| al * w * w).sum::<f64>()
}

/// `Phi^T B Phi + diag(alpha)` with `B = diag(y (1 - y))`.
fn hessian(phi: &DMatrix<f64>, y: &DVector<f64>, alpha: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = phi.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= (y[i] * (1.0 - y[i])).sqrt();
    }
    let mut h = scaled.transpose() * scaled;
    for (j, a) in alpha.iter().enumerate() {
        h[(j, j)] += a;
    }
    h
}

pub(crate) struct IrlsFit {
    pub weights: DVector<f64>,
    /// Objective before the first step and after every accepted step.
    #[cfg_attr(not(test), allow(dead_code))]
    pub objectives: Vec<f64>,
}

/// Newton iterations on the penalized likelihood with step halving; a step
/// is accepted only if it strictly lowers the objective.
pub(crate) fn irls(
    phi: &DMatrix<f64>,
    t: &DVector<f64>,
    alpha: &DVector<f64>,
    mut w: DVector<f64>,
    max_inner: usize,
) -> IrlsFit {
    let mut obj = objective(phi, t, alpha, &w);
    let mut objectives = vec![obj];
    for _ in 0..max_inner {
        let y = (phi * &w).map(logistic);
        let grad = phi.transpose() * (t - &y) - alpha.component_mul(&w);
        if grad.norm() < IRLS_TOLERANCE {
            break;
        }
        let Some(chol) = Cholesky::new(hessian(phi, &y, alpha)) else {
            break;
        };
        let delta = chol.solve(&grad);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_STEP_HALVINGS {
            let candidate = &w + &delta * step;
            let cand_obj = objective(phi, t, alpha, &candidate);
            if cand_obj < obj {
                w = candidate;
                obj = cand_obj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        objectives.push(obj);
    }
    IrlsFit { weights: w, objectives }
}

/// Trains a binary RVM. The larger of the two labels is the positive class.
///
/// Reaching `limits.max_outer` is not an error; the state comes back with
/// `converged == false`.
pub fn rvm_train(ds: &DataSet, kernel: Kernel, limits: IterationLimits, exec: Execution) -> Result<RvmState> {
    let labels = ds.require_class_labels()?;
    let set = labels.label_set();
    if set.len() != 2 {
        return Err(Error::NotBinary(set.len()));
    }
    let present = labels.counts().values().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::NotBinary(present));
    }
    if kernel.bandwidth().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateData("kernel bandwidth must be positive".into()));
    }
    let positive = set[1];
    let n = ds.n_observations();
    let d = ds.n_features();
    let t = DVector::from_iterator(n, labels.labels().iter().map(|&l| f64::from(u8::from(l == positive))));

    let rows: Vec<Vec<f64>> = (0..n).map(|i| ds.row(i)).collect();
    let kernel_rows = exec.map(n, |i| rows.iter().map(|z| kernel.eval(&rows[i], z)).collect::<Vec<_>>());
    // column 0 is the bias, column j + 1 the basis centred on training row j
    let basis = DMatrix::from_fn(n, n + 1, |i, j| if j == 0 { 1.0 } else { kernel_rows[i][j - 1] });

    let mut active: Vec<usize> = (0..=n).collect();
    let mut alpha = vec![INITIAL_ALPHA; n + 1];
    let mut w = DVector::zeros(n + 1);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < limits.max_outer {
        iterations += 1;
        let phi = basis.select_columns(&active);
        let a = DVector::from_iterator(active.len(), active.iter().map(|&j| alpha[j]));
        w = irls(&phi, &t, &a, w, limits.max_inner).weights;

        let y = (&phi * &w).map(logistic);
        let sigma = Cholesky::new(hessian(&phi, &y, &a))
            .ok_or_else(|| Error::DegenerateData("RVM posterior covariance is singular".into()))?
            .inverse();

        let mut max_delta: f64 = 0.0;
        let mut pruned = false;
        let mut keep = Vec::with_capacity(active.len());
        for (slot, &basis_idx) in active.iter().enumerate() {
            let gamma = 1.0 - a[slot] * sigma[(slot, slot)];
            let mu2 = w[slot] * w[slot];
            let mut updated = if gamma > 0.0 && mu2 > 0.0 { gamma / mu2 } else { f64::INFINITY };
            if basis_idx == 0 {
                updated = updated.min(PRUNE_THRESHOLD);
            } else if updated > PRUNE_THRESHOLD {
                pruned = true;
                continue;
            }
            max_delta = max_delta.max((updated.ln() - alpha[basis_idx].ln()).abs());
            alpha[basis_idx] = updated;
            keep.push(slot);
        }
        active = keep.iter().map(|&s| active[s]).collect();
        w = DVector::from_iterator(keep.len(), keep.iter().map(|&s| w[s]));

        if !pruned && max_delta < CONVERGENCE_TOLERANCE {
            converged = true;
            break;
        }
    }

    // final weights under the last alpha update
    let phi = basis.select_columns(&active);
    let a = DVector::from_iterator(active.len(), active.iter().map(|&j| alpha[j]));
    w = irls(&phi, &t, &a, w, limits.max_inner).weights;

    let rv_rows: Vec<usize> = active.iter().skip(1).map(|&j| j - 1).collect();
    Ok(RvmState {
        kernel,
        limits,
        input_dim: d,
        relevance_vectors: ds.observations().select_rows(&rv_rows),
        weights: w.iter().skip(1).copied().collect(),
        bias: w[0],
        active_indices: rv_rows,
        positive_label: positive,
        converged,
        iterations,
    })
}
