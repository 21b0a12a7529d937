//! Composable pattern-recognition pipelines.
//!
//! Everything flows through one value type, [`DataSet`]. An [`ActionSpec`]
//! describes an untrained processing unit (a preprocessor, a classifier, or a
//! composite of other actions); [`ActionSpec::train`] turns it into a
//! [`TrainedAction`], and [`TrainedAction::run`] maps a dataset to a new
//! dataset. Because every `run` produces a `DataSet`, the output of any action
//! can be fed into the training of another, which is what makes sequential
//! (`+`) and parallel (`/`) composition work.
//!
//! ```
//! use patrec::{dataset, eval, ActionSpec};
//!
//! let iris = dataset::gen_iris();
//! let setosa = iris.class_labels().unwrap().resolve("setosa").unwrap();
//! let ds = dataset::relabel_one_vs_rest(&iris, setosa).unwrap();
//!
//! let algo = ActionSpec::Zmuv + ActionSpec::pca(2).unwrap() + ActionSpec::Map;
//! let scores = eval::kfolds(&algo, &ds, 5, 42).unwrap();
//! let roc = eval::roc(&scores).unwrap();
//! assert!(roc.auc > 0.99);
//! ```
//!
//! Data-parallel inner loops (cross-validation folds, parallel branches,
//! kernel matrices, grid evaluation) run on rayon when the `parallel` feature
//! is enabled. Results are always merged in a fixed order, so outputs are
//! bit-identical to [`Execution::Sequential`].

pub mod action;
pub mod classify;
pub mod contour;
pub mod dataset;
pub mod dsl;
mod error;
pub mod eval;
mod exec;
pub mod preproc;
mod serde_matrix;

pub use action::{ActionSpec, SpecError, TrainedAction, Transform};
pub use dataset::{ClassLabels, DataSet, TargetKind, Targets};
pub use error::{Error, Result};
pub use exec::Execution;
