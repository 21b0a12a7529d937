//! Classifiers: Gaussian maximum a posteriori and the relevance vector machine.
//!
//! Both emit a single score column for binary problems: the posterior
//! probability of the larger label (label 1 after one-vs-rest relabeling).

mod map;
mod rvm;

pub use map::{map_train, MapState, COVARIANCE_EPSILON};
pub use rvm::{rvm_train, IterationLimits, Kernel, RvmState, CONVERGENCE_TOLERANCE, IRLS_TOLERANCE, PRUNE_THRESHOLD};

/// Name of the single score column emitted for binary problems.
pub const SCORE_COLUMN: &str = "score";

/// Clamps a probability into the open interval (0, 1). Far from the
/// training data a posterior can round to exactly 0 or 1; this moves it to
/// the nearest representable interior value instead.
pub(crate) fn open_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

pub(crate) fn logistic(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^a)` without overflow.
pub(crate) fn softplus(a: f64) -> f64 {
    a.max(0.0) + (-a.abs()).exp().ln_1p()
}
