//! The train/run contract and pipeline composition.
//!
//! An [`ActionSpec`] holds hyperparameters only. [`ActionSpec::train`]
//! produces a [`TrainedAction`] holding the inferred parameters, and
//! [`TrainedAction::run`] maps a [`DataSet`] to a new `DataSet` with the same
//! observations (count, order, ids, targets) and new features.
//!
//! Composites are actions too:
//!
//! * `Sequential` trains its children left to right, each on the output of
//!   the previous trained child. `+` builds one.
//! * `Parallel` trains every child on the same input and concatenates their
//!   outputs in child order. `/` builds one.
//!
//! New leaf kinds plug in by implementing [`Transform`] for their trained
//! state and adding a registry entry in [`LEAVES`].

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::ops::{Add, Div};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::classify::{self, IterationLimits, Kernel, MapState, RvmState};
use crate::dataset::{concat_features, DataSet};
use crate::error::{Error, Result};
use crate::preproc::{self, PcaState, ZmuvState};
use crate::Execution;

/// Invalid action names, parameters, or composite shapes.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`{action}` has no parameter `{param}`")]
    BadParamName { action: String, param: String },
    #[error("`{action}`: bad value for `{param}`: {reason}")]
    BadParamValue { action: String, param: String, reason: String },
    #[error("`{action}` takes {expected}, got {found}")]
    BadArity { action: String, expected: String, found: usize },
    #[error("{kind} needs at least 2 children, got {found}")]
    TooFewChildren { kind: &'static str, found: usize },
}

/// Hyperparameters of the relevance vector machine.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RvmParams {
    pub kernel: Kernel,
    pub limits: IterationLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub enum ActionSpec {
    Zmuv,
    Pca { n_components: usize },
    Map,
    Rvm(RvmParams),
    Sequential(Vec<ActionSpec>),
    Parallel(Vec<ActionSpec>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ParamType {
    Count,
    Positive,
}

#[derive(Debug)]
pub(crate) struct ParamDef {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub required: bool,
    pub ty: ParamType,
}

#[derive(Debug)]
pub(crate) struct LeafDef {
    pub name: &'static str,
    pub params: &'static [ParamDef],
}

/// Registry of leaf actions and their parameters, in positional order.
pub(crate) const LEAVES: &[LeafDef] = &[
    LeafDef { name: "zmuv", params: &[] },
    LeafDef {
        name: "pca",
        params: &[ParamDef { name: "n_components", aliases: &["nComponents"], required: true, ty: ParamType::Count }],
    },
    LeafDef { name: "map", params: &[] },
    LeafDef {
        name: "rvm",
        params: &[
            ParamDef { name: "bandwidth", aliases: &["sigma"], required: false, ty: ParamType::Positive },
            ParamDef { name: "max_outer", aliases: &["maxOuter"], required: false, ty: ParamType::Count },
            ParamDef { name: "max_inner", aliases: &["maxInner"], required: false, ty: ParamType::Count },
        ],
    },
];

fn check_value(action: &str, def: &ParamDef, v: f64) -> Result<f64, SpecError> {
    let bad = |reason: &str| SpecError::BadParamValue {
        action: action.to_owned(),
        param: def.name.to_owned(),
        reason: reason.to_owned(),
    };
    if !v.is_finite() {
        return Err(bad("must be finite"));
    }
    match def.ty {
        ParamType::Count if v.fract() != 0.0 || v < 1.0 => Err(bad("must be a positive integer")),
        ParamType::Count if v > u32::MAX as f64 => Err(bad("too large")),
        ParamType::Positive if v <= 0.0 => Err(bad("must be positive")),
        _ => Ok(v),
    }
}

impl ActionSpec {
    /// Builds a leaf from its registry name plus positional and named
    /// arguments. Parameter aliases (e.g. `nComponents`) are accepted.
    pub fn leaf(name: &str, positional: &[f64], named: &[(&str, f64)]) -> Result<Self, SpecError> {
        let def = LEAVES.iter().find(|l| l.name == name).ok_or_else(|| SpecError::UnknownAction(name.to_owned()))?;
        let arity = || {
            let req = def.params.iter().filter(|p| p.required).count();
            match (req, def.params.len()) {
                (0, 0) => "no arguments".to_owned(),
                (r, t) if r == t => format!("{r} argument(s)"),
                (r, t) => format!("{r} to {t} argument(s)"),
            }
        };
        if positional.len() > def.params.len() {
            return Err(SpecError::BadArity {
                action: name.to_owned(),
                expected: arity(),
                found: positional.len() + named.len(),
            });
        }
        let mut values: Vec<Option<f64>> = vec![None; def.params.len()];
        for (slot, &v) in values.iter_mut().zip(positional) {
            *slot = Some(v);
        }
        for &(key, v) in named {
            let idx = def
                .params
                .iter()
                .position(|p| p.name == key || p.aliases.contains(&key))
                .ok_or_else(|| SpecError::BadParamName { action: name.to_owned(), param: key.to_owned() })?;
            if values[idx].is_some() {
                return Err(SpecError::BadParamName { action: name.to_owned(), param: format!("{key} (given twice)") });
            }
            values[idx] = Some(v);
        }
        for (p, v) in def.params.iter().zip(&mut values) {
            match v {
                Some(x) => *x = check_value(name, p, *x)?,
                None if p.required => {
                    return Err(SpecError::BadArity {
                        action: name.to_owned(),
                        expected: arity(),
                        found: positional.len() + named.len(),
                    })
                }
                None => {}
            }
        }
        Ok(match name {
            "zmuv" => ActionSpec::Zmuv,
            "map" => ActionSpec::Map,
            "pca" => ActionSpec::Pca { n_components: values[0].expect("required") as usize },
            "rvm" => {
                let defaults = RvmParams::default();
                ActionSpec::Rvm(RvmParams {
                    kernel: Kernel::Rbf { bandwidth: values[0].unwrap_or(defaults.kernel.bandwidth()) },
                    limits: IterationLimits {
                        max_outer: values[1].map_or(defaults.limits.max_outer, |v| v as usize),
                        max_inner: values[2].map_or(defaults.limits.max_inner, |v| v as usize),
                    },
                })
            }
            _ => unreachable!("registry and constructor disagree on `{name}`"),
        })
    }

    pub fn pca(n_components: usize) -> Result<Self, SpecError> {
        Self::leaf("pca", &[n_components as f64], &[])
    }

    pub fn rvm(bandwidth: f64) -> Result<Self, SpecError> {
        Self::leaf("rvm", &[], &[("bandwidth", bandwidth)])
    }

    pub fn sequential(children: Vec<ActionSpec>) -> Result<Self, SpecError> {
        if children.len() < 2 {
            return Err(SpecError::TooFewChildren { kind: "sequential", found: children.len() });
        }
        Ok(ActionSpec::Sequential(children))
    }

    pub fn parallel(children: Vec<ActionSpec>) -> Result<Self, SpecError> {
        if children.len() < 2 {
            return Err(SpecError::TooFewChildren { kind: "parallel", found: children.len() });
        }
        Ok(ActionSpec::Parallel(children))
    }

    /// Registry name of a leaf, `None` for composites.
    pub fn leaf_name(&self) -> Option<&'static str> {
        match self {
            ActionSpec::Zmuv => Some("zmuv"),
            ActionSpec::Pca { .. } => Some("pca"),
            ActionSpec::Map => Some("map"),
            ActionSpec::Rvm(_) => Some("rvm"),
            ActionSpec::Sequential(_) | ActionSpec::Parallel(_) => None,
        }
    }

    /// Leaf parameters as `(name, value, is_default)`, in registry order.
    pub fn leaf_params(&self) -> Vec<(&'static str, f64, bool)> {
        match self {
            ActionSpec::Pca { n_components } => vec![("n_components", *n_components as f64, false)],
            ActionSpec::Rvm(p) => {
                let d = RvmParams::default();
                vec![
                    ("bandwidth", p.kernel.bandwidth(), p.kernel == d.kernel),
                    ("max_outer", p.limits.max_outer as f64, p.limits.max_outer == d.limits.max_outer),
                    ("max_inner", p.limits.max_inner as f64, p.limits.max_inner == d.limits.max_inner),
                ]
            }
            _ => Vec::new(),
        }
    }

    pub fn children(&self) -> &[ActionSpec] {
        match self {
            ActionSpec::Sequential(c) | ActionSpec::Parallel(c) => c,
            _ => &[],
        }
    }

    /// True for leaves whose output is a class score.
    pub fn is_classifier(&self) -> bool {
        matches!(self, ActionSpec::Map | ActionSpec::Rvm(_))
    }

    /// True when the final stage of the flow is a classifier, so the output
    /// is a score column rather than transformed features.
    pub fn ends_in_classifier(&self) -> bool {
        match self {
            ActionSpec::Sequential(c) => c.last().is_some_and(ActionSpec::ends_in_classifier),
            ActionSpec::Parallel(_) => false,
            leaf => leaf.is_classifier(),
        }
    }

    /// Re-checks construction invariants on a hand-built spec tree.
    pub fn validate(&self) -> Result<(), SpecError> {
        match self {
            ActionSpec::Sequential(c) | ActionSpec::Parallel(c) => {
                let kind = if matches!(self, ActionSpec::Sequential(_)) { "sequential" } else { "parallel" };
                if c.len() < 2 {
                    return Err(SpecError::TooFewChildren { kind, found: c.len() });
                }
                c.iter().try_for_each(ActionSpec::validate)
            }
            leaf => {
                let name = leaf.leaf_name().expect("leaf");
                let named: Vec<(&str, f64)> = leaf.leaf_params().iter().map(|(n, v, _)| (*n, *v)).collect();
                Self::leaf(name, &[], &named).map(|_| ())
            }
        }
    }

    pub fn train(&self, ds: &DataSet) -> Result<TrainedAction> {
        self.train_with(ds, Execution::default())
    }

    pub fn train_with(&self, ds: &DataSet, exec: Execution) -> Result<TrainedAction> {
        self.validate()?;
        Ok(match self {
            ActionSpec::Zmuv => TrainedAction::Zmuv(preproc::zmuv_train(ds)?),
            ActionSpec::Pca { n_components } => TrainedAction::Pca(preproc::pca_train(ds, *n_components)?),
            ActionSpec::Map => TrainedAction::Map(classify::map_train(ds)?),
            ActionSpec::Rvm(p) => TrainedAction::Rvm(classify::rvm_train(ds, p.kernel, p.limits, exec)?),
            ActionSpec::Sequential(children) => {
                let mut current = Cow::Borrowed(ds);
                let mut trained = Vec::with_capacity(children.len());
                for (i, child) in children.iter().enumerate() {
                    let t = child.train_with(&current, exec)?;
                    if i + 1 < children.len() {
                        current = Cow::Owned(t.run_with(&current, exec)?);
                    }
                    trained.push(t);
                }
                TrainedAction::Sequential { children: trained }
            }
            ActionSpec::Parallel(children) => TrainedAction::Parallel {
                children: exec.try_map(children.len(), |i| children[i].train_with(ds, exec))?,
            },
        })
    }
}

/// Sequential composition, flattening a sequential left operand so that
/// `a + b + c` is one three-stage flow.
impl Add for ActionSpec {
    type Output = ActionSpec;

    fn add(self, rhs: ActionSpec) -> ActionSpec {
        match self {
            ActionSpec::Sequential(mut c) => {
                c.push(rhs);
                ActionSpec::Sequential(c)
            }
            lhs => ActionSpec::Sequential(vec![lhs, rhs]),
        }
    }
}

/// Parallel composition, flattening a parallel left operand.
impl Div for ActionSpec {
    type Output = ActionSpec;

    fn div(self, rhs: ActionSpec) -> ActionSpec {
        match self {
            ActionSpec::Parallel(mut c) => {
                c.push(rhs);
                ActionSpec::Parallel(c)
            }
            lhs => ActionSpec::Parallel(vec![lhs, rhs]),
        }
    }
}

/// Binary sequential composite `[a, b]`; nested operands stay nested.
pub fn seq(a: ActionSpec, b: ActionSpec) -> ActionSpec {
    ActionSpec::Sequential(vec![a, b])
}

/// Binary parallel composite `[a, b]`; nested operands stay nested.
pub fn par(a: ActionSpec, b: ActionSpec) -> ActionSpec {
    ActionSpec::Parallel(vec![a, b])
}

/// JSON shape of an [`ActionSpec`]: `{"kind", "params", "children"}`.
#[derive(Serialize, Deserialize)]
struct SpecDocument {
    kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<ActionSpec>,
}

impl From<ActionSpec> for SpecDocument {
    fn from(spec: ActionSpec) -> Self {
        let params = spec
            .leaf_params()
            .into_iter()
            .filter(|(_, _, default)| !default)
            .map(|(name, v, _)| {
                let value =
                    if v.fract() == 0.0 && name != "bandwidth" { Value::from(v as u64) } else { Value::from(v) };
                (name.to_owned(), value)
            })
            .collect();
        match spec {
            ActionSpec::Sequential(children) => SpecDocument { kind: "sequential".into(), params, children },
            ActionSpec::Parallel(children) => SpecDocument { kind: "parallel".into(), params, children },
            leaf => SpecDocument { kind: leaf.leaf_name().expect("leaf").into(), params, children: Vec::new() },
        }
    }
}

impl TryFrom<SpecDocument> for ActionSpec {
    type Error = SpecError;

    fn try_from(doc: SpecDocument) -> Result<Self, SpecError> {
        match doc.kind.as_str() {
            "sequential" => ActionSpec::sequential(doc.children),
            "parallel" => ActionSpec::parallel(doc.children),
            name => {
                if !doc.children.is_empty() {
                    return Err(SpecError::BadArity {
                        action: name.to_owned(),
                        expected: "no children".into(),
                        found: doc.children.len(),
                    });
                }
                let mut named = Vec::with_capacity(doc.params.len());
                for (k, v) in &doc.params {
                    let x = v.as_f64().ok_or_else(|| SpecError::BadParamValue {
                        action: name.to_owned(),
                        param: k.clone(),
                        reason: "must be a number".into(),
                    })?;
                    named.push((k.as_str(), x));
                }
                ActionSpec::leaf(name, &[], &named)
            }
        }
    }
}

/// A trained leaf: maps datasets of a fixed input width to new datasets.
pub trait Transform {
    /// Feature count the state was trained on.
    fn input_dim(&self) -> usize;

    /// Applies the learned mapping. Callers have already checked the width.
    fn apply(&self, ds: &DataSet, exec: Execution) -> Result<DataSet>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedAction {
    Zmuv(ZmuvState),
    Pca(PcaState),
    Map(MapState),
    Rvm(RvmState),
    Sequential { children: Vec<TrainedAction> },
    Parallel { children: Vec<TrainedAction> },
}

impl TrainedAction {
    fn as_transform(&self) -> Option<&dyn Transform> {
        match self {
            TrainedAction::Zmuv(s) => Some(s),
            TrainedAction::Pca(s) => Some(s),
            TrainedAction::Map(s) => Some(s),
            TrainedAction::Rvm(s) => Some(s),
            _ => None,
        }
    }

    /// Input width expected by the first stage.
    pub fn input_dim(&self) -> usize {
        match self {
            TrainedAction::Sequential { children } | TrainedAction::Parallel { children } => children[0].input_dim(),
            leaf => leaf.as_transform().expect("leaf").input_dim(),
        }
    }

    /// The specification this action was trained from.
    pub fn spec(&self) -> ActionSpec {
        match self {
            TrainedAction::Zmuv(_) => ActionSpec::Zmuv,
            TrainedAction::Pca(s) => ActionSpec::Pca { n_components: s.n_components() },
            TrainedAction::Map(_) => ActionSpec::Map,
            TrainedAction::Rvm(s) => ActionSpec::Rvm(RvmParams { kernel: s.kernel, limits: s.limits }),
            TrainedAction::Sequential { children } => ActionSpec::Sequential(children.iter().map(Self::spec).collect()),
            TrainedAction::Parallel { children } => ActionSpec::Parallel(children.iter().map(Self::spec).collect()),
        }
    }

    pub fn run(&self, ds: &DataSet) -> Result<DataSet> {
        self.run_with(ds, Execution::default())
    }

    pub fn run_with(&self, ds: &DataSet, exec: Execution) -> Result<DataSet> {
        match self {
            TrainedAction::Sequential { children } => {
                let mut current = Cow::Borrowed(ds);
                for child in children {
                    current = Cow::Owned(child.run_with(&current, exec)?);
                }
                Ok(current.into_owned())
            }
            TrainedAction::Parallel { children } => {
                let outputs = exec.try_map(children.len(), |i| children[i].run_with(ds, exec))?;
                let mut iter = outputs.into_iter();
                let first = iter.next().expect("parallel composite has children");
                iter.try_fold(first, |acc, next| concat_features(&acc, &next))
            }
            leaf => {
                let t = leaf.as_transform().expect("leaf");
                if ds.n_features() != t.input_dim() {
                    return Err(Error::DimensionMismatch { expected: t.input_dim(), found: ds.n_features() });
                }
                t.apply(ds, exec)
            }
        }
    }

    /// Splits a flow into everything before its final leaf and that leaf,
    /// flattening nested sequential composites.
    pub fn split_last(&self) -> (Vec<&TrainedAction>, &TrainedAction) {
        match self {
            TrainedAction::Sequential { children } => {
                let (last, init) = children.split_last().expect("sequential composite has children");
                let (mut head, tail) = last.split_last();
                let mut all: Vec<&TrainedAction> = init.iter().collect();
                all.append(&mut head);
                (all, tail)
            }
            other => (Vec::new(), other),
        }
    }

    pub fn is_classifier(&self) -> bool {
        matches!(self, TrainedAction::Map(_) | TrainedAction::Rvm(_))
    }
}
