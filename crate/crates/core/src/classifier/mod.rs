//! Binary L2-regularized logistic regression over sparse binary features.
//!
//! The objective is
//!
//! ```text
//! ½‖w‖² + Σᵢ Cᵢ · log(1 + exp(−yᵢ (w·xᵢ + b)))
//! ```
//!
//! where the bias `b` is an always-on component excluded from the penalty
//! and `Cᵢ` is `C`, or `C · positive_weight` for positive examples. It is
//! minimized with a trust-region Newton method.

use std::fmt;

use thiserror::Error;

use crate::features::{FeatureSet, SparseVector, Vocabulary};
use crate::scalar::Scalar;

mod io;
mod objective;
mod tron;

pub use io::{read_model, write_model, MODEL_HEADER};
pub use objective::{loss_and_gradient, Objective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign<F: Scalar>(self) -> F {
        match self {
            Label::Positive => F::one(),
            Label::Negative => -F::one(),
        }
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub indices: SparseVector,
    pub label: Label,
}

impl Example {
    pub fn new(indices: SparseVector, label: Label) -> Self {
        Example { indices, label }
    }
}

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("regularization constant must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("feature index {index} outside model dimension {dim}")]
    DimensionMismatch { index: u32, dim: usize },
    #[error("non-finite value in the objective")]
    NonFinite,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Multiplier on `C` for positive examples.
    pub positive_weight: f64,
    /// Reserved for stochastic solvers; the trust-region solver is
    /// deterministic.
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            c: 1.0,
            tol: 1e-4,
            max_iter: 1000,
            positive_weight: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainWarning {
    /// No training examples; the zero model was returned.
    Empty,
    /// Only one label was present.
    SingleClass,
    /// `max_iter` was reached before the gradient tolerance.
    IterationCap,
    /// The solver could make no further progress above the tolerance.
    Stalled,
}

impl fmt::Display for TrainWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainWarning::Empty => "empty training set",
            TrainWarning::SingleClass => "degenerate: single class",
            TrainWarning::IterationCap => "iteration cap reached",
            TrainWarning::Stalled => "solver stalled before reaching tolerance",
        })
    }
}

impl TrainWarning {
    /// Warnings that make a model unreliable rather than merely imprecise.
    pub fn is_degenerate(self) -> bool {
        matches!(self, TrainWarning::Empty | TrainWarning::SingleClass)
    }
}

/// A trained linear classifier with its vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<F> {
    vocabulary: Vocabulary,
    /// `|vocabulary| + 1` entries; the last one is the bias.
    weights: Vec<F>,
    meta: Vec<(String, String)>,
}

impl<F: Scalar> Model<F> {
    pub fn zero(vocabulary: Vocabulary) -> Self {
        let weights = vec![F::zero(); vocabulary.len() + 1];
        Model {
            vocabulary,
            weights,
            meta: Vec::new(),
        }
    }

    /// `weights` must have `|vocabulary| + 1` finite entries, bias last.
    pub fn from_parts(vocabulary: Vocabulary, weights: Vec<F>) -> Result<Self, ClassifierError> {
        if weights.len() != vocabulary.len() + 1 {
            return Err(ClassifierError::DimensionMismatch {
                index: weights.len() as u32,
                dim: vocabulary.len() + 1,
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(ClassifierError::NonFinite);
        }
        Ok(Model {
            vocabulary,
            weights,
            meta: Vec::new(),
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn weights(&self) -> &[F] {
        &self.weights[..self.vocabulary.len()]
    }

    pub fn bias(&self) -> F {
        self.weights[self.vocabulary.len()]
    }

    /// Feature weights followed by the bias.
    pub fn raw_weights(&self) -> &[F] {
        &self.weights
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn meta_entries(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.meta.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.meta.push((key, value)),
        }
    }

    /// `w·x + b`. Indices outside the vocabulary are ignored.
    pub fn score(&self, x: &SparseVector) -> F {
        let n = self.vocabulary.len();
        let mut s = self.weights[n];
        for &i in x.indices() {
            if (i as usize) < n {
                s = s + self.weights[i as usize];
            }
        }
        s
    }

    pub fn predict_proba(&self, x: &SparseVector) -> F {
        F::sigmoid(self.score(x))
    }

    pub fn predict_features(&self, features: &FeatureSet) -> F {
        self.predict_proba(&self.vocabulary.encode(features))
    }

    /// The model with every weight (bias included) negated.
    pub fn negated(&self) -> Self {
        Model {
            vocabulary: self.vocabulary.clone(),
            weights: self.weights.iter().map(|w| -*w).collect(),
            meta: self.meta.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<F> {
    pub model: Model<F>,
    pub iterations: usize,
    /// ‖∇‖∞ at the returned weights.
    pub gradient_norm: F,
    pub loss: F,
    pub warnings: Vec<TrainWarning>,
}

impl<F> TrainOutcome<F> {
    pub fn is_degenerate(&self) -> bool {
        self.warnings.iter().any(|w| w.is_degenerate())
    }
}

/// Trains a model over `vocabulary`. Example indices must lie inside it.
pub fn train<F: Scalar>(
    examples: &[Example],
    vocabulary: Vocabulary,
    params: &TrainParams,
) -> Result<TrainOutcome<F>, ClassifierError> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(ClassifierError::InvalidC(params.c));
    }
    if !(params.tol > 0.0) {
        return Err(ClassifierError::InvalidTolerance(params.tol));
    }
    let dim = vocabulary.len();
    for ex in examples {
        if let Some(&i) = ex.indices.indices().iter().find(|&&i| i as usize >= dim) {
            return Err(ClassifierError::DimensionMismatch { index: i, dim });
        }
    }
    let mut warnings = Vec::new();
    if examples.is_empty() {
        warnings.push(TrainWarning::Empty);
        return Ok(TrainOutcome {
            model: Model::zero(vocabulary),
            iterations: 0,
            gradient_norm: F::zero(),
            loss: F::zero(),
            warnings,
        });
    }
    let positives = examples.iter().filter(|e| e.label == Label::Positive).count();
    if positives == 0 || positives == examples.len() {
        warnings.push(TrainWarning::SingleClass);
    }

    let objective = Objective::new(examples, dim, F::of(params.c), F::of(params.c * params.positive_weight));
    let result = tron::minimize(&objective, F::of(params.tol), params.max_iter)?;
    match result.status {
        tron::Status::Converged => {}
        tron::Status::IterationCap => warnings.push(TrainWarning::IterationCap),
        tron::Status::Stalled => warnings.push(TrainWarning::Stalled),
    }
    let mut model = Model::from_parts(vocabulary, result.weights)?;
    model.set_meta("C", io::format_decimal(F::of(params.c)));
    model.set_meta("tol", io::format_decimal(F::of(params.tol)));
    Ok(TrainOutcome {
        model,
        iterations: result.iterations,
        gradient_norm: result.gradient_norm,
        loss: result.loss,
        warnings,
    })
}
