//! Pointwise predicate-argument structure analysis (PASA) and zero anaphora
//! resolution (ZAR).
//!
//! Every (predicate, candidate word) pair in a document is scored by a binary
//! L2-regularized logistic regression classifier. There is one classifier per
//! semantic role and scope (intra-sentence or inter-sentence), and for every
//! predicate and role the single most probable candidate is emitted. Feature
//! groups can be toggled so that the analyzer runs with no dependency
//! information, with gold dependencies, or with noisy dependencies.
//!
//! The numeric core ([`classifier`], [`evaluation`]) is generic over the
//! [`Scalar`] type; the aliases below fix it to `f64` (and `f32`) for everyday
//! use.

pub mod classifier;
pub mod corpus;
pub mod depnoise;
pub mod evaluation;
pub mod features;
pub mod pipeline;
pub mod scalar;
pub mod synthgen;

pub use corpus::{
    Category, CorefCluster, Corpus, CorpusError, Document, GoldArgument, GoldInstance, Heads,
    PredicateInstance, Role, Sentence, Token, TokenRef,
};
pub use features::{FeatureConfig, FeatureSet, Vocabulary};
pub use pipeline::{DepMode, Prediction, Scope};
pub use scalar::Scalar;

/// Double-precision logistic regression model.
pub type Model = classifier::Model<f64>;
/// Single-precision logistic regression model.
pub type Model32 = classifier::Model<f32>;
/// Double-precision set of per-(role, scope) models.
pub type ModelSet = pipeline::ModelSet<f64>;
/// Single-precision set of per-(role, scope) models.
pub type ModelSet32 = pipeline::ModelSet<f32>;
/// Training outcome for a double-precision model.
pub type TrainOutcome = classifier::TrainOutcome<f64>;
