//! Example generation, training of the per-(role, scope) classifiers, and
//! decoding to one argument per (predicate, role).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::classifier::ClassifierError;
use crate::corpus::{CorpusError, Role, TokenRef};
use crate::features::FeatureError;

mod decode;
mod deps;
mod examples;
mod modelset;

pub use decode::{decode, predict_corpus, predict_document, write_predictions, read_predictions, PredictOptions};
pub use deps::{read_heads, resolve_heads, write_heads, DepSource, ProvidedHeads};
pub use examples::{generate_examples, train_all, CellReport, PairExample, TrainConfig};
pub use modelset::{ModelSet, MANIFEST_HEADER};

/// Whether a candidate is in the predicate's sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Intra,
    Inter,
}

impl Scope {
    pub const ALL: [Scope; 2] = [Scope::Intra, Scope::Inter];

    pub fn name(self) -> &'static str {
        match self {
            Scope::Intra => "intra",
            Scope::Inter => "inter",
        }
    }

    pub fn of(predicate: TokenRef, candidate: TokenRef) -> Scope {
        if predicate.sentence == candidate.sentence {
            Scope::Intra
        } else {
            Scope::Inter
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intra" => Ok(Scope::Intra),
            "inter" => Ok(Scope::Inter),
            _ => Err(format!("unknown scope `{s}`")),
        }
    }
}

/// Where dependency heads come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DepMode {
    None,
    Oracle,
    Provided,
}

impl DepMode {
    pub fn name(self) -> &'static str {
        match self {
            DepMode::None => "none",
            DepMode::Oracle => "oracle",
            DepMode::Provided => "provided",
        }
    }
}

impl fmt::Display for DepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DepMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(DepMode::None),
            "oracle" => Ok(DepMode::Oracle),
            "provided" => Ok(DepMode::Provided),
            _ => Err(format!("unknown dependency mode `{s}`")),
        }
    }
}

/// The decoded argument of one (predicate, role). `probability` and `scope`
/// are present exactly when `argument` is.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub document: String,
    pub predicate: TokenRef,
    pub role: Role,
    pub argument: Option<TokenRef>,
    pub probability: Option<f64>,
    pub scope: Option<Scope>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("heads file line {line}: {message}")]
    HeadsSyntax { line: usize, message: String },
    #[error("document `{doc}`: provided heads do not match the token counts")]
    HeadsMismatch { doc: String },
    #[error("document `{doc}`: no provided heads")]
    MissingProvided { doc: String },
    #[error("document `{doc}`: role `{role}` is not in the configured role set")]
    UnknownRole { doc: String, role: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model set: {0}")]
    Manifest(String),
    #[error("predictions line {line}: {message}")]
    PredictionSyntax { line: usize, message: String },
}

#[cfg(test)]
mod tests;
