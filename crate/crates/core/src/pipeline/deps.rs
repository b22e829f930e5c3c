//! Dependency views: none, the corpus's own heads, or a sidecar heads file.
//!
//! Sidecar format: `#doc <id>`, `#sent <n>`, then `<tok-index>\t<head or _>`
//! lines, following the corpus framing.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{DepMode, PipelineError};
use crate::corpus::{Corpus, Document, Heads};

/// Heads per document id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProvidedHeads {
    pub documents: BTreeMap<String, Heads>,
}

impl ProvidedHeads {
    /// The corpus's own heads as a sidecar.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let documents = corpus
            .documents
            .iter()
            .map(|d| {
                let heads = d
                    .sentences
                    .iter()
                    .map(|s| s.tokens.iter().map(|t| t.head).collect())
                    .collect();
                (d.id.clone(), Heads::new(heads))
            })
            .collect();
        ProvidedHeads { documents }
    }
}

#[derive(Clone, Debug, Default)]
pub enum DepSource {
    #[default]
    None,
    Oracle,
    Provided(ProvidedHeads),
}

impl DepSource {
    pub fn mode(&self) -> DepMode {
        match self {
            DepSource::None => DepMode::None,
            DepSource::Oracle => DepMode::Oracle,
            DepSource::Provided(_) => DepMode::Provided,
        }
    }
}

/// The dependency view of `doc` under `source`.
pub fn resolve_heads(doc: &Document, source: &DepSource) -> Result<Option<Heads>, PipelineError> {
    match source {
        DepSource::None => Ok(None),
        DepSource::Oracle => Ok(Some(Heads::gold(doc)?)),
        DepSource::Provided(p) => {
            let heads = p
                .documents
                .get(&doc.id)
                .ok_or_else(|| PipelineError::MissingProvided { doc: doc.id.clone() })?;
            if !heads.matches(doc) {
                return Err(PipelineError::HeadsMismatch { doc: doc.id.clone() });
            }
            for s in 0..heads.num_sentences() {
                let len = heads.sentence(s).len();
                if heads.sentence(s).iter().flatten().any(|&h| h >= len) {
                    return Err(PipelineError::HeadsMismatch { doc: doc.id.clone() });
                }
            }
            Ok(Some(heads.clone()))
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> PipelineError {
    PipelineError::HeadsSyntax {
        line,
        message: message.into(),
    }
}

pub fn read_heads<R: BufRead>(reader: R) -> Result<ProvidedHeads, PipelineError> {
    let mut out = ProvidedHeads::default();
    let mut current: Option<(String, Vec<Vec<Option<usize>>>)> = None;
    let finish = |out: &mut ProvidedHeads, cur: Option<(String, Vec<Vec<Option<usize>>>)>, line: usize| {
        if let Some((id, sents)) = cur {
            if out.documents.insert(id.clone(), Heads::new(sents)).is_some() {
                return Err(syntax(line, format!("duplicate document `{id}`")));
            }
        }
        Ok(())
    };
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(id) = line.strip_prefix("#doc ") {
            finish(&mut out, current.take(), n)?;
            if id.is_empty() {
                return Err(syntax(n, "empty document id"));
            }
            current = Some((id.to_string(), Vec::new()));
        } else if let Some(idx) = line.strip_prefix("#sent ") {
            let (_, sents) = current.as_mut().ok_or_else(|| syntax(n, "sentence outside a document"))?;
            let idx: usize = idx.parse().map_err(|_| syntax(n, "malformed sentence index"))?;
            if idx != sents.len() {
                return Err(syntax(n, "non-contiguous sentence index"));
            }
            sents.push(Vec::new());
        } else {
            let tokens = current
                .as_mut()
                .and_then(|(_, s)| s.last_mut())
                .ok_or_else(|| syntax(n, "token line outside a sentence"))?;
            let (idx, head) = line
                .split_once('\t')
                .ok_or_else(|| syntax(n, "expected `<tok>\\t<head>`"))?;
            let idx: usize = idx.parse().map_err(|_| syntax(n, "malformed token index"))?;
            if idx != tokens.len() {
                return Err(syntax(n, "non-contiguous token index"));
            }
            let head = match head {
                "_" => None,
                h => Some(h.parse().map_err(|_| syntax(n, "malformed head"))?),
            };
            tokens.push(head);
        }
    }
    finish(&mut out, current, 0)?;
    Ok(out)
}

pub fn write_heads<W: Write>(heads: &ProvidedHeads, mut w: W) -> std::io::Result<()> {
    for (id, h) in &heads.documents {
        writeln!(w, "#doc {id}")?;
        for s in 0..h.num_sentences() {
            writeln!(w, "#sent {s}")?;
            for (t, head) in h.sentence(s).iter().enumerate() {
                match head {
                    Some(x) => writeln!(w, "{t}\t{x}")?,
                    None => writeln!(w, "{t}\t_")?,
                }
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
