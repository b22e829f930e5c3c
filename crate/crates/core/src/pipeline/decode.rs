use std::io::{BufRead, Write};

use rayon::prelude::*;

use super::examples::candidates;
use super::{resolve_heads, DepSource, ModelSet, PipelineError, Prediction, Scope};
use crate::classifier::Model;
use crate::corpus::{CaseFrame, CaseFrames, Corpus, Document, Heads, Role, TokenRef};
use crate::features::{Extractor, SparseVector};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct PredictOptions {
    /// Candidates must score strictly above this probability.
    pub threshold: f64,
    /// Skip inter-sentence candidates entirely.
    pub intra_only: bool,
    pub case_frames: CaseFrames,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            threshold: 0.5,
            intra_only: false,
            case_frames: CaseFrames::Gold,
        }
    }
}

/// The most probable candidate above `threshold`; ties go to the earlier
/// document position.
pub fn decode<F: Scalar>(
    scored: impl IntoIterator<Item = (TokenRef, Scope, F)>,
    threshold: F,
) -> Option<(TokenRef, Scope, F)> {
    let mut best: Option<(TokenRef, Scope, F)> = None;
    for (c, s, p) in scored {
        if !(p > threshold) {
            continue;
        }
        let better = match best {
            None => true,
            Some((bc, _, bp)) => p > bp || (p == bp && c < bc),
        };
        if better {
            best = Some((c, s, p));
        }
    }
    best
}

/// One [`Prediction`] per annotated predicate and configured role, in
/// predicate then role order. `heads` is required when the model set uses
/// dependency features.
pub fn predict_document<F: Scalar>(
    set: &ModelSet<F>,
    doc: &Document,
    heads: Option<&Heads>,
    options: &PredictOptions,
) -> Result<Vec<Prediction>, PipelineError> {
    let heads = if set.features.use_dep { heads } else { None };
    let extractor = Extractor::new(doc, &set.features, heads)?;
    let threshold = F::of(options.threshold);
    let per_scope: Vec<Vec<&Model<F>>> = Scope::ALL
        .iter()
        .map(|&s| set.roles.iter().map(|r| set.model(r, s)).collect())
        .collect();
    let mut out = Vec::new();
    for pred in &doc.predicates {
        let p = pred.location;
        let cf = if set.features.use_case_frame {
            options.case_frames.flags(doc, p, &set.roles)?
        } else {
            CaseFrame::new()
        };
        let scope = options.intra_only.then_some(Scope::Intra);
        let mut scored: Vec<Vec<(TokenRef, Scope, F)>> = vec![Vec::new(); set.roles.len()];
        let mut ids: Vec<Vec<u32>> = vec![Vec::new(); set.roles.len()];
        for c in candidates(doc, p, scope, set.candidate_pos.as_ref()) {
            let s = Scope::of(p, c);
            let models = &per_scope[s as usize];
            for v in ids.iter_mut() {
                v.clear();
            }
            extractor.visit(p, c, &cf, |k| {
                for (v, m) in ids.iter_mut().zip(models) {
                    if let Some(i) = m.vocabulary().get(k) {
                        v.push(i);
                    }
                }
            })?;
            for (r, m) in models.iter().enumerate() {
                let x = SparseVector::from_unsorted(std::mem::take(&mut ids[r]));
                scored[r].push((c, s, m.predict_proba(&x)));
            }
        }
        for (role, scored) in set.roles.iter().zip(scored) {
            let best = decode(scored, threshold);
            out.push(Prediction {
                document: doc.id.clone(),
                predicate: p,
                role: role.clone(),
                argument: best.map(|b| b.0),
                probability: best.map(|b| b.2.to_f64().unwrap_or(f64::NAN)),
                scope: best.map(|b| b.1),
            });
        }
    }
    Ok(out)
}

/// Predictions for every document, in corpus order.
pub fn predict_corpus<F: Scalar>(
    set: &ModelSet<F>,
    corpus: &Corpus,
    deps: &DepSource,
    options: &PredictOptions,
) -> Result<Vec<Prediction>, PipelineError> {
    let per_doc: Vec<Vec<Prediction>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let heads = if set.features.use_dep { resolve_heads(doc, deps)? } else { None };
            predict_document(set, doc, heads.as_ref(), options)
        })
        .collect::<Result<_, _>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}

pub fn write_predictions<W: Write>(predictions: &[Prediction], mut w: W) -> std::io::Result<()> {
    for p in predictions {
        write!(w, "{}\t{}\t{}\t", p.document, p.predicate, p.role)?;
        match (p.argument, p.probability, p.scope) {
            (Some(a), Some(prob), Some(s)) => writeln!(w, "{a}\t{prob:.6}\t{s}")?,
            _ => writeln!(w, "_\t_\t_")?,
        }
    }
    Ok(())
}

pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<Prediction>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('%') {
            continue;
        }
        let bad = |m: &str| PipelineError::PredictionSyntax {
            line: n,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(bad("expected 6 TAB-separated fields"));
        }
        let predicate: TokenRef = f[1].parse().map_err(|_| bad("malformed predicate reference"))?;
        if f[0].is_empty() || f[2].is_empty() {
            return Err(bad("empty document id or role"));
        }
        let (argument, probability, scope) = match (f[3], f[4], f[5]) {
            ("_", "_", "_") => (None, None, None),
            (a, p, s) => {
                let a: TokenRef = a.parse().map_err(|_| bad("malformed argument reference"))?;
                let p: f64 = p.parse().map_err(|_| bad("malformed probability"))?;
                let s: Scope = s.parse().map_err(|e: String| bad(&e))?;
                (Some(a), Some(p), Some(s))
            }
        };
        out.push(Prediction {
            document: f[0].to_string(),
            predicate,
            role: Role::new(f[2]),
            argument,
            probability,
            scope,
        });
    }
    Ok(out)
}
