#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pasakit::classifier::Model;
use pasakit::corpus::{case_frame_flags, Corpus, Document, Heads, Role, TokenRef};
use pasakit::features::Extractor;
use pasakit::pipeline::ModelSet;
use pasakit::synthgen::{generate, Profile, SynthSpec};
use pasakit::{Category, Prediction, Scalar, Scope};

pub fn synth(profile: Profile, documents: usize, sentences: usize, tokens: usize, seed: u64) -> Corpus {
    generate(&SynthSpec {
        documents,
        sentences_per_doc: sentences,
        tokens_per_sentence: tokens,
        rule_profile: profile,
        seed,
        ..SynthSpec::default()
    })
    .unwrap()
    .corpus
}

/// Gold label of every ordered (predicate, candidate) pair for `role`, from
/// the raw annotations: a candidate is positive when it is an annotated
/// target or shares a cluster with one.
pub fn brute_labels(doc: &Document, role: &Role) -> BTreeMap<(TokenRef, TokenRef), bool> {
    let mut out = BTreeMap::new();
    for pred in &doc.predicates {
        let targets: Vec<TokenRef> = pred.arguments.iter().filter(|a| a.role == *role).map(|a| a.target).collect();
        let mut positive: BTreeSet<TokenRef> = targets.iter().copied().collect();
        for cl in &doc.clusters {
            if cl.members.iter().any(|m| targets.contains(m)) {
                positive.extend(cl.members.iter().copied());
            }
        }
        for (s, sent) in doc.sentences.iter().enumerate() {
            for t in 0..sent.tokens.len() {
                let c = TokenRef::new(s, t);
                if c != pred.location {
                    out.insert((pred.location, c), positive.contains(&c));
                }
            }
        }
    }
    out
}

pub fn brute_scope(p: TokenRef, c: TokenRef) -> Scope {
    if p.sentence == c.sentence {
        Scope::Intra
    } else {
        Scope::Inter
    }
}

/// Reference decoder: every candidate is featurized and scored
/// independently, then filtered and reduced with a plain loop.
pub fn brute_predict<F: Scalar>(set: &ModelSet<F>, doc: &Document, heads: Option<&Heads>, threshold: f64) -> Vec<Prediction> {
    let heads = if set.features.use_dep { heads } else { None };
    let extractor = Extractor::new(doc, &set.features, heads).unwrap();
    let mut out = Vec::new();
    for pred in &doc.predicates {
        let p = pred.location;
        let cf = if set.features.use_case_frame {
            case_frame_flags(doc, p, &set.roles).unwrap()
        } else {
            Default::default()
        };
        let mut all: Vec<(TokenRef, Scope, Vec<f64>)> = Vec::new();
        for (s, sent) in doc.sentences.iter().enumerate() {
            for t in 0..sent.tokens.len() {
                let c = TokenRef::new(s, t);
                if c == p {
                    continue;
                }
                let fs = extractor.extract(p, c, &cf).unwrap();
                let scope = brute_scope(p, c);
                let probs = set
                    .roles
                    .iter()
                    .map(|r| {
                        let m: &Model<F> = set.model(r, scope);
                        m.predict_features(&fs).to_f64().unwrap()
                    })
                    .collect();
                all.push((c, scope, probs));
            }
        }
        for (ri, role) in set.roles.iter().enumerate() {
            let above: Vec<&(TokenRef, Scope, Vec<f64>)> = all.iter().filter(|x| x.2[ri] > threshold).collect();
            let best = above
                .iter()
                .map(|x| x.2[ri])
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
            let winner = best.and_then(|b| above.iter().filter(|x| x.2[ri] == b).min_by_key(|x| x.0));
            out.push(Prediction {
                document: doc.id.clone(),
                predicate: p,
                role: role.clone(),
                argument: winner.map(|w| w.0),
                probability: winner.map(|w| w.2[ri]),
                scope: winner.map(|w| w.1),
            });
        }
    }
    out
}

/// F on the Depend category over all roles, as a percentage.
pub fn depend_f(report: &pasakit::evaluation::EvalReport) -> f64 {
    report.get(None, Some(Category::Depend)).f_bp() as f64 / 100.0
}
