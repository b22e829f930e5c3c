use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::{resolve_heads, DepSource, ModelSet, PipelineError, Scope};
use crate::classifier::{self, Example, Label, TrainParams, TrainWarning};
use crate::corpus::{argument_members, CaseFrame, CaseFrames, Corpus, Document, Role, TokenRef};
use crate::features::{Extractor, FeatureConfig, FeatureSet, SparseVector, Vocabulary};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub features: FeatureConfig,
    pub roles: Vec<Role>,
    pub params: TrainParams,
    /// Keep probability for negative pairs in every scope.
    pub neg_subsample: Option<f64>,
    /// Keep probability for inter-sentence negatives; overrides
    /// `neg_subsample` for that scope.
    pub neg_subsample_inter: Option<f64>,
    pub seed: u64,
    /// Minimum occurrence count for a feature to enter a cell vocabulary.
    pub min_count: usize,
    /// Candidate POS allow-list; `None` admits every token.
    pub candidate_pos: Option<BTreeSet<String>>,
    pub case_frames: CaseFrames,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            features: FeatureConfig::default(),
            roles: Role::defaults(),
            params: TrainParams::default(),
            neg_subsample: None,
            neg_subsample_inter: None,
            seed: 0,
            min_count: 1,
            candidate_pos: None,
            case_frames: CaseFrames::Gold,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.features.validate()?;
        if self.roles.is_empty() {
            return Err(PipelineError::Config("at least one role is required".into()));
        }
        let mut seen = HashSet::new();
        for r in &self.roles {
            let s = r.as_str();
            if s.is_empty() || s.contains(|c: char| c.is_whitespace() || c == ',' || c == '/' || c == '.') {
                return Err(PipelineError::Config(format!("invalid role label `{s}`")));
            }
            if !seen.insert(s) {
                return Err(PipelineError::Config(format!("duplicate role `{s}`")));
            }
        }
        for rate in [self.neg_subsample, self.neg_subsample_inter].into_iter().flatten() {
            if !(0.0..=1.0).contains(&rate) {
                return Err(PipelineError::Config(format!("subsample rate {rate} outside [0, 1]")));
            }
        }
        if self.min_count == 0 {
            return Err(PipelineError::Config("min_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Keep probability for negatives of `scope`.
    pub fn keep_rate(&self, scope: Scope) -> f64 {
        match scope {
            Scope::Inter => self.neg_subsample_inter.or(self.neg_subsample),
            Scope::Intra => self.neg_subsample,
        }
        .unwrap_or(1.0)
    }
}

/// One labeled (predicate, candidate) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairExample {
    pub document: usize,
    pub predicate: TokenRef,
    pub candidate: TokenRef,
    pub label: Label,
    pub features: FeatureSet,
}

pub(crate) fn candidates<'a>(
    doc: &'a Document,
    predicate: TokenRef,
    scope: Option<Scope>,
    pos: Option<&'a BTreeSet<String>>,
) -> impl Iterator<Item = TokenRef> + 'a {
    doc.token_refs().filter(move |&c| {
        c != predicate
            && scope.map_or(true, |s| Scope::of(predicate, c) == s)
            && pos.map_or(true, |allowed| allowed.contains(&doc.sentences[c.sentence].tokens[c.token].pos))
    })
}

type Positives = HashMap<(TokenRef, Role), HashSet<TokenRef>>;

fn positives(doc: &Document, roles: &[Role]) -> Result<Positives, PipelineError> {
    let mut out = Positives::new();
    for (pred, role, members) in argument_members(doc) {
        if !roles.contains(&role) {
            return Err(PipelineError::UnknownRole {
                doc: doc.id.clone(),
                role: role.as_str().to_string(),
            });
        }
        out.insert((pred, role), members.into_iter().collect());
    }
    Ok(out)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic keep decision for one negative pair.
fn keep_negative(rate: f64, seed: u64, role: &Role, scope: Scope, doc: usize, p: TokenRef, c: TokenRef) -> bool {
    if rate >= 1.0 {
        return true;
    }
    let mut h = splitmix(seed);
    for b in role.as_str().bytes() {
        h = splitmix(h ^ b as u64);
    }
    for x in [scope as u64, doc as u64, p.sentence as u64, p.token as u64, c.sentence as u64, c.token as u64] {
        h = splitmix(h ^ x);
    }
    ((h >> 11) as f64 / (1u64 << 53) as f64) < rate
}

fn case_frame(config: &TrainConfig, doc: &Document, pred: TokenRef) -> Result<CaseFrame, PipelineError> {
    if config.features.use_case_frame {
        Ok(config.case_frames.flags(doc, pred, &config.roles)?)
    } else {
        Ok(CaseFrame::new())
    }
}

/// Labeled pairs of one (role, scope) cell in document order.
pub fn generate_examples(
    corpus: &Corpus,
    role: &Role,
    scope: Scope,
    config: &TrainConfig,
    deps: &DepSource,
) -> Result<Vec<PairExample>, PipelineError> {
    config.validate()?;
    let rate = config.keep_rate(scope);
    let mut out = Vec::new();
    for (d, doc) in corpus.documents.iter().enumerate() {
        let gold = positives(doc, &config.roles)?;
        let heads = if config.features.use_dep { resolve_heads(doc, deps)? } else { None };
        let extractor = Extractor::new(doc, &config.features, heads.as_ref())?;
        for pred in &doc.predicates {
            let p = pred.location;
            let cf = case_frame(config, doc, p)?;
            let members = gold.get(&(p, role.clone()));
            for c in candidates(doc, p, Some(scope), config.candidate_pos.as_ref()) {
                let positive = members.is_some_and(|m| m.contains(&c));
                if !positive && !keep_negative(rate, config.seed, role, scope, d, p, c) {
                    continue;
                }
                out.push(PairExample {
                    document: d,
                    predicate: p,
                    candidate: c,
                    label: Label::from_bool(positive),
                    features: extractor.extract(p, c, &cf)?,
                });
            }
        }
    }
    Ok(out)
}

/// Training summary of one (role, scope) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellReport {
    pub role: Role,
    pub scope: Scope,
    pub examples: usize,
    pub positives: usize,
    pub features: usize,
    pub iterations: usize,
    pub warnings: Vec<TrainWarning>,
}

impl CellReport {
    pub fn is_degenerate(&self) -> bool {
        self.warnings.iter().any(|w| w.is_degenerate())
    }
}

struct Pair {
    document: usize,
    predicate: TokenRef,
    candidate: TokenRef,
    ids: Vec<u32>,
}

struct DocumentPairs {
    strings: Vec<String>,
    pairs: [Vec<Pair>; 2],
    positives: Positives,
}

fn featurize_document(
    d: usize,
    doc: &Document,
    config: &TrainConfig,
    deps: &DepSource,
) -> Result<DocumentPairs, PipelineError> {
    let gold = positives(doc, &config.roles)?;
    let heads = if config.features.use_dep { resolve_heads(doc, deps)? } else { None };
    let extractor = Extractor::new(doc, &config.features, heads.as_ref())?;
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut strings = Vec::new();
    let mut pairs: [Vec<Pair>; 2] = [Vec::new(), Vec::new()];
    for pred in &doc.predicates {
        let p = pred.location;
        let cf = case_frame(config, doc, p)?;
        for c in candidates(doc, p, None, config.candidate_pos.as_ref()) {
            let mut ids = Vec::new();
            extractor.visit(p, c, &cf, |k| {
                let id = match index.get(k) {
                    Some(&id) => id,
                    None => {
                        let id = strings.len() as u32;
                        index.insert(k.to_string(), id);
                        strings.push(k.to_string());
                        id
                    }
                };
                ids.push(id);
            })?;
            pairs[Scope::of(p, c) as usize].push(Pair {
                document: d,
                predicate: p,
                candidate: c,
                ids,
            });
        }
    }
    Ok(DocumentPairs {
        strings,
        pairs,
        positives: gold,
    })
}

/// Trains one classifier per (role, scope). Each cell's vocabulary is fitted
/// on its own example stream exactly as [`crate::features::fit_vocabulary`]
/// would over the cell's feature sets.
pub fn train_all<F: Scalar>(
    corpus: &Corpus,
    config: &TrainConfig,
    deps: &DepSource,
) -> Result<(ModelSet<F>, Vec<CellReport>), PipelineError> {
    config.validate()?;
    let per_doc: Vec<DocumentPairs> = corpus
        .documents
        .par_iter()
        .enumerate()
        .map(|(d, doc)| featurize_document(d, doc, config, deps))
        .collect::<Result<_, _>>()?;

    // merge document-local ids into one interner
    let mut global: HashMap<String, u32> = HashMap::new();
    let mut strings: Vec<String> = Vec::new();
    let mut scopes: [Vec<Pair>; 2] = [Vec::new(), Vec::new()];
    let mut gold: Vec<Positives> = Vec::with_capacity(per_doc.len());
    for doc in per_doc {
        let local: Vec<u32> = doc
            .strings
            .into_iter()
            .map(|s| match global.get(&s) {
                Some(&id) => id,
                None => {
                    let id = strings.len() as u32;
                    global.insert(s.clone(), id);
                    strings.push(s);
                    id
                }
            })
            .collect();
        for (s, pairs) in doc.pairs.into_iter().enumerate() {
            scopes[s].extend(pairs.into_iter().map(|mut p| {
                for id in &mut p.ids {
                    *id = local[*id as usize];
                }
                p
            }));
        }
        gold.push(doc.positives);
    }
    drop(global);

    // renumber by lexicographic order so that each pair's sorted ids follow
    // the sorted feature-string order
    let mut order: Vec<u32> = (0..strings.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| strings[a as usize].cmp(&strings[b as usize]));
    let mut rank = vec![0u32; strings.len()];
    for (r, &id) in order.iter().enumerate() {
        rank[id as usize] = r as u32;
    }
    let sorted_strings: Vec<String> = {
        let mut slots: Vec<Option<String>> = strings.into_iter().map(Some).collect();
        order.iter().map(|&id| slots[id as usize].take().unwrap_or_default()).collect()
    };
    for pairs in scopes.iter_mut() {
        pairs.par_iter_mut().for_each(|p| {
            for id in &mut p.ids {
                *id = rank[*id as usize];
            }
            p.ids.sort_unstable();
            p.ids.dedup();
        });
    }

    let cells: Vec<(Role, Scope)> = config
        .roles
        .iter()
        .flat_map(|r| Scope::ALL.iter().map(move |&s| (r.clone(), s)))
        .collect();
    let trained: Vec<(classifier::Model<F>, CellReport)> = cells
        .par_iter()
        .map(|(role, scope)| {
            train_cell(&scopes[*scope as usize], &gold, &sorted_strings, role, *scope, config)
        })
        .collect::<Result<_, _>>()?;

    let mut models = Vec::new();
    let mut reports = Vec::new();
    for (model, report) in trained {
        models.push(((report.role.clone(), report.scope), model));
        reports.push(report);
    }
    let set = ModelSet::new(
        config.features.clone(),
        deps.mode(),
        config.roles.clone(),
        config.candidate_pos.clone(),
        models,
    )?;
    Ok((set, reports))
}

fn train_cell<F: Scalar>(
    pairs: &[Pair],
    gold: &[Positives],
    strings: &[String],
    role: &Role,
    scope: Scope,
    config: &TrainConfig,
) -> Result<(classifier::Model<F>, CellReport), PipelineError> {
    let rate = config.keep_rate(scope);
    let mut selected: Vec<(&Pair, bool)> = Vec::new();
    let key_role = role.clone();
    for p in pairs {
        let positive = gold[p.document]
            .get(&(p.predicate, key_role.clone()))
            .is_some_and(|m| m.contains(&p.candidate));
        if positive || keep_negative(rate, config.seed, role, scope, p.document, p.predicate, p.candidate) {
            selected.push((p, positive));
        }
    }

    let mut counts: HashMap<u32, usize> = HashMap::new();
    for (p, _) in &selected {
        for &id in &p.ids {
            *counts.entry(id).or_insert(0) += 1;
        }
    }
    let mut cell_id: HashMap<u32, u32> = HashMap::new();
    let mut cell_strings = Vec::new();
    for (p, _) in &selected {
        for &id in &p.ids {
            if counts[&id] >= config.min_count && !cell_id.contains_key(&id) {
                cell_id.insert(id, cell_strings.len() as u32);
                cell_strings.push(strings[id as usize].clone());
            }
        }
    }
    let examples: Vec<Example> = selected
        .iter()
        .map(|(p, positive)| {
            let idx = p.ids.iter().filter_map(|id| cell_id.get(id).copied()).collect();
            Example::new(SparseVector::from_unsorted(idx), Label::from_bool(*positive))
        })
        .collect();
    let vocabulary = Vocabulary::from_strings(cell_strings)
        .map_err(|s| PipelineError::Config(format!("duplicate feature `{s}`")))?;
    let features = vocabulary.len();
    let outcome = classifier::train::<F>(&examples, vocabulary, &config.params)?;
    let mut model = outcome.model;
    model.set_meta("role", role.as_str());
    model.set_meta("scope", scope.name());
    let report = CellReport {
        role: role.clone(),
        scope,
        examples: examples.len(),
        positives: examples.iter().filter(|e| e.label == Label::Positive).count(),
        features,
        iterations: outcome.iterations,
        warnings: outcome.warnings,
    };
    Ok((model, report))
}
