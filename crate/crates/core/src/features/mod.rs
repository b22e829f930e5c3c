//! String-keyed features for (predicate, candidate) pairs.
//!
//! Every feature is a string `<group>:<template>[@<offset>]=<value>`. The
//! groups are `pw` (pointwise features that need no syntax), `lang`
//! (case-marker and position features) and `dep` (dependency features).
//! Disabling a group removes exactly the features with its prefix.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use thiserror::Error;

use crate::corpus::{CaseFrame, Document, Heads, TokenRef};

mod vocab;

pub use vocab::{fit_vocabulary, SparseVector, Vocabulary, VocabularyBuilder};

pub const PAD: &str = "<pad>";
pub const ROOT: &str = "<root>";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureConfig {
    pub use_pwfeat: bool,
    pub use_lang: bool,
    pub use_dep: bool,
    /// Emit gold case-frame flags (part of the `pw` group).
    pub use_case_frame: bool,
    pub marker_set: Vec<String>,
    pub distance_divisors: Vec<i64>,
    pub dep_max_steps: usize,
    pub window_unigram: usize,
    pub window_ngram: usize,
    pub pair_window: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            use_pwfeat: true,
            use_lang: true,
            use_dep: false,
            use_case_frame: true,
            marker_set: ["は", "が", "を", "に"].iter().map(|s| s.to_string()).collect(),
            distance_divisors: vec![2, 3, 4, 5],
            dep_max_steps: 3,
            window_unigram: 10,
            window_ngram: 5,
            pair_window: 2,
        }
    }
}

impl FeatureConfig {
    /// Parses a group list such as `pwfeat+lang+dep`.
    pub fn with_groups(groups: &str) -> Result<Self, FeatureError> {
        let mut config = FeatureConfig {
            use_pwfeat: false,
            use_lang: false,
            use_dep: false,
            ..FeatureConfig::default()
        };
        for g in groups.split('+') {
            match g {
                "pwfeat" => config.use_pwfeat = true,
                "lang" => config.use_lang = true,
                "dep" => config.use_dep = true,
                other => return Err(FeatureError::UnknownGroup(other.to_string())),
            }
        }
        Ok(config)
    }

    /// The inverse of [`FeatureConfig::with_groups`].
    pub fn groups(&self) -> String {
        let mut parts = Vec::new();
        if self.use_pwfeat {
            parts.push("pwfeat");
        }
        if self.use_lang {
            parts.push("lang");
        }
        if self.use_dep {
            parts.push("dep");
        }
        parts.join("+")
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.window_unigram == 0 || self.window_ngram == 0 || self.pair_window == 0 {
            return Err(FeatureError::InvalidConfig("windows must be positive".into()));
        }
        if self.dep_max_steps == 0 {
            return Err(FeatureError::InvalidConfig("dep_max_steps must be at least 1".into()));
        }
        if self.distance_divisors.iter().any(|&d| d < 2) {
            return Err(FeatureError::InvalidConfig("distance divisors must be at least 2".into()));
        }
        if self
            .marker_set
            .iter()
            .any(|m| m.is_empty() || m.contains(['\t', '\n', ',']))
        {
            return Err(FeatureError::InvalidConfig("invalid case marker".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("dependency features requested but no dependency source was given")]
    MissingDependencies,
    #[error("no head data for sentence {0}")]
    MissingHeads(usize),
    #[error("candidate and predicate are the same token {0}")]
    SameToken(TokenRef),
    #[error("token reference {0} does not resolve")]
    Dangling(TokenRef),
    #[error("token index {0} outside the sentence")]
    OutOfRange(usize),
    #[error("unknown feature group `{0}`")]
    UnknownGroup(String),
    #[error("invalid feature configuration: {0}")]
    InvalidConfig(String),
}

/// A set of feature strings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureSet {
    keys: BTreeSet<String>,
}

impl FeatureSet {
    pub fn new() -> Self {
        FeatureSet::default()
    }

    pub fn insert(&mut self, key: impl Into<String>) -> bool {
        self.keys.insert(key.into())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.keys.contains(key)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Keys in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(String::as_str)
    }

    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.iter().filter(move |k| k.starts_with(prefix))
    }

    /// Golden-file dump: one key per line, sorted.
    pub fn write_golden<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for k in &self.keys {
            writeln!(w, "{k}")?;
        }
        Ok(())
    }
}

impl<S: Into<String>> FromIterator<S> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        FeatureSet {
            keys: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// Bounded dependency path between a candidate and a predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepRelation {
    /// `k` head links lead from the candidate to the predicate.
    ArgToPred(usize),
    /// `k` head links lead from the predicate to the candidate.
    PredToArg(usize),
    None,
}

impl fmt::Display for DepRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepRelation::ArgToPred(k) => write!(f, "A→P:{k}"),
            DepRelation::PredToArg(k) => write!(f, "P→A:{k}"),
            DepRelation::None => f.write_str("none"),
        }
    }
}

fn steps_to(heads: &[Option<usize>], from: usize, to: usize, max_steps: usize) -> Option<usize> {
    let mut cur = from;
    for k in 1..=max_steps {
        match heads.get(cur).copied().flatten() {
            Some(h) if h == to => return Some(k),
            Some(h) if h < heads.len() => cur = h,
            _ => return None,
        }
    }
    None
}

/// Relation between candidate `i` and predicate `j` in one sentence, looking
/// at most `max_steps` head links in either direction. The walk is bounded,
/// so cyclic head structures are fine; if both directions reach, the shorter
/// one wins.
pub fn dep_relation(
    heads: &[Option<usize>],
    i: usize,
    j: usize,
    max_steps: usize,
) -> Result<DepRelation, FeatureError> {
    if i >= heads.len() {
        return Err(FeatureError::OutOfRange(i));
    }
    if j >= heads.len() {
        return Err(FeatureError::OutOfRange(j));
    }
    if i == j {
        return Err(FeatureError::SameToken(TokenRef::new(0, i)));
    }
    if heads.iter().all(Option::is_none) {
        return Err(FeatureError::MissingHeads(0));
    }
    let up = steps_to(heads, i, j, max_steps);
    let down = steps_to(heads, j, i, max_steps);
    Ok(match (up, down) {
        (Some(a), Some(b)) if b < a => DepRelation::PredToArg(b),
        (Some(a), _) => DepRelation::ArgToPred(a),
        (None, Some(b)) => DepRelation::PredToArg(b),
        (None, None) => DepRelation::None,
    })
}

fn bucket(sentence: usize) -> &'static str {
    match sentence {
        0 => "0",
        1 => "1",
        2 => "2",
        3..=5 => "3-5",
        6..=10 => "6-10",
        _ => ">10",
    }
}

fn signed(count: usize, candidate_first: bool) -> i64 {
    if candidate_first {
        -(count as i64)
    } else {
        count as i64
    }
}

/// Per-document feature extractor. Window features of each token are built
/// once and shared by every pair that token takes part in.
pub struct Extractor<'a> {
    doc: &'a Document,
    config: &'a FeatureConfig,
    heads: Option<&'a Heads>,
    offsets: Vec<usize>,
    // prefix counts over global positions
    predicates_before: Vec<usize>,
    markers_before: Vec<usize>,
    arg_context: Vec<Vec<Vec<String>>>,
    pred_context: Vec<Vec<Option<Vec<String>>>>,
}

impl<'a> Extractor<'a> {
    /// `heads` is the dependency view; it is required when the `dep` group
    /// is enabled and ignored otherwise.
    pub fn new(
        doc: &'a Document,
        config: &'a FeatureConfig,
        heads: Option<&'a Heads>,
    ) -> Result<Self, FeatureError> {
        if config.use_dep && heads.is_none() {
            return Err(FeatureError::MissingDependencies);
        }
        let offsets = doc.sentence_offsets();
        let total = doc.num_tokens();
        let mut is_pred = vec![false; total];
        for p in &doc.predicates {
            if let Some(&off) = offsets.get(p.location.sentence) {
                is_pred[off + p.location.token] = true;
            }
        }
        let mut predicates_before = Vec::with_capacity(total + 1);
        let mut markers_before = Vec::with_capacity(total + 1);
        predicates_before.push(0);
        markers_before.push(0);
        for r in doc.token_refs() {
            let g = offsets[r.sentence] + r.token;
            let surface = &doc.sentences[r.sentence].tokens[r.token].surface;
            predicates_before.push(predicates_before[g] + is_pred[g] as usize);
            markers_before.push(markers_before[g] + config.marker_set.contains(surface) as usize);
        }

        let mut ex = Extractor {
            doc,
            config,
            heads,
            offsets,
            predicates_before,
            markers_before,
            arg_context: Vec::new(),
            pred_context: Vec::new(),
        };
        if config.use_pwfeat {
            ex.arg_context = doc
                .sentences
                .iter()
                .enumerate()
                .map(|(s, sent)| (0..sent.len()).map(|t| ex.window_features(s, t, 'a')).collect())
                .collect();
            ex.pred_context = doc
                .sentences
                .iter()
                .map(|sent| vec![None; sent.len()])
                .collect();
            for p in &doc.predicates {
                let (s, t) = (p.location.sentence, p.location.token);
                ex.pred_context[s][t] = Some(ex.window_features(s, t, 'p'));
            }
        }
        Ok(ex)
    }

    pub fn document(&self) -> &'a Document {
        self.doc
    }

    fn window_features(&self, s: usize, t: usize, side: char) -> Vec<String> {
        let tokens = &self.doc.sentences[s].tokens;
        let word = |o: i64| -> &str {
            let i = t as i64 + o;
            if i < 0 || i >= tokens.len() as i64 {
                PAD
            } else {
                &tokens[i as usize].surface
            }
        };
        let tag = |o: i64| -> &str {
            let i = t as i64 + o;
            if i < 0 || i >= tokens.len() as i64 {
                PAD
            } else {
                &tokens[i as usize].pos
            }
        };
        let uni = self.config.window_unigram as i64;
        let ngram = self.config.window_ngram as i64;
        let mut out = Vec::new();
        for o in -uni..=uni {
            out.push(format!("pw:w1{side}@{o:+}={}", word(o)));
            out.push(format!("pw:t1{side}@{o:+}={}", tag(o)));
        }
        for o in -ngram..ngram {
            out.push(format!("pw:w2{side}@{o:+}={}|{}", word(o), word(o + 1)));
            out.push(format!("pw:t2{side}@{o:+}={}|{}", tag(o), tag(o + 1)));
        }
        for o in -ngram..ngram - 1 {
            out.push(format!("pw:w3{side}@{o:+}={}|{}|{}", word(o), word(o + 1), word(o + 2)));
            out.push(format!("pw:t3{side}@{o:+}={}|{}|{}", tag(o), tag(o + 1), tag(o + 2)));
        }
        out
    }

    fn check(&self, r: TokenRef) -> Result<(), FeatureError> {
        if self.doc.resolves(r) {
            Ok(())
        } else {
            Err(FeatureError::Dangling(r))
        }
    }

    fn global(&self, r: TokenRef) -> usize {
        self.offsets[r.sentence] + r.token
    }

    /// Calls `emit` once per feature of the pair. Keys may repeat (e.g. two
    /// leaves with the same surface); callers treat the output as a set.
    pub fn visit(
        &self,
        predicate: TokenRef,
        candidate: TokenRef,
        case_frame: &CaseFrame,
        mut emit: impl FnMut(&str),
    ) -> Result<(), FeatureError> {
        self.check(predicate)?;
        self.check(candidate)?;
        if predicate == candidate {
            return Err(FeatureError::SameToken(candidate));
        }
        let doc = self.doc;
        let config = self.config;
        let p_tok = doc.token(predicate).unwrap();
        let a_tok = doc.token(candidate).unwrap();
        let gp = self.global(predicate);
        let ga = self.global(candidate);
        let candidate_first = ga < gp;
        let (lo, hi) = if candidate_first { (ga, gp) } else { (gp, ga) };
        let word_between = hi - lo - 1;
        // strictly between: positions lo+1 .. hi-1
        let preds_between = self.predicates_before[hi] - self.predicates_before[lo + 1];
        let pdist = signed(preds_between, candidate_first);
        let mut buf = String::new();
        let put = |buf: &mut String, emit: &mut dyn FnMut(&str)| {
            emit(buf);
            buf.clear();
        };
        use std::fmt::Write as _;

        if config.use_pwfeat {
            let pctx = match &self.pred_context[predicate.sentence][predicate.token] {
                Some(v) => std::borrow::Cow::Borrowed(v),
                None => std::borrow::Cow::Owned(
                    self.window_features(predicate.sentence, predicate.token, 'p'),
                ),
            };
            for f in pctx.iter() {
                emit(f);
            }
            for f in &self.arg_context[candidate.sentence][candidate.token] {
                emit(f);
            }
            let _ = write!(buf, "pw:wpair={}|{}", p_tok.surface, a_tok.surface);
            put(&mut buf, &mut emit);
            let w = config.pair_window as i64;
            let tag = |r: TokenRef, o: i64| -> &str {
                let toks = &doc.sentences[r.sentence].tokens;
                let i = r.token as i64 + o;
                if i < 0 || i >= toks.len() as i64 {
                    PAD
                } else {
                    &toks[i as usize].pos
                }
            };
            for i in -w..=w {
                for j in -w..=w {
                    let _ = write!(buf, "pw:tpair@{i:+}{j:+}={}|{}", tag(predicate, i), tag(candidate, j));
                    put(&mut buf, &mut emit);
                }
            }
            let d = signed(word_between, candidate_first);
            let _ = write!(buf, "pw:wdist={d}");
            put(&mut buf, &mut emit);
            for &k in &config.distance_divisors {
                let _ = write!(buf, "pw:wdist/{k}={}", d / k);
                put(&mut buf, &mut emit);
            }
            let _ = write!(buf, "pw:pdist={pdist}");
            put(&mut buf, &mut emit);
            if config.use_case_frame {
                for (role, &flag) in case_frame {
                    if flag {
                        let _ = write!(buf, "pw:cf={role}");
                        put(&mut buf, &mut emit);
                    }
                }
            }
        }

        if config.use_lang {
            let sent = &doc.sentences[candidate.sentence].tokens;
            if let Some(next) = sent.get(candidate.token + 1) {
                if config.marker_set.contains(&next.surface) {
                    let _ = write!(buf, "lang:rmark={}", next.surface);
                    put(&mut buf, &mut emit);
                }
            }
            let _ = write!(buf, "lang:sentpos={}", bucket(candidate.sentence));
            put(&mut buf, &mut emit);
            let sd = (candidate.sentence as i64 - predicate.sentence as i64).clamp(-5, 5);
            let _ = write!(buf, "lang:sentdist={sd}");
            put(&mut buf, &mut emit);
            let markers = self.markers_before[hi] - self.markers_before[lo + 1];
            let mdist = signed(markers, candidate_first);
            let _ = write!(buf, "lang:mdist={mdist}");
            put(&mut buf, &mut emit);
            let _ = write!(buf, "lang:pdist*mdist={pdist}|{mdist}");
            put(&mut buf, &mut emit);
        }

        if config.use_dep {
            let heads = self.heads.ok_or(FeatureError::MissingDependencies)?;
            let rel = if predicate.sentence == candidate.sentence {
                let sh = heads.sentence(predicate.sentence);
                if sh.len() != doc.sentences[predicate.sentence].len() {
                    return Err(FeatureError::MissingHeads(predicate.sentence));
                }
                dep_relation(sh, candidate.token, predicate.token, config.dep_max_steps)
                    .map_err(|e| match e {
                        FeatureError::MissingHeads(_) => FeatureError::MissingHeads(predicate.sentence),
                        other => other,
                    })?
            } else {
                DepRelation::None
            };
            let _ = write!(buf, "dep:rel={rel}");
            put(&mut buf, &mut emit);
            for (r, side) in [(predicate, 'p'), (candidate, 'a')] {
                let toks = &doc.sentences[r.sentence].tokens;
                let head = heads
                    .head(r)
                    .and_then(|h| toks.get(h))
                    .map(|t| t.surface.as_str())
                    .unwrap_or(ROOT);
                let _ = write!(buf, "dep:{side}head={head}");
                put(&mut buf, &mut emit);
                for &d in heads.dependents(r) {
                    if let Some(t) = toks.get(d) {
                        let _ = write!(buf, "dep:{side}leaf={}", t.surface);
                        put(&mut buf, &mut emit);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn extract(
        &self,
        predicate: TokenRef,
        candidate: TokenRef,
        case_frame: &CaseFrame,
    ) -> Result<FeatureSet, FeatureError> {
        let mut set = FeatureSet::new();
        self.visit(predicate, candidate, case_frame, |k| {
            set.insert(k);
        })?;
        Ok(set)
    }
}

/// Features of one (predicate, candidate) pair.
pub fn extract(
    doc: &Document,
    predicate: TokenRef,
    candidate: TokenRef,
    config: &FeatureConfig,
    heads: Option<&Heads>,
    case_frame: &CaseFrame,
) -> Result<FeatureSet, FeatureError> {
    Extractor::new(doc, config, heads)?.extract(predicate, candidate, case_frame)
}

#[cfg(test)]
mod tests;
