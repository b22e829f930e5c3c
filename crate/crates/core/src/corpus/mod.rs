//! Annotated documents: POS-tagged tokens with optional word-level dependency
//! heads, predicate-argument annotations, and coreference clusters.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

mod format;
mod gold;

pub use format::{load_corpus, load_corpus_with, write_corpus, LoadOptions};
pub use gold::{
    argument_members, case_frame_flags, corpus_stats, derive_category, document_gold_instances,
    gold_instances,
    CaseFrame, CaseFrameTable, CaseFrames, CorpusStats,
};

/// A semantic role label such as `ga`, `wo` or `ni`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role(String);

impl Role {
    pub fn new(label: impl Into<String>) -> Self {
        Role(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The default role inventory: nominative, accusative, dative.
    pub fn defaults() -> Vec<Role> {
        ["ga", "wo", "ni"].iter().map(|r| Role::new(*r)).collect()
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Role {
    fn from(s: &str) -> Self {
        Role::new(s)
    }
}

/// Document-global address of a token: `(sentence index, token index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenRef {
    pub sentence: usize,
    pub token: usize,
}

impl TokenRef {
    pub fn new(sentence: usize, token: usize) -> Self {
        TokenRef { sentence, token }
    }
}

impl fmt::Display for TokenRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.sentence, self.token)
    }
}

impl FromStr for TokenRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sent, tok) = s
            .split_once(':')
            .ok_or_else(|| format!("malformed token reference `{s}`"))?;
        let sentence = sent
            .parse()
            .map_err(|_| format!("malformed sentence index in `{s}`"))?;
        let token = tok
            .parse()
            .map_err(|_| format!("malformed token index in `{s}`"))?;
        Ok(TokenRef { sentence, token })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: String,
    /// Head token index within the same sentence; `None` for roots or when
    /// no dependency data is available.
    pub head: Option<usize>,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: impl Into<String>, head: Option<usize>) -> Self {
        Token {
            surface: surface.into(),
            pos: pos.into(),
            head,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldArgument {
    pub role: Role,
    pub target: TokenRef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateInstance {
    pub location: TokenRef,
    pub arguments: Vec<GoldArgument>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorefCluster {
    pub id: String,
    pub members: Vec<TokenRef>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub predicates: Vec<PredicateInstance>,
    pub clusters: Vec<CorefCluster>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

/// Relation of an argument cluster to its predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Depend,
    ZeroIntra,
    ZeroInter,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Depend, Category::ZeroIntra, Category::ZeroInter];

    pub fn name(self) -> &'static str {
        match self {
            Category::Depend => "Depend",
            Category::ZeroIntra => "Zero-intra",
            Category::ZeroInter => "Zero-inter",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// One (predicate, role) target: the annotated argument words expanded by
/// coreference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldInstance {
    /// Index of the owning document in the corpus.
    pub document: usize,
    pub predicate: TokenRef,
    pub role: Role,
    /// Sorted, non-empty.
    pub cluster_members: Vec<TokenRef>,
    pub category: Category,
}

/// Where in a document a validation problem was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    Token(TokenRef),
    Sentence(usize),
    Predicate(usize),
    Argument { predicate: usize, argument: usize },
    Cluster(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Issue {
    #[error("{0}")]
    Syntax(String),
    #[error("self-loop head on token {0}")]
    SelfLoopHead(TokenRef),
    #[error("head {head} of token {token} is outside the sentence")]
    HeadOutOfRange { token: TokenRef, head: usize },
    #[error("cyclic dependency heads in sentence {0}")]
    CyclicHeads(usize),
    #[error("empty sentence {0}")]
    EmptySentence(usize),
    #[error("duplicate sentence index {0}")]
    DuplicateSentence(usize),
    #[error("sentence index {found} where {expected} was expected")]
    NonContiguousSentence { expected: usize, found: usize },
    #[error("duplicate token index {0}")]
    DuplicateToken(usize),
    #[error("token index {found} where {expected} was expected")]
    NonContiguousToken { expected: usize, found: usize },
    #[error("empty {0} field")]
    EmptyField(&'static str),
    #[error("dangling token reference {0}")]
    DanglingRef(TokenRef),
    #[error("predicate {0} declared twice")]
    DuplicatePredicate(TokenRef),
    #[error("argument for undeclared predicate {0}")]
    UndeclaredPredicate(TokenRef),
    #[error("duplicate argument ({role}, {target})")]
    DuplicateArgument { role: Role, target: TokenRef },
    #[error("token {0} belongs to more than one coreference cluster")]
    OverlappingCluster(TokenRef),
    #[error("coreference cluster `{0}` has no members")]
    EmptyCluster(String),
    #[error("duplicate coreference cluster id `{0}`")]
    DuplicateClusterId(String),
    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),
    #[error("sentence after annotation lines")]
    SentenceAfterAnnotations,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {issue}")]
    Parse { line: usize, issue: Issue },
    #[error("document `{doc}`: {issue}")]
    Invalid { doc: String, issue: Issue },
    #[error("document `{doc}`: no gold heads")]
    NoGoldHeads { doc: String },
    #[error("document `{doc}`: category-undecidable for predicate {predicate} without dependency data")]
    CategoryUndecidable { doc: String, predicate: TokenRef },
    #[error("document `{doc}`: unknown predicate {predicate}")]
    UnknownPredicate { doc: String, predicate: TokenRef },
    #[error("line {line}: {message}")]
    CaseFrameSyntax { line: usize, message: String },
}

impl Document {
    pub fn token(&self, r: TokenRef) -> Option<&Token> {
        self.sentences.get(r.sentence)?.tokens.get(r.token)
    }

    pub fn resolves(&self, r: TokenRef) -> bool {
        self.token(r).is_some()
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Global offset of the first token of every sentence.
    pub fn sentence_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.sentences.len());
        let mut acc = 0;
        for s in &self.sentences {
            offsets.push(acc);
            acc += s.len();
        }
        offsets
    }

    /// All token references in document order.
    pub fn token_refs(&self) -> impl Iterator<Item = TokenRef> + '_ {
        self.sentences
            .iter()
            .enumerate()
            .flat_map(|(s, sent)| (0..sent.len()).map(move |t| TokenRef::new(s, t)))
    }

    pub fn predicate(&self, location: TokenRef) -> Option<&PredicateInstance> {
        self.predicates.iter().find(|p| p.location == location)
    }

    /// True if any token carries a head.
    pub fn has_heads(&self) -> bool {
        self.sentences
            .iter()
            .any(|s| s.tokens.iter().any(|t| t.head.is_some()))
    }

    /// Map from token to the index of its coreference cluster.
    pub fn cluster_index(&self) -> HashMap<TokenRef, usize> {
        let mut index = HashMap::new();
        for (i, c) in self.clusters.iter().enumerate() {
            for &m in &c.members {
                index.insert(m, i);
            }
        }
        index
    }

    /// Checks every type invariant. Cyclic heads are accepted only when
    /// `allow_cycles` is set.
    pub fn validate(&self, allow_cycles: bool) -> Result<(), (Site, Issue)> {
        for (s, sent) in self.sentences.iter().enumerate() {
            if sent.is_empty() {
                return Err((Site::Sentence(s), Issue::EmptySentence(s)));
            }
            for (t, tok) in sent.tokens.iter().enumerate() {
                let r = TokenRef::new(s, t);
                if tok.surface.is_empty() {
                    return Err((Site::Token(r), Issue::EmptyField("surface")));
                }
                if tok.pos.is_empty() {
                    return Err((Site::Token(r), Issue::EmptyField("pos")));
                }
                if let Some(h) = tok.head {
                    if h == t {
                        return Err((Site::Token(r), Issue::SelfLoopHead(r)));
                    }
                    if h >= sent.len() {
                        return Err((Site::Token(r), Issue::HeadOutOfRange { token: r, head: h }));
                    }
                }
            }
            if !allow_cycles && has_cycle(sent) {
                return Err((Site::Sentence(s), Issue::CyclicHeads(s)));
            }
        }

        let mut seen_preds = std::collections::HashSet::new();
        for (p, pred) in self.predicates.iter().enumerate() {
            if !self.resolves(pred.location) {
                return Err((Site::Predicate(p), Issue::DanglingRef(pred.location)));
            }
            if !seen_preds.insert(pred.location) {
                return Err((Site::Predicate(p), Issue::DuplicatePredicate(pred.location)));
            }
            let mut seen_args = std::collections::HashSet::new();
            for (a, arg) in pred.arguments.iter().enumerate() {
                let site = Site::Argument {
                    predicate: p,
                    argument: a,
                };
                if !self.resolves(arg.target) {
                    return Err((site, Issue::DanglingRef(arg.target)));
                }
                if !seen_args.insert((arg.role.clone(), arg.target)) {
                    return Err((
                        site,
                        Issue::DuplicateArgument {
                            role: arg.role.clone(),
                            target: arg.target,
                        },
                    ));
                }
            }
        }

        let mut members = std::collections::HashSet::new();
        let mut ids = std::collections::HashSet::new();
        for (c, cluster) in self.clusters.iter().enumerate() {
            if !ids.insert(cluster.id.as_str()) {
                return Err((Site::Cluster(c), Issue::DuplicateClusterId(cluster.id.clone())));
            }
            if cluster.members.is_empty() {
                return Err((Site::Cluster(c), Issue::EmptyCluster(cluster.id.clone())));
            }
            for &m in &cluster.members {
                if !self.resolves(m) {
                    return Err((Site::Cluster(c), Issue::DanglingRef(m)));
                }
                if !members.insert(m) {
                    return Err((Site::Cluster(c), Issue::OverlappingCluster(m)));
                }
            }
        }
        Ok(())
    }

    /// Returns a copy whose token heads are replaced by `heads`.
    pub fn with_heads(&self, heads: &Heads) -> Document {
        let mut doc = self.clone();
        for (s, sent) in doc.sentences.iter_mut().enumerate() {
            for (t, tok) in sent.tokens.iter_mut().enumerate() {
                tok.head = heads.head(TokenRef::new(s, t));
            }
        }
        doc
    }
}

fn has_cycle(sent: &Sentence) -> bool {
    // 0 = unvisited, 1 = on current path, 2 = known to terminate
    let mut state = vec![0u8; sent.len()];
    for start in 0..sent.len() {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match state[i] {
                2 => break,
                1 => return true,
                _ => {
                    state[i] = 1;
                    path.push(i);
                    cur = sent.tokens[i].head.filter(|&h| h < sent.len());
                }
            }
        }
        for i in path {
            state[i] = 2;
        }
    }
    false
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        Corpus { documents }
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Validates every document and the uniqueness of document ids.
    pub fn validate(&self, allow_cycles: bool) -> Result<(), CorpusError> {
        let mut ids = std::collections::HashSet::new();
        for doc in &self.documents {
            if !ids.insert(doc.id.as_str()) {
                return Err(CorpusError::Invalid {
                    doc: doc.id.clone(),
                    issue: Issue::DuplicateDocument(doc.id.clone()),
                });
            }
            doc.validate(allow_cycles)
                .map_err(|(_, issue)| CorpusError::Invalid {
                    doc: doc.id.clone(),
                    issue,
                })?;
        }
        Ok(())
    }
}

/// Per-token head indices for one document, detached from the tokens so that
/// gold, provided, and perturbed trees can be swapped freely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Heads {
    sentences: Vec<Vec<Option<usize>>>,
    dependents: Vec<Vec<Vec<usize>>>,
}

impl Heads {
    /// Builds a head view. Out-of-range heads are dropped from the dependent
    /// lists but kept in place so that mismatches stay visible.
    pub fn new(sentences: Vec<Vec<Option<usize>>>) -> Self {
        let dependents = sentences
            .iter()
            .map(|heads| {
                let mut deps = vec![Vec::new(); heads.len()];
                for (t, h) in heads.iter().enumerate() {
                    if let Some(h) = *h {
                        if h < heads.len() && h != t {
                            deps[h].push(t);
                        }
                    }
                }
                deps
            })
            .collect();
        Heads {
            sentences,
            dependents,
        }
    }

    /// The document's own heads, or `None` if it carries no dependency data.
    pub fn from_document(doc: &Document) -> Option<Heads> {
        if !doc.has_heads() {
            return None;
        }
        Some(Heads::new(
            doc.sentences
                .iter()
                .map(|s| s.tokens.iter().map(|t| t.head).collect())
                .collect(),
        ))
    }

    /// Like [`Heads::from_document`], but missing data is an error.
    pub fn gold(doc: &Document) -> Result<Heads, CorpusError> {
        Heads::from_document(doc).ok_or_else(|| CorpusError::NoGoldHeads {
            doc: doc.id.clone(),
        })
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn sentence(&self, s: usize) -> &[Option<usize>] {
        self.sentences.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn head(&self, r: TokenRef) -> Option<usize> {
        self.sentences.get(r.sentence)?.get(r.token).copied().flatten()
    }

    pub fn dependents(&self, r: TokenRef) -> &[usize] {
        self.dependents
            .get(r.sentence)
            .and_then(|d| d.get(r.token))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// True if one token is the direct head of the other.
    pub fn linked(&self, a: TokenRef, b: TokenRef) -> bool {
        a.sentence == b.sentence
            && (self.head(a) == Some(b.token) || self.head(b) == Some(a.token))
    }

    /// True if the sentence structure (lengths) matches the document.
    pub fn matches(&self, doc: &Document) -> bool {
        self.sentences.len() == doc.sentences.len()
            && self
                .sentences
                .iter()
                .zip(&doc.sentences)
                .all(|(h, s)| h.len() == s.len())
    }
}
