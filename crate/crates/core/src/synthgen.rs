//! Synthetic annotated corpora with planted argument rules.
//!
//! Sentences are sequences of noun phrases `[M] N [P]` and verbs `V`, ending
//! in a verb. Dependency trees are projective and head-final at the level
//! of phrases: a phrase's head is chosen from the ancestor chain of the
//! phrase to its right. `M` and `P` attach to their noun.
//!
//! Under the `marker` profile a noun attaches to the nearest verb on its
//! right and each marker `が`, `を`, `に` used in a clause names the
//! `ga`, `wo`, `ni` argument of that clause's verb. Under the `dep` profile
//! a noun attaches to a random verb on the chain, so only the dependency
//! edge tells which verb a marked noun belongs to.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{
    Category, CorefCluster, Corpus, Document, GoldArgument, PredicateInstance, Role, Sentence,
    Token, TokenRef,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("profile unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("spec line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Marker,
    Dep,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Marker => "marker",
            Profile::Dep => "dep",
        })
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "marker" => Ok(Profile::Marker),
            "dep" => Ok(Profile::Dep),
            _ => Err(format!("unknown rule profile `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub documents: usize,
    pub sentences_per_doc: usize,
    pub tokens_per_sentence: usize,
    pub vocab_size: usize,
    pub rule_profile: Profile,
    /// Fraction of planted arguments moved away from their predicate.
    pub zero_rate: f64,
    /// Probability that an argument gets a coreferent mate.
    pub coref_rate: f64,
    /// Fraction of moved arguments that go to another sentence.
    pub inter_rate: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            documents: 50,
            sentences_per_doc: 10,
            tokens_per_sentence: 12,
            vocab_size: 500,
            rule_profile: Profile::Marker,
            zero_rate: 0.0,
            coref_rate: 0.0,
            inter_rate: 0.5,
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, v) in [
            ("documents", self.documents),
            ("sentences_per_doc", self.sentences_per_doc),
            ("tokens_per_sentence", self.tokens_per_sentence),
        ] {
            if v == 0 {
                return Err(SynthError::InvalidSpec(format!("{name} must be at least 1")));
            }
        }
        if self.vocab_size < 3 {
            return Err(SynthError::InvalidSpec("vocab_size must be at least 3".into()));
        }
        for (name, v) in [
            ("zero_rate", self.zero_rate),
            ("coref_rate", self.coref_rate),
            ("inter_rate", self.inter_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SynthError::InvalidSpec(format!("{name} must be in [0, 1]")));
            }
        }
        if self.tokens_per_sentence < 3 {
            return Err(SynthError::Unsatisfiable(format!(
                "{} profile needs sentences of at least 3 tokens (noun, marker, verb)",
                self.rule_profile
            )));
        }
        Ok(())
    }

    /// Parses `key=value` lines; `%` and `#` start comments.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, SynthError> {
        let mut spec = SynthSpec::default();
        for (i, line) in reader.lines().enumerate() {
            let n = i + 1;
            let line = line.map_err(|e| SynthError::Syntax {
                line: n,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| SynthError::Syntax { line: n, message: m };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `key=value`".into()))?;
            let (k, v) = (k.trim(), v.trim());
            let int = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("malformed integer for `{k}`")));
            let real = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("malformed number for `{k}`")));
            match k {
                "documents" => spec.documents = int(v)?,
                "sentences_per_doc" => spec.sentences_per_doc = int(v)?,
                "tokens_per_sentence" => spec.tokens_per_sentence = int(v)?,
                "vocab_size" => spec.vocab_size = int(v)?,
                "rule_profile" => spec.rule_profile = v.parse().map_err(bad)?,
                "zero_rate" => spec.zero_rate = real(v)?,
                "coref_rate" => spec.coref_rate = real(v)?,
                "inter_rate" => spec.inter_rate = real(v)?,
                "seed" => spec.seed = v.parse().map_err(|_| bad("malformed seed".into()))?,
                _ => return Err(bad(format!("unknown key `{k}`"))),
            }
        }
        Ok(spec)
    }
}

/// Generated corpus with the generator's own count of planted instances.
#[derive(Clone, Debug)]
pub struct Synthesized {
    pub corpus: Corpus,
    pub tally: BTreeMap<(Role, Category), usize>,
}

const MARKERS: [(&str, f64); 6] = [("が", 0.3), ("を", 0.25), ("に", 0.15), ("は", 0.1), ("の", 0.1), ("も", 0.1)];
const NEUTRAL: &str = "も";

fn role_of(marker: &str) -> Option<&'static str> {
    match marker {
        "が" => Some("ga"),
        "を" => Some("wo"),
        "に" => Some("ni"),
        _ => None,
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

struct Lexicon {
    nouns: usize,
    verbs: usize,
    modifiers: usize,
}

impl Lexicon {
    fn new(size: usize) -> Self {
        let verbs = (size * 3 / 10).max(1);
        let modifiers = (size / 10).max(1);
        Lexicon {
            nouns: size - verbs - modifiers,
            verbs,
            modifiers,
        }
    }

    fn word(&self, rng: &mut ChaCha8Rng, pos: &str) -> String {
        match pos {
            "N" => format!("n{}", rng.gen_range(0..self.nouns)),
            "V" => format!("v{}", rng.gen_range(0..self.verbs)),
            _ => format!("m{}", rng.gen_range(0..self.modifiers)),
        }
    }
}

enum Unit {
    Noun { noun: usize, marker: Option<usize> },
    Verb(usize),
}

impl Unit {
    fn head(&self) -> usize {
        match *self {
            Unit::Noun { noun, .. } => noun,
            Unit::Verb(v) => v,
        }
    }
}

fn pick_marker(rng: &mut ChaCha8Rng) -> &'static str {
    let mut x: f64 = rng.gen();
    for (m, p) in MARKERS {
        if x < p {
            return m;
        }
        x -= p;
    }
    NEUTRAL
}

/// One sentence and its planted (verb, role, noun) arguments.
fn sentence(rng: &mut ChaCha8Rng, lex: &Lexicon, len: usize, profile: Profile) -> (Vec<Token>, Vec<(usize, Role, usize)>) {
    let mut tokens: Vec<Token> = Vec::with_capacity(len);
    let mut units = Vec::new();
    let mut remaining = len - 1;
    let mut after_verb = true;
    while remaining > 0 {
        if !after_verb && rng.gen_bool(0.3) {
            units.push(Unit::Verb(tokens.len()));
            tokens.push(Token::new(lex.word(rng, "V"), "V", None));
            remaining -= 1;
            after_verb = true;
            continue;
        }
        let size = rng.gen_range(1..=3).min(remaining);
        if size == 3 {
            tokens.push(Token::new(lex.word(rng, "M"), "M", Some(tokens.len() + 1)));
        }
        let noun = tokens.len();
        tokens.push(Token::new(lex.word(rng, "N"), "N", None));
        let marker = (size >= 2).then(|| {
            tokens.push(Token::new(pick_marker(rng), "P", Some(noun)));
            noun + 1
        });
        units.push(Unit::Noun { noun, marker });
        remaining -= size;
        after_verb = false;
    }
    units.push(Unit::Verb(tokens.len()));
    tokens.push(Token::new(lex.word(rng, "V"), "V", None));

    // heads right to left over phrase heads
    for i in (0..units.len() - 1).rev() {
        let mut chain = Vec::new();
        let mut x = Some(units[i + 1].head());
        while let Some(t) = x {
            if tokens[t].pos == "V" {
                chain.push(t);
            }
            x = tokens[t].head;
        }
        let head = match (&units[i], profile) {
            (Unit::Noun { .. }, Profile::Marker) => chain[0],
            _ => chain[rng.gen_range(0..chain.len())],
        };
        tokens[units[i].head()].head = Some(head);
    }

    let mut arguments = Vec::new();
    let mut used: HashSet<(usize, &str)> = HashSet::new();
    for u in &units {
        if let Unit::Noun { noun, marker: Some(m) } = *u {
            let Some(role) = role_of(&tokens[m].surface) else { continue };
            let verb = tokens[noun].head.unwrap_or(0);
            if used.insert((verb, role)) {
                arguments.push((verb, Role::new(role), noun));
            } else {
                tokens[m].surface = NEUTRAL.to_string();
            }
        }
    }
    (tokens, arguments)
}

struct Planted {
    predicate: TokenRef,
    role: Role,
    target: TokenRef,
    category: Category,
}

fn document(spec: &SynthSpec, lex: &Lexicon, d: usize) -> (Document, Vec<Planted>) {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(splitmix(spec.seed) ^ d as u64));
    let mut sentences = Vec::new();
    let mut planted = Vec::new();
    for s in 0..spec.sentences_per_doc {
        let (tokens, args) = sentence(&mut rng, lex, spec.tokens_per_sentence, spec.rule_profile);
        for (v, role, n) in args {
            planted.push(Planted {
                predicate: TokenRef::new(s, v),
                role,
                target: TokenRef::new(s, n),
                category: Category::Depend,
            });
        }
        sentences.push(Sentence::new(tokens));
    }
    let nouns: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| (0..s.len()).filter(|&t| s.tokens[t].pos == "N").collect())
        .collect();
    let head = |sentences: &[Sentence], r: TokenRef| sentences[r.sentence].tokens[r.token].head;

    // zero relocation
    for i in 0..planted.len() {
        if !rng.gen_bool(spec.zero_rate) {
            continue;
        }
        let p = planted[i].predicate;
        let taken: HashSet<TokenRef> = planted
            .iter()
            .filter(|a| a.predicate == p)
            .map(|a| a.target)
            .collect();
        let intra: Vec<TokenRef> = nouns[p.sentence]
            .iter()
            .map(|&t| TokenRef::new(p.sentence, t))
            .filter(|&r| head(&sentences, r) != Some(p.token) && !taken.contains(&r))
            .collect();
        let inter_possible = spec.sentences_per_doc > 1;
        let go_inter = inter_possible && (intra.is_empty() || rng.gen_bool(spec.inter_rate));
        let target = if go_inter {
            let mut s = rng.gen_range(0..spec.sentences_per_doc - 1);
            if s >= p.sentence {
                s += 1;
            }
            let t = nouns[s][rng.gen_range(0..nouns[s].len())];
            Some((TokenRef::new(s, t), Category::ZeroInter))
        } else if !intra.is_empty() {
            Some((intra[rng.gen_range(0..intra.len())], Category::ZeroIntra))
        } else {
            None
        };
        if let Some((target, category)) = target {
            let old = planted[i].target;
            let marker = &mut sentences[old.sentence].tokens[old.token + 1];
            marker.surface = NEUTRAL.to_string();
            planted[i].target = target;
            planted[i].category = category;
        }
    }

    // coreference mates
    let mut clusters: Vec<CorefCluster> = Vec::new();
    let mut in_cluster: HashSet<TokenRef> = HashSet::new();
    let targets: HashSet<TokenRef> = planted.iter().map(|a| a.target).collect();
    for i in 0..planted.len() {
        if !rng.gen_bool(spec.coref_rate) {
            continue;
        }
        let t = planted[i].target;
        if in_cluster.contains(&t) {
            continue;
        }
        let sharing: Vec<&Planted> = planted.iter().filter(|a| a.target == t).collect();
        let ok = |m: TokenRef| {
            sharing.iter().all(|a| match a.category {
                Category::Depend => true,
                Category::ZeroIntra => m.sentence != a.predicate.sentence || head(&sentences, m) != Some(a.predicate.token),
                Category::ZeroInter => m.sentence != a.predicate.sentence,
            })
        };
        let pool: Vec<TokenRef> = nouns
            .iter()
            .enumerate()
            .flat_map(|(s, ns)| ns.iter().map(move |&n| TokenRef::new(s, n)))
            .filter(|&m| m != t && !targets.contains(&m) && !in_cluster.contains(&m) && ok(m))
            .collect();
        if pool.is_empty() {
            continue;
        }
        let mate = pool[rng.gen_range(0..pool.len())];
        let surface = sentences[t.sentence].tokens[t.token].surface.clone();
        sentences[mate.sentence].tokens[mate.token].surface = surface;
        let mut members = vec![t, mate];
        members.sort();
        in_cluster.extend(members.iter().copied());
        clusters.push(CorefCluster {
            id: format!("c{}", clusters.len()),
            members,
        });
    }

    let mut predicates: Vec<PredicateInstance> = Vec::new();
    for (s, sent) in sentences.iter().enumerate() {
        for (t, tok) in sent.tokens.iter().enumerate() {
            if tok.pos == "V" {
                let location = TokenRef::new(s, t);
                let mut arguments: Vec<GoldArgument> = planted
                    .iter()
                    .filter(|a| a.predicate == location)
                    .map(|a| GoldArgument {
                        role: a.role.clone(),
                        target: a.target,
                    })
                    .collect();
                arguments.sort_by(|a, b| (a.role.clone(), a.target).cmp(&(b.role.clone(), b.target)));
                predicates.push(PredicateInstance { location, arguments });
            }
        }
    }
    let doc = Document {
        id: format!("syn{d:04}"),
        sentences,
        predicates,
        clusters,
    };
    (doc, planted)
}

pub fn generate(spec: &SynthSpec) -> Result<Synthesized, SynthError> {
    spec.validate()?;
    let lex = Lexicon::new(spec.vocab_size);
    let docs: Vec<(Document, Vec<Planted>)> = (0..spec.documents)
        .into_par_iter()
        .map(|d| document(spec, &lex, d))
        .collect();
    let mut tally = BTreeMap::new();
    let mut documents = Vec::with_capacity(docs.len());
    for (doc, planted) in docs {
        for a in planted {
            *tally.entry((a.role, a.category)).or_insert(0) += 1;
        }
        documents.push(doc);
    }
    Ok(Synthesized {
        corpus: Corpus::new(documents),
        tally,
    })
}
