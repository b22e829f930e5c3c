//! Line-oriented corpus file format.
//!
//! ```text
//! #doc <doc-id>
//! #sent <sent-index>
//! <tok-index>\t<surface>\t<pos>\t<head or _>
//! #pred <sent>:<tok>
//! #arg <sent>:<tok>\t<role>\t<sent>:<tok>
//! #coref <cluster-id>\t<sent>:<tok>[\t<sent>:<tok>]...
//! ```
//!
//! Annotation lines follow the sentences of their document. Blank lines and
//! lines starting with `%` are ignored.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use super::{
    CorefCluster, Corpus, CorpusError, Document, GoldArgument, Issue, PredicateInstance, Role,
    Sentence, Site, Token, TokenRef,
};

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Accept cyclic head structures (e.g. randomly perturbed trees).
    pub allow_cyclic_heads: bool,
}

/// Strictly parses a corpus; any malformed line is an error.
pub fn load_corpus<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    load_corpus_with(reader, LoadOptions::default())
}

pub fn load_corpus_with<R: BufRead>(reader: R, options: LoadOptions) -> Result<Corpus, CorpusError> {
    let mut parser = Parser::new(options);
    for (i, line) in reader.lines().enumerate() {
        parser.line(i + 1, &line?)?;
    }
    parser.finish()
}

/// Writes a corpus in the canonical layout read by [`load_corpus`].
pub fn write_corpus<W: Write>(corpus: &Corpus, mut w: W) -> std::io::Result<()> {
    for doc in &corpus.documents {
        writeln!(w, "#doc {}", doc.id)?;
        for (s, sent) in doc.sentences.iter().enumerate() {
            writeln!(w, "#sent {s}")?;
            for (t, tok) in sent.tokens.iter().enumerate() {
                match tok.head {
                    Some(h) => writeln!(w, "{t}\t{}\t{}\t{h}", tok.surface, tok.pos)?,
                    None => writeln!(w, "{t}\t{}\t{}\t_", tok.surface, tok.pos)?,
                }
            }
        }
        for pred in &doc.predicates {
            writeln!(w, "#pred {}", pred.location)?;
            for arg in &pred.arguments {
                writeln!(w, "#arg {}\t{}\t{}", pred.location, arg.role, arg.target)?;
            }
        }
        for cluster in &doc.clusters {
            write!(w, "#coref {}", cluster.id)?;
            for m in &cluster.members {
                write!(w, "\t{m}")?;
            }
            writeln!(w)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Default)]
struct Lines {
    doc: usize,
    sentences: Vec<usize>,
    tokens: Vec<Vec<usize>>,
    predicates: Vec<usize>,
    // per predicate, per argument
    arguments: Vec<Vec<usize>>,
    clusters: Vec<usize>,
}

struct PendingArg {
    line: usize,
    predicate: TokenRef,
    arg: GoldArgument,
}

struct Parser {
    options: LoadOptions,
    documents: Vec<Document>,
    doc_ids: HashSet<String>,
    current: Option<(Document, Lines, Vec<PendingArg>)>,
    in_annotations: bool,
}

fn err(line: usize, issue: Issue) -> CorpusError {
    CorpusError::Parse { line, issue }
}

fn syntax(line: usize, msg: impl Into<String>) -> CorpusError {
    err(line, Issue::Syntax(msg.into()))
}

fn parse_ref(line: usize, s: &str) -> Result<TokenRef, CorpusError> {
    s.parse().map_err(|m: String| syntax(line, m))
}

fn parse_index(line: usize, s: &str, what: &str) -> Result<usize, CorpusError> {
    s.parse()
        .map_err(|_| syntax(line, format!("malformed {what} `{s}`")))
}

impl Parser {
    fn new(options: LoadOptions) -> Self {
        Parser {
            options,
            documents: Vec::new(),
            doc_ids: HashSet::new(),
            current: None,
            in_annotations: false,
        }
    }

    fn doc(&mut self, line: usize) -> Result<&mut (Document, Lines, Vec<PendingArg>), CorpusError> {
        self.current
            .as_mut()
            .ok_or_else(|| syntax(line, "content before the first #doc line"))
    }

    fn line(&mut self, n: usize, line: &str) -> Result<(), CorpusError> {
        if line.trim().is_empty() || line.starts_with('%') {
            return Ok(());
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (directive, body) = rest.split_once(' ').unwrap_or((rest, ""));
            return match directive {
                "doc" => self.begin_document(n, body),
                "sent" => self.begin_sentence(n, body),
                "pred" => self.predicate(n, body),
                "arg" => self.argument(n, body),
                "coref" => self.coref(n, body),
                other => Err(syntax(n, format!("unknown directive `#{other}`"))),
            };
        }
        self.token(n, line)
    }

    fn begin_document(&mut self, n: usize, id: &str) -> Result<(), CorpusError> {
        if id.is_empty() || id.contains('\t') {
            return Err(syntax(n, "document id must be non-empty and contain no TAB"));
        }
        self.finish_document()?;
        if !self.doc_ids.insert(id.to_string()) {
            return Err(err(n, Issue::DuplicateDocument(id.to_string())));
        }
        let doc = Document {
            id: id.to_string(),
            ..Document::default()
        };
        let lines = Lines {
            doc: n,
            ..Lines::default()
        };
        self.current = Some((doc, lines, Vec::new()));
        self.in_annotations = false;
        Ok(())
    }

    fn begin_sentence(&mut self, n: usize, body: &str) -> Result<(), CorpusError> {
        let index = parse_index(n, body, "sentence index")?;
        if self.in_annotations {
            return Err(err(n, Issue::SentenceAfterAnnotations));
        }
        let (doc, lines, _) = self.doc(n)?;
        let expected = doc.sentences.len();
        if index < expected {
            return Err(err(n, Issue::DuplicateSentence(index)));
        }
        if index > expected {
            return Err(err(n, Issue::NonContiguousSentence { expected, found: index }));
        }
        doc.sentences.push(Sentence::default());
        lines.sentences.push(n);
        lines.tokens.push(Vec::new());
        Ok(())
    }

    fn token(&mut self, n: usize, line: &str) -> Result<(), CorpusError> {
        if self.in_annotations {
            return Err(syntax(n, "token line after annotation lines"));
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(syntax(
                n,
                format!("token line needs 4 TAB-separated fields, found {}", fields.len()),
            ));
        }
        let index = parse_index(n, fields[0], "token index")?;
        let head = match fields[3] {
            "_" => None,
            h => Some(parse_index(n, h, "head index")?),
        };
        let (doc, lines, _) = self.doc(n)?;
        let s = doc
            .sentences
            .len()
            .checked_sub(1)
            .ok_or_else(|| syntax(n, "token line before the first #sent line"))?;
        let sentence = &mut doc.sentences[s];
        let expected = sentence.len();
        if index < expected {
            return Err(err(n, Issue::DuplicateToken(index)));
        }
        if index > expected {
            return Err(err(n, Issue::NonContiguousToken { expected, found: index }));
        }
        let r = TokenRef::new(s, index);
        if head == Some(index) {
            return Err(err(n, Issue::SelfLoopHead(r)));
        }
        if fields[1].is_empty() {
            return Err(err(n, Issue::EmptyField("surface")));
        }
        if fields[2].is_empty() {
            return Err(err(n, Issue::EmptyField("pos")));
        }
        sentence.tokens.push(Token::new(fields[1], fields[2], head));
        lines.tokens[s].push(n);
        Ok(())
    }

    fn predicate(&mut self, n: usize, body: &str) -> Result<(), CorpusError> {
        let location = parse_ref(n, body)?;
        self.in_annotations = true;
        let (doc, lines, _) = self.doc(n)?;
        doc.predicates.push(PredicateInstance {
            location,
            arguments: Vec::new(),
        });
        lines.predicates.push(n);
        lines.arguments.push(Vec::new());
        Ok(())
    }

    fn argument(&mut self, n: usize, body: &str) -> Result<(), CorpusError> {
        let fields: Vec<&str> = body.split('\t').collect();
        if fields.len() != 3 {
            return Err(syntax(n, "#arg needs predicate, role and argument"));
        }
        let predicate = parse_ref(n, fields[0])?;
        if fields[1].is_empty() {
            return Err(err(n, Issue::EmptyField("role")));
        }
        let target = parse_ref(n, fields[2])?;
        self.in_annotations = true;
        let (_, _, pending) = self.doc(n)?;
        pending.push(PendingArg {
            line: n,
            predicate,
            arg: GoldArgument {
                role: Role::new(fields[1]),
                target,
            },
        });
        Ok(())
    }

    fn coref(&mut self, n: usize, body: &str) -> Result<(), CorpusError> {
        let mut fields = body.split('\t');
        let id = fields.next().unwrap_or("");
        if id.is_empty() {
            return Err(err(n, Issue::EmptyField("cluster id")));
        }
        let members = fields
            .map(|f| parse_ref(n, f))
            .collect::<Result<Vec<_>, _>>()?;
        if members.is_empty() {
            return Err(err(n, Issue::EmptyCluster(id.to_string())));
        }
        self.in_annotations = true;
        let (doc, lines, _) = self.doc(n)?;
        doc.clusters.push(CorefCluster {
            id: id.to_string(),
            members,
        });
        lines.clusters.push(n);
        Ok(())
    }

    fn finish_document(&mut self) -> Result<(), CorpusError> {
        let Some((mut doc, mut lines, pending)) = self.current.take() else {
            return Ok(());
        };
        for p in pending {
            let Some(i) = doc.predicates.iter().position(|x| x.location == p.predicate) else {
                return Err(err(p.line, Issue::UndeclaredPredicate(p.predicate)));
            };
            doc.predicates[i].arguments.push(p.arg);
            lines.arguments[i].push(p.line);
        }
        if let Err((site, issue)) = doc.validate(self.options.allow_cyclic_heads) {
            let line = match site {
                Site::Token(r) => lines.tokens[r.sentence][r.token],
                Site::Sentence(s) => lines.sentences[s],
                Site::Predicate(p) => lines.predicates[p],
                Site::Argument { predicate, argument } => lines.arguments[predicate][argument],
                Site::Cluster(c) => lines.clusters[c],
            };
            let line = if line == 0 { lines.doc } else { line };
            return Err(err(line, issue));
        }
        self.documents.push(doc);
        Ok(())
    }

    fn finish(mut self) -> Result<Corpus, CorpusError> {
        self.finish_document()?;
        Ok(Corpus::new(self.documents))
    }
}
