use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use super::{Category, Corpus, CorpusError, Document, GoldInstance, Heads, Role, TokenRef};

/// Category of a (predicate, argument cluster) relation. `DEPEND` if any
/// member shares a direct dependency edge with the predicate (either
/// direction), else `ZERO_INTRA` if any member is in the predicate's
/// sentence, else `ZERO_INTER`.
///
/// Without `heads` the category is only decidable when no member shares the
/// predicate's sentence.
pub fn derive_category(
    doc: &Document,
    heads: Option<&Heads>,
    predicate: TokenRef,
    members: &[TokenRef],
) -> Result<Category, CorpusError> {
    let same_sentence: Vec<TokenRef> = members
        .iter()
        .copied()
        .filter(|m| m.sentence == predicate.sentence)
        .collect();
    if same_sentence.is_empty() {
        return Ok(Category::ZeroInter);
    }
    let heads = heads.ok_or_else(|| CorpusError::CategoryUndecidable {
        doc: doc.id.clone(),
        predicate,
    })?;
    if same_sentence.iter().any(|&m| heads.linked(m, predicate)) {
        Ok(Category::Depend)
    } else {
        Ok(Category::ZeroIntra)
    }
}

/// Cluster-expanded argument members of every annotated (predicate, role),
/// in predicate order and, within a predicate, role first-appearance order.
pub fn argument_members(doc: &Document) -> Vec<(TokenRef, Role, Vec<TokenRef>)> {
    let clusters = doc.cluster_index();
    let mut out = Vec::new();
    for pred in &doc.predicates {
        let mut by_role: Vec<(Role, BTreeSet<TokenRef>)> = Vec::new();
        for arg in &pred.arguments {
            let slot = match by_role.iter().position(|(r, _)| *r == arg.role) {
                Some(i) => i,
                None => {
                    by_role.push((arg.role.clone(), BTreeSet::new()));
                    by_role.len() - 1
                }
            };
            let members = &mut by_role[slot].1;
            match clusters.get(&arg.target) {
                Some(&c) => members.extend(doc.clusters[c].members.iter().copied()),
                None => {
                    members.insert(arg.target);
                }
            }
        }
        for (role, members) in by_role {
            out.push((pred.location, role, members.into_iter().collect()));
        }
    }
    out
}

/// Gold instances of one document, categorized with its own heads.
pub fn document_gold_instances(
    doc: &Document,
    doc_index: usize,
) -> Result<Vec<GoldInstance>, CorpusError> {
    let heads = Heads::from_document(doc);
    argument_members(doc)
        .into_iter()
        .map(|(predicate, role, members)| {
            let category = derive_category(doc, heads.as_ref(), predicate, &members)?;
            Ok(GoldInstance {
                document: doc_index,
                predicate,
                role,
                cluster_members: members,
                category,
            })
        })
        .collect()
}

/// One instance per annotated (predicate, role), in document order.
pub fn gold_instances(corpus: &Corpus) -> Result<Vec<GoldInstance>, CorpusError> {
    let mut out = Vec::new();
    for (i, doc) in corpus.documents.iter().enumerate() {
        out.extend(document_gold_instances(doc, i)?);
    }
    Ok(out)
}

/// Per-role "takes this role somewhere in the document" flags.
pub type CaseFrame = BTreeMap<Role, bool>;

/// Gold case frame of an annotated predicate over `roles`.
pub fn case_frame_flags(
    doc: &Document,
    predicate: TokenRef,
    roles: &[Role],
) -> Result<CaseFrame, CorpusError> {
    let pred = doc
        .predicate(predicate)
        .ok_or_else(|| CorpusError::UnknownPredicate {
            doc: doc.id.clone(),
            predicate,
        })?;
    Ok(roles
        .iter()
        .map(|r| (r.clone(), pred.arguments.iter().any(|a| a.role == *r)))
        .collect())
}

/// External case frames keyed by predicate surface.
///
/// File format: one `<surface>\t<role>[\t<role>...]` line per predicate;
/// blank lines and `%` comments are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CaseFrameTable {
    frames: HashMap<String, BTreeSet<Role>>,
}

impl CaseFrameTable {
    pub fn insert(&mut self, surface: impl Into<String>, roles: impl IntoIterator<Item = Role>) {
        self.frames.entry(surface.into()).or_default().extend(roles);
    }

    pub fn roles(&self, surface: &str) -> Option<&BTreeSet<Role>> {
        self.frames.get(surface)
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let mut table = CaseFrameTable::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('%') {
                continue;
            }
            let mut fields = line.split('\t');
            let surface = fields.next().unwrap_or("");
            if surface.is_empty() {
                return Err(CorpusError::CaseFrameSyntax {
                    line: i + 1,
                    message: "empty predicate surface".into(),
                });
            }
            let roles: Vec<Role> = fields.map(Role::new).collect();
            if roles.iter().any(|r| r.as_str().is_empty()) {
                return Err(CorpusError::CaseFrameSyntax {
                    line: i + 1,
                    message: "empty role".into(),
                });
            }
            table.insert(surface, roles);
        }
        Ok(table)
    }
}

/// Where case-frame flags come from when extracting features.
#[derive(Clone, Debug, Default)]
pub enum CaseFrames {
    /// From the document's own gold annotations.
    #[default]
    Gold,
    /// From an external table; surfaces not in the table get no flags.
    Table(CaseFrameTable),
    /// The feature is switched off.
    Disabled,
}

impl CaseFrames {
    /// Flags for one predicate. An empty map means "emit nothing".
    pub fn flags(
        &self,
        doc: &Document,
        predicate: TokenRef,
        roles: &[Role],
    ) -> Result<CaseFrame, CorpusError> {
        match self {
            CaseFrames::Gold => case_frame_flags(doc, predicate, roles),
            CaseFrames::Table(table) => {
                let token = doc.token(predicate).ok_or_else(|| CorpusError::UnknownPredicate {
                    doc: doc.id.clone(),
                    predicate,
                })?;
                Ok(match table.roles(&token.surface) {
                    Some(set) => roles.iter().map(|r| (r.clone(), set.contains(r))).collect(),
                    None => CaseFrame::new(),
                })
            }
            CaseFrames::Disabled => Ok(CaseFrame::new()),
        }
    }
}

/// Corpus size and gold-instance counts per role and category.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub words: usize,
    pub predicates: usize,
    pub instances: BTreeMap<(Role, Category), usize>,
    /// Instances whose category needs dependency data the corpus lacks.
    pub undecidable: BTreeMap<Role, usize>,
}

impl CorpusStats {
    pub fn count(&self, role: &Role, category: Category) -> usize {
        self.instances
            .get(&(role.clone(), category))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_instances(&self) -> usize {
        self.instances.values().sum::<usize>() + self.undecidable.values().sum::<usize>()
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28}{:>10}", "Documents", self.documents)?;
        writeln!(f, "{:<28}{:>10}", "Sentences", self.sentences)?;
        writeln!(f, "{:<28}{:>10}", "Words", self.words)?;
        writeln!(f, "{:<28}{:>10}", "Predicates", self.predicates)?;
        let roles: BTreeSet<&Role> = self
            .instances
            .keys()
            .map(|(r, _)| r)
            .chain(self.undecidable.keys())
            .collect();
        for role in roles {
            for cat in Category::ALL {
                let label = format!("PAS labels {role} {cat}");
                writeln!(f, "{label:<28}{:>10}", self.count(role, cat))?;
            }
            if let Some(n) = self.undecidable.get(role) {
                let label = format!("PAS labels {role} undecidable");
                writeln!(f, "{label:<28}{n:>10}")?;
            }
        }
        Ok(())
    }
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        documents: corpus.documents.len(),
        ..CorpusStats::default()
    };
    for doc in &corpus.documents {
        stats.sentences += doc.sentences.len();
        stats.words += doc.num_tokens();
        stats.predicates += doc.predicates.len();
        let heads = Heads::from_document(doc);
        let clusters = doc.cluster_index();
        for pred in &doc.predicates {
            let mut by_role: BTreeMap<&Role, BTreeSet<TokenRef>> = BTreeMap::new();
            for arg in &pred.arguments {
                let members = by_role.entry(&arg.role).or_default();
                match clusters.get(&arg.target) {
                    Some(&c) => members.extend(doc.clusters[c].members.iter().copied()),
                    None => {
                        members.insert(arg.target);
                    }
                }
            }
            for (role, members) in by_role {
                let members: Vec<TokenRef> = members.into_iter().collect();
                match derive_category(doc, heads.as_ref(), pred.location, &members) {
                    Ok(cat) => *stats.instances.entry((role.clone(), cat)).or_default() += 1,
                    Err(_) => *stats.undecidable.entry(role.clone()).or_default() += 1,
                }
            }
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_corpus;

    const SMALL: &str = "\
#doc d
#sent 0
0\tn1\tN\t2
1\tが\tP\t0
2\tv1\tV\t_
#sent 1
0\tn2\tN\t3
1\tを\tP\t0
2\tn3\tN\t3
3\tv2\tV\t_
#pred 0:2
#arg 0:2\tga\t0:0
";

    fn doc(text: &str) -> Document {
        load_corpus(text.as_bytes()).unwrap().documents.remove(0)
    }

    #[test]
    fn category_direct_edge_is_depend() {
        let d = doc(SMALL);
        let h = Heads::from_document(&d);
        let p = TokenRef::new(0, 2);
        assert_eq!(
            derive_category(&d, h.as_ref(), p, &[TokenRef::new(0, 0)]).unwrap(),
            Category::Depend
        );
        assert_eq!(
            derive_category(&d, h.as_ref(), p, &[TokenRef::new(0, 1)]).unwrap(),
            Category::ZeroIntra
        );
        assert_eq!(
            derive_category(&d, h.as_ref(), p, &[TokenRef::new(1, 0), TokenRef::new(1, 2)]).unwrap(),
            Category::ZeroInter
        );
        // the predicate heading the member also counts
        assert_eq!(
            derive_category(&d, h.as_ref(), TokenRef::new(1, 0), &[TokenRef::new(1, 1)]).unwrap(),
            Category::Depend
        );
    }

    #[test]
    fn category_without_heads_is_undecidable_only_when_needed() {
        let d = doc("#doc d\n#sent 0\n0\ta\tN\t_\n1\tb\tV\t_\n#sent 1\n0\tc\tN\t_\n");
        let p = TokenRef::new(0, 1);
        assert!(matches!(
            derive_category(&d, None, p, &[TokenRef::new(0, 0)]),
            Err(CorpusError::CategoryUndecidable { .. })
        ));
        assert_eq!(
            derive_category(&d, None, p, &[TokenRef::new(1, 0)]).unwrap(),
            Category::ZeroInter
        );
    }

    #[test]
    fn single_unclustered_argument() {
        let d = doc(SMALL);
        let gi = document_gold_instances(&d, 0).unwrap();
        assert_eq!(gi.len(), 1);
        assert_eq!(gi[0].cluster_members, vec![TokenRef::new(0, 0)]);
        assert_eq!(gi[0].role, Role::new("ga"));
    }

    #[test]
    fn clustered_arguments_merge_into_one_instance() {
        let text = format!("{SMALL}#arg 0:2\tga\t1:0\n#arg 0:2\two\t1:2\n#coref e\t0:0\t1:0\n");
        let gi = document_gold_instances(&doc(&text), 0).unwrap();
        assert_eq!(gi.len(), 2);
        assert_eq!(gi[0].cluster_members, vec![TokenRef::new(0, 0), TokenRef::new(1, 0)]);
        assert_eq!(gi[0].category, Category::Depend);
        assert_eq!(gi[1].role, Role::new("wo"));
        assert_eq!(gi[1].category, Category::ZeroInter);
    }

    #[test]
    fn cluster_expansion_pulls_in_unannotated_members() {
        let text = format!("{SMALL}#coref e\t0:0\t1:2\n");
        let gi = document_gold_instances(&doc(&text), 0).unwrap();
        assert_eq!(gi[0].cluster_members, vec![TokenRef::new(0, 0), TokenRef::new(1, 2)]);
    }

    #[test]
    fn case_frames() {
        let d = doc(&format!("{SMALL}#pred 1:3\n"));
        let roles = Role::defaults();
        let f = case_frame_flags(&d, TokenRef::new(0, 2), &roles).unwrap();
        assert_eq!(f[&Role::new("ga")], true);
        assert_eq!(f[&Role::new("wo")], false);
        let none = case_frame_flags(&d, TokenRef::new(1, 3), &roles).unwrap();
        assert!(none.values().all(|v| !v));
        assert!(case_frame_flags(&d, TokenRef::new(1, 0), &roles).is_err());
        assert!(CaseFrames::Disabled
            .flags(&d, TokenRef::new(0, 2), &roles)
            .unwrap()
            .is_empty());

        let table = CaseFrameTable::read("v1\tga\two\n% c\n".as_bytes()).unwrap();
        let t = CaseFrames::Table(table)
            .flags(&d, TokenRef::new(0, 2), &roles)
            .unwrap();
        assert_eq!(t[&Role::new("wo")], true);
        assert_eq!(t[&Role::new("ni")], false);
    }

    #[test]
    fn stats_empty_and_small() {
        let empty = corpus_stats(&Corpus::default());
        assert_eq!(empty, CorpusStats::default());

        let c = load_corpus(SMALL.as_bytes()).unwrap();
        let s = corpus_stats(&c);
        assert_eq!((s.documents, s.sentences, s.words, s.predicates), (1, 2, 7, 1));
        for cat in [Category::ZeroIntra, Category::ZeroInter] {
            assert_eq!(s.count(&Role::new("ga"), cat), 0);
        }
        assert_eq!(s.count(&Role::new("ga"), Category::Depend), 1);
        assert_eq!(s.total_instances(), 1);
    }
}
