//! Precision, recall and F stratified by role and category.
//!
//! Percentages are kept as integer basis points (hundredths of a percent)
//! rounded half up, so reports and their differences are exact.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::corpus::{document_gold_instances, Category, Corpus, CorpusError, Heads, Role, TokenRef};
use crate::pipeline::{Prediction, Scope};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("prediction for unknown document `{0}`")]
    UnknownDocument(String),
    #[error("document `{doc}`: prediction for unannotated predicate {predicate}")]
    UnknownPredicate { doc: String, predicate: TokenRef },
    #[error("document `{doc}`: predicted argument {argument} does not resolve")]
    DanglingArgument { doc: String, argument: TokenRef },
    #[error("document `{doc}`: duplicate prediction for predicate {predicate}, role `{role}`")]
    Duplicate { doc: String, predicate: TokenRef, role: String },
    #[error("role `{0}` is not in the report's role set")]
    UnknownRole(String),
    #[error("reports have different role sets")]
    MismatchedRoles,
    #[error("report line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Harmonic mean of `p` and `r`; zero when both are zero.
pub fn f_measure<F: Scalar>(p: F, r: F) -> F {
    if p + r == F::zero() {
        F::zero()
    } else {
        F::two() * p * r / (p + r)
    }
}

/// `num / den` in basis points, rounded half up; zero when `den` is zero.
pub fn ratio_bp(num: u64, den: u64) -> u64 {
    if den == 0 {
        0
    } else {
        (num * 20_000 + den) / (2 * den)
    }
}

/// Formats basis points as a percentage with two decimals.
pub fn format_bp(bp: i64) -> String {
    let sign = if bp < 0 { "-" } else { "" };
    let a = bp.unsigned_abs();
    format!("{sign}{}.{:02}", a / 100, a % 100)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub correct: u64,
    pub predicted: u64,
    pub gold: u64,
}

impl Counts {
    pub fn new(correct: u64, predicted: u64, gold: u64) -> Self {
        Counts { correct, predicted, gold }
    }

    pub fn precision_bp(&self) -> u64 {
        ratio_bp(self.correct, self.predicted)
    }

    pub fn recall_bp(&self) -> u64 {
        ratio_bp(self.correct, self.gold)
    }

    /// F from the exact ratios, `2c / (predicted + gold)`.
    pub fn f_bp(&self) -> u64 {
        ratio_bp(2 * self.correct, self.predicted + self.gold)
    }

    pub fn precision<F: Scalar>(&self) -> F {
        ratio(self.correct, self.predicted)
    }

    pub fn recall<F: Scalar>(&self) -> F {
        ratio(self.correct, self.gold)
    }

    pub fn f<F: Scalar>(&self) -> F {
        f_measure(self.precision::<F>(), self.recall::<F>())
    }

    fn add(&mut self, other: Counts) {
        self.correct += other.correct;
        self.predicted += other.predicted;
        self.gold += other.gold;
    }
}

fn ratio<F: Scalar>(num: u64, den: u64) -> F {
    if den == 0 {
        F::zero()
    } else {
        F::of(num as f64) / F::of(den as f64)
    }
}

/// Counts per role and category. `ALL` rows and columns are sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    roles: Vec<Role>,
    counts: BTreeMap<(Role, Category), Counts>,
}

impl EvalReport {
    pub fn new(roles: Vec<Role>) -> Self {
        EvalReport {
            roles,
            counts: BTreeMap::new(),
        }
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    fn cell(&mut self, role: &Role, category: Category) -> Result<&mut Counts, EvalError> {
        if !self.roles.contains(role) {
            return Err(EvalError::UnknownRole(role.as_str().to_string()));
        }
        Ok(self.counts.entry((role.clone(), category)).or_default())
    }

    /// Adds counts to one (role, category) cell.
    pub fn add(&mut self, role: &Role, category: Category, counts: Counts) -> Result<(), EvalError> {
        self.cell(role, category)?.add(counts);
        Ok(())
    }

    /// `None` selects the `ALL` row or column.
    pub fn get(&self, role: Option<&Role>, category: Option<Category>) -> Counts {
        let mut total = Counts::default();
        for ((r, c), counts) in &self.counts {
            if role.map_or(true, |x| x == r) && category.map_or(true, |x| x == *c) {
                total.add(*counts);
            }
        }
        total
    }

    /// Rows in display order: each role then `ALL`, each with the three
    /// categories then `ALL`.
    pub fn rows(&self) -> Vec<(String, String, Counts)> {
        let mut out = Vec::new();
        let roles: Vec<Option<&Role>> = self.roles.iter().map(Some).chain([None]).collect();
        for role in roles {
            let cats = Category::ALL.iter().map(|&c| Some(c)).chain([None]);
            for cat in cats {
                out.push((
                    role.map_or("ALL".to_string(), |r| r.as_str().to_string()),
                    cat.map_or("ALL".to_string(), |c| c.name().to_string()),
                    self.get(role, cat),
                ));
            }
        }
        out
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "role\tcategory\tcorrect\tpredicted\tgold\tP\tR\tF")?;
        for (role, cat, c) in self.rows() {
            writeln!(
                w,
                "{role}\t{cat}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.correct,
                c.predicted,
                c.gold,
                format_bp(c.precision_bp() as i64),
                format_bp(c.recall_bp() as i64),
                format_bp(c.f_bp() as i64)
            )?;
        }
        Ok(())
    }

    /// Reads a TSV report back. Only per-role, per-category rows carry data;
    /// `ALL` rows are checked against the sums.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self, EvalError> {
        let bad = |line: usize, m: &str| EvalError::Syntax {
            line,
            message: m.to_string(),
        };
        let mut lines = reader.lines();
        let header = lines.next().transpose()?;
        if header.as_deref() != Some("role\tcategory\tcorrect\tpredicted\tgold\tP\tR\tF") {
            return Err(bad(1, "missing report header"));
        }
        let mut rows = Vec::new();
        let mut roles: Vec<Role> = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 8 {
                return Err(bad(n, "expected 8 fields"));
            }
            let num = |s: &str| s.parse::<u64>().map_err(|_| bad(n, "malformed count"));
            let counts = Counts::new(num(f[2])?, num(f[3])?, num(f[4])?);
            let role = (f[0] != "ALL").then(|| Role::new(f[0]));
            let cat = if f[1] == "ALL" {
                None
            } else {
                Some(f[1].parse::<Category>().map_err(|_| bad(n, "unknown category"))?)
            };
            if let Some(r) = &role {
                if !roles.contains(r) {
                    roles.push(r.clone());
                }
            }
            rows.push((n, role, cat, counts));
        }
        let mut report = EvalReport::new(roles);
        for (_, role, cat, counts) in &rows {
            if let (Some(r), Some(c)) = (role, cat) {
                report.add(r, *c, *counts)?;
            }
        }
        for (n, role, cat, counts) in &rows {
            if report.get(role.as_ref(), *cat) != *counts {
                return Err(bad(*n, "row disagrees with the sum of its cells"));
            }
        }
        Ok(report)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.rows();
        let cells: Vec<[String; 5]> = rows
            .iter()
            .map(|(r, k, c)| {
                [
                    r.clone(),
                    k.clone(),
                    format!("{} ({}/{})", format_bp(c.precision_bp() as i64), c.correct, c.predicted),
                    format!("{} ({}/{})", format_bp(c.recall_bp() as i64), c.correct, c.gold),
                    format_bp(c.f_bp() as i64),
                ]
            })
            .collect();
        let header = ["Role", "Category", "P", "R", "F"].map(String::from);
        let mut width = [0usize; 5];
        for row in std::iter::once(&header).chain(&cells) {
            for (w, s) in width.iter_mut().zip(row) {
                *w = (*w).max(s.chars().count());
            }
        }
        for row in std::iter::once(&header).chain(&cells) {
            let mut line = String::new();
            for (i, (s, w)) in row.iter().zip(width).enumerate() {
                let pad = w - s.chars().count();
                if i < 2 {
                    line.push_str(s);
                    line.push_str(&" ".repeat(pad));
                } else {
                    line.push_str(&" ".repeat(pad));
                    line.push_str(s);
                }
                if i < 4 {
                    line.push_str("  ");
                }
            }
            writeln!(f, "{}", line.trim_end())?;
        }
        Ok(())
    }
}

/// Default roles first, then any others in sorted order.
fn report_roles<'a>(extra: impl IntoIterator<Item = &'a Role>) -> Vec<Role> {
    let mut roles = Role::defaults();
    let rest: BTreeSet<Role> = extra.into_iter().filter(|r| !roles.contains(r)).cloned().collect();
    roles.extend(rest);
    roles
}

/// Scores predictions against the gold annotations of `corpus`, whose heads
/// decide categories.
pub fn score(predictions: &[Prediction], corpus: &Corpus) -> Result<EvalReport, EvalError> {
    let mut seen = Vec::new();
    for doc in &corpus.documents {
        for p in &doc.predicates {
            seen.extend(p.arguments.iter().map(|a| &a.role));
        }
    }
    seen.extend(predictions.iter().map(|p| &p.role));
    score_with_roles(predictions, corpus, report_roles(seen))
}

pub fn score_with_roles(
    predictions: &[Prediction],
    corpus: &Corpus,
    roles: Vec<Role>,
) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport::new(roles);
    let index: HashMap<&str, usize> = corpus
        .documents
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), i))
        .collect();
    let mut by_doc: Vec<Vec<&Prediction>> = vec![Vec::new(); corpus.documents.len()];
    for p in predictions {
        let &d = index
            .get(p.document.as_str())
            .ok_or_else(|| EvalError::UnknownDocument(p.document.clone()))?;
        by_doc[d].push(p);
    }

    for (d, doc) in corpus.documents.iter().enumerate() {
        let heads = Heads::from_document(doc);
        let gold = document_gold_instances(doc, d)?;
        let mut lookup = HashMap::new();
        for g in &gold {
            report.add(&g.role, g.category, Counts::new(0, 0, 1))?;
            lookup.insert((g.predicate, g.role.clone()), g);
        }
        let mut done = BTreeSet::new();
        for p in &by_doc[d] {
            if doc.predicate(p.predicate).is_none() {
                return Err(EvalError::UnknownPredicate {
                    doc: doc.id.clone(),
                    predicate: p.predicate,
                });
            }
            if !done.insert((p.predicate, p.role.clone())) {
                return Err(EvalError::Duplicate {
                    doc: doc.id.clone(),
                    predicate: p.predicate,
                    role: p.role.as_str().to_string(),
                });
            }
            let Some(a) = p.argument else { continue };
            if !doc.resolves(a) || a == p.predicate {
                return Err(EvalError::DanglingArgument {
                    doc: doc.id.clone(),
                    argument: a,
                });
            }
            match lookup.get(&(p.predicate, p.role.clone())) {
                Some(g) if g.cluster_members.contains(&a) => {
                    report.add(&p.role, g.category, Counts::new(1, 1, 0))?;
                }
                _ => {
                    let category = match Scope::of(p.predicate, a) {
                        Scope::Inter => Category::ZeroInter,
                        Scope::Intra => {
                            let h = heads.as_ref().ok_or_else(|| CorpusError::CategoryUndecidable {
                                doc: doc.id.clone(),
                                predicate: p.predicate,
                            })?;
                            if h.linked(a, p.predicate) {
                                Category::Depend
                            } else {
                                Category::ZeroIntra
                            }
                        }
                    };
                    report.add(&p.role, category, Counts::new(0, 1, 0))?;
                }
            }
        }
    }
    Ok(report)
}

/// Predictions that name the first member of every gold instance, and no
/// argument for every other (predicate, role).
pub fn predictions_from_gold(corpus: &Corpus, roles: &[Role]) -> Result<Vec<Prediction>, EvalError> {
    let mut out = Vec::new();
    for (d, doc) in corpus.documents.iter().enumerate() {
        let gold = document_gold_instances(doc, d)?;
        for p in &doc.predicates {
            for role in roles {
                let g = gold.iter().find(|g| g.predicate == p.location && g.role == *role);
                let argument = g.map(|g| g.cluster_members[0]);
                out.push(Prediction {
                    document: doc.id.clone(),
                    predicate: p.location,
                    role: role.clone(),
                    argument,
                    probability: argument.map(|_| 1.0),
                    scope: argument.map(|a| Scope::of(p.location, a)),
                });
            }
        }
    }
    Ok(out)
}

/// F differences `a − b` in basis points, per row of `a`'s layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaTable {
    pub rows: Vec<(String, String, i64)>,
}

impl fmt::Display for DeltaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rw = self.rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0).max(4);
        let cw = self.rows.iter().map(|r| r.1.chars().count()).max().unwrap_or(0).max(8);
        writeln!(f, "{:<rw$}  {:<cw$}  dF", "Role", "Category")?;
        for (r, c, d) in &self.rows {
            let sign = if *d > 0 { "+" } else { "" };
            writeln!(f, "{r:<rw$}  {c:<cw$}  {sign}{}", format_bp(*d))?;
        }
        Ok(())
    }
}

/// Per-cell F of `a` minus F of `b`, each rounded to two decimals first.
pub fn compare(a: &EvalReport, b: &EvalReport) -> Result<DeltaTable, EvalError> {
    let ra: BTreeSet<&Role> = a.roles.iter().collect();
    let rb: BTreeSet<&Role> = b.roles.iter().collect();
    if ra != rb {
        return Err(EvalError::MismatchedRoles);
    }
    let rows = a
        .rows()
        .into_iter()
        .zip(b.rows_in_order(&a.roles))
        .map(|((r, c, x), (_, _, y))| (r, c, x.f_bp() as i64 - y.f_bp() as i64))
        .collect();
    Ok(DeltaTable { rows })
}

impl EvalReport {
    fn rows_in_order(&self, roles: &[Role]) -> Vec<(String, String, Counts)> {
        EvalReport {
            roles: roles.to_vec(),
            counts: self.counts.clone(),
        }
        .rows()
    }
}
