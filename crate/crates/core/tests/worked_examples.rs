use pasakit::corpus::{corpus_stats, gold_instances, load_corpus, Role};
use pasakit::{Category, Corpus, TokenRef};

fn worked() -> Corpus {
    load_corpus(include_str!("fixtures/worked_sentence.corpus").as_bytes()).unwrap()
}

fn r(s: &str) -> TokenRef {
    s.parse().unwrap()
}

#[test]
fn worked_sentence_has_five_predicates_and_one_cluster() {
    let c = worked();
    let doc = &c.documents[0];
    assert_eq!(doc.predicates.len(), 5);
    assert_eq!(doc.clusters.len(), 1);
    let members: Vec<&str> = doc.clusters[0]
        .members
        .iter()
        .map(|&m| doc.token(m).unwrap().surface.as_str())
        .collect();
    assert_eq!(members, ["Socialist party", "party"]);
}

#[test]
fn worked_sentence_instances_expand_the_cluster() {
    let c = worked();
    let instances = gold_instances(&c).unwrap();
    let ga = |pred: &str| {
        instances
            .iter()
            .find(|g| g.predicate == r(pred) && g.role == Role::new("ga"))
            .unwrap()
    };
    // "bet" is annotated with both cluster members but yields one instance
    let bet = ga("0:6");
    assert_eq!(bet.cluster_members, vec![r("0:0"), r("0:2")]);
    assert_eq!(instances.iter().filter(|g| g.predicate == r("0:6") && g.role == Role::new("ga")).count(), 1);
    // "party" depends on "fate", so the whole cluster counts as Depend
    let fate = ga("0:4");
    assert_eq!(fate.cluster_members, vec![r("0:0"), r("0:2")]);
    assert_eq!(fate.category, Category::Depend);
    assert_eq!(ga("0:13").category, Category::Depend);
}

#[test]
fn worked_sentence_stats() {
    let stats = corpus_stats(&worked());
    assert_eq!((stats.documents, stats.sentences, stats.words, stats.predicates), (1, 1, 14, 5));
    let ga = Role::new("ga");
    assert_eq!(stats.count(&ga, Category::Depend) + stats.count(&ga, Category::ZeroIntra), 4);
    assert_eq!(stats.count(&ga, Category::ZeroInter), 0);
    assert_eq!(stats.total_instances(), gold_instances(&worked()).unwrap().len());
}
