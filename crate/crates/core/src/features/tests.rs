use proptest::prelude::*;

use super::*;
use crate::corpus::{case_frame_flags, load_corpus, Document, Role, Sentence, Token};

const WORKED: &str = include_str!("../../tests/fixtures/worked_sentence.corpus");
const TINY: &str = "#doc t\n#sent 0\n0\ta\tN\t2\n1\tが\tP\t0\n2\tc\tV\t_\n#pred 0:2\n#arg 0:2\tga\t0:0\n";

fn doc(text: &str) -> Document {
    load_corpus(text.as_bytes()).unwrap().documents.remove(0)
}

fn all_groups() -> FeatureConfig {
    FeatureConfig {
        use_dep: true,
        ..FeatureConfig::default()
    }
}

/// One 15-token sentence with a predicate at the end, no heads.
fn fifteen() -> Document {
    let mut text = String::from("#doc f\n#sent 0\n");
    for i in 0..15 {
        let pos = if i == 14 { "V" } else { "N" };
        text.push_str(&format!("{i}\tw{i}\t{pos}\t_\n"));
    }
    text.push_str("#pred 0:14\n");
    doc(&text)
}

#[test]
fn golden_tiny_pair() {
    let d = doc(TINY);
    let config = FeatureConfig {
        use_dep: true,
        window_unigram: 1,
        window_ngram: 1,
        pair_window: 1,
        distance_divisors: vec![2],
        ..FeatureConfig::default()
    };
    let heads = Heads::from_document(&d).unwrap();
    let cf = case_frame_flags(&d, TokenRef::new(0, 2), &Role::defaults()).unwrap();
    let set = extract(&d, TokenRef::new(0, 2), TokenRef::new(0, 0), &config, Some(&heads), &cf).unwrap();
    let mut out = Vec::new();
    set.write_golden(&mut out).unwrap();
    let expected = include_str!("../../tests/fixtures/tiny_pair.golden");
    assert_eq!(String::from_utf8(out).unwrap(), expected);
}

#[test]
fn candidate_at_sentence_start_pads_left_windows() {
    let d = fifteen();
    let set = extract(&d, TokenRef::new(0, 14), TokenRef::new(0, 0), &FeatureConfig::default(), None, &CaseFrame::new()).unwrap();
    for o in 1..=10 {
        assert!(set.contains(&format!("pw:w1a@-{o}=<pad>")), "offset -{o}");
        assert!(set.contains(&format!("pw:t1a@-{o}=<pad>")));
    }
    assert!(set.contains("pw:w2a@-5=<pad>|<pad>"));
    assert!(set.contains("pw:w2a@-1=<pad>|w0"));
    assert!(set.contains("pw:w1a@+1=w1"));
    // right of the predicate is past the sentence end
    assert!(set.contains("pw:w1p@+1=<pad>"));
}

/// Independent reference: walk the tokens and count the ones strictly
/// between the two positions.
fn brute_between(positions: std::ops::Range<usize>, a: usize, b: usize) -> usize {
    positions.filter(|&i| (a < i && i < b) || (b < i && i < a)).count()
}

#[test]
fn word_distance_on_fifteen_token_sentence() {
    let d = fifteen();
    let set = extract(&d, TokenRef::new(0, 14), TokenRef::new(0, 10), &FeatureConfig::default(), None, &CaseFrame::new()).unwrap();
    assert_eq!(brute_between(0..15, 10, 14), 3);
    let wdist: Vec<&str> = set.with_prefix("pw:wdist").collect();
    let mut expected = vec!["pw:wdist=-3", "pw:wdist/2=-1", "pw:wdist/3=-1", "pw:wdist/4=0", "pw:wdist/5=0"];
    expected.sort();
    assert_eq!(wdist, expected);
}

#[test]
fn inter_sentence_distance_counts_global_tokens() {
    let d = doc("#doc d\n#sent 0\n0\ta\tN\t_\n1\tb\tN\t_\n#sent 1\n0\tc\tN\t_\n1\td\tV\t_\n#pred 1:1\n");
    let set = extract(&d, TokenRef::new(1, 1), TokenRef::new(0, 0), &FeatureConfig::default(), None, &CaseFrame::new()).unwrap();
    assert!(set.contains("pw:wdist=-2"));
    assert!(set.contains("lang:sentdist=-1"));
    assert!(set.contains("lang:sentpos=0"));
}

#[test]
fn head_and_leaf_words() {
    let d = doc(WORKED);
    let heads = Heads::from_document(&d).unwrap();
    // "concept" as candidate of "address"
    let set = extract(&d, TokenRef::new(0, 13), TokenRef::new(0, 9), &all_groups(), Some(&heads), &CaseFrame::new()).unwrap();
    assert!(set.contains("dep:ahead=fulfillment"));
    assert!(set.contains("dep:aleaf=bet"));
    assert!(set.contains("dep:aleaf=liberal democratic party"));
    assert!(set.contains("dep:phead=<root>"));
    // concept -> fulfillment -> address
    assert!(set.contains("dep:rel=A→P:2"));
}

#[test]
fn dep_relation_examples() {
    // 0 -> 1 -> 2 -> 3 -> 4
    let heads = vec![Some(1), Some(2), Some(3), Some(4), None];
    assert_eq!(dep_relation(&heads, 0, 1, 3).unwrap(), DepRelation::ArgToPred(1));
    assert_eq!(dep_relation(&heads, 0, 2, 3).unwrap(), DepRelation::ArgToPred(2));
    assert_eq!(dep_relation(&heads, 0, 4, 3).unwrap(), DepRelation::None);
    assert_eq!(dep_relation(&heads, 0, 4, 4).unwrap(), DepRelation::ArgToPred(4));
    assert_eq!(dep_relation(&heads, 3, 1, 3).unwrap(), DepRelation::PredToArg(2));
    assert_eq!(dep_relation(&heads, 0, 1, 3).unwrap().to_string(), "A→P:1");
    assert_eq!(DepRelation::None.to_string(), "none");
    assert!(dep_relation(&[None, None], 0, 1, 3).is_err());
    assert!(dep_relation(&heads, 2, 2, 3).is_err());
    // cycles terminate
    let cyclic = vec![Some(1), Some(0), Some(0)];
    assert_eq!(dep_relation(&cyclic, 2, 1, 3).unwrap(), DepRelation::ArgToPred(2));
}

#[test]
fn dep_group_needs_a_source() {
    let d = doc(TINY);
    let err = extract(&d, TokenRef::new(0, 2), TokenRef::new(0, 0), &all_groups(), None, &CaseFrame::new());
    assert_eq!(err.unwrap_err(), FeatureError::MissingDependencies);
    let same = extract(&d, TokenRef::new(0, 2), TokenRef::new(0, 2), &FeatureConfig::default(), None, &CaseFrame::new());
    assert!(matches!(same, Err(FeatureError::SameToken(_))));
}

#[test]
fn right_marker_and_marker_distance() {
    let d = doc(WORKED);
    let set = extract(&d, TokenRef::new(0, 6), TokenRef::new(0, 4), &FeatureConfig::default(), None, &CaseFrame::new()).unwrap();
    assert!(set.contains("lang:rmark=を"));
    assert!(set.contains("lang:mdist=-1"));
    let set = extract(&d, TokenRef::new(0, 6), TokenRef::new(0, 2), &FeatureConfig::default(), None, &CaseFrame::new()).unwrap();
    // の is not a case marker
    assert!(set.with_prefix("lang:rmark").next().is_none());
    // between party(2) and bet(6): の, fate, を; one predicate (fate)
    assert!(set.contains("lang:mdist=-1"));
    assert!(set.contains("pw:pdist=-1"));
    assert!(set.contains("lang:pdist*mdist=-1|-1"));
}

#[test]
fn case_frame_features_follow_flags() {
    let d = doc(WORKED);
    let p = TokenRef::new(0, 11);
    let cf = case_frame_flags(&d, p, &Role::defaults()).unwrap();
    let set = extract(&d, p, TokenRef::new(0, 0), &FeatureConfig::default(), None, &cf).unwrap();
    let flags: Vec<&str> = set.with_prefix("pw:cf=").collect();
    assert_eq!(flags, vec!["pw:cf=ga", "pw:cf=wo"]);
    let off = FeatureConfig { use_case_frame: false, ..FeatureConfig::default() };
    let set = extract(&d, p, TokenRef::new(0, 0), &off, None, &cf).unwrap();
    assert_eq!(set.with_prefix("pw:cf=").count(), 0);
}

#[test]
fn group_names_round_trip() {
    for g in ["pwfeat", "pwfeat+lang", "pwfeat+lang+dep"] {
        assert_eq!(FeatureConfig::with_groups(g).unwrap().groups(), g);
    }
    assert!(FeatureConfig::with_groups("pwfeat+syntax").is_err());
    assert!(FeatureConfig { distance_divisors: vec![1], ..FeatureConfig::default() }.validate().is_err());
}

/// Random head-final tree document: every token except the last has a head
/// to its right, so the structure is acyclic.
fn arb_doc() -> impl Strategy<Value = Document> {
    prop::collection::vec(2usize..9, 1..4)
        .prop_flat_map(|lens| {
            let sents: Vec<_> = lens
                .iter()
                .map(|&n| {
                    (
                        prop::collection::vec((0usize..4, 0usize..4), n),
                        prop::collection::vec(any::<prop::sample::Index>(), n),
                    )
                })
                .collect();
            (sents, prop::collection::vec(any::<bool>(), 30))
        })
        .prop_map(|(sents, pred_flags)| {
            let surfaces = ["x", "が", "を", "y"];
            let tags = ["N", "P", "V", "M"];
            let mut doc = Document { id: "r".into(), ..Document::default() };
            let mut k = 0;
            for (words, heads) in sents {
                let n = words.len();
                let tokens = words
                    .iter()
                    .enumerate()
                    .map(|(i, &(w, t))| {
                        let head = if i + 1 < n { Some(i + 1 + heads[i].index(n - i - 1)) } else { None };
                        Token::new(surfaces[w], tags[t], head)
                    })
                    .collect();
                let s = doc.sentences.len();
                doc.sentences.push(Sentence::new(tokens));
                for t in 0..n {
                    if pred_flags[k % pred_flags.len()] {
                        doc.predicates.push(crate::corpus::PredicateInstance {
                            location: TokenRef::new(s, t),
                            arguments: vec![],
                        });
                    }
                    k += 1;
                }
            }
            doc
        })
}

fn prefixes(set: &FeatureSet) -> BTreeSet<String> {
    set.iter().map(|k| k.split(':').next().unwrap().to_string()).collect()
}

proptest! {
    #[test]
    fn disabling_a_group_removes_exactly_its_prefix(doc in arb_doc(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let refs: Vec<TokenRef> = doc.token_refs().collect();
        prop_assume!(refs.len() >= 2);
        let p = refs[a.index(refs.len())];
        let c = refs[b.index(refs.len())];
        prop_assume!(p != c);
        let heads = Heads::from_document(&doc);
        let cf = CaseFrame::new();
        let full = extract(&doc, p, c, &all_groups(), heads.as_ref(), &cf).unwrap();
        prop_assert_eq!(prefixes(&full).into_iter().collect::<Vec<_>>(), vec!["dep", "lang", "pw"]);
        for (group, config) in [
            ("pw", FeatureConfig { use_pwfeat: false, ..all_groups() }),
            ("lang", FeatureConfig { use_lang: false, ..all_groups() }),
            ("dep", FeatureConfig { use_dep: false, ..all_groups() }),
        ] {
            let reduced = extract(&doc, p, c, &config, heads.as_ref(), &cf).unwrap();
            let expected: BTreeSet<&str> = full.iter().filter(|k| !k.starts_with(&format!("{group}:"))).collect();
            let got: BTreeSet<&str> = reduced.iter().collect();
            prop_assert_eq!(got, expected);
        }
        // purity
        let again = extract(&doc, p, c, &all_groups(), heads.as_ref(), &cf).unwrap();
        prop_assert_eq!(again, full);
    }

    #[test]
    fn word_distance_sign_and_magnitude(doc in arb_doc(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let refs: Vec<TokenRef> = doc.token_refs().collect();
        prop_assume!(refs.len() >= 2);
        let (pi, ci) = (a.index(refs.len()), b.index(refs.len()));
        prop_assume!(pi != ci);
        let set = extract(&doc, refs[pi], refs[ci], &FeatureConfig::default(), None, &CaseFrame::new()).unwrap();
        let raw: i64 = set.with_prefix("pw:wdist=").next().unwrap()["pw:wdist=".len()..].parse().unwrap();
        // pi, ci are global positions because refs is in document order
        let between = brute_between(0..refs.len(), pi, ci) as i64;
        prop_assert_eq!(raw.abs(), between);
        if between > 0 {
            prop_assert_eq!(raw < 0, ci < pi);
        }
        for k in [2i64, 3, 4, 5] {
            let key = format!("pw:wdist/{k}={}", raw / k);
            prop_assert!(set.contains(&key));
        }
    }

    #[test]
    fn dep_relation_is_antisymmetric_on_trees(doc in arb_doc(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), steps in 1usize..5) {
        let s = &doc.sentences[0];
        let heads: Vec<Option<usize>> = s.tokens.iter().map(|t| t.head).collect();
        let (i, j) = (i.index(heads.len()), j.index(heads.len()));
        prop_assume!(i != j);
        let forward = dep_relation(&heads, i, j, steps).unwrap();
        let backward = dep_relation(&heads, j, i, steps).unwrap();
        match forward {
            DepRelation::ArgToPred(k) => prop_assert_eq!(backward, DepRelation::PredToArg(k)),
            DepRelation::PredToArg(k) => prop_assert_eq!(backward, DepRelation::ArgToPred(k)),
            DepRelation::None => prop_assert_eq!(backward, DepRelation::None),
        }
    }

    #[test]
    fn encode_is_strictly_increasing(keys in prop::collection::vec("[a-e]{1,2}", 0..20), probe in prop::collection::vec("[a-f]{1,2}", 0..20)) {
        let train: FeatureSet = keys.iter().cloned().collect();
        let vocab = fit_vocabulary([&train], 1);
        let probe: FeatureSet = probe.iter().cloned().collect();
        let v = vocab.encode(&probe);
        prop_assert!(v.indices().windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(v.len(), probe.iter().filter(|k| train.contains(k)).count());
    }
}
