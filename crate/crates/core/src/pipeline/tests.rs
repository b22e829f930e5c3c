use std::collections::BTreeSet;

use super::*;
use crate::classifier::{Label, Model, TrainWarning};
use crate::corpus::{load_corpus, Corpus, Heads, Role, TokenRef};
use crate::features::{fit_vocabulary, FeatureConfig, Vocabulary};
use crate::synthgen::{generate, Profile, SynthSpec};

fn worked() -> Corpus {
    load_corpus(include_str!("../../tests/fixtures/worked_sentence.corpus").as_bytes()).unwrap()
}

fn r(s: &str) -> TokenRef {
    s.parse().unwrap()
}

fn synth(docs: usize, seed: u64) -> Corpus {
    generate(&SynthSpec {
        documents: docs,
        sentences_per_doc: 3,
        tokens_per_sentence: 8,
        vocab_size: 40,
        rule_profile: Profile::Marker,
        zero_rate: 0.3,
        coref_rate: 0.3,
        inter_rate: 0.5,
        seed,
    })
    .unwrap()
    .corpus
}

#[test]
fn ga_intra_examples_for_fate() {
    let c = worked();
    let ex = generate_examples(&c, &Role::new("ga"), Scope::Intra, &TrainConfig::default(), &DepSource::None).unwrap();
    let fate: Vec<_> = ex.iter().filter(|e| e.predicate == r("0:4")).collect();
    assert_eq!(fate.len(), 13);
    for e in fate {
        let positive = e.candidate == r("0:0") || e.candidate == r("0:2");
        assert_eq!(e.label == Label::Positive, positive, "{}", e.candidate);
    }
    let inter = generate_examples(&c, &Role::new("ga"), Scope::Inter, &TrainConfig::default(), &DepSource::None).unwrap();
    assert!(inter.is_empty());
}

#[test]
fn lone_predicate_has_no_intra_pairs() {
    let c = load_corpus("#doc d\n#sent 0\n0\tgo\tV\t_\n#sent 1\n0\tx\tN\t_\n1\ty\tN\t_\n#pred 0:0\n".as_bytes()).unwrap();
    let cfg = TrainConfig::default();
    let intra = generate_examples(&c, &Role::new("ga"), Scope::Intra, &cfg, &DepSource::None).unwrap();
    assert!(intra.is_empty());
    let inter = generate_examples(&c, &Role::new("ga"), Scope::Inter, &cfg, &DepSource::None).unwrap();
    assert_eq!(inter.len(), 2);
}

#[test]
fn negative_subsampling_keeps_positives() {
    // one predicate with arguments in a 10,001 token sentence
    let mut text = String::from("#doc d\n#sent 0\n0\tv\tV\t_\n");
    for t in 1..=10_001 {
        text.push_str(&format!("{t}\tn\tN\t0\n"));
    }
    text.push_str("#pred 0:0\n#arg 0:0\tga\t0:1\n");
    let c = load_corpus(text.as_bytes()).unwrap();
    let cfg = TrainConfig {
        features: FeatureConfig::with_groups("lang").unwrap(),
        neg_subsample: Some(0.5),
        seed: 4,
        ..TrainConfig::default()
    };
    let ex = generate_examples(&c, &Role::new("ga"), Scope::Intra, &cfg, &DepSource::None).unwrap();
    let pos = ex.iter().filter(|e| e.label == Label::Positive).count();
    let neg = ex.len() - pos;
    assert_eq!(pos, 1);
    // 10,000 negatives, binomial sd 50
    assert!((neg as i64 - 5000).abs() <= 200, "{neg}");
    let again = generate_examples(&c, &Role::new("ga"), Scope::Intra, &cfg, &DepSource::None).unwrap();
    assert_eq!(again, ex);
}

#[test]
fn unknown_roles_are_rejected() {
    let c = worked();
    let cfg = TrainConfig {
        roles: vec![Role::new("ga"), Role::new("wo")],
        ..TrainConfig::default()
    };
    assert!(matches!(
        generate_examples(&c, &Role::new("ga"), Scope::Intra, &cfg, &DepSource::None),
        Err(PipelineError::UnknownRole { .. })
    ));
}

fn small_config() -> TrainConfig {
    TrainConfig {
        features: FeatureConfig {
            window_unigram: 2,
            window_ngram: 2,
            ..FeatureConfig::default()
        },
        ..TrainConfig::default()
    }
}

#[test]
fn six_models_and_degenerate_cells() {
    let c = worked();
    let (set, reports) = train_all::<f64>(&c, &small_config(), &DepSource::None).unwrap();
    assert_eq!(set.len(), 6);
    assert_eq!(reports.len(), 6);
    for rep in &reports {
        match (rep.role.as_str(), rep.scope) {
            (_, Scope::Inter) => assert_eq!(rep.warnings, vec![TrainWarning::Empty]),
            ("ga" | "wo" | "ni", Scope::Intra) => assert!(!rep.is_degenerate(), "{rep:?}"),
            _ => unreachable!(),
        }
    }
    let no_wo = load_corpus("#doc d\n#sent 0\n0\ta\tN\t1\n1\tb\tV\t_\n#sent 1\n0\tc\tN\t1\n1\td\tV\t_\n#pred 0:1\n#pred 1:1\n#arg 0:1\tga\t0:0\n#arg 1:1\tga\t0:0\n".as_bytes()).unwrap();
    let (_, reports) = train_all::<f64>(&no_wo, &small_config(), &DepSource::None).unwrap();
    for rep in reports {
        let expect = rep.role.as_str() != "ga";
        assert_eq!(rep.is_degenerate(), expect, "{rep:?}");
    }
}

#[test]
fn fast_training_matches_naive_vocabularies() {
    let c = synth(4, 2);
    for min_count in [1, 2] {
        let cfg = TrainConfig {
            min_count,
            neg_subsample_inter: Some(0.5),
            seed: 3,
            ..small_config()
        };
        let (set, reports) = train_all::<f64>(&c, &cfg, &DepSource::None).unwrap();
        for role in &cfg.roles {
            for scope in Scope::ALL {
                let ex = generate_examples(&c, role, scope, &cfg, &DepSource::None).unwrap();
                let vocab: Vocabulary = fit_vocabulary(ex.iter().map(|e| &e.features), min_count);
                let model = set.model(role, scope);
                assert_eq!(model.vocabulary(), &vocab, "{role} {scope}");
                let rep = reports.iter().find(|x| x.role == *role && x.scope == scope).unwrap();
                assert_eq!(rep.examples, ex.len());
                assert_eq!(rep.positives, ex.iter().filter(|e| e.label == Label::Positive).count());
            }
        }
    }
}

#[test]
fn training_is_byte_identical() {
    let c = synth(3, 5);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let (set, _) = train_all::<f64>(&c, &small_config(), &DepSource::None).unwrap();
        set.save(d.path()).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        let a = std::fs::read(dirs[0].path().join(&n)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
    let back = ModelSet::<f64>::load(dirs[0].path()).unwrap();
    let (set, _) = train_all::<f64>(&c, &small_config(), &DepSource::None).unwrap();
    assert_eq!(back, set);
}

#[test]
fn conflict_and_tie_rules() {
    let tokyo = r("0:1");
    let gull = r("0:4");
    let got = decode([(tokyo, Scope::Intra, 0.6), (gull, Scope::Intra, 0.8)], 0.5);
    assert_eq!(got.map(|g| g.0), Some(gull));
    assert_eq!(decode([(tokyo, Scope::Intra, 0.3), (gull, Scope::Intra, 0.5)], 0.5), None);
    let tie = decode([(gull, Scope::Intra, 0.7), (r("1:0"), Scope::Inter, 0.7), (tokyo, Scope::Intra, 0.7)], 0.5);
    assert_eq!(tie.map(|g| g.0), Some(tokyo));
    let across = decode([(r("1:0"), Scope::Inter, 0.7), (r("0:3"), Scope::Intra, 0.7)], 0.5);
    assert_eq!(across.map(|g| g.0), Some(r("0:3")));
}

#[test]
fn dependency_sources() {
    let bare = load_corpus("#doc d\n#sent 0\n0\ta\tN\t_\n1\tb\tV\t_\n#pred 0:1\n".as_bytes()).unwrap();
    let err = resolve_heads(&bare.documents[0], &DepSource::Oracle).unwrap_err();
    assert!(err.to_string().contains("no gold heads"));
    assert_eq!(resolve_heads(&bare.documents[0], &DepSource::None).unwrap(), None);

    let c = worked();
    let doc = &c.documents[0];
    let provided = DepSource::Provided(ProvidedHeads::from_corpus(&c));
    let a = resolve_heads(doc, &DepSource::Oracle).unwrap().unwrap();
    let b = resolve_heads(doc, &provided).unwrap().unwrap();
    assert_eq!(a, b);
    let cfg = FeatureConfig::with_groups("pwfeat+lang+dep").unwrap();
    let cf = Default::default();
    let fa = crate::features::extract(doc, r("0:13"), r("0:9"), &cfg, Some(&a), &cf).unwrap();
    let fb = crate::features::extract(doc, r("0:13"), r("0:9"), &cfg, Some(&b), &cf).unwrap();
    assert_eq!(fa, fb);
    let none = crate::features::extract(doc, r("0:13"), r("0:9"), &FeatureConfig::default(), None, &cf).unwrap();
    assert_eq!(none.with_prefix("dep:").count(), 0);
    assert!(fa.with_prefix("dep:").count() > 0);

    let short = ProvidedHeads {
        documents: [("fig1".to_string(), Heads::new(vec![vec![None; 13]]))].into(),
    };
    assert!(matches!(
        resolve_heads(doc, &DepSource::Provided(short)),
        Err(PipelineError::HeadsMismatch { .. })
    ));
    assert!(matches!(
        resolve_heads(doc, &DepSource::Provided(ProvidedHeads::default())),
        Err(PipelineError::MissingProvided { .. })
    ));
}

#[test]
fn heads_file_round_trip_and_errors() {
    let heads = ProvidedHeads::from_corpus(&synth(2, 1));
    let mut buf = Vec::new();
    write_heads(&heads, &mut buf).unwrap();
    assert_eq!(read_heads(buf.as_slice()).unwrap(), heads);
    assert!(read_heads("#doc a\n0\t_\n".as_bytes()).is_err());
    assert!(read_heads("#doc a\n#sent 0\n1\t_\n".as_bytes()).is_err());
    assert!(read_heads("#doc a\n#sent 0\n0\tx\n".as_bytes()).is_err());
    assert!(read_heads("#doc a\n#sent 1\n".as_bytes()).is_err());
}

#[test]
fn prediction_file_round_trip() {
    let preds = vec![
        Prediction {
            document: "d".into(),
            predicate: r("0:3"),
            role: Role::new("ga"),
            argument: Some(r("1:2")),
            probability: Some(0.875),
            scope: Some(Scope::Inter),
        },
        Prediction {
            document: "d".into(),
            predicate: r("0:3"),
            role: Role::new("wo"),
            argument: None,
            probability: None,
            scope: None,
        },
    ];
    let mut buf = Vec::new();
    write_predictions(&preds, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf.clone()).unwrap(), "d\t0:3\tga\t1:2\t0.875000\tinter\nd\t0:3\two\t_\t_\t_\n");
    assert_eq!(read_predictions(buf.as_slice()).unwrap(), preds);
    assert!(read_predictions("d\t0:3\tga\t1:2\t_\tinter\n".as_bytes()).is_err());
}

#[test]
fn prediction_requires_dependencies_when_trained_with_them() {
    let c = worked();
    let cfg = TrainConfig {
        features: FeatureConfig { use_dep: true, ..small_config().features },
        ..small_config()
    };
    let (set, _) = train_all::<f64>(&c, &cfg, &DepSource::Oracle).unwrap();
    assert_eq!(set.dep_mode, DepMode::Oracle);
    let doc = &c.documents[0];
    assert!(predict_document(&set, doc, None, &PredictOptions::default()).is_err());
    let heads = Heads::gold(doc).unwrap();
    let preds = predict_document(&set, doc, Some(&heads), &PredictOptions::default()).unwrap();
    assert_eq!(preds.len(), 5 * 3);
    assert!(train_all::<f64>(&c, &cfg, &DepSource::None).is_err());
}

#[test]
fn predictions_on_training_data_recover_marker_rules() {
    let c = synth(12, 8);
    let (set, _) = train_all::<f64>(&c, &small_config(), &DepSource::None).unwrap();
    let preds = predict_corpus(&set, &c, &DepSource::None, &PredictOptions::default()).unwrap();
    let report = crate::evaluation::score(&preds, &c).unwrap();
    let dep = report.get(None, Some(crate::corpus::Category::Depend));
    assert!(dep.f_bp() > 8000, "{report}");
    let p: BTreeSet<_> = preds.iter().map(|p| (p.document.clone(), p.predicate, p.role.clone())).collect();
    assert_eq!(p.len(), preds.len());
}

#[test]
fn single_precision_model_set() {
    let c = synth(2, 4);
    let (set, _) = train_all::<f32>(&c, &small_config(), &DepSource::None).unwrap();
    let preds = predict_corpus(&set, &c, &DepSource::None, &PredictOptions::default()).unwrap();
    assert!(!preds.is_empty());
    let _: &Model<f32> = set.model(&Role::new("ga"), Scope::Intra);
}
