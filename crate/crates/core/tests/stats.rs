mod common;

use std::collections::BTreeMap;

use langmap::pipeline::{encode_rows, run_compare, run_ngrams, CorpusRow};
use langmap::stats::*;
use langmap::Exec;

fn list(counts: &BTreeMap<String, u64>, country: &str) -> FrequencyList {
    FrequencyList::from_counts("web", "eng", country, counts.iter().map(|(t, &c)| (t.as_str(), c)))
}

#[test]
fn spearman_matches_brute_force_oracle() {
    let t = Threshold::default();
    let mut defined = 0;
    for seed in 0..300 {
        let (a, b) = common::random_count_pair(seed);
        let got = spearman(&align(&list(&a, "X"), &list(&b, "X"), t)).ok();
        let want = common::oracle_spearman(&a, &b, t.count, t.per);
        match (got, want) {
            (Some(g), Some(w)) => {
                assert!((g - w).abs() <= 1e-9, "seed {seed}: {g} vs {w}");
                defined += 1;
            }
            (None, None) => {}
            other => panic!("seed {seed}: {other:?}"),
        }
    }
    assert!(defined >= 250);
}

#[test]
fn self_similarity_is_exactly_one() {
    for seed in 0..50 {
        let (a, _) = common::random_count_pair(seed);
        let al = align(&list(&a, "X"), &list(&a, "X"), Threshold::default());
        if al.len() >= 2 && al.a.iter().any(|&c| c != al.a[0]) {
            assert_eq!(spearman(&al).unwrap(), 1.0);
        }
    }
}

#[test]
fn threshold_is_inclusive_at_five_per_ten_million() {
    let t = Threshold::default();
    assert!(t.admits(5, 10_000_000));
    assert!(!t.admits(4, 10_000_000));
    assert!(t.admits(1, 2_000_000));
    assert!(!t.admits(1, 2_000_001));
}

#[test]
fn language_average_of_observations() {
    let rhos = [0.513, 0.775, 0.761, 0.752, 0.636, 0.731];
    let obs = rhos
        .iter()
        .enumerate()
        .map(|(i, &rho)| SimilarityObservation {
            language: "eng".into(),
            country: format!("C{i}"),
            rho,
            n_aligned: 100,
        })
        .collect();
    let rep = CrossSourceReport::from_observations(obs);
    let s = rep.per_language["eng"];
    let mean = rhos.iter().sum::<f64>() / 6.0;
    assert!((s.mean - mean).abs() < 1e-15);
    assert_eq!(s.observations, 6);
}

fn write_corpus(root: &std::path::Path, country: &str, texts: &[&str]) {
    let rows: Vec<CorpusRow> = texts
        .iter()
        .map(|t| CorpusRow {
            language: "eng".into(),
            url: format!("http://x.{}/", country.to_lowercase()),
            words: t.split_whitespace().count() as u64,
            text: t.to_string(),
        })
        .collect();
    let dir = root.join("EU").join(country).join("eng");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("part-00000.csv"), encode_rows(&rows).unwrap()).unwrap();
}

#[test]
fn ngrams_count_tokens_by_hand() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    write_corpus(&corpus, "GBR", &["The cat sat.", "the CAT ran\nand sat"]);
    let lists = run_ngrams(&corpus, &tmp.path().join("ng"), "web", &Exec::sequential()).unwrap();
    assert_eq!(lists.len(), 1);
    let fl = &lists[0];
    assert_eq!((fl.language.as_str(), fl.country.as_str()), ("eng", "GBR"));
    assert_eq!(fl.count("the"), 2);
    assert_eq!(fl.count("cat"), 2);
    assert_eq!(fl.count("sat"), 2);
    assert_eq!(fl.count("ran"), 1);
    assert_eq!(fl.count("and"), 1);
    assert_eq!(fl.total_tokens, 8);
    let back = FrequencyList::read_tree(&tmp.path().join("ng")).unwrap();
    assert_eq!(&back[0], fl);
}

#[test]
fn comparing_a_tree_with_itself_gives_one() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    write_corpus(&corpus, "GBR", &["one two two three three three four four four four"]);
    write_corpus(&corpus, "IRL", &["five five six six six seven seven seven seven eight"]);
    let ng = tmp.path().join("ng");
    run_ngrams(&corpus, &ng, "web", &Exec::sequential()).unwrap();
    let out = tmp.path().join("cmp");
    let rep = run_compare(&ng, &ng, 1, None, &out, &Exec::sequential()).unwrap();
    assert_eq!(rep.observations.len(), 2);
    assert!(rep.observations.iter().all(|o| o.rho == 1.0));
    for f in [
        "cross_observations.csv",
        "cross_summary.csv",
        "within_a_summary.csv",
        "within_b_pairs.csv",
        "cross_undefined.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let only = run_compare(
        &ng,
        &ng,
        1,
        Some(&["IRL".to_string()]),
        &tmp.path().join("cmp2"),
        &Exec::sequential(),
    )
    .unwrap();
    assert_eq!(only.observations.len(), 1);
}
