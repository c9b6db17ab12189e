//! The shipped corpus: coverage, recall and cleanliness per rule.

use std::path::PathBuf;

use mwc_core::config::Config;
use mwc_core::corpus::{evaluate_corpus, load_corpus, Variant};
use mwc_core::detectors::Engine;
use mwc_core::registry::Registry;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn every_non_advisory_rule_has_a_pair() {
    let fixtures = load_corpus(&corpus_dir()).unwrap();
    let vulnerable = fixtures.iter().filter(|f| f.variant == Variant::Vulnerable).count();
    assert!(vulnerable >= 30, "{vulnerable}");
    for id in Registry::builtin().non_advisory_ids() {
        for variant in [Variant::Vulnerable, Variant::Fixed] {
            assert!(fixtures.iter().any(|f| f.rule_id == id && f.variant == variant), "{id} {variant:?}");
        }
    }
}

#[test]
fn recall_is_total_and_fixed_files_are_clean() {
    let fixtures = load_corpus(&corpus_dir()).unwrap();
    let m = evaluate_corpus(&fixtures, &Engine::default(), &Config::default()).unwrap();
    let bad: Vec<String> = m
        .per_rule
        .iter()
        .filter(|(_, r)| r.false_negatives > 0 || r.false_positives_on_fixed > 0)
        .map(|(id, r)| format!("{id}: {r:?}"))
        .collect();
    assert!(bad.is_empty(), "{bad:#?}");
    assert_eq!(m.recall(), 1.0);
}
