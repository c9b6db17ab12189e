//! Labeled fixtures and the recall harness.
//!
//! A corpus directory holds one subdirectory per rule id. Each contains
//! `<name>.vuln.move` / `<name>.fixed.move` pairs and an `expected.json`
//! (or `<name>.expected.json`) listing the findings the vulnerable file must
//! produce.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::detectors::Engine;
use crate::frontend::parse_source;
use crate::id::MwcId;
use crate::semantics::resolve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Vulnerable,
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub rule: MwcId,
    pub line: u32,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ExpectedFile {
    rule: MwcId,
    findings: Vec<Expected>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub path: PathBuf,
    pub rule_id: MwcId,
    pub variant: Variant,
    /// Empty for fixed fixtures.
    pub expected: Vec<Expected>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("{}: `{name}` is not a known rule id", path.display())]
    UnknownRule { path: PathBuf, name: String },
    #[error("{}: no matching {missing} fixture", path.display())]
    MissingPair { path: PathBuf, missing: &'static str },
    #[error("{}: {}", path.display(), messages.join("; "))]
    Analysis { path: PathBuf, messages: Vec<String> },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

fn read_expected(path: &Path, rule: MwcId) -> Result<Vec<Expected>, CorpusError> {
    let malformed = |message: String| CorpusError::Malformed { path: path.to_path_buf(), message };
    let text = fs::read_to_string(path).map_err(io(path))?;
    let file: ExpectedFile = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    if file.rule != rule {
        return Err(malformed(format!("rule {} does not match directory {rule}", file.rule)));
    }
    if file.findings.is_empty() {
        return Err(malformed("vulnerable fixtures need at least one expected finding".into()));
    }
    if file.findings.windows(2).any(|w| w[0].line > w[1].line) {
        return Err(malformed("findings must be sorted by line".into()));
    }
    let registry = crate::registry::Registry::builtin();
    if let Some(bad) = file.findings.iter().find(|f| !registry.contains(f.rule)) {
        return Err(malformed(format!("unknown rule {}", bad.rule)));
    }
    Ok(file.findings)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(io(dir))? {
        let e = e.map_err(io(dir))?;
        if !e.file_name().to_string_lossy().starts_with('.') {
            out.push(e.path());
        }
    }
    out.sort();
    Ok(out)
}

/// Loads and validates every fixture under `dir`, sorted by path.
pub fn load_corpus(dir: &Path) -> Result<Vec<Fixture>, CorpusError> {
    let registry = crate::registry::Registry::builtin();
    let mut fixtures = Vec::new();
    for rule_dir in sorted_entries(dir)?.into_iter().filter(|p| p.is_dir()) {
        let name = rule_dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let rule = name
            .parse::<MwcId>()
            .ok()
            .filter(|id| registry.contains(*id))
            .ok_or_else(|| CorpusError::UnknownRule { path: rule_dir.clone(), name: name.clone() })?;

        let files = sorted_entries(&rule_dir)?;
        let base_of = |p: &Path, suffix: &str| {
            p.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_suffix(suffix)).map(str::to_string)
        };
        for p in &files {
            if let Some(base) = base_of(p, ".fixed.move") {
                if !rule_dir.join(format!("{base}.vuln.move")).is_file() {
                    return Err(CorpusError::MissingPair { path: p.clone(), missing: "vulnerable" });
                }
            }
        }
        for p in &files {
            let Some(base) = base_of(p, ".vuln.move") else { continue };
            let fixed = rule_dir.join(format!("{base}.fixed.move"));
            if !fixed.is_file() {
                return Err(CorpusError::MissingPair { path: p.clone(), missing: "fixed" });
            }
            let specific = rule_dir.join(format!("{base}.expected.json"));
            let expected_path = if specific.is_file() { specific } else { rule_dir.join("expected.json") };
            if !expected_path.is_file() {
                return Err(CorpusError::Malformed { path: p.clone(), message: "no expected.json".into() });
            }
            let expected = read_expected(&expected_path, rule)?;
            fixtures.push(Fixture { path: p.clone(), rule_id: rule, variant: Variant::Vulnerable, expected });
            fixtures.push(Fixture { path: fixed, rule_id: rule, variant: Variant::Fixed, expected: Vec::new() });
        }
    }
    fixtures.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(fixtures)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RuleMetrics {
    pub true_positives: usize,
    pub false_negatives: usize,
    pub false_positives_on_fixed: usize,
}

impl RuleMetrics {
    /// `None` when the rule has no expected findings.
    pub fn recall(&self) -> Option<f64> {
        let total = self.true_positives + self.false_negatives;
        (total > 0).then(|| self.true_positives as f64 / total as f64)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub per_rule: BTreeMap<MwcId, RuleMetrics>,
    pub vulnerable_fixtures: usize,
    pub fixed_fixtures: usize,
}

impl Metrics {
    pub fn true_positives(&self) -> usize {
        self.per_rule.values().map(|m| m.true_positives).sum()
    }

    pub fn false_negatives(&self) -> usize {
        self.per_rule.values().map(|m| m.false_negatives).sum()
    }

    pub fn fixed_false_positives(&self) -> usize {
        self.per_rule.values().map(|m| m.false_positives_on_fixed).sum()
    }

    /// Aggregate recall; 1.0 for an empty corpus.
    pub fn recall(&self) -> f64 {
        let total = self.true_positives() + self.false_negatives();
        if total == 0 {
            1.0
        } else {
            self.true_positives() as f64 / total as f64
        }
    }
}

/// Per-fixture outcome before aggregation.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Outcome {
    rule: MwcId,
    hits: Vec<(MwcId, bool)>,
    fixed_fps: usize,
}

fn evaluate_one(f: &Fixture, engine: &Engine, config: &Config) -> Result<Outcome, CorpusError> {
    let source = fs::read_to_string(&f.path).map_err(io(&f.path))?;
    let path_str = f.path.to_string_lossy();
    let parsed = parse_source(&path_str, &source).map_err(|es| CorpusError::Analysis {
        path: f.path.clone(),
        messages: es.iter().map(|e| e.to_string()).collect(),
    })?;
    let model = resolve(vec![parsed], &config.call_patterns).map_err(|es| CorpusError::Analysis {
        path: f.path.clone(),
        messages: es.iter().map(|e| e.to_string()).collect(),
    })?;
    let findings = engine.run_all(&model, config);
    let hits = f
        .expected
        .iter()
        .map(|e| (e.rule, findings.iter().any(|x| x.rule == e.rule && x.span.line == e.line)))
        .collect();
    let fixed_fps = match f.variant {
        Variant::Fixed => findings.iter().filter(|x| x.rule == f.rule_id).count(),
        Variant::Vulnerable => 0,
    };
    Ok(Outcome { rule: f.rule_id, hits, fixed_fps })
}

/// Runs the engine on every fixture and tallies matches per rule.
pub fn evaluate_corpus(fixtures: &[Fixture], engine: &Engine, config: &Config) -> Result<Metrics, CorpusError> {
    let outcomes: Vec<Result<Outcome, CorpusError>> =
        fixtures.par_iter().map(|f| evaluate_one(f, engine, config)).collect();
    let mut m = Metrics::default();
    for (f, o) in fixtures.iter().zip(outcomes) {
        let o = o?;
        match f.variant {
            Variant::Vulnerable => m.vulnerable_fixtures += 1,
            Variant::Fixed => m.fixed_fixtures += 1,
        }
        m.per_rule.entry(o.rule).or_default().false_positives_on_fixed += o.fixed_fps;
        for (rule, hit) in o.hits {
            let r = m.per_rule.entry(rule).or_default();
            if hit {
                r.true_positives += 1;
            } else {
                r.false_negatives += 1;
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::mwc;

    fn write(dir: &Path, rel: &str, text: &str) {
        let p = dir.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }

    const MINT: &str = "module Coin {\n    public fun mint() {\n        supply = supply + 1000;\n    }\n}\n";
    const MINT_FIXED: &str = "module Coin {\n    public fun mint(cap: &MintCap) {\n        supply = supply + 1000;\n    }\n}\n";

    fn mint_corpus(line: u32) -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "MWC-111/mint.vuln.move", MINT);
        write(d.path(), "MWC-111/mint.fixed.move", MINT_FIXED);
        write(
            d.path(),
            "MWC-111/expected.json",
            &format!("{{ \"rule\": \"MWC-111\", \"findings\": [ {{ \"rule\": \"MWC-111\", \"line\": {line} }} ] }}"),
        );
        d
    }

    #[test]
    fn empty_directory_has_no_fixtures() {
        let d = tempfile::tempdir().unwrap();
        assert!(load_corpus(d.path()).unwrap().is_empty());
    }

    #[test]
    fn loads_pairs() {
        let d = mint_corpus(3);
        let fx = load_corpus(d.path()).unwrap();
        assert_eq!(fx.len(), 2);
        let vuln = fx.iter().find(|f| f.variant == Variant::Vulnerable).unwrap();
        assert_eq!(vuln.expected, vec![Expected { rule: mwc("MWC-111"), line: 3 }]);
    }

    #[test]
    fn evaluation_counts_exact_line_matches() {
        let d = mint_corpus(3);
        let fx = load_corpus(d.path()).unwrap();
        let m = evaluate_corpus(&fx, &Engine::default(), &Config::default()).unwrap();
        assert_eq!(m.per_rule[&mwc("MWC-111")], RuleMetrics { true_positives: 1, false_negatives: 0, false_positives_on_fixed: 0 });
        assert_eq!(m.recall(), 1.0);

        let d = mint_corpus(4);
        let fx = load_corpus(d.path()).unwrap();
        let m = evaluate_corpus(&fx, &Engine::default(), &Config::default()).unwrap();
        assert_eq!(m.per_rule[&mwc("MWC-111")].false_negatives, 1);
    }

    #[test]
    fn missing_fixed_pair_is_rejected() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "MWC-111/mint.vuln.move", MINT);
        write(d.path(), "MWC-111/expected.json", "{\"rule\":\"MWC-111\",\"findings\":[{\"rule\":\"MWC-111\",\"line\":3}]}");
        assert!(matches!(load_corpus(d.path()), Err(CorpusError::MissingPair { .. })));
    }

    #[test]
    fn unknown_rule_directory_is_rejected() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "MWC-999/x.vuln.move", MINT);
        assert!(matches!(load_corpus(d.path()), Err(CorpusError::UnknownRule { .. })));
    }

    #[test]
    fn malformed_expected_names_the_file() {
        let d = mint_corpus(3);
        write(d.path(), "MWC-111/expected.json", "{\"rule\":\"MWC-111\",\"findings\":[{\"line\":3}]}");
        let err = load_corpus(d.path()).unwrap_err();
        assert!(err.to_string().contains("expected.json"), "{err}");
    }

    #[test]
    fn parse_failure_aborts_with_path() {
        let d = mint_corpus(3);
        write(d.path(), "MWC-111/mint.fixed.move", "module {");
        let fx = load_corpus(d.path()).unwrap();
        let err = evaluate_corpus(&fx, &Engine::default(), &Config::default()).unwrap_err();
        assert!(err.to_string().contains("mint.fixed.move"), "{err}");
    }
}
