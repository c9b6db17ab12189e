//! Audit report: findings, supplementary dimensions, verdict and summary.

mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use render::{render, render_json, render_markdown, render_sarif};

use crate::config::Config;
use crate::detectors::{Confidence, Finding};
use crate::id::MwcId;
use crate::registry::{FrameCode, Registry, Severity, Strategy};
use crate::semantics::SemanticModel;

pub const TOOL_NAME: &str = "mwc-lint";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Verdict {
    Passed,
    Failed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Passed => "Passed",
            Verdict::Failed => "Failed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChecklistState {
    Flagged,
    Clear,
    NotAssessed,
}

impl ChecklistState {
    pub fn as_str(self) -> &'static str {
        match self {
            ChecklistState::Flagged => "flagged",
            ChecklistState::Clear => "clear",
            ChecklistState::NotAssessed => "not-assessed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeQuality {
    /// Lines carrying a comment divided by non-blank lines.
    pub comment_density: f64,
    /// Mean statement count over functions with a body.
    pub avg_function_length: f64,
    pub parse_error_count: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfidenceCounts {
    pub precise: usize,
    pub heuristic: usize,
}

/// Fraud checklist items in report order, each with the rule that drives it.
pub const FRAUD_ITEMS: [(&str, Option<&str>); 7] = [
    ("fee_scam", None),
    ("redirection", None),
    ("unlimited_minting", Some("MWC-111")),
    ("emergency_fees", None),
    ("ownership_concentration", None),
    ("blacklisting", None),
    ("transaction_restrictions", Some("MWC-100")),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditDimensions {
    pub code_quality: CodeQuality,
    /// Frames with at least one finding.
    pub security_practices: BTreeMap<FrameCode, ConfidenceCounts>,
    /// In [`FRAUD_ITEMS`] order.
    pub fraud_analysis: Vec<(&'static str, ChecklistState)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Target {
    pub paths: Vec<String>,
    pub file_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub target: Target,
    pub tool_version: String,
    pub findings: Vec<Finding>,
    pub dimensions: AuditDimensions,
    pub fail_on: Severity,
    pub verdict: Verdict,
    pub summary: Vec<String>,
}

/// Scan facts the model does not carry.
#[derive(Clone, Debug, Default)]
pub struct ScanInfo {
    /// Paths as given by the user; defaults to the model's file paths.
    pub paths: Vec<String>,
    pub parse_errors: usize,
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

fn code_quality(model: &SemanticModel, parse_errors: usize) -> CodeQuality {
    let mut comment_lines = 0usize;
    let mut code_lines = 0usize;
    for f in &model.files {
        code_lines += f.source.lines().filter(|l| !l.trim().is_empty()).count();
        comment_lines += f.comments.iter().map(|c| c.span.line).collect::<BTreeSet<_>>().len();
    }
    let lengths: Vec<usize> = model
        .files
        .iter()
        .flat_map(|f| f.ast.functions())
        .filter(|(_, f)| !f.is_toplevel())
        .filter_map(|(_, f)| f.body.as_ref().map(|b| b.all_stmts().len()))
        .collect();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { round4(a as f64 / b as f64) };
    CodeQuality {
        comment_density: ratio(comment_lines, code_lines),
        avg_function_length: ratio(lengths.iter().sum(), lengths.len()),
        parse_error_count: parse_errors,
    }
}

fn fraud_analysis(findings: &[Finding], config: &Config) -> Vec<(&'static str, ChecklistState)> {
    FRAUD_ITEMS
        .iter()
        .map(|&(item, rule)| {
            let state = match rule.and_then(|r| r.parse::<MwcId>().ok()) {
                None => ChecklistState::NotAssessed,
                Some(id) if findings.iter().any(|f| f.rule == id) => ChecklistState::Flagged,
                Some(id) if config.is_enabled(id) => ChecklistState::Clear,
                Some(_) => ChecklistState::NotAssessed,
            };
            (item, state)
        })
        .collect()
}

/// True iff some finding is at or above `fail_on`.
pub fn verdict_for(findings: &[Finding], fail_on: Severity) -> Verdict {
    if findings.iter().any(|f| f.severity >= fail_on) {
        Verdict::Failed
    } else {
        Verdict::Passed
    }
}

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn summary(findings: &[Finding], dims: &AuditDimensions, verdict: Verdict, fail_on: Severity, files: usize) -> Vec<String> {
    let registry = Registry::builtin();
    let total = findings.len();
    let mut per_frame: BTreeMap<FrameCode, usize> = BTreeMap::new();
    for f in findings {
        *per_frame.entry(f.frame).or_default() += 1;
    }
    let mut out = Vec::with_capacity(8);

    out.push(match per_frame.iter().max_by_key(|(code, n)| (**n, std::cmp::Reverse(**code))) {
        Some((code, n)) => {
            let name = registry.frame(*code).map(|f| f.name.as_str()).unwrap_or("");
            format!("The {code} frame ({name}) accounts for the most findings, {n} of {total}.")
        }
        None => "No findings were reported in any frame.".to_string(),
    });

    let blocking = findings.iter().filter(|f| f.severity >= fail_on).count();
    out.push(match verdict {
        Verdict::Failed => format!(
            "The verdict is Failed because {} at or above {fail_on} severity.",
            plural(blocking, "finding is", "findings are")
        ),
        Verdict::Passed => format!("The verdict is Passed because no finding reaches {fail_on} severity."),
    });

    let heuristic = findings.iter().filter(|f| f.confidence == Confidence::Heuristic).count();
    out.push(if total == 0 {
        "No heuristic findings were raised.".to_string()
    } else {
        format!(
            "{heuristic} of {total} findings ({:.0}%) are heuristic and depend on naming conventions.",
            100.0 * heuristic as f64 / total as f64
        )
    });

    let advisory = findings
        .iter()
        .filter(|f| registry.get(f.rule).is_some_and(|r| r.strategy == Strategy::Advisory))
        .count();
    out.push(if advisory == 0 {
        "No advisory review pragmas were recorded.".to_string()
    } else {
        format!("{} recorded for manual follow-up.", plural(advisory, "advisory review pragma was", "advisory review pragmas were"))
    });

    let errors = dims.code_quality.parse_error_count;
    out.push(if errors == 0 {
        format!("{} parsed without errors.", plural(files, "scanned file", "scanned files"))
    } else {
        format!("The parser reported {} across {} scanned.", plural(errors, "error", "errors"), plural(files, "file", "files"))
    });

    let touched = per_frame.keys().filter(|c| c.is_primary()).count();
    out.push(format!("Findings touch {touched} of {} primary frames.", FrameCode::PRIMARY.len()));

    let top = findings.iter().map(|f| f.severity).max();
    out.push(match top {
        Some(s) => format!("The highest severity observed is {s}."),
        None => "No severity level applies because nothing was found.".to_string(),
    });

    out.push(match top.and_then(|s| findings.iter().find(|f| f.severity == s)) {
        Some(f) => format!("Start remediation with {} at {}:{}: {}", f.rule, f.span.file, f.span.line, f.fix_hint),
        None => "Keep the current configuration and rescan after each change.".to_string(),
    });

    debug_assert_eq!(out.len(), 8);
    out
}

/// [`build_report_with`] using the model's file paths and no parse errors.
pub fn build_report(findings: &[Finding], model: &SemanticModel, config: &Config) -> Report {
    build_report_with(findings, model, config, &ScanInfo::default())
}

pub fn build_report_with(findings: &[Finding], model: &SemanticModel, config: &Config, scan: &ScanInfo) -> Report {
    let mut security_practices: BTreeMap<FrameCode, ConfidenceCounts> = BTreeMap::new();
    for f in findings {
        let c = security_practices.entry(f.frame).or_default();
        match f.confidence {
            Confidence::Precise => c.precise += 1,
            Confidence::Heuristic => c.heuristic += 1,
        }
    }
    let dimensions = AuditDimensions {
        code_quality: code_quality(model, scan.parse_errors),
        security_practices,
        fraud_analysis: fraud_analysis(findings, config),
    };
    let verdict = verdict_for(findings, config.fail_on);
    let paths = if scan.paths.is_empty() { model.files.iter().map(|f| f.path.clone()).collect() } else { scan.paths.clone() };
    let file_count = model.files.len();
    Report {
        target: Target { paths, file_count },
        tool_version: TOOL_VERSION.to_string(),
        summary: summary(findings, &dimensions, verdict, config.fail_on, file_count),
        findings: findings.to_vec(),
        dimensions,
        fail_on: config.fail_on,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::run_all;
    use crate::frontend::parse_source;
    use crate::semantics::resolve;

    fn report(src: &str) -> Report {
        let model = resolve(vec![parse_source("t.move", src).unwrap()], &Config::default().call_patterns).unwrap();
        let findings = run_all(&model, &Config::default());
        build_report(&findings, &model, &Config::default())
    }

    fn state(r: &Report, item: &str) -> ChecklistState {
        r.dimensions.fraud_analysis.iter().find(|(i, _)| *i == item).unwrap().1
    }

    #[test]
    fn mint_fails_and_flags_unlimited_minting() {
        let r = report("module Coin {\n    public fun mint() {\n        supply = supply + 1000;\n    }\n}\n");
        assert_eq!(r.verdict, Verdict::Failed);
        assert_eq!(state(&r, "unlimited_minting"), ChecklistState::Flagged);
        assert_eq!(r.summary.len(), 8);
    }

    #[test]
    fn clean_input_passes() {
        let r = report("module M {\n    fun f() { }\n}\n");
        assert!(r.findings.is_empty());
        assert_eq!(r.verdict, Verdict::Passed);
        assert_eq!(r.summary.len(), 8);
        for (_, s) in &r.dimensions.fraud_analysis {
            assert!(matches!(s, ChecklistState::Clear | ChecklistState::NotAssessed));
        }
        assert_eq!(state(&r, "fee_scam"), ChecklistState::NotAssessed);
        assert_eq!(state(&r, "transaction_restrictions"), ChecklistState::Clear);
    }

    #[test]
    fn code_quality_counts() {
        let r = report("// note\nfun f() {\n    a();\n    b();\n}\nfun g() {\n    c(); // tail\n}\n");
        assert_eq!(r.dimensions.code_quality.avg_function_length, 1.5);
        assert_eq!(r.dimensions.code_quality.comment_density, round4(2.0 / 8.0));
    }

    #[test]
    fn verdict_threshold_is_inclusive() {
        let r = report("module Coin {\n    public fun mint() {\n        supply = supply + 1000;\n    }\n}\n");
        assert_eq!(verdict_for(&r.findings, Severity::High), Verdict::Failed);
        assert_eq!(verdict_for(&r.findings, Severity::Critical), Verdict::Passed);
        assert_eq!(verdict_for(&[], Severity::Low), Verdict::Passed);
    }
}
