use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{Report, TOOL_NAME};
use crate::config::Format;
use crate::detectors::Finding;
use crate::registry::{Registry, Severity};

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => render_json(report),
        Format::Sarif => render_sarif(report),
        Format::Md => render_markdown(report),
    }
}

fn finding_json(f: &Finding) -> Value {
    json!({
        "rule": f.rule,
        "frame": f.frame,
        "severity": f.severity,
        "confidence": f.confidence,
        "file": &*f.span.file,
        "line": f.span.line,
        "column": f.span.column,
        "message": f.message,
        "fix_hint": f.fix_hint,
    })
}

fn dimensions_json(report: &Report) -> Value {
    let d = &report.dimensions;
    let fraud: serde_json::Map<String, Value> =
        d.fraud_analysis.iter().map(|(k, s)| (k.to_string(), Value::from(s.as_str()))).collect();
    json!({
        "code_quality": d.code_quality,
        "security_practices": d.security_practices,
        "fraud_analysis": fraud,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn render_json(report: &Report) -> String {
    pretty(&json!({
        "tool": TOOL_NAME,
        "version": report.tool_version,
        "target": report.target,
        "findings": report.findings.iter().map(finding_json).collect::<Vec<_>>(),
        "dimensions": dimensions_json(report),
        "verdict": report.verdict,
        "summary": report.summary,
    }))
}

fn sarif_level(s: Severity) -> &'static str {
    match s {
        Severity::Critical | Severity::High => "error",
        Severity::Medium => "warning",
        Severity::Low => "note",
    }
}

pub fn render_sarif(report: &Report) -> String {
    let registry = Registry::builtin();
    let mut rules: BTreeMap<String, Value> = BTreeMap::new();
    for f in &report.findings {
        rules.entry(f.rule.to_string()).or_insert_with(|| {
            let rec = registry.get(f.rule);
            json!({
                "id": f.rule.to_string(),
                "name": rec.map(|r| r.box_title.as_str()).unwrap_or(""),
                "shortDescription": { "text": rec.map(|r| r.title_taxonomy.as_str()).unwrap_or("") },
                "help": { "text": f.fix_hint },
                "properties": { "frame": f.frame, "strategy": rec.map(|r| r.strategy) },
            })
        });
    }
    let index: BTreeMap<&String, usize> = rules.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let results: Vec<Value> = report
        .findings
        .iter()
        .map(|f| {
            let id = f.rule.to_string();
            json!({
                "ruleId": id,
                "ruleIndex": index[&id],
                "level": sarif_level(f.severity),
                "message": { "text": f.message },
                "locations": [{
                    "physicalLocation": {
                        "artifactLocation": { "uri": &*f.span.file },
                        "region": { "startLine": f.span.line, "startColumn": f.span.column },
                    }
                }],
                "properties": { "severity": f.severity, "confidence": f.confidence, "frame": f.frame },
            })
        })
        .collect();
    pretty(&json!({
        "$schema": "https://json.schemastore.org/sarif-2.1.0.json",
        "version": "2.1.0",
        "runs": [{
            "tool": { "driver": {
                "name": TOOL_NAME,
                "version": report.tool_version,
                "rules": rules.into_values().collect::<Vec<_>>(),
            }},
            "results": results,
            "properties": { "verdict": report.verdict },
        }],
    }))
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

pub fn render_markdown(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {TOOL_NAME} report\n");
    let _ = writeln!(
        out,
        "Version {} scanned {} file(s): {}\n",
        report.tool_version,
        report.target.file_count,
        report.target.paths.join(", ")
    );

    out.push_str("## Findings\n\n");
    if report.findings.is_empty() {
        out.push_str("No findings.\n\n");
    } else {
        out.push_str("| Rule | Frame | Severity | Confidence | Location | Message |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for f in &report.findings {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {}:{}:{} | {} |",
                f.rule,
                f.frame,
                f.severity,
                f.confidence,
                f.span.file,
                f.span.line,
                f.span.column,
                cell(&f.message)
            );
        }
        out.push('\n');
    }

    let q = &report.dimensions.code_quality;
    out.push_str("## Code Quality\n\n");
    let _ = writeln!(out, "- Comment density: {:.4}", q.comment_density);
    let _ = writeln!(out, "- Average function length: {:.2} statements", q.avg_function_length);
    let _ = writeln!(out, "- Parse errors: {}\n", q.parse_error_count);

    out.push_str("## Security Practices\n\n");
    if report.dimensions.security_practices.is_empty() {
        out.push_str("No frame has findings.\n\n");
    } else {
        out.push_str("| Frame | Precise | Heuristic |\n|---|---|---|\n");
        for (code, c) in &report.dimensions.security_practices {
            let _ = writeln!(out, "| {code} | {} | {} |", c.precise, c.heuristic);
        }
        out.push('\n');
    }

    out.push_str("## Fraud Analysis\n\n");
    for (item, state) in &report.dimensions.fraud_analysis {
        let _ = writeln!(out, "- {item}: {}", state.as_str());
    }
    out.push('\n');

    out.push_str("## Overall Assessment\n\n");
    let _ = writeln!(out, "Verdict: **{}** (fail-on: {})\n", report.verdict, report.fail_on);

    out.push_str("## Posture Summary\n\n");
    for (i, s) in report.summary.iter().enumerate() {
        let _ = writeln!(out, "{}. {s}", i + 1);
    }
    out
}
