//! Rule catalog and detector engine.
//!
//! Every non-advisory catalog id has exactly one procedure. Procedures are
//! pure functions of the model and configuration; [`Engine::run_all`] runs
//! them in parallel and merges their findings into a canonical order.
//! Advisory ids only surface through `// mwc: review MWC-xxx` comments.

pub mod guards;
pub mod locks;
pub mod loops;
pub mod pragma;
mod rules;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::frontend::Span;
use crate::id::MwcId;
use crate::registry::{FrameCode, Registry, Severity, Strategy};
use crate::semantics::SemanticModel;

pub use guards::{check_dominating_guard, order_of, order_of_effects, Guard, GuardKind};
pub use locks::{lock_order_conflicts, LockConflict};
pub use loops::{loop_nontermination, LoopWitness};
use pragma::{Pragma, PragmaKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Precise,
    Heuristic,
}

impl Confidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::Precise => "precise",
            Confidence::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One detected weakness instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub rule: MwcId,
    pub frame: FrameCode,
    pub severity: Severity,
    pub confidence: Confidence,
    pub span: Span,
    pub message: String,
    /// The offending source line, trimmed.
    pub snippet: String,
    pub fix_hint: String,
}

impl Finding {
    pub fn file(&self) -> &str {
        &self.span.file
    }

    fn sort_key(&self) -> (&str, u32, MwcId, u32, usize, u32, &str) {
        (&self.span.file, self.span.line, self.rule, self.span.column, self.span.offset, self.span.length, &self.message)
    }
}

/// Sorts by (file, line, rule) and collapses repeats of the same rule at the same span.
pub fn canonicalize(mut findings: Vec<Finding>) -> Vec<Finding> {
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    findings.dedup_by(|a, b| a.rule == b.rule && a.span == b.span);
    findings
}

/// A raw match reported by a procedure, before registry metadata is attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hit {
    pub span: Span,
    pub message: String,
}

impl Hit {
    pub fn new(span: &Span, message: impl Into<String>) -> Hit {
        Hit { span: span.clone(), message: message.into() }
    }
}

/// Inputs shared by every procedure.
pub struct Ctx<'a> {
    pub model: &'a SemanticModel,
    pub config: &'a Config,
}

pub type Procedure = fn(&Ctx<'_>) -> Vec<Hit>;

pub struct DetectorEntry {
    pub id: MwcId,
    pub strategy: Strategy,
    pub confidence: Confidence,
    pub enabled_by_default: bool,
    pub procedure: Procedure,
}

impl fmt::Debug for DetectorEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DetectorEntry")
            .field("id", &self.id)
            .field("strategy", &self.strategy)
            .field("confidence", &self.confidence)
            .field("enabled_by_default", &self.enabled_by_default)
            .finish()
    }
}

const fn entry(number: u16, suffix: Option<char>, strategy: Strategy, confidence: Confidence, procedure: Procedure) -> DetectorEntry {
    DetectorEntry { id: MwcId::new(number, suffix), strategy, confidence, enabled_by_default: true, procedure }
}

use Confidence::{Heuristic, Precise};
use Strategy::{Flow, Syntactic};

static CATALOG: [DetectorEntry; 30] = [
    entry(100, None, Flow, Precise, rules::mwc100),
    entry(101, None, Flow, Precise, rules::mwc101),
    entry(102, None, Flow, Heuristic, rules::mwc102),
    entry(103, None, Flow, Precise, rules::mwc103),
    entry(104, None, Flow, Precise, rules::mwc104),
    entry(105, None, Flow, Precise, rules::mwc105),
    entry(106, None, Flow, Precise, rules::mwc106),
    entry(107, None, Flow, Heuristic, rules::mwc107),
    entry(108, None, Flow, Precise, rules::mwc108),
    entry(109, None, Flow, Precise, rules::mwc109),
    entry(110, None, Syntactic, Precise, rules::mwc110),
    entry(111, None, Syntactic, Precise, rules::mwc111),
    entry(113, None, Syntactic, Heuristic, rules::mwc113),
    entry(116, None, Syntactic, Precise, rules::mwc116),
    entry(117, None, Syntactic, Precise, rules::mwc117),
    entry(118, None, Syntactic, Heuristic, rules::mwc118),
    entry(119, None, Syntactic, Heuristic, rules::mwc119),
    entry(120, Some('a'), Syntactic, Precise, rules::mwc120a),
    entry(121, None, Flow, Precise, rules::mwc121),
    entry(123, None, Syntactic, Heuristic, rules::mwc123),
    entry(125, None, Flow, Heuristic, rules::mwc125),
    entry(126, None, Syntactic, Precise, rules::mwc126),
    entry(127, None, Flow, Precise, rules::mwc127),
    entry(128, None, Syntactic, Precise, rules::mwc128),
    entry(129, None, Syntactic, Heuristic, rules::mwc129),
    entry(130, None, Syntactic, Heuristic, rules::mwc130),
    entry(131, None, Syntactic, Precise, rules::mwc131),
    entry(132, None, Syntactic, Heuristic, rules::mwc132),
    entry(133, None, Syntactic, Heuristic, rules::mwc133),
    entry(136, None, Flow, Precise, rules::mwc136),
];

/// The detector catalog, ordered by id.
pub fn catalog() -> &'static [DetectorEntry] {
    &CATALOG
}

pub fn catalog_entry(id: MwcId) -> Option<&'static DetectorEntry> {
    CATALOG.iter().find(|e| e.id == id)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DetectorError {
    #[error("unsupported rule {id}: {reason}")]
    UnsupportedRule { id: MwcId, reason: String },
}

type PragmaIndex = BTreeMap<String, Vec<Pragma>>;

fn pragma_index(model: &SemanticModel) -> PragmaIndex {
    model.files.iter().map(|f| (f.path.clone(), pragma::pragmas(f))).collect()
}

fn allowed(index: &PragmaIndex, rule: MwcId, span: &Span) -> bool {
    index.get(&*span.file).is_some_and(|ps| {
        ps.iter().any(|p| {
            p.kind == PragmaKind::Allow
                && p.rule == rule
                && p.covers.is_some_and(|(lo, hi)| (lo..=hi).contains(&span.line))
        })
    })
}

/// Runs the catalog against a resolved model.
#[derive(Clone, Copy, Debug)]
pub struct Engine {
    registry: &'static Registry,
}

impl Default for Engine {
    fn default() -> Self {
        Engine { registry: Registry::builtin() }
    }
}

impl Engine {
    pub fn new(registry: &'static Registry) -> Engine {
        Engine { registry }
    }

    pub fn registry(&self) -> &'static Registry {
        self.registry
    }

    fn snippet(model: &SemanticModel, span: &Span) -> String {
        model
            .files
            .iter()
            .find(|f| *f.path == *span.file)
            .map(|f| f.line_text(span.line).trim().to_string())
            .unwrap_or_default()
    }

    fn detect(&self, entry: &DetectorEntry, model: &SemanticModel, config: &Config, index: &PragmaIndex) -> Vec<Finding> {
        let Some(record) = self.registry.get(entry.id) else { return Vec::new() };
        let ctx = Ctx { model, config };
        (entry.procedure)(&ctx)
            .into_iter()
            .filter(|h| !allowed(index, entry.id, &h.span))
            .map(|h| {
                let message = match entry.confidence {
                    Confidence::Precise => h.message,
                    Confidence::Heuristic => format!("{} (heuristic: depends on naming conventions)", h.message),
                };
                Finding {
                    rule: entry.id,
                    frame: record.frame,
                    severity: config.severity_for(record),
                    confidence: entry.confidence,
                    snippet: Self::snippet(model, &h.span),
                    span: h.span,
                    message,
                    fix_hint: record.fix_hint.clone(),
                }
            })
            .collect()
    }

    /// Informational findings for `// mwc: review` comments, optionally limited to one rule.
    fn reviews(&self, only: Option<MwcId>, model: &SemanticModel, config: &Config, index: &PragmaIndex) -> Vec<Finding> {
        let mut out = Vec::new();
        for p in index.values().flatten().filter(|p| p.kind == PragmaKind::Review) {
            let Some(lookup) = self.registry.resolve(p.rule) else { continue };
            let record = lookup.record;
            if only.is_some_and(|id| id != record.id) || !config.is_enabled(record.id) {
                continue;
            }
            out.push(Finding {
                rule: record.id,
                frame: record.frame,
                severity: Severity::Low,
                confidence: Confidence::Heuristic,
                span: p.span.clone(),
                message: format!("manual review requested: {}", record.box_title),
                snippet: Self::snippet(model, &p.span),
                fix_hint: record.fix_hint.clone(),
            });
        }
        out
    }

    /// Findings from every enabled detector plus review pragmas, in canonical order.
    pub fn run_all(&self, model: &SemanticModel, config: &Config) -> Vec<Finding> {
        let index = pragma_index(model);
        let mut out: Vec<Finding> = CATALOG
            .par_iter()
            .filter(|e| config.is_enabled(e.id))
            .flat_map_iter(|e| self.detect(e, model, config, &index))
            .collect();
        out.extend(self.reviews(None, model, config, &index));
        canonicalize(out)
    }

    /// The subset of [`run_all`](Self::run_all) attributed to `id`.
    pub fn run_rule(&self, id: MwcId, model: &SemanticModel, config: &Config) -> Result<Vec<Finding>, DetectorError> {
        let Some(entry) = catalog_entry(id) else {
            let reason = match self.registry.get(id) {
                Some(r) if r.strategy == Strategy::Advisory => "advisory categories have no detector".to_string(),
                Some(_) => "no detector registered".to_string(),
                None => "not in the registry".to_string(),
            };
            return Err(DetectorError::UnsupportedRule { id, reason });
        };
        if !config.is_enabled(id) {
            return Ok(Vec::new());
        }
        let index = pragma_index(model);
        let mut out = self.detect(entry, model, config, &index);
        out.extend(self.reviews(Some(id), model, config, &index));
        Ok(canonicalize(out))
    }
}

/// [`Engine::run_all`] with the built-in registry.
pub fn run_all(model: &SemanticModel, config: &Config) -> Vec<Finding> {
    Engine::default().run_all(model, config)
}

/// [`Engine::run_rule`] with the built-in registry.
pub fn run_rule(id: MwcId, model: &SemanticModel, config: &Config) -> Result<Vec<Finding>, DetectorError> {
    Engine::default().run_rule(id, model, config)
}
