//! `// mwc: review MWC-xxx` and `// mwc: allow MWC-xxx` comments.

use std::sync::OnceLock;

use regex::Regex;

use crate::frontend::ast::Block;
use crate::frontend::{ParsedFile, Span};
use crate::id::MwcId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PragmaKind {
    Review,
    Allow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pragma {
    pub kind: PragmaKind,
    pub rule: MwcId,
    pub span: Span,
    /// For `allow`: the inclusive line range of the statement or item it covers.
    pub covers: Option<(u32, u32)>,
}

fn pragma_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^//\s*mwc:\s*(review|allow)\s+(MWC-\d{3}[ab]?)\b").unwrap())
}

fn end_line(source: &str, span: &Span) -> u32 {
    let rest = source.get(span.offset..).unwrap_or("");
    let text: String = rest.chars().take(span.length as usize).collect();
    span.line + text.matches('\n').count() as u32
}

fn node_spans(file: &ParsedFile) -> Vec<&Span> {
    fn block<'a>(b: &'a Block, out: &mut Vec<&'a Span>) {
        b.walk_stmts(&mut |s| out.push(&s.span));
    }
    let mut out = Vec::new();
    for m in &file.ast.modules {
        if !m.implicit {
            out.push(&m.span);
        }
        out.extend(m.uses.iter().map(|u| &u.span));
        out.extend(m.structs.iter().map(|s| &s.span));
        for f in &m.functions {
            if !f.is_toplevel() {
                out.push(&f.span);
            }
            if let Some(b) = &f.body {
                block(b, &mut out);
            }
        }
    }
    out
}

/// All pragmas in `file`, in source order. Comments naming ids that do not
/// parse are ignored.
pub fn pragmas(file: &ParsedFile) -> Vec<Pragma> {
    let nodes = node_spans(file);
    let mut out = Vec::new();
    for c in &file.comments {
        let Some(caps) = pragma_re().captures(&c.text) else { continue };
        let Ok(rule) = caps[2].parse::<MwcId>() else { continue };
        let kind = if &caps[1] == "review" { PragmaKind::Review } else { PragmaKind::Allow };
        let covers = match kind {
            PragmaKind::Review => None,
            PragmaKind::Allow => nodes
                .iter()
                .filter(|s| s.offset > c.span.offset)
                .min_by_key(|s| s.offset)
                .map(|s| (s.line, end_line(&file.source, s))),
        };
        out.push(Pragma { kind, rule, span: c.span.clone(), covers });
    }
    out
}
