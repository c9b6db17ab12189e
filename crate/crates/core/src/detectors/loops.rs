//! Loops whose guard can never become false.

use std::collections::{BTreeSet, VecDeque};

use crate::frontend::ast::{BinOp, Expr, ExprKind, Literal, StmtKind};
use crate::frontend::Span;
use crate::semantics::{BlockId, Cfg, CondKind, EdgeKind, Node, StmtId};

/// A `while` loop flagged as non-terminating.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopWitness {
    /// The loop condition.
    pub at: StmtId,
    pub var: String,
    pub bound: u128,
    pub span: Span,
}

/// `v >= k` or `k <= v` with `k` an integer literal.
fn ge_literal(cond: &Expr) -> Option<(&str, u128)> {
    let ExprKind::Binary { op, lhs, rhs } = &cond.kind else { return None };
    match op {
        BinOp::Ge => Some((lhs.as_simple_name()?, rhs.int_value()?)),
        BinOp::Le => Some((rhs.as_simple_name()?, lhs.int_value()?)),
        _ => None,
    }
}

fn is_unsigned(cfg: &Cfg, var: &str) -> bool {
    if let Some(p) = cfg.params.iter().find(|p| p.name == var) {
        return p.ty.primitive().is_some_and(|t| t.is_unsigned_int());
    }
    cfg.stmts().filter_map(|s| s.stmt()).any(|s| match &s.kind {
        StmtKind::Let { name, ty, value, .. } if name == var => match (ty, value) {
            (Some(t), _) => t.primitive().is_some_and(|p| p.is_unsigned_int()),
            // untyped integer literals default to u64
            (None, Some(v)) => matches!(v.kind, ExprKind::Literal(Literal::Int(_))),
            (None, None) => false,
        },
        _ => false,
    })
}

/// `v`, `v + k`, `k + v` or `v * k` with `k >= 1`.
fn non_decreasing(var: &str, value: &Expr) -> bool {
    if value.as_simple_name() == Some(var) {
        return true;
    }
    let ExprKind::Binary { op, lhs, rhs } = &value.kind else { return false };
    let (v, k) = if lhs.as_simple_name() == Some(var) { (lhs, rhs) } else { (rhs, lhs) };
    if v.as_simple_name() != Some(var) {
        return false;
    }
    match (op, k.int_value()) {
        (BinOp::Add, Some(_)) => true,
        (BinOp::Mul, Some(k)) => k >= 1,
        _ => false,
    }
}

fn body_blocks(cfg: &Cfg, guard: BlockId) -> BTreeSet<BlockId> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<BlockId> =
        cfg.successors(guard).filter(|e| e.kind == EdgeKind::BranchTrue).map(|e| e.to).collect();
    while let Some(b) = queue.pop_front() {
        if b == guard || !seen.insert(b) {
            continue;
        }
        queue.extend(cfg.successors(b).map(|e| e.to));
    }
    seen
}

/// Loops guarded by `v >= k` on an unsigned `v` whose body never lowers `v`
/// and cannot return.
pub fn loop_nontermination(cfg: &Cfg) -> Vec<LoopWitness> {
    let mut out = Vec::new();
    for s in cfg.stmts() {
        let Node::Cond { kind: CondKind::While, cond } = &s.node else { continue };
        let Some((var, bound)) = ge_literal(cond) else { continue };
        if !is_unsigned(cfg, var) {
            continue;
        }
        let body = body_blocks(cfg, s.id.block);
        let mut ok = true;
        for b in &body {
            for st in cfg.blocks[*b].stmts.iter().filter_map(|x| x.stmt()) {
                match &st.kind {
                    StmtKind::Assign { target, value } if target.as_simple_name() == Some(var) => {
                        ok &= non_decreasing(var, value);
                    }
                    StmtKind::Let { name, .. } if name == var => ok = false,
                    StmtKind::Return(_) => ok = false,
                    _ => {}
                }
            }
        }
        if ok {
            out.push(LoopWitness { at: s.id, var: var.to_string(), bound, span: s.span.clone() });
        }
    }
    out
}
