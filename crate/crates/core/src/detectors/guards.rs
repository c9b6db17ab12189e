//! Path queries over a [`Cfg`]: guard dominance and effect ordering.

use std::collections::{BTreeSet, VecDeque};

use crate::frontend::ast::{Expr, StmtKind};
use crate::semantics::{BlockId, Cfg, CfgStmt, EdgeKind, Effect, Node, StmtId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardKind {
    /// An `assert` statement.
    Assert,
    /// The true edge out of a branch or loop condition.
    BranchTrue,
    /// The false edge out of a branch or loop condition.
    BranchFalse,
}

/// A condition that execution must satisfy to continue past a point.
#[derive(Clone, Copy, Debug)]
pub struct Guard<'a> {
    pub kind: GuardKind,
    pub cond: &'a Expr,
    pub at: StmtId,
}

fn assert_guard(s: &CfgStmt) -> Option<Guard<'_>> {
    match &s.node {
        Node::Stmt(st) => match &st.kind {
            StmtKind::Assert { cond, .. } => Some(Guard { kind: GuardKind::Assert, cond, at: s.id }),
            _ => None,
        },
        Node::Cond { .. } => None,
    }
}

fn edge_guard(cfg: &Cfg, from: BlockId, kind: EdgeKind) -> Option<Guard<'_>> {
    let gk = match kind {
        EdgeKind::BranchTrue => GuardKind::BranchTrue,
        EdgeKind::BranchFalse => GuardKind::BranchFalse,
        _ => return None,
    };
    let last = cfg.blocks[from].stmts.last()?;
    match &last.node {
        Node::Cond { cond, .. } => Some(Guard { kind: gk, cond, at: last.id }),
        Node::Stmt(_) => None,
    }
}

/// True iff every path from the entry to `use_site` passes a guard accepted
/// by `predicate` before reaching it. Unreachable use sites are vacuously guarded.
pub fn check_dominating_guard(cfg: &Cfg, use_site: StmtId, predicate: impl Fn(&Guard<'_>) -> bool) -> bool {
    let guarded_before = |b: BlockId, limit: usize| {
        cfg.blocks[b].stmts[..limit].iter().filter_map(assert_guard).any(|g| predicate(&g))
    };

    let mut seen = BTreeSet::from([cfg.entry]);
    let mut queue = VecDeque::from([cfg.entry]);
    while let Some(b) = queue.pop_front() {
        if b == use_site.block {
            if !guarded_before(b, use_site.index) {
                return false;
            }
            continue;
        }
        if guarded_before(b, cfg.blocks[b].stmts.len()) {
            continue;
        }
        for e in cfg.successors(b) {
            if edge_guard(cfg, b, e.kind).is_some_and(|g| predicate(&g)) {
                continue;
            }
            if seen.insert(e.to) {
                queue.push_back(e.to);
            }
        }
    }
    true
}

/// Every pair `(a, b)` where a statement satisfying `first` can be followed,
/// on some path, by a different statement satisfying `second`.
pub fn order_of(
    cfg: &Cfg,
    first: impl Fn(&CfgStmt) -> bool,
    second: impl Fn(&CfgStmt) -> bool,
) -> Vec<(StmtId, StmtId)> {
    let firsts: Vec<_> = cfg.stmts().filter(|s| first(s)).map(|s| s.id).collect();
    let seconds: Vec<_> = cfg.stmts().filter(|s| second(s)).map(|s| s.id).collect();
    let mut out = Vec::new();
    for &a in &firsts {
        let later = cfg.reachable_from(&[a.block]);
        for &b in &seconds {
            if a != b && ((a.block == b.block && a.index < b.index) || later.contains(&b.block)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// [`order_of`] specialised to effect flags.
pub fn order_of_effects(cfg: &Cfg, first: &Effect, second: &Effect) -> Vec<(StmtId, StmtId)> {
    order_of(cfg, |s| s.has(first), |s| s.has(second))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::config::CallPatterns;
    use crate::frontend::parse_source;
    use crate::semantics::effects::{Bindings, CallClassifier, EffectContext};
    use crate::semantics::build_cfg;

    fn cfg_of(src: &str) -> Cfg {
        let ast = parse_source("t.move", src).unwrap().ast;
        let f = &ast.modules[0].functions[0];
        let classifier = CallClassifier::new(&CallPatterns::default()).unwrap();
        let fns = BTreeSet::new();
        let mut bindings = Bindings::new();
        for p in &f.params {
            bindings.insert(p.name.clone(), crate::semantics::effects::Binding::Param(p.ty.clone()));
        }
        let ctx = EffectContext { classifier: &classifier, module_functions: &fns, bindings: &bindings };
        build_cfg(f, &ctx)
    }

    fn find(cfg: &Cfg, needle: &str) -> StmtId {
        cfg.stmts()
            .find(|s| crate::frontend::printer::print_expr(s.exprs()[0]).contains(needle))
            .map(|s| s.id)
            .unwrap()
    }

    fn exists_guard(g: &Guard<'_>) -> bool {
        g.kind != GuardKind::BranchFalse && g.cond.any(&mut |e| matches!(&e.kind, crate::frontend::ast::ExprKind::Call { path, .. } if path[0] == "exists"))
    }

    #[test]
    fn assert_before_use_dominates() {
        let cfg = cfg_of("fun f(addr: address) { assert(exists<State>(addr), 1); let s = borrow_global<State>(addr); }");
        assert!(check_dominating_guard(&cfg, find(&cfg, "borrow_global"), exists_guard));
    }

    #[test]
    fn no_guard_is_not_dominated() {
        let cfg = cfg_of("fun f(addr: address) { let s = borrow_global<State>(addr); }");
        assert!(!check_dominating_guard(&cfg, find(&cfg, "borrow_global"), exists_guard));
    }

    #[test]
    fn guard_on_one_branch_only() {
        let cfg = cfg_of("fun f(addr: address, x: bool) { if (x) { assert(exists<State>(addr), 1); } let s = borrow_global<State>(addr); }");
        assert!(!check_dominating_guard(&cfg, find(&cfg, "borrow_global"), exists_guard));
    }

    #[test]
    fn branch_condition_guards_true_arm() {
        let cfg = cfg_of("fun f(addr: address) { if (exists<State>(addr)) { let s = borrow_global<State>(addr); } }");
        assert!(check_dominating_guard(&cfg, find(&cfg, "borrow_global"), exists_guard));
    }

    #[test]
    fn external_call_before_write_is_witnessed() {
        let cfg = cfg_of("public fun transfer() { External::evm_callback(); update_balance(); }");
        let w = order_of_effects(&cfg, &Effect::ExternalCall, &Effect::WritesGlobal);
        assert_eq!(w, vec![(StmtId { block: 0, index: 0 }, StmtId { block: 0, index: 1 })]);
    }

    #[test]
    fn write_before_external_call_has_no_witness() {
        let cfg = cfg_of("public fun transfer() { update_balance(); External::evm_callback(); }");
        assert!(order_of_effects(&cfg, &Effect::ExternalCall, &Effect::WritesGlobal).is_empty());
    }

    #[test]
    fn no_external_calls_no_witness() {
        let cfg = cfg_of("fun f() { a(); update_x(); }");
        assert!(order_of_effects(&cfg, &Effect::ExternalCall, &Effect::WritesGlobal).is_empty());
    }

    #[test]
    fn loop_makes_later_statement_reach_earlier() {
        let cfg = cfg_of("fun f() { while (go) { update_x(); External::ping(); } }");
        assert_eq!(order_of_effects(&cfg, &Effect::ExternalCall, &Effect::WritesGlobal).len(), 1);
    }
}
