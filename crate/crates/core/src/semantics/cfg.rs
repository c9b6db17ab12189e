//! Per-function control-flow graphs.

use std::collections::{BTreeSet, VecDeque};

use crate::frontend::ast::{Block, Expr, FunctionDecl, Param, Stmt, StmtKind};
use crate::frontend::span::Span;

use super::effects::{Effect, EffectContext, EffectSet};

pub type BlockId = usize;

/// Statement position: block and index within the block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StmtId {
    pub block: BlockId,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Fallthrough,
    BranchTrue,
    BranchFalse,
    LoopBack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: BlockId,
    pub to: BlockId,
    pub kind: EdgeKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondKind {
    If,
    While,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    /// A non-compound statement (never `If` or `While`).
    Stmt(Stmt),
    /// The condition evaluated at the end of a block that branches.
    Cond { kind: CondKind, cond: Expr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfgStmt {
    pub id: StmtId,
    pub node: Node,
    /// For conditions, the span of the whole `if`/`while` statement.
    pub span: Span,
    pub effects: EffectSet,
}

impl CfgStmt {
    pub fn stmt(&self) -> Option<&Stmt> {
        match &self.node {
            Node::Stmt(s) => Some(s),
            Node::Cond { .. } => None,
        }
    }

    pub fn has(&self, e: &Effect) -> bool {
        self.effects.contains(e)
    }

    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.node {
            Node::Stmt(s) => s.own_exprs(),
            Node::Cond { cond, .. } => vec![cond],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub stmts: Vec<CfgStmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub function: String,
    pub params: Vec<Param>,
    pub blocks: Vec<BasicBlock>,
    pub edges: Vec<Edge>,
    pub entry: BlockId,
}

impl Cfg {
    /// Bare graph with `n` empty blocks and the given edges; entry is block 0.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (BlockId, BlockId, EdgeKind)>) -> Cfg {
        Cfg {
            function: String::new(),
            params: Vec::new(),
            blocks: (0..n).map(|id| BasicBlock { id, stmts: Vec::new() }).collect(),
            edges: edges.into_iter().map(|(from, to, kind)| Edge { from, to, kind }).collect(),
            entry: 0,
        }
    }

    pub fn successors(&self, b: BlockId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.from == b)
    }

    pub fn predecessors(&self, b: BlockId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.to == b)
    }

    pub fn stmt(&self, id: StmtId) -> &CfgStmt {
        &self.blocks[id.block].stmts[id.index]
    }

    pub fn stmts(&self) -> impl Iterator<Item = &CfgStmt> + '_ {
        self.blocks.iter().flat_map(|b| b.stmts.iter())
    }

    /// Blocks reachable from `from` in one or more steps.
    pub fn reachable_from(&self, from: &[BlockId]) -> BTreeSet<BlockId> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<BlockId> = VecDeque::new();
        for &b in from {
            for e in self.successors(b) {
                if seen.insert(e.to) {
                    queue.push_back(e.to);
                }
            }
        }
        while let Some(b) = queue.pop_front() {
            for e in self.successors(b) {
                if seen.insert(e.to) {
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }

    /// True if some execution path runs `a` and later `b`.
    pub fn stmt_reaches(&self, a: StmtId, b: StmtId) -> bool {
        (a.block == b.block && a.index < b.index) || self.reachable_from(&[a.block]).contains(&b.block)
    }

    pub fn is_reachable(&self, b: BlockId) -> bool {
        reachable_set(self).contains(&b)
    }
}

/// Forward closure from the entry block over all edges.
pub fn reachable_set(cfg: &Cfg) -> BTreeSet<BlockId> {
    let mut out = cfg.reachable_from(&[cfg.entry]);
    out.insert(cfg.entry);
    out
}

struct Builder<'a, 'c> {
    cfg: Cfg,
    cur: BlockId,
    ctx: &'a EffectContext<'c>,
}

impl Builder<'_, '_> {
    fn new_block(&mut self) -> BlockId {
        let id = self.cfg.blocks.len();
        self.cfg.blocks.push(BasicBlock { id, stmts: Vec::new() });
        id
    }

    fn edge(&mut self, from: BlockId, to: BlockId, kind: EdgeKind) {
        self.cfg.edges.push(Edge { from, to, kind });
    }

    fn push(&mut self, node: Node, span: Span, effects: EffectSet) {
        let block = &mut self.cfg.blocks[self.cur];
        let id = StmtId { block: self.cur, index: block.stmts.len() };
        block.stmts.push(CfgStmt { id, node, span, effects });
    }

    fn lower_block(&mut self, b: &Block) {
        for s in &b.stmts {
            self.lower(s);
        }
    }

    fn lower(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::If { cond, then_block, else_block } => {
                let effects = self.ctx.cond_effects(cond);
                self.push(Node::Cond { kind: CondKind::If, cond: cond.clone() }, s.span.clone(), effects);
                let head = self.cur;
                let then_b = self.new_block();
                self.edge(head, then_b, EdgeKind::BranchTrue);
                self.cur = then_b;
                self.lower_block(then_block);
                let then_end = self.cur;
                let else_end = else_block.as_ref().map(|eb| {
                    let else_b = self.new_block();
                    self.edge(head, else_b, EdgeKind::BranchFalse);
                    self.cur = else_b;
                    self.lower_block(eb);
                    self.cur
                });
                let join = self.new_block();
                self.edge(then_end, join, EdgeKind::Fallthrough);
                match else_end {
                    Some(e) => self.edge(e, join, EdgeKind::Fallthrough),
                    None => self.edge(head, join, EdgeKind::BranchFalse),
                }
                self.cur = join;
            }
            StmtKind::While { cond, body } => {
                let guard = self.new_block();
                self.edge(self.cur, guard, EdgeKind::Fallthrough);
                self.cur = guard;
                let effects = self.ctx.cond_effects(cond);
                self.push(Node::Cond { kind: CondKind::While, cond: cond.clone() }, s.span.clone(), effects);
                let body_b = self.new_block();
                self.edge(guard, body_b, EdgeKind::BranchTrue);
                self.cur = body_b;
                self.lower_block(body);
                self.edge(self.cur, guard, EdgeKind::LoopBack);
                let exit = self.new_block();
                self.edge(guard, exit, EdgeKind::BranchFalse);
                self.cur = exit;
            }
            StmtKind::Return(_) => {
                let effects = self.ctx.stmt_effects(s);
                self.push(Node::Stmt(s.clone()), s.span.clone(), effects);
                self.cur = self.new_block();
            }
            _ => {
                let effects = self.ctx.stmt_effects(s);
                self.push(Node::Stmt(s.clone()), s.span.clone(), effects);
            }
        }
    }
}

/// Lowers a function body into basic blocks. Bodyless declarations yield a
/// single empty block.
pub fn build_cfg(function: &FunctionDecl, ctx: &EffectContext<'_>) -> Cfg {
    let mut b = Builder {
        cfg: Cfg {
            function: function.name.clone(),
            params: function.params.clone(),
            blocks: Vec::new(),
            edges: Vec::new(),
            entry: 0,
        },
        cur: 0,
        ctx,
    };
    b.new_block();
    if let Some(body) = &function.body {
        b.lower_block(body);
    }
    b.cfg
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::config::CallPatterns;
    use crate::frontend::parse_source;
    use crate::semantics::effects::{Bindings, CallClassifier};

    fn cfg_of(src: &str) -> Cfg {
        let ast = parse_source("t.move", src).unwrap().ast;
        let f = &ast.modules[0].functions[0];
        let classifier = CallClassifier::new(&CallPatterns::default()).unwrap();
        let fns = BTreeSet::new();
        let bindings = Bindings::new();
        let ctx = EffectContext { classifier: &classifier, module_functions: &fns, bindings: &bindings };
        build_cfg(f, &ctx)
    }

    #[test]
    fn straight_line_is_one_block() {
        let cfg = cfg_of("fun f() { a(); b(); c(); }");
        assert_eq!(cfg.blocks.len(), 1);
        assert_eq!(cfg.blocks[0].stmts.len(), 3);
        assert!(cfg.edges.is_empty());
    }

    #[test]
    fn return_starts_unreachable_block() {
        let cfg = cfg_of("public fun transfer(amount: u64) {\n    return;\n    let x = amount + 1;\n    log::info(\"x\");\n}");
        assert_eq!(cfg.blocks.len(), 2);
        assert_eq!(cfg.predecessors(1).count(), 0);
        assert_eq!(cfg.blocks[1].stmts.len(), 2);
        assert_eq!(reachable_set(&cfg), BTreeSet::from([0]));
    }

    #[test]
    fn while_has_guard_and_single_loop_back() {
        let cfg = cfg_of("fun f() { let mut i = 0; while (i >= 0) { i = i + 1; } }");
        let loops: Vec<_> = cfg.edges.iter().filter(|e| e.kind == EdgeKind::LoopBack).collect();
        assert_eq!(loops.len(), 1);
        let guard = loops[0].to;
        assert!(matches!(cfg.blocks[guard].stmts[0].node, Node::Cond { kind: CondKind::While, .. }));
        assert_eq!(cfg.predecessors(cfg.entry).count(), 0);
    }

    #[test]
    fn if_without_else_branches_to_join() {
        let cfg = cfg_of("fun f(x: u64) { if (x > 1) { a(); } b(); }");
        let kinds: BTreeSet<_> = cfg.successors(0).map(|e| e.kind).collect();
        assert_eq!(kinds, BTreeSet::from([EdgeKind::BranchTrue, EdgeKind::BranchFalse]));
        assert_eq!(reachable_set(&cfg).len(), cfg.blocks.len());
    }

    #[test]
    fn statement_effects() {
        let cfg = cfg_of("fun f() { External::evm_callback(); update_balance(); assert(ok, 1); }");
        let s = &cfg.blocks[0].stmts;
        assert!(s[0].has(&Effect::ExternalCall) && s[0].has(&Effect::EvmCall));
        assert!(s[1].has(&Effect::WritesGlobal));
        assert!(s[2].has(&Effect::AssertGuard));
    }

    #[test]
    fn stmt_reaches_follows_paths() {
        let cfg = cfg_of("fun f(x: u64) { a(); if (x > 1) { return; } b(); }");
        let first = StmtId { block: 0, index: 0 };
        let ret = cfg.stmts().find(|s| matches!(&s.node, Node::Stmt(st) if matches!(st.kind, StmtKind::Return(_)))).unwrap().id;
        let b = cfg.stmts().last().unwrap().id;
        assert!(cfg.stmt_reaches(first, ret));
        assert!(cfg.stmt_reaches(first, b));
        assert!(!cfg.stmt_reaches(ret, b));
    }
}
