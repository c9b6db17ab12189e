//! One procedure per catalog entry.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::config::{matches_convention, CallClassKind, Conventions};
use crate::frontend::ast::{
    Ability, BinOp, Expr, ExprKind, FunctionDecl, Literal, ModuleDecl, Primitive, Stmt, StmtKind, UnOp,
};
use crate::frontend::printer::{print_expr, print_type};
use crate::semantics::{reachable_set, CallClass, Cfg, CfgStmt, Effect, FunctionInfo, ModuleRef};

use super::guards::{check_dominating_guard, order_of, order_of_effects, GuardKind};
use super::locks::lock_order_conflicts;
use super::loops::loop_nontermination;
use super::{Ctx, Hit};

struct FnView<'a> {
    info: &'a FunctionInfo,
    decl: &'a FunctionDecl,
    module: &'a ModuleDecl,
    mref: ModuleRef,
}

impl<'a> FnView<'a> {
    fn cfg(&self) -> &'a Cfg {
        &self.info.cfg
    }

    fn stmts(&self) -> Vec<&'a Stmt> {
        self.decl.body.as_ref().map(|b| b.all_stmts()).unwrap_or_default()
    }

    fn assert_count(&self) -> usize {
        self.stmts().iter().filter(|s| matches!(s.kind, StmtKind::Assert { .. })).count()
    }
}

impl<'a> Ctx<'a> {
    fn fns(&self) -> impl Iterator<Item = FnView<'a>> + 'a {
        let model = self.model;
        model.functions.iter().map(move |info| FnView {
            info,
            decl: model.decl(info.id),
            module: model.module(info.id.module_ref()),
            mref: info.id.module_ref(),
        })
    }

    fn conv(&self) -> &'a Conventions {
        &self.config.conventions
    }

    fn classify(&self, v: &FnView<'_>, path: &[String]) -> CallClass {
        let module = v.module;
        self.model.classifier.classify(path, &|n| module.functions.iter().any(|f| f.name == n))
    }

    fn is_resource(&self, from: ModuleRef, name: &str) -> bool {
        self.model.find_struct(from, name).is_some_and(|s| s.is_resource())
    }
}

/// Identifiers that occur in `e`: names, call path segments and shorthand pack fields.
fn idents(e: &Expr) -> Vec<&str> {
    let mut out = Vec::new();
    e.walk(&mut |x| match &x.kind {
        ExprKind::Name(p) => out.extend(p.last().map(String::as_str)),
        ExprKind::Call { path, .. } => out.extend(path.iter().map(String::as_str)),
        ExprKind::Pack { fields, .. } => out.extend(fields.iter().filter(|(_, v)| v.is_none()).map(|(f, _)| f.as_str())),
        _ => {}
    });
    out
}

fn any_ident(e: &Expr, list: &[String]) -> bool {
    idents(e).iter().any(|i| matches_convention(i, list))
}

/// The name written by an assignment: the last field of a field path, or a bare name.
fn target_name(target: &Expr) -> Option<&str> {
    match &target.kind {
        ExprKind::Field { field, .. } => Some(field),
        ExprKind::Name(p) if p.len() == 1 => Some(&p[0]),
        _ => None,
    }
}

fn children(e: &Expr) -> Vec<&Expr> {
    match &e.kind {
        ExprKind::Literal(_) | ExprKind::Name(_) => Vec::new(),
        ExprKind::Field { base, .. } => vec![base],
        ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
        ExprKind::Unary { expr, .. } | ExprKind::Borrow { expr, .. } => vec![expr],
        ExprKind::Call { args, .. } | ExprKind::Vector(args) => args.iter().collect(),
        ExprKind::Pack { fields, .. } => fields.iter().filter_map(|(_, v)| v.as_ref()).collect(),
    }
}

/// Whether `target` occurs in `e` in positive and in negated position.
fn polarity(e: &Expr, target: &impl Fn(&Expr) -> bool) -> (bool, bool) {
    fn go(e: &Expr, negated: bool, target: &impl Fn(&Expr) -> bool, out: &mut (bool, bool)) {
        if target(e) {
            if negated {
                out.1 = true;
            } else {
                out.0 = true;
            }
            return;
        }
        if let ExprKind::Unary { op: UnOp::Not, expr } = &e.kind {
            return go(expr, !negated, target, out);
        }
        for c in children(e) {
            go(c, negated, target, out);
        }
    }
    let mut out = (false, false);
    go(e, false, target, &mut out);
    out
}

fn call_parts(e: &Expr) -> Option<(&[String], &[crate::frontend::ast::Type], &[Expr])> {
    match &e.kind {
        ExprKind::Call { path, type_args, args } => Some((path, type_args, args)),
        _ => None,
    }
}

fn last(path: &[String]) -> &str {
    path.last().map(String::as_str).unwrap_or("")
}

fn stmt_calls(s: &CfgStmt) -> Vec<&Expr> {
    s.exprs().into_iter().flat_map(|e| e.calls()).collect()
}

fn is_call_stmt(s: &CfgStmt) -> bool {
    s.stmt().is_some() && !stmt_calls(s).is_empty()
}

fn strip_borrow(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Borrow { expr, .. } => strip_borrow(expr),
        _ => e,
    }
}

// ---------- BMI ----------

pub(super) fn mwc100(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for mref in ctx.model.module_refs() {
        let module = ctx.model.module(mref);
        let mut sets_true = Vec::new();
        let mut sets_false = BTreeSet::new();
        let mut asserted = BTreeSet::new();
        for f in &module.functions {
            for s in f.body.iter().flat_map(|b| b.all_stmts()) {
                match &s.kind {
                    StmtKind::Assign { target, value } => {
                        let Some(name) = target_name(target) else { continue };
                        if !matches_convention(name, &ctx.conv().freeze) {
                            continue;
                        }
                        match value.kind {
                            ExprKind::Literal(Literal::Bool(true)) => sets_true.push((name, s)),
                            ExprKind::Literal(Literal::Bool(false)) => {
                                sets_false.insert(name);
                            }
                            _ => {}
                        }
                    }
                    StmtKind::Assert { cond, .. } => cond.walk(&mut |e| match &e.kind {
                        ExprKind::Field { field, .. } => {
                            asserted.insert(field.as_str());
                        }
                        ExprKind::Name(p) if p.len() == 1 => {
                            asserted.insert(p[0].as_str());
                        }
                        _ => {}
                    }),
                    _ => {}
                }
            }
        }
        for (name, s) in sets_true {
            if !sets_false.contains(name) && asserted.contains(name) {
                out.push(Hit::new(
                    &s.span,
                    format!("`{name}` is set to true and checked, but nothing in the module ever sets it back to false"),
                ));
            }
        }
    }
    out
}

pub(super) fn mwc101(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        for s in cfg.stmts() {
            for call in stmt_calls(s) {
                let Some((path, type_args, args)) = call_parts(call) else { continue };
                if path.len() != 1 || !path[0].starts_with("borrow_global") {
                    continue;
                }
                let ty = type_args.first().map(print_type);
                let addr = args.first().map(print_expr);
                let is_exists = |e: &Expr| match call_parts(e) {
                    Some((p, ta, a)) => {
                        p.len() == 1
                            && p[0] == "exists"
                            && ta.first().map(print_type) == ty
                            && a.first().map(print_expr) == addr
                    }
                    None => false,
                };
                let guarded = check_dominating_guard(cfg, s.id, |g| {
                    let (pos, neg) = polarity(g.cond, &is_exists);
                    match g.kind {
                        GuardKind::Assert | GuardKind::BranchTrue => pos,
                        GuardKind::BranchFalse => neg,
                    }
                });
                if !guarded {
                    let ty = ty.as_deref().unwrap_or("_");
                    let addr = addr.as_deref().unwrap_or("");
                    out.push(Hit::new(
                        &s.span,
                        format!("`{}<{ty}>({addr})` is not guarded by `exists<{ty}>({addr})`", path[0]),
                    ));
                }
            }
        }
    }
    out
}

pub(super) fn mwc102(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        for block in &cfg.blocks {
            let changing: Vec<&CfgStmt> = block
                .stmts
                .iter()
                .filter(|s| s.stmt().is_some() && (s.has(&Effect::WritesGlobal) || s.has(&Effect::ExternalCall)))
                .collect();
            for pair in changing.windows(2) {
                let (first, second) = (pair[0], pair[1]);
                if !is_call_stmt(second) {
                    continue;
                }
                if check_dominating_guard(cfg, first.id, |g| g.kind == GuardKind::Assert) {
                    continue;
                }
                out.push(Hit::new(
                    &second.span,
                    format!(
                        "if this call aborts, the state change on line {} has already happened and no check ran first",
                        first.span.line
                    ),
                ));
            }
        }
    }
    out
}

// ---------- IMI ----------

pub(super) fn mwc103(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        for w in loop_nontermination(v.cfg()) {
            out.push(Hit::new(
                &w.span,
                format!("`{} >= {}` always holds: `{}` is unsigned and never decreases in the loop", w.var, w.bound, w.var),
            ));
        }
    }
    out
}

pub(super) fn mwc104(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        let addr_params: Vec<&str> = v
            .decl
            .params
            .iter()
            .filter(|p| p.ty.primitive() == Some(Primitive::Address))
            .map(|p| p.name.as_str())
            .collect();
        if addr_params.is_empty() {
            continue;
        }
        for s in cfg.stmts() {
            for call in stmt_calls(s) {
                let Some((path, _, args)) = call_parts(call) else { continue };
                if !matches!(ctx.classify(&v, path).class, CallClassKind::External | CallClassKind::Evm) {
                    continue;
                }
                for arg in args {
                    let Some(p) = strip_borrow(arg).as_simple_name().filter(|n| addr_params.contains(n)) else {
                        continue;
                    };
                    let guarded = check_dominating_guard(cfg, s.id, |g| g.kind != GuardKind::BranchFalse && g.cond.mentions(p));
                    if !guarded {
                        out.push(Hit::new(
                            &s.span,
                            format!("address parameter `{p}` reaches external call `{}` without validation", path.join("::")),
                        ));
                    }
                }
            }
        }
    }
    out
}

pub(super) fn mwc105(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        let live = reachable_set(cfg);
        for b in cfg.blocks.iter().filter(|b| !live.contains(&b.id)) {
            if let Some(s) = b.stmts.first() {
                out.push(Hit::new(&s.span, "statement can never execute"));
            }
        }
    }
    out
}

// ---------- SRS ----------

pub(super) fn mwc106(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        let mut first_write: BTreeMap<_, u32> = BTreeMap::new();
        for (a, b) in order_of_effects(cfg, &Effect::ExternalCall, &Effect::WritesGlobal) {
            first_write.entry(a).or_insert(cfg.stmt(b).span.line);
        }
        for (a, line) in first_write {
            out.push(Hit::new(
                &cfg.stmt(a).span,
                format!("external call can re-enter before the state write on line {line}"),
            ));
        }
    }
    out
}

fn state_mutation_comment() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(chang|modif|mutat|writ|updat)\w*\b.*\bstate\b").unwrap())
}

pub(super) fn mwc107(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        let comments = &ctx.model.files[v.info.id.file].comments;
        for s in cfg.stmts().filter(|s| s.has(&Effect::ExternalCall)) {
            let callback = stmt_calls(s).into_iter().filter_map(call_parts).find(|(path, _, _)| {
                path.iter().any(|seg| matches_convention(seg, &ctx.conv().callback))
                    && matches!(ctx.classify(&v, path).class, CallClassKind::External | CallClassKind::Evm)
            });
            let Some((path, _, _)) = callback else { continue };
            let writes_after = !order_of(cfg, |x| x.id == s.id, |x| x.has(&Effect::WritesGlobal)).is_empty();
            let commented = comments
                .iter()
                .any(|c| c.span.line == s.span.line && state_mutation_comment().is_match(&c.text));
            if writes_after || commented {
                out.push(Hit::new(
                    &s.span,
                    format!("callback `{}` runs while this function's state is being changed", path.join("::")),
                ));
            }
        }
    }
    out
}

pub(super) fn mwc108(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        for block in &v.cfg().blocks {
            let mut external: Option<u32> = None;
            for s in &block.stmts {
                if let Some(line) = external.filter(|_| s.has(&Effect::WritesGlobal)) {
                    out.push(Hit::new(
                        &s.span,
                        format!("state write interleaves with the external call on line {line}"),
                    ));
                }
                if s.has(&Effect::ExternalCall) && external.is_none() {
                    external = Some(s.span.line);
                }
            }
        }
    }
    out
}

pub(super) fn mwc109(ctx: &Ctx<'_>) -> Vec<Hit> {
    lock_order_conflicts(ctx.model)
        .into_iter()
        .map(|c| {
            let (a, b) = &c.locks;
            Hit::new(
                &c.site,
                format!(
                    "`{}` and `{}` acquire `{a}` and `{b}` in opposite orders",
                    ctx.model.info(c.first).name,
                    ctx.model.info(c.second).name
                ),
            )
        })
        .collect()
}

// ---------- MTS ----------

pub(super) fn mwc110(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns().filter(|v| v.assert_count() == 0) {
        for s in v.stmts() {
            let StmtKind::Assign { target, value } = &s.kind else { continue };
            let Some(name) = target_name(target) else { continue };
            if matches_convention(name, &ctx.conv().supply)
                && matches!(value.kind, ExprKind::Binary { op: BinOp::Sub, .. })
            {
                out.push(Hit::new(&s.span, format!("`{name}` is reduced with no ownership or balance check")));
            }
        }
    }
    out
}

pub(super) fn mwc111(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns().filter(|v| v.decl.visibility.is_public()) {
        let authorised = v.decl.params.iter().any(|p| {
            p.ty.primitive() == Some(Primitive::Signer)
                || p.ty.named().is_some_and(|n| matches_convention(n, &ctx.conv().capability))
        });
        if authorised {
            continue;
        }
        for s in v.cfg().stmts().filter(|s| s.has(&Effect::WritesGlobal)) {
            let Some(Stmt { kind: StmtKind::Assign { target, value }, .. }) = s.stmt() else { continue };
            let Some(name) = target_name(target) else { continue };
            if matches_convention(name, &ctx.conv().supply) && !matches!(value.kind, ExprKind::Binary { op: BinOp::Sub, .. }) {
                out.push(Hit::new(
                    &s.span,
                    format!("public `{}` changes `{name}` without a signer or capability", v.decl.name),
                ));
            }
        }
    }
    out
}

// ---------- GSM ----------

pub(super) fn mwc113(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        if !cfg.stmts().any(|s| s.has(&Effect::WritesGlobal)) {
            continue;
        }
        for s in cfg.stmts().filter(|s| s.has(&Effect::EvmCall)) {
            out.push(Hit::new(&s.span, "EVM call in a function that also writes Move state; gas may be mispriced across layers"));
        }
    }
    out
}

// ---------- FLA ----------

pub(super) fn mwc116(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns().filter(|v| matches_convention(&v.decl.name, &ctx.conv().store)) {
        for g in v.decl.generics.iter().filter(|g| g.constraints.is_empty()) {
            if v.decl.params.iter().any(|p| p.ty.mentions(&g.name)) {
                out.push(Hit::new(
                    &v.decl.span,
                    format!("type parameter `{}` of `{}` has no ability constraints", g.name, v.decl.name),
                ));
            }
        }
    }
    out
}

pub(super) fn mwc117(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for mref in ctx.model.module_refs() {
        for u in ctx.model.module(mref).uses.iter().filter(|u| u.wildcard) {
            out.push(Hit::new(&u.span, format!("wildcard import of `{}`", u.path.join("::"))));
        }
    }
    out
}

pub(super) fn mwc118(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns().filter(|v| v.decl.visibility.is_public() && v.assert_count() == 0) {
        for p in &v.decl.params {
            if let Some(name) = p.ty.named().filter(|n| ctx.is_resource(v.mref, n)) {
                out.push(Hit::new(
                    &v.decl.span,
                    format!("public `{}` accepts resource `{name}` without any validation", v.decl.name),
                ));
            }
        }
    }
    out
}

pub(super) fn mwc119(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    let conv = ctx.conv();
    for v in ctx.fns().filter(|v| matches_convention(&v.decl.name, &conv.wrap) && v.assert_count() == 0) {
        let cap = v.decl.params.iter().find(|p| {
            matches_convention(&p.name, &conv.capability)
                || p.ty.named().is_some_and(|n| matches_convention(n, &conv.capability))
        });
        if let Some(p) = cap {
            out.push(Hit::new(
                &v.decl.span,
                format!("`{}` wraps capability `{}` without checking permission", v.decl.name, p.name),
            ));
        }
    }
    out
}

// ---------- supplementary ----------

fn is_verify_call(ctx: &Ctx<'_>, v: &FnView<'_>, e: &Expr) -> bool {
    call_parts(e).is_some_and(|(path, _, _)| {
        last(path).to_lowercase().contains("verify") && ctx.classify(v, path).class == CallClassKind::Crypto
    })
}

pub(super) fn mwc120a(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    let conv = ctx.conv();
    for v in ctx.fns() {
        for s in v.cfg().stmts() {
            for call in stmt_calls(s).into_iter().filter(|c| is_verify_call(ctx, &v, c)) {
                let (path, _, args) = call_parts(call).unwrap();
                let bound = args.iter().any(|a| any_ident(a, &conv.nonce) || any_ident(a, &conv.domain));
                if !bound {
                    out.push(Hit::new(
                        &s.span,
                        format!("`{}` checks a signature without a nonce or domain", path.join("::")),
                    ));
                }
            }
        }
    }
    out
}

pub(super) fn mwc121(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns().filter(|v| v.decl.visibility == crate::frontend::ast::Visibility::Fallback) {
        let cfg = v.cfg();
        for s in cfg.stmts().filter(|s| is_call_stmt(s)) {
            if !(s.has(&Effect::WritesGlobal) || s.has(&Effect::ExternalCall)) {
                continue;
            }
            if order_of(cfg, |x| x.id == s.id, |x| x.has(&Effect::AssertGuard)).is_empty() {
                out.push(Hit::new(&s.span, "fallback changes state with no post-condition check afterwards"));
            }
        }
    }
    out
}

pub(super) fn mwc123(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        for s in v.stmts() {
            let StmtKind::Expr { expr, semi: true } = &s.kind else { continue };
            let Some((path, _, _)) = call_parts(expr) else { continue };
            if path.len() != 1 {
                continue;
            }
            let callee = v.module.functions.iter().find(|f| f.name == path[0]);
            if callee.is_some_and(|f| f.ret.as_ref().is_some_and(|r| !r.types.is_empty())) {
                out.push(Hit::new(&s.span, format!("result of `{}` is discarded", path[0])));
            }
        }
    }
    out
}

fn module_calls_commit(ctx: &Ctx<'_>, module: &ModuleDecl) -> bool {
    module.functions.iter().flat_map(|f| f.body.iter().flat_map(|b| b.all_stmts())).any(|s| {
        s.own_exprs().iter().flat_map(|e| e.calls()).any(|c| {
            call_parts(c).is_some_and(|(p, _, _)| p.iter().any(|seg| matches_convention(seg, &ctx.conv().commit)))
        })
    })
}

pub(super) fn mwc125(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        if module_calls_commit(ctx, v.module) {
            continue;
        }
        let is_param = |e: &Expr| e.as_simple_name().is_some_and(|n| v.decl.params.iter().any(|p| p.name == n));
        let is_global = |e: &Expr| e.as_simple_name().is_some_and(|n| !v.info.bindings.contains_key(n));
        for s in v.stmts() {
            let StmtKind::If { cond, then_block, .. } = &s.kind else { continue };
            let ExprKind::Binary { op, lhs, rhs } = &cond.kind else { continue };
            if !op.is_comparison() || !((is_param(lhs) && is_global(rhs)) || (is_global(lhs) && is_param(rhs))) {
                continue;
            }
            let sender_write = then_block.all_stmts().iter().any(|t| {
                matches!(&t.kind, StmtKind::Assign { value, .. } if value.calls().iter().any(|c| {
                    call_parts(c).is_some_and(|(p, _, _)| p.iter().any(|seg| matches_convention(seg, &ctx.conv().sender)))
                }))
            });
            if sender_write {
                out.push(Hit::new(
                    &s.span,
                    "order-dependent comparison against public state decides the sender's win; no commit-reveal in module",
                ));
            }
        }
    }
    out
}

pub(super) fn mwc126(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        for s in v.stmts() {
            let annotated = match &s.kind {
                StmtKind::Let { ty: Some(t), value: Some(val), .. } if call_parts(val).is_some() => t.named(),
                _ => None,
            };
            for e in s.own_exprs() {
                for call in e.calls() {
                    let Some((path, type_args, _)) = call_parts(call) else { continue };
                    if !ctx.model.classifier.is_abi_decode(path) {
                        continue;
                    }
                    let target = type_args.first().and_then(|t| t.named()).or(annotated);
                    let resource = match target {
                        Some(name) => ctx.is_resource(v.mref, name),
                        None => matches_convention(last(path), &["resource".to_string()]),
                    };
                    if resource {
                        out.push(Hit::new(
                            &s.span,
                            format!("`{}` decodes a resource from untyped ABI input", path.join("::")),
                        ));
                    }
                }
            }
        }
    }
    out
}

pub(super) fn mwc127(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for ((addr, name), refs) in &ctx.model.modules {
        let Some(addr) = addr else { continue };
        let Some(first) = refs.first() else { continue };
        let first_span = &ctx.model.module(*first).span;
        for r in &refs[1..] {
            out.push(Hit::new(
                &ctx.model.module(*r).span,
                format!("module `{addr}::{name}` is already declared at {first_span}"),
            ));
        }
    }
    out
}

pub(super) fn mwc128(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        for s in v.cfg().stmts() {
            for call in stmt_calls(s) {
                let Some((path, _, args)) = call_parts(call) else { continue };
                if !ctx.model.classifier.is_hash(path) {
                    continue;
                }
                let Some(first) = args.first() else { continue };
                if !any_ident(first, &ctx.conv().domain) {
                    out.push(Hit::new(&s.span, format!("`{}` input carries no domain separator", path.join("::"))));
                }
            }
        }
    }
    out
}

pub(super) fn mwc129(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let stmts = v.stmts();
        let role_checked = stmts.iter().any(|s| match &s.kind {
            StmtKind::Assert { cond, .. } => any_ident(cond, &ctx.conv().role),
            _ => false,
        });
        if role_checked {
            continue;
        }
        for s in stmts {
            let found = s.own_exprs().iter().any(|e| {
                e.any(&mut |x| match &x.kind {
                    ExprKind::Binary { op: BinOp::And, lhs, rhs } => {
                        is_verify_call(ctx, &v, lhs)
                            && is_verify_call(ctx, &v, rhs)
                            && match (call_parts(lhs), call_parts(rhs)) {
                                (Some((_, _, a)), Some((_, _, b))) => {
                                    a.first().map(print_expr) != b.first().map(print_expr)
                                }
                                _ => false,
                            }
                    }
                    _ => false,
                })
            });
            if found {
                out.push(Hit::new(&s.span, "two signers are verified but neither is checked against a role"));
            }
        }
    }
    out
}

pub(super) fn mwc130(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        for s in v.stmts() {
            let StmtKind::Emit { event, args } = &s.kind else { continue };
            let expected = ctx
                .config
                .event_schemas
                .get(event)
                .map(Vec::len)
                .or_else(|| ctx.model.find_struct(v.mref, event).map(|st| st.fields.len()));
            if let Some(n) = expected.filter(|&n| n != args.len()) {
                out.push(Hit::new(
                    &s.span,
                    format!("event `{event}` emitted with {} fields, schema has {n}", args.len()),
                ));
            }
        }
    }
    out
}

pub(super) fn mwc131(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns().filter(|v| v.decl.visibility.is_public() && v.decl.params.is_empty()) {
        let Some(ret) = &v.decl.ret else { continue };
        for t in &ret.types {
            let Some(name) = t.named() else { continue };
            if ctx.model.find_struct(v.mref, name).is_some_and(|st| st.has(Ability::Key)) {
                out.push(Hit::new(&v.decl.span, format!("`{}` exposes key struct `{name}`", v.decl.name)));
            }
        }
    }
    out
}

pub(super) fn mwc132(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns().filter(|v| v.decl.visibility.is_public()) {
        for s in v.stmts() {
            let StmtKind::Assert { code: Some(code), .. } = &s.kind else { continue };
            let Some(n) = code.int_value() else { continue };
            if !ctx.config.generic_error_codes.iter().any(|&g| u128::from(g) == n) {
                out.push(Hit::new(&s.span, format!("abort code {n} reveals which check failed")));
            }
        }
    }
    out
}

pub(super) fn mwc133(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let cfg = v.cfg();
        for s in cfg.stmts() {
            for call in stmt_calls(s) {
                let Some((path, _, args)) = call_parts(call) else { continue };
                if ctx.classify(&v, path).class != CallClassKind::Bridge {
                    continue;
                }
                for arg in args {
                    let Some(p) = strip_borrow(arg).root_name() else { continue };
                    if !matches_convention(p, &ctx.conv().payload) {
                        continue;
                    }
                    if !check_dominating_guard(cfg, s.id, |g| g.kind == GuardKind::Assert && g.cond.mentions(p)) {
                        out.push(Hit::new(
                            &s.span,
                            format!("`{p}` crosses the bridge via `{}` without validation", path.join("::")),
                        ));
                    }
                }
            }
        }
    }
    out
}

pub(super) fn mwc136(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut out = Vec::new();
    for v in ctx.fns() {
        let stmts = v.stmts();
        let from_oracle =
            |e: &Expr| e.calls().iter().any(|c| call_parts(c).is_some_and(|(p, _, _)| ctx.classify(&v, p).class == CallClassKind::Oracle));
        for (i, s) in stmts.iter().enumerate() {
            let var = match &s.kind {
                StmtKind::Let { name, value: Some(val), .. } if from_oracle(val) => name.as_str(),
                StmtKind::Assign { target, value } if from_oracle(value) => match target.root_name() {
                    Some(n) => n,
                    None => continue,
                },
                _ => continue,
            };
            let next_use = stmts[i + 1..].iter().find(|t| t.own_exprs().iter().any(|e| e.mentions(var)));
            let checked = matches!(next_use, Some(Stmt { kind: StmtKind::Assert { .. }, .. }));
            if !checked {
                let detail = match next_use {
                    Some(t) => format!("used on line {} before any check", t.span.line),
                    None => "never checked".to_string(),
                };
                out.push(Hit::new(&s.span, format!("oracle value `{var}` is {detail}")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::frontend::parse_source;
    use crate::semantics::resolve;

    fn lines(proc: fn(&Ctx<'_>) -> Vec<Hit>, src: &str) -> Vec<u32> {
        let model = resolve(vec![parse_source("t.move", src).unwrap()], &Config::default().call_patterns).unwrap();
        let config = Config::default();
        let mut l: Vec<u32> = proc(&Ctx { model: &model, config: &config }).iter().map(|h| h.span.line).collect();
        l.sort();
        l
    }

    #[test]
    fn polarity_tracks_negation() {
        let e = parse_source("t.move", "fun f() { assert(!exists<S>(a) || exists<S>(a), 1); }").unwrap();
        let StmtKind::Assert { cond, .. } = &e.ast.modules[0].functions[0].body.as_ref().unwrap().stmts[0].kind else {
            panic!()
        };
        let target = |x: &Expr| call_parts(x).is_some_and(|(p, _, _)| p[0] == "exists");
        assert_eq!(polarity(cond, &target), (true, true));
    }

    #[test]
    fn borrow_guarded_by_negated_branch_with_return() {
        let src = "fun f(a: address) {\n    if (!exists<S>(a)) { return; }\n    let s = borrow_global<S>(a);\n}";
        assert!(lines(mwc101, src).is_empty());
    }

    #[test]
    fn borrow_guard_for_other_address_does_not_count() {
        let src = "fun f(a: address, b: address) {\n    assert(exists<S>(b), 1);\n    let s = borrow_global<S>(a);\n}";
        assert_eq!(lines(mwc101, src), vec![3]);
    }

    #[test]
    fn unsigned_loop_is_reported_at_the_while() {
        assert_eq!(lines(mwc103, "fun f() {\n    let mut i = 0;\n    while (i >= 0) {\n        i = i + 1;\n    }\n}"), vec![3]);
    }

    #[test]
    fn dead_code_after_return() {
        let src = "public fun t(amount: u64) {\n    return;\n    let x = amount + 1;\n    log::info(\"x\");\n}";
        assert_eq!(lines(mwc105, src), vec![3]);
    }

    #[test]
    fn reentrancy_reported_at_the_call() {
        let src = "public fun t() {\n    External::evm_callback();\n    update_balance();\n}";
        assert_eq!(lines(mwc106, src), vec![2]);
        let fixed = "public fun t() {\n    update_balance();\n    External::evm_callback();\n}";
        assert!(lines(mwc106, fixed).is_empty());
    }

    #[test]
    fn interleaved_write_in_same_block() {
        let src = "public fun u() {\n    EVM::external_op();\n    state.value = 10;\n}";
        assert_eq!(lines(mwc108, src), vec![3]);
    }

    #[test]
    fn burn_with_and_without_check() {
        assert_eq!(lines(mwc110, "public fun burn(t: &mut Token) {\n    t.total = t.total - 100;\n}"), vec![2]);
        assert!(lines(mwc110, "public fun burn(t: &mut Token) {\n    assert(t.total >= 100, 1);\n    t.total = t.total - 100;\n}").is_empty());
    }

    #[test]
    fn mint_requires_authority() {
        assert_eq!(lines(mwc111, "public fun mint() {\n    supply = supply + 1000;\n}"), vec![2]);
        assert!(lines(mwc111, "public fun mint(cap: &MintCap) {\n    supply = supply + 1000;\n}").is_empty());
        assert!(lines(mwc111, "public fun mint(admin: &signer) {\n    supply = supply + 1000;\n}").is_empty());
        assert!(lines(mwc111, "fun mint() {\n    supply = supply + 1000;\n}").is_empty());
    }

    #[test]
    fn generic_store_needs_constraints() {
        assert_eq!(lines(mwc116, "store<T>(item: T);"), vec![1]);
        assert!(lines(mwc116, "store<T: key + store>(item: T);").is_empty());
        assert!(lines(mwc116, "keep<T>(item: T);").is_empty());
    }

    #[test]
    fn verify_needs_nonce_or_domain() {
        assert_eq!(lines(mwc120a, "public fun e(sig: vector<u8>, msg: vector<u8>) {\n    crypto::verify(pubkey, msg, sig);\n}"), vec![2]);
        assert!(lines(mwc120a, "public fun e(sig: vector<u8>, msg: vector<u8>, nonce: u64) {\n    crypto::verify(pubkey, bind(msg, nonce), sig);\n}").is_empty());
    }

    #[test]
    fn fallback_needs_post_check() {
        assert_eq!(lines(mwc121, "fallback fun handle() {\n    transfer();\n}"), vec![2]);
        assert!(lines(mwc121, "fallback fun handle() {\n    transfer();\n    assert(ok(), 1);\n}").is_empty());
    }

    #[test]
    fn discarded_result() {
        let src = "module M {\n    fun c(): bool { true }\n    public fun r() {\n        c();\n    }\n}";
        assert_eq!(lines(mwc123, src), vec![4]);
        let fixed = "module M {\n    fun c(): bool { true }\n    public fun r() {\n        assert(c(), 1);\n    }\n}";
        assert!(lines(mwc123, fixed).is_empty());
    }

    #[test]
    fn hash_domain_separation() {
        assert_eq!(lines(mwc128, "fun h(msg: vector<u8>) {\n    let h = hash::sha3_256(msg);\n}"), vec![2]);
        assert!(lines(mwc128, "fun h(msg: vector<u8>) {\n    let h = hash::sha3_256(with_domain(DOMAIN_TAG, msg));\n}").is_empty());
    }

    #[test]
    fn abort_codes() {
        assert_eq!(lines(mwc132, "public fun w(balance: u64) {\n    assert(balance > 0, 42);\n}"), vec![2]);
        assert!(lines(mwc132, "public fun w(balance: u64) {\n    assert(balance > 0, 1);\n}").is_empty());
        assert!(lines(mwc132, "fun w(balance: u64) {\n    assert(balance > 0, 42);\n}").is_empty());
    }

    #[test]
    fn oracle_value_checked_before_use() {
        assert_eq!(lines(mwc136, "public fun r() {\n    price = Oracle::get();\n}"), vec![2]);
        let fixed = "public fun r() {\n    let p = Oracle::get();\n    assert(valid(p), 1);\n    price = p;\n}";
        assert!(lines(mwc136, fixed).is_empty());
        let late = "public fun r() {\n    let p = Oracle::get();\n    price = p;\n    assert(valid(p), 1);\n}";
        assert_eq!(lines(mwc136, late), vec![2]);
    }
}
