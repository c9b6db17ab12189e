//! Name resolution across parsed files.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{CallClassKind, CallPatterns};
use crate::frontend::ast::{Ability, ExprKind, FunctionDecl, ModuleDecl, StmtKind, StructDecl};
use crate::frontend::span::Span;
use crate::frontend::ParsedFile;

use super::cfg::{build_cfg, Cfg};
use super::effects::{Binding, Bindings, CallClassifier, EffectContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleRef {
    pub file: usize,
    pub module: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnRef {
    pub file: usize,
    pub module: usize,
    pub func: usize,
}

impl FnRef {
    pub fn module_ref(self) -> ModuleRef {
        ModuleRef { file: self.file, module: self.module }
    }
}

/// `(address, name)`; implicit file-level modules have no address and an empty name.
pub type ModuleKey = (Option<String>, String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDeclSite {
    pub module: ModuleRef,
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CallTarget {
    Resolved(FnRef),
    ExternalUnresolved(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallEdge {
    pub caller: FnRef,
    pub target: CallTarget,
    pub class: CallClassKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageAccess {
    pub function: FnRef,
    pub primitive: String,
    /// Struct named by the type argument, if any.
    pub struct_name: Option<String>,
    /// Abilities of that struct when it is declared in the analyzed files.
    pub abilities: Option<BTreeSet<Ability>>,
    pub span: Span,
}

pub struct FunctionInfo {
    pub id: FnRef,
    pub name: String,
    pub bindings: Bindings,
    pub cfg: Cfg,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SemanticError {
    #[error("{second}: duplicate function `{name}` in module `{module}` (first declared at {first})")]
    DuplicateFunction { module: String, name: String, first: Span, second: Span },
    #[error("invalid call patterns: {0}")]
    Patterns(String),
}

pub struct SemanticModel {
    pub files: Vec<ParsedFile>,
    pub modules: BTreeMap<ModuleKey, Vec<ModuleRef>>,
    pub functions: Vec<FunctionInfo>,
    pub call_graph: Vec<CallEdge>,
    pub storage_accesses: Vec<StorageAccess>,
    /// Keyed by struct name; the first declaration of a name wins.
    pub struct_abilities: BTreeMap<String, BTreeSet<Ability>>,
    /// Address literal → every module declared at it, in file order.
    pub module_addresses: BTreeMap<String, Vec<ModuleDeclSite>>,
    pub classifier: CallClassifier,
    fn_index: BTreeMap<FnRef, usize>,
}

impl SemanticModel {
    pub fn module(&self, m: ModuleRef) -> &ModuleDecl {
        &self.files[m.file].ast.modules[m.module]
    }

    pub fn decl(&self, f: FnRef) -> &FunctionDecl {
        &self.module(f.module_ref()).functions[f.func]
    }

    pub fn info(&self, f: FnRef) -> &FunctionInfo {
        &self.functions[self.fn_index[&f]]
    }

    pub fn file(&self, f: FnRef) -> &ParsedFile {
        &self.files[f.file]
    }

    pub fn module_refs(&self) -> impl Iterator<Item = ModuleRef> + '_ {
        self.files
            .iter()
            .enumerate()
            .flat_map(|(file, pf)| (0..pf.ast.modules.len()).map(move |module| ModuleRef { file, module }))
    }

    pub fn functions_in(&self, m: ModuleRef) -> impl Iterator<Item = &FunctionInfo> + '_ {
        self.functions.iter().filter(move |f| f.id.module_ref() == m)
    }

    /// Struct `name` as seen from module `from`: same module first, then any module.
    pub fn find_struct(&self, from: ModuleRef, name: &str) -> Option<&StructDecl> {
        if let Some(s) = self.module(from).structs.iter().find(|s| s.name == name) {
            return Some(s);
        }
        self.module_refs().flat_map(|m| self.module(m).structs.iter()).find(|s| s.name == name)
    }

    pub fn call_edges_from(&self, f: FnRef) -> impl Iterator<Item = &CallEdge> + '_ {
        self.call_graph.iter().filter(move |e| e.caller == f)
    }
}

fn function_bindings(f: &FunctionDecl) -> Bindings {
    let mut b = Bindings::new();
    for p in &f.params {
        b.insert(p.name.clone(), Binding::Param(p.ty.clone()));
    }
    if let Some(body) = &f.body {
        body.walk_stmts(&mut |s| {
            if let StmtKind::Let { name, ty, value, .. } = &s.kind {
                b.entry(name.clone()).or_insert_with(|| Binding::Local { ty: ty.clone(), init: value.clone() });
            }
        });
    }
    b
}

/// Resolves names across `files` and builds one CFG per function.
pub fn resolve(files: Vec<ParsedFile>, patterns: &CallPatterns) -> Result<SemanticModel, Vec<SemanticError>> {
    let classifier = CallClassifier::new(patterns).map_err(|e| vec![SemanticError::Patterns(e.to_string())])?;

    let mut errors = Vec::new();
    let mut modules: BTreeMap<ModuleKey, Vec<ModuleRef>> = BTreeMap::new();
    let mut module_addresses: BTreeMap<String, Vec<ModuleDeclSite>> = BTreeMap::new();
    let mut struct_abilities: BTreeMap<String, BTreeSet<Ability>> = BTreeMap::new();
    let mut module_names: BTreeMap<String, Vec<ModuleRef>> = BTreeMap::new();

    for (fi, pf) in files.iter().enumerate() {
        for (mi, m) in pf.ast.modules.iter().enumerate() {
            let mref = ModuleRef { file: fi, module: mi };
            modules.entry((m.address.clone(), m.name.clone())).or_default().push(mref);
            if !m.implicit {
                module_names.entry(m.name.clone()).or_default().push(mref);
            }
            if let Some(addr) = &m.address {
                module_addresses.entry(addr.clone()).or_default().push(ModuleDeclSite {
                    module: mref,
                    name: m.name.clone(),
                    span: m.span.clone(),
                });
            }
            for s in &m.structs {
                struct_abilities.entry(s.name.clone()).or_insert_with(|| s.abilities.iter().copied().collect());
            }
            let mut seen: BTreeMap<&str, &Span> = BTreeMap::new();
            for f in &m.functions {
                if let Some(first) = seen.insert(&f.name, &f.span) {
                    errors.push(SemanticError::DuplicateFunction {
                        module: if m.implicit { "<file>".into() } else { m.name.clone() },
                        name: f.name.clone(),
                        first: first.clone(),
                        second: f.span.clone(),
                    });
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let mut refs = Vec::new();
    for (fi, pf) in files.iter().enumerate() {
        for (mi, m) in pf.ast.modules.iter().enumerate() {
            for fx in 0..m.functions.len() {
                refs.push(FnRef { file: fi, module: mi, func: fx });
            }
        }
    }

    let module_fn_names = |mref: ModuleRef| -> BTreeSet<String> {
        files[mref.file].ast.modules[mref.module].functions.iter().map(|f| f.name.clone()).collect()
    };

    let per_fn: Vec<(FunctionInfo, Vec<CallEdge>, Vec<StorageAccess>)> = refs
        .par_iter()
        .map(|&id| {
            let m = &files[id.file].ast.modules[id.module];
            let f = &m.functions[id.func];
            let local_fns = module_fn_names(id.module_ref());
            let bindings = function_bindings(f);
            let ctx = EffectContext { classifier: &classifier, module_functions: &local_fns, bindings: &bindings };
            let cfg = build_cfg(f, &ctx);

            let mut edges = Vec::new();
            let mut accesses = Vec::new();
            if let Some(body) = &f.body {
                for s in body.all_stmts() {
                    for e in s.own_exprs() {
                        for call in e.calls() {
                            let ExprKind::Call { path, type_args, .. } = &call.kind else { continue };
                            let cls = ctx.classify(path);
                            if cls.class == CallClassKind::StoragePrimitive {
                                let struct_name = type_args.first().and_then(|t| t.named()).map(str::to_string);
                                let abilities = struct_name.as_ref().and_then(|n| {
                                    m.structs
                                        .iter()
                                        .find(|s| &s.name == n)
                                        .map(|s| s.abilities.iter().copied().collect())
                                        .or_else(|| struct_abilities.get(n).cloned())
                                });
                                accesses.push(StorageAccess {
                                    function: id,
                                    primitive: path[0].clone(),
                                    struct_name,
                                    abilities,
                                    span: call.span.clone(),
                                });
                                continue;
                            }
                            let target = resolve_call(&files, &module_names, id, path)
                                .map(CallTarget::Resolved)
                                .unwrap_or_else(|| CallTarget::ExternalUnresolved(path.join("::")));
                            edges.push(CallEdge { caller: id, target, class: cls.class, span: call.span.clone() });
                        }
                    }
                }
            }
            (FunctionInfo { id, name: f.name.clone(), bindings, cfg }, edges, accesses)
        })
        .collect();

    let mut functions = Vec::with_capacity(per_fn.len());
    let mut call_graph = Vec::new();
    let mut storage_accesses = Vec::new();
    for (info, edges, acc) in per_fn {
        functions.push(info);
        call_graph.extend(edges);
        storage_accesses.extend(acc);
    }
    let fn_index = functions.iter().enumerate().map(|(i, f)| (f.id, i)).collect();

    Ok(SemanticModel {
        files,
        modules,
        functions,
        call_graph,
        storage_accesses,
        struct_abilities,
        module_addresses,
        classifier,
        fn_index,
    })
}

fn resolve_call(
    files: &[ParsedFile],
    module_names: &BTreeMap<String, Vec<ModuleRef>>,
    caller: FnRef,
    path: &[String],
) -> Option<FnRef> {
    let find_in = |m: ModuleRef, name: &str| {
        files[m.file].ast.modules[m.module]
            .functions
            .iter()
            .position(|f| f.name == name)
            .map(|func| FnRef { file: m.file, module: m.module, func })
    };
    match path {
        [name] => find_in(caller.module_ref(), name),
        [.., module, name] => module_names.get(module)?.iter().find_map(|&m| find_in(m, name)),
        [] => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn model(srcs: &[&str]) -> Result<SemanticModel, Vec<SemanticError>> {
        let files = srcs
            .iter()
            .enumerate()
            .map(|(i, s)| parse_source(&format!("f{i}.move"), s).unwrap())
            .collect();
        resolve(files, &CallPatterns::default())
    }

    #[test]
    fn borrow_global_is_storage_access_on_key_struct() {
        let m = model(&["module Counter {\n struct State has key { count: u64 }\n public fun increment(addr: address) {\n let state = borrow_global<State>(addr);\n state.count = state.count + 1;\n }\n}"]).unwrap();
        assert_eq!(m.storage_accesses.len(), 1);
        let a = &m.storage_accesses[0];
        assert_eq!(a.primitive, "borrow_global");
        assert_eq!(a.struct_name.as_deref(), Some("State"));
        assert!(a.abilities.as_ref().unwrap().contains(&Ability::Key));
        assert!(m.call_graph.is_empty());
    }

    #[test]
    fn same_address_in_two_files_shares_a_bucket() {
        let m = model(&["module 0x1::Registry { }", "module 0x1::Registry { }"]).unwrap();
        assert_eq!(m.module_addresses["0x1"].len(), 2);
        let key = (Some("0x1".to_string()), "Registry".to_string());
        assert_eq!(m.modules[&key].len(), 2);
    }

    #[test]
    fn empty_module_has_empty_call_graph() {
        let m = model(&["module M { }"]).unwrap();
        assert!(m.call_graph.is_empty());
        assert!(m.functions.is_empty());
    }

    #[test]
    fn duplicate_function_reports_both_spans() {
        let errs = model(&["module M {\n fun f() { }\n fun f() { }\n}"]).err().unwrap();
        let SemanticError::DuplicateFunction { first, second, .. } = &errs[0] else { panic!() };
        assert_eq!((first.line, second.line), (2, 3));
    }

    #[test]
    fn calls_resolve_locally_and_across_modules() {
        let m = model(&[
            "module A {\n public fun helper() { }\n fun run() { helper(); B::util(); External::go(); }\n}",
            "module B {\n public fun util() { }\n}",
        ])
        .unwrap();
        let targets: Vec<_> = m.call_graph.iter().map(|e| e.target.clone()).collect();
        assert_eq!(targets[0], CallTarget::Resolved(FnRef { file: 0, module: 0, func: 0 }));
        assert_eq!(targets[1], CallTarget::Resolved(FnRef { file: 1, module: 0, func: 0 }));
        assert_eq!(targets[2], CallTarget::ExternalUnresolved("External::go".into()));
    }

    #[test]
    fn every_resolved_edge_points_to_a_declaration() {
        let m = model(&["module A {\n fun a() { b(); c(); }\n fun b() { a(); }\n}"]).unwrap();
        for e in &m.call_graph {
            if let CallTarget::Resolved(f) = e.target {
                let _ = m.decl(f);
            }
        }
    }
}
