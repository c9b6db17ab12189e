//! Call classification and per-statement effect flags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use regex::Regex;

use crate::config::{CallClassKind, CallPattern, CallPatterns};
use crate::frontend::ast::{Expr, ExprKind, Stmt, StmtKind, Type};

/// Builtins that touch global storage. Never reclassified by configuration.
pub const STORAGE_PRIMITIVES: &[&str] = &["borrow_global", "borrow_global_mut", "move_to", "move_from", "exists"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Effect {
    ReadsGlobal,
    WritesGlobal,
    ExternalCall,
    CryptoCall,
    OracleCall,
    BridgeCall,
    EvmCall,
    LockAcquire(String),
    AssertGuard,
    EmitsEvent,
    Returns,
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::ReadsGlobal => f.write_str("reads-global"),
            Effect::WritesGlobal => f.write_str("writes-global"),
            Effect::ExternalCall => f.write_str("external-call"),
            Effect::CryptoCall => f.write_str("crypto-call"),
            Effect::OracleCall => f.write_str("oracle-call"),
            Effect::BridgeCall => f.write_str("bridge-call"),
            Effect::EvmCall => f.write_str("evm-call"),
            Effect::LockAcquire(n) => write!(f, "lock-acquire({n})"),
            Effect::AssertGuard => f.write_str("assert-guard"),
            Effect::EmitsEvent => f.write_str("emits-event"),
            Effect::Returns => f.write_str("returns"),
        }
    }
}

pub type EffectSet = BTreeSet<Effect>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallClass {
    pub class: CallClassKind,
    /// Description of the pattern that decided the class, if any.
    pub matched_rule: Option<String>,
    /// Set when an EVM pattern matched, independently of `class`.
    pub evm: bool,
}

struct Compiled {
    pattern: CallPattern,
    name: Option<Regex>,
}

impl Compiled {
    fn new(p: &CallPattern) -> Result<Compiled, regex::Error> {
        Ok(Compiled { pattern: p.clone(), name: p.name.as_deref().map(Regex::new).transpose()? })
    }

    fn matches(&self, path: &[String]) -> bool {
        let Some((last, quals)) = path.split_last() else { return false };
        if self.pattern.qualifier.is_none() && self.name.is_none() {
            return false;
        }
        let q_ok = self.pattern.qualifier.as_ref().is_none_or(|q| quals.iter().any(|s| s == q));
        let n_ok = self.name.as_ref().is_none_or(|r| r.is_match(last));
        q_ok && n_ok
    }
}

/// Compiled form of [`CallPatterns`].
pub struct CallClassifier {
    classes: Vec<Compiled>,
    evm: Vec<Compiled>,
    hash: Vec<Compiled>,
    mutators: Vec<Regex>,
    abi: Vec<String>,
}

impl CallClassifier {
    pub fn new(patterns: &CallPatterns) -> Result<CallClassifier, regex::Error> {
        let compile = |ps: &[CallPattern]| ps.iter().map(Compiled::new).collect::<Result<Vec<_>, _>>();
        Ok(CallClassifier {
            classes: compile(&patterns.classes)?,
            evm: compile(&patterns.evm)?,
            hash: compile(&patterns.hash)?,
            mutators: patterns.mutators.iter().map(|m| Regex::new(m)).collect::<Result<_, _>>()?,
            abi: patterns.abi.clone(),
        })
    }

    /// Classifies a callee path. `is_local` reports whether a single-segment
    /// name is declared in the calling module.
    pub fn classify(&self, path: &[String], is_local: &dyn Fn(&str) -> bool) -> CallClass {
        let evm = self.evm.iter().any(|c| c.matches(path));
        if let [only] = path {
            if STORAGE_PRIMITIVES.contains(&only.as_str()) {
                return CallClass {
                    class: CallClassKind::StoragePrimitive,
                    matched_rule: Some("builtin storage primitive".into()),
                    evm,
                };
            }
        }
        if let Some(c) = self.classes.iter().find(|c| c.matches(path)) {
            return CallClass { class: c.pattern.class, matched_rule: Some(c.pattern.to_string()), evm };
        }
        if let [only] = path {
            if is_local(only) {
                return CallClass { class: CallClassKind::Internal, matched_rule: None, evm };
            }
        }
        CallClass { class: CallClassKind::Unknown, matched_rule: None, evm }
    }

    pub fn is_hash(&self, path: &[String]) -> bool {
        self.hash.iter().any(|c| c.matches(path))
    }

    pub fn is_mutator(&self, name: &str) -> bool {
        self.mutators.iter().any(|r| r.is_match(name))
    }

    /// `abi::decode…` style calls.
    pub fn is_abi_decode(&self, path: &[String]) -> bool {
        match path.split_last() {
            Some((last, quals)) => last.starts_with("decode") && quals.iter().any(|q| self.abi.contains(q)),
            None => false,
        }
    }
}

/// Convenience wrapper: classify `path` against `patterns`, treating
/// `module_functions` as the calling module's declarations.
pub fn classify_call(path: &[String], patterns: &CallPatterns, module_functions: &BTreeSet<String>) -> CallClass {
    match CallClassifier::new(patterns) {
        Ok(c) => c.classify(path, &|n| module_functions.contains(n)),
        Err(_) => CallClass { class: CallClassKind::Unknown, matched_rule: None, evm: false },
    }
}

/// How a name is bound inside a function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Param(Type),
    Local { ty: Option<Type>, init: Option<Expr> },
}

impl Binding {
    pub fn ty(&self) -> Option<&Type> {
        match self {
            Binding::Param(t) => Some(t),
            Binding::Local { ty, .. } => ty.as_ref(),
        }
    }

    /// True for locals initialised from `borrow_global`/`borrow_global_mut`.
    pub fn is_global_borrow(&self) -> bool {
        matches!(self, Binding::Local { init: Some(Expr { kind: ExprKind::Call { path, .. }, .. }), .. }
            if path.len() == 1 && path[0].starts_with("borrow_global"))
    }
}

pub type Bindings = BTreeMap<String, Binding>;

/// Everything needed to compute the effects of statements in one function.
pub struct EffectContext<'a> {
    pub classifier: &'a CallClassifier,
    pub module_functions: &'a BTreeSet<String>,
    pub bindings: &'a Bindings,
}

impl EffectContext<'_> {
    pub fn classify(&self, path: &[String]) -> CallClass {
        self.classifier.classify(path, &|n| self.module_functions.contains(n))
    }

    fn call_effects(&self, e: &Expr, out: &mut EffectSet) {
        for call in e.calls() {
            let ExprKind::Call { path, .. } = &call.kind else { continue };
            let cls = self.classify(path);
            if cls.evm {
                out.insert(Effect::EvmCall);
            }
            let last = path.last().map(String::as_str).unwrap_or("");
            match cls.class {
                CallClassKind::External | CallClassKind::Evm => {
                    out.insert(Effect::ExternalCall);
                }
                CallClassKind::Crypto => {
                    out.insert(Effect::CryptoCall);
                }
                CallClassKind::Oracle => {
                    out.insert(Effect::OracleCall);
                }
                CallClassKind::Bridge => {
                    out.insert(Effect::BridgeCall);
                }
                CallClassKind::Lock => {
                    out.insert(Effect::LockAcquire(last.to_string()));
                }
                CallClassKind::StoragePrimitive => {
                    match last {
                        "move_to" => {
                            out.insert(Effect::WritesGlobal);
                        }
                        "move_from" => {
                            out.insert(Effect::WritesGlobal);
                            out.insert(Effect::ReadsGlobal);
                        }
                        _ => {
                            out.insert(Effect::ReadsGlobal);
                        }
                    }
                }
                CallClassKind::Internal | CallClassKind::Unknown => {
                    if self.classifier.is_mutator(last) {
                        out.insert(Effect::WritesGlobal);
                    }
                }
            }
        }
    }

    fn read_effects(&self, e: &Expr, out: &mut EffectSet) {
        if e.names().iter().any(|n| !self.bindings.contains_key(*n)) {
            out.insert(Effect::ReadsGlobal);
        }
    }

    /// True if assigning to `target` writes global state.
    pub fn is_global_target(&self, target: &Expr) -> bool {
        match &target.kind {
            ExprKind::Name(p) if p.len() == 1 => !self.bindings.contains_key(&p[0]),
            ExprKind::Field { .. } => match target.root_name() {
                None => true,
                Some(root) => match self.bindings.get(root) {
                    None => true,
                    Some(b @ Binding::Param(_)) => b.ty().is_some_and(Type::is_mut_ref),
                    Some(b) => b.is_global_borrow() || b.ty().is_some_and(Type::is_mut_ref),
                },
            },
            _ => false,
        }
    }

    /// Effects of a non-compound statement.
    pub fn stmt_effects(&self, s: &Stmt) -> EffectSet {
        let mut out = EffectSet::new();
        match &s.kind {
            StmtKind::Assign { target, value } => {
                if self.is_global_target(target) {
                    out.insert(Effect::WritesGlobal);
                }
                // The target's own base is read only for field paths.
                if let ExprKind::Field { base, .. } = &target.kind {
                    self.read_effects(base, &mut out);
                    self.call_effects(base, &mut out);
                }
                self.read_effects(value, &mut out);
                self.call_effects(value, &mut out);
            }
            StmtKind::Assert { .. } => {
                out.insert(Effect::AssertGuard);
            }
            StmtKind::Emit { .. } => {
                out.insert(Effect::EmitsEvent);
            }
            StmtKind::Return(_) => {
                out.insert(Effect::Returns);
            }
            _ => {}
        }
        if !matches!(s.kind, StmtKind::Assign { .. }) {
            for e in s.own_exprs() {
                self.read_effects(e, &mut out);
                self.call_effects(e, &mut out);
            }
        }
        out
    }

    /// Effects of evaluating a branch or loop condition.
    pub fn cond_effects(&self, cond: &Expr) -> EffectSet {
        let mut out = EffectSet::new();
        self.read_effects(cond, &mut out);
        self.call_effects(cond, &mut out);
        out
    }
}
