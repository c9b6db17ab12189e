//! Syntax tree for the Move-like subset. Every node carries a [`Span`].

use super::span::Span;

/// Name of the synthetic function that collects statements written outside
/// any function body.
pub const TOPLEVEL_FN: &str = "__toplevel__";

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Ast {
    pub modules: Vec<ModuleDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDecl {
    /// Address literal text, e.g. `0x1`.
    pub address: Option<String>,
    pub name: String,
    /// Items written at file level without a `module` wrapper.
    pub implicit: bool,
    pub uses: Vec<UseDecl>,
    pub structs: Vec<StructDecl>,
    pub functions: Vec<FunctionDecl>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UseDecl {
    pub path: Vec<String>,
    pub wildcard: bool,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ability {
    Key,
    Store,
    Copy,
    Drop,
}

impl Ability {
    pub fn parse(s: &str) -> Option<Ability> {
        match s {
            "key" => Some(Ability::Key),
            "store" => Some(Ability::Store),
            "copy" => Some(Ability::Copy),
            "drop" => Some(Ability::Drop),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Ability::Key => "key",
            Ability::Store => "store",
            Ability::Copy => "copy",
            Ability::Drop => "drop",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericParam {
    pub name: String,
    pub constraints: Vec<Ability>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructDecl {
    pub name: String,
    pub generics: Vec<GenericParam>,
    pub abilities: Vec<Ability>,
    pub fields: Vec<FieldDecl>,
    pub span: Span,
}

impl StructDecl {
    pub fn has(&self, ability: Ability) -> bool {
        self.abilities.contains(&ability)
    }

    pub fn is_resource(&self) -> bool {
        self.has(Ability::Key) || self.has(Ability::Store)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Visibility {
    Public,
    Private,
    Entry,
    Fallback,
}

impl Visibility {
    /// Callable from outside the module.
    pub fn is_public(self) -> bool {
        matches!(self, Visibility::Public | Visibility::Entry)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReturnSyntax {
    /// `fun f(): T`
    Colon,
    /// `fun f() returns (T, U)`
    Returns,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnType {
    pub syntax: ReturnSyntax,
    pub types: Vec<Type>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDecl {
    pub visibility: Visibility,
    pub name: String,
    pub generics: Vec<GenericParam>,
    pub params: Vec<Param>,
    pub ret: Option<ReturnType>,
    /// `None` for signature-only declarations such as `store<T>(item: T);`.
    pub body: Option<Block>,
    pub span: Span,
}

impl FunctionDecl {
    pub fn is_toplevel(&self) -> bool {
        self.name == TOPLEVEL_FN
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Type {
    pub kind: TypeKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Primitive {
    U8,
    U16,
    U32,
    U64,
    U128,
    U256,
    Bool,
    Address,
    Signer,
}

impl Primitive {
    pub fn parse(s: &str) -> Option<Primitive> {
        Some(match s {
            "u8" => Primitive::U8,
            "u16" => Primitive::U16,
            "u32" => Primitive::U32,
            "u64" => Primitive::U64,
            "u128" => Primitive::U128,
            "u256" => Primitive::U256,
            "bool" => Primitive::Bool,
            "address" => Primitive::Address,
            "signer" => Primitive::Signer,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Primitive::U8 => "u8",
            Primitive::U16 => "u16",
            Primitive::U32 => "u32",
            Primitive::U64 => "u64",
            Primitive::U128 => "u128",
            Primitive::U256 => "u256",
            Primitive::Bool => "bool",
            Primitive::Address => "address",
            Primitive::Signer => "signer",
        }
    }

    pub fn is_unsigned_int(self) -> bool {
        matches!(
            self,
            Primitive::U8 | Primitive::U16 | Primitive::U32 | Primitive::U64 | Primitive::U128 | Primitive::U256
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeKind {
    Primitive(Primitive),
    Vector(Box<Type>),
    /// Struct or type parameter, possibly module-qualified.
    Named { path: Vec<String>, args: Vec<Type> },
    Ref { mutable: bool, inner: Box<Type> },
    Tuple(Vec<Type>),
}

impl Type {
    /// Strips references.
    pub fn base(&self) -> &Type {
        match &self.kind {
            TypeKind::Ref { inner, .. } => inner.base(),
            _ => self,
        }
    }

    pub fn is_mut_ref(&self) -> bool {
        matches!(self.kind, TypeKind::Ref { mutable: true, .. })
    }

    pub fn is_ref(&self) -> bool {
        matches!(self.kind, TypeKind::Ref { .. })
    }

    pub fn primitive(&self) -> Option<Primitive> {
        match self.base().kind {
            TypeKind::Primitive(p) => Some(p),
            _ => None,
        }
    }

    /// Last path segment of a named type (after stripping references).
    pub fn named(&self) -> Option<&str> {
        match &self.base().kind {
            TypeKind::Named { path, .. } => path.last().map(String::as_str),
            _ => None,
        }
    }

    /// True if `name` occurs anywhere in this type as a named type.
    pub fn mentions(&self, name: &str) -> bool {
        match &self.kind {
            TypeKind::Primitive(_) => false,
            TypeKind::Vector(t) => t.mentions(name),
            TypeKind::Named { path, args } => {
                (path.len() == 1 && path[0] == name) || args.iter().any(|a| a.mentions(name))
            }
            TypeKind::Ref { inner, .. } => inner.mentions(name),
            TypeKind::Tuple(ts) => ts.iter().any(|t| t.mentions(name)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Let { name: String, mutable: bool, ty: Option<Type>, value: Option<Expr> },
    Assign { target: Expr, value: Expr },
    If { cond: Expr, then_block: Block, else_block: Option<Block> },
    While { cond: Expr, body: Block },
    Return(Option<Expr>),
    /// `semi` is false only for a trailing value expression at the end of a block.
    Expr { expr: Expr, semi: bool },
    Assert { cond: Expr, code: Option<Expr> },
    Emit { event: String, args: Vec<Expr> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn from_token(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Mod,
            "<" => BinOp::Lt,
            ">" => BinOp::Gt,
            "<=" => BinOp::Le,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter. All binary operators are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    /// Literal text as written, e.g. `42`, `0x1`, `100u64`.
    Int(String),
    Bool(bool),
    /// Literal text including quotes and any `b`/`x` prefix.
    Str(String),
    /// `@0x1`; stores the text after `@`.
    Address(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Literal(Literal),
    /// A bare or module-qualified name that is not called.
    Name(Vec<String>),
    Field { base: Box<Expr>, field: String },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, expr: Box<Expr> },
    Call { path: Vec<String>, type_args: Vec<Type>, args: Vec<Expr> },
    Borrow { mutable: bool, expr: Box<Expr> },
    Vector(Vec<Expr>),
    Pack { name: String, fields: Vec<(String, Option<Expr>)> },
}

impl Expr {
    /// The identifier if this is an unqualified name.
    pub fn as_simple_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(p) if p.len() == 1 => Some(&p[0]),
            _ => None,
        }
    }

    /// Root identifier of a name or field path (`a` for `a.b.c`).
    pub fn root_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(p) if p.len() == 1 => Some(&p[0]),
            ExprKind::Field { base, .. } => base.root_name(),
            ExprKind::Borrow { expr, .. } => expr.root_name(),
            _ => None,
        }
    }

    pub fn int_value(&self) -> Option<u128> {
        match &self.kind {
            ExprKind::Literal(Literal::Int(t)) => parse_int_literal(t),
            _ => None,
        }
    }

    /// Visits this expression and all sub-expressions, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Literal(_) | ExprKind::Name(_) => {}
            ExprKind::Field { base, .. } => base.walk(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            ExprKind::Unary { expr, .. } | ExprKind::Borrow { expr, .. } => expr.walk(f),
            ExprKind::Call { args, .. } | ExprKind::Vector(args) => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Pack { fields, .. } => fields.iter().filter_map(|(_, e)| e.as_ref()).for_each(|e| e.walk(f)),
        }
    }

    /// True if any sub-expression satisfies `pred`.
    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found = found || pred(e));
        found
    }

    /// True if the unqualified name `name` is referenced anywhere (including shorthand pack fields).
    pub fn mentions(&self, name: &str) -> bool {
        self.any(&mut |e| match &e.kind {
            ExprKind::Name(p) => p.len() == 1 && p[0] == name,
            ExprKind::Pack { fields, .. } => fields.iter().any(|(f, v)| v.is_none() && f == name),
            _ => false,
        })
    }

    /// All unqualified names referenced.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| match &e.kind {
            ExprKind::Name(p) if p.len() == 1 => out.push(p[0].as_str()),
            ExprKind::Pack { fields, .. } => {
                out.extend(fields.iter().filter(|(_, v)| v.is_none()).map(|(f, _)| f.as_str()))
            }
            _ => {}
        });
        out
    }

    /// All call sub-expressions, pre-order.
    pub fn calls(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if matches!(e.kind, ExprKind::Call { .. }) {
                out.push(e)
            }
        });
        out
    }
}

pub fn parse_int_literal(text: &str) -> Option<u128> {
    let t = text.replace('_', "");
    let digits_end = |s: &str, hex: bool| {
        s.find(|c: char| if hex { !c.is_ascii_hexdigit() } else { !c.is_ascii_digit() }).unwrap_or(s.len())
    };
    if let Some(h) = t.strip_prefix("0x") {
        let end = digits_end(h, true);
        u128::from_str_radix(&h[..end], 16).ok()
    } else {
        let end = digits_end(&t, false);
        t[..end].parse().ok()
    }
}

impl Stmt {
    /// Expressions owned directly by this statement (not by nested blocks).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Let { value, .. } => value.iter().collect(),
            StmtKind::Assign { target, value } => vec![target, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::Return(e) => e.iter().collect(),
            StmtKind::Expr { expr, .. } => vec![expr],
            StmtKind::Assert { cond, code } => std::iter::once(cond).chain(code.iter()).collect(),
            StmtKind::Emit { args, .. } => args.iter().collect(),
        }
    }

    /// Nested blocks of compound statements.
    pub fn child_blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => std::iter::once(then_block).chain(else_block.iter()).collect(),
            StmtKind::While { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }
}

impl Block {
    /// Visits every statement in this block and nested blocks, pre-order.
    pub fn walk_stmts<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        for s in &self.stmts {
            f(s);
            for b in s.child_blocks() {
                b.walk_stmts(f);
            }
        }
    }

    pub fn all_stmts(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        self.walk_stmts(&mut |s| out.push(s));
        out
    }
}

impl Ast {
    pub fn functions(&self) -> impl Iterator<Item = (&ModuleDecl, &FunctionDecl)> {
        self.modules.iter().flat_map(|m| m.functions.iter().map(move |f| (m, f)))
    }

    /// Applies `f` to every span in the tree.
    pub fn for_each_span_mut(&mut self, f: &mut impl FnMut(&mut Span)) {
        for m in &mut self.modules {
            f(&mut m.span);
            for u in &mut m.uses {
                f(&mut u.span);
            }
            for s in &mut m.structs {
                f(&mut s.span);
                generics_spans(&mut s.generics, f);
                for fd in &mut s.fields {
                    f(&mut fd.span);
                    type_spans(&mut fd.ty, f);
                }
            }
            for func in &mut m.functions {
                f(&mut func.span);
                generics_spans(&mut func.generics, f);
                for p in &mut func.params {
                    f(&mut p.span);
                    type_spans(&mut p.ty, f);
                }
                if let Some(r) = &mut func.ret {
                    f(&mut r.span);
                    r.types.iter_mut().for_each(|t| type_spans(t, f));
                }
                if let Some(b) = &mut func.body {
                    block_spans(b, f);
                }
            }
        }
    }

    /// Visits every span in the tree.
    pub fn for_each_span(&self, f: &mut impl FnMut(&Span)) {
        // Spans are cheap to clone; reuse the mutable walker on a copy.
        let mut copy = self.clone();
        copy.for_each_span_mut(&mut |s| f(s));
    }

    /// Copy with every span cleared, for structural comparison.
    pub fn without_spans(&self) -> Ast {
        let mut copy = self.clone();
        copy.for_each_span_mut(&mut |s| *s = Span::default());
        copy
    }

    /// Structural equality: same tree shape and content, spans ignored.
    pub fn structurally_eq(&self, other: &Ast) -> bool {
        self.without_spans() == other.without_spans()
    }
}

fn generics_spans(gs: &mut [GenericParam], f: &mut impl FnMut(&mut Span)) {
    for g in gs {
        f(&mut g.span);
    }
}

fn type_spans(t: &mut Type, f: &mut impl FnMut(&mut Span)) {
    f(&mut t.span);
    match &mut t.kind {
        TypeKind::Primitive(_) => {}
        TypeKind::Vector(inner) | TypeKind::Ref { inner, .. } => type_spans(inner, f),
        TypeKind::Named { args, .. } | TypeKind::Tuple(args) => args.iter_mut().for_each(|a| type_spans(a, f)),
    }
}

fn block_spans(b: &mut Block, f: &mut impl FnMut(&mut Span)) {
    f(&mut b.span);
    for s in &mut b.stmts {
        f(&mut s.span);
        match &mut s.kind {
            StmtKind::Let { ty, value, .. } => {
                if let Some(t) = ty {
                    type_spans(t, f);
                }
                if let Some(v) = value {
                    expr_spans(v, f);
                }
            }
            StmtKind::Assign { target, value } => {
                expr_spans(target, f);
                expr_spans(value, f);
            }
            StmtKind::If { cond, then_block, else_block } => {
                expr_spans(cond, f);
                block_spans(then_block, f);
                if let Some(e) = else_block {
                    block_spans(e, f);
                }
            }
            StmtKind::While { cond, body } => {
                expr_spans(cond, f);
                block_spans(body, f);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    expr_spans(e, f);
                }
            }
            StmtKind::Expr { expr, .. } => expr_spans(expr, f),
            StmtKind::Assert { cond, code } => {
                expr_spans(cond, f);
                if let Some(c) = code {
                    expr_spans(c, f);
                }
            }
            StmtKind::Emit { args, .. } => args.iter_mut().for_each(|a| expr_spans(a, f)),
        }
    }
}

fn expr_spans(e: &mut Expr, f: &mut impl FnMut(&mut Span)) {
    f(&mut e.span);
    match &mut e.kind {
        ExprKind::Literal(_) | ExprKind::Name(_) => {}
        ExprKind::Field { base, .. } => expr_spans(base, f),
        ExprKind::Binary { lhs, rhs, .. } => {
            expr_spans(lhs, f);
            expr_spans(rhs, f);
        }
        ExprKind::Unary { expr, .. } | ExprKind::Borrow { expr, .. } => expr_spans(expr, f),
        ExprKind::Call { type_args, args, .. } => {
            type_args.iter_mut().for_each(|t| type_spans(t, f));
            args.iter_mut().for_each(|a| expr_spans(a, f));
        }
        ExprKind::Vector(items) => items.iter_mut().for_each(|a| expr_spans(a, f)),
        ExprKind::Pack { fields, .. } => fields.iter_mut().filter_map(|(_, v)| v.as_mut()).for_each(|v| expr_spans(v, f)),
    }
}
