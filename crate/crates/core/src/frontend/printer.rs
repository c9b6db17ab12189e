//! Pretty-printer. Output reparses to a structurally equal tree; comments
//! and original layout are not preserved.

use std::fmt::Write as _;

use super::ast::*;

const INDENT: &str = "    ";

pub fn pretty_print(ast: &Ast) -> String {
    let mut p = Printer { out: String::new(), depth: 0 };
    for (i, m) in ast.modules.iter().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        p.module(m);
    }
    p.out
}

/// Renders a single expression.
pub fn print_expr(e: &Expr) -> String {
    let mut p = Printer { out: String::new(), depth: 0 };
    p.expr(e);
    p.out
}

/// Renders a single type.
pub fn print_type(t: &Type) -> String {
    let mut p = Printer { out: String::new(), depth: 0 };
    p.ty(t);
    p.out
}

struct Printer {
    out: String,
    depth: usize,
}

impl Printer {
    fn line(&mut self, text: &str) {
        for _ in 0..self.depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str(INDENT);
        }
    }

    fn module(&mut self, m: &ModuleDecl) {
        if !m.implicit {
            let header = match &m.address {
                Some(a) => format!("module {a}::{} {{", m.name),
                None => format!("module {} {{", m.name),
            };
            self.line(&header);
            self.depth += 1;
        }
        for u in &m.uses {
            let mut s = format!("use {}", u.path.join("::"));
            if u.wildcard {
                s.push_str("::*");
            }
            s.push(';');
            self.line(&s);
        }
        for s in &m.structs {
            self.struct_decl(s);
        }
        for f in &m.functions {
            if m.implicit && f.is_toplevel() {
                if let Some(b) = &f.body {
                    for s in &b.stmts {
                        self.stmt(s);
                    }
                }
            } else {
                self.function(f);
            }
        }
        if !m.implicit {
            self.depth -= 1;
            self.line("}");
        }
    }

    fn generics(&mut self, gs: &[GenericParam]) {
        if gs.is_empty() {
            return;
        }
        self.out.push('<');
        for (i, g) in gs.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.out.push_str(&g.name);
            if !g.constraints.is_empty() {
                let cs: Vec<_> = g.constraints.iter().map(|a| a.as_str()).collect();
                let _ = write!(self.out, ": {}", cs.join(" + "));
            }
        }
        self.out.push('>');
    }

    fn struct_decl(&mut self, s: &StructDecl) {
        self.indent();
        let _ = write!(self.out, "struct {}", s.name);
        self.generics(&s.generics);
        if !s.abilities.is_empty() {
            let abs: Vec<_> = s.abilities.iter().map(|a| a.as_str()).collect();
            let _ = write!(self.out, " has {}", abs.join(", "));
        }
        self.out.push_str(" {\n");
        self.depth += 1;
        for f in &s.fields {
            self.indent();
            let _ = write!(self.out, "{}: ", f.name);
            self.ty(&f.ty);
            self.out.push_str(",\n");
        }
        self.depth -= 1;
        self.line("}");
    }

    fn function(&mut self, f: &FunctionDecl) {
        self.indent();
        self.out.push_str(match f.visibility {
            Visibility::Public => "public fun ",
            Visibility::Private => "fun ",
            Visibility::Entry => "entry fun ",
            Visibility::Fallback => "fallback fun ",
        });
        self.out.push_str(&f.name);
        self.generics(&f.generics);
        self.out.push('(');
        for (i, p) in f.params.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            let _ = write!(self.out, "{}: ", p.name);
            self.ty(&p.ty);
        }
        self.out.push(')');
        if let Some(r) = &f.ret {
            match r.syntax {
                ReturnSyntax::Colon => {
                    self.out.push_str(": ");
                    if let Some(t) = r.types.first() {
                        self.ty(t);
                    }
                }
                ReturnSyntax::Returns => {
                    self.out.push_str(" returns (");
                    self.type_list(&r.types);
                    self.out.push(')');
                }
            }
        }
        match &f.body {
            None => self.out.push_str(";\n"),
            Some(b) => {
                self.out.push(' ');
                self.block(b);
                self.out.push('\n');
            }
        }
    }

    fn type_list(&mut self, ts: &[Type]) {
        for (i, t) in ts.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.ty(t);
        }
    }

    fn ty(&mut self, t: &Type) {
        match &t.kind {
            TypeKind::Primitive(p) => self.out.push_str(p.as_str()),
            TypeKind::Vector(inner) => {
                self.out.push_str("vector<");
                self.ty(inner);
                self.out.push('>');
            }
            TypeKind::Named { path, args } => {
                self.out.push_str(&path.join("::"));
                if !args.is_empty() {
                    self.out.push('<');
                    self.type_list(args);
                    self.out.push('>');
                }
            }
            TypeKind::Ref { mutable, inner } => {
                self.out.push_str(if *mutable { "&mut " } else { "&" });
                self.ty(inner);
            }
            TypeKind::Tuple(items) => {
                self.out.push('(');
                self.type_list(items);
                self.out.push(')');
            }
        }
    }

    /// Writes `{ ... }` starting at the current column; leaves the cursor after `}`.
    fn block(&mut self, b: &Block) {
        self.out.push_str("{\n");
        self.depth += 1;
        for s in &b.stmts {
            self.stmt(s);
        }
        self.depth -= 1;
        self.indent();
        self.out.push('}');
    }

    fn stmt(&mut self, s: &Stmt) {
        self.indent();
        self.stmt_inline(s);
        self.out.push('\n');
    }

    fn stmt_inline(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Let { name, mutable, ty, value } => {
                self.out.push_str(if *mutable { "let mut " } else { "let " });
                self.out.push_str(name);
                if let Some(t) = ty {
                    self.out.push_str(": ");
                    self.ty(t);
                }
                if let Some(v) = value {
                    self.out.push_str(" = ");
                    self.expr(v);
                }
                self.out.push(';');
            }
            StmtKind::Assign { target, value } => {
                self.expr(target);
                self.out.push_str(" = ");
                self.expr(value);
                self.out.push(';');
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.out.push_str("if (");
                self.expr(cond);
                self.out.push_str(") ");
                self.block(then_block);
                if let Some(e) = else_block {
                    self.out.push_str(" else ");
                    match e.stmts.as_slice() {
                        [only] if matches!(only.kind, StmtKind::If { .. }) => self.stmt_inline(only),
                        _ => self.block(e),
                    }
                }
            }
            StmtKind::While { cond, body } => {
                self.out.push_str("while (");
                self.expr(cond);
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::Return(v) => {
                self.out.push_str("return");
                if let Some(v) = v {
                    self.out.push(' ');
                    self.expr(v);
                }
                self.out.push(';');
            }
            StmtKind::Expr { expr, semi } => {
                self.expr(expr);
                if *semi {
                    self.out.push(';');
                }
            }
            StmtKind::Assert { cond, code } => {
                self.out.push_str("assert(");
                self.expr(cond);
                if let Some(c) = code {
                    self.out.push_str(", ");
                    self.expr(c);
                }
                self.out.push_str(");");
            }
            StmtKind::Emit { event, args } => {
                let _ = write!(self.out, "emit {event}(");
                self.expr_list(args);
                self.out.push_str(");");
            }
        }
    }

    fn expr_list(&mut self, es: &[Expr]) {
        for (i, e) in es.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.expr(e);
        }
    }

    fn wrapped(&mut self, e: &Expr, parens: bool) {
        if parens {
            self.out.push('(');
        }
        self.expr(e);
        if parens {
            self.out.push(')');
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Literal(l) => match l {
                Literal::Int(t) | Literal::Str(t) => self.out.push_str(t),
                Literal::Bool(b) => self.out.push_str(if *b { "true" } else { "false" }),
                Literal::Address(a) => {
                    self.out.push('@');
                    self.out.push_str(a);
                }
            },
            ExprKind::Name(path) => self.out.push_str(&path.join("::")),
            ExprKind::Field { base, field } => {
                let parens = matches!(base.kind, ExprKind::Binary { .. } | ExprKind::Unary { .. } | ExprKind::Borrow { .. });
                self.wrapped(base, parens);
                self.out.push('.');
                self.out.push_str(field);
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let prec = op.precedence();
                let lp = matches!(&lhs.kind, ExprKind::Binary { op: l, .. } if l.precedence() < prec);
                let rp = matches!(&rhs.kind, ExprKind::Binary { op: r, .. } if r.precedence() <= prec);
                self.wrapped(lhs, lp);
                let _ = write!(self.out, " {} ", op.as_str());
                self.wrapped(rhs, rp);
            }
            ExprKind::Unary { op, expr } => {
                self.out.push(match op {
                    UnOp::Not => '!',
                    UnOp::Neg => '-',
                });
                self.wrapped(expr, matches!(expr.kind, ExprKind::Binary { .. }));
            }
            ExprKind::Borrow { mutable, expr } => {
                self.out.push_str(if *mutable { "&mut " } else { "&" });
                self.wrapped(expr, matches!(expr.kind, ExprKind::Binary { .. }));
            }
            ExprKind::Call { path, type_args, args } => {
                self.out.push_str(&path.join("::"));
                if !type_args.is_empty() {
                    self.out.push('<');
                    self.type_list(type_args);
                    self.out.push('>');
                }
                self.out.push('(');
                self.expr_list(args);
                self.out.push(')');
            }
            ExprKind::Vector(items) => {
                self.out.push('[');
                self.expr_list(items);
                self.out.push(']');
            }
            ExprKind::Pack { name, fields } => {
                let _ = write!(self.out, "{name} {{");
                for (i, (f, v)) in fields.iter().enumerate() {
                    self.out.push_str(if i == 0 { " " } else { ", " });
                    self.out.push_str(f);
                    if let Some(v) = v {
                        self.out.push_str(": ");
                        self.expr(v);
                    }
                }
                self.out.push_str(if fields.is_empty() { "}" } else { " }" });
            }
        }
    }
}
