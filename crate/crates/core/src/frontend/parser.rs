//! Recursive-descent parser producing an [`Ast`].
//!
//! The grammar accepts bare top-level statements and signature-only
//! declarations. Statements that appear outside any function body are
//! collected into an implicit function named [`TOPLEVEL_FN`] inside an
//! implicit module.

use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::span::Span;
use super::token::{Token, TokenKind};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    /// What the parser would have accepted at this position.
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

type PResult<T> = Result<T, ParseError>;

const ITEM_KEYWORDS: &[&str] = &["module", "public", "fun", "entry", "fallback", "struct", "use"];

/// Parses a token stream (as produced by `tokenize`) into an AST. Comment
/// tokens are ignored. Either the whole file parses, or every error found
/// after recovery is returned.
pub fn parse(tokens: &[Token]) -> Result<Ast, Vec<ParseError>> {
    let toks: Vec<Token> = tokens.iter().filter(|t| t.kind != TokenKind::Comment).cloned().collect();
    let mut p = Parser { toks, pos: 0, errors: Vec::new() };
    if p.toks.last().is_none_or(|t| t.kind != TokenKind::Eof) {
        let span = p.toks.last().map(|t| t.span.clone()).unwrap_or_default();
        p.toks.push(Token { kind: TokenKind::Eof, text: String::new(), span });
    }
    let ast = p.file();
    if p.errors.is_empty() {
        Ok(ast)
    } else {
        Err(p.errors)
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
}

fn describe(tok: &Token) -> String {
    match tok.kind {
        TokenKind::Eof => "end of file".to_string(),
        _ => format!("`{}`", tok.text),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        self.peek_n(0)
    }

    fn peek_n(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_punct(p)
    }

    fn at_kw(&self, k: &str) -> bool {
        self.peek().is_keyword(k)
    }

    fn at_ident(&self, text: &str) -> bool {
        self.peek().is(TokenKind::Identifier, text)
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn span_from(&self, start: &Span) -> Span {
        if self.pos == 0 {
            return start.clone();
        }
        start.to(&self.prev_span())
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        let wanted = expected.join(" or ");
        ParseError {
            span: tok.span.clone(),
            message: format!("expected {wanted}, found {}", describe(tok)),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.at_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.error(&[&format!("`{p}`")]))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<Token> {
        if self.at_kw(k) {
            Ok(self.bump())
        } else {
            Err(self.error(&[&format!("`{k}`")]))
        }
    }

    fn expect_ident(&mut self) -> PResult<Token> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.bump())
        } else {
            Err(self.error(&["identifier"]))
        }
    }

    // ----- recovery -----

    /// Skips to just past the next `;`, or to the next `}` that closes the
    /// enclosing block, whichever comes first.
    fn recover_stmt(&mut self, start: usize) {
        if self.pos == start && !self.at_punct("}") {
            self.bump();
        }
        let mut depth = 0usize;
        while !self.at_eof() {
            if self.at_punct("{") {
                depth += 1;
            } else if self.at_punct("}") {
                if depth == 0 {
                    return;
                }
                depth -= 1;
                if depth == 0 {
                    self.bump();
                    return;
                }
            } else if depth == 0 && self.at_punct(";") {
                self.bump();
                return;
            }
            self.bump();
        }
    }

    /// Skips to the next item keyword or closing `}` at the current nesting level.
    fn recover_item(&mut self, start: usize) {
        if self.pos == start {
            self.bump();
        }
        let mut depth = 0usize;
        while !self.at_eof() {
            if self.at_punct("{") {
                depth += 1;
            } else if self.at_punct("}") {
                if depth == 0 {
                    return;
                }
                depth -= 1;
            } else if depth == 0 && ITEM_KEYWORDS.iter().any(|k| self.at_kw(k)) {
                return;
            }
            self.bump();
        }
    }

    // ----- items -----

    fn file(&mut self) -> Ast {
        let mut modules = Vec::new();
        let mut implicit = ModuleDecl {
            address: None,
            name: String::new(),
            implicit: true,
            uses: Vec::new(),
            structs: Vec::new(),
            functions: Vec::new(),
            span: Span::default(),
        };
        let mut implicit_bounds: Option<(Span, Span)> = None;
        let mut toplevel: Option<usize> = None;

        while !self.at_eof() {
            let start = self.pos;
            let first = self.peek().span.clone();
            if self.at_kw("module") {
                match self.module() {
                    Ok(m) => modules.push(m),
                    Err(e) => {
                        self.errors.push(e);
                        self.recover_item(start);
                        if self.at_punct("}") {
                            self.bump();
                        }
                    }
                }
                continue;
            }
            if self.at_item_start() {
                self.item(&mut implicit);
            } else {
                match self.stmt() {
                    Ok(stmt) => {
                        let idx = *toplevel.get_or_insert_with(|| {
                            implicit.functions.push(FunctionDecl {
                                visibility: Visibility::Private,
                                name: TOPLEVEL_FN.to_string(),
                                generics: Vec::new(),
                                params: Vec::new(),
                                ret: None,
                                body: Some(Block { stmts: Vec::new(), span: stmt.span.clone() }),
                                span: stmt.span.clone(),
                            });
                            implicit.functions.len() - 1
                        });
                        let f = &mut implicit.functions[idx];
                        let body = f.body.as_mut().expect("toplevel body");
                        body.span = body.span.to(&stmt.span);
                        f.span = body.span.clone();
                        body.stmts.push(stmt);
                    }
                    Err(e) => {
                        self.errors.push(e);
                        self.recover_stmt(start);
                        if self.pos == start || self.at_punct("}") {
                            self.bump();
                        }
                    }
                }
            }
            if self.pos > start {
                let last = self.prev_span();
                implicit_bounds = Some(match implicit_bounds {
                    None => (first, last),
                    Some((a, _)) => (a, last),
                });
            }
        }

        let has_items = !implicit.uses.is_empty() || !implicit.structs.is_empty() || !implicit.functions.is_empty();
        if has_items {
            if let Some((a, b)) = implicit_bounds {
                implicit.span = a.to(&b);
            }
            modules.insert(0, implicit);
        }
        Ast { modules }
    }

    /// True at `public`/`fun`/`struct`/... or at a signature-only
    /// declaration written without `fun`, such as `store<T>(item: T);`.
    fn at_item_start(&self) -> bool {
        if ["public", "fun", "entry", "fallback", "struct", "use"].iter().any(|k| self.at_kw(k)) {
            return true;
        }
        self.at_bare_signature()
    }

    fn at_bare_signature(&self) -> bool {
        if self.peek().kind != TokenKind::Identifier {
            return false;
        }
        let mut i = 1;
        if self.peek_n(i).is_punct("<") {
            let mut depth = 0;
            loop {
                let t = self.peek_n(i);
                if t.kind == TokenKind::Eof {
                    return false;
                }
                if t.is_punct("<") {
                    depth += 1;
                } else if t.is_punct(">") {
                    depth -= 1;
                    if depth == 0 {
                        i += 1;
                        break;
                    }
                } else if t.is_punct(";") || t.is_punct("{") || t.is_punct("(") {
                    return false;
                }
                i += 1;
            }
        }
        self.peek_n(i).is_punct("(")
            && self.peek_n(i + 1).kind == TokenKind::Identifier
            && self.peek_n(i + 2).is_punct(":")
    }

    fn item(&mut self, module: &mut ModuleDecl) {
        let start = self.pos;
        let result = if self.at_kw("use") {
            self.use_decl().map(|u| module.uses.push(u))
        } else if self.at_kw("struct") {
            self.struct_decl().map(|s| module.structs.push(s))
        } else {
            self.function().map(|f| module.functions.push(f))
        };
        if let Err(e) = result {
            self.errors.push(e);
            self.recover_item(start);
        }
    }

    fn module(&mut self) -> PResult<ModuleDecl> {
        let start = self.expect_kw("module")?.span;
        let first = if self.peek().kind == TokenKind::IntLiteral || self.peek().kind == TokenKind::Identifier {
            self.bump()
        } else {
            return Err(self.error(&["module name", "address"]));
        };
        let (address, name) = if self.eat_punct("::") {
            (Some(first.text), self.expect_ident()?.text)
        } else if first.kind == TokenKind::Identifier {
            (None, first.text)
        } else {
            return Err(self.error(&["`::`"]));
        };
        self.expect_punct("{")?;
        let mut m = ModuleDecl {
            address,
            name,
            implicit: false,
            uses: Vec::new(),
            structs: Vec::new(),
            functions: Vec::new(),
            span: start.clone(),
        };
        while !self.at_punct("}") && !self.at_eof() {
            if self.at_item_start() {
                self.item(&mut m);
            } else {
                let at = self.pos;
                self.errors.push(self.error(&["`use`", "`struct`", "`fun`", "`}`"]));
                self.recover_item(at);
            }
        }
        self.expect_punct("}")?;
        m.span = self.span_from(&start);
        Ok(m)
    }

    fn use_decl(&mut self) -> PResult<UseDecl> {
        let start = self.expect_kw("use")?.span;
        let mut path = vec![self.path_segment()?];
        let mut wildcard = false;
        while self.eat_punct("::") {
            if self.eat_punct("*") {
                wildcard = true;
                break;
            }
            path.push(self.path_segment()?);
        }
        self.expect_punct(";")?;
        Ok(UseDecl { path, wildcard, span: self.span_from(&start) })
    }

    fn path_segment(&mut self) -> PResult<String> {
        match self.peek().kind {
            TokenKind::Identifier | TokenKind::IntLiteral => Ok(self.bump().text),
            _ => Err(self.error(&["path segment"])),
        }
    }

    fn struct_decl(&mut self) -> PResult<StructDecl> {
        let start = self.expect_kw("struct")?.span;
        let name = self.expect_ident()?.text;
        let generics = self.generic_params()?;
        let mut abilities = Vec::new();
        if self.at_kw("has") {
            self.bump();
            loop {
                abilities.push(self.ability()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct("{")?;
        let mut fields = Vec::new();
        while !self.at_punct("}") {
            let fstart = self.expect_ident()?;
            self.expect_punct(":")?;
            let ty = self.ty()?;
            fields.push(FieldDecl { name: fstart.text, ty, span: self.span_from(&fstart.span) });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        Ok(StructDecl { name, generics, abilities, fields, span: self.span_from(&start) })
    }

    fn ability(&mut self) -> PResult<Ability> {
        let tok = self.peek().clone();
        match Ability::parse(&tok.text) {
            Some(a) if tok.kind == TokenKind::Identifier => {
                self.bump();
                Ok(a)
            }
            _ => Err(self.error(&["`key`", "`store`", "`copy`", "`drop`"])),
        }
    }

    fn generic_params(&mut self) -> PResult<Vec<GenericParam>> {
        let mut out = Vec::new();
        if !self.eat_punct("<") {
            return Ok(out);
        }
        loop {
            let name = self.expect_ident()?;
            let mut constraints = Vec::new();
            if self.eat_punct(":") {
                loop {
                    constraints.push(self.ability()?);
                    if !self.eat_punct("+") {
                        break;
                    }
                }
            }
            out.push(GenericParam { name: name.text, constraints, span: self.span_from(&name.span) });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(">")?;
        Ok(out)
    }

    fn function(&mut self) -> PResult<FunctionDecl> {
        let start = self.peek().span.clone();
        let visibility = if self.at_kw("public") {
            self.bump();
            if self.at_kw("entry") {
                self.bump();
                Visibility::Entry
            } else {
                Visibility::Public
            }
        } else if self.at_kw("entry") {
            self.bump();
            Visibility::Entry
        } else if self.at_kw("fallback") {
            self.bump();
            Visibility::Fallback
        } else {
            Visibility::Private
        };
        let bare = visibility == Visibility::Private && self.at_bare_signature();
        if !bare {
            self.expect_kw("fun")?;
        }
        let name = self.expect_ident()?.text;
        let generics = self.generic_params()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.at_punct(")") {
            let pname = self.expect_ident()?;
            self.expect_punct(":")?;
            let ty = self.ty()?;
            params.push(Param { name: pname.text, ty, span: self.span_from(&pname.span) });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(")")?;

        let ret = if self.at_punct(":") {
            let rstart = self.bump().span;
            let ty = self.ty()?;
            Some(ReturnType { syntax: ReturnSyntax::Colon, types: vec![ty], span: self.span_from(&rstart) })
        } else if self.at_ident("returns") {
            let rstart = self.bump().span;
            self.expect_punct("(")?;
            let mut types = Vec::new();
            while !self.at_punct(")") {
                types.push(self.ty()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
            Some(ReturnType { syntax: ReturnSyntax::Returns, types, span: self.span_from(&rstart) })
        } else {
            None
        };

        let body = if self.eat_punct(";") {
            None
        } else if self.at_punct("{") {
            Some(self.block()?)
        } else {
            return Err(self.error(&["`{`", "`;`"]));
        };
        Ok(FunctionDecl { visibility, name, generics, params, ret, body, span: self.span_from(&start) })
    }

    // ----- types -----

    fn ty(&mut self) -> PResult<Type> {
        let start = self.peek().span.clone();
        let kind = if self.eat_punct("&") {
            let mutable = self.at_kw("mut");
            if mutable {
                self.bump();
            }
            TypeKind::Ref { mutable, inner: Box::new(self.ty()?) }
        } else if self.eat_punct("(") {
            let mut items = Vec::new();
            while !self.at_punct(")") {
                items.push(self.ty()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
            TypeKind::Tuple(items)
        } else if self.peek().kind == TokenKind::Identifier {
            let first = self.bump().text;
            if !self.at_punct("::") {
                if let Some(p) = Primitive::parse(&first) {
                    return Ok(Type { kind: TypeKind::Primitive(p), span: self.span_from(&start) });
                }
                if first == "vector" && self.at_punct("<") {
                    self.bump();
                    let inner = self.ty()?;
                    self.expect_punct(">")?;
                    return Ok(Type { kind: TypeKind::Vector(Box::new(inner)), span: self.span_from(&start) });
                }
            }
            let mut path = vec![first];
            while self.eat_punct("::") {
                path.push(self.expect_ident()?.text);
            }
            let args = self.type_args()?;
            TypeKind::Named { path, args }
        } else {
            return Err(self.error(&["type"]));
        };
        Ok(Type { kind, span: self.span_from(&start) })
    }

    fn type_args(&mut self) -> PResult<Vec<Type>> {
        let mut args = Vec::new();
        if self.eat_punct("<") {
            loop {
                args.push(self.ty()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(">")?;
        }
        Ok(args)
    }

    // ----- statements -----

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect_punct("{")?.span;
        let mut stmts = Vec::new();
        while !self.at_punct("}") && !self.at_eof() {
            let at = self.pos;
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(e) => {
                    self.errors.push(e);
                    self.recover_stmt(at);
                }
            }
        }
        self.expect_punct("}")?;
        Ok(Block { stmts, span: self.span_from(&start) })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span.clone();
        let kind = if self.at_kw("let") {
            self.bump();
            let mutable = self.at_kw("mut");
            if mutable {
                self.bump();
            }
            let name = self.expect_ident()?.text;
            let ty = if self.eat_punct(":") { Some(self.ty()?) } else { None };
            let value = if self.eat_punct("=") { Some(self.expr()?) } else { None };
            self.expect_punct(";")?;
            StmtKind::Let { name, mutable, ty, value }
        } else if self.at_kw("if") {
            return self.if_stmt();
        } else if self.at_kw("while") {
            self.bump();
            let cond = self.paren_cond()?;
            let body = self.block()?;
            self.eat_punct(";");
            StmtKind::While { cond, body }
        } else if self.at_kw("return") {
            self.bump();
            let value = if self.at_punct(";") || self.at_punct("}") { None } else { Some(self.expr()?) };
            if !self.at_punct("}") {
                self.expect_punct(";")?;
            }
            StmtKind::Return(value)
        } else if self.at_kw("assert") {
            self.bump();
            self.eat_punct("!");
            self.expect_punct("(")?;
            let cond = self.expr()?;
            let code = if self.eat_punct(",") { Some(self.expr()?) } else { None };
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            StmtKind::Assert { cond, code }
        } else if self.at_kw("emit") {
            self.bump();
            let mut event = vec![self.expect_ident()?.text];
            while self.eat_punct("::") {
                event.push(self.expect_ident()?.text);
            }
            let args = self.call_args()?;
            self.expect_punct(";")?;
            StmtKind::Emit { event: event.join("::"), args }
        } else if self.peek().kind == TokenKind::Keyword && !self.at_kw("true") && !self.at_kw("false") {
            return Err(self.error(&["statement"]));
        } else {
            let expr = self.expr()?;
            if self.eat_punct("=") {
                if !is_assignable(&expr) {
                    return Err(ParseError {
                        span: expr.span.clone(),
                        message: "invalid assignment target".into(),
                        expected: vec!["name".into(), "field path".into()],
                    });
                }
                let value = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Assign { target: expr, value }
            } else if self.eat_punct(";") {
                StmtKind::Expr { expr, semi: true }
            } else if self.at_punct("}") {
                StmtKind::Expr { expr, semi: false }
            } else {
                return Err(self.error(&["`;`", "`=`"]));
            }
        };
        Ok(Stmt { kind, span: self.span_from(&start) })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("if")?.span;
        let cond = self.paren_cond()?;
        let then_block = self.block()?;
        let else_block = if self.at_kw("else") {
            self.bump();
            if self.at_kw("if") {
                let nested = self.if_stmt()?;
                Some(Block { span: nested.span.clone(), stmts: vec![nested] })
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        self.eat_punct(";");
        Ok(Stmt { kind: StmtKind::If { cond, then_block, else_block }, span: self.span_from(&start) })
    }

    fn paren_cond(&mut self) -> PResult<Expr> {
        self.expect_punct("(")?;
        let e = self.expr()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    // ----- expressions -----

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.peek().span.clone();
        let mut lhs = self.unary()?;
        loop {
            let tok = self.peek();
            let op = match (tok.kind, BinOp::from_token(&tok.text)) {
                (TokenKind::Punct, Some(op)) if op.precedence() >= min_prec => op,
                _ => break,
            };
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span: self.span_from(&start),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek().span.clone();
        let kind = if self.eat_punct("!") {
            ExprKind::Unary { op: UnOp::Not, expr: Box::new(self.unary()?) }
        } else if self.eat_punct("-") {
            ExprKind::Unary { op: UnOp::Neg, expr: Box::new(self.unary()?) }
        } else if self.eat_punct("&") {
            let mutable = self.at_kw("mut");
            if mutable {
                self.bump();
            }
            ExprKind::Borrow { mutable, expr: Box::new(self.unary()?) }
        } else {
            return self.postfix();
        };
        Ok(Expr { kind, span: self.span_from(&start) })
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.peek().span.clone();
        let mut e = self.primary()?;
        while self.eat_punct(".") {
            let field = self.expect_ident()?.text;
            e = Expr { kind: ExprKind::Field { base: Box::new(e), field }, span: self.span_from(&start) };
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.peek().span.clone();
        let tok = self.peek().clone();
        let kind = match tok.kind {
            TokenKind::IntLiteral if !self.peek_n(1).is_punct("::") => {
                self.bump();
                ExprKind::Literal(Literal::Int(tok.text))
            }
            TokenKind::StringLiteral => {
                self.bump();
                ExprKind::Literal(Literal::Str(tok.text))
            }
            TokenKind::Keyword if tok.text == "true" || tok.text == "false" => {
                self.bump();
                ExprKind::Literal(Literal::Bool(tok.text == "true"))
            }
            TokenKind::Punct if tok.text == "@" => {
                self.bump();
                match self.peek().kind {
                    TokenKind::IntLiteral | TokenKind::Identifier => {
                        ExprKind::Literal(Literal::Address(self.bump().text))
                    }
                    _ => return Err(self.error(&["address"])),
                }
            }
            TokenKind::Punct if tok.text == "[" => {
                self.bump();
                let mut items = Vec::new();
                while !self.at_punct("]") {
                    items.push(self.expr()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("]")?;
                ExprKind::Vector(items)
            }
            TokenKind::Punct if tok.text == "(" => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(inner);
            }
            TokenKind::Identifier | TokenKind::IntLiteral => return self.path_expr(),
            _ => return Err(self.error(&["expression"])),
        };
        Ok(Expr { kind, span: self.span_from(&start) })
    }

    fn path_expr(&mut self) -> PResult<Expr> {
        let start = self.peek().span.clone();
        let mut path = vec![self.bump().text];
        while self.at_punct("::") && self.peek_n(1).kind == TokenKind::Identifier {
            self.bump();
            path.push(self.bump().text);
        }

        let mut type_args = Vec::new();
        if self.at_punct("<") {
            if let Some(args) = self.speculative_type_args() {
                type_args = args;
            }
        }
        if self.at_punct("(") {
            let args = self.call_args()?;
            return Ok(Expr { kind: ExprKind::Call { path, type_args, args }, span: self.span_from(&start) });
        }
        if path.len() == 1 && self.at_pack_open(&path[0]) {
            let name = path.pop().unwrap_or_default();
            self.bump();
            let mut fields = Vec::new();
            while !self.at_punct("}") {
                let f = self.expect_ident()?.text;
                let value = if self.eat_punct(":") { Some(self.expr()?) } else { None };
                fields.push((f, value));
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct("}")?;
            return Ok(Expr { kind: ExprKind::Pack { name, fields }, span: self.span_from(&start) });
        }
        if path.len() == 1 && path[0].starts_with(|c: char| c.is_ascii_digit()) {
            return Err(ParseError {
                span: start,
                message: "address used as a path without a module".into(),
                expected: vec!["`::`".into()],
            });
        }
        Ok(Expr { kind: ExprKind::Name(path), span: self.span_from(&start) })
    }

    /// `Name {` opens a struct pack when the name is capitalized and the
    /// brace is followed by `}` or `field:`/`field,`/`field }`.
    fn at_pack_open(&self, name: &str) -> bool {
        if !name.starts_with(|c: char| c.is_ascii_uppercase()) || !self.at_punct("{") {
            return false;
        }
        let a = self.peek_n(1);
        let b = self.peek_n(2);
        a.is_punct("}")
            || (a.kind == TokenKind::Identifier && (b.is_punct(":") || b.is_punct(",") || b.is_punct("}")))
    }

    /// Tries `<T, ...>` followed by `(`; restores the position otherwise.
    fn speculative_type_args(&mut self) -> Option<Vec<Type>> {
        let save = self.pos;
        match self.type_args() {
            Ok(args) if self.at_punct("(") => Some(args),
            _ => {
                self.pos = save;
                None
            }
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        while !self.at_punct(")") {
            args.push(self.expr()?);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }
}

fn is_assignable(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Name(p) => p.len() == 1,
        ExprKind::Field { base, .. } => is_assignable(base) || matches!(base.kind, ExprKind::Call { .. }),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::token::tokenize;

    fn parse_str(src: &str) -> Result<Ast, Vec<ParseError>> {
        parse(&tokenize(src, "t.move").expect("lex"))
    }

    fn body(ast: &Ast) -> &Block {
        ast.modules[0].functions[0].body.as_ref().unwrap()
    }

    #[test]
    fn minimal_function_with_return() {
        let ast = parse_str("public fun f() { return; }").unwrap();
        assert_eq!(ast.modules.len(), 1);
        let f = &ast.modules[0].functions[0];
        assert_eq!(f.visibility, Visibility::Public);
        assert_eq!(body(&ast).stmts.len(), 1);
        assert!(matches!(body(&ast).stmts[0].kind, StmtKind::Return(None)));
    }

    #[test]
    fn module_with_struct_and_generic_borrow() {
        let src = "module Counter {\n    struct State has key { count: u64 }\n\n    public fun increment(addr: address) {\n        let state = borrow_global<State>(addr);\n        state.count = state.count + 1;\n    }\n}\n";
        let ast = parse_str(src).unwrap();
        let m = &ast.modules[0];
        assert!(!m.implicit);
        assert_eq!(m.name, "Counter");
        assert_eq!(m.structs[0].abilities, vec![Ability::Key]);
        let StmtKind::Let { value: Some(v), .. } = &m.functions[0].body.as_ref().unwrap().stmts[0].kind else {
            panic!("expected let")
        };
        let ExprKind::Call { path, type_args, .. } = &v.kind else { panic!("expected call") };
        assert_eq!(path, &["borrow_global"]);
        assert_eq!(type_args[0].named(), Some("State"));
    }

    #[test]
    fn fallback_visibility() {
        let ast = parse_str("fallback fun handle() {\n    transfer();\n}").unwrap();
        assert_eq!(ast.modules[0].functions[0].visibility, Visibility::Fallback);
    }

    #[test]
    fn bare_statements_become_toplevel_function() {
        let ast = parse_str("let mut i = 0;\nwhile (i >= 0) {\n    i = i + 1;\n}\n").unwrap();
        let f = &ast.modules[0].functions[0];
        assert!(ast.modules[0].implicit);
        assert!(f.is_toplevel());
        assert_eq!(body(&ast).stmts.len(), 2);
    }

    #[test]
    fn bare_signature_declaration() {
        let ast = parse_str("store<T>(item: T); // note").unwrap();
        let f = &ast.modules[0].functions[0];
        assert_eq!(f.name, "store");
        assert!(f.body.is_none());
        assert!(f.generics[0].constraints.is_empty());
    }

    #[test]
    fn bare_call_is_not_a_declaration() {
        let ast = parse_str("call_internal();").unwrap();
        assert!(ast.modules[0].functions[0].is_toplevel());
    }

    #[test]
    fn returns_syntax_and_tail_expression() {
        let ast = parse_str("public fun view_config() returns (Config) {\n    config\n}").unwrap();
        let f = &ast.modules[0].functions[0];
        assert_eq!(f.ret.as_ref().unwrap().syntax, ReturnSyntax::Returns);
        assert!(matches!(body(&ast).stmts[0].kind, StmtKind::Expr { semi: false, .. }));
    }

    #[test]
    fn comparison_is_not_mistaken_for_type_args() {
        let ast = parse_str("fun f(a: u64, b: u64) { if (a < b) { return; } }").unwrap();
        let StmtKind::If { cond, .. } = &body(&ast).stmts[0].kind else { panic!() };
        assert!(matches!(cond.kind, ExprKind::Binary { op: BinOp::Lt, .. }));
    }

    #[test]
    fn precedence_and_associativity() {
        let ast = parse_str("x = a - b - c * d;").unwrap();
        let StmtKind::Assign { value, .. } = &body(&ast).stmts[0].kind else { panic!() };
        let ExprKind::Binary { op: BinOp::Sub, lhs, rhs } = &value.kind else { panic!() };
        assert!(matches!(lhs.kind, ExprKind::Binary { op: BinOp::Sub, .. }));
        assert!(matches!(rhs.kind, ExprKind::Binary { op: BinOp::Mul, .. }));
    }

    #[test]
    fn else_if_chains() {
        let ast = parse_str("fun f(x: u64) { if (x == 1) { a(); } else if (x == 2) { b(); } else { c(); } }").unwrap();
        let StmtKind::If { else_block: Some(e), .. } = &body(&ast).stmts[0].kind else { panic!() };
        assert!(matches!(e.stmts[0].kind, StmtKind::If { else_block: Some(_), .. }));
    }

    #[test]
    fn recovers_and_reports_multiple_errors() {
        let errs = parse_str("fun f() {\n    let = 1;\n    x = ;\n    ok();\n}\nfun g() { ) }").unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().all(|e| !e.expected.is_empty()));
        assert_eq!(errs[0].span.line, 2);
        assert_eq!(errs[1].span.line, 3);
    }

    #[test]
    fn missing_semicolon_hint() {
        let errs = parse_str("fun f() { a() b(); }").unwrap_err();
        assert!(errs[0].expected.contains(&"`;`".to_string()));
    }

    #[test]
    fn module_with_address_and_wildcard_use() {
        let ast = parse_str("module 0x1::Registry {\n    use Lib::*;\n}").unwrap();
        let m = &ast.modules[0];
        assert_eq!(m.address.as_deref(), Some("0x1"));
        assert!(m.uses[0].wildcard);
    }

    #[test]
    fn pack_and_vector_literals() {
        let ast = parse_str("fun f(a: u64) { let t = Token { value: a, owner }; batch_ops([op1, op2]); }").unwrap();
        let StmtKind::Let { value: Some(v), .. } = &body(&ast).stmts[0].kind else { panic!() };
        assert!(matches!(&v.kind, ExprKind::Pack { fields, .. } if fields.len() == 2));
    }

    #[test]
    fn empty_input_is_empty_ast() {
        assert!(parse_str("").unwrap().modules.is_empty());
        assert!(parse_str("// only a comment\n").unwrap().modules.is_empty());
    }
}
