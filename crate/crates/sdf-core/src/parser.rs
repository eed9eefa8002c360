//! Text → [`Program`] with positioned diagnostics.
//!
//! The grammar follows the concrete syntax of the language listings:
//! `loc A;`, `link A to B;`, `node f [d1, d2](p) = e with D;`, declarations
//! joined with `and`, expressions with `fby`, binary operators and the
//! loosest-binding postfix `e at s`. Comments run from `--` to end of line.
//!
//! Disambiguation rules (documented, deterministic):
//! - `and` at the top level of an equation's right-hand side always separates
//!   equations; boolean `and`/`or` must be parenthesized there. In an `if`
//!   condition (before `then`) and inside parentheses they are the boolean
//!   operators.
//! - `p = f(e) at A` is a located application: the `at` scopes the whole
//!   application.
//! - `if`/`then`/`else` branches holding several equations are parenthesized.

use std::fmt;

use crate::ast::*;

/// Diagnostic codes form a closed set:
/// SYN001 syntax error, SYN002 duplicate binder, SYN003 duplicate node name,
/// SYN004 application of a non-identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span,
            code: code.to_string(),
            message: message.into(),
        }
    }

    /// Render as `file:line:col: code: message`.
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            file, self.span.line, self.span.col, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.line, self.span.col, self.code, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    ChanIdent(String),
    Int(i64),
    KwLoc,
    KwLink,
    KwTo,
    KwNode,
    KwWith,
    KwAnd,
    KwOr,
    KwAt,
    KwFby,
    KwIf,
    KwThen,
    KwElse,
    KwTrue,
    KwFalse,
    KwAbs,
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Assign,
    Plus,
    Minus,
    Star,
    Less,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::ChanIdent(s) => format!("channel identifier `${s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::KwLoc => "`loc`".into(),
            Tok::KwLink => "`link`".into(),
            Tok::KwTo => "`to`".into(),
            Tok::KwNode => "`node`".into(),
            Tok::KwWith => "`with`".into(),
            Tok::KwAnd => "`and`".into(),
            Tok::KwOr => "`or`".into(),
            Tok::KwAt => "`at`".into(),
            Tok::KwFby => "`fby`".into(),
            Tok::KwIf => "`if`".into(),
            Tok::KwThen => "`then`".into(),
            Tok::KwElse => "`else`".into(),
            Tok::KwTrue => "`true`".into(),
            Tok::KwFalse => "`false`".into(),
            Tok::KwAbs => "`_abs_`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Less => "`<`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    loop {
        let (sl, sc) = (line, col);
        let c = match chars.peek().copied() {
            Some(c) => c,
            None => {
                out.push((Tok::Eof, Span { line, col, len: 0 }));
                return Ok(out);
            }
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' {
            // comment or minus
            bump!();
            if chars.peek() == Some(&'-') {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            out.push((Tok::Minus, Span { line: sl, col: sc, len: 1 }));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_digit() {
                    s.push(n);
                    bump!();
                } else {
                    break;
                }
            }
            let len = s.len() as u32;
            let val: i64 = s.parse().map_err(|_| {
                Diagnostic::error(
                    Span { line: sl, col: sc, len },
                    "SYN001",
                    format!("integer literal `{s}` out of range"),
                )
            })?;
            out.push((Tok::Int(val), Span { line: sl, col: sc, len }));
            continue;
        }
        if c == '$' {
            bump!();
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' {
                    s.push(n);
                    bump!();
                } else {
                    break;
                }
            }
            if s.is_empty() {
                return Err(Diagnostic::error(
                    Span { line: sl, col: sc, len: 1 },
                    "SYN001",
                    "`$` must be followed by a channel name",
                ));
            }
            let len = s.len() as u32 + 1;
            out.push((Tok::ChanIdent(s), Span { line: sl, col: sc, len }));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' || n == '\'' {
                    s.push(n);
                    bump!();
                } else {
                    break;
                }
            }
            let len = s.len() as u32;
            let span = Span { line: sl, col: sc, len };
            let tok = match s.as_str() {
                "loc" => Tok::KwLoc,
                "link" => Tok::KwLink,
                "to" => Tok::KwTo,
                "node" => Tok::KwNode,
                "with" => Tok::KwWith,
                "and" => Tok::KwAnd,
                "or" => Tok::KwOr,
                "at" => Tok::KwAt,
                "fby" => Tok::KwFby,
                "if" => Tok::KwIf,
                "then" => Tok::KwThen,
                "else" => Tok::KwElse,
                "true" => Tok::KwTrue,
                "false" => Tok::KwFalse,
                "_abs_" => Tok::KwAbs,
                _ => Tok::Ident(s),
            };
            out.push((tok, span));
            continue;
        }
        let sym = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '=' => Tok::Assign,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '<' => Tok::Less,
            other => {
                return Err(Diagnostic::error(
                    Span { line: sl, col: sc, len: 1 },
                    "SYN001",
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        bump!();
        out.push((sym, Span { line: sl, col: sc, len: 1 }));
    }
}

/// Expression parsing context. In `DeclRhs` position a top-level `and`/`or`
/// terminates the expression (it is the equation separator).
#[derive(Clone, Copy, PartialEq)]
enum ExprCtx {
    Full,
    DeclRhs,
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&mut self, msg: impl Into<String>) {
        let span = self.span();
        self.diags.push(Diagnostic::error(span, "SYN001", msg));
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if *self.peek() == t {
            let s = self.span();
            self.next();
            Ok(s)
        } else {
            self.error_here(format!(
                "expected {}, found {}",
                t.describe(),
                self.peek().describe()
            ));
            Err(())
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.span();
                self.next();
                Ok((s, sp))
            }
            other => {
                self.error_here(format!("expected {what}, found {}", other.describe()));
                Err(())
            }
        }
    }

    /// Skip to just past the next top-level `;` (statement resynchronization).
    fn resync(&mut self) {
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.next();
                    return;
                }
                Tok::Eof => return,
                _ => {
                    self.next();
                }
            }
        }
    }

    fn parse_program(&mut self) -> Program {
        let mut arch = Vec::new();
        let mut nodes: Vec<NodeDef> = Vec::new();
        loop {
            match self.peek() {
                Tok::KwLoc => {
                    self.next();
                    match self.expect_ident("location name") {
                        Ok((name, _)) => {
                            if self.expect(Tok::Semi).is_ok() {
                                arch.push(ArchDecl::Loc(name));
                            } else {
                                self.resync();
                            }
                        }
                        Err(()) => self.resync(),
                    }
                }
                Tok::KwLink => {
                    self.next();
                    let r = (|| -> PResult<ArchDecl> {
                        let (from, _) = self.expect_ident("location name")?;
                        self.expect(Tok::KwTo)?;
                        let (to, _) = self.expect_ident("location name")?;
                        self.expect(Tok::Semi)?;
                        Ok(ArchDecl::Link(from, to))
                    })();
                    match r {
                        Ok(a) => arch.push(a),
                        Err(()) => self.resync(),
                    }
                }
                _ => break,
            }
        }
        while *self.peek() == Tok::KwNode {
            match self.parse_node() {
                Ok(n) => {
                    if nodes.iter().any(|p| p.name == n.name) {
                        self.diags.push(Diagnostic::error(
                            Span::synth(),
                            "SYN003",
                            format!("duplicate node name `{}`", n.name),
                        ));
                    }
                    nodes.push(n);
                }
                Err(()) => self.resync(),
            }
        }
        let main = if *self.peek() == Tok::Eof {
            Decl::empty()
        } else {
            match self.parse_decl_chain() {
                Ok(d) => d,
                Err(()) => {
                    self.resync();
                    Decl::empty()
                }
            }
        };
        if *self.peek() == Tok::Semi {
            self.next();
        }
        if *self.peek() != Tok::Eof {
            self.error_here(format!(
                "expected end of input, found {}",
                self.peek().describe()
            ));
        }
        self.check_group(&main);
        Program { arch, nodes, main }
    }

    fn parse_node(&mut self) -> PResult<NodeDef> {
        self.expect(Tok::KwNode)?;
        let (name, name_span) = self.expect_ident("node name")?;
        let mut loc_params = Vec::new();
        if *self.peek() == Tok::LBracket {
            self.next();
            loop {
                let (p, sp) = self.expect_ident("location parameter")?;
                if loc_params.contains(&p) {
                    self.diags.push(Diagnostic::error(
                        sp,
                        "SYN002",
                        format!("duplicate location parameter `{p}`"),
                    ));
                }
                loc_params.push(p);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        self.expect(Tok::LParen)?;
        let input = self.parse_pattern_list(name_span)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Assign)?;
        let body_expr = self.parse_expr(ExprCtx::Full)?;
        let body_decls = if *self.peek() == Tok::KwWith {
            self.next();
            self.parse_decl_chain()?
        } else {
            Decl::empty()
        };
        self.expect(Tok::Semi)?;
        self.check_pattern_vars(&input);
        self.check_group(&body_decls);
        // `at d` mentioning a location parameter is a variable, not a constant
        let body_expr = mark_loc_vars_expr(&body_expr, &loc_params);
        let body_decls = mark_loc_vars_decl(&body_decls, &loc_params);
        Ok(NodeDef {
            name: Ident::source(name),
            loc_params,
            input,
            body_expr,
            body_decls,
        })
    }

    /// `p (, p)*` — flattened n-ary tuple.
    fn parse_pattern_list(&mut self, span: Span) -> PResult<Pattern> {
        let mut parts = vec![self.parse_pattern()?];
        while *self.peek() == Tok::Comma {
            self.next();
            parts.push(self.parse_pattern()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Pattern { kind: PatternKind::Tuple(parts), span }
        })
    }

    fn parse_pattern(&mut self) -> PResult<Pattern> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(Pattern { kind: PatternKind::Single(Ident::source(s)), span })
            }
            Tok::ChanIdent(s) => {
                self.next();
                Ok(Pattern { kind: PatternKind::Single(Ident::chan(s)), span })
            }
            Tok::LParen => {
                self.next();
                let p = self.parse_pattern_list(span)?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            other => {
                self.error_here(format!("expected pattern, found {}", other.describe()));
                Err(())
            }
        }
    }

    fn parse_decl_chain(&mut self) -> PResult<Decl> {
        let mut d = self.parse_decl_atom()?;
        while *self.peek() == Tok::KwAnd {
            self.next();
            let rhs = self.parse_decl_atom()?;
            d = Decl::and(d, rhs);
        }
        Ok(d)
    }

    fn parse_decl_atom(&mut self) -> PResult<Decl> {
        let span = self.span();
        let base = match self.peek().clone() {
            Tok::KwIf => {
                self.next();
                let cond = self.parse_expr(ExprCtx::Full)?;
                self.expect(Tok::KwThen)?;
                let t = self.parse_branch()?;
                self.expect(Tok::KwElse)?;
                let e = self.parse_branch()?;
                Decl {
                    kind: DeclKind::If(cond, Box::new(t), Box::new(e)),
                    span,
                }
            }
            Tok::LParen => {
                // Either a tuple pattern `(a, b) = e` or a grouped declaration.
                let save = self.pos;
                let saved_diags = self.diags.len();
                self.next();
                let as_pattern = (|| -> PResult<Pattern> {
                    let p = self.parse_pattern_list(span)?;
                    self.expect(Tok::RParen)?;
                    if *self.peek() == Tok::Assign {
                        Ok(p)
                    } else {
                        Err(())
                    }
                })();
                match as_pattern {
                    Ok(p) => {
                        self.diags.truncate(saved_diags);
                        self.parse_equation_rhs(p, span)?
                    }
                    Err(()) => {
                        self.pos = save;
                        self.diags.truncate(saved_diags);
                        self.next(); // consume `(`
                        let inner = self.parse_decl_chain()?;
                        self.expect(Tok::RParen)?;
                        inner
                    }
                }
            }
            Tok::Ident(_) | Tok::ChanIdent(_) => {
                let p = self.parse_pattern()?;
                self.parse_equation_rhs(p, span)?
            }
            other => {
                self.error_here(format!(
                    "expected declaration, found {}",
                    other.describe()
                ));
                return Err(());
            }
        };
        // postfix `at` annotations scope the whole declaration item
        let mut d = base;
        while *self.peek() == Tok::KwAt {
            self.next();
            let l = self.parse_location()?;
            d = Decl { kind: DeclKind::At(Box::new(d), l), span };
        }
        Ok(d)
    }

    fn parse_branch(&mut self) -> PResult<Decl> {
        // A branch is a single declaration item; several equations need
        // parentheses, which `parse_decl_atom` already handles.
        self.parse_decl_atom()
    }

    fn parse_equation_rhs(&mut self, p: Pattern, span: Span) -> PResult<Decl> {
        self.expect(Tok::Assign)?;
        self.check_pattern_vars(&p);
        // `p = f(e)` — application of a named node
        if let Tok::Ident(f) = self.peek().clone() {
            if *self.peek2() == Tok::LParen {
                self.next();
                self.next();
                let arg = self.parse_expr_list(span)?;
                self.expect(Tok::RParen)?;
                return Ok(Decl {
                    kind: DeclKind::AppEq(p, Ident::source(f), arg),
                    span,
                });
            }
        }
        if let Tok::ChanIdent(f) = self.peek().clone() {
            if *self.peek2() == Tok::LParen {
                self.next();
                self.next();
                let arg = self.parse_expr_list(span)?;
                self.expect(Tok::RParen)?;
                return Ok(Decl {
                    kind: DeclKind::AppEq(p, Ident::chan(f), arg),
                    span,
                });
            }
        }
        let e = self.parse_expr(ExprCtx::DeclRhs)?;
        if *self.peek() == Tok::LParen {
            self.diags.push(Diagnostic::error(
                self.span(),
                "SYN004",
                "application is only allowed with a named node: `p = f(e)`",
            ));
            return Err(());
        }
        Ok(Decl { kind: DeclKind::Eq(p, e), span })
    }

    fn parse_location(&mut self) -> PResult<Location> {
        let (name, _) = self.expect_ident("location name")?;
        // Whether this is a constant or a node location parameter is decided
        // during analysis; the parser records a name. Uppercase-initial names
        // follow the paper's convention for constants but both are resolved
        // against the declared architecture and the enclosing node's
        // parameter list later.
        Ok(Location::Const(name))
    }

    fn parse_expr_list(&mut self, span: Span) -> PResult<Expr> {
        let mut parts = vec![self.parse_expr(ExprCtx::Full)?];
        while *self.peek() == Tok::Comma {
            self.next();
            parts.push(self.parse_expr(ExprCtx::Full)?);
        }
        let _ = span;
        Ok(Expr::tuple(parts))
    }

    fn parse_expr(&mut self, ctx: ExprCtx) -> PResult<Expr> {
        let mut e = self.parse_fby(ctx)?;
        while *self.peek() == Tok::KwAt {
            // In declaration RHS position the `at` belongs to the enclosing
            // declaration item only for applications; for plain expressions
            // the expression-level `at` is equivalent, so take it here.
            let span = self.span();
            self.next();
            let l = self.parse_location()?;
            e = Expr::with_span(ExprKind::At(Box::new(e), l), span);
        }
        Ok(e)
    }

    fn parse_fby(&mut self, ctx: ExprCtx) -> PResult<Expr> {
        let a = self.parse_or(ctx)?;
        if *self.peek() == Tok::KwFby {
            let span = self.span();
            self.next();
            let b = self.parse_fby(ctx)?;
            return Ok(Expr::with_span(ExprKind::Fby(Box::new(a), Box::new(b)), span));
        }
        Ok(a)
    }

    fn parse_or(&mut self, ctx: ExprCtx) -> PResult<Expr> {
        let mut a = self.parse_and(ctx)?;
        while ctx == ExprCtx::Full && *self.peek() == Tok::KwOr {
            let span = self.span();
            self.next();
            let b = self.parse_and(ctx)?;
            a = Expr::with_span(
                ExprKind::BinOp(BinOp::Or, Box::new(a), Box::new(b)),
                span,
            );
        }
        Ok(a)
    }

    fn parse_and(&mut self, ctx: ExprCtx) -> PResult<Expr> {
        let mut a = self.parse_cmp(ctx)?;
        while ctx == ExprCtx::Full && *self.peek() == Tok::KwAnd {
            let span = self.span();
            self.next();
            let b = self.parse_cmp(ctx)?;
            a = Expr::with_span(
                ExprKind::BinOp(BinOp::And, Box::new(a), Box::new(b)),
                span,
            );
        }
        Ok(a)
    }

    fn parse_cmp(&mut self, ctx: ExprCtx) -> PResult<Expr> {
        let a = self.parse_add(ctx)?;
        let op = match self.peek() {
            Tok::Assign => Some(BinOp::Eq),
            Tok::Less => Some(BinOp::Lt),
            _ => None,
        };
        if let Some(op) = op {
            let span = self.span();
            self.next();
            let b = self.parse_add(ctx)?;
            return Ok(Expr::with_span(
                ExprKind::BinOp(op, Box::new(a), Box::new(b)),
                span,
            ));
        }
        Ok(a)
    }

    fn parse_add(&mut self, ctx: ExprCtx) -> PResult<Expr> {
        let mut a = self.parse_mul(ctx)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let span = self.span();
            self.next();
            let b = self.parse_mul(ctx)?;
            a = Expr::with_span(ExprKind::BinOp(op, Box::new(a), Box::new(b)), span);
        }
        Ok(a)
    }

    fn parse_mul(&mut self, ctx: ExprCtx) -> PResult<Expr> {
        let mut a = self.parse_atom(ctx)?;
        while *self.peek() == Tok::Star {
            let span = self.span();
            self.next();
            let b = self.parse_atom(ctx)?;
            a = Expr::with_span(
                ExprKind::BinOp(BinOp::Mul, Box::new(a), Box::new(b)),
                span,
            );
        }
        Ok(a)
    }

    fn parse_atom(&mut self, _ctx: ExprCtx) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.next();
                Ok(Expr::with_span(ExprKind::Imm(Lit::Int(i)), span))
            }
            Tok::KwTrue => {
                self.next();
                Ok(Expr::with_span(ExprKind::Imm(Lit::Bool(true)), span))
            }
            Tok::KwFalse => {
                self.next();
                Ok(Expr::with_span(ExprKind::Imm(Lit::Bool(false)), span))
            }
            Tok::KwAbs => {
                self.next();
                Ok(Expr::with_span(ExprKind::Imm(Lit::Abs), span))
            }
            Tok::Ident(s) => {
                self.next();
                Ok(Expr::with_span(ExprKind::VarRef(Ident::source(s)), span))
            }
            Tok::ChanIdent(s) => {
                self.next();
                Ok(Expr::with_span(ExprKind::VarRef(Ident::chan(s)), span))
            }
            Tok::LParen => {
                self.next();
                let e = self.parse_expr_list(span)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => {
                self.error_here(format!(
                    "expected expression, found {}",
                    other.describe()
                ));
                Err(())
            }
        }
    }

    fn check_pattern_vars(&mut self, p: &Pattern) {
        let vars = p.vars();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                self.diags.push(Diagnostic::error(
                    p.span,
                    "SYN002",
                    format!("duplicate pattern variable `{v}`"),
                ));
            }
        }
    }

    /// A declaration group must define each variable at most once; the two
    /// branches of an `if` define the same set and are not duplicates.
    fn check_group(&mut self, d: &Decl) {
        let vars = d.defined_vars();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                self.diags.push(Diagnostic::error(
                    d.span,
                    "SYN002",
                    format!("variable `{v}` defined more than once"),
                ));
            }
        }
        // recurse into nested groups
        self.check_subgroups(d);
    }

    fn check_subgroups(&mut self, d: &Decl) {
        match &d.kind {
            DeclKind::If(_, t, e) => {
                self.check_group(t);
                self.check_group(e);
            }
            DeclKind::And(a, b) => {
                self.check_subgroups(a);
                self.check_subgroups(b);
            }
            DeclKind::At(inner, _) => self.check_subgroups(inner),
            _ => {}
        }
    }
}

fn mark_loc(l: &Location, params: &[String]) -> Location {
    match l {
        Location::Const(name) if params.iter().any(|p| p == name) => {
            Location::Var(name.clone())
        }
        other => other.clone(),
    }
}

fn mark_loc_vars_expr(e: &Expr, params: &[String]) -> Expr {
    let kind = match &e.kind {
        ExprKind::Imm(l) => ExprKind::Imm(*l),
        ExprKind::VarRef(x) => ExprKind::VarRef(x.clone()),
        ExprKind::Pair(a, b) => ExprKind::Pair(
            Box::new(mark_loc_vars_expr(a, params)),
            Box::new(mark_loc_vars_expr(b, params)),
        ),
        ExprKind::BinOp(op, a, b) => ExprKind::BinOp(
            *op,
            Box::new(mark_loc_vars_expr(a, params)),
            Box::new(mark_loc_vars_expr(b, params)),
        ),
        ExprKind::Fby(a, b) => ExprKind::Fby(
            Box::new(mark_loc_vars_expr(a, params)),
            Box::new(mark_loc_vars_expr(b, params)),
        ),
        ExprKind::At(a, l) => ExprKind::At(
            Box::new(mark_loc_vars_expr(a, params)),
            mark_loc(l, params),
        ),
    };
    Expr::with_span(kind, e.span)
}

fn mark_loc_vars_decl(d: &Decl, params: &[String]) -> Decl {
    let kind = match &d.kind {
        DeclKind::Eq(p, e) => DeclKind::Eq(p.clone(), mark_loc_vars_expr(e, params)),
        DeclKind::AppEq(p, f, e) => {
            DeclKind::AppEq(p.clone(), f.clone(), mark_loc_vars_expr(e, params))
        }
        DeclKind::And(a, b) => DeclKind::And(
            Box::new(mark_loc_vars_decl(a, params)),
            Box::new(mark_loc_vars_decl(b, params)),
        ),
        DeclKind::If(c, t, e) => DeclKind::If(
            mark_loc_vars_expr(c, params),
            Box::new(mark_loc_vars_decl(t, params)),
            Box::new(mark_loc_vars_decl(e, params)),
        ),
        DeclKind::At(inner, l) => DeclKind::At(
            Box::new(mark_loc_vars_decl(inner, params)),
            mark_loc(l, params),
        ),
        DeclKind::Empty => DeclKind::Empty,
    };
    Decl { kind, span: d.span }
}

/// Parse a full program. Returns the parsed program or at least one
/// diagnostic. Never panics on any input.
pub fn parse_program(text: &str) -> Result<Program, Vec<Diagnostic>> {
    let toks = match lex(text) {
        Ok(t) => t,
        Err(d) => return Err(vec![d]),
    };
    let mut p = Parser { toks, pos: 0, diags: Vec::new() };
    let prog = p.parse_program();
    if p.diags.is_empty() {
        Ok(prog)
    } else {
        Err(p.diags)
    }
}

/// Parse a declaration chain in isolation (used by tests and golden files).
pub fn parse_decl(text: &str) -> Result<Decl, Vec<Diagnostic>> {
    let toks = match lex(text) {
        Ok(t) => t,
        Err(d) => return Err(vec![d]),
    };
    let mut p = Parser { toks, pos: 0, diags: Vec::new() };
    match p.parse_decl_chain() {
        Ok(d) if p.diags.is_empty() => {
            if *p.peek() == Tok::Semi {
                p.next();
            }
            if *p.peek() != Tok::Eof {
                p.error_here("trailing input after declaration");
                return Err(p.diags);
            }
            Ok(d)
        }
        _ => Err(p.diags),
    }
}

/// Parse a single expression in isolation.
pub fn parse_expr(text: &str) -> Result<Expr, Vec<Diagnostic>> {
    let toks = match lex(text) {
        Ok(t) => t,
        Err(d) => return Err(vec![d]),
    };
    let mut p = Parser { toks, pos: 0, diags: Vec::new() };
    match p.parse_expr(ExprCtx::Full) {
        Ok(e) if p.diags.is_empty() => {
            if *p.peek() != Tok::Eof {
                p.error_here("trailing input after expression");
                return Err(p.diags);
            }
            Ok(e)
        }
        _ => Err(p.diags),
    }
}
