//! Abstract syntax for programs, architecture declarations, node definitions,
//! equations and expressions, plus the substitution and traversal utilities
//! the rest of the pipeline is built on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Identifier namespaces. Channel names generated by the compiler live in a
/// namespace disjoint from source identifiers; concretely they print with a
/// leading `$`, which the lexer maps back to [`Namespace::Chan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Namespace {
    Source,
    Chan,
}

/// A stream (or node) identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident {
    pub name: String,
    pub ns: Namespace,
}

impl Ident {
    pub fn source(name: impl Into<String>) -> Self {
        Ident { name: name.into(), ns: Namespace::Source }
    }

    pub fn chan(name: impl Into<String>) -> Self {
        Ident { name: name.into(), ns: Namespace::Chan }
    }

    pub fn is_chan(&self) -> bool {
        self.ns == Namespace::Chan
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ns {
            Namespace::Source => write!(f, "{}", self.name),
            Namespace::Chan => write!(f, "${}", self.name),
        }
    }
}

/// A location is either a symbolic constant declared with `loc`, or a
/// location variable bound by a node's location-parameter list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Const(String),
    Var(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Const(s) | Location::Var(s) => write!(f, "{s}"),
        }
    }
}

/// Literal stream values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lit {
    Int(i64),
    Bool(bool),
    /// The irrelevant value `_abs_` standing for data absent at a location.
    /// Only appears in projected programs.
    Abs,
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(i) => write!(f, "{i}"),
            Lit::Bool(b) => write!(f, "{b}"),
            Lit::Abs => write!(f, "_abs_"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

/// 1-based source position with a length, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl Span {
    pub fn synth() -> Self {
        Span { line: 1, col: 1, len: 0 }
    }
}

impl Default for Span {
    fn default() -> Self {
        Span::synth()
    }
}

/// An expression. Equality ignores spans (structural equality), which is what
/// the parse-print round-trip and the golden projection tests rely on.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Imm(Lit),
    VarRef(Ident),
    Pair(Box<Expr>, Box<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    Fby(Box<Expr>, Box<Expr>),
    At(Box<Expr>, Location),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, span: Span::synth() }
    }

    pub fn with_span(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn imm(l: Lit) -> Self {
        Expr::new(ExprKind::Imm(l))
    }

    pub fn var(id: Ident) -> Self {
        Expr::new(ExprKind::VarRef(id))
    }

    pub fn pair(a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Pair(Box::new(a), Box::new(b)))
    }

    /// Right-factored tuple out of a non-empty component list.
    pub fn tuple(mut parts: Vec<Expr>) -> Self {
        assert!(!parts.is_empty());
        let mut e = parts.pop().unwrap();
        while let Some(p) = parts.pop() {
            e = Expr::pair(p, e);
        }
        e
    }
}

/// A binding pattern. Tuples are n-ary in the AST even though the grammar is
/// binary; `(x, y, z)` destructures the right-factored product `x, (y, z)`.
#[derive(Debug, Clone)]
pub struct Pattern {
    pub kind: PatternKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternKind {
    Single(Ident),
    Tuple(Vec<Pattern>),
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Pattern {
    pub fn new(kind: PatternKind) -> Self {
        Pattern { kind, span: Span::synth() }
    }

    pub fn single(id: Ident) -> Self {
        Pattern::new(PatternKind::Single(id))
    }

    pub fn tuple(parts: Vec<Pattern>) -> Self {
        assert!(parts.len() >= 2);
        Pattern::new(PatternKind::Tuple(parts))
    }

    /// Variables bound by the pattern, in syntactic order.
    pub fn vars(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Ident>) {
        match &self.kind {
            PatternKind::Single(x) => out.push(x.clone()),
            PatternKind::Tuple(ps) => {
                for p in ps {
                    p.collect_vars(out);
                }
            }
        }
    }
}

/// A declaration (set of equations).
#[derive(Debug, Clone)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeclKind {
    /// `p = e`
    Eq(Pattern, Expr),
    /// `p = f(e)` — application of a named node or node-valued variable.
    AppEq(Pattern, Ident, Expr),
    And(Box<Decl>, Box<Decl>),
    If(Expr, Box<Decl>, Box<Decl>),
    /// `D at s` — a located declaration. The concrete syntax
    /// `y = g(x) at A` places the whole application at `A`.
    At(Box<Decl>, Location),
    Empty,
}

impl PartialEq for Decl {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Decl {
    pub fn new(kind: DeclKind) -> Self {
        Decl { kind, span: Span::synth() }
    }

    pub fn empty() -> Self {
        Decl::new(DeclKind::Empty)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.kind, DeclKind::Empty)
    }

    /// `And` with the `Empty` identity applied on either side.
    pub fn and(a: Decl, b: Decl) -> Decl {
        if a.is_empty() {
            b
        } else if b.is_empty() {
            a
        } else {
            Decl::new(DeclKind::And(Box::new(a), Box::new(b)))
        }
    }

    /// Conjoin a list of declarations, dropping `Empty` parts.
    pub fn and_all(items: Vec<Decl>) -> Decl {
        let mut out = Decl::empty();
        for d in items {
            out = Decl::and(out, d);
        }
        out
    }

    /// Flatten the `And` spine into a list of non-`And`, non-`Empty` items.
    pub fn items(&self) -> Vec<&Decl> {
        let mut out = Vec::new();
        self.collect_items(&mut out);
        out
    }

    fn collect_items<'a>(&'a self, out: &mut Vec<&'a Decl>) {
        match &self.kind {
            DeclKind::And(a, b) => {
                a.collect_items(out);
                b.collect_items(out);
            }
            DeclKind::Empty => {}
            _ => out.push(self),
        }
    }

    /// Peel `At` wrappers, returning the inner declaration and the
    /// annotations from innermost to outermost.
    pub fn peel_at(&self) -> (&Decl, Vec<&Location>) {
        let mut locs = Vec::new();
        let mut cur = self;
        while let DeclKind::At(inner, l) = &cur.kind {
            locs.insert(0, l);
            cur = inner;
        }
        (cur, locs)
    }

    /// Variables defined by this declaration, in syntactic order. For `If`,
    /// the two branches are required elsewhere to define the same set; the
    /// then-branch is used here.
    pub fn defined_vars(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.collect_defined(&mut out);
        out
    }

    fn collect_defined(&self, out: &mut Vec<Ident>) {
        match &self.kind {
            DeclKind::Eq(p, _) | DeclKind::AppEq(p, _, _) => p.collect_vars(out),
            DeclKind::And(a, b) => {
                a.collect_defined(out);
                b.collect_defined(out);
            }
            DeclKind::If(_, t, _) => t.collect_defined(out),
            DeclKind::At(d, _) => d.collect_defined(out),
            DeclKind::Empty => {}
        }
    }

    /// Stream variables read by this declaration, including applied node
    /// names: `AppEq(p, f, e)` contributes `{f} ∪ free_vars(e)`.
    pub fn reads(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_reads(&mut out);
        out
    }

    fn collect_reads(&self, out: &mut BTreeSet<Ident>) {
        match &self.kind {
            DeclKind::Eq(_, e) => collect_free(e, out),
            DeclKind::AppEq(_, f, e) => {
                out.insert(f.clone());
                collect_free(e, out);
            }
            DeclKind::And(a, b) => {
                a.collect_reads(out);
                b.collect_reads(out);
            }
            DeclKind::If(c, t, e) => {
                collect_free(c, out);
                t.collect_reads(out);
                e.collect_reads(out);
            }
            DeclKind::At(d, _) => d.collect_reads(out),
            DeclKind::Empty => {}
        }
    }
}

/// The stream variables an expression reads. Location names are not streams
/// and do not appear here.
pub fn free_vars(e: &Expr) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_free(e, &mut out);
    out
}

fn collect_free(e: &Expr, out: &mut BTreeSet<Ident>) {
    match &e.kind {
        ExprKind::Imm(_) => {}
        ExprKind::VarRef(x) => {
            out.insert(x.clone());
        }
        ExprKind::Pair(a, b) | ExprKind::BinOp(_, a, b) | ExprKind::Fby(a, b) => {
            collect_free(a, out);
            collect_free(b, out);
        }
        ExprKind::At(a, _) => collect_free(a, out),
    }
}

/// An architecture declaration item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArchDecl {
    Loc(String),
    Link(String, String),
}

/// A node definition `node f [d1,...] (p) = e with D`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDef {
    pub name: Ident,
    pub loc_params: Vec<String>,
    pub input: Pattern,
    pub body_expr: Expr,
    pub body_decls: Decl,
}

/// A whole program: architecture, node definitions, main declarations.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub arch: Vec<ArchDecl>,
    pub nodes: Vec<NodeDef>,
    pub main: Decl,
}

impl Program {
    pub fn node(&self, name: &str) -> Option<&NodeDef> {
        self.nodes.iter().find(|n| n.name.name == name)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AstError {
    #[error("unbound location variable `{0}` in node body")]
    UnboundLocationVar(String),
}

/// Replace every location variable occurring in the node body according to
/// `m`. The domain of `m` must cover every location variable the body
/// mentions; the result has an empty location-parameter list.
pub fn subst_locations(
    n: &NodeDef,
    m: &BTreeMap<String, Location>,
) -> Result<NodeDef, AstError> {
    let body_expr = subst_loc_expr(&n.body_expr, m)?;
    let body_decls = subst_loc_decl(&n.body_decls, m)?;
    Ok(NodeDef {
        name: n.name.clone(),
        loc_params: Vec::new(),
        input: n.input.clone(),
        body_expr,
        body_decls,
    })
}

fn subst_loc(l: &Location, m: &BTreeMap<String, Location>) -> Result<Location, AstError> {
    match l {
        Location::Const(_) => Ok(l.clone()),
        Location::Var(v) => m
            .get(v)
            .cloned()
            .ok_or_else(|| AstError::UnboundLocationVar(v.clone())),
    }
}

fn subst_loc_expr(e: &Expr, m: &BTreeMap<String, Location>) -> Result<Expr, AstError> {
    let kind = match &e.kind {
        ExprKind::Imm(l) => ExprKind::Imm(*l),
        ExprKind::VarRef(x) => ExprKind::VarRef(x.clone()),
        ExprKind::Pair(a, b) => ExprKind::Pair(
            Box::new(subst_loc_expr(a, m)?),
            Box::new(subst_loc_expr(b, m)?),
        ),
        ExprKind::BinOp(op, a, b) => ExprKind::BinOp(
            *op,
            Box::new(subst_loc_expr(a, m)?),
            Box::new(subst_loc_expr(b, m)?),
        ),
        ExprKind::Fby(a, b) => ExprKind::Fby(
            Box::new(subst_loc_expr(a, m)?),
            Box::new(subst_loc_expr(b, m)?),
        ),
        ExprKind::At(a, l) => {
            ExprKind::At(Box::new(subst_loc_expr(a, m)?), subst_loc(l, m)?)
        }
    };
    Ok(Expr::with_span(kind, e.span))
}

fn subst_loc_decl(d: &Decl, m: &BTreeMap<String, Location>) -> Result<Decl, AstError> {
    let kind = match &d.kind {
        DeclKind::Eq(p, e) => DeclKind::Eq(p.clone(), subst_loc_expr(e, m)?),
        DeclKind::AppEq(p, f, e) => {
            DeclKind::AppEq(p.clone(), f.clone(), subst_loc_expr(e, m)?)
        }
        DeclKind::And(a, b) => DeclKind::And(
            Box::new(subst_loc_decl(a, m)?),
            Box::new(subst_loc_decl(b, m)?),
        ),
        DeclKind::If(c, t, e) => DeclKind::If(
            subst_loc_expr(c, m)?,
            Box::new(subst_loc_decl(t, m)?),
            Box::new(subst_loc_decl(e, m)?),
        ),
        DeclKind::At(inner, l) => {
            DeclKind::At(Box::new(subst_loc_decl(inner, m)?), subst_loc(l, m)?)
        }
        DeclKind::Empty => DeclKind::Empty,
    };
    Ok(Decl { kind, span: d.span })
}

/// Rename a set of identifiers throughout an expression.
pub fn rename_expr(e: &Expr, map: &BTreeMap<Ident, Ident>) -> Expr {
    let kind = match &e.kind {
        ExprKind::Imm(l) => ExprKind::Imm(*l),
        ExprKind::VarRef(x) => {
            ExprKind::VarRef(map.get(x).cloned().unwrap_or_else(|| x.clone()))
        }
        ExprKind::Pair(a, b) => {
            ExprKind::Pair(Box::new(rename_expr(a, map)), Box::new(rename_expr(b, map)))
        }
        ExprKind::BinOp(op, a, b) => ExprKind::BinOp(
            *op,
            Box::new(rename_expr(a, map)),
            Box::new(rename_expr(b, map)),
        ),
        ExprKind::Fby(a, b) => {
            ExprKind::Fby(Box::new(rename_expr(a, map)), Box::new(rename_expr(b, map)))
        }
        ExprKind::At(a, l) => ExprKind::At(Box::new(rename_expr(a, map)), l.clone()),
    };
    Expr::with_span(kind, e.span)
}

pub fn rename_pattern(p: &Pattern, map: &BTreeMap<Ident, Ident>) -> Pattern {
    let kind = match &p.kind {
        PatternKind::Single(x) => {
            PatternKind::Single(map.get(x).cloned().unwrap_or_else(|| x.clone()))
        }
        PatternKind::Tuple(ps) => {
            PatternKind::Tuple(ps.iter().map(|p| rename_pattern(p, map)).collect())
        }
    };
    Pattern { kind, span: p.span }
}

pub fn rename_decl(d: &Decl, map: &BTreeMap<Ident, Ident>) -> Decl {
    let kind = match &d.kind {
        DeclKind::Eq(p, e) => DeclKind::Eq(rename_pattern(p, map), rename_expr(e, map)),
        DeclKind::AppEq(p, f, e) => DeclKind::AppEq(
            rename_pattern(p, map),
            map.get(f).cloned().unwrap_or_else(|| f.clone()),
            rename_expr(e, map),
        ),
        DeclKind::And(a, b) => DeclKind::And(
            Box::new(rename_decl(a, map)),
            Box::new(rename_decl(b, map)),
        ),
        DeclKind::If(c, t, e) => DeclKind::If(
            rename_expr(c, map),
            Box::new(rename_decl(t, map)),
            Box::new(rename_decl(e, map)),
        ),
        DeclKind::At(inner, l) => {
            DeclKind::At(Box::new(rename_decl(inner, map)), l.clone())
        }
        DeclKind::Empty => DeclKind::Empty,
    };
    Decl { kind, span: d.span }
}

/// Strip every `at` annotation from an expression (used by the At-erasure
/// tests: annotations must not alter the centralized semantics).
pub fn strip_at_expr(e: &Expr) -> Expr {
    let kind = match &e.kind {
        ExprKind::Imm(l) => ExprKind::Imm(*l),
        ExprKind::VarRef(x) => ExprKind::VarRef(x.clone()),
        ExprKind::Pair(a, b) => {
            ExprKind::Pair(Box::new(strip_at_expr(a)), Box::new(strip_at_expr(b)))
        }
        ExprKind::BinOp(op, a, b) => {
            ExprKind::BinOp(*op, Box::new(strip_at_expr(a)), Box::new(strip_at_expr(b)))
        }
        ExprKind::Fby(a, b) => {
            ExprKind::Fby(Box::new(strip_at_expr(a)), Box::new(strip_at_expr(b)))
        }
        ExprKind::At(a, _) => return strip_at_expr(a),
    };
    Expr::with_span(kind, e.span)
}

pub fn strip_at_decl(d: &Decl) -> Decl {
    let kind = match &d.kind {
        DeclKind::Eq(p, e) => DeclKind::Eq(p.clone(), strip_at_expr(e)),
        DeclKind::AppEq(p, f, e) => DeclKind::AppEq(p.clone(), f.clone(), strip_at_expr(e)),
        DeclKind::And(a, b) => {
            DeclKind::And(Box::new(strip_at_decl(a)), Box::new(strip_at_decl(b)))
        }
        DeclKind::If(c, t, e) => DeclKind::If(
            strip_at_expr(c),
            Box::new(strip_at_decl(t)),
            Box::new(strip_at_decl(e)),
        ),
        DeclKind::At(inner, _) => return strip_at_decl(inner),
        DeclKind::Empty => DeclKind::Empty,
    };
    Decl { kind, span: d.span }
}

pub fn strip_at_program(p: &Program) -> Program {
    Program {
        arch: p.arch.clone(),
        nodes: p
            .nodes
            .iter()
            .map(|n| NodeDef {
                name: n.name.clone(),
                loc_params: n.loc_params.clone(),
                input: n.input.clone(),
                body_expr: strip_at_expr(&n.body_expr),
                body_decls: strip_at_decl(&n.body_decls),
            })
            .collect(),
        main: strip_at_decl(&p.main),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Expr {
        Expr::var(Ident::source(name))
    }

    #[test]
    fn free_vars_traversal() {
        // x + (0 fby y) -> {x, y}
        let e = Expr::new(ExprKind::BinOp(
            BinOp::Add,
            Box::new(v("x")),
            Box::new(Expr::new(ExprKind::Fby(
                Box::new(Expr::imm(Lit::Int(0))),
                Box::new(v("y")),
            ))),
        ));
        let fv = free_vars(&e);
        assert_eq!(
            fv.into_iter().collect::<Vec<_>>(),
            vec![Ident::source("x"), Ident::source("y")]
        );
        assert!(free_vars(&Expr::imm(Lit::Int(1))).is_empty());
    }

    #[test]
    fn app_reads_include_callee() {
        let d = Decl::new(DeclKind::AppEq(
            Pattern::single(Ident::source("p")),
            Ident::source("f"),
            v("e0"),
        ));
        let r = d.reads();
        assert!(r.contains(&Ident::source("f")));
        assert!(r.contains(&Ident::source("e0")));
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn subst_locations_replaces_and_errors() {
        // node h [d1,d2] (x) = z with y = x at d1 and z = y at d2
        let body = Decl::and(
            Decl::new(DeclKind::Eq(
                Pattern::single(Ident::source("y")),
                Expr::new(ExprKind::At(Box::new(v("x")), Location::Var("d1".into()))),
            )),
            Decl::new(DeclKind::Eq(
                Pattern::single(Ident::source("z")),
                Expr::new(ExprKind::At(Box::new(v("y")), Location::Var("d2".into()))),
            )),
        );
        let n = NodeDef {
            name: Ident::source("h"),
            loc_params: vec!["d1".into(), "d2".into()],
            input: Pattern::single(Ident::source("x")),
            body_expr: v("z"),
            body_decls: body,
        };
        let mut m = BTreeMap::new();
        m.insert("d1".to_string(), Location::Const("A".into()));
        m.insert("d2".to_string(), Location::Const("A".into()));
        let s = subst_locations(&n, &m).unwrap();
        assert!(s.loc_params.is_empty());
        // every `at` is now `at A`
        for item in s.body_decls.items() {
            if let DeclKind::Eq(_, e) = &item.kind {
                if let ExprKind::At(_, l) = &e.kind {
                    assert_eq!(l, &Location::Const("A".into()));
                }
            }
        }

        // identity on a node with no loc params
        let plain = NodeDef {
            name: Ident::source("g"),
            loc_params: vec![],
            input: Pattern::single(Ident::source("x")),
            body_expr: v("x"),
            body_decls: Decl::empty(),
        };
        let out = subst_locations(&plain, &BTreeMap::new()).unwrap();
        assert_eq!(out, plain);

        // missing binding for d2
        let mut partial = BTreeMap::new();
        partial.insert("d1".to_string(), Location::Const("A".into()));
        assert_eq!(
            subst_locations(&n, &partial),
            Err(AstError::UnboundLocationVar("d2".into()))
        );
    }

    #[test]
    fn subst_locations_identity_mapping() {
        let n = NodeDef {
            name: Ident::source("h"),
            loc_params: vec!["d1".into()],
            input: Pattern::single(Ident::source("x")),
            body_expr: Expr::new(ExprKind::At(
                Box::new(v("x")),
                Location::Var("d1".into()),
            )),
            body_decls: Decl::empty(),
        };
        let mut m = BTreeMap::new();
        m.insert("d1".to_string(), Location::Var("d1".into()));
        let s = subst_locations(&n, &m).unwrap();
        assert_eq!(s.body_expr, n.body_expr);
    }

    #[test]
    fn and_identity() {
        let eq = Decl::new(DeclKind::Eq(
            Pattern::single(Ident::source("x")),
            Expr::imm(Lit::Int(1)),
        ));
        assert_eq!(Decl::and(Decl::empty(), eq.clone()), eq);
        assert_eq!(Decl::and(eq.clone(), Decl::empty()), eq);
    }
}
