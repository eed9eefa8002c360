//! Canonical concrete-syntax printer. `parse(print(ast))` is structurally the
//! identity; the projection pass and the CLI rely on the output being
//! byte-deterministic.
//!
//! Printing conventions (all accepted back by the parser):
//! - boolean `and`/`or` expressions are always parenthesized, since an
//!   unparenthesized `and` at the top level of an equation separates
//!   equations instead;
//! - `if`/`then`/`else` branches are always parenthesized;
//! - tuples print flattened along their right spine: `(a, b, c)`.

use std::fmt::Write;

use crate::ast::*;

/// Precedence levels, loosest first. `at` is the loosest postfix: it
/// annotates everything to its left up to the nearest parenthesis.
const P_AT: u8 = 1;
const P_FBY: u8 = 2;
const P_CMP: u8 = 5;
const P_ADD: u8 = 6;
const P_MUL: u8 = 7;
const P_ATOM: u8 = 8;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for a in &p.arch {
        match a {
            ArchDecl::Loc(name) => {
                let _ = writeln!(out, "loc {name};");
            }
            ArchDecl::Link(from, to) => {
                let _ = writeln!(out, "link {from} to {to};");
            }
        }
    }
    if !p.arch.is_empty() {
        out.push('\n');
    }
    for n in &p.nodes {
        out.push_str(&print_node(n));
        out.push('\n');
    }
    if !p.main.is_empty() {
        if !p.nodes.is_empty() {
            out.push('\n');
        }
        out.push_str(&print_decl_block(&p.main, 0));
        out.push_str(";\n");
    }
    out
}

pub fn print_node(n: &NodeDef) -> String {
    let mut out = String::new();
    let _ = write!(out, "node {}", n.name);
    if !n.loc_params.is_empty() {
        let _ = write!(out, " [{}]", n.loc_params.join(", "));
    }
    let _ = write!(out, "({})", print_pattern_inner(&n.input));
    let _ = write!(out, " = {}", print_expr(&n.body_expr));
    if !n.body_decls.is_empty() {
        out.push_str(" with\n");
        out.push_str(&print_decl_block(&n.body_decls, 2));
    }
    out.push_str(";\n");
    out
}

/// Print an `and`-chain of declarations, one item per line.
fn print_decl_block(d: &Decl, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let items = d.items();
    let mut lines = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let lead = if i == 0 { pad.clone() } else { format!("{}and ", " ".repeat(indent.saturating_sub(2)).as_str()) };
        lines.push(format!("{lead}{}", print_decl_item(item)));
    }
    lines.join("\n")
}

fn print_decl_item(d: &Decl) -> String {
    match &d.kind {
        DeclKind::Eq(p, e) => format!("{} = {}", print_pattern(p), print_expr(e)),
        DeclKind::AppEq(p, f, e) => {
            format!("{} = {}({})", print_pattern(p), f, print_call_arg(e))
        }
        DeclKind::If(c, t, e) => format!(
            "if {} then ({}) else ({})",
            print_expr(c),
            print_decl_inline(t),
            print_decl_inline(e)
        ),
        DeclKind::At(inner, l) => match &inner.kind {
            DeclKind::And(_, _) => format!("({}) at {}", print_decl_inline(inner), l),
            _ => format!("{} at {}", print_decl_item(inner), l),
        },
        DeclKind::And(_, _) | DeclKind::Empty => {
            // items() never yields these
            format!("({})", print_decl_inline(d))
        }
    }
}

fn print_decl_inline(d: &Decl) -> String {
    d.items()
        .iter()
        .map(|i| print_decl_item(i))
        .collect::<Vec<_>>()
        .join(" and ")
}

pub fn print_pattern(p: &Pattern) -> String {
    match &p.kind {
        PatternKind::Single(x) => x.to_string(),
        PatternKind::Tuple(ps) => format!(
            "({})",
            ps.iter().map(print_pattern).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn print_pattern_inner(p: &Pattern) -> String {
    match &p.kind {
        PatternKind::Single(x) => x.to_string(),
        PatternKind::Tuple(ps) => {
            ps.iter().map(print_pattern).collect::<Vec<_>>().join(", ")
        }
    }
}

/// Call arguments print without the extra tuple parentheses: `f(a, b)`.
fn print_call_arg(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Pair(_, _) => {
            let parts = flatten_pair(e);
            parts.iter().map(|p| print_expr(p)).collect::<Vec<_>>().join(", ")
        }
        _ => print_expr(e),
    }
}

fn flatten_pair(e: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    let mut cur = e;
    while let ExprKind::Pair(a, b) = &cur.kind {
        out.push(a.as_ref());
        cur = b;
    }
    out.push(cur);
    out
}

pub fn print_expr(e: &Expr) -> String {
    print_prec(e, 0)
}

fn print_prec(e: &Expr, min: u8) -> String {
    let (text, prec) = match &e.kind {
        ExprKind::Imm(l) => (l.to_string(), P_ATOM),
        ExprKind::VarRef(x) => (x.to_string(), P_ATOM),
        ExprKind::Pair(_, _) => {
            let parts = flatten_pair(e);
            (
                format!(
                    "({})",
                    parts.iter().map(|p| print_prec(p, 0)).collect::<Vec<_>>().join(", ")
                ),
                P_ATOM,
            )
        }
        ExprKind::BinOp(op, a, b) => match op {
            // boolean connectives are self-parenthesizing
            BinOp::And | BinOp::Or => (
                format!("({} {} {})", print_prec(a, P_CMP), op.symbol(), print_prec(b, P_CMP)),
                P_ATOM,
            ),
            BinOp::Eq | BinOp::Lt => (
                format!("{} {} {}", print_prec(a, P_ADD), op.symbol(), print_prec(b, P_ADD)),
                P_CMP,
            ),
            BinOp::Add | BinOp::Sub => (
                format!("{} {} {}", print_prec(a, P_ADD), op.symbol(), print_prec(b, P_MUL)),
                P_ADD,
            ),
            BinOp::Mul => (
                format!("{} {} {}", print_prec(a, P_MUL), op.symbol(), print_prec(b, P_ATOM)),
                P_MUL,
            ),
        },
        ExprKind::Fby(a, b) => (
            format!("{} fby {}", print_prec(a, P_FBY + 1), print_prec(b, P_FBY)),
            P_FBY,
        ),
        ExprKind::At(a, l) => (format!("{} at {}", print_prec(a, P_AT), l), P_AT),
    };
    if prec < min {
        format!("({text})")
    } else {
        text
    }
}
