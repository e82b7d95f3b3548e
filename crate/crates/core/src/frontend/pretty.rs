use std::fmt::Write;

use super::ast::*;

/// Renders a program back to Universal source.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for f in &p.functions {
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| format!("{} {}", p.ty, p.var.name))
            .collect();
        let _ = write!(out, "{} {}({}) ", f.ret, f.name, params.join(", "));
        stmt(&mut out, &f.body, 0, true);
    }
    for s in &p.toplevel {
        stmt(&mut out, s, 0, false);
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// `inline` means the caller already wrote the indentation (or a header on the same line).
fn stmt(out: &mut String, s: &Stmt, level: usize, inline: bool) {
    if !inline {
        indent(out, level);
    }
    match &s.kind {
        StmtKind::Decl { ty, var, init } => {
            let _ = write!(out, "{ty} {}", var.name);
            if let Some(e) = init {
                out.push_str(" = ");
                expr(out, e, 0);
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { var, value } => {
            let _ = write!(out, "{} = ", var.name);
            expr(out, value, 0);
            out.push_str(";\n");
        }
        StmtKind::While { cond, body } => {
            out.push_str("while (");
            expr(out, cond, 0);
            out.push(')');
            sub_stmt(out, body, level);
        }
        StmtKind::If { cond, then, els } => {
            out.push_str("if (");
            expr(out, cond, 0);
            out.push(')');
            sub_stmt(out, then, level);
            if let Some(e) = els {
                indent(out, level);
                out.push_str("else");
                sub_stmt(out, e, level);
            }
        }
        StmtKind::Break => out.push_str("break;\n"),
        StmtKind::Return(None) => out.push_str("return;\n"),
        StmtKind::Return(Some(e)) => {
            out.push_str("return ");
            expr(out, e, 0);
            out.push_str(";\n");
        }
        StmtKind::Expr(e) => {
            expr(out, e, 0);
            out.push_str(";\n");
        }
        StmtKind::Print => out.push_str("print();\n"),
        StmtKind::Assert(e) => {
            out.push_str("assert(");
            expr(out, e, 0);
            out.push_str(");\n");
        }
        StmtKind::Block(b) => {
            out.push_str("{\n");
            for s in b {
                stmt(out, s, level + 1, false);
            }
            indent(out, level);
            out.push_str("}\n");
        }
    }
}

fn sub_stmt(out: &mut String, s: &Stmt, level: usize) {
    if matches!(s.kind, StmtKind::Block(_)) {
        out.push(' ');
        stmt(out, s, level, true);
    } else {
        out.push('\n');
        stmt(out, s, level + 1, false);
    }
}

fn escape(s: &str, quote: char) -> String {
    let mut r = String::new();
    for c in s.chars() {
        match c {
            '\n' => r.push_str("\\n"),
            '\t' => r.push_str("\\t"),
            '\r' => r.push_str("\\r"),
            '\0' => r.push_str("\\0"),
            '\\' => r.push_str("\\\\"),
            c if c == quote => {
                r.push('\\');
                r.push(c);
            }
            c => r.push(c),
        }
    }
    r
}

/// Writes `e`, parenthesized when its precedence is below `min_prec`.
fn expr(out: &mut String, e: &Expr, min_prec: u8) {
    match &e.kind {
        ExprKind::IntLit(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::CharLit(c) => {
            let _ = write!(out, "'{}'", escape(&(*c as char).to_string(), '\''));
        }
        ExprKind::StrLit(s) => {
            let _ = write!(out, "\"{}\"", escape(s, '"'));
        }
        ExprKind::Var(id) => out.push_str(&id.name),
        ExprKind::Unary(op, a) => {
            let paren = min_prec > 6;
            if paren {
                out.push('(');
            }
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            expr(out, a, 6);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Binary(op, a, b) => {
            let p = op.precedence();
            let paren = p < min_prec;
            if paren {
                out.push('(');
            }
            expr(out, a, p);
            let _ = write!(out, " {} ", op.symbol());
            expr(out, b, p + 1);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Index(s, i) => {
            expr(out, s, 7);
            out.push('[');
            expr(out, i, 0);
            out.push(']');
        }
        ExprKind::Length(s) => {
            out.push('|');
            expr(out, s, 0);
            out.push('|');
        }
        ExprKind::Rand(lo, hi) => {
            out.push_str("rand(");
            expr(out, lo, 0);
            out.push_str(", ");
            expr(out, hi, 0);
            out.push(')');
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, a, 0);
            }
            out.push(')');
        }
    }
}

/// Renders a single expression.
pub fn pretty_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e, 0);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn declaration() {
        assert_eq!(pretty(&parse("int i = 1;", "t").unwrap()), "int i = 1;\n");
    }

    #[test]
    fn empty_program() {
        assert_eq!(pretty(&parse("", "t").unwrap()), "");
    }

    #[test]
    fn parenthesizes_by_precedence() {
        let p = parse("int x = (1 + 2) * -(3 - (4 - 5));", "t").unwrap();
        assert_eq!(pretty(&p), "int x = (1 + 2) * -(3 - (4 - 5));\n");
    }
}
