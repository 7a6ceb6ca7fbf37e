//! Canonical printing of core programs in syntax the parser accepts.

use std::fmt::Write;

use super::ast::{Expr, Formula, Program, Rhs, Term};
use crate::refinement::primitives;

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for (name, def) in &p.defs {
        let _ = writeln!(out, "{name}({}) {{", def.params.join(", "));
        expr_into(&def.body, 1, &mut out);
        out.push_str("\n}\n\n");
    }
    expr_into(&p.entry, 0, &mut out);
    out.push('\n');
    out
}

pub fn expr(e: &Expr) -> String {
    let mut out = String::new();
    expr_into(e, 0, &mut out);
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn expr_into(e: &Expr, level: usize, out: &mut String) {
    indent(level, out);
    match e {
        Expr::Var(x) => out.push_str(x),
        Expr::Let { var, rhs: r, body } => {
            let _ = writeln!(out, "let {var} = {} in", rhs(r));
            expr_into(body, level, out);
        }
        Expr::IfZero { cond, then_branch, else_branch } => {
            let _ = writeln!(out, "ifz {cond} then {{");
            expr_into(then_branch, level + 1, out);
            out.push('\n');
            indent(level, out);
            out.push_str("} else {\n");
            expr_into(else_branch, level + 1, out);
            out.push('\n');
            indent(level, out);
            out.push('}');
        }
        Expr::Assign { target, value, rest } => {
            let _ = writeln!(out, "{target} := {value};");
            expr_into(rest, level, out);
        }
        Expr::Alias { lhs, rhs, rest } => {
            let _ = writeln!(out, "alias({lhs} = {rhs});");
            expr_into(rest, level, out);
        }
        Expr::AliasDeref { lhs, rhs, rest } => {
            let _ = writeln!(out, "alias({lhs} = *{rhs});");
            expr_into(rest, level, out);
        }
        Expr::Assert { formula: f, rest } => {
            let _ = writeln!(out, "assert({});", formula(f));
            expr_into(rest, level, out);
        }
        Expr::Seq(a, b) => {
            match a.as_ref() {
                Expr::Var(_) | Expr::IfZero { .. } => {
                    let mut first = String::new();
                    expr_into(a, level, &mut first);
                    out.push_str(first.trim_start());
                }
                _ => {
                    out.push_str("{\n");
                    expr_into(a, level + 1, out);
                    out.push('\n');
                    indent(level, out);
                    out.push('}');
                }
            }
            out.push_str(";\n");
            expr_into(b, level, out);
        }
    }
}

pub fn rhs(r: &Rhs) -> String {
    match r {
        Rhs::Var(x) => x.clone(),
        Rhs::Int(n) => n.to_string(),
        Rhs::Mkref(x) => format!("mkref {x}"),
        Rhs::Deref(x) => format!("*{x}"),
        Rhs::Call { func, args, .. } => {
            if func == "nondet" && args.is_empty() {
                "_".to_string()
            } else if args.len() == 2 && primitives::is_infix(func) {
                format!("{} {func} {}", args[0], args[1])
            } else {
                format!("{func}({})", args.join(", "))
            }
        }
    }
}

pub fn term(t: &Term) -> String {
    match t {
        Term::Var(x) => x.clone(),
        Term::Int(n) => n.to_string(),
        Term::Nu => "ν".to_string(),
        Term::Add(a, b) => format!("({} + {})", term(a), term(b)),
        Term::Sub(a, b) => format!("({} - {})", term(a), term(b)),
        Term::Mul(k, a) => format!("{k} * {}", term(a)),
        Term::Neg(a) => format!("-({})", term(a)),
    }
}

pub fn formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Cmp(op, a, b) => format!("{} {op} {}", term(a), term(b)),
        Formula::Not(g) => format!("!({})", formula(g)),
        Formula::And(a, b) => format!("({} && {})", formula(a), formula(b)),
        Formula::Or(a, b) => format!("({} || {})", formula(a), formula(b)),
        Formula::Implies(a, b) => format!("({} => {})", formula(a), formula(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{desugar, parse};

    fn roundtrip(src: &str) {
        let p = desugar(&parse(src).unwrap()).unwrap();
        let text = program(&p);
        let q = desugar(&parse(&text).unwrap()).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(p, q, "\n{text}");
    }

    #[test]
    fn listings_roundtrip() {
        roundtrip("mk(n) { mkref n } let p = mk(3) in let q = mk(5) in p := *p + 1; q := *q + 1; assert(*p = 4)");
        roundtrip("let x = mkref _ in ifz *x then x := 1 else x := 2; assert(*x > 0 || *x <= -3)");
        roundtrip("f(a) { a; (let z = 1 in z); a } let y = mkref 1 in alias(y = y); f(y)");
    }

    #[test]
    fn formula_printing() {
        let f = Formula::and(
            Formula::eq(Term::var("x"), Term::plus(Term::var("y"), Term::Int(1))),
            Formula::negate(Formula::True),
        );
        assert_eq!(formula(&f), "(x = (y + 1) && !(true))");
    }
}
