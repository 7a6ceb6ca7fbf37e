//! Lowering of the surface tree into let-normal core form.
//!
//! Nested operands are bound to fresh temporaries, operators and `_` become
//! primitive calls, dereferences inside assertions are hoisted into lets, and
//! trailing statements get a dummy continuation. Surface binders are renamed
//! apart as they are met, so hoisting never captures a name. Call labels are
//! assigned in a final pass in traversal order.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::ast::{Expr, Formula, FunDef, NameSupply, Program, Rhs, Term, Var};
use super::surface::{SExpr, SFormula, STerm, SurfaceProgram};

type DResult<T> = Result<T, String>;
type Env = HashMap<String, Var>;

/// A binding or statement waiting for its continuation.
enum Pre {
    Let(Var, Rhs),
    Assign(Var, Var),
    Alias(Var, Var),
    AliasDeref(Var, Var),
    Assert(Formula),
    Discard(Var),
}

struct Desugarer {
    names: NameSupply,
    used: HashSet<Var>,
}

pub fn desugar(sp: &SurfaceProgram) -> DResult<Program> {
    let mut all = Vec::new();
    for d in &sp.defs {
        all.extend(d.params.iter().cloned());
        surface_names(&d.body, &mut all);
    }
    surface_names(&sp.entry, &mut all);
    let mut ds = Desugarer { names: NameSupply::above(all.iter().map(String::as_str)), used: HashSet::new() };

    let mut defs = BTreeMap::new();
    for d in &sp.defs {
        let mut env = Env::new();
        let mut params = Vec::new();
        for x in &d.params {
            let x2 = ds.binder(x);
            env.insert(x.clone(), x2.clone());
            params.push(x2);
        }
        let body = ds.tail(&d.body, &env)?;
        defs.insert(d.name.clone(), FunDef { params, body });
    }
    let entry = ds.tail(&sp.entry, &Env::new())?;
    let mut p = Program { defs, entry };
    relabel(&mut p);
    Ok(p)
}

/// Assign labels 1, 2, ... to call sites in traversal order.
pub fn relabel(p: &mut Program) {
    let mut next = 1;
    for def in p.defs.values_mut() {
        relabel_expr(&mut def.body, &mut next);
    }
    relabel_expr(&mut p.entry, &mut next);
}

fn relabel_expr(e: &mut Expr, next: &mut u32) {
    match e {
        Expr::Var(_) => {}
        Expr::Let { rhs, body, .. } => {
            if let Rhs::Call { label, .. } = rhs {
                *label = *next;
                *next += 1;
            }
            relabel_expr(body, next);
        }
        Expr::IfZero { then_branch, else_branch, .. } => {
            relabel_expr(then_branch, next);
            relabel_expr(else_branch, next);
        }
        Expr::Assign { rest, .. }
        | Expr::Alias { rest, .. }
        | Expr::AliasDeref { rest, .. }
        | Expr::Assert { rest, .. } => relabel_expr(rest, next),
        Expr::Seq(a, b) => {
            relabel_expr(a, next);
            relabel_expr(b, next);
        }
    }
}

fn wrap(pre: Vec<Pre>, inner: Expr) -> Expr {
    pre.into_iter().rev().fold(inner, |rest, p| {
        let rest = Box::new(rest);
        match p {
            Pre::Let(var, rhs) => Expr::Let { var, rhs, body: rest },
            Pre::Assign(target, value) => Expr::Assign { target, value, rest },
            Pre::Alias(lhs, rhs) => Expr::Alias { lhs, rhs, rest },
            Pre::AliasDeref(lhs, rhs) => Expr::AliasDeref { lhs, rhs, rest },
            Pre::Assert(formula) => Expr::Assert { formula, rest },
            Pre::Discard(x) => Expr::Seq(Box::new(Expr::Var(x)), rest),
        }
    })
}

fn lookup(env: &Env, x: &str) -> Var {
    env.get(x).cloned().unwrap_or_else(|| x.to_string())
}

impl Desugarer {
    fn binder(&mut self, x: &str) -> Var {
        if self.used.insert(x.to_string()) {
            x.to_string()
        } else {
            let y = self.names.fresh(x);
            self.used.insert(y.clone());
            y
        }
    }

    fn temp(&mut self, base: &str) -> Var {
        let t = self.names.fresh(base);
        self.used.insert(t.clone());
        t
    }

    fn dummy(&mut self) -> Expr {
        let d = self.temp("dummy");
        Expr::Let { var: d.clone(), rhs: Rhs::Int(0), body: Box::new(Expr::Var(d)) }
    }

    /// An expression whose value is the value of the enclosing body.
    fn tail(&mut self, e: &SExpr, env: &Env) -> DResult<Expr> {
        match e {
            SExpr::Var(x) => Ok(Expr::Var(lookup(env, x))),
            SExpr::Let(x, rhs, body) => {
                let mut pre = Vec::new();
                let rhs = self.rhs(rhs, env, &mut pre)?;
                let x2 = self.binder(x);
                let mut env2 = env.clone();
                env2.insert(x.clone(), x2.clone());
                let body = self.tail(body, &env2)?;
                Ok(wrap(pre, Expr::Let { var: x2, rhs, body: Box::new(body) }))
            }
            SExpr::IfZero(c, t, f) => {
                let mut pre = Vec::new();
                let cond = self.operand(c, env, &mut pre)?;
                let then_branch = Box::new(self.tail(t, env)?);
                let else_branch = Box::new(self.tail(f, env)?);
                Ok(wrap(pre, Expr::IfZero { cond, then_branch, else_branch }))
            }
            SExpr::Seq(a, b) => {
                let rest = self.tail(b, env)?;
                self.stmt(a, env, rest)
            }
            SExpr::Assign(..) | SExpr::Alias(..) | SExpr::AliasDeref(..) | SExpr::Assert(_) => {
                let rest = self.dummy();
                self.stmt(e, env, rest)
            }
            _ => {
                let mut pre = Vec::new();
                let v = self.operand(e, env, &mut pre)?;
                Ok(wrap(pre, Expr::Var(v)))
            }
        }
    }

    /// A statement whose value is discarded, followed by `rest`.
    fn stmt(&mut self, e: &SExpr, env: &Env, rest: Expr) -> DResult<Expr> {
        match e {
            SExpr::Seq(a, b) => {
                let rest = self.stmt(b, env, rest)?;
                self.stmt(a, env, rest)
            }
            SExpr::Let(..) | SExpr::IfZero(..) => Ok(Expr::Seq(Box::new(self.tail(e, env)?), Box::new(rest))),
            _ => {
                let mut pre = Vec::new();
                self.stmt_pre(e, env, &mut pre)?;
                Ok(wrap(pre, rest))
            }
        }
    }

    fn stmt_pre(&mut self, e: &SExpr, env: &Env, pre: &mut Vec<Pre>) -> DResult<()> {
        match e {
            SExpr::Assign(x, v) => {
                let y = self.operand(v, env, pre)?;
                pre.push(Pre::Assign(lookup(env, x), y));
            }
            SExpr::Alias(x, y) => pre.push(Pre::Alias(lookup(env, x), lookup(env, y))),
            SExpr::AliasDeref(x, y) => pre.push(Pre::AliasDeref(lookup(env, x), lookup(env, y))),
            SExpr::Assert(f) => {
                let f = self.formula(f, env, pre)?;
                pre.push(Pre::Assert(f));
            }
            SExpr::Seq(a, b) => {
                self.stmt_pre(a, env, pre)?;
                self.stmt_pre(b, env, pre)?;
            }
            SExpr::Var(x) => pre.push(Pre::Discard(lookup(env, x))),
            SExpr::Let(x, rhs, body) => {
                let rhs = self.rhs(rhs, env, pre)?;
                let x2 = self.binder(x);
                pre.push(Pre::Let(x2.clone(), rhs));
                let mut env2 = env.clone();
                env2.insert(x.clone(), x2);
                self.stmt_pre(body, &env2, pre)?;
            }
            SExpr::IfZero(..) => return Err("`ifz` is not allowed in operand position".into()),
            _ => {
                let rhs = self.rhs(e, env, pre)?;
                let t = self.temp("t");
                pre.push(Pre::Let(t, rhs));
            }
        }
        Ok(())
    }

    fn operand(&mut self, e: &SExpr, env: &Env, pre: &mut Vec<Pre>) -> DResult<Var> {
        if let SExpr::Var(x) = e {
            return Ok(lookup(env, x));
        }
        let rhs = self.rhs(e, env, pre)?;
        let t = self.temp("t");
        pre.push(Pre::Let(t.clone(), rhs));
        Ok(t)
    }

    fn call(&mut self, func: &str, args: &[&SExpr], env: &Env, pre: &mut Vec<Pre>) -> DResult<Rhs> {
        let mut vars: Vec<Var> = Vec::new();
        for a in args {
            let mut v = self.operand(a, env, pre)?;
            // Arguments must be distinct variables; copy repeated ones.
            if vars.contains(&v) {
                let copy = self.temp(&v);
                pre.push(Pre::Let(copy.clone(), Rhs::Var(v)));
                v = copy;
            }
            vars.push(v);
        }
        Ok(Rhs::Call { func: func.to_string(), label: 0, args: vars })
    }

    fn rhs(&mut self, e: &SExpr, env: &Env, pre: &mut Vec<Pre>) -> DResult<Rhs> {
        match e {
            SExpr::Var(x) => Ok(Rhs::Var(lookup(env, x))),
            SExpr::Int(n) => Ok(Rhs::Int(*n)),
            SExpr::Nondet => self.call("nondet", &[], env, pre),
            SExpr::Mkref(a) => Ok(Rhs::Mkref(self.operand(a, env, pre)?)),
            SExpr::Deref(a) => Ok(Rhs::Deref(self.operand(a, env, pre)?)),
            SExpr::Call(f, args) => {
                let args: Vec<&SExpr> = args.iter().collect();
                self.call(f, &args, env, pre)
            }
            SExpr::Binary(op, a, b) => self.call(op.primitive(), &[a, b], env, pre),
            SExpr::Let(x, rhs, body) => {
                let rhs = self.rhs(rhs, env, pre)?;
                let x2 = self.binder(x);
                pre.push(Pre::Let(x2.clone(), rhs));
                let mut env2 = env.clone();
                env2.insert(x.clone(), x2);
                self.rhs(body, &env2, pre)
            }
            SExpr::Seq(a, b) => {
                self.stmt_pre(a, env, pre)?;
                self.rhs(b, env, pre)
            }
            SExpr::Assign(..) | SExpr::Alias(..) | SExpr::AliasDeref(..) | SExpr::Assert(_) => {
                self.stmt_pre(e, env, pre)?;
                Ok(Rhs::Int(0))
            }
            SExpr::IfZero(..) => Err("`ifz` is not allowed in operand position".into()),
        }
    }

    fn formula(&mut self, f: &SFormula, env: &Env, pre: &mut Vec<Pre>) -> DResult<Formula> {
        Ok(match f {
            SFormula::True => Formula::True,
            SFormula::False => Formula::False,
            SFormula::Cmp(op, a, b) => {
                let a = self.term(a, env, pre)?;
                let b = self.term(b, env, pre)?;
                Formula::Cmp(*op, a, b)
            }
            SFormula::Not(g) => Formula::negate(self.formula(g, env, pre)?),
            SFormula::And(a, b) => Formula::and(self.formula(a, env, pre)?, self.formula(b, env, pre)?),
            SFormula::Or(a, b) => Formula::or(self.formula(a, env, pre)?, self.formula(b, env, pre)?),
            SFormula::Implies(a, b) => {
                Formula::Implies(Box::new(self.formula(a, env, pre)?), Box::new(self.formula(b, env, pre)?))
            }
        })
    }

    fn term(&mut self, t: &STerm, env: &Env, pre: &mut Vec<Pre>) -> DResult<Term> {
        Ok(match t {
            STerm::Var(x) => Term::Var(lookup(env, x)),
            STerm::Int(n) => Term::Int(*n),
            STerm::Deref(_) => Term::Var(self.deref_var(t, env, pre)?),
            STerm::Add(a, b) => Term::plus(self.term(a, env, pre)?, self.term(b, env, pre)?),
            STerm::Sub(a, b) => Term::minus(self.term(a, env, pre)?, self.term(b, env, pre)?),
            STerm::Mul(k, a) => Term::Mul(*k, Box::new(self.term(a, env, pre)?)),
            STerm::Neg(a) => Term::Neg(Box::new(self.term(a, env, pre)?)),
        })
    }

    fn deref_var(&mut self, t: &STerm, env: &Env, pre: &mut Vec<Pre>) -> DResult<Var> {
        match t {
            STerm::Var(x) => Ok(lookup(env, x)),
            STerm::Deref(inner) => {
                let r = self.deref_var(inner, env, pre)?;
                let tmp = self.temp("tmp");
                pre.push(Pre::Let(tmp.clone(), Rhs::Deref(r)));
                Ok(tmp)
            }
            _ => Err("only variables can be dereferenced in assertions".into()),
        }
    }
}

fn surface_names(e: &SExpr, out: &mut Vec<String>) {
    match e {
        SExpr::Var(x) => out.push(x.clone()),
        SExpr::Int(_) | SExpr::Nondet => {}
        SExpr::Mkref(a) | SExpr::Deref(a) => surface_names(a, out),
        SExpr::Call(_, args) => args.iter().for_each(|a| surface_names(a, out)),
        SExpr::Binary(_, a, b) | SExpr::Seq(a, b) => {
            surface_names(a, out);
            surface_names(b, out);
        }
        SExpr::Let(x, a, b) => {
            out.push(x.clone());
            surface_names(a, out);
            surface_names(b, out);
        }
        SExpr::IfZero(a, b, c) => {
            surface_names(a, out);
            surface_names(b, out);
            surface_names(c, out);
        }
        SExpr::Assign(x, a) => {
            out.push(x.clone());
            surface_names(a, out);
        }
        SExpr::Alias(x, y) | SExpr::AliasDeref(x, y) => {
            out.push(x.clone());
            out.push(y.clone());
        }
        SExpr::Assert(f) => formula_names(f, out),
    }
}

fn formula_names(f: &SFormula, out: &mut Vec<String>) {
    fn term_names(t: &STerm, out: &mut Vec<String>) {
        match t {
            STerm::Var(x) => out.push(x.clone()),
            STerm::Int(_) => {}
            STerm::Deref(a) | STerm::Mul(_, a) | STerm::Neg(a) => term_names(a, out),
            STerm::Add(a, b) | STerm::Sub(a, b) => {
                term_names(a, out);
                term_names(b, out);
            }
        }
    }
    match f {
        SFormula::True | SFormula::False => {}
        SFormula::Cmp(_, a, b) => {
            term_names(a, out);
            term_names(b, out);
        }
        SFormula::Not(g) => formula_names(g, out),
        SFormula::And(a, b) | SFormula::Or(a, b) | SFormula::Implies(a, b) => {
            formula_names(a, out);
            formula_names(b, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::CmpOp;
    use crate::frontend::parser::parse;

    fn lower(src: &str) -> Program {
        desugar(&parse(src).unwrap()).unwrap()
    }

    fn let_(var: &str, rhs: Rhs, body: Expr) -> Expr {
        Expr::Let { var: var.into(), rhs, body: Box::new(body) }
    }

    #[test]
    fn deref_in_assert_is_hoisted() {
        let p = lower("let x = mkref 4 in assert(*x = 4)");
        let expected = let_(
            "t$0",
            Rhs::Int(4),
            let_(
                "x",
                Rhs::Mkref("t$0".into()),
                let_(
                    "tmp$2",
                    Rhs::Deref("x".into()),
                    Expr::Assert {
                        formula: Formula::Cmp(CmpOp::Eq, Term::var("tmp$2"), Term::Int(4)),
                        rest: Box::new(let_("dummy$1", Rhs::Int(0), Expr::Var("dummy$1".into()))),
                    },
                ),
            ),
        );
        assert_eq!(p.entry, expected);
    }

    #[test]
    fn core_input_is_unchanged() {
        let p = lower("let y = x in y");
        assert_eq!(p.entry, let_("y", Rhs::Var("x".into()), Expr::Var("y".into())));
    }

    #[test]
    fn nondet_arguments_become_calls() {
        let p = lower("loop(a, b) { a } loop(mkref _, mkref _)");
        let mut calls = Vec::new();
        p.entry.for_each_call(&mut |f, l, args| calls.push((f.clone(), l, args.len())));
        assert_eq!(calls, vec![("nondet".to_string(), 1, 0), ("nondet".to_string(), 2, 0), ("loop".to_string(), 3, 2)]);
    }

    #[test]
    fn repeated_arguments_are_copied() {
        let p = lower("f(a, b) { a } let b = mkref 0 in f(b, b)");
        let mut args = Vec::new();
        p.entry.for_each_call(&mut |_, _, a| args.extend(a.iter().cloned()));
        assert_eq!(args.len(), 2);
        assert_ne!(args[0], args[1]);
    }

    #[test]
    fn shadowed_binders_are_renamed_apart() {
        let p = lower("let x = 1 in let x = 2 in x");
        assert_eq!(p.binders(), vec!["x".to_string(), "x$0".to_string()]);
        let Expr::Let { body, .. } = &p.entry else { panic!() };
        let Expr::Let { body, .. } = body.as_ref() else { panic!() };
        assert_eq!(**body, Expr::Var("x$0".into()));
    }

    #[test]
    fn statements_get_continuations() {
        let p = lower("let x = mkref 0 in x := 1; alias(x = x)");
        let mut e = &p.entry;
        while let Expr::Let { body, .. } = e {
            e = body;
        }
        let Expr::Assign { rest, .. } = e else { panic!("{e:?}") };
        let Expr::Alias { rest, .. } = rest.as_ref() else { panic!() };
        assert!(matches!(rest.as_ref(), Expr::Let { rhs: Rhs::Int(0), .. }));
    }

    #[test]
    fn ifz_operand_rejected() {
        assert!(desugar(&parse("let x = 1 + (ifz 0 then 1 else 2) in x").unwrap()).is_err());
    }
}
