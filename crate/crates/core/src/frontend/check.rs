//! Well-formedness checking and alpha-renaming of core programs.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::ast::{Expr, FunDef, Label, NameSupply, Program, Rhs, Var};
use crate::refinement::primitives;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WellFormednessError {
    #[error("call to undefined function `{0}`")]
    UndefinedFunction(String),
    #[error("function `{func}` expects {expected} argument(s) but call site {label} passes {found}")]
    ArityMismatch { func: String, label: Label, expected: usize, found: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(Var),
    #[error("call site {label} to `{func}` passes `{var}` more than once; arguments must be distinct variables")]
    DuplicateArgument { func: String, label: Label, var: Var },
    #[error("function `{func}` declares parameter `{var}` more than once")]
    DuplicateParameter { func: String, var: Var },
    #[error("call-site label {0} is used more than once")]
    DuplicateLabel(Label),
    #[error("call-site labels must be positive")]
    ZeroLabel,
    #[error("`{0}` is a primitive and cannot be redefined")]
    PrimitiveRedefined(String),
}

type CResult<T> = Result<T, WellFormednessError>;

/// Check a program and return a copy in which every binder is unique.
pub fn check_program(p: &Program) -> CResult<Program> {
    for name in p.defs.keys() {
        if primitives::lookup(name).is_some() {
            return Err(WellFormednessError::PrimitiveRedefined(name.clone()));
        }
    }
    let mut seen_labels = HashSet::new();
    for l in p.labels() {
        if l == 0 {
            return Err(WellFormednessError::ZeroLabel);
        }
        if !seen_labels.insert(l) {
            return Err(WellFormednessError::DuplicateLabel(l));
        }
    }

    let names = p.all_names();
    let mut r =
        Renamer { program: p, names: NameSupply::above(names.iter().map(String::as_str)), seen: HashSet::new() };
    let mut defs = BTreeMap::new();
    for (fname, def) in &p.defs {
        let mut scope = HashMap::new();
        let mut params = Vec::new();
        for x in &def.params {
            if scope.contains_key(x) {
                return Err(WellFormednessError::DuplicateParameter { func: fname.clone(), var: x.clone() });
            }
            let x2 = r.binder(x);
            scope.insert(x.clone(), x2.clone());
            params.push(x2);
        }
        let body = r.expr(&def.body, &scope)?;
        defs.insert(fname.clone(), FunDef { params, body });
    }
    let entry = r.expr(&p.entry, &HashMap::new())?;
    Ok(Program { defs, entry })
}

struct Renamer<'a> {
    program: &'a Program,
    names: NameSupply,
    seen: HashSet<Var>,
}

impl Renamer<'_> {
    fn binder(&mut self, x: &Var) -> Var {
        let y = if self.seen.contains(x) { self.names.fresh(x) } else { x.clone() };
        self.seen.insert(y.clone());
        y
    }

    fn use_var(&self, x: &Var, scope: &HashMap<Var, Var>) -> CResult<Var> {
        scope.get(x).cloned().ok_or_else(|| WellFormednessError::UnboundVariable(x.clone()))
    }

    fn call(&self, func: &str, label: Label, args: &[Var]) -> CResult<()> {
        let expected = match self.program.defs.get(func) {
            Some(def) => def.params.len(),
            None => match primitives::lookup(func) {
                Some(prim) => prim.arity(),
                None => return Err(WellFormednessError::UndefinedFunction(func.to_string())),
            },
        };
        if expected != args.len() {
            return Err(WellFormednessError::ArityMismatch {
                func: func.to_string(),
                label,
                expected,
                found: args.len(),
            });
        }
        for (i, a) in args.iter().enumerate() {
            if args[..i].contains(a) {
                return Err(WellFormednessError::DuplicateArgument { func: func.to_string(), label, var: a.clone() });
            }
        }
        Ok(())
    }

    fn expr(&mut self, e: &Expr, scope: &HashMap<Var, Var>) -> CResult<Expr> {
        Ok(match e {
            Expr::Var(x) => Expr::Var(self.use_var(x, scope)?),
            Expr::Let { var, rhs, body } => {
                let rhs = match rhs {
                    Rhs::Var(y) => Rhs::Var(self.use_var(y, scope)?),
                    Rhs::Int(n) => Rhs::Int(*n),
                    Rhs::Mkref(y) => Rhs::Mkref(self.use_var(y, scope)?),
                    Rhs::Deref(y) => Rhs::Deref(self.use_var(y, scope)?),
                    Rhs::Call { func, label, args } => {
                        self.call(func, *label, args)?;
                        let args = args.iter().map(|a| self.use_var(a, scope)).collect::<CResult<_>>()?;
                        Rhs::Call { func: func.clone(), label: *label, args }
                    }
                };
                let var2 = self.binder(var);
                let mut inner = scope.clone();
                inner.insert(var.clone(), var2.clone());
                Expr::Let { var: var2, rhs, body: Box::new(self.expr(body, &inner)?) }
            }
            Expr::IfZero { cond, then_branch, else_branch } => Expr::IfZero {
                cond: self.use_var(cond, scope)?,
                then_branch: Box::new(self.expr(then_branch, scope)?),
                else_branch: Box::new(self.expr(else_branch, scope)?),
            },
            Expr::Assign { target, value, rest } => Expr::Assign {
                target: self.use_var(target, scope)?,
                value: self.use_var(value, scope)?,
                rest: Box::new(self.expr(rest, scope)?),
            },
            Expr::Alias { lhs, rhs, rest } => Expr::Alias {
                lhs: self.use_var(lhs, scope)?,
                rhs: self.use_var(rhs, scope)?,
                rest: Box::new(self.expr(rest, scope)?),
            },
            Expr::AliasDeref { lhs, rhs, rest } => Expr::AliasDeref {
                lhs: self.use_var(lhs, scope)?,
                rhs: self.use_var(rhs, scope)?,
                rest: Box::new(self.expr(rest, scope)?),
            },
            Expr::Assert { formula, rest } => {
                for v in formula.free_vars() {
                    self.use_var(&v, scope)?;
                }
                let formula = formula.map_terms(&|t| {
                    t.map_vars(&|v| super::ast::Term::Var(scope.get(v).cloned().unwrap_or_else(|| v.to_string())))
                });
                Expr::Assert { formula, rest: Box::new(self.expr(rest, scope)?) }
            }
            Expr::Seq(a, b) => Expr::Seq(Box::new(self.expr(a, scope)?), Box::new(self.expr(b, scope)?)),
        })
    }
}

/// Capture-avoiding substitution of the variable `x` by `y`. A binder for
/// `x` shadows it in its body.
pub fn rename(e: &Expr, x: &str, y: &str) -> Expr {
    let r = |v: &Var| if v == x { y.to_string() } else { v.clone() };
    match e {
        Expr::Var(v) => Expr::Var(r(v)),
        Expr::Let { var, rhs, body } => {
            let rhs = match rhs {
                Rhs::Var(v) => Rhs::Var(r(v)),
                Rhs::Int(n) => Rhs::Int(*n),
                Rhs::Mkref(v) => Rhs::Mkref(r(v)),
                Rhs::Deref(v) => Rhs::Deref(r(v)),
                Rhs::Call { func, label, args } => {
                    Rhs::Call { func: func.clone(), label: *label, args: args.iter().map(r).collect() }
                }
            };
            let body = if var == x { body.as_ref().clone() } else { rename(body, x, y) };
            Expr::Let { var: var.clone(), rhs, body: Box::new(body) }
        }
        Expr::IfZero { cond, then_branch, else_branch } => Expr::IfZero {
            cond: r(cond),
            then_branch: Box::new(rename(then_branch, x, y)),
            else_branch: Box::new(rename(else_branch, x, y)),
        },
        Expr::Assign { target, value, rest } => {
            Expr::Assign { target: r(target), value: r(value), rest: Box::new(rename(rest, x, y)) }
        }
        Expr::Alias { lhs, rhs, rest } => Expr::Alias { lhs: r(lhs), rhs: r(rhs), rest: Box::new(rename(rest, x, y)) },
        Expr::AliasDeref { lhs, rhs, rest } => {
            Expr::AliasDeref { lhs: r(lhs), rhs: r(rhs), rest: Box::new(rename(rest, x, y)) }
        }
        Expr::Assert { formula, rest } => {
            Expr::Assert { formula: formula.rename(x, y), rest: Box::new(rename(rest, x, y)) }
        }
        Expr::Seq(a, b) => Expr::Seq(Box::new(rename(a, x, y)), Box::new(rename(b, x, y))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{desugar, parse};

    fn core(src: &str) -> Program {
        desugar(&parse(src).unwrap()).unwrap()
    }

    fn call(func: &str, label: Label, args: &[&str], body: Expr) -> Expr {
        Expr::Let {
            var: "r".into(),
            rhs: Rhs::Call { func: func.into(), label, args: args.iter().map(|s| s.to_string()).collect() },
            body: Box::new(body),
        }
    }

    #[test]
    fn fig1_is_well_formed() {
        let p = core(
            "mk(n) { mkref n }
             let p = mk(3) in let q = mk(5) in p := *p + 1; q := *q + 1; assert(*p = 4)",
        );
        assert!(check_program(&p).is_ok());
    }

    #[test]
    fn trivial_entry_is_well_formed() {
        assert!(check_program(&core("let x = 0 in x")).is_ok());
    }

    #[test]
    fn repeated_call_argument_is_rejected() {
        let mut p = core("f(a, b) { a } let x = mkref 0 in x");
        let Expr::Let { var, rhs, .. } = p.entry.clone() else { panic!() };
        p.entry = Expr::Let { var, rhs, body: Box::new(call("f", 1, &["x", "x"], Expr::Var("r".into()))) };
        assert_eq!(
            check_program(&p).unwrap_err(),
            WellFormednessError::DuplicateArgument { func: "f".into(), label: 1, var: "x".into() }
        );
    }

    #[test]
    fn duplicate_binders_are_renamed() {
        let p = Program {
            defs: BTreeMap::new(),
            entry: Expr::Let {
                var: "x".into(),
                rhs: Rhs::Int(1),
                body: Box::new(Expr::Let {
                    var: "x".into(),
                    rhs: Rhs::Var("x".into()),
                    body: Box::new(Expr::Var("x".into())),
                }),
            },
        };
        let q = check_program(&p).unwrap();
        let binders = q.binders();
        assert_eq!(binders, vec!["x".to_string(), "x$0".to_string()]);
        let Expr::Let { body, .. } = &q.entry else { panic!() };
        assert_eq!(
            **body,
            Expr::Let { var: "x$0".into(), rhs: Rhs::Var("x".into()), body: Box::new(Expr::Var("x$0".into())) }
        );
    }

    #[test]
    fn unresolvable_problems_are_reported() {
        assert_eq!(check_program(&core("y")).unwrap_err(), WellFormednessError::UnboundVariable("y".into()));
        assert!(matches!(check_program(&core("g(1)")).unwrap_err(), WellFormednessError::UndefinedFunction(_)));
        assert!(matches!(
            check_program(&core("f(a) { a } f(1, 2)")).unwrap_err(),
            WellFormednessError::ArityMismatch { expected: 1, found: 2, .. }
        ));
        let dup = Program {
            defs: BTreeMap::new(),
            entry: call("nondet", 1, &[], call("nondet", 1, &[], Expr::Var("r".into()))),
        };
        assert_eq!(check_program(&dup).unwrap_err(), WellFormednessError::DuplicateLabel(1));
    }

    #[test]
    fn rename_respects_shadowing() {
        assert_eq!(rename(&Expr::Var("x".into()), "x", "z"), Expr::Var("z".into()));
        let shadow = Expr::Let { var: "x".into(), rhs: Rhs::Var("w".into()), body: Box::new(Expr::Var("x".into())) };
        assert_eq!(rename(&shadow, "x", "z"), shadow);
    }

    #[test]
    fn rename_substitutes_call_parameters() {
        // Body of `loop(a, b)` instantiated at the call `loop(b0, a0)`.
        let p = core("loop(a, b) { let t = *b in a := t; loop(b, a) } 0");
        let body = &p.defs["loop"].body;
        let inst = rename(&rename(body, "a", "a0"), "b", "b0");
        let mut args = Vec::new();
        inst.for_each_call(&mut |_, _, a| args.push(a.to_vec()));
        assert_eq!(args, vec![vec!["b0".to_string(), "a0".to_string()]]);
        let Expr::Let { rhs, body, .. } = &inst else { panic!() };
        assert_eq!(*rhs, Rhs::Deref("b0".into()));
        assert!(matches!(body.as_ref(), Expr::Assign { target, .. } if target == "a0"));
    }
}
