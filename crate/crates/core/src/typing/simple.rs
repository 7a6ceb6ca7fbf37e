//! Shape inference by unification. Shapes are `int` and `τ ref`; anything
//! left undetermined defaults to `int`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::frontend::ast::{Expr, FnName, Label, Program, Rhs, Var};
use crate::frontend::pretty;
use crate::refinement::primitives::{self, PrimKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleType {
    Int,
    Ref(Box<SimpleType>),
}

impl SimpleType {
    pub fn reference(inner: SimpleType) -> SimpleType {
        SimpleType::Ref(Box::new(inner))
    }

    /// Number of reference constructors.
    pub fn depth(&self) -> usize {
        match self {
            SimpleType::Int => 0,
            SimpleType::Ref(t) => 1 + t.depth(),
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, SimpleType::Int)
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Int => f.write_str("int"),
            SimpleType::Ref(t) => write!(f, "{t} ref"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimpleTypeError {
    #[error("shape mismatch in `{context}`: {left} vs {right}")]
    Mismatch { context: String, left: String, right: String },
    #[error("recursive shape in `{context}`: {left} occurs in {right}")]
    Occurs { context: String, left: String, right: String },
    #[error("non-linear multiplication at call site {label}: one operand must be a literal")]
    NonLinear { label: Label },
}

/// Result of shape inference: every binder and every function return.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimpleTypeMap {
    pub vars: BTreeMap<Var, SimpleType>,
    pub returns: BTreeMap<FnName, SimpleType>,
}

impl SimpleTypeMap {
    pub fn var(&self, x: &str) -> &SimpleType {
        self.vars.get(x).unwrap_or(&SimpleType::Int)
    }

    /// Shape of the value an expression evaluates to.
    pub fn result_of(&self, e: &Expr) -> SimpleType {
        match e {
            Expr::Var(x) => self.var(x).clone(),
            Expr::Let { body, .. } => self.result_of(body),
            Expr::IfZero { then_branch, .. } => self.result_of(then_branch),
            Expr::Assign { rest, .. }
            | Expr::Alias { rest, .. }
            | Expr::AliasDeref { rest, .. }
            | Expr::Assert { rest, .. } => self.result_of(rest),
            Expr::Seq(_, b) => self.result_of(b),
        }
    }
}

#[derive(Debug, Clone)]
enum Ty {
    Var(usize),
    Int,
    Ref(Box<Ty>),
}

#[derive(Default)]
struct Unifier {
    bindings: Vec<Option<Ty>>,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        self.bindings.push(None);
        Ty::Var(self.bindings.len() - 1)
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.bindings[v] {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Var(w) => v == w,
            Ty::Int => false,
            Ty::Ref(inner) => self.occurs(v, &inner),
        }
    }

    fn show(&self, t: &Ty) -> String {
        match self.shallow(t) {
            Ty::Var(v) => format!("'t{v}"),
            Ty::Int => "int".into(),
            Ty::Ref(inner) => format!("{} ref", self.show(&inner)),
        }
    }

    fn finish(&self, t: &Ty) -> SimpleType {
        match self.shallow(t) {
            Ty::Var(_) | Ty::Int => SimpleType::Int,
            Ty::Ref(inner) => SimpleType::reference(self.finish(&inner)),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty, context: &str) -> Result<(), SimpleTypeError> {
        let (sa, sb) = (self.shallow(a), self.shallow(b));
        match (&sa, &sb) {
            (Ty::Var(x), Ty::Var(y)) if x == y => Ok(()),
            (Ty::Var(v), other) | (other, Ty::Var(v)) => {
                if self.occurs(*v, other) {
                    return Err(SimpleTypeError::Occurs {
                        context: context.into(),
                        left: self.show(&Ty::Var(*v)),
                        right: self.show(other),
                    });
                }
                self.bindings[*v] = Some(other.clone());
                Ok(())
            }
            (Ty::Int, Ty::Int) => Ok(()),
            (Ty::Ref(x), Ty::Ref(y)) => self.unify(x, y, context),
            _ => {
                Err(SimpleTypeError::Mismatch { context: context.into(), left: self.show(&sa), right: self.show(&sb) })
            }
        }
    }
}

struct Infer<'a> {
    program: &'a Program,
    u: Unifier,
    vars: HashMap<Var, Ty>,
    params: BTreeMap<FnName, Vec<Ty>>,
    returns: BTreeMap<FnName, Ty>,
    consts: HashMap<Var, i64>,
}

impl Infer<'_> {
    fn var(&mut self, x: &str) -> Ty {
        if let Some(t) = self.vars.get(x) {
            return t.clone();
        }
        let t = self.u.fresh();
        self.vars.insert(x.to_string(), t.clone());
        t
    }

    fn same(&mut self, x: &str, t: &Ty, context: &str) -> Result<(), SimpleTypeError> {
        let tx = self.var(x);
        self.u.unify(&tx, t, context)
    }

    fn fresh_ref(&mut self) -> Ty {
        Ty::Ref(Box::new(self.u.fresh()))
    }

    fn expr(&mut self, e: &Expr) -> Result<Ty, SimpleTypeError> {
        match e {
            Expr::Var(x) => Ok(self.var(x)),
            Expr::Let { var, rhs, body } => {
                let ctx = format!("let {var} = {}", pretty::rhs(rhs));
                self.rhs(var, rhs, &ctx)?;
                self.expr(body)
            }
            Expr::IfZero { cond, then_branch, else_branch } => {
                self.same(cond, &Ty::Int, &format!("ifz {cond}"))?;
                let a = self.expr(then_branch)?;
                let b = self.expr(else_branch)?;
                self.u.unify(&a, &b, &format!("branches of ifz {cond}"))?;
                Ok(a)
            }
            Expr::Assign { target, value, rest } => {
                let tv = self.var(value);
                self.same(target, &Ty::Ref(Box::new(tv)), &format!("{target} := {value}"))?;
                self.expr(rest)
            }
            Expr::Alias { lhs, rhs, rest } => {
                let ctx = format!("alias({lhs} = {rhs})");
                let r = self.fresh_ref();
                self.same(lhs, &r, &ctx)?;
                self.same(rhs, &r, &ctx)?;
                self.expr(rest)
            }
            Expr::AliasDeref { lhs, rhs, rest } => {
                let ctx = format!("alias({lhs} = *{rhs})");
                let r = self.fresh_ref();
                self.same(lhs, &r, &ctx)?;
                self.same(rhs, &Ty::Ref(Box::new(r)), &ctx)?;
                self.expr(rest)
            }
            Expr::Assert { formula, rest } => {
                let ctx = format!("assert({})", pretty::formula(formula));
                for v in formula.free_vars() {
                    self.same(&v, &Ty::Int, &ctx)?;
                }
                self.expr(rest)
            }
            Expr::Seq(a, b) => {
                self.expr(a)?;
                self.expr(b)
            }
        }
    }

    fn rhs(&mut self, x: &str, rhs: &Rhs, ctx: &str) -> Result<(), SimpleTypeError> {
        match rhs {
            Rhs::Var(y) => {
                let ty = self.var(y);
                self.same(x, &ty, ctx)
            }
            Rhs::Int(n) => {
                self.consts.insert(x.to_string(), *n);
                self.same(x, &Ty::Int, ctx)
            }
            Rhs::Mkref(y) => {
                let ty = self.var(y);
                self.same(x, &Ty::Ref(Box::new(ty)), ctx)
            }
            Rhs::Deref(y) => {
                let tx = self.var(x);
                self.same(y, &Ty::Ref(Box::new(tx)), ctx)
            }
            Rhs::Call { func, label, args } => {
                if let Some(prim) = primitives::lookup(func) {
                    if prim.kind == PrimKind::Mul && !args.iter().any(|a| self.consts.contains_key(a)) {
                        return Err(SimpleTypeError::NonLinear { label: *label });
                    }
                    for a in args {
                        self.same(a, &Ty::Int, ctx)?;
                    }
                    return self.same(x, &Ty::Int, ctx);
                }
                let params = self.params[func].clone();
                for (a, p) in args.iter().zip(&params) {
                    self.same(a, p, ctx)?;
                }
                let ret = self.returns[func].clone();
                self.same(x, &ret, ctx)
            }
        }
    }
}

/// Infer shapes for every variable and function in `p`.
pub fn infer_simple_types(p: &Program) -> Result<SimpleTypeMap, SimpleTypeError> {
    let mut inf = Infer {
        program: p,
        u: Unifier::default(),
        vars: HashMap::new(),
        params: BTreeMap::new(),
        returns: BTreeMap::new(),
        consts: HashMap::new(),
    };
    for (name, def) in &p.defs {
        let ps = def.params.iter().map(|x| inf.var(x)).collect();
        inf.params.insert(name.clone(), ps);
        let r = inf.u.fresh();
        inf.returns.insert(name.clone(), r);
    }
    for (name, def) in &inf.program.defs {
        let body = inf.expr(&def.body)?;
        let ret = inf.returns[name].clone();
        inf.u.unify(&body, &ret, &format!("return of {name}"))?;
    }
    inf.expr(&p.entry)?;
    let vars = inf.vars.iter().map(|(x, t)| (x.clone(), inf.u.finish(t))).collect();
    let returns = inf.returns.iter().map(|(f, t)| (f.clone(), inf.u.finish(t))).collect();
    Ok(SimpleTypeMap { vars, returns })
}
