//! Core abstract syntax: the restricted, let-normalized language that every
//! later phase consumes.

use std::collections::BTreeMap;
use std::fmt;

pub type Var = String;
pub type FnName = String;

/// Call-site label. Labels are positive and unique across a program.
pub type Label = u32;

/// Right-hand side of a `let`. No nested expressions are allowed here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Var(Var),
    Int(i64),
    Mkref(Var),
    Deref(Var),
    Call { func: FnName, label: Label, args: Vec<Var> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(Var),
    Let {
        var: Var,
        rhs: Rhs,
        body: Box<Expr>,
    },
    IfZero {
        cond: Var,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    /// `target := value; rest`
    Assign {
        target: Var,
        value: Var,
        rest: Box<Expr>,
    },
    /// `alias(lhs = rhs); rest`
    Alias {
        lhs: Var,
        rhs: Var,
        rest: Box<Expr>,
    },
    /// `alias(lhs = *rhs); rest`
    AliasDeref {
        lhs: Var,
        rhs: Var,
        rest: Box<Expr>,
    },
    Assert {
        formula: Formula,
        rest: Box<Expr>,
    },
    Seq(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub params: Vec<Var>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub defs: BTreeMap<FnName, FunDef>,
    pub entry: Expr,
}

/// Linear integer terms used by assertions and by refinement clauses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Int(i64),
    /// The value variable of a refinement.
    Nu,
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    /// Multiplication by a literal coefficient keeps terms linear.
    Mul(i64, Box<Term>),
    Neg(Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Term {
    pub fn var(name: impl Into<Var>) -> Term {
        Term::Var(name.into())
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn minus(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::Int(_) | Term::Nu => {}
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Term::Mul(_, t) | Term::Neg(t) => t.free_vars(out),
        }
    }

    pub fn mentions_nu(&self) -> bool {
        match self {
            Term::Nu => true,
            Term::Var(_) | Term::Int(_) => false,
            Term::Add(a, b) | Term::Sub(a, b) => a.mentions_nu() || b.mentions_nu(),
            Term::Mul(_, t) | Term::Neg(t) => t.mentions_nu(),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Term {
        self.map_vars(&|v| if v == from { Term::Var(to.to_string()) } else { Term::Var(v.to_string()) })
    }

    /// Replace each variable by the term returned from `f`.
    pub fn map_vars(&self, f: &dyn Fn(&str) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Int(n) => Term::Int(*n),
            Term::Nu => Term::Nu,
            Term::Add(a, b) => Term::Add(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Term::Mul(k, t) => Term::Mul(*k, Box::new(t.map_vars(f))),
            Term::Neg(t) => Term::Neg(Box::new(t.map_vars(f))),
        }
    }

    pub fn subst_nu(&self, with: &Term) -> Term {
        match self {
            Term::Nu => with.clone(),
            Term::Var(_) | Term::Int(_) => self.clone(),
            Term::Add(a, b) => Term::Add(Box::new(a.subst_nu(with)), Box::new(b.subst_nu(with))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.subst_nu(with)), Box::new(b.subst_nu(with))),
            Term::Mul(k, t) => Term::Mul(*k, Box::new(t.subst_nu(with))),
            Term::Neg(t) => Term::Neg(Box::new(t.subst_nu(with))),
        }
    }
}

impl Formula {
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Cmp(op, a, b)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Eq, a, b)
    }

    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn mentions_nu(&self) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Cmp(_, a, b) => a.mentions_nu() || b.mentions_nu(),
            Formula::Not(f) => f.mentions_nu(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.mentions_nu() || b.mentions_nu(),
        }
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, f(a), f(b)),
            Formula::Not(g) => Formula::Not(Box::new(g.map_terms(f))),
            Formula::And(a, b) => Formula::And(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Or(a, b) => Formula::Or(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Formula {
        self.map_terms(&|t| t.rename(from, to))
    }
}

impl Expr {
    /// The variables this expression reads before any of its own binders.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        let use_var = |v: &Var, bound: &Vec<Var>, out: &mut Vec<Var>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Expr::Var(x) => use_var(x, bound, out),
            Expr::Let { var, rhs, body } => {
                match rhs {
                    Rhs::Var(y) | Rhs::Mkref(y) | Rhs::Deref(y) => use_var(y, bound, out),
                    Rhs::Int(_) => {}
                    Rhs::Call { args, .. } => {
                        for a in args {
                            use_var(a, bound, out);
                        }
                    }
                }
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Expr::IfZero { cond, then_branch, else_branch } => {
                use_var(cond, bound, out);
                then_branch.collect_free(bound, out);
                else_branch.collect_free(bound, out);
            }
            Expr::Assign { target: a, value: b, rest }
            | Expr::Alias { lhs: a, rhs: b, rest }
            | Expr::AliasDeref { lhs: a, rhs: b, rest } => {
                use_var(a, bound, out);
                use_var(b, bound, out);
                rest.collect_free(bound, out);
            }
            Expr::Assert { formula, rest } => {
                for v in formula.free_vars() {
                    use_var(&v, bound, out);
                }
                rest.collect_free(bound, out);
            }
            Expr::Seq(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
        }
    }

    /// Number of `alias` statements in this expression.
    pub fn alias_count(&self) -> usize {
        match self {
            Expr::Var(_) => 0,
            Expr::Let { body, .. } => body.alias_count(),
            Expr::IfZero { then_branch, else_branch, .. } => then_branch.alias_count() + else_branch.alias_count(),
            Expr::Assign { rest, .. } | Expr::Assert { rest, .. } => rest.alias_count(),
            Expr::Alias { rest, .. } | Expr::AliasDeref { rest, .. } => 1 + rest.alias_count(),
            Expr::Seq(a, b) => a.alias_count() + b.alias_count(),
        }
    }

    /// Visit every call site in traversal order.
    pub fn for_each_call<'a>(&'a self, f: &mut dyn FnMut(&'a FnName, Label, &'a [Var])) {
        match self {
            Expr::Var(_) => {}
            Expr::Let { rhs, body, .. } => {
                if let Rhs::Call { func, label, args } = rhs {
                    f(func, *label, args);
                }
                body.for_each_call(f);
            }
            Expr::IfZero { then_branch, else_branch, .. } => {
                then_branch.for_each_call(f);
                else_branch.for_each_call(f);
            }
            Expr::Assign { rest, .. }
            | Expr::Alias { rest, .. }
            | Expr::AliasDeref { rest, .. }
            | Expr::Assert { rest, .. } => rest.for_each_call(f),
            Expr::Seq(a, b) => {
                a.for_each_call(f);
                b.for_each_call(f);
            }
        }
    }

    /// Visit every binder introduced by `let` in traversal order.
    pub fn for_each_binder<'a>(&'a self, f: &mut dyn FnMut(&'a Var)) {
        match self {
            Expr::Var(_) => {}
            Expr::Let { var, body, .. } => {
                f(var);
                body.for_each_binder(f);
            }
            Expr::IfZero { then_branch, else_branch, .. } => {
                then_branch.for_each_binder(f);
                else_branch.for_each_binder(f);
            }
            Expr::Assign { rest, .. }
            | Expr::Alias { rest, .. }
            | Expr::AliasDeref { rest, .. }
            | Expr::Assert { rest, .. } => rest.for_each_binder(f),
            Expr::Seq(a, b) => {
                a.for_each_binder(f);
                b.for_each_binder(f);
            }
        }
    }
}

impl Program {
    pub fn alias_count(&self) -> usize {
        self.defs.values().map(|d| d.body.alias_count()).sum::<usize>() + self.entry.alias_count()
    }

    /// All binders (parameters and lets) in definition order, entry last.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for def in self.defs.values() {
            out.extend(def.params.iter().cloned());
            def.body.for_each_binder(&mut |v| out.push(v.clone()));
        }
        self.entry.for_each_binder(&mut |v| out.push(v.clone()));
        out
    }

    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        for def in self.defs.values() {
            def.body.for_each_call(&mut |_, l, _| out.push(l));
        }
        self.entry.for_each_call(&mut |_, l, _| out.push(l));
        out
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

/// Source of fresh names of the form `base$N`. Users cannot write `$`
/// except in names printed by this tool, so starting the counter above the
/// largest suffix already present keeps every generated name new.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    next: u64,
}

impl NameSupply {
    pub fn starting_at(next: u64) -> Self {
        NameSupply { next }
    }

    /// A supply whose names cannot clash with any of `names`.
    pub fn above<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let max = names.into_iter().filter_map(suffix).max();
        NameSupply { next: max.map_or(0, |m| m + 1) }
    }

    pub fn fresh(&mut self, base: &str) -> Var {
        let n = self.next;
        self.next += 1;
        format!("{}${}", strip_suffix(base), n)
    }
}

fn suffix(name: &str) -> Option<u64> {
    name.rsplit_once('$').and_then(|(_, n)| n.parse().ok())
}

/// The user-facing part of a possibly generated name.
pub fn strip_suffix(name: &str) -> &str {
    name.split_once('$').map_or(name, |(b, _)| b)
}

impl Program {
    /// Every variable name occurring anywhere in the program.
    pub fn all_names(&self) -> Vec<Var> {
        let mut out = self.binders();
        for def in self.defs.values() {
            out.extend(def.body.free_vars());
        }
        out.extend(self.entry.free_vars());
        out
    }
}
