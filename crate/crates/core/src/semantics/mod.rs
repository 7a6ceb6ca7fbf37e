//! Small-step reference interpreter.
//!
//! A configuration keeps the redex separate from the evaluation context
//! `E ::= E; e | •`, stored as the stack of pending right-hand sides of
//! sequences. Binders are refreshed on every `let` so the register file only
//! ever grows with new names.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{BigInt, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frontend::ast::{CmpOp, Expr, Formula, FunDef, Label, NameSupply, Program, Rhs, Term, Var};
use crate::frontend::check::rename;
use crate::frontend::pretty;
use crate::refinement::primitives;

pub const DEFAULT_FUEL: u64 = 1_000_000;
pub const DEFAULT_NONDET_RANGE: (i64, i64) = (-128, 127);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Addr(u64),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Addr(a) => write!(f, "@{a}"),
        }
    }
}

pub type Heap = BTreeMap<u64, Value>;
pub type RegisterFile = HashMap<Var, Value>;

/// `E[let binder = •^label in body]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnContext {
    pub ectx: Vec<Expr>,
    pub binder: Var,
    pub label: Label,
    pub body: Expr,
}

#[derive(Debug, Clone)]
pub struct Configuration {
    pub heap: Heap,
    pub regs: RegisterFile,
    /// Most recent call last.
    pub stack: Vec<ReturnContext>,
    /// Pending sequence continuations, outermost first.
    pub ectx: Vec<Expr>,
    pub redex: Expr,
    next_addr: u64,
    names: NameSupply,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Final(Value),
    AssertFail,
    AliasFail,
    OutOfFuel,
    Stuck(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Final(v) => write!(f, "final {v}"),
            Outcome::AssertFail => f.write_str("assertion failure"),
            Outcome::AliasFail => f.write_str("alias failure"),
            Outcome::OutOfFuel => f.write_str("out of fuel"),
            Outcome::Stuck(r) => write!(f, "stuck: {r}"),
        }
    }
}

/// Names of the transition rules. `Prim` covers calls to built-in
/// operations, which have no user-visible body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Var,
    Seq,
    Let,
    LetInt,
    IfTrue,
    IfFalse,
    MkRef,
    Deref,
    Call,
    Prim,
    Assign,
    Alias,
    AliasPtr,
    AliasFail,
    AliasPtrFail,
    Assert,
    AssertFail,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Var => "R-Var",
            Rule::Seq => "R-Seq",
            Rule::Let => "R-Let",
            Rule::LetInt => "R-LetInt",
            Rule::IfTrue => "R-IfTrue",
            Rule::IfFalse => "R-IfFalse",
            Rule::MkRef => "R-MkRef",
            Rule::Deref => "R-Deref",
            Rule::Call => "R-Call",
            Rule::Prim => "R-Prim",
            Rule::Assign => "R-Assign",
            Rule::Alias => "R-Alias",
            Rule::AliasPtr => "R-AliasPtr",
            Rule::AliasFail => "R-AliasFail",
            Rule::AliasPtrFail => "R-AliasPtrFail",
            Rule::Assert => "R-Assert",
            Rule::AssertFail => "R-AssertFail",
        };
        f.write_str(s)
    }
}

pub enum StepResult {
    Next(Configuration),
    Done(Outcome),
}

/// Source of nondeterministic integers.
pub struct Nondet {
    rng: ChaCha8Rng,
    lo: i64,
    hi: i64,
}

impl Nondet {
    pub fn new(seed: u64, range: (i64, i64)) -> Self {
        assert!(range.0 <= range.1, "empty nondeterminism range");
        Nondet { rng: ChaCha8Rng::seed_from_u64(seed), lo: range.0, hi: range.1 }
    }

    pub fn draw(&mut self) -> BigInt {
        BigInt::from(self.rng.gen_range(self.lo..=self.hi))
    }
}

/// Split an expression into its evaluation context and redex.
pub fn decompose(e: &Expr) -> (Vec<Expr>, Expr) {
    let mut ctx = Vec::new();
    let mut cur = e;
    while let Expr::Seq(a, b) = cur {
        ctx.push(b.as_ref().clone());
        cur = a;
    }
    (ctx, cur.clone())
}

/// Inverse of [`decompose`].
pub fn plug(ctx: &[Expr], redex: Expr) -> Expr {
    ctx.iter().rev().fold(redex, |inner, e| Expr::Seq(Box::new(inner), Box::new(e.clone())))
}

impl Configuration {
    pub fn initial(p: &Program) -> Self {
        let names = p.all_names();
        let mut c = Configuration {
            heap: Heap::new(),
            regs: RegisterFile::new(),
            stack: Vec::new(),
            ectx: Vec::new(),
            redex: Expr::Var(String::new()),
            next_addr: 0,
            names: NameSupply::above(names.iter().map(String::as_str)),
        };
        c.set_expr(p.entry.clone());
        c
    }

    /// The whole current expression `E[redex]`.
    pub fn expr(&self) -> Expr {
        plug(&self.ectx, self.redex.clone())
    }

    fn set_expr(&mut self, e: Expr) {
        let mut cur = e;
        while let Expr::Seq(a, b) = cur {
            self.ectx.push(*b);
            cur = *a;
        }
        self.redex = cur;
    }

    fn get(&self, x: &str) -> Result<&Value, Outcome> {
        self.regs.get(x).ok_or_else(|| Outcome::Stuck(format!("unbound variable `{x}`")))
    }

    fn addr(&self, x: &str) -> Result<u64, Outcome> {
        match self.get(x)? {
            Value::Addr(a) if self.heap.contains_key(a) => Ok(*a),
            Value::Addr(a) => Err(Outcome::Stuck(format!("dangling address @{a} in `{x}`"))),
            Value::Int(_) => Err(Outcome::Stuck(format!("`{x}` holds an integer, not an address"))),
        }
    }

    fn int(&self, x: &str) -> Result<BigInt, Outcome> {
        match self.get(x)? {
            Value::Int(n) => Ok(n.clone()),
            Value::Addr(_) => Err(Outcome::Stuck(format!("`{x}` holds an address, not an integer"))),
        }
    }

    /// Bind a refreshed copy of `x` and continue with the renamed body.
    fn bind(&mut self, x: &Var, v: Value, body: Expr) {
        let x2 = self.names.fresh(x);
        self.regs.insert(x2.clone(), v);
        self.set_expr(rename(&body, x, &x2));
    }

    fn alloc(&mut self, v: Value) -> u64 {
        let a = self.next_addr;
        self.next_addr += 1;
        self.heap.insert(a, v);
        a
    }

    /// Apply one transition rule in place.
    pub fn step_in_place(&mut self, defs: &BTreeMap<String, FunDef>, rng: &mut Nondet) -> Result<Rule, Outcome> {
        let redex = std::mem::replace(&mut self.redex, Expr::Var(String::new()));
        match redex {
            Expr::Var(x) => {
                if let Some(next) = self.ectx.pop() {
                    self.get(&x)?;
                    self.set_expr(next);
                    return Ok(Rule::Seq);
                }
                let Some(frame) = self.stack.pop() else {
                    return Err(Outcome::Final(self.get(&x)?.clone()));
                };
                self.ectx = frame.ectx;
                self.redex = Expr::Let { var: frame.binder, rhs: Rhs::Var(x), body: Box::new(frame.body) };
                Ok(Rule::Var)
            }
            Expr::Seq(..) => unreachable!("sequences are always decomposed"),
            Expr::Let { var, rhs, body } => match rhs {
                Rhs::Var(y) => {
                    let v = self.get(&y)?.clone();
                    self.bind(&var, v, *body);
                    Ok(Rule::Let)
                }
                Rhs::Int(n) => {
                    self.bind(&var, Value::int(n), *body);
                    Ok(Rule::LetInt)
                }
                Rhs::Mkref(y) => {
                    let v = self.get(&y)?.clone();
                    let a = self.alloc(v);
                    self.bind(&var, Value::Addr(a), *body);
                    Ok(Rule::MkRef)
                }
                Rhs::Deref(y) => {
                    let a = self.addr(&y)?;
                    let v = self.heap[&a].clone();
                    self.bind(&var, v, *body);
                    Ok(Rule::Deref)
                }
                Rhs::Call { func, label, args } => {
                    if let Some(def) = defs.get(&func) {
                        if def.params.len() != args.len() {
                            return Err(Outcome::Stuck(format!("arity mismatch calling `{func}`")));
                        }
                        for a in &args {
                            self.get(a)?;
                        }
                        let mut inst = def.body.clone();
                        for (x, y) in def.params.iter().zip(&args) {
                            inst = rename(&inst, x, y);
                        }
                        self.stack.push(ReturnContext {
                            ectx: std::mem::take(&mut self.ectx),
                            binder: var,
                            label,
                            body: *body,
                        });
                        self.set_expr(inst);
                        Ok(Rule::Call)
                    } else if let Some(prim) = primitives::lookup(&func) {
                        if prim.arity() != args.len() {
                            return Err(Outcome::Stuck(format!("arity mismatch calling `{func}`")));
                        }
                        let vals = args.iter().map(|a| self.int(a)).collect::<Result<Vec<_>, _>>()?;
                        let v = match prim.eval(&vals) {
                            Some(v) => v,
                            None => rng.draw(),
                        };
                        self.bind(&var, Value::Int(v), *body);
                        Ok(Rule::Prim)
                    } else {
                        Err(Outcome::Stuck(format!("call to undefined function `{func}`")))
                    }
                }
            },
            Expr::IfZero { cond, then_branch, else_branch } => {
                if self.int(&cond)?.is_zero() {
                    self.set_expr(*then_branch);
                    Ok(Rule::IfTrue)
                } else {
                    self.set_expr(*else_branch);
                    Ok(Rule::IfFalse)
                }
            }
            Expr::Assign { target, value, rest } => {
                let a = self.addr(&target)?;
                let v = self.get(&value)?.clone();
                self.heap.insert(a, v);
                self.set_expr(*rest);
                Ok(Rule::Assign)
            }
            Expr::Alias { lhs, rhs, rest } => {
                if self.get(&lhs)? == self.get(&rhs)? {
                    self.set_expr(*rest);
                    Ok(Rule::Alias)
                } else {
                    Err(Outcome::AliasFail)
                }
            }
            Expr::AliasDeref { lhs, rhs, rest } => {
                let a = self.addr(&rhs)?;
                if self.heap[&a] == *self.get(&lhs)? {
                    self.set_expr(*rest);
                    Ok(Rule::AliasPtr)
                } else {
                    Err(Outcome::AliasFail)
                }
            }
            Expr::Assert { formula, rest } => {
                if eval_formula(&self.regs, &formula) {
                    self.set_expr(*rest);
                    Ok(Rule::Assert)
                } else {
                    Err(Outcome::AssertFail)
                }
            }
        }
    }
}

/// Rule that fires on a failing configuration, for tracing.
fn failing_rule(redex: &Expr, outcome: &Outcome) -> Option<Rule> {
    match (redex, outcome) {
        (Expr::Alias { .. }, Outcome::AliasFail) => Some(Rule::AliasFail),
        (Expr::AliasDeref { .. }, Outcome::AliasFail) => Some(Rule::AliasPtrFail),
        (Expr::Assert { .. }, Outcome::AssertFail) => Some(Rule::AssertFail),
        _ => None,
    }
}

/// One transition from `c`.
pub fn step(mut c: Configuration, defs: &BTreeMap<String, FunDef>, rng: &mut Nondet) -> StepResult {
    match c.step_in_place(defs, rng) {
        Ok(_) => StepResult::Next(c),
        Err(o) => StepResult::Done(o),
    }
}

/// Short description of a redex for traces.
pub fn redex_summary(e: &Expr) -> String {
    match e {
        Expr::Let { var, rhs, .. } => format!("let {var} = {} in ...", pretty::rhs(rhs)),
        Expr::IfZero { cond, .. } => format!("ifz {cond} then ... else ..."),
        Expr::Assign { target, value, .. } => format!("{target} := {value}; ..."),
        Expr::Alias { lhs, rhs, .. } => format!("alias({lhs} = {rhs}); ..."),
        Expr::AliasDeref { lhs, rhs, .. } => format!("alias({lhs} = *{rhs}); ..."),
        Expr::Assert { formula, .. } => format!("assert({}); ...", pretty::formula(formula)),
        Expr::Var(x) => x.clone(),
        Expr::Seq(..) => "...; ...".to_string(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub fuel: u64,
    pub seed: u64,
    pub nondet_range: (i64, i64),
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { fuel: DEFAULT_FUEL, seed: 0, nondet_range: DEFAULT_NONDET_RANGE }
    }
}

/// Run `p` from the empty configuration.
pub fn run(p: &Program, fuel: u64, seed: u64) -> Outcome {
    run_with(p, &RunConfig { fuel, seed, ..RunConfig::default() }, None)
}

/// Run `p`, appending one `RULE redex` line per step to `trace` if given.
pub fn run_with(p: &Program, cfg: &RunConfig, trace: Option<&mut Vec<String>>) -> Outcome {
    execute(p, cfg, trace).0
}

/// Like [`run_with`], also returning the last configuration reached.
pub fn execute(p: &Program, cfg: &RunConfig, mut trace: Option<&mut Vec<String>>) -> (Outcome, Configuration) {
    let mut c = Configuration::initial(p);
    let mut rng = Nondet::new(cfg.seed, cfg.nondet_range);
    for _ in 0..cfg.fuel {
        let summary = trace.as_ref().map(|_| {
            let s = redex_summary(&c.redex);
            if matches!(c.redex, Expr::Var(_)) && !c.ectx.is_empty() {
                format!("{s}; ...")
            } else {
                s
            }
        });
        let before = c.redex.clone();
        match c.step_in_place(&p.defs, &mut rng) {
            Ok(rule) => {
                if let (Some(t), Some(s)) = (trace.as_deref_mut(), summary) {
                    t.push(format!("{rule} {s}"));
                }
            }
            Err(o) => {
                if let (Some(t), Some(s), Some(rule)) = (trace.as_deref_mut(), summary, failing_rule(&before, &o)) {
                    t.push(format!("{rule} {s}"));
                }
                if let Outcome::Stuck(reason) = &o {
                    log::warn!("interpreter stuck: {reason}");
                }
                return (o, c);
            }
        }
    }
    (Outcome::OutOfFuel, c)
}

fn eval_term(t: &Term, regs: &RegisterFile) -> Option<BigInt> {
    Some(match t {
        Term::Var(x) => match regs.get(x) {
            Some(Value::Int(n)) => n.clone(),
            _ => return None,
        },
        Term::Int(n) => BigInt::from(*n),
        Term::Nu => return None,
        Term::Add(a, b) => eval_term(a, regs)? + eval_term(b, regs)?,
        Term::Sub(a, b) => eval_term(a, regs)? - eval_term(b, regs)?,
        Term::Mul(k, a) => BigInt::from(*k) * eval_term(a, regs)?,
        Term::Neg(a) => -eval_term(a, regs)?,
    })
}

fn eval_closed(f: &Formula, regs: &RegisterFile) -> Option<bool> {
    Some(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(op, a, b) => {
            let (a, b) = (eval_term(a, regs)?, eval_term(b, regs)?);
            match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
            }
        }
        Formula::Not(g) => !eval_closed(g, regs)?,
        Formula::And(a, b) => eval_closed(a, regs)? && eval_closed(b, regs)?,
        Formula::Or(a, b) => eval_closed(a, regs)? || eval_closed(b, regs)?,
        Formula::Implies(a, b) => !eval_closed(a, regs)? || eval_closed(b, regs)?,
    })
}

/// Decide `[R]φ`. Integer bindings are substituted and address bindings
/// erased; a formula that still has free variables is not valid.
pub fn eval_formula(regs: &RegisterFile, f: &Formula) -> bool {
    let open: Vec<Var> = f.free_vars().into_iter().filter(|v| !matches!(regs.get(v), Some(Value::Int(_)))).collect();
    if !open.is_empty() || f.mentions_nu() {
        log::warn!("assertion `{}` has free variables after substitution: {open:?}", pretty::formula(f));
        return false;
    }
    eval_closed(f, regs).unwrap_or(false)
}

/// Final integer value, if any.
pub fn final_int(o: &Outcome) -> Option<i64> {
    match o {
        Outcome::Final(Value::Int(n)) => n.to_i64(),
        _ => None,
    }
}

#[cfg(test)]
mod tests;
