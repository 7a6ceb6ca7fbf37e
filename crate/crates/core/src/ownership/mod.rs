//! Ownership constraints from the typing rules and their solution.

pub mod exact;
pub mod smt;

use std::fmt;

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::typing::{OwnId, OwnershipLink, PointId, Step, TemplateEnv};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwnershipTerm {
    Var(OwnId),
    Const(Rational),
}

impl OwnershipTerm {
    pub fn one() -> Self {
        OwnershipTerm::Const(Rational::one())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwnershipConstraint {
    Eq(OwnershipTerm, OwnershipTerm),
    /// `t1 = t2 + t3`
    Sum(OwnershipTerm, OwnershipTerm, OwnershipTerm),
    /// `t1 >= t2`
    Geq(OwnershipTerm, OwnershipTerm),
    /// `v1 = 0 ⇒ v2 = 0`
    ZeroImplies(OwnId, OwnId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OwnershipSystem {
    /// Template variables first, then auxiliary split variables.
    pub names: Vec<String>,
    pub constraints: Vec<OwnershipConstraint>,
}

impl OwnershipSystem {
    fn fresh(&mut self, base: &str) -> OwnId {
        self.names.push(format!("{base}{}", self.names.len()));
        self.names.len() - 1
    }

    pub fn render(&self, c: &OwnershipConstraint) -> String {
        let t = |t: &OwnershipTerm| match t {
            OwnershipTerm::Var(v) => self.names[*v].clone(),
            OwnershipTerm::Const(q) => q.to_string(),
        };
        match c {
            OwnershipConstraint::Eq(a, b) => format!("{} = {}", t(a), t(b)),
            OwnershipConstraint::Sum(a, b, c) => format!("{} = {} + {}", t(a), t(b), t(c)),
            OwnershipConstraint::Geq(a, b) => format!("{} >= {}", t(a), t(b)),
            OwnershipConstraint::ZeroImplies(a, b) => {
                format!("{} = 0 => {} = 0", self.names[*a], self.names[*b])
            }
        }
    }
}

/// Values for every variable of a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnershipAssignment {
    pub values: Vec<Rational>,
}

impl OwnershipAssignment {
    pub fn get(&self, v: OwnId) -> &Rational {
        &self.values[v]
    }

    pub fn is_zero(&self, v: OwnId) -> bool {
        self.values[v].is_zero()
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }

    fn term(&self, t: &OwnershipTerm) -> Rational {
        match t {
            OwnershipTerm::Var(v) => self.values[*v].clone(),
            OwnershipTerm::Const(q) => q.clone(),
        }
    }

    /// Exact re-check of bounds and every constraint.
    pub fn check(&self, sys: &OwnershipSystem) -> Result<(), String> {
        if self.values.len() != sys.names.len() {
            return Err(format!("{} values for {} variables", self.values.len(), sys.names.len()));
        }
        for (i, v) in self.values.iter().enumerate() {
            if v.is_negative() || *v > Rational::one() {
                return Err(format!("{} = {v} is outside [0, 1]", sys.names[i]));
            }
        }
        for c in &sys.constraints {
            let ok = match c {
                OwnershipConstraint::Eq(a, b) => self.term(a) == self.term(b),
                OwnershipConstraint::Sum(a, b, c) => self.term(a) == self.term(b) + self.term(c),
                OwnershipConstraint::Geq(a, b) => self.term(a) >= self.term(b),
                OwnershipConstraint::ZeroImplies(a, b) => !self.is_zero(*a) || self.is_zero(*b),
            };
            if !ok {
                return Err(format!("violated: {}", sys.render(c)));
            }
        }
        Ok(())
    }

    /// `name = p/q` lines in variable order.
    pub fn render(&self, sys: &OwnershipSystem) -> String {
        let mut out = String::new();
        for (name, v) in sys.names.iter().zip(&self.values) {
            out.push_str(&format!("{name} = {}/{}\n", v.numer(), v.denom()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OwnershipError {
    /// `core` lists constraint indices known to conflict, when available.
    #[error("ownership constraints are infeasible")]
    Infeasible { core: Vec<usize> },
    #[error("ownership solver unavailable: {0}")]
    SolverUnavailable(String),
    #[error("ownership solver timed out")]
    SolverTimeout,
    #[error("ownership solver failed: {0}")]
    SolverFailure(String),
}

/// Which procedure solves the ownership system.
#[derive(Debug, Clone)]
pub enum OwnershipBackend {
    /// An SMT-LIB2 solver for linear real arithmetic.
    Smt(smt::SmtCommand),
    /// The built-in exact rational simplex.
    Exact,
}

impl fmt::Display for OwnershipBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OwnershipBackend::Smt(c) => write!(f, "smt ({})", c.executable.display()),
            OwnershipBackend::Exact => f.write_str("exact"),
        }
    }
}

/// Solve `sys`, maximizing the set of strictly positive variables. The
/// returned assignment has been re-checked exactly.
pub fn solve_ownership(
    sys: &OwnershipSystem,
    backend: &OwnershipBackend,
) -> Result<OwnershipAssignment, OwnershipError> {
    let a = match backend {
        OwnershipBackend::Smt(cmd) => smt::solve(sys, cmd)?,
        OwnershipBackend::Exact => exact::solve(sys)?,
    };
    a.check(sys).map_err(|e| OwnershipError::SolverFailure(format!("model fails exact re-check: {e}")))?;
    Ok(a)
}

struct Gen<'a> {
    env: &'a TemplateEnv,
    sys: OwnershipSystem,
}

fn var(v: OwnId) -> OwnershipTerm {
    OwnershipTerm::Var(v)
}

impl Gen<'_> {
    fn levels(&self, p: PointId, x: &str) -> Vec<OwnId> {
        self.env.template(p, x).levels()
    }

    fn push(&mut self, c: OwnershipConstraint) {
        self.sys.constraints.push(c);
    }

    fn sum(&mut self, a: OwnId, b: OwnId, c: OwnId) {
        self.push(OwnershipConstraint::Sum(var(a), var(b), var(c)));
    }

    fn geq(&mut self, a: OwnId, b: OwnId) {
        self.push(OwnershipConstraint::Geq(var(a), var(b)));
    }

    fn eq(&mut self, a: OwnId, b: OwnId) {
        self.push(OwnershipConstraint::Eq(var(a), var(b)));
    }

    fn is_one(&mut self, a: OwnId) {
        self.push(OwnershipConstraint::Eq(var(a), OwnershipTerm::one()));
    }

    /// Variables the rule leaves alone flow into the continuation by
    /// subtyping.
    fn frame(&mut self, p: PointId, q: PointId, except: &[&str]) {
        let env = self.env;
        for (z, tq) in &env.envs[q] {
            if except.contains(&z.as_str()) {
                continue;
            }
            if let Some(tp) = env.envs[p].get(z) {
                for (a, b) in tp.levels().into_iter().zip(tq.levels()) {
                    self.geq(a, b);
                }
            }
        }
    }

    /// The two ownerships of one cell are redistributed: equal totals at
    /// every depth.
    fn shuffle(&mut self, before: [OwnId; 2], after: [OwnId; 2]) {
        let total = self.sys.fresh("alias_total");
        self.sum(total, before[0], before[1]);
        self.sum(total, after[0], after[1]);
    }

    fn step(&mut self, s: &Step) {
        let env = self.env;
        match s {
            Step::Let { p, q, x, y } => {
                let (yp, yq, xq) = (self.levels(*p, y), self.levels(*q, y), self.levels(*q, x));
                for n in 0..yp.len() {
                    self.sum(yp[n], yq[n], xq[n]);
                }
                self.frame(*p, *q, &[y]);
            }
            Step::LetInt { p, q, .. } | Step::Prim { p, q, .. } | Step::Branch { p, q, .. } => {
                self.frame(*p, *q, &[]);
            }
            Step::Mkref { p, q, x, y } => {
                let (yp, yq, xq) = (self.levels(*p, y), self.levels(*q, y), self.levels(*q, x));
                self.is_one(xq[0]);
                for n in 0..yp.len() {
                    self.sum(yp[n], yq[n], xq[n + 1]);
                }
                self.frame(*p, *q, &[y]);
            }
            Step::Deref { p, q, x, y } => {
                let (yp, yq, xq) = (self.levels(*p, y), self.levels(*q, y), self.levels(*q, x));
                self.geq(yp[0], yq[0]);
                for n in 0..xq.len() {
                    self.sum(yp[n + 1], yq[n + 1], xq[n]);
                }
                self.frame(*p, *q, &[y]);
            }
            Step::Call { p, q, x, func, args, .. } => {
                let (fb, fe) = (env.begin[func], env.end[func]);
                for (y, param) in args.iter().zip(&env.params[func]) {
                    for (a, b) in self.levels(*p, y).into_iter().zip(self.levels(fb, param)) {
                        self.eq(a, b);
                    }
                    for (a, b) in self.levels(fe, param).into_iter().zip(self.levels(*q, y)) {
                        self.eq(a, b);
                    }
                }
                for (a, b) in env.result(fe).levels().into_iter().zip(self.levels(*q, x)) {
                    self.eq(a, b);
                }
                let except: Vec<&str> = args.iter().map(|a| a.as_str()).collect();
                self.frame(*p, *q, &except);
            }
            Step::Assign { p, q, target, value } => {
                let (tp, tq) = (self.levels(*p, target), self.levels(*q, target));
                let (vp, vq) = (self.levels(*p, value), self.levels(*q, value));
                self.is_one(tp[0]);
                self.geq(tp[0], tq[0]);
                for n in 0..vp.len() {
                    self.sum(vp[n], vq[n], tq[n + 1]);
                }
                self.frame(*p, *q, &[target, value]);
            }
            Step::Alias { p, q, x, y } => {
                if x == y {
                    self.frame(*p, *q, &[]);
                    return;
                }
                let (xp, xq, yp, yq) = (self.levels(*p, x), self.levels(*q, x), self.levels(*p, y), self.levels(*q, y));
                for n in 0..xp.len() {
                    self.shuffle([xp[n], yp[n]], [xq[n], yq[n]]);
                }
                self.frame(*p, *q, &[x, y]);
            }
            Step::AliasDeref { p, q, x, y } => {
                let (xp, xq, yp, yq) = (self.levels(*p, x), self.levels(*q, x), self.levels(*p, y), self.levels(*q, y));
                self.geq(yp[0], yq[0]);
                for n in 0..xp.len() {
                    self.shuffle([xp[n], yp[n + 1]], [xq[n], yq[n + 1]]);
                }
                self.frame(*p, *q, &[x, y]);
            }
            Step::Assert { .. } => {}
            Step::Return { p, x, dest } => {
                let xp = self.levels(*p, x);
                let res = env.result(*dest).levels();
                match env.envs[*dest].get(x) {
                    Some(t) => {
                        let xd = t.levels();
                        for n in 0..xp.len() {
                            let s = self.sys.fresh("split");
                            self.sum(s, res[n], xd[n]);
                            self.geq(xp[n], s);
                        }
                    }
                    None => {
                        for n in 0..xp.len() {
                            self.geq(xp[n], res[n]);
                        }
                    }
                }
                self.frame(*p, *dest, &[x]);
            }
        }
    }
}

/// One constraint set for the whole program: the rule instances recorded
/// in `env` plus the nested well-formedness links.
pub fn generate_ownership_constraints(env: &TemplateEnv) -> OwnershipSystem {
    let mut g = Gen { env, sys: OwnershipSystem { names: env.own_vars.clone(), constraints: Vec::new() } };
    for s in &env.steps {
        g.step(s);
    }
    for link in crate::typing::wf_link_constraints(env) {
        if let OwnershipLink::ZeroImplies { outer, inner } = link {
            g.push(OwnershipConstraint::ZeroImplies(outer, inner));
        }
    }
    g.sys
}
