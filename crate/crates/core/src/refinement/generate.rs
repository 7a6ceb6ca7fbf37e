//! Horn clauses for the refinement half of the typing rules, under a solved
//! ownership assignment.
//!
//! Each predicate is applied to the value, the context parameters and the
//! integer variables in scope at its point. Inside a function the context
//! parameters are variables; in the entry expression they are all `0`, and
//! a call passes `ℓ, c1, ..., c(k-1)` to the callee.

use num::Signed;

use crate::frontend::ast::{CmpOp, Formula, Term, Var};
use crate::ownership::OwnershipAssignment;
use crate::typing::{Owner, PointId, PredId, Step, TemplateEnv, TypeTemplate};

use super::chc::{context_param, Atom, ChcSystem, Head, HornClause};

/// Body shared by the clauses of one rule instance.
#[derive(Clone, Default)]
struct Pre {
    atoms: Vec<Atom>,
    body: Vec<Formula>,
}

impl Pre {
    fn with_atom(&self, a: Atom) -> Pre {
        let mut p = self.clone();
        p.atoms.push(a);
        p
    }

    fn with(&self, f: Formula) -> Pre {
        let mut p = self.clone();
        p.body.push(f);
        p
    }
}

struct Gen<'a> {
    env: &'a TemplateEnv,
    own: &'a OwnershipAssignment,
    sys: ChcSystem,
}

fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

impl Gen<'_> {
    fn ctx(&self, p: PointId) -> Vec<Term> {
        match self.env.points[p].owner {
            Owner::Entry => vec![Term::Int(0); self.env.k],
            Owner::Function(_) => (1..=self.env.k).map(|i| var(&context_param(i))).collect(),
        }
    }

    fn fv(&self, p: PointId) -> Vec<Term> {
        self.env.points[p].fv.iter().map(|x| var(x)).collect()
    }

    fn atom(&self, pred: PredId, value: Term, ctx: &[Term], fv: Vec<Term>) -> Atom {
        let mut args = vec![value];
        args.extend_from_slice(ctx);
        args.extend(fv);
        Atom { pred, args }
    }

    fn at(&self, p: PointId, pred: PredId, value: Term) -> Atom {
        self.atom(pred, value, &self.ctx(p), self.fv(p))
    }

    fn gamma(&self, p: PointId) -> Pre {
        let atoms = self.env.envs[p]
            .iter()
            .filter_map(|(z, t)| match t {
                TypeTemplate::Int(pred) => Some(self.at(p, *pred, var(z))),
                TypeTemplate::Ref(..) => None,
            })
            .collect();
        Pre { atoms, body: Vec::new() }
    }

    /// Atoms of the integer variables among `vars` at `p`.
    fn local<'v>(&self, p: PointId, vars: impl IntoIterator<Item = &'v str>) -> Pre {
        let mut pre = Pre::default();
        for x in vars {
            if let Some(TypeTemplate::Int(pred)) = self.env.envs[p].get(x) {
                let a = self.at(p, *pred, var(x));
                if !pre.atoms.contains(&a) {
                    pre.atoms.push(a);
                }
            }
        }
        pre
    }

    fn clause(&mut self, pre: &Pre, head: Atom) {
        if self.sys.forced.contains(&head.pred) {
            return;
        }
        self.sys.clauses.push(HornClause {
            body_atoms: pre.atoms.clone(),
            body: pre.body.clone(),
            head: Head::Atom(head),
        });
    }

    /// `pre ∧ src(ν) ⇒ dst(ν)` between the leaves of two templates.
    fn leaf_flow(&mut self, pre: &Pre, p: PointId, src: &TypeTemplate, q: PointId, dst: &TypeTemplate) {
        let pre = pre.with_atom(self.at(p, src.leaf(), Term::Nu));
        let head = self.at(q, dst.leaf(), Term::Nu);
        self.clause(&pre, head);
    }

    /// The type of `x` at `p` is a subtype of `dst` at `q`. The body must
    /// already hold the atom of an integer `x`.
    fn flow(&mut self, pre: &Pre, p: PointId, x: &str, q: PointId, dst: &TypeTemplate) {
        let src = self.env.template(p, x);
        if src.is_int() {
            let head = self.at(q, dst.leaf(), var(x));
            self.clause(pre, head);
        } else {
            self.leaf_flow(pre, p, src, q, dst);
        }
    }

    /// Carries every other variable from `p` to `q`, each under its own
    /// atom and the step's `facts`.
    fn frame(&mut self, facts: &[Formula], p: PointId, q: PointId, except: &[&str]) {
        let env = self.env;
        for (z, tq) in &env.envs[q] {
            if !except.contains(&z.as_str()) && env.envs[p].contains_key(z) {
                let mut pre = self.local(p, [z.as_str()]);
                pre.body.extend_from_slice(facts);
                self.flow(&pre, p, z, q, tq);
            }
        }
    }

    /// Both directions of `x_p + y_p ≈ x_q + y_q` on the leaves.
    fn equivalence(&mut self, p: PointId, q: PointId, x: &str, y: &str) {
        let env = self.env;
        let old = [env.template(p, x).leaf(), env.template(p, y).leaf()];
        let new = [env.template(q, x).leaf(), env.template(q, y).leaf()];
        for (from, to, a, b) in [(p, q, old, new), (q, p, new, old)] {
            let pre = Pre { atoms: a.iter().map(|pred| self.at(from, *pred, Term::Nu)).collect(), body: Vec::new() };
            for pred in b {
                let head = self.at(to, pred, Term::Nu);
                self.clause(&pre, head);
            }
        }
    }

    fn positive(&self, r: usize) -> bool {
        self.own.get(r).is_positive()
    }

    fn step(&mut self, s: &Step) {
        let env = self.env;
        match s {
            Step::Let { p, q, x, y } => {
                let (tx, ty) = (env.template(*q, x), env.template(*q, y));
                if env.template(*p, y).is_int() {
                    let same = Formula::eq(var(x), var(y));
                    let post = self.local(*p, [y.as_str()]).with(same.clone());
                    let (hx, hy) = (self.at(*q, tx.leaf(), var(x)), self.at(*q, ty.leaf(), var(y)));
                    self.clause(&post, hx);
                    self.clause(&post, hy);
                    self.frame(&[same], *p, *q, &[y]);
                } else {
                    let pre = Pre::default();
                    self.flow(&pre, *p, y, *q, tx);
                    self.flow(&pre, *p, y, *q, ty);
                    self.frame(&[], *p, *q, &[y]);
                }
            }
            Step::LetInt { p, q, x, n } => {
                let fact = Formula::eq(var(x), Term::Int(*n));
                let post = Pre::default().with(fact.clone());
                let head = self.at(*q, env.template(*q, x).leaf(), var(x));
                self.clause(&post, head);
                self.frame(&[fact], *p, *q, &[]);
            }
            Step::Mkref { p, q, x, y } => {
                let pre = self.local(*p, [y.as_str()]);
                self.flow(&pre, *p, y, *q, env.template(*q, x));
                self.flow(&pre, *p, y, *q, env.template(*q, y));
                self.frame(&[], *p, *q, &[y]);
            }
            Step::Deref { p, q, x, y } => {
                let (yp, yq, xq) = (env.template(*p, y), env.template(*q, y), env.template(*q, x));
                if xq.is_int() {
                    let post = Pre::default().with_atom(self.at(*p, yp.leaf(), var(x)));
                    let head = self.at(*q, xq.leaf(), var(x));
                    self.clause(&post, head);
                    let mut content = post.with_atom(self.at(*p, yp.leaf(), Term::Nu));
                    if self.positive(yq.levels()[0]) {
                        content = content.with(Formula::eq(Term::Nu, var(x)));
                    }
                    let head = self.at(*q, yq.leaf(), Term::Nu);
                    self.clause(&content, head);
                } else {
                    let pre = Pre::default();
                    self.leaf_flow(&pre, *p, yp, *q, xq);
                    self.leaf_flow(&pre, *p, yp, *q, yq);
                }
                self.frame(&[], *p, *q, &[y]);
            }
            Step::Call { p, q, x, func, label, args } => self.call(*p, *q, x, func, *label, args),
            Step::Prim { p, q, x, prim, args } => {
                let mut used = Vec::new();
                for a in args {
                    a.free_vars(&mut used);
                }
                let mut post = self.local(*p, used.iter().map(String::as_str));
                let mut facts = Vec::new();
                if let Some(schema) = prim.refinement(args) {
                    let x = var(x);
                    facts.push(schema.map_terms(&|t| t.subst_nu(&x)));
                }
                post.body.extend(facts.iter().cloned());
                let head = self.at(*q, env.template(*q, x).leaf(), var(x));
                self.clause(&post, head);
                self.frame(&facts, *p, *q, &[]);
            }
            Step::Branch { p, q, cond, zero } => {
                let test = Formula::cmp(if *zero { CmpOp::Eq } else { CmpOp::Ne }, var(cond), Term::Int(0));
                self.frame(&[test], *p, *q, &[]);
            }
            Step::Assign { p, q, target, value } => {
                let pre = self.local(*p, [value.as_str()]);
                self.flow(&pre, *p, value, *q, env.template(*q, target));
                self.flow(&pre, *p, value, *q, env.template(*q, value));
                self.frame(&[], *p, *q, &[target, value]);
            }
            Step::Alias { p, q, x, y } | Step::AliasDeref { p, q, x, y } => {
                if x == y {
                    self.frame(&[], *p, *q, &[]);
                } else {
                    self.equivalence(*p, *q, x, y);
                    self.frame(&[], *p, *q, &[x, y]);
                }
            }
            Step::Assert { p, formula } => {
                let pre = self.gamma(*p).with(Formula::negate(formula.clone()));
                self.sys.clauses.push(HornClause { body_atoms: pre.atoms, body: pre.body, head: Head::False });
            }
            Step::Return { p, x, dest } => {
                let pre = self.local(*p, [x.as_str()]);
                self.flow(&pre, *p, x, *dest, env.result(*dest));
                self.frame(&[], *p, *dest, &[]);
            }
        }
    }

    fn call(&mut self, p: PointId, q: PointId, x: &Var, func: &str, label: u32, args: &[Var]) {
        let env = self.env;
        let (fb, fe) = (env.begin[func], env.end[func]);
        let params = &env.params[func];
        let mut callee_ctx = Vec::new();
        if env.k > 0 {
            callee_ctx.push(Term::Int(label.into()));
            callee_ctx.extend(self.ctx(p).into_iter().take(env.k - 1));
        }
        let actual = |f: PointId| -> Vec<Term> {
            env.points[f].fv.iter().map(|v| var(params.iter().position(|w| w == v).map_or(v, |i| &args[i]))).collect()
        };
        let callee = |g: &Self, f: PointId, pred: PredId, value: Term| g.atom(pred, value, &callee_ctx, actual(f));

        let pre = self.local(p, args.iter().map(String::as_str));
        for (y, param) in args.iter().zip(params) {
            let (ty, tb) = (env.template(p, y), env.template(fb, param));
            let (body, value) = if ty.is_int() {
                (pre.clone(), var(y))
            } else {
                (pre.with_atom(self.at(p, ty.leaf(), Term::Nu)), Term::Nu)
            };
            let head = callee(self, fb, tb.leaf(), value);
            self.clause(&body, head);
        }

        let mut post = pre;
        for (y, param) in args.iter().zip(params) {
            let te = env.template(fe, param);
            if te.is_int() {
                post.atoms.push(callee(self, fe, te.leaf(), var(y)));
            }
        }
        let ret = env.result(fe);
        let xq = env.template(q, x);
        if ret.is_int() {
            post.atoms.push(callee(self, fe, ret.leaf(), var(x)));
            let head = self.at(q, xq.leaf(), var(x));
            self.clause(&post, head);
        } else {
            let body = post.with_atom(callee(self, fe, ret.leaf(), Term::Nu));
            let head = self.at(q, xq.leaf(), Term::Nu);
            self.clause(&body, head);
        }
        for (y, param) in args.iter().zip(params) {
            let (te, tq) = (env.template(fe, param), env.template(q, y));
            if te.is_int() {
                let head = self.at(q, tq.leaf(), var(y));
                self.clause(&post, head);
            } else {
                let body = post.with_atom(callee(self, fe, te.leaf(), Term::Nu));
                let head = self.at(q, tq.leaf(), Term::Nu);
                self.clause(&body, head);
            }
        }
        let except: Vec<&str> = args.iter().map(String::as_str).collect();
        self.frame(&[], p, q, &except);
    }
}

/// Predicates under a zero ownership at any enclosing level.
fn forced_predicates(env: &TemplateEnv, own: &OwnershipAssignment) -> Vec<PredId> {
    let mut out: Vec<PredId> = env
        .all_templates()
        .filter(|(_, _, t)| t.levels().iter().any(|r| own.is_zero(*r)))
        .map(|(_, _, t)| t.leaf())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The Horn system for `env` under `own`. Forcing clauses come first, then
/// the clauses of each rule instance in order.
pub fn generate_chc(env: &TemplateEnv, own: &OwnershipAssignment) -> ChcSystem {
    let mut g = Gen { env, own, sys: ChcSystem { preds: env.preds.clone(), ..ChcSystem::default() } };
    for pred in forced_predicates(env, own) {
        let p = env.preds[pred].point;
        let ctx: Vec<Term> = (1..=env.k).map(|i| var(&context_param(i))).collect();
        let head = g.atom(pred, Term::Nu, &ctx, g.fv(p));
        g.sys.clauses.push(HornClause { body_atoms: Vec::new(), body: Vec::new(), head: Head::Atom(head) });
        g.sys.forced.insert(pred);
    }
    for s in &env.steps {
        g.step(s);
    }
    g.sys
}
