//! Program points, per-point type templates, and the typing-rule instances
//! that connect consecutive points.
//!
//! Every expression node owns a point holding the environment it is typed
//! in. A sequence shares its point with its first element, and the
//! continuation of an `assert` shares the point of the assertion. Each
//! function gets a begin and an end point; the entry expression gets a pair
//! as well. Results flow into a result template stored at the destination
//! point: the end point for a function or the entry, the point of the
//! second element for the first element of a sequence.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use crate::frontend::ast::{Expr, FnName, Formula, Label, Program, Rhs, Term, Var};
use crate::refinement::primitives::{self, PrimKind, Primitive};

use super::simple::{SimpleType, SimpleTypeMap};

pub type PointId = usize;
pub type PredId = usize;
pub type OwnId = usize;

/// Pseudo-variable naming the result template at a point.
pub const RESULT: &str = "$ret";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Owner {
    Entry,
    Function(FnName),
}

impl Owner {
    pub fn name(&self) -> &str {
        match self {
            Owner::Entry => "main",
            Owner::Function(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Node,
    Begin,
    End,
}

#[derive(Debug, Clone)]
pub struct ProgramPoint {
    pub id: PointId,
    pub owner: Owner,
    pub kind: PointKind,
    /// Short description of the node, for dumps.
    pub note: String,
    /// Integer-typed variables in scope, in lexicographic order.
    pub fv: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSymbol {
    pub name: String,
    pub point: PointId,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeTemplate {
    Int(PredId),
    Ref(Box<TypeTemplate>, OwnId),
}

impl TypeTemplate {
    /// Ownership variables from the outermost constructor inward.
    pub fn levels(&self) -> Vec<OwnId> {
        let mut out = Vec::new();
        let mut t = self;
        while let TypeTemplate::Ref(inner, r) = t {
            out.push(*r);
            t = inner;
        }
        out
    }

    /// The predicate on the integer at the bottom.
    pub fn leaf(&self) -> PredId {
        match self {
            TypeTemplate::Int(p) => *p,
            TypeTemplate::Ref(inner, _) => inner.leaf(),
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, TypeTemplate::Int(_))
    }

    pub fn shape(&self) -> SimpleType {
        match self {
            TypeTemplate::Int(_) => SimpleType::Int,
            TypeTemplate::Ref(inner, _) => SimpleType::reference(inner.shape()),
        }
    }
}

/// One typing-rule instance. `p` is the point the rule is applied at and
/// `q` the point of the continuation.
#[derive(Debug, Clone)]
pub enum Step {
    Let {
        p: PointId,
        q: PointId,
        x: Var,
        y: Var,
    },
    LetInt {
        p: PointId,
        q: PointId,
        x: Var,
        n: i64,
    },
    Mkref {
        p: PointId,
        q: PointId,
        x: Var,
        y: Var,
    },
    Deref {
        p: PointId,
        q: PointId,
        x: Var,
        y: Var,
    },
    Call {
        p: PointId,
        q: PointId,
        x: Var,
        func: FnName,
        label: Label,
        args: Vec<Var>,
    },
    /// Arguments are variables, or literals where a constant is known.
    Prim {
        p: PointId,
        q: PointId,
        x: Var,
        prim: &'static Primitive,
        args: Vec<Term>,
    },
    Branch {
        p: PointId,
        q: PointId,
        cond: Var,
        zero: bool,
    },
    Assign {
        p: PointId,
        q: PointId,
        target: Var,
        value: Var,
    },
    Alias {
        p: PointId,
        q: PointId,
        x: Var,
        y: Var,
    },
    AliasDeref {
        p: PointId,
        q: PointId,
        x: Var,
        y: Var,
    },
    Assert {
        p: PointId,
        formula: Formula,
    },
    /// `x` becomes the value of the enclosing expression; the environment
    /// flows into `dest` and `x` into the result template there.
    Return {
        p: PointId,
        x: Var,
        dest: PointId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwnershipLink {
    /// A zero ownership forces the predicate under it to be trivial.
    ForcesTop { own: OwnId, pred: PredId },
    /// Nested references: `outer = 0 ⇒ inner = 0`.
    ZeroImplies { outer: OwnId, inner: OwnId },
}

#[derive(Debug, Clone)]
pub struct TemplateEnv {
    pub k: usize,
    pub points: Vec<ProgramPoint>,
    pub preds: Vec<PredicateSymbol>,
    pub own_vars: Vec<String>,
    /// Γ^p for every point.
    pub envs: Vec<BTreeMap<Var, TypeTemplate>>,
    pub results: BTreeMap<PointId, TypeTemplate>,
    pub begin: BTreeMap<FnName, PointId>,
    pub end: BTreeMap<FnName, PointId>,
    pub params: BTreeMap<FnName, Vec<Var>>,
    pub entry_begin: PointId,
    pub entry_end: PointId,
    pub steps: Vec<Step>,
}

impl TemplateEnv {
    pub fn template(&self, p: PointId, x: &str) -> &TypeTemplate {
        &self.envs[p][x]
    }

    pub fn result(&self, p: PointId) -> &TypeTemplate {
        &self.results[&p]
    }

    /// All templates with their owning variable name and point.
    pub fn all_templates(&self) -> impl Iterator<Item = (PointId, &str, &TypeTemplate)> {
        let env = self.envs.iter().enumerate().flat_map(|(p, m)| m.iter().map(move |(x, t)| (p, x.as_str(), t)));
        env.chain(self.results.iter().map(|(p, t)| (*p, RESULT, t)))
    }

    /// Stable textual rendering of every Γ^p.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "context depth {}", self.k);
        for pt in &self.points {
            let _ = writeln!(out, "p{} {} {} fv=({})", pt.id, pt.owner.name(), pt.note, pt.fv.join(", "));
            for (x, t) in &self.envs[pt.id] {
                let _ = writeln!(out, "  {x}: {}", self.render(t));
            }
            if let Some(t) = self.results.get(&pt.id) {
                let _ = writeln!(out, "  {RESULT}: {}", self.render(t));
            }
        }
        out
    }

    pub fn render(&self, t: &TypeTemplate) -> String {
        match t {
            TypeTemplate::Int(p) => format!("{{ν:int | {}}}", self.preds[*p].name),
            TypeTemplate::Ref(inner, r) => format!("{} ref^{}", self.render(inner), self.own_vars[*r]),
        }
    }
}

/// Links implied by well-formedness of every template.
pub fn wf_link_constraints(env: &TemplateEnv) -> Vec<OwnershipLink> {
    let mut out = Vec::new();
    for (_, _, t) in env.all_templates() {
        let mut t = t;
        while let TypeTemplate::Ref(inner, r) = t {
            match inner.as_ref() {
                TypeTemplate::Int(p) => out.push(OwnershipLink::ForcesTop { own: *r, pred: *p }),
                TypeTemplate::Ref(_, r2) => out.push(OwnershipLink::ZeroImplies { outer: *r, inner: *r2 }),
            }
            t = inner;
        }
    }
    out
}

struct Builder<'a> {
    types: &'a SimpleTypeMap,
    env: TemplateEnv,
    consts: HashMap<Var, i64>,
}

impl Builder<'_> {
    fn point(&mut self, owner: &Owner, kind: PointKind, scope: &[Var], note: String) -> PointId {
        let id = self.env.points.len();
        let mut fv: Vec<Var> = scope.iter().filter(|x| self.types.var(x).is_int()).cloned().collect();
        fv.sort();
        self.env.points.push(ProgramPoint { id, owner: owner.clone(), kind, note, fv });
        self.env.envs.push(BTreeMap::new());
        for x in scope {
            let t = self.template(x, &self.types.var(x).clone(), id, 0);
            self.env.envs[id].insert(x.clone(), t);
        }
        id
    }

    fn template(&mut self, x: &str, ty: &SimpleType, p: PointId, depth: usize) -> TypeTemplate {
        match ty {
            SimpleType::Int => {
                let arity = 1 + self.env.k + self.env.points[p].fv.len();
                self.env.preds.push(PredicateSymbol { name: format!("phi_{x}_{depth}_p{p}"), point: p, arity });
                TypeTemplate::Int(self.env.preds.len() - 1)
            }
            SimpleType::Ref(inner) => {
                self.env.own_vars.push(format!("r_{x}_{depth}_p{p}"));
                let r = self.env.own_vars.len() - 1;
                TypeTemplate::Ref(Box::new(self.template(x, inner, p, depth + 1)), r)
            }
        }
    }

    fn result_template(&mut self, p: PointId, ty: &SimpleType) {
        let t = self.template(RESULT, ty, p, 0);
        self.env.results.insert(p, t);
    }

    fn walk(&mut self, e: &Expr, p: PointId, scope: &mut Vec<Var>, dest: PointId, owner: &Owner) {
        match e {
            Expr::Var(x) => self.env.steps.push(Step::Return { p, x: x.clone(), dest }),
            Expr::Let { var, rhs, body } => {
                if let Rhs::Int(n) = rhs {
                    self.consts.insert(var.clone(), *n);
                }
                scope.push(var.clone());
                let q = self.point(owner, PointKind::Node, scope, format!("let {var}"));
                let x = var.clone();
                let step = match rhs {
                    Rhs::Var(y) => Step::Let { p, q, x, y: y.clone() },
                    Rhs::Int(n) => Step::LetInt { p, q, x, n: *n },
                    Rhs::Mkref(y) => Step::Mkref { p, q, x, y: y.clone() },
                    Rhs::Deref(y) => Step::Deref { p, q, x, y: y.clone() },
                    Rhs::Call { func, label, args } => match primitives::lookup(func) {
                        Some(prim) => {
                            let args = args
                                .iter()
                                .map(|a| match self.consts.get(a) {
                                    Some(n) if prim.kind == PrimKind::Mul => Term::Int(*n),
                                    _ => Term::var(a.clone()),
                                })
                                .collect();
                            Step::Prim { p, q, x, prim, args }
                        }
                        None => Step::Call { p, q, x, func: func.clone(), label: *label, args: args.clone() },
                    },
                };
                self.env.steps.push(step);
                self.walk(body, q, scope, dest, owner);
                scope.pop();
            }
            Expr::IfZero { cond, then_branch, else_branch } => {
                for (zero, branch) in [(true, then_branch), (false, else_branch)] {
                    let note = format!("{} of ifz {cond}", if zero { "then" } else { "else" });
                    let q = self.point(owner, PointKind::Node, scope, note);
                    self.env.steps.push(Step::Branch { p, q, cond: cond.clone(), zero });
                    self.walk(branch, q, scope, dest, owner);
                }
            }
            Expr::Assign { target, value, rest } => {
                let q = self.point(owner, PointKind::Node, scope, format!("{target} := {value}"));
                self.env.steps.push(Step::Assign { p, q, target: target.clone(), value: value.clone() });
                self.walk(rest, q, scope, dest, owner);
            }
            Expr::Alias { lhs, rhs, rest } => {
                let q = self.point(owner, PointKind::Node, scope, format!("alias({lhs} = {rhs})"));
                self.env.steps.push(Step::Alias { p, q, x: lhs.clone(), y: rhs.clone() });
                self.walk(rest, q, scope, dest, owner);
            }
            Expr::AliasDeref { lhs, rhs, rest } => {
                let q = self.point(owner, PointKind::Node, scope, format!("alias({lhs} = *{rhs})"));
                self.env.steps.push(Step::AliasDeref { p, q, x: lhs.clone(), y: rhs.clone() });
                self.walk(rest, q, scope, dest, owner);
            }
            Expr::Assert { formula, rest } => {
                self.env.steps.push(Step::Assert { p, formula: formula.clone() });
                self.walk(rest, p, scope, dest, owner);
            }
            Expr::Seq(a, b) => {
                let q = self.point(owner, PointKind::Node, scope, "seq".into());
                let ty = self.types.result_of(a);
                self.result_template(q, &ty);
                self.walk(a, p, scope, q, owner);
                self.walk(b, q, scope, dest, owner);
            }
        }
    }
}

/// Build templates for every point of `p` with `k` context parameters.
pub fn generate_templates(p: &Program, types: &SimpleTypeMap, k: usize) -> TemplateEnv {
    let mut b = Builder {
        types,
        env: TemplateEnv {
            k,
            points: Vec::new(),
            preds: Vec::new(),
            own_vars: Vec::new(),
            envs: Vec::new(),
            results: BTreeMap::new(),
            begin: BTreeMap::new(),
            end: BTreeMap::new(),
            params: BTreeMap::new(),
            entry_begin: 0,
            entry_end: 0,
            steps: Vec::new(),
        },
        consts: HashMap::new(),
    };
    for (name, def) in &p.defs {
        let owner = Owner::Function(name.clone());
        let fb = b.point(&owner, PointKind::Begin, &def.params, format!("{name}^b"));
        let fe = b.point(&owner, PointKind::End, &def.params, format!("{name}^e"));
        b.result_template(fe, &types.returns[name]);
        b.env.begin.insert(name.clone(), fb);
        b.env.end.insert(name.clone(), fe);
        b.env.params.insert(name.clone(), def.params.clone());
    }
    for (name, def) in &p.defs {
        let owner = Owner::Function(name.clone());
        let mut scope = def.params.clone();
        let (fb, fe) = (b.env.begin[name], b.env.end[name]);
        b.walk(&def.body, fb, &mut scope, fe, &owner);
    }
    let eb = b.point(&Owner::Entry, PointKind::Begin, &[], "main^b".into());
    let ee = b.point(&Owner::Entry, PointKind::End, &[], "main^e".into());
    b.result_template(ee, &types.result_of(&p.entry));
    b.env.entry_begin = eb;
    b.env.entry_end = ee;
    b.walk(&p.entry, eb, &mut Vec::new(), ee, &Owner::Entry);
    b.env
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;
    use crate::typing::infer_simple_types;

    fn env_of(src: &str, k: usize) -> TemplateEnv {
        let p = load(src).unwrap();
        let t = infer_simple_types(&p).unwrap();
        generate_templates(&p, &t, k)
    }

    #[test]
    fn integer_template_arity_counts_context_and_scope() {
        let env = env_of("let w = 1 in let x = 2 in x", 1);
        let (p, _) = env.envs.iter().enumerate().find(|(_, m)| m.contains_key("x")).unwrap();
        assert_eq!(env.points[p].fv, vec!["w".to_string(), "x".to_string()]);
        let t = env.template(p, "x");
        assert!(t.is_int());
        assert_eq!(env.preds[t.leaf()].arity, 1 + 1 + 2);
    }

    #[test]
    fn nested_reference_template() {
        let env = env_of("let a = 0 in let b = mkref a in let x = mkref b in x", 0);
        let (p, _) = env.envs.iter().enumerate().find(|(_, m)| m.contains_key("x")).unwrap();
        let t = env.template(p, "x");
        let levels = t.levels();
        assert_eq!(levels.len(), 2);
        assert_eq!(env.own_vars[levels[0]], format!("r_x_0_p{p}"));
        assert_eq!(env.own_vars[levels[1]], format!("r_x_1_p{p}"));
        assert_eq!(env.preds[t.leaf()].name, format!("phi_x_2_p{p}"));
        let links = wf_link_constraints(&env);
        assert!(links.contains(&OwnershipLink::ZeroImplies { outer: levels[0], inner: levels[1] }));
        assert!(links.contains(&OwnershipLink::ForcesTop { own: levels[1], pred: t.leaf() }));
    }

    #[test]
    fn empty_scope_at_entry() {
        let env = env_of("let x = 0 in x", 1);
        assert!(env.envs[env.entry_begin].is_empty());
        assert!(env.points[env.entry_begin].fv.is_empty());
        assert!(wf_link_constraints(&env).is_empty());
    }

    #[test]
    fn function_points_use_parameters() {
        let env = env_of("get(z) { *z } let p = mkref 3 in get(p)", 1);
        let fb = env.begin["get"];
        let fe = env.end["get"];
        assert_eq!(env.envs[fb].keys().collect::<Vec<_>>(), vec!["z"]);
        assert!(env.points[fb].fv.is_empty());
        assert!(env.result(fe).is_int());
        assert!(env.steps.iter().any(|s| matches!(s, Step::Call { func, .. } if func == "get")));
    }

    #[test]
    fn names_are_unique_and_shapes_match() {
        let env = env_of(
            "loop(a, b) { let aold = *a in b := *b + 1; a := *a + 1; assert(*a = aold + 1); \
             ifz _ then loop(b, mkref _) else loop(b, a) } loop(mkref _, mkref _)",
            1,
        );
        let mut names: Vec<_> = env.preds.iter().map(|p| &p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), env.preds.len());
        let mut owns = env.own_vars.clone();
        owns.sort();
        owns.dedup();
        assert_eq!(owns.len(), env.own_vars.len());
        for (p, m) in env.envs.iter().enumerate() {
            for t in m.values() {
                assert_eq!(env.preds[t.leaf()].arity, 1 + 1 + env.points[p].fv.len());
            }
        }
    }
}
