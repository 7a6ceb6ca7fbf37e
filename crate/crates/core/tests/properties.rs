//! Invariants checked over randomly generated well-typed programs.

use std::collections::BTreeSet;

use proptest::prelude::*;

use consort::frontend::{self, Program};
use consort::ownership::{exact, generate_ownership_constraints, solve_ownership, OwnershipBackend};
use consort::refinement::{emit_smtlib2_horn, generate_chc, Head};
use consort::semantics::{self, Outcome};
use consort::typing::{generate_templates, infer_simple_types, Step, TemplateEnv, TypeTemplate};

#[derive(Debug, Clone)]
struct Op {
    kind: u8,
    a: usize,
    b: usize,
    c: usize,
    n: i8,
}

fn op() -> impl Strategy<Value = Op> {
    (0u8..11, any::<usize>(), any::<usize>(), any::<usize>(), any::<i8>()).prop_map(|(kind, a, b, c, n)| Op {
        kind,
        a,
        b,
        c,
        n,
    })
}

/// Source text for `ops`. Every assertion is a tautology and every alias
/// annotation relates a copy to its original, so runs never fail.
fn render(ops: &[Op]) -> String {
    let mut ints: Vec<String> = Vec::new();
    let mut refs: Vec<String> = Vec::new();
    let mut copies: Vec<(String, String)> = Vec::new();
    let mut out = String::from("inc(r) { let v = *r in r := v + 1; v }\n");
    let pick = |v: &Vec<String>, i: usize| v[i % v.len()].clone();
    for o in ops {
        let fresh_int = format!("i{}", ints.len());
        let fresh_ref = format!("r{}", refs.len());
        match o.kind {
            0 => {
                out += &format!("let {fresh_int} = {} in\n", o.n);
                ints.push(fresh_int);
            }
            1 if !ints.is_empty() => {
                out += &format!("let {fresh_int} = {} + {} in\n", pick(&ints, o.a), pick(&ints, o.b));
                ints.push(fresh_int);
            }
            2 => {
                out += &format!("let {fresh_int} = _ in\n");
                ints.push(fresh_int);
            }
            3 => {
                let init = if ints.is_empty() { o.n.to_string() } else { pick(&ints, o.a) };
                out += &format!("let {fresh_ref} = mkref {init} in\n");
                refs.push(fresh_ref);
            }
            4 if !refs.is_empty() => {
                out += &format!("let {fresh_int} = *{} in\n", pick(&refs, o.a));
                ints.push(fresh_int);
            }
            5 if !refs.is_empty() && !ints.is_empty() => {
                out += &format!("{} := {};\n", pick(&refs, o.a), pick(&ints, o.b));
            }
            6 if !refs.is_empty() => {
                let src = pick(&refs, o.a);
                out += &format!("let {fresh_ref} = {src} in\n");
                copies.push((fresh_ref.clone(), src));
                refs.push(fresh_ref);
            }
            7 if !refs.is_empty() && !ints.is_empty() => {
                let r = pick(&refs, o.b);
                out += &format!("ifz {} then ({r} := {}) else ({r} := {});\n", pick(&ints, o.a), pick(&ints, o.c), o.n);
            }
            8 if !ints.is_empty() => {
                let x = pick(&ints, o.a);
                out += &format!("assert({x} <= {x});\n");
            }
            9 if !refs.is_empty() => {
                out += &format!("let {fresh_int} = inc({}) in\n", pick(&refs, o.a));
                ints.push(fresh_int);
            }
            10 if !copies.is_empty() => {
                let (x, y) = &copies[o.a % copies.len()];
                out += &format!("alias({x} = {y});\n");
            }
            _ => {}
        }
    }
    out += &ints.last().cloned().unwrap_or_else(|| "0".into());
    out.push('\n');
    out
}

fn program() -> impl Strategy<Value = String> {
    prop::collection::vec(op(), 0..14).prop_map(|ops| render(&ops))
}

fn templates(p: &Program, k: usize) -> TemplateEnv {
    let types = infer_simple_types(p).expect("generated programs are well typed");
    generate_templates(p, &types, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binders_and_labels_are_unique(src in program()) {
        let p = frontend::load(&src).unwrap();
        let binders = p.binders();
        prop_assert_eq!(binders.iter().collect::<BTreeSet<_>>().len(), binders.len());
        let labels = p.labels();
        prop_assert_eq!(labels.iter().collect::<BTreeSet<_>>().len(), labels.len());
    }

    #[test]
    fn runs_never_fail_or_get_stuck(src in program(), seed in any::<u64>()) {
        let p = frontend::load(&src).unwrap();
        let o = semantics::run(&p, 100_000, seed);
        prop_assert!(matches!(o, Outcome::Final(_)), "{o} for\n{src}");
    }

    #[test]
    fn free_variables_are_the_integers_in_scope(src in program(), k in 0usize..3) {
        let p = frontend::load(&src).unwrap();
        let env = templates(&p, k);
        for (id, point) in env.points.iter().enumerate() {
            let ints: BTreeSet<&str> = env.envs[id]
                .iter()
                .filter(|(_, t)| matches!(t, TypeTemplate::Int(_)))
                .map(|(x, _)| x.as_str())
                .collect();
            let fv: BTreeSet<&str> = point.fv.iter().map(String::as_str).collect();
            prop_assert_eq!(fv.len(), point.fv.len());
            prop_assert_eq!(fv, ints);
        }
        let mut names = BTreeSet::new();
        for s in &env.preds {
            prop_assert_eq!(s.arity, 1 + k + env.points[s.point].fv.len());
            prop_assert!(names.insert(s.name.clone()), "duplicate {}", s.name);
        }
    }

    #[test]
    fn templates_follow_simple_types(src in program()) {
        let p = frontend::load(&src).unwrap();
        let types = infer_simple_types(&p).unwrap();
        let env = generate_templates(&p, &types, 1);
        for (_, x, t) in env.all_templates() {
            if let Some(s) = types.vars.get(x) {
                prop_assert_eq!(&t.shape(), s);
            }
            let levels = t.levels();
            prop_assert_eq!(levels.iter().collect::<BTreeSet<_>>().len(), levels.len());
        }
    }

    #[test]
    fn ownership_assignments_satisfy_the_system(src in program()) {
        let p = frontend::load(&src).unwrap();
        let env = templates(&p, 1);
        let sys = generate_ownership_constraints(&env);
        match solve_ownership(&sys, &OwnershipBackend::Exact) {
            Ok(a) => {
                prop_assert!(a.check(&sys).is_ok());
                for v in 0..sys.names.len() {
                    let q = a.get(v);
                    prop_assert!(*q >= num::zero() && *q <= num::one());
                }
                // Maximality: a variable left at zero cannot be made positive.
                let zeros: Vec<usize> = (0..sys.names.len()).filter(|v| a.is_zero(*v)).collect();
                let support = exact::max_support(&sys).unwrap();
                for v in zeros {
                    prop_assert!(!support.contains(&v));
                }
            }
            Err(e) => prop_assert!(matches!(e, consort::ownership::OwnershipError::Infeasible { .. }), "{e}"),
        }
    }

    #[test]
    fn horn_systems_are_well_formed_and_stable(src in program(), k in 0usize..3) {
        let p = frontend::load(&src).unwrap();
        let env = templates(&p, k);
        let sys = generate_ownership_constraints(&env);
        let Ok(a) = solve_ownership(&sys, &OwnershipBackend::Exact) else { return Ok(()) };
        let chc = generate_chc(&env, &a);
        prop_assert!(chc.well_formed().is_ok(), "{:?}", chc.well_formed());
        let asserts = env.steps.iter().filter(|s| matches!(s, Step::Assert { .. })).count();
        prop_assert_eq!(chc.goal_count(), asserts);
        for f in &chc.forced {
            let heads: Vec<_> = chc.clauses.iter().filter(|c| matches!(&c.head, Head::Atom(h) if h.pred == *f)).collect();
            prop_assert_eq!(heads.len(), 1);
            prop_assert!(heads[0].body_atoms.is_empty() && heads[0].body.is_empty());
        }
        for s in env.all_templates().map(|(_, _, t)| t) {
            if s.levels().iter().any(|r| a.is_zero(*r)) {
                prop_assert!(chc.forced.contains(&s.leaf()));
            }
        }
        prop_assert_eq!(emit_smtlib2_horn(&chc), emit_smtlib2_horn(&generate_chc(&env, &a)));
    }
}

#[test]
fn generator_covers_every_statement_kind() {
    let op = |kind, n| Op { kind, a: 0, b: 0, c: 0, n };
    let mut ops = vec![op(0, 1), op(3, 1)];
    ops.extend((0..11).map(|kind| op(kind, 3)));
    let src = render(&ops);
    for needle in ["= 3 in", " + ", "= _ in", "mkref", "= *r", ":= i", "ifz", "assert(", "inc(r", "alias("] {
        assert!(src.contains(needle), "{needle} missing from\n{src}");
    }
    let p = frontend::load(&src).unwrap();
    assert!(matches!(semantics::run(&p, 100_000, 0), Outcome::Final(_)));
}
