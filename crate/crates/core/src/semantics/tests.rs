use super::*;
use crate::frontend::load;
use proptest::prelude::*;

fn prog(src: &str) -> Program {
    load(src).unwrap()
}

const FIG1: &str = "mk(n) { mkref n }
    let p = mk(3) in let q = mk(5) in
    p := *p + 1; q := *q + 1;
    assert(*p = 4)";

#[test]
fn trivial_program_returns_its_value() {
    assert_eq!(run(&prog("let x = 0 in x"), 100, 0), Outcome::Final(Value::int(0)));
}

#[test]
fn fig1_final_cell_holds_four() {
    let (o, c) = execute(&prog(FIG1), &RunConfig::default(), None);
    assert!(matches!(o, Outcome::Final(_)), "{o:?}");
    // p's cell was allocated first.
    assert_eq!(c.heap[&0], Value::int(4));
    assert_eq!(c.heap[&1], Value::int(6));
}

#[test]
fn fig1_with_wrong_assertion_fails() {
    let p = prog(&FIG1.replace("*p = 4", "*p = 5"));
    assert_eq!(run(&p, 1000, 0), Outcome::AssertFail);
}

#[test]
fn if_true_takes_first_branch() {
    let p = prog("let x = 0 in ifz x then 1 else 2");
    assert_eq!(run(&p, 100, 0), Outcome::Final(Value::int(1)));
    let p = prog("let x = 7 in ifz x then 1 else 2");
    assert_eq!(run(&p, 100, 0), Outcome::Final(Value::int(2)));
}

#[test]
fn alias_of_distinct_cells_fails() {
    let p = prog("let x = mkref 0 in let y = mkref 0 in alias(x = y); 0");
    assert_eq!(run(&p, 100, 0), Outcome::AliasFail);
    let p = prog("let x = mkref 0 in let y = x in alias(x = y); 0");
    assert_eq!(run(&p, 100, 0), Outcome::Final(Value::int(0)));
}

#[test]
fn deref_of_integer_is_stuck() {
    let p = Program {
        defs: Default::default(),
        entry: Expr::Let {
            var: "x".into(),
            rhs: Rhs::Int(1),
            body: Box::new(Expr::Let {
                var: "y".into(),
                rhs: Rhs::Deref("x".into()),
                body: Box::new(Expr::Var("y".into())),
            }),
        },
    };
    assert!(matches!(run(&p, 100, 0), Outcome::Stuck(_)));
}

#[test]
fn divergence_runs_out_of_fuel() {
    let p = prog("f(x) { f(x) } f(0)");
    assert_eq!(run(&p, 500, 0), Outcome::OutOfFuel);
}

#[test]
fn nondet_is_reproducible_per_seed() {
    let p = prog("let x = _ in let y = _ in x + y");
    let a = run(&p, 100, 42);
    assert_eq!(a, run(&p, 100, 42));
    let distinct: std::collections::HashSet<_> = (0..20).map(|s| final_int(&run(&p, 100, s))).collect();
    assert!(distinct.len() > 1);
    for s in 0..50 {
        let v = final_int(&run(&p, 100, s)).unwrap();
        assert!((-256..=254).contains(&v));
    }
}

#[test]
fn formula_evaluation() {
    let mut r = RegisterFile::new();
    r.insert("x".into(), Value::int(4));
    assert!(eval_formula(&r, &Formula::eq(Term::var("x"), Term::Int(4))));
    r.insert("a".into(), Value::Addr(3));
    assert!(eval_formula(&r, &Formula::True));
    // Erased addresses leave a free variable, which is not valid.
    assert!(!eval_formula(&r, &Formula::eq(Term::var("a"), Term::var("a"))));
}

proptest! {
    #[test]
    fn successor_formula_agrees_with_arithmetic(n in -1_000_000i64..1_000_000, d in -3i64..3) {
        let mut r = RegisterFile::new();
        r.insert("aold".into(), Value::int(n));
        r.insert("t".into(), Value::int(n + 1 + d));
        let f = Formula::eq(Term::var("t"), Term::plus(Term::var("aold"), Term::Int(1)));
        prop_assert_eq!(eval_formula(&r, &f), d == 0);
    }

    #[test]
    fn run_is_deterministic(seed in any::<u64>()) {
        let p = prog("let x = mkref _ in ifz *x then x := _ else x := 3; *x + _");
        prop_assert_eq!(run(&p, 1000, seed), run(&p, 1000, seed));
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        "[a-c]".prop_map(Expr::Var),
        (any::<i8>(), "[a-c]").prop_map(|(n, x)| Expr::Let {
            var: x.clone(),
            rhs: Rhs::Int(n as i64),
            body: Box::new(Expr::Var(x))
        }),
    ];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Seq(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::IfZero {
                cond: "a".into(),
                then_branch: Box::new(a),
                else_branch: Box::new(b)
            }),
            inner.prop_map(|a| Expr::Assert { formula: Formula::True, rest: Box::new(a) }),
        ]
    })
}

proptest! {
    #[test]
    fn decomposition_is_unique(e in arb_expr()) {
        let (ctx, redex) = decompose(&e);
        prop_assert!(!matches!(redex, Expr::Seq(..)));
        prop_assert_eq!(plug(&ctx, redex), e);
    }
}

#[test]
fn fig1_is_final_for_every_seed() {
    let p = prog(FIG1);
    for seed in 0..20 {
        assert!(matches!(run(&p, 10_000, seed), Outcome::Final(_)));
    }
}

#[test]
fn shuffle_ends_with_two_in_the_shared_cell() {
    let src = "let x = mkref 0 in let y = x in
        x := 1; alias(x = y);
        y := 1; alias(x = y);
        x := 2; alias(x = y);
        assert(*x = 2); assert(*y = 2)";
    let (o, c) = execute(&prog(src), &RunConfig::default(), None);
    assert!(matches!(o, Outcome::Final(_)), "{o:?}");
    assert_eq!(c.heap.values().filter(|v| **v == Value::int(2)).count(), 1);
}
