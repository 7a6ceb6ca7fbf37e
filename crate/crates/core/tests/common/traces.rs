//! Expected interpreter traces, one program per transition rule.

pub struct Golden {
    pub rule: &'static str,
    pub source: &'static str,
    pub trace: &'static [&'static str],
    pub outcome: &'static str,
}

pub const GOLDEN: &[Golden] = &[
    Golden {
        rule: "R-Var",
        source: "id(x) { x }\nlet a = 3 in\nid(a)",
        trace: &[
            "R-LetInt let a = 3 in ...",
            "R-Call let t$0 = id(a$1) in ...",
            "R-Var a$1",
            "R-Let let t$0 = a$1 in ...",
        ],
        outcome: "final 3",
    },
    Golden {
        rule: "R-Seq",
        source: "let a = 1 in\na; a",
        trace: &["R-LetInt let a = 1 in ...", "R-Seq a$0; ..."],
        outcome: "final 1",
    },
    Golden {
        rule: "R-Let",
        source: "let a = 1 in\nlet b = a in\nb",
        trace: &["R-LetInt let a = 1 in ...", "R-Let let b = a$0 in ..."],
        outcome: "final 1",
    },
    Golden { rule: "R-LetInt", source: "let a = 7 in\na", trace: &["R-LetInt let a = 7 in ..."], outcome: "final 7" },
    Golden {
        rule: "R-IfTrue",
        source: "let a = 0 in\nifz a then 1 else 2",
        trace: &["R-LetInt let a = 0 in ...", "R-IfTrue ifz a$2 then ... else ...", "R-LetInt let t$0 = 1 in ..."],
        outcome: "final 1",
    },
    Golden {
        rule: "R-IfFalse",
        source: "let a = 5 in\nifz a then 1 else 2",
        trace: &["R-LetInt let a = 5 in ...", "R-IfFalse ifz a$2 then ... else ...", "R-LetInt let t$1 = 2 in ..."],
        outcome: "final 2",
    },
    Golden {
        rule: "R-MkRef",
        source: "let a = 1 in\nlet p = mkref a in\n0",
        trace: &["R-LetInt let a = 1 in ...", "R-MkRef let p = mkref a$1 in ...", "R-LetInt let t$0 = 0 in ..."],
        outcome: "final 0",
    },
    Golden {
        rule: "R-Deref",
        source: "let p = mkref 4 in\nlet v = *p in\nv",
        trace: &["R-LetInt let t$0 = 4 in ...", "R-MkRef let p = mkref t$1 in ...", "R-Deref let v = *p$2 in ..."],
        outcome: "final 4",
    },
    Golden {
        rule: "R-Call",
        source: "inc(x) { x + 1 }\nlet a = 1 in\ninc(a)",
        trace: &[
            "R-LetInt let a = 1 in ...",
            "R-Call let t$2 = inc(a$3) in ...",
            "R-LetInt let t$0 = 1 in ...",
            "R-Prim let t$1 = a$3 + t$4 in ...",
            "R-Var t$5",
            "R-Let let t$2 = t$5 in ...",
        ],
        outcome: "final 2",
    },
    Golden {
        rule: "R-Assign",
        source: "let p = mkref 1 in\np := 2;\n*p",
        trace: &[
            "R-LetInt let t$0 = 1 in ...",
            "R-MkRef let p = mkref t$3 in ...",
            "R-LetInt let t$2 = 2 in ...",
            "R-Assign p$4 := t$5; ...",
            "R-Deref let t$1 = *p$4 in ...",
        ],
        outcome: "final 2",
    },
    Golden {
        rule: "R-Alias",
        source: "let p = mkref 1 in\nlet q = p in\nalias(p = q);\n0",
        trace: &[
            "R-LetInt let t$0 = 1 in ...",
            "R-MkRef let p = mkref t$2 in ...",
            "R-Let let q = p$3 in ...",
            "R-Alias alias(p$3 = q$4); ...",
            "R-LetInt let t$1 = 0 in ...",
        ],
        outcome: "final 0",
    },
    Golden {
        rule: "R-AliasPtr",
        source: "let p = mkref 1 in\nlet r = mkref p in\nalias(p = *r);\n0",
        trace: &[
            "R-LetInt let t$0 = 1 in ...",
            "R-MkRef let p = mkref t$2 in ...",
            "R-MkRef let r = mkref p$3 in ...",
            "R-AliasPtr alias(p$3 = *r$4); ...",
            "R-LetInt let t$1 = 0 in ...",
        ],
        outcome: "final 0",
    },
    Golden {
        rule: "R-AliasFail",
        source: "let p = mkref 1 in\nlet q = mkref 1 in\nalias(p = q);\n0",
        trace: &[
            "R-LetInt let t$0 = 1 in ...",
            "R-MkRef let p = mkref t$3 in ...",
            "R-LetInt let t$1 = 1 in ...",
            "R-MkRef let q = mkref t$5 in ...",
            "R-AliasFail alias(p$4 = q$6); ...",
        ],
        outcome: "alias failure",
    },
    Golden {
        rule: "R-AliasPtrFail",
        source: "let p = mkref 1 in\nlet q = mkref 1 in\nlet r = mkref q in\nalias(p = *r);\n0",
        trace: &[
            "R-LetInt let t$0 = 1 in ...",
            "R-MkRef let p = mkref t$3 in ...",
            "R-LetInt let t$1 = 1 in ...",
            "R-MkRef let q = mkref t$5 in ...",
            "R-MkRef let r = mkref q$6 in ...",
            "R-AliasPtrFail alias(p$4 = *r$7); ...",
        ],
        outcome: "alias failure",
    },
    Golden {
        rule: "R-Assert",
        source: "let a = 2 in\nassert(a = 2);\na",
        trace: &["R-LetInt let a = 2 in ...", "R-Assert assert(a$0 = 2); ..."],
        outcome: "final 2",
    },
    Golden {
        rule: "R-AssertFail",
        source: "let a = 2 in\nassert(a = 3);\na",
        trace: &["R-LetInt let a = 2 in ...", "R-AssertFail assert(a$0 = 3); ..."],
        outcome: "assertion failure",
    },
];

/// Run one golden case; `Err` describes the first difference.
pub fn check(g: &Golden) -> Result<(), String> {
    use consort::semantics::{run_with, RunConfig};
    let p = consort::frontend::load(g.source).map_err(|e| format!("{}: {e}", g.rule))?;
    let mut lines = Vec::new();
    let outcome = run_with(&p, &RunConfig::default(), Some(&mut lines));
    if lines != g.trace {
        return Err(format!("{}: trace\n{}\nexpected\n{}", g.rule, lines.join("\n"), g.trace.join("\n")));
    }
    if outcome.to_string() != g.outcome {
        return Err(format!("{}: outcome {outcome}, expected {}", g.rule, g.outcome));
    }
    let named = lines.iter().filter(|l| l.split(' ').next() == Some(g.rule)).count();
    if named == 0 {
        return Err(format!("{}: rule never fired", g.rule));
    }
    Ok(())
}
