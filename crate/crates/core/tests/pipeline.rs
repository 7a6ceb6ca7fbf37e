mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use consort::backends::SolverSpec;
use consort::ownership::{exact, smt};
use consort::pipeline::{expectation, prepare, verify_source, Outcome, Phase};

use common::*;

#[test]
fn stub_pipeline_is_fast_on_the_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let sat = stub(tmp.path(), "sat", "0", "sat");
    for (name, src) in corpus_files() {
        let start = Instant::now();
        let r = verify_source(&src, &stub_config(1, sat.clone()));
        let t = start.elapsed();
        assert!(t < Duration::from_millis(100), "{name} took {t:?}");
        let want = if name == "intro2-ALIAS" { Outcome::Rejected(Phase::Ownership) } else { Outcome::Verified };
        assert_eq!(r.outcome, want, "{name}");
    }
}

#[test]
fn solver_answers_map_to_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let src = corpus("fig1");
    let mut slow = stub(tmp.path(), "slow", "5", "sat");
    slow.timeout = Duration::from_millis(100);
    let broken = SolverSpec::custom("broken", script(tmp.path(), "broken", "exit 2"), &[], Duration::from_secs(5));
    let cases = [
        (stub(tmp.path(), "unsat", "0", "unsat"), "cannot verify (refinement)"),
        (stub(tmp.path(), "unknown", "0", "unknown"), "unknown: solver answered unknown"),
        (slow, "unknown: solver timed out"),
        (broken, "error: broken exited with 2 without a verdict"),
    ];
    for (spec, want) in cases {
        let r = verify_source(&src, &stub_config(1, spec));
        assert_eq!(r.outcome.to_string(), want);
    }
}

#[test]
fn the_winner_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = stub_config(1, stub(tmp.path(), "quick", "0", "sat"));
    cfg.solvers.push(stub(tmp.path(), "lazy", "5", "sat"));
    let r = verify_source(&corpus("fig3"), &cfg);
    assert_eq!(r.outcome, Outcome::Verified);
    assert_eq!(r.winner.as_deref(), Some("quick"));
    assert!(r.timings.iter().any(|(p, _)| *p == "horn solving"));
}

#[test]
fn context_depth_changes_arity_only() {
    let src = corpus("fig3");
    let tmp = tempfile::tempdir().unwrap();
    let sat = stub(tmp.path(), "sat", "0", "sat");
    let (r0, a0) = prepare(&src, &stub_config(0, sat.clone()));
    let (r2, a2) = prepare(&src, &stub_config(2, sat));
    assert_eq!(r0.counts.predicates, r2.counts.predicates);
    let (t0, t2) = (a0.unwrap().templates, a2.unwrap().templates);
    for (p0, p2) in t0.preds.iter().zip(&t2.preds) {
        assert_eq!(p0.arity + 2, p2.arity);
    }
}

#[test]
fn shuffle_counts_three_annotations() {
    let (r, _) =
        prepare(&corpus("shuffle"), &stub_config(1, SolverSpec::custom("x", "true", &[], Duration::from_secs(1))));
    assert_eq!(r.counts.alias_annotations, 3);
}

#[test]
fn every_corpus_file_declares_an_expectation() {
    for (name, src) in corpus_files() {
        assert!(expectation(&src).is_some(), "{name}");
    }
}

fn real() -> bool {
    if !real_solvers_enabled() {
        eprintln!("skipped: set CONSORT_REAL_SOLVERS=1 to run");
        return false;
    }
    true
}

#[test]
fn real_corpus_matches_expectations() {
    if !real() {
        return;
    }
    for (name, src) in corpus_files() {
        let r = verify_source(&src, &real_config(1));
        let ok = match expectation(&src) {
            Some(true) => r.outcome == Outcome::Verified,
            Some(false) => matches!(r.outcome, Outcome::Rejected(_)),
            None => false,
        };
        assert!(ok, "{name}: {}", r.outcome);
    }
}

#[test]
fn real_two_level_needs_depth_two() {
    if !real() {
        return;
    }
    let src = corpus("two-level");
    assert_eq!(verify_source(&src, &real_config(1)).outcome, Outcome::Rejected(Phase::Refinement));
    assert_eq!(verify_source(&src, &real_config(2)).outcome, Outcome::Verified);
}

#[test]
fn real_ownership_support_matches_exact() {
    if !real() {
        return;
    }
    let cmd = smt::SmtCommand::z3(Duration::from_secs(30));
    for (name, src) in corpus_files() {
        let (_, art) = prepare(&src, &stub_config(1, SolverSpec::custom("x", "true", &[], Duration::from_secs(1))));
        let sys = art.unwrap().ownership;
        match (exact::max_support(&sys), smt::solve(&sys, &cmd)) {
            (Ok(support), Ok(a)) => {
                let z3: BTreeSet<usize> = (0..sys.names.len()).filter(|v| !a.is_zero(*v)).collect();
                assert_eq!(support, z3, "{name}");
            }
            (Err(_), Err(_)) => {}
            (e, s) => panic!("{name}: exact {e:?}, smt {s:?}"),
        }
    }
}
