//! Ownership solving through an external SMT-LIB2 solver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::PathBuf;
use std::time::Duration;

use num::{BigRational, Signed, Zero};

use super::{OwnershipAssignment, OwnershipConstraint, OwnershipError, OwnershipSystem, OwnershipTerm};
use crate::backends::{run_capture, RunFailure};
use crate::smtlib;

#[derive(Debug, Clone)]
pub struct SmtCommand {
    pub executable: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SmtCommand {
    /// `z3`, or the path in `CONSORT_Z3`.
    pub fn z3(timeout: Duration) -> SmtCommand {
        let executable = std::env::var_os("CONSORT_Z3").map(PathBuf::from).unwrap_or_else(|| "z3".into());
        SmtCommand { executable, args: Vec::new(), timeout }
    }
}

fn term(sys: &OwnershipSystem, t: &OwnershipTerm) -> String {
    match t {
        OwnershipTerm::Var(v) => smtlib::symbol(&sys.names[*v]),
        OwnershipTerm::Const(q) => smtlib::real(q),
    }
}

fn constraint(sys: &OwnershipSystem, c: &OwnershipConstraint) -> String {
    match c {
        OwnershipConstraint::Eq(a, b) => format!("(= {} {})", term(sys, a), term(sys, b)),
        OwnershipConstraint::Sum(a, b, c) => {
            format!("(= {} (+ {} {}))", term(sys, a), term(sys, b), term(sys, c))
        }
        OwnershipConstraint::Geq(a, b) => format!("(>= {} {})", term(sys, a), term(sys, b)),
        OwnershipConstraint::ZeroImplies(a, b) => {
            format!("(=> (= {} 0.0) (= {} 0.0))", smtlib::symbol(&sys.names[*a]), smtlib::symbol(&sys.names[*b]))
        }
    }
}

fn declarations(sys: &OwnershipSystem, named: bool) -> String {
    let mut out = String::new();
    if named {
        out.push_str("(set-option :produce-unsat-cores true)\n");
    }
    out.push_str("(set-logic QF_LRA)\n");
    for name in &sys.names {
        let s = smtlib::symbol(name);
        let _ = writeln!(out, "(declare-const {s} Real)");
        let _ = writeln!(out, "(assert (and (<= 0.0 {s}) (<= {s} 1.0)))");
    }
    for (i, c) in sys.constraints.iter().enumerate() {
        if named {
            let _ = writeln!(out, "(assert (! {} :named c{i}))", constraint(sys, c));
        } else {
            let _ = writeln!(out, "(assert {})", constraint(sys, c));
        }
    }
    out
}

/// Plain feasibility script: declarations with `[0, 1]` bounds, every
/// constraint, `(check-sat)` and `(get-model)`.
pub fn emit_ownership_smt(sys: &OwnershipSystem) -> String {
    let mut out = declarations(sys, false);
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

enum Answer {
    Sat(BTreeMap<String, BigRational>),
    Unsat(Vec<String>),
}

fn ask(cmd: &SmtCommand, script: &str) -> Result<Answer, OwnershipError> {
    let out = match run_capture(&cmd.executable, &cmd.args, script, cmd.timeout, None) {
        Ok(o) => o,
        Err(RunFailure::Timeout) => return Err(OwnershipError::SolverTimeout),
        Err(RunFailure::Spawn(e)) => return Err(OwnershipError::SolverUnavailable(e)),
        Err(RunFailure::Cancelled) => return Err(OwnershipError::SolverFailure("cancelled".into())),
    };
    let verdict = out.stdout.lines().map(str::trim).find(|l| matches!(*l, "sat" | "unsat" | "unknown"));
    match verdict {
        Some("sat") => {
            let mut model = BTreeMap::new();
            for (name, value) in smtlib::model_values(&out.stdout) {
                if let Some(q) = smtlib::rational_value(&value) {
                    model.insert(name, q);
                } else if value.atom().is_some_and(|a| a.ends_with('?')) {
                    return Err(OwnershipError::SolverFailure(format!("inexact model value for {name}")));
                }
            }
            Ok(Answer::Sat(model))
        }
        Some("unsat") => {
            let core = smtlib::parse_all(&out.stdout)
                .into_iter()
                .filter_map(|s| s.list().map(|l| l.to_vec()))
                .find(|l| l.iter().all(|e| e.atom().is_some()))
                .map(|l| l.iter().filter_map(|e| e.atom().map(str::to_string)).collect())
                .unwrap_or_default();
            Ok(Answer::Unsat(core))
        }
        _ => Err(OwnershipError::SolverFailure(format!(
            "no verdict from {}: {}",
            cmd.executable.display(),
            out.stderr.trim()
        ))),
    }
}

fn script(sys: &OwnershipSystem, extra: &[String]) -> String {
    let mut s = declarations(sys, true);
    for e in extra {
        s.push_str(e);
        s.push('\n');
    }
    s.push_str("(check-sat)\n(get-unsat-core)\n(get-model)\n");
    s
}

fn values(sys: &OwnershipSystem, model: &BTreeMap<String, BigRational>) -> Vec<BigRational> {
    sys.names.iter().map(|n| model.get(n).cloned().unwrap_or_else(BigRational::zero)).collect()
}

/// Maximum-support solve. Each round asks for a model in which all
/// not-yet-positive variables are positive, dropping the ones named in an
/// unsat core until the rest is satisfiable; when nothing is left, a
/// disjunction decides whether any of them can be positive at all. The
/// answer is the average of the models found, which stays feasible since
/// the linear part is convex and averaging never zeroes a variable that
/// was positive in some model.
pub fn solve(sys: &OwnershipSystem, cmd: &SmtCommand) -> Result<OwnershipAssignment, OwnershipError> {
    let n = sys.names.len();
    let mut models = Vec::new();
    match ask(cmd, &script(sys, &[]))? {
        Answer::Sat(m) => models.push(values(sys, &m)),
        Answer::Unsat(core) => {
            let core = core.iter().filter_map(|c| c.strip_prefix('c')?.parse().ok()).collect();
            return Err(OwnershipError::Infeasible { core });
        }
    }
    let mut positive: BTreeSet<usize> = (0..n).filter(|v| models[0][*v].is_positive()).collect();
    loop {
        let pending: Vec<usize> = (0..n).filter(|v| !positive.contains(v)).collect();
        if pending.is_empty() {
            break;
        }
        let mut soft: BTreeSet<usize> = pending.iter().copied().collect();
        let mut found = None;
        while !soft.is_empty() {
            let extra: Vec<String> = soft
                .iter()
                .map(|v| format!("(assert (! (> {} 0.0) :named s{v}))", smtlib::symbol(&sys.names[*v])))
                .collect();
            match ask(cmd, &script(sys, &extra))? {
                Answer::Sat(m) => {
                    found = Some(values(sys, &m));
                    break;
                }
                Answer::Unsat(core) => {
                    let drop: Vec<usize> = core.iter().filter_map(|c| c.strip_prefix('s')?.parse().ok()).collect();
                    if drop.is_empty() {
                        soft.clear();
                    }
                    for d in drop {
                        soft.remove(&d);
                    }
                }
            }
        }
        if found.is_none() {
            let any = pending
                .iter()
                .map(|v| format!("(> {} 0.0)", smtlib::symbol(&sys.names[*v])))
                .collect::<Vec<_>>()
                .join(" ");
            if let Answer::Sat(m) = ask(cmd, &script(sys, &[format!("(assert (or {any}))")]))? {
                found = Some(values(sys, &m));
            }
        }
        match found {
            Some(m) => {
                let before = positive.len();
                positive.extend((0..n).filter(|v| m[*v].is_positive()));
                models.push(m);
                if positive.len() == before {
                    break;
                }
            }
            None => break,
        }
    }
    let k = BigRational::from_integer(models.len().into());
    let values = (0..n).map(|v| models.iter().map(|m| m[v].clone()).sum::<BigRational>() / &k).collect();
    Ok(OwnershipAssignment { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ownership::OwnershipTerm;

    #[test]
    fn one_variable_script() {
        let sys = OwnershipSystem {
            names: vec!["r".into()],
            constraints: vec![OwnershipConstraint::Eq(OwnershipTerm::Var(0), OwnershipTerm::one())],
        };
        assert_eq!(
            emit_ownership_smt(&sys),
            "(set-logic QF_LRA)\n(declare-const r Real)\n(assert (and (<= 0.0 r) (<= r 1.0)))\n\
             (assert (= r 1.0))\n(check-sat)\n(get-model)\n"
        );
    }

    #[test]
    fn sum_and_link_rendering() {
        let v = OwnershipTerm::Var;
        let sys = OwnershipSystem {
            names: vec!["a".into(), "b".into(), "c".into()],
            constraints: vec![OwnershipConstraint::Sum(v(0), v(1), v(2)), OwnershipConstraint::ZeroImplies(0, 1)],
        };
        let s = emit_ownership_smt(&sys);
        assert!(s.contains("(assert (= a (+ b c)))"), "{s}");
        assert!(s.contains("(assert (=> (= a 0.0) (= b 0.0)))"), "{s}");
    }
}
