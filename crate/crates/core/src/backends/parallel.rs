//! Racing several solvers on one script.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::thread;

use super::process::{run_solver_cancellable, SolverSpec, Verdict};

/// Run every spec concurrently. The first `sat` or `unsat` wins and the
/// rest are killed; a later definitive answer that disagrees turns the
/// result into a process error. Without a definitive answer the best
/// indefinite verdict is returned with no winner.
pub fn run_parallel(specs: &[SolverSpec], script: &str) -> (Verdict, Option<String>) {
    if specs.is_empty() {
        return (Verdict::ProcessError("no solvers configured".into()), None);
    }
    let cancel = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel();
    let mut winner: Option<(Verdict, String)> = None;
    let mut best: Option<Verdict> = None;
    let mut disagreement = None;
    thread::scope(|s| {
        for (i, spec) in specs.iter().enumerate() {
            let tx = tx.clone();
            let cancel = &cancel;
            s.spawn(move || {
                let v = run_solver_cancellable(spec, script, Some(cancel));
                let _ = tx.send((i, v));
            });
        }
        drop(tx);
        for (i, v) in rx.iter() {
            let Some(v) = v else { continue };
            log::debug!("{} answered {v}", specs[i].name);
            if v.is_definitive() {
                match &winner {
                    None => {
                        winner = Some((v, specs[i].name.clone()));
                        cancel.store(true, Ordering::SeqCst);
                    }
                    Some((w, name)) if *w != v => {
                        disagreement =
                            Some(format!("solver disagreement: {name} said {w}, {} said {v}", specs[i].name));
                    }
                    Some(_) => {}
                }
            } else if best.as_ref().is_none_or(|b| v.rank() > b.rank()) {
                best = Some(v);
            }
        }
    });
    if let Some(d) = disagreement {
        return (Verdict::ProcessError(d), None);
    }
    match winner {
        Some((v, name)) => (v, Some(name)),
        None => (best.unwrap_or(Verdict::Unknown), None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn no_solvers_is_an_error() {
        assert!(matches!(run_parallel(&[], ""), (Verdict::ProcessError(_), None)));
    }

    #[test]
    fn indefinite_answers_keep_the_best() {
        let t = Duration::from_secs(5);
        let specs = [
            SolverSpec::custom("missing", "/nonexistent/solver", &[], t),
            SolverSpec::custom("echo", "sh", &["-c", "echo unknown"], t),
        ];
        assert_eq!(run_parallel(&specs, ""), (Verdict::Unknown, None));
    }
}
