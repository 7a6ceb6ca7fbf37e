//! The verification pipeline: front end, simple types, templates, ownership,
//! then the Horn system.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::backends::{run_parallel, SolverKind, SolverSpec, Verdict, DEFAULT_TIMEOUT};
use crate::frontend::{self, Program};
use crate::ownership::{
    generate_ownership_constraints, smt::SmtCommand, solve_ownership, OwnershipAssignment, OwnershipBackend,
    OwnershipError, OwnershipSystem,
};
use crate::refinement::{emit_smtlib2_horn, generate_chc};
use crate::typing::{generate_templates, infer_simple_types, Step, TemplateEnv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Ownership,
    Refinement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Verified,
    Rejected(Phase),
    Unknown(String),
    ToolError(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::Rejected(_) => 1,
            Outcome::Unknown(_) => 2,
            Outcome::ToolError(_) => 3,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Verified => f.write_str("verified"),
            Outcome::Rejected(Phase::Ownership) => f.write_str("cannot verify (ownership)"),
            Outcome::Rejected(Phase::Refinement) => f.write_str("cannot verify (refinement)"),
            Outcome::Unknown(d) => write!(f, "unknown: {d}"),
            Outcome::ToolError(d) => write!(f, "error: {d}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub context_depth: usize,
    /// One spec runs alone; several race.
    pub solvers: Vec<SolverSpec>,
    pub ownership: OwnershipBackend,
    pub dump_templates: Option<PathBuf>,
    pub dump_ownership: Option<PathBuf>,
    pub dump_chc: Option<PathBuf>,
}

impl VerifyConfig {
    pub fn new(context_depth: usize, solvers: Vec<SolverSpec>, ownership: OwnershipBackend) -> Self {
        VerifyConfig { context_depth, solvers, ownership, dump_templates: None, dump_ownership: None, dump_chc: None }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig::new(
            1,
            vec![SolverSpec::for_kind(SolverKind::Spacer, DEFAULT_TIMEOUT)],
            OwnershipBackend::Smt(SmtCommand::z3(DEFAULT_TIMEOUT)),
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct Counts {
    pub predicates: usize,
    pub clauses: usize,
    pub goals: usize,
    pub ownership_vars: usize,
    pub ownership_constraints: usize,
    pub alias_annotations: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub outcome: Outcome,
    pub timings: Vec<(&'static str, Duration)>,
    pub winner: Option<String>,
    pub counts: Counts,
    /// Set when an assignment was found and passed the exact re-check.
    pub ownership_checked: bool,
}

impl Report {
    fn new() -> Self {
        Report {
            outcome: Outcome::Verified,
            timings: Vec::new(),
            winner: None,
            counts: Counts::default(),
            ownership_checked: false,
        }
    }

    pub fn total_time(&self) -> Duration {
        self.timings.iter().map(|(_, d)| *d).sum()
    }
}

/// Intermediate artifacts, for dumps and tests.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub program: Program,
    pub templates: TemplateEnv,
    pub ownership: OwnershipSystem,
    pub assignment: Option<OwnershipAssignment>,
    pub chc: Option<String>,
}

fn timed<T>(report: &mut Report, phase: &'static str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    report.timings.push((phase, start.elapsed()));
    out
}

pub fn alias_annotations(env: &TemplateEnv) -> usize {
    env.steps.iter().filter(|s| matches!(s, Step::Alias { .. } | Step::AliasDeref { .. })).count()
}

/// Run every phase up to emitting the Horn script. The report carries the
/// outcome so far; `Verified` there only means nothing failed yet.
pub fn prepare(source: &str, cfg: &VerifyConfig) -> (Report, Option<Artifacts>) {
    let mut report = Report::new();
    let program = match timed(&mut report, "parse", || frontend::load(source)) {
        Ok(p) => p,
        Err(e) => {
            report.outcome = Outcome::ToolError(e.to_string());
            return (report, None);
        }
    };
    let types = match timed(&mut report, "simple types", || infer_simple_types(&program)) {
        Ok(t) => t,
        Err(e) => {
            report.outcome = Outcome::ToolError(e.to_string());
            return (report, None);
        }
    };
    let templates = timed(&mut report, "templates", || generate_templates(&program, &types, cfg.context_depth));
    let ownership = generate_ownership_constraints(&templates);
    report.counts.predicates = templates.preds.len();
    report.counts.ownership_vars = ownership.names.len();
    report.counts.ownership_constraints = ownership.constraints.len();
    report.counts.alias_annotations = alias_annotations(&templates);
    let mut art = Artifacts { program, templates, ownership, assignment: None, chc: None };

    match timed(&mut report, "ownership", || solve_ownership(&art.ownership, &cfg.ownership)) {
        Ok(a) => {
            report.ownership_checked = true;
            art.assignment = Some(a);
        }
        Err(OwnershipError::Infeasible { .. }) => report.outcome = Outcome::Rejected(Phase::Ownership),
        Err(OwnershipError::SolverTimeout) => report.outcome = Outcome::Unknown("ownership solver timed out".into()),
        Err(e) => report.outcome = Outcome::ToolError(e.to_string()),
    }
    if let Some(a) = &art.assignment {
        let sys = timed(&mut report, "horn clauses", || generate_chc(&art.templates, a));
        report.counts.clauses = sys.clauses.len();
        report.counts.goals = sys.goal_count();
        art.chc = Some(emit_smtlib2_horn(&sys));
    }
    (report, Some(art))
}

fn write_dumps(cfg: &VerifyConfig, art: &Artifacts) -> std::io::Result<()> {
    if let Some(path) = &cfg.dump_templates {
        std::fs::write(path, art.templates.dump())?;
    }
    if let (Some(path), Some(a)) = (&cfg.dump_ownership, &art.assignment) {
        std::fs::write(path, a.render(&art.ownership))?;
    }
    if let (Some(path), Some(chc)) = (&cfg.dump_chc, &art.chc) {
        std::fs::write(path, chc)?;
    }
    Ok(())
}

/// Full verification of a source text.
pub fn verify_source(source: &str, cfg: &VerifyConfig) -> Report {
    let (mut report, art) = prepare(source, cfg);
    let Some(art) = art else { return report };
    if let Err(e) = write_dumps(cfg, &art) {
        report.outcome = Outcome::ToolError(format!("writing dump: {e}"));
        return report;
    }
    let Some(script) = &art.chc else { return report };
    let (verdict, winner) = timed(&mut report, "horn solving", || run_parallel(&cfg.solvers, script));
    report.winner = winner;
    report.outcome = match verdict {
        Verdict::Sat => Outcome::Verified,
        Verdict::Unsat => Outcome::Rejected(Phase::Refinement),
        Verdict::Unknown => Outcome::Unknown("solver answered unknown".into()),
        Verdict::Timeout => Outcome::Unknown("solver timed out".into()),
        Verdict::ProcessError(d) => Outcome::ToolError(d),
    };
    report
}

pub fn verify(path: &Path, cfg: &VerifyConfig) -> Report {
    match std::fs::read_to_string(path) {
        Ok(src) => verify_source(&src, cfg),
        Err(e) => {
            let mut r = Report::new();
            r.outcome = Outcome::ToolError(format!("{}: {e}", path.display()));
            r
        }
    }
}

/// Expected verdict from a `// EXPECT: verified|rejected` header.
pub fn expectation(source: &str) -> Option<bool> {
    source.lines().find_map(|l| {
        let rest = l.trim().strip_prefix("//")?.trim().strip_prefix("EXPECT:")?;
        match rest.trim() {
            "verified" => Some(true),
            "rejected" => Some(false),
            _ => None,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_and_messages() {
        let cases = [
            (Outcome::Verified, 0, "verified"),
            (Outcome::Rejected(Phase::Ownership), 1, "cannot verify (ownership)"),
            (Outcome::Rejected(Phase::Refinement), 1, "cannot verify (refinement)"),
            (Outcome::Unknown("x".into()), 2, "unknown: x"),
            (Outcome::ToolError("y".into()), 3, "error: y"),
        ];
        for (o, code, text) in cases {
            assert_eq!(o.exit_code(), code);
            assert_eq!(o.to_string(), text);
        }
    }

    #[test]
    fn expect_header() {
        assert_eq!(expectation("// EXPECT: verified\nlet x = 1 in x"), Some(true));
        assert_eq!(expectation("  //EXPECT:rejected"), Some(false));
        assert_eq!(expectation("// EXPECT: maybe"), None);
        assert_eq!(expectation("let x = 1 in x"), None);
    }

    #[test]
    fn syntax_error_is_a_tool_error() {
        let cfg = VerifyConfig::new(1, Vec::new(), OwnershipBackend::Exact);
        let (r, art) = prepare("let = in", &cfg);
        assert!(matches!(r.outcome, Outcome::ToolError(_)));
        assert!(art.is_none());
    }

    #[test]
    fn ownership_failure_stops_before_clauses() {
        let cfg = VerifyConfig::new(1, Vec::new(), OwnershipBackend::Exact);
        let src = "f(a, b) { a := 1; b := 2; 0 }\nlet x = mkref 0 in\nf(x, x)";
        let r = verify_source(src, &cfg);
        assert_eq!(r.outcome, Outcome::Rejected(Phase::Ownership));
        assert_eq!(r.counts.clauses, 0);
        assert!(!r.ownership_checked);
    }

    #[test]
    fn counts_annotations() {
        let cfg = VerifyConfig::new(1, Vec::new(), OwnershipBackend::Exact);
        let src = "let x = mkref 0 in\nlet y = x in\nalias(x = y);\nalias(x = y);\n0";
        let (r, _) = prepare(src, &cfg);
        assert_eq!(r.counts.alias_annotations, 2);
        assert!(r.counts.clauses > 0 && r.counts.goals == 0);
    }
}
