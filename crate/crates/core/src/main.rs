use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use consort::backends::{SolverKind, SolverSpec};
use consort::frontend;
use consort::ownership::{smt::SmtCommand, OwnershipBackend};
use consort::pipeline::{self, expectation, Outcome, VerifyConfig};
use consort::semantics::{self, RunConfig, DEFAULT_FUEL};

#[derive(Parser)]
#[command(name = "consort", version, about = "Ownership refinement type verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one program.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        opts: VerifyOpts,
        /// Also run the interpreter on this many seeds.
        #[arg(long)]
        check_dynamic: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
    },
    /// Run the reference interpreter.
    Interpret {
        file: PathBuf,
        /// Seeds to run; defaults to 0.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        /// Run seeds 0..N instead.
        #[arg(long, conflicts_with = "seeds")]
        runs: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Print one line per transition.
        #[arg(long)]
        trace: bool,
    },
    /// Verify every `.imp` file in a directory against its EXPECT header.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: VerifyOpts,
    },
    /// Print an intermediate artifact.
    Dump {
        what: DumpKind,
        file: PathBuf,
        #[command(flatten)]
        opts: VerifyOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpKind {
    Templates,
    Ownership,
    Chc,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    Spacer,
    Hoice,
    Eldarica,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum OwnershipChoice {
    Smt,
    Exact,
}

#[derive(Args)]
struct VerifyOpts {
    #[arg(long, short = 'k', default_value_t = 1)]
    context_depth: usize,
    #[arg(long, value_enum, default_value = "spacer")]
    solver: SolverChoice,
    /// Seconds per solver call.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    timeout: u64,
    #[arg(long, value_enum, default_value = "smt")]
    ownership: OwnershipChoice,
    #[arg(long)]
    dump_templates: Option<PathBuf>,
    #[arg(long)]
    dump_ownership: Option<PathBuf>,
    #[arg(long)]
    dump_chc: Option<PathBuf>,
}

impl VerifyOpts {
    fn config(&self) -> VerifyConfig {
        let timeout = Duration::from_secs(self.timeout);
        let kinds: &[SolverKind] = match self.solver {
            SolverChoice::Spacer => &[SolverKind::Spacer],
            SolverChoice::Hoice => &[SolverKind::Hoice],
            SolverChoice::Eldarica => &[SolverKind::Eldarica],
            SolverChoice::Parallel => &[SolverKind::Spacer, SolverKind::Hoice, SolverKind::Eldarica],
        };
        let ownership = match self.ownership {
            OwnershipChoice::Smt => OwnershipBackend::Smt(SmtCommand::z3(timeout)),
            OwnershipChoice::Exact => OwnershipBackend::Exact,
        };
        let mut cfg = VerifyConfig::new(
            self.context_depth,
            kinds.iter().map(|k| SolverSpec::for_kind(*k, timeout)).collect(),
            ownership,
        );
        cfg.dump_templates = self.dump_templates.clone();
        cfg.dump_ownership = self.dump_ownership.clone();
        cfg.dump_chc = self.dump_chc.clone();
        cfg
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(3)
    })
}

fn verify(file: &Path, opts: &VerifyOpts, check_dynamic: Option<u64>, fuel: u64) -> ExitCode {
    let report = pipeline::verify(file, &opts.config());
    println!("{}: {}", file.display(), report.outcome);
    let c = &report.counts;
    println!(
        "  predicates {}, clauses {} ({} goals), ownership variables {}, alias annotations {}",
        c.predicates, c.clauses, c.goals, c.ownership_vars, c.alias_annotations
    );
    for (phase, t) in &report.timings {
        println!("  {phase}: {:.3}s", t.as_secs_f64());
    }
    if let Some(w) = &report.winner {
        println!("  answered by {w}");
    }
    if let Some(n) = check_dynamic {
        if let Ok(src) = std::fs::read_to_string(file) {
            if let Ok(p) = frontend::load(&src) {
                let fails = (0..n).filter(|s| semantics::run(&p, fuel, *s) == semantics::Outcome::AssertFail).count();
                println!("  dynamic check: {fails} of {n} runs failed an assertion");
            }
        }
    }
    ExitCode::from(report.outcome.exit_code() as u8)
}

fn interpret(file: &Path, seeds: Vec<u64>, fuel: u64, trace: bool) -> ExitCode {
    let src = match read(file) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let p = match frontend::load(&src) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let mut failed = false;
    for seed in seeds {
        let cfg = RunConfig { fuel, seed, ..RunConfig::default() };
        let mut lines = Vec::new();
        let outcome = semantics::run_with(&p, &cfg, trace.then_some(&mut lines));
        for l in lines {
            println!("{l}");
        }
        println!("seed {seed}: {outcome}");
        failed |= outcome == semantics::Outcome::AssertFail;
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn bench(dir: &Path, opts: &VerifyOpts) -> ExitCode {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => {
            rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|e| e == "imp")).collect()
        }
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(3);
        }
    };
    files.sort();
    let cfg = opts.config();
    let mut mismatches = 0;
    println!("{:<24} {:<9} {:<28} {:>8} {:>4}", "name", "expected", "got", "time", "ann");
    for f in &files {
        let expected = std::fs::read_to_string(f).ok().as_deref().and_then(expectation);
        let start = Instant::now();
        let report = pipeline::verify(f, &cfg);
        let elapsed = start.elapsed();
        let ok = matches!(
            (expected, &report.outcome),
            (Some(true), Outcome::Verified) | (Some(false), Outcome::Rejected(_))
        );
        if !ok {
            mismatches += 1;
        }
        let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let expected = match expected {
            Some(true) => "verified",
            Some(false) => "rejected",
            None => "?",
        };
        println!(
            "{name:<24} {expected:<9} {:<28} {:>7.2}s {:>4}{}",
            report.outcome.to_string(),
            elapsed.as_secs_f64(),
            report.counts.alias_annotations,
            if ok { "" } else { "  MISMATCH" }
        );
    }
    if mismatches > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn dump(what: DumpKind, file: &Path, opts: &VerifyOpts) -> ExitCode {
    let src = match read(file) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let cfg = opts.config();
    let (report, art) = pipeline::prepare(&src, &cfg);
    let Some(art) = art else {
        eprintln!("{}", report.outcome);
        return ExitCode::from(3);
    };
    match what {
        DumpKind::Templates => print!("{}", art.templates.dump()),
        DumpKind::Ownership => {
            for c in &art.ownership.constraints {
                println!("{}", art.ownership.render(c));
            }
            match &art.assignment {
                Some(a) => {
                    println!();
                    print!("{}", a.render(&art.ownership));
                }
                None => {
                    eprintln!("{}", report.outcome);
                    return ExitCode::from(report.outcome.exit_code() as u8);
                }
            }
        }
        DumpKind::Chc => match &art.chc {
            Some(s) => print!("{s}"),
            None => {
                eprintln!("{}", report.outcome);
                return ExitCode::from(report.outcome.exit_code() as u8);
            }
        },
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Verify { file, opts, check_dynamic, fuel } => verify(&file, &opts, check_dynamic, fuel),
        Command::Interpret { file, seeds, runs, fuel, trace } => {
            let seeds = match runs {
                Some(n) => (0..n).collect(),
                None if seeds.is_empty() => vec![0],
                None => seeds,
            };
            interpret(&file, seeds, fuel, trace)
        }
        Command::Bench { dir, opts } => bench(&dir, &opts),
        Command::Dump { what, file, opts } => dump(what, &file, &opts),
    }
}
