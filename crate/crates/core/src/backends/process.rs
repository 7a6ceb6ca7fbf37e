//! Running one external solver process with a deadline.

use std::fmt;
use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Spacer,
    Hoice,
    Eldarica,
    Generic,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Spacer => "spacer",
            SolverKind::Hoice => "hoice",
            SolverKind::Eldarica => "eldarica",
            SolverKind::Generic => "generic-smtlib2",
        }
    }

    /// Environment variable overriding the executable path.
    pub fn env_var(self) -> Option<&'static str> {
        match self {
            SolverKind::Spacer => Some("CONSORT_SPACER"),
            SolverKind::Hoice => Some("CONSORT_HOICE"),
            SolverKind::Eldarica => Some("CONSORT_ELDARICA"),
            SolverKind::Generic => None,
        }
    }

    fn default_invocation(self) -> (&'static str, &'static [&'static str]) {
        match self {
            SolverKind::Spacer => ("z3", &["fp.engine=spacer", "fp.xform.inline_eager=false"]),
            SolverKind::Hoice => ("hoice", &[]),
            SolverKind::Eldarica => ("eld", &[]),
            SolverKind::Generic => ("z3", &[]),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    /// Reported as the winner in parallel mode.
    pub name: String,
    pub executable: PathBuf,
    /// Passed before the script path.
    pub args: Vec<String>,
    pub timeout: Duration,
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

impl SolverSpec {
    /// Standard invocation for `kind`, honoring the path override variable.
    pub fn for_kind(kind: SolverKind, timeout: Duration) -> SolverSpec {
        let (exe, args) = kind.default_invocation();
        let executable =
            kind.env_var().and_then(std::env::var_os).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(exe));
        SolverSpec {
            kind,
            name: kind.name().to_string(),
            executable,
            args: args.iter().map(|s| s.to_string()).collect(),
            timeout,
        }
    }

    pub fn custom(name: &str, executable: impl Into<PathBuf>, args: &[&str], timeout: Duration) -> SolverSpec {
        SolverSpec {
            kind: SolverKind::Generic,
            name: name.to_string(),
            executable: executable.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    ProcessError(String),
}

impl Verdict {
    pub fn is_definitive(&self) -> bool {
        matches!(self, Verdict::Sat | Verdict::Unsat)
    }

    /// Ordering among indefinite verdicts: Unknown > Timeout > ProcessError.
    pub(crate) fn rank(&self) -> u8 {
        match self {
            Verdict::Sat | Verdict::Unsat => 3,
            Verdict::Unknown => 2,
            Verdict::Timeout => 1,
            Verdict::ProcessError(_) => 0,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sat => f.write_str("sat"),
            Verdict::Unsat => f.write_str("unsat"),
            Verdict::Unknown => f.write_str("unknown"),
            Verdict::Timeout => f.write_str("timeout"),
            Verdict::ProcessError(d) => write!(f, "process error: {d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Captured {
    pub stdout: String,
    pub stderr: String,
    pub status: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunFailure {
    Spawn(String),
    Timeout,
    Cancelled,
}

const POLL: Duration = Duration::from_millis(2);

/// Run `executable args... <script-file>`, capturing output. The child is
/// placed in its own process group, and the whole group is killed on
/// timeout or cancellation. The child is always reaped before returning.
pub fn run_capture(
    executable: &std::path::Path,
    args: &[String],
    script: &str,
    timeout: Duration,
    cancel: Option<&AtomicBool>,
) -> Result<Captured, RunFailure> {
    let mut file = tempfile::Builder::new()
        .prefix("consort-")
        .suffix(".smt2")
        .tempfile()
        .map_err(|e| RunFailure::Spawn(format!("temp file: {e}")))?;
    file.write_all(script.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| RunFailure::Spawn(format!("temp file: {e}")))?;

    let mut child = Command::new(executable)
        .args(args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()
        .map_err(|e| RunFailure::Spawn(format!("{}: {e}", executable.display())))?;
    let pid = child.id() as libc::pid_t;
    log::debug!("spawned {} as pid {pid}", executable.display());

    let mut out_pipe = child.stdout.take();
    let mut err_pipe = child.stderr.take();
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        if let Some(p) = out_pipe.as_mut() {
            let _ = p.read_to_string(&mut s);
        }
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        if let Some(p) = err_pipe.as_mut() {
            let _ = p.read_to_string(&mut s);
        }
        s
    });

    let start = Instant::now();
    let mut failure = None;
    loop {
        match exited(pid) {
            Ok(true) => break,
            Ok(false) => {}
            Err(e) => {
                failure = Some(RunFailure::Spawn(format!("wait: {e}")));
                break;
            }
        }
        if cancel.is_some_and(|c| c.load(Ordering::SeqCst)) {
            failure = Some(RunFailure::Cancelled);
            break;
        }
        if start.elapsed() >= timeout {
            failure = Some(RunFailure::Timeout);
            break;
        }
        thread::sleep(POLL);
    }
    // The child is not reaped yet, so its pid still names its group. This
    // also clears out descendants left behind after a normal exit.
    // SAFETY: killpg only sends a signal.
    unsafe {
        libc::killpg(pid, libc::SIGKILL);
    }
    let status = child.wait().ok();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    let finished = status.is_some_and(|s| s.code().is_some());
    match failure {
        // Exited on its own before the kill landed; the answer stands.
        Some(RunFailure::Cancelled) if finished => {}
        Some(f) => return Err(f),
        None => {}
    }
    Ok(Captured { stdout, stderr, status: status.and_then(|s| s.code()) })
}

/// Whether the child has exited, without reaping it.
fn exited(pid: libc::pid_t) -> std::io::Result<bool> {
    // SAFETY: siginfo_t is plain data and waitid only writes into it.
    let mut info: libc::siginfo_t = unsafe { std::mem::zeroed() };
    let flags = libc::WEXITED | libc::WNOHANG | libc::WNOWAIT;
    let rc = unsafe { libc::waitid(libc::P_PID, pid as libc::id_t, &mut info, flags) };
    if rc != 0 {
        return Err(std::io::Error::last_os_error());
    }
    // SAFETY: with WNOHANG, si_pid is zero unless a child changed state.
    Ok(unsafe { info.si_pid() } != 0)
}

/// The first line that is exactly a verdict token.
pub fn parse_verdict(stdout: &str) -> Option<Verdict> {
    stdout.lines().find_map(|l| match l.trim() {
        "sat" => Some(Verdict::Sat),
        "unsat" => Some(Verdict::Unsat),
        "unknown" => Some(Verdict::Unknown),
        _ => None,
    })
}

pub(crate) fn run_solver_cancellable(spec: &SolverSpec, script: &str, cancel: Option<&AtomicBool>) -> Option<Verdict> {
    match run_capture(&spec.executable, &spec.args, script, spec.timeout, cancel) {
        Err(RunFailure::Timeout) => Some(Verdict::Timeout),
        Err(RunFailure::Cancelled) => None,
        Err(RunFailure::Spawn(e)) => Some(Verdict::ProcessError(e)),
        Ok(c) => Some(parse_verdict(&c.stdout).unwrap_or_else(|| {
            let status = c.status.map_or("signal".to_string(), |s| s.to_string());
            let detail = format!("{} exited with {status} without a verdict", spec.name);
            let tail = c.stderr.trim();
            let tail = if tail.is_empty() { c.stdout.trim() } else { tail };
            Verdict::ProcessError(if tail.is_empty() { detail } else { format!("{detail}: {tail}") })
        })),
    }
}

/// Run one solver on `script` and map its output to a verdict.
pub fn run_solver(spec: &SolverSpec, script: &str) -> Verdict {
    run_solver_cancellable(spec, script, None).unwrap_or(Verdict::Unknown)
}
