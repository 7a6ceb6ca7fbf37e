//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use consort::backends::{SolverKind, SolverSpec};
use consort::ownership::{smt::SmtCommand, OwnershipBackend};
use consort::pipeline::VerifyConfig;

pub mod traces;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus(name: &str) -> String {
    let path = corpus_dir().join(format!("{name}.imp"));
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Every corpus file, sorted by name.
pub fn corpus_files() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "imp"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// Write an executable shell script into `dir`.
pub fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
    path
}

/// A solver stub that records its pid, sleeps, then prints `answer`.
pub fn stub(dir: &Path, name: &str, sleep: &str, answer: &str) -> SolverSpec {
    let pids = dir.join("pids");
    let body = format!("echo $$ >> {}\nsleep {sleep}\necho {answer}", pids.display());
    let path = script(dir, name, &body);
    SolverSpec::custom(name, path, &[], Duration::from_secs(30))
}

/// Pids recorded by stubs in `dir`.
pub fn stub_pids(dir: &Path) -> Vec<i32> {
    fs::read_to_string(dir.join("pids")).unwrap_or_default().lines().filter_map(|l| l.trim().parse().ok()).collect()
}

/// Whether `pid` names a live, non-zombie process.
pub fn alive(pid: i32) -> bool {
    match fs::read_to_string(format!("/proc/{pid}/stat")) {
        Ok(stat) => stat.rsplit(')').next().and_then(|r| r.split_whitespace().next()) != Some("Z"),
        Err(_) => false,
    }
}

/// Live processes in the process groups led by `groups`.
pub fn leftover_processes(groups: &[i32]) -> Vec<i32> {
    processes(|_, pgrp| groups.contains(&pgrp))
}

/// Live children of this process.
pub fn children() -> Vec<i32> {
    let me = std::process::id() as i32;
    processes(|ppid, _| ppid == me)
}

fn processes(keep: impl Fn(i32, i32) -> bool) -> Vec<i32> {
    let mut out = Vec::new();
    for entry in fs::read_dir("/proc").unwrap().flatten() {
        let Ok(pid) = entry.file_name().to_string_lossy().parse::<i32>() else { continue };
        let Ok(stat) = fs::read_to_string(entry.path().join("stat")) else { continue };
        let fields: Vec<&str> = stat.rsplit(')').next().unwrap_or("").split_whitespace().collect();
        if fields.len() < 3 || fields[0] == "Z" {
            continue;
        }
        let (ppid, pgrp) = (fields[1].parse().unwrap_or(0), fields[2].parse().unwrap_or(0));
        if keep(ppid, pgrp) {
            out.push(pid);
        }
    }
    out
}

pub fn z3_available() -> bool {
    Command::new("z3").arg("-version").output().is_ok_and(|o| o.status.success())
}

/// Real-solver tests run only with `CONSORT_REAL_SOLVERS=1`.
pub fn real_solvers_enabled() -> bool {
    std::env::var("CONSORT_REAL_SOLVERS").is_ok_and(|v| v == "1")
}

/// Spacer through z3 with z3 ownership solving.
pub fn real_config(k: usize) -> VerifyConfig {
    let t = Duration::from_secs(60);
    VerifyConfig::new(k, vec![SolverSpec::for_kind(SolverKind::Spacer, t)], OwnershipBackend::Smt(SmtCommand::z3(t)))
}

/// Exact ownership solving and a single stub solver.
pub fn stub_config(k: usize, solver: SolverSpec) -> VerifyConfig {
    VerifyConfig::new(k, vec![solver], OwnershipBackend::Exact)
}
