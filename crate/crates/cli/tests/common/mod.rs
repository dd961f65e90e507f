//! Helpers for driving the `agrkit` binary from integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn agrkit<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_agrkit"))
        .args(args)
        .env("AGRKIT_NO_PARALLEL", "1")
        .output()
        .expect("agrkit runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
        stderr: String::from_utf8(out.stderr).expect("utf-8"),
    }
}

pub fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(name)
}

/// Appended lines and the single rule each must trigger.
pub const MUTATIONS: &[(&str, &[&str], &str)] = &[
    (
        "cross-group transfer",
        &["transfer tX from depA1 to depB2"],
        "transfer-cross-group",
    ),
    (
        "undeclared role",
        &["interaction iX from depA1 to ghost"],
        "undeclared-role",
    ),
    (
        "same-group interaction",
        &["interaction iZ from depA1 to depA2"],
        "interaction-same-group",
    ),
    ("role without group", &["role orphan"], "role-without-group"),
    (
        "transfer without source",
        &["transfer tW", "destination_of_transfer depA2 tW"],
        "transfer-source-arity",
    ),
    (
        "interaction without destination",
        &["interaction iW", "source_of_interaction depA1 iW"],
        "interaction-destination-arity",
    ),
    (
        "undeclared group",
        &["role_in depA1 nowhere"],
        "undeclared-group",
    ),
    (
        "superior cycle",
        &["superior depA2 over divArep"],
        "superior-cycle",
    ),
];

pub fn mutate(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let mut text = fs::read_to_string(corpus("factory.agr")).unwrap();
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    let path = dir.join(format!("{}.agr", name.replace(' ', "_")));
    fs::write(&path, text).unwrap();
    path
}

pub fn records(stdout: &str) -> Vec<serde_json::Value> {
    stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{e}: {l}")))
        .collect()
}

pub fn error_rules(stdout: &str) -> BTreeSet<String> {
    records(stdout)
        .into_iter()
        .filter(|r| r["kind"] == "violation" && r["severity"] == "error")
        .map(|r| r["rule"].as_str().unwrap().to_string())
        .collect()
}

pub fn of_kind(stdout: &str, kind: &str) -> Vec<serde_json::Value> {
    records(stdout)
        .into_iter()
        .filter(|r| r["kind"] == kind)
        .collect()
}

/// Simulates the factory corpus into `dir/name`.
pub fn simulate(
    dir: &Path,
    name: &str,
    horizon: u32,
    seed: Option<u64>,
    disable: &[&str],
) -> PathBuf {
    let out = dir.join(name);
    let mut args: Vec<String> = vec![
        "simulate".into(),
        corpus("factory.agr").display().to_string(),
        "--stimuli".into(),
        corpus("factory.stim").display().to_string(),
        "--horizon".into(),
        horizon.to_string(),
        "-o".into(),
        out.display().to_string(),
    ];
    if let Some(s) = seed {
        args.push("--seed".into());
        args.push(s.to_string());
    }
    if !disable.is_empty() {
        args.push("--disable".into());
        args.push(disable.join(","));
    }
    let run = agrkit(&args);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    out
}
