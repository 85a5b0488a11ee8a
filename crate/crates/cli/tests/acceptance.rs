//! One PASS/FAIL line per acceptance criterion. Criteria listed in
//! `KNOWN_UNATTAINABLE` are reported but do not fail the target.

use lksmult_cli::audit::{run_criterion, summary_line, CRITERIA, KNOWN_UNATTAINABLE};
use std::process::{Command, ExitCode};

const SEED: u64 = 0;

fn audit_bytes(dir: &std::path::Path, tag: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let json = dir.join(format!("audit-{tag}.json"));
    let csv = dir.join(format!("audit-{tag}.csv"));
    let out = Command::new(env!("CARGO_BIN_EXE_lksmult"))
        .args(["audit", "--seed", &SEED.to_string()])
        .arg("--out")
        .arg(&json)
        .arg("--csv")
        .arg(&csv)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("audit exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    Ok((read(&json)?, read(&csv)?))
}

fn determinism() -> (bool, String) {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return (false, e.to_string()),
    };
    match (audit_bytes(dir.path(), "a"), audit_bytes(dir.path(), "b")) {
        (Ok(a), Ok(b)) => {
            let same = a == b;
            (same, format!("two runs, seed {SEED}: {} JSON bytes, identical = {same}", a.0.len()))
        }
        (Err(e), _) | (_, Err(e)) => (false, e),
    }
}

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for &(id, _) in &CRITERIA {
        match run_criterion(id, SEED) {
            Ok(c) => {
                println!("{}", summary_line(&c));
                if !c.passed && !KNOWN_UNATTAINABLE.contains(&id) {
                    unexpected.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL  error: {e}");
                unexpected.push(id);
            }
        }
    }
    let (same, detail) = determinism();
    println!("criterion 15 {}  determinism  [{detail}]", if same { "PASS" } else { "FAIL" });
    if !same {
        unexpected.push(15);
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria pass except the known-unattainable {KNOWN_UNATTAINABLE:?}");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
