#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn qplane() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qplane"));
    c.env_remove("QPLANE_CONFIG");
    c
}

pub fn run(args: &[&str]) -> Output {
    qplane().args(args).output().expect("qplane binary runs")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Commands whose output is pinned byte for byte.
pub const GOLDEN: &[(&str, &[&str])] = &[
    ("eval_j.csv", &["eval", "--fn", "J", "--x", "0,0.5,1,2.5"]),
    (
        "eval_js.csv",
        &["eval", "--fn", "Js", "--s", "-2", "--x", "0.3,1.7"],
    ),
    (
        "eval_n.csv",
        &[
            "eval", "--fn", "N", "--p", "1", "--rho", "1", "--cq", "0.5772",
        ],
    ),
    (
        "eval_g.json",
        &[
            "eval", "--fn", "G", "--p", "1", "--rho", "0.25,1,4", "--format", "json",
        ],
    ),
    ("verify_delta.csv", &["verify", "--suite", "delta"]),
    (
        "verify_calculus.json",
        &["verify", "--suite", "calculus", "--format", "json"],
    ),
    ("spectrum_s1.csv", &["spectrum", "--s", "1"]),
    (
        "apply_green.csv",
        &["apply-green", "--p", "0.37", "--seed", "7", "--check"],
    ),
];

/// Compare every golden command with its file; with `QPLANE_BLESS` set the
/// files are rewritten instead. Returns the names that differ.
pub fn golden_mismatches() -> Vec<String> {
    let bless = std::env::var_os("QPLANE_BLESS").is_some();
    let mut bad = Vec::new();
    for (name, args) in GOLDEN {
        let out = run(args);
        let path = golden_dir().join(name);
        if bless {
            std::fs::write(&path, &out.stdout).expect("write golden file");
            continue;
        }
        match std::fs::read(&path) {
            Ok(want) if want == out.stdout => {}
            _ => bad.push(name.to_string()),
        }
    }
    bad
}
