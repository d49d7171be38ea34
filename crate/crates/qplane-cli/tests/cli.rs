mod common;

use std::io::Write;

use common::{qplane, run};

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV report as vectors of fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(csv: &str) -> String {
    csv.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

fn echo(csv: &str, key: &str) -> Option<String> {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("# {key}=")).map(str::to_string))
}

#[test]
fn golden_files_match() {
    assert_eq!(common::golden_mismatches(), Vec::<String>::new());
}

#[test]
fn j_at_zero_is_one() {
    let out = stdout(&["eval", "--fn", "J", "--q", "0.5", "--x", "0"]);
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][5].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn green_imaginary_part_is_minus_j() {
    let g = stdout(&["eval", "--fn", "G", "--q", "0.5", "--p", "1", "--rho", "1"]);
    let j = stdout(&["eval", "--fn", "J", "--q", "0.5", "--x", "1"]);
    let gi: f64 = rows(&g)[0][6].parse().unwrap();
    let jr: f64 = rows(&j)[0][5].parse().unwrap();
    assert_eq!(gi, -jr);
}

#[test]
fn neumann_row_is_finite() {
    let out = stdout(&[
        "eval", "--fn", "N", "--q", "0.5", "--p", "1", "--rho", "1", "--cq", "0.5772",
    ]);
    let r = &rows(&out)[0];
    let re: f64 = r[5].parse().unwrap();
    assert!(re.is_finite());
    assert_eq!(r[9], "");
}

#[test]
fn csv_headers_are_fixed() {
    assert_eq!(
        header(&stdout(&["eval", "--fn", "J", "--x", "1"])),
        "fn,s,x,p,rho,re,im,terms_used,error_bound,error"
    );
    assert_eq!(
        header(&stdout(&["verify", "--suite", "delta"])),
        "suite,check,status,max_residual,tolerance,detail"
    );
    assert_eq!(
        header(&stdout(&["spectrum", "--s", "0"])),
        "t,s,eigenvalue,expected,relative_error,residual,backward_error,overlap,pass"
    );
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = stdout(&["eval", "--fn", "J", "--x", "0.7"]);
    let re = &rows(&out)[0][5];
    let mantissa = re
        .split('e')
        .next()
        .unwrap()
        .trim_start_matches('-')
        .replace('.', "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify", "--suite", "nope"][..],
        &["eval", "--fn", "J", "--q", "1.5", "--x", "1"],
        &["eval", "--fn", "J", "--L", "3", "--x", "1"],
        &["eval", "--fn", "J", "--q", "0.9999999", "--x", "1"],
        &[
            "eval",
            "--fn",
            "J",
            "--x",
            "1",
            "--config",
            "/nonexistent/qplane.cfg",
        ],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numeric_failures_exit_1() {
    let out = run(&["eval", "--fn", "J", "--x", "-1,1"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let r = rows(&text);
    assert_eq!(r.len(), 2);
    assert!(!r[0][9].is_empty());
    assert!(r[1][9].is_empty());

    let out = run(&["estimate-cq", "--rho-index", "0,1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("relative_residual"));
}

#[test]
fn passing_verify_exits_0() {
    assert_eq!(
        run(&["verify", "--suite", "calculus"]).status.code(),
        Some(0)
    );
}

#[test]
fn q_near_one_override() {
    let out = run(&[
        "eval",
        "--fn",
        "J",
        "--q",
        "0.9999999",
        "--allow-q-near-one",
        "--x",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_file_precedence() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# run settings\nq = 0.7\nL = 50\nformat = csv").unwrap();
    let path = file.path().to_str().unwrap().to_string();

    let out = stdout(&["eval", "--fn", "J", "--x", "1", "--config", &path]);
    assert_eq!(echo(&out, "q").as_deref(), Some("0.7"));
    assert_eq!(echo(&out, "L").as_deref(), Some("50"));

    let out = stdout(&[
        "eval", "--fn", "J", "--x", "1", "--config", &path, "--q", "0.3",
    ]);
    assert_eq!(echo(&out, "q").as_deref(), Some("0.3"));
    assert_eq!(echo(&out, "L").as_deref(), Some("50"));

    let out = qplane()
        .args(["eval", "--fn", "J", "--x", "1"])
        .env("QPLANE_CONFIG", &path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        echo(&String::from_utf8(out.stdout).unwrap(), "q").as_deref(),
        Some("0.7")
    );

    let out = stdout(&["eval", "--fn", "J", "--x", "1"]);
    assert_eq!(echo(&out, "q").as_deref(), Some("0.5"));
    assert_eq!(echo(&out, "L").as_deref(), Some("40"));
}

#[test]
fn bad_config_key_is_a_usage_error() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "q = 0.7\ncolour = blue").unwrap();
    let out = run(&[
        "eval",
        "--fn",
        "J",
        "--x",
        "1",
        "--config",
        file.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "eval",
        "--fn",
        "J",
        "--x",
        "1",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "eval");
    assert_eq!(v["config"]["q"], "0.5");
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["apply-green", "--p", "0.37", "--seed", "3"][..],
        &[
            "estimate-cq",
            "--p",
            "0.37",
            "--rho-index",
            "0,1",
            "--threshold",
            "1",
        ],
        &["verify", "--suite", "green", "--format", "json"],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn seeds_change_random_vectors() {
    let a = stdout(&["apply-green", "--p", "0.37", "--seed", "1"]);
    let b = stdout(&["apply-green", "--p", "0.37", "--seed", "2"]);
    assert_ne!(a, b);
}

#[test]
fn apply_green_agrees_with_numeric_eigenpairs() {
    let out = stdout(&[
        "apply-green",
        "--p",
        "0.37",
        "--entry",
        "8,8,1",
        "--entry",
        "9,8,0.5,-0.25",
        "--check",
    ]);
    let diff: f64 = echo(&out, "numeric_relative_difference")
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff < 1e-8, "{diff}");
    assert_eq!(echo(&out, "pass").as_deref(), Some("true"));
}

#[test]
fn spectrum_rows_pass() {
    let out = stdout(&["spectrum", "--s", "-2"]);
    let r = rows(&out);
    assert!(r.len() > 10);
    assert!(r.iter().all(|row| row[8] == "true"));
}
