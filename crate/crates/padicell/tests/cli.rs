//! End-to-end checks of the `padicell` binary: exit codes, stream
//! separation, stdin input, and the documented output formats.

use std::io::Write;
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padicell"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn happy_paths() {
    let (code, stdout, stderr) = run(&["valuation", "--prime", "2", "12"]);
    assert_eq!((code, stdout.trim(), stderr.as_str()), (0, "2", ""));

    let (code, stdout, _) = run(&["valuation", "--prime", "7", "0"]);
    assert_eq!((code, stdout.trim()), (0, "INF"));

    let (code, stdout, _) = run(&["valuation", "--prime", "5", "--field", "laurent-fp", "5/3"]);
    assert_eq!((code, stdout.trim()), (0, "INF"));

    let (code, stdout, _) = run(&["residue", "--prime", "5", "12"]);
    assert_eq!((code, stdout.trim()), (0, "2"));

    let (code, stdout, _) = run(&["ac", "--prime", "2", "12"]);
    assert_eq!((code, stdout.trim()), (0, "1"));

    let (code, stdout, _) = run(&["div", "--prime", "3", "9", "3"]);
    assert_eq!((code, stdout.trim()), (0, "3"));
    let (_, stdout, _) = run(&["div", "--prime", "3", "1", "3"]);
    assert_eq!(stdout.trim(), "0");
    let (_, stdout, _) = run(&["div", "--prime", "3", "7", "0"]);
    assert_eq!(stdout.trim(), "0");

    let (code, stdout, _) = run(&["power", "--prime", "2", "--n", "2", "17"]);
    assert_eq!((code, stdout.trim()), (0, "true"));

    let (code, stdout, _) = run(&["cosets", "--prime", "5", "--n", "2"]);
    assert_eq!((code, stdout.trim()), (0, "1 2 5 10"));

    let (code, stdout, _) = run(&["index", "--prime", "2", "--n", "2"]);
    assert_eq!((code, stdout.trim()), (0, "8"));

    let (code, stdout, _) = run(&[
        "hensel",
        "--prime",
        "5",
        "--start",
        "1",
        "--precision",
        "2",
        "t^2-6",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("16"), "stdout: {stdout}");

    let (code, stdout, _) = run(&["zeta", "--prime", "5", "t"]);
    assert_eq!((code, stdout.trim()), (0, "Z(T) = (4/5)/(1 - T/5)"));
}

#[test]
fn error_paths_and_exit_codes() {
    // domain error: residue outside the valuation ring
    let (code, stdout, stderr) = run(&["residue", "--prime", "3", "1/3"]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    assert!(stderr.contains("not in valuation ring"), "{stderr}");

    // syntax error in a formula: exit 2, column position reported
    let (code, _, stderr) = run(&["decompose", "--prime", "5", "abs(t <"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("column 7"), "{stderr}");

    // syntax error in a polynomial
    let (code, _, stderr) = run(&["zeta", "--prime", "5", "t^-1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("syntax error"), "{stderr}");

    // unknown flags are usage errors (clap reports exit code 2)
    let (code, _, _) = run(&["zeta", "--prime", "5", "t", "--bogus"]);
    assert_eq!(code, 2);
}

#[test]
fn stdin_input() {
    let mut child = bin()
        .args(["decompose", "--prime", "5", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"!pow(2,t)\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim().lines().count(), 4, "{text}");
}

#[test]
fn json_round_trip_through_refine() {
    // measure a cell, refine it, feed the refined cells back to measure:
    // the measures must add up to the original
    let cell = r#"{"center":"0","lo":null,"hi":0,"lambda":"1","n":1}"#;
    let (code, total, _) = run(&["measure", "--prime", "5", "--cell", cell]);
    assert_eq!((code, total.trim()), (0, "1/5"));

    let (code, refined, _) = run(&[
        "refine",
        "--prime",
        "5",
        "--modulus",
        "2",
        "--cell",
        cell,
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&refined).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    let mut sum = num_rational::BigRational::new(0.into(), 1.into());
    for c in cells {
        let (code, m, _) = run(&["measure", "--prime", "5", "--cell", &c.to_string()]);
        assert_eq!(code, 0);
        let m = m.trim();
        let parts: Vec<&str> = m.split('/').collect();
        let num: i64 = parts[0].parse().unwrap();
        let den: i64 = if parts.len() > 1 {
            parts[1].parse().unwrap()
        } else {
            1
        };
        sum += num_rational::BigRational::new(num.into(), den.into());
    }
    assert_eq!(sum, num_rational::BigRational::new(1.into(), 5.into()));
}

#[test]
fn oracle_subcommands() {
    let (code, stdout, _) = run(&[
        "oracle", "classes", "--prime", "2", "--n", "2", "--depth", "3",
    ]);
    assert_eq!((code, stdout.trim()), (0, "1"));

    let cell = r#"{"center":"0","lo":null,"hi":0,"lambda":"1","n":2}"#;
    let (code, stdout, _) = run(&[
        "oracle", "measure", "--prime", "5", "--cell", cell, "--depth", "6",
    ]);
    assert_eq!((code, stdout.trim()), (0, "1/60"));

    let (code, stdout, _) = run(&[
        "oracle",
        "integrate",
        "--prime",
        "5",
        "1",
        "--domain",
        "R",
        "--depth",
        "4",
    ]);
    assert_eq!((code, stdout.trim()), (0, "1"));
}

#[test]
fn byte_identical_json_reruns() {
    for args in [
        vec!["zeta", "--prime", "3", "(t)*(t-1)", "--format", "json"],
        vec!["decompose", "--prime", "5", "!pow(2,t)", "--format", "json"],
        vec!["prepare", "--prime", "3", "(t)*(t-1)", "--format", "json"],
    ] {
        let (c1, o1, _) = run(&args);
        let (c2, o2, _) = run(&args);
        assert_eq!(c1, 0);
        assert_eq!(c2, 0);
        assert_eq!(o1, o2, "args: {args:?}");
    }
}
