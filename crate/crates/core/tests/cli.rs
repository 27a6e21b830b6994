use std::process::{Command, Output};

use symineq::cli::parse_report;
use symineq::verify::replay;

fn symineq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symineq")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    symineq(args).status.code().unwrap()
}

fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn eval_prints_full_precision() {
    let out = symineq(&["eval", "--fn", "ek", "--x", "1,2,3", "--k", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "11\n");
    let out = symineq(&["eval", "--fn", "phi", "--x", "1,2,3", "--k", "2", "--p", "1"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1.8333333333333333\n");
    let out = symineq(&["eval", "--fn", "psi", "--x", "1,2,3", "--k", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1.8333333333333333\n");
    assert_eq!(code(&["eval", "--fn", "ek", "--x", "1,2", "--k", "3"]), 2);
    assert_eq!(code(&["eval", "--fn", "ppsum", "--x", "1", "--y", "2", "--p", "-2"]), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["verify", "--suite", "nonsense"]), 2);
    assert_eq!(code(&["verify", "--suite", "ek-root", "--p-grid", "2"]), 2);
    assert_eq!(code(&["verify", "--suite", "ml-new,hk-root", "--trials", "50", "--seed", "1"]), 0);
    assert_eq!(code(&["verify", "--suite", "recip-ek", "--trials", "200", "--seed", "1"]), 1);
    assert_eq!(code(&["search", "--checker", "ek-root", "--k", "1", "--p", "0.5"]), 2);
    assert_eq!(code(&["search", "--checker", "ek-root", "--k", "1", "--p", "2", "--budget", "0"]), 3);
    assert_eq!(code(&["matrix", "--check", "mariet", "--p", "0.5"]), 2);
    assert_eq!(code(&["matrix", "--check", "mariet", "--dim", "3", "--k", "3", "--p", "-0.5", "--trials", "200"]), 0);
    assert_eq!(code(&["mc", "--x", "1,2", "--k", "9"]), 2);
    assert_eq!(code(&["mc", "--x", "5", "--k", "0", "--samples", "100"]), 0);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_symineq"))
        .args(["mc", "--x", "1", "--k", "1", "--samples", "10"])
        .env("SYMINEQ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn reports_are_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (a, b, csv) = (path("a.json"), path("b.json"), path("a.csv"));
    for out in [&a, &b] {
        symineq(&["verify", "--suite", "ek-root", "--trials", "1", "--seed", "7", "--out", out]);
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(without_timestamp(&ta), without_timestamp(&tb));

    let args = ["verify", "--suite", "recip-ek", "--trials", "100", "--seed", "3", "--out", &a, "--csv", &csv];
    assert_eq!(code(&args), 1);
    let report = parse_report(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert!(!report.violations.is_empty());
    for v in &report.violations {
        assert_eq!(replay(v).unwrap().margin.to_bits(), v.margin.to_bits());
    }
    let rows = csv::Reader::from_path(&csv).unwrap().records().count();
    assert_eq!(rows, report.violations.len());

    let out = path("s.json");
    assert_eq!(code(&["search", "--checker", "ek-root", "--k", "1", "--p", "2.0", "--budget", "500", "--out", &out]), 0);
    let found = parse_report(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let cx = &found.violations[0];
    assert!(cx.margin < -1e-2);
    assert_eq!(replay(cx).unwrap(), *cx);
}
