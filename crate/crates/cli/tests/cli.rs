use std::fs;
use std::path::{Path, PathBuf};

use latsym::io::{format_sparse_function, load_sparse_function, parse_sparse_function};
use latsym::sample::random_function;
use latsym_cli::{dispatch, EXIT_INTERNAL, EXIT_PASS, EXIT_USAGE};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["latsym"];
    argv.extend_from_slice(args);
    dispatch(argv)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(dir: &Path, name: &str) -> (PathBuf, impl Fn() -> Value) {
    let path = dir.join(name);
    let p = path.clone();
    (path, move || {
        serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap()
    })
}

fn sample(dir: &Path, name: &str, support: &str, seed: &str) -> PathBuf {
    let out = dir.join(name);
    let rep = dir.join(format!("{name}.json"));
    let code = run(&[
        "sample",
        "--support",
        support,
        "--seed",
        seed,
        "--output",
        path_str(&out),
        "--report",
        path_str(&rep),
    ]);
    assert_eq!(code, EXIT_PASS);
    out
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(
        run(&["oracle", "obstruction", "--no-such-flag"]),
        EXIT_USAGE
    );
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run(&[]), EXIT_USAGE);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]), EXIT_PASS);
    assert_eq!(run(&["--version"]), EXIT_PASS);
}

#[test]
fn obstruction_reports_contradiction() {
    let dir = tempfile::tempdir().unwrap();
    let (rep, read) = report(dir.path(), "obs.json");
    assert_eq!(
        run(&["oracle", "obstruction", "--report", path_str(&rep)]),
        EXIT_PASS
    );
    let v = read();
    assert_eq!(v["pass"], true);
    assert_eq!(v["results"]["contradiction"], true);
    assert_eq!(v["seed"], 42);
}

#[test]
fn verify_inequalities_on_sampled_functions() {
    let dir = tempfile::tempdir().unwrap();
    let u = sample(dir.path(), "u.tsv", "15", "3");
    let v = sample(dir.path(), "v.tsv", "11", "4");
    let (rep, read) = report(dir.path(), "r.json");
    for kind in ["polya-szego", "cavalieri", "weighted-f"] {
        let code = run(&[
            "verify",
            kind,
            "--u",
            path_str(&u),
            "--report",
            path_str(&rep),
        ]);
        assert_eq!(code, EXIT_PASS, "{kind}");
        assert_eq!(read()["pass"], true, "{kind}");
    }
    for kind in ["riesz", "hardy-littlewood", "contraction"] {
        let code = run(&[
            "verify",
            kind,
            "--u",
            path_str(&u),
            "--v",
            path_str(&v),
            "--kernel",
            "geometric:2:8",
            "--report",
            path_str(&rep),
        ]);
        assert_eq!(code, EXIT_PASS, "{kind}");
        let r = read();
        assert!(r["inputs"]["u"]["sha256"].is_string(), "{kind}");
        assert!(r["inputs"]["v"]["sha256"].is_string(), "{kind}");
    }
}

#[test]
fn verify_needs_second_function() {
    let dir = tempfile::tempdir().unwrap();
    let u = sample(dir.path(), "u.tsv", "5", "1");
    assert_eq!(run(&["verify", "riesz", "--u", path_str(&u)]), EXIT_USAGE);
}

#[test]
fn malformed_input_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.tsv");
    for (name, text) in [
        ("dup.tsv", "0\t0\t1\n0\t0\t2\n"),
        ("neg.tsv", "0\t0\t-1\n"),
        ("ragged.tsv", "0\t0\t1\n1\t2\n"),
        ("empty.tsv", "# nothing\n"),
    ] {
        let input = dir.path().join(name);
        fs::write(&input, text).unwrap();
        let code = run(&[
            "rearrange",
            "--input",
            path_str(&input),
            "--output",
            path_str(&out),
        ]);
        assert_eq!(code, EXIT_USAGE, "{name}");
    }
    let missing = dir.path().join("missing.tsv");
    let code = run(&[
        "rearrange",
        "--input",
        path_str(&missing),
        "--output",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn bad_cycle_and_zero_threads_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let u = sample(dir.path(), "u.tsv", "8", "2");
    let out = dir.path().join("out.tsv");
    let base = [
        "rearrange",
        "--input",
        path_str(&u),
        "--output",
        path_str(&out),
    ];
    let mut args = base.to_vec();
    args.extend(["--cycle", "custom:e1,e2"]);
    assert_eq!(run(&args), EXIT_USAGE);
    let mut args = base.to_vec();
    args.extend(["--threads", "0"]);
    assert_eq!(run(&args), EXIT_USAGE);
}

#[test]
fn exhausted_cycle_budget_is_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    let u = sample(dir.path(), "u.tsv", "20", "9");
    let out = dir.path().join("out.tsv");
    let code = run(&[
        "rearrange",
        "--input",
        path_str(&u),
        "--output",
        path_str(&out),
        "--max-cycles",
        "1",
    ]);
    assert_eq!(code, EXIT_INTERNAL);
}

#[test]
fn rearrange_output_is_symmetric_and_traced() {
    let dir = tempfile::tempdir().unwrap();
    let u = sample(dir.path(), "u.tsv", "12", "5");
    let out = dir.path().join("out.tsv");
    let (rep, read) = report(dir.path(), "r.json");
    let code = run(&[
        "rearrange",
        "--input",
        path_str(&u),
        "--output",
        path_str(&out),
        "--trace",
        "--report",
        path_str(&rep),
    ]);
    assert_eq!(code, EXIT_PASS);
    let r = read();
    assert_eq!(r["results"]["schwarz_symmetric"], true);
    assert_eq!(r["results"]["equimeasurable"], true);
    let written = fs::read(&out).unwrap();
    assert_eq!(
        r["results"]["output"]["sha256"],
        latsym_cli::sha256_hex(&written)
    );
    let steps = r["results"]["steps"].as_u64().unwrap();
    assert!(steps > 0);
    for k in 1..=steps {
        let step = dir.path().join(format!("out.tsv.step-{k:04}.tsv"));
        assert!(step.exists(), "{}", step.display());
    }
    let last = dir.path().join(format!("out.tsv.step-{steps:04}.tsv"));
    assert_eq!(
        load_sparse_function(&last).unwrap(),
        load_sparse_function(&out).unwrap()
    );
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let u = sample(dir.path(), "u.tsv", "25", "11");
    let mut reports = Vec::new();
    for (i, threads) in ["1", "1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}.tsv"));
        let rep = dir.path().join(format!("r{i}.json"));
        let code = run(&[
            "rearrange",
            "--input",
            path_str(&u),
            "--output",
            path_str(&out),
            "--threads",
            threads,
            "--report",
            path_str(&rep),
        ]);
        assert_eq!(code, EXIT_PASS);
        let text = fs::read_to_string(&rep).unwrap();
        // The echoed command line differs in the output path; compare the rest.
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["command"] = Value::Null;
        v["results"]["output"]["path"] = Value::Null;
        reports.push((serde_json::to_string(&v).unwrap(), fs::read(&out).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);

    let a = dir.path().join("m1.json");
    let b = dir.path().join("m2.json");
    for (rep, threads) in [(&a, "1"), (&b, "3")] {
        let code = run(&[
            "minimize",
            "dnls",
            "--c",
            "3",
            "--sigma",
            "0.5",
            "--radius",
            "4",
            "--threads",
            threads,
            "--report",
            path_str(rep),
        ]);
        assert_eq!(code, EXIT_PASS);
    }
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        v["command"] = Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn sample_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = sample(dir.path(), "a.tsv", "30", "77");
    let b = sample(dir.path(), "b.tsv", "30", "77");
    let c = sample(dir.path(), "c.tsv", "30", "78");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn text_format_round_trips_random_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..100 {
        let dim = 1 + i % 4;
        let radius = if dim == 1 { 40 } else { 5 };
        let u = random_function(&mut rng, dim, 1 + i % 30, radius, i % 2 == 0);
        let text = format_sparse_function(&u);
        let back = parse_sparse_function(&text).unwrap();
        assert_eq!(back, u);
        assert_eq!(format_sparse_function(&back), text);
    }
}

#[test]
fn identical_invocations_give_identical_report_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let u = sample(dir.path(), "u.tsv", "18", "21");
    let out = dir.path().join("out.tsv");
    let rep = dir.path().join("r.json");
    let args = [
        "rearrange",
        "--input",
        path_str(&u),
        "--output",
        path_str(&out),
        "--report",
        path_str(&rep),
    ];
    assert_eq!(run(&args), EXIT_PASS);
    let first = fs::read(&rep).unwrap();
    assert_eq!(run(&args), EXIT_PASS);
    assert_eq!(fs::read(&rep).unwrap(), first);
}
