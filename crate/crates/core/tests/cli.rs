use std::path::Path;
use std::process::{Command, Output};

use ldp_osc::report::{from_csv, from_json, RateRow, SimRow};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldp-osc"))
        .args(args)
        .env_remove("LDP_OSC_THREADS")
        .output()
        .expect("spawn ldp-osc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn catalog_lists_every_method() {
    let o = run(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for name in ["beta:0.5", "EX", "INT", "OPT", "EM", "theta:1.0", "PC(EM-BEM)", "M1", "M6"] {
        assert!(out.lines().any(|l| l.starts_with(&format!("{name} "))), "{name} missing:\n{out}");
    }
    let midpoint = out.lines().find(|l| l.starts_with("beta:0.5 ")).unwrap();
    assert!(midpoint.contains("symplectic=true") && midpoint.contains("exact_for=mean-position"));
}

#[test]
fn midpoint_rates_in_csv_round_trip() {
    let o = run(&["rates", "--method", "midpoint", "--observable", "mean-position", "--h", "0.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<RateRow> = from_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].modified.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(rows[0].verdict, "exactly-preserves");
}

#[test]
fn velocity_rates_in_json() {
    let o = run(&["rates", "--method", "ex", "--observable", "mean-velocity", "--h", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = from_json::<RateRow>(&stdout(&o)).unwrap();
    assert_eq!(doc.command, "rates");
    assert!((doc.rows[0].modified.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_rate_is_infinite_in_json() {
    let o = run(&["rates", "--method", "theta:1", "--observable", "mean-velocity", "--h", "0.1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"inf\""), "{text}");
    let doc = from_json::<RateRow>(&text).unwrap();
    assert!(doc.rows[0].coefficient.unwrap().is_infinite());
}

#[test]
fn non_symplectic_method_exits_two() {
    let o = run(&["rates", "--method", "em", "--h", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["rates"]).status.code(), Some(1));
    assert_eq!(run(&["rates", "--method", "nope", "--h", "0.5"]).status.code(), Some(1));
    let o = run(&["msq", "--method", "em", "--h-sweep", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(">= 2 points"));
    let o = run(&["prob", "--method", "midpoint", "--h", "0.1", "--N", "10", "--interval", "2:1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_method_file_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("empty.method");
    std::fs::write(&f, "").unwrap();
    let sel = format!("file:{}", f.display());
    let o = run(&["rates", "--method", &sel, "--h", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1, column 1"), "{}", stderr(&o));
}

#[test]
fn search_emits_parseable_methods() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["search", "--observable", "mean-position", "--emit-dir", d]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 3);
    for f in &files {
        check_exact(f);
    }
}

fn check_exact(f: &Path) {
    let sel = format!("file:{}", f.display());
    let o = run(&["rates", "--method", &sel, "--observable", "mean-position", "--h", "0.7", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<RateRow> = from_csv(&stdout(&o)).unwrap();
    assert!((rows[0].modified.unwrap() - 1.0 / 3.0).abs() < 1e-10, "{}", f.display());
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let args = ["simulate", "--method", "midpoint", "--h", "0.1", "--N", "50", "--samples", "3000", "--seed", "7", "--format", "csv"];
    let outputs: Vec<String> = ["1", "3"]
        .iter()
        .map(|t| {
            let o = Command::new(env!("CARGO_BIN_EXE_ldp-osc")).args(args).env("LDP_OSC_THREADS", t).output().unwrap();
            assert_eq!(o.status.code(), Some(0));
            stdout(&o)
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    let rows: Vec<SimRow> = from_csv(&outputs[0]).unwrap();
    assert_eq!(rows.len(), 3);

    let o = Command::new(env!("CARGO_BIN_EXE_ldp-osc")).args(args).env("LDP_OSC_THREADS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn prob_with_unbounded_interval() {
    let o = run(&["prob", "--method", "midpoint", "--h", "0.1", "--N", "1000", "--interval", "0.9:inf"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let field = |k: &str| -> f64 {
        out.split_whitespace()
            .find_map(|t| t.strip_prefix(&format!("{k}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((field("prediction") - 0.027).abs() < 1e-12);
    assert!(field("decay") > 0.027 && field("probability") > 0.0);
}

#[test]
fn output_file_and_gnuplot_script() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("rates.csv");
    let plot = dir.path().join("rates.gp");
    let o = run(&[
        "rates",
        "--method",
        "midpoint",
        "--h-sweep",
        "0.05:0.5:4",
        "--format",
        "csv",
        "--out",
        data.to_str().unwrap(),
        "--gnuplot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<RateRow> = from_csv(&std::fs::read_to_string(&data).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains("rates.csv"));
}
