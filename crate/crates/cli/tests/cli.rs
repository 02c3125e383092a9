use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn optic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const TOPOLOGY: &str = "node s\nnode a\nnode b\nnode g1 external\nnode g2 external\nvantage s\n\
edge s a 1\nedge s b 1\nedge a g1 1\nedge b g2 2\n";
const RIB: &str = "route x g1 lp=100 aspath=1 origin=0 as=1\nroute x g2 lp=100 aspath=1 origin=0 as=2\n";

#[test]
fn bundled_example_switches_gateway_and_passes() {
    let report = scratch("fig2.report");
    let out = optic(&["simulate", "--example", "fig2", "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("select 0 p fast=n1 data=n1 alpha=4 oracle=n1\n"));
    assert!(text.contains("select 1 p fast=n3 data=n3 alpha=6 oracle=n3\n"));
    assert!(text.trim_end().ends_with("PASS"));
    assert_eq!(fs::read_to_string(&report).unwrap(), text);

    let again = optic(&["simulate", "--example", "fig2"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn files_on_disk() {
    let (t, r, s) = (scratch("two.topo"), scratch("two.rib"), scratch("two.scenario"));
    fs::write(&t, TOPOLOGY).unwrap();
    fs::write(&r, RIB).unwrap();
    fs::write(&s, "event link-down a g1\nevent link-up a g1 1\nevent bgp-withdraw x g2 2\n").unwrap();
    let (t, r, s) = (t.to_str().unwrap(), r.to_str().unwrap(), s.to_str().unwrap());
    for flags in [&[][..], &["--opt-second-mr", "--opt-drop-med"], &["--med-ignore", "--retain-unused-opr"]] {
        let mut args = vec!["simulate", "--topology", t, "--rib", r, "--scenario", s];
        args.extend_from_slice(flags);
        let out = optic(&args);
        assert_eq!(out.status.code(), Some(0), "{flags:?}: {}", stdout(&out));
        assert!(stdout(&out).contains("summary events=3 prefixes=1"));
    }

    let out = optic(&["dump-state", "--topology", t, "--rib", r]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("opr ")).count(), 1);
    assert!(text.contains("size=2 top=g1 prefixes=1"));
    assert!(text.lines().any(|l| l.starts_with("prefix x opr=") && l.ends_with("top=g1")));
}

#[test]
fn unknown_node_in_scenario_is_a_usage_error() {
    let (t, r, s) = (scratch("bad.topo"), scratch("bad.rib"), scratch("bad.scenario"));
    fs::write(&t, TOPOLOGY).unwrap();
    fs::write(&r, RIB).unwrap();
    fs::write(&s, "# one\nevent node-down nowhere\n").unwrap();
    let out = optic(&[
        "simulate",
        "--topology",
        t.to_str().unwrap(),
        "--rib",
        r.to_str().unwrap(),
        "--scenario",
        s.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("scenario:2:"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: [&[&str]; 6] = [
        &["simulate"],
        &["simulate", "--example", "fig2", "--topology", "x"],
        &["simulate", "--topology", "/nonexistent/topo", "--rib", "/nonexistent/rib"],
        &["model", "expected", "--B", "3"],
        &["model", "lower-bound", "--B", "1", "--P", "10"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(optic(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn table_rows_match_published_values() {
    let out = optic(&["model", "table2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| l.ends_with(" ok")).collect();
    assert_eq!(rows.len(), 6, "{text}");
    for name in ["stub", "tier4", "tier3", "large-tier3", "tier2", "tier1"] {
        assert!(rows.iter().any(|r| r.starts_with(&format!("{name} "))));
    }
    assert!(text.ends_with("summary PASS\n"));
}

#[test]
fn delta_sweep_csv() {
    let path = scratch("delta.csv");
    let out = optic(&["model", "sweep-delta", "--B", "500", "--output", path.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let csv = fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("delta,plain,optimized,lower_bound"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[0][0], 1.0);
    for r in &rows {
        assert!(r[3] <= r[2] && r[2] <= r[1], "{r:?}");
    }
    // Both model counts fall as the classes get more uneven.
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1] && w[1][2] < w[0][2]));
}

#[test]
fn gateway_sweep_csv() {
    let out = optic(&["model", "sweep-gateways", "--from", "1000", "--to", "4000", "--step", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("gateways,plain,optimized,lower_bound\n1000,"));
}

#[test]
fn monte_carlo_line_is_reproducible() {
    let args = ["model", "montecarlo", "--B", "20", "--P", "10000", "--trials", "20", "--seed", "4"];
    let first = optic(&args);
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("montecarlo plain trials=20 mean="));
    assert!(lines[1].starts_with("montecarlo optimized trials=20 mean="));
    assert!(lines.iter().all(|l| l.contains(" ± ")));
    assert_eq!(optic(&args).stdout, first.stdout);
}

#[test]
fn expected_and_lower_bound() {
    let out = optic(&["model", "expected", "--B", "100", "--ps", "100", "--b", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let three: Vec<f64> = text
        .lines()
        .find(|l| l.starts_with("3 "))
        .unwrap()
        .split_whitespace()
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((three[0] / 118_618.0 - 1.0).abs() < 0.01);
    assert!((three[1] / 61_645.0 - 1.0).abs() < 0.01);

    let out = optic(&["model", "lower-bound", "--preset", "stub"]);
    assert_eq!(stdout(&out), "lower_bound 235.000\n");
    let out = optic(&["model", "expected", "--preset", "tier1"]);
    assert!(stdout(&out).lines().any(|l| l.starts_with("median") && l.ends_with(" 2")));
}

#[test]
fn fuzz_mode_aggregates() {
    let out = optic(&["simulate", "--fuzz", "12", "--seed", "9", "--all-options"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.starts_with("fuzz seed=9 cases=12 runs=48 "));
    assert!(text.ends_with("summary PASS\n"));
    assert_eq!(optic(&["simulate", "--fuzz", "12", "--seed", "9", "--all-options"]).stdout, out.stdout);
}
