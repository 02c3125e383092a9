//! Acceptance suite. Runs each criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use optic_core::analytics::{self, monte_carlo_distinct, p_n, expected_distinct, SizeDistribution, Variant};
use optic_core::assets;
use optic_core::bgp::parse_rib;
use optic_core::control_plane::ExtractOptions;
use optic_core::engine::{parse_scenario, run_fuzz, run_scenario, EngineOptions, RandomModelParams};
use optic_core::graph::{parse_topology, Distance};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(value: f64, reference: f64, rel: f64) -> bool {
    ((value - reference) / reference).abs() <= rel
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let rows = match analytics::table2() {
        Ok(rows) => rows,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let mut passed = elapsed < Duration::from_secs(1);
    let mut parts = Vec::new();
    for row in &rows {
        let ok = row.distinct_error() <= 0.01
            && row.lower_bound_error() <= 0.01
            && row.median == Some(row.preset.published_median);
        passed &= ok;
        parts.push(format!(
            "{}={:.0}/{:.0}/{}{}",
            row.preset.name,
            row.distinct,
            row.lower_bound,
            row.median.unwrap_or(0),
            if ok { "" } else { "!" }
        ));
    }
    outcome(passed, format!("{} in {:?}", parts.join(" "), elapsed))
}

fn companion_numbers() -> Outcome {
    let run = || -> optic_core::Result<(f64, f64, f64, f64)> {
        let plain_p3 = p_n(100, 100, 3, Variant::Plain)?;
        let opt_p3 = p_n(100, 100, 3, Variant::Optimized)?;
        let plain = expected_distinct(100, 800_000.0, 100, 100, Variant::Plain)?.size(3);
        let opt = expected_distinct(100, 800_000.0, 100, 100, Variant::Optimized)?.size(3);
        Ok((plain_p3, opt_p3, plain, opt))
    };
    match run() {
        Ok((plain_p3, opt_p3, plain, opt)) => {
            let passed = (plain_p3 - 0.267).abs() <= 0.001
                && (opt_p3 - 0.097).abs() <= 0.001
                && within(plain, 118_618.0, 0.01)
                && within(opt, 61_645.0, 0.01);
            outcome(
                passed,
                format!("p3 plain={plain_p3:.4} opt={opt_p3:.4}; size-3 plain={plain:.0} opt={opt:.0}"),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let run = || -> optic_core::Result<_> {
        let topology = parse_topology(assets::FIG2_TOPOLOGY)?;
        let rib = parse_rib(assets::FIG2_RIB, &topology)?;
        let scenario = parse_scenario(assets::FIG2_SCENARIO, &topology)?;
        run_scenario(topology, &rib, &scenario, EngineOptions::default())
    };
    let report = match run() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let pre = report.records[0].selection("p").cloned();
    let post = report.records.get(1).and_then(|r| r.selection("p").cloned());
    let event = &report.records[report.records.len() - 1];
    let (Some(pre), Some(post)) = (pre, post) else {
        return outcome(false, "prefix p missing from the report".into());
    };
    let passed = pre.data.as_deref() == Some("n1")
        && pre.alpha == Distance::Finite(4)
        && post.fast.as_deref() == Some("n3")
        && post.data.as_deref() == Some("n3")
        && post.alpha == Distance::Finite(6)
        && event.walked == 1
        && event.recomputed == 0
        && event.extract_calls == 0
        && report.prefixes == 2
        && report.mismatches() == 0
        && elapsed < Duration::from_millis(100);
    outcome(
        passed,
        format!(
            "pre={}({}) post={}({}) walked={} recomputed={} prefixes={} mismatches={} in {:?}",
            pre.data.unwrap_or_default(),
            pre.alpha,
            post.fast.unwrap_or_default(),
            post.alpha,
            event.walked,
            event.recomputed,
            report.prefixes,
            report.mismatches(),
            elapsed
        ),
    )
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let params = RandomModelParams {
        gateways: 20,
        prefixes: 10_000,
        spreading: 5,
        per_prefix: 5,
        classes: None,
        seed: 0x5eed,
    };
    let mut passed = true;
    let mut parts = Vec::new();
    for variant in Variant::ALL {
        let run = || -> optic_core::Result<_> {
            let mc = monte_carlo_distinct(&params, 200, variant)?;
            let expected = expected_distinct(20, 10_000.0, 5, 5, variant)?.total();
            let dist = SizeDistribution::new(5, 5, variant)?;
            Ok((mc, expected, dist))
        };
        let (mc, expected, dist) = match run() {
            Ok(v) => v,
            Err(e) => return outcome(false, e.to_string()),
        };
        let z = (mc.mean - expected) / mc.stderr;
        let mut ok = z.abs() <= 2.0;
        let mut worst: f64 = 0.0;
        for n in 2..=5u32 {
            let p = dist.get(n);
            let sigma = (p * (1.0 - p) / mc.samples as f64).sqrt();
            let dev = (mc.size_frequency(n as usize) - p).abs() / sigma;
            worst = worst.max(dev);
            ok &= dev <= 3.0;
        }
        passed &= ok;
        parts.push(format!(
            "{}: mean={:.1}±{:.1} closed={:.1} z={:+.2} worst-size-dev={:.2}σ",
            variant.name(),
            mc.mean,
            mc.stderr,
            expected,
            z,
            worst
        ));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(30);
    outcome(passed, format!("{} in {:?}", parts.join("; "), elapsed))
}

fn fuzz_suite() -> (Outcome, Outcome) {
    let start = Instant::now();
    let options: Vec<ExtractOptions> = [(false, false), (true, false), (false, true), (true, true)]
        .into_iter()
        .map(|(second_mr, drop_med)| ExtractOptions { second_mr, drop_med })
        .collect();
    let summary = match run_fuzz(0x0971c, 1000, &options) {
        Ok(s) => s,
        Err(e) => return (outcome(false, e.to_string()), outcome(false, "fuzz did not run".into())),
    };
    let elapsed = start.elapsed();
    let first = summary
        .failures
        .first()
        .map(|f| format!(" first failure: case {} {:?}", f.index, f.options))
        .unwrap_or_default();
    let protection = outcome(
        summary.mismatches == 0 && summary.cases >= 1000 && elapsed < Duration::from_secs(120),
        format!(
            "{} cases, {} runs, {} prefix checks, {} mismatches in {:?}{first}",
            summary.cases, summary.runs, summary.checked, summary.mismatches, elapsed
        ),
    );
    let stability = outcome(
        summary.stability_runs > 0 && summary.stability_extracts == 0,
        format!(
            "{} weight-change runs on 2-connected instances, {} extractions after bootstrap",
            summary.stability_runs, summary.stability_extracts
        ),
    );
    (protection, stability)
}

fn probability_grid() -> Outcome {
    let mut worst_sum: f64 = 0.0;
    let mut order_violations = 0;
    for b in 2..=10u32 {
        for ps in 1..=20u32 {
            let mut totals = [0.0; 2];
            for (i, variant) in Variant::ALL.into_iter().enumerate() {
                match SizeDistribution::new(b, ps, variant) {
                    Ok(d) => worst_sum = worst_sum.max((d.total() - 1.0).abs()),
                    Err(e) => return outcome(false, e.to_string()),
                }
                match expected_distinct(2 * b, 1e5, ps, b, variant) {
                    Ok(e) => totals[i] = e.total(),
                    Err(e) => return outcome(false, e.to_string()),
                }
            }
            if totals[1] > totals[0] {
                order_violations += 1;
            }
        }
    }
    outcome(
        worst_sum <= 1e-12 && order_violations == 0,
        format!("max |sum p_n - 1| = {worst_sum:.2e}, optimized > plain in {order_violations} cells"),
    )
}

fn main() -> ExitCode {
    let mut results = vec![
        ("1 table reproduction", table_reproduction()),
        ("2 companion numbers", companion_numbers()),
        ("3 worked example", worked_example()),
        ("4 monte-carlo vs closed form", monte_carlo()),
    ];
    let (protection, stability) = fuzz_suite();
    results.push(("5 optimal-protection fuzz", protection));
    results.push(("6 stability on weight changes", stability));
    results.push(("7 probability grid", probability_grid()));

    let mut err = std::io::stderr();
    let mut all = true;
    for (name, o) in &results {
        all &= o.passed;
        let _ = writeln!(err, "criterion {name}: {} ({})", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
