use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Subcommand, ValueEnum};
use optic_core::analytics::{
    class_expected, expected_distinct, lower_bound, monte_carlo_distinct, preset, presets, sweep_csv, sweep_delta,
    sweep_gateways, table2, ClassBreakdown, Expected, SweepRow, Variant,
};
use optic_core::engine::RandomModelParams;
use rayon::prelude::*;

use crate::{Outcome, Status};

/// Largest relative error accepted against a published table row.
const TABLE_TOLERANCE: f64 = 0.01;

#[derive(Subcommand, Debug)]
pub enum ModelCommand {
    /// Expected number of distinct sets, per size.
    Expected(ExpectedArgs),
    /// Every bundled AS profile next to its published figures.
    Table2,
    /// Distinct pairs needed when every set has exactly two gateways.
    LowerBound(ExpectedArgs),
    /// Counts as the class ratio varies (CSV).
    SweepDelta(SweepDeltaArgs),
    /// Counts as the number of gateways varies (CSV).
    SweepGateways(SweepGatewaysArgs),
    /// Sample the model and compare with the closed form.
    Montecarlo(MonteCarloArgs),
}

#[derive(Args, Debug)]
pub struct ExpectedArgs {
    /// Gateways.
    #[arg(long = "B", default_value_t = 100)]
    gateways: u32,
    /// Prefixes.
    #[arg(long = "P", default_value_t = 800_000.0)]
    prefixes: f64,
    /// Preference spreading: ranks are uniform in 1..=ps.
    #[arg(long, default_value_t = 5)]
    ps: u32,
    /// Gateways advertising each prefix.
    #[arg(long, default_value_t = 5)]
    b: u32,
    /// Use a bundled AS profile instead of --B/--P.
    #[arg(long, value_parser = preset_names())]
    preset: Option<String>,
}

#[derive(Args, Debug)]
pub struct SweepDeltaArgs {
    #[arg(long = "B", default_value_t = 500)]
    gateways: u32,
    #[arg(long = "P", default_value_t = 800_000.0)]
    prefixes: f64,
    #[arg(long, default_value_t = 1.0)]
    from: f64,
    #[arg(long, default_value_t = 15.0)]
    to: f64,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepGatewaysArgs {
    /// Ratio between consecutive class sizes.
    #[arg(long, default_value_t = 5.0)]
    delta: f64,
    #[arg(long = "P", default_value_t = 800_000.0)]
    prefixes: f64,
    #[arg(long, default_value_t = 100)]
    from: u32,
    #[arg(long, default_value_t = 5000)]
    to: u32,
    #[arg(long, default_value_t = 100)]
    step: u32,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Plain,
    Optimized,
}

#[derive(Args, Debug)]
pub struct MonteCarloArgs {
    #[arg(long = "B", default_value_t = 20)]
    gateways: usize,
    #[arg(long = "P", default_value_t = 10_000)]
    prefixes: usize,
    #[arg(long, default_value_t = 5)]
    ps: u32,
    #[arg(long, default_value_t = 5)]
    b: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Only sample one variant (default: both).
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

fn preset_names() -> Vec<&'static str> {
    presets().into_iter().map(|p| p.name).collect()
}

pub fn run(cmd: &ModelCommand) -> Outcome {
    match cmd {
        ModelCommand::Expected(args) => expected(args),
        ModelCommand::Table2 => table(),
        ModelCommand::LowerBound(args) => lower(args),
        ModelCommand::SweepDelta(args) => {
            let xs = steps(args.from, args.to, args.step)?;
            let rows = parallel(&xs, |d| sweep_delta(args.gateways, &[d], args.prefixes))?;
            write_csv(&sweep_csv("delta", &rows), args.output.as_ref())
        }
        ModelCommand::SweepGateways(args) => {
            if args.step == 0 || args.from > args.to {
                return Err("need --from <= --to and --step >= 1".into());
            }
            let xs: Vec<u32> = (args.from..=args.to).step_by(args.step as usize).collect();
            let rows = parallel(&xs, |g| sweep_gateways(args.delta, &[g], args.prefixes))?;
            write_csv(&sweep_csv("gateways", &rows), args.output.as_ref())
        }
        ModelCommand::Montecarlo(args) => montecarlo(args),
    }
}

fn breakdown(args: &ExpectedArgs) -> Option<ClassBreakdown> {
    args.preset.as_deref().and_then(preset).map(|p| p.breakdown)
}

fn expected_for(args: &ExpectedArgs, variant: Variant) -> Result<Expected, String> {
    match breakdown(args) {
        Some(b) => class_expected(&b, variant),
        None => expected_distinct(args.gateways, args.prefixes, args.ps, args.b, variant),
    }
    .map_err(|e| e.to_string())
}

fn expected(args: &ExpectedArgs) -> Outcome {
    let plain = expected_for(args, Variant::Plain)?;
    let opt = expected_for(args, Variant::Optimized)?;
    let mut out = String::new();
    match &args.preset {
        Some(name) => {
            let _ = writeln!(out, "preset {name}");
        }
        None => {
            let _ = writeln!(out, "B={} P={} ps={} b={}", args.gateways, args.prefixes, args.ps, args.b);
        }
    }
    let _ = writeln!(out, "{:<6} {:>16} {:>16}", "size", "plain", "optimized");
    for &(n, p) in &plain.per_size {
        let _ = writeln!(out, "{n:<6} {p:>16.3} {:>16.3}", opt.size(n));
    }
    let _ = writeln!(out, "{:<6} {:>16.3} {:>16.3}", "total", plain.total(), opt.total());
    let median = |e: &Expected| e.median_size().map_or("-".to_string(), |m| m.to_string());
    let _ = writeln!(out, "{:<6} {:>16} {:>16}", "median", median(&plain), median(&opt));
    print!("{out}");
    Ok(Status::Pass)
}

fn table() -> Outcome {
    let rows = table2().map_err(|e| e.to_string())?;
    let mut out = format!(
        "{:<12} {:>12} {:>12} {:>8} {:>7} {:>7} {:>12} {:>12} {:>8}\n",
        "profile", "distinct", "published", "error", "median", "pub", "lower", "published", "error"
    );
    let mut ok = true;
    for r in &rows {
        let median = r.median.map_or("-".to_string(), |m| m.to_string());
        let row_ok = r.distinct_error() <= TABLE_TOLERANCE
            && r.lower_bound_error() <= TABLE_TOLERANCE
            && r.median == Some(r.preset.published_median);
        ok &= row_ok;
        let _ = writeln!(
            out,
            "{:<12} {:>12.1} {:>12.0} {:>7.3}% {:>7} {:>7} {:>12.1} {:>12.0} {:>7.3}% {}",
            r.preset.name,
            r.distinct,
            r.preset.published_distinct,
            100.0 * r.distinct_error(),
            median,
            r.preset.published_median,
            r.lower_bound,
            r.preset.published_lower_bound,
            100.0 * r.lower_bound_error(),
            if row_ok { "ok" } else { "OFF" }
        );
    }
    let _ = writeln!(out, "summary {}", if ok { "PASS" } else { "FAIL" });
    print!("{out}");
    Ok(if ok { Status::Pass } else { Status::Fail })
}

fn lower(args: &ExpectedArgs) -> Outcome {
    let b = breakdown(args).unwrap_or_else(|| ClassBreakdown::new(vec![(args.gateways, args.prefixes)]));
    let value = lower_bound(&b).map_err(|e| e.to_string())?;
    println!("lower_bound {value:.3}");
    Ok(Status::Pass)
}

fn steps(from: f64, to: f64, step: f64) -> Result<Vec<f64>, String> {
    if step.is_nan() || step <= 0.0 || from.is_nan() || to.is_nan() || from > to {
        return Err("need --from <= --to and --step > 0".into());
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

fn parallel<X: Copy + Sync>(
    xs: &[X],
    point: impl Fn(X) -> optic_core::Result<Vec<SweepRow>> + Sync,
) -> Result<Vec<SweepRow>, String> {
    let rows: optic_core::Result<Vec<Vec<SweepRow>>> = xs.par_iter().map(|&x| point(x)).collect();
    Ok(rows.map_err(|e| e.to_string())?.into_iter().flatten().collect())
}

fn write_csv(csv: &str, output: Option<&PathBuf>) -> Outcome {
    match output {
        Some(path) => fs::write(path, csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(Status::Pass)
}

fn montecarlo(args: &MonteCarloArgs) -> Outcome {
    let params = RandomModelParams {
        gateways: args.gateways,
        prefixes: args.prefixes,
        spreading: args.ps,
        per_prefix: args.b,
        classes: None,
        seed: args.seed,
    };
    let variants = match args.variant {
        Some(VariantArg::Plain) => vec![Variant::Plain],
        Some(VariantArg::Optimized) => vec![Variant::Optimized],
        None => Variant::ALL.to_vec(),
    };
    for variant in variants {
        let start = Instant::now();
        let mc = monte_carlo_distinct(&params, args.trials, variant).map_err(|e| e.to_string())?;
        let closed = expected_distinct(
            args.gateways as u32,
            args.prefixes as f64,
            args.ps,
            args.b as u32,
            variant,
        )
        .map_err(|e| e.to_string())?
        .total();
        let z = if mc.stderr > 0.0 { (mc.mean - closed) / mc.stderr } else { 0.0 };
        println!(
            "montecarlo {} trials={} mean={:.3} ± {:.3} closed_form={:.3} z={z:+.2}",
            variant.name(),
            args.trials,
            mc.mean,
            mc.stderr,
            closed
        );
        eprintln!("{} done in {:.2}s", variant.name(), start.elapsed().as_secs_f64());
    }
    Ok(Status::Pass)
}
