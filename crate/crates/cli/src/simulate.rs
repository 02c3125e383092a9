use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use optic_core::assets::{FIG2_RIB, FIG2_SCENARIO, FIG2_TOPOLOGY};
use optic_core::bgp::{parse_rib, MedPolicy, Rib};
use optic_core::control_plane::ExtractOptions;
use optic_core::engine::{parse_scenario, run_fuzz, run_scenario, Engine, EngineOptions, Scenario, ScenarioEvent};
use optic_core::graph::{parse_topology, Topology};

use crate::{Example, Flags, Inputs, Outcome, SimulateArgs, StateArgs, Status};

impl Flags {
    fn extract(&self) -> ExtractOptions {
        ExtractOptions {
            second_mr: self.opt_second_mr,
            drop_med: self.opt_drop_med,
        }
    }

    fn engine(&self) -> EngineOptions {
        let med = if self.med_ignore {
            MedPolicy::Ignore
        } else {
            MedPolicy::Default(self.med_default.unwrap_or(0))
        };
        EngineOptions {
            extract: self.extract(),
            med,
            retain_unused: self.retain_unused_opr,
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load(inputs: &Inputs) -> Result<(Topology, Rib, Scenario), String> {
    let (topology, rib, scenario) = match inputs.example {
        Some(Example::Fig2) => (FIG2_TOPOLOGY.to_string(), FIG2_RIB.to_string(), Some(FIG2_SCENARIO.to_string())),
        None => {
            let (Some(t), Some(r)) = (&inputs.topology, &inputs.rib) else {
                return Err("--topology and --rib are required unless --example is given".into());
            };
            (read(t)?, read(r)?, inputs.scenario.as_deref().map(read).transpose()?)
        }
    };
    let topology = parse_topology(&topology).map_err(|e| e.to_string())?;
    let rib = parse_rib(&rib, &topology).map_err(|e| e.to_string())?;
    let scenario = match scenario {
        Some(text) => parse_scenario(&text, &topology).map_err(|e| e.to_string())?,
        None => Scenario::default(),
    };
    Ok((topology, rib, scenario))
}

fn emit(text: &str, report: Option<&Path>) -> Result<(), String> {
    print!("{text}");
    if let Some(path) = report {
        fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Outcome {
    if let Some(cases) = args.fuzz {
        return fuzz(args, cases);
    }
    let (topology, rib, scenario) = load(&args.inputs)?;
    let report = run_scenario(topology, &rib, &scenario, args.flags.engine()).map_err(|e| e.to_string())?;
    emit(&report.render(), args.report.as_deref())?;
    Ok(if report.passed() { Status::Pass } else { Status::Fail })
}

fn fuzz(args: &SimulateArgs, cases: usize) -> Outcome {
    let options = if args.all_options {
        [false, true]
            .into_iter()
            .flat_map(|second_mr| [false, true].map(|drop_med| ExtractOptions { second_mr, drop_med }))
            .collect()
    } else {
        vec![args.flags.extract()]
    };
    let summary = run_fuzz(args.seed, cases, &options).map_err(|e| e.to_string())?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "fuzz seed={} cases={} runs={} checked={} mismatches={} stability_runs={} stability_extracts={}",
        args.seed,
        summary.cases,
        summary.runs,
        summary.checked,
        summary.mismatches,
        summary.stability_runs,
        summary.stability_extracts
    );
    for f in &summary.failures {
        let _ = writeln!(
            out,
            "failure case={} second_mr={} drop_med={} mismatches={}",
            f.index, f.options.second_mr, f.options.drop_med, f.mismatches
        );
    }
    let _ = writeln!(out, "summary {}", if summary.passed() { "PASS" } else { "FAIL" });
    emit(&out, args.report.as_deref())?;
    Ok(if summary.passed() { Status::Pass } else { Status::Fail })
}

pub fn dump_state(args: &StateArgs) -> Outcome {
    let (topology, rib, scenario) = load(&args.inputs)?;
    let mut engine = Engine::bootstrap(topology, &rib, args.flags.engine()).map_err(|e| e.to_string())?;
    for (label, event) in &scenario.events {
        let applied = match event {
            ScenarioEvent::Igp(e) => engine.igp_change(e).map(drop),
            ScenarioEvent::BgpAdd(route) => engine.bgp_add(route.clone()).map(drop),
            ScenarioEvent::BgpWithdraw(key) => engine.bgp_withdraw(key).map(drop),
        };
        applied.map_err(|e| format!("{label}: {e}"))?;
    }
    let topology = engine.topology();
    let mut out = engine.meta().dump(topology);
    for (prefix, key) in engine.meta().prefixes() {
        let top = engine.selected(prefix).map_or("-", |(g, _)| topology.name(g));
        let _ = writeln!(out, "prefix {prefix} opr={key} top={top}");
    }
    print!("{out}");
    Ok(Status::Pass)
}
