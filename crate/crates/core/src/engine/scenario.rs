use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Engine, EngineOptions};
use crate::bgp::{parse_route_tokens, AsId, Prefix, Rib, Route, RouteKey};
use crate::graph::{Distance, IgpEvent, NodeId, Topology};
use crate::text::{lines, number};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioEvent {
    Igp(IgpEvent),
    BgpAdd(Route),
    BgpWithdraw(RouteKey),
}

/// Ordered events, each with the text it was parsed from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub events: Vec<(String, ScenarioEvent)>,
}

/// Parses a scenario file. One event per line:
///
/// ```text
/// event weight <u> <v> <w>
/// event link-down <u> <v>
/// event link-up <u> <v> <w>
/// event node-down <id>
/// event node-up <id>
/// event bgp-add <prefix> <gateway> lp=.. aspath=.. origin=.. as=.. [med=..]
/// event bgp-withdraw <prefix> <gateway> <as>
/// ```
pub fn parse_scenario(input: &str, topology: &Topology) -> Result<Scenario> {
    let mut scenario = Scenario::default();
    for (line, tokens) in lines(input) {
        let ["event", kind, args @ ..] = tokens.as_slice() else {
            return Err(Error::parse("scenario", line, "expected `event <kind> ...`"));
        };
        let node = |name: &str| {
            topology
                .lookup(name)
                .ok_or_else(|| Error::parse("scenario", line, format!("unknown node `{name}`")))
        };
        let weight = |tok: &str| -> Result<u32> {
            let w: u32 = number("scenario", line, "weight", tok)?;
            if w == 0 {
                return Err(Error::parse("scenario", line, "weights must be >= 1"));
            }
            Ok(w)
        };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::parse(
                    "scenario",
                    line,
                    format!("`{kind}` takes {n} arguments, got {}", args.len()),
                ))
            }
        };
        let event = match *kind {
            "weight" => {
                arity(3)?;
                ScenarioEvent::Igp(IgpEvent::WeightChange {
                    from: node(args[0])?,
                    to: node(args[1])?,
                    weight: weight(args[2])?,
                })
            }
            "link-down" => {
                arity(2)?;
                ScenarioEvent::Igp(IgpEvent::LinkDown {
                    from: node(args[0])?,
                    to: node(args[1])?,
                })
            }
            "link-up" => {
                arity(3)?;
                ScenarioEvent::Igp(IgpEvent::LinkUp {
                    from: node(args[0])?,
                    to: node(args[1])?,
                    weight: weight(args[2])?,
                })
            }
            "node-down" => {
                arity(1)?;
                ScenarioEvent::Igp(IgpEvent::NodeDown(node(args[0])?))
            }
            "node-up" => {
                arity(1)?;
                ScenarioEvent::Igp(IgpEvent::NodeUp(node(args[0])?))
            }
            "bgp-add" => ScenarioEvent::BgpAdd(parse_route_tokens(args, topology, "scenario", line)?),
            "bgp-withdraw" => {
                arity(3)?;
                ScenarioEvent::BgpWithdraw(RouteKey {
                    prefix: Prefix::new(args[0]),
                    gateway: node(args[1])?,
                    origin_as: AsId(number("scenario", line, "AS number", args[2])?),
                })
            }
            other => return Err(Error::parse("scenario", line, format!("unknown event `{other}`"))),
        };
        scenario.events.push((format!("{kind} {}", args.join(" ")).trim_end().to_string(), event));
    }
    Ok(scenario)
}

/// Choices for one prefix after an event. Gateways are node names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixSelection {
    pub prefix: Prefix,
    /// Right after the fast path, before background recomputation.
    pub fast: Option<String>,
    /// After all work for the event.
    pub data: Option<String>,
    pub alpha: Distance,
    pub oracle: Option<String>,
}

impl PrefixSelection {
    pub fn data_mismatch(&self) -> bool {
        self.oracle.is_some() && self.data != self.oracle
    }

    pub fn fast_mismatch(&self) -> bool {
        self.oracle.is_some() && self.fast != self.oracle
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub index: usize,
    pub label: String,
    pub walked: usize,
    pub queued: usize,
    pub recomputed: usize,
    pub extract_calls: u64,
    pub opr_sets: usize,
    pub selections: Vec<PrefixSelection>,
}

impl EventRecord {
    pub fn data_mismatches(&self) -> usize {
        self.selections.iter().filter(|s| s.data_mismatch()).count()
    }

    pub fn fast_mismatches(&self) -> usize {
        self.selections.iter().filter(|s| s.fast_mismatch()).count()
    }

    pub fn selection(&self, prefix: &str) -> Option<&PrefixSelection> {
        self.selections.iter().find(|s| s.prefix.0 == prefix)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    /// Record 0 is the bootstrap.
    pub records: Vec<EventRecord>,
    /// Fast-path choices must match the oracle too. Off when MED tiers are
    /// dropped, since a dropped tier can only be restored in the background.
    pub fast_checked: bool,
    pub sizes: BTreeMap<usize, usize>,
    pub prefixes: usize,
    pub opr_sets: usize,
}

impl RunReport {
    pub fn mismatches(&self) -> usize {
        self.records
            .iter()
            .map(|r| r.data_mismatches() + if self.fast_checked { r.fast_mismatches() } else { 0 })
            .sum()
    }

    pub fn passed(&self) -> bool {
        self.mismatches() == 0
    }

    /// Extract calls after the bootstrap.
    pub fn extract_calls_after_bootstrap(&self) -> u64 {
        self.records.iter().skip(1).map(|r| r.extract_calls).sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let name = |g: &Option<String>| g.clone().unwrap_or_else(|| "-".into());
        for r in &self.records {
            let mismatches = r.data_mismatches() + if self.fast_checked { r.fast_mismatches() } else { 0 };
            let _ = writeln!(
                out,
                "event {} {} walked={} queued={} recomputed={} extract={} opr_sets={} mismatches={}",
                r.index, r.label, r.walked, r.queued, r.recomputed, r.extract_calls, r.opr_sets, mismatches
            );
            for s in &r.selections {
                let flag = if s.data_mismatch() || (self.fast_checked && s.fast_mismatch()) {
                    " MISMATCH"
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    "select {} {} fast={} data={} alpha={} oracle={}{flag}",
                    r.index,
                    s.prefix,
                    name(&s.fast),
                    name(&s.data),
                    s.alpha,
                    name(&s.oracle)
                );
            }
        }
        let sizes: Vec<String> = self.sizes.iter().map(|(n, c)| format!("{n}:{c}")).collect();
        let _ = writeln!(out, "sizes {}", sizes.join(" "));
        let _ = writeln!(
            out,
            "summary events={} prefixes={} opr_sets={} mismatches={} {}",
            self.records.len() - 1,
            self.prefixes,
            self.opr_sets,
            self.mismatches(),
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

fn names(topology: &Topology, choice: Option<NodeId>) -> Option<String> {
    choice.map(|g| topology.name(g).to_string())
}

fn selections(engine: &Engine, fast: Option<&BTreeMap<Prefix, Option<(NodeId, Distance)>>>) -> Vec<PrefixSelection> {
    let topology = engine.topology();
    engine
        .rib()
        .prefixes()
        .map(|p| {
            let data = engine.selected(p);
            let fast = fast.map_or(data, |f| f.get(p).copied().flatten());
            PrefixSelection {
                prefix: p.clone(),
                fast: names(topology, fast.map(|(g, _)| g)),
                data: names(topology, data.map(|(g, _)| g)),
                alpha: data.map_or(Distance::Infinite, |(_, a)| a),
                oracle: names(topology, engine.oracle(p)),
            }
        })
        .collect()
}

/// Bootstraps an engine from `rib`, applies every event, and checks each
/// prefix against the reference decision process after each step.
pub fn run_scenario(topology: Topology, rib: &Rib, scenario: &Scenario, options: EngineOptions) -> Result<RunReport> {
    let mut engine = Engine::bootstrap(topology, rib, options)?;
    let boot = engine.counters();
    let mut records = vec![EventRecord {
        index: 0,
        label: "bootstrap".into(),
        walked: 0,
        queued: 0,
        recomputed: boot.update_calls as usize,
        extract_calls: boot.extract_calls,
        opr_sets: engine.meta().len(),
        selections: selections(&engine, None),
    }];
    for (i, (label, event)) in scenario.events.iter().enumerate() {
        let before = engine.counters();
        let mut record = EventRecord {
            index: i + 1,
            label: label.clone(),
            walked: 0,
            queued: 0,
            recomputed: 0,
            extract_calls: 0,
            opr_sets: 0,
            selections: Vec::new(),
        };
        let fast = match event {
            ScenarioEvent::Igp(e) => {
                let outcome = engine.igp_change(e)?;
                record.walked = outcome.walked;
                record.queued = outcome.queued;
                record.recomputed = outcome.recomputed;
                Some(outcome.fast)
            }
            ScenarioEvent::BgpAdd(route) => {
                let outcome = engine.bgp_add(route.clone())?;
                record.recomputed = usize::from(outcome.updated);
                None
            }
            ScenarioEvent::BgpWithdraw(key) => {
                let outcome = engine.bgp_withdraw(key)?;
                record.recomputed = usize::from(outcome.updated);
                None
            }
        };
        record.extract_calls = engine.counters().extract_calls - before.extract_calls;
        record.opr_sets = engine.meta().len();
        record.selections = selections(&engine, fast.as_ref());
        records.push(record);
    }
    Ok(RunReport {
        records,
        fast_checked: !options.extract.drop_med,
        sizes: engine.meta().size_distribution(),
        prefixes: engine.meta().prefix_count(),
        opr_sets: engine.meta().len(),
    })
}
