use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{run_scenario, EngineOptions, Scenario, ScenarioEvent};
use crate::bgp::{AsId, BetaAttrs, MedPolicy, Origin, Prefix, Rib, Route};
use crate::control_plane::ExtractOptions;
use crate::graph::{IgpEvent, NodeId, Topology};
use crate::Result;

/// One generated instance and the single event applied to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzCase {
    pub index: usize,
    pub topology: Topology,
    pub rib: Rib,
    pub med: MedPolicy,
    pub event: IgpEvent,
    /// The topology the routes were learned on is 2-node-connected.
    pub biconnected: bool,
}

impl FuzzCase {
    pub fn is_weight_change(&self) -> bool {
        matches!(self.event, IgpEvent::WeightChange { .. })
    }
}

/// Generates case `index` of the corpus for `seed`. Each case is a pure
/// function of the pair.
pub fn generate_case(seed: u64, index: usize) -> Result<FuzzCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);

    let want_biconnected = rng.gen_bool(0.5);
    let total = rng.gen_range(8..=40usize);
    let gateway_count = rng.gen_range(3..=10.min(total - 3));
    let router_count = total - gateway_count;

    let mut topology = Topology::new("r0");
    let mut routers = vec![topology.vantage()];
    for i in 1..router_count {
        routers.push(topology.add_node(&format!("r{i}"), false)?);
    }
    let broken = if want_biconnected || !rng.gen_bool(0.3) {
        None
    } else {
        Some(rng.gen_range(0..router_count))
    };
    for i in 0..router_count {
        if Some(i) != broken {
            topology.add_link(routers[i], routers[(i + 1) % router_count], rng.gen_range(1..=10), false)?;
        }
    }
    for _ in 0..router_count / 3 {
        let (a, b) = (*routers.choose(&mut rng).unwrap(), *routers.choose(&mut rng).unwrap());
        let directed = !want_biconnected && rng.gen_bool(0.3);
        // Clashing or self-loop chords are simply skipped.
        let _ = topology.add_link(a, b, rng.gen_range(1..=10), directed);
    }
    let mut gateways = Vec::new();
    for i in 0..gateway_count {
        let g = topology.add_node(&format!("g{i}"), true)?;
        let homes = if want_biconnected || rng.gen_bool(0.5) { 2 } else { 1 };
        for &r in routers.choose_multiple(&mut rng, homes) {
            topology.add_link(g, r, rng.gen_range(1..=5), false)?;
        }
        gateways.push(g);
    }

    // Sometimes start with one element down so that up events get exercised.
    let mut down_link = None;
    let mut down_node = None;
    if rng.gen_bool(0.15) {
        if rng.gen_bool(0.5) {
            let idx = rng.gen_range(0..topology.links().len());
            let link = topology.links()[idx].clone();
            topology.apply_event(&IgpEvent::LinkDown {
                from: link.from,
                to: link.to,
            })?;
            down_link = Some((link.from, link.to));
        } else {
            let id = NodeId(rng.gen_range(1..topology.node_count() as u32));
            topology.apply_event(&IgpEvent::NodeDown(id))?;
            down_node = Some(id);
        }
    }
    let biconnected = topology.is_biconnected();

    let rib = random_rib(&mut rng, &topology, &gateways)?;
    let med = match index % 3 {
        0 => MedPolicy::Default(0),
        1 => MedPolicy::Ignore,
        _ => MedPolicy::Default(u32::MAX),
    };
    let event = random_event(&mut rng, &topology, &routers, &gateways, down_link, down_node);
    Ok(FuzzCase {
        index,
        topology,
        rib,
        med,
        event,
        biconnected,
    })
}

fn random_rib(rng: &mut ChaCha8Rng, topology: &Topology, gateways: &[NodeId]) -> Result<Rib> {
    let vantage = topology.vantage();
    let mut rib = Rib::new();
    for p in 0..rng.gen_range(20..=200) {
        let prefix = Prefix::new(format!("p{p}"));
        let count = rng.gen_range(1..=gateways.len());
        for &gateway in gateways.choose_multiple(rng, count) {
            let adjacent = topology.find_link(vantage, gateway).is_some();
            rib.insert(Route {
                prefix: prefix.clone(),
                gateway,
                beta: BetaAttrs {
                    local_pref: if rng.gen_bool(0.8) { 100 } else { 200 },
                    as_path_len: rng.gen_range(1..=3),
                    origin: if rng.gen_bool(0.9) { Origin::Igp } else { Origin::Egp },
                    med: rng.gen_bool(0.5).then(|| 10 * rng.gen_range(0..=3)),
                    origin_as: AsId(65001 + rng.gen_range(0..4)),
                },
                ebgp_local: adjacent && rng.gen_bool(0.3),
                router_id: if rng.gen_bool(0.2) { rng.gen_range(1..=3) } else { gateway.0 },
            })?;
        }
    }
    Ok(rib)
}

fn random_event(
    rng: &mut ChaCha8Rng,
    topology: &Topology,
    routers: &[NodeId],
    gateways: &[NodeId],
    down_link: Option<(NodeId, NodeId)>,
    down_node: Option<NodeId>,
) -> IgpEvent {
    let up_links: Vec<(NodeId, NodeId)> = (0..topology.links().len())
        .filter(|&i| topology.effective_weight(i).is_some())
        .map(|i| (topology.links()[i].from, topology.links()[i].to))
        .collect();
    let up_nodes: Vec<NodeId> = routers
        .iter()
        .chain(gateways)
        .copied()
        .filter(|&n| n != topology.vantage() && topology.node(n).up)
        .collect();
    loop {
        let roll = rng.gen_range(0..100);
        let event = if roll < 30 {
            let &(from, to) = up_links.choose(rng).expect("links exist");
            IgpEvent::WeightChange {
                from,
                to,
                weight: rng.gen_range(1..=20),
            }
        } else if roll < 55 {
            let &(from, to) = up_links.choose(rng).expect("links exist");
            IgpEvent::LinkDown { from, to }
        } else if roll < 80 {
            let up_gateways: Vec<NodeId> = gateways.iter().copied().filter(|&g| topology.node(g).up).collect();
            let pool = if rng.gen_bool(0.5) && !up_gateways.is_empty() {
                up_gateways
            } else {
                up_nodes.clone()
            };
            IgpEvent::NodeDown(*pool.choose(rng).expect("nodes exist"))
        } else if roll < 90 {
            match down_link {
                Some((from, to)) => IgpEvent::LinkUp {
                    from,
                    to,
                    weight: rng.gen_range(1..=10),
                },
                None => IgpEvent::LinkUp {
                    from: *routers.choose(rng).unwrap(),
                    to: **routers.iter().chain(gateways).collect::<Vec<_>>().choose(rng).unwrap(),
                    weight: rng.gen_range(1..=10),
                },
            }
        } else {
            match down_node {
                Some(n) => IgpEvent::NodeUp(n),
                None => continue,
            }
        };
        if topology.with_event(&event).is_ok() {
            return event;
        }
    }
}

/// Outcome of running one case under one option set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    pub index: usize,
    pub options: ExtractOptions,
    pub mismatches: usize,
    /// Prefixes with a reachable gateway after the event.
    pub checked: usize,
    pub extract_after_bootstrap: u64,
    pub weight_change: bool,
    pub biconnected: bool,
}

pub fn run_case(case: &FuzzCase, extract: ExtractOptions) -> Result<CaseResult> {
    let options = EngineOptions {
        extract,
        med: case.med,
        retain_unused: case.index % 4 == 3,
    };
    let scenario = Scenario {
        events: vec![("fuzz".into(), ScenarioEvent::Igp(case.event.clone()))],
    };
    let report = run_scenario(case.topology.clone(), &case.rib, &scenario, options)?;
    let last = report.records.last().expect("one event");
    Ok(CaseResult {
        index: case.index,
        options: extract,
        mismatches: report.mismatches(),
        checked: last.selections.iter().filter(|s| s.oracle.is_some()).count(),
        extract_after_bootstrap: report.extract_calls_after_bootstrap(),
        weight_change: case.is_weight_change(),
        biconnected: case.biconnected,
    })
}

/// Aggregate over a corpus.
#[derive(Debug, Clone, Default)]
pub struct FuzzSummary {
    pub cases: usize,
    pub runs: usize,
    pub checked: usize,
    pub mismatches: usize,
    /// Runs that disagreed with the oracle.
    pub failures: Vec<CaseResult>,
    /// Runs of weight changes on 2-node-connected instances.
    pub stability_runs: usize,
    /// Extractions triggered by those runs.
    pub stability_extracts: u64,
}

impl FuzzSummary {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.stability_extracts == 0
    }
}

/// Runs cases `0..cases` under every option set, in parallel.
pub fn run_fuzz(seed: u64, cases: usize, option_sets: &[ExtractOptions]) -> Result<FuzzSummary> {
    let results: Vec<Vec<CaseResult>> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let case = generate_case(seed, i)?;
            option_sets.iter().map(|&o| run_case(&case, o)).collect()
        })
        .collect::<Result<_>>()?;
    let mut summary = FuzzSummary {
        cases,
        ..FuzzSummary::default()
    };
    for r in results.into_iter().flatten() {
        summary.runs += 1;
        summary.checked += r.checked;
        summary.mismatches += r.mismatches;
        if r.weight_change && r.biconnected {
            summary.stability_runs += 1;
            summary.stability_extracts += r.extract_after_bootstrap;
        }
        if r.mismatches > 0 {
            summary.failures.push(r);
        }
    }
    Ok(summary)
}
