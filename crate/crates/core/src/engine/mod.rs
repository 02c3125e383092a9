//! Event handling on top of the control and data planes: BGP updates, IGP
//! changes with a fast path and background recomputation, and the oracle
//! cross-check used by scenarios and fuzzing.

mod fuzz;
mod instance;
mod scenario;

use std::collections::{BTreeMap, BTreeSet};

pub use fuzz::{generate_case, run_case, run_fuzz, CaseResult, FuzzCase, FuzzSummary};
pub use instance::{distinct_gateway_sets, generate_instance, RandomModelParams};
pub use scenario::{parse_scenario, run_scenario, EventRecord, PrefixSelection, RunReport, Scenario, ScenarioEvent};

use crate::bgp::{oracle_best, MedPolicy, Prefix, Rib, Route, RouteKey};
use crate::control_plane::{ExtractOptions, LeafList};
use crate::data_plane::{update_opr, MetaSet, SetKey};
use crate::graph::{Distance, EventClass, IgpEvent, IgpState, NodeId, Topology};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    pub extract: ExtractOptions,
    pub med: MedPolicy,
    /// Keep OPR sets that no prefix uses any more.
    pub retain_unused: bool,
}

/// Running totals of the expensive operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub extract_calls: u64,
    pub update_calls: u64,
}

/// What an IGP event cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IgpOutcome {
    pub class: EventClass,
    /// Referenced sets visited by the fast path.
    pub walked: usize,
    /// Sets queued for background recomputation.
    pub queued: usize,
    /// Prefixes recomputed in the background.
    pub recomputed: usize,
    pub extract_calls: u64,
    /// Gateway chosen by each prefix right after the fast path.
    pub fast: BTreeMap<Prefix, Option<(NodeId, Distance)>>,
}

/// Whether a BGP update reached the data plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BgpOutcome {
    /// 1-based rank of the leaf that held or now holds the route.
    pub rank: usize,
    pub updated: bool,
}

#[derive(Debug, Clone, Copy)]
struct Memo {
    leaves_used: usize,
    protected: bool,
}

/// Full router state for one vantage.
#[derive(Debug, Clone)]
pub struct Engine {
    igp: IgpState,
    rib: Rib,
    trees: BTreeMap<Prefix, LeafList>,
    memo: BTreeMap<Prefix, Memo>,
    meta: MetaSet,
    options: EngineOptions,
    counters: Counters,
}

impl Engine {
    pub fn new(topology: Topology, options: EngineOptions) -> Self {
        Engine {
            igp: IgpState::new(topology),
            rib: Rib::new(),
            trees: BTreeMap::new(),
            memo: BTreeMap::new(),
            meta: MetaSet::new(options.retain_unused),
            options,
            counters: Counters::default(),
        }
    }

    /// Engine with every route of `rib` added in order.
    pub fn bootstrap(topology: Topology, rib: &Rib, options: EngineOptions) -> Result<Self> {
        let mut engine = Engine::new(topology, options);
        for route in rib.iter() {
            engine.bgp_add(route.clone())?;
        }
        Ok(engine)
    }

    pub fn topology(&self) -> &Topology {
        self.igp.topology()
    }

    pub fn igp(&self) -> &IgpState {
        &self.igp
    }

    pub fn rib(&self) -> &Rib {
        &self.rib
    }

    pub fn meta(&self) -> &MetaSet {
        &self.meta
    }

    pub fn leaves(&self, prefix: &Prefix) -> Option<&LeafList> {
        self.trees.get(prefix)
    }

    pub fn options(&self) -> EngineOptions {
        self.options
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Current data-plane choice for `prefix`.
    pub fn selected(&self, prefix: &Prefix) -> Option<(NodeId, Distance)> {
        let top = self.meta.set_of(prefix)?.top()?;
        Some((top.gateway, top.alpha))
    }

    /// Gateway the reference decision process picks for `prefix`.
    pub fn oracle(&self, prefix: &Prefix) -> Option<NodeId> {
        oracle_best(prefix, &self.rib, self.igp.distances(), self.options.med).map(|r| r.gateway)
    }

    pub fn bgp_add(&mut self, route: Route) -> Result<BgpOutcome> {
        let prefix = route.prefix.clone();
        let gateway = route.gateway;
        self.rib.insert(route.clone())?;
        let med = self.options.med;
        let rank = self
            .trees
            .entry(prefix.clone())
            .or_insert_with(|| LeafList::new(med))
            .insert_route(route)?;
        self.finish_update(&prefix, rank, gateway)
    }

    pub fn bgp_withdraw(&mut self, key: &RouteKey) -> Result<BgpOutcome> {
        let tree = self
            .trees
            .get_mut(&key.prefix)
            .ok_or_else(|| crate::Error::NotFound(format!("prefix {}", key.prefix)))?;
        let (rank, _) = tree.remove_route(key)?;
        self.rib.remove(key)?;
        self.finish_update(&key.prefix, rank, key.gateway)
    }

    /// A change at leaf `rank` matters when the prefix is new or unprotected,
    /// when the leaf is among those forming the current set, or when the
    /// gateway is already in it.
    fn useful(&self, prefix: &Prefix, rank: usize, gateway: NodeId) -> bool {
        let Some(memo) = self.memo.get(prefix) else {
            return true;
        };
        !memo.protected
            || rank <= memo.leaves_used
            || self
                .meta
                .set_of(prefix)
                .is_some_and(|s| s.content().records().any(|r| r.gateway == gateway))
    }

    fn finish_update(&mut self, prefix: &Prefix, rank: usize, gateway: NodeId) -> Result<BgpOutcome> {
        let updated = self.useful(prefix, rank, gateway);
        if updated {
            self.recompute(prefix)?;
        }
        Ok(BgpOutcome { rank, updated })
    }

    fn recompute(&mut self, prefix: &Prefix) -> Result<()> {
        let empty = LeafList::new(self.options.med);
        let leaves = self.trees.get(prefix).unwrap_or(&empty);
        let update = update_opr(leaves, &mut self.meta, prefix, &mut self.igp, self.options.extract)?;
        self.counters.update_calls += 1;
        if leaves.is_empty() {
            self.trees.remove(prefix);
            self.memo.remove(prefix);
        } else {
            self.counters.extract_calls += 1;
            self.memo.insert(
                prefix.clone(),
                Memo {
                    leaves_used: update.leaves_used,
                    protected: update.protected,
                },
            );
        }
        Ok(())
    }

    /// Applies an IGP event: SPF, then the fast path over every referenced
    /// set, then background recomputation of the sets that may no longer be
    /// optimal-protecting. The fast path completes before any background
    /// work starts.
    pub fn igp_change(&mut self, event: &IgpEvent) -> Result<IgpOutcome> {
        let class = self.igp.apply(event)?;
        let distances = self.igp.distances().clone();
        let drop_med = self.options.extract.drop_med;

        let mut walked = 0;
        // (set, must be recomputed regardless of protection)
        let mut suspects: Vec<(SetKey, bool)> = Vec::new();
        for (key, set, refs) in self.meta.iter_mut() {
            if refs == 0 {
                continue;
            }
            walked += 1;
            let refresh = set.refresh(&distances);
            set.select();
            if class == EventClass::WeightOnly {
                continue;
            }
            let forced = set.content().reduced() || refresh.truncated_exhausted || (drop_med && set.truncation_drift());
            suspects.push((key, forced));
        }

        let fast: BTreeMap<Prefix, Option<(NodeId, Distance)>> = self
            .rib
            .prefixes()
            .map(|p| (p.clone(), self.selected(p)))
            .collect();

        let mut queue = BTreeSet::new();
        for (key, forced) in suspects {
            if forced || !self.still_optimal(&key)? {
                queue.insert(key);
            }
        }

        let before = self.counters;
        let mut recomputed = 0;
        for key in &queue {
            for prefix in self.meta.prefixes_of(*key) {
                self.recompute(&prefix)?;
                recomputed += 1;
            }
        }
        Ok(IgpOutcome {
            class,
            walked,
            queued: queue.len(),
            recomputed,
            extract_calls: self.counters.extract_calls - before.extract_calls,
            fast,
        })
    }

    /// The stored set is still protecting and minimal.
    fn still_optimal(&self, key: &SetKey) -> Result<bool> {
        let set = self.meta.get(key).expect("set exists");
        let content = set.content();
        if !content.protected() {
            return Ok(false);
        }
        let topology = self.igp.topology();
        if !topology.two_disjoint_paths(&content.gateways())? {
            return Ok(false);
        }
        let worst = content.records().map(|r| r.beta).max().expect("non-empty set");
        let mut rest: Vec<NodeId> = content.records().filter(|r| r.beta != worst).map(|r| r.gateway).collect();
        if rest.is_empty() {
            return Ok(true);
        }
        rest.sort_unstable();
        rest.dedup();
        Ok(!topology.two_disjoint_paths(&rest)?)
    }
}
