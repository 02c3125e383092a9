use std::collections::HashMap;

use super::{DistanceMap, EventClass, IgpEvent, NodeId, Topology};
use crate::Result;

/// A single failed element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Failure {
    Node(NodeId),
    /// Index into [`Topology::links`].
    Link(usize),
}

/// The current topology, its SPF result, and memoized what-if computations
/// that stay valid until the next event.
#[derive(Debug, Clone)]
pub struct IgpState {
    topology: Topology,
    distances: DistanceMap,
    cuts: HashMap<NodeId, Vec<Failure>>,
    what_if: HashMap<Failure, DistanceMap>,
}

impl IgpState {
    pub fn new(topology: Topology) -> Self {
        let distances = topology.spf();
        IgpState {
            topology,
            distances,
            cuts: HashMap::new(),
            what_if: HashMap::new(),
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn distances(&self) -> &DistanceMap {
        &self.distances
    }

    /// Applies the event and recomputes SPF.
    pub fn apply(&mut self, event: &IgpEvent) -> Result<EventClass> {
        let class = self.topology.apply_event(event)?;
        self.distances = self.topology.spf();
        self.cuts.clear();
        self.what_if.clear();
        Ok(class)
    }

    /// Distances after `failure`, memoized for the current topology.
    pub fn distances_without(&mut self, failure: Failure) -> &DistanceMap {
        let topology = &self.topology;
        self.what_if
            .entry(failure)
            .or_insert_with(|| topology.spf_without(failure))
    }

    /// Every single node or link failure after which `target` is no longer
    /// reachable from the vantage. Empty if it is unreachable already.
    pub fn cutting_failures(&mut self, target: NodeId) -> &[Failure] {
        let topology = &self.topology;
        let distances = &self.distances;
        self.cuts.entry(target).or_insert_with(|| {
            if !distances.get(target).is_finite() {
                return Vec::new();
            }
            let vantage = topology.vantage();
            let mut cuts = Vec::new();
            for (id, node) in topology.nodes() {
                if id == vantage || !node.up {
                    continue;
                }
                if id == target || !reaches(topology, target, Failure::Node(id)) {
                    cuts.push(Failure::Node(id));
                }
            }
            for idx in 0..topology.links().len() {
                if topology.effective_weight(idx).is_some() && !reaches(topology, target, Failure::Link(idx)) {
                    cuts.push(Failure::Link(idx));
                }
            }
            cuts
        })
    }
}

fn reaches(topology: &Topology, target: NodeId, failure: Failure) -> bool {
    let mut seen = vec![false; topology.node_count()];
    let start = topology.vantage();
    let mut stack = vec![start];
    seen[start.index()] = true;
    while let Some(u) = stack.pop() {
        if u == target {
            return true;
        }
        for (v, _, link) in topology.arcs(u) {
            if Failure::Node(v) == failure || Failure::Link(link) == failure || seen[v.index()] {
                continue;
            }
            seen[v.index()] = true;
            stack.push(v);
        }
    }
    false
}
