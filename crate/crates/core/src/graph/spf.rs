use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Index;

use super::{Distance, Failure, NodeId, Topology};

/// Distances from the vantage, indexed by [`NodeId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap(Vec<Distance>);

impl DistanceMap {
    pub fn get(&self, node: NodeId) -> Distance {
        self.0.get(node.index()).copied().unwrap_or(Distance::Infinite)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Distance)> + '_ {
        self.0.iter().enumerate().map(|(i, d)| (NodeId(i as u32), *d))
    }

    /// Raw per-node distances; mainly for building maps in tests.
    pub fn from_vec(values: Vec<Distance>) -> Self {
        DistanceMap(values)
    }
}

impl Index<NodeId> for DistanceMap {
    type Output = Distance;

    fn index(&self, node: NodeId) -> &Distance {
        &self.0[node.index()]
    }
}

/// Dijkstra from the vantage. The heap orders by `(distance, node id)` so
/// settlement order is deterministic.
pub(super) fn dijkstra(topo: &Topology, failure: Option<Failure>) -> DistanceMap {
    let n = topo.node_count();
    let mut dist = vec![Distance::Infinite; n];
    let source = topo.vantage();
    let blocked_node = match failure {
        Some(Failure::Node(v)) => Some(v),
        _ => None,
    };
    let blocked_link = match failure {
        Some(Failure::Link(l)) => Some(l),
        _ => None,
    };
    if blocked_node == Some(source) {
        return DistanceMap(dist);
    }

    let mut heap = BinaryHeap::new();
    dist[source.index()] = Distance::Finite(0);
    heap.push(Reverse((0u64, source.0)));
    while let Some(Reverse((d, u))) = heap.pop() {
        let u = NodeId(u);
        if dist[u.index()] != Distance::Finite(d) {
            continue;
        }
        for (v, w, link) in topo.arcs(u) {
            if Some(v) == blocked_node || Some(link) == blocked_link {
                continue;
            }
            let candidate = d + u64::from(w);
            if Distance::Finite(candidate) < dist[v.index()] {
                dist[v.index()] = Distance::Finite(candidate);
                heap.push(Reverse((candidate, v.0)));
            }
        }
    }
    DistanceMap(dist)
}
