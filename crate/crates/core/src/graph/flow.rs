//! Unit-capacity max-flow on the node-split graph, used to count
//! internally node-disjoint paths from the vantage to a virtual prefix node.

use std::collections::VecDeque;

use super::{NodeId, Topology};

struct Arc {
    to: usize,
    cap: u32,
}

struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network {
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: u32) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0 });
    }

    /// One BFS augmentation of a single unit; false when no path remains.
    fn augment(&mut self, source: usize, sink: usize) -> bool {
        let mut via = vec![usize::MAX; self.out.len()];
        let mut queue = VecDeque::from([source]);
        let mut seen = vec![false; self.out.len()];
        seen[source] = true;
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for &a in &self.out[u] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    via[arc.to] = a;
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[sink] {
            return false;
        }
        let mut v = sink;
        while v != source {
            let a = via[v];
            self.arcs[a].cap -= 1;
            self.arcs[a ^ 1].cap += 1;
            v = self.arcs[a ^ 1].to;
        }
        true
    }
}

/// Number of internally node-disjoint vantage -> prefix paths, capped at
/// `limit`. Node `v` becomes `2v -> 2v+1` with capacity one (the vantage is
/// uncapped); every gateway feeds the virtual sink.
pub(super) fn disjoint_paths_to_gateways(topo: &Topology, gateways: &[NodeId], limit: u32) -> u32 {
    let n = topo.node_count();
    let sink = 2 * n;
    let mut net = Network::new(2 * n + 1);
    let vantage = topo.vantage();
    for (id, node) in topo.nodes() {
        if !node.up {
            continue;
        }
        let cap = if id == vantage { limit } else { 1 };
        net.add(2 * id.index(), 2 * id.index() + 1, cap);
        for (next, _, _) in topo.arcs(id) {
            net.add(2 * id.index() + 1, 2 * next.index(), 1);
        }
    }
    let mut attached = vec![false; n];
    for &g in gateways {
        if !attached[g.index()] && topo.node(g).up {
            attached[g.index()] = true;
            net.add(2 * g.index() + 1, sink, 1);
        }
    }
    let source = 2 * vantage.index() + 1;
    let mut flow = 0;
    while flow < limit && net.augment(source, sink) {
        flow += 1;
    }
    flow
}
