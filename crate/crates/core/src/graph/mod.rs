//! IGP topology as seen from one computing router (the vantage).
//!
//! Nodes are internal routers or external gateway nodes. Links carry a
//! positive integer weight or the [`Weight::Infinite`] sentinel, which models
//! a removed link. A node that is down makes every incident link unusable
//! without forgetting the link's configured weight, so bringing the node back
//! restores the previous state exactly.

mod context;
mod flow;
mod spf;
mod text;

use std::collections::HashMap;
use std::fmt;

pub use context::{Failure, IgpState};
pub use spf::DistanceMap;
pub use text::parse_topology;

use crate::{Error, Result};

/// Dense node identifier, assigned in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Link weight. `Infinite` means the link is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weight {
    Finite(u32),
    Infinite,
}

impl Weight {
    pub fn finite(self) -> Option<u32> {
        match self {
            Weight::Finite(w) => Some(w),
            Weight::Infinite => None,
        }
    }
}

/// Path cost from the vantage. Variant order makes every finite value
/// compare below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(u64),
    Infinite,
}

impl Distance {
    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub fn value(self) -> Option<u64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub external: bool,
    pub up: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: Weight,
    /// Directed links can only be traversed `from -> to`.
    pub directed: bool,
}

impl Link {
    fn connects(&self, a: NodeId, b: NodeId) -> bool {
        (self.from == a && self.to == b) || (!self.directed && self.from == b && self.to == a)
    }
}

/// Two links clash unless they are opposite directed arcs.
fn clashes(a: &Link, b: &Link) -> bool {
    a.connects(b.from, b.to) || b.connects(a.from, a.to)
}

/// A single IGP event. Links are named by their endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IgpEvent {
    WeightChange { from: NodeId, to: NodeId, weight: u32 },
    LinkDown { from: NodeId, to: NodeId },
    /// Restores a down link, or inserts a new undirected link.
    LinkUp { from: NodeId, to: NodeId, weight: u32 },
    NodeDown(NodeId),
    NodeUp(NodeId),
}

/// How an applied event relates to reachability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventClass {
    /// Finite weight change on a link that was usable before and after.
    WeightOnly,
    /// Anything that can change which nodes are reachable.
    Structural,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    /// Link indices incident to each node, regardless of direction.
    incident: Vec<Vec<usize>>,
    index: HashMap<String, NodeId>,
    vantage: NodeId,
}

impl Topology {
    /// Creates a topology holding only the vantage router.
    pub fn new(vantage: &str) -> Self {
        let mut topo = Topology {
            nodes: Vec::new(),
            links: Vec::new(),
            incident: Vec::new(),
            index: HashMap::new(),
            vantage: NodeId(0),
        };
        topo.vantage = topo.add_node(vantage, false).expect("empty topology");
        topo
    }

    /// Builds a topology from parts, checking every structural invariant.
    pub fn from_parts(nodes: Vec<Node>, links: Vec<Link>, vantage: NodeId) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.name.clone(), NodeId(i as u32)).is_some() {
                return Err(Error::Topology(format!("duplicate node `{}`", n.name)));
            }
        }
        let mut incident = vec![Vec::new(); nodes.len()];
        for (i, l) in links.iter().enumerate() {
            for end in [l.from, l.to] {
                if end.index() >= nodes.len() {
                    return Err(Error::Topology(format!("link endpoint {} is not a node", end.0)));
                }
            }
            if l.from == l.to {
                return Err(Error::Topology(format!("self-loop on `{}`", nodes[l.from.index()].name)));
            }
            if l.weight == Weight::Finite(0) {
                return Err(Error::Topology("link weights must be >= 1".into()));
            }
            incident[l.from.index()].push(i);
            incident[l.to.index()].push(i);
        }
        let Some(v) = nodes.get(vantage.index()) else {
            return Err(Error::Topology("vantage is not a node".into()));
        };
        if v.external {
            return Err(Error::Topology(format!("vantage `{}` must be internal", v.name)));
        }
        if !v.up {
            return Err(Error::Topology(format!("vantage `{}` must be up", v.name)));
        }
        let topo = Topology {
            nodes,
            links,
            incident,
            index,
            vantage,
        };
        for (i, l) in topo.links.iter().enumerate() {
            if topo.links[..i].iter().any(|o| clashes(o, l)) {
                return Err(Error::Topology(format!(
                    "duplicate link {} - {}",
                    topo.name(l.from),
                    topo.name(l.to)
                )));
            }
        }
        Ok(topo)
    }

    pub fn add_node(&mut self, name: &str, external: bool) -> Result<NodeId> {
        if self.index.contains_key(name) {
            return Err(Error::Conflict(format!("node `{name}` already exists")));
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            name: name.to_string(),
            external,
            up: true,
        });
        self.incident.push(Vec::new());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_link(&mut self, from: NodeId, to: NodeId, weight: u32, directed: bool) -> Result<usize> {
        self.check_node(from)?;
        self.check_node(to)?;
        if from == to {
            return Err(Error::Topology("self-loops are not allowed".into()));
        }
        if weight == 0 {
            return Err(Error::Parameter("link weights must be >= 1".into()));
        }
        let candidate = Link {
            from,
            to,
            weight: Weight::Finite(weight),
            directed,
        };
        if self.incident[from.index()].iter().any(|&i| clashes(&self.links[i], &candidate)) {
            return Err(Error::Conflict(format!(
                "link {} - {} already exists",
                self.name(from),
                self.name(to)
            )));
        }
        let idx = self.links.len();
        self.links.push(candidate);
        self.incident[from.index()].push(idx);
        self.incident[to.index()].push(idx);
        Ok(idx)
    }

    pub fn vantage(&self) -> NodeId {
        self.vantage
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i as u32), n))
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].name
    }

    pub fn lookup(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<NodeId> {
        self.lookup(name)
            .ok_or_else(|| Error::NotFound(format!("node `{name}`")))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::NotFound(format!("node #{}", id.0)))
        }
    }

    /// Index of the link usable as `from -> to` (an undirected link matches
    /// either orientation).
    pub fn find_link(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.incident
            .get(from.index())?
            .iter()
            .copied()
            .find(|&i| self.links[i].connects(from, to))
    }

    /// Weight of link `idx` once node state is taken into account.
    pub fn effective_weight(&self, idx: usize) -> Option<u32> {
        let l = &self.links[idx];
        if self.nodes[l.from.index()].up && self.nodes[l.to.index()].up {
            l.weight.finite()
        } else {
            None
        }
    }

    /// Usable outgoing arcs of `node` as `(neighbor, weight, link index)`.
    pub(crate) fn arcs(&self, node: NodeId) -> impl Iterator<Item = (NodeId, u32, usize)> + '_ {
        self.incident[node.index()].iter().filter_map(move |&i| {
            let l = &self.links[i];
            let next = if l.from == node {
                l.to
            } else if !l.directed {
                l.from
            } else {
                return None;
            };
            self.effective_weight(i).map(|w| (next, w, i))
        })
    }

    /// Applies one event in place and reports whether it could have changed
    /// reachability.
    pub fn apply_event(&mut self, event: &IgpEvent) -> Result<EventClass> {
        match *event {
            IgpEvent::WeightChange { from, to, weight } => {
                if weight == 0 {
                    return Err(Error::Parameter("weight-change needs a finite weight >= 1".into()));
                }
                let idx = self.existing_link(from, to)?;
                let usable_before = self.effective_weight(idx).is_some();
                self.links[idx].weight = Weight::Finite(weight);
                Ok(if usable_before {
                    EventClass::WeightOnly
                } else {
                    EventClass::Structural
                })
            }
            IgpEvent::LinkDown { from, to } => {
                let idx = self.existing_link(from, to)?;
                if self.links[idx].weight == Weight::Infinite {
                    return Err(Error::Conflict(format!(
                        "link {} - {} is already down",
                        self.name(from),
                        self.name(to)
                    )));
                }
                self.links[idx].weight = Weight::Infinite;
                Ok(EventClass::Structural)
            }
            IgpEvent::LinkUp { from, to, weight } => {
                if weight == 0 {
                    return Err(Error::Parameter("link-up needs a finite weight >= 1".into()));
                }
                self.check_node(from)?;
                self.check_node(to)?;
                match self.find_link(from, to) {
                    Some(idx) if self.links[idx].weight != Weight::Infinite => Err(Error::Conflict(format!(
                        "link {} - {} is already up",
                        self.name(from),
                        self.name(to)
                    ))),
                    Some(idx) => {
                        self.links[idx].weight = Weight::Finite(weight);
                        Ok(EventClass::Structural)
                    }
                    None => {
                        self.add_link(from, to, weight, false)?;
                        Ok(EventClass::Structural)
                    }
                }
            }
            IgpEvent::NodeDown(id) => {
                self.check_node(id)?;
                if id == self.vantage {
                    return Err(Error::Parameter("the vantage router cannot fail".into()));
                }
                let node = &mut self.nodes[id.index()];
                if !node.up {
                    return Err(Error::Conflict(format!("node `{}` is already down", node.name)));
                }
                node.up = false;
                Ok(EventClass::Structural)
            }
            IgpEvent::NodeUp(id) => {
                self.check_node(id)?;
                let node = &mut self.nodes[id.index()];
                if node.up {
                    return Err(Error::Conflict(format!("node `{}` is already up", node.name)));
                }
                node.up = true;
                Ok(EventClass::Structural)
            }
        }
    }

    /// Returns a copy of the topology with `event` applied.
    pub fn with_event(&self, event: &IgpEvent) -> Result<Topology> {
        let mut next = self.clone();
        next.apply_event(event)?;
        Ok(next)
    }

    fn existing_link(&self, from: NodeId, to: NodeId) -> Result<usize> {
        self.check_node(from)?;
        self.check_node(to)?;
        self.find_link(from, to).ok_or_else(|| {
            Error::NotFound(format!("link {} - {}", self.name(from), self.name(to)))
        })
    }

    /// Shortest-path distances from the vantage.
    pub fn spf(&self) -> DistanceMap {
        spf::dijkstra(self, None)
    }

    /// Shortest-path distances with one element treated as failed.
    pub fn spf_without(&self, failure: Failure) -> DistanceMap {
        spf::dijkstra(self, Some(failure))
    }

    /// True iff the vantage reaches a virtual prefix node, attached to every
    /// gateway in `gateways`, through two paths sharing no intermediate node.
    pub fn two_disjoint_paths(&self, gateways: &[NodeId]) -> Result<bool> {
        if gateways.is_empty() {
            return Err(Error::Parameter("gateway set must not be empty".into()));
        }
        for &g in gateways {
            self.check_node(g)?;
        }
        Ok(flow::disjoint_paths_to_gateways(self, gateways, 2) >= 2)
    }

    /// Is the undirected graph of usable links and up nodes 2-node-connected?
    pub fn is_biconnected(&self) -> bool {
        let up: Vec<NodeId> = self.nodes().filter(|(_, n)| n.up).map(|(id, _)| id).collect();
        if up.len() < 3 {
            return false;
        }
        let connected_without = |skip: Option<NodeId>| {
            let start = up.iter().copied().find(|&n| Some(n) != skip).unwrap();
            let mut seen = vec![false; self.nodes.len()];
            let mut stack = vec![start];
            seen[start.index()] = true;
            while let Some(u) = stack.pop() {
                for &i in &self.incident[u.index()] {
                    if self.effective_weight(i).is_none() {
                        continue;
                    }
                    let l = &self.links[i];
                    let v = if l.from == u { l.to } else { l.from };
                    if Some(v) != skip && !seen[v.index()] {
                        seen[v.index()] = true;
                        stack.push(v);
                    }
                }
            }
            up.iter().all(|&n| Some(n) == skip || seen[n.index()])
        };
        connected_without(None) && up.iter().all(|&v| connected_without(Some(v)))
    }
}
