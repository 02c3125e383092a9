//! Per-prefix control-plane structure: routes grouped into MED-aware rounded
//! (MR) sets, one per MED-excluded β key, kept in decreasing preference.
//!
//! Leaf order depends on β only, so no IGP event can reorder it. Inside a
//! leaf, routes of one origin AS form a MED chain; only the lowest-MED tier
//! of reachable routes in a chain competes on α.

use std::collections::BTreeMap;

use crate::bgp::{alpha_of, AsId, BetaKey, MedPolicy, Route, RouteKey};
use crate::data_plane::{GatewayRecord, OprContent, OprEntry};
use crate::graph::{DistanceMap, IgpState, NodeId};
use crate::{Error, Result};

/// Identifies a MED chain inside a leaf. Routes that cannot be compared on
/// MED (no MED under [`MedPolicy::Ignore`]) get a chain of their own, keyed
/// by gateway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainKey {
    pub origin_as: AsId,
    pub solo: Option<NodeId>,
}

/// Routes of one origin AS sharing a β key, sorted by ascending MED.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedChain {
    key: ChainKey,
    routes: Vec<Route>,
}

impl MedChain {
    pub fn key(&self) -> ChainKey {
        self.key
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    /// Index of the first reachable route (M_top), if any.
    pub fn top_index(&self, distances: &DistanceMap) -> Option<usize> {
        self.routes.iter().position(|r| alpha_of(r, distances).is_finite())
    }

    /// Reachable routes that share the lowest reachable MED. Routes with
    /// equal MED are not eliminated by each other, so the tier can hold more
    /// than one route.
    pub fn top_tier<'a>(&'a self, distances: &'a DistanceMap, med: MedPolicy) -> impl Iterator<Item = &'a Route> + 'a {
        let tier_med = self
            .top_index(distances)
            .map(|i| med.effective(self.routes[i].beta.med));
        self.routes.iter().filter(move |r| {
            tier_med.is_some_and(|m| med.effective(r.beta.med) == m) && alpha_of(r, distances).is_finite()
        })
    }
}

/// One leaf: every route of the prefix with the same MED-excluded β.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MrSet {
    key: BetaKey,
    chains: BTreeMap<ChainKey, MedChain>,
}

impl MrSet {
    pub fn key(&self) -> BetaKey {
        self.key
    }

    pub fn chains(&self) -> impl Iterator<Item = &MedChain> {
        self.chains.values()
    }

    pub fn routes(&self) -> impl Iterator<Item = &Route> {
        self.chains.values().flat_map(|c| c.routes.iter())
    }

    pub fn len(&self) -> usize {
        self.chains.values().map(|c| c.routes.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Best route of the leaf for the given distances.
    pub fn best<'a>(&'a self, distances: &'a DistanceMap, med: MedPolicy) -> Option<&'a Route> {
        self.chains
            .values()
            .flat_map(|c| c.top_tier(distances, med))
            .min_by_key(|r| (alpha_of(r, distances), r.router_id, r.gateway, r.beta.origin_as))
    }
}

/// The ordered leaves of one prefix.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LeafList {
    leaves: BTreeMap<BetaKey, MrSet>,
    med: MedPolicy,
}

impl LeafList {
    pub fn new(med: MedPolicy) -> Self {
        LeafList {
            leaves: BTreeMap::new(),
            med,
        }
    }

    pub fn med_policy(&self) -> MedPolicy {
        self.med
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// Leaves from most to least preferred.
    pub fn leaves(&self) -> impl Iterator<Item = &MrSet> {
        self.leaves.values()
    }

    pub fn routes(&self) -> impl Iterator<Item = &Route> {
        self.leaves.values().flat_map(MrSet::routes)
    }

    /// 1-based rank of the leaf with this β key.
    pub fn rank_of(&self, key: &BetaKey) -> Option<usize> {
        self.leaves.range(..=key).next_back().filter(|(k, _)| *k == key)?;
        Some(self.leaves.range(..key).count() + 1)
    }

    fn chain_key(&self, route: &Route) -> ChainKey {
        let solo = self
            .med
            .effective(route.beta.med)
            .is_none()
            .then_some(route.gateway);
        ChainKey {
            origin_as: route.beta.origin_as,
            solo,
        }
    }

    /// Inserts the route and returns the rank of the leaf now holding it.
    pub fn insert_route(&mut self, route: Route) -> Result<usize> {
        let key = route.beta_key();
        let chain_key = self.chain_key(&route);
        if self
            .routes()
            .any(|r| r.gateway == route.gateway && r.beta.origin_as == route.beta.origin_as)
        {
            return Err(Error::Conflict(format!(
                "route for {} via node #{} from AS{} already present",
                route.prefix, route.gateway.0, route.beta.origin_as.0
            )));
        }
        let med = self.med;
        let leaf = self.leaves.entry(key).or_insert_with(|| MrSet {
            key,
            chains: BTreeMap::new(),
        });
        let chain = leaf.chains.entry(chain_key).or_insert_with(|| MedChain {
            key: chain_key,
            routes: Vec::new(),
        });
        let order = |r: &Route| (med.effective(r.beta.med).unwrap_or(0), r.router_id, r.gateway);
        let pos = chain.routes.partition_point(|r| order(r) <= order(&route));
        chain.routes.insert(pos, route);
        Ok(self.rank_of(&key).expect("leaf just inserted"))
    }

    /// Removes the route and returns it with the rank its leaf had.
    pub fn remove_route(&mut self, key: &RouteKey) -> Result<(usize, Route)> {
        let found = self.leaves.iter().find_map(|(beta, leaf)| {
            leaf.chains.iter().find_map(|(ck, chain)| {
                chain
                    .routes
                    .iter()
                    .position(|r| r.gateway == key.gateway && r.beta.origin_as == key.origin_as)
                    .map(|pos| (*beta, *ck, pos))
            })
        });
        let (beta, chain_key, pos) = found.ok_or_else(|| {
            Error::NotFound(format!(
                "route for {} via node #{} from AS{}",
                key.prefix, key.gateway.0, key.origin_as.0
            ))
        })?;
        let rank = self.rank_of(&beta).expect("leaf exists");
        let leaf = self.leaves.get_mut(&beta).expect("leaf exists");
        let chain = leaf.chains.get_mut(&chain_key).expect("chain exists");
        let route = chain.routes.remove(pos);
        if chain.routes.is_empty() {
            leaf.chains.remove(&chain_key);
        }
        if leaf.chains.is_empty() {
            self.leaves.remove(&beta);
        }
        Ok((rank, route))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtractOptions {
    /// Keep only g1 and the best gateway of the second leaf when the first
    /// leaf holds a single route and that pair is enough.
    pub second_mr: bool,
    /// Drop MED-chain entries below the first reachable tier.
    pub drop_med: bool,
}

/// Result of extracting an OPR set from a leaf list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub content: OprContent,
    /// Number of leaves (the `x` of the union) the set was built from.
    pub leaves_used: usize,
    pub protected: bool,
    /// Built by the second-leaf reduction.
    pub reduced: bool,
}

/// Extracts the OPR set: the union of the first `x` leaves, `x` minimal such
/// that the union's gateways admit two node-disjoint paths from the vantage.
/// If no prefix of the list protects, every leaf is returned and the set is
/// flagged unprotected.
pub fn extract_opr(leaves: &LeafList, igp: &mut IgpState, options: ExtractOptions) -> Result<Extraction> {
    if leaves.is_empty() {
        return Err(Error::Parameter("cannot extract an OPR set from an empty leaf list".into()));
    }
    if options.second_mr {
        if let Some(extraction) = reduced_pair(leaves, igp)? {
            return Ok(extraction);
        }
    }

    let distances = igp.distances().clone();
    let mut entries = Vec::new();
    let mut gateways = Vec::new();
    for (i, leaf) in leaves.leaves().enumerate() {
        for chain in leaf.chains() {
            let entry = chain_entry(chain, leaf.key(), &distances, leaves.med, options.drop_med);
            gateways.extend(entry.records.iter().map(|r| r.gateway));
            entries.push(entry);
        }
        if igp.topology().two_disjoint_paths(&gateways)? {
            return Ok(Extraction {
                content: OprContent::new(entries, true, false),
                leaves_used: i + 1,
                protected: true,
                reduced: false,
            });
        }
    }
    Ok(Extraction {
        content: OprContent::new(entries, false, false),
        leaves_used: leaves.len(),
        protected: false,
        reduced: false,
    })
}

fn chain_entry(chain: &MedChain, beta: BetaKey, distances: &DistanceMap, med: MedPolicy, drop_med: bool) -> OprEntry {
    let mut routes: &[Route] = &chain.routes;
    let mut truncated = false;
    if drop_med {
        if let Some(top) = chain.top_index(distances) {
            let tier = med.effective(chain.routes[top].beta.med);
            let keep = top + chain.routes[top..]
                .iter()
                .take_while(|r| med.effective(r.beta.med) == tier)
                .count();
            truncated = keep < routes.len();
            routes = &routes[..keep];
        }
    }
    OprEntry {
        origin_as: chain.key.origin_as,
        solo: chain.key.solo.is_some(),
        truncated,
        records: routes.iter().map(|r| record(r, beta, med)).collect(),
    }
}

fn record(route: &Route, beta: BetaKey, med: MedPolicy) -> GatewayRecord {
    GatewayRecord {
        gateway: route.gateway,
        router_id: route.router_id,
        beta,
        med: med.effective(route.beta.med),
        ebgp_local: route.ebgp_local,
    }
}

/// Second-leaf reduction. With a single route g1 in the first leaf, the pair
/// {g1, g2} (g2 the current best of the second leaf) is used when
///
/// - the pair admits two node-disjoint paths, and
/// - g2 is still the best of the second leaf after every single failure that
///   cuts g1 off.
///
/// Any other event leaves g1 reachable, and g1 then wins on β.
fn reduced_pair(leaves: &LeafList, igp: &mut IgpState) -> Result<Option<Extraction>> {
    let mut iter = leaves.leaves();
    let (Some(first), Some(second)) = (iter.next(), iter.next()) else {
        return Ok(None);
    };
    if first.len() != 1 {
        return Ok(None);
    }
    let g1 = first.routes().next().expect("non-empty leaf");
    let distances = igp.distances().clone();
    let Some(g2) = second.best(&distances, leaves.med) else {
        return Ok(None);
    };
    if !igp.topology().two_disjoint_paths(&[g1.gateway, g2.gateway])? {
        return Ok(None);
    }
    let cuts = igp.cutting_failures(g1.gateway).to_vec();
    for failure in cuts {
        let after = igp.distances_without(failure);
        if second.best(after, leaves.med).map(Route::key) != Some(g2.key()) {
            return Ok(None);
        }
    }
    let entry = |route: &Route, beta| OprEntry {
        origin_as: route.beta.origin_as,
        solo: true,
        truncated: false,
        records: vec![record(route, beta, leaves.med)],
    };
    let entries = vec![entry(g1, first.key()), entry(g2, second.key())];
    Ok(Some(Extraction {
        content: OprContent::new(entries, true, true),
        leaves_used: 2,
        protected: true,
        reduced: true,
    }))
}

#[cfg(test)]
mod tests;
