//! BGP routes split into inter-domain (β) and intra-domain (α) attributes,
//! plus the reference decision process used as an oracle.
//!
//! β = local-pref, AS-path length, origin and MED. IGP events never touch
//! them. α = eBGP/iBGP, IGP cost to the gateway and router-id; an IGP event
//! can change the IGP cost only.

mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

pub use text::{format_route, parse_rib, parse_route_tokens};

use crate::graph::{Distance, DistanceMap, NodeId};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prefix(pub String);

impl Prefix {
    pub fn new(name: impl Into<String>) -> Self {
        Prefix(name.into())
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AsId(pub u32);

/// ORIGIN attribute; lower is preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Origin {
    Igp = 0,
    Egp = 1,
    Incomplete = 2,
}

impl Origin {
    pub fn from_code(code: u8) -> Option<Origin> {
        match code {
            0 => Some(Origin::Igp),
            1 => Some(Origin::Egp),
            2 => Some(Origin::Incomplete),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BetaAttrs {
    pub local_pref: u32,
    pub as_path_len: u32,
    pub origin: Origin,
    pub med: Option<u32>,
    pub origin_as: AsId,
}

impl BetaAttrs {
    pub fn key(&self) -> BetaKey {
        BetaKey {
            local_pref: self.local_pref,
            as_path_len: self.as_path_len,
            origin: self.origin,
        }
    }
}

/// The MED-excluded β comparison key. Ordered so that the *preferred* key
/// compares `Less`: higher local-pref, then shorter AS path, then lower origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BetaKey {
    pub local_pref: u32,
    pub as_path_len: u32,
    pub origin: Origin,
}

impl Ord for BetaKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .local_pref
            .cmp(&self.local_pref)
            .then(self.as_path_len.cmp(&other.as_path_len))
            .then(self.origin.cmp(&other.origin))
    }
}

impl PartialOrd for BetaKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// α attributes of a route as seen from the vantage for one distance map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaAttrs {
    pub ebgp: bool,
    pub igp_cost: Distance,
    pub router_id: u32,
}

impl AlphaAttrs {
    /// eBGP preference folded into the IGP cost: an eBGP route costs 0 as
    /// long as its gateway is reachable.
    pub fn effective(&self) -> Distance {
        match (self.ebgp, self.igp_cost) {
            (_, Distance::Infinite) => Distance::Infinite,
            (true, Distance::Finite(_)) => Distance::Finite(0),
            (false, cost) => cost,
        }
    }
}

/// How routes without a MED take part in MED comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedPolicy {
    /// A missing MED counts as this value (0 by default).
    Default(u32),
    /// Routes without a MED are never compared on MED.
    Ignore,
}

impl Default for MedPolicy {
    fn default() -> Self {
        MedPolicy::Default(0)
    }
}

impl MedPolicy {
    /// The MED used for comparison, or `None` when the route must not be
    /// compared on MED at all.
    pub fn effective(self, med: Option<u32>) -> Option<u32> {
        match self {
            MedPolicy::Default(d) => Some(med.unwrap_or(d)),
            MedPolicy::Ignore => med,
        }
    }
}

/// Identity of a route inside a RIB.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouteKey {
    pub prefix: Prefix,
    pub gateway: NodeId,
    pub origin_as: AsId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    pub prefix: Prefix,
    /// BGP next-hop node.
    pub gateway: NodeId,
    pub beta: BetaAttrs,
    /// Learned over eBGP by the vantage itself.
    pub ebgp_local: bool,
    pub router_id: u32,
}

impl Route {
    pub fn key(&self) -> RouteKey {
        RouteKey {
            prefix: self.prefix.clone(),
            gateway: self.gateway,
            origin_as: self.beta.origin_as,
        }
    }

    pub fn beta_key(&self) -> BetaKey {
        self.beta.key()
    }

    pub fn alpha(&self, distances: &DistanceMap) -> AlphaAttrs {
        AlphaAttrs {
            ebgp: self.ebgp_local,
            igp_cost: distances.get(self.gateway),
            router_id: self.router_id,
        }
    }
}

/// MED-excluded β key of a route.
pub fn beta_key(route: &Route) -> BetaKey {
    route.beta_key()
}

/// Effective α distance: 0 for an eBGP route learned at the vantage, the IGP
/// distance to the gateway otherwise, `Infinite` when unreachable.
pub fn alpha_of(route: &Route, distances: &DistanceMap) -> Distance {
    route.alpha(distances).effective()
}

/// All known routes, per prefix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Rib {
    routes: BTreeMap<Prefix, Vec<Route>>,
}

impl Rib {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, route: Route) -> Result<()> {
        let entry = self.routes.entry(route.prefix.clone()).or_default();
        if entry
            .iter()
            .any(|r| r.gateway == route.gateway && r.beta.origin_as == route.beta.origin_as)
        {
            return Err(Error::Conflict(format!(
                "duplicate route for {} via node #{} from AS{}",
                route.prefix, route.gateway.0, route.beta.origin_as.0
            )));
        }
        entry.push(route);
        Ok(())
    }

    pub fn remove(&mut self, key: &RouteKey) -> Result<Route> {
        let not_found = || {
            Error::NotFound(format!(
                "route for {} via node #{} from AS{}",
                key.prefix, key.gateway.0, key.origin_as.0
            ))
        };
        let routes = self.routes.get_mut(&key.prefix).ok_or_else(not_found)?;
        let pos = routes
            .iter()
            .position(|r| r.gateway == key.gateway && r.beta.origin_as == key.origin_as)
            .ok_or_else(not_found)?;
        let route = routes.remove(pos);
        if routes.is_empty() {
            self.routes.remove(&key.prefix);
        }
        Ok(route)
    }

    pub fn routes(&self, prefix: &Prefix) -> &[Route] {
        self.routes.get(prefix).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn prefixes(&self) -> impl Iterator<Item = &Prefix> {
        self.routes.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Route> {
        self.routes.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.routes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }
}

/// Reference decision process over every route of `prefix`.
pub fn oracle_best<'a>(prefix: &Prefix, rib: &'a Rib, distances: &DistanceMap, med: MedPolicy) -> Option<&'a Route> {
    decide(rib.routes(prefix), distances, med)
}

/// Full decision process on a slice of routes for one prefix:
///
/// 1. drop routes whose gateway is unreachable;
/// 2. keep the routes with the best MED-excluded β;
/// 3. per origin AS, drop routes with a higher MED than another survivor;
/// 4. lowest effective α (eBGP counts as 0);
/// 5. lowest router-id, then lowest gateway id and origin AS.
pub fn decide<'a>(routes: &'a [Route], distances: &DistanceMap, med: MedPolicy) -> Option<&'a Route> {
    let reachable: Vec<(&Route, Distance)> = routes
        .iter()
        .map(|r| (r, alpha_of(r, distances)))
        .filter(|(_, a)| a.is_finite())
        .collect();
    let best_beta = reachable.iter().map(|(r, _)| r.beta_key()).min()?;
    let same_beta: Vec<(&Route, Distance)> = reachable
        .into_iter()
        .filter(|(r, _)| r.beta_key() == best_beta)
        .collect();
    let survivors = same_beta.iter().filter(|(r, _)| {
        let Some(mine) = med.effective(r.beta.med) else {
            return true;
        };
        !same_beta.iter().any(|(o, _)| {
            o.beta.origin_as == r.beta.origin_as && med.effective(o.beta.med).is_some_and(|theirs| theirs < mine)
        })
    });
    survivors
        .min_by_key(|(r, alpha)| (*alpha, r.router_id, r.gateway, r.beta.origin_as))
        .map(|(r, _)| *r)
}
