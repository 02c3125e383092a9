use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bgp::{AsId, BetaAttrs, Origin, Prefix, Rib, Route};
use crate::data_plane::MetaSet;
use crate::graph::{NodeId, Topology};
use crate::{Error, Result};

/// Parameters of the random advertisement model: `gateways` border gateways,
/// `prefixes` prefixes, each advertised by `per_prefix` gateways drawn
/// uniformly, each route getting a preference rank uniform in
/// `1..=spreading`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomModelParams {
    pub gateways: usize,
    pub prefixes: usize,
    pub spreading: u32,
    pub per_prefix: usize,
    /// Optional `(gateways, prefixes)` per local-pref class. Gateway pools
    /// are disjoint; a prefix only uses gateways of its class.
    pub classes: Option<Vec<(usize, usize)>>,
    pub seed: u64,
}

impl RandomModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.spreading == 0 {
            return Err(Error::Parameter("spreading must be >= 1".into()));
        }
        if self.per_prefix > self.gateways {
            return Err(Error::Parameter(format!(
                "{} gateways per prefix but only {} gateways",
                self.per_prefix, self.gateways
            )));
        }
        if let Some(classes) = &self.classes {
            let (g, p) = classes
                .iter()
                .fold((0, 0), |(g, p), &(gi, pi)| (g + gi, p + pi));
            if g != self.gateways || p != self.prefixes {
                return Err(Error::Parameter(format!(
                    "classes sum to {g} gateways / {p} prefixes, expected {} / {}",
                    self.gateways, self.prefixes
                )));
            }
        }
        Ok(())
    }
}

/// Builds a 2-node-connected backbone (a ring of routers with a few chords,
/// every gateway dual-homed) and a RIB drawn from the model. The preference
/// rank is carried by the AS-path length, so rank 1 is the most preferred.
pub fn generate_instance(params: &RandomModelParams) -> Result<(Topology, Rib)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let routers = params.gateways.max(4);

    let mut topology = Topology::new("r0");
    let mut ring = vec![topology.vantage()];
    for i in 1..routers {
        ring.push(topology.add_node(&format!("r{i}"), false)?);
    }
    for i in 0..routers {
        topology.add_link(ring[i], ring[(i + 1) % routers], rng.gen_range(1..=10), false)?;
    }
    for _ in 0..routers / 3 {
        let (a, b) = (rng.gen_range(0..routers), rng.gen_range(0..routers));
        if a != b && topology.find_link(ring[a], ring[b]).is_none() {
            topology.add_link(ring[a], ring[b], rng.gen_range(1..=10), false)?;
        }
    }
    let mut gateways = Vec::with_capacity(params.gateways);
    for i in 0..params.gateways {
        let g = topology.add_node(&format!("g{i}"), true)?;
        topology.add_link(g, ring[i % routers], rng.gen_range(1..=5), false)?;
        topology.add_link(g, ring[(i + 1) % routers], rng.gen_range(1..=5), false)?;
        gateways.push(g);
    }
    if !topology.is_biconnected() {
        return Err(Error::Topology("generated backbone is not 2-node-connected".into()));
    }

    let classes = params
        .classes
        .clone()
        .unwrap_or_else(|| vec![(params.gateways, params.prefixes)]);
    let mut rib = Rib::new();
    let mut pool_start = 0;
    let mut prefix_index = 0;
    for (rank, &(pool, count)) in classes.iter().enumerate() {
        let pool_gateways = &gateways[pool_start..pool_start + pool];
        pool_start += pool;
        let per_prefix = params.per_prefix.min(pool);
        for _ in 0..count {
            let prefix = Prefix::new(format!("p{prefix_index}"));
            prefix_index += 1;
            for i in sample(&mut rng, pool, per_prefix).into_iter() {
                let gateway = pool_gateways[i];
                rib.insert(Route {
                    prefix: prefix.clone(),
                    gateway,
                    beta: BetaAttrs {
                        local_pref: (classes.len() - rank) as u32,
                        as_path_len: rng.gen_range(1..=params.spreading),
                        origin: Origin::Igp,
                        med: None,
                        origin_as: AsId(64512 + gateway.0),
                    },
                    ebgp_local: false,
                    router_id: gateway.0,
                })?;
            }
        }
    }
    Ok((topology, rib))
}

/// Number of distinct gateway sets among the sets prefixes point to,
/// ignoring the attributes stored alongside each gateway.
pub fn distinct_gateway_sets(meta: &MetaSet) -> usize {
    meta.prefixes()
        .filter_map(|(_, key)| meta.get(&key))
        .map(|set| set.content().gateways())
        .collect::<BTreeSet<Vec<NodeId>>>()
        .len()
}
