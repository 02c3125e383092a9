//! Shared OPR sets. Prefixes whose OPR sets have equal content point to one
//! stored set, so an IGP event costs one min-search per distinct set.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hasher;

use fnv::FnvHasher;

use crate::bgp::{AlphaAttrs, AsId, BetaKey, Prefix};
use crate::control_plane::{extract_opr, ExtractOptions, LeafList};
use crate::graph::{Distance, DistanceMap, IgpState, NodeId, Topology};
use crate::Result;

/// Data-plane copy of one route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GatewayRecord {
    pub gateway: NodeId,
    pub router_id: u32,
    pub beta: BetaKey,
    /// MED after applying the MED policy.
    pub med: Option<u32>,
    pub ebgp_local: bool,
}

impl GatewayRecord {
    pub fn alpha(&self, distances: &DistanceMap) -> Distance {
        AlphaAttrs {
            ebgp: self.ebgp_local,
            igp_cost: distances.get(self.gateway),
            router_id: self.router_id,
        }
        .effective()
    }
}

/// One MED chain, records in ascending MED order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OprEntry {
    pub origin_as: AsId,
    /// Chain of a single route that is never MED-compared.
    pub solo: bool,
    /// Records after the first reachable MED tier were dropped.
    pub truncated: bool,
    pub records: Vec<GatewayRecord>,
}

impl OprEntry {
    fn sort_key(&self) -> (AsId, Vec<NodeId>, Option<BetaKey>, bool) {
        let mut gateways: Vec<NodeId> = self.records.iter().map(|r| r.gateway).collect();
        gateways.sort_unstable();
        (self.origin_as, gateways, self.records.first().map(|r| r.beta), self.solo)
    }
}

/// Canonical content of an OPR set. Two sets are shared iff their contents
/// are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OprContent {
    entries: Vec<OprEntry>,
    protected: bool,
    reduced: bool,
}

impl OprContent {
    pub fn new(mut entries: Vec<OprEntry>, protected: bool, reduced: bool) -> Self {
        entries.sort_by_cached_key(OprEntry::sort_key);
        OprContent {
            entries,
            protected,
            reduced,
        }
    }

    pub fn entries(&self) -> &[OprEntry] {
        &self.entries
    }

    pub fn protected(&self) -> bool {
        self.protected
    }

    pub fn reduced(&self) -> bool {
        self.reduced
    }

    pub fn records(&self) -> impl Iterator<Item = &GatewayRecord> {
        self.entries.iter().flat_map(|e| e.records.iter())
    }

    /// Number of routes held.
    pub fn size(&self) -> usize {
        self.entries.iter().map(|e| e.records.len()).sum()
    }

    /// Sorted, de-duplicated gateway nodes.
    pub fn gateways(&self) -> Vec<NodeId> {
        let mut gateways: Vec<NodeId> = self.records().map(|r| r.gateway).collect();
        gateways.sort_unstable();
        gateways.dedup();
        gateways
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(u8::from(self.protected) | u8::from(self.reduced) << 1);
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for entry in &self.entries {
            out.extend_from_slice(&entry.origin_as.0.to_le_bytes());
            out.push(u8::from(entry.solo) | u8::from(entry.truncated) << 1);
            out.extend_from_slice(&(entry.records.len() as u32).to_le_bytes());
            for r in &entry.records {
                out.extend_from_slice(&r.gateway.0.to_le_bytes());
                out.extend_from_slice(&r.beta.local_pref.to_le_bytes());
                out.extend_from_slice(&r.beta.as_path_len.to_le_bytes());
                out.push(r.beta.origin.code());
                match r.med {
                    Some(m) => {
                        out.push(1);
                        out.extend_from_slice(&m.to_le_bytes());
                    }
                    None => out.push(0),
                }
                out.extend_from_slice(&r.router_id.to_le_bytes());
                out.push(u8::from(r.ebgp_local));
            }
        }
    }
}

/// 64-bit FNV-1a digest of the canonical encoding.
pub fn hash_opr(content: &OprContent) -> u64 {
    let mut bytes = Vec::with_capacity(16 + 32 * content.size());
    content.encode(&mut bytes);
    let mut hasher = FnvHasher::default();
    hasher.write(&bytes);
    hasher.finish()
}

/// The route currently selected in a set (O_top).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub gateway: NodeId,
    pub alpha: Distance,
    pub entry: usize,
    pub record: usize,
}

/// What a refresh found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Refresh {
    /// Unreachable chain heads skipped while locating each M_top.
    pub skipped_heads: usize,
    /// Chains without any reachable record.
    pub exhausted: usize,
    /// Some truncated chain is exhausted: dropped records may be needed.
    pub truncated_exhausted: bool,
}

/// An OPR set with its runtime state: cached α per record and the live MED
/// tier of every chain.
#[derive(Debug, Clone)]
pub struct OprSet {
    content: OprContent,
    hash: u64,
    alphas: Vec<Vec<Distance>>,
    live: Vec<Vec<usize>>,
    top: Option<Selection>,
}

type SelectionKey = (BetaKey, Distance, u32, NodeId, AsId);

impl OprSet {
    pub fn new(content: OprContent) -> Self {
        let hash = hash_opr(&content);
        let alphas = content
            .entries
            .iter()
            .map(|e| vec![Distance::Infinite; e.records.len()])
            .collect();
        let live = vec![Vec::new(); content.entries.len()];
        OprSet {
            content,
            hash,
            alphas,
            live,
            top: None,
        }
    }

    pub fn content(&self) -> &OprContent {
        &self.content
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn top(&self) -> Option<Selection> {
        self.top
    }

    /// Re-reads α for every record and walks each chain from its head to the
    /// first reachable record. That record's MED tier becomes live.
    pub fn refresh(&mut self, distances: &DistanceMap) -> Refresh {
        let mut outcome = Refresh::default();
        for (i, entry) in self.content.entries.iter().enumerate() {
            let alphas = &mut self.alphas[i];
            for (slot, record) in alphas.iter_mut().zip(&entry.records) {
                *slot = record.alpha(distances);
            }
            let live = &mut self.live[i];
            live.clear();
            match alphas.iter().position(|a| a.is_finite()) {
                Some(head) => {
                    outcome.skipped_heads += head;
                    let tier = entry.records[head].med;
                    live.extend(
                        (head..entry.records.len())
                            .take_while(|&j| entry.records[j].med == tier)
                            .filter(|&j| alphas[j].is_finite()),
                    );
                }
                None => {
                    outcome.exhausted += 1;
                    outcome.truncated_exhausted |= entry.truncated;
                }
            }
        }
        outcome
    }

    /// Picks the live record with the best (β, α, router-id, gateway, AS).
    /// `None` means every chain is exhausted.
    pub fn select(&mut self) -> Option<Selection> {
        let mut best: Option<(SelectionKey, Selection)> = None;
        for (i, entry) in self.content.entries.iter().enumerate() {
            for &j in &self.live[i] {
                let r = &entry.records[j];
                let alpha = self.alphas[i][j];
                let key = (r.beta, alpha, r.router_id, r.gateway, entry.origin_as);
                if best.as_ref().is_none_or(|(k, _)| key < *k) {
                    let selection = Selection {
                        gateway: r.gateway,
                        alpha,
                        entry: i,
                        record: j,
                    };
                    best = Some((key, selection));
                }
            }
        }
        self.top = best.map(|(_, s)| s);
        self.top
    }

    /// Refresh followed by selection.
    pub fn min_search(&mut self, distances: &DistanceMap) -> Option<NodeId> {
        self.refresh(distances);
        self.select().map(|s| s.gateway)
    }

    /// True when dropping MED tiers now would keep a different number of
    /// records than the stored copy holds.
    pub fn truncation_drift(&self) -> bool {
        self.content.entries.iter().enumerate().any(|(i, entry)| {
            let Some(&first) = self.live[i].first() else {
                return entry.truncated;
            };
            let head = self.alphas[i].iter().position(|a| a.is_finite()).unwrap_or(first);
            let tier = entry.records[head].med;
            let keep = head + entry.records[head..].iter().take_while(|r| r.med == tier).count();
            keep != entry.records.len()
        })
    }
}

/// Table key: content hash plus a serial that separates colliding contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetKey {
    pub hash: u64,
    pub serial: u32,
}

impl fmt::Display for SetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.hash)?;
        if self.serial > 0 {
            write!(f, ".{}", self.serial)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Slot {
    set: OprSet,
    refs: usize,
}

/// The store of distinct OPR sets and the prefix-to-set map.
#[derive(Debug, Clone, Default)]
pub struct MetaSet {
    table: BTreeMap<SetKey, Slot>,
    p_bgp: BTreeMap<Prefix, SetKey>,
    retain_unused: bool,
}

impl MetaSet {
    /// With `retain_unused`, sets losing their last prefix stay in the table
    /// and can be picked up again without re-hashing.
    pub fn new(retain_unused: bool) -> Self {
        MetaSet {
            retain_unused,
            ..Self::default()
        }
    }

    /// Number of stored sets.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn prefix_count(&self) -> usize {
        self.p_bgp.len()
    }

    pub fn get(&self, key: &SetKey) -> Option<&OprSet> {
        self.table.get(key).map(|s| &s.set)
    }

    pub fn key_of(&self, prefix: &Prefix) -> Option<SetKey> {
        self.p_bgp.get(prefix).copied()
    }

    pub fn set_of(&self, prefix: &Prefix) -> Option<&OprSet> {
        self.key_of(prefix).and_then(|k| self.get(&k))
    }

    /// Number of prefixes pointing at the set.
    pub fn refs(&self, key: &SetKey) -> usize {
        self.table.get(key).map_or(0, |s| s.refs)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SetKey, &OprSet, usize)> {
        self.table.iter().map(|(k, s)| (*k, &s.set, s.refs))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (SetKey, &mut OprSet, usize)> {
        self.table.iter_mut().map(|(k, s)| (*k, &mut s.set, s.refs))
    }

    pub fn prefixes(&self) -> impl Iterator<Item = (&Prefix, SetKey)> {
        self.p_bgp.iter().map(|(p, k)| (p, *k))
    }

    pub fn prefixes_of(&self, key: SetKey) -> Vec<Prefix> {
        self.p_bgp
            .iter()
            .filter(|(_, k)| **k == key)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Key of the stored set with exactly this content.
    pub fn find(&self, content: &OprContent) -> Option<SetKey> {
        let hash = hash_opr(content);
        self.bucket(hash)
            .find(|(_, slot)| slot.set.content == *content)
            .map(|(k, _)| *k)
    }

    fn bucket(&self, hash: u64) -> impl Iterator<Item = (&SetKey, &Slot)> {
        self.table
            .range(SetKey { hash, serial: 0 }..=SetKey { hash, serial: u32::MAX })
    }

    /// Stores the set unless an equal one exists; returns its key and
    /// whether it was new.
    pub fn intern(&mut self, set: OprSet) -> (SetKey, bool) {
        if let Some(key) = self.find(&set.content) {
            return (key, false);
        }
        let serial = self.bucket(set.hash).map(|(k, _)| k.serial + 1).max().unwrap_or(0);
        let key = SetKey {
            hash: set.hash,
            serial,
        };
        self.table.insert(key, Slot { set, refs: 0 });
        (key, true)
    }

    /// Points `prefix` at `key`. Returns the key of a set that was dropped
    /// because it lost its last prefix.
    pub fn assign(&mut self, prefix: &Prefix, key: SetKey) -> Option<SetKey> {
        self.table.get_mut(&key).expect("assigning an unknown set").refs += 1;
        let old = self.p_bgp.insert(prefix.clone(), key)?;
        self.release(old)
    }

    /// Removes `prefix` from the map.
    pub fn withdraw(&mut self, prefix: &Prefix) -> Option<SetKey> {
        let old = self.p_bgp.remove(prefix)?;
        self.release(old)
    }

    fn release(&mut self, key: SetKey) -> Option<SetKey> {
        let slot = self.table.get_mut(&key).expect("mapped set exists");
        slot.refs -= 1;
        if slot.refs == 0 && !self.retain_unused {
            self.table.remove(&key);
            return Some(key);
        }
        None
    }

    /// Histogram of set sizes (routes per set) over referenced sets.
    pub fn size_distribution(&self) -> BTreeMap<usize, usize> {
        let mut sizes = BTreeMap::new();
        for (_, set, refs) in self.iter() {
            if refs > 0 {
                *sizes.entry(set.content.size()).or_insert(0) += 1;
            }
        }
        sizes
    }

    /// One line per set:
    /// `opr <hash> size=<n> top=<gateway> prefixes=<count> [unprotected]`.
    pub fn dump(&self, topology: &Topology) -> String {
        let mut out = String::new();
        for (key, set, refs) in self.iter() {
            let top = set.top.map_or("-", |s| topology.name(s.gateway));
            out.push_str(&format!(
                "opr {key} size={} top={top} prefixes={refs}",
                set.content.size()
            ));
            if !set.content.protected {
                out.push_str(" unprotected");
            }
            out.push('\n');
        }
        out
    }
}

/// Outcome of [`update_opr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Update {
    /// The prefix's set, `None` once withdrawn.
    pub key: Option<SetKey>,
    pub old: Option<SetKey>,
    /// A set was added to the table.
    pub created: bool,
    /// A set was dropped from the table.
    pub removed: Option<SetKey>,
    pub leaves_used: usize,
    pub protected: bool,
}

/// Recomputes the OPR set of `prefix` from its leaves and re-points the
/// prefix. An empty leaf list withdraws the prefix.
pub fn update_opr(
    leaves: &LeafList,
    meta: &mut MetaSet,
    prefix: &Prefix,
    igp: &mut IgpState,
    options: ExtractOptions,
) -> Result<Update> {
    let old = meta.key_of(prefix);
    if leaves.is_empty() {
        let removed = meta.withdraw(prefix);
        return Ok(Update {
            key: None,
            old,
            created: false,
            removed,
            leaves_used: 0,
            protected: false,
        });
    }
    let extraction = extract_opr(leaves, igp, options)?;
    let mut set = OprSet::new(extraction.content);
    let (key, created) = meta.intern_fresh(&mut set, igp.distances());
    let removed = if old == Some(key) {
        None
    } else {
        meta.assign(prefix, key)
    };
    Ok(Update {
        key: Some(key),
        old,
        created,
        removed,
        leaves_used: extraction.leaves_used,
        protected: extraction.protected,
    })
}

impl MetaSet {
    /// Interns `set` with its α cache and selection brought up to date. An
    /// existing equal set is refreshed too, since a retained unused set may
    /// have missed IGP events.
    fn intern_fresh(&mut self, set: &mut OprSet, distances: &DistanceMap) -> (SetKey, bool) {
        if let Some(key) = self.find(&set.content) {
            let slot = self.table.get_mut(&key).expect("found key");
            if slot.refs == 0 {
                slot.set.min_search(distances);
            }
            return (key, false);
        }
        set.min_search(distances);
        self.intern(set.clone())
    }
}
