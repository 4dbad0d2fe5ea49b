//! Analysis of reaction event logs.
//!
//! The log is folded into a [`ReactionNetwork`], which supports closure and
//! self-maintenance checks, a three-level classification of organizations
//! and a search for catalytic cycles. Separately, [`detect_replicators`]
//! follows instance lineage to find classes of molecules that reproduce
//! themselves through a chain of reactions.

mod functional;
mod network;
mod replicators;

pub use functional::{functional_equiv, FunctionalProbe, ProbeResult};
pub use network::{build_network, is_closed, is_self_maintaining, Reaction, ReactionNetwork, UnknownSpecies};
pub use replicators::{detect_replicators, verify_witness, Classes, DetectError, EquivalenceSpec, ReplicatorReport};

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

type SpeciesSet = BTreeSet<String>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OrganizationReport {
    /// Member sets of the replicator classes.
    pub level0: Vec<SpeciesSet>,
    /// Closed, self-maintaining sets, one per distinct seed result.
    pub level1: Vec<SpeciesSet>,
    /// Disjoint level-1 pairs that each produce part of the other.
    pub level2: Vec<(SpeciesSet, SpeciesSet)>,
}

/// The closed, self-maintaining set grown from `seed`: close, prune,
/// repeat. `None` when that empties the set or fails to settle.
fn organization_from(net: &ReactionNetwork, seed: &SpeciesSet) -> Option<SpeciesSet> {
    let mut cur = seed.clone();
    for _ in 0..=net.species.len() {
        let next = net.prune(&net.closure(&cur));
        if next.is_empty() {
            return None;
        }
        if net.closed(&next) && net.self_maintaining(&next) {
            return Some(next);
        }
        if next == cur {
            return None;
        }
        cur = next;
    }
    None
}

/// Some species of `a` is produced by a reaction that uses a species of `b`.
fn feeds(net: &ReactionNetwork, b: &SpeciesSet, a: &SpeciesSet) -> bool {
    net.reactions
        .keys()
        .any(|r| r.reactants.iter().any(|x| b.contains(x)) && r.products.iter().any(|p| a.contains(p)))
}

/// Level-0 sets are the replicator classes present in the network. Level-1
/// sets are grown from the full species set, each level-0 set and each
/// single species. Level-2 pairs are disjoint level-1 sets that feed each
/// other.
pub fn classify_organizations(net: &ReactionNetwork, replicators: &[ReplicatorReport]) -> OrganizationReport {
    let mut level0: Vec<SpeciesSet> = replicators
        .iter()
        .map(|r| {
            r.members
                .iter()
                .filter(|m| net.species.contains(*m))
                .cloned()
                .collect::<SpeciesSet>()
        })
        .filter(|s| !s.is_empty())
        .collect();
    level0.sort();
    level0.dedup();

    let mut seeds: Vec<SpeciesSet> = vec![net.species.clone()];
    seeds.extend(level0.iter().cloned());
    seeds.extend(net.species.iter().map(|s| SpeciesSet::from([s.clone()])));
    let mut level1: Vec<SpeciesSet> = seeds
        .iter()
        .filter_map(|s| organization_from(net, s))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    level1.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

    let mut level2 = Vec::new();
    for (i, a) in level1.iter().enumerate() {
        for b in &level1[i + 1..] {
            if a.is_disjoint(b) && feeds(net, b, a) && feeds(net, a, b) {
                level2.push((a.clone(), b.clone()));
            }
        }
    }
    OrganizationReport { level0, level1, level2 }
}

/// Limits on cycle enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleLimits {
    pub max_len: usize,
    pub max_cycles: usize,
}

impl Default for CycleLimits {
    fn default() -> Self {
        CycleLimits {
            max_len: 8,
            max_cycles: 1000,
        }
    }
}

/// Elementary cycles of length at least 2 in the catalysis graph, each
/// listed once starting from its smallest species, in lexicographic order
/// of discovery.
pub fn detect_hypercycles(net: &ReactionNetwork, limits: CycleLimits) -> Vec<Vec<String>> {
    let g = net.catalysis_edges();
    let mut out = Vec::new();
    for start in g.keys() {
        let mut path = vec![start.as_str()];
        extend_cycles(&g, start, &mut path, limits, &mut out);
        if out.len() >= limits.max_cycles {
            break;
        }
    }
    out
}

fn extend_cycles<'a>(
    g: &'a BTreeMap<String, BTreeSet<String>>,
    start: &str,
    path: &mut Vec<&'a str>,
    limits: CycleLimits,
    out: &mut Vec<Vec<String>>,
) {
    let last = *path.last().expect("path starts at the start node");
    let Some(next) = g.get(last) else { return };
    for v in next {
        if out.len() >= limits.max_cycles {
            return;
        }
        if v == start {
            if path.len() >= 2 {
                out.push(path.iter().map(|s| s.to_string()).collect());
            }
        } else if v.as_str() > start && path.len() < limits.max_len && !path.contains(&v.as_str()) {
            path.push(v);
            extend_cycles(g, start, path, limits, out);
            path.pop();
        }
    }
}
