use super::functional::{FunctionalProbe, ProbeResult};
use crate::lambda::parse;
use crate::reactor::EventLog;
use crate::tile::{Symmetry, Tile};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("event {event} has no instance ids; record the run with track_instances")]
    MissingInstanceIds { event: usize },
    #[error("species {key} cannot be read under {equivalence} equivalence")]
    ChemistryMismatch { key: String, equivalence: &'static str },
}

/// How molecules are grouped into replicator classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivalenceSpec {
    /// Same species key.
    Exact,
    /// Same tile shape at any block scale.
    TileShapeOnly { symmetry: Symmetry },
    /// Same behaviour on a set of lambda probes.
    FunctionalProbe(FunctionalProbe),
}

impl EquivalenceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EquivalenceSpec::Exact => "exact",
            EquivalenceSpec::TileShapeOnly { .. } => "tileshape",
            EquivalenceSpec::FunctionalProbe(_) => "functional",
        }
    }
}

/// Assignment of species keys to classes.
#[derive(Debug, Clone)]
pub struct Classes {
    /// key → (class id, block scale for tile shapes)
    of: BTreeMap<String, (String, Option<u32>)>,
}

impl Classes {
    pub fn build<'a>(keys: impl IntoIterator<Item = &'a str>, eq: &EquivalenceSpec) -> Result<Self, DetectError> {
        let mismatch = |key: &str| DetectError::ChemistryMismatch {
            key: key.to_string(),
            equivalence: eq.name(),
        };
        let keys: BTreeSet<&str> = keys.into_iter().collect();
        let mut of = BTreeMap::new();
        match eq {
            EquivalenceSpec::Exact => {
                for k in keys {
                    of.insert(k.to_string(), (k.to_string(), None));
                }
            }
            EquivalenceSpec::TileShapeOnly { symmetry } => {
                for k in keys {
                    let tile = Tile::parse(k).map_err(|_| mismatch(k))?;
                    let (root, scale) = tile.primitive_root(*symmetry);
                    of.insert(k.to_string(), (root.key(), Some(scale)));
                }
            }
            EquivalenceSpec::FunctionalProbe(spec) => {
                // Classes are named by their smallest member key.
                let mut by_sig: BTreeMap<Vec<ProbeResult>, Vec<&str>> = BTreeMap::new();
                for k in keys {
                    let term = parse(k).map_err(|_| mismatch(k))?;
                    by_sig.entry(spec.signature(&term)).or_default().push(k);
                }
                for members in by_sig.values() {
                    let id = members[0].to_string();
                    for m in members {
                        of.insert(m.to_string(), (id.clone(), None));
                    }
                }
            }
        }
        Ok(Classes { of })
    }

    pub fn class_of(&self, key: &str) -> Option<&str> {
        self.of.get(key).map(|(c, _)| c.as_str())
    }

    pub fn scale_of(&self, key: &str) -> Option<u32> {
        self.of.get(key).and_then(|(_, s)| *s)
    }

    pub fn members(&self, class: &str) -> Vec<String> {
        self.of
            .iter()
            .filter(|(_, (c, _))| c == class)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplicatorReport {
    pub class_id: String,
    /// Observed species in the class.
    pub members: Vec<String>,
    pub period: usize,
    /// Event indices, 0-based, of one shortest causal chain.
    pub witness: Vec<usize>,
    pub equivalence: &'static str,
    /// For tile shapes, the block scale of the witness's final product
    /// relative to the class's primitive shape.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
}

struct Lineage<'a> {
    log: &'a EventLog,
    /// instance id → events that use it as a reactant, in log order
    consumers: HashMap<u64, Vec<usize>>,
}

impl<'a> Lineage<'a> {
    fn new(log: &'a EventLog) -> Result<Self, DetectError> {
        let mut consumers: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, e) in log.events.iter().enumerate() {
            let rid = match (&e.rid, &e.pid) {
                (Some(rid), Some(_)) => rid,
                _ => return Err(DetectError::MissingInstanceIds { event: i }),
            };
            for &id in rid {
                consumers.entry(id).or_default().push(i);
            }
        }
        Ok(Lineage { log, consumers })
    }

    /// New product instances of event `i` with their keys.
    fn new_products(&self, i: usize) -> impl Iterator<Item = (u64, &'a str)> + 'a {
        let e = &self.log.events[i];
        let pid = e.pid.as_deref().unwrap_or(&[]);
        e.new_products().map(move |(j, k)| (pid[j], k))
    }

    /// Events after `i` that consume a new product of `i`.
    fn successors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .new_products(i)
            .flat_map(|(id, _)| self.consumers.get(&id).into_iter().flatten().copied())
            .filter(|&j| j > i)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn log_keys(log: &EventLog) -> impl Iterator<Item = &str> {
    log.events
        .iter()
        .flat_map(|e| e.reactants.iter().chain(&e.products).map(String::as_str))
}

/// Shortest causal chains from a class back into itself.
///
/// A class has period `j` when events `e₁ … e_j` exist such that `e₁` uses
/// a member of the class, each `e_{i+1}` uses a new product of `e_i`, and
/// `e_j` newly produces a member of the class. The search is breadth-first
/// over instance lineage and stops at depth `max_period`.
pub fn detect_replicators(
    log: &EventLog,
    eq: &EquivalenceSpec,
    max_period: usize,
) -> Result<Vec<ReplicatorReport>, DetectError> {
    let lineage = Lineage::new(log)?;
    let classes = Classes::build(log_keys(log), eq)?;

    let mut starts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in log.events.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for r in &e.reactants {
            let c = classes.class_of(r).expect("classified");
            if seen.insert(c) {
                starts.entry(c).or_default().push(i);
            }
        }
    }

    let mut reports = Vec::new();
    for (class, first) in starts {
        let mut parent: HashMap<usize, Option<usize>> = first.iter().map(|&i| (i, None)).collect();
        let mut queue: VecDeque<(usize, usize)> = first.iter().map(|&i| (i, 1)).collect();
        while let Some((i, depth)) = queue.pop_front() {
            let hit = lineage
                .new_products(i)
                .find(|(_, k)| classes.class_of(k) == Some(class));
            if let Some((_, key)) = hit {
                let mut witness = vec![i];
                let mut cur = i;
                while let Some(Some(p)) = parent.get(&cur) {
                    witness.push(*p);
                    cur = *p;
                }
                witness.reverse();
                reports.push(ReplicatorReport {
                    class_id: class.to_string(),
                    members: classes.members(class),
                    period: depth,
                    witness,
                    equivalence: eq.name(),
                    scale: classes.scale_of(key),
                });
                break;
            }
            if depth < max_period {
                for j in lineage.successors(i) {
                    if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(j) {
                        v.insert(Some(i));
                        queue.push_back((j, depth + 1));
                    }
                }
            }
        }
    }
    Ok(reports)
}

/// Re-checks a report's witness chain against the log.
pub fn verify_witness(log: &EventLog, eq: &EquivalenceSpec, report: &ReplicatorReport) -> bool {
    let Ok(lineage) = Lineage::new(log) else {
        return false;
    };
    let w = &report.witness;
    if w.is_empty() || w.len() != report.period || w.iter().any(|&i| i >= log.len()) {
        return false;
    }
    let Ok(classes) = Classes::build(log_keys(log), eq) else {
        return false;
    };
    let in_class = |k: &str| classes.class_of(k) == Some(report.class_id.as_str());
    let first = &log.events[w[0]];
    let last = w[w.len() - 1];
    first.reactants.iter().any(|r| in_class(r))
        && w.windows(2).all(|p| {
            let next_rid = log.events[p[1]].rid.as_deref().unwrap_or(&[]);
            p[0] < p[1] && lineage.new_products(p[0]).any(|(id, _)| next_rid.contains(&id))
        })
        && lineage.new_products(last).any(|(_, k)| in_class(k))
}
