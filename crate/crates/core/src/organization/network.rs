use crate::reactor::EventLog;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("species {0} is not in the network")]
pub struct UnknownSpecies(pub String);

/// A reaction type: reactant multiset to genuinely new products, both as
/// sorted key lists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Reaction {
    pub reactants: Vec<String>,
    pub products: Vec<String>,
}

impl Reaction {
    pub fn new<S: Into<String>>(reactants: impl IntoIterator<Item = S>, products: impl IntoIterator<Item = S>) -> Self {
        let mut reactants: Vec<String> = reactants.into_iter().map(Into::into).collect();
        let mut products: Vec<String> = products.into_iter().map(Into::into).collect();
        reactants.sort();
        products.sort();
        Reaction { reactants, products }
    }

    fn enabled_in(&self, s: &BTreeSet<String>) -> bool {
        self.reactants.iter().all(|r| s.contains(r))
    }
}

/// Distinct reactions seen in a log, with occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReactionNetwork {
    pub species: BTreeSet<String>,
    pub reactions: BTreeMap<Reaction, u64>,
    /// Species counted as produced without any reaction, such as the
    /// initial population.
    pub external: BTreeSet<String>,
}

impl ReactionNetwork {
    pub fn from_reactions(reactions: impl IntoIterator<Item = Reaction>) -> Self {
        let mut net = ReactionNetwork::default();
        for r in reactions {
            net.add(r);
        }
        net
    }

    fn add(&mut self, r: Reaction) {
        self.species.extend(r.reactants.iter().cloned());
        self.species.extend(r.products.iter().cloned());
        *self.reactions.entry(r).or_insert(0) += 1;
    }

    /// Marks `species` as externally supplied, adding them if absent.
    pub fn mark_external<S: Into<String>>(&mut self, species: impl IntoIterator<Item = S>) {
        for s in species {
            let s = s.into();
            self.species.insert(s.clone());
            self.external.insert(s);
        }
    }

    fn check(&self, s: &BTreeSet<String>) -> Result<(), UnknownSpecies> {
        match s.iter().find(|x| !self.species.contains(*x)) {
            Some(x) => Err(UnknownSpecies(x.clone())),
            None => Ok(()),
        }
    }

    fn enabled<'a>(&'a self, s: &'a BTreeSet<String>) -> impl Iterator<Item = &'a Reaction> + 'a {
        self.reactions.keys().filter(move |r| r.enabled_in(s))
    }

    /// Species produced by reactions whose reactants all lie in `s`, plus
    /// the external ones in `s`.
    fn produced_within(&self, s: &BTreeSet<String>) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.enabled(s).flat_map(|r| r.products.iter().cloned()).collect();
        out.extend(s.intersection(&self.external).cloned());
        out
    }

    pub(crate) fn closed(&self, s: &BTreeSet<String>) -> bool {
        self.enabled(s).all(|r| r.products.iter().all(|p| s.contains(p)))
    }

    pub(crate) fn self_maintaining(&self, s: &BTreeSet<String>) -> bool {
        let produced = self.produced_within(s);
        s.iter().all(|x| produced.contains(x))
    }

    /// Species in `s` plus everything reactions inside `s` produce, until
    /// nothing new appears.
    pub(crate) fn closure(&self, s: &BTreeSet<String>) -> BTreeSet<String> {
        let mut cur = s.clone();
        loop {
            let before = cur.len();
            let add: Vec<String> = self.enabled(&cur).flat_map(|r| r.products.iter().cloned()).collect();
            cur.extend(add);
            if cur.len() == before {
                return cur;
            }
        }
    }

    /// Repeatedly drops species not produced from within the set.
    pub(crate) fn prune(&self, s: &BTreeSet<String>) -> BTreeSet<String> {
        let mut cur = s.clone();
        loop {
            let produced = self.produced_within(&cur);
            let next: BTreeSet<String> = cur.intersection(&produced).cloned().collect();
            if next.len() == cur.len() {
                return cur;
            }
            cur = next;
        }
    }

    /// Catalysis edges `u → v`: some reaction uses `u` and newly yields
    /// `v`, which is not among its reactants.
    pub fn catalysis_edges(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut g: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for r in self.reactions.keys() {
            for u in &r.reactants {
                for v in &r.products {
                    if !r.reactants.contains(v) {
                        g.entry(u.clone()).or_default().insert(v.clone());
                    }
                }
            }
        }
        g
    }
}

/// Aggregates the log into reaction types; pass-through products are left
/// out so only genuine production is recorded.
pub fn build_network(log: &EventLog) -> ReactionNetwork {
    let mut net = ReactionNetwork::default();
    for e in &log.events {
        net.species.extend(e.products.iter().cloned());
        let produced: Vec<&str> = e.new_products().map(|(_, k)| k).collect();
        net.add(Reaction::new(e.reactants.iter().map(String::as_str), produced));
    }
    net
}

/// Every reaction whose reactants lie in `s` keeps its products in `s`.
pub fn is_closed(s: &BTreeSet<String>, net: &ReactionNetwork) -> Result<bool, UnknownSpecies> {
    net.check(s)?;
    Ok(net.closed(s))
}

/// Every member of `s` is produced by a reaction whose reactants lie in
/// `s`, or is external.
pub fn is_self_maintaining(s: &BTreeSet<String>, net: &ReactionNetwork) -> Result<bool, UnknownSpecies> {
    net.check(s)?;
    Ok(net.self_maintaining(s))
}
