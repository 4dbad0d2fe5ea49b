//! Well-stirred stochastic reactor hosting any [`Chemistry`].
//!
//! Each step draws an unordered pair of distinct molecule instances
//! uniformly (one instance for unary chemistries), reacts them, applies the
//! outflow policy and reports a [`ReactionEvent`] when products appeared.

mod chemistry;
mod config;
mod log;

pub use chemistry::{Arity, ArmsChemistry, Chemistry, LambdaChemistry, TileChemistry};
pub use config::{
    run, AlchemyParams, ArmsParams, ChemistrySpec, MoleculeCount, PopulationSpec, ReactorConfig, RunError, RunOutcome,
    RunSummary, TileParams,
};
pub use log::{write_event, EventLog, LogError, ReactionEvent};

use crate::seed::SimRng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("population of {total} is too small to react")]
pub struct PopulationUnderflow {
    pub total: u64,
}

/// Removal of molecules after each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum Outflow {
    None,
    /// Remove uniformly chosen molecules until the total is back to its
    /// value before the step.
    ConstantPopulation,
    /// Remove one uniformly chosen molecule with probability `p`.
    Rate {
        p: f64,
    },
}

/// Species counts plus one representative molecule per species.
#[derive(Debug, Clone)]
pub struct Population<M> {
    counts: BTreeMap<String, u64>,
    exemplars: BTreeMap<String, M>,
}

impl<M> Default for Population<M> {
    fn default() -> Self {
        Population {
            counts: BTreeMap::new(),
            exemplars: BTreeMap::new(),
        }
    }
}

impl<M: Clone> Population<M> {
    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn exemplar(&self, key: &str) -> Option<&M> {
        self.exemplars.get(key)
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn species(&self) -> usize {
        self.counts.len()
    }

    fn add(&mut self, key: &str, m: &M) {
        *self.counts.entry(key.to_string()).or_insert(0) += 1;
        self.exemplars.entry(key.to_string()).or_insert_with(|| m.clone());
    }

    fn remove(&mut self, key: &str) {
        let c = self.counts.get_mut(key).expect("removing a present species");
        *c -= 1;
        if *c == 0 {
            self.counts.remove(key);
            self.exemplars.remove(key);
        }
    }
}

/// Behaviour switches shared by every chemistry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactorSettings {
    pub outflow: Outflow,
    /// Both orientations of a pair are equally likely. When off, the pair
    /// is ordered by species key, then by instance id.
    pub symmetric_collisions: bool,
    /// Record instance ids in events.
    pub track_instances: bool,
}

impl Default for ReactorSettings {
    fn default() -> Self {
        ReactorSettings {
            outflow: Outflow::None,
            symmetric_collisions: true,
            track_instances: false,
        }
    }
}

#[derive(Debug, Clone)]
struct Instance {
    id: u64,
    key: String,
}

pub struct Reactor<C: Chemistry> {
    chem: C,
    settings: ReactorSettings,
    population: Population<C::Molecule>,
    instances: Vec<Instance>,
    next_id: u64,
    time: u64,
}

impl<C: Chemistry> Reactor<C> {
    pub fn new(chem: C, settings: ReactorSettings) -> Self {
        Reactor {
            chem,
            settings,
            population: Population::default(),
            instances: Vec::new(),
            next_id: 0,
            time: 0,
        }
    }

    pub fn chemistry(&self) -> &C {
        &self.chem
    }

    pub fn settings(&self) -> &ReactorSettings {
        &self.settings
    }

    pub fn population(&self) -> &Population<C::Molecule> {
        &self.population
    }

    /// Steps taken so far.
    pub fn time(&self) -> u64 {
        self.time
    }

    /// Adds one molecule instance and returns its id.
    pub fn insert(&mut self, m: C::Molecule) -> u64 {
        let key = self.chem.species_key(&m);
        self.insert_keyed(key, &m)
    }

    fn insert_keyed(&mut self, key: String, m: &C::Molecule) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.population.add(&key, m);
        self.instances.push(Instance { id, key });
        id
    }

    fn remove_at(&mut self, idx: usize) -> Instance {
        let inst = self.instances.swap_remove(idx);
        self.population.remove(&inst.key);
        inst
    }

    fn remove_pair(&mut self, i: usize, j: usize) {
        // The higher slot goes first so swap_remove cannot move the other.
        self.remove_at(i.max(j));
        self.remove_at(i.min(j));
    }

    /// Draws the indices of two distinct instances, first-drawn first.
    pub fn sample_pair(&self, rng: &mut SimRng) -> Option<(usize, usize)> {
        let n = self.instances.len();
        if n < 2 {
            return None;
        }
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        Some((i, j))
    }

    /// Species key of the instance at `idx`.
    pub fn instance_key(&self, idx: usize) -> &str {
        &self.instances[idx].key
    }

    /// One collision followed by outflow.
    pub fn step(&mut self, rng: &mut SimRng) -> Result<Option<ReactionEvent>, PopulationUnderflow> {
        let before = self.instances.len() as u64;
        let event = match self.chem.arity() {
            Arity::Binary => self.binary_step(rng)?,
            Arity::Unary => self.unary_step(rng)?,
        };
        self.time += 1;
        let event = event.map(|mut e| {
            e.t = self.time;
            e
        });
        self.apply_outflow(before, rng);
        Ok(event)
    }

    fn binary_step(&mut self, rng: &mut SimRng) -> Result<Option<ReactionEvent>, PopulationUnderflow> {
        let (mut i, mut j) = self.sample_pair(rng).ok_or(PopulationUnderflow {
            total: self.instances.len() as u64,
        })?;
        if !self.settings.symmetric_collisions {
            let (a, b) = (&self.instances[i], &self.instances[j]);
            if (&b.key, b.id) < (&a.key, a.id) {
                std::mem::swap(&mut i, &mut j);
            }
        }
        let (a, b) = (self.instances[i].clone(), self.instances[j].clone());
        let ma = self.population.exemplar(&a.key).expect("exemplar").clone();
        let mb = self.population.exemplar(&b.key).expect("exemplar").clone();
        let made = self.chem.react(&ma, &mb, rng);
        let retain = self.chem.retain_reactants();
        if made.is_empty() {
            if !retain && self.chem.discard_on_failure() {
                self.remove_pair(i, j);
            }
            return Ok(None);
        }
        let mut products = Vec::new();
        let mut new = Vec::new();
        let mut pid = Vec::new();
        if retain {
            for r in [&a, &b] {
                products.push(r.key.clone());
                new.push(false);
                pid.push(r.id);
            }
        } else {
            self.remove_pair(i, j);
        }
        for m in &made {
            let key = self.chem.species_key(m);
            pid.push(self.insert_keyed(key.clone(), m));
            products.push(key);
            new.push(true);
        }
        Ok(Some(self.event(vec![a, b], products, new, pid)))
    }

    fn unary_step(&mut self, rng: &mut SimRng) -> Result<Option<ReactionEvent>, PopulationUnderflow> {
        if self.instances.is_empty() {
            return Err(PopulationUnderflow { total: 0 });
        }
        let i = rng.gen_range(0..self.instances.len());
        let a = self.instances[i].clone();
        let ma = self.population.exemplar(&a.key).expect("exemplar").clone();
        let Some(product) = self.chem.transform(&ma, rng) else {
            return Ok(None);
        };
        self.remove_at(i);
        let key = self.chem.species_key(&product);
        let id = self.insert_keyed(key.clone(), &product);
        Ok(Some(self.event(vec![a], vec![key], vec![true], vec![id])))
    }

    fn event(&self, reactants: Vec<Instance>, products: Vec<String>, new: Vec<bool>, pid: Vec<u64>) -> ReactionEvent {
        let track = self.settings.track_instances;
        ReactionEvent {
            t: 0,
            rid: track.then(|| reactants.iter().map(|r| r.id).collect()),
            pid: track.then_some(pid),
            reactants: reactants.into_iter().map(|r| r.key).collect(),
            products,
            new,
        }
    }

    fn apply_outflow(&mut self, before: u64, rng: &mut SimRng) {
        match self.settings.outflow {
            Outflow::None => {}
            Outflow::ConstantPopulation => {
                while self.instances.len() as u64 > before {
                    let k = rng.gen_range(0..self.instances.len());
                    self.remove_at(k);
                }
            }
            Outflow::Rate { p } => {
                if !self.instances.is_empty() && rng.gen_bool(p) {
                    let k = rng.gen_range(0..self.instances.len());
                    self.remove_at(k);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse;
    use crate::seed::rng_from_seed;
    use crate::tile::Tile;

    fn lambda_reactor(terms: &[&str], outflow: Outflow) -> Reactor<LambdaChemistry> {
        let mut r = Reactor::new(
            LambdaChemistry::default(),
            ReactorSettings {
                outflow,
                ..Default::default()
            },
        );
        for t in terms {
            r.insert(parse(t).unwrap());
        }
        r
    }

    #[test]
    fn successful_alchemy_collision_grows_by_one() {
        let mut r = lambda_reactor(&["λu.u", "λv.v"], Outflow::None);
        let mut rng = rng_from_seed(1);
        let e = r.step(&mut rng).unwrap().expect("identity applied to identity reacts");
        assert_eq!(r.population().total(), 3);
        assert_eq!(e.t, 1);
        assert_eq!(e.new, vec![false, false, true]);
        assert_eq!(e.products[2], "λv0.v0");
        assert!(e.rid.is_none());
    }

    #[test]
    fn constant_population_outflow_keeps_total() {
        let mut r = lambda_reactor(&["λu.u", "λv.v", "λw.w"], Outflow::ConstantPopulation);
        let mut rng = rng_from_seed(2);
        for _ in 0..50 {
            r.step(&mut rng).unwrap();
            assert_eq!(r.population().total(), 3);
        }
    }

    #[test]
    fn tile_collision_shrinks_by_one() {
        let mut r = Reactor::new(TileChemistry::default(), ReactorSettings::default());
        r.insert(Tile::unit());
        r.insert(Tile::unit());
        let mut rng = rng_from_seed(3);
        let e = r.step(&mut rng).unwrap().unwrap();
        assert_eq!(r.population().total(), 1);
        assert_eq!(e.new, vec![true]);
        assert_eq!(e.products.len(), 1);
    }

    #[test]
    fn underflow_below_two() {
        let mut r = lambda_reactor(&["λu.u"], Outflow::None);
        assert_eq!(r.step(&mut rng_from_seed(0)), Err(PopulationUnderflow { total: 1 }));
        assert_eq!(r.time(), 0);
    }

    #[test]
    fn lineage_ids_follow_instances() {
        let mut r = Reactor::new(
            TileChemistry::default(),
            ReactorSettings {
                track_instances: true,
                ..Default::default()
            },
        );
        r.insert(Tile::unit());
        r.insert(Tile::unit());
        let e = r.step(&mut rng_from_seed(4)).unwrap().unwrap();
        let mut rid = e.rid.unwrap();
        rid.sort();
        assert_eq!(rid, vec![0, 1]);
        assert_eq!(e.pid, Some(vec![2]));
    }

    #[test]
    fn asymmetric_collisions_use_key_order() {
        let mut r = Reactor::new(
            LambdaChemistry::default(),
            ReactorSettings {
                symmetric_collisions: false,
                ..Default::default()
            },
        );
        r.insert(parse("λy.λx.x").unwrap());
        r.insert(parse("λx.x").unwrap());
        let mut rng = rng_from_seed(5);
        for _ in 0..20 {
            let mut probe = Reactor::new(LambdaChemistry::default(), *r.settings());
            probe.insert(parse("λy.λx.x").unwrap());
            probe.insert(parse("λx.x").unwrap());
            let e = probe.step(&mut rng).unwrap().unwrap();
            assert_eq!(e.reactants, vec!["λv0.v0", "λv0.λv1.v1"]);
        }
    }

    #[test]
    fn tile_misfits_are_discarded() {
        // Real tiles almost always fit somewhere; force the failure path.
        struct Never;
        impl Chemistry for Never {
            type Molecule = Tile;
            fn react(&self, _: &Tile, _: &Tile, _: &mut SimRng) -> Vec<Tile> {
                Vec::new()
            }
            fn retain_reactants(&self) -> bool {
                false
            }
            fn discard_on_failure(&self) -> bool {
                true
            }
            fn species_key(&self, m: &Tile) -> String {
                m.key()
            }
        }
        let mut r = Reactor::new(Never, ReactorSettings::default());
        for _ in 0..5 {
            r.insert(Tile::unit());
        }
        let mut rng = rng_from_seed(6);
        assert_eq!(r.step(&mut rng).unwrap(), None);
        assert_eq!(r.population().total(), 3);
        assert_eq!(r.instances.len(), 3);
    }
}
