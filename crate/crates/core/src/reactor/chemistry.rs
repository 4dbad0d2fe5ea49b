use crate::arms::{step, step_stochastic, ArmsRule, SymbolMultiset};
use crate::lambda::{collide, CollisionLaw, LambdaTerm};
use crate::seed::SimRng;
use crate::tile::{collide_tiles, Tile};

/// How many molecules take part in one collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Binary,
    /// One molecule is drawn and transformed on its own.
    Unary,
}

/// A chemistry the reactor can host.
pub trait Chemistry {
    type Molecule: Clone;

    fn arity(&self) -> Arity {
        Arity::Binary
    }

    /// Products of `a + b`, not counting reactants kept under
    /// [`retain_reactants`](Self::retain_reactants). Empty means elastic.
    fn react(&self, a: &Self::Molecule, b: &Self::Molecule, rng: &mut SimRng) -> Vec<Self::Molecule>;

    /// Unary transformation; only called when [`arity`](Self::arity) is
    /// [`Arity::Unary`].
    fn transform(&self, _m: &Self::Molecule, _rng: &mut SimRng) -> Option<Self::Molecule> {
        None
    }

    /// Reactants stay in the reactor after a successful collision.
    fn retain_reactants(&self) -> bool;

    /// Reactants of an elastic collision are removed. Only consulted when
    /// reactants are not retained.
    fn discard_on_failure(&self) -> bool {
        false
    }

    fn species_key(&self, m: &Self::Molecule) -> String;
}

/// `A + B → A + B + nf(((Φ)A)B)`.
#[derive(Debug, Clone, Default)]
pub struct LambdaChemistry {
    pub law: CollisionLaw,
}

impl Chemistry for LambdaChemistry {
    type Molecule = LambdaTerm;

    fn react(&self, a: &LambdaTerm, b: &LambdaTerm, _rng: &mut SimRng) -> Vec<LambdaTerm> {
        collide(a, b, &self.law).into_iter().collect()
    }

    fn retain_reactants(&self) -> bool {
        true
    }

    fn species_key(&self, m: &LambdaTerm) -> String {
        m.canonical_key()
    }
}

/// Fitting tiles fuse into one; tiles that do not fit are both discarded.
#[derive(Debug, Clone)]
pub struct TileChemistry {
    pub discard_on_failure: bool,
}

impl Default for TileChemistry {
    fn default() -> Self {
        TileChemistry {
            discard_on_failure: true,
        }
    }
}

impl Chemistry for TileChemistry {
    type Molecule = Tile;

    fn react(&self, a: &Tile, b: &Tile, rng: &mut SimRng) -> Vec<Tile> {
        collide_tiles(a, b, rng).into_iter().collect()
    }

    fn retain_reactants(&self) -> bool {
        false
    }

    fn discard_on_failure(&self) -> bool {
        self.discard_on_failure
    }

    fn species_key(&self, m: &Tile) -> String {
        m.key()
    }
}

/// Hosts an ARMS ruleset: each molecule is a whole multiset state and one
/// reactor step applies one rule to it.
#[derive(Debug, Clone)]
pub struct ArmsChemistry {
    pub rules: Vec<ArmsRule>,
    pub stochastic_rule_choice: bool,
}

impl Chemistry for ArmsChemistry {
    type Molecule = SymbolMultiset;

    fn arity(&self) -> Arity {
        Arity::Unary
    }

    fn react(&self, _a: &SymbolMultiset, _b: &SymbolMultiset, _rng: &mut SimRng) -> Vec<SymbolMultiset> {
        Vec::new()
    }

    fn transform(&self, m: &SymbolMultiset, rng: &mut SimRng) -> Option<SymbolMultiset> {
        if self.stochastic_rule_choice {
            step_stochastic(m, &self.rules, rng).map(|(s, _)| s)
        } else {
            step(m, &self.rules).map(|(s, _)| s)
        }
    }

    fn retain_reactants(&self) -> bool {
        false
    }

    fn species_key(&self, m: &SymbolMultiset) -> String {
        m.to_string()
    }
}
