use super::parse::parse;
use super::reduce::{normal_form, ReductionBudget};
use super::term::{LambdaTerm, Name};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LambdaConfigError {
    #[error("term probabilities sum to {0}, expected 1")]
    Probabilities(f64),
    #[error("variable pool must not be empty")]
    EmptyPool,
    #[error("collision operator must be an abstraction, got {0}")]
    OperatorNotAbstraction(String),
    #[error(transparent)]
    Budget(#[from] super::reduce::InvalidBudget),
}

pub const DEFAULT_PHI: &str = "λx.λy.(x)y";

/// Filters applied around a collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollisionFilter {
    /// The operator molecule (the one applied) must start with `λ`.
    pub operator_must_be_abstraction: bool,
    /// Bare-variable products are discarded.
    pub reject_variable_products: bool,
}

impl Default for CollisionFilter {
    fn default() -> Self {
        CollisionFilter {
            operator_must_be_abstraction: true,
            reject_variable_products: true,
        }
    }
}

/// The reaction `A + B → A + B + nf(((Φ)A)B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionLaw {
    phi: LambdaTerm,
    pub budget: ReductionBudget,
    pub filter: CollisionFilter,
}

impl CollisionLaw {
    pub fn new(phi: LambdaTerm, budget: ReductionBudget) -> Result<Self, LambdaConfigError> {
        if !phi.is_abs() {
            return Err(LambdaConfigError::OperatorNotAbstraction(phi.to_string()));
        }
        budget.validate()?;
        Ok(CollisionLaw {
            phi,
            budget,
            filter: CollisionFilter::default(),
        })
    }

    pub fn with_filter(mut self, filter: CollisionFilter) -> Self {
        self.filter = filter;
        self
    }

    pub fn phi(&self) -> &LambdaTerm {
        &self.phi
    }
}

impl Default for CollisionLaw {
    fn default() -> Self {
        CollisionLaw::new(
            parse(DEFAULT_PHI).expect("default operator parses"),
            ReductionBudget::default(),
        )
        .expect("default operator is an abstraction")
    }
}

/// Reacts `a` with `b` under `law`. `None` is an elastic collision: a filter
/// rejected the pair or the product, or reduction ran out of budget.
pub fn collide(a: &LambdaTerm, b: &LambdaTerm, law: &CollisionLaw) -> Option<LambdaTerm> {
    if law.filter.operator_must_be_abstraction && !a.is_abs() {
        return None;
    }
    let combined = LambdaTerm::app(LambdaTerm::app(law.phi.clone(), a.clone()), b.clone());
    let result = normal_form(&combined, law.budget);
    if result.exhausted {
        return None;
    }
    if law.filter.reject_variable_products && result.term.is_var() {
        return None;
    }
    Some(result.term)
}

/// Shape of randomly generated terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomTermParams {
    pub max_depth: usize,
    pub var_pool_size: usize,
    pub p_var: f64,
    pub p_abs: f64,
    pub p_app: f64,
    /// Bind every free variable at the top so the result is closed.
    pub closed: bool,
}

impl Default for RandomTermParams {
    fn default() -> Self {
        RandomTermParams {
            max_depth: 5,
            var_pool_size: 3,
            p_var: 0.3,
            p_abs: 0.4,
            p_app: 0.3,
            closed: true,
        }
    }
}

impl RandomTermParams {
    pub fn validate(&self) -> Result<(), LambdaConfigError> {
        let sum = self.p_var + self.p_abs + self.p_app;
        let in_range = [self.p_var, self.p_abs, self.p_app]
            .iter()
            .all(|p| (0.0..=1.0).contains(p));
        if !in_range || (sum - 1.0).abs() > 1e-9 {
            return Err(LambdaConfigError::Probabilities(sum));
        }
        if self.var_pool_size == 0 {
            return Err(LambdaConfigError::EmptyPool);
        }
        Ok(())
    }
}

/// Draws a term of depth at most `params.max_depth`; leaves at the depth
/// limit are always variables.
pub fn random_term<R: Rng + ?Sized>(rng: &mut R, params: &RandomTermParams) -> Result<LambdaTerm, LambdaConfigError> {
    params.validate()?;
    let pool: Vec<Name> = (0..params.var_pool_size).map(|i| Name::from(format!("x{i}"))).collect();
    let mut term = grow(rng, params, &pool, 0);
    if params.closed {
        let free: Vec<Name> = term.free_vars().iter().rev().cloned().collect();
        for x in free {
            term = LambdaTerm::abs(x, term);
        }
    }
    Ok(term)
}

fn grow<R: Rng + ?Sized>(rng: &mut R, params: &RandomTermParams, pool: &[Name], depth: usize) -> LambdaTerm {
    let pick = |rng: &mut R| pool[rng.gen_range(0..pool.len())].clone();
    if depth >= params.max_depth {
        return LambdaTerm::var(pick(rng));
    }
    let u: f64 = rng.gen();
    if u < params.p_var {
        LambdaTerm::var(pick(rng))
    } else if u < params.p_var + params.p_abs {
        let x = pick(rng);
        LambdaTerm::abs(x, grow(rng, params, pool, depth + 1))
    } else {
        let f = grow(rng, params, pool, depth + 1);
        let a = grow(rng, params, pool, depth + 1);
        LambdaTerm::app(f, a)
    }
}
