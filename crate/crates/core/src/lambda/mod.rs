//! Lambda-term chemistry: molecules are untyped lambda terms and a
//! collision applies one term to another through a fixed operator, then
//! normalizes the result with the oriented rewrite system below.
//!
//! | rule | rewrite |
//! |------|---------|
//! | identity | `(λx.x)Q → Q` |
//! | discard | `(λx.E)Q → E` if `x ∉ FV(E)` |
//! | push | `(λx.λy.E)Q → λy.(λx.E)Q` if `x ≠ y` and (`x ∉ FV(E)` or `y ∉ FV(Q)`) |
//! | distribute | `(λx.(E₁)E₂)Q → ((λx.E₁)Q)(λx.E₂)Q` |
//! | rename | `λx.E → λz.(λx.E)z` if `z ∉ FV(E)` |

mod chem;
mod parse;
mod reduce;
mod term;

pub use chem::{collide, random_term, CollisionFilter, CollisionLaw, LambdaConfigError, RandomTermParams, DEFAULT_PHI};
pub use parse::{parse, SyntaxError};
pub use reduce::{
    normal_form, rewrite_step, rewrite_step_traced, InvalidBudget, ReductionBudget, ReductionResult, Rule,
};
pub use term::{LambdaTerm, Name, TermKind};
