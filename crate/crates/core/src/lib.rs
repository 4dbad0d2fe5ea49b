//! Stochastic artificial-chemistry engine.
//!
//! Three chemistries share one well-stirred reactor:
//!
//! * [`lambda`]: lambda terms reacting by application and normal-form reduction,
//! * [`arms`]: ordered multiset rewriting with heating and cooling rules,
//! * [`tile`]: polyomino tiles joining edge to edge without gaps.
//!
//! Analysis lives alongside: [`replicator`] integrates replicator dynamics,
//! [`info`] measures entropy and a compression-based information proxy, and
//! [`organization`] inspects event logs for closed, self-maintaining sets,
//! hypercycles and self-replicating classes.

pub mod arms;
pub mod fmt;
pub mod info;
pub mod lambda;
pub mod organization;
pub mod reactor;
pub mod replicator;
pub mod seed;
pub mod tile;

pub use lambda::{LambdaTerm, ReductionBudget};
pub use reactor::{EventLog, Population, ReactionEvent, ReactorConfig};
pub use seed::{SimRng, DEFAULT_SEED};
