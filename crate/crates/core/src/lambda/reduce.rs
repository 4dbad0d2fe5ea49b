use super::term::{LambdaTerm, Name, TermKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("reduction budget limits must be positive")]
pub struct InvalidBudget;

/// Limits on a normal-form computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionBudget {
    /// Maximum number of rewrite applications.
    pub max_steps: usize,
    /// Maximum tree size of any intermediate term.
    pub max_nodes: usize,
}

impl ReductionBudget {
    pub fn new(max_steps: usize, max_nodes: usize) -> Result<Self, InvalidBudget> {
        let budget = ReductionBudget { max_steps, max_nodes };
        budget.validate()?;
        Ok(budget)
    }

    pub fn steps(max_steps: usize) -> Result<Self, InvalidBudget> {
        Self::new(max_steps, Self::default().max_nodes)
    }

    pub fn validate(&self) -> Result<(), InvalidBudget> {
        if self.max_steps == 0 || self.max_nodes == 0 {
            return Err(InvalidBudget);
        }
        Ok(())
    }
}

impl Default for ReductionBudget {
    fn default() -> Self {
        ReductionBudget {
            max_steps: 10_000,
            max_nodes: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionResult {
    pub term: LambdaTerm,
    pub steps_used: usize,
    /// Set when the step budget ran out with a redex left, or the term
    /// outgrew `max_nodes`.
    pub exhausted: bool,
}

/// Which oriented rule a single rewrite applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// `(λx.x)Q → Q`
    Identity,
    /// `(λx.E)Q → E` when `x` is not free in `E`
    Discard,
    /// `(λx.λy.E)Q → λy.(λx.E)Q`
    PushUnderBinder,
    /// `(λx.(E₁)E₂)Q → ((λx.E₁)Q)(λx.E₂)Q`
    Distribute,
    /// `λy.E → λz.(λy.E)z` on the inner binder of a blocked push
    Rename,
}

/// Applies one rewrite to the leftmost-innermost redex.
///
/// A redex is contracted only once its operator body and its argument are
/// free of redexes; pending substitutions created by the push and
/// distribute rules are therefore resolved before any enclosing redex
/// copies them. Returns `None` when the term has no redex `(λx.E)Q`. When the redex
/// would push a binder under itself but the bound name is free in the
/// argument, the inner abstraction is renamed first and that renaming is
/// the step.
pub fn rewrite_step(term: &LambdaTerm) -> Option<LambdaTerm> {
    rewrite_step_traced(term).map(|(t, _)| t)
}

pub fn rewrite_step_traced(term: &LambdaTerm) -> Option<(LambdaTerm, Rule)> {
    if !term.has_redex() {
        return None;
    }
    // Walk down to the redex, remembering how to rebuild the path.
    enum Up<'a> {
        Body(&'a Name),
        Fun(&'a LambdaTerm),
        Arg(&'a LambdaTerm),
    }
    let mut path = Vec::new();
    let mut cur = term;
    let (mut rebuilt, rule) = loop {
        match cur.kind() {
            TermKind::App(f, a) => {
                if f.has_redex() {
                    path.push(Up::Arg(a));
                    cur = f;
                } else if a.has_redex() {
                    path.push(Up::Fun(f));
                    cur = a;
                } else if let TermKind::Abs(x, body) = f.kind() {
                    break contract(x, body, a, term.free_vars());
                } else {
                    unreachable!("has_redex set without a redex below");
                }
            }
            TermKind::Abs(x, body) => {
                path.push(Up::Body(x));
                cur = body;
            }
            TermKind::Var(_) => unreachable!("has_redex is false on variables"),
        }
    };
    while let Some(up) = path.pop() {
        rebuilt = match up {
            Up::Body(x) => LambdaTerm::abs(x.clone(), rebuilt),
            Up::Fun(f) => LambdaTerm::app(f.clone(), rebuilt),
            Up::Arg(a) => LambdaTerm::app(rebuilt, a.clone()),
        };
    }
    Some((rebuilt, rule))
}

fn contract(x: &Name, body: &LambdaTerm, arg: &LambdaTerm, root_free: &BTreeSet<Name>) -> (LambdaTerm, Rule) {
    if let TermKind::Var(v) = body.kind() {
        if v == x {
            return (arg.clone(), Rule::Identity);
        }
    }
    if !body.is_free(x) {
        return (body.clone(), Rule::Discard);
    }
    match body.kind() {
        TermKind::Var(_) => unreachable!("variable bodies are handled above"),
        TermKind::Abs(y, inner) => {
            // x is free in the body, so y != x and x is free in `inner`;
            // the side condition reduces to y not free in the argument.
            if !arg.is_free(y) {
                let pushed = LambdaTerm::app(LambdaTerm::abs(x.clone(), inner.clone()), arg.clone());
                (LambdaTerm::abs(y.clone(), pushed), Rule::PushUnderBinder)
            } else {
                let z = fresh_name(root_free, [inner.free_vars(), arg.free_vars()], [x, y]);
                let renamed = LambdaTerm::abs(
                    z.clone(),
                    LambdaTerm::app(LambdaTerm::abs(y.clone(), inner.clone()), LambdaTerm::var(z)),
                );
                (
                    LambdaTerm::app(LambdaTerm::abs(x.clone(), renamed), arg.clone()),
                    Rule::Rename,
                )
            }
        }
        TermKind::App(e1, e2) => {
            let left = LambdaTerm::app(LambdaTerm::abs(x.clone(), e1.clone()), arg.clone());
            let right = LambdaTerm::app(LambdaTerm::abs(x.clone(), e2.clone()), arg.clone());
            (LambdaTerm::app(left, right), Rule::Distribute)
        }
    }
}

/// Smallest `r<n>` absent from every given set.
fn fresh_name(root_free: &BTreeSet<Name>, sets: [&BTreeSet<Name>; 2], extra: [&Name; 2]) -> Name {
    (0u64..)
        .map(|n| format!("r{n}"))
        .find(|z| {
            !root_free.contains(z.as_str())
                && sets.iter().all(|s| !s.contains(z.as_str()))
                && extra.iter().all(|e| &***e != z.as_str())
        })
        .map(Name::from)
        .expect("unbounded name supply")
}

/// Deterministic leftmost-innermost normalization under `budget`.
pub fn normal_form(term: &LambdaTerm, budget: ReductionBudget) -> ReductionResult {
    let mut cur = term.clone();
    let mut steps = 0;
    loop {
        if cur.size() > budget.max_nodes {
            return ReductionResult {
                term: cur,
                steps_used: steps,
                exhausted: true,
            };
        }
        if steps == budget.max_steps {
            let exhausted = cur.has_redex();
            return ReductionResult {
                term: cur,
                steps_used: steps,
                exhausted,
            };
        }
        match rewrite_step(&cur) {
            Some(next) => {
                cur = next;
                steps += 1;
            }
            None => {
                return ReductionResult {
                    term: cur,
                    steps_used: steps,
                    exhausted: false,
                }
            }
        }
    }
}
