//! Ordered multiset rewriting.
//!
//! The reactor state is a multiset of abstract symbols and every rule
//! rewrites a sub-multiset. Rules carry a rank; at each step the applicable
//! rule with the lowest rank fires. Rules that grow the multiset are
//! *heating* rules, rules that shrink it are *cooling* rules, and the share
//! of heating rules among the non-neutral ones is the order parameter that
//! governs whether random rule sets settle, run away, or cycle.

use crate::fmt::g17;
use crate::seed::derived_rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArmsError {
    #[error("ruleset has no heating or cooling rule")]
    DegenerateRuleset,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A finite multiset of symbols. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolMultiset {
    counts: BTreeMap<String, u64>,
}

impl SymbolMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut m = Self::new();
        for s in symbols {
            m.insert(s, 1);
        }
        m
    }

    /// Parses whitespace-separated symbols, e.g. `a a b`.
    pub fn parse(text: &str) -> Result<Self, ArmsError> {
        for sym in text.split_whitespace() {
            check_symbol(sym).map_err(|message| ArmsError::Parse { line: 1, message })?;
        }
        Ok(Self::from_symbols(text.split_whitespace()))
    }

    pub fn insert(&mut self, symbol: impl Into<String>, n: u64) {
        if n > 0 {
            *self.counts.entry(symbol.into()).or_insert(0) += n;
        }
    }

    pub fn count(&self, symbol: &str) -> u64 {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    /// Total number of symbols, with multiplicity.
    pub fn size(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(s, &n)| (s.as_str(), n))
    }

    /// Multiset inclusion.
    pub fn contains(&self, other: &SymbolMultiset) -> bool {
        other.counts.iter().all(|(s, &n)| self.count(s) >= n)
    }

    /// `self − other + add`, or `None` unless `other ⊆ self`.
    pub fn rewrite(&self, remove: &SymbolMultiset, add: &SymbolMultiset) -> Option<SymbolMultiset> {
        if !self.contains(remove) {
            return None;
        }
        let mut out = self.clone();
        for (s, &n) in &remove.counts {
            let c = out.counts.get_mut(s).expect("included");
            *c -= n;
            if *c == 0 {
                out.counts.remove(s);
            }
        }
        for (s, &n) in &add.counts {
            out.insert(s.clone(), n);
        }
        Some(out)
    }

    /// Space-separated symbols with repetition, the inverse of [`parse`](Self::parse).
    pub fn to_symbol_string(&self) -> String {
        let mut parts = Vec::new();
        for (s, &n) in &self.counts {
            for _ in 0..n {
                parts.push(s.as_str());
            }
        }
        parts.join(" ")
    }
}

/// Canonical key: `{a:2,b:1}`; the empty multiset is `{}`.
impl fmt::Display for SymbolMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (s, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}:{n}")?;
        }
        f.write_str("}")
    }
}

fn check_symbol(sym: &str) -> Result<(), String> {
    let ok = sym.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if sym.is_empty() || !ok {
        return Err(format!("invalid symbol `{sym}`"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmsRule {
    pub lhs: SymbolMultiset,
    pub rhs: SymbolMultiset,
    pub rank: usize,
}

impl ArmsRule {
    pub fn new(lhs: SymbolMultiset, rhs: SymbolMultiset, rank: usize) -> Result<Self, ArmsError> {
        if lhs.is_empty() {
            return Err(ArmsError::Config("rule left-hand side must not be empty".into()));
        }
        Ok(ArmsRule { lhs, rhs, rank })
    }

    pub fn class(&self) -> RuleClass {
        classify_rule(self)
    }
}

impl fmt::Display for ArmsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs = self.rhs.to_symbol_string();
        if rhs.is_empty() {
            write!(f, "{} ->", self.lhs.to_symbol_string())
        } else {
            write!(f, "{} -> {}", self.lhs.to_symbol_string(), rhs)
        }
    }
}

/// Parses one rule per line (`a b -> c`), ranked by line order. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_ruleset(text: &str) -> Result<Vec<ArmsRule>, ArmsError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| ArmsError::Parse { line: i + 1, message };
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| parse_err("expected `->`".into()))?;
        for sym in lhs.split_whitespace().chain(rhs.split_whitespace()) {
            check_symbol(sym).map_err(parse_err)?;
        }
        let lhs = SymbolMultiset::from_symbols(lhs.split_whitespace());
        if lhs.is_empty() {
            return Err(parse_err("empty left-hand side".into()));
        }
        let rhs = SymbolMultiset::from_symbols(rhs.split_whitespace());
        let rank = rules.len();
        rules.push(ArmsRule { lhs, rhs, rank });
    }
    Ok(rules)
}

pub fn format_ruleset(rules: &[ArmsRule]) -> String {
    let mut sorted: Vec<&ArmsRule> = rules.iter().collect();
    sorted.sort_by_key(|r| r.rank);
    sorted.iter().map(|r| format!("{r}\n")).collect()
}

pub fn apply_rule(state: &SymbolMultiset, rule: &ArmsRule) -> Option<SymbolMultiset> {
    state.rewrite(&rule.lhs, &rule.rhs)
}

/// Fires the applicable rule with the lowest rank. `None` means the system
/// has terminated.
pub fn step(state: &SymbolMultiset, rules: &[ArmsRule]) -> Option<(SymbolMultiset, usize)> {
    rules
        .iter()
        .filter(|r| state.contains(&r.lhs))
        .min_by_key(|r| r.rank)
        .map(|r| (apply_rule(state, r).expect("lhs included"), r.rank))
}

/// Fires a uniformly chosen applicable rule.
pub fn step_stochastic<R: Rng + ?Sized>(
    state: &SymbolMultiset,
    rules: &[ArmsRule],
    rng: &mut R,
) -> Option<(SymbolMultiset, usize)> {
    let applicable: Vec<&ArmsRule> = rules.iter().filter(|r| state.contains(&r.lhs)).collect();
    let r = applicable.choose(rng)?;
    Some((apply_rule(state, r).expect("lhs included"), r.rank))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleClass {
    Heating,
    Cooling,
    Neutral,
}

pub fn classify_rule(rule: &ArmsRule) -> RuleClass {
    use std::cmp::Ordering::*;
    match rule.lhs.size().cmp(&rule.rhs.size()) {
        Less => RuleClass::Heating,
        Greater => RuleClass::Cooling,
        Equal => RuleClass::Neutral,
    }
}

/// `N_heating / (N_heating + N_cooling)`.
pub fn order_parameter(rules: &[ArmsRule]) -> Result<f64, ArmsError> {
    let (mut heating, mut cooling) = (0usize, 0usize);
    for r in rules {
        match classify_rule(r) {
            RuleClass::Heating => heating += 1,
            RuleClass::Cooling => cooling += 1,
            RuleClass::Neutral => {}
        }
    }
    if heating + cooling == 0 {
        return Err(ArmsError::DegenerateRuleset);
    }
    Ok(heating as f64 / (heating + cooling) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesetParams {
    pub n_rules: usize,
    pub alphabet_size: usize,
    pub max_side_size: usize,
    pub target_order_parameter: f64,
}

/// Symbol `i` of a generated alphabet: `a`..`z`, then `s26`, `s27`, ...
pub fn alphabet_symbol(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("s{i}")
    }
}

fn random_side<R: Rng + ?Sized>(rng: &mut R, alphabet_size: usize, size: usize) -> SymbolMultiset {
    SymbolMultiset::from_symbols((0..size).map(|_| alphabet_symbol(rng.gen_range(0..alphabet_size))))
}

/// Random heating and cooling rules, no neutral ones, with
/// `round(target · n_rules)` heating rules placed at random ranks.
pub fn random_ruleset<R: Rng + ?Sized>(rng: &mut R, params: &RulesetParams) -> Result<Vec<ArmsRule>, ArmsError> {
    let RulesetParams {
        n_rules,
        alphabet_size,
        max_side_size,
        target_order_parameter: target,
    } = *params;
    if n_rules == 0 {
        return Err(ArmsError::Config("n_rules must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(ArmsError::Config(format!(
            "target order parameter {target} outside [0, 1]"
        )));
    }
    if alphabet_size == 0 {
        return Err(ArmsError::Config("alphabet_size must be at least 1".into()));
    }
    if max_side_size == 0 {
        return Err(ArmsError::Config("max_side_size must be at least 1".into()));
    }
    let n_heating = (target * n_rules as f64).round() as usize;
    if n_heating > 0 && max_side_size < 2 {
        return Err(ArmsError::Config(format!(
            "target {target} needs heating rules, which need max_side_size >= 2"
        )));
    }
    let mut heating = vec![true; n_heating];
    heating.resize(n_rules, false);
    heating.shuffle(rng);
    let rules = heating
        .into_iter()
        .enumerate()
        .map(|(rank, is_heating)| {
            let (l, r) = if is_heating {
                let l = rng.gen_range(1..max_side_size);
                (l, rng.gen_range(l + 1..=max_side_size))
            } else {
                let l = rng.gen_range(1..=max_side_size);
                (l, rng.gen_range(0..l))
            };
            ArmsRule {
                lhs: random_side(rng, alphabet_size, l),
                rhs: random_side(rng, alphabet_size, r),
                rank,
            }
        })
        .collect();
    Ok(rules)
}

pub fn random_multiset<R: Rng + ?Sized>(rng: &mut R, alphabet_size: usize, size: usize) -> SymbolMultiset {
    random_side(rng, alphabet_size, size)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Outcome {
    Terminated,
    /// `states[entry] == states[entry + period]`, first recurrence.
    Cycle {
        entry: usize,
        period: usize,
    },
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmsTrajectory {
    pub states: Vec<SymbolMultiset>,
    pub outcome: Outcome,
}

impl ArmsTrajectory {
    /// Number of rule applications performed.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

/// Deterministic run until termination, first state recurrence, or
/// `max_steps` rule applications.
pub fn run_arms(initial: &SymbolMultiset, rules: &[ArmsRule], max_steps: usize) -> ArmsTrajectory {
    run_with(initial, max_steps, |s| step(s, rules))
}

pub fn run_arms_stochastic<R: Rng + ?Sized>(
    initial: &SymbolMultiset,
    rules: &[ArmsRule],
    max_steps: usize,
    rng: &mut R,
) -> ArmsTrajectory {
    run_with(initial, max_steps, |s| step_stochastic(s, rules, rng))
}

fn run_with<F>(initial: &SymbolMultiset, max_steps: usize, mut next: F) -> ArmsTrajectory
where
    F: FnMut(&SymbolMultiset) -> Option<(SymbolMultiset, usize)>,
{
    let mut states = vec![initial.clone()];
    let mut seen: HashMap<SymbolMultiset, usize> = HashMap::new();
    seen.insert(initial.clone(), 0);
    for _ in 0..max_steps {
        let Some((state, _)) = next(states.last().expect("nonempty")) else {
            return ArmsTrajectory {
                states,
                outcome: Outcome::Terminated,
            };
        };
        let index = states.len();
        if let Some(&entry) = seen.get(&state) {
            debug_assert_eq!(states[entry], state);
            states.push(state);
            return ArmsTrajectory {
                states,
                outcome: Outcome::Cycle {
                    entry,
                    period: index - entry,
                },
            };
        }
        seen.insert(state.clone(), index);
        states.push(state);
    }
    ArmsTrajectory {
        states,
        outcome: Outcome::BudgetExhausted,
    }
}

/// Per-run settings for an order-parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub n_rules: usize,
    pub alphabet_size: usize,
    pub max_side_size: usize,
    pub initial_size: usize,
    pub max_steps: usize,
    pub stochastic_rule_choice: bool,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            n_rules: 8,
            alphabet_size: 3,
            max_side_size: 3,
            initial_size: 6,
            max_steps: 500,
            stochastic_rule_choice: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub target: f64,
    pub cycling: f64,
    pub terminated: f64,
    pub exhausted: f64,
}

/// Runs `runs_per_point` random systems at each order-parameter target and
/// tallies their outcomes. Run `j` at grid point `i` draws from the stream
/// `(seed, i, j)`, so results do not depend on scheduling.
pub fn sweep(seed: u64, grid: &[f64], runs_per_point: usize, params: &SweepParams) -> Result<Vec<SweepRow>, ArmsError> {
    if grid.is_empty() {
        return Err(ArmsError::Config("sweep grid is empty".into()));
    }
    if runs_per_point == 0 {
        return Err(ArmsError::Config("runs_per_point must be at least 1".into()));
    }
    if params.max_steps == 0 {
        return Err(ArmsError::Config("max_steps must be at least 1".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(gi, &target)| {
            let ruleset = RulesetParams {
                n_rules: params.n_rules,
                alphabet_size: params.alphabet_size,
                max_side_size: params.max_side_size,
                target_order_parameter: target,
            };
            let outcomes = (0..runs_per_point)
                .into_par_iter()
                .map(|ri| {
                    let mut rng = derived_rng(seed, &[gi as u64, ri as u64]);
                    let rules = random_ruleset(&mut rng, &ruleset)?;
                    let initial = random_multiset(&mut rng, params.alphabet_size, params.initial_size);
                    let traj = if params.stochastic_rule_choice {
                        run_arms_stochastic(&initial, &rules, params.max_steps, &mut rng)
                    } else {
                        run_arms(&initial, &rules, params.max_steps)
                    };
                    Ok(traj.outcome)
                })
                .collect::<Result<Vec<_>, ArmsError>>()?;
            let n = outcomes.len() as f64;
            let frac = |pred: fn(&Outcome) -> bool| outcomes.iter().filter(|o| pred(o)).count() as f64 / n;
            Ok(SweepRow {
                target,
                cycling: frac(|o| matches!(o, Outcome::Cycle { .. })),
                terminated: frac(|o| matches!(o, Outcome::Terminated)),
                exhausted: frac(|o| matches!(o, Outcome::BudgetExhausted)),
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "target,cycling,terminated,exhausted")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            g17(r.target),
            g17(r.cycling),
            g17(r.terminated),
            g17(r.exhausted)
        )?;
    }
    Ok(())
}
