use super::chemistry::{ArmsChemistry, Chemistry, LambdaChemistry, TileChemistry};
use super::log::write_event;
use super::{Outflow, Reactor, ReactorSettings};
use crate::arms::{parse_ruleset, random_multiset, random_ruleset, RulesetParams, SymbolMultiset};
use crate::info::counts_entropy;
use crate::lambda::{
    normal_form, parse, random_term, CollisionFilter, CollisionLaw, RandomTermParams, ReductionBudget, DEFAULT_PHI,
};
use crate::seed::{derived_rng, SimRng, DEFAULT_SEED};
use crate::tile::{random_polyomino, Tile};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, BufWriter, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    /// The message starts with the offending key.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(e.into())
    }
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("{key}: {msg}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactorConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub max_steps: u64,
    pub chemistry: ChemistrySpec,
    pub initial_population: PopulationSpec,
    /// Defaults to `constant_population` for AlChemy and `none` otherwise.
    #[serde(default)]
    pub outflow: Option<Outflow>,
    #[serde(default = "default_true")]
    pub symmetric_collisions: bool,
    #[serde(default)]
    pub track_instances: bool,
    /// Time-series cadence in steps.
    #[serde(default = "default_sample_every")]
    pub sample_every: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_true() -> bool {
    true
}

fn default_sample_every() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ChemistrySpec {
    Alchemy(AlchemyParams),
    Tiles(TileParams),
    Arms(ArmsParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlchemyParams {
    pub phi: String,
    pub budget: ReductionBudget,
    pub filter: CollisionFilter,
    /// Shape of randomly drawn initial terms. Draws that fail to normalize
    /// within the budget, or normalize to a variable, are redrawn.
    pub random_terms: RandomTermParams,
}

impl Default for AlchemyParams {
    fn default() -> Self {
        AlchemyParams {
            phi: DEFAULT_PHI.to_string(),
            budget: ReductionBudget::default(),
            filter: CollisionFilter::default(),
            random_terms: RandomTermParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TileParams {
    /// Area range of randomly drawn initial tiles.
    pub min_area: usize,
    pub max_area: usize,
    pub discard_on_failure: bool,
}

impl Default for TileParams {
    fn default() -> Self {
        TileParams {
            min_area: 1,
            max_area: 3,
            discard_on_failure: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmsParams {
    /// Ruleset text, one `lhs -> rhs` rule per line in rank order.
    pub rules: Option<String>,
    /// Generate the ruleset instead.
    pub random_rules: Option<RulesetParams>,
    pub stochastic_rule_choice: bool,
    /// Alphabet and size of randomly drawn initial multisets.
    pub alphabet_size: usize,
    pub initial_size: usize,
}

impl Default for ArmsParams {
    fn default() -> Self {
        ArmsParams {
            rules: None,
            random_rules: None,
            stochastic_rule_choice: false,
            alphabet_size: 3,
            initial_size: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeCount {
    pub molecule: String,
    pub count: u64,
}

/// Listed molecules first, then `random_count` random ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationSpec {
    pub molecules: Vec<MoleculeCount>,
    pub random_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed,
    /// Fewer molecules than a collision needs before step `t + 1`.
    PopulationUnderflow {
        t: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: u64,
    pub outcome: RunOutcome,
    pub events: u64,
    pub initial_counts: BTreeMap<String, u64>,
    pub final_counts: BTreeMap<String, u64>,
    pub final_total: u64,
    pub final_entropy_bits: f64,
}

impl ReactorConfig {
    /// The config with every policy default made explicit.
    pub fn effective(&self) -> ReactorConfig {
        let mut c = self.clone();
        c.outflow = Some(self.resolved_outflow());
        c
    }

    pub fn resolved_outflow(&self) -> Outflow {
        self.outflow.unwrap_or(match self.chemistry {
            ChemistrySpec::Alchemy(_) => Outflow::ConstantPopulation,
            _ => Outflow::None,
        })
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.max_steps == 0 {
            return Err(config_err("max_steps", "must be at least 1"));
        }
        if self.sample_every == 0 {
            return Err(config_err("sample_every", "must be at least 1"));
        }
        if let Some(Outflow::Rate { p }) = self.outflow {
            if !(0.0..=1.0).contains(&p) {
                return Err(config_err("outflow.p", format!("{p} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn settings(&self) -> ReactorSettings {
        ReactorSettings {
            outflow: self.resolved_outflow(),
            symmetric_collisions: self.symmetric_collisions,
            track_instances: self.track_instances,
        }
    }
}

// Independent streams per concern so that, say, changing the initial
// population does not perturb the ruleset.
const STREAM_DYNAMICS: u64 = 0;
const STREAM_POPULATION: u64 = 1;
const STREAM_RULES: u64 = 2;

/// Runs `config` to completion, writing the event log as JSONL to `events`
/// and species counts as `t,species_key,count` CSV to `series`.
pub fn run<E: Write, S: Write>(config: &ReactorConfig, events: E, series: S) -> Result<RunSummary, RunError> {
    config.validate()?;
    let seed = config.seed;
    let mut pop_rng = derived_rng(seed, &[STREAM_POPULATION]);
    let settings = config.settings();
    match &config.chemistry {
        ChemistrySpec::Alchemy(p) => {
            let phi = parse(&p.phi).map_err(|e| config_err("chemistry.phi", e))?;
            let law = CollisionLaw::new(phi, p.budget)
                .map_err(|e| config_err("chemistry", e))?
                .with_filter(p.filter);
            p.random_terms
                .validate()
                .map_err(|e| config_err("chemistry.random_terms", e))?;
            let mut reactor = Reactor::new(LambdaChemistry { law }, settings);
            populate(&mut reactor, &config.initial_population, |s| {
                parse(s).map_err(|e| e.to_string())
            })?;
            for _ in 0..config.initial_population.random_count {
                let term = random_normal_term(&mut pop_rng, p, &reactor.chemistry().law)?;
                reactor.insert(term);
            }
            drive(reactor, config, events, series)
        }
        ChemistrySpec::Tiles(p) => {
            if p.min_area == 0 || p.min_area > p.max_area {
                return Err(config_err("chemistry.min_area", "need 1 <= min_area <= max_area"));
            }
            let chem = TileChemistry {
                discard_on_failure: p.discard_on_failure,
            };
            let mut reactor = Reactor::new(chem, settings);
            populate(&mut reactor, &config.initial_population, |s| {
                Tile::parse(s).map_err(|e| e.to_string())
            })?;
            for _ in 0..config.initial_population.random_count {
                let area = pop_rng.gen_range(p.min_area..=p.max_area);
                reactor.insert(random_polyomino(&mut pop_rng, area));
            }
            drive(reactor, config, events, series)
        }
        ChemistrySpec::Arms(p) => {
            let rules = match (&p.rules, &p.random_rules) {
                (Some(text), None) => parse_ruleset(text).map_err(|e| config_err("chemistry.rules", e))?,
                (None, Some(params)) => random_ruleset(&mut derived_rng(seed, &[STREAM_RULES]), params)
                    .map_err(|e| config_err("chemistry.random_rules", e))?,
                _ => {
                    return Err(config_err(
                        "chemistry.rules",
                        "give exactly one of rules and random_rules",
                    ))
                }
            };
            if p.alphabet_size == 0 && config.initial_population.random_count > 0 {
                return Err(config_err("chemistry.alphabet_size", "must be at least 1"));
            }
            let chem = ArmsChemistry {
                rules,
                stochastic_rule_choice: p.stochastic_rule_choice,
            };
            let mut reactor = Reactor::new(chem, settings);
            populate(&mut reactor, &config.initial_population, |s| {
                SymbolMultiset::parse(s).map_err(|e| e.to_string())
            })?;
            for _ in 0..config.initial_population.random_count {
                reactor.insert(random_multiset(&mut pop_rng, p.alphabet_size, p.initial_size));
            }
            drive(reactor, config, events, series)
        }
    }
}

fn populate<C: Chemistry>(
    reactor: &mut Reactor<C>,
    spec: &PopulationSpec,
    parse_molecule: impl Fn(&str) -> Result<C::Molecule, String>,
) -> Result<(), RunError> {
    for (i, mc) in spec.molecules.iter().enumerate() {
        let m = parse_molecule(&mc.molecule)
            .map_err(|e| config_err(&format!("initial_population.molecules[{i}].molecule"), e))?;
        for _ in 0..mc.count {
            reactor.insert(m.clone());
        }
    }
    Ok(())
}

const MAX_REDRAWS: usize = 10_000;

fn random_normal_term(
    rng: &mut SimRng,
    params: &AlchemyParams,
    law: &CollisionLaw,
) -> Result<crate::lambda::LambdaTerm, RunError> {
    for _ in 0..MAX_REDRAWS {
        let term = random_term(rng, &params.random_terms).map_err(|e| config_err("chemistry.random_terms", e))?;
        let r = normal_form(&term, law.budget);
        if !r.exhausted && !r.term.is_var() {
            return Ok(r.term);
        }
    }
    Err(config_err(
        "chemistry.random_terms",
        format!("no usable term in {MAX_REDRAWS} draws"),
    ))
}

fn drive<C: Chemistry, E: Write, S: Write>(
    mut reactor: Reactor<C>,
    config: &ReactorConfig,
    events: E,
    series: S,
) -> Result<RunSummary, RunError> {
    let mut rng = derived_rng(config.seed, &[STREAM_DYNAMICS]);
    let mut events = BufWriter::new(events);
    let mut series = csv::Writer::from_writer(series);
    series.write_record(["t", "species_key", "count"])?;
    let initial_counts = reactor.population().counts().clone();
    let sample = |series: &mut csv::Writer<S>, t: u64, counts: &BTreeMap<String, u64>| -> Result<(), RunError> {
        for (k, c) in counts {
            series.write_record([t.to_string().as_str(), k, c.to_string().as_str()])?;
        }
        Ok(())
    };
    sample(&mut series, 0, &initial_counts)?;
    let mut outcome = RunOutcome::Completed;
    let mut n_events = 0;
    while reactor.time() < config.max_steps {
        match reactor.step(&mut rng) {
            Ok(Some(e)) => {
                write_event(&mut events, &e)?;
                n_events += 1;
            }
            Ok(None) => {}
            Err(_) => {
                outcome = RunOutcome::PopulationUnderflow { t: reactor.time() };
                break;
            }
        }
        if reactor.time().is_multiple_of(config.sample_every) {
            sample(&mut series, reactor.time(), reactor.population().counts())?;
        }
    }
    let t = reactor.time();
    if !t.is_multiple_of(config.sample_every) {
        sample(&mut series, t, reactor.population().counts())?;
    }
    events.flush()?;
    series.flush()?;
    let final_counts = reactor.population().counts().clone();
    Ok(RunSummary {
        steps: t,
        outcome,
        events: n_events,
        final_total: reactor.population().total(),
        final_entropy_bits: counts_entropy(&final_counts),
        initial_counts,
        final_counts,
    })
}
