//! Shannon entropy and mutual information in bits, plus a
//! compression-based proxy for algorithmic information.

mod codec;

pub use codec::{algorithmic_info_proxy, compress, decompress, CodecError};

use std::collections::BTreeMap;
use thiserror::Error;

/// Tolerance on probability sums.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfoError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("expected a joint distribution over {expected} variables, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("population is empty")]
    EmptyPopulation,
}

fn check_probabilities<'a>(ps: impl Iterator<Item = &'a f64>) -> Result<(), InfoError> {
    let mut sum = 0.0;
    for &p in ps {
        if !p.is_finite() || !(0.0..=1.0 + SUM_TOLERANCE).contains(&p) {
            return Err(InfoError::InvalidDistribution(format!("probability {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(InfoError::InvalidDistribution(format!("probabilities sum to {sum}")));
    }
    Ok(())
}

fn h(ps: impl Iterator<Item = f64>) -> f64 {
    // 0·log 0 is taken as 0.
    let s: f64 = ps.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    // A point mass gives -0 otherwise.
    s + 0.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: BTreeMap<String, f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: BTreeMap<String, f64>) -> Result<Self, InfoError> {
        check_probabilities(probs.values())?;
        Ok(DiscreteDistribution { probs })
    }

    pub fn from_pairs<K: Into<String>>(pairs: impl IntoIterator<Item = (K, f64)>) -> Result<Self, InfoError> {
        Self::new(pairs.into_iter().map(|(k, p)| (k.into(), p)).collect())
    }

    /// Empirical distribution of `counts`.
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Result<Self, InfoError> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(InfoError::EmptyPopulation);
        }
        let probs = counts
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
            .collect();
        Ok(DiscreteDistribution { probs })
    }

    pub fn probabilities(&self) -> &BTreeMap<String, f64> {
        &self.probs
    }

    pub fn support(&self) -> usize {
        self.probs.values().filter(|&&p| p > 0.0).count()
    }
}

/// Distribution over tuples of outcome labels, all of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    arity: usize,
    probs: BTreeMap<Vec<String>, f64>,
}

impl JointDistribution {
    pub fn new(probs: BTreeMap<Vec<String>, f64>) -> Result<Self, InfoError> {
        let arity = probs
            .keys()
            .next()
            .map(Vec::len)
            .ok_or_else(|| InfoError::InvalidDistribution("no outcomes".into()))?;
        if let Some(k) = probs.keys().find(|k| k.len() != arity) {
            return Err(InfoError::Arity {
                expected: arity,
                found: k.len(),
            });
        }
        check_probabilities(probs.values())?;
        Ok(JointDistribution { arity, probs })
    }

    pub fn from_pairs<K: Into<String>>(pairs: impl IntoIterator<Item = (Vec<K>, f64)>) -> Result<Self, InfoError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(k, p)| (k.into_iter().map(Into::into).collect(), p))
                .collect(),
        )
    }

    /// Product distribution of independent marginals.
    pub fn independent(parts: &[&DiscreteDistribution]) -> Result<Self, InfoError> {
        let mut probs: BTreeMap<Vec<String>, f64> = BTreeMap::from([(Vec::new(), 1.0)]);
        for d in parts {
            let mut next = BTreeMap::new();
            for (prefix, p) in &probs {
                for (x, q) in &d.probs {
                    let mut k = prefix.clone();
                    k.push(x.clone());
                    next.insert(k, p * q);
                }
            }
            probs = next;
        }
        Self::new(probs)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn probabilities(&self) -> &BTreeMap<Vec<String>, f64> {
        &self.probs
    }

    /// Marginal of coordinate `i`.
    pub fn marginal(&self, i: usize) -> Result<DiscreteDistribution, InfoError> {
        if i >= self.arity {
            return Err(InfoError::Arity {
                expected: i + 1,
                found: self.arity,
            });
        }
        let mut probs: BTreeMap<String, f64> = BTreeMap::new();
        for (k, p) in &self.probs {
            *probs.entry(k[i].clone()).or_insert(0.0) += p;
        }
        Ok(DiscreteDistribution { probs })
    }

    /// The same distribution with the coordinates of each tuple reversed.
    pub fn swapped(&self) -> JointDistribution {
        JointDistribution {
            arity: self.arity,
            probs: self
                .probs
                .iter()
                .map(|(k, &p)| (k.iter().rev().cloned().collect(), p))
                .collect(),
        }
    }
}

pub fn entropy(d: &DiscreteDistribution) -> f64 {
    h(d.probs.values().copied())
}

pub fn joint_entropy(j: &JointDistribution) -> f64 {
    h(j.probs.values().copied())
}

/// `I(X;Y) = H(X) + H(Y) − H(X,Y)`, clamped at 0 against rounding.
pub fn mutual_information(j: &JointDistribution) -> Result<f64, InfoError> {
    if j.arity != 2 {
        return Err(InfoError::Arity {
            expected: 2,
            found: j.arity,
        });
    }
    let i = entropy(&j.marginal(0)?) + entropy(&j.marginal(1)?) - joint_entropy(j);
    if (-1e-12..0.0).contains(&i) {
        return Ok(0.0);
    }
    Ok(i)
}

/// Entropy of species frequencies. An empty population has none.
pub fn population_entropy(counts: &BTreeMap<String, u64>) -> Result<f64, InfoError> {
    Ok(entropy(&DiscreteDistribution::from_counts(counts)?))
}

/// [`population_entropy`] with 0 for an empty population.
pub fn counts_entropy(counts: &BTreeMap<String, u64>) -> f64 {
    population_entropy(counts).unwrap_or(0.0)
}

/// Entropy of each sample time in a `t,species_key,count` series.
pub fn entropy_series<'a>(rows: impl IntoIterator<Item = (u64, &'a str, u64)>) -> Vec<(u64, f64)> {
    let mut by_t: BTreeMap<u64, BTreeMap<String, u64>> = BTreeMap::new();
    for (t, k, c) in rows {
        *by_t.entry(t).or_default().entry(k.to_string()).or_insert(0) += c;
    }
    by_t.into_iter()
        .map(|(t, counts)| (t, counts_entropy(&counts)))
        .collect()
}
