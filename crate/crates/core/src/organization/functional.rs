use crate::lambda::{normal_form, LambdaTerm, ReductionBudget};
use serde::{Deserialize, Serialize};

/// Probe terms and the budget used to compare molecules by behaviour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalProbe {
    pub probes: Vec<LambdaTerm>,
    pub budget: ReductionBudget,
}

/// Outcome of one probe reduction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProbeResult {
    Normal(String),
    Exhausted,
}

impl FunctionalProbe {
    /// `nf((m)p)` and `nf((p)m)` for every probe, in probe order.
    pub fn signature(&self, m: &LambdaTerm) -> Vec<ProbeResult> {
        let nf = |t: LambdaTerm| {
            let r = normal_form(&t, self.budget);
            if r.exhausted {
                ProbeResult::Exhausted
            } else {
                ProbeResult::Normal(r.term.canonical_key())
            }
        };
        self.probes
            .iter()
            .flat_map(|p| {
                [
                    nf(LambdaTerm::app(m.clone(), p.clone())),
                    nf(LambdaTerm::app(p.clone(), m.clone())),
                ]
            })
            .collect()
    }
}

/// Equal probe signatures: both sides agree on every probe in both
/// positions, with exhaustion equal only to exhaustion.
pub fn functional_equiv(a: &LambdaTerm, b: &LambdaTerm, spec: &FunctionalProbe) -> bool {
    spec.signature(a) == spec.signature(b)
}
