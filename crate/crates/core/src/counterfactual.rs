//! Query answering: marginal, interventional and counterfactual
//! probabilities over either backend.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{CounterfactualQuery, Formula, LiteralSet, Program};
use crate::semantics::{
    check_unique_supported_models, conditional_by_enumeration, Budget, Classification,
};
use crate::transforms::{intervene, twin, Intervention};
use crate::weight::Weight;
use crate::wmc;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Backend {
    /// Possible-world enumeration.
    Enumerate,
    /// Weighted model counting on the Clark completion.
    Wmc,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Enumerate => "enumerate",
            Backend::Wmc => "wmc",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Backend> {
        match s {
            "enumerate" => Ok(Backend::Enumerate),
            "wmc" => Ok(Backend::Wmc),
            _ => Err(Error::Config(format!("unknown backend `{s}`"))),
        }
    }
}

/// A probability, flagged `formal` when the program has positive cycles and
/// the number carries no causal reading.
#[derive(Clone, PartialEq, Debug)]
pub struct Answer<W> {
    pub value: W,
    pub formal: bool,
}

/// Rejects negative cycles; positive cycles are accepted and reported.
fn admissible(p: &Program) -> Result<bool> {
    match check_unique_supported_models(p).into_result()? {
        Classification::StratifiedCyclic => Ok(true),
        _ => Ok(false),
    }
}

/// `P(phi | evidence)` on the chosen backend.
pub fn conditional<W: Weight>(
    p: &Program,
    phi: &Formula,
    evidence: &LiteralSet,
    backend: Backend,
    budget: &Budget,
) -> Result<W> {
    match backend {
        Backend::Enumerate => conditional_by_enumeration(p, phi, evidence, budget),
        Backend::Wmc => wmc::conditional_within(p, phi, evidence, budget),
    }
}

pub fn answer_marginal<W: Weight>(
    p: &Program,
    phi: &Formula,
    backend: Backend,
    budget: &Budget,
) -> Result<Answer<W>> {
    let formal = admissible(p)?;
    let value = conditional(p, phi, &LiteralSet::new(), backend, budget)?;
    Ok(Answer { value, formal })
}

/// Probability of `phi` in the intervened program.
pub fn answer_intervention<W: Weight>(
    p: &Program,
    phi: &Formula,
    i: &Intervention,
    backend: Backend,
    budget: &Budget,
) -> Result<Answer<W>> {
    let q = intervene(p, i)?;
    answer_marginal(&q, phi, backend, budget)
}

/// Counterfactual probability: the query on the intervened copy of the twin
/// program, conditioned on the evidence in the factual copy.
pub fn answer_counterfactual<W: Weight>(
    p: &Program,
    q: &CounterfactualQuery,
    backend: Backend,
    budget: &Budget,
) -> Result<Answer<W>> {
    let formal = admissible(p)?;
    let t = twin(p, q)?;
    let value = conditional(&t.program, &t.query, &t.evidence, backend, budget)?;
    Ok(Answer { value, formal })
}
