//! Reference counterfactual procedure: abduction over possible worlds,
//! action by clause surgery, prediction on the kept worlds.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Atom, Clause, CounterfactualQuery, Prob, Program};
use crate::semantics::ModelEvaluator;
use crate::weight::Weight;

/// Every possible world of positive probability, as its external truth
/// values and weight.
fn worlds(p: &Program) -> Vec<(Vec<(Atom, bool)>, Prob)> {
    let mut out = vec![(Vec::new(), Prob::one())];
    for a in &p.alphabet.externals {
        let t = p.fact_prob(a);
        let f = Prob::one() - &t;
        let mut next = Vec::with_capacity(out.len() * 2);
        for (w, pr) in out {
            for (value, q) in [(true, &t), (false, &f)] {
                if !q.is_zero() {
                    let mut w = w.clone();
                    w.push((a.clone(), value));
                    next.push((w, pr.clone() * q));
                }
            }
        }
        out = next;
    }
    out
}

fn model(ev: &ModelEvaluator, world: &[(Atom, bool)]) -> Vec<bool> {
    let mut values = ev.value_buffer();
    for (a, v) in world {
        if let Some(i) = ev.atom_index(a) {
            values[i] = *v;
        }
    }
    ev.evaluate(&mut values);
    values
}

pub fn abduction_action_prediction<W: Weight>(p: &Program, q: &CounterfactualQuery) -> Result<W> {
    // Abduction.
    let ev = ModelEvaluator::new(p)?;
    let kept: Vec<_> = worlds(p)
        .into_iter()
        .filter(|(w, _)| ev.satisfies_all(&model(&ev, w), &q.evidence))
        .collect();
    let total: Prob = kept.iter().map(|(_, pr)| pr.clone()).sum();
    if total.is_zero() {
        return Err(Error::ZeroEvidence);
    }

    // Action.
    let mut acted = p.clone();
    for (atom, value) in q.interventions.iter() {
        if p.alphabet.is_external(atom) {
            return Err(Error::ExternalIntervention(atom.clone()));
        }
        acted.clauses.retain(|c| &c.head != atom);
        if value {
            acted.clauses.push(Clause::fact(atom.clone()));
            acted.alphabet.internals.insert(atom.clone());
        }
    }

    // Prediction.
    let aev = ModelEvaluator::new(&acted)?;
    let mut acc = W::Acc::default();
    for (w, pr) in &kept {
        if aev.satisfies(&model(&aev, w), &q.query) {
            W::accumulate(&mut acc, W::from_prob(&(pr / &total)));
        }
    }
    Ok(W::total(acc))
}
