//! Logic programs with annotated disjunctions: selection semantics, the
//! translations to and from ProbLog, and counterfactual queries evaluated
//! over selections.

use std::collections::BTreeSet;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{
    Alphabet, Atom, Clause, CounterfactualQuery, Formula, Literal, Prob, Program, RandomFact,
};
use crate::semantics::{Budget, ModelEvaluator};
use crate::transforms::intervene;
use crate::weight::Weight;

/// Most selections [`lpad_distribution`] and [`cp_counterfactual`] visit.
pub const MAX_SELECTIONS: usize = 1 << 22;

/// `h1:p1; ...; hl:pl :- body.`
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct LpadClause {
    pub head: Vec<(Atom, Prob)>,
    pub body: BTreeSet<Literal>,
}

impl LpadClause {
    pub fn new(head: Vec<(Atom, Prob)>, body: impl IntoIterator<Item = Literal>) -> LpadClause {
        LpadClause {
            head,
            body: body.into_iter().collect(),
        }
    }

    /// Probability that no head atom is chosen.
    pub fn residual(&self) -> Prob {
        Prob::one() - self.head.iter().map(|(_, p)| p.clone()).sum::<Prob>()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LpadProgram {
    pub clauses: Vec<LpadClause>,
    pub alphabet: BTreeSet<Atom>,
}

impl LpadProgram {
    /// The alphabet is every atom the clauses mention.
    pub fn new(clauses: Vec<LpadClause>) -> LpadProgram {
        let alphabet = clauses
            .iter()
            .flat_map(|c| {
                c.head
                    .iter()
                    .map(|(a, _)| a.clone())
                    .chain(c.body.iter().map(|l| l.atom.clone()))
            })
            .collect();
        LpadProgram { clauses, alphabet }
    }

    /// Head probabilities in `[0, 1]` summing to at most one, and distinct
    /// head atoms within each clause.
    pub fn validate(&self) -> Result<()> {
        for (k, c) in self.clauses.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for (a, p) in &c.head {
                if p.is_negative() || *p > Prob::one() {
                    return Err(Error::InvalidLpad(format!(
                        "clause {}: probability of `{a}` is outside [0, 1]",
                        k + 1
                    )));
                }
                if !seen.insert(a) {
                    return Err(Error::InvalidLpad(format!(
                        "clause {}: head atom `{a}` repeated",
                        k + 1
                    )));
                }
            }
            if c.residual().is_negative() {
                return Err(Error::InvalidLpad(format!(
                    "clause {}: head probabilities sum to more than 1",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// For every clause, the chosen head index or `None` (no head).
pub type Selection = Vec<Option<usize>>;

/// Per clause, the choices of positive probability with their weights.
type Options = Vec<Vec<(Option<usize>, Prob)>>;

pub fn selection_probability(p: &LpadProgram, sigma: &Selection) -> Prob {
    p.clauses
        .iter()
        .zip(sigma)
        .map(|(c, s)| match s {
            Some(i) => c.head[*i].1.clone(),
            None => c.residual(),
        })
        .fold(Prob::one(), |acc, x| acc * x)
}

/// `P^sigma`: one definite clause per clause with a chosen head.
pub fn select(p: &LpadProgram, sigma: &Selection) -> Program {
    let clauses = p
        .clauses
        .iter()
        .zip(sigma)
        .filter_map(|(c, s)| s.map(|i| Clause::new(c.head[i].0.clone(), c.body.iter().cloned())))
        .collect();
    Program::new(
        Alphabet {
            internals: p.alphabet.clone(),
            externals: BTreeSet::new(),
        },
        clauses,
        Vec::new(),
    )
}

fn options(p: &LpadProgram) -> Result<Options> {
    let opts: Options = p
        .clauses
        .iter()
        .map(|c| {
            let mut o: Vec<(Option<usize>, Prob)> = c
                .head
                .iter()
                .enumerate()
                .filter(|(_, (_, pr))| !pr.is_zero())
                .map(|(i, (_, pr))| (Some(i), pr.clone()))
                .collect();
            let r = c.residual();
            if !r.is_zero() {
                o.push((None, r));
            }
            o
        })
        .collect();
    let mut count: usize = 1;
    for o in &opts {
        count = count.saturating_mul(o.len());
    }
    if count > MAX_SELECTIONS {
        return Err(Error::TooLarge {
            what: "selections",
            count,
            limit: MAX_SELECTIONS,
        });
    }
    Ok(opts)
}

/// Calls `visit` for every selection of positive probability.
pub fn for_each_selection(
    p: &LpadProgram,
    budget: &Budget,
    mut visit: impl FnMut(&Selection, &Prob) -> Result<()>,
) -> Result<()> {
    let opts = options(p)?;
    let mut sigma: Selection = vec![None; opts.len()];
    let mut visited = 0u64;
    fn go(
        opts: &[Vec<(Option<usize>, Prob)>],
        k: usize,
        weight: Prob,
        sigma: &mut Selection,
        visited: &mut u64,
        budget: &Budget,
        visit: &mut dyn FnMut(&Selection, &Prob) -> Result<()>,
    ) -> Result<()> {
        if k == opts.len() {
            *visited += 1;
            if (*visited).is_multiple_of(1024) {
                budget.check()?;
            }
            return visit(sigma, &weight);
        }
        for (choice, pr) in &opts[k] {
            sigma[k] = *choice;
            go(
                opts,
                k + 1,
                weight.clone() * pr,
                sigma,
                visited,
                budget,
                visit,
            )?;
        }
        Ok(())
    }
    go(
        &opts,
        0,
        Prob::one(),
        &mut sigma,
        &mut visited,
        budget,
        &mut visit,
    )
}

fn model_of(program: &Program) -> Result<(ModelEvaluator, Vec<bool>)> {
    let ev = ModelEvaluator::new(program)?;
    let mut values = ev.value_buffer();
    ev.evaluate(&mut values);
    Ok((ev, values))
}

/// Distribution semantics: total probability of the selections whose
/// program entails `phi`.
pub fn lpad_distribution<W: Weight>(p: &LpadProgram, phi: &Formula) -> Result<W> {
    p.validate()?;
    let mut acc = W::Acc::default();
    for_each_selection(p, &Budget::unlimited(), |sigma, weight| {
        let (ev, values) = model_of(&select(p, sigma))?;
        if ev.satisfies(&values, phi) {
            W::accumulate(&mut acc, W::from_prob(weight));
        }
        Ok(())
    })?;
    Ok(W::total(acc))
}

/// Counterfactual probability under CP-logic, evaluated leaf by leaf with
/// leaves identified with selections: a selection counts towards the
/// numerator when its program satisfies the evidence and its intervened
/// program entails the query.
pub fn cp_counterfactual<W: Weight>(p: &LpadProgram, q: &CounterfactualQuery) -> Result<W> {
    p.validate()?;
    let mut num = W::Acc::default();
    let mut den = W::Acc::default();
    for_each_selection(p, &Budget::unlimited(), |sigma, weight| {
        let program = select(p, sigma);
        let (ev, values) = model_of(&program)?;
        if !ev.satisfies_all(&values, &q.evidence) {
            return Ok(());
        }
        W::accumulate(&mut den, W::from_prob(weight));
        let (iev, ivalues) = model_of(&intervene(&program, &q.interventions)?)?;
        if iev.satisfies(&ivalues, &q.query) {
            W::accumulate(&mut num, W::from_prob(weight));
        }
        Ok(())
    })?;
    let den = W::total(den);
    if den.is_zero() {
        return Err(Error::ZeroEvidence);
    }
    Ok(W::total(num) / den)
}

/// Name of the auxiliary internal atom for head `i` of clause `k`
/// (both 1-based).
pub fn choice_atom(head: &Atom, k: usize, i: usize) -> Atom {
    head.with_suffix(&format!("__rc{k}__{i}"))
}

/// Name of the random fact guarding head `i` of clause `k`.
pub fn choice_fact(k: usize, i: usize) -> Atom {
    Atom::new(&format!("u__rc{k}__{i}")).expect("valid generated name")
}

/// ProbLog translation: head `i` of a clause fires when the body holds,
/// no earlier head fired and its own random fact is true. The fact's
/// probability is `p_i / (1 - sum_{j<i} p_j)`, or 0 once the earlier heads
/// exhaust the mass.
pub fn prob_of_lpad(p: &LpadProgram) -> Result<Program> {
    p.validate()?;
    let mut clauses = Vec::new();
    let mut facts = Vec::new();
    let mut internals = p.alphabet.clone();
    let mut externals = BTreeSet::new();
    for (k0, c) in p.clauses.iter().enumerate() {
        let k = k0 + 1;
        let mut earlier: Vec<Atom> = Vec::new();
        let mut used = Prob::zero();
        for (i0, (head, pr)) in c.head.iter().enumerate() {
            let i = i0 + 1;
            let chosen = choice_atom(head, k, i);
            let u = choice_fact(k, i);
            for fresh in [&chosen, &u] {
                if p.alphabet.contains(fresh)
                    || internals.contains(fresh) && fresh == &u
                    || externals.contains(fresh)
                {
                    return Err(Error::FreshAtomCollision(fresh.clone()));
                }
            }
            let rest = Prob::one() - &used;
            let fact_prob = if rest.is_zero() {
                Prob::zero()
            } else {
                pr / rest
            };
            let body = c
                .body
                .iter()
                .cloned()
                .chain(earlier.iter().map(|a| a.neg()))
                .chain(std::iter::once(u.pos()));
            clauses.push(Clause::new(chosen.clone(), body));
            clauses.push(Clause::new(head.clone(), [chosen.pos()]));
            facts.push(RandomFact::new(u.clone(), fact_prob));
            if !internals.insert(chosen.clone()) {
                return Err(Error::FreshAtomCollision(chosen));
            }
            externals.insert(u);
            earlier.push(chosen);
            used += pr;
        }
    }
    Ok(Program::new(
        Alphabet {
            internals,
            externals,
        },
        clauses,
        facts,
    ))
}

/// Reads a ProbLog program as an LPAD: `p::u.` becomes `u:p.` and each
/// rule `h :- body.` becomes `h:1 :- body.`.
pub fn lpad_of_problog(p: &Program) -> LpadProgram {
    let mut facts: Vec<&RandomFact> = p.facts.iter().collect();
    facts.sort();
    let mut clauses: Vec<LpadClause> = facts
        .into_iter()
        .map(|f| LpadClause::new(vec![(f.atom.clone(), f.prob.clone())], []))
        .collect();
    clauses.extend(
        p.clauses
            .iter()
            .map(|c| LpadClause::new(vec![(c.head.clone(), Prob::one())], c.body.iter().cloned())),
    );
    let mut out = LpadProgram::new(clauses);
    out.alphabet.extend(p.alphabet.internals.iter().cloned());
    out.alphabet.extend(p.alphabet.externals.iter().cloned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{prob, LiteralSet};
    use crate::parser::{parse_formula, parse_lpad, parse_problog};
    use crate::semantics::{marginal, ModelEvaluator};
    use num::BigRational;

    const SPRINKLER: &str = "\
0.5::u1. 0.7::u2. 0.1::u3. 0.6::u4.
szn_spr_sum :- u1.  sprinkler :- szn_spr_sum, u2.
rain :- szn_spr_sum, u3.    rain :- \\+szn_spr_sum, u4.
wet :- rain.    wet :- sprinkler. slippery :- wet.
";

    fn a(s: &str) -> Atom {
        Atom::new(s).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn selection_probabilities() {
        let p = parse_lpad("a:0.3; b:0.2.").unwrap();
        assert_eq!(selection_probability(&p, &vec![Some(0)]), prob(3, 10));
        assert_eq!(selection_probability(&p, &vec![None]), prob(1, 2));
        assert_eq!(
            selection_probability(&LpadProgram::default(), &vec![]),
            prob(1, 1)
        );
        let p = parse_lpad("a:0.3. b:0.5 :- a.").unwrap();
        assert_eq!(
            selection_probability(&p, &vec![Some(0), Some(0)]),
            prob(3, 20)
        );
    }

    #[test]
    fn selected_programs() {
        let p = parse_lpad("a:0.3; b:0.2 :- c. d:0.5 :- \\+a.").unwrap();
        let s = select(&p, &vec![Some(1), None]);
        assert_eq!(s.clauses, vec![Clause::new(a("b"), [a("c").pos()])]);
        assert!(s.facts.is_empty());
        let s = select(&p, &vec![Some(0), Some(0)]);
        assert_eq!(s.clauses[1], Clause::new(a("d"), [a("a").neg()]));
        assert!(select(&p, &vec![None, None]).clauses.is_empty());
    }

    #[test]
    fn distribution_semantics() {
        let p = parse_lpad("a:0.3; b:0.2.").unwrap();
        assert_eq!(
            lpad_distribution::<BigRational>(&p, &f("a")).unwrap(),
            prob(3, 10)
        );
        // 1 - 0.5 * 0.5, by enumerating the four selections.
        let p = parse_lpad("a:0.5. b:0.5. c:1 :- a. c:1 :- b.").unwrap();
        assert_eq!(
            lpad_distribution::<BigRational>(&p, &f("c")).unwrap(),
            prob(3, 4)
        );
    }

    #[test]
    fn sprinkler_through_lpad() {
        let p = parse_problog(SPRINKLER).unwrap();
        let l = lpad_of_problog(&p);
        assert_eq!(l.clauses.len(), 11);
        assert_eq!(l.clauses.iter().filter(|c| c.body.is_empty()).count(), 4);
        assert_eq!(
            lpad_distribution::<BigRational>(&l, &f("sprinkler")).unwrap(),
            prob(7, 20)
        );
        assert!(lpad_of_problog(&Program::default()).clauses.is_empty());
    }

    #[test]
    fn zero_fact_contributes_only_the_empty_choice() {
        let p = parse_problog("0::u. h :- u.").unwrap();
        let l = lpad_of_problog(&p);
        assert_eq!(l.clauses[0].head, vec![(a("u"), prob(0, 1))]);
        let mut n = 0;
        for_each_selection(&l, &Budget::unlimited(), |s, w| {
            assert_eq!(s[0], None);
            assert_eq!(*w, prob(1, 1));
            n += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn two_head_translation() {
        let p = parse_lpad("a:0.3; b:0.2 :- c.").unwrap();
        let t = prob_of_lpad(&p).unwrap();
        assert_eq!(t.clauses.len(), 4);
        assert_eq!(t.fact_prob(&choice_fact(1, 1)), prob(3, 10));
        assert_eq!(t.fact_prob(&choice_fact(1, 2)), prob(2, 7));
        let chosen_b = choice_atom(&a("b"), 1, 2);
        assert!(t.clauses.contains(&Clause::new(
            chosen_b.clone(),
            [
                a("c").pos(),
                choice_atom(&a("a"), 1, 1).neg(),
                choice_fact(1, 2).pos()
            ]
        )));
        assert!(t.clauses.contains(&Clause::new(a("b"), [chosen_b.pos()])));

        // With `c` certain the two semantics must agree on every formula.
        let p = parse_lpad("a:0.3; b:0.2 :- c. c.").unwrap();
        let t = prob_of_lpad(&p).unwrap();
        for phi in ["a", "b", "a, b", "\\+a, \\+b"] {
            let lhs: BigRational = lpad_distribution(&p, &f(phi)).unwrap();
            let rhs: BigRational = marginal(&t, &f(phi)).unwrap();
            assert_eq!(lhs, rhs, "{phi}");
        }
        assert_eq!(
            lpad_distribution::<BigRational>(&p, &f("b")).unwrap(),
            prob(1, 5)
        );
    }

    #[test]
    fn translation_guards() {
        let t = prob_of_lpad(&parse_lpad("a:1.").unwrap()).unwrap();
        assert_eq!(
            t.facts,
            vec![RandomFact::new(choice_fact(1, 1), prob(1, 1))]
        );
        assert_eq!(t.clauses.len(), 2);

        let t = prob_of_lpad(&parse_lpad("a:0.5; b:0.5.").unwrap()).unwrap();
        assert_eq!(t.fact_prob(&choice_fact(1, 2)), prob(1, 1));

        let t = prob_of_lpad(&parse_lpad("a:1; b:0.").unwrap()).unwrap();
        assert_eq!(t.fact_prob(&choice_fact(1, 2)), prob(0, 1));

        let clash = parse_lpad("u:0.5. u__rc1__1 :- u.").unwrap();
        assert!(matches!(
            prob_of_lpad(&clash),
            Err(Error::FreshAtomCollision(_))
        ));
        let clash = parse_lpad("a:0.5. a__rc1__1 :- a.").unwrap();
        assert!(matches!(
            prob_of_lpad(&clash),
            Err(Error::FreshAtomCollision(_))
        ));
    }

    #[test]
    fn cp_counterfactuals() {
        let p = parse_problog(SPRINKLER).unwrap();
        let q = CounterfactualQuery::new(
            f("slippery"),
            LiteralSet::from_literals([a("sprinkler").pos(), a("slippery").pos()]).unwrap(),
            LiteralSet::from_literals([a("sprinkler").neg()]).unwrap(),
        );
        let r: BigRational = cp_counterfactual(&lpad_of_problog(&p), &q).unwrap();
        assert_eq!(r, prob(1, 10));

        let l = parse_lpad("a:0.5.").unwrap();
        let q = CounterfactualQuery::new(
            f("a"),
            LiteralSet::from_literals([a("a").pos()]).unwrap(),
            LiteralSet::from_literals([a("a").neg()]).unwrap(),
        );
        assert_eq!(
            cp_counterfactual::<BigRational>(&l, &q).unwrap(),
            prob(0, 1)
        );

        let q = CounterfactualQuery::new(
            f("a"),
            LiteralSet::from_literals([a("a").neg()]).unwrap(),
            LiteralSet::new(),
        );
        assert_eq!(
            cp_counterfactual::<BigRational>(&l, &q).unwrap(),
            prob(0, 1)
        );

        let l = parse_lpad("a:0.5. b:0.5 :- a.").unwrap();
        let q = CounterfactualQuery::new(
            f("a"),
            LiteralSet::from_literals([a("b").neg()]).unwrap(),
            LiteralSet::new(),
        );
        // P(a | not b) = 0.25 / 0.75
        assert_eq!(
            cp_counterfactual::<BigRational>(&l, &q).unwrap(),
            prob(1, 3)
        );

        let q = CounterfactualQuery::new(
            f("a"),
            LiteralSet::from_literals([a("b").pos(), a("a").neg()]).unwrap(),
            LiteralSet::new(),
        );
        assert!(matches!(
            cp_counterfactual::<BigRational>(&l, &q),
            Err(Error::ZeroEvidence)
        ));
    }

    /// Intervening on a selected program agrees with intervening on the
    /// ProbLog translation, on every world the selection stands for.
    #[test]
    fn interventions_commute_with_translation() {
        let p = parse_lpad("a:0.3; b:0.4 :- c. c:0.5. d :- a, \\+b. e:0.5; d:0.5 :- b.").unwrap();
        let t = prob_of_lpad(&p).unwrap();
        let lits = [a("a").pos(), a("b").neg(), a("d").pos(), a("c").neg()];
        let originals: Vec<Atom> = p.alphabet.iter().cloned().collect();
        for x in &lits {
            let i = LiteralSet::from_literals([x.clone()]).unwrap();
            let ti = intervene(&t, &i).unwrap();
            let tev = ModelEvaluator::new(&ti).unwrap();
            crate::semantics::for_each_world::<BigRational>(
                &ti,
                &tev,
                &Budget::unlimited(),
                |values, _| {
                    // Recover the selection this world stands for.
                    let sigma: Selection = p
                        .clauses
                        .iter()
                        .enumerate()
                        .map(|(k0, c)| {
                            (0..c.head.len())
                                .find(|&i0| tev.value(values, &choice_fact(k0 + 1, i0 + 1)))
                        })
                        .collect();
                    let sel = intervene(&select(&p, &sigma), &i).unwrap();
                    let (sev, svalues) = model_of(&sel).unwrap();
                    for atom in &originals {
                        assert_eq!(
                            sev.value(&svalues, atom),
                            tev.value(values, atom),
                            "{atom} under {x}"
                        );
                    }
                },
            )
            .unwrap();
        }
    }
}
