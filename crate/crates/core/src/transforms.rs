//! Source-to-source rewrites: interventions and the twin-network program
//! used to answer counterfactual queries.

use crate::error::{Error, Result};
use crate::model::{Atom, Clause, CounterfactualQuery, Formula, LiteralSet, Program};

/// Atoms forced to a truth value, `do(X := x)`.
pub type Intervention = LiteralSet;

/// Suffix of the factual (evidence) copy.
pub const EVIDENCE_SUFFIX: &str = "__e";
/// Suffix of the counterfactual (intervention) copy.
pub const INTERVENTION_SUFFIX: &str = "__i";

/// `P^do(X:=x)`: drops every clause whose head is intervened on and adds
/// `h.` for each atom forced true. Atoms absent from the program are
/// accepted; a positively forced one joins the internal alphabet.
pub fn intervene(p: &Program, i: &Intervention) -> Result<Program> {
    for atom in i.atoms() {
        if p.alphabet.is_external(atom) {
            return Err(Error::ExternalIntervention(atom.clone()));
        }
    }
    let mut out = p.clone();
    out.clauses.retain(|c| i.get(&c.head).is_none());
    for (atom, value) in i.iter() {
        if value {
            out.clauses.push(Clause::fact(atom.clone()));
            out.alphabet.internals.insert(atom.clone());
        }
    }
    Ok(out)
}

/// Output of [`twin`]: the program `P^{K, do(X^i := x)}` with the query
/// renamed into the intervention copy and the evidence into the factual
/// copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwinProgram {
    pub program: Program,
    pub query: Formula,
    pub evidence: LiteralSet,
}

/// Renames internal atoms with `suffix`; externals stay shared.
fn copy_with_suffix<'a>(
    p: &'a Program,
    suffix: &'a str,
) -> (Vec<Clause>, impl Fn(&Atom) -> Atom + 'a) {
    let rename = move |a: &Atom| {
        if p.alphabet.is_external(a) {
            a.clone()
        } else {
            a.with_suffix(suffix)
        }
    };
    let clauses = p
        .clauses
        .iter()
        .map(|c| {
            Clause::new(
                rename(&c.head),
                c.body
                    .iter()
                    .map(|l| crate::model::Literal::new(rename(&l.atom), l.positive)),
            )
        })
        .collect();
    (clauses, rename)
}

/// Builds the twin network for `q`: two copies of the logic program sharing
/// the random facts, with the interventions applied to the `__i` copy.
pub fn twin(p: &Program, q: &CounterfactualQuery) -> Result<TwinProgram> {
    let mentioned = p
        .alphabet
        .internals
        .iter()
        .chain(
            q.query
                .atoms()
                .iter()
                .filter(|a| !p.alphabet.is_external(a)),
        )
        .chain(q.evidence.atoms())
        .chain(q.interventions.atoms())
        .cloned()
        .collect::<Vec<_>>();
    for a in &mentioned {
        if a.name().ends_with(EVIDENCE_SUFFIX) || a.name().ends_with(INTERVENTION_SUFFIX) {
            return Err(Error::SuffixCollision(a.clone()));
        }
        for s in [EVIDENCE_SUFFIX, INTERVENTION_SUFFIX] {
            let renamed = a.with_suffix(s);
            if p.alphabet.is_external(&renamed) {
                return Err(Error::SuffixCollision(renamed));
            }
        }
    }
    for a in q.interventions.atoms() {
        if p.alphabet.is_external(a) {
            return Err(Error::ExternalIntervention(a.clone()));
        }
    }

    let (mut clauses, to_e) = copy_with_suffix(p, EVIDENCE_SUFFIX);
    let (clauses_i, to_i) = copy_with_suffix(p, INTERVENTION_SUFFIX);
    clauses.extend(clauses_i);

    let mut alphabet = p.alphabet.clone();
    alphabet.internals = p
        .alphabet
        .internals
        .iter()
        .flat_map(|a| [to_e(a), to_i(a)])
        .collect();
    let doubled = Program::new(alphabet, clauses, p.facts.clone());
    let program = intervene(&doubled, &q.interventions.rename(&to_i))?;

    Ok(TwinProgram {
        program,
        query: q.query.rename(&to_i),
        evidence: q.evidence.rename(&to_e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Literal;
    use crate::parser::{parse_problog, print_problog};
    use crate::semantics::{check_unique_supported_models, marginal, Classification};
    use num::BigRational;

    const SPRINKLER: &str = "\
0.5::u1. 0.7::u2. 0.1::u3. 0.6::u4.
szn_spr_sum :- u1.  sprinkler :- szn_spr_sum, u2.
rain :- szn_spr_sum, u3.    rain :- \\+szn_spr_sum, u4.
wet :- rain.    wet :- sprinkler. slippery :- wet.
";

    const TWIN_LISTING: &str = "\
0.5::u1. 0.7::u2. 0.1::u3. 0.6::u4.
szn_spr_sum__e :- u1. sprinkler__e :- szn_spr_sum__e, u2.
rain__e :- szn_spr_sum__e, u3.    rain__e :- \\+szn_spr_sum__e, u4.
wet__e :- rain__e. wet__e :- sprinkler__e. slippery__e :- wet__e.
szn_spr_sum__i :- u1.
rain__i :- szn_spr_sum__i, u3. rain__i :- \\+szn_spr_sum__i, u4.
wet__i :- rain__i.  wet__i :- sprinkler__i. slippery__i :- wet__i.
";

    fn a(s: &str) -> Atom {
        Atom::new(s).unwrap()
    }

    fn lits(ls: &[Literal]) -> LiteralSet {
        LiteralSet::from_literals(ls.iter().cloned()).unwrap()
    }

    #[test]
    fn switch_sprinkler_off() {
        let p = parse_problog(SPRINKLER).unwrap();
        let q = intervene(&p, &lits(&[a("sprinkler").neg()])).unwrap();
        assert_eq!(q.clauses.len(), 6);
        assert!(q.clauses.iter().all(|c| c.head != a("sprinkler")));
        assert_eq!(q.alphabet, p.alphabet);
    }

    #[test]
    fn force_wet() {
        let p = parse_problog(SPRINKLER).unwrap();
        let q = intervene(&p, &lits(&[a("wet").pos()])).unwrap();
        let wet_atom = a("wet");
        let wet: Vec<_> = q.rules_for(&wet_atom).collect();
        assert_eq!(wet, vec![&Clause::fact(a("wet"))]);
        assert_eq!(q.clauses.len(), 6);
    }

    #[test]
    fn empty_intervention_is_identity() {
        let p = parse_problog(SPRINKLER).unwrap();
        assert_eq!(intervene(&p, &LiteralSet::new()).unwrap(), p);
    }

    #[test]
    fn absent_atoms_and_externals() {
        let p = parse_problog(SPRINKLER).unwrap();
        let q = intervene(&p, &lits(&[a("fog").pos(), a("hail").neg()])).unwrap();
        assert!(q.alphabet.is_internal(&a("fog")));
        assert!(!q.alphabet.contains(&a("hail")));
        assert!(matches!(
            intervene(&p, &lits(&[a("u1").pos()])),
            Err(Error::ExternalIntervention(_))
        ));
    }

    #[test]
    fn sprinkler_twin_matches_listing() {
        let p = parse_problog(SPRINKLER).unwrap();
        let q = CounterfactualQuery::new(
            Formula::atom(&a("slippery")),
            lits(&[a("sprinkler").pos(), a("slippery").pos()]),
            lits(&[a("sprinkler").neg()]),
        );
        let t = twin(&p, &q).unwrap();
        let expected = parse_problog(TWIN_LISTING).unwrap();
        assert_eq!(t.program, expected);
        assert_eq!(t.program.clauses.len(), 13);
        assert_eq!(t.program.facts.len(), 4);
        assert_eq!(t.query, Formula::atom(&a("slippery__i")));
        assert_eq!(
            t.evidence,
            lits(&[a("slippery__e").pos(), a("sprinkler__e").pos()])
        );
        let text = print_problog(&t.program);
        assert!(text.contains("rain__i :- szn_spr_sum__i, u3.\n"));
        assert!(text.contains("szn_spr_sum__e :- u1.\n"));
        assert_eq!(
            check_unique_supported_models(&t.program),
            Classification::Acyclic
        );
    }

    #[test]
    fn plain_twin_preserves_marginals() {
        let p = parse_problog(SPRINKLER).unwrap();
        for name in ["slippery", "rain", "sprinkler"] {
            let q = CounterfactualQuery::marginal(Formula::atom(&a(name)));
            let t = twin(&p, &q).unwrap();
            assert_eq!(t.program.clauses.len(), 14);
            let lhs: BigRational = marginal(&t.program, &t.query).unwrap();
            let rhs: BigRational = marginal(&p, &q.query).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn negative_intervention_on_ruleless_atom() {
        let p = parse_problog("0.5::u. h :- g, u.").unwrap();
        let base = twin(&p, &CounterfactualQuery::marginal(Formula::True)).unwrap();
        let q = CounterfactualQuery::new(Formula::True, LiteralSet::new(), lits(&[a("g").neg()]));
        assert_eq!(twin(&p, &q).unwrap().program, base.program);
    }

    #[test]
    fn suffix_collisions() {
        let p = parse_problog("0.5::u. x__e :- u.").unwrap();
        assert!(matches!(
            twin(&p, &CounterfactualQuery::marginal(Formula::True)),
            Err(Error::SuffixCollision(_))
        ));
        let p = parse_problog("0.5::x__i. x :- x__i.").unwrap();
        assert!(matches!(
            twin(&p, &CounterfactualQuery::marginal(Formula::True)),
            Err(Error::SuffixCollision(_))
        ));
    }
}
