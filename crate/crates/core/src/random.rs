//! Seeded generators of small random instances for property tests and
//! cross-checks between the inference procedures.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lpad::{LpadClause, LpadProgram};
use crate::model::{
    prob, Atom, Clause, CounterfactualQuery, Formula, Literal, LiteralSet, Prob, Program,
    RandomFact,
};
use crate::semantics::marginal;

/// Size bounds for [`random_program`].
#[derive(Clone, Copy, Debug)]
pub struct ProgramShape {
    pub max_internals: usize,
    pub max_externals: usize,
    pub max_clauses: usize,
    pub max_body: usize,
}

impl Default for ProgramShape {
    fn default() -> Self {
        ProgramShape {
            max_internals: 8,
            max_externals: 10,
            max_clauses: 12,
            max_body: 3,
        }
    }
}

fn atom(prefix: &str, i: usize) -> Atom {
    Atom::new(&format!("{prefix}{i}")).expect("generated names are valid")
}

/// Mostly tenths, sometimes a certain or impossible fact or a
/// non-decimal fraction.
pub fn random_prob<R: Rng>(rng: &mut R) -> Prob {
    match rng.gen_range(0..20) {
        0 => prob(0, 1),
        1 => prob(1, 1),
        2 => prob(rng.gen_range(1..3), 3),
        3 => prob(rng.gen_range(1..7), 7),
        _ => prob(rng.gen_range(1..10), 10),
    }
}

/// An acyclic program over internals `a0, a1, ...` and externals
/// `u0, u1, ...`. A rule for `a_h` only mentions internals `a_j` with
/// `j < h`.
pub fn random_program<R: Rng>(rng: &mut R, shape: ProgramShape) -> Program {
    let n_ext = rng.gen_range(1..=shape.max_externals.max(1));
    let n_int = rng.gen_range(1..=shape.max_internals.max(1));
    let facts: Vec<RandomFact> = (0..n_ext)
        .map(|i| RandomFact::new(atom("u", i), random_prob(rng)))
        .collect();
    let n_clauses = rng.gen_range(1..=shape.max_clauses.max(1));
    let clauses = (0..n_clauses)
        .map(|_| {
            let h = rng.gen_range(0..n_int);
            let len = rng.gen_range(0..=shape.max_body);
            let body: Vec<Literal> = (0..len)
                .map(|_| {
                    let a = if h > 0 && rng.gen_bool(0.5) {
                        atom("a", rng.gen_range(0..h))
                    } else {
                        atom("u", rng.gen_range(0..n_ext))
                    };
                    Literal::new(a, rng.gen_bool(0.7))
                })
                .collect();
            Clause::new(atom("a", h), body)
        })
        .collect();
    Program::from_parts(clauses, facts)
}

/// A formula of the given nesting depth over `atoms`.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[Atom], depth: usize) -> Formula {
    if atoms.is_empty() {
        return if rng.gen_bool(0.5) {
            Formula::True
        } else {
            Formula::False
        };
    }
    let leaf = |rng: &mut R| {
        let a = atoms.choose(rng).expect("non-empty");
        Formula::literal(&Literal::new(a.clone(), rng.gen_bool(0.7)))
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..8) {
        0 | 1 => leaf(rng),
        2 => random_formula(rng, atoms, depth - 1).negate(),
        3 => {
            if rng.gen_bool(0.5) {
                Formula::True
            } else {
                Formula::False
            }
        }
        k => {
            let parts = (0..rng.gen_range(2..=3))
                .map(|_| random_formula(rng, atoms, depth - 1))
                .collect();
            if k % 2 == 0 {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
    }
}

/// Up to `max` literals over distinct atoms of `pool`.
fn random_literals<R: Rng>(rng: &mut R, pool: &[Atom], max: usize) -> LiteralSet {
    let n = rng.gen_range(0..=max);
    let mut out = LiteralSet::new();
    for a in pool.choose_multiple(rng, n) {
        out.insert(Literal::new(a.clone(), rng.gen_bool(0.5)))
            .expect("distinct atoms");
    }
    out
}

/// A counterfactual query on `p` with up to `max_evidence` evidence
/// literals of positive probability and up to `max_interventions`
/// interventions on internal atoms.
pub fn random_query<R: Rng>(
    rng: &mut R,
    p: &Program,
    max_evidence: usize,
    max_interventions: usize,
) -> CounterfactualQuery {
    let internals: Vec<Atom> = p.alphabet.internals.iter().cloned().collect();
    let all: Vec<Atom> = internals
        .iter()
        .chain(&p.alphabet.externals)
        .cloned()
        .collect();
    let query = random_formula(rng, &all, 2);
    let interventions = random_literals(rng, &internals, max_interventions);
    let mut evidence = LiteralSet::new();
    for _ in 0..20 {
        let candidate = random_literals(rng, &all, max_evidence);
        let pe: Prob =
            marginal(p, &Formula::conjunction(&candidate)).expect("small acyclic program");
        if pe != prob(0, 1) {
            evidence = candidate;
            break;
        }
    }
    CounterfactualQuery::new(query, evidence, interventions)
}

/// An acyclic LPAD over atoms `b0, b1, ...` with at most four clauses of
/// at most two heads each. Body atoms precede every head atom.
pub fn random_lpad<R: Rng>(rng: &mut R) -> LpadProgram {
    const ATOMS: usize = 6;
    let n = rng.gen_range(1..=4);
    let clauses = (0..n)
        .map(|_| {
            let first = rng.gen_range(0..ATOMS);
            let mut heads = vec![first];
            if rng.gen_bool(0.5) {
                let second = rng.gen_range(0..ATOMS);
                if second != first {
                    heads.push(second);
                }
            }
            let low = *heads.iter().min().expect("non-empty");
            let mut left = 10;
            let head = heads
                .into_iter()
                .map(|h| {
                    let tenths = if rng.gen_range(0..6) == 0 {
                        left
                    } else {
                        rng.gen_range(0..=left)
                    };
                    left -= tenths;
                    (atom("b", h), prob(tenths, 10))
                })
                .collect();
            let body: Vec<Literal> = if low == 0 {
                Vec::new()
            } else {
                let len = rng.gen_range(0..=2);
                (0..len)
                    .map(|_| Literal::new(atom("b", rng.gen_range(0..low)), rng.gen_bool(0.7)))
                    .collect()
            };
            LpadClause::new(head, body)
        })
        .collect();
    LpadProgram::new(clauses)
}

/// A counterfactual query over the atoms of `p` whose evidence has positive
/// probability.
pub fn random_lpad_query<R: Rng>(rng: &mut R, p: &LpadProgram) -> CounterfactualQuery {
    let atoms: Vec<Atom> = p.alphabet.iter().cloned().collect();
    let query = random_formula(rng, &atoms, 2);
    let interventions = random_literals(rng, &atoms, 2);
    let mut evidence = LiteralSet::new();
    for _ in 0..20 {
        let candidate = random_literals(rng, &atoms, 2);
        let pe: Prob = crate::lpad::lpad_distribution(p, &Formula::conjunction(&candidate))
            .expect("small LPAD");
        if pe != prob(0, 1) {
            evidence = candidate;
            break;
        }
    }
    CounterfactualQuery::new(query, evidence, interventions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{check_unique_supported_models, Classification};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn programs_are_acyclic_and_deterministic() {
        for seed in 0..100 {
            let p = random_program(
                &mut ChaCha8Rng::seed_from_u64(seed),
                ProgramShape::default(),
            );
            assert_eq!(check_unique_supported_models(&p), Classification::Acyclic);
            assert!(crate::model::validate_program(&p).is_empty());
            assert!(p.alphabet.externals.len() <= 10);
            assert!(p.clauses.len() <= 12);
            let again = random_program(
                &mut ChaCha8Rng::seed_from_u64(seed),
                ProgramShape::default(),
            );
            assert_eq!(p, again);
        }
    }

    #[test]
    fn queries_have_possible_evidence() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_program(&mut rng, ProgramShape::default());
            let q = random_query(&mut rng, &p, 2, 2);
            let pe: Prob = marginal(&p, &Formula::conjunction(&q.evidence)).unwrap();
            assert!(pe > prob(0, 1));
            assert!(q.interventions.atoms().all(|a| p.alphabet.is_internal(a)));
        }
    }

    #[test]
    fn lpads_are_valid() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_lpad(&mut rng);
            p.validate().unwrap();
            assert!(p.clauses.len() <= 4 && p.clauses.iter().all(|c| c.head.len() <= 2));
            random_lpad_query(&mut rng, &p);
        }
    }
}
