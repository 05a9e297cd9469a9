use num::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use whatif_core::lpad::{lpad_distribution, lpad_of_problog, prob_of_lpad};
use whatif_core::model::{Formula, LiteralSet, Program};
use whatif_core::parser::{parse_lpad, parse_problog, print_lpad, print_problog};
use whatif_core::random::{
    random_formula, random_lpad, random_program, random_query, ProgramShape,
};
use whatif_core::semantics::{conditional_by_enumeration, marginal, Budget};
use whatif_core::transforms::intervene;
use whatif_core::wmc;

fn program() -> impl Strategy<Value = (Program, u64)> {
    any::<u64>().prop_map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (random_program(&mut rng, ProgramShape::default()), seed)
    })
}

fn all_atoms(p: &Program) -> Vec<whatif_core::Atom> {
    p.alphabet
        .internals
        .iter()
        .chain(&p.alphabet.externals)
        .cloned()
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_is_identity((p, _) in program()) {
        prop_assert_eq!(parse_problog(&print_problog(&p)).unwrap(), p);
    }

    #[test]
    fn lpad_print_then_parse_is_identity(seed in any::<u64>()) {
        let l = random_lpad(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(parse_lpad(&print_lpad(&l)).unwrap(), l);
    }

    #[test]
    fn intervening_twice_changes_nothing((p, seed) in program()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let q = random_query(&mut rng, &p, 0, 3);
        let once = intervene(&p, &q.interventions).unwrap();
        let twice = intervene(&once, &q.interventions).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn disjoint_interventions_commute((p, seed) in program()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let q = random_query(&mut rng, &p, 0, 4);
        let lits: Vec<_> = q.interventions.literals().collect();
        let (left, right) = lits.split_at(lits.len() / 2);
        let a = LiteralSet::from_literals(left.iter().cloned()).unwrap();
        let b = LiteralSet::from_literals(right.iter().cloned()).unwrap();
        let ab = intervene(&intervene(&p, &a).unwrap(), &b).unwrap();
        let ba = intervene(&intervene(&p, &b).unwrap(), &a).unwrap();
        prop_assert_eq!(&ab, &ba);
        prop_assert_eq!(ab, intervene(&p, &q.interventions).unwrap());
    }

    #[test]
    fn wmc_matches_enumeration((p, seed) in program()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let phi = random_formula(&mut rng, &all_atoms(&p), 2);
        let e: BigRational = marginal(&p, &phi).unwrap();
        let w: BigRational = wmc::conditional(&p, &phi, &LiteralSet::new()).unwrap();
        prop_assert_eq!(&e, &w);
        let f: f64 = wmc::conditional(&p, &phi, &LiteralSet::new()).unwrap();
        prop_assert!((f - num::ToPrimitive::to_f64(&e).unwrap()).abs() <= 1e-9);

        let q = random_query(&mut rng, &p, 3, 0);
        let e: BigRational = conditional_by_enumeration(&p, &phi, &q.evidence, &Budget::unlimited()).unwrap();
        let w: BigRational = wmc::conditional(&p, &phi, &q.evidence).unwrap();
        prop_assert_eq!(e, w);
    }

    #[test]
    fn wmc_complements_sum_to_one((p, seed) in program()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let phi = random_formula(&mut rng, &all_atoms(&p), 2);
        let yes: BigRational = wmc::conditional(&p, &phi, &LiteralSet::new()).unwrap();
        let no: BigRational = wmc::conditional(&p, &phi.clone().negate(), &LiteralSet::new()).unwrap();
        prop_assert_eq!(yes + no, BigRational::from_integer(1.into()));
    }

    #[test]
    fn translations_preserve_marginals(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_lpad(&mut rng);
        let atoms: Vec<_> = l.alphabet.iter().cloned().collect();
        let phi = random_formula(&mut rng, &atoms, 2);
        let direct: BigRational = lpad_distribution(&l, &phi).unwrap();
        let translated: BigRational = marginal(&prob_of_lpad(&l).unwrap(), &phi).unwrap();
        prop_assert_eq!(direct, translated);

        let p = random_program(&mut rng, ProgramShape::default());
        let phi = random_formula(&mut rng, &all_atoms(&p), 2);
        let direct: BigRational = marginal(&p, &phi).unwrap();
        let lifted: BigRational = lpad_distribution(&lpad_of_problog(&p), &phi).unwrap();
        prop_assert_eq!(direct, lifted);
    }
}

#[test]
fn formula_constants() {
    let p = parse_problog("0.5::u. a :- u.").unwrap();
    let t: BigRational = wmc::conditional(&p, &Formula::True, &LiteralSet::new()).unwrap();
    let f: BigRational = wmc::conditional(&p, &Formula::False, &LiteralSet::new()).unwrap();
    assert_eq!(
        (t, f),
        (
            BigRational::from_integer(1.into()),
            BigRational::from_integer(0.into())
        )
    );
}
