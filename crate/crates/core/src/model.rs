//! Shared data model: atoms, literals, clauses, random facts, programs,
//! query formulas and counterfactual queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact probability.
pub type Prob = BigRational;

/// Builds the exact probability `num/den`.
pub fn prob(num: i64, den: i64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A propositional symbol. Names follow `[a-z][a-zA-Z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Result<Atom> {
        if is_valid_name(name) {
            Ok(Atom(Arc::from(name)))
        } else {
            Err(Error::InvalidAtom(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Appends `suffix` to the name. The result is valid whenever `suffix`
    /// consists of identifier characters.
    pub fn with_suffix(&self, suffix: &str) -> Atom {
        Atom(Arc::from(format!("{}{}", self.0, suffix)))
    }

    pub fn pos(&self) -> Literal {
        Literal::new(self.clone(), true)
    }

    pub fn neg(&self) -> Literal {
        Literal::new(self.clone(), false)
    }
}

fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<&str> for Atom {
    type Error = Error;

    fn try_from(name: &str) -> Result<Atom> {
        Atom::new(name)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: Atom, positive: bool) -> Literal {
        Literal { atom, positive }
    }

    pub fn negated(&self) -> Literal {
        Literal::new(self.atom.clone(), !self.positive)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "\\+{}", self.atom)
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `head :- body.` The body is a set; a body holding both `p` and `\+p`
/// can never fire.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Clause {
    pub head: Atom,
    pub body: BTreeSet<Literal>,
}

impl Clause {
    pub fn new(head: Atom, body: impl IntoIterator<Item = Literal>) -> Clause {
        Clause {
            head,
            body: body.into_iter().collect(),
        }
    }

    pub fn fact(head: Atom) -> Clause {
        Clause {
            head,
            body: BTreeSet::new(),
        }
    }

    pub fn is_contradictory(&self) -> bool {
        self.body
            .iter()
            .any(|l| l.positive && self.body.contains(&l.negated()))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RandomFact {
    pub atom: Atom,
    pub prob: Prob,
}

impl RandomFact {
    pub fn new(atom: Atom, prob: Prob) -> RandomFact {
        RandomFact { atom, prob }
    }
}

#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Alphabet {
    pub internals: BTreeSet<Atom>,
    pub externals: BTreeSet<Atom>,
}

impl Alphabet {
    pub fn contains(&self, atom: &Atom) -> bool {
        self.internals.contains(atom) || self.externals.contains(atom)
    }

    pub fn is_external(&self, atom: &Atom) -> bool {
        self.externals.contains(atom)
    }

    pub fn is_internal(&self, atom: &Atom) -> bool {
        self.internals.contains(atom)
    }
}

/// A propositional ProbLog program: a logic program over internal atoms
/// plus independent random facts over external atoms.
#[derive(Clone, Default, Debug)]
pub struct Program {
    pub alphabet: Alphabet,
    pub clauses: Vec<Clause>,
    pub facts: Vec<RandomFact>,
}

impl Program {
    pub fn new(alphabet: Alphabet, clauses: Vec<Clause>, facts: Vec<RandomFact>) -> Program {
        Program {
            alphabet,
            clauses,
            facts,
        }
    }

    /// Builds a program whose alphabet is inferred: fact atoms are external,
    /// every other mentioned atom is internal.
    pub fn from_parts(clauses: Vec<Clause>, facts: Vec<RandomFact>) -> Program {
        let externals: BTreeSet<Atom> = facts.iter().map(|f| f.atom.clone()).collect();
        let mut internals = BTreeSet::new();
        for c in &clauses {
            for a in std::iter::once(&c.head).chain(c.body.iter().map(|l| &l.atom)) {
                if !externals.contains(a) {
                    internals.insert(a.clone());
                }
            }
        }
        Program {
            alphabet: Alphabet {
                internals,
                externals,
            },
            clauses,
            facts,
        }
    }

    /// Probability of an external atom; externals without a fact are 0.
    pub fn fact_prob(&self, atom: &Atom) -> Prob {
        self.facts
            .iter()
            .find(|f| &f.atom == atom)
            .map(|f| f.prob.clone())
            .unwrap_or_else(Prob::zero)
    }

    /// Sorted external atoms with their probabilities.
    pub fn external_probs(&self) -> Vec<(Atom, Prob)> {
        self.alphabet
            .externals
            .iter()
            .map(|a| (a.clone(), self.fact_prob(a)))
            .collect()
    }

    pub fn rules_for<'a>(&'a self, head: &'a Atom) -> impl Iterator<Item = &'a Clause> + 'a {
        self.clauses.iter().filter(move |c| &c.head == head)
    }

    fn sorted_clauses(&self) -> Vec<&Clause> {
        let mut v: Vec<&Clause> = self.clauses.iter().collect();
        v.sort();
        v
    }

    fn sorted_facts(&self) -> Vec<&RandomFact> {
        let mut v: Vec<&RandomFact> = self.facts.iter().collect();
        v.sort();
        v
    }
}

/// Structural equality: equal alphabets, equal clause multisets and equal
/// fact sets. Clause order is irrelevant.
impl PartialEq for Program {
    fn eq(&self, other: &Program) -> bool {
        self.alphabet == other.alphabet
            && self.sorted_clauses() == other.sorted_clauses()
            && self.sorted_facts() == other.sorted_facts()
    }
}

impl Eq for Program {}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiagnosticKind {
    ExternalHead,
    DuplicateFact,
    ProbabilityOutOfRange,
    FactOnInternal,
    AlphabetOverlap,
    UnknownAtom,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every program invariant and reports each violation. Never fails.
pub fn validate_program(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |kind, message: String| out.push(Diagnostic { kind, message });

    for a in p.alphabet.internals.intersection(&p.alphabet.externals) {
        push(
            DiagnosticKind::AlphabetOverlap,
            format!("atom `{a}` is both internal and external"),
        );
    }
    for c in &p.clauses {
        if p.alphabet.is_external(&c.head) {
            push(
                DiagnosticKind::ExternalHead,
                format!("external atom in head: `{}`", c.head),
            );
        } else if !p.alphabet.contains(&c.head) {
            push(
                DiagnosticKind::UnknownAtom,
                format!("atom `{}` is not in the alphabet", c.head),
            );
        }
        for l in &c.body {
            if !p.alphabet.contains(&l.atom) {
                push(
                    DiagnosticKind::UnknownAtom,
                    format!("atom `{}` is not in the alphabet", l.atom),
                );
            }
        }
    }
    let mut seen = BTreeSet::new();
    for f in &p.facts {
        if !seen.insert(&f.atom) {
            push(
                DiagnosticKind::DuplicateFact,
                format!("duplicate random fact for `{}`", f.atom),
            );
        }
        if f.prob.is_negative() || f.prob > Prob::one() {
            push(
                DiagnosticKind::ProbabilityOutOfRange,
                format!("probability of `{}` is outside [0, 1]", f.atom),
            );
        }
        if !p.alphabet.is_external(&f.atom) {
            push(
                DiagnosticKind::FactOnInternal,
                format!("random fact on non-external atom `{}`", f.atom),
            );
        }
    }
    out
}

/// Propositional query formula.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(a: &Atom) -> Formula {
        Formula::Atom(a.clone())
    }

    pub fn literal(l: &Literal) -> Formula {
        if l.positive {
            Formula::Atom(l.atom.clone())
        } else {
            Formula::Not(Box::new(Formula::Atom(l.atom.clone())))
        }
    }

    pub fn negate(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    /// Conjunction of a literal set; the empty set is `True`.
    pub fn conjunction(lits: &LiteralSet) -> Formula {
        Formula::And(lits.literals().map(|l| Formula::literal(&l)).collect())
    }

    pub fn eval(&self, value: &dyn Fn(&Atom) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    pub fn rename(&self, f: &dyn Fn(&Atom) -> Atom) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(f(a)),
            Formula::Not(g) => Formula::Not(Box::new(g.rename(f))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.rename(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.rename(f)).collect()),
        }
    }
}

/// Prints in the surface syntax accepted by the formula parser:
/// `,` for conjunction, `;` for disjunction, `\+` for negation.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => match **g {
                Formula::Atom(_) | Formula::True | Formula::False | Formula::Not(_) => {
                    write!(f, "\\+{g}")
                }
                _ => write!(f, "\\+({g})"),
            },
            Formula::And(gs) if gs.is_empty() => f.write_str("true"),
            Formula::Or(gs) if gs.is_empty() => f.write_str("false"),
            Formula::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match g {
                        Formula::Or(hs) if hs.len() > 1 => write!(f, "({g})")?,
                        _ => write!(f, "{g}")?,
                    }
                }
                Ok(())
            }
            Formula::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
        }
    }
}

/// A consistent set of literals, kept as a map from atom to truth value.
#[derive(Clone, PartialEq, Eq, Default, Debug, Hash, PartialOrd, Ord)]
pub struct LiteralSet(BTreeMap<Atom, bool>);

impl LiteralSet {
    pub fn new() -> LiteralSet {
        LiteralSet::default()
    }

    /// Fails with [`Error::Inconsistent`] if an atom occurs with both signs.
    pub fn from_literals(lits: impl IntoIterator<Item = Literal>) -> Result<LiteralSet> {
        let mut map = BTreeMap::new();
        for l in lits {
            if let Some(&prev) = map.get(&l.atom) {
                if prev != l.positive {
                    return Err(Error::Inconsistent(l.atom));
                }
            }
            map.insert(l.atom, l.positive);
        }
        Ok(LiteralSet(map))
    }

    pub fn insert(&mut self, l: Literal) -> Result<()> {
        match self.0.get(&l.atom) {
            Some(&prev) if prev != l.positive => Err(Error::Inconsistent(l.atom)),
            _ => {
                self.0.insert(l.atom, l.positive);
                Ok(())
            }
        }
    }

    pub fn get(&self, atom: &Atom) -> Option<bool> {
        self.0.get(atom).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, bool)> + '_ {
        self.0.iter().map(|(a, &v)| (a, v))
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.0.iter().map(|(a, &v)| Literal::new(a.clone(), v))
    }

    /// True iff every literal holds under `value`.
    pub fn holds(&self, value: &dyn Fn(&Atom) -> bool) -> bool {
        self.0.iter().all(|(a, &v)| value(a) == v)
    }

    pub fn rename(&self, f: &dyn Fn(&Atom) -> Atom) -> LiteralSet {
        LiteralSet(self.0.iter().map(|(a, &v)| (f(a), v)).collect())
    }
}

impl fmt::Display for LiteralSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.literals().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Probability of `query` given that `evidence` was observed, had the
/// `interventions` been carried out. Evidence and interventions may
/// contradict each other.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CounterfactualQuery {
    pub query: Formula,
    pub evidence: LiteralSet,
    pub interventions: LiteralSet,
}

impl CounterfactualQuery {
    pub fn new(query: Formula, evidence: LiteralSet, interventions: LiteralSet) -> Self {
        CounterfactualQuery {
            query,
            evidence,
            interventions,
        }
    }

    pub fn marginal(query: Formula) -> Self {
        CounterfactualQuery::new(query, LiteralSet::new(), LiteralSet::new())
    }
}
