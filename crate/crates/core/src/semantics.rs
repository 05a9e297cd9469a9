//! Logic-program layer: dependency analysis, stratified minimal models and
//! the possible-world semantics by exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use num::One;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};
use crate::model::{Atom, Formula, LiteralSet, Prob, Program};
use crate::weight::Weight;

/// Most non-degenerate externals [`marginal`] will enumerate.
pub const MAX_ENUMERATED_EXTERNALS: usize = 30;

/// Wall-clock limit shared by the enumerators and the model counter.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget { deadline: None }
    }

    pub fn with_limit(limit: Duration) -> Budget {
        Budget {
            deadline: Some(Instant::now() + limit),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }
}

/// Internal atoms as vertices, one signed edge `body atom -> head` per
/// body literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    pub vertices: BTreeSet<Atom>,
    /// `(from, to, positive)`.
    pub edges: BTreeSet<(Atom, Atom, bool)>,
}

impl DependencyGraph {
    /// Strongly connected components, bodies before heads.
    pub fn components(&self) -> Vec<Vec<Atom>> {
        let mut g: DiGraph<Atom, bool> = DiGraph::new();
        let mut idx: BTreeMap<&Atom, NodeIndex> = BTreeMap::new();
        for v in &self.vertices {
            idx.insert(v, g.add_node(v.clone()));
        }
        for (from, to, sign) in &self.edges {
            g.add_edge(idx[from], idx[to], *sign);
        }
        let mut sccs = tarjan_scc(&g);
        sccs.reverse();
        sccs.into_iter()
            .map(|c| {
                let mut atoms: Vec<Atom> = c.into_iter().map(|n| g[n].clone()).collect();
                atoms.sort();
                atoms
            })
            .collect()
    }

    fn is_recursive(&self, scc: &[Atom]) -> bool {
        scc.len() > 1
            || self
                .edges
                .iter()
                .any(|(f, t, _)| f == &scc[0] && t == &scc[0])
    }
}

pub fn dependency_graph(p: &Program) -> DependencyGraph {
    let mut vertices: BTreeSet<Atom> = p.alphabet.internals.clone();
    let mut edges = BTreeSet::new();
    for c in &p.clauses {
        vertices.insert(c.head.clone());
        for l in &c.body {
            if p.alphabet.is_external(&l.atom) {
                continue;
            }
            vertices.insert(l.atom.clone());
            edges.insert((l.atom.clone(), c.head.clone(), l.positive));
        }
    }
    DependencyGraph { vertices, edges }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Acyclic,
    /// Recursive, but no cycle runs through negation.
    StratifiedCyclic,
    /// The atoms of one component that is recursive through negation.
    NegativeCycle(Vec<Atom>),
}

impl Classification {
    pub fn into_result(self) -> Result<Classification> {
        match self {
            Classification::NegativeCycle(atoms) => Err(Error::NegativeCycle(atoms)),
            c => Ok(c),
        }
    }
}

/// Syntactic check for well-defined semantics: acyclic programs have
/// unique supported models under every intervention.
pub fn check_unique_supported_models(p: &Program) -> Classification {
    classify(&dependency_graph(p))
}

fn classify(g: &DependencyGraph) -> Classification {
    let mut cyclic = false;
    for scc in g.components() {
        if !g.is_recursive(&scc) {
            continue;
        }
        cyclic = true;
        let members: BTreeSet<&Atom> = scc.iter().collect();
        let negative = g
            .edges
            .iter()
            .any(|(f, t, pos)| !pos && members.contains(f) && members.contains(t));
        if negative {
            return Classification::NegativeCycle(scc);
        }
    }
    if cyclic {
        Classification::StratifiedCyclic
    } else {
        Classification::Acyclic
    }
}

/// A truth assignment to the external atoms of a program.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WorldAssignment(pub BTreeMap<Atom, bool>);

impl WorldAssignment {
    pub fn get(&self, atom: &Atom) -> bool {
        self.0.get(atom).copied().unwrap_or(false)
    }
}

impl FromIterator<(Atom, bool)> for WorldAssignment {
    fn from_iter<I: IntoIterator<Item = (Atom, bool)>>(iter: I) -> Self {
        WorldAssignment(iter.into_iter().collect())
    }
}

struct Rule {
    head: usize,
    body: Vec<(usize, bool)>,
}

struct Stratum {
    rules: Vec<Rule>,
    atoms: Vec<usize>,
    recursive: bool,
}

/// A program compiled for repeated model computation. Atom indices:
/// externals first (sorted), then internals (sorted).
pub struct ModelEvaluator {
    index: HashMap<Atom, usize>,
    atoms: Vec<Atom>,
    external_count: usize,
    strata: Vec<Stratum>,
    pub classification: Classification,
}

impl ModelEvaluator {
    /// Fails with [`Error::NegativeCycle`] when no stratification exists.
    pub fn new(p: &Program) -> Result<ModelEvaluator> {
        let graph = dependency_graph(p);
        let classification = classify(&graph).into_result()?;

        let mut atoms: Vec<Atom> = p.alphabet.externals.iter().cloned().collect();
        let external_count = atoms.len();
        atoms.extend(
            graph
                .vertices
                .iter()
                .filter(|a| !p.alphabet.is_external(a))
                .cloned(),
        );
        let index: HashMap<Atom, usize> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();

        let mut rules_by_head: HashMap<usize, Vec<Rule>> = HashMap::new();
        for c in &p.clauses {
            if c.is_contradictory() {
                continue;
            }
            let head = index[&c.head];
            let body = c
                .body
                .iter()
                .map(|l| (index[&l.atom], l.positive))
                .collect();
            rules_by_head
                .entry(head)
                .or_default()
                .push(Rule { head, body });
        }
        let strata = graph
            .components()
            .into_iter()
            .map(|scc| {
                let recursive = graph.is_recursive(&scc);
                let atoms: Vec<usize> = scc.iter().map(|a| index[a]).collect();
                let rules = atoms
                    .iter()
                    .flat_map(|h| rules_by_head.remove(h).unwrap_or_default())
                    .collect();
                Stratum {
                    rules,
                    atoms,
                    recursive,
                }
            })
            .collect();
        Ok(ModelEvaluator {
            index,
            atoms,
            external_count,
            strata,
            classification,
        })
    }

    pub fn external_count(&self) -> usize {
        self.external_count
    }

    pub fn atom_index(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn value_buffer(&self) -> Vec<bool> {
        vec![false; self.atoms.len()]
    }

    /// Computes the stratified model in place; `values[..external_count]`
    /// must already hold the world.
    pub fn evaluate(&self, values: &mut [bool]) {
        let holds = |values: &[bool], r: &Rule| r.body.iter().all(|&(i, pos)| values[i] == pos);
        for s in &self.strata {
            for &a in &s.atoms {
                values[a] = false;
            }
            if !s.recursive {
                for r in &s.rules {
                    if !values[r.head] && holds(values, r) {
                        values[r.head] = true;
                    }
                }
                continue;
            }
            loop {
                let mut changed = false;
                for r in &s.rules {
                    if !values[r.head] && holds(values, r) {
                        values[r.head] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }

    /// Looks up an atom in a computed model. Atoms outside the program are
    /// false.
    pub fn value(&self, values: &[bool], a: &Atom) -> bool {
        self.index.get(a).map(|&i| values[i]).unwrap_or(false)
    }

    pub fn satisfies(&self, values: &[bool], f: &Formula) -> bool {
        f.eval(&|a| self.value(values, a))
    }

    pub fn satisfies_all(&self, values: &[bool], lits: &LiteralSet) -> bool {
        lits.holds(&|a| self.value(values, a))
    }
}

/// Minimal (perfect) model of the program joined with the true externals
/// of `w`: strata in dependency order, least fixpoint within each.
pub fn minimal_model(p: &Program, w: &WorldAssignment) -> Result<BTreeMap<Atom, bool>> {
    let ev = ModelEvaluator::new(p)?;
    let mut values = ev.value_buffer();
    for (i, a) in ev.atoms[..ev.external_count].iter().enumerate() {
        values[i] = w.get(a);
    }
    ev.evaluate(&mut values);
    Ok(ev.atoms[ev.external_count..]
        .iter()
        .zip(&values[ev.external_count..])
        .map(|(a, &v)| (a.clone(), v))
        .collect())
}

/// Product over the externals of `p` of `prob` or `1 - prob`.
pub fn world_probability(p: &Program, w: &WorldAssignment) -> Prob {
    p.external_probs()
        .into_iter()
        .map(|(a, pr)| if w.get(&a) { pr } else { Prob::one() - pr })
        .fold(Prob::one(), |acc, x| acc * x)
}

/// Visits every possible world of positive probability with its weight and
/// computed model. Externals are enumerated in name order.
pub fn for_each_world<W: Weight>(
    p: &Program,
    ev: &ModelEvaluator,
    budget: &Budget,
    mut visit: impl FnMut(&[bool], &W),
) -> Result<()> {
    let probs: Vec<(W, W)> = p
        .alphabet
        .externals
        .iter()
        .map(|a| {
            let pr = p.fact_prob(a);
            (W::from_prob(&pr), W::from_prob(&(Prob::one() - pr)))
        })
        .collect();
    let free = probs
        .iter()
        .filter(|(t, f)| !t.is_zero() && !f.is_zero())
        .count();
    if free > MAX_ENUMERATED_EXTERNALS {
        return Err(Error::TooLarge {
            what: "uncertain externals",
            count: free,
            limit: MAX_ENUMERATED_EXTERNALS,
        });
    }
    let mut values = ev.value_buffer();
    let mut leaves = 0u64;
    enumerate(
        ev,
        &probs,
        0,
        W::one(),
        &mut values,
        budget,
        &mut leaves,
        &mut visit,
    )
}

#[allow(clippy::too_many_arguments)]
fn enumerate<W: Weight>(
    ev: &ModelEvaluator,
    probs: &[(W, W)],
    depth: usize,
    weight: W,
    values: &mut Vec<bool>,
    budget: &Budget,
    leaves: &mut u64,
    visit: &mut impl FnMut(&[bool], &W),
) -> Result<()> {
    if depth == probs.len() {
        *leaves += 1;
        if (*leaves).is_multiple_of(4096) {
            budget.check()?;
        }
        ev.evaluate(values);
        visit(values, &weight);
        return Ok(());
    }
    let (t, f) = &probs[depth];
    if !t.is_zero() {
        values[depth] = true;
        enumerate(
            ev,
            probs,
            depth + 1,
            weight.clone() * t.clone(),
            values,
            budget,
            leaves,
            visit,
        )?;
    }
    if !f.is_zero() {
        values[depth] = false;
        enumerate(
            ev,
            probs,
            depth + 1,
            weight * f.clone(),
            values,
            budget,
            leaves,
            visit,
        )?;
    }
    Ok(())
}

/// Probability of `phi`: the total weight of the worlds whose minimal
/// model satisfies it.
pub fn marginal<W: Weight>(p: &Program, phi: &Formula) -> Result<W> {
    marginal_within(p, phi, &Budget::unlimited())
}

pub fn marginal_within<W: Weight>(p: &Program, phi: &Formula, budget: &Budget) -> Result<W> {
    let ev = ModelEvaluator::new(p)?;
    let mut acc = W::Acc::default();
    for_each_world::<W>(p, &ev, budget, |values, w| {
        if ev.satisfies(values, phi) {
            W::accumulate(&mut acc, w.clone());
        }
    })?;
    Ok(W::total(acc))
}

/// `P(phi | evidence)` by enumeration.
pub fn conditional_by_enumeration<W: Weight>(
    p: &Program,
    phi: &Formula,
    evidence: &LiteralSet,
    budget: &Budget,
) -> Result<W> {
    let ev = ModelEvaluator::new(p)?;
    let mut num = W::Acc::default();
    let mut den = W::Acc::default();
    for_each_world::<W>(p, &ev, budget, |values, w| {
        if ev.satisfies_all(values, evidence) {
            W::accumulate(&mut den, w.clone());
            if ev.satisfies(values, phi) {
                W::accumulate(&mut num, w.clone());
            }
        }
    })?;
    let den = W::total(den);
    if den.is_zero() {
        return Err(Error::ZeroEvidence);
    }
    Ok(W::total(num) / den)
}
