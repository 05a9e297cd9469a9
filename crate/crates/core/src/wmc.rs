//! Weighted model counting backend.
//!
//! An acyclic program is translated to CNF by Clark completion (one
//! auxiliary variable per rule body with more than one literal), query
//! formulas are added with Tseitin auxiliaries, and the weighted count is
//! computed by an exact DPLL-style counter with unit propagation, dynamic
//! connected-component decomposition and a component cache.
//!
//! External atoms carry weights `(p, 1 - p)`, every other variable
//! `(1, 1)`. Because the completion of an acyclic program has exactly one
//! model per possible world, the weighted count of the CNF under a set of
//! assumptions is the probability of those assumptions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::num::NonZeroUsize;

use lru::LruCache;
use num::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::model::{Atom, Formula, LiteralSet, Prob, Program};
use crate::parser::format_prob;
use crate::semantics::{check_unique_supported_models, dependency_graph, Budget, Classification};
use crate::weight::Weight;

/// Default bound on cached components.
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 20;

/// Clauses over numbered variables with per-variable weights. Literals are
/// DIMACS-style nonzero integers; variables are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedCnf {
    pub var_count: usize,
    pub clauses: Vec<Vec<i32>>,
    /// `weights[v - 1] = (w_true, w_false)`.
    pub weights: Vec<(Prob, Prob)>,
    pub var_map: BTreeMap<Atom, u32>,
    true_var: Option<u32>,
}

impl WeightedCnf {
    pub fn new() -> WeightedCnf {
        WeightedCnf {
            var_count: 0,
            clauses: Vec::new(),
            weights: Vec::new(),
            var_map: BTreeMap::new(),
            true_var: None,
        }
    }

    pub fn new_var(&mut self, weights: (Prob, Prob)) -> u32 {
        self.var_count += 1;
        self.weights.push(weights);
        self.var_count as u32
    }

    fn aux_var(&mut self) -> u32 {
        self.new_var((Prob::one(), Prob::one()))
    }

    fn constant_true(&mut self) -> i32 {
        if let Some(v) = self.true_var {
            return v as i32;
        }
        let v = self.aux_var();
        self.clauses.push(vec![v as i32]);
        self.true_var = Some(v);
        v as i32
    }

    /// Literal standing for `atom`. Atoms unknown to the program are false
    /// (closed world) and get a fresh variable fixed by a unit clause.
    pub fn literal_for(&mut self, atom: &Atom) -> i32 {
        if let Some(&v) = self.var_map.get(atom) {
            return v as i32;
        }
        let v = self.aux_var();
        self.clauses.push(vec![-(v as i32)]);
        self.var_map.insert(atom.clone(), v);
        v as i32
    }

    /// Tseitin encoding: returns a literal equivalent to `f`. Auxiliaries
    /// are fully defined, so the count of any assumption set is unchanged.
    pub fn encode_formula(&mut self, f: &Formula) -> i32 {
        match f {
            Formula::True => self.constant_true(),
            Formula::False => -self.constant_true(),
            Formula::Atom(a) => self.literal_for(a),
            Formula::Not(g) => -self.encode_formula(g),
            Formula::And(gs) | Formula::Or(gs) => {
                let is_and = matches!(f, Formula::And(_));
                let kids: Vec<i32> = gs.iter().map(|g| self.encode_formula(g)).collect();
                match kids.len() {
                    0 if is_and => self.constant_true(),
                    0 => -self.constant_true(),
                    1 => kids[0],
                    _ => {
                        let g = self.aux_var() as i32;
                        // And: g -> k_i, (all k_i) -> g. Or is the dual.
                        let s = if is_and { 1 } else { -1 };
                        for &k in &kids {
                            self.clauses.push(vec![-s * g, s * k]);
                        }
                        let mut big: Vec<i32> = kids.iter().map(|&k| -s * k).collect();
                        big.push(s * g);
                        self.clauses.push(big);
                        g
                    }
                }
            }
        }
    }

    /// Literals for a set of atom/value pairs.
    pub fn literals_for(&mut self, lits: &LiteralSet) -> Vec<i32> {
        lits.iter()
            .map(|(a, v)| {
                let l = self.literal_for(a);
                if v {
                    l
                } else {
                    -l
                }
            })
            .collect()
    }

    /// Standard weighted model counting text format.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.var_count, self.clauses.len());
        for (atom, v) in &self.var_map {
            let _ = writeln!(out, "c atom {v} {atom}");
        }
        for (i, (t, f)) in self.weights.iter().enumerate() {
            let v = i + 1;
            let _ = writeln!(out, "c p weight {v} {} 0", decimal(t));
            let _ = writeln!(out, "c p weight -{v} {} 0", decimal(f));
        }
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

impl Default for WeightedCnf {
    fn default() -> Self {
        WeightedCnf::new()
    }
}

fn decimal(p: &Prob) -> String {
    let s = format_prob(p);
    if s.contains('/') {
        format!("{}", ToPrimitive::to_f64(p).unwrap_or(f64::NAN))
    } else {
        s
    }
}

/// Clark completion of an acyclic program.
pub fn to_weighted_cnf(p: &Program) -> Result<WeightedCnf> {
    match check_unique_supported_models(p) {
        Classification::Acyclic => {}
        Classification::NegativeCycle(atoms) => return Err(Error::NegativeCycle(atoms)),
        Classification::StratifiedCyclic => {
            let g = dependency_graph(p);
            let cycle = g
                .components()
                .into_iter()
                .find(|c| c.len() > 1 || g.edges.iter().any(|(f, t, _)| f == &c[0] && t == &c[0]))
                .unwrap_or_default();
            return Err(Error::NotAcyclic(cycle));
        }
    }
    let mut cnf = WeightedCnf::new();
    for (atom, pr) in p.external_probs() {
        let v = cnf.new_var((pr.clone(), Prob::one() - pr));
        cnf.var_map.insert(atom, v);
    }
    let internals: Vec<Atom> = dependency_graph(p)
        .vertices
        .into_iter()
        .filter(|a| !p.alphabet.is_external(a))
        .collect();
    for atom in &internals {
        let v = cnf.aux_var();
        cnf.var_map.insert(atom.clone(), v);
    }
    for head in &internals {
        let h = cnf.var_map[head] as i32;
        let mut supports: Vec<i32> = Vec::new();
        let mut always = false;
        for c in p.rules_for(head) {
            let body: Vec<i32> = c
                .body
                .iter()
                .map(|l| {
                    let v = cnf.var_map[&l.atom] as i32;
                    if l.positive {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            match body.len() {
                0 => always = true,
                1 => supports.push(body[0]),
                _ => {
                    let aux = cnf.aux_var() as i32;
                    for &l in &body {
                        cnf.clauses.push(vec![-aux, l]);
                    }
                    let mut big: Vec<i32> = body.iter().map(|&l| -l).collect();
                    big.push(aux);
                    cnf.clauses.push(big);
                    supports.push(aux);
                }
            }
        }
        if always {
            cnf.clauses.push(vec![h]);
            continue;
        }
        // h -> some support; each support -> h. No supports gives `-h`.
        let mut big = vec![-h];
        big.extend(&supports);
        cnf.clauses.push(big);
        for &s in &supports {
            cnf.clauses.push(vec![-s, h]);
        }
    }
    Ok(cnf)
}

/// Weighted model count of `cnf` restricted to assignments satisfying all
/// `assumptions`. Unsatisfiable inputs count 0.
pub fn wmc<W: Weight>(cnf: &WeightedCnf, assumptions: &[i32]) -> W {
    wmc_within(cnf, assumptions, &Budget::unlimited()).expect("unlimited budget")
}

pub fn wmc_within<W: Weight>(cnf: &WeightedCnf, assumptions: &[i32], budget: &Budget) -> Result<W> {
    run_with_large_stack(|| {
        Counter::<W>::new(cnf, DEFAULT_CACHE_CAPACITY, *budget).count(assumptions)
    })
}

/// `P(phi | evidence)` as a ratio of two weighted counts.
pub fn conditional<W: Weight>(p: &Program, phi: &Formula, evidence: &LiteralSet) -> Result<W> {
    conditional_within(p, phi, evidence, &Budget::unlimited())
}

pub fn conditional_within<W: Weight>(
    p: &Program,
    phi: &Formula,
    evidence: &LiteralSet,
    budget: &Budget,
) -> Result<W> {
    let mut cnf = to_weighted_cnf(p)?;
    let query = cnf.encode_formula(phi);
    let mut assumptions = cnf.literals_for(evidence);
    let budget = *budget;
    run_with_large_stack(move || {
        let mut counter = Counter::<W>::new(&cnf, DEFAULT_CACHE_CAPACITY, budget);
        let den = counter.count(&assumptions)?;
        if den.is_zero() {
            return Err(Error::ZeroEvidence);
        }
        assumptions.push(query);
        let num = counter.count(&assumptions)?;
        Ok(num / den)
    })
}

/// Runs `f` on a thread with a deep stack; the counter recurses once per
/// decision level.
fn run_with_large_stack<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 29)
            .spawn_scoped(s, f)
            .expect("spawn counter thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

/// Literal code: `2 * var + negated`, variables numbered from 0.
type Lit = u32;

fn lit_of(dimacs: i32) -> Lit {
    let v = dimacs.unsigned_abs() - 1;
    2 * v + (dimacs < 0) as u32
}

/// Exact DPLL model counter over one CNF. Its cache stays valid across
/// calls with different assumptions.
pub struct Counter<W: Weight> {
    clauses: Vec<Vec<Lit>>,
    occurs: Vec<Vec<u32>>,
    weights: Vec<(W, W)>,
    /// 0 unassigned, 1 true, -1 false.
    assign: Vec<i8>,
    trail: Vec<Lit>,
    queue_head: usize,
    sat_count: Vec<u32>,
    free_count: Vec<u32>,
    empty_clause: bool,
    cache: LruCache<Vec<u32>, W>,
    var_mark: Vec<u32>,
    clause_mark: Vec<u32>,
    generation: u32,
    degree: Vec<u32>,
    budget: Budget,
    nodes: u64,
}

impl<W: Weight> Counter<W> {
    pub fn new(cnf: &WeightedCnf, cache_capacity: usize, budget: Budget) -> Counter<W> {
        let n = cnf.var_count;
        let mut clauses = Vec::with_capacity(cnf.clauses.len());
        let mut empty_clause = false;
        for c in &cnf.clauses {
            let mut lits: Vec<Lit> = c.iter().map(|&l| lit_of(l)).collect();
            lits.sort_unstable();
            lits.dedup();
            if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
                continue;
            }
            if lits.is_empty() {
                empty_clause = true;
            }
            clauses.push(lits);
        }
        let mut occurs = vec![Vec::new(); 2 * n];
        for (i, c) in clauses.iter().enumerate() {
            for &l in c {
                occurs[l as usize].push(i as u32);
            }
        }
        let free_count = clauses.iter().map(|c| c.len() as u32).collect();
        Counter {
            sat_count: vec![0; clauses.len()],
            free_count,
            clause_mark: vec![0; clauses.len()],
            clauses,
            occurs,
            weights: cnf
                .weights
                .iter()
                .map(|(t, f)| (W::from_prob(t), W::from_prob(f)))
                .collect(),
            assign: vec![0; n],
            trail: Vec::new(),
            queue_head: 0,
            empty_clause,
            cache: LruCache::new(NonZeroUsize::new(cache_capacity.max(1)).unwrap()),
            var_mark: vec![0; n],
            generation: 0,
            degree: vec![0; n],
            budget,
            nodes: 0,
        }
    }

    /// Weighted count of the models satisfying `assumptions` (DIMACS
    /// literals).
    pub fn count(&mut self, assumptions: &[i32]) -> Result<W> {
        self.budget.check()?;
        if self.empty_clause {
            return Ok(W::zero());
        }
        debug_assert!(self.trail.is_empty());
        let result = self.count_under(assumptions);
        self.undo(0);
        result
    }

    fn count_under(&mut self, assumptions: &[i32]) -> Result<W> {
        for &a in assumptions {
            let l = lit_of(a);
            match self.lit_value(l) {
                1 => continue,
                -1 => return Ok(W::zero()),
                _ => self.set(l),
            }
        }
        if !self.propagate() {
            return Ok(W::zero());
        }
        let mult = self.trail_weight(0);
        let vars: Vec<u32> = (0..self.assign.len() as u32)
            .filter(|&v| self.assign[v as usize] == 0)
            .collect();
        let rest = self.count_components(&vars)?;
        Ok(mult * rest)
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let a = self.assign[(l >> 1) as usize];
        if l & 1 == 1 {
            -a
        } else {
            a
        }
    }

    fn set(&mut self, l: Lit) {
        let v = (l >> 1) as usize;
        debug_assert_eq!(self.assign[v], 0);
        self.assign[v] = if l & 1 == 1 { -1 } else { 1 };
        self.trail.push(l);
        for &c in &self.occurs[l as usize] {
            self.sat_count[c as usize] += 1;
        }
        for &c in &self.occurs[(l ^ 1) as usize] {
            self.free_count[c as usize] -= 1;
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let l = self.trail.pop().unwrap();
            for &c in &self.occurs[l as usize] {
                self.sat_count[c as usize] -= 1;
            }
            for &c in &self.occurs[(l ^ 1) as usize] {
                self.free_count[c as usize] += 1;
            }
            self.assign[(l >> 1) as usize] = 0;
        }
        self.queue_head = self.queue_head.min(mark);
    }

    /// Unit propagation over the trail suffix; false on conflict.
    fn propagate(&mut self) -> bool {
        while self.queue_head < self.trail.len() {
            let l = self.trail[self.queue_head];
            self.queue_head += 1;
            let falsified = (l ^ 1) as usize;
            for k in 0..self.occurs[falsified].len() {
                let c = self.occurs[falsified][k] as usize;
                if self.sat_count[c] > 0 {
                    continue;
                }
                match self.free_count[c] {
                    0 => {
                        self.queue_head = self.trail.len();
                        return false;
                    }
                    1 => {
                        let unit = self.clauses[c]
                            .iter()
                            .copied()
                            .find(|&x| self.assign[(x >> 1) as usize] == 0)
                            .expect("free literal");
                        self.set(unit);
                    }
                    _ => {}
                }
            }
        }
        true
    }

    fn trail_weight(&self, mark: usize) -> W {
        let mut w = W::one();
        for &l in &self.trail[mark..] {
            let (t, f) = &self.weights[(l >> 1) as usize];
            w = w * if l & 1 == 1 { f.clone() } else { t.clone() };
        }
        w
    }

    /// Splits the unassigned variables among `vars` into connected
    /// components and multiplies their counts.
    fn count_components(&mut self, vars: &[u32]) -> Result<W> {
        let mut result = W::one();
        let mut components: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
        self.generation += 1;
        let gen = self.generation;
        for &v in vars {
            if self.assign[v as usize] != 0 || self.var_mark[v as usize] == gen {
                continue;
            }
            self.var_mark[v as usize] = gen;
            let mut comp_vars = vec![v];
            let mut comp_clauses = Vec::new();
            let mut k = 0;
            while k < comp_vars.len() {
                let u = comp_vars[k] as usize;
                k += 1;
                for l in [2 * u, 2 * u + 1] {
                    for &c in &self.occurs[l] {
                        let ci = c as usize;
                        if self.sat_count[ci] > 0 || self.clause_mark[ci] == gen {
                            continue;
                        }
                        self.clause_mark[ci] = gen;
                        comp_clauses.push(c);
                        for &x in &self.clauses[ci] {
                            let xv = (x >> 1) as usize;
                            if self.assign[xv] == 0 && self.var_mark[xv] != gen {
                                self.var_mark[xv] = gen;
                                comp_vars.push(xv as u32);
                            }
                        }
                    }
                }
            }
            if comp_clauses.is_empty() {
                let (t, f) = &self.weights[v as usize];
                result = result * (t.clone() + f.clone());
            } else {
                components.push((comp_vars, comp_clauses));
            }
        }
        if result.is_zero() {
            return Ok(result);
        }
        // Smaller components first: a zero count short-circuits the rest.
        components.sort_by_key(|(v, c)| (v.len(), c.len()));
        for (mut cv, mut cc) in components {
            cv.sort_unstable();
            cc.sort_unstable();
            let r = self.count_component(&cv, &cc)?;
            if r.is_zero() {
                return Ok(r);
            }
            result = result * r;
        }
        Ok(result)
    }

    fn count_component(&mut self, vars: &[u32], clauses: &[u32]) -> Result<W> {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            self.budget.check()?;
        }
        let mut key = Vec::with_capacity(vars.len() + clauses.len() + 1);
        key.extend_from_slice(vars);
        key.push(u32::MAX);
        key.extend_from_slice(clauses);
        if let Some(w) = self.cache.get(&key) {
            return Ok(w.clone());
        }

        let branch = self.pick_branch_var(vars, clauses);
        let mut acc = W::Acc::default();
        for lit in [2 * branch, 2 * branch + 1] {
            let mark = self.trail.len();
            self.set(lit);
            if self.propagate() {
                let mult = self.trail_weight(mark);
                if !mult.is_zero() {
                    let sub = self.count_components(vars);
                    let sub = match sub {
                        Ok(s) => s,
                        Err(e) => {
                            self.undo(mark);
                            return Err(e);
                        }
                    };
                    W::accumulate(&mut acc, mult * sub);
                }
            }
            self.undo(mark);
        }
        let total = W::total(acc);
        self.cache.put(key, total.clone());
        Ok(total)
    }

    /// Variable occurring in the most active clauses; ties go to the
    /// lowest index.
    fn pick_branch_var(&mut self, vars: &[u32], clauses: &[u32]) -> u32 {
        for &c in clauses {
            for &l in &self.clauses[c as usize] {
                let v = (l >> 1) as usize;
                if self.assign[v] == 0 {
                    self.degree[v] += 1;
                }
            }
        }
        let mut best = vars[0];
        let mut best_degree = 0;
        for &v in vars {
            let d = self.degree[v as usize];
            if d > best_degree {
                best = v;
                best_degree = d;
            }
            self.degree[v as usize] = 0;
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::prob;
    use crate::model::CounterfactualQuery;
    use crate::parser::{parse_formula, parse_problog};
    use crate::semantics::marginal;
    use crate::transforms::twin;
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

    fn count(cnf: &WeightedCnf, assumptions: &[i32]) -> BigRational {
        wmc(cnf, assumptions)
    }

    /// Brute force over all 2^n assignments of the CNF itself.
    fn brute_force(cnf: &WeightedCnf, assumptions: &[i32]) -> BigRational {
        let n = cnf.var_count;
        let mut total = prob(0, 1);
        for mask in 0u64..(1 << n) {
            let val = |l: i32| {
                let bit = mask >> (l.unsigned_abs() - 1) & 1 == 1;
                if l > 0 {
                    bit
                } else {
                    !bit
                }
            };
            if !assumptions.iter().all(|&l| val(l))
                || !cnf.clauses.iter().all(|c| c.iter().any(|&l| val(l)))
            {
                continue;
            }
            let mut w = prob(1, 1);
            for v in 0..n {
                let (t, f) = &cnf.weights[v];
                w *= if mask >> v & 1 == 1 {
                    t.clone()
                } else {
                    f.clone()
                };
            }
            total += w;
        }
        total
    }

    #[test]
    fn single_rule_completion() {
        let p = parse_problog("a :- u. 0.5::u.").unwrap();
        let cnf = to_weighted_cnf(&p).unwrap();
        let u = cnf.var_map[&a("u")];
        let av = cnf.var_map[&a("a")];
        assert_eq!(cnf.weights[(u - 1) as usize], (prob(1, 2), prob(1, 2)));
        assert_eq!(cnf.weights[(av - 1) as usize], (prob(1, 1), prob(1, 1)));
        assert_eq!(count(&cnf, &[av as i32]), prob(1, 2));
        assert_eq!(count(&cnf, &[av as i32, -(u as i32)]), prob(0, 1));
        assert_eq!(count(&cnf, &[]), prob(1, 1));
    }

    #[test]
    fn ruleless_atom_is_false() {
        let p = parse_problog("a :- b, u. 0.5::u.").unwrap();
        let cnf = to_weighted_cnf(&p).unwrap();
        let b = cnf.var_map[&a("b")] as i32;
        assert!(cnf.clauses.contains(&vec![-b]));
    }

    #[test]
    fn free_variables() {
        let mut cnf = WeightedCnf::new();
        for _ in 0..5 {
            cnf.aux_var();
        }
        assert_eq!(count(&cnf, &[]), prob(32, 1));
        assert_eq!(wmc::<f64>(&cnf, &[1, -2]), 8.0);
    }

    #[test]
    fn sprinkler_counts() {
        let p = parse_problog(SPRINKLER).unwrap();
        let cnf = to_weighted_cnf(&p).unwrap();
        assert_eq!(count(&cnf, &[]), prob(1, 1));
        let s = cnf.var_map[&a("sprinkler")] as i32;
        assert_eq!(count(&cnf, &[s]), prob(7, 20));
        assert_eq!(count(&cnf, &[s]), brute_force(&cnf, &[s]));
        let slip = cnf.var_map[&a("slippery")] as i32;
        assert_eq!(count(&cnf, &[slip]), brute_force(&cnf, &[slip]));
    }

    #[test]
    fn sprinkler_twin_counts() {
        let p = parse_problog(SPRINKLER).unwrap();
        let q = CounterfactualQuery::new(
            Formula::atom(&a("slippery")),
            LiteralSet::from_literals([a("sprinkler").pos(), a("slippery").pos()]).unwrap(),
            LiteralSet::from_literals([a("sprinkler").neg()]).unwrap(),
        );
        let t = twin(&p, &q).unwrap();
        let cnf = to_weighted_cnf(&t.program).unwrap();
        let v = |n: &str| cnf.var_map[&a(n)] as i32;
        let e = [v("slippery__e"), v("sprinkler__e")];
        // Frozen from the enumeration oracle over the 16 worlds.
        let ev: BigRational = marginal(
            &t.program,
            &parse_formula("slippery__e, sprinkler__e").unwrap(),
        )
        .unwrap();
        let joint: BigRational = marginal(
            &t.program,
            &parse_formula("slippery__e, sprinkler__e, slippery__i").unwrap(),
        )
        .unwrap();
        assert_eq!(ev, prob(35, 100));
        assert_eq!(joint, prob(35, 1000));
        assert_eq!(count(&cnf, &e), ev);
        assert_eq!(count(&cnf, &[e[0], e[1], v("slippery__i")]), joint);
    }

    #[test]
    fn formula_encoding() {
        let p = parse_problog(SPRINKLER).unwrap();
        for text in [
            "rain ; sprinkler",
            "\\+(rain, sprinkler)",
            "true",
            "false",
            "wet, \\+rain",
            "ghost",
            "\\+ghost",
        ] {
            let phi = parse_formula(text).unwrap();
            let mut cnf = to_weighted_cnf(&p).unwrap();
            let l = cnf.encode_formula(&phi);
            let expected: BigRational = marginal(&p, &phi).unwrap();
            assert_eq!(count(&cnf, &[l]), expected, "{text}");
            assert_eq!(count(&cnf, &[]), prob(1, 1), "{text}");
        }
    }

    #[test]
    fn conditionals() {
        let p = parse_problog(SPRINKLER).unwrap();
        let ev = LiteralSet::from_literals([a("sprinkler").pos()]).unwrap();
        let c: BigRational = conditional(&p, &Formula::atom(&a("slippery")), &ev).unwrap();
        assert_eq!(c, prob(1, 1));
        let c: BigRational =
            conditional(&p, &Formula::atom(&a("sprinkler")), &LiteralSet::new()).unwrap();
        assert_eq!(c, prob(7, 20));
        let bad = LiteralSet::from_literals([a("sprinkler").pos(), a("wet").neg()]).unwrap();
        assert!(matches!(
            conditional::<BigRational>(&p, &Formula::True, &bad),
            Err(Error::ZeroEvidence)
        ));
    }

    #[test]
    fn rejects_cyclic_programs() {
        let p = parse_problog("a :- b. b :- a.").unwrap();
        assert!(matches!(to_weighted_cnf(&p), Err(Error::NotAcyclic(_))));
        let p = parse_problog("a :- \\+a.").unwrap();
        assert!(matches!(to_weighted_cnf(&p), Err(Error::NegativeCycle(_))));
    }

    #[test]
    fn unsat_and_empty_clause() {
        let mut cnf = WeightedCnf::new();
        let x = cnf.aux_var() as i32;
        cnf.clauses.push(vec![x]);
        cnf.clauses.push(vec![-x]);
        assert_eq!(count(&cnf, &[]), prob(0, 1));
        let mut cnf = WeightedCnf::new();
        cnf.aux_var();
        cnf.clauses.push(vec![]);
        assert_eq!(count(&cnf, &[]), prob(0, 1));
    }

    #[test]
    fn dimacs_dump() {
        let p = parse_problog("a :- u. 2/7::u.").unwrap();
        let text = to_weighted_cnf(&p).unwrap().to_dimacs();
        assert!(text.starts_with("p cnf 2 2\n"));
        assert!(text.contains("c p weight -2 1 0\n"));
        assert!(text.contains("c p weight 1 0.2857142857142857 0\n"));
        assert!(text
            .lines()
            .filter(|l| !l.starts_with('c') && !l.starts_with('p'))
            .all(|l| l.ends_with(" 0")));
    }

    #[test]
    fn timeout_is_reported() {
        let mut cnf = WeightedCnf::new();
        for i in 0..40 {
            let x = cnf.aux_var() as i32;
            if i > 0 {
                cnf.clauses.push(vec![x, x - 1]);
            }
        }
        let r = wmc_within::<f64>(&cnf, &[], &Budget::with_limit(std::time::Duration::ZERO));
        assert!(matches!(r, Err(Error::Timeout)));
    }
}
