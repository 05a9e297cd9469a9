//! Graph-traversal benchmark family: random trees with hub vertices, the
//! probabilistic reachability program over them, query sampling and a
//! parallel experiment runner writing CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counterfactual::{answer_counterfactual, Backend};
use crate::error::{Error, Result};
use crate::lpad::{prob_of_lpad, LpadClause, LpadProgram};
use crate::model::{
    prob, Atom, Clause, CounterfactualQuery, Formula, Literal, LiteralSet, Program, RandomFact,
};
use crate::semantics::{conditional_by_enumeration, Budget};
use crate::wmc;

/// Externals up to which sampled evidence is checked by enumeration.
const ENUMERATION_CHECK_LIMIT: usize = 16;
/// Candidate literals tried per evidence set before giving up.
const MAX_EVIDENCE_DRAWS: usize = 64;

/// Vertices `0..n` form a tree rooted at the start vertex 0, vertices
/// `n..n+k` are hubs and `n+k` is the goal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GraphInstance {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub arcs: Vec<(usize, usize)>,
    pub start: usize,
    pub goal: usize,
}

impl GraphInstance {
    pub fn vertex_count(&self) -> usize {
        self.n + self.k + 1
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count()];
        for &(v, w) in &self.arcs {
            out[v].push(w);
        }
        out
    }
}

/// Tree vertex `j` gets a uniformly chosen parent among `0..j`; every tree
/// vertex points to every hub and every hub to the goal.
pub fn generate_instance(n: usize, k: usize, seed: u64) -> GraphInstance {
    assert!(n >= 1, "the tree needs a root");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::with_capacity(n * (k + 1) + k);
    for j in 1..n {
        arcs.push((rng.gen_range(0..j), j));
    }
    for v in 0..n {
        for h in n..n + k {
            arcs.push((v, h));
        }
    }
    for h in n..n + k {
        arcs.push((h, n + k));
    }
    GraphInstance {
        n,
        k,
        seed,
        arcs,
        start: 0,
        goal: n + k,
    }
}

fn name(s: String) -> Atom {
    Atom::new(&s).expect("generated names are valid")
}

pub fn reached(v: usize) -> Atom {
    name(format!("r_{v}"))
}

fn trap(v: usize) -> Atom {
    name(format!("trap_{v}"))
}

fn picked(v: usize, w: usize) -> Atom {
    name(format!("p_{v}_{w}"))
}

fn trap_noise(v: usize, w: usize) -> Atom {
    name(format!("ut_{v}_{w}"))
}

/// A walker starts at the start vertex and at each untrapped vertex moves
/// along one outgoing arc chosen uniformly; entering a vertex traps it with
/// probability 0.1, independently per arc.
pub fn instance_to_program(g: &GraphInstance) -> Result<Program> {
    let successors = g.successors();
    let choices = successors
        .iter()
        .enumerate()
        .filter(|(_, ws)| !ws.is_empty())
        .map(|(v, ws)| {
            let d = ws.len() as i64;
            LpadClause::new(
                ws.iter().map(|&w| (picked(v, w), prob(1, d))).collect(),
                [reached(v).pos(), trap(v).neg()],
            )
        })
        .collect();
    let translated = prob_of_lpad(&LpadProgram::new(choices))?;

    let mut clauses = translated.clauses;
    let mut facts = translated.facts;
    clauses.push(Clause::fact(reached(g.start)));
    for &(v, w) in &g.arcs {
        clauses.push(Clause::new(reached(w), [picked(v, w).pos()]));
        clauses.push(Clause::new(
            trap(w),
            [picked(v, w).pos(), trap_noise(v, w).pos()],
        ));
        facts.push(RandomFact::new(trap_noise(v, w), prob(1, 10)));
    }
    let mut alphabet = translated.alphabet;
    alphabet
        .externals
        .extend(facts.iter().map(|f| f.atom.clone()));
    alphabet
        .internals
        .extend((0..g.vertex_count()).flat_map(|v| [reached(v), trap(v)]));
    alphabet
        .internals
        .extend(g.arcs.iter().map(|&(v, w)| picked(v, w)));
    Ok(Program::new(alphabet, clauses, facts))
}

fn possible(p: &Program, lits: &LiteralSet) -> Result<bool> {
    let conj = Formula::conjunction(lits);
    let pe: f64 = if p.alphabet.externals.len() <= ENUMERATION_CHECK_LIMIT {
        conditional_by_enumeration(p, &conj, &LiteralSet::new(), &Budget::unlimited())?
    } else {
        wmc::conditional(p, &conj, &LiteralSet::new())?
    };
    Ok(pe > 0.0)
}

/// Query `r_goal` with `|e_count|` evidence and `|i_count|` intervention
/// literals on reachability atoms of non-goal vertices, positive when the
/// count is positive. Evidence literals are added one at a time, each kept
/// only if the evidence so far stays possible.
pub fn sample_query(
    g: &GraphInstance,
    p: &Program,
    e_count: i32,
    i_count: i32,
    seed: u64,
) -> Result<CounterfactualQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<usize> = (0..g.vertex_count()).filter(|&v| v != g.goal).collect();
    let wanted_e = e_count.unsigned_abs() as usize;
    let wanted_i = i_count.unsigned_abs() as usize;
    if wanted_e > candidates.len() || wanted_i > candidates.len() {
        return Err(Error::Config(format!(
            "at most {} evidence or intervention literals fit this instance",
            candidates.len()
        )));
    }

    let mut order = candidates.clone();
    order.shuffle(&mut rng);
    let mut evidence = LiteralSet::new();
    let mut draws = 0;
    for v in order {
        if evidence.len() == wanted_e {
            break;
        }
        draws += 1;
        if draws > MAX_EVIDENCE_DRAWS {
            break;
        }
        let mut extended = evidence.clone();
        extended.insert(Literal::new(reached(v), e_count > 0))?;
        if possible(p, &extended)? {
            evidence = extended;
        }
    }
    if evidence.len() < wanted_e {
        return Err(Error::Exhausted("satisfiable evidence"));
    }

    let interventions = LiteralSet::from_literals(
        candidates
            .choose_multiple(&mut rng, wanted_i)
            .map(|&v| Literal::new(reached(v), i_count > 0)),
    )?;
    Ok(CounterfactualQuery::new(
        Formula::atom(&reached(g.goal)),
        evidence,
        interventions,
    ))
}

/// Parameters of an experiment; every combination is one row per backend.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub evidence: Vec<i32>,
    pub interventions: Vec<i32>,
    pub backends: Vec<Backend>,
    pub time_limit: Duration,
    pub workers: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            ns: vec![20, 40, 60],
            ks: vec![1, 3, 5],
            seeds: vec![1],
            evidence: vec![2],
            interventions: vec![2],
            backends: vec![Backend::Wmc],
            time_limit: Duration::from_secs(60),
            workers: 1,
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad value `{}` for `{key}`", s.trim())))
        })
        .collect()
}

impl Grid {
    /// Reads `key = value` lines; values are comma-separated lists. Keys:
    /// `n`, `k`, `seed`, `e`, `i`, `backend`, `time_limit` (seconds) and
    /// `workers`. Blank lines and `#` comments are skipped; missing keys
    /// keep their defaults.
    pub fn parse(text: &str) -> Result<Grid> {
        let mut grid = Grid::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected `key = value`, found `{line}`")))?;
            grid.set(key.trim(), value.trim())?;
        }
        Ok(grid)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.ns = list(key, value)?,
            "k" => self.ks = list(key, value)?,
            "seed" => self.seeds = list(key, value)?,
            "e" => self.evidence = list(key, value)?,
            "i" => self.interventions = list(key, value)?,
            "backend" => self.backends = list(key, value)?,
            "time_limit" => {
                let secs: f64 = value
                    .parse()
                    .ok()
                    .filter(|s: &f64| s.is_finite() && *s >= 0.0)
                    .ok_or_else(|| Error::Config(format!("bad time limit `{value}`")))?;
                self.time_limit = Duration::from_secs_f64(secs);
            }
            "workers" => {
                self.workers = value
                    .parse()
                    .ok()
                    .filter(|&w| w > 0)
                    .ok_or_else(|| Error::Config(format!("bad worker count `{value}`")))?;
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        if self.ns.contains(&0) {
            return Err(Error::Config("n must be at least 1".into()));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &k in &self.ks {
                for &seed in &self.seeds {
                    for &e in &self.evidence {
                        for &i in &self.interventions {
                            for &backend in &self.backends {
                                out.push(Cell {
                                    n,
                                    k,
                                    seed,
                                    e,
                                    i,
                                    backend,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    n: usize,
    k: usize,
    seed: u64,
    e: i32,
    i: i32,
    backend: Backend,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Ok,
    Timeout,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Timeout => "TIMEOUT",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub e: i32,
    pub i: i32,
    pub backend: Backend,
    pub status: Status,
    /// The time limit for timed-out rows.
    pub wall_time_s: f64,
    pub answer: Option<f64>,
    /// Why an `Error` row failed; not part of the CSV.
    pub message: Option<String>,
    pub externals: usize,
}

fn run_cell(cell: Cell, limit: Duration) -> Row {
    let mut row = Row {
        n: cell.n,
        k: cell.k,
        seed: cell.seed,
        e: cell.e,
        i: cell.i,
        backend: cell.backend,
        status: Status::Ok,
        wall_time_s: 0.0,
        answer: None,
        message: None,
        externals: 0,
    };
    let g = generate_instance(cell.n, cell.k, cell.seed);
    let outcome = instance_to_program(&g).and_then(|p| {
        row.externals = p.alphabet.externals.len();
        let q = sample_query(&g, &p, cell.e, cell.i, cell.seed)?;
        let budget = Budget::with_limit(limit);
        let started = Instant::now();
        budget.check()?;
        let a = answer_counterfactual::<f64>(&p, &q, cell.backend, &budget)?;
        Ok((a.value, started.elapsed()))
    });
    match outcome {
        Ok((value, elapsed)) => {
            row.wall_time_s = elapsed.as_secs_f64();
            row.answer = Some(value);
        }
        Err(Error::Timeout) => {
            row.status = Status::Timeout;
            row.wall_time_s = limit.as_secs_f64();
        }
        Err(e) => {
            row.status = Status::Error;
            row.message = Some(e.to_string());
        }
    }
    row
}

/// Runs every cell of the grid on `grid.workers` threads. Rows come back in
/// grid order; failures become `Error` rows.
pub fn run_experiment(grid: &Grid) -> Vec<Row> {
    let cells = grid.cells();
    let next = AtomicUsize::new(0);
    let results: Mutex<BTreeMap<usize, Row>> = Mutex::new(BTreeMap::new());
    std::thread::scope(|s| {
        for _ in 0..grid.workers.max(1).min(cells.len().max(1)) {
            s.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&cell) = cells.get(idx) else { break };
                let row = run_cell(cell, grid.time_limit);
                results
                    .lock()
                    .expect("no worker panics while holding the lock")
                    .insert(idx, row);
            });
        }
    });
    results
        .into_inner()
        .expect("workers finished")
        .into_values()
        .collect()
}

/// Twelve significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    if (0..=20).contains(&digits) {
        let s = format!("{:.*}", digits as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "k",
    "seed",
    "e",
    "i",
    "backend",
    "status",
    "wall_time_s",
    "answer",
];

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            r.e.to_string(),
            r.i.to_string(),
            r.backend.to_string(),
            r.status.as_str().to_string(),
            format!("{:.6}", r.wall_time_s),
            r.answer.map(format_float).unwrap_or_default(),
        ])?;
    }
    w.flush()
}
