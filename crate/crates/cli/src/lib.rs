//! The `whatif` command line: argument parsing and the four subcommands.
//! [`run`] executes one invocation and returns what it would print, so the
//! commands can be driven in-process.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigRational;

use whatif_core::benchgen::{format_float, run_experiment, write_csv, Grid, Status};
use whatif_core::counterfactual::{answer_counterfactual, Answer, Backend};
use whatif_core::error::{Error, ErrorClass};
use whatif_core::lpad::{lpad_of_problog, prob_of_lpad};
use whatif_core::model::{CounterfactualQuery, Formula, LiteralSet, Program};
use whatif_core::oracle::abduction_action_prediction;
use whatif_core::parser::{
    parse_formula, parse_literals, parse_lpad, parse_problog, print_lpad, print_problog,
};
use whatif_core::semantics::Budget;
use whatif_core::transforms::{intervene, twin};
use whatif_core::weight::Weight;
use whatif_core::wmc::to_weighted_cnf;

/// Externals up to which answers are exact fractions by default.
pub const RATIONAL_DEFAULT_LIMIT: usize = 64;

#[derive(Parser, Debug)]
#[command(
    name = "whatif",
    version,
    about = "Exact marginal, interventional and counterfactual queries on probabilistic logic programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Probability of a query, optionally given evidence and under interventions.
    Query(QueryArgs),
    /// Print an intervened program or the twin program of a counterfactual query.
    Transform(TransformArgs),
    /// Translate between ProbLog and annotated-disjunction programs.
    Translate(TranslateArgs),
    /// Run the graph-traversal benchmark grid and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Wmc,
    Enumerate,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Rational,
    Float,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    /// Program file.
    pub program: PathBuf,
    /// Query formula, e.g. `slippery` or `wet, \+rain`.
    #[arg(long)]
    pub query: String,
    /// Comma-separated evidence literals.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub evidence: String,
    /// Comma-separated intervention literals.
    #[arg(long = "do", default_value = "", allow_hyphen_values = true)]
    pub interventions: String,
    #[arg(long, value_enum, default_value = "wmc")]
    pub backend: BackendArg,
    /// Defaults to rational up to 64 externals, float above.
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
    /// Read the program as an LPAD.
    #[arg(long)]
    pub lpad: bool,
    /// Time limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Write the weighted CNF of the twin program to this file.
    #[arg(long)]
    pub dump_cnf: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    pub program: PathBuf,
    /// Intervention literals.
    #[arg(long = "do", allow_hyphen_values = true, conflicts_with = "twin")]
    pub interventions: Option<String>,
    /// `query;evidence;do`, any part may be empty.
    #[arg(long, allow_hyphen_values = true)]
    pub twin: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dialect {
    Problog,
    Lpad,
}

#[derive(Args, Debug)]
pub struct TranslateArgs {
    /// A ProbLog program for `--to lpad`, an LPAD for `--to problog`.
    pub program: PathBuf,
    #[arg(long, value_enum)]
    pub to: Dialect,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// File of `key = value` lines; flags override it.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub seed: Option<Vec<u64>>,
    /// Evidence literal counts; negative counts give negative literals.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub e: Option<Vec<i32>>,
    /// Intervention literal counts; negative counts give negative literals.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub i: Option<Vec<i32>>,
    #[arg(long, value_delimiter = ',')]
    pub backend: Option<Vec<String>>,
    /// Seconds per instance.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What one invocation printed and its exit status.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Syntax => 1,
        ErrorClass::Semantic => 2,
        ErrorClass::Resource => 3,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let mut out = Outcome::default();
    let result = match cli.command {
        Command::Query(a) => cmd_query(&a, &mut out),
        Command::Transform(a) => cmd_transform(&a, &mut out),
        Command::Translate(a) => cmd_translate(&a, &mut out),
        Command::Bench(a) => cmd_bench(&a, &mut out),
    };
    if let Err(e) = result {
        out.code = exit_code(&e);
        out.stderr.push_str(&format!("error: {e}\n"));
    }
    out
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn literals(text: &str) -> Result<LiteralSet, Error> {
    LiteralSet::from_literals(parse_literals(text)?)
}

fn seconds(s: f64) -> Result<Duration, Error> {
    Duration::try_from_secs_f64(s).map_err(|_| Error::Config(format!("bad time limit `{s}`")))
}

fn load(path: &Path, lpad: bool) -> Result<Program, Error> {
    let text = read(path)?;
    if lpad {
        prob_of_lpad(&parse_lpad(&text)?)
    } else {
        Ok(parse_problog(&text)?)
    }
}

fn answer<W: Weight>(
    p: &Program,
    q: &CounterfactualQuery,
    backend: BackendArg,
    budget: &Budget,
) -> Result<Answer<W>, Error> {
    match backend {
        BackendArg::Oracle => Ok(Answer {
            value: abduction_action_prediction(p, q)?,
            formal: false,
        }),
        BackendArg::Wmc => answer_counterfactual(p, q, Backend::Wmc, budget),
        BackendArg::Enumerate => answer_counterfactual(p, q, Backend::Enumerate, budget),
    }
}

pub fn cmd_query(a: &QueryArgs, out: &mut Outcome) -> Result<(), Error> {
    let p = load(&a.program, a.lpad)?;
    let q = CounterfactualQuery::new(
        parse_formula(&a.query)?,
        literals(&a.evidence)?,
        literals(&a.interventions)?,
    );
    let budget = match a.time_limit {
        Some(s) => Budget::with_limit(seconds(s)?),
        None => Budget::unlimited(),
    };
    if let Some(path) = &a.dump_cnf {
        let t = twin(&p, &q)?;
        let mut cnf = to_weighted_cnf(&t.program)?;
        let query = cnf.encode_formula(&t.query);
        let evidence = cnf.literals_for(&t.evidence);
        let mut text = cnf.to_dimacs();
        text.push_str(&format!("c query {query}\n"));
        text.push_str(&format!(
            "c evidence {}\n",
            evidence
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        ));
        std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    let precision =
        a.precision
            .unwrap_or(if p.alphabet.externals.len() <= RATIONAL_DEFAULT_LIMIT {
                Precision::Rational
            } else {
                Precision::Float
            });
    let (text, formal) = match precision {
        Precision::Rational => {
            let r: Answer<BigRational> = answer(&p, &q, a.backend, &budget)?;
            (r.value.to_string(), r.formal)
        }
        Precision::Float => {
            let r: Answer<f64> = answer(&p, &q, a.backend, &budget)?;
            (format_float(r.value), r.formal)
        }
    };
    if formal {
        out.stderr
            .push_str("warning: the program has positive cycles; the answer is formal and has no causal reading\n");
    }
    out.stdout.push_str(&text);
    out.stdout.push('\n');
    Ok(())
}

pub fn cmd_transform(a: &TransformArgs, out: &mut Outcome) -> Result<(), Error> {
    let p = load(&a.program, false)?;
    if let Some(spec) = &a.twin {
        let parts: Vec<&str> = spec.split(';').collect();
        if parts.len() != 3 {
            return Err(Error::Config("--twin expects `query;evidence;do`".into()));
        }
        let query = if parts[0].trim().is_empty() {
            Formula::True
        } else {
            parse_formula(parts[0])?
        };
        let q = CounterfactualQuery::new(query, literals(parts[1])?, literals(parts[2])?);
        let t = twin(&p, &q)?;
        out.stdout.push_str(&format!(
            "% query: {}\n% evidence: {}\n",
            t.query, t.evidence
        ));
        out.stdout.push_str(&print_problog(&t.program));
    } else {
        let i = literals(a.interventions.as_deref().unwrap_or(""))?;
        out.stdout.push_str(&print_problog(&intervene(&p, &i)?));
    }
    Ok(())
}

pub fn cmd_translate(a: &TranslateArgs, out: &mut Outcome) -> Result<(), Error> {
    let text = read(&a.program)?;
    let printed = match a.to {
        Dialect::Lpad => print_lpad(&lpad_of_problog(&parse_problog(&text)?)),
        Dialect::Problog => print_problog(&prob_of_lpad(&parse_lpad(&text)?)?),
    };
    out.stdout.push_str(&printed);
    Ok(())
}

fn comma_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn cmd_bench(a: &BenchArgs, out: &mut Outcome) -> Result<(), Error> {
    let mut grid = match &a.grid {
        Some(path) => Grid::parse(&read(path)?)?,
        None => Grid::default(),
    };
    let overrides = [
        ("n", a.n.as_deref().map(comma_list)),
        ("k", a.k.as_deref().map(comma_list)),
        ("seed", a.seed.as_deref().map(comma_list)),
        ("e", a.e.as_deref().map(comma_list)),
        ("i", a.i.as_deref().map(comma_list)),
        ("backend", a.backend.as_deref().map(comma_list)),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            grid.set(key, &v)?;
        }
    }
    if let Some(s) = a.time_limit {
        grid.time_limit = seconds(s)?;
    }
    if let Some(w) = a.workers {
        grid.set("workers", &w.to_string())?;
    }

    let rows = run_experiment(&grid);
    for r in rows.iter().filter(|r| r.status == Status::Error) {
        out.stderr.push_str(&format!(
            "n={} k={} seed={} e={} i={} {}: {}\n",
            r.n,
            r.k,
            r.seed,
            r.e,
            r.i,
            r.backend,
            r.message.as_deref().unwrap_or("failed")
        ));
    }
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).map_err(|e| Error::Config(format!("cannot write CSV: {e}")))?;
    let csv = String::from_utf8(csv).expect("CSV is UTF-8");
    match &a.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?,
        None => out.stdout.push_str(&csv),
    }
    Ok(())
}
