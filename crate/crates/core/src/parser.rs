//! Surface syntax: a recursive-descent parser for ProbLog and LPAD
//! programs, query formulas and literal lists, plus canonical printers.
//!
//! ```text
//! 0.5::u1.                   % random fact
//! rain :- szn, u3.           % rule
//! wet.                       % fact-as-rule
//! a:0.3; b:1/5 :- c, \+d.    % annotated disjunction (LPAD only)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{ParseError, ParseErrorKind};
use crate::lpad::{LpadClause, LpadProgram};
use crate::model::{Atom, Clause, Formula, Literal, Prob, Program, RandomFact};

/// Location of a token or statement in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Prob),
    Slash,
    ColonColon,
    Colon,
    Neck,
    Comma,
    Semicolon,
    Period,
    Not,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(_) => "number".into(),
            Tok::Slash => "`/`".into(),
            Tok::ColonColon => "`::`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semicolon => "`;`".into(),
            Tok::Period => "`.`".into(),
            Tok::Not => "`\\+`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

fn syntax(message: impl Into<String>, span: SourceSpan) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax,
        message: message.into(),
        span,
    }
}

fn lex(text: &str) -> PResult<Vec<(Tok, SourceSpan)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let span_at = |start: usize, end: usize| SourceSpan {
            start,
            end,
            line,
            column: text[line_start..start].chars().count() + 1,
        };
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                line_start = i;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                if !word.as_bytes()[0].is_ascii_lowercase() {
                    return Err(syntax(
                        format!("`{word}`: atoms must start with a lowercase letter (variables are not supported)"),
                        span_at(start, i),
                    ));
                }
                out.push((Tok::Ident(word.to_string()), span_at(start, i)));
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_end = i;
                let mut value =
                    BigRational::from_integer(text[start..int_end].parse::<BigInt>().unwrap());
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let digits = &text[frac_start..i];
                    let num: BigInt = digits.parse().unwrap();
                    let den = num::pow(BigInt::from(10), digits.len());
                    value += BigRational::new(num, den);
                }
                out.push((Tok::Number(value), span_at(start, i)));
            }
            b':' => {
                let start = i;
                let tok = match bytes.get(i + 1) {
                    Some(b':') => {
                        i += 2;
                        Tok::ColonColon
                    }
                    Some(b'-') => {
                        i += 2;
                        Tok::Neck
                    }
                    _ => {
                        i += 1;
                        Tok::Colon
                    }
                };
                out.push((tok, span_at(start, i)));
            }
            b'\\' if bytes.get(i + 1) == Some(&b'+') => {
                out.push((Tok::Not, span_at(i, i + 2)));
                i += 2;
            }
            b'/' | b',' | b';' | b'.' | b'(' | b')' => {
                let tok = match c {
                    b'/' => Tok::Slash,
                    b',' => Tok::Comma,
                    b';' => Tok::Semicolon,
                    b'.' => Tok::Period,
                    b'(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push((tok, span_at(i, i + 1)));
                i += 1;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(syntax(
                    format!("unexpected character `{ch}`"),
                    span_at(i, i + ch.len_utf8()),
                ));
            }
        }
    }
    let column = text[line_start..].chars().count() + 1;
    out.push((
        Tok::Eof,
        SourceSpan {
            start: text.len(),
            end: text.len(),
            line,
            column,
        },
    ));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<SourceSpan> {
        if self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(syntax(
                format!(
                    "expected {}, found {}",
                    tok.describe(),
                    self.peek().describe()
                ),
                self.span(),
            ))
        }
    }

    fn atom(&mut self) -> PResult<(Atom, SourceSpan)> {
        match self.bump() {
            (Tok::Ident(name), span) => Atom::new(&name)
                .map(|a| (a, span))
                .map_err(|_| syntax(format!("invalid atom `{name}`"), span)),
            (t, span) => Err(syntax(
                format!("expected atom, found {}", t.describe()),
                span,
            )),
        }
    }

    /// `number` or `number / number`.
    fn probability(&mut self) -> PResult<(Prob, SourceSpan)> {
        let (num, span) = match self.bump() {
            (Tok::Number(n), span) => (n, span),
            (t, span) => {
                return Err(syntax(
                    format!("expected probability, found {}", t.describe()),
                    span,
                ))
            }
        };
        if !self.eat(&Tok::Slash) {
            return Ok((num, span));
        }
        let (den, den_span) = match self.bump() {
            (Tok::Number(d), s) if d.is_integer() => (d, s),
            (_, s) => return Err(syntax("denominator must be an integer", s)),
        };
        if den.is_zero() {
            return Err(syntax("zero denominator", den_span));
        }
        Ok((num / den, join(span, den_span)))
    }

    fn literal(&mut self) -> PResult<Literal> {
        let positive = !self.eat(&Tok::Not);
        let (atom, _) = self.atom()?;
        Ok(Literal::new(atom, positive))
    }

    fn body(&mut self) -> PResult<Vec<Literal>> {
        let mut lits = vec![self.literal()?];
        while self.eat(&Tok::Comma) {
            lits.push(self.literal()?);
        }
        Ok(lits)
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut disjuncts = vec![self.conjunction()?];
        while self.eat(&Tok::Semicolon) {
            disjuncts.push(self.conjunction()?);
        }
        Ok(if disjuncts.len() == 1 {
            disjuncts.pop().unwrap()
        } else {
            Formula::Or(disjuncts)
        })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut conjuncts = vec![self.unary()?];
        while self.eat(&Tok::Comma) {
            conjuncts.push(self.unary()?);
        }
        Ok(if conjuncts.len() == 1 {
            conjuncts.pop().unwrap()
        } else {
            Formula::And(conjuncts)
        })
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(self.unary()?.negate())
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            _ => Ok(Formula::Atom(self.atom()?.0)),
        }
    }
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan {
        start: a.start,
        end: b.end,
        line: a.line,
        column: a.column,
    }
}

fn check_unit_interval(p: &Prob, span: SourceSpan) -> PResult<()> {
    if p.is_negative() || *p > Prob::one() {
        Err(ParseError {
            kind: ParseErrorKind::Invalid,
            message: format!("probability {} is outside [0, 1]", format_prob(p)),
            span,
        })
    } else {
        Ok(())
    }
}

/// Parses a ProbLog program. Atoms of `p::a.` facts become external, all
/// other atoms internal.
pub fn parse_problog(text: &str) -> Result<Program, ParseError> {
    let mut ps = Parser::new(text)?;
    let mut clauses = Vec::new();
    let mut facts: Vec<RandomFact> = Vec::new();
    let mut fact_spans: BTreeMap<Atom, SourceSpan> = BTreeMap::new();
    let mut head_spans: BTreeMap<Atom, SourceSpan> = BTreeMap::new();

    while !ps.at_eof() {
        if matches!(ps.peek(), Tok::Number(_)) {
            let (p, pspan) = ps.probability()?;
            check_unit_interval(&p, pspan)?;
            ps.expect(&Tok::ColonColon)?;
            let (atom, span) = ps.atom()?;
            if *ps.peek() == Tok::Neck {
                return Err(ParseError {
                    kind: ParseErrorKind::Invalid,
                    message: format!(
                        "probabilistic rule for `{atom}`: introduce an explicit random fact, or parse as LPAD"
                    ),
                    span,
                });
            }
            ps.expect(&Tok::Period)?;
            if fact_spans.contains_key(&atom) {
                return Err(ParseError {
                    kind: ParseErrorKind::Invalid,
                    message: format!("duplicate random fact for `{atom}`"),
                    span,
                });
            }
            if head_spans.contains_key(&atom) {
                return Err(fact_and_head(&atom, span));
            }
            fact_spans.insert(atom.clone(), span);
            facts.push(RandomFact::new(atom, p));
        } else {
            let (head, span) = ps.atom()?;
            let body = if ps.eat(&Tok::Neck) {
                ps.body()?
            } else {
                Vec::new()
            };
            ps.expect(&Tok::Period)?;
            if fact_spans.contains_key(&head) {
                return Err(fact_and_head(&head, span));
            }
            head_spans.entry(head.clone()).or_insert(span);
            clauses.push(Clause::new(head, body));
        }
    }
    Ok(Program::from_parts(clauses, facts))
}

fn fact_and_head(atom: &Atom, span: SourceSpan) -> ParseError {
    ParseError {
        kind: ParseErrorKind::FactAndRuleHead,
        message: format!("atom `{atom}` is used both as a random fact and as a rule head"),
        span,
    }
}

/// Parses an LPAD program: `h1:p1; ...; hl:pl :- body.`, `h :- body.`
/// (probability one) and the `p::h :- body.` shorthand.
pub fn parse_lpad(text: &str) -> Result<LpadProgram, ParseError> {
    let mut ps = Parser::new(text)?;
    let mut clauses = Vec::new();
    while !ps.at_eof() {
        let start = ps.span();
        let mut head: Vec<(Atom, Prob)> = Vec::new();
        if matches!(ps.peek(), Tok::Number(_)) {
            let (p, pspan) = ps.probability()?;
            check_unit_interval(&p, pspan)?;
            ps.expect(&Tok::ColonColon)?;
            head.push((ps.atom()?.0, p));
        } else {
            loop {
                let (atom, aspan) = ps.atom()?;
                let p = if ps.eat(&Tok::Colon) {
                    let (p, pspan) = ps.probability()?;
                    check_unit_interval(&p, pspan)?;
                    p
                } else if head.is_empty() && *ps.peek() != Tok::Semicolon {
                    Prob::one()
                } else {
                    return Err(syntax(
                        format!(
                            "head atom `{atom}` of a disjunction needs a `:probability` annotation"
                        ),
                        aspan,
                    ));
                };
                head.push((atom, p));
                if !ps.eat(&Tok::Semicolon) {
                    break;
                }
            }
        }
        let body = if ps.eat(&Tok::Neck) {
            ps.body()?
        } else {
            Vec::new()
        };
        let end = ps.expect(&Tok::Period)?;
        let span = join(start, end);

        let total: Prob = head.iter().map(|(_, p)| p.clone()).sum();
        if total > Prob::one() {
            return Err(ParseError {
                kind: ParseErrorKind::ProbabilitySum,
                message: format!("head probabilities sum to {} > 1", format_prob(&total)),
                span,
            });
        }
        let mut seen = BTreeSet::new();
        for (a, _) in &head {
            if !seen.insert(a) {
                return Err(ParseError {
                    kind: ParseErrorKind::Invalid,
                    message: format!("atom `{a}` occurs twice in one head"),
                    span,
                });
            }
        }
        clauses.push(LpadClause::new(head, body));
    }
    Ok(LpadProgram::new(clauses))
}

/// Parses a query formula: `,` binds tighter than `;`, `\+` negates,
/// parentheses group, `true`/`false` are constants.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut ps = Parser::new(text)?;
    let f = ps.formula()?;
    ps.eat(&Tok::Period);
    ps.expect(&Tok::Eof)?;
    Ok(f)
}

/// Parses a comma-separated literal list such as `sprinkler,\+wet`. Empty
/// input gives an empty list.
pub fn parse_literals(text: &str) -> Result<Vec<Literal>, ParseError> {
    let mut ps = Parser::new(text)?;
    if ps.at_eof() {
        return Ok(Vec::new());
    }
    let lits = ps.body()?;
    ps.expect(&Tok::Eof)?;
    Ok(lits)
}

/// Exact text form of a probability: a terminating decimal when the
/// denominator divides a power of ten, `num/den` otherwise.
pub fn format_prob(p: &Prob) -> String {
    let den = p.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut rest, mut twos, mut fives) = (den.clone(), 0usize, 0usize);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", p.numer(), p.denom());
    }
    let digits = twos.max(fives);
    let scaled = p.numer() * num::pow(BigInt::from(10), digits) / den;
    if digits == 0 {
        return scaled.to_string();
    }
    let negative = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    let frac = frac.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn write_body(out: &mut String, body: impl IntoIterator<Item = Literal>) {
    let mut first = true;
    for l in body {
        if first {
            out.push_str(" :- ");
            first = false;
        } else {
            out.push_str(", ");
        }
        let _ = write!(out, "{l}");
    }
}

/// Canonical text: facts sorted by atom, then clauses sorted by head and
/// body, one statement per line.
pub fn print_problog(p: &Program) -> String {
    let mut facts: Vec<&RandomFact> = p.facts.iter().collect();
    facts.sort();
    let mut clauses: Vec<&Clause> = p.clauses.iter().collect();
    clauses.sort();
    let mut out = String::new();
    for f in facts {
        let _ = writeln!(out, "{}::{}.", format_prob(&f.prob), f.atom);
    }
    for c in clauses {
        out.push_str(c.head.name());
        write_body(&mut out, c.body.iter().cloned());
        out.push_str(".\n");
    }
    out
}

/// Prints an LPAD program in clause order (order determines the names
/// of atoms introduced by the ProbLog translation).
pub fn print_lpad(p: &LpadProgram) -> String {
    let mut out = String::new();
    for c in &p.clauses {
        if c.head.len() == 1 && c.head[0].1.is_one() {
            out.push_str(c.head[0].0.name());
        } else if c.head.is_empty() {
            // An empty head never derives anything; keep it parseable.
            continue;
        } else {
            for (i, (a, pr)) in c.head.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                let _ = write!(out, "{a}:{}", format_prob(pr));
            }
        }
        write_body(&mut out, c.body.iter().cloned());
        out.push_str(".\n");
    }
    out
}
