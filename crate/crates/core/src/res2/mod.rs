//! Res(2): lines are disjunctions of terms with at most two literals.
//!
//! A one-literal term is identified with a clause literal, so every CNF
//! clause is a line.

pub mod builder;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, Var};

pub use builder::{build_reflection_refutation, PhaseSizes, ReflectionRefutation};

/// A conjunction of literals, kept sorted. The checker accepts sizes 1 and 2
/// only; larger terms are representable so that malformed input can be reported.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term(Vec<Literal>);

impl Term {
    pub fn new(mut lits: Vec<Literal>) -> Term {
        lits.sort();
        Term(lits)
    }

    pub fn unit(l: Literal) -> Term {
        Term(vec![l])
    }

    pub fn pair(a: Literal, b: Literal) -> Term {
        Term::new(vec![a, b])
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sizes 1 and 2 with distinct literals.
    pub fn is_well_formed(&self) -> bool {
        match self.0.as_slice() {
            [_] => true,
            [a, b] => a != b,
            _ => false,
        }
    }

    pub fn max_var(&self) -> Var {
        self.0.iter().map(|l| l.var()).max().unwrap_or(0)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_dimacs().to_string()).collect();
        write!(f, "{}", parts.join("&"))
    }
}

/// A set of terms, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoDnf(Vec<Term>);

impl TwoDnf {
    pub fn new(mut terms: Vec<Term>) -> TwoDnf {
        terms.sort();
        terms.dedup();
        TwoDnf(terms)
    }

    pub fn empty() -> TwoDnf {
        TwoDnf(Vec::new())
    }

    pub fn from_clause(c: &Clause) -> TwoDnf {
        TwoDnf(c.iter().map(Term::unit).collect())
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.0.binary_search(t).is_ok()
    }

    pub fn contains_literal(&self, l: Literal) -> bool {
        self.contains(&Term::unit(l))
    }

    pub fn is_subset(&self, other: &TwoDnf) -> bool {
        self.0.iter().all(|t| other.contains(t))
    }

    /// Literal occurrences.
    pub fn symbol_count(&self) -> usize {
        self.0.iter().map(Term::len).sum()
    }

    pub fn without(&self, remove: &[Term]) -> TwoDnf {
        TwoDnf(
            self.0
                .iter()
                .filter(|t| !remove.contains(t))
                .cloned()
                .collect(),
        )
    }

    pub fn union(&self, other: &TwoDnf) -> TwoDnf {
        TwoDnf::new(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    pub fn with(&self, extra: impl IntoIterator<Item = Term>) -> TwoDnf {
        TwoDnf::new(self.0.iter().cloned().chain(extra).collect())
    }

    /// True under the total assignment `value`.
    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.0
            .iter()
            .any(|t| t.0.iter().all(|l| value(l.var()) == l.is_positive()))
    }
}

impl fmt::Display for TwoDnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "⊥");
        }
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Res2Just {
    /// Equal to input clause `m`.
    Input(usize),
    /// `x ∨ ¬x`.
    Axiom(Var),
    /// From `A ∨ l1` (line `i`) and `B ∨ l2` (line `j`), `A ∨ B ∨ (l1 ∧ l2)`.
    AndIntro {
        i: usize,
        j: usize,
        l1: Literal,
        l2: Literal,
    },
    /// From `A ∨ term` (line `i`) and `B ∨ ¬l` for each `l` of the term (line `j`), `A ∨ B`.
    Cut { i: usize, j: usize, term: Term },
    /// A superset of line `i`.
    Weaken(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Res2Step {
    pub line: TwoDnf,
    pub just: Res2Just,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Res2Proof {
    pub steps: Vec<Res2Step>,
}

impl Res2Proof {
    pub fn new() -> Res2Proof {
        Res2Proof::default()
    }

    pub fn push(&mut self, line: TwoDnf, just: Res2Just) -> usize {
        self.steps.push(Res2Step { line, just });
        self.steps.len()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// 1-based.
    pub fn line(&self, i: usize) -> &TwoDnf {
        &self.steps[i - 1].line
    }

    /// Total literal occurrences over all lines.
    pub fn size(&self) -> usize {
        self.steps.iter().map(|s| s.line.symbol_count()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Res2ViolationKind {
    BadReference { line: usize },
    MalformedTerm { term: Term },
    VariableOutOfRange { var: Var },
    InputOutOfRange { m: usize },
    InputMismatch { m: usize },
    AxiomMismatch { var: Var },
    PremiseLacksTerm { line: usize, term: Term },
    ConclusionLacksTerm { term: Term },
    UnjustifiedTerm { term: Term },
    LastLineNonEmpty,
    EmptyProof,
}

impl fmt::Display for Res2ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadReference { line } => {
                write!(f, "reference to line {line} is not an earlier line")
            }
            Self::MalformedTerm { term } => write!(
                f,
                "term '{term}' is not a term of one or two distinct literals"
            ),
            Self::VariableOutOfRange { var } => write!(f, "variable {var} beyond the formula"),
            Self::InputOutOfRange { m } => write!(f, "input clause {m} does not exist"),
            Self::InputMismatch { m } => write!(f, "line differs from input clause {m}"),
            Self::AxiomMismatch { var } => write!(f, "line is not the axiom for x{var}"),
            Self::PremiseLacksTerm { line, term } => write!(f, "premise {line} lacks '{term}'"),
            Self::ConclusionLacksTerm { term } => write!(f, "conclusion lacks required '{term}'"),
            Self::UnjustifiedTerm { term } => write!(f, "conclusion has unjustified '{term}'"),
            Self::LastLineNonEmpty => write!(f, "last line nonempty"),
            Self::EmptyProof => write!(f, "empty proof"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Res2Violation {
    pub step: usize,
    pub kind: Res2ViolationKind,
}

impl fmt::Display for Res2Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.kind)
    }
}

/// Checks every line against its rule; with `expect_refutation` the last line
/// must be empty.
pub fn check_res2(
    f: &Cnf,
    pi: &Res2Proof,
    expect_refutation: bool,
) -> Result<(), Vec<Res2Violation>> {
    let mut out = Vec::new();
    for (k, step) in pi.steps.iter().enumerate() {
        if let Err(kind) = check_step(f, &pi.steps[..k], step) {
            out.push(Res2Violation { step: k + 1, kind });
        }
    }
    if expect_refutation {
        match pi.steps.last() {
            None => out.push(Res2Violation {
                step: 0,
                kind: Res2ViolationKind::EmptyProof,
            }),
            Some(s) if !s.line.is_empty() => out.push(Res2Violation {
                step: pi.len(),
                kind: Res2ViolationKind::LastLineNonEmpty,
            }),
            Some(_) => {}
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn check_step(f: &Cnf, earlier: &[Res2Step], step: &Res2Step) -> Result<(), Res2ViolationKind> {
    use Res2ViolationKind as K;
    let line = &step.line;
    for t in line.terms() {
        if !t.is_well_formed() {
            return Err(K::MalformedTerm { term: t.clone() });
        }
        if t.max_var() > f.num_vars() {
            return Err(K::VariableOutOfRange { var: t.max_var() });
        }
    }
    let get = |i: usize| -> Result<&TwoDnf, Res2ViolationKind> {
        i.checked_sub(1)
            .and_then(|k| earlier.get(k))
            .map(|s| &s.line)
            .ok_or(K::BadReference { line: i })
    };
    let need = |premise: &TwoDnf, at: usize, term: &Term| {
        if premise.contains(term) {
            Ok(())
        } else {
            Err(K::PremiseLacksTerm {
                line: at,
                term: term.clone(),
            })
        }
    };
    // lower ⊆ line ⊆ upper.
    let between = |lower: &TwoDnf, upper: &TwoDnf| {
        if let Some(t) = lower.terms().iter().find(|t| !line.contains(t)) {
            return Err(K::ConclusionLacksTerm { term: t.clone() });
        }
        if let Some(t) = line.terms().iter().find(|t| !upper.contains(t)) {
            return Err(K::UnjustifiedTerm { term: t.clone() });
        }
        Ok(())
    };
    match &step.just {
        Res2Just::Input(m) => {
            let c = f.clause(*m).ok_or(K::InputOutOfRange { m: *m })?;
            if *line != TwoDnf::from_clause(c) {
                return Err(K::InputMismatch { m: *m });
            }
        }
        Res2Just::Axiom(x) => {
            let axiom = TwoDnf::new(vec![
                Term::unit(Literal::pos(*x)),
                Term::unit(Literal::neg(*x)),
            ]);
            if *x == 0 || *line != axiom {
                return Err(K::AxiomMismatch { var: *x });
            }
        }
        Res2Just::AndIntro { i, j, l1, l2 } => {
            let (a, b) = (get(*i)?, get(*j)?);
            let term = Term::pair(*l1, *l2);
            if !term.is_well_formed() {
                return Err(K::MalformedTerm { term });
            }
            let (u1, u2) = (Term::unit(*l1), Term::unit(*l2));
            need(a, *i, &u1)?;
            need(b, *j, &u2)?;
            let lower = a
                .without(&[u1])
                .union(&b.without(&[u2]))
                .with([term.clone()]);
            let upper = a.union(b).with([term]);
            between(&lower, &upper)?;
        }
        Res2Just::Cut { i, j, term } => {
            let (a, b) = (get(*i)?, get(*j)?);
            if !term.is_well_formed() {
                return Err(K::MalformedTerm { term: term.clone() });
            }
            need(a, *i, term)?;
            let negs: Vec<Term> = term.literals().iter().map(|l| Term::unit(!*l)).collect();
            for n in &negs {
                need(b, *j, n)?;
            }
            let lower = a
                .without(std::slice::from_ref(term))
                .union(&b.without(&negs));
            between(&lower, &a.union(b))?;
        }
        Res2Just::Weaken(i) => {
            let a = get(*i)?;
            if let Some(t) = a.terms().iter().find(|t| !line.contains(t)) {
                return Err(K::ConclusionLacksTerm { term: t.clone() });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct Res2ParseError {
    pub line: usize,
    pub message: String,
}

fn parse_literal(token: &str) -> Result<Literal, String> {
    token
        .parse::<i64>()
        .ok()
        .and_then(Literal::from_dimacs)
        .ok_or_else(|| format!("bad literal '{token}'"))
}

/// Parses `<idx> <term;term;...> J <justification>`, terms as `&`-joined
/// literals. An empty line omits the term field. Justifications: `I m`,
/// `X var`, `A i j l1 l2`, `C i j l1 [l2]`, `W i`.
pub fn parse_res2(text: &str) -> Result<Res2Proof, Res2ParseError> {
    use crate::resolution::parse_index;
    let mut pi = Res2Proof::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let err = |message: String| Res2ParseError {
            line: k + 1,
            message,
        };
        let mut tokens = line.split_whitespace().peekable();
        let idx = parse_index(tokens.next(), "line index").map_err(err)?;
        if idx != pi.len() + 1 {
            return Err(err(format!(
                "expected line index {}, found {idx}",
                pi.len() + 1
            )));
        }
        let mut terms = Vec::new();
        if tokens.peek() != Some(&"J") {
            let field = tokens.next().ok_or_else(|| err("missing terms".into()))?;
            for t in field.split(';') {
                let lits = t
                    .split('&')
                    .map(parse_literal)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(err)?;
                terms.push(Term::new(lits));
            }
        }
        if tokens.next() != Some("J") {
            return Err(err("expected 'J'".into()));
        }
        let rest: Vec<&str> = tokens.collect();
        let lit = |k: usize| -> Result<Literal, Res2ParseError> {
            rest.get(k)
                .ok_or_else(|| err("missing literal".into()))
                .and_then(|t| parse_literal(t).map_err(err))
        };
        let num = |k: usize, what: &str| parse_index(rest.get(k).copied(), what).map_err(err);
        let just = match rest.first().copied() {
            Some("I") if rest.len() == 2 => Res2Just::Input(num(1, "input index")?),
            Some("X") if rest.len() == 2 => Res2Just::Axiom(num(1, "variable")? as Var),
            Some("W") if rest.len() == 2 => Res2Just::Weaken(num(1, "line")?),
            Some("A") if rest.len() == 5 => Res2Just::AndIntro {
                i: num(1, "line")?,
                j: num(2, "line")?,
                l1: lit(3)?,
                l2: lit(4)?,
            },
            Some("C") if rest.len() >= 4 => Res2Just::Cut {
                i: num(1, "line")?,
                j: num(2, "line")?,
                term: Term::new((3..rest.len()).map(lit).collect::<Result<_, _>>()?),
            },
            other => return Err(err(format!("bad justification {other:?}"))),
        };
        pi.push(TwoDnf::new(terms), just);
    }
    Ok(pi)
}

pub fn write_res2(pi: &Res2Proof) -> String {
    let mut out = String::new();
    for (k, step) in pi.steps.iter().enumerate() {
        out.push_str(&(k + 1).to_string());
        if !step.line.is_empty() {
            out.push(' ');
            out.push_str(&step.line.to_string());
        }
        out.push_str(" J ");
        let just = match &step.just {
            Res2Just::Input(m) => format!("I {m}"),
            Res2Just::Axiom(x) => format!("X {x}"),
            Res2Just::Weaken(i) => format!("W {i}"),
            Res2Just::AndIntro { i, j, l1, l2 } => {
                format!("A {i} {j} {} {}", l1.to_dimacs(), l2.to_dimacs())
            }
            Res2Just::Cut { i, j, term } => {
                let lits: Vec<String> = term
                    .literals()
                    .iter()
                    .map(|l| l.to_dimacs().to_string())
                    .collect();
                format!("C {i} {j} {}", lits.join(" "))
            }
        };
        out.push_str(&just);
        out.push('\n');
    }
    out
}
