//! Resolution proofs with per-step justifications: checking, height, and
//! restriction by a partial assignment.
//!
//! Step and input indices are 1-based throughout, matching the text format.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, PartialAssignment, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Justification {
    /// The clause is a weakening of input clause `m`.
    Input(usize),
    /// The clause is a weakening of the resolvent of steps `left` (holding the
    /// positive pivot literal) and `right` (holding the negative one).
    Resolvent {
        left: usize,
        right: usize,
        pivot: Var,
    },
    /// The clause is a weakening of an earlier step.
    Weaken(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResStep {
    pub clause: Clause,
    pub just: Justification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionProof {
    pub steps: Vec<ResStep>,
}

impl ResolutionProof {
    pub fn new() -> ResolutionProof {
        ResolutionProof::default()
    }

    /// Appends a step and returns its 1-based index.
    pub fn push(&mut self, clause: Clause, just: Justification) -> usize {
        self.steps.push(ResStep { clause, just });
        self.steps.len()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// 1-based access.
    pub fn step(&self, u: usize) -> Option<&ResStep> {
        u.checked_sub(1).and_then(|k| self.steps.get(k))
    }

    pub fn last_clause(&self) -> Option<&Clause> {
        self.steps.last().map(|s| &s.clause)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    EmptyProof,
    LastClauseNonEmpty,
    /// A referenced step is 0 or not strictly earlier.
    BadStepReference {
        referenced: usize,
    },
    InputOutOfRange {
        m: usize,
    },
    VariableOutOfRange {
        var: Var,
    },
    PivotMissing {
        pivot: Var,
    },
    /// The clause lacks a literal it must contain.
    MissingLiteral {
        literal: Literal,
    },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::EmptyProof => write!(f, "proof has no steps"),
            ViolationKind::LastClauseNonEmpty => write!(f, "last clause nonempty"),
            ViolationKind::BadStepReference { referenced } => {
                write!(f, "reference to step {referenced} is not an earlier step")
            }
            ViolationKind::InputOutOfRange { m } => write!(f, "input clause {m} does not exist"),
            ViolationKind::VariableOutOfRange { var } => {
                write!(f, "variable {var} is beyond the formula's variables")
            }
            ViolationKind::PivotMissing { pivot } => {
                write!(f, "premises do not clash on pivot {pivot}")
            }
            ViolationKind::MissingLiteral { literal } => {
                write!(f, "clause is missing required literal {literal}")
            }
        }
    }
}

/// A failed check at a 1-based step (0 for whole-proof conditions).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.kind)
    }
}

fn first_missing(required: &Clause, clause: &Clause) -> Option<Literal> {
    required.iter().find(|&l| !clause.contains(l))
}

/// The premise a justification requires the step's clause to contain.
fn required_subclause(
    f: &Cnf,
    earlier: &[ResStep],
    just: Justification,
) -> Result<Clause, ViolationKind> {
    let fetch = |u: usize| {
        u.checked_sub(1)
            .and_then(|k| earlier.get(k))
            .map(|s| &s.clause)
            .ok_or(ViolationKind::BadStepReference { referenced: u })
    };
    match just {
        Justification::Input(m) => f
            .clause(m)
            .cloned()
            .ok_or(ViolationKind::InputOutOfRange { m }),
        Justification::Resolvent { left, right, pivot } => {
            let a = fetch(left)?;
            let b = fetch(right)?;
            a.resolve(b, pivot)
                .map_err(|_| ViolationKind::PivotMissing { pivot })
        }
        Justification::Weaken(u) => fetch(u).cloned(),
    }
}

/// Checks every step; on failure returns all violations in step order.
pub fn check_resolution(
    f: &Cnf,
    pi: &ResolutionProof,
    expect_refutation: bool,
) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    for (k, step) in pi.steps.iter().enumerate() {
        let u = k + 1;
        if step.clause.max_var() > f.num_vars() {
            violations.push(Violation {
                step: u,
                kind: ViolationKind::VariableOutOfRange {
                    var: step.clause.max_var(),
                },
            });
            continue;
        }
        match required_subclause(f, &pi.steps[..k], step.just) {
            Ok(required) => {
                if let Some(literal) = first_missing(&required, &step.clause) {
                    violations.push(Violation {
                        step: u,
                        kind: ViolationKind::MissingLiteral { literal },
                    });
                }
            }
            Err(kind) => violations.push(Violation { step: u, kind }),
        }
    }
    if expect_refutation {
        match pi.last_clause() {
            None => violations.push(Violation {
                step: 0,
                kind: ViolationKind::EmptyProof,
            }),
            Some(c) if !c.is_empty() => violations.push(Violation {
                step: pi.len(),
                kind: ViolationKind::LastClauseNonEmpty,
            }),
            Some(_) => {}
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Per-step heights: inputs have height 1, a resolvent one more than its
/// higher premise, and a step weakening inherits its source's height.
///
/// Assumes references point backwards; a dangling reference counts as height 0.
pub fn step_heights(pi: &ResolutionProof) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(pi.len());
    for step in &pi.steps {
        let at = |u: usize| {
            u.checked_sub(1)
                .and_then(|k| h.get(k))
                .copied()
                .unwrap_or(0)
        };
        let value = match step.just {
            Justification::Input(_) => 1,
            Justification::Resolvent { left, right, .. } => 1 + at(left).max(at(right)),
            Justification::Weaken(u) => at(u),
        };
        h.push(value);
    }
    h
}

pub fn height(pi: &ResolutionProof) -> usize {
    step_heights(pi).into_iter().max().unwrap_or(0)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RestrictError {
    #[error("input proof does not check: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidProof(Vec<Violation>),
}

/// Restricts a checked refutation of `f` by `sigma`.
///
/// Returns `f↾σ` and a refutation of it whose clauses are the surviving
/// restricted clauses in order. A resolution step whose pivot is assigned
/// becomes a weakening of the premise that held the falsified pivot literal.
pub fn restrict_proof(
    f: &Cnf,
    pi: &ResolutionProof,
    sigma: &PartialAssignment,
) -> Result<(Cnf, ResolutionProof), RestrictError> {
    check_resolution(f, pi, false).map_err(RestrictError::InvalidProof)?;
    let restricted = f.restrict(sigma);
    let input_map = f.restrict_index_map(sigma);
    // new_index[u-1] is the 1-based index of step u in the output, if kept.
    let mut new_index: Vec<Option<usize>> = Vec::with_capacity(pi.len());
    let mut out = ResolutionProof::new();

    for (k, step) in pi.steps.iter().enumerate() {
        let Some(clause) = step.clause.restrict(sigma) else {
            new_index.push(None);
            continue;
        };
        let kept = |u: usize| -> usize {
            new_index[u - 1].unwrap_or_else(|| {
                panic!(
                    "restriction repair failed at step {}: premise {u} was dropped",
                    k + 1
                )
            })
        };
        let just = match step.just {
            Justification::Input(m) => {
                Justification::Input(input_map[m - 1].map(|x| x + 1).unwrap_or_else(|| {
                    panic!(
                        "restriction repair failed at step {}: input {m} was satisfied",
                        k + 1
                    )
                }))
            }
            Justification::Weaken(u) => Justification::Weaken(kept(u)),
            Justification::Resolvent { left, right, pivot } => match sigma.get(pivot) {
                None => Justification::Resolvent {
                    left: kept(left),
                    right: kept(right),
                    pivot,
                },
                // x = 1 falsifies ¬x, which sits in the right premise.
                Some(true) => Justification::Weaken(kept(right)),
                Some(false) => Justification::Weaken(kept(left)),
            },
        };
        out.push(clause, just);
        new_index.push(Some(out.len()));
    }

    debug_assert!(check_resolution(&restricted, &out, false).is_ok());
    Ok((restricted, out))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ProofParseError {
    pub line: usize,
    pub message: String,
}

pub(crate) fn parse_literals_until_zero<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
) -> Result<Vec<Literal>, String> {
    let mut lits = Vec::new();
    loop {
        let token = tokens.next().ok_or("clause not terminated by 0")?;
        let value: i64 = token
            .parse()
            .map_err(|_| format!("bad literal '{token}'"))?;
        match Literal::from_dimacs(value) {
            Some(l) => lits.push(l),
            None => return Ok(lits),
        }
    }
}

pub(crate) fn parse_index(token: Option<&str>, what: &str) -> Result<usize, String> {
    let token = token.ok_or_else(|| format!("missing {what}"))?;
    token.parse().map_err(|_| format!("bad {what} '{token}'"))
}

/// Parses the one-step-per-line proof format; blank lines and `c` comments are skipped.
pub fn parse_proof(text: &str) -> Result<ResolutionProof, ProofParseError> {
    let mut pi = ResolutionProof::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let err = |message: String| ProofParseError {
            line: k + 1,
            message,
        };
        let mut tokens = line.split_whitespace();
        let idx = parse_index(tokens.next(), "step index").map_err(err)?;
        if idx != pi.len() + 1 {
            return Err(err(format!(
                "expected step index {}, found {idx}",
                pi.len() + 1
            )));
        }
        let lits = parse_literals_until_zero(&mut tokens).map_err(err)?;
        let just = match tokens.next() {
            Some("I") => {
                Justification::Input(parse_index(tokens.next(), "input index").map_err(err)?)
            }
            Some("W") => {
                Justification::Weaken(parse_index(tokens.next(), "step index").map_err(err)?)
            }
            Some("R") => {
                let left = parse_index(tokens.next(), "left premise").map_err(err)?;
                let right = parse_index(tokens.next(), "right premise").map_err(err)?;
                let pivot = parse_index(tokens.next(), "pivot").map_err(err)?;
                let pivot = Var::try_from(pivot)
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| err(format!("bad pivot {pivot}")))?;
                Justification::Resolvent { left, right, pivot }
            }
            other => return Err(err(format!("unknown justification {other:?}"))),
        };
        if let Some(extra) = tokens.next() {
            return Err(err(format!("trailing token '{extra}'")));
        }
        pi.push(Clause::new(lits), just);
    }
    Ok(pi)
}

pub fn write_proof(pi: &ResolutionProof) -> String {
    let mut out = String::new();
    for (k, step) in pi.steps.iter().enumerate() {
        out.push_str(&format!("{} ", k + 1));
        for lit in step.clause.iter() {
            out.push_str(&format!("{} ", lit.to_dimacs()));
        }
        match step.just {
            Justification::Input(m) => out.push_str(&format!("0 I {m}\n")),
            Justification::Weaken(u) => out.push_str(&format!("0 W {u}\n")),
            Justification::Resolvent { left, right, pivot } => {
                out.push_str(&format!("0 R {left} {right} {pivot}\n"))
            }
        }
    }
    out
}
