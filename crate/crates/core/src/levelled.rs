//! Refutations arranged in `s` levels of `t` clauses, the simulation of
//! ordinary resolution by them, and the correspondence with satisfying
//! assignments of the fixed-formula refutation statement.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, ClauseSink, ClauseStatus, Cnf, Literal, PartialAssignment, Var};
use crate::encoders::families::emit_ref_f;
use crate::encoders::layout::{Dims, RefVar, VarLayout};
use crate::resolution::{
    check_resolution, step_heights, Justification, ResolutionProof, Violation,
};

/// How a clause above level 1 arises: a weakening of the resolvent of
/// `C_{i-1,left}` (positive pivot) and `C_{i-1,right}` (negative pivot).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Upper {
    pub left: usize,
    pub right: usize,
    pub pivot: Var,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelledRefutation {
    pub s: usize,
    pub t: usize,
    /// Row-major, `(i,j)` at `(i-1)t + (j-1)`.
    cells: Vec<Clause>,
    /// Input index of each level-1 clause.
    level1: Vec<usize>,
    /// Row-major over levels `2..=s`.
    upper: Vec<Upper>,
}

impl LevelledRefutation {
    /// A grid of empty clauses, every level-1 cell citing input 1 and every
    /// upper cell citing `(1, 1, 1)`.
    pub fn blank(s: usize, t: usize) -> LevelledRefutation {
        assert!(s >= 1 && t >= 1, "grid must be nonempty");
        LevelledRefutation {
            s,
            t,
            cells: vec![Clause::empty(); s * t],
            level1: vec![1; t],
            upper: vec![
                Upper {
                    left: 1,
                    right: 1,
                    pivot: 1
                };
                (s - 1) * t
            ],
        }
    }

    pub fn cell(&self, i: usize, j: usize) -> &Clause {
        &self.cells[(i - 1) * self.t + (j - 1)]
    }

    pub fn set_cell(&mut self, i: usize, j: usize, c: Clause) {
        self.cells[(i - 1) * self.t + (j - 1)] = c;
    }

    pub fn input(&self, j: usize) -> usize {
        self.level1[j - 1]
    }

    pub fn set_input(&mut self, j: usize, m: usize) {
        self.level1[j - 1] = m;
    }

    /// Justification of cell `(i,j)`, `i ≥ 2`.
    pub fn upper(&self, i: usize, j: usize) -> Upper {
        self.upper[(i - 2) * self.t + (j - 1)]
    }

    pub fn set_upper(&mut self, i: usize, j: usize, u: Upper) {
        self.upper[(i - 2) * self.t + (j - 1)] = u;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelledViolationKind {
    InputOutOfRange { m: usize },
    PremiseOutOfRange { column: usize },
    PivotMissing { var: Var },
    MissingLiteral { literal: Literal },
    VariableOutOfRange { var: Var },
    LastCellNonEmpty,
}

impl fmt::Display for LevelledViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InputOutOfRange { m } => write!(f, "input clause {m} does not exist"),
            Self::PremiseOutOfRange { column } => write!(f, "premise column {column} out of range"),
            Self::PivotMissing { var } => write!(f, "premises do not clash on x{var}"),
            Self::MissingLiteral { literal } => write!(f, "missing required literal {literal}"),
            Self::VariableOutOfRange { var } => write!(f, "variable {var} beyond the formula"),
            Self::LastCellNonEmpty => write!(f, "C_{{s,t}} nonempty"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelledViolation {
    pub cell: (usize, usize),
    pub kind: LevelledViolationKind,
}

impl fmt::Display for LevelledViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cell ({},{}): {}", self.cell.0, self.cell.1, self.kind)
    }
}

/// Checks every cell against its justification and that `C_{s,t} = ∅`.
pub fn check_levelled(f: &Cnf, lr: &LevelledRefutation) -> Result<(), Vec<LevelledViolation>> {
    use LevelledViolationKind as K;
    let mut out = Vec::new();
    for i in 1..=lr.s {
        for j in 1..=lr.t {
            let c = lr.cell(i, j);
            let mut report = |kind| out.push(LevelledViolation { cell: (i, j), kind });
            if c.max_var() > f.num_vars() {
                report(K::VariableOutOfRange { var: c.max_var() });
                continue;
            }
            let required = if i == 1 {
                match f.clause(lr.input(j)) {
                    Some(cm) => cm.clone(),
                    None => {
                        report(K::InputOutOfRange { m: lr.input(j) });
                        continue;
                    }
                }
            } else {
                let u = lr.upper(i, j);
                if let Some(&column) = [u.left, u.right].iter().find(|&&x| x == 0 || x > lr.t) {
                    report(K::PremiseOutOfRange { column });
                    continue;
                }
                match lr
                    .cell(i - 1, u.left)
                    .resolve(lr.cell(i - 1, u.right), u.pivot)
                {
                    Ok(res) => res,
                    Err(_) => {
                        report(K::PivotMissing { var: u.pivot });
                        continue;
                    }
                }
            };
            let missing = required.iter().find(|l| !c.contains(*l));
            if let Some(literal) = missing {
                report(K::MissingLiteral { literal });
            }
        }
    }
    if !lr.cell(lr.s, lr.t).is_empty() {
        out.push(LevelledViolation {
            cell: (lr.s, lr.t),
            kind: K::LastCellNonEmpty,
        });
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimulateError {
    #[error("input is not a refutation: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidProof(Vec<Violation>),
    #[error("step {step} mentions every variable, so no fresh variable exists")]
    FatClause { step: usize },
    #[error("step {step} is tautological")]
    TautologicalStep { step: usize },
}

fn fresh_var(c: &Clause, n: Var) -> Option<Var> {
    (1..=n).find(|&v| !c.mentions(v))
}

/// The root justification of a step, following weakenings back.
fn root_just(pi: &ResolutionProof, mut u: usize) -> Justification {
    loop {
        match pi.steps[u - 1].just {
            Justification::Weaken(v) => u = v,
            other => return other,
        }
    }
}

/// Simulates a refutation of length `len` and height `h` by one of `h`
/// levels of `3·len` clauses.
///
/// Step `j` occupies columns `3j-2, 3j-1, 3j` with the triple
/// `(C_j ∪ {x}, C_j ∪ {¬x}, C_j)` from level `h_j` upwards, `x` the smallest
/// variable absent from `C_j`. Levels below `h_j` repeat the triple of step 1.
pub fn simulate(f: &Cnf, pi: &ResolutionProof) -> Result<LevelledRefutation, SimulateError> {
    check_resolution(f, pi, true).map_err(SimulateError::InvalidProof)?;
    let n = f.num_vars();
    let mut fresh = Vec::with_capacity(pi.len());
    for (k, step) in pi.steps.iter().enumerate() {
        if step.clause.is_tautological() {
            return Err(SimulateError::TautologicalStep { step: k + 1 });
        }
        fresh.push(fresh_var(&step.clause, n).ok_or(SimulateError::FatClause { step: k + 1 })?);
    }
    let heights = step_heights(pi);
    let h = heights.iter().copied().max().unwrap_or(0);
    let len = pi.len();
    let mut lr = LevelledRefutation::blank(h, 3 * len);

    let first_input = match root_just(pi, 1) {
        Justification::Input(m) => m,
        _ => unreachable!("a checked proof starts with an input weakening"),
    };

    let place =
        |lr: &mut LevelledRefutation, i: usize, j: usize, step: usize, input: Option<usize>| {
            let c = &pi.steps[step - 1].clause;
            let x = fresh[step - 1];
            let triple = [c.with(Literal::pos(x)), c.with(Literal::neg(x)), c.clone()];
            for (k, clause) in triple.into_iter().enumerate() {
                lr.set_cell(i, 3 * j - 2 + k, clause);
                match input {
                    Some(m) if i == 1 => lr.set_input(3 * j - 2 + k, m),
                    _ => lr.set_upper(
                        i,
                        3 * j - 2 + k,
                        Upper {
                            left: 3 * j - 2,
                            right: 3 * j - 1,
                            pivot: x,
                        },
                    ),
                }
            }
        };

    for j in 1..=len {
        let hj = heights[j - 1];
        match root_just(pi, j) {
            Justification::Input(m) => {
                for i in 1..=h {
                    place(&mut lr, i, j, j, Some(m));
                }
            }
            Justification::Resolvent { left, right, pivot } => {
                for i in 1..hj {
                    place(&mut lr, i, j, 1, Some(first_input));
                }
                for i in hj..=h {
                    place(&mut lr, i, j, j, None);
                }
                let resolvent = Upper {
                    left: 3 * left,
                    right: 3 * right,
                    pivot,
                };
                for k in 0..3 {
                    lr.set_upper(hj, 3 * j - 2 + k, resolvent);
                }
            }
            Justification::Weaken(_) => unreachable!("root_just follows weakenings"),
        }
    }
    Ok(lr)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("cell ({0},{1}) is tautological")]
    TautologicalCell(usize, usize),
    #[error("grid {s}×{t} does not match the layout dimensions {layout:?}")]
    DimensionMismatch { s: usize, t: usize, layout: Dims },
    #[error("assignment does not satisfy clause {clause} of family {family}")]
    NotSatisfying { family: String, clause: Clause },
}

/// The assignment describing `lr` over the variables of `layout`: cell
/// contents in D, pivots in V, input indices in I, premise columns in L, R.
pub fn encode_witness(
    lr: &LevelledRefutation,
    layout: &VarLayout,
) -> Result<PartialAssignment, WitnessError> {
    let d = layout.dims();
    if (d.s, d.t) != (lr.s, lr.t) {
        return Err(WitnessError::DimensionMismatch {
            s: lr.s,
            t: lr.t,
            layout: d,
        });
    }
    let mut alpha = PartialAssignment::new();
    for i in 1..=d.s {
        for j in 1..=d.t {
            let c = lr.cell(i, j);
            if c.is_tautological() {
                return Err(WitnessError::TautologicalCell(i, j));
            }
            for l in 1..=d.n {
                for b in 0..=1u8 {
                    let lit = Literal::with_polarity(l as Var, b);
                    alpha.set(layout.var(RefVar::D { i, j, l, b }), c.contains(lit));
                }
            }
            if i == 1 {
                for m in 1..=d.r {
                    alpha.set(layout.var(RefVar::I { j, m }), m == lr.input(j));
                }
            } else {
                let u = lr.upper(i, j);
                for l in 1..=d.n {
                    alpha.set(layout.var(RefVar::V { i, j, l }), l as Var == u.pivot);
                }
                for jp in 1..=d.t {
                    alpha.set(layout.var(RefVar::L { i, j, jp }), jp == u.left);
                    alpha.set(layout.var(RefVar::R { i, j, jp }), jp == u.right);
                }
            }
        }
    }
    Ok(alpha)
}

/// Records the first clause not satisfied by an assignment.
struct FirstUnsatisfied<'a> {
    alpha: &'a PartialAssignment,
    family: &'static str,
    found: Option<(String, Clause)>,
}

impl ClauseSink for FirstUnsatisfied<'_> {
    fn begin_family(&mut self, label: &'static str) {
        self.family = label;
    }

    fn push(&mut self, clause: Clause) {
        if self.found.is_none() && clause.eval(self.alpha) != ClauseStatus::Satisfied {
            self.found = Some((self.family.to_string(), clause));
        }
    }
}

/// Returns the first clause of the fixed-formula statement that `alpha` does
/// not satisfy, with its family label.
pub fn first_unsatisfied_ref_clause(
    f: &Cnf,
    layout: &VarLayout,
    alpha: &PartialAssignment,
) -> Result<Option<(String, Clause)>, crate::encoders::families::EncodeError> {
    let mut sink = FirstUnsatisfied {
        alpha,
        family: "",
        found: None,
    };
    emit_ref_f(f, layout, &mut sink)?;
    Ok(sink.found)
}

/// Reads a levelled refutation off a satisfying assignment of the
/// fixed-formula statement.
pub fn decode_witness(
    alpha: &PartialAssignment,
    layout: &VarLayout,
    f: &Cnf,
) -> Result<LevelledRefutation, WitnessError> {
    let d = layout.dims();
    let mismatch = || WitnessError::DimensionMismatch {
        s: d.s,
        t: d.t,
        layout: d,
    };
    if let Some((family, clause)) =
        first_unsatisfied_ref_clause(f, layout, alpha).map_err(|_| mismatch())?
    {
        return Err(WitnessError::NotSatisfying { family, clause });
    }
    let on = |v: RefVar| alpha.get(layout.var(v)) == Some(true);
    // Totality and functionality clauses hold, so each find succeeds.
    let pick = |range: std::ops::RangeInclusive<usize>, var: &dyn Fn(usize) -> RefVar| {
        range.clone().find(|&x| on(var(x))).expect("one-hot value")
    };
    let mut lr = LevelledRefutation::blank(d.s, d.t);
    for i in 1..=d.s {
        for j in 1..=d.t {
            let lits = (1..=d.n).flat_map(|l| {
                [0u8, 1]
                    .into_iter()
                    .filter(move |&b| on(RefVar::D { i, j, l, b }))
                    .map(move |b| Literal::with_polarity(l as Var, b))
            });
            lr.set_cell(i, j, lits.collect());
            if i == 1 {
                lr.set_input(j, pick(1..=d.r, &|m| RefVar::I { j, m }));
            } else {
                lr.set_upper(
                    i,
                    j,
                    Upper {
                        left: pick(1..=d.t, &|jp| RefVar::L { i, j, jp }),
                        right: pick(1..=d.t, &|jp| RefVar::R { i, j, jp }),
                        pivot: pick(1..=d.n, &|l| RefVar::V { i, j, l }) as Var,
                    },
                );
            }
        }
    }
    Ok(lr)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct LevelledParseError {
    pub line: usize,
    pub message: String,
}

/// Parses `levelled <s> <t>` followed by one line per cell:
/// `<i> <j> <lits> 0 I <m>` or `<i> <j> <lits> 0 R <j'> <j''> <pivot>`.
pub fn parse_levelled(text: &str) -> Result<LevelledRefutation, LevelledParseError> {
    use crate::resolution::{parse_index, parse_literals_until_zero};
    let mut lr: Option<LevelledRefutation> = None;
    let mut seen = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let err = |message: String| LevelledParseError {
            line: k + 1,
            message,
        };
        let mut tokens = line.split_whitespace();
        let Some(grid) = lr.as_mut() else {
            if tokens.next() != Some("levelled") {
                return Err(err("expected header 'levelled <s> <t>'".into()));
            }
            let s = parse_index(tokens.next(), "s").map_err(err)?;
            let t = parse_index(tokens.next(), "t").map_err(err)?;
            if s == 0 || t == 0 {
                return Err(err("s and t must be positive".into()));
            }
            lr = Some(LevelledRefutation::blank(s, t));
            seen = vec![false; s * t];
            continue;
        };
        let i = parse_index(tokens.next(), "level").map_err(err)?;
        let j = parse_index(tokens.next(), "column").map_err(err)?;
        if !(1..=grid.s).contains(&i) || !(1..=grid.t).contains(&j) {
            return Err(err(format!("cell ({i},{j}) outside the grid")));
        }
        if std::mem::replace(&mut seen[(i - 1) * grid.t + j - 1], true) {
            return Err(err(format!("cell ({i},{j}) given twice")));
        }
        let lits = parse_literals_until_zero(&mut tokens).map_err(err)?;
        grid.set_cell(i, j, Clause::new(lits));
        match (tokens.next(), i) {
            (Some("I"), 1) => {
                grid.set_input(j, parse_index(tokens.next(), "input index").map_err(err)?)
            }
            (Some("R"), 2..) => {
                let left = parse_index(tokens.next(), "left column").map_err(err)?;
                let right = parse_index(tokens.next(), "right column").map_err(err)?;
                let pivot = parse_index(tokens.next(), "pivot").map_err(err)?;
                let pivot = Var::try_from(pivot).map_err(|_| err(format!("bad pivot {pivot}")))?;
                grid.set_upper(i, j, Upper { left, right, pivot });
            }
            (other, _) => {
                return Err(err(format!(
                    "justification {other:?} not valid on level {i}"
                )))
            }
        }
        if let Some(extra) = tokens.next() {
            return Err(err(format!("trailing token '{extra}'")));
        }
    }
    let lines = text.lines().count().max(1);
    let lr = lr.ok_or(LevelledParseError {
        line: lines,
        message: "missing header".into(),
    })?;
    if let Some(k) = seen.iter().position(|x| !x) {
        return Err(LevelledParseError {
            line: lines,
            message: format!("cell ({},{}) missing", k / lr.t + 1, k % lr.t + 1),
        });
    }
    Ok(lr)
}

pub fn write_levelled(lr: &LevelledRefutation) -> String {
    let mut out = format!("levelled {} {}\n", lr.s, lr.t);
    for i in 1..=lr.s {
        for j in 1..=lr.t {
            out.push_str(&format!("{i} {j} "));
            for lit in lr.cell(i, j).iter() {
                out.push_str(&format!("{} ", lit.to_dimacs()));
            }
            if i == 1 {
                out.push_str(&format!("0 I {}\n", lr.input(j)));
            } else {
                let u = lr.upper(i, j);
                out.push_str(&format!("0 R {} {} {}\n", u.left, u.right, u.pivot));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[i64]) -> Clause {
        Clause::from_dimacs(v)
    }

    fn contradiction() -> Cnf {
        Cnf::new(2, vec![c(&[1]), c(&[-1])]).unwrap()
    }

    fn two_by_two() -> LevelledRefutation {
        let mut lr = LevelledRefutation::blank(2, 2);
        lr.set_cell(1, 1, c(&[1]));
        lr.set_cell(1, 2, c(&[-1]));
        lr.set_input(1, 1);
        lr.set_input(2, 2);
        for j in 1..=2 {
            lr.set_upper(
                2,
                j,
                Upper {
                    left: 1,
                    right: 2,
                    pivot: 1,
                },
            );
        }
        lr
    }

    fn three_step() -> ResolutionProof {
        let mut pi = ResolutionProof::new();
        pi.push(c(&[1]), Justification::Input(1));
        pi.push(c(&[-1]), Justification::Input(2));
        pi.push(
            Clause::empty(),
            Justification::Resolvent {
                left: 1,
                right: 2,
                pivot: 1,
            },
        );
        pi
    }

    #[test]
    fn small_grid_checks() {
        check_levelled(&contradiction(), &two_by_two()).unwrap();
    }

    #[test]
    fn nonempty_last_cell_is_reported() {
        let mut lr = two_by_two();
        lr.set_cell(2, 2, c(&[2]));
        let v = check_levelled(&contradiction(), &lr).unwrap_err();
        assert_eq!(
            v.last().unwrap().kind,
            LevelledViolationKind::LastCellNonEmpty
        );
        assert_eq!(v.last().unwrap().kind.to_string(), "C_{s,t} nonempty");
    }

    #[test]
    fn level_one_cell_must_weaken_its_input() {
        let mut lr = two_by_two();
        lr.set_cell(1, 1, c(&[2]));
        let v = check_levelled(&contradiction(), &lr).unwrap_err();
        assert_eq!(v[0].cell, (1, 1));
    }

    #[test]
    fn simulation_of_three_step_refutation() {
        let f = contradiction();
        let lr = simulate(&f, &three_step()).unwrap();
        assert_eq!((lr.s, lr.t), (2, 9));
        check_levelled(&f, &lr).unwrap();
        assert_eq!(lr.cell(2, 3), &c(&[1]));
        assert_eq!(lr.cell(2, 6), &c(&[-1]));
        assert_eq!(lr.cell(2, 9), &Clause::empty());
        assert_eq!(lr.cell(1, 7), &c(&[1, 2]));
        assert_eq!(lr.cell(1, 8), &c(&[1, -2]));
        assert_eq!(lr.cell(2, 7), &c(&[1]));
        assert_eq!(lr.cell(2, 8), &c(&[-1]));
    }

    #[test]
    fn simulation_follows_step_weakenings() {
        let f = Cnf::new(3, vec![c(&[1, 2]), c(&[-1]), c(&[-2])]).unwrap();
        let mut pi = ResolutionProof::new();
        pi.push(c(&[1, 2]), Justification::Input(1));
        pi.push(c(&[-1]), Justification::Input(2));
        pi.push(
            c(&[2]),
            Justification::Resolvent {
                left: 1,
                right: 2,
                pivot: 1,
            },
        );
        pi.push(c(&[2]), Justification::Weaken(3));
        pi.push(c(&[-2]), Justification::Input(3));
        pi.push(
            Clause::empty(),
            Justification::Resolvent {
                left: 4,
                right: 5,
                pivot: 2,
            },
        );
        let lr = simulate(&f, &pi).unwrap();
        assert_eq!((lr.s, lr.t), (3, 18));
        check_levelled(&f, &lr).unwrap();
        assert_eq!(
            lr.upper(2, 12),
            Upper {
                left: 3,
                right: 6,
                pivot: 1
            }
        );
    }

    #[test]
    fn fat_clause_is_rejected() {
        let f = Cnf::new(1, vec![c(&[1]), c(&[-1])]).unwrap();
        assert_eq!(
            simulate(&f, &three_step()),
            Err(SimulateError::FatClause { step: 1 })
        );
    }

    #[test]
    fn witness_round_trip() {
        let f = contradiction();
        let lr = two_by_two();
        let layout = VarLayout::ref_f(2, 2, 2, 2).unwrap();
        let alpha = encode_witness(&lr, &layout).unwrap();
        assert_eq!(alpha.len(), layout.num_vars() as usize);
        assert_eq!(
            first_unsatisfied_ref_clause(&f, &layout, &alpha).unwrap(),
            None
        );
        assert_eq!(decode_witness(&alpha, &layout, &f).unwrap(), lr);
    }

    #[test]
    fn violated_totality_is_not_satisfying() {
        let f = contradiction();
        let layout = VarLayout::ref_f(2, 2, 2, 2).unwrap();
        let mut alpha = encode_witness(&two_by_two(), &layout).unwrap();
        for l in 1..=2 {
            alpha.set(layout.var(RefVar::V { i: 2, j: 1, l }), false);
        }
        assert!(matches!(
            decode_witness(&alpha, &layout, &f),
            Err(WitnessError::NotSatisfying { .. })
        ));
    }

    #[test]
    fn tautological_cell_cannot_be_encoded() {
        let mut lr = two_by_two();
        lr.set_cell(1, 1, c(&[1, 2, -2]));
        let layout = VarLayout::ref_f(2, 2, 2, 2).unwrap();
        assert_eq!(
            encode_witness(&lr, &layout),
            Err(WitnessError::TautologicalCell(1, 1))
        );
    }

    #[test]
    fn text_round_trip() {
        let lr = two_by_two();
        let text = write_levelled(&lr);
        assert_eq!(parse_levelled(&text).unwrap(), lr);
        assert!(parse_levelled("levelled 1 1\n").is_err());
        assert!(parse_levelled("levelled 1 1\n1 1 0 R 1 1 1\n").is_err());
    }
}
