//! Literals, clauses, CNFs and partial assignments.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Variable identifier. Variables are numbered from 1, as in DIMACS.
pub type Var = u32;

/// A literal `x^b`: the positive literal when `positive` is set, `¬x` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    var: Var,
    positive: bool,
}

impl Literal {
    /// Panics if `var` is 0.
    pub fn new(var: Var, positive: bool) -> Literal {
        assert!(var >= 1, "variable ids start at 1");
        Literal { var, positive }
    }

    pub fn pos(var: Var) -> Literal {
        Literal::new(var, true)
    }

    pub fn neg(var: Var) -> Literal {
        Literal::new(var, false)
    }

    /// The literal `x^b` with `b = polarity`.
    pub fn with_polarity(var: Var, polarity: u8) -> Literal {
        Literal::new(var, polarity != 0)
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// 1 for `x`, 0 for `¬x`.
    pub fn polarity(self) -> u8 {
        self.positive as u8
    }

    pub fn negate(self) -> Literal {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// Value of the literal under a value for its variable.
    pub fn eval_with(self, value: bool) -> bool {
        value == self.positive
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    /// `None` for 0 or for values outside the `u32` range.
    pub fn from_dimacs(value: i64) -> Option<Literal> {
        if value == 0 {
            return None;
        }
        let var = Var::try_from(value.unsigned_abs()).ok()?;
        Some(Literal::new(var, value > 0))
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.negate()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("variable {var} does not occur as the pivot literal in the premise")]
pub struct PivotMissing {
    pub var: Var,
}

/// A clause as a set of literals.
///
/// Literals are kept sorted by variable, negative before positive, and without
/// duplicates, so derived equality is set equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(mut lits: Vec<Literal>) -> Clause {
        lits.sort_unstable();
        lits.dedup();
        Clause { lits }
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn from_dimacs(values: &[i64]) -> Clause {
        Clause::new(
            values
                .iter()
                .filter_map(|&v| Literal::from_dimacs(v))
                .collect(),
        )
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
        self.lits.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn mentions(&self, var: Var) -> bool {
        self.contains(Literal::pos(var)) || self.contains(Literal::neg(var))
    }

    pub fn max_var(&self) -> Var {
        self.lits.last().map_or(0, |l| l.var())
    }

    /// True when `self ⊆ other`.
    pub fn is_subset(&self, other: &Clause) -> bool {
        let mut rest = other.lits.iter();
        'outer: for lit in &self.lits {
            for candidate in rest.by_ref() {
                if candidate == lit {
                    continue 'outer;
                }
                if candidate > lit {
                    return false;
                }
            }
            return false;
        }
        true
    }

    /// True if some variable occurs with both polarities.
    pub fn is_tautological(&self) -> bool {
        // Sorted order puts ¬x right before x.
        self.lits.windows(2).any(|w| w[0].var() == w[1].var())
    }

    /// The resolvent `(self \ {x}) ∪ (other \ {¬x})`. Requires `x ∈ self` and `¬x ∈ other`.
    pub fn resolve(&self, other: &Clause, var: Var) -> Result<Clause, PivotMissing> {
        let pos = Literal::pos(var);
        let neg = Literal::neg(var);
        if !self.contains(pos) || !other.contains(neg) {
            return Err(PivotMissing { var });
        }
        let lits = self
            .iter()
            .filter(|&l| l != pos)
            .chain(other.iter().filter(|&l| l != neg))
            .collect();
        Ok(Clause::new(lits))
    }

    pub fn with(&self, lit: Literal) -> Clause {
        let mut lits = self.lits.clone();
        lits.push(lit);
        Clause::new(lits)
    }

    pub fn without(&self, lit: Literal) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|&l| l != lit).collect(),
        }
    }

    pub fn union(&self, other: &Clause) -> Clause {
        Clause::new(self.iter().chain(other.iter()).collect())
    }

    pub fn eval(&self, alpha: &PartialAssignment) -> ClauseStatus {
        eval_literals(&self.lits, |v| alpha.get(v))
    }

    /// `None` if the clause is satisfied by `sigma`, otherwise the clause with
    /// falsified literals removed.
    pub fn restrict(&self, sigma: &PartialAssignment) -> Option<Clause> {
        let mut kept = Vec::with_capacity(self.lits.len());
        for &lit in &self.lits {
            match sigma.get(lit.var()) {
                Some(v) if lit.eval_with(v) => return None,
                Some(_) => {}
                None => kept.push(lit),
            }
        }
        Some(Clause { lits: kept })
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Clause {
        Clause::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        for (k, lit) in self.lits.iter().enumerate() {
            if k > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClauseStatus {
    Satisfied,
    Falsified,
    Undetermined,
}

/// Evaluates a literal slice under an arbitrary variable lookup.
pub fn eval_literals(lits: &[Literal], value: impl Fn(Var) -> Option<bool>) -> ClauseStatus {
    let mut open = false;
    for &lit in lits {
        match value(lit.var()) {
            Some(v) if lit.eval_with(v) => return ClauseStatus::Satisfied,
            Some(_) => {}
            None => open = true,
        }
    }
    if open {
        ClauseStatus::Undetermined
    } else {
        ClauseStatus::Falsified
    }
}

pub fn is_tautological(c: &Clause) -> bool {
    c.is_tautological()
}

pub fn resolve(c1: &Clause, c2: &Clause, var: Var) -> Result<Clause, PivotMissing> {
    c1.resolve(c2, var)
}

pub fn eval_clause(c: &Clause, alpha: &PartialAssignment) -> ClauseStatus {
    c.eval(alpha)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("clause {clause} uses variable {var} beyond the declared {num_vars}")]
pub struct VarOutOfRange {
    pub clause: usize,
    pub var: Var,
    pub num_vars: u32,
}

/// A CNF with a declared variable count.
///
/// Clause order is kept for stable serialization; [`Cnf::clause_set`] gives the
/// set view used when comparing formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Cnf, VarOutOfRange> {
        for (k, c) in clauses.iter().enumerate() {
            if c.max_var() > num_vars {
                return Err(VarOutOfRange {
                    clause: k,
                    var: c.max_var(),
                    num_vars,
                });
            }
        }
        Ok(Cnf { num_vars, clauses })
    }

    /// Declares exactly as many variables as the clauses use.
    pub fn from_clauses(clauses: Vec<Clause>) -> Cnf {
        let num_vars = clauses.iter().map(Clause::max_var).max().unwrap_or(0);
        Cnf { num_vars, clauses }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// 1-based access, matching the numbering of input clauses in proofs.
    pub fn clause(&self, m: usize) -> Option<&Clause> {
        m.checked_sub(1).and_then(|k| self.clauses.get(k))
    }

    pub fn clause_set(&self) -> std::collections::BTreeSet<Clause> {
        self.clauses.iter().cloned().collect()
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    /// Removes satisfied clauses and falsified literals; survivors keep their order.
    pub fn restrict(&self, sigma: &PartialAssignment) -> Cnf {
        Cnf {
            num_vars: self.num_vars,
            clauses: self
                .clauses
                .iter()
                .filter_map(|c| c.restrict(sigma))
                .collect(),
        }
    }

    /// Index map from each clause of `self` to its position in `self.restrict(sigma)`.
    pub fn restrict_index_map(&self, sigma: &PartialAssignment) -> Vec<Option<usize>> {
        let mut next = 0;
        self.clauses
            .iter()
            .map(|c| {
                c.restrict(sigma).map(|_| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }

    /// True when every clause is satisfied by a (total) assignment.
    pub fn is_satisfied_by(&self, alpha: &PartialAssignment) -> bool {
        self.clauses
            .iter()
            .all(|c| c.eval(alpha) == ClauseStatus::Satisfied)
    }

    /// First clause falsified by `alpha`, if any.
    pub fn first_falsified(&self, alpha: &PartialAssignment) -> Option<(usize, &Clause)> {
        self.clauses
            .iter()
            .enumerate()
            .find(|(_, c)| c.eval(alpha) == ClauseStatus::Falsified)
    }
}

pub fn restrict_cnf(f: &Cnf, sigma: &PartialAssignment) -> Cnf {
    f.restrict(sigma)
}

/// Receiver for streamed clause generation.
///
/// Generators announce each family before its clauses, so a sink can keep a
/// per-family manifest without the generator materializing anything.
pub trait ClauseSink {
    fn begin_family(&mut self, _label: &'static str) {}
    fn push(&mut self, clause: Clause);
}

impl ClauseSink for Vec<Clause> {
    fn push(&mut self, clause: Clause) {
        Vec::push(self, clause);
    }
}

/// Counts clauses per family in emission order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounts {
    pub families: Vec<(String, u64)>,
}

impl FamilyCounts {
    pub fn total(&self) -> u64 {
        self.families.iter().map(|(_, c)| c).sum()
    }

    pub fn get(&self, label: &str) -> Option<u64> {
        self.families
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, c)| *c)
    }
}

impl ClauseSink for FamilyCounts {
    fn begin_family(&mut self, label: &'static str) {
        self.families.push((label.to_string(), 0));
    }

    fn push(&mut self, _clause: Clause) {
        match self.families.last_mut() {
            Some((_, c)) => *c += 1,
            None => self.families.push((String::new(), 1)),
        }
    }
}

/// Collects clauses together with the family each one came from.
#[derive(Clone, Debug, Default)]
pub struct LabelledClauses {
    pub clauses: Vec<Clause>,
    pub labels: Vec<&'static str>,
    current: &'static str,
}

impl ClauseSink for LabelledClauses {
    fn begin_family(&mut self, label: &'static str) {
        self.current = label;
    }

    fn push(&mut self, clause: Clause) {
        self.clauses.push(clause);
        self.labels.push(self.current);
    }
}

/// A partial map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialAssignment {
    values: BTreeMap<Var, bool>,
}

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn contains(&self, var: Var) -> bool {
        self.values.contains_key(&var)
    }

    /// Returns the previous value.
    pub fn set(&mut self, var: Var, value: bool) -> Option<bool> {
        self.values.insert(var, value)
    }

    pub fn unset(&mut self, var: Var) -> Option<bool> {
        self.values.remove(&var)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.values.keys().copied()
    }

    /// Makes a literal true.
    pub fn satisfy(&mut self, lit: Literal) {
        self.set(lit.var(), lit.is_positive());
    }

    pub fn value_of(&self, lit: Literal) -> Option<bool> {
        self.get(lit.var()).map(|v| lit.eval_with(v))
    }

    /// True if the two assignments agree on their common domain.
    pub fn is_compatible(&self, other: &PartialAssignment) -> bool {
        self.iter()
            .all(|(v, b)| other.get(v).is_none_or(|ob| ob == b))
    }

    /// True if every assignment of `self` also appears in `other`.
    pub fn is_extended_by(&self, other: &PartialAssignment) -> bool {
        self.iter().all(|(v, b)| other.get(v) == Some(b))
    }

    /// Union of two compatible assignments; `None` on conflict.
    pub fn union(&self, other: &PartialAssignment) -> Option<PartialAssignment> {
        if !self.is_compatible(other) {
            return None;
        }
        let mut out = self.clone();
        out.values.extend(other.iter());
        Some(out)
    }

    /// Dense lookup table indexed by variable, for bulk clause evaluation.
    pub fn to_dense(&self, num_vars: u32) -> DenseAssignment {
        let mut values = vec![None; num_vars as usize + 1];
        for (v, b) in self.iter() {
            if let Some(slot) = values.get_mut(v as usize) {
                *slot = Some(b);
            }
        }
        DenseAssignment { values }
    }
}

impl FromIterator<(Var, bool)> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> PartialAssignment {
        PartialAssignment {
            values: iter.into_iter().collect(),
        }
    }
}

impl FromIterator<Literal> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> PartialAssignment {
        iter.into_iter()
            .map(|l| (l.var(), l.is_positive()))
            .collect()
    }
}

/// Array-backed assignment over `1..=num_vars`.
#[derive(Clone, Debug)]
pub struct DenseAssignment {
    values: Vec<Option<bool>>,
}

impl DenseAssignment {
    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var as usize).copied().flatten()
    }

    pub fn eval(&self, lits: &[Literal]) -> ClauseStatus {
        eval_literals(lits, |v| self.get(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[i64]) -> Clause {
        Clause::from_dimacs(v)
    }

    fn sigma(v: &[i64]) -> PartialAssignment {
        v.iter().filter_map(|&x| Literal::from_dimacs(x)).collect()
    }

    #[test]
    fn tautology_detection() {
        assert!(c(&[1, -1]).is_tautological());
        assert!(!Clause::empty().is_tautological());
        assert!(c(&[1, 2, -2]).is_tautological());
        assert!(!c(&[1, -2, 3]).is_tautological());
    }

    #[test]
    fn resolution_examples() {
        assert_eq!(c(&[1, 2]).resolve(&c(&[-1, 3]), 1).unwrap(), c(&[2, 3]));
        assert_eq!(c(&[1]).resolve(&c(&[-1]), 1).unwrap(), Clause::empty());
        // Tautological resolvents are allowed.
        assert_eq!(c(&[1, 2]).resolve(&c(&[-1, -2]), 1).unwrap(), c(&[2, -2]));
        assert_eq!(
            c(&[-1, 2]).resolve(&c(&[-1]), 1),
            Err(PivotMissing { var: 1 })
        );
        assert!(c(&[1]).resolve(&c(&[1]), 1).is_err());
    }

    #[test]
    fn restriction_examples() {
        let f = Cnf::new(2, vec![c(&[1, 2]), c(&[-1])]).unwrap();
        assert_eq!(f.restrict(&sigma(&[])), f);
        assert_eq!(f.restrict(&sigma(&[1])).clauses(), &[Clause::empty()]);
        assert_eq!(f.restrict(&sigma(&[-1])).clauses(), &[c(&[2])]);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(c(&[1]).eval(&sigma(&[1])), ClauseStatus::Satisfied);
        assert_eq!(Clause::empty().eval(&sigma(&[])), ClauseStatus::Falsified);
        assert_eq!(c(&[1, 2]).eval(&sigma(&[-1])), ClauseStatus::Undetermined);
    }

    #[test]
    fn canonical_order_and_subset() {
        assert_eq!(c(&[3, -1, 2, 3]).literals(), c(&[-1, 2, 3]).literals());
        assert!(c(&[2]).is_subset(&c(&[-1, 2, 3])));
        assert!(!c(&[-2]).is_subset(&c(&[-1, 2, 3])));
        assert!(Clause::empty().is_subset(&c(&[1])));
    }

    #[test]
    fn declared_vars_are_enforced() {
        assert!(Cnf::new(1, vec![c(&[2])]).is_err());
        assert_eq!(Cnf::new(5, vec![c(&[2])]).unwrap().num_vars(), 5);
    }
}
