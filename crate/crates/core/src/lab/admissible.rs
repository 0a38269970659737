//! Admissible assignments: extensions of a restriction closed under the
//! conditions that keep every clause of the levelled statement unfalsified.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, ClauseSink, ClauseStatus, Cnf, PartialAssignment, Var};
use crate::encoders::families::{
    emit_ref_f, input_weakening_clauses, pivot_clause, transfer_clauses, EncodeError, Side,
};
use crate::encoders::layout::VarLayout;
use crate::lab::groups::{d_state, index_state, touched_groups, Group, GroupState, Pair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    /// The assignment agrees with the restriction on its whole domain.
    ExtendsRestriction,
    /// Every group is set to a value or untouched.
    SetOrUntouched,
    /// A set premise pointer has both endpoint cells set.
    PremiseCellsSet,
    /// A set cell has its pivot (levels ≥ 2) or input index (level 1) set.
    CellHasPivotOrInput,
    /// Cell clauses are non-tautological, wide enough, and short ones avoid
    /// their pivot variable.
    CellClauseShape,
    /// The last cell, if set, is empty.
    LastCellEmpty,
    /// Input weakening clauses hold where cell and input index are set.
    InputWeakening,
    /// Pivot clauses hold where pointer, pivot and premise cell are set.
    PivotClauses,
    /// Transfer clauses hold where pointer, pivot and both cells are set.
    TransferClauses,
    /// Premise pointers of a level never share a target column.
    PremiseInjection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityViolation {
    pub condition: Condition,
    pub pair: Option<Pair>,
    pub detail: String,
}

impl fmt::Display for AdmissibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pair {
            Some((i, j)) => write!(f, "{:?} at ({i},{j}): {}", self.condition, self.detail),
            None => write!(f, "{:?}: {}", self.condition, self.detail),
        }
    }
}

/// The set groups of an assignment.
#[derive(Clone, Debug, Default)]
pub struct Decoded {
    pub cells: BTreeMap<Pair, Clause>,
    pub pivots: BTreeMap<Pair, usize>,
    pub inputs: BTreeMap<usize, usize>,
    pub premises: BTreeMap<(Side, Pair), usize>,
    pub broken: BTreeSet<Group>,
    /// Assigned variables outside the grid blocks.
    pub stray: Vec<Var>,
}

pub fn decode(sigma: &PartialAssignment, layout: &VarLayout) -> Decoded {
    let mut out = Decoded::default();
    for v in sigma.domain() {
        if layout.decode(v).and_then(Group::of).is_none() {
            out.stray.push(v);
        }
    }
    for g in touched_groups(sigma, layout) {
        if let Group::D(p) = g {
            match d_state(sigma, layout, p) {
                GroupState::Set(c) => {
                    out.cells.insert(p, c);
                }
                _ => {
                    out.broken.insert(g);
                }
            }
            continue;
        }
        let GroupState::Set(x) = index_state(sigma, layout, g) else {
            out.broken.insert(g);
            continue;
        };
        match g {
            Group::V(p) => out.pivots.insert(p, x),
            Group::I(j) => out.inputs.insert(j, x),
            Group::L(p) => out.premises.insert((Side::Left, p), x),
            Group::R(p) => out.premises.insert((Side::Right, p), x),
            Group::D(_) => unreachable!(),
        };
    }
    out
}

fn all_satisfied(
    clauses: impl IntoIterator<Item = Clause>,
    sigma: &PartialAssignment,
) -> Option<Clause> {
    clauses
        .into_iter()
        .find(|c| c.eval(sigma) != ClauseStatus::Satisfied)
}

/// Checks every condition and lists all violations.
pub fn is_admissible(
    sigma: &PartialAssignment,
    rho: &PartialAssignment,
    f: &Cnf,
    layout: &VarLayout,
) -> Result<(), Vec<AdmissibilityViolation>> {
    let d = layout.dims();
    let mut out = Vec::new();
    let mut bad = |condition, pair, detail: String| {
        out.push(AdmissibilityViolation {
            condition,
            pair,
            detail,
        })
    };

    if let Some((v, b)) = rho.iter().find(|&(v, b)| sigma.get(v) != Some(b)) {
        bad(
            Condition::ExtendsRestriction,
            None,
            format!("variable {v} must be {b}"),
        );
    }
    let dec = decode(sigma, layout);
    for v in &dec.stray {
        bad(
            Condition::SetOrUntouched,
            None,
            format!("variable {v} is outside the grid"),
        );
    }
    for g in &dec.broken {
        bad(
            Condition::SetOrUntouched,
            Some(g.home_pair()),
            format!("{g:?} is touched but not set"),
        );
    }

    for (&(side, (i, j)), &jp) in &dec.premises {
        for cell in [(i, j), (i - 1, jp)] {
            if !dec.cells.contains_key(&cell) {
                bad(
                    Condition::PremiseCellsSet,
                    Some((i, j)),
                    format!(
                        "{side:?} premise {jp} needs cell ({},{}) set",
                        cell.0, cell.1
                    ),
                );
            }
        }
    }

    for (&(i, j), c) in &dec.cells {
        let has = if i == 1 {
            dec.inputs.contains_key(&j)
        } else {
            dec.pivots.contains_key(&(i, j))
        };
        if !has {
            bad(
                Condition::CellHasPivotOrInput,
                Some((i, j)),
                format!("cell set to {c}"),
            );
        }
        if c.is_tautological() {
            bad(
                Condition::CellClauseShape,
                Some((i, j)),
                format!("{c} is tautological"),
            );
        }
        let min = (d.s - i).min(d.n);
        if c.len() < min {
            bad(
                Condition::CellClauseShape,
                Some((i, j)),
                format!("{c} has fewer than {min} literals"),
            );
        }
        if let Some(&l) = dec.pivots.get(&(i, j)) {
            if c.len() < d.n && c.mentions(l as Var) {
                bad(
                    Condition::CellClauseShape,
                    Some((i, j)),
                    format!("short clause {c} mentions pivot x{l}"),
                );
            }
        }
    }

    if let Some(c) = dec.cells.get(&(d.s, d.t)) {
        if !c.is_empty() {
            bad(
                Condition::LastCellEmpty,
                Some((d.s, d.t)),
                format!("set to {c}"),
            );
        }
    }

    for &(i, j) in dec.cells.keys().filter(|p| p.0 == 1) {
        if dec.inputs.contains_key(&j) {
            if let Some(c) = all_satisfied(input_weakening_clauses(layout, f, j), sigma) {
                bad(
                    Condition::InputWeakening,
                    Some((i, j)),
                    format!("clause {c} not satisfied"),
                );
            }
        }
    }

    for (&(side, (i, j)), &jp) in &dec.premises {
        if !(dec.pivots.contains_key(&(i, j)) && dec.cells.contains_key(&(i - 1, jp))) {
            continue;
        }
        let pivots = (1..=d.n).map(|l| pivot_clause(layout, side, i, j, jp, l));
        if let Some(c) = all_satisfied(pivots, sigma) {
            bad(
                Condition::PivotClauses,
                Some((i, j)),
                format!("clause {c} not satisfied"),
            );
        }
        if dec.cells.contains_key(&(i, j)) {
            if let Some(c) = all_satisfied(transfer_clauses(layout, side, i, j, jp), sigma) {
                bad(
                    Condition::TransferClauses,
                    Some((i, j)),
                    format!("clause {c} not satisfied"),
                );
            }
        }
    }

    let mut targets: BTreeMap<(usize, usize), (Side, usize)> = BTreeMap::new();
    for (&(side, (i, j)), &jp) in &dec.premises {
        if let Some(&(s0, j0)) = targets.get(&(i, jp)) {
            bad(
                Condition::PremiseInjection,
                Some((i, j)),
                format!("{side:?} premise {jp} already used by {s0:?} of ({i},{j0})"),
            );
        } else {
            targets.insert((i, jp), (side, j));
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AxiomCheckError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("clause {index} ({family}) is falsified: {clause}")]
    Falsified {
        /// 1-based position in the generated formula.
        index: usize,
        family: &'static str,
        clause: Clause,
    },
}

struct FalsifiedFinder {
    /// 0 unassigned, 1 false, 2 true, indexed by variable.
    values: Vec<u8>,
    family: &'static str,
    seen: usize,
    found: Option<(usize, &'static str, Clause)>,
}

impl ClauseSink for FalsifiedFinder {
    fn begin_family(&mut self, label: &'static str) {
        self.family = label;
    }

    fn push(&mut self, clause: Clause) {
        self.seen += 1;
        if self.found.is_some() {
            return;
        }
        let falsified = clause.iter().all(|lit| {
            let v = self.values.get(lit.var() as usize).copied().unwrap_or(0);
            v != 0 && (v == 2) != lit.is_positive()
        });
        if falsified {
            self.found = Some((self.seen, self.family, clause));
        }
    }
}

/// Evaluates every clause of the levelled statement for `f` under `sigma`.
pub fn check_no_falsified_axiom(
    sigma: &PartialAssignment,
    f: &Cnf,
    layout: &VarLayout,
) -> Result<(), AxiomCheckError> {
    let mut values = vec![0u8; layout.num_vars() as usize + 1];
    for (v, b) in sigma.iter() {
        if let Some(slot) = values.get_mut(v as usize) {
            *slot = if b { 2 } else { 1 };
        }
    }
    let mut finder = FalsifiedFinder {
        values,
        family: "",
        seen: 0,
        found: None,
    };
    emit_ref_f(f, layout, &mut finder)?;
    match finder.found {
        None => Ok(()),
        Some((index, family, clause)) => Err(AxiomCheckError::Falsified {
            index,
            family,
            clause,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::families::label;
    use crate::lab::groups::{set_d, set_index};

    fn setup() -> (Cnf, VarLayout) {
        let f = Cnf::new(
            2,
            vec![Clause::from_dimacs(&[1]), Clause::from_dimacs(&[-1])],
        )
        .unwrap();
        (f, VarLayout::ref_f(2, 2, 3, 4).unwrap())
    }

    fn conditions(r: Result<(), Vec<AdmissibilityViolation>>) -> BTreeSet<Condition> {
        r.err()
            .unwrap_or_default()
            .into_iter()
            .map(|v| v.condition)
            .collect()
    }

    #[test]
    fn empty_assignment_is_admissible() {
        let (f, lay) = setup();
        let e = PartialAssignment::new();
        assert!(is_admissible(&e, &e, &f, &lay).is_ok());
        assert!(check_no_falsified_axiom(&e, &f, &lay).is_ok());
    }

    #[test]
    fn premise_without_cells() {
        let (f, lay) = setup();
        let mut sigma = PartialAssignment::new();
        set_index(&mut sigma, &lay, Group::L((2, 1)), 1);
        assert_eq!(
            conditions(is_admissible(&sigma, &PartialAssignment::new(), &f, &lay)),
            BTreeSet::from([Condition::PremiseCellsSet])
        );
    }

    #[test]
    fn nonempty_last_cell_falsifies_the_empty_clause_family() {
        let (f, lay) = setup();
        let mut sigma = PartialAssignment::new();
        set_d(&mut sigma, &lay, (3, 4), &Clause::from_dimacs(&[1, 2]));
        set_index(&mut sigma, &lay, Group::V((3, 4)), 1);
        assert!(
            conditions(is_admissible(&sigma, &PartialAssignment::new(), &f, &lay))
                .contains(&Condition::LastCellEmpty)
        );
        match check_no_falsified_axiom(&sigma, &f, &lay) {
            Err(AxiomCheckError::Falsified { family, .. }) => assert_eq!(family, label::LAST_EMPTY),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn a_wired_resolution_step_is_admissible() {
        let (f, lay) = setup();
        let mut sigma = PartialAssignment::new();
        // (1,1) = {x1, x2} from C_1, (1,2) = {¬x1, x2} from C_2, (2,3) = {x2} ∪ {x1} on x1.
        set_d(&mut sigma, &lay, (1, 1), &Clause::from_dimacs(&[1, 2]));
        set_index(&mut sigma, &lay, Group::I(1), 1);
        set_d(&mut sigma, &lay, (1, 2), &Clause::from_dimacs(&[-1, 2]));
        set_index(&mut sigma, &lay, Group::I(2), 2);
        set_d(&mut sigma, &lay, (2, 3), &Clause::from_dimacs(&[1, 2]));
        set_index(&mut sigma, &lay, Group::V((2, 3)), 1);
        set_index(&mut sigma, &lay, Group::L((2, 3)), 1);
        set_index(&mut sigma, &lay, Group::R((2, 3)), 2);
        assert_eq!(
            is_admissible(&sigma, &PartialAssignment::new(), &f, &lay),
            Ok(())
        );
        assert!(check_no_falsified_axiom(&sigma, &f, &lay).is_ok());

        let mut swapped = sigma.clone();
        set_index(&mut swapped, &lay, Group::L((2, 3)), 2);
        set_index(&mut swapped, &lay, Group::R((2, 3)), 1);
        let got = conditions(is_admissible(&swapped, &PartialAssignment::new(), &f, &lay));
        assert!(got.contains(&Condition::PivotClauses));
        assert!(check_no_falsified_axiom(&swapped, &f, &lay).is_err());

        let mut shared = sigma.clone();
        set_index(&mut shared, &lay, Group::R((2, 3)), 1);
        assert!(
            conditions(is_admissible(&shared, &PartialAssignment::new(), &f, &lay))
                .contains(&Condition::PremiseInjection)
        );

        let mut wrong_input = sigma;
        set_index(&mut wrong_input, &lay, Group::I(1), 2);
        assert!(conditions(is_admissible(
            &wrong_input,
            &PartialAssignment::new(),
            &f,
            &lay
        ))
        .contains(&Condition::InputWeakening));
    }

    #[test]
    fn narrow_cells_and_restriction_mismatch() {
        let (f, lay) = setup();
        let mut rho = PartialAssignment::new();
        set_index(&mut rho, &lay, Group::V((2, 2)), 2);
        let mut sigma = PartialAssignment::new();
        set_index(&mut sigma, &lay, Group::V((2, 2)), 1);
        // Level 2 of 3 needs at least one literal, and short clauses avoid the pivot.
        set_d(&mut sigma, &lay, (2, 2), &Clause::from_dimacs(&[1]));
        let got = conditions(is_admissible(&sigma, &rho, &f, &lay));
        assert_eq!(
            got,
            BTreeSet::from([Condition::ExtendsRestriction, Condition::CellClauseShape])
        );
    }
}
