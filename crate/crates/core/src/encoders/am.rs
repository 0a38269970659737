//! Reduction from the single-sequence statement over `s̃` clauses to the
//! levelled statement with `n+1` levels of `t = ⌊s̃/(n+1)⌋` clauses.
//!
//! Rows `1..=pad` (`pad = s̃ − t(n+1)`) are fixed to weakenings of `C_1` that
//! nothing resolves against. Level `k`, column `j` is row
//! `pad + (k−1)t + j`. Level-1 rows are input weakenings, higher rows are
//! resolvents of rows on the level below.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, PartialAssignment, Var};
use crate::encoders::families::{
    encode_ref_am, encode_ref_f, pivot_clause, transfer_clause, EncodeError, Side,
};
use crate::encoders::layout::{AmLayout, AmVar, ParamError, RefVar, VarLayout};
use crate::encoders::substitution::{SubstError, Substitution};
use crate::resolution::{Justification, ResolutionProof};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("padding rows copy C_1, which must exist and be non-tautological")]
    BadFirstClause,
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error("clause {0} is missing from the target formula")]
    MissingInput(Clause),
}

#[derive(Clone, Debug)]
pub struct AmReduction {
    pub t: usize,
    pub pad: usize,
    pub am_layout: AmLayout,
    pub target_layout: VarLayout,
    /// Constants for the fixed variables.
    pub assignment: PartialAssignment,
    /// Remaining variables, renamed into the target layout.
    pub renaming: BTreeMap<Var, Literal>,
}

impl AmReduction {
    /// Row index of level `k`, column `j`.
    pub fn row(&self, k: usize, j: usize) -> usize {
        self.pad + (k - 1) * self.t + j
    }

    /// Level and column of `u`, or `None` for a padding row.
    pub fn cell(&self, u: usize) -> Option<(usize, usize)> {
        (u > self.pad).then(|| {
            (
                (u - self.pad - 1) / self.t + 1,
                (u - self.pad - 1) % self.t + 1,
            )
        })
    }

    pub fn substitution(&self) -> Substitution {
        Substitution::from_parts(&self.assignment, &self.renaming)
    }

    /// Applies the reduction to the single-sequence statement, dropping
    /// satisfied clauses.
    pub fn apply(&self, am: &Cnf) -> Result<Cnf, AmError> {
        Ok(self
            .substitution()
            .apply_cnf(am, self.target_layout.num_vars())?)
    }
}

pub fn am_reduction(f: &Cnf, s_tilde: usize) -> Result<AmReduction, AmError> {
    let n = f.num_vars() as usize;
    let r = f.len();
    let t = s_tilde / (n + 1);
    if t == 0 {
        return Err(ParamError::TooSmall {
            name: "s_tilde / (n+1)",
            min: 1,
            value: 0,
        }
        .into());
    }
    let c1 = f.clause(1).ok_or(AmError::BadFirstClause)?;
    if c1.is_tautological() {
        return Err(AmError::BadFirstClause);
    }
    let am_layout = AmLayout::new(n, r, s_tilde)?;
    let target_layout = VarLayout::ref_f(n, r, n + 1, t)?;
    let pad = s_tilde - t * (n + 1);
    let mut red = AmReduction {
        t,
        pad,
        am_layout,
        target_layout,
        assignment: PartialAssignment::new(),
        renaming: BTreeMap::new(),
    };

    let am = red.am_layout.clone();
    let tl = red.target_layout.clone();
    let mut fix = |v: AmVar, b: bool| {
        red.assignment.set(am.var(v), b);
    };
    let mut ren: Vec<(AmVar, RefVar)> = Vec::new();

    for u in 1..=s_tilde {
        let cell = (u > pad).then(|| ((u - pad - 1) / t + 1, (u - pad - 1) % t + 1));
        match cell {
            None => {
                for i in 1..=n {
                    for b in 0..=1u8 {
                        fix(
                            AmVar::D { u, i, b },
                            c1.contains(Literal::with_polarity(i as Var, b)),
                        );
                    }
                }
                for i in 0..=n {
                    fix(AmVar::V { u, i }, i == 0);
                }
                for j in 0..=r {
                    fix(AmVar::I { u, j }, j == 1);
                }
                for v in 0..=s_tilde {
                    fix(AmVar::L { u, v }, v == 0);
                    fix(AmVar::R { u, v }, v == 0);
                }
            }
            Some((k, j)) => {
                for i in 1..=n {
                    for b in 0..=1u8 {
                        ren.push((AmVar::D { u, i, b }, RefVar::D { i: k, j, l: i, b }));
                    }
                }
                if k == 1 {
                    for i in 0..=n {
                        fix(AmVar::V { u, i }, i == 0);
                    }
                    fix(AmVar::I { u, j: 0 }, false);
                    for m in 1..=r {
                        ren.push((AmVar::I { u, j: m }, RefVar::I { j, m }));
                    }
                    for v in 0..=s_tilde {
                        fix(AmVar::L { u, v }, v == 0);
                        fix(AmVar::R { u, v }, v == 0);
                    }
                } else {
                    fix(AmVar::V { u, i: 0 }, false);
                    for l in 1..=n {
                        ren.push((AmVar::V { u, i: l }, RefVar::V { i: k, j, l }));
                    }
                    for m in 0..=r {
                        fix(AmVar::I { u, j: m }, m == 0);
                    }
                    let below = pad + (k - 2) * t;
                    for v in 0..=s_tilde {
                        if v > below && v <= below + t {
                            let jp = v - below;
                            ren.push((AmVar::L { u, v }, RefVar::L { i: k, j, jp }));
                            ren.push((AmVar::R { u, v }, RefVar::R { i: k, j, jp }));
                        } else {
                            fix(AmVar::L { u, v }, false);
                            fix(AmVar::R { u, v }, false);
                        }
                    }
                }
            }
        }
    }
    red.renaming = ren
        .into_iter()
        .map(|(a, b)| (am.var(a), Literal::pos(tl.var(b))))
        .collect();
    debug_assert_eq!(
        red.assignment.len() + red.renaming.len(),
        am.num_vars() as usize
    );
    Ok(red)
}

/// Transfer clauses of the levelled statement that no single-sequence clause
/// maps to: those carrying the complement of the pivot literal of their side,
/// `(ℓ', b) = (ℓ, 0)` for left premises and `(ℓ, 1)` for right ones.
pub fn removed_transfer_clauses(layout: &VarLayout) -> Vec<Clause> {
    let d = layout.dims();
    let mut out = Vec::new();
    for side in [Side::Left, Side::Right] {
        for i in 2..=d.s {
            for j in 1..=d.t {
                for jp in 1..=d.t {
                    for l in 1..=d.n {
                        out.push(transfer_clause(
                            layout,
                            side,
                            (i, j, jp),
                            l,
                            l,
                            1 - side.pivot_polarity(),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// A three-step derivation of a removed transfer clause from `ref_f`: the
/// pivot clause of the same side resolved against the non-tautology clause of
/// cell `(i−1, j')`, the resolvent weakened to the removed clause.
pub fn removed_clause_derivation(
    ref_f: &Cnf,
    layout: &VarLayout,
    side: Side,
    (i, j, jp): (usize, usize, usize),
    l: usize,
) -> Result<ResolutionProof, AmError> {
    let index: HashMap<&Clause, usize> = ref_f
        .clauses()
        .iter()
        .enumerate()
        .map(|(k, c)| (c, k + 1))
        .collect();
    let lookup = |c: Clause| index.get(&c).copied().ok_or(AmError::MissingInput(c));

    let b = side.pivot_polarity();
    let pivot = pivot_clause(layout, side, i, j, jp, l);
    let nontaut = Clause::new(vec![
        layout.neg(RefVar::D {
            i: i - 1,
            j: jp,
            l,
            b: 1,
        }),
        layout.neg(RefVar::D {
            i: i - 1,
            j: jp,
            l,
            b: 0,
        }),
    ]);
    let target = transfer_clause(layout, side, (i, j, jp), l, l, 1 - b);
    let pivot_var = layout.var(RefVar::D {
        i: i - 1,
        j: jp,
        l,
        b,
    });

    let mut pi = ResolutionProof::new();
    let a = pi.push(pivot.clone(), Justification::Input(lookup(pivot)?));
    let c = pi.push(nontaut.clone(), Justification::Input(lookup(nontaut)?));
    pi.push(
        target,
        Justification::Resolvent {
            left: a,
            right: c,
            pivot: pivot_var,
        },
    );
    Ok(pi)
}

/// Maps a refutation of the single-sequence statement for `f` to a refutation
/// of the levelled statement with no more steps.
pub fn map_proof(
    f: &Cnf,
    s_tilde: usize,
    pi: &ResolutionProof,
) -> Result<(AmReduction, Cnf, ResolutionProof), AmError> {
    let red = am_reduction(f, s_tilde)?;
    let am = encode_ref_am(f, &red.am_layout)?;
    let target = encode_ref_f(f, &red.target_layout)?;
    let mapped = red.substitution().apply_proof(&am, pi, &target)?;
    Ok((red, target, mapped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolution::check_resolution;
    use std::collections::BTreeSet;

    fn contradiction(n: u32) -> Cnf {
        Cnf::new(
            n,
            vec![Clause::from_dimacs(&[1]), Clause::from_dimacs(&[-1])],
        )
        .unwrap()
    }

    #[test]
    fn rows_and_cells_are_inverse() {
        let red = am_reduction(&contradiction(2), 7).unwrap();
        assert_eq!((red.t, red.pad), (2, 1));
        assert_eq!(red.cell(1), None);
        for k in 1..=3 {
            for j in 1..=2 {
                assert_eq!(red.cell(red.row(k, j)), Some((k, j)));
            }
        }
        assert_eq!(red.row(3, 2), 7);
    }

    #[test]
    fn too_short_sequence_is_rejected() {
        assert!(matches!(
            am_reduction(&contradiction(2), 2),
            Err(AmError::Param(_))
        ));
    }

    #[test]
    fn reduced_formula_is_levelled_statement_minus_removed_transfers() {
        for (n, st) in [(1, 2), (1, 3), (2, 3), (2, 6), (2, 7)] {
            let f = contradiction(n);
            let red = am_reduction(&f, st).unwrap();
            let am = encode_ref_am(&f, &red.am_layout).unwrap();
            let reduced: BTreeSet<Clause> = red.apply(&am).unwrap().clause_set();
            let target = encode_ref_f(&f, &red.target_layout).unwrap();
            let removed: BTreeSet<Clause> = removed_transfer_clauses(&red.target_layout)
                .into_iter()
                .collect();
            let expected: BTreeSet<Clause> =
                target.clause_set().difference(&removed).cloned().collect();
            assert_eq!(reduced, expected, "n={n} s̃={st}");
            let d = red.target_layout.dims();
            assert_eq!(removed.len(), 2 * (d.s - 1) * d.t * d.t * d.n);
        }
    }

    #[test]
    fn removed_clauses_follow_in_three_steps() {
        let f = contradiction(2);
        let layout = VarLayout::ref_f(2, 2, 3, 2).unwrap();
        let ref_f = encode_ref_f(&f, &layout).unwrap();
        for side in [Side::Left, Side::Right] {
            let b = 1 - side.pivot_polarity();
            let pi = removed_clause_derivation(&ref_f, &layout, side, (3, 2, 1), 2).unwrap();
            assert_eq!(pi.len(), 3);
            check_resolution(&ref_f, &pi, false).unwrap();
            assert_eq!(
                pi.last_clause(),
                Some(&transfer_clause(&layout, side, (3, 2, 1), 2, 2, b))
            );
        }
    }
}
