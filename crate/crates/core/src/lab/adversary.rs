//! One backward step of the adversary: from an admissible assignment that
//! refutes the literals of a derived clause to one that does the same for a
//! premise.
//!
//! The invariant for a clause `E` and assignment `σ`:
//! (i) every literal of `E` on `dom(σ)` is false under `σ`;
//! (ii) every group whose home pair is important in `E` for that group's kind
//! lies in `dom(σ)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, PartialAssignment, Var};
use crate::encoders::families::Side;
use crate::encoders::layout::{RefVar, VarLayout};
use crate::lab::extend::input_inside;
use crate::lab::graph::RestrictionGraph;
use crate::lab::groups::{
    complete_positively, d_value, index_value, is_set, is_touched, set_d, set_index,
    touched_groups, unset, Group, Pair,
};
use crate::lab::width::{width_profile, WidthProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdversaryCase {
    /// The resolved variable is already assigned after cleanup.
    AlreadyAssigned,
    /// Its home pair stays unimportant with the positive literal added.
    Unimportant,
    /// A pivot or input group is set.
    PivotOrInput,
    /// A cell is set, with its pivot or input if missing.
    Cell,
    /// A premise pointer is wired to a fresh cell one level down.
    Premise {
        /// The premise lies on level 1.
        input_level: bool,
        /// The parent clause was narrow enough to need a fresh pivot below.
        fresh_pivot: bool,
    },
}

/// Columns of level `i-1` ruled out for a new premise.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidSets {
    /// Occupied by vertices of the current child graph.
    pub u1: BTreeSet<usize>,
    /// Named by positive premise literals of the clause.
    pub u2: BTreeSet<usize>,
    /// Would force a literal of the clause true at the new cell.
    pub u3: BTreeSet<usize>,
}

impl AvoidSets {
    pub fn union_len(&self) -> usize {
        self.u1
            .union(&self.u2)
            .copied()
            .collect::<BTreeSet<_>>()
            .union(&self.u3)
            .count()
    }
}

/// An admissible assignment paired with the clause it refutes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryState {
    pub sigma: PartialAssignment,
    pub clause: Clause,
    /// Avoid sets of the step that produced this state, if it wired a premise.
    pub avoid: Option<AvoidSets>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryStep {
    pub state: AdversaryState,
    /// Index of the chosen premise, 0 or 1.
    pub b: usize,
    pub case: AdversaryCase,
    /// The minimal sub-assignment after cleanup.
    pub cleaned: PartialAssignment,
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdversaryError {
    #[error("the clause is not a resolvent of the premises on variable {0}")]
    NotAResolvent(Var),
    #[error("variable {0} is not a grid variable")]
    PivotOutsideGrid(Var),
    #[error("the starting assignment breaks the invariant: {0}")]
    Invariant(String),
    #[error("avoid sets cover all {t} columns (|U1| = {u1}, |U2| = {u2}, |U3| = {u3})")]
    AvoidSetExhausted {
        u1: usize,
        u2: usize,
        u3: usize,
        t: usize,
    },
    #[error("every value of {0:?} is named by the clause")]
    NoFreeValue(Group),
    #[error("no input clause is contained in {0}")]
    NoInputClause(Clause),
}

fn important(wp: &WidthProfile, g: Group) -> bool {
    let p = g.home_pair();
    match g {
        Group::D(_) => wp.d_mentioned.contains(&p),
        Group::V(_) => wp.v_important.contains(&p),
        Group::I(_) => wp.i_important.contains(&p),
        Group::L(_) => wp.l_important.contains(&p),
        Group::R(_) => wp.r_important.contains(&p),
    }
}

/// Checks invariants (i) and (ii) for `e` under `sigma`.
pub fn check_conditions(
    sigma: &PartialAssignment,
    e: &Clause,
    layout: &VarLayout,
) -> Result<(), String> {
    if let Some(lit) = e.iter().find(|&l| sigma.value_of(l) == Some(true)) {
        return Err(format!("literal {lit} is true"));
    }
    let wp = width_profile(e, layout);
    let d = layout.dims();
    let groups = wp
        .d_mentioned
        .iter()
        .map(|&p| Group::D(p))
        .chain(wp.v_important.iter().map(|&p| Group::V(p)))
        .chain(wp.i_important.iter().map(|&p| Group::I(p.1)))
        .chain(wp.l_important.iter().map(|&p| Group::L(p)))
        .chain(wp.r_important.iter().map(|&p| Group::R(p)));
    for g in groups {
        if g.home_pair().0 > d.s || g.vars(layout).into_iter().any(|v| !sigma.contains(v)) {
            return Err(format!("{g:?} is important but not assigned"));
        }
    }
    Ok(())
}

/// The minimal admissible sub-assignment keeping (i) and (ii): drop
/// unimportant premise pointers, then cells that are unimportant and carry no
/// edge, then pivots and inputs of unset cells. Groups set by `rho` stay.
pub fn cleanup(
    sigma: &PartialAssignment,
    e: &Clause,
    rho: &PartialAssignment,
    layout: &VarLayout,
) -> PartialAssignment {
    let wp = width_profile(e, layout);
    let removable = |g: Group| !is_touched(rho, layout, g) && !important(&wp, g);
    let mut out = sigma.clone();
    for g in touched_groups(sigma, layout) {
        if matches!(g, Group::L(_) | Group::R(_)) && removable(g) {
            unset(&mut out, layout, g);
        }
    }
    let graph = RestrictionGraph::of_assignment(&out, layout);
    for g in touched_groups(&out, layout) {
        if let Group::D(p) = g {
            if removable(g) && !graph.is_incident(p) {
                unset(&mut out, layout, g);
            }
        }
    }
    for g in touched_groups(&out, layout) {
        if matches!(g, Group::V(_) | Group::I(_))
            && removable(g)
            && !is_set(&out, layout, Group::D(g.home_pair()))
        {
            unset(&mut out, layout, g);
        }
    }
    out
}

/// Carries `sigma` from `e` to one of its premises `e0`, `e1`, resolved on `q`.
#[allow(clippy::too_many_arguments)]
pub fn adversary_step(
    sigma: &PartialAssignment,
    e: &Clause,
    e0: &Clause,
    e1: &Clause,
    q: Var,
    rho: &PartialAssignment,
    f: &Cnf,
    layout: &VarLayout,
) -> Result<AdversaryStep, AdversaryError> {
    let premises = [e0, e1];
    let (pos, neg) = (Literal::pos(q), Literal::neg(q));
    let shape_ok = !e.mentions(q)
        && ((e0.contains(pos) && e1.contains(neg)) || (e0.contains(neg) && e1.contains(pos)))
        && premises
            .iter()
            .all(|p| p.iter().filter(|l| l.var() != q).all(|l| e.contains(l)));
    if !shape_ok {
        return Err(AdversaryError::NotAResolvent(q));
    }
    let qv = layout
        .decode(q)
        .ok_or(AdversaryError::PivotOutsideGrid(q))?;
    let group = Group::of(qv).ok_or(AdversaryError::PivotOutsideGrid(q))?;
    check_conditions(sigma, e, layout).map_err(AdversaryError::Invariant)?;

    let cleaned = cleanup(sigma, e, rho, layout);
    let finish = |tau: PartialAssignment, case, avoid| {
        let falsified = Literal::new(q, !tau.get(q).expect("the pivot is assigned"));
        let b = premises
            .iter()
            .position(|p| p.contains(falsified))
            .expect("one premise has each pivot literal");
        (tau, b, case, avoid)
    };

    let (tau, b, case, avoid) = if cleaned.contains(q) {
        finish(cleaned.clone(), AdversaryCase::AlreadyAssigned, None)
    } else if !important(&width_profile(&e.with(pos), layout), group) {
        let b = premises
            .iter()
            .position(|p| p.contains(pos))
            .expect("one premise has the positive pivot");
        (cleaned.clone(), b, AdversaryCase::Unimportant, None)
    } else {
        let mut tau = cleaned.clone();
        let wp = width_profile(e, layout);
        match group {
            Group::V(_) | Group::I(_) => {
                let value = free_value(e.with(pos), group, layout)?;
                set_index(&mut tau, layout, group, value);
                finish(tau, AdversaryCase::PivotOrInput, None)
            }
            Group::D(p) => {
                fill_cell(&mut tau, e, p, f, layout)?;
                finish(tau, AdversaryCase::Cell, None)
            }
            Group::L(p) | Group::R(p) => {
                let side = if matches!(group, Group::L(_)) {
                    Side::Left
                } else {
                    Side::Right
                };
                if !is_set(&tau, layout, Group::D(p)) {
                    fill_cell(&mut tau, e, p, f, layout)?;
                }
                let (case, avoid) = wire_premise(&mut tau, e, &wp, side, p, f, layout)?;
                finish(tau, case, Some(avoid))
            }
        }
    };
    Ok(AdversaryStep {
        state: AdversaryState {
            sigma: tau,
            clause: premises[b].clone(),
            avoid,
        },
        b,
        case,
        cleaned,
    })
}

/// Smallest value of an index group whose positive literal is not in `e`.
fn free_value(e: Clause, g: Group, layout: &VarLayout) -> Result<usize, AdversaryError> {
    (1..=g.arity(layout.dims()))
        .find(|&k| !e.contains(layout.pos(g.member(k))))
        .ok_or(AdversaryError::NoFreeValue(g))
}

/// Sets an untouched, edge-free cell: the empty clause at the last cell, a
/// full clause containing its input clause on level 1, else all positive.
fn fill_cell(
    tau: &mut PartialAssignment,
    e: &Clause,
    (i, j): Pair,
    f: &Cnf,
    layout: &VarLayout,
) -> Result<(), AdversaryError> {
    let d = layout.dims();
    let clause = if i == 1 {
        let m = match index_value(tau, layout, Group::I(j)) {
            Some(m) => m,
            None => {
                let m = free_value(e.clone(), Group::I(j), layout)?;
                set_index(tau, layout, Group::I(j), m);
                m
            }
        };
        complete_positively(f.clause(m).expect("input index in range"), d.n)
    } else if (i, j) == (d.s, d.t) {
        Clause::empty()
    } else {
        complete_positively(&Clause::empty(), d.n)
    };
    set_d(tau, layout, (i, j), &clause);
    if i >= 2 && !is_set(tau, layout, Group::V((i, j))) {
        let l = free_value(e.clone(), Group::V((i, j)), layout)?;
        set_index(tau, layout, Group::V((i, j)), l);
    }
    Ok(())
}

fn wire_premise(
    tau: &mut PartialAssignment,
    e: &Clause,
    wp: &WidthProfile,
    side: Side,
    (i, j): Pair,
    f: &Cnf,
    layout: &VarLayout,
) -> Result<(AdversaryCase, AvoidSets), AdversaryError> {
    let d = layout.dims();
    let c = d_value(tau, layout, (i, j)).expect("cell was set");
    let l = index_value(tau, layout, Group::V((i, j))).expect("pivot was set");
    let pol = side.pivot_polarity();
    let pivot_lit = Literal::with_polarity(l as Var, pol);
    let group = Group::premise(side, (i, j));

    let mut avoid = AvoidSets {
        u1: RestrictionGraph::of_assignment(tau, layout)
            .vertices_on(i - 1)
            .into_iter()
            .map(|p| p.1)
            .collect(),
        u2: (1..=d.t)
            .filter(|&k| e.contains(layout.pos(group.member(k))))
            .collect(),
        u3: BTreeSet::new(),
    };
    let swapped = c.without(pivot_lit.negate()).with(pivot_lit);

    enum Below {
        Input(usize),
        Pivot(usize),
        FreePivot,
    }
    let (child, below, case) = if i == 2 {
        let m = input_inside(f, &swapped)
            .ok_or_else(|| AdversaryError::NoInputClause(swapped.clone()))?;
        avoid.u3 = (1..=d.t)
            .filter(|&k| e.contains(layout.pos(RefVar::I { j: k, m })))
            .collect();
        let case = AdversaryCase::Premise {
            input_level: true,
            fresh_pivot: false,
        };
        (swapped, Below::Input(m), case)
    } else if c.len() + 1 < d.n {
        let child = c.with(pivot_lit);
        let lp = (1..=d.n)
            .find(|&x| !child.mentions(x as Var))
            .expect("a short clause misses a variable");
        avoid.u3 = (1..=d.t)
            .filter(|&k| {
                e.contains(layout.pos(RefVar::V {
                    i: i - 1,
                    j: k,
                    l: lp,
                }))
            })
            .collect();
        let case = AdversaryCase::Premise {
            input_level: false,
            fresh_pivot: true,
        };
        (child, Below::Pivot(lp), case)
    } else {
        let case = AdversaryCase::Premise {
            input_level: false,
            fresh_pivot: false,
        };
        (swapped, Below::FreePivot, case)
    };

    let jp = (1..=d.t)
        .find(|k| !avoid.u1.contains(k) && !avoid.u2.contains(k) && !avoid.u3.contains(k))
        .ok_or(AdversaryError::AvoidSetExhausted {
            u1: avoid.u1.len(),
            u2: avoid.u2.len(),
            u3: avoid.u3.len(),
            t: d.t,
        })?;
    debug_assert!(!wp.d_mentioned.contains(&(i - 1, jp)));
    set_index(tau, layout, group, jp);
    set_d(tau, layout, (i - 1, jp), &child);
    match below {
        Below::Input(m) => set_index(tau, layout, Group::I(jp), m),
        Below::Pivot(lp) => set_index(tau, layout, Group::V((i - 1, jp)), lp),
        Below::FreePivot => {
            let lp = free_value(e.clone(), Group::V((i - 1, jp)), layout)?;
            set_index(tau, layout, Group::V((i - 1, jp)), lp);
        }
    }
    Ok((case, avoid))
}
