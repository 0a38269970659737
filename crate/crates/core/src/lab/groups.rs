//! Variable groups of the levelled statement and their "set to" semantics.
//!
//! A group is one of `D(i,j,·,·)`, `V(i,j,·)`, `I(j,·)`, `L(i,j,·)` or
//! `R(i,j,·)`. An assignment either leaves a group untouched, sets it to a
//! value, or touches it without setting it (broken).

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, Literal, PartialAssignment, Var};
use crate::encoders::families::Side;
use crate::encoders::layout::{Dims, RefVar, VarLayout};

/// A grid cell `(level, column)`.
pub type Pair = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    D(Pair),
    V(Pair),
    /// `I(j,·)`, homed at `(1, j)`.
    I(usize),
    L(Pair),
    R(Pair),
}

impl Group {
    pub fn premise(side: Side, pair: Pair) -> Group {
        match side {
            Side::Left => Group::L(pair),
            Side::Right => Group::R(pair),
        }
    }

    pub fn home_pair(self) -> Pair {
        match self {
            Group::D(p) | Group::V(p) | Group::L(p) | Group::R(p) => p,
            Group::I(j) => (1, j),
        }
    }

    /// The group of a grid variable; `None` for C, T and Tm variables.
    pub fn of(v: RefVar) -> Option<Group> {
        Some(match v {
            RefVar::D { i, j, .. } => Group::D((i, j)),
            RefVar::V { i, j, .. } => Group::V((i, j)),
            RefVar::I { j, .. } => Group::I(j),
            RefVar::L { i, j, .. } => Group::L((i, j)),
            RefVar::R { i, j, .. } => Group::R((i, j)),
            _ => return None,
        })
    }

    /// The member variable carrying index `k` (ℓ, m or j'); not meaningful for D.
    pub fn member(self, k: usize) -> RefVar {
        match self {
            Group::V((i, j)) => RefVar::V { i, j, l: k },
            Group::I(j) => RefVar::I { j, m: k },
            Group::L((i, j)) => RefVar::L { i, j, jp: k },
            Group::R((i, j)) => RefVar::R { i, j, jp: k },
            Group::D(_) => panic!("D groups are indexed by literals"),
        }
    }

    /// Number of values of an index group in `dims`.
    pub fn arity(self, d: Dims) -> usize {
        match self {
            Group::D(_) => 2 * d.n,
            Group::V(_) => d.n,
            Group::I(_) => d.r,
            Group::L(_) | Group::R(_) => d.t,
        }
    }

    pub fn vars(self, layout: &VarLayout) -> Vec<Var> {
        let d = layout.dims();
        match self {
            Group::D((i, j)) => (1..=d.n)
                .flat_map(|l| [1u8, 0].map(|b| layout.var(RefVar::D { i, j, l, b })))
                .collect(),
            g => (1..=g.arity(d)).map(|k| layout.var(g.member(k))).collect(),
        }
    }

    /// Every group of the levelled statement, level by level.
    pub fn all(d: Dims) -> Vec<Group> {
        let mut out = Vec::new();
        for i in 1..=d.s {
            for j in 1..=d.t {
                out.push(Group::D((i, j)));
                if i == 1 {
                    out.push(Group::I(j));
                } else {
                    out.push(Group::V((i, j)));
                    out.push(Group::L((i, j)));
                    out.push(Group::R((i, j)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupState<T> {
    Untouched,
    Set(T),
    /// Some variable is assigned but the group is not set to any value.
    Broken,
}

impl<T> GroupState<T> {
    pub fn value(self) -> Option<T> {
        match self {
            GroupState::Set(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_set(&self) -> bool {
        matches!(self, GroupState::Set(_))
    }
}

pub fn is_touched(sigma: &PartialAssignment, layout: &VarLayout, g: Group) -> bool {
    g.vars(layout).into_iter().any(|v| sigma.contains(v))
}

/// The clause `D(i,j,·,·)` is set to, over `x_1..x_n`.
pub fn d_state(sigma: &PartialAssignment, layout: &VarLayout, (i, j): Pair) -> GroupState<Clause> {
    let n = layout.dims().n;
    let mut lits = Vec::new();
    let mut seen = 0;
    for l in 1..=n {
        for b in [1u8, 0] {
            match sigma.get(layout.var(RefVar::D { i, j, l, b })) {
                Some(true) => {
                    seen += 1;
                    lits.push(Literal::with_polarity(l as Var, b));
                }
                Some(false) => seen += 1,
                None => {}
            }
        }
    }
    match seen {
        0 => GroupState::Untouched,
        s if s == 2 * n => GroupState::Set(Clause::new(lits)),
        _ => GroupState::Broken,
    }
}

/// The value an index group (V, I, L or R) is set to.
pub fn index_state(sigma: &PartialAssignment, layout: &VarLayout, g: Group) -> GroupState<usize> {
    let k = g.arity(layout.dims());
    let mut seen = 0;
    let mut ones = Vec::new();
    for x in 1..=k {
        match sigma.get(layout.var(g.member(x))) {
            Some(true) => {
                seen += 1;
                ones.push(x);
            }
            Some(false) => seen += 1,
            None => {}
        }
    }
    match (seen, ones.as_slice()) {
        (0, _) => GroupState::Untouched,
        (s, [one]) if s == k => GroupState::Set(*one),
        _ => GroupState::Broken,
    }
}

pub fn is_set(sigma: &PartialAssignment, layout: &VarLayout, g: Group) -> bool {
    match g {
        Group::D(p) => d_state(sigma, layout, p).is_set(),
        g => index_state(sigma, layout, g).is_set(),
    }
}

pub fn index_value(sigma: &PartialAssignment, layout: &VarLayout, g: Group) -> Option<usize> {
    index_state(sigma, layout, g).value()
}

pub fn d_value(sigma: &PartialAssignment, layout: &VarLayout, p: Pair) -> Option<Clause> {
    d_state(sigma, layout, p).value()
}

/// Sets `D(i,j,·,·)` to `clause`, a clause over `x_1..x_n`.
pub fn set_d(sigma: &mut PartialAssignment, layout: &VarLayout, (i, j): Pair, clause: &Clause) {
    for l in 1..=layout.dims().n {
        for b in [1u8, 0] {
            let lit = Literal::with_polarity(l as Var, b);
            sigma.set(layout.var(RefVar::D { i, j, l, b }), clause.contains(lit));
        }
    }
}

pub fn set_index(sigma: &mut PartialAssignment, layout: &VarLayout, g: Group, value: usize) {
    for x in 1..=g.arity(layout.dims()) {
        sigma.set(layout.var(g.member(x)), x == value);
    }
}

pub fn unset(sigma: &mut PartialAssignment, layout: &VarLayout, g: Group) {
    for v in g.vars(layout) {
        sigma.unset(v);
    }
}

/// The full clause over `x_1..x_n` with literal `x_ℓ^{a[ℓ-1]}` for every ℓ.
pub fn full_clause(bits: &[u8]) -> Clause {
    Clause::new(
        bits.iter()
            .enumerate()
            .map(|(k, &b)| Literal::with_polarity(k as Var + 1, b))
            .collect(),
    )
}

/// Extends `c` to a full clause, using positive literals for missing variables.
pub fn complete_positively(c: &Clause, n: usize) -> Clause {
    let mut out = c.clone();
    for l in 1..=n as Var {
        if !out.mentions(l) {
            out = out.with(Literal::pos(l));
        }
    }
    out
}

/// Groups whose home pair is touched by `sigma`, decoded from its domain.
pub fn touched_groups(
    sigma: &PartialAssignment,
    layout: &VarLayout,
) -> std::collections::BTreeSet<Group> {
    sigma
        .domain()
        .filter_map(|v| layout.decode(v))
        .filter_map(Group::of)
        .collect()
}
