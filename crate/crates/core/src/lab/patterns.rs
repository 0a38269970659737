//! Level-size bounds and forbidden connected patterns of a restriction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lab::graph::RestrictionGraph;
use crate::lab::groups::Pair;
use crate::lab::sample::RandomRestriction;

/// Which `A`-set a pair was drawn into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Membership {
    D,
    V,
    I,
    RL,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelBounds {
    /// `|A_D ∩ level i| ≤ 2pt` on every level.
    pub cells: bool,
    /// `|A_i| ≤ 2pt` and `|A_V ∩ level i| ≤ 2pt` on levels `2..s`.
    pub premises_and_pivots: bool,
    /// `|A_I| ≤ 2pt`.
    pub inputs: bool,
}

impl LevelBounds {
    pub fn all(&self) -> bool {
        self.cells && self.premises_and_pivots && self.inputs
    }
}

pub fn check_level_bounds(rr: &RandomRestriction) -> LevelBounds {
    let cap = rr.cap();
    let within =
        |set: &BTreeSet<Pair>, i: usize| set.iter().filter(|p| p.0 == i).count() as f64 <= cap;
    let d = rr.dims;
    LevelBounds {
        cells: (1..=d.s).all(|i| within(&rr.a_d, i)),
        premises_and_pivots: (2..=d.s).all(|i| within(&rr.a_rl, i) && within(&rr.a_v, i)),
        inputs: rr.a_i.len() as f64 <= cap,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternReport {
    /// `(s,t) ∉ A_D ∪ A_RL ∪ A_V`.
    pub last_cell_free: bool,
    /// No connected triple with three or more memberships.
    pub no_dense_triple: bool,
    /// A triple violating the second item, repeated elements allowed.
    pub witness: Option<[Pair; 3]>,
}

impl PatternReport {
    pub fn all(&self) -> bool {
        self.last_cell_free && self.no_dense_triple
    }
}

pub fn memberships(rr: &RandomRestriction, v: Pair) -> Vec<Membership> {
    [
        (Membership::D, &rr.a_d),
        (Membership::V, &rr.a_v),
        (Membership::I, &rr.a_i),
        (Membership::RL, &rr.a_rl),
    ]
    .into_iter()
    .filter(|(_, set)| set.contains(&v))
    .map(|(m, _)| m)
    .collect()
}

/// Evaluates both items. A triple needs every element in some `A`-set, at
/// least three distinct `(pair, set)` memberships, and a connected subgraph
/// on its elements, their children and the edges into those children. Since
/// no two vertices share a child, that subgraph is connected exactly when
/// the distinct elements are connected by parent-child edges among
/// themselves: a single vertex, a parent with one child, a chain of three
/// levels, or a parent with both children.
pub fn check_patterns(rr: &RandomRestriction) -> PatternReport {
    let d = rr.dims;
    let last = (d.s, d.t);
    let last_cell_free =
        !(rr.a_d.contains(&last) || rr.a_rl.contains(&last) || rr.a_v.contains(&last));
    let g = RestrictionGraph::of_restriction(rr);
    let count = |v: Pair| memberships(rr, v).len();
    let members: Vec<Pair> = g
        .vertices
        .iter()
        .copied()
        .filter(|&v| count(v) > 0)
        .collect();
    let member_children = |v: Pair| -> Vec<Pair> {
        g.children(v)
            .into_iter()
            .map(|e| e.child)
            .filter(|&c| count(c) > 0)
            .collect()
    };

    let mut witness = None;
    'scan: for &u in &members {
        if count(u) >= 3 {
            witness = Some([u, u, u]);
            break;
        }
        let kids = member_children(u);
        for &c in &kids {
            if count(u) + count(c) >= 3 {
                witness = Some([u, c, c]);
                break 'scan;
            }
            if let Some(&gc) = member_children(c).first() {
                witness = Some([u, c, gc]);
                break 'scan;
            }
        }
        if let [a, b] = kids[..] {
            witness = Some([u, a, b]);
            break;
        }
    }
    PatternReport {
        last_cell_free,
        no_dense_triple: witness.is_none(),
        witness,
    }
}
