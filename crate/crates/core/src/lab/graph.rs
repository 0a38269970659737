//! Child graphs of restrictions and admissible assignments.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cnf::PartialAssignment;
use crate::encoders::families::Side;
use crate::encoders::layout::VarLayout;
use crate::lab::groups::{index_value, touched_groups, Group, Pair};
use crate::lab::sample::RandomRestriction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub parent: Pair,
    pub child: Pair,
    pub side: Side,
}

/// Vertices on grid cells; every edge joins a level-`i` parent to a
/// level-`i-1` child.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionGraph {
    pub vertices: BTreeSet<Pair>,
    pub edges: Vec<Edge>,
}

impl RestrictionGraph {
    /// `G_ρ`: vertices `A_D ∪ A_V ∪ A_I ∪ A_RL ∪ ⋃ B_i`, edges from the `h_i`.
    pub fn of_restriction(rr: &RandomRestriction) -> RestrictionGraph {
        let mut g = RestrictionGraph::default();
        g.vertices
            .extend(rr.a_d.iter().chain(&rr.a_v).chain(&rr.a_i).chain(&rr.a_rl));
        for (&i, h) in &rr.h {
            for (side, map) in [(Side::Left, &h.left), (Side::Right, &h.right)] {
                for (&j, &jp) in map {
                    g.add_edge(Edge {
                        parent: (i, j),
                        child: (i - 1, jp),
                        side,
                    });
                }
            }
        }
        g.edges.sort();
        g
    }

    /// `G_σ`: home pairs of `dom(σ)` plus the images of the `h_{σ,i}`, with
    /// edges for every L or R group `σ` sets.
    pub fn of_assignment(sigma: &PartialAssignment, layout: &VarLayout) -> RestrictionGraph {
        let mut g = RestrictionGraph::default();
        for grp in touched_groups(sigma, layout) {
            g.vertices.insert(grp.home_pair());
            let (side, pair) = match grp {
                Group::L(p) => (Side::Left, p),
                Group::R(p) => (Side::Right, p),
                _ => continue,
            };
            if let Some(jp) = index_value(sigma, layout, grp) {
                g.add_edge(Edge {
                    parent: pair,
                    child: (pair.0 - 1, jp),
                    side,
                });
            }
        }
        g.edges.sort();
        g
    }

    fn add_edge(&mut self, e: Edge) {
        self.vertices.insert(e.parent);
        self.vertices.insert(e.child);
        self.edges.push(e);
    }

    pub fn children(&self, v: Pair) -> Vec<Edge> {
        self.edges
            .iter()
            .filter(|e| e.parent == v)
            .copied()
            .collect()
    }

    pub fn is_incident(&self, v: Pair) -> bool {
        self.edges.iter().any(|e| e.parent == v || e.child == v)
    }

    pub fn vertices_on(&self, level: usize) -> BTreeSet<Pair> {
        self.vertices
            .iter()
            .filter(|v| v.0 == level)
            .copied()
            .collect()
    }

    /// True if no two edges end in the same child.
    pub fn children_are_unshared(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().all(|e| seen.insert(e.child))
    }

    /// Connected components, ignoring edge direction.
    pub fn components(&self) -> Vec<BTreeSet<Pair>> {
        let mut adj: BTreeMap<Pair, Vec<Pair>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.parent).or_default().push(e.child);
            adj.entry(e.child).or_default().push(e.parent);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &v in &self.vertices {
            if !seen.insert(v) {
                continue;
            }
            let mut comp = BTreeSet::from([v]);
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for &x in adj.get(&u).into_iter().flatten() {
                    if seen.insert(x) {
                        comp.insert(x);
                        stack.push(x);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}
