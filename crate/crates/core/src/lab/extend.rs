//! Extension of a restriction to an admissible assignment, component by
//! component of its child graph.
//!
//! Only cell, pivot and input groups are added. Cells in components with
//! edges get full clauses (one literal per variable); for each choice of the
//! free pivots the clause bits are solved as equalities and fixed values, and
//! unconstrained bits default to positive literals.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, Cnf, PartialAssignment};
use crate::encoders::layout::VarLayout;
use crate::lab::graph::{Edge, RestrictionGraph};
use crate::lab::groups::{full_clause, set_d, set_index, Group, Pair};
use crate::lab::patterns::{check_patterns, PatternReport};
use crate::lab::sample::RandomRestriction;

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtendError {
    #[error("restriction violates the pattern events: {0:?}")]
    PreconditionFailed(PatternReport),
    #[error("no admissible completion of the component {component:?}")]
    NoAdmissibleExtension { component: Vec<Pair> },
    #[error("no input clause is contained in {clause}")]
    NoInputClause { clause: Clause },
}

/// Smallest `m` with `C_m ⊆ c`.
pub fn input_inside(f: &Cnf, c: &Clause) -> Option<usize> {
    f.clauses()
        .iter()
        .position(|cm| cm.is_subset(c))
        .map(|k| k + 1)
}

pub fn extend_to_admissible(
    rr: &RandomRestriction,
    f: &Cnf,
    layout: &VarLayout,
) -> Result<PartialAssignment, ExtendError> {
    let report = check_patterns(rr);
    if !report.all() {
        return Err(ExtendError::PreconditionFailed(report));
    }
    let g = RestrictionGraph::of_restriction(rr);
    let mut sigma = rr.rho.clone();
    for comp in g.components() {
        let edges: Vec<Edge> = g
            .edges
            .iter()
            .filter(|e| comp.contains(&e.parent))
            .copied()
            .collect();
        if edges.is_empty() {
            let v = *comp.first().expect("components are nonempty");
            complete_isolated(rr, f, layout, v, &mut sigma)?;
        } else {
            solve_component(rr, f, layout, &comp, &edges, &mut sigma)?;
        }
    }
    Ok(sigma)
}

fn complete_isolated(
    rr: &RandomRestriction,
    f: &Cnf,
    layout: &VarLayout,
    (i, j): Pair,
    sigma: &mut PartialAssignment,
) -> Result<(), ExtendError> {
    let Some(c) = rr.cell_clauses.get(&(i, j)) else {
        return Ok(());
    };
    if i == 1 {
        if !rr.inputs.contains_key(&j) {
            let m = input_inside(f, c)
                .ok_or_else(|| ExtendError::NoInputClause { clause: c.clone() })?;
            set_index(sigma, layout, Group::I(j), m);
        }
    } else if !rr.pivots.contains_key(&(i, j)) {
        set_index(sigma, layout, Group::V((i, j)), 1);
    }
    Ok(())
}

/// Union-find over clause bits `(vertex, ℓ)` with an optional fixed value per class.
struct Bits {
    index: BTreeMap<(Pair, usize), usize>,
    parent: Vec<usize>,
    value: Vec<Option<u8>>,
}

impl Bits {
    fn new(comp: &BTreeSet<Pair>, n: usize) -> Bits {
        let index: BTreeMap<_, _> = comp
            .iter()
            .flat_map(|&v| (1..=n).map(move |l| (v, l)))
            .enumerate()
            .map(|(k, key)| (key, k))
            .collect();
        let len = index.len();
        Bits {
            index,
            parent: (0..len).collect(),
            value: vec![None; len],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn fix(&mut self, v: Pair, l: usize, b: u8) -> bool {
        let r = self.find(self.index[&(v, l)]);
        match self.value[r] {
            Some(old) => old == b,
            None => {
                self.value[r] = Some(b);
                true
            }
        }
    }

    fn join(&mut self, a: (Pair, usize), b: (Pair, usize)) -> bool {
        let (ra, rb) = (self.find(self.index[&a]), self.find(self.index[&b]));
        if ra == rb {
            return true;
        }
        let merged = match (self.value[ra], self.value[rb]) {
            (Some(x), Some(y)) if x != y => return false,
            (x, y) => x.or(y),
        };
        self.parent[ra] = rb;
        self.value[rb] = merged;
        true
    }

    fn clause(&mut self, v: Pair, n: usize) -> Clause {
        let bits: Vec<u8> = (1..=n)
            .map(|l| {
                let r = self.find(self.index[&(v, l)]);
                self.value[r].unwrap_or(1)
            })
            .collect();
        full_clause(&bits)
    }
}

fn solve_component(
    rr: &RandomRestriction,
    f: &Cnf,
    layout: &VarLayout,
    comp: &BTreeSet<Pair>,
    edges: &[Edge],
    sigma: &mut PartialAssignment,
) -> Result<(), ExtendError> {
    let n = rr.dims.n;
    let parents: Vec<Pair> = edges
        .iter()
        .map(|e| e.parent)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let options: Vec<Vec<usize>> = parents
        .iter()
        .map(|p| match rr.pivots.get(p) {
            Some(&l) => vec![l],
            None => (1..=n).collect(),
        })
        .collect();
    let mut choice = vec![0usize; parents.len()];
    let mut missing_input = None;
    loop {
        let pivot: BTreeMap<Pair, usize> = parents
            .iter()
            .zip(choice.iter().zip(&options))
            .map(|(&p, (&k, opts))| (p, opts[k]))
            .collect();
        match try_pivots(rr, f, comp, edges, &pivot, n) {
            Ok(Some((cells, inputs))) => {
                for (&v, c) in &cells {
                    if !rr.cell_clauses.contains_key(&v) {
                        set_d(sigma, layout, v, c);
                    }
                }
                for (&j, &m) in &inputs {
                    set_index(sigma, layout, Group::I(j), m);
                }
                for &v in comp
                    .iter()
                    .filter(|v| v.0 >= 2 && !rr.pivots.contains_key(v))
                {
                    set_index(
                        sigma,
                        layout,
                        Group::V(v),
                        pivot.get(&v).copied().unwrap_or(1),
                    );
                }
                return Ok(());
            }
            Ok(None) => {}
            Err(c) => missing_input = Some(c),
        }
        // Odometer over the pivot options.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Err(match missing_input {
                    Some(clause) => ExtendError::NoInputClause { clause },
                    None => ExtendError::NoAdmissibleExtension {
                        component: comp.iter().copied().collect(),
                    },
                });
            }
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

type Completion = (BTreeMap<Pair, Clause>, BTreeMap<usize, usize>);

/// Clause bits and input indices for fixed pivots; `Ok(None)` if the
/// constraints conflict, `Err` if some level-1 clause contains no input clause.
fn try_pivots(
    rr: &RandomRestriction,
    f: &Cnf,
    comp: &BTreeSet<Pair>,
    edges: &[Edge],
    pivot: &BTreeMap<Pair, usize>,
    n: usize,
) -> Result<Option<Completion>, Clause> {
    let mut bits = Bits::new(comp, n);
    let mut ok = true;
    for &v in comp {
        if let Some(c) = rr.cell_clauses.get(&v) {
            for lit in c.iter() {
                ok &= bits.fix(v, lit.var() as usize, lit.polarity());
            }
        }
        if v.0 == 1 {
            if let Some(cm) = rr.inputs.get(&v.1).and_then(|&m| f.clause(m)) {
                for lit in cm.iter() {
                    ok &= bits.fix(v, lit.var() as usize, lit.polarity());
                }
            }
        }
    }
    for e in edges {
        let l = pivot[&e.parent];
        ok &= bits.fix(e.child, l, e.side.pivot_polarity());
        for lp in (1..=n).filter(|&lp| lp != l) {
            ok &= bits.join((e.parent, lp), (e.child, lp));
        }
    }
    if !ok {
        return Ok(None);
    }
    let mut cells = BTreeMap::new();
    let mut inputs = BTreeMap::new();
    for &v in comp {
        let c = bits.clause(v, n);
        if v.0 == 1 && !rr.inputs.contains_key(&v.1) {
            inputs.insert(v.1, input_inside(f, &c).ok_or_else(|| c.clone())?);
        }
        cells.insert(v, c);
    }
    Ok(Some((cells, inputs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::families::Side;
    use crate::lab::admissible::{check_no_falsified_axiom, is_admissible};
    use crate::lab::groups::index_value;
    use crate::lab::sample::{sample_rho, LevelInjection, RhoParams};

    fn contradiction() -> Cnf {
        Cnf::new(
            2,
            vec![Clause::from_dimacs(&[1]), Clause::from_dimacs(&[-1])],
        )
        .unwrap()
    }

    fn blank(lay: &VarLayout) -> RandomRestriction {
        RandomRestriction::empty(lay.dims(), 0.1, 1.0)
    }

    #[test]
    fn empty_restriction_extends_to_itself() {
        let lay = VarLayout::ref_f(2, 2, 3, 5).unwrap();
        let sigma = extend_to_admissible(&blank(&lay), &contradiction(), &lay).unwrap();
        assert!(sigma.is_empty());
    }

    #[test]
    fn isolated_input_cell_gets_a_contained_input() {
        let lay = VarLayout::ref_f(2, 2, 3, 5).unwrap();
        let mut rr = blank(&lay);
        rr.a_d.insert((1, 4));
        rr.cell_clauses
            .insert((1, 4), Clause::from_dimacs(&[-1, 2]));
        rr.rebuild_rho(&lay);
        let f = contradiction();
        let sigma = extend_to_admissible(&rr, &f, &lay).unwrap();
        assert_eq!(index_value(&sigma, &lay, Group::I(4)), Some(2));
        assert_eq!(is_admissible(&sigma, &rr.rho, &f, &lay), Ok(()));
    }

    fn wired(lay: &VarLayout, child_clause: Clause) -> RandomRestriction {
        let mut rr = blank(lay);
        rr.a_rl.insert((3, 2));
        rr.h.insert(
            3,
            LevelInjection {
                left: BTreeMap::from([(2, 1)]),
                right: BTreeMap::from([(2, 3)]),
            },
        );
        rr.a_d.insert((2, 1));
        rr.cell_clauses.insert((2, 1), child_clause);
        rr.rebuild_rho(lay);
        rr
    }

    #[test]
    fn parent_with_a_restricted_left_child() {
        let lay = VarLayout::ref_f(2, 2, 3, 5).unwrap();
        let f = contradiction();
        let rr = wired(&lay, Clause::from_dimacs(&[-1, 2]));
        let sigma = extend_to_admissible(&rr, &f, &lay).unwrap();
        assert_eq!(is_admissible(&sigma, &rr.rho, &f, &lay), Ok(()));
        assert!(check_no_falsified_axiom(&sigma, &f, &lay).is_ok());
        assert_eq!(index_value(&sigma, &lay, Group::V((3, 2))), Some(2));
    }

    #[test]
    fn all_negative_left_child_has_no_pivot() {
        let lay = VarLayout::ref_f(2, 2, 3, 5).unwrap();
        let rr = wired(&lay, Clause::from_dimacs(&[-1, -2]));
        assert!(check_patterns(&rr).all());
        assert!(matches!(
            extend_to_admissible(&rr, &contradiction(), &lay),
            Err(ExtendError::NoAdmissibleExtension { .. })
        ));
    }

    #[test]
    fn sampled_extensions_are_admissible_or_hit_the_polarity_obstruction() {
        let lay = VarLayout::ref_f(2, 2, 3, 30).unwrap();
        let f = contradiction();
        let params = RhoParams::new(1.0, 11);
        for trial in 0..200 {
            let rr = sample_rho(&params, &lay, trial).unwrap();
            match extend_to_admissible(&rr, &f, &lay) {
                Ok(sigma) => {
                    assert_eq!(
                        is_admissible(&sigma, &rr.rho, &f, &lay),
                        Ok(()),
                        "trial {trial}"
                    );
                    assert!(check_no_falsified_axiom(&sigma, &f, &lay).is_ok());
                    let added: Vec<_> = sigma.domain().filter(|v| !rr.rho.contains(*v)).collect();
                    assert!(added.iter().all(|&v| !matches!(
                        Group::of(lay.decode(v).unwrap()),
                        Some(Group::L(_) | Group::R(_))
                    )));
                }
                Err(ExtendError::PreconditionFailed(_)) => {}
                Err(ExtendError::NoAdmissibleExtension { component }) => {
                    // A restricted child whose clause lacks every literal of its side's polarity.
                    let blocked = component.iter().any(|&c| {
                        rr.cell_clauses.get(&c).is_some_and(|cl| {
                            let side = if rr
                                .h
                                .get(&(c.0 + 1))
                                .is_some_and(|h| h.left.values().any(|&x| x == c.1))
                            {
                                Side::Left
                            } else {
                                Side::Right
                            };
                            cl.iter().all(|lit| lit.polarity() != side.pivot_polarity())
                        })
                    });
                    assert!(blocked, "trial {trial}: {component:?}");
                }
                Err(e) => panic!("trial {trial}: {e}"),
            }
        }
    }
}
