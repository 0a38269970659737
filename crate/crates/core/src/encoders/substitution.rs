//! Substitutions of constants and literals for variables, the assignment
//! that pins the clause-description variables to a concrete formula, and the
//! substitution that collapses the satisfiability formula onto that formula.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, PartialAssignment, Var};
use crate::encoders::layout::{RefVar, VarLayout};
use crate::resolution::{check_resolution, Justification, ResolutionProof, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Image {
    Const(bool),
    Lit(Literal),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("variable {var} has no image")]
    Unmapped { var: Var },
    #[error("substituted clause at step {step} has no justification in the target formula")]
    RepairFailed { step: usize },
    #[error("input proof does not check: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidProof(Vec<Violation>),
}

/// A total map on the variables it is applied to. Targets are constants or
/// literals of the base formula, so there is no chaining.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Image>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    /// Constants from `assignment`, renamings from `renaming`; the domains must
    /// be disjoint.
    pub fn from_parts(
        assignment: &PartialAssignment,
        renaming: &BTreeMap<Var, Literal>,
    ) -> Substitution {
        let mut s = Substitution::new();
        for (v, b) in assignment.iter() {
            s.set(v, Image::Const(b));
        }
        for (&v, &lit) in renaming {
            let previous = s.set(v, Image::Lit(lit));
            debug_assert!(previous.is_none(), "variable {v} both assigned and renamed");
        }
        s
    }

    pub fn set(&mut self, var: Var, image: Image) -> Option<Image> {
        self.map.insert(var, image)
    }

    pub fn get(&self, var: Var) -> Option<Image> {
        self.map.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Image)> + '_ {
        self.map.iter().map(|(&v, &i)| (v, i))
    }

    pub fn image_of(&self, lit: Literal) -> Result<Image, SubstError> {
        match self.get(lit.var()) {
            None => Err(SubstError::Unmapped { var: lit.var() }),
            Some(Image::Const(b)) => Ok(Image::Const(b == lit.is_positive())),
            Some(Image::Lit(l)) => Ok(Image::Lit(if lit.is_positive() { l } else { !l })),
        }
    }

    /// `None` when some literal becomes true. Tautologies are kept.
    pub fn apply_clause(&self, c: &Clause) -> Result<Option<Clause>, SubstError> {
        let mut lits = Vec::with_capacity(c.len());
        for lit in c.iter() {
            match self.image_of(lit)? {
                Image::Const(true) => return Ok(None),
                Image::Const(false) => {}
                Image::Lit(l) => lits.push(l),
            }
        }
        Ok(Some(Clause::new(lits)))
    }

    /// Applies the substitution clause by clause, dropping satisfied clauses
    /// and keeping the order of the rest.
    pub fn apply_cnf(&self, f: &Cnf, target_vars: u32) -> Result<Cnf, SubstError> {
        let mut out = Vec::new();
        for c in f.clauses() {
            if let Some(d) = self.apply_clause(c)? {
                out.push(d);
            }
        }
        Ok(Cnf::new(target_vars, out).expect("substitution targets lie in the target range"))
    }

    /// Maps a checked derivation from `f` to one from `target`.
    ///
    /// Satisfied and tautological clauses are dropped. Every surviving clause is
    /// justified, in order of preference, as a resolvent of the images of its
    /// premises, as a weakening of a surviving premise, or as a weakening of a
    /// clause of `target`.
    pub fn apply_proof(
        &self,
        f: &Cnf,
        pi: &ResolutionProof,
        target: &Cnf,
    ) -> Result<ResolutionProof, SubstError> {
        check_resolution(f, pi, false).map_err(SubstError::InvalidProof)?;
        let inputs: HashMap<&Clause, usize> = target
            .clauses()
            .iter()
            .enumerate()
            .rev()
            .map(|(k, c)| (c, k + 1))
            .collect();
        let mut new_index: Vec<Option<usize>> = Vec::with_capacity(pi.len());
        let mut out = ResolutionProof::new();

        for (k, step) in pi.steps.iter().enumerate() {
            let clause = match self.apply_clause(&step.clause)? {
                Some(c) if !c.is_tautological() => c,
                _ => {
                    new_index.push(None);
                    continue;
                }
            };
            let kept = |u: usize| new_index[u - 1];
            let fits = |u: usize| kept(u).filter(|&x| out.steps[x - 1].clause.is_subset(&clause));

            let mut just = None;
            if let Justification::Resolvent { left, right, pivot } = step.just {
                if let (Some(a), Some(b), Some(Image::Lit(y))) =
                    (kept(left), kept(right), self.get(pivot))
                {
                    // A negative image swaps which premise holds the positive literal.
                    let (pl, nl) = if y.is_positive() { (a, b) } else { (b, a) };
                    let v = y.var();
                    if let Ok(res) = out.steps[pl - 1]
                        .clause
                        .resolve(&out.steps[nl - 1].clause, v)
                    {
                        if res.is_subset(&clause) {
                            just = Some(Justification::Resolvent {
                                left: pl,
                                right: nl,
                                pivot: v,
                            });
                        }
                    }
                }
            }
            if just.is_none() {
                let premises = match step.just {
                    Justification::Input(_) => vec![],
                    Justification::Weaken(u) => vec![u],
                    Justification::Resolvent { left, right, .. } => vec![left, right],
                };
                just = premises
                    .into_iter()
                    .find_map(fits)
                    .map(Justification::Weaken);
            }
            if just.is_none() {
                just = input_for(&clause, &inputs, target).map(Justification::Input);
            }
            let just = just.ok_or(SubstError::RepairFailed { step: k + 1 })?;
            out.push(clause, just);
            new_index.push(Some(out.len()));
        }
        Ok(out)
    }
}

fn input_for(clause: &Clause, exact: &HashMap<&Clause, usize>, target: &Cnf) -> Option<usize> {
    exact.get(clause).copied().or_else(|| {
        target
            .clauses()
            .iter()
            .position(|c| c.is_subset(clause))
            .map(|k| k + 1)
    })
}

pub fn drop_tautologies(f: &Cnf) -> Cnf {
    let kept = f
        .clauses()
        .iter()
        .filter(|c| !c.is_tautological())
        .cloned()
        .collect();
    Cnf::new(f.num_vars(), kept).expect("subset of a valid formula")
}

/// `C(m,ℓ,b) = 1` exactly when `x_ℓ^b ∈ C_m`.
pub fn gamma_f(f: &Cnf, layout: &VarLayout) -> PartialAssignment {
    let dims = layout.dims();
    let mut gamma = PartialAssignment::new();
    for m in 1..=dims.r {
        let cm = f.clause(m).expect("layout matches formula");
        for l in 1..=dims.n {
            for b in 0..=1u8 {
                let lit = Literal::with_polarity(l as Var, b);
                gamma.set(layout.var(RefVar::C { m, l, b }), cm.contains(lit));
            }
        }
    }
    gamma
}

/// `T(m,ℓ,b) ↦ x_ℓ^b` when `x_ℓ^b ∈ C_m`, else 0; `T(ℓ) ↦ x_ℓ` when `x_ℓ`
/// occurs in `f`, else 0.
pub fn tau(f: &Cnf, layout: &VarLayout) -> Substitution {
    let dims = layout.dims();
    let mut s = Substitution::new();
    for l in 1..=dims.n {
        let occurs = f.clauses().iter().any(|c| c.mentions(l as Var));
        let image = if occurs {
            Image::Lit(Literal::pos(l as Var))
        } else {
            Image::Const(false)
        };
        s.set(layout.var(RefVar::T { l }), image);
    }
    for m in 1..=dims.r {
        let cm = f.clause(m).expect("layout matches formula");
        for l in 1..=dims.n {
            for b in 0..=1u8 {
                let lit = Literal::with_polarity(l as Var, b);
                let image = if cm.contains(lit) {
                    Image::Lit(lit)
                } else {
                    Image::Const(false)
                };
                s.set(layout.var(RefVar::Tm { m, l, b }), image);
            }
        }
    }
    s
}
