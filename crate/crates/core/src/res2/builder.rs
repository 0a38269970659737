//! Explicit Res(2) refutation of the satisfiability formula conjoined with the
//! clause-variable refutation statement.
//!
//! For every cell `(i,j)` the builder derives
//! `D_{i,j} = ⋁_{ℓ,b} (D(i,j,ℓ,b) ∧ T(ℓ)^b)`, level by level, and finally
//! cuts `D_{s,t}` against the unit clauses `¬D(s,t,ℓ,b)`.
//!
//! Three weakenings are added beyond the one that completes the transfer
//! step, each making a cut premise contain the negation of both literals of
//! the cut term: the cut of `D_{i-1,j'}` on `D(i-1,j',ℓ,b) ∧ T(ℓ)^b` uses the
//! non-tautology resolvent weakened by `T(ℓ)^{1-b}`; the cut on the opposite
//! term uses the axiom for `T(ℓ)` weakened by `¬D(i-1,j',ℓ,1-b)`; the finish
//! uses each `¬D(s,t,ℓ,b)` weakened by `T(ℓ)^{1-b}`.

use std::collections::HashMap;

use serde::Serialize;

use crate::cnf::{Clause, Cnf, Literal, Var};
use crate::encoders::families::{encode_reflection, EncodeError};
use crate::encoders::layout::{RefVar, VarLayout};
use crate::res2::{Res2Just, Res2Proof, Term, TwoDnf};

/// Symbol counts of the three phases; they sum to the proof size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PhaseSizes {
    pub base: usize,
    pub induction: usize,
    pub finish: usize,
}

impl PhaseSizes {
    pub fn total(&self) -> usize {
        self.base + self.induction + self.finish
    }
}

#[derive(Clone, Debug)]
pub struct ReflectionRefutation {
    pub formula: Cnf,
    pub proof: Res2Proof,
    pub phases: PhaseSizes,
}

struct Builder<'a> {
    layout: &'a VarLayout,
    index: HashMap<Clause, usize>,
    proof: Res2Proof,
    inputs: HashMap<usize, usize>,
    axioms: HashMap<Var, usize>,
    weak_axioms: HashMap<(Var, Literal), usize>,
}

impl<'a> Builder<'a> {
    fn lit(&self, v: RefVar, positive: bool) -> Literal {
        self.layout.lit(v, positive)
    }

    /// `T(ℓ)^b`.
    fn t(&self, l: usize, b: u8) -> Literal {
        self.lit(RefVar::T { l }, b == 1)
    }

    fn d_term(&self, i: usize, j: usize, l: usize, b: u8) -> Term {
        Term::pair(self.lit(RefVar::D { i, j, l, b }, true), self.t(l, b))
    }

    fn line(&self, k: usize) -> &TwoDnf {
        self.proof.line(k)
    }

    fn input(&mut self, c: Clause) -> usize {
        let m = *self
            .index
            .get(&c)
            .unwrap_or_else(|| panic!("clause {c} is not in the reflection formula"));
        if let Some(&k) = self.inputs.get(&m) {
            return k;
        }
        let k = self.proof.push(TwoDnf::from_clause(&c), Res2Just::Input(m));
        self.inputs.insert(m, k);
        k
    }

    fn axiom(&mut self, x: Var) -> usize {
        if let Some(&k) = self.axioms.get(&x) {
            return k;
        }
        let line = TwoDnf::new(vec![
            Term::unit(Literal::pos(x)),
            Term::unit(Literal::neg(x)),
        ]);
        let k = self.proof.push(line, Res2Just::Axiom(x));
        self.axioms.insert(x, k);
        k
    }

    fn weaken(&mut self, k: usize, extra: impl IntoIterator<Item = Term>) -> usize {
        let line = self.line(k).with(extra);
        self.proof.push(line, Res2Just::Weaken(k))
    }

    /// The axiom for `x` weakened by `extra`, shared between uses.
    fn weak_axiom(&mut self, x: Var, extra: Literal) -> usize {
        if let Some(&k) = self.weak_axioms.get(&(x, extra)) {
            return k;
        }
        let a = self.axiom(x);
        let k = self.weaken(a, [Term::unit(extra)]);
        self.weak_axioms.insert((x, extra), k);
        k
    }

    /// Cut of line `i` on `term` against line `j`; the conclusion is exactly
    /// the two side formulas.
    fn cut(&mut self, i: usize, j: usize, term: Term) -> usize {
        let negs: Vec<Term> = term.literals().iter().map(|l| Term::unit(!*l)).collect();
        let line = self
            .line(i)
            .without(std::slice::from_ref(&term))
            .union(&self.line(j).without(&negs));
        self.proof.push(line, Res2Just::Cut { i, j, term })
    }

    fn and_intro(&mut self, i: usize, j: usize, l1: Literal, l2: Literal) -> usize {
        let (u1, u2) = (Term::unit(l1), Term::unit(l2));
        let line = self
            .line(i)
            .without(&[u1])
            .union(&self.line(j).without(&[u2]))
            .with([Term::pair(l1, l2)]);
        self.proof.push(line, Res2Just::AndIntro { i, j, l1, l2 })
    }

    /// Cuts away, one by one, the unit terms `lits` of the disjunction at
    /// `start`, each against the line `premise(l)` that holds `¬l`.
    fn chain(
        &mut self,
        start: usize,
        lits: Vec<Literal>,
        mut premise: impl FnMut(&mut Self, Literal) -> usize,
    ) -> usize {
        let mut acc = start;
        for l in lits {
            let p = premise(self, l);
            acc = self.cut(acc, p, Term::unit(l));
        }
        acc
    }

    fn base_case(&mut self, j: usize) -> usize {
        let d = self.layout.dims();
        let ly = self.layout;
        let mut per_m = Vec::with_capacity(d.r);
        for m in 1..=d.r {
            // ¬I(j,m) ∨ ¬T(m,ℓ,b) ∨ (D(1,j,ℓ,b) ∧ T(ℓ)^b) for each (ℓ, b).
            let mut term_lines = HashMap::new();
            for l in 1..=d.n {
                for b in 0..=1u8 {
                    let sat_lit = self.input(Clause::new(vec![
                        ly.neg(RefVar::Tm { m, l, b }),
                        ly.pos(RefVar::C { m, l, b }),
                    ]));
                    let weak = self.input(Clause::new(vec![
                        ly.neg(RefVar::I { j, m }),
                        ly.neg(RefVar::C { m, l, b }),
                        ly.pos(RefVar::D { i: 1, j, l, b }),
                    ]));
                    let c = self.cut(sat_lit, weak, Term::unit(ly.pos(RefVar::C { m, l, b })));
                    let sign = self.input(Clause::new(vec![
                        ly.neg(RefVar::Tm { m, l, b }),
                        self.t(l, b),
                    ]));
                    let k =
                        self.and_intro(c, sign, ly.pos(RefVar::D { i: 1, j, l, b }), self.t(l, b));
                    term_lines.insert(ly.neg(RefVar::Tm { m, l, b }), k);
                }
            }
            let some_lit: Clause = (1..=d.n)
                .flat_map(|l| [1u8, 0].map(|b| ly.pos(RefVar::Tm { m, l, b })))
                .collect();
            let start = self.input(some_lit.clone());
            // Cut each ¬T(m,ℓ,b) of its line against the clause holding T(m,ℓ,b).
            let mut acc = start;
            for lit in some_lit.iter() {
                let k = term_lines[&!lit];
                acc = self.cut(k, acc, Term::unit(!lit));
            }
            per_m.push(acc);
        }
        let total: Clause = (1..=d.r).map(|m| ly.pos(RefVar::I { j, m })).collect();
        let start = self.input(total);
        let lits = (1..=d.r).map(|m| ly.pos(RefVar::I { j, m })).collect();
        self.chain(start, lits, |_, l| {
            let m = match ly.decode(l.var()) {
                Some(RefVar::I { m, .. }) => m,
                _ => unreachable!(),
            };
            per_m[m - 1]
        })
    }

    /// Derives `D_{i,j}` from `prev[j'-1] = D_{i-1,j'}`.
    fn induction_step(&mut self, i: usize, j: usize, prev: &[usize]) -> usize {
        let d = self.layout.dims();
        let ly = self.layout;
        let mut per_l = Vec::with_capacity(d.n);
        for l in 1..=d.n {
            let mut per_b = [0usize; 2];
            for b in 0..=1u8 {
                // P_{1-b}: L when b = 0, R when b = 1.
                let p = |jp: usize| {
                    if b == 0 {
                        RefVar::L { i, j, jp }
                    } else {
                        RefVar::R { i, j, jp }
                    }
                };
                let mut per_jp = Vec::with_capacity(d.t);
                for jp in 1..=d.t {
                    let nontaut = self.input(Clause::new(vec![
                        ly.neg(RefVar::D {
                            i: i - 1,
                            j: jp,
                            l,
                            b: 1,
                        }),
                        ly.neg(RefVar::D {
                            i: i - 1,
                            j: jp,
                            l,
                            b: 0,
                        }),
                    ]));
                    let pivot = self.input(Clause::new(vec![
                        ly.neg(p(jp)),
                        ly.neg(RefVar::V { i, j, l }),
                        ly.pos(RefVar::D {
                            i: i - 1,
                            j: jp,
                            l,
                            b: 1 - b,
                        }),
                    ]));
                    let e = self.cut(
                        pivot,
                        nontaut,
                        Term::unit(ly.pos(RefVar::D {
                            i: i - 1,
                            j: jp,
                            l,
                            b: 1 - b,
                        })),
                    );
                    let e = self.weaken(e, [Term::unit(self.t(l, 1 - b))]);
                    let line23 = self.cut(prev[jp - 1], e, self.d_term(i - 1, jp, l, b));
                    let ax = self.weak_axiom(
                        ly.var(RefVar::T { l }),
                        ly.neg(RefVar::D {
                            i: i - 1,
                            j: jp,
                            l,
                            b: 1 - b,
                        }),
                    );
                    let mut acc = self.cut(line23, ax, self.d_term(i - 1, jp, l, 1 - b));
                    for lp in (1..=d.n).filter(|&lp| lp != l) {
                        for bp in 0..=1u8 {
                            let transfer = self.input(Clause::new(vec![
                                ly.neg(p(jp)),
                                ly.neg(RefVar::V { i, j, l }),
                                ly.neg(RefVar::D {
                                    i: i - 1,
                                    j: jp,
                                    l: lp,
                                    b: bp,
                                }),
                                ly.pos(RefVar::D { i, j, l: lp, b: bp }),
                            ]));
                            let ax = self.axiom(ly.var(RefVar::T { l: lp }));
                            let line25 = self.and_intro(
                                transfer,
                                ax,
                                ly.pos(RefVar::D { i, j, l: lp, b: bp }),
                                self.t(lp, bp),
                            );
                            acc = self.cut(acc, line25, self.d_term(i - 1, jp, lp, bp));
                        }
                    }
                    let line26 =
                        self.weaken(acc, [self.d_term(i, j, l, 0), self.d_term(i, j, l, 1)]);
                    per_jp.push(line26);
                }
                let dom: Clause = (1..=d.t).map(|jp| ly.pos(p(jp))).collect();
                let start = self.input(dom);
                let lits = (1..=d.t).map(|jp| ly.pos(p(jp))).collect();
                let mut k = 0;
                per_b[b as usize] = self.chain(start, lits, |_, _| {
                    k += 1;
                    per_jp[k - 1]
                });
            }
            // Line for b = 0 holds T(ℓ), the one for b = 1 holds ¬T(ℓ).
            per_l.push(self.cut(per_b[0], per_b[1], Term::unit(self.t(l, 1))));
        }
        let dom: Clause = (1..=d.n).map(|l| ly.pos(RefVar::V { i, j, l })).collect();
        let start = self.input(dom);
        let lits = (1..=d.n).map(|l| ly.pos(RefVar::V { i, j, l })).collect();
        let mut k = 0;
        self.chain(start, lits, |_, _| {
            k += 1;
            per_l[k - 1]
        })
    }

    fn finish(&mut self, last: usize) -> usize {
        let d = self.layout.dims();
        let ly = self.layout;
        let mut acc = last;
        for l in 1..=d.n {
            for b in 0..=1u8 {
                let unit = self.input(Clause::new(vec![ly.neg(RefVar::D {
                    i: d.s,
                    j: d.t,
                    l,
                    b,
                })]));
                let w = self.weaken(unit, [Term::unit(self.t(l, 1 - b))]);
                acc = self.cut(acc, w, self.d_term(d.s, d.t, l, b));
            }
        }
        acc
    }
}

/// Builds the refutation over a reflection layout (all blocks present).
pub fn build_reflection_refutation(
    layout: &VarLayout,
) -> Result<ReflectionRefutation, EncodeError> {
    let formula = encode_reflection(layout)?;
    let d = layout.dims();
    let mut b = Builder {
        layout,
        index: formula
            .clauses()
            .iter()
            .enumerate()
            .rev()
            .map(|(k, c)| (c.clone(), k + 1))
            .collect(),
        proof: Res2Proof::new(),
        inputs: HashMap::new(),
        axioms: HashMap::new(),
        weak_axioms: HashMap::new(),
    };
    let mut prev: Vec<usize> = (1..=d.t).map(|j| b.base_case(j)).collect();
    let base = b.proof.size();
    for i in 2..=d.s {
        prev = (1..=d.t).map(|j| b.induction_step(i, j, &prev)).collect();
    }
    let induction = b.proof.size() - base;
    let last = b.finish(prev[d.t - 1]);
    debug_assert!(b.proof.line(last).is_empty());
    let finish = b.proof.size() - base - induction;
    Ok(ReflectionRefutation {
        formula,
        proof: b.proof,
        phases: PhaseSizes {
            base,
            induction,
            finish,
        },
    })
}
