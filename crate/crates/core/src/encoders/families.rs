//! Streaming generators for the refutation statements, the satisfiability
//! formula and the single-sequence statement.
//!
//! Functional families (at most one value) are emitted once per unordered
//! pair of values, so no clause is emitted twice.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, ClauseSink, Cnf, FamilyCounts, Literal};
use crate::encoders::layout::{AmLayout, AmVar, Block, Dims, RefVar, VarLayout, LAYOUT_VERSION};

pub mod label {
    pub const INPUT_WEAKENING: &str = "input-weakening";
    pub const NON_TAUTOLOGICAL: &str = "non-tautological";
    pub const LEFT_PIVOT: &str = "left-premise-pivot";
    pub const RIGHT_PIVOT: &str = "right-premise-pivot";
    pub const LEFT_TRANSFER: &str = "left-premise-transfer";
    pub const RIGHT_TRANSFER: &str = "right-premise-transfer";
    pub const LAST_EMPTY: &str = "last-cell-empty";
    pub const PIVOT_TOTAL: &str = "pivot-total";
    pub const INPUT_TOTAL: &str = "input-total";
    pub const LEFT_TOTAL: &str = "left-total";
    pub const RIGHT_TOTAL: &str = "right-total";
    pub const PIVOT_FUNCTIONAL: &str = "pivot-functional";
    pub const INPUT_FUNCTIONAL: &str = "input-functional";
    pub const LEFT_FUNCTIONAL: &str = "left-functional";
    pub const RIGHT_FUNCTIONAL: &str = "right-functional";

    pub const SAT_SOME_LITERAL: &str = "sat-some-literal";
    pub const SAT_POSITIVE: &str = "sat-positive";
    pub const SAT_NEGATIVE: &str = "sat-negative";
    pub const SAT_LITERAL_IN_CLAUSE: &str = "sat-literal-in-clause";
    pub const ENCODED_INPUT_WEAKENING: &str = "encoded-input-weakening";

    pub const AM_PIVOT_TOTAL: &str = "am-pivot-total";
    pub const AM_INPUT_TOTAL: &str = "am-input-total";
    pub const AM_LEFT_TOTAL: &str = "am-left-total";
    pub const AM_RIGHT_TOTAL: &str = "am-right-total";
    pub const AM_PIVOT_FUNCTIONAL: &str = "am-pivot-functional";
    pub const AM_INPUT_FUNCTIONAL: &str = "am-input-functional";
    pub const AM_LEFT_FUNCTIONAL: &str = "am-left-functional";
    pub const AM_RIGHT_FUNCTIONAL: &str = "am-right-functional";
    pub const AM_SWITCH_EXCLUSIVE: &str = "am-switch-exclusive";
    pub const AM_SWITCH_TOTAL: &str = "am-switch-total";
    pub const AM_INPUT_NO_LEFT: &str = "am-input-no-left";
    pub const AM_INPUT_NO_RIGHT: &str = "am-input-no-right";
    pub const AM_LEFT_BACKWARD: &str = "am-left-backward";
    pub const AM_RIGHT_BACKWARD: &str = "am-right-backward";
    pub const AM_LEFT_PIVOT: &str = "am-left-premise-pivot";
    pub const AM_RIGHT_PIVOT: &str = "am-right-premise-pivot";
    pub const AM_LEFT_TRANSFER: &str = "am-left-premise-transfer";
    pub const AM_RIGHT_TRANSFER: &str = "am-right-premise-transfer";
    pub const AM_INPUT_WEAKENING: &str = "am-input-weakening";
    pub const AM_NON_TAUTOLOGICAL: &str = "am-non-tautological";
    pub const AM_LAST_EMPTY: &str = "am-last-empty";
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("formula has {actual} {what} but the layout expects {expected}")]
    LayoutMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("layout lacks the {0:?} block")]
    MissingBlock(Block),
}

/// Which premise of a resolution step: the one with the positive pivot literal
/// (left) or the negative one (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Polarity of the pivot literal the premise on this side must contain.
    pub fn pivot_polarity(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 0,
        }
    }

    /// The side whose premise contains the pivot with polarity `b`.
    pub fn with_polarity(b: u8) -> Side {
        if b == 1 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn var(self, i: usize, j: usize, jp: usize) -> RefVar {
        match self {
            Side::Left => RefVar::L { i, j, jp },
            Side::Right => RefVar::R { i, j, jp },
        }
    }
}

fn require(layout: &VarLayout, blocks: &[Block]) -> Result<(), EncodeError> {
    match blocks.iter().find(|b| !layout.has(**b)) {
        Some(b) => Err(EncodeError::MissingBlock(*b)),
        None => Ok(()),
    }
}

fn check_formula(f: &Cnf, dims: Dims) -> Result<(), EncodeError> {
    if f.num_vars() as usize != dims.n {
        return Err(EncodeError::LayoutMismatch {
            what: "variables",
            expected: dims.n,
            actual: f.num_vars() as usize,
        });
    }
    if f.len() != dims.r {
        return Err(EncodeError::LayoutMismatch {
            what: "clauses",
            expected: dims.r,
            actual: f.len(),
        });
    }
    Ok(())
}

fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=k).flat_map(move |a| (a + 1..=k).map(move |b| (a, b)))
}

/// `¬I(j,m) ∨ D(1,j,ℓ,b)` for each literal `x_ℓ^b` of `C_m`, all m.
pub fn input_weakening_clauses(layout: &VarLayout, f: &Cnf, j: usize) -> Vec<Clause> {
    let mut out = Vec::new();
    for (k, cm) in f.clauses().iter().enumerate() {
        for lit in cm.iter() {
            let l = lit.var() as usize;
            out.push(Clause::new(vec![
                layout.neg(RefVar::I { j, m: k + 1 }),
                layout.pos(RefVar::D {
                    i: 1,
                    j,
                    l,
                    b: lit.polarity(),
                }),
            ]));
        }
    }
    out
}

/// `¬P(i,j,j') ∨ ¬V(i,j,ℓ) ∨ D(i-1,j',ℓ,b)` where the side fixes b.
pub fn pivot_clause(
    layout: &VarLayout,
    side: Side,
    i: usize,
    j: usize,
    jp: usize,
    l: usize,
) -> Clause {
    Clause::new(vec![
        layout.neg(side.var(i, j, jp)),
        layout.neg(RefVar::V { i, j, l }),
        layout.pos(RefVar::D {
            i: i - 1,
            j: jp,
            l,
            b: side.pivot_polarity(),
        }),
    ])
}

/// `¬P(i,j,j') ∨ ¬V(i,j,ℓ) ∨ ¬D(i-1,j',ℓ',b) ∨ D(i,j,ℓ',b)` for all
/// `(ℓ',b)` other than the pivot literal of this side.
pub fn transfer_clause(
    layout: &VarLayout,
    side: Side,
    (i, j, jp): (usize, usize, usize),
    l: usize,
    lp: usize,
    b: u8,
) -> Clause {
    Clause::new(vec![
        layout.neg(side.var(i, j, jp)),
        layout.neg(RefVar::V { i, j, l }),
        layout.neg(RefVar::D {
            i: i - 1,
            j: jp,
            l: lp,
            b,
        }),
        layout.pos(RefVar::D { i, j, l: lp, b }),
    ])
}

pub fn transfer_clauses(
    layout: &VarLayout,
    side: Side,
    i: usize,
    j: usize,
    jp: usize,
) -> Vec<Clause> {
    let n = layout.dims().n;
    let mut out = Vec::new();
    for l in 1..=n {
        for lp in 1..=n {
            for b in 0..=1u8 {
                if (lp, b) != (l, side.pivot_polarity()) {
                    out.push(transfer_clause(layout, side, (i, j, jp), l, lp, b));
                }
            }
        }
    }
    out
}

/// Families shared by the fixed-formula and clause-variable statements, in order
/// from non-tautological through right-functional.
fn emit_ref_common(layout: &VarLayout, sink: &mut impl ClauseSink) {
    let Dims { n, r, s, t } = layout.dims();

    sink.begin_family(label::NON_TAUTOLOGICAL);
    for i in 1..=s {
        for j in 1..=t {
            for l in 1..=n {
                sink.push(Clause::new(vec![
                    layout.neg(RefVar::D { i, j, l, b: 1 }),
                    layout.neg(RefVar::D { i, j, l, b: 0 }),
                ]));
            }
        }
    }

    for (side, name) in [
        (Side::Left, label::LEFT_PIVOT),
        (Side::Right, label::RIGHT_PIVOT),
    ] {
        sink.begin_family(name);
        for i in 2..=s {
            for j in 1..=t {
                for jp in 1..=t {
                    for l in 1..=n {
                        sink.push(pivot_clause(layout, side, i, j, jp, l));
                    }
                }
            }
        }
    }

    for (side, name) in [
        (Side::Left, label::LEFT_TRANSFER),
        (Side::Right, label::RIGHT_TRANSFER),
    ] {
        sink.begin_family(name);
        for i in 2..=s {
            for j in 1..=t {
                for jp in 1..=t {
                    for c in transfer_clauses(layout, side, i, j, jp) {
                        sink.push(c);
                    }
                }
            }
        }
    }

    sink.begin_family(label::LAST_EMPTY);
    for l in 1..=n {
        for b in 0..=1u8 {
            sink.push(Clause::new(vec![layout.neg(RefVar::D {
                i: s,
                j: t,
                l,
                b,
            })]));
        }
    }

    sink.begin_family(label::PIVOT_TOTAL);
    for i in 2..=s {
        for j in 1..=t {
            sink.push((1..=n).map(|l| layout.pos(RefVar::V { i, j, l })).collect());
        }
    }
    sink.begin_family(label::INPUT_TOTAL);
    for j in 1..=t {
        sink.push((1..=r).map(|m| layout.pos(RefVar::I { j, m })).collect());
    }
    for (side, name) in [
        (Side::Left, label::LEFT_TOTAL),
        (Side::Right, label::RIGHT_TOTAL),
    ] {
        sink.begin_family(name);
        for i in 2..=s {
            for j in 1..=t {
                sink.push((1..=t).map(|jp| layout.pos(side.var(i, j, jp))).collect());
            }
        }
    }

    sink.begin_family(label::PIVOT_FUNCTIONAL);
    for i in 2..=s {
        for j in 1..=t {
            for (a, b) in pairs(n) {
                sink.push(Clause::new(vec![
                    layout.neg(RefVar::V { i, j, l: a }),
                    layout.neg(RefVar::V { i, j, l: b }),
                ]));
            }
        }
    }
    sink.begin_family(label::INPUT_FUNCTIONAL);
    for j in 1..=t {
        for (a, b) in pairs(r) {
            sink.push(Clause::new(vec![
                layout.neg(RefVar::I { j, m: a }),
                layout.neg(RefVar::I { j, m: b }),
            ]));
        }
    }
    for (side, name) in [
        (Side::Left, label::LEFT_FUNCTIONAL),
        (Side::Right, label::RIGHT_FUNCTIONAL),
    ] {
        sink.begin_family(name);
        for i in 2..=s {
            for j in 1..=t {
                for (a, b) in pairs(t) {
                    sink.push(Clause::new(vec![
                        layout.neg(side.var(i, j, a)),
                        layout.neg(side.var(i, j, b)),
                    ]));
                }
            }
        }
    }
}

const REF_BLOCKS: [Block; 5] = [Block::D, Block::V, Block::I, Block::L, Block::R];

/// Streams the refutation statement for the fixed formula `f`. Works on any
/// layout that has the D, V, I, L and R blocks.
pub fn emit_ref_f(
    f: &Cnf,
    layout: &VarLayout,
    sink: &mut impl ClauseSink,
) -> Result<(), EncodeError> {
    require(layout, &REF_BLOCKS)?;
    check_formula(f, layout.dims())?;
    sink.begin_family(label::INPUT_WEAKENING);
    for j in 1..=layout.dims().t {
        for c in input_weakening_clauses(layout, f, j) {
            sink.push(c);
        }
    }
    emit_ref_common(layout, sink);
    Ok(())
}

pub fn encode_ref_f(f: &Cnf, layout: &VarLayout) -> Result<Cnf, EncodeError> {
    let mut clauses = Vec::new();
    emit_ref_f(f, layout, &mut clauses)?;
    Ok(Cnf::new(layout.num_vars(), clauses).expect("generated ids lie in the layout"))
}

/// Streams the satisfiability formula over C and T variables.
pub fn emit_sat(layout: &VarLayout, sink: &mut impl ClauseSink) -> Result<(), EncodeError> {
    require(layout, &[Block::C, Block::T, Block::Tm])?;
    let Dims { n, r, .. } = layout.dims();

    sink.begin_family(label::SAT_SOME_LITERAL);
    for m in 1..=r {
        sink.push(
            (1..=n)
                .flat_map(|l| [1u8, 0].map(|b| layout.pos(RefVar::Tm { m, l, b })))
                .collect(),
        );
    }
    sink.begin_family(label::SAT_POSITIVE);
    for m in 1..=r {
        for l in 1..=n {
            sink.push(Clause::new(vec![
                layout.neg(RefVar::Tm { m, l, b: 1 }),
                layout.pos(RefVar::T { l }),
            ]));
        }
    }
    sink.begin_family(label::SAT_NEGATIVE);
    for m in 1..=r {
        for l in 1..=n {
            sink.push(Clause::new(vec![
                layout.neg(RefVar::Tm { m, l, b: 0 }),
                layout.neg(RefVar::T { l }),
            ]));
        }
    }
    sink.begin_family(label::SAT_LITERAL_IN_CLAUSE);
    for m in 1..=r {
        for l in 1..=n {
            for b in 0..=1u8 {
                sink.push(Clause::new(vec![
                    layout.neg(RefVar::Tm { m, l, b }),
                    layout.pos(RefVar::C { m, l, b }),
                ]));
            }
        }
    }
    Ok(())
}

pub fn encode_sat(layout: &VarLayout) -> Result<Cnf, EncodeError> {
    let mut clauses = Vec::new();
    emit_sat(layout, &mut clauses)?;
    Ok(Cnf::new(layout.num_vars(), clauses).expect("generated ids lie in the layout"))
}

/// Streams the refutation statement whose input clauses are described by C
/// variables.
pub fn emit_ref_nr(layout: &VarLayout, sink: &mut impl ClauseSink) -> Result<(), EncodeError> {
    require(
        layout,
        &[Block::C, Block::D, Block::V, Block::I, Block::L, Block::R],
    )?;
    let Dims { n, r, t, .. } = layout.dims();
    sink.begin_family(label::ENCODED_INPUT_WEAKENING);
    for j in 1..=t {
        for m in 1..=r {
            for l in 1..=n {
                for b in 0..=1u8 {
                    sink.push(Clause::new(vec![
                        layout.neg(RefVar::I { j, m }),
                        layout.neg(RefVar::C { m, l, b }),
                        layout.pos(RefVar::D { i: 1, j, l, b }),
                    ]));
                }
            }
        }
    }
    emit_ref_common(layout, sink);
    Ok(())
}

pub fn encode_ref_nr(layout: &VarLayout) -> Result<Cnf, EncodeError> {
    let mut clauses = Vec::new();
    emit_ref_nr(layout, &mut clauses)?;
    Ok(Cnf::new(layout.num_vars(), clauses).expect("generated ids lie in the layout"))
}

/// The satisfiability formula followed by the clause-variable refutation statement.
pub fn emit_reflection(layout: &VarLayout, sink: &mut impl ClauseSink) -> Result<(), EncodeError> {
    emit_sat(layout, sink)?;
    emit_ref_nr(layout, sink)
}

pub fn encode_reflection(layout: &VarLayout) -> Result<Cnf, EncodeError> {
    let mut clauses = Vec::new();
    emit_reflection(layout, &mut clauses)?;
    Ok(Cnf::new(layout.num_vars(), clauses).expect("generated ids lie in the layout"))
}

/// Streams the single-sequence statement for `f` over `layout.s_tilde` clauses.
pub fn emit_ref_am(
    f: &Cnf,
    layout: &AmLayout,
    sink: &mut impl ClauseSink,
) -> Result<(), EncodeError> {
    check_formula(
        f,
        Dims {
            n: layout.n,
            r: layout.r,
            s: 0,
            t: 0,
        },
    )?;
    let (n, r, st) = (layout.n, layout.r, layout.s_tilde);
    let p = |v: AmVar| layout.pos(v);
    let q = |v: AmVar| layout.neg(v);
    let both = |a: Literal, b: Literal| Clause::new(vec![a, b]);

    sink.begin_family(label::AM_PIVOT_TOTAL);
    for u in 1..=st {
        sink.push((0..=n).map(|i| p(AmVar::V { u, i })).collect());
    }
    sink.begin_family(label::AM_INPUT_TOTAL);
    for u in 1..=st {
        sink.push((0..=r).map(|j| p(AmVar::I { u, j })).collect());
    }
    sink.begin_family(label::AM_LEFT_TOTAL);
    for u in 1..=st {
        sink.push((0..=st).map(|v| p(AmVar::L { u, v })).collect());
    }
    sink.begin_family(label::AM_RIGHT_TOTAL);
    for u in 1..=st {
        sink.push((0..=st).map(|v| p(AmVar::R { u, v })).collect());
    }

    let zero_pairs = |k: usize| (0..=k).flat_map(move |a| (a + 1..=k).map(move |b| (a, b)));
    sink.begin_family(label::AM_PIVOT_FUNCTIONAL);
    for u in 1..=st {
        for (a, b) in zero_pairs(n) {
            sink.push(both(q(AmVar::V { u, i: a }), q(AmVar::V { u, i: b })));
        }
    }
    sink.begin_family(label::AM_INPUT_FUNCTIONAL);
    for u in 1..=st {
        for (a, b) in zero_pairs(r) {
            sink.push(both(q(AmVar::I { u, j: a }), q(AmVar::I { u, j: b })));
        }
    }
    sink.begin_family(label::AM_LEFT_FUNCTIONAL);
    for u in 1..=st {
        for (a, b) in zero_pairs(st) {
            sink.push(both(q(AmVar::L { u, v: a }), q(AmVar::L { u, v: b })));
        }
    }
    sink.begin_family(label::AM_RIGHT_FUNCTIONAL);
    for u in 1..=st {
        for (a, b) in zero_pairs(st) {
            sink.push(both(q(AmVar::R { u, v: a }), q(AmVar::R { u, v: b })));
        }
    }

    sink.begin_family(label::AM_SWITCH_EXCLUSIVE);
    for u in 1..=st {
        sink.push(both(q(AmVar::I { u, j: 0 }), q(AmVar::V { u, i: 0 })));
    }
    sink.begin_family(label::AM_SWITCH_TOTAL);
    for u in 1..=st {
        sink.push(both(p(AmVar::I { u, j: 0 }), p(AmVar::V { u, i: 0 })));
    }
    sink.begin_family(label::AM_INPUT_NO_LEFT);
    for u in 1..=st {
        sink.push(both(q(AmVar::I { u, j: 0 }), q(AmVar::L { u, v: 0 })));
    }
    sink.begin_family(label::AM_INPUT_NO_RIGHT);
    for u in 1..=st {
        sink.push(both(q(AmVar::I { u, j: 0 }), q(AmVar::R { u, v: 0 })));
    }
    sink.begin_family(label::AM_LEFT_BACKWARD);
    for u in 1..=st {
        for v in u..=st {
            sink.push(Clause::new(vec![q(AmVar::L { u, v })]));
        }
    }
    sink.begin_family(label::AM_RIGHT_BACKWARD);
    for u in 1..=st {
        for v in u..=st {
            sink.push(Clause::new(vec![q(AmVar::R { u, v })]));
        }
    }

    // The listed quantifier over b is vacuous for these two families; each
    // clause is emitted once.
    for (name, premise, b) in [
        (label::AM_LEFT_PIVOT, Side::Left, 1u8),
        (label::AM_RIGHT_PIVOT, Side::Right, 0u8),
    ] {
        sink.begin_family(name);
        for u in 1..=st {
            for v in 1..=st {
                for i in 1..=n {
                    let link = match premise {
                        Side::Left => AmVar::L { u, v },
                        Side::Right => AmVar::R { u, v },
                    };
                    sink.push(Clause::new(vec![
                        q(link),
                        q(AmVar::V { u, i }),
                        p(AmVar::D { u: v, i, b }),
                    ]));
                }
            }
        }
    }
    for (name, premise) in [
        (label::AM_LEFT_TRANSFER, Side::Left),
        (label::AM_RIGHT_TRANSFER, Side::Right),
    ] {
        sink.begin_family(name);
        for u in 1..=st {
            for v in 1..=st {
                let link = match premise {
                    Side::Left => AmVar::L { u, v },
                    Side::Right => AmVar::R { u, v },
                };
                for i in 1..=n {
                    for ip in (1..=n).filter(|&ip| ip != i) {
                        for b in 0..=1u8 {
                            sink.push(Clause::new(vec![
                                q(link),
                                q(AmVar::V { u, i }),
                                q(AmVar::D { u: v, i: ip, b }),
                                p(AmVar::D { u, i: ip, b }),
                            ]));
                        }
                    }
                }
            }
        }
    }

    sink.begin_family(label::AM_INPUT_WEAKENING);
    for u in 1..=st {
        for (k, cj) in f.clauses().iter().enumerate() {
            for lit in cj.iter() {
                sink.push(both(
                    q(AmVar::I { u, j: k + 1 }),
                    p(AmVar::D {
                        u,
                        i: lit.var() as usize,
                        b: lit.polarity(),
                    }),
                ));
            }
        }
    }
    sink.begin_family(label::AM_NON_TAUTOLOGICAL);
    for u in 1..=st {
        for i in 1..=n {
            sink.push(both(q(AmVar::D { u, i, b: 0 }), q(AmVar::D { u, i, b: 1 })));
        }
    }
    sink.begin_family(label::AM_LAST_EMPTY);
    for i in 1..=n {
        for b in 0..=1u8 {
            sink.push(Clause::new(vec![q(AmVar::D { u: st, i, b })]));
        }
    }
    Ok(())
}

pub fn encode_ref_am(f: &Cnf, layout: &AmLayout) -> Result<Cnf, EncodeError> {
    let mut clauses = Vec::new();
    emit_ref_am(f, layout, &mut clauses)?;
    Ok(Cnf::new(layout.num_vars(), clauses).expect("generated ids lie in the layout"))
}

/// Comment lines for a generated file: parameters, layout version and the
/// per-family clause manifest.
pub fn manifest_comments(
    kind: &str,
    params: &str,
    layout: &[(Block, u32, u32)],
    counts: &FamilyCounts,
) -> Vec<String> {
    let mut out = vec![
        format!("refstate {kind} {params}"),
        format!("layout {LAYOUT_VERSION}"),
    ];
    for (block, first, last) in layout {
        out.push(format!("block {block:?} {first}..{last}"));
    }
    for (name, count) in &counts.families {
        out.push(format!("family {name} {count}"));
    }
    out.push(format!("total {}", counts.total()));
    out
}
