//! Bijections between indexed variables and contiguous DIMACS ids.
//!
//! Blocks appear in the fixed order C, T(ℓ), T(m,ℓ,b), D, V, I, L, R; a
//! layout holds the subset its formula needs. Within a block, ids follow the
//! lexicographic order of the indices, with b = 0 before b = 1. All indices
//! are 1-based; level indices of V, L and R start at 2.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Literal, Var};

/// Recorded in generated files so that consumers can detect renumbering.
pub const LAYOUT_VERSION: &str = "refstate-layout-v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("parameter {name} must be at least {min}, got {value}")]
    TooSmall {
        name: &'static str,
        min: usize,
        value: usize,
    },
    #[error("layout needs {0} variables, beyond the DIMACS id range")]
    TooManyVariables(u64),
}

fn at_least(name: &'static str, value: usize, min: usize) -> Result<(), ParamError> {
    if value < min {
        Err(ParamError::TooSmall { name, min, value })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    C,
    T,
    Tm,
    D,
    V,
    I,
    L,
    R,
}

const BLOCK_ORDER: [Block; 8] = [
    Block::C,
    Block::T,
    Block::Tm,
    Block::D,
    Block::V,
    Block::I,
    Block::L,
    Block::R,
];

/// An indexed variable of the refutation statements and the satisfiability formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RefVar {
    /// Literal `x_l^b` is in the clause of cell (i, j).
    D { i: usize, j: usize, l: usize, b: u8 },
    /// Cell (i, j) resolves on `x_l`.
    V { i: usize, j: usize, l: usize },
    /// Cell (1, j) weakens input clause m.
    I { j: usize, m: usize },
    /// Cell (i-1, jp) is the premise of (i, j) with the positive pivot literal.
    L { i: usize, j: usize, jp: usize },
    /// Cell (i-1, jp) is the premise of (i, j) with the negative pivot literal.
    R { i: usize, j: usize, jp: usize },
    /// Literal `x_l^b` is in encoded clause m.
    C { m: usize, l: usize, b: u8 },
    /// The assignment makes `x_l` true.
    T { l: usize },
    /// Clause m is satisfied through literal `x_l^b`.
    Tm { m: usize, l: usize, b: u8 },
}

impl RefVar {
    pub fn block(&self) -> Block {
        match self {
            RefVar::D { .. } => Block::D,
            RefVar::V { .. } => Block::V,
            RefVar::I { .. } => Block::I,
            RefVar::L { .. } => Block::L,
            RefVar::R { .. } => Block::R,
            RefVar::C { .. } => Block::C,
            RefVar::T { .. } => Block::T,
            RefVar::Tm { .. } => Block::Tm,
        }
    }

    /// The grid cell a D, V, I, L or R variable talks about; I variables live on level 1.
    pub fn home_pair(&self) -> Option<(usize, usize)> {
        match *self {
            RefVar::D { i, j, .. }
            | RefVar::V { i, j, .. }
            | RefVar::L { i, j, .. }
            | RefVar::R { i, j, .. } => Some((i, j)),
            RefVar::I { j, .. } => Some((1, j)),
            _ => None,
        }
    }
}

impl fmt::Display for RefVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RefVar::D { i, j, l, b } => write!(f, "D({i},{j},{l},{b})"),
            RefVar::V { i, j, l } => write!(f, "V({i},{j},{l})"),
            RefVar::I { j, m } => write!(f, "I({j},{m})"),
            RefVar::L { i, j, jp } => write!(f, "L({i},{j},{jp})"),
            RefVar::R { i, j, jp } => write!(f, "R({i},{j},{jp})"),
            RefVar::C { m, l, b } => write!(f, "C({m},{l},{b})"),
            RefVar::T { l } => write!(f, "T({l})"),
            RefVar::Tm { m, l, b } => write!(f, "T({m},{l},{b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Span {
    /// First id of the block.
    base: u32,
    len: u32,
}

/// Variable layout of one of the generated formulas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarLayout {
    dims: Dims,
    spans: [Option<Span>; 8],
    num_vars: u32,
}

impl VarLayout {
    fn build(dims: Dims, blocks: &[Block]) -> Result<VarLayout, ParamError> {
        let Dims { n, r, s, t } = dims;
        let mut spans = [None; 8];
        let mut next: u64 = 1;
        for (k, block) in BLOCK_ORDER.iter().enumerate() {
            if !blocks.contains(block) {
                continue;
            }
            let len = match block {
                Block::C | Block::Tm => 2 * r * n,
                Block::T => n,
                Block::D => 2 * s * t * n,
                Block::V => (s - 1) * t * n,
                Block::I => t * r,
                Block::L | Block::R => (s - 1) * t * t,
            } as u64;
            if next + len > u32::MAX as u64 {
                return Err(ParamError::TooManyVariables(next + len - 1));
            }
            spans[k] = Some(Span {
                base: next as u32,
                len: len as u32,
            });
            next += len;
        }
        Ok(VarLayout {
            dims,
            spans,
            num_vars: (next - 1) as u32,
        })
    }

    /// Variables of the refutation statement for a fixed formula: D, V, I, L, R.
    pub fn ref_f(n: usize, r: usize, s: usize, t: usize) -> Result<VarLayout, ParamError> {
        check_ref_dims(n, r, s, t)?;
        VarLayout::build(
            Dims { n, r, s, t },
            &[Block::D, Block::V, Block::I, Block::L, Block::R],
        )
    }

    /// Variables of the satisfiability formula: C, T(ℓ), T(m,ℓ,b). Ids coincide
    /// with the prefix of [`VarLayout::reflection`].
    pub fn sat(n: usize, r: usize) -> Result<VarLayout, ParamError> {
        at_least("n", n, 1)?;
        at_least("r", r, 1)?;
        VarLayout::build(Dims { n, r, s: 0, t: 0 }, &[Block::C, Block::T, Block::Tm])
    }

    /// All blocks, for the conjunction of the satisfiability formula and the
    /// clause-variable refutation statement.
    pub fn reflection(n: usize, r: usize, s: usize, t: usize) -> Result<VarLayout, ParamError> {
        check_ref_dims(n, r, s, t)?;
        VarLayout::build(Dims { n, r, s, t }, &BLOCK_ORDER)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn has(&self, block: Block) -> bool {
        self.span(block).is_some()
    }

    fn span(&self, block: Block) -> Option<Span> {
        self.spans[BLOCK_ORDER.iter().position(|b| *b == block).unwrap()]
    }

    fn id(&self, block: Block, offset: usize) -> Var {
        let span = self
            .span(block)
            .unwrap_or_else(|| panic!("layout has no {block:?} block"));
        debug_assert!((offset as u32) < span.len);
        span.base + offset as u32
    }

    pub fn var(&self, v: RefVar) -> Var {
        let Dims { n, r, t, .. } = self.dims;
        debug_assert!(self.in_range(&v), "{v} out of range for {:?}", self.dims);
        match v {
            RefVar::D { i, j, l, b } => self.id(
                Block::D,
                (((i - 1) * t + (j - 1)) * n + (l - 1)) * 2 + b as usize,
            ),
            RefVar::V { i, j, l } => self.id(Block::V, ((i - 2) * t + (j - 1)) * n + (l - 1)),
            RefVar::I { j, m } => self.id(Block::I, (j - 1) * r + (m - 1)),
            RefVar::L { i, j, jp } => self.id(Block::L, ((i - 2) * t + (j - 1)) * t + (jp - 1)),
            RefVar::R { i, j, jp } => self.id(Block::R, ((i - 2) * t + (j - 1)) * t + (jp - 1)),
            RefVar::C { m, l, b } => self.id(Block::C, ((m - 1) * n + (l - 1)) * 2 + b as usize),
            RefVar::T { l } => self.id(Block::T, l - 1),
            RefVar::Tm { m, l, b } => self.id(Block::Tm, ((m - 1) * n + (l - 1)) * 2 + b as usize),
        }
    }

    pub fn in_range(&self, v: &RefVar) -> bool {
        let Dims { n, r, s, t } = self.dims;
        let ok = match *v {
            RefVar::D { i, j, l, b } => {
                (1..=s).contains(&i) && (1..=t).contains(&j) && (1..=n).contains(&l) && b <= 1
            }
            RefVar::V { i, j, l } => {
                (2..=s).contains(&i) && (1..=t).contains(&j) && (1..=n).contains(&l)
            }
            RefVar::I { j, m } => (1..=t).contains(&j) && (1..=r).contains(&m),
            RefVar::L { i, j, jp } | RefVar::R { i, j, jp } => {
                (2..=s).contains(&i) && (1..=t).contains(&j) && (1..=t).contains(&jp)
            }
            RefVar::C { m, l, b } | RefVar::Tm { m, l, b } => {
                (1..=r).contains(&m) && (1..=n).contains(&l) && b <= 1
            }
            RefVar::T { l } => (1..=n).contains(&l),
        };
        ok && self.has(v.block())
    }

    pub fn lit(&self, v: RefVar, positive: bool) -> Literal {
        Literal::new(self.var(v), positive)
    }

    pub fn pos(&self, v: RefVar) -> Literal {
        self.lit(v, true)
    }

    pub fn neg(&self, v: RefVar) -> Literal {
        self.lit(v, false)
    }

    /// Inverse of [`VarLayout::var`]; `None` outside the layout's range.
    pub fn decode(&self, var: Var) -> Option<RefVar> {
        let Dims { n, r, t, .. } = self.dims;
        for (k, block) in BLOCK_ORDER.iter().enumerate() {
            let Some(span) = self.spans[k] else { continue };
            if var < span.base || var >= span.base + span.len {
                continue;
            }
            let o = (var - span.base) as usize;
            return Some(match block {
                Block::D => RefVar::D {
                    b: (o % 2) as u8,
                    l: (o / 2) % n + 1,
                    j: (o / 2 / n) % t + 1,
                    i: o / 2 / n / t + 1,
                },
                Block::V => RefVar::V {
                    l: o % n + 1,
                    j: (o / n) % t + 1,
                    i: o / n / t + 2,
                },
                Block::I => RefVar::I {
                    m: o % r + 1,
                    j: o / r + 1,
                },
                Block::L => RefVar::L {
                    jp: o % t + 1,
                    j: (o / t) % t + 1,
                    i: o / t / t + 2,
                },
                Block::R => RefVar::R {
                    jp: o % t + 1,
                    j: (o / t) % t + 1,
                    i: o / t / t + 2,
                },
                Block::C => RefVar::C {
                    b: (o % 2) as u8,
                    l: (o / 2) % n + 1,
                    m: o / 2 / n + 1,
                },
                Block::T => RefVar::T { l: o + 1 },
                Block::Tm => RefVar::Tm {
                    b: (o % 2) as u8,
                    l: (o / 2) % n + 1,
                    m: o / 2 / n + 1,
                },
            });
        }
        None
    }

    /// Renumbers a variable of `self` into `other`, if `other` has it.
    pub fn translate(&self, var: Var, other: &VarLayout) -> Option<Var> {
        let v = self.decode(var)?;
        other.in_range(&v).then(|| other.var(v))
    }

    /// Human-readable `(block, first id, last id)` table for file headers.
    pub fn describe(&self) -> Vec<(Block, u32, u32)> {
        BLOCK_ORDER
            .iter()
            .zip(self.spans.iter())
            .filter_map(|(b, s)| {
                s.filter(|s| s.len > 0)
                    .map(|s| (*b, s.base, s.base + s.len - 1))
            })
            .collect()
    }
}

fn check_ref_dims(n: usize, r: usize, s: usize, t: usize) -> Result<(), ParamError> {
    at_least("n", n, 1)?;
    at_least("r", r, 1)?;
    at_least("s", s, 2)?;
    at_least("t", t, 1)
}

/// An indexed variable of the single-sequence refutation statement, whose
/// second indices of V, I, L and R include 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AmVar {
    D { u: usize, i: usize, b: u8 },
    V { u: usize, i: usize },
    I { u: usize, j: usize },
    L { u: usize, v: usize },
    R { u: usize, v: usize },
}

impl fmt::Display for AmVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AmVar::D { u, i, b } => write!(f, "D[{u},{i},{b}]"),
            AmVar::V { u, i } => write!(f, "V[{u},{i}]"),
            AmVar::I { u, j } => write!(f, "I[{u},{j}]"),
            AmVar::L { u, v } => write!(f, "L[{u},{v}]"),
            AmVar::R { u, v } => write!(f, "R[{u},{v}]"),
        }
    }
}

/// Layout for the single-sequence statement over `s_tilde` clauses: blocks D,
/// V, I, L, R in that order, each lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmLayout {
    pub n: usize,
    pub r: usize,
    pub s_tilde: usize,
    bases: [u32; 5],
    num_vars: u32,
}

impl AmLayout {
    pub fn new(n: usize, r: usize, s_tilde: usize) -> Result<AmLayout, ParamError> {
        at_least("n", n, 1)?;
        at_least("r", r, 1)?;
        at_least("s_tilde", s_tilde, 1)?;
        let st = s_tilde as u64;
        let lens = [
            st * n as u64 * 2,
            st * (n as u64 + 1),
            st * (r as u64 + 1),
            st * (st + 1),
            st * (st + 1),
        ];
        let mut bases = [0u32; 5];
        let mut next: u64 = 1;
        for (k, len) in lens.iter().enumerate() {
            if next + len > u32::MAX as u64 {
                return Err(ParamError::TooManyVariables(next + len - 1));
            }
            bases[k] = next as u32;
            next += len;
        }
        Ok(AmLayout {
            n,
            r,
            s_tilde,
            bases,
            num_vars: (next - 1) as u32,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn var(&self, v: AmVar) -> Var {
        let (n, r, st) = (self.n, self.r, self.s_tilde);
        let (k, o) = match v {
            AmVar::D { u, i, b } => (0, ((u - 1) * n + (i - 1)) * 2 + b as usize),
            AmVar::V { u, i } => (1, (u - 1) * (n + 1) + i),
            AmVar::I { u, j } => (2, (u - 1) * (r + 1) + j),
            AmVar::L { u, v } => (3, (u - 1) * (st + 1) + v),
            AmVar::R { u, v } => (4, (u - 1) * (st + 1) + v),
        };
        self.bases[k] + o as u32
    }

    pub fn pos(&self, v: AmVar) -> Literal {
        Literal::pos(self.var(v))
    }

    pub fn neg(&self, v: AmVar) -> Literal {
        Literal::neg(self.var(v))
    }

    pub fn decode(&self, var: Var) -> Option<AmVar> {
        if var == 0 || var > self.num_vars {
            return None;
        }
        let (n, r, st) = (self.n, self.r, self.s_tilde);
        let k = self.bases.iter().rposition(|&b| b <= var)?;
        let o = (var - self.bases[k]) as usize;
        Some(match k {
            0 => AmVar::D {
                b: (o % 2) as u8,
                i: (o / 2) % n + 1,
                u: o / 2 / n + 1,
            },
            1 => AmVar::V {
                i: o % (n + 1),
                u: o / (n + 1) + 1,
            },
            2 => AmVar::I {
                j: o % (r + 1),
                u: o / (r + 1) + 1,
            },
            3 => AmVar::L {
                v: o % (st + 1),
                u: o / (st + 1) + 1,
            },
            _ => AmVar::R {
                v: o % (st + 1),
                u: o / (st + 1) + 1,
            },
        })
    }
}
