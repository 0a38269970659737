//! Mentioned and important pairs of a clause, and the width bounds a
//! restricted refutation must meet.
//!
//! Thresholds are compared exactly: `2·count ≥ n` for "at least n/2".

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cnf::Clause;
use crate::encoders::layout::{RefVar, VarLayout};
use crate::lab::groups::Pair;
use crate::resolution::ResolutionProof;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthProfile {
    pub d_mentioned: BTreeSet<Pair>,
    pub v_important: BTreeSet<Pair>,
    /// Pairs `(1, j)`.
    pub i_important: BTreeSet<Pair>,
    pub l_important: BTreeSet<Pair>,
    pub r_important: BTreeSet<Pair>,
    /// `|{j : I(j,m) ∈ E}|` at index `m - 1`.
    pub input_columns: Vec<usize>,
    /// `|{j : V(i,j,ℓ) ∈ E}|` keyed by `(i, ℓ)`, nonzero entries only.
    #[serde(with = "crate::lab::serde_pairs")]
    pub pivot_columns: BTreeMap<Pair, usize>,
}

#[derive(Default)]
struct Tally {
    negative: bool,
    positive: usize,
}

pub fn width_profile(e: &Clause, layout: &VarLayout) -> WidthProfile {
    let d = layout.dims();
    let mut wp = WidthProfile {
        input_columns: vec![0; d.r],
        ..WidthProfile::default()
    };
    let mut tallies: [BTreeMap<Pair, Tally>; 4] = Default::default();
    for lit in e.iter() {
        let Some(v) = layout.decode(lit.var()) else {
            continue;
        };
        let (k, pair) = match v {
            RefVar::D { i, j, .. } => {
                wp.d_mentioned.insert((i, j));
                continue;
            }
            RefVar::V { i, j, l } => {
                if lit.is_positive() {
                    *wp.pivot_columns.entry((i, l)).or_default() += 1;
                }
                (0, (i, j))
            }
            RefVar::I { j, m } => {
                if lit.is_positive() {
                    wp.input_columns[m - 1] += 1;
                }
                (1, (1, j))
            }
            RefVar::L { i, j, .. } => (2, (i, j)),
            RefVar::R { i, j, .. } => (3, (i, j)),
            _ => continue,
        };
        let tally = tallies[k].entry(pair).or_default();
        if lit.is_positive() {
            tally.positive += 1;
        } else {
            tally.negative = true;
        }
    }
    let thresholds = [d.n, d.r, d.t, d.t];
    let targets = [
        &mut wp.v_important,
        &mut wp.i_important,
        &mut wp.l_important,
        &mut wp.r_important,
    ];
    for ((tally, k), target) in tallies.iter().zip(thresholds).zip(targets) {
        target.extend(
            tally
                .iter()
                .filter(|(_, c)| c.negative || 2 * c.positive >= k)
                .map(|(&p, _)| p),
        );
    }
    wp
}

/// An item of the width bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthItem {
    DMentioned,
    IImportant,
    VImportant,
    LImportant,
    RImportant,
    /// Too many columns point at input clause `m`.
    InputColumn {
        m: usize,
    },
    /// Too many columns of level `i` pivot on `ℓ`.
    PivotColumn {
        i: usize,
        l: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthViolation {
    /// 1-based proof step.
    pub step: usize,
    pub item: WidthItem,
    pub count: usize,
}

/// Checks every clause of `pi` against `w` and the `t/4` column bounds; the
/// pivot-column bound applies on levels `s-n+1..s-1`.
pub fn check_widths(
    pi: &ResolutionProof,
    layout: &VarLayout,
    w: f64,
) -> Result<(), WidthViolation> {
    for (k, step) in pi.steps.iter().enumerate() {
        if let Some((item, count)) =
            first_violation(&width_profile(&step.clause, layout), layout, w)
        {
            return Err(WidthViolation {
                step: k + 1,
                item,
                count,
            });
        }
    }
    Ok(())
}

pub fn first_violation(
    wp: &WidthProfile,
    layout: &VarLayout,
    w: f64,
) -> Option<(WidthItem, usize)> {
    let d = layout.dims();
    let sets = [
        (WidthItem::DMentioned, &wp.d_mentioned),
        (WidthItem::IImportant, &wp.i_important),
        (WidthItem::VImportant, &wp.v_important),
        (WidthItem::LImportant, &wp.l_important),
        (WidthItem::RImportant, &wp.r_important),
    ];
    if let Some((item, set)) = sets.into_iter().find(|(_, set)| set.len() as f64 > w) {
        return Some((item, set.len()));
    }
    if let Some((m, &c)) = wp
        .input_columns
        .iter()
        .enumerate()
        .find(|(_, &c)| 4 * c > d.t)
    {
        return Some((WidthItem::InputColumn { m: m + 1 }, c));
    }
    let window = (d.s + 1).saturating_sub(d.n).max(2)..d.s;
    wp.pivot_columns
        .iter()
        .find(|(&(i, _), &c)| window.contains(&i) && 4 * c > d.t)
        .map(|(&(i, l), &c)| (WidthItem::PivotColumn { i, l }, c))
}
