//! Sampling of random restrictions.
//!
//! Coins are drawn from `ChaCha8Rng::seed_from_u64(seed)` on stream `trial`,
//! in this order:
//!
//! 1. cells `(i,j)` row-major over `[s]×[t]`: one `p`-coin for `A_D`, then for
//!    members one fair coin per `ℓ = 1..n` (heads = positive literal);
//! 2. columns `j = 1..t`: one `p`-coin for `A_I`, then for members outside
//!    `A_D` one uniform draw of `m ∈ [r]`;
//! 3. cells of levels `2..s` row-major: one `p`-coin for `A_V`, then for
//!    members one uniform draw of `ℓ ∈ [n]`;
//! 4. per level `i = 2..s`, columns `j = 1..t`: one `p`-coin for `A_RL`; while
//!    the level is not guarded, members draw `L` then `R` uniformly from the
//!    unused columns (index into the ascending list of free columns).
//!
//! A level is guarded, with `h_i = ∅`, once `|A_i| > 2pt` or once fewer than
//! two columns remain free.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, Literal, PartialAssignment, Var};
use crate::encoders::families::Side;
use crate::encoders::layout::{Dims, VarLayout};
use crate::lab::groups::{set_d, set_index, Group, Pair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabParamError {
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("p must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("w must be positive and finite, got {0}")]
    Width(f64),
}

/// How `p` and `w` depend on `s` and `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `p = t^{-a}`, `a = min{(2+ε/2)/(3+ε/2), 3/4}`, `w = t^{4/5}`.
    #[default]
    Standard,
    /// For `s = n+1`: `p = s^{-1/3} t^{-a'}`, `a' = min{(1+ε)/(3+ε), 1/2}`,
    /// `w = s^{1/3} t^{3/5}`.
    Shallow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoParams {
    pub epsilon: f64,
    pub variant: Variant,
    /// Overrides the derived `p`.
    pub p: Option<f64>,
    /// Overrides the derived `w`.
    pub w: Option<f64>,
    pub seed: u64,
}

impl RhoParams {
    pub fn new(epsilon: f64, seed: u64) -> RhoParams {
        RhoParams {
            epsilon,
            variant: Variant::Standard,
            p: None,
            w: None,
            seed,
        }
    }

    pub fn with_variant(self, variant: Variant) -> RhoParams {
        RhoParams { variant, ..self }
    }

    pub fn with_p(self, p: f64) -> RhoParams {
        RhoParams { p: Some(p), ..self }
    }

    pub fn with_w(self, w: f64) -> RhoParams {
        RhoParams { w: Some(w), ..self }
    }

    /// The probability exponent of the variant.
    pub fn exponent(&self) -> f64 {
        let e = self.epsilon;
        match self.variant {
            Variant::Standard => ((2.0 + e / 2.0) / (3.0 + e / 2.0)).min(0.75),
            Variant::Shallow => ((1.0 + e) / (3.0 + e)).min(0.5),
        }
    }

    /// `(p, w)` at the given grid size, validated.
    pub fn resolve(&self, s: usize, t: usize) -> Result<(f64, f64), LabParamError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(LabParamError::Epsilon(self.epsilon));
        }
        let (s, t) = (s as f64, t as f64);
        let a = self.exponent();
        let (p, w) = match self.variant {
            Variant::Standard => (t.powf(-a), t.powf(0.8)),
            Variant::Shallow => (s.powf(-1.0 / 3.0) * t.powf(-a), s.cbrt() * t.powf(0.6)),
        };
        let p = self.p.unwrap_or(p);
        let w = self.w.unwrap_or(w);
        if !(0.0..=1.0).contains(&p) {
            return Err(LabParamError::Probability(p));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(LabParamError::Width(w));
        }
        Ok((p, w))
    }
}

/// Premise wiring of one level: `L(i,j,·)` and `R(i,j,·)` mapped to columns
/// of level `i-1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelInjection {
    pub left: BTreeMap<usize, usize>,
    pub right: BTreeMap<usize, usize>,
}

impl LevelInjection {
    pub fn get(&self, side: Side, j: usize) -> Option<usize> {
        match side {
            Side::Left => self.left.get(&j).copied(),
            Side::Right => self.right.get(&j).copied(),
        }
    }

    pub fn image(&self) -> BTreeSet<usize> {
        self.left
            .values()
            .chain(self.right.values())
            .copied()
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.left.len() + self.right.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomRestriction {
    pub dims: Dims,
    pub p: f64,
    pub w: f64,
    pub seed: u64,
    pub trial: u64,
    pub a_d: BTreeSet<Pair>,
    /// Pairs `(1, j)`.
    pub a_i: BTreeSet<Pair>,
    pub a_v: BTreeSet<Pair>,
    pub a_rl: BTreeSet<Pair>,
    /// `h_i` by level `i ∈ 2..=s`; empty on guarded levels.
    pub h: BTreeMap<usize, LevelInjection>,
    /// Levels where the guard emptied `h_i`.
    pub guarded: BTreeSet<usize>,
    /// Clause chosen for each cell of `A_D`.
    #[serde(with = "crate::lab::serde_pairs")]
    pub cell_clauses: BTreeMap<Pair, Clause>,
    /// Input index chosen for each column of `A_I \ A_D`.
    pub inputs: BTreeMap<usize, usize>,
    /// Pivot chosen for each cell of `A_V`.
    #[serde(with = "crate::lab::serde_pairs")]
    pub pivots: BTreeMap<Pair, usize>,
    pub rho: PartialAssignment,
}

impl RandomRestriction {
    /// The restriction with every set empty.
    pub fn empty(dims: Dims, p: f64, w: f64) -> RandomRestriction {
        RandomRestriction {
            dims,
            p,
            w,
            seed: 0,
            trial: 0,
            a_d: BTreeSet::new(),
            a_i: BTreeSet::new(),
            a_v: BTreeSet::new(),
            a_rl: BTreeSet::new(),
            h: BTreeMap::new(),
            guarded: BTreeSet::new(),
            cell_clauses: BTreeMap::new(),
            inputs: BTreeMap::new(),
            pivots: BTreeMap::new(),
            rho: PartialAssignment::new(),
        }
    }

    /// `2pt`, the per-level size cap.
    pub fn cap(&self) -> f64 {
        2.0 * self.p * self.dims.t as f64
    }

    /// `A_i = A_RL ∩ ({i} × [t])`.
    pub fn a_level(&self, i: usize) -> BTreeSet<Pair> {
        self.a_rl.iter().filter(|p| p.0 == i).copied().collect()
    }

    /// `B_i = {(i, j) : j ∈ im(h_{i+1})}`.
    pub fn b(&self, i: usize) -> BTreeSet<Pair> {
        self.h
            .get(&(i + 1))
            .map(|h| h.image().into_iter().map(|j| (i, j)).collect())
            .unwrap_or_default()
    }

    /// The column `h_i` sends `side(i,j,·)` to.
    pub fn child(&self, side: Side, (i, j): Pair) -> Option<usize> {
        self.h.get(&i).and_then(|h| h.get(side, j))
    }

    /// Recomputes `rho` from the sets and choices.
    pub fn rebuild_rho(&mut self, layout: &VarLayout) {
        let mut rho = PartialAssignment::new();
        for (&pair, c) in &self.cell_clauses {
            set_d(&mut rho, layout, pair, c);
        }
        for (&j, &m) in &self.inputs {
            set_index(&mut rho, layout, Group::I(j), m);
        }
        for (&pair, &l) in &self.pivots {
            set_index(&mut rho, layout, Group::V(pair), l);
        }
        for (&i, h) in &self.h {
            for (&j, &jp) in &h.left {
                set_index(&mut rho, layout, Group::L((i, j)), jp);
            }
            for (&j, &jp) in &h.right {
                set_index(&mut rho, layout, Group::R((i, j)), jp);
            }
        }
        self.rho = rho;
    }
}

/// Draws trial `trial` of the restriction distribution for the grid of `layout`.
pub fn sample_rho(
    params: &RhoParams,
    layout: &VarLayout,
    trial: u64,
) -> Result<RandomRestriction, LabParamError> {
    let dims = layout.dims();
    let Dims { n, r, s, t } = dims;
    let (p, w) = params.resolve(s, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(trial);
    let mut rr = RandomRestriction::empty(dims, p, w);
    rr.seed = params.seed;
    rr.trial = trial;

    for i in 1..=s {
        for j in 1..=t {
            if rng.random_bool(p) {
                rr.a_d.insert((i, j));
                let lits = (1..=n)
                    .map(|l| Literal::new(l as Var, rng.random_bool(0.5)))
                    .collect();
                rr.cell_clauses.insert((i, j), Clause::new(lits));
            }
        }
    }
    for j in 1..=t {
        if rng.random_bool(p) {
            rr.a_i.insert((1, j));
            if !rr.a_d.contains(&(1, j)) {
                rr.inputs.insert(j, rng.random_range(1..=r));
            }
        }
    }
    for i in 2..=s {
        for j in 1..=t {
            if rng.random_bool(p) {
                rr.a_v.insert((i, j));
                rr.pivots.insert((i, j), rng.random_range(1..=n));
            }
        }
    }
    let cap = rr.cap();
    for i in 2..=s {
        let mut h = LevelInjection::default();
        let mut free: Vec<usize> = (1..=t).collect();
        let mut count = 0usize;
        let mut guarded = false;
        for j in 1..=t {
            if !rng.random_bool(p) {
                continue;
            }
            rr.a_rl.insert((i, j));
            count += 1;
            if count as f64 > cap || free.len() < 2 {
                guarded = true;
            }
            if guarded {
                continue;
            }
            let jl = free.remove(rng.random_range(0..free.len()));
            let jr = free.remove(rng.random_range(0..free.len()));
            h.left.insert(j, jl);
            h.right.insert(j, jr);
        }
        if guarded {
            rr.guarded.insert(i);
            h = LevelInjection::default();
        }
        rr.h.insert(i, h);
    }
    rr.rebuild_rho(layout);
    Ok(rr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::groups::{d_value, index_value};

    fn layout(n: usize, r: usize, s: usize, t: usize) -> VarLayout {
        VarLayout::ref_f(n, r, s, t).unwrap()
    }

    #[test]
    fn zero_probability_gives_the_empty_restriction() {
        let lay = layout(2, 2, 3, 10);
        let rr = sample_rho(&RhoParams::new(1.0, 7).with_p(0.0), &lay, 0).unwrap();
        assert!(rr.rho.is_empty());
        assert!(rr.a_d.is_empty() && rr.a_i.is_empty() && rr.a_v.is_empty() && rr.a_rl.is_empty());
        assert!(rr.guarded.is_empty());
    }

    #[test]
    fn no_room_for_two_children_guards_the_level() {
        let lay = layout(1, 2, 2, 1);
        let rr = sample_rho(&RhoParams::new(1.0, 1).with_p(1.0), &lay, 0).unwrap();
        assert_eq!(rr.a_level(2), BTreeSet::from([(2, 1)]));
        assert!(rr.guarded.contains(&2));
        assert!(rr.h[&2].is_empty());
        assert!(rr.b(1).is_empty());
    }

    #[test]
    fn fixed_seed_is_reproducible_and_streams_differ() {
        let lay = layout(2, 2, 3, 20);
        let params = RhoParams::new(1.0, 42);
        let a = sample_rho(&params, &lay, 3).unwrap();
        let b = sample_rho(&params, &lay, 3).unwrap();
        assert_eq!(a, b);
        let others: Vec<_> = (0..8)
            .map(|k| sample_rho(&params, &lay, k).unwrap())
            .collect();
        assert!(others.iter().any(|o| o.rho != a.rho));
    }

    #[test]
    fn sampled_choices_are_set_in_rho() {
        let lay = layout(3, 2, 4, 16);
        let params = RhoParams::new(1.0, 9).with_p(0.2);
        for trial in 0..20 {
            let rr = sample_rho(&params, &lay, trial).unwrap();
            for (&pair, c) in &rr.cell_clauses {
                assert_eq!(c.len(), 3);
                assert_eq!(d_value(&rr.rho, &lay, pair).as_ref(), Some(c));
            }
            for (&pair, &l) in &rr.pivots {
                assert_eq!(index_value(&rr.rho, &lay, Group::V(pair)), Some(l));
            }
            for (&i, h) in &rr.h {
                assert!(h.is_injective());
                for (&j, &jp) in &h.left {
                    assert_eq!(index_value(&rr.rho, &lay, Group::L((i, j))), Some(jp));
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let lay = layout(2, 2, 3, 12);
        let rr = sample_rho(&RhoParams::new(1.0, 5).with_p(0.3), &lay, 1).unwrap();
        let text = serde_json::to_string(&rr).unwrap();
        let back: RandomRestriction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rr);
    }

    #[test]
    fn derived_parameters() {
        let params = RhoParams::new(1.0, 0);
        let (p, w) = params.resolve(3, 1_000_000).unwrap();
        assert!((params.exponent() - 5.0 / 7.0).abs() < 1e-12);
        assert!((p - 1e6f64.powf(-5.0 / 7.0)).abs() < 1e-15);
        assert!((w - 1e6f64.powf(0.8)).abs() < 1e-6);
        let shallow = params.with_variant(Variant::Shallow);
        assert!((shallow.exponent() - 0.5).abs() < 1e-12);
        assert!(RhoParams::new(0.0, 0).resolve(2, 2).is_err());
        assert!(RhoParams::new(1.0, 0).with_p(1.5).resolve(2, 2).is_err());
    }
}
