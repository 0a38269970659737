//! Oracles shared by the integration tests. None of them calls the code under
//! test for the property it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use refstate::encoders::layout::{RefVar, VarLayout};
use refstate::{Clause, Cnf, Justification, Literal, PartialAssignment, ResolutionProof, Var};

pub fn cnf(n: u32, clauses: &[&[i64]]) -> Cnf {
    Cnf::new(n, clauses.iter().map(|c| Clause::from_dimacs(c)).collect()).unwrap()
}

/// Every non-tautological clause over `x1..xn`, by base-3 code (0 absent,
/// 1 positive, 2 negative per variable).
pub fn all_clauses(n: usize) -> Vec<Clause> {
    (0..3usize.pow(n as u32))
        .map(|mut code| {
            let mut lits = Vec::new();
            for v in 1..=n {
                match code % 3 {
                    1 => lits.push(Literal::pos(v as Var)),
                    2 => lits.push(Literal::neg(v as Var)),
                    _ => {}
                }
                code /= 3;
            }
            Clause::new(lits)
        })
        .collect()
}

fn holds(c: &Clause, bits: u64) -> bool {
    c.iter()
        .any(|l| ((bits >> (l.var() - 1)) & 1 == 1) == l.is_positive())
}

/// Truth-table satisfiability for at most 24 variables.
pub fn is_sat_by_table(f: &Cnf) -> bool {
    assert!(f.num_vars() <= 24);
    (0..1u64 << f.num_vars()).any(|bits| f.clauses().iter().all(|c| holds(c, bits)))
}

/// The pigeonhole principle for three pigeons and two holes; `p(i,h)` is
/// variable `2(i-1) + h`.
pub fn php_3_2() -> Cnf {
    let p = |i: i64, h: i64| 2 * (i - 1) + h;
    let mut cs: Vec<Vec<i64>> = (1..=3).map(|i| vec![p(i, 1), p(i, 2)]).collect();
    for h in 1..=2 {
        for i in 1..=3 {
            for k in i + 1..=3 {
                cs.push(vec![-p(i, h), -p(k, h)]);
            }
        }
    }
    Cnf::new(6, cs.iter().map(|c| Clause::from_dimacs(c)).collect()).unwrap()
}

/// Random clauses of width exactly `k` over `n` variables until the formula is
/// unsatisfiable.
pub fn random_unsat(rng: &mut impl Rng, n: usize, k: usize) -> Cnf {
    let mut clauses = Vec::new();
    loop {
        let mut vars: Vec<usize> = (1..=n).collect();
        let mut lits = Vec::new();
        for _ in 0..k {
            let v = vars.remove(rng.random_range(0..vars.len()));
            lits.push(Literal::new(v as Var, rng.random_bool(0.5)));
        }
        let c = Clause::new(lits);
        if !clauses.contains(&c) {
            clauses.push(c);
        }
        let f = Cnf::new(n as u32, clauses.clone()).unwrap();
        if !is_sat_by_table(&f) {
            return f;
        }
    }
}

// ---------------------------------------------------------------------------
// DPLL with two watched literals and chronological backtracking. It never
// learns, so enumeration visits every total model exactly once.

pub struct Dpll {
    nvars: usize,
    clauses: Vec<Vec<usize>>,
    watches: Vec<Vec<usize>>,
    units: Vec<usize>,
    empty: bool,
}

fn code(l: Literal) -> usize {
    2 * l.var() as usize + usize::from(!l.is_positive())
}

impl Dpll {
    pub fn new(f: &Cnf) -> Dpll {
        let nvars = f.num_vars() as usize;
        let mut d = Dpll {
            nvars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * nvars + 2],
            units: Vec::new(),
            empty: false,
        };
        for c in f.clauses() {
            if c.is_tautological() {
                continue;
            }
            let lits: Vec<usize> = c.iter().map(code).collect();
            match lits.len() {
                0 => d.empty = true,
                1 => d.units.push(lits[0]),
                _ => {
                    let k = d.clauses.len();
                    d.watches[lits[0]].push(k);
                    d.watches[lits[1]].push(k);
                    d.clauses.push(lits);
                }
            }
        }
        d
    }

    /// Calls `visit` on every total model until it returns `false`; returns
    /// the number of models visited.
    pub fn enumerate(&mut self, mut visit: impl FnMut(&[bool]) -> bool) -> u64 {
        if self.empty {
            return 0;
        }
        // value: 0 unassigned, 1 true, 2 false (per variable).
        let mut value = vec![0u8; self.nvars + 1];
        let mut trail: Vec<usize> = Vec::new();
        // (trail length before the decision, decision literal, flipped)
        let mut decisions: Vec<(usize, usize, bool)> = Vec::new();
        let mut qhead = 0;
        let lit_val = |value: &[u8], l: usize| -> u8 {
            match value[l / 2] {
                0 => 0,
                v => {
                    if (v == 1) == l.is_multiple_of(2) {
                        1
                    } else {
                        2
                    }
                }
            }
        };
        let assign = |value: &mut [u8], trail: &mut Vec<usize>, l: usize| {
            value[l / 2] = if l.is_multiple_of(2) { 1 } else { 2 };
            trail.push(l);
        };
        let mut conflict = false;
        for &u in &self.units {
            match lit_val(&value, u) {
                0 => assign(&mut value, &mut trail, u),
                2 => conflict = true,
                _ => {}
            }
        }
        if conflict {
            return 0;
        }
        let mut count = 0u64;
        loop {
            // Propagate.
            let mut conflict = false;
            while qhead < trail.len() && !conflict {
                let falsified = trail[qhead] ^ 1;
                qhead += 1;
                let mut ws = std::mem::take(&mut self.watches[falsified]);
                let mut k = 0;
                while k < ws.len() {
                    let ci = ws[k];
                    let c = &mut self.clauses[ci];
                    if c[0] == falsified {
                        c.swap(0, 1);
                    }
                    if lit_val(&value, c[0]) == 1 {
                        k += 1;
                        continue;
                    }
                    if let Some(m) = (2..c.len()).find(|&m| lit_val(&value, c[m]) != 2) {
                        c.swap(1, m);
                        let w = c[1];
                        self.watches[w].push(ci);
                        ws.swap_remove(k);
                        continue;
                    }
                    match lit_val(&value, c[0]) {
                        0 => assign(&mut value, &mut trail, c[0]),
                        _ => {
                            conflict = true;
                            break;
                        }
                    }
                    k += 1;
                }
                self.watches[falsified] = ws;
            }
            let done = if conflict {
                true
            } else if let Some(v) = (1..=self.nvars).find(|&v| value[v] == 0) {
                decisions.push((trail.len(), 2 * v, false));
                assign(&mut value, &mut trail, 2 * v);
                false
            } else {
                count += 1;
                let model: Vec<bool> = value.iter().map(|&x| x == 1).collect();
                if !visit(&model) {
                    return count;
                }
                true
            };
            if done {
                // Backtrack to the latest unflipped decision.
                loop {
                    let Some((len, lit, flipped)) = decisions.pop() else {
                        return count;
                    };
                    for &l in &trail[len..] {
                        value[l / 2] = 0;
                    }
                    trail.truncate(len);
                    qhead = len;
                    if !flipped {
                        decisions.push((len, lit ^ 1, true));
                        assign(&mut value, &mut trail, lit ^ 1);
                        break;
                    }
                }
            }
        }
    }

    pub fn solve(f: &Cnf) -> Option<PartialAssignment> {
        let mut out = None;
        Dpll::new(f).enumerate(|m| {
            out = Some(model_to_assignment(m));
            false
        });
        out
    }
}

pub fn model_to_assignment(model: &[bool]) -> PartialAssignment {
    let mut a = PartialAssignment::new();
    for (v, &b) in model.iter().enumerate().skip(1) {
        a.set(v as Var, b);
    }
    a
}

// ---------------------------------------------------------------------------
// Levelled refutations counted row by row.

/// Number of `s × t` grids with non-tautological cells, each justified by an
/// input weakening (level 1) or a weakened resolvent of two cells below, with
/// the last cell empty. Distinct justifications count separately.
pub fn levelled_count(f: &Cnf, s: usize, t: usize) -> u128 {
    let n = f.num_vars() as usize;
    let clauses = all_clauses(n);
    let q = clauses.len();
    let rows = q.pow(t as u32);
    let decode_row = |mut code: usize| -> Vec<usize> {
        (0..t)
            .map(|_| {
                let c = code % q;
                code /= q;
                c
            })
            .collect()
    };
    let row_ways = |row: &[usize], ways: &[u128]| row.iter().map(|&c| ways[c]).product::<u128>();

    let input_ways: Vec<u128> = clauses
        .iter()
        .map(|c| f.clauses().iter().filter(|m| m.is_subset(c)).count() as u128)
        .collect();
    let mut count: Vec<u128> = (0..rows)
        .map(|code| row_ways(&decode_row(code), &input_ways))
        .collect();

    for _ in 2..=s {
        let mut next = vec![0u128; rows];
        for (code, &c_prev) in count.iter().enumerate() {
            if c_prev == 0 {
                continue;
            }
            let prev = decode_row(code);
            let mut ways = vec![0u128; q];
            for &a in &prev {
                for &b in &prev {
                    for v in 1..=n as Var {
                        let (ca, cb) = (&clauses[a], &clauses[b]);
                        if !ca.contains(Literal::pos(v)) || !cb.contains(Literal::neg(v)) {
                            continue;
                        }
                        let res: BTreeSet<Literal> = ca
                            .iter()
                            .chain(cb.iter())
                            .filter(|l| l.var() != v)
                            .collect();
                        for (k, c) in clauses.iter().enumerate() {
                            if res.iter().all(|&l| c.contains(l)) {
                                ways[k] += 1;
                            }
                        }
                    }
                }
            }
            for (code2, slot) in next.iter_mut().enumerate() {
                let w = row_ways(&decode_row(code2), &ways);
                *slot += c_prev * w;
            }
        }
        count = next;
    }
    let empty = clauses.iter().position(|c| c.is_empty()).unwrap();
    (0..rows)
        .filter(|&code| decode_row(code)[t - 1] == empty)
        .map(|code| count[code])
        .sum()
}

// ---------------------------------------------------------------------------
// Bounded-width refutation search.

/// A refutation of `f` using only non-tautological clauses of width at most
/// `max_width`, found by saturation; `None` if saturation does not reach the
/// empty clause.
pub fn find_refutation(f: &Cnf, max_width: usize) -> Option<ResolutionProof> {
    #[derive(Clone, Copy)]
    enum Origin {
        Input(usize),
        Res(usize, usize, Var),
    }
    let mut known: Vec<(Clause, Origin)> = Vec::new();
    let mut index: BTreeMap<Clause, usize> = BTreeMap::new();
    for (m, c) in f.clauses().iter().enumerate() {
        if c.len() <= max_width && !c.is_tautological() && !index.contains_key(c) {
            index.insert(c.clone(), known.len());
            known.push((c.clone(), Origin::Input(m + 1)));
        }
    }
    let mut done = 0;
    while !index.contains_key(&Clause::empty()) && done < known.len() {
        let upto = known.len();
        for a in 0..upto {
            for b in 0..upto {
                if a.max(b) < done {
                    continue;
                }
                let pos: Vec<Var> = known[a]
                    .0
                    .iter()
                    .filter(|l| l.is_positive())
                    .map(|l| l.var())
                    .collect();
                for v in pos {
                    if !known[b].0.contains(Literal::neg(v)) {
                        continue;
                    }
                    let r = known[a].0.resolve(&known[b].0, v).unwrap();
                    if r.len() <= max_width && !r.is_tautological() && !index.contains_key(&r) {
                        index.insert(r.clone(), known.len());
                        known.push((r, Origin::Res(a, b, v)));
                    }
                }
            }
        }
        done = upto;
    }
    let root = *index.get(&Clause::empty())?;
    // Post-order over the derivation DAG of the empty clause.
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![(root, false)];
    while let Some((k, expanded)) = stack.pop() {
        if expanded {
            order.push(k);
            continue;
        }
        if !seen.insert(k) {
            continue;
        }
        stack.push((k, true));
        if let Origin::Res(a, b, _) = known[k].1 {
            stack.push((b, false));
            stack.push((a, false));
        }
    }
    let mut pos = BTreeMap::new();
    let mut pi = ResolutionProof::new();
    for k in order {
        let just = match known[k].1 {
            Origin::Input(m) => Justification::Input(m),
            Origin::Res(a, b, v) => Justification::Resolvent {
                left: pos[&a],
                right: pos[&b],
                pivot: v,
            },
        };
        pos.insert(k, pi.push(known[k].0.clone(), just));
    }
    Some(pi)
}

/// A random unsatisfiable formula over `n` variables with clauses of width at
/// most `n-1` that has a refutation of width at most `n-1`.
pub fn random_narrow_refutable(rng: &mut impl Rng, n: usize) -> (Cnf, ResolutionProof) {
    loop {
        let mut clauses: Vec<Clause> = Vec::new();
        let f = loop {
            let k = rng.random_range(1..n);
            let mut vars: Vec<usize> = (1..=n).collect();
            let lits = (0..k)
                .map(|_| {
                    let v = vars.remove(rng.random_range(0..vars.len()));
                    Literal::new(v as Var, rng.random_bool(0.5))
                })
                .collect();
            clauses.push(Clause::new(lits));
            let f = Cnf::new(n as u32, clauses.clone()).unwrap();
            if !is_sat_by_table(&f) {
                break f;
            }
        };
        if let Some(pi) = find_refutation(&f, n - 1) {
            return (f, pi);
        }
    }
}

// ---------------------------------------------------------------------------
// Width conditions of the adversary invariant, computed from scratch.

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    D,
    V,
    I,
    L,
    R,
}

/// Kind and home pair of a grid variable.
pub fn kind_of(v: RefVar) -> Option<(Kind, (usize, usize))> {
    Some(match v {
        RefVar::D { i, j, .. } => (Kind::D, (i, j)),
        RefVar::V { i, j, .. } => (Kind::V, (i, j)),
        RefVar::I { j, .. } => (Kind::I, (1, j)),
        RefVar::L { i, j, .. } => (Kind::L, (i, j)),
        RefVar::R { i, j, .. } => (Kind::R, (i, j)),
        _ => return None,
    })
}

/// Every grid variable of the given kind and home pair.
pub fn group_vars(layout: &VarLayout, kind: Kind, (i, j): (usize, usize)) -> Vec<Var> {
    let d = layout.dims();
    let vs: Vec<RefVar> = match kind {
        Kind::D => (1..=d.n)
            .flat_map(|l| (0..=1u8).map(move |b| RefVar::D { i, j, l, b }))
            .collect(),
        Kind::V => (1..=d.n).map(|l| RefVar::V { i, j, l }).collect(),
        Kind::I => (1..=d.r).map(|m| RefVar::I { j, m }).collect(),
        Kind::L => (1..=d.t).map(|jp| RefVar::L { i, j, jp }).collect(),
        Kind::R => (1..=d.t).map(|jp| RefVar::R { i, j, jp }).collect(),
    };
    vs.into_iter().map(|v| layout.var(v)).collect()
}

/// Kind-pairs that are mentioned (D) or important (others) in `e`.
pub fn important_groups(e: &Clause, layout: &VarLayout) -> BTreeSet<(Kind, (usize, usize))> {
    let d = layout.dims();
    let mut neg: BTreeSet<(Kind, (usize, usize))> = BTreeSet::new();
    let mut pos: BTreeMap<(Kind, (usize, usize)), usize> = BTreeMap::new();
    for l in e.iter() {
        let Some(key) = layout.decode(l.var()).and_then(kind_of) else {
            continue;
        };
        if l.is_positive() {
            *pos.entry(key).or_default() += 1;
        } else {
            neg.insert(key);
        }
    }
    let threshold = |k: Kind| match k {
        Kind::D => 1,
        Kind::V => d.n,
        Kind::I => d.r,
        Kind::L | Kind::R => d.t,
    };
    let mut out: BTreeSet<_> = neg;
    out.extend(
        pos.into_iter()
            .filter(|(key, c)| key.0 == Kind::D || 2 * c >= threshold(key.0))
            .map(|(k, _)| k),
    );
    out
}

/// Conditions (i) and (ii) of the adversary invariant.
pub fn invariant_holds(
    sigma: &PartialAssignment,
    e: &Clause,
    layout: &VarLayout,
) -> Result<(), String> {
    for l in e.iter() {
        if let Some(v) = sigma.get(l.var()) {
            if v == l.is_positive() {
                return Err(format!("literal {l} is true"));
            }
        }
    }
    for (kind, pair) in important_groups(e, layout) {
        if group_vars(layout, kind, pair)
            .iter()
            .any(|&v| !sigma.contains(v))
        {
            return Err(format!("{kind:?}{pair:?} important but unassigned"));
        }
    }
    Ok(())
}

/// Index of the first clause of `f` falsified by `sigma`.
pub fn falsified_clause(f: &Cnf, sigma: &PartialAssignment) -> Option<usize> {
    f.clauses().iter().position(|c| {
        c.iter()
            .all(|l| sigma.get(l.var()) == Some(!l.is_positive()))
    })
}

// ---------------------------------------------------------------------------
// Sampler faithfulness.

/// Checks a sampled restriction against the sampling rules and the meaning
/// of each assigned variable.
pub fn sampler_faithful(
    rr: &refstate::lab::RandomRestriction,
    layout: &VarLayout,
) -> Result<(), String> {
    let d = layout.dims();
    for (&(i, j), c) in &rr.cell_clauses {
        if !rr.a_d.contains(&(i, j)) {
            return Err(format!("clause for ({i},{j}) outside A_D"));
        }
        let vars: BTreeSet<Var> = c.iter().map(|l| l.var()).collect();
        if c.len() != d.n || vars != (1..=d.n as Var).collect() {
            return Err(format!(
                "cell ({i},{j}) clause {c} is not one literal per variable"
            ));
        }
    }
    if rr.cell_clauses.len() != rr.a_d.len() {
        return Err("A_D cell without clause".into());
    }
    let expected_inputs: BTreeSet<usize> = rr
        .a_i
        .iter()
        .map(|p| p.1)
        .filter(|&j| !rr.a_d.contains(&(1, j)))
        .collect();
    if rr.inputs.keys().copied().collect::<BTreeSet<_>>() != expected_inputs {
        return Err("inputs not on A_I minus A_D".into());
    }
    if rr.inputs.values().any(|&m| m < 1 || m > d.r) || rr.a_i.iter().any(|p| p.0 != 1) {
        return Err("input out of range".into());
    }
    if rr.pivots.keys().copied().collect::<BTreeSet<_>>() != rr.a_v
        || rr.a_v.iter().any(|p| p.0 < 2)
        || rr.pivots.values().any(|&l| l < 1 || l > d.n)
    {
        return Err("pivots not on A_V".into());
    }
    let cap = 2.0 * rr.p * d.t as f64;
    for i in 2..=d.s {
        let level: BTreeSet<usize> = rr.a_rl.iter().filter(|p| p.0 == i).map(|p| p.1).collect();
        let h = &rr.h[&i];
        let should_guard = level.len() as f64 > cap || 2 * level.len() > d.t;
        if should_guard != rr.guarded.contains(&i) {
            return Err(format!("level {i} guard mismatch"));
        }
        if should_guard {
            if !h.left.is_empty() || !h.right.is_empty() {
                return Err(format!("guarded level {i} has wiring"));
            }
            continue;
        }
        let keys_l: BTreeSet<usize> = h.left.keys().copied().collect();
        let keys_r: BTreeSet<usize> = h.right.keys().copied().collect();
        if keys_l != level || keys_r != level {
            return Err(format!("level {i} wiring not on A_i"));
        }
        let images: Vec<usize> = h.left.values().chain(h.right.values()).copied().collect();
        let distinct: BTreeSet<usize> = images.iter().copied().collect();
        if distinct.len() != images.len() || images.iter().any(|&jp| jp < 1 || jp > d.t) {
            return Err(format!("h_{i} is not injective into [t]"));
        }
        let b: BTreeSet<(usize, usize)> = distinct.iter().map(|&jp| (i - 1, jp)).collect();
        if rr.b(i - 1) != b {
            return Err(format!("B_{} mismatch", i - 1));
        }
    }
    // Every assigned variable means what its group was set to.
    let mut expected = 0usize;
    expected += rr.a_d.len() * 2 * d.n + rr.inputs.len() * d.r + rr.pivots.len() * d.n;
    expected +=
        rr.h.values()
            .map(|h| (h.left.len() + h.right.len()) * d.t)
            .sum::<usize>();
    if rr.rho.len() != expected {
        return Err(format!(
            "rho has {} variables, expected {expected}",
            rr.rho.len()
        ));
    }
    for (var, val) in rr.rho.iter() {
        let ok = match layout.decode(var) {
            Some(RefVar::D { i, j, l, b }) => rr
                .cell_clauses
                .get(&(i, j))
                .is_some_and(|c| c.contains(Literal::with_polarity(l as Var, b)) == val),
            Some(RefVar::V { i, j, l }) => rr.pivots.get(&(i, j)).is_some_and(|&x| (x == l) == val),
            Some(RefVar::I { j, m }) => rr.inputs.get(&j).is_some_and(|&x| (x == m) == val),
            Some(RefVar::L { i, j, jp }) => {
                rr.h[&i].left.get(&j).is_some_and(|&x| (x == jp) == val)
            }
            Some(RefVar::R { i, j, jp }) => {
                rr.h[&i].right.get(&j).is_some_and(|&x| (x == jp) == val)
            }
            _ => false,
        };
        if !ok {
            return Err(format!("rho assigns variable {var} inconsistently"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Adversary instances.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Assigned,
    PivotOrInput,
    Cell,
    Premise,
}

pub struct AdversaryInstance {
    pub layout: VarLayout,
    pub f: Cnf,
    pub rho: PartialAssignment,
    pub sigma: PartialAssignment,
    pub e: Clause,
    pub e0: Clause,
    pub e1: Clause,
    pub q: Var,
}

fn unset_group(
    sigma: &PartialAssignment,
    layout: &VarLayout,
    kind: Kind,
    pair: (usize, usize),
) -> bool {
    group_vars(layout, kind, pair)
        .iter()
        .all(|&v| !sigma.contains(v))
}

/// One instance aimed at `target`, built on an admissible `sigma` over
/// `rho`; `None` when the random choices do not fit the target.
pub fn synthesize(
    rng: &mut impl Rng,
    layout: &VarLayout,
    f: &Cnf,
    rho: &PartialAssignment,
    sigma: &PartialAssignment,
    target: Target,
) -> Option<AdversaryInstance> {
    let d = layout.dims();
    let grid: Vec<Var> = (1..=layout.num_vars()).collect();
    let pick_unset = |rng: &mut _, kinds: &[Kind]| -> Option<(Var, Kind, (usize, usize))> {
        for _ in 0..50 {
            let v = *grid.choose(rng)?;
            let (kind, pair) = layout.decode(v).and_then(kind_of)?;
            if kinds.contains(&kind) && unset_group(sigma, layout, kind, pair) {
                return Some((v, kind, pair));
            }
        }
        None
    };
    let (q, group, extra) = match target {
        Target::Assigned => {
            let dom: Vec<Var> = rho.domain().collect();
            let q = *dom.choose(rng)?;
            (q, None, 0)
        }
        Target::PivotOrInput => {
            let (q, k, p) = pick_unset(rng, &[Kind::V, Kind::I])?;
            let th = if k == Kind::V { d.n } else { d.r };
            (q, Some((k, p)), th.div_ceil(2) - 1)
        }
        Target::Cell => {
            let (q, k, p) = pick_unset(rng, &[Kind::D])?;
            (q, Some((k, p)), 0)
        }
        Target::Premise => {
            // Half of the time aim at the last cell, whose empty clause is the
            // only short clause the adversary produces.
            let (q, k, p) = if rng.random_bool(0.5) {
                let side = if rng.random_bool(0.5) {
                    Kind::L
                } else {
                    Kind::R
                };
                let jp = rng.random_range(1..=d.t);
                let v = match side {
                    Kind::L => RefVar::L { i: d.s, j: d.t, jp },
                    _ => RefVar::R { i: d.s, j: d.t, jp },
                };
                if !unset_group(sigma, layout, side, (d.s, d.t)) {
                    return None;
                }
                (layout.var(v), side, (d.s, d.t))
            } else {
                pick_unset(rng, &[Kind::L, Kind::R])?
            };
            (q, Some((k, p)), d.t.div_ceil(2) - 1)
        }
    };

    let mut lits: BTreeSet<Literal> = BTreeSet::new();
    if let Some((kind, pair)) = group {
        let mut others: Vec<Var> = group_vars(layout, kind, pair)
            .into_iter()
            .filter(|&v| v != q)
            .collect();
        for _ in 0..extra {
            let v = others.remove(rng.random_range(0..others.len()));
            lits.insert(Literal::pos(v));
        }
    }
    for _ in 0..rng.random_range(0..6) {
        let v = *grid.choose(rng)?;
        if v == q {
            continue;
        }
        lits.insert(match sigma.get(v) {
            Some(b) => Literal::new(v, !b),
            None => Literal::pos(v),
        });
    }
    let e = Clause::new(lits.iter().copied().collect());
    if e.mentions(q) || e.is_tautological() || invariant_holds(sigma, &e, layout).is_err() {
        return None;
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for &l in &lits {
        match rng.random_range(0..3) {
            0 => a.push(l),
            1 => b.push(l),
            _ => {
                a.push(l);
                b.push(l);
            }
        }
    }
    let positive_first = rng.random_bool(0.5);
    a.push(Literal::new(q, positive_first));
    b.push(Literal::new(q, !positive_first));
    Some(AdversaryInstance {
        layout: layout.clone(),
        f: f.clone(),
        rho: rho.clone(),
        sigma: sigma.clone(),
        e,
        e0: Clause::new(a),
        e1: Clause::new(b),
        q,
    })
}
