//! Numerical evaluation of the inequalities that fix the lower-bound regime.
//!
//! The union-bound sum carries a `2^{t^δ}` factor, so its first term is
//! evaluated in log-space; the doubly exponential tail is compared through
//! its logarithm twice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lab::sample::{LabParamError, RhoParams, Variant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Named summands of `lhs`, where it is a sum.
    pub terms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub variant: Variant,
    pub p: f64,
    pub w: f64,
    pub inequalities: Vec<Inequality>,
    /// Shape constraints on `(n, r, s, t)` that do not hold.
    pub warnings: Vec<String>,
}

impl RegimeReport {
    pub fn all_hold(&self) -> bool {
        self.inequalities.iter().all(|q| q.holds)
    }

    pub fn get(&self, name: &str) -> Option<&Inequality> {
        self.inequalities.iter().find(|q| q.name == name)
    }
}

/// Union bound over every failure event; must stay below 1.
pub const FAILURE_SUM: &str = "failure-sum";
/// Room left for a fresh premise column; `10pt + 4w < t/4`.
pub const AVOID_ROOM: &str = "avoid-room";
/// Doubly exponential tail; `e^{e^{ln t - pt/3}} < 2`.
pub const DOUBLE_TAIL: &str = "double-tail";

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn check_parameter_regime(
    n: usize,
    r: usize,
    s: usize,
    t: usize,
    epsilon: f64,
    delta: f64,
    variant: Variant,
) -> Result<RegimeReport, LabParamError> {
    let (p, w) = RhoParams::new(epsilon, 0)
        .with_variant(variant)
        .resolve(s, t)?;
    let (sf, tf, rf) = (s as f64, t as f64, r as f64);
    let pt = p * tf;

    let log_width = log_add_exp(-p * w / 3.0, (2.0 * sf).ln() - pt / 3.0);
    let log_input = -pt / (8.0 * rf);
    let log_lengths = log_width.max(log_input) + tf.powf(delta) * std::f64::consts::LN_2;
    let terms = BTreeMap::from([
        ("width-union".to_string(), log_lengths.exp()),
        ("level-bounds".to_string(), 3.0 * sf * (-pt / 3.0).exp()),
        ("last-cell".to_string(), 3.0 * p),
        ("patterns".to_string(), 67.0 * p.powi(3) * sf * tf),
    ]);
    let sum: f64 = terms.values().sum();
    let failure = Inequality {
        name: FAILURE_SUM.into(),
        lhs: sum,
        rhs: 1.0,
        holds: sum < 1.0,
        terms,
    };

    let room = 10.0 * pt + 4.0 * w;
    let avoid = Inequality {
        name: AVOID_ROOM.into(),
        lhs: room,
        rhs: tf / 4.0,
        holds: room < tf / 4.0,
        terms: BTreeMap::from([("10pt".to_string(), 10.0 * pt), ("4w".to_string(), 4.0 * w)]),
    };

    let inner = tf.ln() - pt / 3.0;
    let tail = Inequality {
        name: DOUBLE_TAIL.into(),
        lhs: inner.exp().exp(),
        rhs: 2.0,
        // e^{e^x} < 2 iff x < ln ln 2.
        holds: inner < std::f64::consts::LN_2.ln(),
        terms: BTreeMap::new(),
    };

    let mut warnings = Vec::new();
    if !(t >= s && s > n) {
        warnings.push(format!("t >= s >= n+1 fails at n={n}, s={s}, t={t}"));
    }
    if !(r >= n && n >= 2) {
        warnings.push(format!("r >= n >= 2 fails at n={n}, r={r}"));
    }
    let power = match variant {
        Variant::Standard => 3.0 + epsilon,
        Variant::Shallow => 2.0 + epsilon,
    };
    if tf < rf.powf(power) {
        warnings.push(format!("t >= r^{power} fails"));
    }
    if variant == Variant::Shallow && s != n + 1 {
        warnings.push(format!("the shallow variant needs s = n+1, got s={s}"));
    }

    Ok(RegimeReport {
        n,
        r,
        s,
        t,
        epsilon,
        delta,
        variant,
        p,
        w,
        inequalities: vec![failure, avoid, tail],
        warnings,
    })
}
