//! Empirical frequencies of the restriction events against their analytic
//! lower bounds.
//!
//! Trial `k` uses PRNG stream `k` under the shared seed, so reports are
//! identical whatever the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoders::layout::{Dims, VarLayout};
use crate::lab::patterns::{check_level_bounds, check_patterns};
use crate::lab::sample::{sample_rho, LabParamError, RhoParams};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub name: String,
    /// Analytic lower bound on the probability of the event.
    pub bound: f64,
    /// The bound is at most 0 and says nothing.
    pub vacuous: bool,
    pub successes: usize,
    pub trials: usize,
    pub frequency: f64,
    /// 95% Wilson interval.
    pub ci: (f64, f64),
    /// Wilson half-width at one standard deviation.
    pub se: f64,
    /// `frequency >= bound - 3 se`, or the bound is vacuous.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub dims: Dims,
    pub params: RhoParams,
    pub p: f64,
    pub w: f64,
    pub trials: usize,
    pub events: Vec<EventReport>,
}

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let ph = successes as f64 / n;
    let z2 = z * z;
    let centre = (ph + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn event(name: &str, bound: f64, successes: usize, trials: usize) -> EventReport {
    let frequency = successes as f64 / trials as f64;
    let (lo, hi) = wilson_interval(successes, trials, 1.0);
    let se = (hi - lo) / 2.0;
    let vacuous = bound <= 0.0;
    EventReport {
        name: name.into(),
        bound,
        vacuous,
        successes,
        trials,
        frequency,
        ci: wilson_interval(successes, trials, Z95),
        se,
        consistent: vacuous || frequency >= bound - 3.0 * se,
    }
}

pub fn monte_carlo(
    params: &RhoParams,
    layout: &VarLayout,
    trials: usize,
) -> Result<McReport, LabParamError> {
    let d = layout.dims();
    let (p, w) = params.resolve(d.s, d.t)?;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let rr = sample_rho(params, layout, k)?;
            Ok((check_level_bounds(&rr).all(), check_patterns(&rr).all()))
        })
        .collect::<Result<Vec<_>, LabParamError>>()?;
    let (sf, tf) = (d.s as f64, d.t as f64);
    let levels = outcomes.iter().filter(|o| o.0).count();
    let patterns = outcomes.iter().filter(|o| o.1).count();
    let both = outcomes.iter().filter(|o| o.0 && o.1).count();
    let b_levels = 1.0 - 3.0 * sf * (-p * tf / 3.0).exp();
    let b_patterns = 1.0 - 3.0 * p - 67.0 * p.powi(3) * sf * tf;
    Ok(McReport {
        dims: d,
        params: *params,
        p,
        w,
        trials,
        events: vec![
            event("level-bounds", b_levels, levels, trials),
            event("patterns", b_patterns, patterns, trials),
            event(
                "level-bounds-and-patterns",
                b_levels + b_patterns - 1.0,
                both,
                trials,
            ),
        ],
    })
}
