//! Random restrictions of the levelled statement and the admissible
//! assignments used to walk a restricted refutation backwards.
//!
//! Each piece can be exercised on its own: sampling, the level and pattern
//! events, clause widths, admissibility, extension, the adversary step,
//! parameter inequalities and Monte Carlo frequencies.

pub mod admissible;
pub mod adversary;
pub mod extend;
pub mod graph;
pub mod groups;
pub mod montecarlo;
pub mod patterns;
pub mod regime;
pub mod sample;
pub mod width;

pub use admissible::{
    check_no_falsified_axiom, is_admissible, AdmissibilityViolation, AxiomCheckError, Condition,
};
pub use adversary::{
    adversary_step, check_conditions, cleanup, AdversaryCase, AdversaryError, AdversaryState,
    AdversaryStep, AvoidSets,
};
pub use extend::{extend_to_admissible, ExtendError};
pub use graph::{Edge, RestrictionGraph};
pub use groups::{Group, Pair};
pub use montecarlo::{monte_carlo, wilson_interval, EventReport, McReport};
pub use patterns::{check_level_bounds, check_patterns, LevelBounds, PatternReport};
pub use regime::{check_parameter_regime, Inequality, RegimeReport};
pub use sample::{
    sample_rho, LabParamError, LevelInjection, RandomRestriction, RhoParams, Variant,
};
pub use width::{check_widths, width_profile, WidthItem, WidthProfile, WidthViolation};

/// Serializes maps keyed by pairs as lists of entries, since JSON keys are strings.
pub(crate) mod serde_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Pair;

    pub fn serialize<V: Serialize, S: Serializer>(
        map: &BTreeMap<Pair, V>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        ser.collect_seq(map.iter())
    }

    pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<Pair, V>, D::Error> {
        Ok(Vec::<(Pair, V)>::deserialize(de)?.into_iter().collect())
    }
}
