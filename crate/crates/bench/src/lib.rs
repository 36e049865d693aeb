//! Shared fixtures for the benchmark targets.

use wtsdist_core::generators::{random_wts, RandomWtsConfig};
use wtsdist_core::{Rational, WeightedTransitionSystem};

/// Labeled benchmark system with the given state count, out-degree ≤ 3,
/// alphabet of two symbols, half-integer weights in [0, 3].
pub fn labeled_system(states: usize, seed: u64) -> WeightedTransitionSystem {
    random_wts(&RandomWtsConfig {
        states,
        max_out: 3,
        alphabet_size: 2,
        denominator: 2,
        ..RandomWtsConfig::new(states, seed)
    })
}

/// Unlabeled system (every ground distance finite), integer weights in [0, 4].
pub fn unlabeled_system(states: usize, seed: u64) -> WeightedTransitionSystem {
    random_wts(&RandomWtsConfig {
        states,
        max_out: 3,
        alphabet_size: 0,
        weight_max: Rational::from_integer(4.into()),
        ..RandomWtsConfig::new(states, seed)
    })
}
