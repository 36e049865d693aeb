//! Instance constructions: the branching-vs-linear inequivalence witness
//! built from a pair of traces, and seeded random systems.

use crate::lasso::LassoTrace;
use crate::metrics::TraceMetric;
use crate::rational::Rational;
use crate::wts::{StateId, WeightedTransitionSystem, WtsError};
use num::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("σ and τ must share their first element")]
    HeadMismatch,
    #[error("the metric must separate σ from τ: d(σ, τ) = 0")]
    ForwardZero,
    #[error("the metric must separate τ from σ: d(τ, σ) = 0")]
    BackwardZero,
    #[error("σ and τ must be uniformly labeled or uniformly unlabeled")]
    MixedLabeling,
    #[error("metric not evaluable on these traces: {0}")]
    Metric(#[from] crate::metrics::MetricError),
    #[error(transparent)]
    Wts(#[from] WtsError),
}

/// A pair of traces with a common head that a metric separates in both
/// directions; exactly the raw material for the inequivalence construction.
#[derive(Debug, Clone)]
pub struct IneqSpec {
    pub sigma: LassoTrace,
    pub tau: LassoTrace,
    pub metric: TraceMetric,
}

impl IneqSpec {
    /// Checks the witness clauses, reporting the first that fails.
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let labeled = self.sigma.at(0).label.is_some();
        let uniform = |t: &LassoTrace| {
            t.prefix()
                .iter()
                .chain(t.cycle())
                .all(|w| w.label.is_some() == labeled)
        };
        if !uniform(&self.sigma) || !uniform(&self.tau) {
            return Err(GeneratorError::MixedLabeling);
        }
        if self.sigma.at(0) != self.tau.at(0) {
            return Err(GeneratorError::HeadMismatch);
        }
        if self.metric.eval_exact(&self.sigma, &self.tau)?.is_zero() {
            return Err(GeneratorError::ForwardZero);
        }
        if self.metric.eval_exact(&self.tau, &self.sigma)?.is_zero() {
            return Err(GeneratorError::BackwardZero);
        }
        debug_assert!(self
            .metric
            .is_one_step_discriminating_witness(&self.sigma, &self.tau));
        Ok(())
    }
}

/// Builds the finite system in which the linear distance from `s` to `t`
/// vanishes while the branching distance equals `min(d(σ, τ), d(τ, σ)) > 0`.
///
/// `s` emits the shared head and then branches into the two tails; `t`
/// branches immediately, committing to one full trace. Both states have
/// exactly the traces `{σ, τ}`.
pub fn build_inequivalence(
    spec: &IneqSpec,
) -> Result<(WeightedTransitionSystem, StateId, StateId), GeneratorError> {
    spec.validate()?;

    let mut states: Vec<String> = vec!["s".into(), "t".into(), "mid".into()];
    let mut transitions: Vec<(String, Option<String>, Rational, String)> = Vec::new();

    // Chain states realizing a trace; `name(i)` is the state whose residual
    // trace is the suffix starting at index `i`.
    let mut add_chain = |trace: &LassoTrace, base: &str, states: &mut Vec<String>| {
        let p = trace.prefix().len();
        let c = trace.cycle().len();
        let base = base.to_string();
        let name = move |i: usize| {
            if i < p {
                format!("{base}p{i}")
            } else {
                format!("{base}c{}", (i - p) % c)
            }
        };
        for i in 0..p + c {
            states.push(name(i));
        }
        for i in 0..p + c {
            let w = trace.at(i);
            transitions.push((name(i), w.label.clone(), w.value.clone(), name(i + 1)));
        }
        name
    };

    let sig = add_chain(&spec.sigma, "x", &mut states);
    let tau = add_chain(&spec.tau, "y", &mut states);

    let head = spec.sigma.at(0).clone();
    let s1 = spec.sigma.at(1).clone();
    let t1 = spec.tau.at(1).clone();
    transitions.push((
        "s".into(),
        head.label.clone(),
        head.value.clone(),
        "mid".into(),
    ));
    transitions.push(("mid".into(), s1.label.clone(), s1.value.clone(), sig(2)));
    transitions.push(("mid".into(), t1.label.clone(), t1.value.clone(), tau(2)));
    transitions.push(("t".into(), head.label.clone(), head.value.clone(), sig(1)));
    transitions.push(("t".into(), head.label.clone(), head.value.clone(), tau(1)));

    // Drop chain states never entered (position 0 of a chain with a prefix).
    let mut reachable: BTreeSet<String> = BTreeSet::new();
    let mut frontier = vec!["s".to_string(), "t".to_string()];
    while let Some(state) = frontier.pop() {
        if reachable.insert(state.clone()) {
            for (from, _, _, to) in &transitions {
                if *from == state {
                    frontier.push(to.clone());
                }
            }
        }
    }
    states.retain(|name| reachable.contains(name));
    transitions.retain(|(from, ..)| reachable.contains(from));

    let alphabet = if head.label.is_some() {
        let mut symbols: Vec<String> = transitions
            .iter()
            .filter_map(|(_, l, _, _)| l.clone())
            .collect();
        symbols.sort();
        symbols.dedup();
        Some(symbols)
    } else {
        None
    };

    let sys = WeightedTransitionSystem::new(states, transitions, alphabet)?;
    let s = sys.state("s").expect("root s exists");
    let t = sys.state("t").expect("root t exists");
    Ok((sys, s, t))
}

/// Parameters for seeded random system generation. Weights are drawn from the
/// grid of multiples of `1/denominator` inside `[weight_min, weight_max]`, so
/// the set of possible ground distances stays finite.
#[derive(Debug, Clone)]
pub struct RandomWtsConfig {
    pub states: usize,
    pub max_out: usize,
    /// 0 generates an unlabeled system.
    pub alphabet_size: usize,
    pub weight_min: Rational,
    pub weight_max: Rational,
    pub denominator: u32,
    pub seed: u64,
}

impl RandomWtsConfig {
    pub fn new(states: usize, seed: u64) -> Self {
        RandomWtsConfig {
            states,
            max_out: 2,
            alphabet_size: 0,
            weight_min: Rational::from_integer(0.into()),
            weight_max: Rational::from_integer(3.into()),
            denominator: 1,
            seed,
        }
    }
}

/// Seed-deterministic random system: every state gets 1..=max_out outgoing
/// transitions, so the result is non-blocking by construction.
pub fn random_wts(cfg: &RandomWtsConfig) -> WeightedTransitionSystem {
    assert!(cfg.states >= 1, "need at least one state");
    assert!(cfg.max_out >= 1, "need at least one transition per state");
    assert!(cfg.denominator >= 1, "denominator must be positive");
    let denom = Rational::from_integer(cfg.denominator.into());
    let lo = (&cfg.weight_min * &denom).ceil().to_integer();
    let hi = (&cfg.weight_max * &denom).floor().to_integer();
    let (lo, hi) = (
        lo.to_i64().expect("weight grid fits machine integers"),
        hi.to_i64().expect("weight grid fits machine integers"),
    );
    assert!(lo <= hi, "weight range contains no grid point");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let states: Vec<String> = (0..cfg.states).map(|i| format!("q{i}")).collect();
    let alphabet: Option<Vec<String>> = (cfg.alphabet_size > 0).then(|| {
        (0..cfg.alphabet_size)
            .map(|i| {
                if i < 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("l{i}")
                }
            })
            .collect()
    });

    let mut transitions = Vec::new();
    for from in &states {
        let out = rng.random_range(1..=cfg.max_out);
        for _ in 0..out {
            let to = states[rng.random_range(0..cfg.states)].clone();
            let label = alphabet
                .as_ref()
                .map(|symbols| symbols[rng.random_range(0..symbols.len())].clone());
            let numer = rng.random_range(lo..=hi);
            let value = Rational::new(numer.into(), cfg.denominator.into());
            transitions.push((from.clone(), label, value, to));
        }
    }
    WeightedTransitionSystem::new(states, transitions, alphabet)
        .expect("construction is non-blocking and well-labeled")
}
