//! Linear distance: the 1-blind game value, equivalently
//! `sup over σ from s of inf over τ from t of d(σ, τ)`.
//!
//! For discrete metrics this is trace inclusion and decided exactly by a
//! subset construction: traces of a non-blocking finite system form a
//! safety language, so inclusion of infinite traces reduces to inclusion of
//! finite prefixes. Quantitative metrics get certified brackets (discounted)
//! or depth-bounded lower bounds and lasso-restricted estimates; exact
//! quantitative linear distances are not claimed.

use crate::game::{bounded_blind_value, GameError, OracleLimits};
use crate::lasso::{trace_of_lasso_path, LassoTrace};
use crate::metrics::{Accumulator, GroundMetric, LabelPreorder, MetricError, TraceMetric};
use crate::rational::{rational_pow, Rational};
use crate::value::ExtValue;
use crate::wts::{enumerate_lassos, StateId, WeightedTransitionSystem};
use num::One;
use std::collections::{BTreeSet, HashSet, VecDeque};

/// Determinization state: a left state tracked by the set of right states
/// that can have produced the same weight prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetState {
    pub left: StateId,
    pub right: BTreeSet<StateId>,
}

/// Decides `0 or ∞`: whether every trace from `s` is matched index-wise
/// (equality, or the preorder refinement when given) by some trace from `t`.
pub fn linear_discrete(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    preorder: Option<&LabelPreorder>,
) -> ExtValue {
    linear_discrete_with(sys, s, t, preorder, false)
}

/// Subset-construction reachability; with `antichain` set, right-set
/// supersets of an already-visited state are pruned (failure from the
/// superset implies failure from the subset, so minimal sets suffice).
pub fn linear_discrete_with(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    preorder: Option<&LabelPreorder>,
    antichain: bool,
) -> ExtValue {
    let ground = match preorder {
        None => GroundMetric::DiscreteEq,
        Some(pre) => GroundMetric::Preorder(pre.clone()),
    };
    let start = SubsetState {
        left: s,
        right: BTreeSet::from([t]),
    };
    let mut visited: HashSet<SubsetState> = HashSet::new();
    let mut minimal: Vec<SubsetState> = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(state) = queue.pop_front() {
        if antichain {
            if minimal
                .iter()
                .any(|m| m.left == state.left && m.right.is_subset(&state.right))
            {
                continue;
            }
            minimal.retain(|m| !(m.left == state.left && state.right.is_subset(&m.right)));
            minimal.push(state.clone());
        } else if !visited.insert(state.clone()) {
            continue;
        }
        for move1 in sys.outgoing(state.left) {
            let mut right: BTreeSet<StateId> = BTreeSet::new();
            for &tracked in &state.right {
                for move2 in sys.outgoing(tracked) {
                    if ground.eval(&move1.weight, &move2.weight).is_zero() {
                        right.insert(move2.target);
                    }
                }
            }
            if right.is_empty() {
                return ExtValue::Infinite;
            }
            queue.push_back(SubsetState {
                left: move1.target,
                right,
            });
        }
    }
    ExtValue::zero()
}

/// How a linear-distance answer was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    /// Decided, not approximated.
    Exact,
    /// `lower ≤ d_L ≤ upper`, both certified.
    Bracket,
    /// Only the lower bound is certified; `upper` merely repeats it.
    LowerOnly,
    /// Restricted sup/inf over an enumerated lasso fragment; no one-sided
    /// guarantee.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearBound {
    pub lower: ExtValue,
    pub upper: ExtValue,
    pub depth: usize,
    pub method: MethodTag,
}

/// Depth-`k` blind value as a certified lower bound; for discounted metrics
/// also a certified upper bound `lower + λ^k · W / (1 − λ)` with `W` the
/// worst one-step ground distance.
pub fn linear_bound(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    m: &TraceMetric,
    k: usize,
    limits: &OracleLimits,
) -> Result<LinearBound, GameError> {
    if s == t {
        // The mimic reply gives d_L(s, s) = 0 outright.
        return Ok(LinearBound {
            lower: ExtValue::zero(),
            upper: ExtValue::zero(),
            depth: k,
            method: MethodTag::Exact,
        });
    }
    let lower = bounded_blind_value(sys, s, t, m, k, limits)?;
    match m.accumulator() {
        Accumulator::DiscountedSum(lambda) => {
            let tail = m
                .max_transition_ground(sys)
                .scale(&(rational_pow(lambda, k) / (Rational::one() - lambda)));
            let upper = lower.clone() + tail;
            Ok(LinearBound {
                lower,
                upper,
                depth: k,
                method: MethodTag::Bracket,
            })
        }
        _ => Ok(LinearBound {
            upper: lower.clone(),
            lower,
            depth: k,
            method: MethodTag::LowerOnly,
        }),
    }
}

/// Evaluates the sup-inf formula over the lasso traces reachable within the
/// given prefix/cycle bounds. Restricting the sup lowers the result and
/// restricting the inf raises it, so this is an estimate with no one-sided
/// guarantee.
pub fn linear_lasso_estimate(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    m: &TraceMetric,
    max_prefix: usize,
    max_cycle: usize,
) -> Result<ExtValue, MetricError> {
    let traces = |state: StateId| -> Vec<LassoTrace> {
        let set: HashSet<LassoTrace> = enumerate_lassos(sys, state, max_prefix, max_cycle)
            .iter()
            .map(trace_of_lasso_path)
            .collect();
        set.into_iter().collect()
    };
    let challenges = traces(s);
    let replies = traces(t);
    let mut sup = ExtValue::zero();
    for sigma in &challenges {
        let mut inf = ExtValue::Infinite;
        for tau in &replies {
            inf = inf.min(m.eval_exact(sigma, tau)?);
            if inf.is_zero() {
                break;
            }
        }
        sup = sup.max(inf);
        if sup.is_infinite() {
            break;
        }
    }
    Ok(sup)
}
