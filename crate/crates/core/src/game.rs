//! The simulation game and its bounded-depth value oracles.
//!
//! Player 1 extends a path from `s`, Player 2 replies from `t`; after
//! infinitely many rounds the trace distance of the two built paths is paid
//! to Player 1. This module provides the executable round/playout semantics
//! for arbitrary strategies, and exhaustive depth-`k` searches for the game
//! value (`sup inf`, Player 2 replying inside each round) and the 1-blind
//! value (Player 1 commits to a whole path). The searches exist to validate
//! the fixed-point engine on small systems; they favor transparency over
//! speed.
//!
//! Only the `sup inf` order is computed; whether the game is determined is
//! not decided here.

use crate::metrics::{Accumulator, MetricError, TraceMetric};
use crate::rational::Rational;
use crate::value::ExtValue;
use crate::wts::{FinitePath, LassoPath, StateId, Transition, Weight, WeightedTransitionSystem};
use num::Zero;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error(
        "player {player} chose a transition leaving {found:?}, but their path ends in {expected:?}"
    )]
    WrongSource {
        player: u8,
        expected: String,
        found: String,
    },
    #[error("player {player} chose a transition that is not in the system")]
    UnknownTransition { player: u8 },
    #[error("oracle node budget exceeded ({limit} nodes)")]
    BudgetExceeded { limit: u64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Game history: a pair of finite paths of equal length between rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    p1: FinitePath,
    p2: FinitePath,
}

impl Configuration {
    pub fn start(s: StateId, t: StateId) -> Self {
        Configuration {
            p1: FinitePath::empty(s),
            p2: FinitePath::empty(t),
        }
    }

    pub fn p1(&self) -> &FinitePath {
        &self.p1
    }

    pub fn p2(&self) -> &FinitePath {
        &self.p2
    }

    /// Rounds completed so far.
    pub fn rounds(&self) -> usize {
        self.p2.len()
    }
}

/// Player-1 strategies observe the whole configuration. Any `FnMut` closure
/// qualifies; blind strategies are the special case that ignores `p2`.
pub trait Player1Strategy {
    fn choose(&mut self, cfg: &Configuration) -> Transition;
}

impl<F: FnMut(&Configuration) -> Transition> Player1Strategy for F {
    fn choose(&mut self, cfg: &Configuration) -> Transition {
        self(cfg)
    }
}

/// Player-2 strategies observe the configuration after Player 1's move of
/// the current round.
pub trait Player2Strategy {
    fn choose(&mut self, cfg: &Configuration) -> Transition;
}

/// Wraps a closure as a Player-2 strategy. (A blanket impl would collide
/// with the Player-1 one for closures implementing both.)
pub struct Strategy2Fn<F>(pub F);

impl<F: FnMut(&Configuration) -> Transition> Player2Strategy for Strategy2Fn<F> {
    fn choose(&mut self, cfg: &Configuration) -> Transition {
        self.0(cfg)
    }
}

/// A blind Player-1 strategy: commits to a lasso path and plays it out
/// regardless of Player 2's moves.
pub struct BlindStrategy1 {
    path: LassoPath,
}

impl BlindStrategy1 {
    pub fn new(path: LassoPath) -> Self {
        BlindStrategy1 { path }
    }
}

impl Player1Strategy for BlindStrategy1 {
    fn choose(&mut self, cfg: &Configuration) -> Transition {
        self.path.step_at(cfg.p1().len()).clone()
    }
}

/// A Player-2 strategy with explicit memory: the rule maps the observed
/// configuration and current memory to a transition and successor memory.
pub struct MemoryStrategy2<M, F> {
    pub memory: M,
    pub rule: F,
}

impl<M, F: FnMut(&Configuration, &M) -> (Transition, M)> Player2Strategy for MemoryStrategy2<M, F> {
    fn choose(&mut self, cfg: &Configuration) -> Transition {
        let (transition, next) = (self.rule)(cfg, &self.memory);
        self.memory = next;
        transition
    }
}

/// Copies Player 1's newest move: the identical transition when available
/// (always, once the two paths track each other from a shared start), else a
/// transition with the same weight, else the first one available.
pub struct MimicStrategy2<'a> {
    sys: &'a WeightedTransitionSystem,
}

impl<'a> MimicStrategy2<'a> {
    pub fn new(sys: &'a WeightedTransitionSystem) -> Self {
        MimicStrategy2 { sys }
    }
}

impl Player2Strategy for MimicStrategy2<'_> {
    fn choose(&mut self, cfg: &Configuration) -> Transition {
        let outs = self.sys.outgoing(cfg.p2().last_state());
        let latest = cfg.p1().steps().last();
        latest
            .and_then(|chosen| outs.iter().find(|t| *t == chosen))
            .or_else(|| latest.and_then(|chosen| outs.iter().find(|t| t.weight == chosen.weight)))
            .unwrap_or(&outs[0])
            .clone()
    }
}

fn checked_step(
    sys: &WeightedTransitionSystem,
    path: &mut FinitePath,
    chosen: Transition,
    player: u8,
) -> Result<(), GameError> {
    let expected = path.last_state();
    if chosen.source != expected {
        return Err(GameError::WrongSource {
            player,
            expected: sys.state_name(expected).to_string(),
            found: sys.state_name(chosen.source).to_string(),
        });
    }
    if !sys.outgoing(chosen.source).contains(&chosen) {
        return Err(GameError::UnknownTransition { player });
    }
    path.push(chosen).expect("source checked above");
    Ok(())
}

/// Plays one round: Player 1 extends `p1`, then Player 2 — observing the
/// updated configuration — extends `p2`.
pub fn round(
    sys: &WeightedTransitionSystem,
    theta1: &mut dyn Player1Strategy,
    theta2: &mut dyn Player2Strategy,
    cfg: &Configuration,
) -> Result<Configuration, GameError> {
    let mut next = cfg.clone();
    let move1 = theta1.choose(&next);
    checked_step(sys, &mut next.p1, move1, 1)?;
    let move2 = theta2.choose(&next);
    checked_step(sys, &mut next.p2, move2, 2)?;
    Ok(next)
}

/// The first `k` rounds of the play from `(s, t)` under the given profile.
#[derive(Debug, Clone)]
pub struct Playout {
    pub p1: FinitePath,
    pub p2: FinitePath,
}

impl Playout {
    pub fn traces(&self) -> (Vec<Weight>, Vec<Weight>) {
        (self.p1.weights(), self.p2.weights())
    }
}

pub fn playout(
    sys: &WeightedTransitionSystem,
    theta1: &mut dyn Player1Strategy,
    theta2: &mut dyn Player2Strategy,
    s: StateId,
    t: StateId,
    k: usize,
) -> Result<Playout, GameError> {
    let mut cfg = Configuration::start(s, t);
    for _ in 0..k {
        cfg = round(sys, theta1, theta2, &cfg)?;
    }
    Ok(Playout {
        p1: cfg.p1,
        p2: cfg.p2,
    })
}

/// Node budget for the oracle searches.
#[derive(Debug, Clone, Default)]
pub struct OracleLimits {
    pub max_nodes: Option<u64>,
}

impl OracleLimits {
    pub fn with_max_nodes(max_nodes: u64) -> Self {
        OracleLimits {
            max_nodes: Some(max_nodes),
        }
    }
}

struct Budget {
    used: u64,
    limit: Option<u64>,
}

impl Budget {
    fn new(limits: &OracleLimits) -> Self {
        Budget {
            used: 0,
            limit: limits.max_nodes,
        }
    }

    fn spend(&mut self) -> Result<(), GameError> {
        self.used += 1;
        match self.limit {
            Some(limit) if self.used > limit => Err(GameError::BudgetExceeded { limit }),
            _ => Ok(()),
        }
    }
}

fn check_metric_compat(sys: &WeightedTransitionSystem, m: &TraceMetric) -> Result<(), GameError> {
    if matches!(m.ground(), crate::metrics::GroundMetric::Preorder(_)) && !sys.is_labeled() {
        return Err(GameError::Metric(MetricError::LabelsRequired {
            metric: m.to_string(),
        }));
    }
    Ok(())
}

/// Exact value of the depth-`k` game from `(s, t)`: `sup` over Player-1
/// moves of `inf` over Player-2 replies, payoff `eval_truncated` at depth
/// `k`. History-dependent strategies are covered because the search branches
/// over every move at every configuration.
///
/// For all metrics except the limit average the per-round summary (running
/// maximum via residuals, remaining discount factor, current lead) determines
/// the suffix value, so subtrees are memoized on state pair, remaining depth,
/// and summary; the limit average falls back to plain tree search.
pub fn bounded_value(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    m: &TraceMetric,
    k: usize,
    limits: &OracleLimits,
) -> Result<ExtValue, GameError> {
    check_metric_compat(sys, m)?;
    let mut budget = Budget::new(limits);
    match m.accumulator() {
        Accumulator::Discrete | Accumulator::Sup | Accumulator::DiscountedSum(_) => {
            let mut memo = HashMap::new();
            scalar_value(sys, m, s, t, k, &mut memo, &mut budget)
        }
        Accumulator::MaxLead => {
            let mut memo = HashMap::new();
            lead_value(sys, m, s, t, Rational::zero(), k, &mut memo, &mut budget)
        }
        Accumulator::LimAvg => {
            let mut w1 = Vec::with_capacity(k);
            let mut w2 = Vec::with_capacity(k);
            search_value(sys, m, s, t, k, &mut w1, &mut w2, &mut budget)
        }
    }
}

/// Suffix value for metrics whose combination with the remaining rounds is
/// summary-free: `V_0 = 0` and
/// `V_j(s, t) = sup_x inf_y combine(d(x, y), V_{j-1}(s', t'))`.
fn scalar_value(
    sys: &WeightedTransitionSystem,
    m: &TraceMetric,
    s: StateId,
    t: StateId,
    depth: usize,
    memo: &mut HashMap<(StateId, StateId, usize), ExtValue>,
    budget: &mut Budget,
) -> Result<ExtValue, GameError> {
    budget.spend()?;
    if depth == 0 {
        return Ok(ExtValue::zero());
    }
    if let Some(v) = memo.get(&(s, t, depth)) {
        return Ok(v.clone());
    }
    let mut sup: Option<ExtValue> = None;
    for move1 in sys.outgoing(s) {
        let mut inf: Option<ExtValue> = None;
        for move2 in sys.outgoing(t) {
            let d = m.ground().eval(&move1.weight, &move2.weight);
            // A label mismatch pays ∞ regardless of the suffix.
            let combined = if d.is_infinite() {
                ExtValue::Infinite
            } else {
                let suffix =
                    scalar_value(sys, m, move1.target, move2.target, depth - 1, memo, budget)?;
                match m.accumulator() {
                    Accumulator::Discrete => {
                        if d.is_zero() {
                            suffix
                        } else {
                            ExtValue::Infinite
                        }
                    }
                    Accumulator::Sup => d.max(suffix),
                    Accumulator::DiscountedSum(lambda) => {
                        if suffix.is_infinite() {
                            ExtValue::Infinite
                        } else {
                            d + suffix.scale(lambda)
                        }
                    }
                    _ => unreachable!("scalar_value only handles summary-free accumulators"),
                }
            };
            inf = Some(match inf {
                None => combined,
                Some(best) => best.min(combined),
            });
            if inf.as_ref().is_some_and(ExtValue::is_zero) {
                break;
            }
        }
        let inf = inf.expect("non-blocking: Player 2 always has a move");
        sup = Some(match sup {
            None => inf,
            Some(best) => best.max(inf),
        });
        if sup.as_ref().is_some_and(ExtValue::is_infinite) {
            break;
        }
    }
    let value = sup.expect("non-blocking: Player 1 always has a move");
    memo.insert((s, t, depth), value.clone());
    Ok(value)
}

/// Maximum-lead suffix value with the current lead as explicit summary:
/// `V_j(s, t, δ) = sup_x inf_y max(|δ'|, V_{j-1}(s', t', δ'))` with
/// `δ' = δ + x - y`.
#[allow(clippy::too_many_arguments)]
fn lead_value(
    sys: &WeightedTransitionSystem,
    m: &TraceMetric,
    s: StateId,
    t: StateId,
    lead: Rational,
    depth: usize,
    memo: &mut HashMap<(StateId, StateId, usize, Rational), ExtValue>,
    budget: &mut Budget,
) -> Result<ExtValue, GameError> {
    budget.spend()?;
    if depth == 0 {
        return Ok(ExtValue::zero());
    }
    let key = (s, t, depth, lead.clone());
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let mut sup: Option<ExtValue> = None;
    for move1 in sys.outgoing(s) {
        let mut inf: Option<ExtValue> = None;
        for move2 in sys.outgoing(t) {
            let combined = if m.ground().eval(&move1.weight, &move2.weight).is_infinite() {
                ExtValue::Infinite
            } else {
                let shifted = &lead + &move1.weight.value - &move2.weight.value;
                let here = ExtValue::from_abs(&shifted);
                let suffix = lead_value(
                    sys,
                    m,
                    move1.target,
                    move2.target,
                    shifted,
                    depth - 1,
                    memo,
                    budget,
                )?;
                here.max(suffix)
            };
            inf = Some(match inf {
                None => combined,
                Some(best) => best.min(combined),
            });
            if inf.as_ref().is_some_and(ExtValue::is_zero) {
                break;
            }
        }
        let inf = inf.expect("non-blocking: Player 2 always has a move");
        sup = Some(match sup {
            None => inf,
            Some(best) => best.max(inf),
        });
        if sup.as_ref().is_some_and(ExtValue::is_infinite) {
            break;
        }
    }
    let value = sup.expect("non-blocking: Player 1 always has a move");
    memo.insert(key, value.clone());
    Ok(value)
}

/// Plain game-tree search: builds the weight sequences move by move and
/// evaluates the truncated metric at the leaves. Exponential; the reference
/// semantics against which the memoized searches are checked, and the only
/// route for the limit average.
#[allow(clippy::too_many_arguments)]
fn search_value(
    sys: &WeightedTransitionSystem,
    m: &TraceMetric,
    s: StateId,
    t: StateId,
    remaining: usize,
    w1: &mut Vec<Weight>,
    w2: &mut Vec<Weight>,
    budget: &mut Budget,
) -> Result<ExtValue, GameError> {
    budget.spend()?;
    if remaining == 0 {
        let k = w1.len();
        return Ok(m.eval_truncated(w1, w2, k)?);
    }
    let mut sup: Option<ExtValue> = None;
    for move1 in sys.outgoing(s) {
        w1.push(move1.weight.clone());
        let mut inf: Option<ExtValue> = None;
        for move2 in sys.outgoing(t) {
            w2.push(move2.weight.clone());
            let v = search_value(
                sys,
                m,
                move1.target,
                move2.target,
                remaining - 1,
                w1,
                w2,
                budget,
            );
            w2.pop();
            let v = v?;
            inf = Some(match inf {
                None => v,
                Some(best) => best.min(v),
            });
        }
        w1.pop();
        let inf = inf.expect("non-blocking: Player 2 always has a move");
        sup = Some(match sup {
            None => inf,
            Some(best) => best.max(inf),
        });
    }
    Ok(sup.expect("non-blocking: Player 1 always has a move"))
}

/// Depth-`k` game value computed by the unmemoized reference search.
pub fn bounded_value_search(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    m: &TraceMetric,
    k: usize,
    limits: &OracleLimits,
) -> Result<ExtValue, GameError> {
    check_metric_compat(sys, m)?;
    let mut budget = Budget::new(limits);
    let mut w1 = Vec::with_capacity(k);
    let mut w2 = Vec::with_capacity(k);
    search_value(sys, m, s, t, k, &mut w1, &mut w2, &mut budget)
}

fn weight_sequences(
    sys: &WeightedTransitionSystem,
    from: StateId,
    k: usize,
    budget: &mut Budget,
) -> Result<Vec<Vec<Weight>>, GameError> {
    fn go(
        sys: &WeightedTransitionSystem,
        at: StateId,
        remaining: usize,
        acc: &mut Vec<Weight>,
        out: &mut Vec<Vec<Weight>>,
        budget: &mut Budget,
    ) -> Result<(), GameError> {
        budget.spend()?;
        if remaining == 0 {
            out.push(acc.clone());
            return Ok(());
        }
        for t in sys.outgoing(at) {
            acc.push(t.weight.clone());
            go(sys, t.target, remaining - 1, acc, out, budget)?;
            acc.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut acc = Vec::with_capacity(k);
    go(sys, from, k, &mut acc, &mut out, budget)?;
    Ok(out)
}

/// The depth-`k` 1-blind value: a blind Player-1 strategy is exactly a path,
/// and Player 2's best response to a known path is a path, so this is
/// `max` over length-`k` weight sequences from `s` of `min` over length-`k`
/// weight sequences from `t` of the truncated metric.
pub fn bounded_blind_value(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    m: &TraceMetric,
    k: usize,
    limits: &OracleLimits,
) -> Result<ExtValue, GameError> {
    check_metric_compat(sys, m)?;
    let mut budget = Budget::new(limits);
    let replies = weight_sequences(sys, t, k, &mut budget)?;
    let mut sup = ExtValue::zero();
    let challenges = weight_sequences(sys, s, k, &mut budget)?;
    for w1 in &challenges {
        let mut inf: Option<ExtValue> = None;
        for w2 in &replies {
            budget.spend()?;
            let v = m.eval_truncated(w1, w2, k)?;
            inf = Some(match inf {
                None => v,
                Some(best) => best.min(v),
            });
            if inf.as_ref().is_some_and(ExtValue::is_zero) {
                break;
            }
        }
        sup = sup.max(inf.expect("non-blocking: reply set is nonempty"));
        if sup.is_infinite() {
            break;
        }
    }
    Ok(sup)
}
