//! Branching distances as least fixed points.
//!
//! For a trace metric with a recursive one-step characterization there is a
//! step function `F(x, y, ·)` on a lattice and a projection `g` such that the
//! branching distance is `g` of the least fixed point of
//!
//! ```text
//! I(h)(s, t) = sup over s --x--> s' of inf over t --y--> t' of F(x, y, h(s', t'))
//! ```
//!
//! Kleene iteration from the bottom table computes that fixed point. The
//! scalar instances (discrete, refined discrete, pointwise, discounted) work
//! directly in `[0, ∞]`; the maximum-lead instance needs the running lead as
//! memory, realized here as finite tables over the leads reachable within a
//! user-chosen cap, bracketed by an optimistic and a pessimistic reading of
//! the capped-out region. Limit-average metrics have no such one-step
//! characterization and are rejected; the bounded game oracle covers them.
//!
//! Sweeps are Jacobi-style: every cell of the next table is computed from an
//! immutable snapshot of the previous one, so parallel and sequential sweeps
//! agree cell for cell.

use crate::metrics::{Accumulator, GroundMetric, LabelPreorder, MetricError, TraceMetric};
use crate::rational::{format_rational, Rational};
use crate::value::ExtValue;
use crate::wts::{StateId, Weight, WeightedTransitionSystem};
use num::{One, Signed, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixpointError {
    #[error("no recursive iterator for limit-average; use oracle")]
    NoIterator,
    #[error("fixed point not reached within {sweeps} sweeps")]
    NotConverged { sweeps: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Lattice element: join/meet for the sup/inf over moves, `le` for the
/// monotone-chain order.
pub trait LatticeElem: Clone + PartialEq + std::fmt::Debug {
    fn join(&self, other: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;
    fn le(&self, other: &Self) -> bool;
}

impl LatticeElem for ExtValue {
    fn join(&self, other: &Self) -> Self {
        self.clone().max(other.clone())
    }

    fn meet(&self, other: &Self) -> Self {
        self.clone().min(other.clone())
    }

    fn le(&self, other: &Self) -> bool {
        self <= other
    }
}

/// One instance of the fixed-point recursion: lattice bottom, step function
/// `F`, projection `g`, and the termination data for its value set.
pub trait DistanceIterator: Sync {
    type Elem: LatticeElem + Send + Sync;

    fn bottom(&self, pair: (StateId, StateId)) -> Self::Elem;

    /// `F(x, y, z)` where `z` is the current value at the successor pair.
    /// `pair` identifies the cell being computed; scalar instances ignore it.
    fn step(&self, pair: (StateId, StateId), x: &Weight, y: &Weight, z: &Self::Elem) -> Self::Elem;

    /// `g`: projection from the lattice to `[0, ∞]`.
    fn project(&self, z: &Self::Elem) -> ExtValue;

    /// Sweep budget within which a finite-valued monotone iteration must
    /// stabilize; `None` when the value set is not finite (discounting).
    fn sweep_bound(&self, sys: &WeightedTransitionSystem) -> Option<usize>;

    /// Distance between successive cell values, for ε-stopping. `None`
    /// when the instance has no contraction certificate.
    fn gap(&self, _old: &Self::Elem, _new: &Self::Elem) -> Option<ExtValue> {
        None
    }

    /// Sup-norm change below which the iterate is within ε of the fixed
    /// point. `None` when no such certificate exists.
    fn eps_threshold(&self, _eps: &Rational) -> Option<Rational> {
        None
    }
}

/// A total map from state pairs to values, the lattice `L^(S×S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairFunction<E> {
    n: usize,
    cells: Vec<E>,
}

impl<E: Clone> PairFunction<E> {
    pub fn from_fn(
        sys: &WeightedTransitionSystem,
        mut f: impl FnMut(StateId, StateId) -> E,
    ) -> Self {
        let n = sys.state_count();
        let mut cells = Vec::with_capacity(n * n);
        for s in sys.states() {
            for t in sys.states() {
                cells.push(f(s, t));
            }
        }
        PairFunction { n, cells }
    }

    pub fn get(&self, s: StateId, t: StateId) -> &E {
        &self.cells[s.index() * self.n + t.index()]
    }

    pub fn map<T: Clone>(&self, f: impl FnMut(&E) -> T) -> PairFunction<T> {
        PairFunction {
            n: self.n,
            cells: self.cells.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((StateId, StateId), &E)> {
        let n = self.n as u32;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, e)| ((StateId(i as u32 / n), StateId(i as u32 % n)), e))
    }
}

fn cell_value<I: DistanceIterator>(
    spec: &I,
    sys: &WeightedTransitionSystem,
    h: &PairFunction<I::Elem>,
    s: StateId,
    t: StateId,
) -> I::Elem {
    let mut sup: Option<I::Elem> = None;
    for move1 in sys.outgoing(s) {
        let mut inf: Option<I::Elem> = None;
        for move2 in sys.outgoing(t) {
            let v = spec.step(
                (s, t),
                &move1.weight,
                &move2.weight,
                h.get(move1.target, move2.target),
            );
            inf = Some(match inf {
                None => v,
                Some(best) => best.meet(&v),
            });
        }
        let inf = inf.expect("non-blocking: inf over a nonempty set");
        sup = Some(match sup {
            None => inf,
            Some(best) => best.join(&inf),
        });
    }
    sup.expect("non-blocking: sup over a nonempty set")
}

/// One application of `I`: a whole-table Jacobi sweep against the snapshot
/// `h`.
pub fn apply_iterator<I: DistanceIterator>(
    spec: &I,
    sys: &WeightedTransitionSystem,
    h: &PairFunction<I::Elem>,
) -> PairFunction<I::Elem> {
    PairFunction::from_fn(sys, |s, t| cell_value(spec, sys, h, s, t))
}

/// Same sweep with cells evaluated in parallel; bit-identical to
/// [`apply_iterator`].
pub fn apply_iterator_parallel<I: DistanceIterator>(
    spec: &I,
    sys: &WeightedTransitionSystem,
    h: &PairFunction<I::Elem>,
) -> PairFunction<I::Elem> {
    let n = sys.state_count();
    let cells: Vec<I::Elem> = (0..n * n)
        .into_par_iter()
        .map(|i| {
            cell_value(
                spec,
                sys,
                h,
                StateId((i / n) as u32),
                StateId((i % n) as u32),
            )
        })
        .collect();
    PairFunction { n, cells }
}

/// When to stop the Kleene chain.
#[derive(Debug, Clone, Default)]
pub struct StopRule {
    /// Certified accuracy for contraction instances (discounting).
    pub eps: Option<Rational>,
    /// Overrides the instance's own sweep bound.
    pub max_sweeps: Option<usize>,
    /// Evaluate sweeps with rayon; results are identical either way.
    pub parallel: bool,
}

impl StopRule {
    pub fn exact() -> Self {
        StopRule::default()
    }

    pub fn converged(eps: Rational) -> Self {
        StopRule {
            eps: Some(eps),
            ..StopRule::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixpointStatus {
    /// Two successive tables were equal: the least fixed point itself.
    Exact,
    /// Sup-norm movement fell below the contraction threshold; reported
    /// values under-approximate the fixed point by at most this error.
    Converged { certified_error: Rational },
    /// Sweep budget exhausted before either criterion held.
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct FixpointRun<E> {
    pub table: PairFunction<E>,
    pub iterations: usize,
    pub status: FixpointStatus,
}

const FALLBACK_SWEEP_BUDGET: usize = 10_000;

/// Kleene iteration `h_{n+1} = I(h_n)` from the bottom table.
pub fn kleene_lfp<I: DistanceIterator>(
    spec: &I,
    sys: &WeightedTransitionSystem,
    stop: &StopRule,
) -> FixpointRun<I::Elem> {
    let budget = stop
        .max_sweeps
        .or_else(|| spec.sweep_bound(sys))
        .unwrap_or(FALLBACK_SWEEP_BUDGET);
    let threshold = stop.eps.as_ref().and_then(|eps| spec.eps_threshold(eps));
    let mut h = PairFunction::from_fn(sys, |s, t| spec.bottom((s, t)));
    let mut sweeps = 0;
    loop {
        let next = if stop.parallel {
            apply_iterator_parallel(spec, sys, &h)
        } else {
            apply_iterator(spec, sys, &h)
        };
        sweeps += 1;
        if next == h {
            return FixpointRun {
                table: next,
                iterations: sweeps,
                status: FixpointStatus::Exact,
            };
        }
        if let Some(threshold) = &threshold {
            let worst = h
                .cells
                .iter()
                .zip(&next.cells)
                .map(|(old, new)| spec.gap(old, new).unwrap_or(ExtValue::Infinite))
                .max()
                .expect("at least one cell");
            if worst <= ExtValue::finite(threshold.clone()) {
                let certified_error = stop.eps.clone().expect("threshold implies eps was given");
                return FixpointRun {
                    table: next,
                    iterations: sweeps,
                    status: FixpointStatus::Converged { certified_error },
                };
            }
        }
        h = next;
        if sweeps >= budget {
            return FixpointRun {
                table: h,
                iterations: sweeps,
                status: FixpointStatus::MaxIter,
            };
        }
    }
}

// ---------------------------------------------------------------------------
// Scalar instances
// ---------------------------------------------------------------------------

/// Discrete step: `F(x, y, z) = z` when the ground distance vanishes, ∞
/// otherwise. Covers the plain and the preorder-refined discrete metric.
pub struct DiscreteIterator {
    ground: GroundMetric,
}

impl DiscreteIterator {
    pub fn new(ground: GroundMetric) -> Self {
        DiscreteIterator { ground }
    }

    pub fn apply(&self, x: &Weight, y: &Weight, z: &ExtValue) -> ExtValue {
        if self.ground.eval(x, y).is_zero() {
            z.clone()
        } else {
            ExtValue::Infinite
        }
    }
}

impl DistanceIterator for DiscreteIterator {
    type Elem = ExtValue;

    fn bottom(&self, _pair: (StateId, StateId)) -> ExtValue {
        ExtValue::zero()
    }

    fn step(&self, _pair: (StateId, StateId), x: &Weight, y: &Weight, z: &ExtValue) -> ExtValue {
        self.apply(x, y, z)
    }

    fn project(&self, z: &ExtValue) -> ExtValue {
        z.clone()
    }

    fn sweep_bound(&self, sys: &WeightedTransitionSystem) -> Option<usize> {
        // Values live in {0, ∞}.
        Some(sys.state_count() * sys.state_count() * 3 + 1)
    }
}

/// Pointwise step: `F(x, y, z) = max(d(x, y), z)`.
pub struct SupIterator {
    ground: GroundMetric,
}

impl SupIterator {
    pub fn new(ground: GroundMetric) -> Self {
        SupIterator { ground }
    }

    pub fn apply(&self, x: &Weight, y: &Weight, z: &ExtValue) -> ExtValue {
        self.ground.eval(x, y).max(z.clone())
    }
}

impl DistanceIterator for SupIterator {
    type Elem = ExtValue;

    fn bottom(&self, _pair: (StateId, StateId)) -> ExtValue {
        ExtValue::zero()
    }

    fn step(&self, _pair: (StateId, StateId), x: &Weight, y: &Weight, z: &ExtValue) -> ExtValue {
        self.apply(x, y, z)
    }

    fn project(&self, z: &ExtValue) -> ExtValue {
        z.clone()
    }

    fn sweep_bound(&self, sys: &WeightedTransitionSystem) -> Option<usize> {
        let mut values: BTreeSet<ExtValue> = BTreeSet::new();
        values.insert(ExtValue::zero());
        values.insert(ExtValue::Infinite);
        for t1 in sys.transitions() {
            for t2 in sys.transitions() {
                values.insert(self.ground.eval(&t1.weight, &t2.weight));
            }
        }
        Some(sys.state_count() * sys.state_count() * (values.len() + 1) + 1)
    }
}

/// Discounted step: `F(x, y, z) = d(x, y) + λz`, with ∞ absorbing so that a
/// forced mismatch downstream surfaces even for λ = 0.
pub struct DiscountedIterator {
    ground: GroundMetric,
    lambda: Rational,
}

impl DiscountedIterator {
    pub fn new(ground: GroundMetric, lambda: Rational) -> Self {
        DiscountedIterator { ground, lambda }
    }

    pub fn apply(&self, x: &Weight, y: &Weight, z: &ExtValue) -> ExtValue {
        let d = self.ground.eval(x, y);
        if d.is_infinite() || z.is_infinite() {
            ExtValue::Infinite
        } else {
            d + z.scale(&self.lambda)
        }
    }
}

impl DistanceIterator for DiscountedIterator {
    type Elem = ExtValue;

    fn bottom(&self, _pair: (StateId, StateId)) -> ExtValue {
        ExtValue::zero()
    }

    fn step(&self, _pair: (StateId, StateId), x: &Weight, y: &Weight, z: &ExtValue) -> ExtValue {
        self.apply(x, y, z)
    }

    fn project(&self, z: &ExtValue) -> ExtValue {
        z.clone()
    }

    fn sweep_bound(&self, _sys: &WeightedTransitionSystem) -> Option<usize> {
        None
    }

    fn gap(&self, old: &ExtValue, new: &ExtValue) -> Option<ExtValue> {
        match (old, new) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => Some(ExtValue::from_abs(&(b - a))),
            (ExtValue::Infinite, ExtValue::Infinite) => Some(ExtValue::zero()),
            _ => Some(ExtValue::Infinite),
        }
    }

    fn eps_threshold(&self, eps: &Rational) -> Option<Rational> {
        if self.lambda.is_zero() {
            // λ = 0 stabilizes exactly after two sweeps.
            None
        } else {
            Some(eps * (Rational::one() - &self.lambda) / &self.lambda)
        }
    }
}

// ---------------------------------------------------------------------------
// Maximum lead
// ---------------------------------------------------------------------------

/// Reading of leads beyond the cap: `Over` values them ∞ (the fixed point
/// over-approximates the true one), `Under` values them `|δ|`, the floor
/// every continuation pays at that lead (under-approximation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeadCapPolicy {
    Over,
    Under,
}

/// A lattice element of the maximum-lead instance: distances indexed by the
/// reachable leads of one state pair, total via the cap policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadTable {
    cap: Rational,
    policy: LeadCapPolicy,
    entries: BTreeMap<Rational, ExtValue>,
}

impl LeadTable {
    fn read(&self, lead: &Rational) -> ExtValue {
        if let Some(v) = self.entries.get(lead) {
            return v.clone();
        }
        debug_assert!(
            lead.abs() > self.cap,
            "in-cap lead {} missing from its table",
            format_rational(lead)
        );
        match self.policy {
            LeadCapPolicy::Over => ExtValue::Infinite,
            LeadCapPolicy::Under => ExtValue::from_abs(lead),
        }
    }
}

impl LatticeElem for LeadTable {
    fn join(&self, other: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v.clone().max(other.read(k))))
            .collect();
        LeadTable {
            cap: self.cap.clone(),
            policy: self.policy,
            entries,
        }
    }

    fn meet(&self, other: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v.clone().min(other.read(k))))
            .collect();
        LeadTable {
            cap: self.cap.clone(),
            policy: self.policy,
            entries,
        }
    }

    fn le(&self, other: &Self) -> bool {
        self.entries.iter().all(|(k, v)| *v <= other.read(k))
    }
}

/// Maximum-lead instance bound to one system: per-pair reachable lead sets
/// within the cap, computed once up front.
pub struct MaxLeadIterator {
    cap: Rational,
    policy: LeadCapPolicy,
    domains: HashMap<(StateId, StateId), BTreeSet<Rational>>,
}

impl MaxLeadIterator {
    /// Explores the synchronized-step lead graph from every pair at lead 0,
    /// clipping at `|lead| ≤ cap`.
    pub fn new(sys: &WeightedTransitionSystem, cap: Rational, policy: LeadCapPolicy) -> Self {
        assert!(!cap.is_negative(), "lead cap must be nonnegative");
        let mut domains: HashMap<(StateId, StateId), BTreeSet<Rational>> = HashMap::new();
        let mut queue: VecDeque<(StateId, StateId, Rational)> = VecDeque::new();
        for s in sys.states() {
            for t in sys.states() {
                domains.entry((s, t)).or_default().insert(Rational::zero());
                queue.push_back((s, t, Rational::zero()));
            }
        }
        while let Some((s, t, lead)) = queue.pop_front() {
            for move1 in sys.outgoing(s) {
                for move2 in sys.outgoing(t) {
                    if !move1.weight.same_label(&move2.weight) {
                        continue;
                    }
                    let shifted = &lead + &move1.weight.value - &move2.weight.value;
                    if shifted.abs() > cap {
                        continue;
                    }
                    let entry = domains.entry((move1.target, move2.target)).or_default();
                    if entry.insert(shifted.clone()) {
                        queue.push_back((move1.target, move2.target, shifted));
                    }
                }
            }
        }
        MaxLeadIterator {
            cap,
            policy,
            domains,
        }
    }

    fn domain(&self, pair: (StateId, StateId)) -> &BTreeSet<Rational> {
        self.domains.get(&pair).expect("domains cover all pairs")
    }
}

impl DistanceIterator for MaxLeadIterator {
    type Elem = LeadTable;

    fn bottom(&self, pair: (StateId, StateId)) -> LeadTable {
        let entries = self
            .domain(pair)
            .iter()
            .map(|lead| (lead.clone(), ExtValue::zero()))
            .collect();
        LeadTable {
            cap: self.cap.clone(),
            policy: self.policy,
            entries,
        }
    }

    /// `F(x, y, h)(δ) = max(|δ + x − y|, h(δ + x − y))`; a label mismatch
    /// sends the whole table to ∞.
    fn step(&self, pair: (StateId, StateId), x: &Weight, y: &Weight, z: &LeadTable) -> LeadTable {
        let mismatch = !x.same_label(y);
        let diff = &x.value - &y.value;
        let entries = self
            .domain(pair)
            .iter()
            .map(|lead| {
                let value = if mismatch {
                    ExtValue::Infinite
                } else {
                    let shifted = lead + &diff;
                    ExtValue::from_abs(&shifted).max(z.read(&shifted))
                };
                (lead.clone(), value)
            })
            .collect();
        LeadTable {
            cap: self.cap.clone(),
            policy: self.policy,
            entries,
        }
    }

    /// `g(h) = h(0)`.
    fn project(&self, z: &LeadTable) -> ExtValue {
        z.read(&Rational::zero())
    }

    fn sweep_bound(&self, sys: &WeightedTransitionSystem) -> Option<usize> {
        let total_entries: usize = self.domains.values().map(BTreeSet::len).sum();
        let mut diffs: BTreeSet<Rational> = BTreeSet::new();
        for t1 in sys.transitions() {
            for t2 in sys.transitions() {
                if t1.weight.same_label(&t2.weight) {
                    diffs.insert(&t1.weight.value - &t2.weight.value);
                }
            }
        }
        // Each entry's value is |δ + diff| for some reachable δ, or ∞.
        Some(total_entries * (diffs.len() + 2) + 2)
    }
}

// ---------------------------------------------------------------------------
// Metric dispatch
// ---------------------------------------------------------------------------

/// The recursion instance a metric maps to. Maximum lead binds to a concrete
/// system (and cap) later.
pub enum IteratorSpec {
    Discrete(DiscreteIterator),
    Sup(SupIterator),
    Discounted(DiscountedIterator),
    MaxLead,
}

/// Selects the fixed-point instance for a metric; limit-average metrics have
/// none.
pub fn iterator_for(m: &TraceMetric) -> Result<IteratorSpec, FixpointError> {
    match m.accumulator() {
        Accumulator::Discrete => Ok(IteratorSpec::Discrete(DiscreteIterator::new(
            m.ground().clone(),
        ))),
        Accumulator::Sup => Ok(IteratorSpec::Sup(SupIterator::new(m.ground().clone()))),
        Accumulator::DiscountedSum(lambda) => Ok(IteratorSpec::Discounted(
            DiscountedIterator::new(m.ground().clone(), lambda.clone()),
        )),
        Accumulator::MaxLead => Ok(IteratorSpec::MaxLead),
        Accumulator::LimAvg => Err(FixpointError::NoIterator),
    }
}

/// Knobs for the production solver.
#[derive(Debug, Clone)]
pub struct FixpointConfig {
    /// Lead cap for the maximum-lead instance.
    pub lead_cap: Rational,
    /// Certified accuracy for discounted metrics.
    pub eps: Rational,
    pub max_sweeps: Option<usize>,
    pub parallel: bool,
}

impl Default for FixpointConfig {
    fn default() -> Self {
        FixpointConfig {
            lead_cap: Rational::from_integer(16.into()),
            eps: Rational::new(1.into(), 1_000_000_000.into()),
            max_sweeps: None,
            parallel: false,
        }
    }
}

/// A computed distance: exact, or a bracket when the two cap policies of the
/// maximum-lead instance disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceValue {
    Exact(ExtValue),
    Interval { lower: ExtValue, upper: ExtValue },
}

impl DistanceValue {
    pub fn lower(&self) -> &ExtValue {
        match self {
            DistanceValue::Exact(v) => v,
            DistanceValue::Interval { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> &ExtValue {
        match self {
            DistanceValue::Exact(v) => v,
            DistanceValue::Interval { upper, .. } => upper,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixpointOutcome {
    pub values: PairFunction<DistanceValue>,
    pub iterations: usize,
    pub status: FixpointStatus,
}

/// Runs the fixed-point engine for a metric over the whole pair table.
pub fn solve_branching(
    sys: &WeightedTransitionSystem,
    m: &TraceMetric,
    cfg: &FixpointConfig,
) -> Result<FixpointOutcome, FixpointError> {
    if matches!(m.ground(), GroundMetric::Preorder(_)) && !sys.is_labeled() {
        return Err(FixpointError::Metric(MetricError::LabelsRequired {
            metric: m.to_string(),
        }));
    }
    let stop = StopRule {
        max_sweeps: cfg.max_sweeps,
        parallel: cfg.parallel,
        eps: None,
    };
    match iterator_for(m)? {
        IteratorSpec::Discrete(spec) => {
            let run = kleene_lfp(&spec, sys, &stop);
            Ok(FixpointOutcome {
                values: run.table.map(|v| DistanceValue::Exact(v.clone())),
                iterations: run.iterations,
                status: run.status,
            })
        }
        IteratorSpec::Sup(spec) => {
            let run = kleene_lfp(&spec, sys, &stop);
            Ok(FixpointOutcome {
                values: run.table.map(|v| DistanceValue::Exact(v.clone())),
                iterations: run.iterations,
                status: run.status,
            })
        }
        IteratorSpec::Discounted(spec) => {
            let stop = StopRule {
                eps: Some(cfg.eps.clone()),
                ..stop
            };
            let run = kleene_lfp(&spec, sys, &stop);
            Ok(FixpointOutcome {
                values: run.table.map(|v| DistanceValue::Exact(v.clone())),
                iterations: run.iterations,
                status: run.status,
            })
        }
        IteratorSpec::MaxLead => {
            let under = MaxLeadIterator::new(sys, cfg.lead_cap.clone(), LeadCapPolicy::Under);
            let over = MaxLeadIterator::new(sys, cfg.lead_cap.clone(), LeadCapPolicy::Over);
            let run_under = kleene_lfp(&under, sys, &stop);
            let run_over = kleene_lfp(&over, sys, &stop);
            let values = PairFunction::from_fn(sys, |s, t| {
                let lower = under.project(run_under.table.get(s, t));
                let upper = over.project(run_over.table.get(s, t));
                debug_assert!(lower <= upper, "cap policies out of order");
                if lower == upper {
                    DistanceValue::Exact(lower)
                } else {
                    DistanceValue::Interval { lower, upper }
                }
            });
            let status = match (&run_under.status, &run_over.status) {
                (FixpointStatus::Exact, FixpointStatus::Exact) => FixpointStatus::Exact,
                _ => FixpointStatus::MaxIter,
            };
            Ok(FixpointOutcome {
                values,
                iterations: run_under.iterations.max(run_over.iterations),
                status,
            })
        }
    }
}

/// Per-pair outcome of the fixed-point engine.
#[derive(Debug, Clone)]
pub struct BranchingOutcome {
    pub value: DistanceValue,
    pub iterations: usize,
    pub status: FixpointStatus,
}

/// `g(h*(s, t))` for a single pair, via [`solve_branching`].
pub fn branching_distance(
    sys: &WeightedTransitionSystem,
    m: &TraceMetric,
    s: StateId,
    t: StateId,
    cfg: &FixpointConfig,
) -> Result<BranchingOutcome, FixpointError> {
    let outcome = solve_branching(sys, m, cfg)?;
    if outcome.status == FixpointStatus::MaxIter {
        return Err(FixpointError::NotConverged {
            sweeps: outcome.iterations,
        });
    }
    Ok(BranchingOutcome {
        value: outcome.values.get(s, t).clone(),
        iterations: outcome.iterations,
        status: outcome.status,
    })
}

// ---------------------------------------------------------------------------
// Simulation (independent cross-check)
// ---------------------------------------------------------------------------

/// Greatest simulation relation by successive pair removal: `(s, t)` stays
/// while every Player-1 move has a ground-zero reply into the relation.
/// Entirely independent of the fixed-point engine; used to cross-check the
/// discrete instances.
pub fn greatest_simulation(
    sys: &WeightedTransitionSystem,
    preorder: Option<&LabelPreorder>,
) -> PairFunction<bool> {
    let ground = match preorder {
        None => GroundMetric::DiscreteEq,
        Some(pre) => GroundMetric::Preorder(pre.clone()),
    };
    let mut related = PairFunction::from_fn(sys, |_, _| true);
    loop {
        let mut changed = false;
        let snapshot = related.clone();
        related = PairFunction::from_fn(sys, |s, t| {
            if !*snapshot.get(s, t) {
                return false;
            }
            let survives = sys.outgoing(s).iter().all(|move1| {
                sys.outgoing(t).iter().any(|move2| {
                    ground.eval(&move1.weight, &move2.weight).is_zero()
                        && *snapshot.get(move1.target, move2.target)
                })
            });
            if !survives {
                changed = true;
            }
            survives
        });
        if !changed {
            return related;
        }
    }
}

/// True iff `t` simulates `s` (identical weights along the relation).
pub fn discrete_simulation_check(sys: &WeightedTransitionSystem, s: StateId, t: StateId) -> bool {
    *greatest_simulation(sys, None).get(s, t)
}
