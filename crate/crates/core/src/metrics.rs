//! Trace distances on infinite (lasso-represented) traces.
//!
//! A [`TraceMetric`] pairs a ground (hemi)metric on single weights with an
//! accumulator over the index sequence. Evaluation on lassos is exact: after
//! aligning the two traces to a shared prefix length `P` and cycle length `C`,
//! every accumulator has a closed form over the `P + C` distinct index
//! positions (geometric series for discounting, cycle means for limit
//! averages, one period of partial sums for maximum lead).
//!
//! A label mismatch at any index makes every weighted distance infinite; the
//! guard is applied before any arithmetic, so a discount factor of zero cannot
//! mask a mismatch further along the trace.

use crate::lasso::{align, LassoTrace};
use crate::rational::{format_rational, parse_rational, rational_pow, Rational};
use crate::value::ExtValue;
use crate::wts::{Weight, WeightedTransitionSystem};
use num::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("metric {metric} requires labeled traces")]
    LabelsRequired { metric: String },
    #[error("sequences shorter than k = {k} (lengths {len_a} and {len_b})")]
    TooShort {
        k: usize,
        len_a: usize,
        len_b: usize,
    },
    #[error("discount factor {0} outside [0, 1)")]
    BadDiscount(String),
    #[error("maximum-lead accumulation requires the label-guarded weight difference ground")]
    MaxLeadGround,
    #[error("unknown metric descriptor {input:?}: {reason}")]
    BadDescriptor { input: String, reason: String },
}

/// A preorder on alphabet symbols, stored with its reflexive-transitive
/// closure so `related` is a set lookup.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelPreorder {
    declared: BTreeSet<(String, String)>,
    closed: BTreeSet<(String, String)>,
}

impl LabelPreorder {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let declared: BTreeSet<_> = pairs.into_iter().collect();
        let mut closed = declared.clone();
        loop {
            let mut grew = false;
            let snapshot: Vec<_> = closed.iter().cloned().collect();
            for (a, b) in &snapshot {
                for (c, d) in &snapshot {
                    if b == c && closed.insert((a.clone(), d.clone())) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        LabelPreorder { declared, closed }
    }

    pub fn identity() -> Self {
        LabelPreorder::new(Vec::new())
    }

    /// `a ⊑ b`; reflexivity is implicit.
    pub fn related(&self, a: &str, b: &str) -> bool {
        a == b || self.closed.contains(&(a.to_string(), b.to_string()))
    }

    pub fn declared_pairs(&self) -> impl Iterator<Item = &(String, String)> {
        self.declared.iter()
    }
}

/// Ground distance on single weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundMetric {
    /// 0 if the weights are identical, 1 otherwise.
    Hamming,
    /// `|x.value − y.value|` when the labels agree, ∞ otherwise.
    GuardedDiff,
    /// 0 if the weights are identical, ∞ otherwise.
    DiscreteEq,
    /// 0 if labels are preorder-related and the values are equal, ∞ otherwise.
    Preorder(LabelPreorder),
}

impl GroundMetric {
    pub fn eval(&self, x: &Weight, y: &Weight) -> ExtValue {
        match self {
            GroundMetric::Hamming => {
                if x == y {
                    ExtValue::zero()
                } else {
                    ExtValue::Finite(Rational::one())
                }
            }
            GroundMetric::GuardedDiff => {
                if x.same_label(y) {
                    ExtValue::from_abs(&(&x.value - &y.value))
                } else {
                    ExtValue::Infinite
                }
            }
            GroundMetric::DiscreteEq => {
                if x == y {
                    ExtValue::zero()
                } else {
                    ExtValue::Infinite
                }
            }
            GroundMetric::Preorder(pre) => match (&x.label, &y.label) {
                (Some(a), Some(b)) if pre.related(a, b) && x.value == y.value => ExtValue::zero(),
                _ => ExtValue::Infinite,
            },
        }
    }

    fn requires_labels(&self) -> bool {
        matches!(self, GroundMetric::Preorder(_))
    }
}

/// How per-index ground values are folded into a trace distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Accumulator {
    /// 0 if every index has ground distance 0, ∞ otherwise.
    Discrete,
    /// Supremum of the ground distances.
    Sup,
    /// `Σ_j λ^j d_j` for a discount factor `0 ≤ λ < 1`.
    DiscountedSum(Rational),
    /// `liminf_j (1/j) Σ_{i<j} d_i`; the cycle mean on lassos.
    LimAvg,
    /// Supremum of `|Σ_{i≤j} x_i − Σ_{i≤j} y_i|` over all indices.
    MaxLead,
}

/// A named, parameterized trace distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMetric {
    accumulator: Accumulator,
    ground: GroundMetric,
}

impl TraceMetric {
    pub fn new(accumulator: Accumulator, ground: GroundMetric) -> Result<Self, MetricError> {
        if let Accumulator::DiscountedSum(lambda) = &accumulator {
            if lambda.is_negative() || *lambda >= Rational::one() {
                return Err(MetricError::BadDiscount(format_rational(lambda)));
            }
        }
        if matches!(accumulator, Accumulator::MaxLead)
            && !matches!(ground, GroundMetric::GuardedDiff)
        {
            return Err(MetricError::MaxLeadGround);
        }
        Ok(TraceMetric {
            accumulator,
            ground,
        })
    }

    pub fn discrete() -> Self {
        TraceMetric {
            accumulator: Accumulator::Discrete,
            ground: GroundMetric::DiscreteEq,
        }
    }

    pub fn discrete_pre(pre: LabelPreorder) -> Self {
        TraceMetric {
            accumulator: Accumulator::Discrete,
            ground: GroundMetric::Preorder(pre),
        }
    }

    pub fn pointwise() -> Self {
        TraceMetric {
            accumulator: Accumulator::Sup,
            ground: GroundMetric::GuardedDiff,
        }
    }

    pub fn acc_discounted(lambda: Rational) -> Result<Self, MetricError> {
        TraceMetric::new(
            Accumulator::DiscountedSum(lambda),
            GroundMetric::GuardedDiff,
        )
    }

    pub fn acc_limavg() -> Self {
        TraceMetric {
            accumulator: Accumulator::LimAvg,
            ground: GroundMetric::GuardedDiff,
        }
    }

    pub fn hamming_discounted(lambda: Rational) -> Result<Self, MetricError> {
        TraceMetric::new(Accumulator::DiscountedSum(lambda), GroundMetric::Hamming)
    }

    pub fn hamming_limavg() -> Self {
        TraceMetric {
            accumulator: Accumulator::LimAvg,
            ground: GroundMetric::Hamming,
        }
    }

    pub fn maxlead() -> Self {
        TraceMetric {
            accumulator: Accumulator::MaxLead,
            ground: GroundMetric::GuardedDiff,
        }
    }

    pub fn accumulator(&self) -> &Accumulator {
        &self.accumulator
    }

    pub fn ground(&self) -> &GroundMetric {
        &self.ground
    }

    fn check_labels(&self, traces: &[&LassoTrace]) -> Result<(), MetricError> {
        if self.ground.requires_labels() && !traces.iter().all(|t| t.has_labels()) {
            return Err(MetricError::LabelsRequired {
                metric: self.to_string(),
            });
        }
        Ok(())
    }

    fn check_weights_labeled(&self, seqs: &[&[Weight]], k: usize) -> Result<(), MetricError> {
        if self.ground.requires_labels()
            && !seqs
                .iter()
                .all(|s| s[..k].iter().all(|w| w.label.is_some()))
        {
            return Err(MetricError::LabelsRequired {
                metric: self.to_string(),
            });
        }
        Ok(())
    }

    /// Exact distance between the unrolled infinite traces.
    pub fn eval_exact(&self, a: &LassoTrace, b: &LassoTrace) -> Result<ExtValue, MetricError> {
        self.check_labels(&[a, b])?;
        let (aa, bb) = align(a, b);
        let p = aa.prefix().len();
        let c = aa.cycle().len();
        // One ground value per distinct index position; any ∞ decides the
        // whole distance.
        let mut grounds = Vec::with_capacity(p + c);
        for j in 0..p + c {
            match self.ground.eval(aa.at(j), bb.at(j)) {
                ExtValue::Infinite => return Ok(ExtValue::Infinite),
                ExtValue::Finite(d) => grounds.push(d),
            }
        }
        Ok(match &self.accumulator {
            Accumulator::Discrete => {
                if grounds.iter().all(Rational::is_zero) {
                    ExtValue::zero()
                } else {
                    ExtValue::Infinite
                }
            }
            Accumulator::Sup => ExtValue::finite(
                grounds
                    .iter()
                    .cloned()
                    .fold(Rational::zero(), Rational::max),
            ),
            Accumulator::DiscountedSum(lambda) => {
                let mut head = Rational::zero();
                for (j, d) in grounds[..p].iter().enumerate() {
                    head += rational_pow(lambda, j) * d;
                }
                let mut period = Rational::zero();
                for (i, d) in grounds[p..].iter().enumerate() {
                    period += rational_pow(lambda, i) * d;
                }
                let tail =
                    rational_pow(lambda, p) * period / (Rational::one() - rational_pow(lambda, c));
                ExtValue::finite(head + tail)
            }
            Accumulator::LimAvg => {
                let sum: Rational = grounds[p..].iter().sum();
                ExtValue::finite(sum / Rational::from_integer(c.into()))
            }
            Accumulator::MaxLead => {
                let diffs: Vec<Rational> = (0..p + c)
                    .map(|j| &aa.at(j).value - &bb.at(j).value)
                    .collect();
                let drift: Rational = diffs[p..].iter().sum();
                if !drift.is_zero() {
                    return Ok(ExtValue::Infinite);
                }
                let mut lead = Rational::zero();
                let mut best = Rational::zero();
                for d in &diffs {
                    lead += d;
                    best = best.max(lead.abs());
                }
                ExtValue::finite(best)
            }
        })
    }

    /// The metric's formula restricted to indices `< k`.
    pub fn eval_truncated(
        &self,
        a: &[Weight],
        b: &[Weight],
        k: usize,
    ) -> Result<ExtValue, MetricError> {
        if a.len() < k || b.len() < k {
            return Err(MetricError::TooShort {
                k,
                len_a: a.len(),
                len_b: b.len(),
            });
        }
        self.check_weights_labeled(&[a, b], k)?;
        let mut grounds = Vec::with_capacity(k);
        for j in 0..k {
            match self.ground.eval(&a[j], &b[j]) {
                ExtValue::Infinite => return Ok(ExtValue::Infinite),
                ExtValue::Finite(d) => grounds.push(d),
            }
        }
        Ok(match &self.accumulator {
            Accumulator::Discrete => {
                if grounds.iter().all(Rational::is_zero) {
                    ExtValue::zero()
                } else {
                    ExtValue::Infinite
                }
            }
            Accumulator::Sup => ExtValue::finite(
                grounds
                    .iter()
                    .cloned()
                    .fold(Rational::zero(), Rational::max),
            ),
            Accumulator::DiscountedSum(lambda) => {
                let mut sum = Rational::zero();
                for (j, d) in grounds.iter().enumerate() {
                    sum += rational_pow(lambda, j) * d;
                }
                ExtValue::finite(sum)
            }
            Accumulator::LimAvg => {
                if k == 0 {
                    ExtValue::zero()
                } else {
                    let sum: Rational = grounds.iter().sum();
                    ExtValue::finite(sum / Rational::from_integer(k.into()))
                }
            }
            Accumulator::MaxLead => {
                let mut lead = Rational::zero();
                let mut best = Rational::zero();
                for j in 0..k {
                    lead += &a[j].value - &b[j].value;
                    best = best.max(lead.abs());
                }
                ExtValue::finite(best)
            }
        })
    }

    /// True iff `(a, b)` witnesses that this metric is not one-step
    /// indiscriminate: equal first elements but strictly positive distance in
    /// both directions.
    pub fn is_one_step_discriminating_witness(&self, a: &LassoTrace, b: &LassoTrace) -> bool {
        a.at(0) == b.at(0)
            && self.eval_exact(a, b).is_ok_and(|v| !v.is_zero())
            && self.eval_exact(b, a).is_ok_and(|v| !v.is_zero())
    }

    /// Max ground distance over all ordered pairs of transition weights; the
    /// one-step bound `W` used by truncation certificates.
    pub fn max_transition_ground(&self, sys: &WeightedTransitionSystem) -> ExtValue {
        let mut best = ExtValue::zero();
        for t1 in sys.transitions() {
            for t2 in sys.transitions() {
                best = best.max(self.ground.eval(&t1.weight, &t2.weight));
            }
        }
        best
    }

    /// Parses a metric descriptor: `discrete`, `discrete-pre[:a<=b,...]`,
    /// `hamming-davg`, `hamming-disc:λ`, `pointwise`, `acc-disc:λ`,
    /// `acc-lavg`, `maxlead`, with `λ` as `p/q` or a decimal.
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let bad = |reason: &str| MetricError::BadDescriptor {
            input: text.to_string(),
            reason: reason.to_string(),
        };
        let (name, arg) = match text.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (text.trim(), None),
        };
        let lambda = |arg: Option<&str>| -> Result<Rational, MetricError> {
            let text = arg.ok_or_else(|| bad("missing discount factor"))?;
            parse_rational(text).map_err(|e| bad(&e.reason))
        };
        match name {
            "discrete" => {
                if arg.is_some() {
                    return Err(bad("discrete takes no parameter"));
                }
                Ok(TraceMetric::discrete())
            }
            "discrete-pre" => {
                let pre = match arg {
                    None | Some("") => LabelPreorder::identity(),
                    Some(items) => {
                        let mut pairs = Vec::new();
                        for item in items.split(',') {
                            let (a, b) = item
                                .split_once("<=")
                                .ok_or_else(|| bad("preorder items look like a<=b"))?;
                            pairs.push((a.trim().to_string(), b.trim().to_string()));
                        }
                        LabelPreorder::new(pairs)
                    }
                };
                Ok(TraceMetric::discrete_pre(pre))
            }
            "hamming-davg" => Ok(TraceMetric::hamming_limavg()),
            "hamming-disc" => TraceMetric::hamming_discounted(lambda(arg)?),
            "pointwise" => Ok(TraceMetric::pointwise()),
            "acc-disc" => TraceMetric::acc_discounted(lambda(arg)?),
            "acc-lavg" => Ok(TraceMetric::acc_limavg()),
            "maxlead" => Ok(TraceMetric::maxlead()),
            _ => Err(bad("unknown metric name")),
        }
    }
}

impl fmt::Display for TraceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.accumulator, &self.ground) {
            (Accumulator::Discrete, GroundMetric::DiscreteEq) => write!(f, "discrete"),
            (Accumulator::Discrete, GroundMetric::Preorder(pre)) => {
                let pairs: Vec<String> = pre
                    .declared_pairs()
                    .map(|(a, b)| format!("{a}<={b}"))
                    .collect();
                if pairs.is_empty() {
                    write!(f, "discrete-pre")
                } else {
                    write!(f, "discrete-pre:{}", pairs.join(","))
                }
            }
            (Accumulator::LimAvg, GroundMetric::Hamming) => write!(f, "hamming-davg"),
            (Accumulator::DiscountedSum(l), GroundMetric::Hamming) => {
                write!(f, "hamming-disc:{}", format_rational(l))
            }
            (Accumulator::Sup, GroundMetric::GuardedDiff) => write!(f, "pointwise"),
            (Accumulator::DiscountedSum(l), GroundMetric::GuardedDiff) => {
                write!(f, "acc-disc:{}", format_rational(l))
            }
            (Accumulator::LimAvg, GroundMetric::GuardedDiff) => write!(f, "acc-lavg"),
            (Accumulator::MaxLead, _) => write!(f, "maxlead"),
            (acc, ground) => write!(f, "custom({acc:?}, {ground:?})"),
        }
    }
}
