//! Ultimately periodic traces: a finite prefix followed by a repeating cycle.
//!
//! Construction through [`LassoTrace::new`] normalizes to the canonical form
//! (shortest prefix, primitive cycle), so structural equality of normalized
//! traces coincides with equality of their infinite unrollings. [`align`]
//! rewrites a pair to a shared prefix length and cycle length so that
//! index-wise distance formulas apply; its outputs are intentionally left
//! unnormalized.

use crate::rational::parse_rational;
use crate::wts::{LassoPath, Weight};
use num::integer::lcm;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LassoError {
    #[error("cycle must be nonempty")]
    EmptyCycle,
    #[error("invalid lasso literal {input:?}: {reason}")]
    BadLiteral { input: String, reason: String },
}

/// An infinite weight sequence `prefix · cycle^ω`, held in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoTrace {
    prefix: Vec<Weight>,
    cycle: Vec<Weight>,
}

impl LassoTrace {
    /// Builds a trace and normalizes it: the cycle is reduced to its primitive
    /// root and the prefix is shortened as long as its last element matches
    /// the element the cycle would produce there.
    pub fn new(prefix: Vec<Weight>, cycle: Vec<Weight>) -> Result<Self, LassoError> {
        if cycle.is_empty() {
            return Err(LassoError::EmptyCycle);
        }
        let mut trace = LassoTrace { prefix, cycle };
        trace.normalize();
        Ok(trace)
    }

    /// Builds a trace without normalizing. Used by [`align`], whose outputs
    /// must keep their stated lengths. Compare such traces with
    /// [`LassoTrace::trace_eq`], not `==`.
    pub(crate) fn from_raw(prefix: Vec<Weight>, cycle: Vec<Weight>) -> Self {
        debug_assert!(!cycle.is_empty());
        LassoTrace { prefix, cycle }
    }

    fn normalize(&mut self) {
        // Primitive cycle root: smallest divisor period.
        let c = self.cycle.len();
        for d in 1..=c {
            if !c.is_multiple_of(d) {
                continue;
            }
            if (d..c).all(|i| self.cycle[i] == self.cycle[i % d]) {
                self.cycle.truncate(d);
                break;
            }
        }
        // Fold the prefix tail into the cycle while it agrees with it.
        while let Some(last) = self.prefix.last() {
            if last == self.cycle.last().expect("cycle nonempty") {
                self.prefix.pop();
                let w = self.cycle.pop().expect("cycle nonempty");
                self.cycle.insert(0, w);
            } else {
                break;
            }
        }
    }

    pub fn prefix(&self) -> &[Weight] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Weight] {
        &self.cycle
    }

    /// The weight at unrolled index `j`.
    pub fn at(&self, j: usize) -> &Weight {
        if j < self.prefix.len() {
            &self.prefix[j]
        } else {
            &self.cycle[(j - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The first `n` weights of the unrolling.
    pub fn unroll(&self, n: usize) -> Vec<Weight> {
        (0..n).map(|j| self.at(j).clone()).collect()
    }

    /// The tail `σ^1`: the trace with its first element removed.
    pub fn tail(&self) -> LassoTrace {
        if self.prefix.is_empty() {
            let mut cycle = self.cycle.clone();
            cycle.rotate_left(1);
            LassoTrace::new(Vec::new(), cycle).expect("cycle stays nonempty")
        } else {
            LassoTrace::new(self.prefix[1..].to_vec(), self.cycle.clone()).expect("cycle unchanged")
        }
    }

    /// True iff the unrollings agree at every index.
    pub fn trace_eq(&self, other: &LassoTrace) -> bool {
        self.clone().normalized() == other.clone().normalized()
    }

    pub fn normalized(mut self) -> LassoTrace {
        self.normalize();
        self
    }

    pub fn has_labels(&self) -> bool {
        self.prefix
            .iter()
            .chain(&self.cycle)
            .all(|w| w.label.is_some())
    }

    /// Parses a lasso literal `prefix | cycle`, each side a comma-separated
    /// list of `label:weight` items (or bare weights for unlabeled traces).
    /// The prefix may be empty; the cycle may not.
    pub fn parse(text: &str) -> Result<Self, LassoError> {
        let bad = |reason: &str| LassoError::BadLiteral {
            input: text.to_string(),
            reason: reason.to_string(),
        };
        let (prefix_part, cycle_part) = text
            .split_once('|')
            .ok_or_else(|| bad("expected `prefix | cycle`"))?;
        let parse_side = |side: &str| -> Result<Vec<Weight>, LassoError> {
            let side = side.trim();
            if side.is_empty() {
                return Ok(Vec::new());
            }
            side.split(',')
                .map(|item| {
                    let item = item.trim();
                    let (label, value_text) = match item.rsplit_once(':') {
                        Some((l, v)) => (Some(l.trim().to_string()), v.trim()),
                        None => (None, item),
                    };
                    let value = parse_rational(value_text)
                        .map_err(|e| bad(&format!("weight {value_text:?}: {}", e.reason)))?;
                    Ok(Weight { label, value })
                })
                .collect()
        };
        let prefix = parse_side(prefix_part)?;
        let cycle = parse_side(cycle_part)?;
        if cycle.is_empty() {
            return Err(bad("cycle side is empty"));
        }
        LassoTrace::new(prefix, cycle)
    }
}

/// The trace of a lasso path: step weights of its prefix and cycle,
/// normalized like any other trace.
pub fn trace_of_lasso_path(path: &LassoPath) -> LassoTrace {
    LassoTrace::new(path.prefix().weights(), path.cycle().weights())
        .expect("lasso cycle is nonempty")
}

/// Rewrites two traces so both have prefix length `max(|a.prefix|, |b.prefix|)`
/// and cycle length `lcm(|a.cycle|, |b.cycle|)` while unrolling unchanged.
pub fn align(a: &LassoTrace, b: &LassoTrace) -> (LassoTrace, LassoTrace) {
    let p = a.prefix.len().max(b.prefix.len());
    let c = lcm(a.cycle.len(), b.cycle.len());
    let cut = |t: &LassoTrace| {
        LassoTrace::from_raw(t.unroll(p), (p..p + c).map(|j| t.at(j).clone()).collect())
    };
    (cut(a), cut(b))
}
