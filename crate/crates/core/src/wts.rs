//! Weighted transition systems: finite state sets with weighted transitions,
//! finite paths, and lasso-shaped (ultimately periodic) paths.
//!
//! Systems are finite and non-blocking: every state has at least one outgoing
//! transition, so every finite path extends to an infinite one. A system is
//! either uniformly labeled (it declares an alphabet and every transition
//! carries a label from it) or uniformly unlabeled.

use crate::rational::{format_rational, parse_rational, Rational};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// Index of a state inside its system. Stable across serialization because
/// states keep their declared order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One element of the weight set: an optional discrete label plus an exact
/// rational weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Weight {
    pub label: Option<String>,
    pub value: Rational,
}

impl Weight {
    pub fn unlabeled(value: Rational) -> Self {
        Weight { label: None, value }
    }

    pub fn labeled(label: impl Into<String>, value: Rational) -> Self {
        Weight {
            label: Some(label.into()),
            value,
        }
    }

    pub fn same_label(&self, other: &Weight) -> bool {
        self.label == other.label
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{}:{}", l, format_rational(&self.value)),
            None => write!(f, "{}", format_rational(&self.value)),
        }
    }
}

/// A transition `source --weight--> target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: StateId,
    pub weight: Weight,
    pub target: StateId,
}

#[derive(Debug, Error)]
pub enum WtsError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("blocking state {0:?}")]
    BlockingState(String),
    #[error("duplicate alphabet symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("label {label:?} not in the declared alphabet")]
    LabelOutsideAlphabet { label: String },
    #[error("transition {from:?} -> {to:?} is missing a label (alphabet declared)")]
    MissingLabel { from: String, to: String },
    #[error("transition {from:?} -> {to:?} carries label {label:?} but no alphabet is declared")]
    UnexpectedLabel {
        from: String,
        to: String,
        label: String,
    },
    #[error("bad weight on transition {from:?} -> {to:?}: {reason}")]
    BadWeight {
        from: String,
        to: String,
        reason: String,
    },
}

/// A finite, non-blocking weighted transition system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedTransitionSystem {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    /// Outgoing transitions per state, in declaration order.
    out: Vec<Vec<Transition>>,
    alphabet: Option<Vec<String>>,
}

impl WeightedTransitionSystem {
    /// Builds and validates a system from raw parts.
    pub fn new(
        states: Vec<String>,
        transitions: Vec<(String, Option<String>, Rational, String)>,
        alphabet: Option<Vec<String>>,
    ) -> Result<Self, WtsError> {
        let mut index = HashMap::new();
        for (i, name) in states.iter().enumerate() {
            if index.insert(name.clone(), StateId(i as u32)).is_some() {
                return Err(WtsError::DuplicateState(name.clone()));
            }
        }
        if let Some(symbols) = &alphabet {
            let mut seen = BTreeSet::new();
            for s in symbols {
                if !seen.insert(s) {
                    return Err(WtsError::DuplicateSymbol(s.clone()));
                }
            }
        }
        let mut out = vec![Vec::new(); states.len()];
        for (from, label, value, to) in transitions {
            let source = *index
                .get(&from)
                .ok_or_else(|| WtsError::UnknownState(from.clone()))?;
            let target = *index
                .get(&to)
                .ok_or_else(|| WtsError::UnknownState(to.clone()))?;
            match (&alphabet, &label) {
                (Some(symbols), Some(l)) => {
                    if !symbols.iter().any(|s| s == l) {
                        return Err(WtsError::LabelOutsideAlphabet { label: l.clone() });
                    }
                }
                (Some(_), None) => return Err(WtsError::MissingLabel { from, to }),
                (None, Some(l)) => {
                    return Err(WtsError::UnexpectedLabel {
                        from,
                        to,
                        label: l.clone(),
                    })
                }
                (None, None) => {}
            }
            let transition = Transition {
                source,
                weight: Weight { label, value },
                target,
            };
            // Transitions form a set; repeated entries collapse.
            if !out[source.index()].contains(&transition) {
                out[source.index()].push(transition);
            }
        }
        for (i, ts) in out.iter().enumerate() {
            if ts.is_empty() {
                return Err(WtsError::BlockingState(states[i].clone()));
            }
        }
        Ok(WeightedTransitionSystem {
            names: states,
            index,
            out,
            alphabet,
        })
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.names.len() as u32).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s.index()]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<StateId, WtsError> {
        self.state(name)
            .ok_or_else(|| WtsError::UnknownState(name.to_string()))
    }

    /// Outgoing transitions of `s`, nonempty by the non-blocking invariant.
    pub fn outgoing(&self, s: StateId) -> &[Transition] {
        &self.out[s.index()]
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.out.iter().flatten()
    }

    pub fn alphabet(&self) -> Option<&[String]> {
        self.alphabet.as_deref()
    }

    pub fn is_labeled(&self) -> bool {
        self.alphabet.is_some()
    }
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WtsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
    states: Vec<String>,
    transitions: Vec<TransitionDoc>,
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    from: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    weight: WeightRepr,
    to: String,
}

/// Weights travel as exact text (`"p/q"`, `"0.5"`) or as JSON integers.
/// Non-integer JSON numbers are rejected: binary floats are not exact.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Int(i64),
    Text(String),
}

impl WeightRepr {
    fn to_rational(&self, from: &str, to: &str) -> Result<Rational, WtsError> {
        match self {
            WeightRepr::Int(n) => Ok(Rational::from_integer((*n).into())),
            WeightRepr::Text(s) => parse_rational(s).map_err(|e| WtsError::BadWeight {
                from: from.to_string(),
                to: to.to_string(),
                reason: e.reason,
            }),
        }
    }

    fn from_rational(r: &Rational) -> Self {
        use num::One;
        if r.denom().is_one() {
            if let Ok(n) = i64::try_from(r.numer().clone()) {
                return WeightRepr::Int(n);
            }
        }
        WeightRepr::Text(format_rational(r))
    }
}

/// Parses and validates a system document.
pub fn parse_wts(text: &str) -> Result<WeightedTransitionSystem, WtsError> {
    let doc: WtsDoc = serde_json::from_str(text).map_err(|e| WtsError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut transitions = Vec::with_capacity(doc.transitions.len());
    for t in doc.transitions {
        let value = t.weight.to_rational(&t.from, &t.to)?;
        transitions.push((t.from, t.label, value, t.to));
    }
    WeightedTransitionSystem::new(doc.states, transitions, doc.alphabet)
}

/// Serializes a system; `parse_wts(serialize_wts(sys))` reproduces `sys`.
pub fn serialize_wts(sys: &WeightedTransitionSystem) -> String {
    let doc = WtsDoc {
        alphabet: sys.alphabet.clone(),
        states: sys.names.clone(),
        transitions: sys
            .transitions()
            .map(|t| TransitionDoc {
                from: sys.state_name(t.source).to_string(),
                label: t.weight.label.clone(),
                weight: WeightRepr::from_rational(&t.weight.value),
                to: sys.state_name(t.target).to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("system serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("step {index} starts at the wrong state")]
    BrokenChain { index: usize },
    #[error("cycle must be nonempty")]
    EmptyCycle,
    #[error("cycle must start at the prefix end")]
    CycleDetached,
    #[error("cycle must return to its start")]
    CycleOpen,
}

/// A finite path: a start state plus consecutively chained transitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinitePath {
    start: StateId,
    steps: Vec<Transition>,
}

impl FinitePath {
    /// The empty path sitting at `start`.
    pub fn empty(start: StateId) -> Self {
        FinitePath {
            start,
            steps: Vec::new(),
        }
    }

    pub fn new(start: StateId, steps: Vec<Transition>) -> Result<Self, PathError> {
        let mut at = start;
        for (i, step) in steps.iter().enumerate() {
            if step.source != at {
                return Err(PathError::BrokenChain { index: i });
            }
            at = step.target;
        }
        Ok(FinitePath { start, steps })
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Transition] {
        &self.steps
    }

    /// The state the path currently ends in.
    pub fn last_state(&self) -> StateId {
        self.steps.last().map_or(self.start, |t| t.target)
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.steps.iter().map(|t| t.weight.clone()).collect()
    }

    /// Extends by one transition, checking the chain.
    pub fn push(&mut self, step: Transition) -> Result<(), PathError> {
        if step.source != self.last_state() {
            return Err(PathError::BrokenChain {
                index: self.steps.len(),
            });
        }
        self.steps.push(step);
        Ok(())
    }
}

/// An ultimately periodic infinite path, represented as a finite prefix plus
/// a nonempty cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoPath {
    prefix: FinitePath,
    cycle: FinitePath,
}

impl LassoPath {
    pub fn new(prefix: FinitePath, cycle: FinitePath) -> Result<Self, PathError> {
        if cycle.is_empty() {
            return Err(PathError::EmptyCycle);
        }
        if cycle.start() != prefix.last_state() {
            return Err(PathError::CycleDetached);
        }
        if cycle.last_state() != cycle.start() {
            return Err(PathError::CycleOpen);
        }
        Ok(LassoPath { prefix, cycle })
    }

    pub fn prefix(&self) -> &FinitePath {
        &self.prefix
    }

    pub fn cycle(&self) -> &FinitePath {
        &self.cycle
    }

    pub fn start(&self) -> StateId {
        self.prefix.start()
    }

    /// The transition at unrolled position `j` of the infinite path.
    pub fn step_at(&self, j: usize) -> &Transition {
        let p = self.prefix.len();
        if j < p {
            &self.prefix.steps()[j]
        } else {
            &self.cycle.steps()[(j - p) % self.cycle.len()]
        }
    }
}

/// All lasso paths from `s` with prefix length ≤ `max_prefix` and cycle
/// length ≤ `max_cycle` (cycles are arbitrary closed walks, not necessarily
/// simple). No duplicates: each structurally distinct prefix/cycle split is
/// produced once.
pub fn enumerate_lassos(
    sys: &WeightedTransitionSystem,
    s: StateId,
    max_prefix: usize,
    max_cycle: usize,
) -> Vec<LassoPath> {
    let mut result = Vec::new();
    let mut prefix = FinitePath::empty(s);
    enumerate_prefixes(sys, max_prefix, max_cycle, &mut prefix, &mut result);
    result
}

fn enumerate_prefixes(
    sys: &WeightedTransitionSystem,
    prefix_budget: usize,
    max_cycle: usize,
    prefix: &mut FinitePath,
    out: &mut Vec<LassoPath>,
) {
    let anchor = prefix.last_state();
    let mut cycle = FinitePath::empty(anchor);
    enumerate_cycles(sys, anchor, max_cycle, &mut cycle, prefix, out);
    if prefix_budget == 0 {
        return;
    }
    for t in sys.outgoing(anchor) {
        prefix.push(t.clone()).expect("outgoing transition chains");
        enumerate_prefixes(sys, prefix_budget - 1, max_cycle, prefix, out);
        prefix.steps.pop();
    }
}

fn enumerate_cycles(
    sys: &WeightedTransitionSystem,
    anchor: StateId,
    budget: usize,
    walk: &mut FinitePath,
    prefix: &FinitePath,
    out: &mut Vec<LassoPath>,
) {
    if budget == 0 {
        return;
    }
    for t in sys.outgoing(walk.last_state()) {
        walk.push(t.clone()).expect("outgoing transition chains");
        if walk.last_state() == anchor {
            out.push(
                LassoPath::new(prefix.clone(), walk.clone()).expect("closed walk forms a lasso"),
            );
        }
        enumerate_cycles(sys, anchor, budget - 1, walk, prefix, out);
        walk.steps.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn rat(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    const SELF_LOOP: &str = r#"{"states":["s"],"transitions":[{"from":"s","weight":1,"to":"s"}]}"#;

    #[test]
    fn parses_minimal_system() {
        let sys = parse_wts(SELF_LOOP).unwrap();
        assert_eq!(sys.state_count(), 1);
        assert_eq!(sys.transitions().count(), 1);
        assert!(!sys.is_labeled());
    }

    #[test]
    fn rejects_blocking_state() {
        let doc = r#"{"states":["s"],"transitions":[]}"#;
        match parse_wts(doc) {
            Err(WtsError::BlockingState(name)) => assert_eq!(name, "s"),
            other => panic!("expected blocking-state error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_dangling_endpoint() {
        let doc = r#"{"states":["s"],"transitions":[{"from":"u","weight":1,"to":"s"}]}"#;
        match parse_wts(doc) {
            Err(WtsError::UnknownState(name)) => assert_eq!(name, "u"),
            other => panic!("expected unknown-state error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_state_and_bad_labels() {
        assert!(matches!(
            parse_wts(r#"{"states":["s","s"],"transitions":[]}"#),
            Err(WtsError::DuplicateState(_))
        ));
        let labeled = r#"{"alphabet":["a"],"states":["s"],
            "transitions":[{"from":"s","label":"z","weight":1,"to":"s"}]}"#;
        assert!(matches!(
            parse_wts(labeled),
            Err(WtsError::LabelOutsideAlphabet { .. })
        ));
        let missing = r#"{"alphabet":["a"],"states":["s"],
            "transitions":[{"from":"s","weight":1,"to":"s"}]}"#;
        assert!(matches!(
            parse_wts(missing),
            Err(WtsError::MissingLabel { .. })
        ));
        let unexpected = r#"{"states":["s"],
            "transitions":[{"from":"s","label":"a","weight":1,"to":"s"}]}"#;
        assert!(matches!(
            parse_wts(unexpected),
            Err(WtsError::UnexpectedLabel { .. })
        ));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_wts("{ nope") {
            Err(WtsError::Syntax { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn exact_weights_accepted_in_all_forms() {
        let doc = r#"{"states":["s"],"transitions":[
            {"from":"s","weight":"1/3","to":"s"},
            {"from":"s","weight":"0.25","to":"s"},
            {"from":"s","weight":-2,"to":"s"}]}"#;
        let sys = parse_wts(doc).unwrap();
        let ws: Vec<_> = sys.transitions().map(|t| t.weight.value.clone()).collect();
        assert_eq!(ws, vec![rat("1/3"), rat("1/4"), rat("-2")]);
        assert!(matches!(
            parse_wts(r#"{"states":["s"],"transitions":[{"from":"s","weight":0.5,"to":"s"}]}"#),
            Err(WtsError::BadWeight { .. }) | Err(WtsError::Syntax { .. })
        ));
    }

    #[test]
    fn serialize_parse_round_trip() {
        let doc = r#"{"alphabet":["a","b"],"states":["s","t"],"transitions":[
            {"from":"s","label":"a","weight":"1/2","to":"t"},
            {"from":"t","label":"b","weight":3,"to":"t"},
            {"from":"t","label":"a","weight":"-7/3","to":"s"}]}"#;
        let sys = parse_wts(doc).unwrap();
        let again = parse_wts(&serialize_wts(&sys)).unwrap();
        assert_eq!(sys, again);
    }

    #[test]
    fn finite_path_checks_chaining() {
        let sys = parse_wts(SELF_LOOP).unwrap();
        let s = sys.state("s").unwrap();
        let loop_t = sys.outgoing(s)[0].clone();
        let mut p = FinitePath::empty(s);
        p.push(loop_t.clone()).unwrap();
        assert_eq!(p.last_state(), s);
        let bad = Transition {
            source: StateId(7),
            weight: loop_t.weight.clone(),
            target: s,
        };
        assert!(p.push(bad).is_err());
    }

    #[test]
    fn lasso_invariants_enforced() {
        let sys = parse_wts(SELF_LOOP).unwrap();
        let s = sys.state("s").unwrap();
        let loop_t = sys.outgoing(s)[0].clone();
        let prefix = FinitePath::empty(s);
        assert!(matches!(
            LassoPath::new(prefix.clone(), FinitePath::empty(s)),
            Err(PathError::EmptyCycle)
        ));
        let cycle = FinitePath::new(s, vec![loop_t]).unwrap();
        let lasso = LassoPath::new(prefix, cycle).unwrap();
        assert_eq!(lasso.step_at(0), lasso.step_at(5));
    }

    #[test]
    fn enumerates_single_self_loop() {
        let sys = parse_wts(SELF_LOOP).unwrap();
        let s = sys.state("s").unwrap();
        let lassos = enumerate_lassos(&sys, s, 0, 1);
        assert_eq!(lassos.len(), 1);
        assert!(lassos[0].prefix().is_empty());
        assert_eq!(lassos[0].cycle().len(), 1);
    }

    #[test]
    fn enumerates_parallel_self_loops() {
        let doc = r#"{"states":["s"],"transitions":[
            {"from":"s","weight":1,"to":"s"},
            {"from":"s","weight":2,"to":"s"}]}"#;
        let sys = parse_wts(doc).unwrap();
        let s = sys.state("s").unwrap();
        assert_eq!(enumerate_lassos(&sys, s, 0, 1).len(), 2);
    }

    #[test]
    fn cycle_must_close_at_prefix_end() {
        // s -> b, b -> b: the only (1,1)-lasso from s is prefix s->b, cycle b->b.
        let doc = r#"{"states":["s","b"],"transitions":[
            {"from":"s","weight":0,"to":"b"},
            {"from":"b","weight":1,"to":"b"}]}"#;
        let sys = parse_wts(doc).unwrap();
        let s = sys.state("s").unwrap();
        let lassos = enumerate_lassos(&sys, s, 1, 1);
        assert_eq!(lassos.len(), 1);
        assert_eq!(lassos[0].prefix().len(), 1);
        assert_eq!(lassos[0].cycle().len(), 1);
        assert!(lassos[0].cycle().steps()[0].weight.value == rat("1"));
        let _ = Rational::zero();
    }

    #[test]
    fn enumeration_matches_brute_force_count() {
        // Brute force: walks of length p + c from s such that position p
        // recurs at the end, counted per (p, c) split.
        let doc = r#"{"states":["a","b","c"],"transitions":[
            {"from":"a","weight":1,"to":"b"},
            {"from":"a","weight":2,"to":"a"},
            {"from":"b","weight":1,"to":"c"},
            {"from":"c","weight":1,"to":"a"},
            {"from":"c","weight":3,"to":"b"}]}"#;
        let sys = parse_wts(doc).unwrap();
        let s = sys.state("a").unwrap();
        let (max_p, max_c) = (2, 3);

        fn walks(
            sys: &WeightedTransitionSystem,
            from: StateId,
            len: usize,
        ) -> Vec<Vec<Transition>> {
            if len == 0 {
                return vec![Vec::new()];
            }
            let mut acc = Vec::new();
            for t in sys.outgoing(from) {
                for mut rest in walks(sys, t.target, len - 1) {
                    rest.insert(0, t.clone());
                    acc.push(rest);
                }
            }
            acc
        }

        let mut expected = 0usize;
        for p in 0..=max_p {
            for c in 1..=max_c {
                for walk in walks(&sys, s, p + c) {
                    let mid = if p == 0 { s } else { walk[p - 1].target };
                    let end = walk[p + c - 1].target;
                    if mid == end {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(enumerate_lassos(&sys, s, max_p, max_c).len(), expected);
    }
}
