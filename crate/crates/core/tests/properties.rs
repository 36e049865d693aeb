//! Property tests for the data-model invariants: canonical lasso form,
//! alignment, document round trips, and enumeration counts.

use proptest::prelude::*;
use wtsdist_core::generators::{random_wts, RandomWtsConfig};
use wtsdist_core::lasso::align;
use wtsdist_core::{
    enumerate_lassos, parse_wts, serialize_wts, LassoTrace, Rational, StateId, Weight,
};

fn weight() -> impl Strategy<Value = Weight> {
    (prop_oneof![Just("a"), Just("b")], -4i64..=4i64)
        .prop_map(|(label, v)| Weight::labeled(label, Rational::new(v.into(), 2.into())))
}

fn lasso() -> impl Strategy<Value = LassoTrace> {
    (
        prop::collection::vec(weight(), 0..4),
        prop::collection::vec(weight(), 1..4),
    )
        .prop_map(|(prefix, cycle)| LassoTrace::new(prefix, cycle).unwrap())
}

proptest! {
    /// Pumping the cycle or shifting cycle elements into the prefix leaves
    /// the unrolling unchanged, so normalization must collapse all such
    /// representations onto the same structure.
    #[test]
    fn normalization_collapses_unroll_equal_forms(
        t in lasso(),
        pump in 1usize..=3,
        shift in 0usize..=4,
    ) {
        let mut prefix = t.prefix().to_vec();
        let mut cycle = Vec::new();
        for _ in 0..pump {
            cycle.extend(t.cycle().iter().cloned());
        }
        for _ in 0..shift {
            let head = cycle.remove(0);
            prefix.push(head.clone());
            cycle.push(head);
        }
        let transformed = LassoTrace::new(prefix, cycle).unwrap();
        prop_assert_eq!(&transformed, &t);
    }

    /// Structural equality of normalized lassos is exactly equality of
    /// unrollings over the aligned window.
    #[test]
    fn structural_equality_is_unrolling_equality(a in lasso(), b in lasso()) {
        let (aa, _) = align(&a, &b);
        let window = aa.prefix().len() + 2 * aa.cycle().len();
        let same_window = (0..window).all(|j| a.at(j) == b.at(j));
        prop_assert_eq!(a == b, same_window);
    }

    /// Alignment rewrites both traces to the stated shared shape without
    /// touching their unrollings.
    #[test]
    fn alignment_preserves_unrollings(a in lasso(), b in lasso()) {
        let (aa, bb) = align(&a, &b);
        let p = a.prefix().len().max(b.prefix().len());
        prop_assert_eq!(aa.prefix().len(), p);
        prop_assert_eq!(bb.prefix().len(), p);
        prop_assert_eq!(aa.cycle().len(), bb.cycle().len());
        let window = p + 2 * aa.cycle().len();
        for j in 0..window {
            prop_assert_eq!(aa.at(j), a.at(j));
            prop_assert_eq!(bb.at(j), b.at(j));
        }
    }

    /// Documents survive serialize ∘ parse exactly.
    #[test]
    fn serialization_round_trip(states in 1usize..=6, seed in 0u64..5000, labeled in any::<bool>()) {
        let sys = random_wts(&RandomWtsConfig {
            states,
            max_out: 3,
            alphabet_size: if labeled { 2 } else { 0 },
            denominator: 2,
            ..RandomWtsConfig::new(states, seed)
        });
        prop_assert_eq!(parse_wts(&serialize_wts(&sys)).unwrap(), sys);
    }

    /// Lasso enumeration agrees with a brute-force walk filter on small
    /// systems: one lasso per (p, c) split of a transition walk of length
    /// p + c whose state at position p recurs at the end.
    #[test]
    fn enumeration_matches_walk_filter(states in 1usize..=4, seed in 0u64..2000) {
        let sys = random_wts(&RandomWtsConfig {
            states,
            max_out: 2,
            ..RandomWtsConfig::new(states, seed)
        });
        let s = StateId(0);
        let (max_p, max_c) = (2usize, 2usize);

        fn lasso_walks(
            sys: &wtsdist_core::WeightedTransitionSystem,
            at: StateId,
            step: usize,
            p: usize,
            c: usize,
            pivot: Option<StateId>,
        ) -> usize {
            let pivot = if step == p { Some(at) } else { pivot };
            if step == p + c {
                return usize::from(Some(at) == pivot);
            }
            sys.outgoing(at)
                .iter()
                .map(|t| lasso_walks(sys, t.target, step + 1, p, c, pivot))
                .sum()
        }

        let mut expected = 0usize;
        for p in 0..=max_p {
            for c in 1..=max_c {
                expected += lasso_walks(&sys, s, 0, p, c, None);
            }
        }
        prop_assert_eq!(enumerate_lassos(&sys, s, max_p, max_c).len(), expected);
    }
}

/// Every valid witness spec yields a system whose roots have equal trace
/// sets while the branching distance is exactly the smaller directed trace
/// distance.
#[test]
fn random_witnesses_separate_linear_from_branching() {
    use rand::prelude::IndexedRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use wtsdist_core::generators::{build_inequivalence, IneqSpec};
    use wtsdist_core::{
        branching_distance, linear_discrete, DistanceValue, FixpointConfig, TraceMetric,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(12345);
    let lasso = |rng: &mut ChaCha8Rng, head: &Weight| {
        let weight = |rng: &mut ChaCha8Rng| {
            let label = *["a", "b"].choose(rng).unwrap();
            Weight::labeled(
                label,
                Rational::new(rng.random_range(0..=4).into(), 1.into()),
            )
        };
        let mut prefix = vec![head.clone()];
        prefix.extend((0..rng.random_range(0..2)).map(|_| weight(rng)));
        let cycle = (0..rng.random_range(1..3)).map(|_| weight(rng)).collect();
        LassoTrace::new(prefix, cycle).unwrap()
    };

    let metric = TraceMetric::pointwise();
    let mut built = 0;
    for _ in 0..200 {
        let head = Weight::labeled("a", Rational::new(1.into(), 1.into()));
        let spec = IneqSpec {
            sigma: lasso(&mut rng, &head),
            tau: lasso(&mut rng, &head),
            metric: metric.clone(),
        };
        if spec.validate().is_err() {
            continue;
        }
        built += 1;
        let (sys, s, t) = build_inequivalence(&spec).unwrap();
        assert!(
            linear_discrete(&sys, s, t, None).is_zero(),
            "trace sets differ (s into t)"
        );
        assert!(
            linear_discrete(&sys, t, s, None).is_zero(),
            "trace sets differ (t into s)"
        );
        let forward = metric.eval_exact(&spec.sigma, &spec.tau).unwrap();
        let backward = metric.eval_exact(&spec.tau, &spec.sigma).unwrap();
        let expected = forward.min(backward);
        assert!(!expected.is_zero());
        let out = branching_distance(&sys, &metric, s, t, &FixpointConfig::default()).unwrap();
        assert_eq!(out.value, DistanceValue::Exact(expected));
    }
    assert!(
        built >= 50,
        "witness generator too restrictive: only {built} valid specs"
    );
}
