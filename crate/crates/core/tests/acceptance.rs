//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`). Every expected value is either computed by
//! an independent oracle inside this file or verified by hand; comparisons
//! are exact rational comparisons, with explicit ε slack only where a
//! criterion consumes certified ε-approximations.

use num::{One, Signed, Zero};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::rc::Rc;
use std::time::Instant;
use wtsdist_core::fixpoint::{DiscountedIterator, DiscreteIterator, SupIterator};
use wtsdist_core::game::OracleLimits;
use wtsdist_core::generators::{build_inequivalence, random_wts, IneqSpec, RandomWtsConfig};
use wtsdist_core::lasso::align;
use wtsdist_core::rational::rational_pow;
use wtsdist_core::{
    bounded_blind_value, bounded_value, branching_distance, greatest_simulation, linear_bound,
    linear_discrete, parse_rational, solve_branching, Accumulator, DistanceValue, ExtValue,
    FixpointConfig, FixpointStatus, GroundMetric, LabelPreorder, LassoTrace, Rational, StateId,
    TraceMetric, Weight, WeightedTransitionSystem,
};

fn rat(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn fin(s: &str) -> ExtValue {
    ExtValue::finite(rat(s))
}

fn tiny_eps() -> Rational {
    rat("1/1000000000000")
}

fn pass(name: &str, started: Instant) {
    println!(
        "acceptance criterion {name}: PASS ({:.2?})",
        started.elapsed()
    );
}

/// Random lasso over alphabet {a, b} with small integer-grid weights.
fn random_lasso(rng: &mut ChaCha8Rng) -> LassoTrace {
    let weight = |rng: &mut ChaCha8Rng| {
        let label = *["a", "b"].choose(rng).unwrap();
        Weight::labeled(
            label,
            Rational::new(rng.random_range(0..=6).into(), 2.into()),
        )
    };
    let prefix_len = rng.random_range(0..=2);
    let cycle_len = rng.random_range(1..=3);
    let prefix = (0..prefix_len).map(|_| weight(rng)).collect();
    let cycle = (0..cycle_len).map(|_| weight(rng)).collect();
    LassoTrace::new(prefix, cycle).unwrap()
}

fn criterion_one_systems() -> Vec<WeightedTransitionSystem> {
    (0..200)
        .map(|seed| {
            random_wts(&RandomWtsConfig {
                states: 2 + (seed as usize % 7),
                max_out: 3,
                alphabet_size: 2,
                weight_max: Rational::from_integer(2.into()),
                ..RandomWtsConfig::new(1, 10_000 + seed)
            })
        })
        .collect()
}

/// Criterion 1: the zero set of the discrete branching distance is exactly
/// the greatest simulation computed by the independent refinement loop.
#[test]
fn criterion_1_discrete_zero_set_is_simulation() {
    let started = Instant::now();
    let metric = TraceMetric::discrete();
    for (i, sys) in criterion_one_systems().iter().enumerate() {
        let outcome = solve_branching(sys, &metric, &FixpointConfig::default()).unwrap();
        assert_eq!(outcome.status, FixpointStatus::Exact, "system {i}");
        let simulation = greatest_simulation(sys, None);
        for s in sys.states() {
            for t in sys.states() {
                let zero = outcome.values.get(s, t) == &DistanceValue::Exact(ExtValue::zero());
                assert_eq!(
                    zero,
                    *simulation.get(s, t),
                    "system {i}: zero set and simulation disagree at ({}, {})",
                    sys.state_name(s),
                    sys.state_name(t)
                );
            }
        }
    }
    assert!(
        started.elapsed().as_secs() < 30,
        "criterion 1 exceeded 30 s"
    );
    pass("1 (discrete zero set = simulation)", started);
}

/// Depth-bounded prefix-inclusion brute force: level-synchronized breadth
/// first search with per-level dedup and no global visited set. Stops early
/// only when one level reproduces the previous one (the sequence of levels
/// is then constant forever).
fn prefix_inclusion_bounded(
    sys: &WeightedTransitionSystem,
    s: StateId,
    t: StateId,
    depth: usize,
) -> bool {
    let mut frontier: BTreeSet<(StateId, BTreeSet<StateId>)> =
        BTreeSet::from([(s, BTreeSet::from([t]))]);
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for (left, right) in &frontier {
            for move1 in sys.outgoing(*left) {
                let mut reachable = BTreeSet::new();
                for &tracked in right {
                    for move2 in sys.outgoing(tracked) {
                        if move1.weight == move2.weight {
                            reachable.insert(move2.target);
                        }
                    }
                }
                if reachable.is_empty() {
                    return false;
                }
                next.insert((move1.target, reachable));
            }
        }
        if next == frontier {
            return true;
        }
        frontier = next;
    }
    true
}

/// Criterion 2: the subset-construction decision agrees with the
/// depth-(2^|S|+1) prefix-inclusion brute force.
#[test]
fn criterion_2_linear_discrete_is_trace_inclusion() {
    let started = Instant::now();
    for seed in 0..200u64 {
        let sys = random_wts(&RandomWtsConfig {
            states: 2 + (seed as usize % 5),
            max_out: 3,
            alphabet_size: 2,
            weight_max: Rational::one(),
            ..RandomWtsConfig::new(1, 20_000 + seed)
        });
        let depth = (1usize << sys.state_count()) + 1;
        for s in sys.states() {
            for t in sys.states() {
                let exact = linear_discrete(&sys, s, t, None).is_zero();
                let brute = prefix_inclusion_bounded(&sys, s, t, depth);
                assert_eq!(
                    exact,
                    brute,
                    "seed {seed}: inclusion disagrees at ({}, {})",
                    sys.state_name(s),
                    sys.state_name(t)
                );
            }
        }
    }
    assert!(
        started.elapsed().as_secs() < 60,
        "criterion 2 exceeded 60 s"
    );
    pass("2 (linear discrete = bounded trace inclusion)", started);
}

/// Criterion 3: the blind value never exceeds the game value at any depth,
/// and the certified linear lower bound never exceeds the branching
/// distance (up to the certified ε for the discounted under-approximation).
#[test]
fn criterion_3_linear_below_branching() {
    let started = Instant::now();
    let eps = tiny_eps();
    let metrics = [
        TraceMetric::discrete(),
        TraceMetric::pointwise(),
        TraceMetric::parse("acc-disc:1/2").unwrap(),
    ];
    let limits = OracleLimits::default();
    let cfg = FixpointConfig {
        eps: eps.clone(),
        ..FixpointConfig::default()
    };
    for seed in 0..100u64 {
        let sys = random_wts(&RandomWtsConfig {
            states: 2 + (seed as usize % 3),
            max_out: 2,
            alphabet_size: 2,
            weight_max: Rational::from_integer(2.into()),
            ..RandomWtsConfig::new(1, 30_000 + seed)
        });
        for metric in &metrics {
            let outcome = solve_branching(&sys, metric, &cfg).unwrap();
            let slack = match &outcome.status {
                FixpointStatus::Converged { certified_error } => {
                    ExtValue::finite(certified_error.clone())
                }
                _ => ExtValue::zero(),
            };
            for s in sys.states() {
                for t in sys.states() {
                    for k in 1..=5 {
                        let blind = bounded_blind_value(&sys, s, t, metric, k, &limits).unwrap();
                        let full = bounded_value(&sys, s, t, metric, k, &limits).unwrap();
                        assert!(
                            blind <= full,
                            "seed {seed} {metric} depth {k}: blind {blind} > full {full}"
                        );
                    }
                    let bound = linear_bound(&sys, s, t, metric, 5, &limits).unwrap();
                    let branching = outcome.values.get(s, t).upper().clone() + &slack;
                    assert!(
                        bound.lower <= branching,
                        "seed {seed} {metric}: linear lower {} above branching {branching}",
                        bound.lower
                    );
                }
            }
        }
    }
    pass("3 (blind ≤ full, linear lower ≤ branching)", started);
}

/// Criterion 4: the discounted fixed point and the depth-12 game oracle
/// agree within the geometric tail bound `λ^12 · W / (1 − λ)`.
#[test]
fn criterion_4_fixed_point_matches_game_oracle() {
    let started = Instant::now();
    let metric = TraceMetric::parse("acc-disc:1/2").unwrap();
    let eps = tiny_eps();
    let cfg = FixpointConfig {
        eps: eps.clone(),
        ..FixpointConfig::default()
    };
    let limits = OracleLimits::default();
    let eps = ExtValue::finite(eps);
    for seed in 0..50u64 {
        let sys = random_wts(&RandomWtsConfig {
            states: 2 + (seed as usize % 3),
            max_out: 3,
            alphabet_size: 0,
            weight_max: Rational::from_integer(4.into()),
            ..RandomWtsConfig::new(1, 40_000 + seed)
        });
        // W: worst one-step weight difference, computed independently.
        let mut worst = Rational::zero();
        for t1 in sys.transitions() {
            for t2 in sys.transitions() {
                worst = worst.max((&t1.weight.value - &t2.weight.value).abs());
            }
        }
        let tail = ExtValue::finite(rational_pow(&rat("1/2"), 12) * worst / rat("1/2"));
        let outcome = solve_branching(&sys, &metric, &cfg).unwrap();
        for s in sys.states() {
            for t in sys.states() {
                let fixed = outcome.values.get(s, t).lower().clone();
                let oracle = bounded_value(&sys, s, t, &metric, 12, &limits).unwrap();
                // oracle ≤ h* ≤ fixed + ε and h* − oracle ≤ tail.
                assert!(
                    oracle <= fixed.clone() + &eps,
                    "seed {seed}: oracle {oracle} above fixed point {fixed} + ε"
                );
                assert!(
                    fixed <= oracle.clone() + &tail,
                    "seed {seed}: fixed point {fixed} above oracle {oracle} + tail {tail}"
                );
            }
        }
    }
    assert!(
        started.elapsed().as_secs() < 120,
        "criterion 4 exceeded 120 s"
    );
    pass(
        "4 (discounted fixed point within oracle tail bound)",
        started,
    );
}

/// Criterion 5: hemimetric laws. Identity and triangle for every metric on
/// random lasso triples; triangle of the branching distance over all state
/// triples for the pointwise and discounted metrics.
#[test]
fn criterion_5_hemimetric_laws() {
    let started = Instant::now();
    let preorder = LabelPreorder::new(vec![("a".to_string(), "b".to_string())]);
    let metrics = [
        TraceMetric::discrete(),
        TraceMetric::discrete_pre(preorder),
        TraceMetric::parse("hamming-davg").unwrap(),
        TraceMetric::parse("hamming-disc:1/3").unwrap(),
        TraceMetric::pointwise(),
        TraceMetric::parse("acc-disc:1/2").unwrap(),
        TraceMetric::parse("acc-lavg").unwrap(),
        TraceMetric::maxlead(),
    ];
    for metric in &metrics {
        let mut rng = ChaCha8Rng::seed_from_u64(50_000);
        for case in 0..1000 {
            let a = random_lasso(&mut rng);
            let b = random_lasso(&mut rng);
            let c = random_lasso(&mut rng);
            for x in [&a, &b, &c] {
                assert!(
                    metric.eval_exact(x, x).unwrap().is_zero(),
                    "{metric} case {case}: identity violated"
                );
            }
            let ab = metric.eval_exact(&a, &b).unwrap();
            let bc = metric.eval_exact(&b, &c).unwrap();
            let ac = metric.eval_exact(&a, &c).unwrap();
            assert!(
                ac <= ab.clone() + &bc,
                "{metric} case {case}: triangle violated"
            );
        }
    }

    // Branching-distance triangle; certified ε slack for the discounted
    // tables, which under-approximate cellwise.
    let eps = tiny_eps();
    let cfg = FixpointConfig {
        eps: eps.clone(),
        ..FixpointConfig::default()
    };
    let slack_for = |status: &FixpointStatus| match status {
        FixpointStatus::Converged { certified_error } => {
            ExtValue::finite(certified_error.clone() * Rational::from_integer(2.into()))
        }
        _ => ExtValue::zero(),
    };
    for metric in [
        TraceMetric::pointwise(),
        TraceMetric::parse("acc-disc:1/2").unwrap(),
    ] {
        for (i, sys) in criterion_one_systems().iter().enumerate() {
            let outcome = solve_branching(sys, &metric, &cfg).unwrap();
            let slack = slack_for(&outcome.status);
            for a in sys.states() {
                for b in sys.states() {
                    for c in sys.states() {
                        let direct = outcome.values.get(a, c).lower();
                        let via = outcome.values.get(a, b).upper().clone()
                            + outcome.values.get(b, c).upper()
                            + &slack;
                        assert!(
                            *direct <= via,
                            "system {i} {metric}: branching triangle violated at \
                             ({},{},{}) — the triangle law presumes a determined game",
                            sys.state_name(a),
                            sys.state_name(b),
                            sys.state_name(c)
                        );
                    }
                }
            }
        }
    }
    pass("5 (hemimetric identity and triangle laws)", started);
}

/// Criterion 6: the two worked inequivalence witnesses. Linear evidence is
/// zero while the branching distance equals `min(d(σ,τ), d(τ,σ))` exactly.
#[test]
fn criterion_6_inequivalence_witnesses() {
    let started = Instant::now();
    let lw = |l: &str, v: i64| Weight::labeled(l, Rational::from_integer(v.into()));

    // Discrete witness: σ = a·b^ω, τ = a·c^ω (weights 0).
    let discrete = IneqSpec {
        sigma: LassoTrace::new(vec![lw("a", 0)], vec![lw("b", 0)]).unwrap(),
        tau: LassoTrace::new(vec![lw("a", 0)], vec![lw("c", 0)]).unwrap(),
        metric: TraceMetric::discrete(),
    };
    let (sys, s, t) = build_inequivalence(&discrete).unwrap();
    assert!(linear_discrete(&sys, s, t, None).is_zero());
    assert!(linear_discrete(&sys, t, s, None).is_zero());
    let out = branching_distance(
        &sys,
        &TraceMetric::discrete(),
        s,
        t,
        &FixpointConfig::default(),
    )
    .unwrap();
    let forward = discrete
        .metric
        .eval_exact(&discrete.sigma, &discrete.tau)
        .unwrap();
    let backward = discrete
        .metric
        .eval_exact(&discrete.tau, &discrete.sigma)
        .unwrap();
    assert_eq!(out.value, DistanceValue::Exact(forward.min(backward)));
    assert_eq!(out.value, DistanceValue::Exact(ExtValue::Infinite));
    // Equal trace sets also show up in the bounded blind value.
    for k in 2..=4 {
        let blind = bounded_blind_value(
            &sys,
            s,
            t,
            &TraceMetric::discrete(),
            k,
            &OracleLimits::default(),
        )
        .unwrap();
        assert!(blind.is_zero(), "depth {k}: blind value must vanish");
    }

    // Weighted witness: σ = (a,0)(a,1)^ω, τ = (a,0)(a,2)^ω under pointwise.
    let weighted = IneqSpec {
        sigma: LassoTrace::new(vec![lw("a", 0)], vec![lw("a", 1)]).unwrap(),
        tau: LassoTrace::new(vec![lw("a", 0)], vec![lw("a", 2)]).unwrap(),
        metric: TraceMetric::pointwise(),
    };
    let (sys, s, t) = build_inequivalence(&weighted).unwrap();
    assert!(
        linear_discrete(&sys, s, t, None).is_zero(),
        "trace sets must coincide"
    );
    let limits = OracleLimits::default();
    for k in 1..=6 {
        let bound = linear_bound(&sys, s, t, &TraceMetric::pointwise(), k, &limits).unwrap();
        assert!(bound.lower.is_zero(), "depth {k}: lower bound must vanish");
    }
    let out = branching_distance(
        &sys,
        &TraceMetric::pointwise(),
        s,
        t,
        &FixpointConfig::default(),
    )
    .unwrap();
    let forward = weighted
        .metric
        .eval_exact(&weighted.sigma, &weighted.tau)
        .unwrap();
    let backward = weighted
        .metric
        .eval_exact(&weighted.tau, &weighted.sigma)
        .unwrap();
    assert_eq!(out.value, DistanceValue::Exact(forward.min(backward)));
    assert_eq!(out.value, DistanceValue::Exact(fin("1")));

    assert!(started.elapsed().as_secs() < 5, "criterion 6 exceeded 5 s");
    pass("6 (inequivalence witnesses reproduce)", started);
}

/// Criterion 7: exact closed forms against truncated evaluation.
#[test]
fn criterion_7_closed_forms_vs_truncation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(70_000);
    let discounted = TraceMetric::parse("acc-disc:1/2").unwrap();
    let limavg = TraceMetric::parse("acc-lavg").unwrap();
    let maxlead = TraceMetric::maxlead();
    let half = rat("1/2");

    for case in 0..500 {
        // Discounted: 0 ≤ exact − truncated(40) ≤ λ^40 · G_max / (1 − λ).
        let a = random_lasso(&mut rng);
        let b = random_lasso(&mut rng);
        let exact = discounted.eval_exact(&a, &b).unwrap();
        let truncated = discounted
            .eval_truncated(&a.unroll(40), &b.unroll(40), 40)
            .unwrap();
        match (&exact, &truncated) {
            (ExtValue::Infinite, tr) => {
                assert!(
                    tr.is_infinite(),
                    "case {case}: mismatch must show within 40 steps"
                )
            }
            (ExtValue::Finite(ex), ExtValue::Finite(tr)) => {
                let (aa, bb) = align(&a, &b);
                let period = aa.prefix().len() + aa.cycle().len();
                let mut ground_max = Rational::zero();
                for j in 0..period {
                    ground_max = ground_max.max((&aa.at(j).value - &bb.at(j).value).abs());
                }
                let bound = rational_pow(&half, 40) * ground_max / (Rational::one() - &half);
                let gap = ex - tr;
                assert!(!gap.is_negative(), "case {case}: truncation above exact");
                assert!(gap <= bound, "case {case}: tail bound violated");
            }
            _ => panic!("case {case}: exact finite but truncation infinite"),
        }

        // Limit average on empty-prefix lassos: equal to every k·C-step mean.
        let a = LassoTrace::new(Vec::new(), random_lasso(&mut rng).cycle().to_vec()).unwrap();
        let b = LassoTrace::new(Vec::new(), random_lasso(&mut rng).cycle().to_vec()).unwrap();
        let (aa, _) = align(&a, &b);
        let period = aa.cycle().len();
        let exact = limavg.eval_exact(&a, &b).unwrap();
        for k in 1..=3 {
            let n = k * period;
            let truncated = limavg
                .eval_truncated(&a.unroll(n), &b.unroll(n), n)
                .unwrap();
            assert_eq!(
                truncated, exact,
                "case {case}: k·C-step average differs (k = {k})"
            );
        }

        // Maximum lead with zero drift: exact equals truncation at P + C.
        let a = random_lasso(&mut rng);
        let mut shuffled = a.cycle().to_vec();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let relabel = |ws: &[Weight]| {
            ws.iter()
                .map(|w| Weight::labeled("a", w.value.clone()))
                .collect::<Vec<_>>()
        };
        let a = LassoTrace::new(relabel(a.prefix()), relabel(a.cycle())).unwrap();
        let b = LassoTrace::new(
            relabel(&random_lasso(&mut rng).unroll(rng.random_range(0..=2))),
            relabel(&shuffled),
        )
        .unwrap();
        let exact = maxlead.eval_exact(&a, &b).unwrap();
        let (aa, _) = align(&a, &b);
        let n = aa.prefix().len() + aa.cycle().len();
        let truncated = maxlead
            .eval_truncated(&a.unroll(n), &b.unroll(n), n)
            .unwrap();
        assert_eq!(
            truncated, exact,
            "case {case}: drift-0 maximum lead differs"
        );
    }
    pass("7 (closed forms match truncation)", started);
}

type LeadFn = Rc<dyn Fn(&Rational) -> ExtValue>;

/// One maximum-lead recursion step as a function on lead functions.
fn lead_step(x: &Weight, y: &Weight, h: LeadFn) -> LeadFn {
    if !x.same_label(y) {
        return Rc::new(|_| ExtValue::Infinite);
    }
    let diff = &x.value - &y.value;
    Rc::new(move |lead| {
        let shifted = lead + &diff;
        ExtValue::from_abs(&shifted).max(h(&shifted))
    })
}

/// Criterion 8: folding the recursion step through one aligned period, with
/// the exact cycle fixed point as seed, reproduces the closed-form distance.
#[test]
fn criterion_8_recursion_reproduces_closed_forms() {
    let started = Instant::now();
    let preorder = LabelPreorder::new(vec![("a".to_string(), "b".to_string())]);
    let half = rat("1/2");

    let mut rng = ChaCha8Rng::seed_from_u64(80_000);
    for case in 0..200 {
        let a = random_lasso(&mut rng);
        let b = random_lasso(&mut rng);
        let (aa, bb) = align(&a, &b);
        let p = aa.prefix().len();
        let c = aa.cycle().len();

        // Scalar metrics: seed with the cycle's own fixed point, fold the
        // production step function backwards through prefix and cycle.
        type StepFn = Box<dyn Fn(&Weight, &Weight, &ExtValue) -> ExtValue>;
        struct ScalarCase {
            metric: TraceMetric,
            seed: ExtValue,
            step: StepFn,
        }
        let ground_of = |m: &TraceMetric| m.ground().clone();
        let cycle_grounds = |ground: &GroundMetric| -> Vec<ExtValue> {
            (p..p + c)
                .map(|j| ground.eval(aa.at(j), bb.at(j)))
                .collect()
        };
        let mut cases: Vec<ScalarCase> = Vec::new();
        for metric in [
            TraceMetric::discrete(),
            TraceMetric::discrete_pre(preorder.clone()),
        ] {
            let ground = ground_of(&metric);
            let zero_cycle = cycle_grounds(&ground).iter().all(ExtValue::is_zero);
            let spec = DiscreteIterator::new(ground);
            cases.push(ScalarCase {
                metric,
                seed: if zero_cycle {
                    ExtValue::zero()
                } else {
                    ExtValue::Infinite
                },
                step: Box::new(move |x, y, z| spec.apply(x, y, z)),
            });
        }
        {
            let metric = TraceMetric::pointwise();
            let ground = ground_of(&metric);
            let seed = cycle_grounds(&ground)
                .into_iter()
                .fold(ExtValue::zero(), |acc, d| acc.max(d));
            let spec = SupIterator::new(ground);
            cases.push(ScalarCase {
                metric,
                seed,
                step: Box::new(move |x, y, z| spec.apply(x, y, z)),
            });
        }
        {
            let metric = TraceMetric::parse("acc-disc:1/2").unwrap();
            let ground = ground_of(&metric);
            let grounds = cycle_grounds(&ground);
            // z = Σ λ^i d_i + λ^C z solved exactly.
            let seed = if grounds.iter().any(ExtValue::is_infinite) {
                ExtValue::Infinite
            } else {
                let mut sum = Rational::zero();
                for (i, d) in grounds.iter().enumerate() {
                    sum += rational_pow(&half, i) * d.as_finite().unwrap();
                }
                ExtValue::finite(sum / (Rational::one() - rational_pow(&half, c)))
            };
            let spec = DiscountedIterator::new(ground, half.clone());
            cases.push(ScalarCase {
                metric,
                seed,
                step: Box::new(move |x, y, z| spec.apply(x, y, z)),
            });
        }
        for case_spec in &cases {
            // The seed really is the cycle's fixed point…
            let mut along_cycle = case_spec.seed.clone();
            for j in (p..p + c).rev() {
                along_cycle = (case_spec.step)(aa.at(j), bb.at(j), &along_cycle);
            }
            assert_eq!(
                along_cycle, case_spec.seed,
                "case {case} {}: cycle seed is not a fixed point",
                case_spec.metric
            );
            // …and folding the prefix on top reproduces the closed form.
            let mut value = case_spec.seed.clone();
            for j in (0..p).rev() {
                value = (case_spec.step)(aa.at(j), bb.at(j), &value);
            }
            let expected = case_spec.metric.eval_exact(&a, &b).unwrap();
            assert_eq!(
                value, expected,
                "case {case} {}: recursion disagrees with closed form",
                case_spec.metric
            );
        }

        // Maximum lead: the lattice is lead-indexed, so the cycle fixed
        // point is a function of the incoming lead.
        let diffs: Vec<Rational> = (0..p + c)
            .map(|j| &aa.at(j).value - &bb.at(j).value)
            .collect();
        let labels_match = (0..p + c).all(|j| aa.at(j).same_label(bb.at(j)));
        let drift: Rational = diffs[p..].iter().sum();
        let cycle_fixed: LeadFn = if !labels_match || !drift.is_zero() {
            Rc::new(|_| ExtValue::Infinite)
        } else {
            let partials: Vec<Rational> = diffs[p..]
                .iter()
                .scan(Rational::zero(), |acc, d| {
                    *acc += d;
                    Some(acc.clone())
                })
                .collect();
            Rc::new(move |lead| {
                partials
                    .iter()
                    .map(|partial| ExtValue::from_abs(&(lead + partial)))
                    .max()
                    .expect("cycle nonempty")
            })
        };
        // Fixed-point check at a few sample leads.
        let mut along_cycle = cycle_fixed.clone();
        for j in (p..p + c).rev() {
            along_cycle = lead_step(aa.at(j), bb.at(j), along_cycle);
        }
        for probe in ["0", "1", "-3/2"] {
            assert_eq!(
                along_cycle(&rat(probe)),
                cycle_fixed(&rat(probe)),
                "case {case} maxlead: cycle seed is not a fixed point at {probe}"
            );
        }
        let mut lead_value = cycle_fixed;
        for j in (0..p).rev() {
            lead_value = lead_step(aa.at(j), bb.at(j), lead_value);
        }
        let expected = TraceMetric::maxlead().eval_exact(&a, &b).unwrap();
        assert_eq!(
            lead_value(&Rational::zero()),
            expected,
            "case {case} maxlead: recursion disagrees with closed form"
        );
    }
    assert!(
        started.elapsed().as_secs() < 30,
        "criterion 8 exceeded 30 s"
    );
    pass("8 (one-step recursion reproduces closed forms)", started);
}

// A few sanity checks shared by the criteria above.

#[test]
fn metrics_without_iterators_are_rejected() {
    let sys = random_wts(&RandomWtsConfig::new(2, 1));
    for descriptor in ["acc-lavg", "hamming-davg"] {
        let metric = TraceMetric::parse(descriptor).unwrap();
        assert!(matches!(
            solve_branching(&sys, &metric, &FixpointConfig::default()),
            Err(wtsdist_core::FixpointError::NoIterator)
        ));
        // The bounded oracle still covers them.
        let q0 = sys.state("q0").unwrap();
        assert!(
            bounded_value(&sys, q0, q0, &metric, 3, &OracleLimits::default())
                .unwrap()
                .is_zero()
        );
    }
}

#[test]
fn accumulator_catalog_is_complete() {
    let descriptors = [
        ("discrete", Accumulator::Discrete),
        ("pointwise", Accumulator::Sup),
        ("acc-lavg", Accumulator::LimAvg),
        ("maxlead", Accumulator::MaxLead),
    ];
    for (text, acc) in descriptors {
        assert_eq!(TraceMetric::parse(text).unwrap().accumulator(), &acc);
    }
    assert!(matches!(
        TraceMetric::parse("acc-disc:1/2").unwrap().accumulator(),
        Accumulator::DiscountedSum(_)
    ));
}
