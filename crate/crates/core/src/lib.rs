//! Linear and branching distances between states of finite weighted
//! transition systems.
//!
//! The library takes a pluggable trace distance — a hemimetric on infinite
//! weight sequences — and derives two state distances from it: the *linear*
//! distance, where one side commits to a whole path up front, and the
//! *branching* distance, where paths are built move by move in a turn-based
//! game. Branching distances are computed as least fixed points of a
//! per-metric step function on a lattice ([`fixpoint`]); bounded-depth game
//! searches serve as validating oracles ([`game`]); linear distances come
//! with exact decisions for discrete metrics and certified brackets or
//! estimates otherwise ([`linear`]).
//!
//! Systems are finite and non-blocking; infinite traces are represented as
//! lassos (finite prefix plus repeating cycle), on which every supported
//! metric has an exact closed form. All arithmetic is exact rational;
//! nothing is rounded through floating point.

pub mod fixpoint;
pub mod game;
pub mod generators;
pub mod lasso;
pub mod linear;
pub mod metrics;
pub mod rational;
pub mod value;
pub mod wts;

pub use fixpoint::{
    branching_distance, discrete_simulation_check, greatest_simulation, iterator_for, kleene_lfp,
    solve_branching, BranchingOutcome, DistanceValue, FixpointConfig, FixpointError,
    FixpointOutcome, FixpointStatus, LeadCapPolicy, PairFunction,
};
pub use game::{
    bounded_blind_value, bounded_value, bounded_value_search, playout, round, Configuration,
    GameError, OracleLimits, Playout,
};
pub use generators::{build_inequivalence, random_wts, GeneratorError, IneqSpec, RandomWtsConfig};
pub use lasso::{align, trace_of_lasso_path, LassoError, LassoTrace};
pub use linear::{
    linear_bound, linear_discrete, linear_discrete_with, linear_lasso_estimate, LinearBound,
    MethodTag,
};
pub use metrics::{Accumulator, GroundMetric, LabelPreorder, MetricError, TraceMetric};
pub use rational::{format_rational, parse_rational, Rational};
pub use value::ExtValue;
pub use wts::{
    enumerate_lassos, parse_wts, serialize_wts, FinitePath, LassoPath, StateId, Transition, Weight,
    WeightedTransitionSystem, WtsError,
};
