//! Command-line front end: validation, branching and linear distances, game
//! oracles, instance generation, and a batch property checker.
//!
//! Results go to stdout as one JSON record per line (`--format table` for a
//! human-readable listing). Output is deterministic for fixed inputs and
//! flags; wall-clock timings are only included on request.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 non-convergence or
//! budget exhaustion, 3 property violation found by `compare`.

mod record;

use clap::{Args, Parser, Subcommand, ValueEnum};
use record::{Record, Value as RecordValue};
use std::fs;
use std::process::ExitCode;
use std::time::Instant;
use wtsdist_core::fixpoint::FixpointError;
use wtsdist_core::game::GameError;
use wtsdist_core::generators::{build_inequivalence, random_wts, IneqSpec, RandomWtsConfig};
use wtsdist_core::lasso::LassoTrace;
use wtsdist_core::linear::MethodTag;
use wtsdist_core::{
    bounded_blind_value, bounded_value, linear_bound, linear_discrete_with, linear_lasso_estimate,
    parse_rational, parse_wts, serialize_wts, solve_branching, ExtValue, FixpointConfig,
    FixpointStatus, GroundMetric, LabelPreorder, OracleLimits, Rational, StateId, TraceMetric,
    WeightedTransitionSystem,
};

#[derive(Parser)]
#[command(
    name = "wtsdist",
    version,
    about = "Distances between states of weighted transition systems"
)]
struct Cli {
    /// Output format for result records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall-clock timings in records (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a system document.
    Validate { file: String },
    /// Branching distance via the least-fixed-point engine.
    Branch(BranchArgs),
    /// Linear distance: exact for discrete metrics, bounds or lasso
    /// estimates otherwise.
    Linear(LinearArgs),
    /// Bounded-depth game value oracles.
    Oracle(OracleArgs),
    /// Generate systems.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Check distance laws on a random suite and report violations.
    Compare(CompareArgs),
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long)]
    metric: String,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// Lead cap for the maximum-lead metric.
    #[arg(long, default_value = "16")]
    cap: String,
    /// Certified accuracy for discounted metrics.
    #[arg(long, default_value = "1/1000000000")]
    eps: String,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Evaluate fixed-point sweeps on N threads (identical results).
    #[arg(long)]
    jobs: Option<usize>,
    file: String,
}

#[derive(Args)]
struct LinearArgs {
    #[arg(long)]
    metric: String,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// Depth for the certified lower bound (bracket for discounted metrics).
    #[arg(long, conflicts_with = "lasso")]
    depth: Option<usize>,
    /// `P,C`: estimate over lassos with prefix ≤ P and cycle ≤ C.
    #[arg(long)]
    lasso: Option<String>,
    /// Prune subset states subsumed by an already-explored one.
    #[arg(long)]
    antichain: bool,
    file: String,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    metric: String,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// Game-tree depth.
    #[arg(long)]
    depth: usize,
    /// Compute the 1-blind value instead of the full-information value.
    #[arg(long)]
    blind: bool,
    file: String,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Build the system on which linear and branching distance disagree,
    /// from two traces separated by the metric.
    Ineq {
        #[arg(long)]
        metric: String,
        /// Lasso literal `prefix | cycle`, items `label:weight` or bare weights.
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        tau: String,
        /// Write the system here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Seed-deterministic random system.
    Random {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        max_out: usize,
        /// Alphabet size; 0 generates an unlabeled system.
        #[arg(long, default_value_t = 0)]
        alphabet: usize,
        #[arg(long, default_value = "0")]
        min: String,
        #[arg(long, default_value = "3")]
        max: String,
        /// Weights are multiples of 1/denominator.
        #[arg(long, default_value_t = 1)]
        denominator: u32,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
struct CompareArgs {
    /// Number of random systems.
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    states: usize,
    #[arg(long, default_value_t = 3)]
    max_out: usize,
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated metric descriptors.
    #[arg(long, default_value = "discrete,pointwise,acc-disc:1/2")]
    metrics: String,
    /// Oracle depth for the game-value checks.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value = "1/1000000000")]
    eps: String,
}

struct Reporter {
    format: Format,
    timings: bool,
    started: Instant,
}

impl Reporter {
    fn emit(&self, mut record: Record) {
        if self.timings {
            record.wall_ms = Some(self.started.elapsed().as_millis() as u64);
        }
        match self.format {
            Format::Json => println!("{}", record.to_json()),
            Format::Table => println!("{}", record.to_table()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let reporter = Reporter {
        format: cli.format,
        timings: cli.timings,
        started: Instant::now(),
    };
    match run(&cli.command, &reporter) {
        Ok(code) => code,
        Err(failure) => {
            let mut record = Record::new(failure.command);
            record.status = "ERROR".to_string();
            record.message = Some(failure.message);
            reporter.emit(record);
            failure.exit
        }
    }
}

struct Failure {
    command: &'static str,
    message: String,
    exit: ExitCode,
}

impl Failure {
    fn input(command: &'static str, message: impl ToString) -> Self {
        Failure {
            command,
            message: message.to_string(),
            exit: ExitCode::from(1),
        }
    }

    fn budget(command: &'static str, message: impl ToString) -> Self {
        Failure {
            command,
            message: message.to_string(),
            exit: ExitCode::from(2),
        }
    }
}

fn oracle_limits() -> OracleLimits {
    match std::env::var("WTSDIST_MAX_NODES") {
        Ok(text) => match text.parse::<u64>() {
            Ok(n) => OracleLimits::with_max_nodes(n),
            Err(_) => OracleLimits::default(),
        },
        Err(_) => OracleLimits::default(),
    }
}

fn load_system(command: &'static str, path: &str) -> Result<WeightedTransitionSystem, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(command, format!("cannot read {path}: {e}")))?;
    parse_wts(&text).map_err(|e| Failure::input(command, e))
}

fn resolve(
    command: &'static str,
    sys: &WeightedTransitionSystem,
    name: &str,
) -> Result<StateId, Failure> {
    sys.state(name)
        .ok_or_else(|| Failure::input(command, format!("unknown state {name:?}")))
}

fn metric(command: &'static str, descriptor: &str) -> Result<TraceMetric, Failure> {
    TraceMetric::parse(descriptor).map_err(|e| Failure::input(command, e))
}

fn rational(command: &'static str, text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::input(command, e))
}

fn game_failure(command: &'static str, err: GameError) -> Failure {
    match err {
        GameError::BudgetExceeded { .. } => Failure::budget(command, err),
        other => Failure::input(command, other),
    }
}

fn run(command: &Command, reporter: &Reporter) -> Result<ExitCode, Failure> {
    match command {
        Command::Validate { file } => {
            let sys = load_system("validate", file)?;
            let mut record = Record::new("validate");
            record.file = Some(file.clone());
            record.message = Some(format!(
                "{} states, {} transitions, {}",
                sys.state_count(),
                sys.transitions().count(),
                if sys.is_labeled() {
                    "labeled"
                } else {
                    "unlabeled"
                }
            ));
            reporter.emit(record);
            Ok(ExitCode::SUCCESS)
        }
        Command::Branch(args) => branch(args, reporter),
        Command::Linear(args) => linear(args, reporter),
        Command::Oracle(args) => oracle(args, reporter),
        Command::Gen(args) => gen(args, reporter),
        Command::Compare(args) => compare(args, reporter),
    }
}

fn branch(args: &BranchArgs, reporter: &Reporter) -> Result<ExitCode, Failure> {
    let sys = load_system("branch", &args.file)?;
    let m = metric("branch", &args.metric)?;
    let s = resolve("branch", &sys, &args.from)?;
    let t = resolve("branch", &sys, &args.to)?;
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    let cfg = FixpointConfig {
        lead_cap: rational("branch", &args.cap)?,
        eps: rational("branch", &args.eps)?,
        max_sweeps: args.max_iter,
        parallel: args.jobs.is_some_and(|j| j > 1),
    };
    let outcome = match solve_branching(&sys, &m, &cfg) {
        Ok(outcome) => outcome,
        Err(err @ FixpointError::NoIterator) => return Err(Failure::input("branch", err)),
        Err(err) => return Err(Failure::input("branch", err)),
    };
    if outcome.status == FixpointStatus::MaxIter {
        return Err(Failure::budget(
            "branch",
            FixpointError::NotConverged {
                sweeps: outcome.iterations,
            },
        ));
    }
    let mut record = Record::new("branch");
    record.file = Some(args.file.clone());
    record.metric = Some(m.to_string());
    record.from = Some(args.from.clone());
    record.to = Some(args.to.clone());
    record.value = Some(RecordValue::from_distance(outcome.values.get(s, t)));
    record.iterations = Some(outcome.iterations);
    record.status = match &outcome.status {
        FixpointStatus::Exact => "EXACT".to_string(),
        FixpointStatus::Converged { .. } => "CONVERGED".to_string(),
        FixpointStatus::MaxIter => unreachable!("handled above"),
    };
    reporter.emit(record);
    Ok(ExitCode::SUCCESS)
}

fn linear(args: &LinearArgs, reporter: &Reporter) -> Result<ExitCode, Failure> {
    let sys = load_system("linear", &args.file)?;
    let m = metric("linear", &args.metric)?;
    let s = resolve("linear", &sys, &args.from)?;
    let t = resolve("linear", &sys, &args.to)?;
    let mut record = Record::new("linear");
    record.file = Some(args.file.clone());
    record.metric = Some(m.to_string());
    record.from = Some(args.from.clone());
    record.to = Some(args.to.clone());

    if let Some(bounds) = &args.lasso {
        let (p, c) = bounds
            .split_once(',')
            .and_then(|(p, c)| Some((p.trim().parse().ok()?, c.trim().parse().ok()?)))
            .ok_or_else(|| Failure::input("linear", "--lasso expects `P,C`"))?;
        let estimate =
            linear_lasso_estimate(&sys, s, t, &m, p, c).map_err(|e| Failure::input("linear", e))?;
        record.value = Some(RecordValue::scalar(&estimate));
        record.status = "ESTIMATE".to_string();
        reporter.emit(record);
        return Ok(ExitCode::SUCCESS);
    }

    match (&args.depth, discrete_preparation(&m)) {
        (None, Some(preorder)) => {
            let value = linear_discrete_with(&sys, s, t, preorder.as_ref(), args.antichain);
            record.value = Some(RecordValue::scalar(&value));
            record.status = "EXACT".to_string();
        }
        (Some(k), _) => {
            let bound = linear_bound(&sys, s, t, &m, *k, &oracle_limits())
                .map_err(|e| game_failure("linear", e))?;
            record.depth = Some(*k);
            record.status = match bound.method {
                MethodTag::Exact => "EXACT".to_string(),
                MethodTag::Bracket => "BRACKET".to_string(),
                MethodTag::LowerOnly => "LOWER_ONLY".to_string(),
                MethodTag::Estimate => "ESTIMATE".to_string(),
            };
            record.value = Some(if bound.lower == bound.upper {
                RecordValue::scalar(&bound.lower)
            } else {
                RecordValue::interval(&bound.lower, &bound.upper)
            });
        }
        (None, None) => {
            return Err(Failure::input(
                "linear",
                "this metric needs --depth K (certified bound) or --lasso P,C (estimate)",
            ));
        }
    }
    reporter.emit(record);
    Ok(ExitCode::SUCCESS)
}

/// For discrete metrics, the preorder to run the subset construction with.
fn discrete_preparation(m: &TraceMetric) -> Option<Option<LabelPreorder>> {
    match (m.accumulator(), m.ground()) {
        (wtsdist_core::Accumulator::Discrete, GroundMetric::DiscreteEq) => Some(None),
        (wtsdist_core::Accumulator::Discrete, GroundMetric::Preorder(pre)) => {
            Some(Some(pre.clone()))
        }
        _ => None,
    }
}

fn oracle(args: &OracleArgs, reporter: &Reporter) -> Result<ExitCode, Failure> {
    let sys = load_system("oracle", &args.file)?;
    let m = metric("oracle", &args.metric)?;
    let s = resolve("oracle", &sys, &args.from)?;
    let t = resolve("oracle", &sys, &args.to)?;
    let limits = oracle_limits();
    let value = if args.blind {
        bounded_blind_value(&sys, s, t, &m, args.depth, &limits)
    } else {
        bounded_value(&sys, s, t, &m, args.depth, &limits)
    }
    .map_err(|e| game_failure("oracle", e))?;
    let mut record = Record::new("oracle");
    record.file = Some(args.file.clone());
    record.metric = Some(m.to_string());
    record.from = Some(args.from.clone());
    record.to = Some(args.to.clone());
    record.depth = Some(args.depth);
    record.blind = Some(args.blind);
    record.value = Some(RecordValue::scalar(&value));
    record.status = "EXACT".to_string();
    reporter.emit(record);
    Ok(ExitCode::SUCCESS)
}

fn emit_system(
    command: &'static str,
    sys: &WeightedTransitionSystem,
    out: &Option<String>,
    extra: Option<String>,
    reporter: &Reporter,
) -> Result<(), Failure> {
    let pretty = serialize_wts(sys);
    match out {
        Some(path) => {
            fs::write(path, &pretty)
                .map_err(|e| Failure::input(command, format!("cannot write {path}: {e}")))?;
            let mut record = Record::new(command);
            record.file = Some(path.clone());
            record.message = extra;
            reporter.emit(record);
        }
        None => {
            // Single line, consistent with record-per-line output.
            let value: serde_json::Value =
                serde_json::from_str(&pretty).expect("serializer emits valid JSON");
            println!("{value}");
        }
    }
    Ok(())
}

fn gen(command: &GenCommand, reporter: &Reporter) -> Result<ExitCode, Failure> {
    match command {
        GenCommand::Ineq {
            metric: descriptor,
            sigma,
            tau,
            out,
        } => {
            let m = metric("gen", descriptor)?;
            let sigma = LassoTrace::parse(sigma).map_err(|e| Failure::input("gen", e))?;
            let tau = LassoTrace::parse(tau).map_err(|e| Failure::input("gen", e))?;
            let spec = IneqSpec {
                sigma,
                tau,
                metric: m,
            };
            let (sys, s, t) = build_inequivalence(&spec).map_err(|e| Failure::input("gen", e))?;
            let note = format!(
                "states {} and {} have equal trace sets but positive branching distance",
                sys.state_name(s),
                sys.state_name(t)
            );
            emit_system("gen", &sys, out, Some(note), reporter)?;
            Ok(ExitCode::SUCCESS)
        }
        GenCommand::Random {
            states,
            seed,
            max_out,
            alphabet,
            min,
            max,
            denominator,
            out,
        } => {
            if *states == 0 || *max_out == 0 || *denominator == 0 {
                return Err(Failure::input(
                    "gen",
                    "states, max-out, denominator must be ≥ 1",
                ));
            }
            let cfg = RandomWtsConfig {
                states: *states,
                max_out: *max_out,
                alphabet_size: *alphabet,
                weight_min: rational("gen", min)?,
                weight_max: rational("gen", max)?,
                denominator: *denominator,
                seed: *seed,
            };
            if cfg.weight_min > cfg.weight_max {
                return Err(Failure::input("gen", "empty weight range"));
            }
            let sys = random_wts(&cfg);
            emit_system("gen", &sys, out, None, reporter)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn compare(args: &CompareArgs, reporter: &Reporter) -> Result<ExitCode, Failure> {
    let eps = rational("compare", &args.eps)?;
    let metrics: Vec<TraceMetric> = args
        .metrics
        .split(',')
        .map(|d| metric("compare", d.trim()))
        .collect::<Result<_, _>>()?;
    let limits = oracle_limits();
    let mut violations = 0usize;
    let mut checks = 0usize;

    for index in 0..args.count {
        let cfg = RandomWtsConfig {
            states: args.states,
            max_out: args.max_out,
            alphabet_size: args.alphabet,
            seed: args.seed + index as u64,
            ..RandomWtsConfig::new(args.states, 0)
        };
        let sys = random_wts(&cfg);
        for m in &metrics {
            let outcome = solve_branching(
                &sys,
                m,
                &FixpointConfig {
                    eps: eps.clone(),
                    ..FixpointConfig::default()
                },
            )
            .map_err(|e| Failure::input("compare", e))?;
            // Approximate (converged) tables compare with ε slack.
            let slack = match &outcome.status {
                FixpointStatus::Converged { certified_error } => {
                    ExtValue::finite(certified_error.clone())
                }
                _ => ExtValue::zero(),
            };
            let mut report = |message: String| {
                violations += 1;
                let mut record = Record::new("compare");
                record.status = "ERROR".to_string();
                record.metric = Some(m.to_string());
                record.message = Some(format!("seed {}: {message}", cfg.seed));
                reporter.emit(record);
            };

            for s in sys.states() {
                for t in sys.states() {
                    for k in 1..=args.depth {
                        let blind = bounded_blind_value(&sys, s, t, m, k, &limits)
                            .map_err(|e| game_failure("compare", e))?;
                        let full = bounded_value(&sys, s, t, m, k, &limits)
                            .map_err(|e| game_failure("compare", e))?;
                        checks += 1;
                        if blind > full {
                            report(format!(
                                "blind value {blind} exceeds game value {full} at depth {k} for ({}, {})",
                                sys.state_name(s),
                                sys.state_name(t)
                            ));
                        }
                    }
                    let bound = linear_bound(&sys, s, t, m, args.depth, &limits)
                        .map_err(|e| game_failure("compare", e))?;
                    let branching = outcome.values.get(s, t);
                    checks += 1;
                    if bound.lower > branching.upper().clone() + &slack {
                        report(format!(
                            "linear lower bound {} exceeds branching distance {} for ({}, {})",
                            bound.lower,
                            branching.upper(),
                            sys.state_name(s),
                            sys.state_name(t)
                        ));
                    }
                }
            }
            // Triangle inequality over all state triples, with slack for
            // ε-converged tables.
            for a in sys.states() {
                for b in sys.states() {
                    for c in sys.states() {
                        checks += 1;
                        let via = outcome.values.get(a, b).upper().clone()
                            + outcome.values.get(b, c).upper()
                            + slack.clone()
                            + &slack;
                        if outcome.values.get(a, c).lower() > &via {
                            report(format!(
                                "triangle violated: d({0},{2}) > d({0},{1}) + d({1},{2})",
                                sys.state_name(a),
                                sys.state_name(b),
                                sys.state_name(c)
                            ));
                        }
                    }
                }
            }
        }
    }

    let mut summary = Record::new("compare");
    summary.message = Some(format!(
        "{checks} checks on {} systems, {} metrics, {violations} violations",
        args.count,
        metrics.len()
    ));
    if violations > 0 {
        summary.status = "ERROR".to_string();
        reporter.emit(summary);
        return Ok(ExitCode::from(3));
    }
    reporter.emit(summary);
    Ok(ExitCode::SUCCESS)
}
