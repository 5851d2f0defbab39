//! `combprism`: prisms, comb and odd-set slacks, the slack-preserving
//! reduction and its protocol, from the command line.
//!
//! JSON summaries go to stdout, diagnostics to stderr. Exit codes: 0 on
//! success, 1 when a verification fails, 2 on invalid input.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use combprism::combinatorics::{
    check_matching_correspondence, enumerate_odd_sets, enumerate_perfect_matchings,
    enumerate_tours, enumerate_two_matchings, OddSet, PerfectMatching,
};
use combprism::graph::{build_prism, Edge, PrismDump, PrismGraph, VertexId};
use combprism::inequalities::{
    classify_comb, enumerate_uniform_combs, odd_set_slack, uniform_validity_sweep, CombInequality,
    CombSpec, OddSetInequality, DEFAULT_COMB_CAP,
};
use combprism::protocol::{
    bit_account, estimate_expectation, exact_protocol_sweep, run_pm_protocol, LocalCombSlack, Mode,
    ProtocolCase, ProtocolConfig, Transcript, WitnessRule, SEED_ENV,
};
use combprism::reduction::{
    exhaustive_reduction_check, reduce, witness_choices, ReductionInstance, SweepConfig,
    TourPolicy, Witnesses,
};
use combprism::slack_lab::{build_slack_matrix, facet_check, Family};
use combprism::Error;
use num_rational::Rational64;
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "combprism",
    version,
    about = "Comb inequalities, subdivided prisms and slack-preserving reductions"
)]
struct Cli {
    /// Worker threads for parallel sweeps (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vertex and edge counts of the t-subdivided prism of K_n.
    PrismInfo {
        #[arg(long)]
        base_n: usize,
        #[arg(long)]
        t: usize,
        /// Also print the canonical edge list.
        #[arg(long)]
        dump: bool,
    },
    /// Enumerate tours, perfect matchings, odd sets, uniform combs or prism 2-matchings.
    Enumerate(EnumerateArgs),
    /// Build the comb and tour for one odd set and perfect matching.
    Reduce(ReduceArgs),
    /// Exhaustive verification sweeps.
    #[command(subcommand)]
    Verify(Verify),
    /// Run the odd-set slack protocol on one input.
    Protocol(ProtocolArgs),
    /// Write a slack matrix as CSV.
    SlackMatrix(SlackMatrixArgs),
    /// Check whether a comb inequality defines a facet of the tours of K_n.
    FacetCheck {
        #[arg(long)]
        n: usize,
        /// JSON file with `handle`, `teeth` and optional `rhs`.
        #[arg(long)]
        comb: PathBuf,
    },
    /// Matching / 2-matching correspondence over the 3-subdivided prism.
    #[command(alias = "prop1")]
    Correspondence {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "3,4")]
        prism_bases: Vec<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Tours,
    Matchings,
    OddSets,
    UniformCombs,
    TwoMatchings,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Odd-set size.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    /// Maximum number of items listed.
    #[arg(long, default_value_t = 1000)]
    cap: usize,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Odd set as comma-separated vertex ids.
    #[arg(long = "odd-set", visible_alias = "set", value_parser = parse_vertices)]
    set: Vertices,
    /// Perfect matching as comma-separated `u-v` pairs.
    #[arg(long, value_parser = parse_edges)]
    matching: Edges,
    #[arg(long)]
    w1: Option<VertexId>,
    #[arg(long)]
    w3: Option<VertexId>,
    #[arg(long)]
    h: usize,
    #[arg(long)]
    t: usize,
    /// Randomise the tour insertions with this seed instead of the lexicographic rule.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Every condition of the reduction over all odd sets, matchings and witness choices.
    #[command(alias = "lemma1")]
    Reduction {
        #[arg(long)]
        base_n: usize,
        #[arg(long, default_value_t = 4)]
        t_max: usize,
        /// Try every witness choice rather than the first.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Every capped (h,t)-uniform comb of K_n against every tour.
    Validity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = DEFAULT_COMB_CAP)]
        cap: usize,
    },
    /// Exact protocol output against the odd-set slack for every input on K_m.
    Protocol {
        #[arg(long)]
        base_m: usize,
        #[arg(long, default_value_t = 4)]
        t_max: usize,
        /// Declared cost of the comb-slack sub-protocol.
        #[arg(long, default_value_t = 0)]
        declared_bits: u32,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WitnessArg {
    Smallest,
    Random,
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    /// Vertex count of the base graph; inferred from the matching when absent.
    #[arg(long)]
    base_n: Option<usize>,
    /// Odd set as comma-separated vertex ids.
    #[arg(long = "odd-set", visible_alias = "set", value_parser = parse_vertices)]
    set: Vertices,
    /// Perfect matching as comma-separated `u-v` pairs.
    #[arg(long, value_parser = parse_edges)]
    matching: Edges,
    #[arg(long, default_value_t = 1)]
    h: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = WitnessArg::Smallest)]
    witness: WitnessArg,
    #[arg(long, default_value_t = 0)]
    declared_bits: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    UniformCombs,
    OddSets,
}

#[derive(Args, Debug)]
struct SlackMatrixArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    /// Odd-set size; all odd sizes when absent.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Vertices(Vec<VertexId>);

#[derive(Clone, Debug)]
struct Edges(Vec<Edge>);

fn parse_vertex(s: &str) -> Result<VertexId, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("not a vertex id: {s:?}"))
}

fn parse_vertices(s: &str) -> Result<Vertices, String> {
    s.split(',')
        .map(parse_vertex)
        .collect::<Result<_, _>>()
        .map(Vertices)
}

fn parse_edges(s: &str) -> Result<Edges, String> {
    s.split(',')
        .map(|pair| {
            let (u, v) = pair
                .split_once('-')
                .ok_or_else(|| format!("expected u-v, got {pair:?}"))?;
            Edge::new(parse_vertex(u)?, parse_vertex(v)?).map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()
        .map(Edges)
}

/// Failures are either invalid input (exit 2) or a failed verification (exit 1).
enum Failure {
    Input(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleMismatch { .. } => {
                eprintln!("error: {e}");
                Failure::Verification
            }
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn emit<T: Serialize>(value: &T) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn check(ok: bool, what: &str) -> Outcome {
    if ok {
        Ok(())
    } else {
        eprintln!("verification failed: {what}");
        Err(Failure::Verification)
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Input(format!("--{flag} is required here")))
}

fn matching_and_set(
    matching: Edges,
    set: Vertices,
    base_n: Option<usize>,
) -> Result<(PerfectMatching, OddSet), Failure> {
    let n = base_n.unwrap_or(2 * matching.0.len());
    let pm = PerfectMatching::new(n, matching.0)?;
    let set = OddSet::new(n, set.0)?;
    Ok((pm, set))
}

fn labels<T>(items: &[T], cap: usize, label: impl Fn(&T) -> String) -> serde_json::Value {
    json!({
        "count": items.len(),
        "truncated": items.len() > cap,
        "items": items.iter().take(cap).map(label).collect::<Vec<_>>(),
    })
}

fn enumerate(args: EnumerateArgs) -> Outcome {
    let n = args.n;
    let listing = match args.kind {
        Kind::Tours => labels(&enumerate_tours(n)?, args.cap, |t| t.label()),
        Kind::Matchings => labels(&enumerate_perfect_matchings(n)?, args.cap, |m| m.label()),
        Kind::OddSets => labels(
            &enumerate_odd_sets(n, require(args.size, "size")?)?,
            args.cap,
            |s| s.label(),
        ),
        Kind::UniformCombs => {
            let (h, t) = (require(args.h, "h")?, require(args.t, "t")?);
            let combs = enumerate_uniform_combs(n, h, t, DEFAULT_COMB_CAP)?;
            labels(&combs, args.cap, |c| c.label())
        }
        Kind::TwoMatchings => {
            let prism = PrismGraph::new(n, args.t.unwrap_or(3))?;
            let all = enumerate_two_matchings(prism.graph());
            labels(&all, args.cap, |x| {
                x.edges()
                    .iter()
                    .map(Edge::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            })
        }
    };
    emit(&listing)
}

fn run_reduce(args: ReduceArgs) -> Outcome {
    let (matching, set) = matching_and_set(args.matching, args.set, None)?;
    if set.len() < 5 {
        return Err(Failure::Input(format!(
            "the reduction needs |S| >= 5, got {}",
            set.len()
        )));
    }
    let (w1, w3) = match (args.w1, args.w3) {
        (Some(w1), Some(w3)) => (w1, w3),
        (None, None) => *witness_choices(&set, &matching).first().ok_or_else(|| {
            Failure::Input("fewer than two matching edges lie inside the odd set".into())
        })?,
        _ => return Err(Failure::Input("give both --w1 and --w3 or neither".into())),
    };
    let inst = ReductionInstance::from_choice(set, matching, w1, w3, args.h, args.t)?;
    let policy = args
        .seed
        .map_or(TourPolicy::Lexicographic, TourPolicy::Seeded);
    let r = reduce(&inst, policy)?;
    emit(&json!({
        "witnesses": inst.witnesses,
        "comb": r.comb,
        "class": classify_comb(r.comb.comb()).ok(),
        "tour": r.tour,
        "sl_comb": r.sl_comb,
        "sl_odd": r.sl_odd,
        "report": r.report,
        "passed": r.report.passed(),
    }))?;
    check(r.report.passed(), "reduction conditions")
}

fn verify(cmd: Verify) -> Outcome {
    match cmd {
        Verify::Reduction {
            base_n,
            t_max,
            exhaustive,
        } => {
            if t_max < 2 {
                return Err(Failure::Input("--t-max must be at least 2".into()));
            }
            let config = SweepConfig {
                all_witness_choices: exhaustive,
                ..SweepConfig::exhaustive(base_n, 2..=t_max)
            };
            let summary = exhaustive_reduction_check(&config)?;
            emit(&summary)?;
            check(
                summary.checked > 0 && summary.failed == 0,
                "reduction sweep",
            )
        }
        Verify::Validity { n, h, t, cap } => {
            let sweep = uniform_validity_sweep(n, h, t, cap)?;
            emit(&sweep)?;
            check(sweep.violations == 0, "comb validity")
        }
        Verify::Protocol {
            base_m,
            t_max,
            declared_bits,
        } => {
            if t_max < 2 {
                return Err(Failure::Input("--t-max must be at least 2".into()));
            }
            let sweep = exact_protocol_sweep(base_m, t_max, &LocalCombSlack { declared_bits })?;
            emit(&sweep)?;
            check(
                sweep.mismatches == 0 && sweep.budget_violations == 0,
                "protocol sweep",
            )
        }
    }
}

#[derive(Serialize)]
struct Fraction {
    num: i64,
    den: i64,
}

impl From<Rational64> for Fraction {
    fn from(r: Rational64) -> Self {
        Fraction {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

#[derive(Serialize)]
struct ExactReport {
    output: Fraction,
    expected_slack: i64,
    matches: bool,
    case: ProtocolCase,
    bits: u64,
    budget: u64,
    budget_ok: bool,
    witnesses: Option<Witnesses>,
    transcript: Transcript,
}

fn run_protocol(args: ProtocolArgs) -> Outcome {
    let (matching, set) = matching_and_set(args.matching, args.set, args.base_n)?;
    let oracle = LocalCombSlack {
        declared_bits: args.declared_bits,
    };
    let config = ProtocolConfig {
        t: args.t,
        h: args.h,
        mode: Mode::Exact,
        witness_rule: match args.witness {
            WitnessArg::Smallest => WitnessRule::Smallest,
            WitnessArg::Random => WitnessRule::Random,
        },
        seed: args.seed,
    };
    let expected = odd_set_slack(&OddSetInequality::new(set.clone()), &matching)?;
    let m = matching.vertex_count();
    match args.mode {
        ModeArg::Exact => {
            let outcome = run_pm_protocol(&set, &matching, &config, &oracle)?;
            let audit = bit_account(&outcome, m, args.declared_bits);
            let matches = outcome.output == Rational64::from_integer(expected);
            let budget_ok = audit.within_budget && audit.consistent;
            emit(&ExactReport {
                output: outcome.output.into(),
                expected_slack: expected,
                matches,
                case: outcome.case,
                bits: audit.total_bits,
                budget: audit.budget,
                budget_ok,
                witnesses: outcome.witnesses,
                transcript: outcome.transcript,
            })?;
            check(matches && budget_ok, "protocol output or budget")
        }
        ModeArg::Mc => {
            let est = estimate_expectation(&set, &matching, &config, &oracle, args.trials)?;
            let within = (est.mean - expected as f64).abs() <= 5.0 * est.std_error;
            emit(&json!({
                "expected_slack": expected,
                "seed": args.seed,
                "monte_carlo": est,
                "within_5_se": within,
            }))?;
            check(within, "Monte-Carlo estimate")
        }
    }
}

fn slack_matrix(args: SlackMatrixArgs) -> Outcome {
    let family = match args.family {
        FamilyArg::UniformCombs => Family::UniformCombs {
            h: require(args.h, "h")?,
            t: require(args.t, "t")?,
        },
        FamilyArg::OddSets => Family::OddSets { size: args.size },
    };
    let matrix = build_slack_matrix(family, args.n, args.cap)?;
    match &args.out {
        Some(path) => {
            matrix.write_csv(BufWriter::new(File::create(path)?))?;
            emit(&json!({
                "family": family,
                "n": matrix.n,
                "rows": matrix.rows(),
                "cols": matrix.cols(),
                "cap": matrix.cap,
                "truncated": matrix.truncated,
                "min_entry": matrix.min_entry(),
                "out": path,
            }))?;
        }
        None => matrix.write_csv(io::stdout().lock())?,
    }
    check(
        matrix.min_entry().is_none_or(|x| x >= 0),
        "nonnegative slacks",
    )
}

fn run_facet_check(n: usize, path: PathBuf) -> Outcome {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let spec: CombSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let ineq = CombInequality::from_spec(n, &spec)?;
    let report = facet_check(&ineq, n)?;
    if let Some(d) = &report.diagnostic {
        eprintln!("{d}");
    }
    emit(&report)?;
    check(report.facet, "facet")
}

#[derive(Serialize)]
struct PrismInfo {
    vertices: usize,
    edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    dump: Option<PrismDump>,
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::PrismInfo { base_n, t, dump } => {
            let prism = build_prism(base_n, t)?;
            emit(&PrismInfo {
                vertices: prism.vertex_count(),
                edges: prism.edge_count(),
                dump: dump.then(|| prism.dump()),
            })
        }
        Command::Enumerate(args) => enumerate(args),
        Command::Reduce(args) => run_reduce(args),
        Command::Verify(cmd) => verify(cmd),
        Command::Protocol(args) => run_protocol(args),
        Command::SlackMatrix(args) => slack_matrix(args),
        Command::FacetCheck { n, comb } => run_facet_check(n, comb),
        Command::Correspondence { sizes, prism_bases } => {
            let report = check_matching_correspondence(&sizes, &prism_bases)?;
            emit(&report)?;
            check(report.passed(), "matching correspondence")
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
