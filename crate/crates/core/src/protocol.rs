//! Two-party protocol that computes the odd-set slack `|δ(S) ∩ M| - 1` in
//! expectation, given a sub-protocol for uniform comb slacks.
//!
//! Alice holds the odd set `S`, Bob the perfect matching `M` of `K_m`.
//!
//! * `|S| < 5`: Alice sends all of `S`; Bob outputs the slack.
//! * Otherwise Alice sends `w1 ∈ S`, Bob answers its mate `w2`, Alice sends
//!   `w3 ∈ S \ {w1, w2}`, Bob answers `w4`, and Alice sends one case bit.
//!   - Case A (`w2 ∉ S` or `w4 ∉ S`): Alice knows a crossing edge `e`. Bob
//!     sends a uniformly random `e' ∈ M`; Alice outputs `|M|` if `e'` crosses
//!     `S` and `e' ≠ e`, else 0.
//!   - Case B: Alice builds the comb and Bob the tour locally, then both run
//!     the comb-slack sub-protocol, modelled as an oracle with a declared cost.
//!
//! Messages use fixed widths: `⌈log₂ m⌉` bits per vertex, `⌈log₂ C(m,2)⌉`
//! bits per edge, one bit for the case flag.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::combinatorics::{
    enumerate_odd_sets, enumerate_perfect_matchings, OddSet, PerfectMatching, Tour,
};
use crate::error::{Error, Result};
use crate::graph::{binomial2, complete_edge_index, Edge, VertexId};
use crate::inequalities::{comb_slack, odd_set_slack, CombInequality, OddSetInequality};
use crate::reduction::{
    build_comb_from_odd_set, build_tour_from_matching, ReductionInstance, TourPolicy, Witnesses,
};

/// Environment variable consulted for a default seed by front ends.
pub const SEED_ENV: &str = "COMBPRISM_SEED";

pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
    /// Both players, inside the comb-slack sub-protocol.
    Joint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Message {
    pub sender: Party,
    pub label: &'static str,
    pub bits: u32,
    /// `None` when the content is averaged over (exact mode) or opaque (sub-protocol).
    pub payload: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    messages: Vec<Message>,
    total_bits: u64,
}

impl Transcript {
    fn send(&mut self, sender: Party, label: &'static str, bits: u32, payload: Option<u64>) {
        if let Some(p) = payload {
            debug_assert!(
                bits >= 64 || p < 1u64 << bits,
                "{label} payload {p} exceeds {bits} bits"
            );
        }
        self.total_bits += u64::from(bits);
        self.messages.push(Message {
            sender,
            label,
            bits,
            payload,
        });
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolCase {
    SmallSet,
    CaseA,
    CaseB,
}

fn serialize_ratio<S: Serializer>(
    value: &Rational64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Exact {
        num: i64,
        den: i64,
    }
    Exact {
        num: *value.numer(),
        den: *value.denom(),
    }
    .serialize(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolOutcome {
    /// Exact expectation in exact mode, the realised output in sample mode.
    #[serde(serialize_with = "serialize_ratio")]
    pub output: Rational64,
    pub case: ProtocolCase,
    pub witnesses: Option<Witnesses>,
    pub transcript: Transcript,
}

/// Comb-slack sub-protocol, modelled as a local evaluation with a declared cost.
pub trait CombSlackOracle: Sync {
    fn evaluate(&self, ineq: &CombInequality, tour: &Tour) -> Result<i64>;

    fn declared_bits(&self) -> u32;
}

/// Evaluates the comb slack directly and declares `r` bits for it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocalCombSlack {
    pub declared_bits: u32,
}

impl CombSlackOracle for LocalCombSlack {
    fn evaluate(&self, ineq: &CombInequality, tour: &Tour) -> Result<i64> {
        comb_slack(ineq, tour)
    }

    fn declared_bits(&self) -> u32 {
        self.declared_bits
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Average over Bob's random edge exactly.
    #[default]
    Exact,
    /// Draw Bob's edge from the random source.
    Sample,
}

/// How Alice picks `w1` and `w3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WitnessRule {
    #[default]
    Smallest,
    /// Uniformly from the allowed vertices, using the run's random source.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub t: usize,
    pub h: usize,
    pub mode: Mode,
    pub witness_rule: WitnessRule,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn exact(h: usize, t: usize) -> Self {
        ProtocolConfig {
            t,
            h,
            mode: Mode::Exact,
            witness_rule: WitnessRule::Smallest,
            seed: 0,
        }
    }
}

/// Deterministic stream for one protocol run; trial `i` of a Monte-Carlo
/// estimate uses stream `i` of the same seed.
pub fn random_source(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn run_pm_protocol(
    set: &OddSet,
    matching: &PerfectMatching,
    config: &ProtocolConfig,
    oracle: &dyn CombSlackOracle,
) -> Result<ProtocolOutcome> {
    let mut rng = random_source(config.seed, 0);
    run_with_rng(set, matching, config, oracle, &mut rng)
}

fn pick(rng: &mut ChaCha8Rng, rule: WitnessRule, candidates: &[VertexId]) -> VertexId {
    match rule {
        WitnessRule::Smallest => candidates[0],
        WitnessRule::Random => candidates[rng.gen_range(0..candidates.len())],
    }
}

fn run_with_rng(
    set: &OddSet,
    matching: &PerfectMatching,
    config: &ProtocolConfig,
    oracle: &dyn CombSlackOracle,
    rng: &mut ChaCha8Rng,
) -> Result<ProtocolOutcome> {
    let m = matching.vertex_count();
    if set.universe() != m {
        return Err(Error::UniverseMismatch(format!(
            "odd set over {} vertices, matching over {m}",
            set.universe()
        )));
    }
    if config.h == 0 || config.h >= config.t {
        return Err(Error::precondition(format!(
            "need 1 <= h < t, got h = {}, t = {}",
            config.h, config.t
        )));
    }
    let vertex_bits = ceil_log2(m);
    let edge_bits = ceil_log2(binomial2(m));
    let mut transcript = Transcript::default();

    if set.len() < 5 {
        for &v in set.members() {
            transcript.send(Party::Alice, "set_member", vertex_bits, Some(v as u64));
        }
        let slack = odd_set_slack(&OddSetInequality::new(set.clone()), matching)?;
        return Ok(ProtocolOutcome {
            output: Rational64::from_integer(slack),
            case: ProtocolCase::SmallSet,
            witnesses: None,
            transcript,
        });
    }

    let mate = |v: VertexId| {
        matching
            .mate(v)
            .expect("perfect matching covers every vertex")
    };
    let w1 = pick(rng, config.witness_rule, set.members());
    transcript.send(Party::Alice, "w1", vertex_bits, Some(w1 as u64));
    let w2 = mate(w1);
    transcript.send(Party::Bob, "w2", vertex_bits, Some(w2 as u64));
    let rest: Vec<VertexId> = set
        .members()
        .iter()
        .copied()
        .filter(|&v| v != w1 && v != w2)
        .collect();
    let w3 = pick(rng, config.witness_rule, &rest);
    transcript.send(Party::Alice, "w3", vertex_bits, Some(w3 as u64));
    let w4 = mate(w3);
    transcript.send(Party::Bob, "w4", vertex_bits, Some(w4 as u64));
    let witnesses = Witnesses { w1, w2, w3, w4 };

    let both_inside = set.contains(w2) && set.contains(w4);
    transcript.send(Party::Alice, "case", 1, Some(u64::from(both_inside)));

    if !both_inside {
        let known = if set.contains(w2) {
            Edge::new(w3, w4)?
        } else {
            Edge::new(w1, w2)?
        };
        let mask = set.mask();
        let size = matching.len() as i64;
        let payout = |e: Edge| {
            if e != known && e.crosses(&mask) {
                size
            } else {
                0
            }
        };
        let output = match config.mode {
            Mode::Exact => {
                transcript.send(Party::Bob, "random_edge", edge_bits, None);
                let total: i64 = matching.edges().iter().map(|&e| payout(e)).sum();
                Rational64::new(total, size)
            }
            Mode::Sample => {
                let e = matching.edges()[rng.gen_range(0..matching.len())];
                transcript.send(
                    Party::Bob,
                    "random_edge",
                    edge_bits,
                    Some(complete_edge_index(m, e) as u64),
                );
                Rational64::from_integer(payout(e))
            }
        };
        return Ok(ProtocolOutcome {
            output,
            case: ProtocolCase::CaseA,
            witnesses: Some(witnesses),
            transcript,
        });
    }

    let inst =
        ReductionInstance::new(set.clone(), matching.clone(), witnesses, config.h, config.t)?;
    // Alice's side
    let comb = CombInequality::new(build_comb_from_odd_set(&inst.comb_inputs())?);
    // Bob's side
    let tour = build_tour_from_matching(&inst.tour_inputs(), TourPolicy::Lexicographic)?.tour;
    let value = oracle.evaluate(&comb, &tour)?;
    let local = comb_slack(&comb, &tour)?;
    if value != local {
        return Err(Error::OracleMismatch {
            oracle: value,
            local,
        });
    }
    transcript.send(Party::Joint, "comb_slack", oracle.declared_bits(), None);
    Ok(ProtocolOutcome {
        output: Rational64::from_integer(value),
        case: ProtocolCase::CaseB,
        witnesses: Some(witnesses),
        transcript,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BitAudit {
    pub case: ProtocolCase,
    pub total_bits: u64,
    pub budget: u64,
    pub within_budget: bool,
    /// Message widths add up to the recorded total.
    pub consistent: bool,
}

/// Checks the transcript against the per-case budget: `4⌈log₂ m⌉` for the
/// small-set shortcut, plus `1 + ⌈log₂ C(m,2)⌉` in case A and `1 + r` in case B.
pub fn bit_account(outcome: &ProtocolOutcome, base_m: usize, declared_bits: u32) -> BitAudit {
    let vertex_budget = 4 * u64::from(ceil_log2(base_m));
    let budget = match outcome.case {
        ProtocolCase::SmallSet => vertex_budget,
        ProtocolCase::CaseA => vertex_budget + 1 + u64::from(ceil_log2(binomial2(base_m))),
        ProtocolCase::CaseB => vertex_budget + 1 + u64::from(declared_bits),
    };
    let total_bits = outcome.transcript.total_bits();
    let summed: u64 = outcome
        .transcript
        .messages()
        .iter()
        .map(|m| u64::from(m.bits))
        .sum();
    BitAudit {
        case: outcome.case,
        total_bits,
        budget,
        within_budget: total_bits <= budget,
        consistent: summed == total_bits,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub trials: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Mean and standard error of `trials` sampled runs; trial `i` uses stream `i` of `seed`.
pub fn estimate_expectation(
    set: &OddSet,
    matching: &PerfectMatching,
    config: &ProtocolConfig,
    oracle: &dyn CombSlackOracle,
    trials: usize,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let config = ProtocolConfig {
        mode: Mode::Sample,
        ..*config
    };
    let outputs: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = random_source(config.seed, trial);
            run_with_rng(set, matching, &config, oracle, &mut rng).map(|o| {
                let r = o.output;
                *r.numer() as f64 / *r.denom() as f64
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = trials as f64;
    let mean = outputs.iter().sum::<f64>() / n;
    let variance = if trials > 1 {
        outputs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(Estimate {
        trials,
        mean,
        std_error: (variance / n).sqrt(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProtocolSweep {
    pub base_m: usize,
    pub runs: usize,
    pub small_set: usize,
    pub case_a: usize,
    pub case_b: usize,
    pub mismatches: usize,
    pub budget_violations: usize,
}

/// Runs the exact protocol on every odd set and perfect matching of `K_m` for
/// every `1 <= h < t <= t_max`, comparing against the odd-set slack.
pub fn exact_protocol_sweep(
    base_m: usize,
    t_max: usize,
    oracle: &dyn CombSlackOracle,
) -> Result<ProtocolSweep> {
    let matchings = enumerate_perfect_matchings(base_m)?;
    let mut sets = Vec::new();
    for size in (1..base_m).step_by(2) {
        sets.extend(enumerate_odd_sets(base_m, size)?);
    }
    let params: Vec<(usize, usize)> = (2..=t_max)
        .flat_map(|t| (1..t).map(move |h| (h, t)))
        .collect();
    let partial: Vec<Result<ProtocolSweep>> = sets
        .par_iter()
        .map(|set| {
            let mut s = ProtocolSweep::default();
            let ineq = OddSetInequality::new(set.clone());
            for pm in &matchings {
                let expected = Rational64::from_integer(odd_set_slack(&ineq, pm)?);
                for &(h, t) in &params {
                    let outcome = run_pm_protocol(set, pm, &ProtocolConfig::exact(h, t), oracle)?;
                    s.runs += 1;
                    match outcome.case {
                        ProtocolCase::SmallSet => s.small_set += 1,
                        ProtocolCase::CaseA => s.case_a += 1,
                        ProtocolCase::CaseB => s.case_b += 1,
                    }
                    s.mismatches += usize::from(outcome.output != expected);
                    let audit = bit_account(&outcome, base_m, oracle.declared_bits());
                    s.budget_violations += usize::from(!audit.within_budget || !audit.consistent);
                }
            }
            Ok(s)
        })
        .collect();
    let mut total = ProtocolSweep {
        base_m,
        ..ProtocolSweep::default()
    };
    for p in partial {
        let p = p?;
        total.runs += p.runs;
        total.small_set += p.small_set;
        total.case_a += p.case_a;
        total.case_b += p.case_b;
        total.mismatches += p.mismatches;
        total.budget_violations += p.budget_violations;
    }
    Ok(total)
}
