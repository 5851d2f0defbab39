//! Comb and odd-set inequalities: structural validation, classification into
//! 2-matching / simple / `(h, t)`-uniform combs, and exact slack evaluation.
//!
//! The uniform condition is read as a cardinality: every tooth has `t`
//! vertices, `h` of which lie in the handle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    combinations, enumerate_tours, enumerate_tours_with_limit, join, OddSet, PerfectMatching, Tour,
    TOUR_ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::graph::{complete_edge_index, crossing_count, membership, Edge, VertexId};

/// Default cap on enumerated uniform combs.
pub const DEFAULT_COMB_CAP: usize = 1_000_000;

/// Handle plus teeth over the vertex universe `0..n`. Construction only
/// checks vertex ranges; the comb conditions are checked by [`validate_comb`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Comb {
    #[serde(skip)]
    n: usize,
    handle: Vec<VertexId>,
    teeth: Vec<Vec<VertexId>>,
}

/// JSON form of a comb or comb inequality: `{"handle": [...], "teeth": [[...], ...], "rhs": int?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombSpec {
    pub handle: Vec<VertexId>,
    pub teeth: Vec<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<i64>,
}

fn normalized(n: usize, mut set: Vec<VertexId>) -> Result<Vec<VertexId>> {
    set.sort_unstable();
    set.dedup();
    if let Some(&v) = set.last() {
        if v >= n {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: n,
            });
        }
    }
    Ok(set)
}

impl Comb {
    pub fn new(n: usize, handle: Vec<VertexId>, teeth: Vec<Vec<VertexId>>) -> Result<Self> {
        let handle = normalized(n, handle)?;
        let teeth = teeth
            .into_iter()
            .map(|tooth| normalized(n, tooth))
            .collect::<Result<Vec<_>>>()?;
        Ok(Comb { n, handle, teeth })
    }

    pub fn from_spec(n: usize, spec: &CombSpec) -> Result<Self> {
        Comb::new(n, spec.handle.clone(), spec.teeth.clone())
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn handle(&self) -> &[VertexId] {
        &self.handle
    }

    pub fn teeth(&self) -> &[Vec<VertexId>] {
        &self.teeth
    }

    pub fn teeth_count(&self) -> usize {
        self.teeth.len()
    }

    pub fn in_handle(&self, v: VertexId) -> bool {
        self.handle.binary_search(&v).is_ok()
    }

    /// `|H ∩ T_i|` for each tooth.
    pub fn handle_intersections(&self) -> Vec<usize> {
        self.teeth
            .iter()
            .map(|tooth| tooth.iter().filter(|&&v| self.in_handle(v)).count())
            .collect()
    }

    pub fn spec(&self) -> CombSpec {
        CombSpec {
            handle: self.handle.clone(),
            teeth: self.teeth.clone(),
            rhs: None,
        }
    }

    /// Row label used in CSV output, e.g. `H[0 1 6] T[0 2][1 3][4 5]`.
    pub fn label(&self) -> String {
        let teeth: String = self
            .teeth
            .iter()
            .map(|tooth| format!("[{}]", join(tooth, " ")))
            .collect();
        format!("H[{}] T{}", join(&self.handle, " "), teeth)
    }
}

/// Per-condition outcome of [`validate_comb`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombValidation {
    pub teeth_count: usize,
    /// Number of teeth is odd and at least three.
    pub odd_teeth_count: bool,
    /// Every tooth meets the handle.
    pub handle_meets_every_tooth: bool,
    /// Teeth are pairwise disjoint.
    pub teeth_disjoint: bool,
    /// Some handle vertex lies in no tooth.
    pub handle_not_covered: bool,
    /// Every tooth has a vertex outside the handle.
    pub teeth_leave_handle: bool,
    pub violations: Vec<String>,
}

impl CombValidation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every comb condition and lists all violations.
pub fn validate_comb(comb: &Comb) -> CombValidation {
    let k = comb.teeth.len();
    let mut violations = Vec::new();

    let odd_teeth_count = k >= 3 && k % 2 == 1;
    if !odd_teeth_count {
        violations.push(format!("comb needs an odd number >= 3 of teeth, has {k}"));
    }

    let intersections = comb.handle_intersections();
    let mut handle_meets_every_tooth = true;
    let mut teeth_leave_handle = true;
    for (i, (tooth, &inside)) in comb.teeth.iter().zip(&intersections).enumerate() {
        if inside == 0 {
            handle_meets_every_tooth = false;
            violations.push(format!("tooth {i} does not meet the handle"));
        }
        if inside == tooth.len() {
            teeth_leave_handle = false;
            violations.push(format!("tooth {i} lies inside the handle"));
        }
    }

    let mut owner: Vec<Option<usize>> = vec![None; comb.n];
    let mut teeth_disjoint = true;
    for (i, tooth) in comb.teeth.iter().enumerate() {
        for &v in tooth {
            if let Some(j) = owner[v] {
                teeth_disjoint = false;
                violations.push(format!("teeth {j} and {i} share vertex {v}"));
            } else {
                owner[v] = Some(i);
            }
        }
    }

    let handle_not_covered = comb.handle.iter().any(|&v| owner[v].is_none());
    if !handle_not_covered {
        violations.push("every handle vertex lies in a tooth".to_string());
    }

    CombValidation {
        teeth_count: k,
        odd_teeth_count,
        handle_meets_every_tooth,
        teeth_disjoint,
        handle_not_covered,
        teeth_leave_handle,
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CombClass {
    pub is_two_matching: bool,
    pub is_simple: bool,
    /// `(h, t)` when every tooth has `t` vertices, `h` of them in the handle.
    pub uniform_params: Option<(usize, usize)>,
}

pub fn classify_comb(comb: &Comb) -> Result<CombClass> {
    let report = validate_comb(comb);
    if !report.is_valid() {
        return Err(Error::precondition(format!(
            "cannot classify an invalid comb: {}",
            report.violations.join("; ")
        )));
    }
    let intersections = comb.handle_intersections();
    let is_two_matching = comb.teeth.iter().all(|tooth| tooth.len() == 2);
    let is_simple = comb
        .teeth
        .iter()
        .zip(&intersections)
        .all(|(tooth, &inside)| inside == 1 || tooth.len() - inside == 1);
    let (h, t) = (intersections[0], comb.teeth[0].len());
    let uniform = comb
        .teeth
        .iter()
        .zip(&intersections)
        .all(|(tooth, &inside)| tooth.len() == t && inside == h);
    Ok(CombClass {
        is_two_matching,
        is_simple,
        uniform_params: uniform.then_some((h, t)),
    })
}

/// `x(δ(H)) + Σ x(δ(T_i)) >= rhs`, normally with `rhs = 3k + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CombInequality {
    #[serde(flatten)]
    comb: Comb,
    rhs: i64,
}

impl CombInequality {
    pub fn new(comb: Comb) -> Self {
        let rhs = 3 * comb.teeth.len() as i64 + 1;
        CombInequality { comb, rhs }
    }

    /// The same left-hand side with a different right-hand side.
    pub fn with_rhs(comb: Comb, rhs: i64) -> Self {
        CombInequality { comb, rhs }
    }

    pub fn from_spec(n: usize, spec: &CombSpec) -> Result<Self> {
        let comb = Comb::from_spec(n, spec)?;
        Ok(match spec.rhs {
            Some(rhs) => CombInequality::with_rhs(comb, rhs),
            None => CombInequality::new(comb),
        })
    }

    pub fn comb(&self) -> &Comb {
        &self.comb
    }

    pub fn rhs(&self) -> i64 {
        self.rhs
    }

    /// `x(δ(H)) + Σ x(δ(T_i))` evaluated on an edge set.
    pub fn lhs(&self, edges: &[Edge]) -> i64 {
        let n = self.comb.n;
        let handle = membership(n, &self.comb.handle).expect("validated on construction");
        let mut total = crossing_count(edges, &handle);
        for tooth in &self.comb.teeth {
            let mask = membership(n, tooth).expect("validated on construction");
            total += crossing_count(edges, &mask);
        }
        total as i64
    }
}

/// Slack `lhs(T) - rhs` of a comb inequality at a tour.
pub fn comb_slack(ineq: &CombInequality, tour: &Tour) -> Result<i64> {
    if tour.vertex_count() != ineq.comb.n {
        return Err(Error::UniverseMismatch(format!(
            "comb over {} vertices, tour over {}",
            ineq.comb.n,
            tour.vertex_count()
        )));
    }
    Ok(ineq.lhs(tour.edges()) - ineq.rhs)
}

/// `x(δ(U)) >= 1` for an odd set `U`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OddSetInequality {
    set: OddSet,
}

impl OddSetInequality {
    pub const RHS: i64 = 1;

    pub fn new(set: OddSet) -> Self {
        OddSetInequality { set }
    }

    pub fn set(&self) -> &OddSet {
        &self.set
    }
}

/// `|δ(S) ∩ M| - 1`.
pub fn odd_set_slack(ineq: &OddSetInequality, matching: &PerfectMatching) -> Result<i64> {
    if ineq.set.universe() != matching.vertex_count() {
        return Err(Error::UniverseMismatch(format!(
            "odd set over {} vertices, matching over {}",
            ineq.set.universe(),
            matching.vertex_count()
        )));
    }
    let crossing = crossing_count(matching.edges(), &ineq.set.mask());
    Ok(crossing as i64 - OddSetInequality::RHS)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityOutcome {
    pub valid: bool,
    pub tours_checked: usize,
    pub min_slack: i64,
    /// First tour (in enumeration order) with negative slack.
    pub witness: Option<Tour>,
}

/// Checks `slack >= 0` against every tour of `K_n`.
pub fn is_valid_inequality(ineq: &CombInequality, n: usize) -> Result<ValidityOutcome> {
    let report = validate_comb(&ineq.comb);
    if !report.is_valid() {
        return Err(Error::precondition(format!(
            "comb fails validation: {}",
            report.violations.join("; ")
        )));
    }
    if ineq.comb.n != n {
        return Err(Error::UniverseMismatch(format!(
            "comb over {} vertices, asked to check K_{n}",
            ineq.comb.n
        )));
    }
    let tours = enumerate_tours(n)?;
    let masks = DeltaMasks::new(ineq)?;
    let mut min_slack = i64::MAX;
    let mut witness = None;
    for tour in &tours {
        let slack = masks.slack(tour_edge_mask(tour));
        if slack < 0 && witness.is_none() {
            witness = Some(tour.clone());
        }
        min_slack = min_slack.min(slack);
    }
    Ok(ValidityOutcome {
        valid: witness.is_none(),
        tours_checked: tours.len(),
        min_slack,
        witness,
    })
}

/// Largest `n` whose `K_n` edges fit in a 128-bit mask.
pub const MASK_MAX_N: usize = 16;

/// Bitmask of tour edges in the lexicographic edge order of `K_n`.
pub fn tour_edge_mask(tour: &Tour) -> u128 {
    let n = tour.vertex_count();
    debug_assert!(n <= MASK_MAX_N);
    tour.edges()
        .iter()
        .fold(0u128, |acc, &e| acc | 1u128 << complete_edge_index(n, e))
}

/// Boundary edge masks of the handle and teeth over `K_n`, for evaluating
/// one comb inequality against many tours.
#[derive(Clone, Debug)]
pub struct DeltaMasks {
    handle: u128,
    teeth: Vec<u128>,
    rhs: i64,
}

impl DeltaMasks {
    pub fn new(ineq: &CombInequality) -> Result<Self> {
        let n = ineq.comb.n;
        if n > MASK_MAX_N {
            return Err(Error::LimitExceeded {
                what: "edge-mask universe n",
                value: n,
                limit: MASK_MAX_N,
            });
        }
        let delta_mask = |set: &[VertexId]| {
            let mask = membership(n, set).expect("validated on construction");
            let mut bits = 0u128;
            for u in 0..n {
                for v in u + 1..n {
                    if mask[u] != mask[v] {
                        bits |= 1u128 << complete_edge_index(n, Edge::new(u, v).expect("u < v"));
                    }
                }
            }
            bits
        };
        Ok(DeltaMasks {
            handle: delta_mask(&ineq.comb.handle),
            teeth: ineq.comb.teeth.iter().map(|t| delta_mask(t)).collect(),
            rhs: ineq.rhs,
        })
    }

    pub fn slack(&self, tour_mask: u128) -> i64 {
        let lhs = (self.handle & tour_mask).count_ones()
            + self
                .teeth
                .iter()
                .map(|&t| (t & tour_mask).count_ones())
                .sum::<u32>();
        lhs as i64 - self.rhs
    }
}

/// `(h, t)`-uniform combs of `K_n` in deterministic order, at most `cap` of them.
///
/// Order: number of teeth ascending; then teeth as a sequence of `t`-sets with
/// increasing minimum element, lexicographically; then the `h`-subset of each
/// tooth placed in the handle; then the nonempty set of non-tooth handle
/// vertices by increasing bitmask. Empty exactly when `3t + 1 > n`.
pub fn enumerate_uniform_combs(n: usize, h: usize, t: usize, cap: usize) -> Result<Vec<Comb>> {
    if h == 0 || h >= t {
        return Err(Error::invalid(format!(
            "uniform combs need 1 <= h < t, got h = {h}, t = {t}"
        )));
    }
    let mut out = Vec::new();
    if cap == 0 {
        return Ok(out);
    }
    let handle_choices = combinations(t, h);
    let mut k = 3;
    while k * t < n {
        let mut gen = UniformGen {
            n,
            t,
            k,
            cap,
            handle_choices: &handle_choices,
            used: vec![false; n],
            teeth: Vec::with_capacity(k),
            out: &mut out,
        };
        if !gen.teeth_from(0) {
            break;
        }
        k += 2;
    }
    Ok(out)
}

struct UniformGen<'a> {
    n: usize,
    t: usize,
    k: usize,
    cap: usize,
    handle_choices: &'a [Vec<usize>],
    used: Vec<bool>,
    teeth: Vec<Vec<VertexId>>,
    out: &'a mut Vec<Comb>,
}

impl UniformGen<'_> {
    /// Returns false once the cap is reached.
    fn teeth_from(&mut self, min_start: VertexId) -> bool {
        if self.teeth.len() == self.k {
            return self.handles(0, Vec::new());
        }
        let remaining_teeth = self.k - self.teeth.len();
        for start in min_start..self.n {
            if self.used[start] {
                continue;
            }
            let free: Vec<VertexId> = (start + 1..self.n).filter(|&v| !self.used[v]).collect();
            // the remaining teeth all start at or after `start`
            if free.len() + 1 < remaining_teeth * self.t {
                break;
            }
            for rest in combinations(free.len(), self.t - 1) {
                let mut tooth = Vec::with_capacity(self.t);
                tooth.push(start);
                tooth.extend(rest.iter().map(|&i| free[i]));
                for &v in &tooth {
                    self.used[v] = true;
                }
                self.teeth.push(tooth);
                let go_on = self.teeth_from(start + 1);
                let tooth = self.teeth.pop().expect("pushed above");
                for &v in &tooth {
                    self.used[v] = false;
                }
                if !go_on {
                    return false;
                }
            }
        }
        true
    }

    fn handles(&mut self, tooth: usize, mut partial: Vec<VertexId>) -> bool {
        if tooth == self.k {
            let outside: Vec<VertexId> = (0..self.n).filter(|&v| !self.used[v]).collect();
            for bits in 1u64..(1u64 << outside.len()) {
                let mut handle = partial.clone();
                handle.extend(
                    outside
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| bits >> i & 1 == 1)
                        .map(|(_, &v)| v),
                );
                handle.sort_unstable();
                self.out.push(Comb {
                    n: self.n,
                    handle,
                    teeth: self.teeth.clone(),
                });
                if self.out.len() >= self.cap {
                    return false;
                }
            }
            return true;
        }
        for choice in self.handle_choices {
            let len = partial.len();
            partial.extend(choice.iter().map(|&i| self.teeth[tooth][i]));
            if !self.handles(tooth + 1, partial.clone()) {
                return false;
            }
            partial.truncate(len);
        }
        true
    }
}

/// Result of checking every capped `(h, t)`-uniform comb of `K_n` against every tour.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValiditySweep {
    pub n: usize,
    pub h: usize,
    pub t: usize,
    pub cap: usize,
    pub combs_checked: usize,
    pub truncated: bool,
    pub tours: usize,
    pub violations: usize,
    pub min_slack: Option<i64>,
    pub first_violation: Option<(CombSpec, Tour)>,
}

pub fn uniform_validity_sweep(n: usize, h: usize, t: usize, cap: usize) -> Result<ValiditySweep> {
    uniform_validity_sweep_with_limit(n, h, t, cap, TOUR_ENUMERATION_LIMIT)
}

pub fn uniform_validity_sweep_with_limit(
    n: usize,
    h: usize,
    t: usize,
    cap: usize,
    tour_limit: usize,
) -> Result<ValiditySweep> {
    if n > MASK_MAX_N {
        return Err(Error::LimitExceeded {
            what: "validity sweep n",
            value: n,
            limit: MASK_MAX_N,
        });
    }
    let tours = enumerate_tours_with_limit(n, tour_limit)?;
    let mut combs = enumerate_uniform_combs(n, h, t, cap.saturating_add(1))?;
    let truncated = combs.len() > cap;
    combs.truncate(cap);
    let tour_masks: Vec<u128> = tours.iter().map(tour_edge_mask).collect();

    // (violations, min slack, first violating tour index) per comb
    let per_comb: Vec<(usize, i64, Option<usize>)> = combs
        .par_iter()
        .map(|comb| {
            let masks = DeltaMasks::new(&CombInequality::new(comb.clone())).expect("n checked");
            let mut violations = 0;
            let mut min = i64::MAX;
            let mut first = None;
            for (i, &tm) in tour_masks.iter().enumerate() {
                let slack = masks.slack(tm);
                if slack < 0 {
                    violations += 1;
                    first.get_or_insert(i);
                }
                min = min.min(slack);
            }
            (violations, min, first)
        })
        .collect();

    let violations = per_comb.iter().map(|r| r.0).sum();
    let min_slack = per_comb.iter().map(|r| r.1).min();
    let first_violation = combs
        .iter()
        .zip(&per_comb)
        .find_map(|(comb, r)| r.2.map(|i| (comb.spec(), tours[i].clone())));
    Ok(ValiditySweep {
        n,
        h,
        t,
        cap,
        combs_checked: combs.len(),
        truncated,
        tours: tours.len(),
        violations,
        min_slack,
        first_violation,
    })
}
