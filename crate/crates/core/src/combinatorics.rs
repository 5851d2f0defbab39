//! Tours, perfect matchings, 2-matchings and odd sets, with desk-scale
//! enumerators and the matching / 2-matching correspondence over the
//! 3-subdivided prism.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{membership, Edge, Graph, PrismGraph, VertexId};

/// Largest `n` for which [`enumerate_tours`] runs without an explicit override.
pub const TOUR_ENUMERATION_LIMIT: usize = 10;
/// Largest `n` for which [`enumerate_perfect_matchings`] runs without an explicit override.
pub const MATCHING_ENUMERATION_LIMIT: usize = 12;

fn check_limit(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        return Err(Error::LimitExceeded { what, value, limit });
    }
    Ok(())
}

/// Hamiltonian cycle on vertices `0..n`, stored in canonical form: rotated so
/// that vertex 0 comes first, oriented so the second vertex is smaller than
/// the last.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "TourJson", into = "TourJson")]
pub struct Tour {
    cycle: Vec<VertexId>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct TourJson {
    cycle: Vec<VertexId>,
}

impl TryFrom<TourJson> for Tour {
    type Error = Error;

    fn try_from(json: TourJson) -> Result<Self> {
        Tour::from_cycle(json.cycle)
    }
}

impl From<Tour> for TourJson {
    fn from(tour: Tour) -> Self {
        TourJson { cycle: tour.cycle }
    }
}

impl Tour {
    /// Builds a tour from a cyclic vertex sequence that must be a permutation of `0..len`.
    pub fn from_cycle(cycle: Vec<VertexId>) -> Result<Self> {
        let n = cycle.len();
        if n < 3 {
            return Err(Error::invalid(format!(
                "a tour needs at least 3 vertices, got {n}"
            )));
        }
        let mut seen = vec![false; n];
        for &v in &cycle {
            if v >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    vertex_count: n,
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::invalid(format!("vertex {v} visited twice")));
            }
        }
        Ok(Self::canonical(cycle))
    }

    /// Builds a tour from an edge set that must form one Hamiltonian cycle on `0..n`.
    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        if n < 3 || edges.len() != n {
            return Err(Error::invalid(format!(
                "a tour on {n} vertices needs exactly {n} edges, got {}",
                edges.len()
            )));
        }
        let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::with_capacity(2); n];
        for e in edges {
            if e.v() >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: e.v(),
                    vertex_count: n,
                });
            }
            adjacency[e.u()].push(e.v());
            adjacency[e.v()].push(e.u());
        }
        if let Some(v) = (0..n).find(|&v| adjacency[v].len() != 2) {
            return Err(Error::invalid(format!(
                "vertex {v} has degree {} in the edge set",
                adjacency[v].len()
            )));
        }
        let mut cycle = Vec::with_capacity(n);
        let (mut prev, mut cur) = (usize::MAX, 0);
        loop {
            cycle.push(cur);
            let next = if adjacency[cur][0] != prev {
                adjacency[cur][0]
            } else {
                adjacency[cur][1]
            };
            prev = cur;
            cur = next;
            if cur == 0 {
                break;
            }
            if cycle.len() > n {
                break;
            }
        }
        if cycle.len() != n {
            return Err(Error::invalid(format!(
                "edge set splits into several cycles (the one through 0 has {} vertices)",
                cycle.len()
            )));
        }
        Ok(Self::canonical(cycle))
    }

    fn canonical(mut cycle: Vec<VertexId>) -> Self {
        let n = cycle.len();
        let start = cycle.iter().position(|&v| v == 0).unwrap_or(0);
        cycle.rotate_left(start);
        if cycle[1] > cycle[n - 1] {
            cycle[1..].reverse();
        }
        let mut edges: Vec<Edge> = (0..n)
            .map(|i| {
                Edge::new(cycle[i], cycle[(i + 1) % n]).expect("distinct consecutive vertices")
            })
            .collect();
        edges.sort_unstable();
        Tour { cycle, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.cycle.len()
    }

    pub fn cycle(&self) -> &[VertexId] {
        &self.cycle
    }

    /// Tour edges in canonical order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// True iff every tour edge is an edge of `graph` and the vertex sets agree.
    pub fn lies_in(&self, graph: &Graph) -> bool {
        graph.vertex_count() == self.vertex_count()
            && self.edges.iter().all(|&e| graph.contains_edge(e))
    }

    /// Label used in CSV headers, e.g. `0-1-3-2`.
    pub fn label(&self) -> String {
        join(&self.cycle, "-")
    }
}

pub(crate) fn join(items: &[VertexId], sep: &str) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// All `(n-1)!/2` tours of `K_n` in lexicographic order of their canonical cycles.
pub fn enumerate_tours(n: usize) -> Result<Vec<Tour>> {
    enumerate_tours_with_limit(n, TOUR_ENUMERATION_LIMIT)
}

pub fn enumerate_tours_with_limit(n: usize, limit: usize) -> Result<Vec<Tour>> {
    if n < 3 {
        return Err(Error::invalid(format!("tours need n >= 3, got {n}")));
    }
    check_limit("tour enumeration n", n, limit)?;
    let mut out = Vec::new();
    let mut prefix = vec![0];
    let mut used = vec![false; n];
    used[0] = true;
    extend_tours(n, &mut prefix, &mut used, &mut out);
    Ok(out)
}

fn extend_tours(n: usize, prefix: &mut Vec<VertexId>, used: &mut [bool], out: &mut Vec<Tour>) {
    if prefix.len() == n {
        if prefix[1] < prefix[n - 1] {
            out.push(Tour::canonical(prefix.clone()));
        }
        return;
    }
    for v in 1..n {
        if !used[v] {
            used[v] = true;
            prefix.push(v);
            extend_tours(n, prefix, used, out);
            prefix.pop();
            used[v] = false;
        }
    }
}

/// Perfect matching of `K_n`, `n` even.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MatchingJson", into = "MatchingJson")]
pub struct PerfectMatching {
    n: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct MatchingJson {
    edges: Vec<Edge>,
}

impl TryFrom<MatchingJson> for PerfectMatching {
    type Error = Error;

    fn try_from(json: MatchingJson) -> Result<Self> {
        PerfectMatching::new(2 * json.edges.len(), json.edges)
    }
}

impl From<PerfectMatching> for MatchingJson {
    fn from(m: PerfectMatching) -> Self {
        MatchingJson { edges: m.edges }
    }
}

impl PerfectMatching {
    pub fn new(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        edges.sort_unstable();
        let mut covered = vec![false; n];
        for e in &edges {
            for x in [e.u(), e.v()] {
                if x >= n {
                    return Err(Error::VertexOutOfRange {
                        vertex: x,
                        vertex_count: n,
                    });
                }
                if std::mem::replace(&mut covered[x], true) {
                    return Err(Error::invalid(format!("vertex {x} covered twice")));
                }
            }
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(Error::invalid(format!("vertex {v} is not covered")));
        }
        Ok(PerfectMatching { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// The vertex matched to `v`.
    pub fn mate(&self, v: VertexId) -> Option<VertexId> {
        self.edges.iter().find_map(|e| e.other(v))
    }

    /// Label used in CSV headers, e.g. `0-1|2-3`.
    pub fn label(&self) -> String {
        self.edges
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// All `(n-1)!!` perfect matchings of `K_n`, lexicographic in the sorted edge list.
pub fn enumerate_perfect_matchings(n: usize) -> Result<Vec<PerfectMatching>> {
    enumerate_perfect_matchings_with_limit(n, MATCHING_ENUMERATION_LIMIT)
}

pub fn enumerate_perfect_matchings_with_limit(
    n: usize,
    limit: usize,
) -> Result<Vec<PerfectMatching>> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::invalid(format!(
            "perfect matchings need an even n >= 2, got {n}"
        )));
    }
    check_limit("matching enumeration n", n, limit)?;
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut edges = Vec::with_capacity(n / 2);
    extend_matchings(n, &mut used, &mut edges, &mut out);
    Ok(out)
}

fn extend_matchings(
    n: usize,
    used: &mut [bool],
    edges: &mut Vec<Edge>,
    out: &mut Vec<PerfectMatching>,
) {
    let Some(first) = used.iter().position(|u| !u) else {
        out.push(PerfectMatching {
            n,
            edges: edges.clone(),
        });
        return;
    };
    used[first] = true;
    for partner in first + 1..n {
        if !used[partner] {
            used[partner] = true;
            edges.push(Edge::new(first, partner).expect("distinct"));
            extend_matchings(n, used, edges, out);
            edges.pop();
            used[partner] = false;
        }
    }
    used[first] = false;
}

/// Edge set in which every vertex of `0..n` has degree exactly two.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TwoMatching {
    #[serde(skip)]
    n: usize,
    edges: Vec<Edge>,
}

impl TwoMatching {
    pub fn new(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        let mut degree = vec![0usize; n];
        for e in &edges {
            if e.v() >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: e.v(),
                    vertex_count: n,
                });
            }
            degree[e.u()] += 1;
            degree[e.v()] += 1;
        }
        if let Some(v) = degree.iter().position(|&d| d != 2) {
            return Err(Error::invalid(format!(
                "vertex {v} has degree {} in a 2-matching",
                degree[v]
            )));
        }
        Ok(TwoMatching { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

/// All 2-matchings of `graph`, in lexicographic order of their sorted edge lists.
pub fn enumerate_two_matchings(graph: &Graph) -> Vec<TwoMatching> {
    let n = graph.vertex_count();
    let edges = graph.edges();
    // remaining[v] = incident edges not yet decided
    let mut remaining: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let mut degree = vec![0usize; n];
    let mut chosen = Vec::new();
    let mut out = Vec::new();
    two_matching_step(edges, 0, &mut remaining, &mut degree, &mut chosen, &mut out);
    out
}

fn two_matching_step(
    edges: &[Edge],
    idx: usize,
    remaining: &mut [usize],
    degree: &mut [usize],
    chosen: &mut Vec<Edge>,
    out: &mut Vec<TwoMatching>,
) {
    if idx == edges.len() {
        if degree.iter().all(|&d| d == 2) {
            out.push(TwoMatching {
                n: degree.len(),
                edges: chosen.clone(),
            });
        }
        return;
    }
    let e = edges[idx];
    let (u, v) = (e.u(), e.v());
    remaining[u] -= 1;
    remaining[v] -= 1;
    if degree[u] < 2 && degree[v] < 2 {
        degree[u] += 1;
        degree[v] += 1;
        chosen.push(e);
        if degree[u] + remaining[u] >= 2 && degree[v] + remaining[v] >= 2 {
            two_matching_step(edges, idx + 1, remaining, degree, chosen, out);
        }
        chosen.pop();
        degree[u] -= 1;
        degree[v] -= 1;
    }
    if degree[u] + remaining[u] >= 2 && degree[v] + remaining[v] >= 2 {
        two_matching_step(edges, idx + 1, remaining, degree, chosen, out);
    }
    remaining[u] += 1;
    remaining[v] += 1;
}

/// Vertex set of odd cardinality over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OddSet {
    #[serde(skip)]
    n: usize,
    members: Vec<VertexId>,
}

impl OddSet {
    pub fn new(n: usize, mut members: Vec<VertexId>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&v) = members.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: n,
            });
        }
        if members.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "odd set must have odd cardinality, got {}",
                members.len()
            )));
        }
        Ok(OddSet { n, members })
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        membership(self.n, &self.members).expect("members validated on construction")
    }

    pub fn label(&self) -> String {
        format!("U[{}]", join(&self.members, " "))
    }
}

/// All `size`-subsets of `0..n` in lexicographic order; `size` must be odd.
pub fn enumerate_odd_sets(n: usize, size: usize) -> Result<Vec<OddSet>> {
    if size.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "odd-set size must be odd, got {size}"
        )));
    }
    if size > n {
        return Err(Error::invalid(format!(
            "odd-set size {size} exceeds n = {n}"
        )));
    }
    Ok(combinations(n, size)
        .into_iter()
        .map(|members| OddSet { n, members })
        .collect())
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Extends a perfect matching `M` of `K_n` to a 2-matching of the 3-subdivided
/// prism of `K_n`: both clique copies of `M` plus every vertical path.
pub fn extend_matching_to_2matching(matching: &PerfectMatching) -> Result<TwoMatching> {
    let prism = PrismGraph::new(matching.vertex_count(), 3)?;
    let mut edges = Vec::with_capacity(2 * matching.len() + 2 * prism.base_n());
    for &e in matching.edges() {
        edges.push(prism.lift(e, 1));
        edges.push(prism.lift(e, 3));
    }
    for i in 0..prism.base_n() {
        edges.extend(prism.vertical_path(i));
    }
    TwoMatching::new(prism.vertex_count(), edges)
}

/// Bottom-layer edges of a 2-matching of `prism`, projected to the base graph.
pub fn restrict_2matching_to_matching(x: &TwoMatching, prism: &PrismGraph) -> Result<Vec<Edge>> {
    if x.vertex_count() != prism.vertex_count() {
        return Err(Error::UniverseMismatch(format!(
            "2-matching on {} vertices, prism has {}",
            x.vertex_count(),
            prism.vertex_count()
        )));
    }
    Ok(x.edges()
        .iter()
        .filter(|&&e| prism.is_bottom(e))
        .filter_map(|&e| prism.project(e))
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    /// `(n, perfect matchings of K_n)` for each matching size checked.
    pub matchings: Vec<(usize, usize)>,
    pub round_trip_failures: usize,
    /// `(base n, 2-matchings of the 3-subdivided prism of K_n)`.
    pub two_matchings: Vec<(usize, usize)>,
    /// 2-matchings missing some vertical edge.
    pub missing_vertical: usize,
}

impl CorrespondenceReport {
    pub fn passed(&self) -> bool {
        self.round_trip_failures == 0 && self.missing_vertical == 0
    }
}

/// Restricting the extension of every perfect matching of `K_n` gives it back,
/// for each `n` in `matching_sizes`; every 2-matching of the 3-subdivided prism
/// of `K_b` uses all vertical edges, for each `b` in `prism_bases`.
pub fn check_matching_correspondence(
    matching_sizes: &[usize],
    prism_bases: &[usize],
) -> Result<CorrespondenceReport> {
    let mut report = CorrespondenceReport::default();
    for &n in matching_sizes {
        let prism = PrismGraph::new(n, 3)?;
        let matchings = enumerate_perfect_matchings(n)?;
        for m in &matchings {
            let back = restrict_2matching_to_matching(&extend_matching_to_2matching(m)?, &prism)?;
            report.round_trip_failures += usize::from(back != m.edges());
        }
        report.matchings.push((n, matchings.len()));
    }
    for &b in prism_bases {
        let prism = PrismGraph::new(b, 3)?;
        let verticals: Vec<Edge> = (0..b).flat_map(|i| prism.vertical_path(i)).collect();
        let all = enumerate_two_matchings(prism.graph());
        report.missing_vertical += all
            .iter()
            .filter(|x| !verticals.iter().all(|&e| x.contains_edge(e)))
            .count();
        report.two_matchings.push((b, all.len()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_complete;

    fn e(u: usize, v: usize) -> Edge {
        Edge::new(u, v).unwrap()
    }

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    /// Counts Hamiltonian cycles by checking every permutation of `1..n`.
    fn brute_force_tour_count(n: usize) -> usize {
        let mut seen = std::collections::BTreeSet::new();
        let mut perm: Vec<usize> = (1..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let mut cycle = vec![0];
            cycle.extend_from_slice(p);
            let mut edges: Vec<(usize, usize)> = (0..n)
                .map(|i| {
                    let (a, b) = (cycle[i], cycle[(i + 1) % n]);
                    (a.min(b), a.max(b))
                })
                .collect();
            edges.sort();
            seen.insert(edges);
        });
        seen.len()
    }

    fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, f);
            items.swap(k, i);
        }
    }

    #[test]
    fn tour_counts() {
        assert_eq!(enumerate_tours(3).unwrap().len(), 1);
        assert_eq!(brute_force_tour_count(5), 12);
        assert_eq!(brute_force_tour_count(6), 60);
        assert_eq!(enumerate_tours(5).unwrap().len(), 12);
        assert_eq!(enumerate_tours(6).unwrap().len(), 60);
        for n in 3..=8 {
            assert_eq!(enumerate_tours(n).unwrap().len(), factorial(n - 1) / 2);
        }
    }

    #[test]
    fn tour_guard() {
        assert!(matches!(
            enumerate_tours(11),
            Err(Error::LimitExceeded {
                value: 11,
                limit: 10,
                ..
            })
        ));
        assert!(enumerate_tours(2).is_err());
        assert_eq!(enumerate_tours_with_limit(4, 4).unwrap().len(), 3);
    }

    #[test]
    fn tours_are_distinct_sorted_hamiltonian() {
        let k6 = build_complete(6).unwrap();
        let tours = enumerate_tours(6).unwrap();
        for w in tours.windows(2) {
            assert!(w[0].cycle() < w[1].cycle());
        }
        for tour in &tours {
            assert!(tour.lies_in(&k6));
            let mut degree = [0; 6];
            for edge in tour.edges() {
                degree[edge.u()] += 1;
                degree[edge.v()] += 1;
            }
            assert!(degree.iter().all(|&d| d == 2));
            let rebuilt = Tour::from_edges(6, tour.edges()).unwrap();
            assert_eq!(&rebuilt, tour);
        }
    }

    #[test]
    fn tour_canonical_form() {
        let t = Tour::from_cycle(vec![3, 1, 0, 4, 2]).unwrap();
        assert_eq!(t.cycle(), &[0, 1, 3, 2, 4]);
        assert!(Tour::from_cycle(vec![0, 1, 1]).is_err());
        assert!(Tour::from_cycle(vec![0, 1]).is_err());
    }

    #[test]
    fn tour_from_two_triangles_is_rejected() {
        let edges = [e(0, 1), e(1, 2), e(0, 2), e(3, 4), e(4, 5), e(3, 5)];
        assert!(Tour::from_edges(6, &edges).is_err());
    }

    #[test]
    fn matching_counts() {
        assert_eq!(enumerate_perfect_matchings(2).unwrap().len(), 1);
        assert_eq!(enumerate_perfect_matchings(4).unwrap().len(), 3);
        assert_eq!(enumerate_perfect_matchings(6).unwrap().len(), 15);
        assert_eq!(enumerate_perfect_matchings(8).unwrap().len(), 105);
        assert!(enumerate_perfect_matchings(5).is_err());
        assert!(enumerate_perfect_matchings(14).is_err());
    }

    #[test]
    fn matchings_are_perfect_and_sorted() {
        let ms = enumerate_perfect_matchings(6).unwrap();
        for w in ms.windows(2) {
            assert!(w[0].edges() < w[1].edges());
        }
        for m in &ms {
            assert_eq!(m.len(), 3);
            for v in 0..6 {
                let mate = m.mate(v).unwrap();
                assert_eq!(m.mate(mate), Some(v));
            }
        }
    }

    #[test]
    fn odd_set_enumeration() {
        assert_eq!(enumerate_odd_sets(6, 5).unwrap().len(), 6);
        assert_eq!(enumerate_odd_sets(6, 1).unwrap().len(), 6);
        assert_eq!(enumerate_odd_sets(7, 3).unwrap().len(), 35);
        assert!(enumerate_odd_sets(6, 2).is_err());
        assert!(enumerate_odd_sets(3, 5).is_err());
        assert!(OddSet::new(6, vec![0, 1]).is_err());
    }

    #[test]
    fn extension_of_single_edge() {
        let m = PerfectMatching::new(2, vec![e(0, 1)]).unwrap();
        let x = extend_matching_to_2matching(&m).unwrap();
        // K_2 prism with t = 3: bottom 0,1; middle 2,3; top 4,5.
        assert_eq!(
            x.edges(),
            &[e(0, 1), e(0, 2), e(1, 3), e(2, 4), e(3, 5), e(4, 5)]
        );
    }

    #[test]
    fn extension_and_restriction_on_k4() {
        let m = PerfectMatching::new(4, vec![e(0, 1), e(2, 3)]).unwrap();
        let x = extend_matching_to_2matching(&m).unwrap();
        let prism = PrismGraph::new(4, 3).unwrap();
        for v in 4..8 {
            let incident = x.edges().iter().filter(|edge| edge.has_endpoint(v)).count();
            assert_eq!(incident, 2);
        }
        assert_eq!(
            restrict_2matching_to_matching(&x, &prism).unwrap(),
            vec![e(0, 1), e(2, 3)]
        );
    }

    #[test]
    fn restriction_without_bottom_clique_edges_is_empty() {
        // Degree-2 edge set on the 6 vertices of the base-3, t = 2 prism whose
        // only bottom-incident edges go upward.
        let prism = PrismGraph::new(3, 2).unwrap();
        let x = TwoMatching::new(
            6,
            vec![e(0, 3), e(3, 1), e(1, 4), e(4, 2), e(2, 5), e(5, 0)],
        )
        .unwrap();
        assert!(restrict_2matching_to_matching(&x, &prism)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn round_trip_on_small_bases() {
        for n in [2, 4, 6] {
            let prism = PrismGraph::new(n, 3).unwrap();
            for m in enumerate_perfect_matchings(n).unwrap() {
                let x = extend_matching_to_2matching(&m).unwrap();
                assert_eq!(
                    restrict_2matching_to_matching(&x, &prism).unwrap(),
                    m.edges()
                );
            }
        }
    }

    #[test]
    fn two_matchings_of_three_prisms_contain_vertical_edges() {
        // Odd base: bottom vertices would need a perfect matching of K_3.
        let p3 = PrismGraph::new(3, 3).unwrap();
        assert!(enumerate_two_matchings(p3.graph()).is_empty());
        let p4 = PrismGraph::new(4, 3).unwrap();
        let all = enumerate_two_matchings(p4.graph());
        assert_eq!(all.len(), 9);
        for x in &all {
            for i in 0..4 {
                for edge in p4.vertical_path(i) {
                    assert!(x.contains_edge(edge));
                }
            }
        }
    }

    #[test]
    fn two_matching_enumeration_matches_brute_force() {
        let k5 = build_complete(5).unwrap();
        let edges = k5.edges();
        let mut brute = 0;
        for bits in 0u32..(1 << edges.len()) {
            let mut degree = [0; 5];
            for (i, edge) in edges.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    degree[edge.u()] += 1;
                    degree[edge.v()] += 1;
                }
            }
            if degree.iter().all(|&d| d == 2) {
                brute += 1;
            }
        }
        assert_eq!(enumerate_two_matchings(&k5).len(), brute);
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn correspondence_report() {
        let r = check_matching_correspondence(&[2, 4, 6], &[3, 4]).unwrap();
        assert!(r.passed());
        assert_eq!(r.matchings, vec![(2, 1), (4, 3), (6, 15)]);
        assert_eq!(r.two_matchings, vec![(3, 0), (4, 9)]);
    }
}
