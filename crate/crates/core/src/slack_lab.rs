//! Slack matrices of inequality families against tours or perfect matchings,
//! exact affine rank, and facet checks for comb inequalities.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{CheckedDiv, CheckedMul, CheckedSub, One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{
    enumerate_odd_sets, enumerate_perfect_matchings, enumerate_tours, PerfectMatching, Tour,
};
use crate::error::{Error, Result};
use crate::graph::{binomial2, complete_edge_index, Edge};
use crate::inequalities::{
    enumerate_uniform_combs, odd_set_slack, tour_edge_mask, CombInequality, DeltaMasks,
    OddSetInequality,
};

/// Largest `n` for which slack matrices enumerate all tours.
pub const TOUR_MATRIX_LIMIT: usize = 9;
/// Largest `n` for which slack matrices enumerate all perfect matchings.
pub const MATCHING_MATRIX_LIMIT: usize = 10;

/// Fraction-free Gaussian elimination. Returns `None` on arithmetic overflow.
fn bareiss_rank<T>(mut a: Vec<Vec<T>>) -> Option<usize>
where
    T: Clone + Zero + One + CheckedMul + CheckedSub + CheckedDiv,
{
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = T::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, below) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = pivot_row[col].clone();
        for row in below {
            let factor = std::mem::replace(&mut row[col], T::zero());
            for (x, p) in row[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                let lhs = pivot.checked_mul(x)?;
                let rhs = factor.checked_mul(p)?;
                *x = lhs.checked_sub(&rhs)?.checked_div(&prev)?;
            }
        }
        prev = pivot;
        rank += 1;
    }
    Some(rank)
}

/// Exact rank of an integer matrix; `i128` first, `BigInt` if that overflows.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let wide: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect();
    bareiss_rank(wide).unwrap_or_else(|| {
        let big: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        bareiss_rank(big).expect("BigInt arithmetic does not overflow")
    })
}

/// Dense matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigRational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries for a {rows} x {cols} matrix",
                entries.len()
            )));
        }
        Ok(RationalMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged integer rows"));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|&x| BigRational::from_integer(BigInt::from(x)))
            .collect();
        Ok(RationalMatrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &BigRational {
        &self.entries[row * self.cols + col]
    }

    /// Rank over the rationals. Each row is scaled by the lcm of its
    /// denominators, which leaves the rank unchanged.
    pub fn rank(&self) -> usize {
        let scaled: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|i| {
                let row = &self.entries[i * self.cols..(i + 1) * self.cols];
                let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
            })
            .collect();
        bareiss_rank(scaled).expect("BigInt arithmetic does not overflow")
    }
}

/// Dimension of the affine hull of a set of integer points.
pub fn affine_dim(points: &[Vec<i64>]) -> Result<usize> {
    let Some(base) = points.first() else {
        return Err(Error::invalid("affine dimension of an empty point set"));
    };
    if points.iter().any(|p| p.len() != base.len()) {
        return Err(Error::invalid("points of different dimension"));
    }
    let diffs: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    Ok(integer_rank(&diffs))
}

/// Incidence vector of an edge set over the lexicographic edge order of `K_n`.
pub fn incidence_vector(n: usize, edges: &[Edge]) -> Vec<i64> {
    let mut v = vec![0; binomial2(n)];
    for &e in edges {
        v[complete_edge_index(n, e)] = 1;
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Rows: capped `(h, t)`-uniform comb inequalities; columns: tours.
    UniformCombs { h: usize, t: usize },
    /// Rows: odd-set inequalities of one size, or of every odd size; columns: perfect matchings.
    OddSets { size: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlackMatrix {
    pub family: Family,
    pub n: usize,
    pub cap: usize,
    pub truncated: bool,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Vec<Vec<i64>>,
}

impl SlackMatrix {
    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn min_entry(&self) -> Option<i64> {
        self.entries.iter().flatten().copied().min()
    }

    /// Header `inequality,<column labels>`, then one labelled row per inequality.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(
            std::iter::once("inequality").chain(self.col_labels.iter().map(String::as_str)),
        )?;
        for (label, row) in self.row_labels.iter().zip(&self.entries) {
            w.write_record(std::iter::once(label.clone()).chain(row.iter().map(i64::to_string)))?;
        }
        w.flush()
    }
}

pub fn build_slack_matrix(family: Family, n: usize, cap: usize) -> Result<SlackMatrix> {
    match family {
        Family::UniformCombs { h, t } => {
            if n > TOUR_MATRIX_LIMIT {
                return Err(Error::LimitExceeded {
                    what: "tour slack matrix n",
                    value: n,
                    limit: TOUR_MATRIX_LIMIT,
                });
            }
            let tours = enumerate_tours(n)?;
            let mut combs = enumerate_uniform_combs(n, h, t, cap.saturating_add(1))?;
            let truncated = combs.len() > cap;
            combs.truncate(cap);
            let masks: Vec<u128> = tours.iter().map(tour_edge_mask).collect();
            let entries = combs
                .par_iter()
                .map(|comb| {
                    let delta = DeltaMasks::new(&CombInequality::new(comb.clone()))?;
                    Ok(masks.iter().map(|&m| delta.slack(m)).collect())
                })
                .collect::<Result<Vec<Vec<i64>>>>()?;
            Ok(SlackMatrix {
                family,
                n,
                cap,
                truncated,
                row_labels: combs.iter().map(|c| c.label()).collect(),
                col_labels: tours.iter().map(Tour::label).collect(),
                entries,
            })
        }
        Family::OddSets { size } => {
            if n > MATCHING_MATRIX_LIMIT {
                return Err(Error::LimitExceeded {
                    what: "matching slack matrix n",
                    value: n,
                    limit: MATCHING_MATRIX_LIMIT,
                });
            }
            let matchings = enumerate_perfect_matchings(n)?;
            let sizes: Vec<usize> = match size {
                Some(s) => vec![s],
                None => (1..=n).step_by(2).collect(),
            };
            let mut sets = Vec::new();
            for s in sizes {
                sets.extend(enumerate_odd_sets(n, s)?);
            }
            let truncated = sets.len() > cap;
            sets.truncate(cap);
            let entries = sets
                .par_iter()
                .map(|set| {
                    let ineq = OddSetInequality::new(set.clone());
                    matchings.iter().map(|m| odd_set_slack(&ineq, m)).collect()
                })
                .collect::<Result<Vec<Vec<i64>>>>()?;
            Ok(SlackMatrix {
                family,
                n,
                cap,
                truncated,
                row_labels: sets.iter().map(|s| s.label()).collect(),
                col_labels: matchings.iter().map(PerfectMatching::label).collect(),
                entries,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacetReport {
    pub n: usize,
    pub tours: usize,
    pub valid: bool,
    pub min_slack: i64,
    pub tight_tours: usize,
    pub full_dim: usize,
    pub tight_dim: Option<usize>,
    pub facet: bool,
    pub diagnostic: Option<String>,
}

/// Tours of `K_n` with their incidence vectors and affine dimension,
/// computed once and reused across facet checks.
#[derive(Clone, Debug)]
pub struct FacetChecker {
    n: usize,
    masks: Vec<u128>,
    vectors: Vec<Vec<i64>>,
    full_dim: usize,
}

impl FacetChecker {
    pub fn new(n: usize) -> Result<Self> {
        if n < 6 {
            return Err(Error::invalid(format!("facet checks need n >= 6, got {n}")));
        }
        if n > TOUR_MATRIX_LIMIT {
            return Err(Error::LimitExceeded {
                what: "facet check n",
                value: n,
                limit: TOUR_MATRIX_LIMIT,
            });
        }
        let tours = enumerate_tours(n)?;
        let vectors: Vec<Vec<i64>> = tours
            .iter()
            .map(|t| incidence_vector(n, t.edges()))
            .collect();
        let full_dim = affine_dim(&vectors)?;
        Ok(FacetChecker {
            n,
            masks: tours.iter().map(tour_edge_mask).collect(),
            vectors,
            full_dim,
        })
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn tour_count(&self) -> usize {
        self.vectors.len()
    }

    /// Facet iff valid on every tour and the tight tours span dimension `D - 1`.
    pub fn check(&self, ineq: &CombInequality) -> Result<FacetReport> {
        if ineq.comb().universe() != self.n {
            return Err(Error::UniverseMismatch(format!(
                "comb over {} vertices, checker for K_{}",
                ineq.comb().universe(),
                self.n
            )));
        }
        let delta = DeltaMasks::new(ineq)?;
        let slacks: Vec<i64> = self.masks.iter().map(|&m| delta.slack(m)).collect();
        let min_slack = slacks
            .iter()
            .copied()
            .min()
            .expect("K_n has tours for n >= 3");
        let tight: Vec<Vec<i64>> = slacks
            .iter()
            .zip(&self.vectors)
            .filter(|(&s, _)| s == 0)
            .map(|(_, v)| v.clone())
            .collect();
        let valid = min_slack >= 0;
        let tight_dim = if tight.is_empty() {
            None
        } else {
            Some(affine_dim(&tight)?)
        };
        let facet = valid && tight_dim.is_some_and(|d| d + 1 == self.full_dim);
        let diagnostic = if !valid {
            Some(format!("violated by some tour, minimum slack {min_slack}"))
        } else if tight.is_empty() {
            Some(format!("no tight tours, minimum slack {min_slack}"))
        } else if !facet {
            Some(format!(
                "tight tours span dimension {}, need {}",
                tight_dim.unwrap_or(0),
                self.full_dim - 1
            ))
        } else {
            None
        };
        Ok(FacetReport {
            n: self.n,
            tours: self.vectors.len(),
            valid,
            min_slack,
            tight_tours: tight.len(),
            full_dim: self.full_dim,
            tight_dim,
            facet,
            diagnostic,
        })
    }
}

pub fn facet_check(ineq: &CombInequality, n: usize) -> Result<FacetReport> {
    FacetChecker::new(n)?.check(ineq)
}

/// Affine dimension of the tours of `K_n`.
pub fn tour_polytope_dim(n: usize) -> Result<usize> {
    if n > TOUR_MATRIX_LIMIT {
        return Err(Error::LimitExceeded {
            what: "tour polytope n",
            value: n,
            limit: TOUR_MATRIX_LIMIT,
        });
    }
    let vectors: Vec<Vec<i64>> = enumerate_tours(n)?
        .iter()
        .map(|t| incidence_vector(n, t.edges()))
        .collect();
    affine_dim(&vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::Comb;
    use num_traits::Signed;

    /// Plain Gauss-Jordan over rationals, independent of the fraction-free path.
    fn rational_rank(rows: &[Vec<i64>]) -> usize {
        let mut a: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| BigRational::from_integer(x.into()))
                    .collect()
            })
            .collect();
        let cols = a.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..cols {
            let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            let pivot = a[rank][col].clone();
            let pivot_row: Vec<BigRational> = a[rank].iter().map(|x| x / &pivot).collect();
            for (i, row) in a.iter_mut().enumerate() {
                if i != rank && !row[col].is_zero() {
                    let f = row[col].clone();
                    for (x, p) in row.iter_mut().zip(&pivot_row) {
                        *x -= &f * p;
                    }
                }
            }
            a[rank] = pivot_row;
            rank += 1;
        }
        rank
    }

    fn comb(n: usize, handle: &[usize], teeth: &[&[usize]]) -> CombInequality {
        CombInequality::new(
            Comb::new(
                n,
                handle.to_vec(),
                teeth.iter().map(|t| t.to_vec()).collect(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(integer_rank(&[]), 0);
        assert_eq!(integer_rank(&[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(integer_rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(
            integer_rank(&[vec![0, 1, 2], vec![1, 0, 3], vec![1, 1, 5]]),
            2
        );
        assert_eq!(integer_rank(&[vec![2, 0], vec![0, 3], vec![1, 1]]), 2);
    }

    #[test]
    fn rank_falls_back_on_overflow() {
        let big = i64::MAX / 3;
        let rows = vec![
            vec![big, 1, 7],
            vec![5, big, 1],
            vec![3, 9, big],
            vec![big, big, big],
        ];
        assert_eq!(integer_rank(&rows), rational_rank(&rows));
        assert_eq!(integer_rank(&rows), 3);
    }

    #[test]
    fn rational_matrix_rank() {
        let half = BigRational::new(1.into(), 2.into());
        let third = BigRational::new(1.into(), 3.into());
        let m = RationalMatrix::new(
            2,
            2,
            vec![
                half.clone(),
                third.clone(),
                half * BigRational::from_integer(4.into()),
                third * BigRational::from_integer(4.into()),
            ],
        )
        .unwrap();
        assert_eq!(m.rank(), 1);
        assert!(RationalMatrix::new(2, 2, vec![]).is_err());
        let id = RationalMatrix::from_integer_rows(&[vec![1, 0], vec![0, -1]]).unwrap();
        assert_eq!(id.rank(), 2);
        assert!(id.get(1, 1).is_negative());
    }

    #[test]
    fn affine_dim_basics() {
        assert!(affine_dim(&[]).is_err());
        assert_eq!(affine_dim(&[vec![1, 2, 3]]).unwrap(), 0);
        assert_eq!(affine_dim(&[vec![1, 2, 3], vec![0, 2, 3]]).unwrap(), 1);
        assert_eq!(
            affine_dim(&[vec![1, 0], vec![2, 0], vec![3, 0]]).unwrap(),
            1
        );
    }

    #[test]
    fn tour_dimensions_match_closed_form() {
        for n in 5..=7 {
            let vectors: Vec<Vec<i64>> = enumerate_tours(n)
                .unwrap()
                .iter()
                .map(|t| incidence_vector(n, t.edges()))
                .collect();
            let diffs: Vec<Vec<i64>> = vectors[1..]
                .iter()
                .map(|v| v.iter().zip(&vectors[0]).map(|(a, b)| a - b).collect())
                .collect();
            let oracle = rational_rank(&diffs);
            assert_eq!(oracle, n * (n - 3) / 2, "n = {n}");
            assert_eq!(tour_polytope_dim(n).unwrap(), oracle);
        }
    }

    #[test]
    fn odd_set_matrices() {
        let m = build_slack_matrix(Family::OddSets { size: Some(1) }, 4, 100).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 3));
        assert!(m.entries.iter().flatten().all(|&x| x == 0));

        let m = build_slack_matrix(Family::OddSets { size: Some(3) }, 6, 100).unwrap();
        assert_eq!((m.rows(), m.cols()), (20, 15));
        assert!(m.entries.iter().flatten().all(|&x| x == 0 || x == 2));
        assert!(m.entries.iter().flatten().any(|&x| x == 2));

        let m = build_slack_matrix(Family::OddSets { size: None }, 6, 10).unwrap();
        assert!(m.truncated);
        assert_eq!(m.rows(), 10);
        assert!(build_slack_matrix(Family::OddSets { size: None }, 12, 10).is_err());
    }

    #[test]
    fn comb_matrix_k7() {
        let m = build_slack_matrix(Family::UniformCombs { h: 1, t: 2 }, 7, 50).unwrap();
        assert_eq!((m.rows(), m.cols()), (50, 360));
        assert!(m.truncated);
        assert_eq!(m.min_entry(), Some(0));
        assert!(build_slack_matrix(Family::UniformCombs { h: 1, t: 2 }, 10, 1).is_err());
    }

    #[test]
    fn csv_is_deterministic() {
        let render = || {
            let m = build_slack_matrix(Family::UniformCombs { h: 1, t: 2 }, 7, 20).unwrap();
            let mut buf = Vec::new();
            m.write_csv(&mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        let mut lines = a.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("inequality,0-1-2-3-4-5-6,"));
        assert_eq!(lines.count(), 20);
    }

    #[test]
    fn blossom_on_k6_is_a_facet() {
        let report = facet_check(&comb(6, &[0, 1, 2], &[&[0, 3], &[1, 4], &[2, 5]]), 6).unwrap();
        assert_eq!(report.full_dim, 9);
        assert_eq!(report.tight_dim, Some(8));
        assert!(report.facet, "{report:?}");
    }

    #[test]
    fn simple_comb_on_k7_is_a_facet() {
        let report = facet_check(&comb(7, &[0, 1, 3, 5], &[&[1, 2], &[3, 4], &[5, 6]]), 7).unwrap();
        assert_eq!(report.full_dim, 14);
        assert!(report.facet, "{report:?}");
    }

    #[test]
    fn shifted_rhs_is_not_a_facet() {
        let base = comb(7, &[0, 1, 3, 5], &[&[1, 2], &[3, 4], &[5, 6]]);
        let weaker = CombInequality::with_rhs(base.comb().clone(), base.rhs() - 1);
        let report = facet_check(&weaker, 7).unwrap();
        assert!(report.valid && !report.facet);
        assert_eq!(report.tight_tours, 0);
        assert!(report.diagnostic.unwrap().contains("no tight tours"));

        let stronger = CombInequality::with_rhs(base.comb().clone(), base.rhs() + 1);
        assert!(!facet_check(&stronger, 7).unwrap().valid);
    }

    #[test]
    fn facet_guards() {
        let c = comb(7, &[0, 1, 3, 5], &[&[1, 2], &[3, 4], &[5, 6]]);
        assert!(facet_check(&c, 5).is_err());
        assert!(facet_check(&c, 10).is_err());
        assert!(matches!(
            facet_check(&c, 8),
            Err(Error::UniverseMismatch(_))
        ));
    }
}
