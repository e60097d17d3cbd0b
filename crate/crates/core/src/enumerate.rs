//! Extreme points of a coupling polytope, one spanning subset at a time.
//!
//! Every subset of `s = sum m_t - (d - 1)` cells is ranked lexicographically.
//! Its structure matrix is the constraint matrix restricted to those cells;
//! when it is nonsingular and the solution of the marginal system is
//! nonnegative, the solution is an extreme point. Scanning every rank
//! therefore finds every extreme point, each possibly several times.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{solve_integer_big, solve_integer_i128, IntSolution, RatMatrix, Rational};
use crate::graph::UnionFind;
use crate::model::{cell_index, index_cell, Coupling, Distribution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("OutOfBounds: {0}")]
    OutOfBounds(String),
    #[error("RankOutOfRange: rank {rank} not in 1..={total}")]
    RankOutOfRange { rank: u64, total: BigUint },
    #[error("SizeMismatch: expected {expected} cells, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("BudgetExceeded: {count} candidate subsets exceed the budget of {budget}")]
    BudgetExceeded { count: BigUint, budget: u64 },
    #[error("TooFewMarginals: need at least 2, got {0}")]
    TooFewMarginals(usize),
}

/// One-based linear index of a one-based cell, row-major.
pub fn linearize(cell: &[usize], dims: &[usize]) -> Result<usize, EnumError> {
    if cell.len() != dims.len() || cell.iter().zip(dims).any(|(&c, &m)| c == 0 || c > m) {
        return Err(EnumError::OutOfBounds(format!(
            "cell {cell:?} in dims {dims:?}"
        )));
    }
    let zero_based: Vec<usize> = cell.iter().map(|c| c - 1).collect();
    Ok(cell_index(&zero_based, dims) + 1)
}

/// One-based cell of a one-based linear index.
pub fn delinearize(i: usize, dims: &[usize]) -> Result<Vec<usize>, EnumError> {
    let total: usize = dims.iter().product();
    if i == 0 || i > total {
        return Err(EnumError::OutOfBounds(format!(
            "index {i} in dims {dims:?}"
        )));
    }
    Ok(index_cell(i - 1, dims).into_iter().map(|c| c + 1).collect())
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn binomial_u64(n: usize, k: usize) -> u64 {
    binomial(n, k).to_u64().unwrap_or(u64::MAX)
}

/// The `rank`-th (one-based) `s`-subset of `[n]` in lexicographic order,
/// as sorted one-based elements.
pub fn unrank_subset(rank: u64, n: usize, s: usize) -> Result<Vec<usize>, EnumError> {
    let total = binomial(n, s);
    if rank == 0 || BigUint::from(rank) > total {
        return Err(EnumError::RankOutOfRange { rank, total });
    }
    let mut remaining = rank - 1;
    let mut out = Vec::with_capacity(s);
    let mut next = 1;
    for slot in 0..s {
        loop {
            // Subsets whose element at this slot is `next`.
            let block = binomial_u64(n - next, s - slot - 1);
            if remaining < block {
                break;
            }
            remaining -= block;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    Ok(out)
}

/// Inverse of [`unrank_subset`].
pub fn rank_subset(subset: &[usize], n: usize) -> Result<u64, EnumError> {
    let s = subset.len();
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&x| x == 0 || x > n) {
        return Err(EnumError::OutOfBounds(format!(
            "{subset:?} is not a sorted subset of [{n}]"
        )));
    }
    let mut rank = 1u64;
    let mut prev = 0;
    for (slot, &x) in subset.iter().enumerate() {
        for skipped in prev + 1..x {
            rank += binomial_u64(n - skipped, s - slot - 1);
        }
        prev = x;
    }
    Ok(rank)
}

/// Advances a sorted one-based subset of `[n]` to its lexicographic successor.
fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let s = subset.len();
    let Some(i) = (0..s).rev().find(|&i| subset[i] < n - (s - 1 - i)) else {
        return false;
    };
    subset[i] += 1;
    for j in i + 1..s {
        subset[j] = subset[j - 1] + 1;
    }
    true
}

/// Number of cells in a candidate subset.
pub fn subset_size(dims: &[usize]) -> usize {
    dims.iter().sum::<usize>() + 1 - dims.len()
}

/// A ranked subset of cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSubset {
    pub rank: u64,
    /// Sorted one-based linear indices.
    pub indices: Vec<usize>,
    /// One-based cells of `indices`.
    pub cells: Vec<Vec<usize>>,
}

impl CandidateSubset {
    pub fn from_rank(rank: u64, dims: &[usize]) -> Result<Self, EnumError> {
        let indices = unrank_subset(rank, dims.iter().product(), subset_size(dims))?;
        let cells = indices
            .iter()
            .map(|&i| delinearize(i, dims))
            .collect::<Result<_, _>>()?;
        Ok(CandidateSubset {
            rank,
            indices,
            cells,
        })
    }

    pub fn from_indices(indices: Vec<usize>, dims: &[usize]) -> Result<Self, EnumError> {
        let expected = subset_size(dims);
        if indices.len() != expected {
            return Err(EnumError::SizeMismatch {
                expected,
                actual: indices.len(),
            });
        }
        let rank = rank_subset(&indices, dims.iter().product())?;
        let cells = indices
            .iter()
            .map(|&i| delinearize(i, dims))
            .collect::<Result<_, _>>()?;
        Ok(CandidateSubset {
            rank,
            indices,
            cells,
        })
    }
}

/// Constraint rows covering a zero-based cell: its axis-1 row when not the
/// last coordinate, the total row, and for every later axis its row when not
/// the last coordinate.
fn covering_rows(cell: &[usize], dims: &[usize], out: &mut Vec<usize>) {
    out.clear();
    if cell[0] + 1 < dims[0] {
        out.push(cell[0]);
    }
    out.push(dims[0] - 1);
    let mut offset = dims[0];
    for t in 1..dims.len() {
        if cell[t] + 1 < dims[t] {
            out.push(offset + cell[t]);
        }
        offset += dims[t] - 1;
    }
}

/// Structure matrix of a subset: column `k` is the constraint pattern of the
/// `k`-th cell.
pub fn build_structure_matrix(indices: &[usize], dims: &[usize]) -> Result<RatMatrix, EnumError> {
    let s = subset_size(dims);
    if indices.len() != s {
        return Err(EnumError::SizeMismatch {
            expected: s,
            actual: indices.len(),
        });
    }
    let mut m = RatMatrix::zeros(s, s);
    let mut rows = Vec::new();
    for (k, &i) in indices.iter().enumerate() {
        let cell: Vec<usize> = delinearize(i, dims)?.into_iter().map(|c| c - 1).collect();
        covering_rows(&cell, dims, &mut rows);
        for &r in &rows {
            m.set(r, k, Rational::one());
        }
    }
    Ok(m)
}

/// Right-hand side `(p^1_1..p^1_{m_1-1}, 1, p^2_1..p^2_{m_2-1}, ...)`.
pub fn structure_rhs(marginals: &[Distribution]) -> Vec<Rational> {
    let mut y: Vec<Rational> = marginals[0].weights()[..marginals[0].len() - 1].to_vec();
    y.push(Rational::one());
    for d in &marginals[1..] {
        y.extend_from_slice(&d.weights()[..d.len() - 1]);
    }
    y
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    Singular,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Candidate {
    Accepted(Coupling),
    Rejected(Rejection),
}

/// Marginal data prepared once for many subset solves.
struct System {
    dims: Vec<usize>,
    marginals: Vec<Distribution>,
    s: usize,
    /// Common denominator of the right-hand side.
    scale: BigInt,
    rhs_big: Vec<BigInt>,
    rhs_small: Option<Vec<i128>>,
    /// Covering rows per zero-based linear cell.
    rows_of: Vec<Vec<usize>>,
}

/// Exact nonnegative solution of one subset, as sparse `(zero-based linear
/// index, value)` pairs with zeros dropped.
type SparseValues = Vec<(usize, Rational)>;

impl System {
    fn new(marginals: &[Distribution]) -> Result<Self, EnumError> {
        if marginals.len() < 2 {
            return Err(EnumError::TooFewMarginals(marginals.len()));
        }
        let dims: Vec<usize> = marginals.iter().map(Distribution::len).collect();
        let y = structure_rhs(marginals);
        let scale = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let rhs_big: Vec<BigInt> = y.iter().map(|v| v.numer() * (&scale / v.denom())).collect();
        let rhs_small = rhs_big.iter().map(ToPrimitive::to_i128).collect();
        let mut rows_of = Vec::new();
        for index in 0..dims.iter().product() {
            let mut rows = Vec::new();
            covering_rows(&index_cell(index, &dims), &dims, &mut rows);
            rows_of.push(rows);
        }
        Ok(System {
            s: subset_size(&dims),
            dims,
            marginals: marginals.to_vec(),
            scale,
            rhs_big,
            rhs_small,
            rows_of,
        })
    }

    /// Cheap necessary condition for a subset (zero-based indices) to carry
    /// an extreme point. Matrices: the cells form a spanning tree of the
    /// row/column graph, which is exactly nonsingularity. Higher dimensions:
    /// every coordinate of every axis is covered.
    fn passes_prefilter(&self, subset: &[usize], scratch: &mut Vec<usize>) -> bool {
        if self.dims.len() == 2 {
            let (m, n) = (self.dims[0], self.dims[1]);
            let mut uf = UnionFind::new(m + n);
            return subset.iter().all(|&i| uf.union(i / n, m + i % n));
        }
        let total: usize = self.dims.iter().sum();
        scratch.clear();
        scratch.resize(total, 0);
        for &i in subset {
            let mut offset = 0;
            for (t, c) in index_cell(i, &self.dims).into_iter().enumerate() {
                scratch[offset + c] = 1;
                offset += self.dims[t];
            }
        }
        scratch.iter().all(|&x| x == 1)
    }

    fn solve(&self, subset: &[usize]) -> Result<SparseValues, Rejection> {
        let s = self.s;
        if let Some(rhs) = &self.rhs_small {
            let mut a = vec![0i128; s * s];
            for (k, &i) in subset.iter().enumerate() {
                for &r in &self.rows_of[i] {
                    a[r * s + k] = 1;
                }
            }
            if let Some(sol) = solve_integer_i128(&a, rhs, s) {
                return match sol {
                    IntSolution::Singular => Err(Rejection::Singular),
                    IntSolution::Unique {
                        numerators,
                        denominator,
                    } => {
                        let sign = denominator.signum();
                        if numerators.iter().any(|x| x * sign < 0) {
                            return Err(Rejection::Infeasible);
                        }
                        let den = BigInt::from(denominator) * &self.scale;
                        Ok(subset
                            .iter()
                            .zip(numerators)
                            .filter(|(_, x)| *x != 0)
                            .map(|(&i, x)| {
                                (i, Rational::from_bigints(BigInt::from(x), den.clone()))
                            })
                            .collect())
                    }
                };
            }
        }
        let mut a = vec![BigInt::zero(); s * s];
        for (k, &i) in subset.iter().enumerate() {
            for &r in &self.rows_of[i] {
                a[r * s + k] = BigInt::one();
            }
        }
        match solve_integer_big(&a, &self.rhs_big, s) {
            IntSolution::Singular => Err(Rejection::Singular),
            IntSolution::Unique {
                numerators,
                denominator,
            } => {
                let negative = denominator.is_negative();
                if numerators
                    .iter()
                    .any(|x| x.is_negative() != negative && !x.is_zero())
                {
                    return Err(Rejection::Infeasible);
                }
                let den = denominator * &self.scale;
                Ok(subset
                    .iter()
                    .zip(numerators)
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(&i, x)| (i, Rational::from_bigints(x, den.clone())))
                    .collect())
            }
        }
    }

    fn coupling(&self, values: &SparseValues) -> Coupling {
        let mut dense = vec![Rational::zero(); self.rows_of.len()];
        for (i, v) in values {
            dense[*i] = v.clone();
        }
        Coupling::from_trusted(dense, self.marginals.clone())
    }
}

/// Solves the marginal system restricted to a subset.
pub fn candidate_from_subset(
    subset: &CandidateSubset,
    marginals: &[Distribution],
) -> Result<Candidate, EnumError> {
    let system = System::new(marginals)?;
    if subset.indices.len() != system.s {
        return Err(EnumError::SizeMismatch {
            expected: system.s,
            actual: subset.indices.len(),
        });
    }
    let zero_based: Vec<usize> = subset.indices.iter().map(|i| i - 1).collect();
    Ok(match system.solve(&zero_based) {
        Ok(values) => Candidate::Accepted(system.coupling(&values)),
        Err(r) => Candidate::Rejected(r),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// Skip subsets that cannot carry an extreme point before solving.
    pub prefilter: bool,
    /// Largest number of candidate ranks to scan.
    pub budget: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            prefilter: true,
            budget: 100_000_000,
            threads: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanCounts {
    pub scanned: u64,
    pub prefiltered: u64,
    pub singular: u64,
    pub infeasible: u64,
    pub accepted: u64,
}

impl ScanCounts {
    fn merge(&mut self, other: &ScanCounts) {
        self.scanned += other.scanned;
        self.prefiltered += other.prefiltered;
        self.singular += other.singular;
        self.infeasible += other.infeasible;
        self.accepted += other.accepted;
    }

    pub fn nonsingular(&self) -> u64 {
        self.infeasible + self.accepted
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremePoint {
    pub coupling: Coupling,
    /// Ranks of every subset whose solution is this coupling, ascending.
    pub witness_ranks: Vec<u64>,
}

/// Distinct extreme points ordered by first witness rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremePointSet {
    pub dims: Vec<usize>,
    pub points: Vec<ExtremePoint>,
    pub counts: ScanCounts,
}

impl ExtremePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, coupling: &Coupling) -> bool {
        self.points
            .iter()
            .any(|p| p.coupling.values() == coupling.values())
    }
}

struct ChunkResult {
    counts: ScanCounts,
    hits: Vec<(u64, SparseValues)>,
}

fn scan_chunk(system: &System, first: u64, last: u64, prefilter: bool) -> ChunkResult {
    let n: usize = system.rows_of.len();
    let mut subset = unrank_subset(first, n, system.s).expect("chunk start within range");
    subset.iter_mut().for_each(|i| *i -= 1);
    let mut counts = ScanCounts::default();
    let mut hits = Vec::new();
    let mut scratch = Vec::new();
    for rank in first..=last {
        counts.scanned += 1;
        if prefilter && !system.passes_prefilter(&subset, &mut scratch) {
            counts.prefiltered += 1;
        } else {
            match system.solve(&subset) {
                Ok(values) => {
                    counts.accepted += 1;
                    hits.push((rank, values));
                }
                Err(Rejection::Singular) => counts.singular += 1,
                Err(Rejection::Infeasible) => counts.infeasible += 1,
            }
        }
        if rank < last {
            // Zero-based successor: shift to one-based and back.
            subset.iter_mut().for_each(|i| *i += 1);
            next_subset(&mut subset, n);
            subset.iter_mut().for_each(|i| *i -= 1);
        }
    }
    ChunkResult { counts, hits }
}

/// Every extreme point of the coupling polytope of `marginals`.
///
/// The result does not depend on the thread count: chunks are contiguous
/// rank ranges merged in rank order.
pub fn enumerate_extremes(
    marginals: &[Distribution],
    options: EnumOptions,
) -> Result<ExtremePointSet, EnumError> {
    let system = System::new(marginals)?;
    let n: usize = system.rows_of.len();
    let total = binomial(n, system.s);
    match total.to_u64() {
        Some(t) if t <= options.budget => {}
        _ => {
            return Err(EnumError::BudgetExceeded {
                count: total,
                budget: options.budget,
            })
        }
    }
    let total = total.to_u64().expect("checked above");
    let workers = options
        .threads
        .unwrap_or_else(rayon::current_num_threads)
        .max(1) as u64;
    let chunk = (total / (workers * 64)).clamp(1 << 10, 1 << 16);
    let ranges: Vec<(u64, u64)> = (0..total.div_ceil(chunk))
        .map(|c| (c * chunk + 1, ((c + 1) * chunk).min(total)))
        .collect();
    let run = || -> Vec<ChunkResult> {
        ranges
            .par_iter()
            .map(|&(a, b)| scan_chunk(&system, a, b, options.prefilter))
            .collect()
    };
    let results = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool construction")
            .install(run),
        None => run(),
    };

    let mut counts = ScanCounts::default();
    let mut slot_of: HashMap<SparseValues, usize> = HashMap::new();
    let mut found: Vec<(SparseValues, Vec<u64>)> = Vec::new();
    for result in results {
        counts.merge(&result.counts);
        for (rank, values) in result.hits {
            match slot_of.get(&values) {
                Some(&slot) => found[slot].1.push(rank),
                None => {
                    slot_of.insert(values.clone(), found.len());
                    found.push((values, vec![rank]));
                }
            }
        }
    }
    log::debug!(
        "scanned {} subsets, {} extreme points",
        counts.scanned,
        found.len()
    );
    let points = found
        .into_iter()
        .map(|(values, witness_ranks)| ExtremePoint {
            coupling: system.coupling(&values),
            witness_ranks,
        })
        .collect();
    Ok(ExtremePointSet {
        dims: system.dims,
        points,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::determinant;
    use proptest::prelude::*;

    fn dist(lits: &[&str]) -> Distribution {
        Distribution::parse(lits).unwrap()
    }

    #[test]
    fn linearization_examples() {
        assert_eq!(delinearize(5, &[3, 3]).unwrap(), vec![2, 2]);
        assert_eq!(delinearize(1, &[2, 3, 4]).unwrap(), vec![1, 1, 1]);
        assert_eq!(linearize(&[2, 1, 3], &[2, 3, 4]).unwrap(), 15);
        assert!(linearize(&[3, 1], &[2, 2]).is_err());
        assert!(delinearize(0, &[2, 2]).is_err());
        for i in 1..=24 {
            assert_eq!(
                linearize(&delinearize(i, &[2, 3, 4]).unwrap(), &[2, 3, 4]).unwrap(),
                i
            );
        }
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(unrank_subset(1, 4, 3).unwrap(), vec![1, 2, 3]);
        assert_eq!(unrank_subset(4, 4, 3).unwrap(), vec![2, 3, 4]);
        assert_eq!(unrank_subset(3, 5, 2).unwrap(), vec![1, 4]);
        assert!(matches!(
            unrank_subset(5, 4, 3),
            Err(EnumError::RankOutOfRange { .. })
        ));
        assert!(matches!(
            unrank_subset(0, 4, 3),
            Err(EnumError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn unrank_follows_successor_order() {
        let (n, s) = (9, 4);
        let mut subset: Vec<usize> = (1..=s).collect();
        let total = binomial_u64(n, s);
        for rank in 1..=total {
            assert_eq!(unrank_subset(rank, n, s).unwrap(), subset);
            assert_eq!(rank_subset(&subset, n).unwrap(), rank);
            assert_eq!(next_subset(&mut subset, n), rank < total);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(25, 9), BigUint::from(2_042_975u32));
        assert_eq!(binomial(27, 7), BigUint::from(888_030u32));
        assert_eq!(binomial(24, 7), BigUint::from(346_104u32));
        assert_eq!(binomial(36, 11), BigUint::from(600_805_296u64));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }

    #[test]
    fn structure_matrix_examples() {
        let m = build_structure_matrix(&[1, 2, 3], &[2, 2]).unwrap();
        assert_eq!(
            m,
            RatMatrix::from_int_rows(&[vec![1, 1, 0], vec![1, 1, 1], vec![1, 0, 1]]).unwrap()
        );
        assert_eq!(determinant(&m).unwrap(), Rational::one());
        let circuit = build_structure_matrix(&[1, 2, 4, 5], &[2, 3]).unwrap();
        assert_eq!(determinant(&circuit).unwrap(), Rational::zero());
        let three = build_structure_matrix(&[1, 2, 3, 5], &[2, 2, 2]).unwrap();
        // Rows: axis-1 coordinate 1, total, axis-2 coordinate 1, axis-3 coordinate 1.
        assert_eq!(
            three,
            RatMatrix::from_int_rows(&[
                vec![1, 1, 1, 0],
                vec![1, 1, 1, 1],
                vec![1, 1, 0, 1],
                vec![1, 0, 1, 1]
            ])
            .unwrap()
        );
        assert!(matches!(
            build_structure_matrix(&[1, 2], &[2, 2]),
            Err(EnumError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn column_sums_count_covering_rows() {
        let dims = [3, 4];
        let all: Vec<usize> = (1..=12).collect();
        for window in all.windows(subset_size(&dims)) {
            let m = build_structure_matrix(window, &dims).unwrap();
            for (k, &i) in window.iter().enumerate() {
                let sum: Rational = (0..m.rows()).map(|r| m.get(r, k).clone()).sum();
                let cell = delinearize(i, &dims).unwrap();
                let expected = 1 + usize::from(cell[0] < dims[0]) + usize::from(cell[1] < dims[1]);
                assert_eq!(sum, Rational::from_integer(expected as i64));
            }
        }
    }

    #[test]
    fn candidate_examples() {
        let marg = [dist(&["0.6", "0.4"]), dist(&["0.7", "0.3"])];
        let accepted = candidate_from_subset(
            &CandidateSubset::from_indices(vec![1, 2, 3], &[2, 2]).unwrap(),
            &marg,
        );
        let Candidate::Accepted(c) = accepted.unwrap() else {
            panic!("expected a coupling")
        };
        assert_eq!(
            c.values(),
            &[
                Rational::new(3, 10),
                Rational::new(3, 10),
                Rational::new(2, 5),
                Rational::zero()
            ]
        );
        let infeasible = CandidateSubset::from_indices(vec![2, 3, 4], &[2, 2]).unwrap();
        assert_eq!(
            candidate_from_subset(&infeasible, &marg).unwrap(),
            Candidate::Rejected(Rejection::Infeasible)
        );
        let marg23 = [dist(&["0.6", "0.4"]), dist(&["0.3", "0.3", "0.4"])];
        let circuit = CandidateSubset::from_indices(vec![1, 2, 4, 5], &[2, 3]).unwrap();
        assert_eq!(
            candidate_from_subset(&circuit, &marg23).unwrap(),
            Candidate::Rejected(Rejection::Singular)
        );
    }

    #[test]
    fn small_enumerations() {
        let half = dist(&["1/2", "1/2"]);
        let set = enumerate_extremes(&[half.clone(), half], EnumOptions::default()).unwrap();
        assert_eq!(set.len(), 2);
        let set = enumerate_extremes(
            &[dist(&["0.6", "0.4"]), dist(&["0.7", "0.3"])],
            EnumOptions::default(),
        )
        .unwrap();
        let values: Vec<Vec<Rational>> = set
            .points
            .iter()
            .map(|p| p.coupling.values().to_vec())
            .collect();
        let expect = |lits: [&str; 4]| {
            lits.iter()
                .map(|s| s.parse::<Rational>().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(values.len(), 2);
        assert!(values.contains(&expect(["0.6", "0", "0.1", "0.3"])));
        assert!(values.contains(&expect(["0.3", "0.3", "0.4", "0"])));
        let third = dist(&["1/3", "1/3", "1/3"]);
        let set = enumerate_extremes(&[third.clone(), third], EnumOptions::default()).unwrap();
        assert_eq!(set.len(), 6);
        assert!(set.points.iter().all(|p| p.coupling.support_size() == 3));
    }

    #[test]
    fn degenerate_points_collect_all_witnesses() {
        let half = dist(&["1/2", "1/2"]);
        let set = enumerate_extremes(&[half.clone(), half], EnumOptions::default()).unwrap();
        // Each 2-cell diagonal extends to a spanning tree in two ways.
        assert!(set.points.iter().all(|p| p.witness_ranks.len() == 2));
    }

    #[test]
    fn budget_reports_exact_count() {
        let u = Distribution::new(vec![Rational::new(1, 6); 6]).unwrap();
        let err = enumerate_extremes(&[u.clone(), u], EnumOptions::default()).unwrap_err();
        assert_eq!(
            err,
            EnumError::BudgetExceeded {
                count: binomial(36, 11),
                budget: 100_000_000
            }
        );
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let p = dist(&["0.4", "0.3", "0.2", "0.1"]);
        let q = dist(&["0.35", "0.35", "0.2", "0.1"]);
        let one = enumerate_extremes(
            &[p.clone(), q.clone()],
            EnumOptions {
                threads: Some(1),
                ..Default::default()
            },
        );
        let four = enumerate_extremes(
            &[p, q],
            EnumOptions {
                threads: Some(4),
                ..Default::default()
            },
        );
        assert_eq!(one.unwrap(), four.unwrap());
    }

    fn random_dist(len: usize) -> impl Strategy<Value = Distribution> {
        proptest::collection::vec(1i64..6, len).prop_map(|w| {
            let total: i64 = w.iter().sum();
            Distribution::new(w.iter().map(|&x| Rational::new(x, total)).collect()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prefilter_is_sound(p in random_dist(3), q in random_dist(3), r in random_dist(2)) {
            for marg in [vec![p.clone(), q.clone()], vec![p.clone(), q.clone(), r.clone()]] {
                let on = enumerate_extremes(&marg, EnumOptions::default()).unwrap();
                let off = enumerate_extremes(&marg, EnumOptions { prefilter: false, ..Default::default() }).unwrap();
                prop_assert_eq!(&on.points, &off.points);
                prop_assert_eq!(on.counts.accepted, off.counts.accepted);
            }
        }

        #[test]
        fn swapping_marginals_transposes(p in random_dist(3), q in random_dist(4)) {
            let pq = enumerate_extremes(&[p.clone(), q.clone()], EnumOptions::default()).unwrap();
            let qp = enumerate_extremes(&[q, p], EnumOptions::default()).unwrap();
            let transpose = |c: &Coupling| -> Vec<Rational> {
                (0..4).flat_map(|j| (0..3).map(move |i| c.value(&[i, j]).clone())).collect()
            };
            let mut a: Vec<Vec<Rational>> = pq.points.iter().map(|x| transpose(&x.coupling)).collect();
            let mut b: Vec<Vec<Rational>> = qp.points.iter().map(|x| x.coupling.values().to_vec()).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }
}
