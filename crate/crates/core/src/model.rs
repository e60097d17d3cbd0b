//! Distributions, couplings, the structure constant, and the majorization order.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("TooShort: a distribution needs at least 2 entries, got {0}")]
    TooShort(usize),
    #[error("NonPositiveEntry: entry {index} is {value}")]
    NonPositiveEntry { index: usize, value: Rational },
    #[error("SumNotOne: deficit {deficit}")]
    SumNotOne { deficit: Rational },
    #[error("ShapeMismatch: {expected} cells expected for the given dims, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("NegativeValue: cell {index} holds {value}")]
    NegativeValue { index: usize, value: Rational },
    #[error("MarginalMismatch: axis {axis} coordinate {coordinate} sums to {actual}, expected {expected} (deficit {deficit})")]
    MarginalMismatch {
        axis: usize,
        coordinate: usize,
        expected: Rational,
        actual: Rational,
        deficit: Rational,
    },
    #[error("LengthMismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("SumMismatch: totals {0} and {1} differ")]
    SumMismatch(Rational, Rational),
    #[error("TooLarge: structure constant limited to axes of length <= {limit}, got {m}x{n}")]
    TooLarge { m: usize, n: usize, limit: usize },
    #[error("NotTwoMarginal: operation needs exactly two marginals, got {0}")]
    NotTwoMarginal(usize),
}

/// A strictly positive probability vector with exact weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    weights: Vec<Rational>,
}

impl Distribution {
    /// Validates membership in the open simplex: length >= 2, every weight
    /// strictly positive, exact total 1.
    pub fn new(weights: Vec<Rational>) -> Result<Self, ModelError> {
        if weights.len() < 2 {
            return Err(ModelError::TooShort(weights.len()));
        }
        if let Some((index, value)) = weights.iter().enumerate().find(|(_, w)| !w.is_positive()) {
            return Err(ModelError::NonPositiveEntry {
                index,
                value: value.clone(),
            });
        }
        let total: Rational = weights.iter().sum();
        if total != Rational::one() {
            return Err(ModelError::SumNotOne {
                deficit: Rational::one() - total,
            });
        }
        Ok(Distribution { weights })
    }

    pub fn parse(literals: &[&str]) -> Result<Self, crate::Error> {
        let weights = literals
            .iter()
            .map(|s| crate::arith::rat_from_decimal(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(weights)?)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    /// Cumulative sums `F(1), ..., F(len)`.
    pub fn prefix_sums(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        self.weights
            .iter()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect()
    }

    pub fn permuted(&self, order: &[usize]) -> Distribution {
        Distribution {
            weights: order.iter().map(|&i| self.weights[i].clone()).collect(),
        }
    }
}

/// Shorthand for [`Distribution::new`].
pub fn validate_distribution(raw: Vec<Rational>) -> Result<Distribution, ModelError> {
    Distribution::new(raw)
}

/// Row-major linear index of a zero-based cell.
pub(crate) fn cell_index(cell: &[usize], dims: &[usize]) -> usize {
    cell.iter().zip(dims).fold(0, |acc, (&c, &m)| acc * m + c)
}

/// Zero-based cell of a row-major linear index.
pub(crate) fn index_cell(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut cell = vec![0; dims.len()];
    for t in (0..dims.len()).rev() {
        cell[t] = index % dims[t];
        index /= dims[t];
    }
    cell
}

/// Per-axis hyperplane sums of a dense row-major tensor.
pub fn marginals_of(values: &[Rational], dims: &[usize]) -> Result<Vec<Vec<Rational>>, ModelError> {
    let cells: usize = dims.iter().product();
    if values.len() != cells || dims.is_empty() {
        return Err(ModelError::ShapeMismatch {
            expected: cells,
            actual: values.len(),
        });
    }
    let mut sums: Vec<Vec<Rational>> = dims.iter().map(|&m| vec![Rational::zero(); m]).collect();
    for (index, v) in values.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        for (t, &c) in index_cell(index, dims).iter().enumerate() {
            sums[t][c] += v;
        }
    }
    Ok(sums)
}

/// A dense rational tensor over `[m_1] x ... x [m_d]` with prescribed marginals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coupling {
    dims: Vec<usize>,
    values: Vec<Rational>,
    marginals: Vec<Distribution>,
}

impl Coupling {
    /// Checks nonnegativity and every hyperplane sum exactly.
    pub fn new(values: Vec<Rational>, marginals: Vec<Distribution>) -> Result<Self, ModelError> {
        let dims: Vec<usize> = marginals.iter().map(Distribution::len).collect();
        if dims.len() < 2 {
            return Err(ModelError::TooShort(dims.len()));
        }
        if let Some((index, value)) = values.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(ModelError::NegativeValue {
                index,
                value: value.clone(),
            });
        }
        let sums = marginals_of(&values, &dims)?;
        for (axis, (actual, expected)) in sums.iter().zip(&marginals).enumerate() {
            for (coordinate, (a, e)) in actual.iter().zip(expected.weights()).enumerate() {
                if a != e {
                    return Err(ModelError::MarginalMismatch {
                        axis,
                        coordinate,
                        expected: e.clone(),
                        actual: a.clone(),
                        deficit: e - a,
                    });
                }
            }
        }
        Ok(Coupling {
            dims,
            values,
            marginals,
        })
    }

    /// Builds a coupling whose marginals are known to hold by construction.
    pub(crate) fn from_trusted(values: Vec<Rational>, marginals: Vec<Distribution>) -> Self {
        let dims = marginals.iter().map(Distribution::len).collect();
        let coupling = Coupling {
            dims,
            values,
            marginals,
        };
        debug_assert!(Coupling::new(coupling.values.clone(), coupling.marginals.clone()).is_ok());
        coupling
    }

    /// Builds a coupling from sparse `(zero-based cell, value)` entries.
    pub fn from_sparse(
        entries: impl IntoIterator<Item = (Vec<usize>, Rational)>,
        marginals: Vec<Distribution>,
    ) -> Result<Self, ModelError> {
        let dims: Vec<usize> = marginals.iter().map(Distribution::len).collect();
        let mut values = vec![Rational::zero(); dims.iter().product()];
        for (cell, v) in entries {
            values[cell_index(&cell, &dims)] = v;
        }
        Self::new(values, marginals)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn marginals(&self) -> &[Distribution] {
        &self.marginals
    }

    /// Value at a zero-based cell.
    pub fn value(&self, cell: &[usize]) -> &Rational {
        &self.values[cell_index(cell, &self.dims)]
    }

    /// Zero-based cells with strictly positive value, in row-major order.
    pub fn support_cells(&self) -> Vec<Vec<usize>> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_positive())
            .map(|(i, _)| index_cell(i, &self.dims))
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| v.is_positive()).count()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Rational::to_f64).collect()
    }

    /// Row `i` of a two-marginal coupling.
    pub fn row(&self, i: usize) -> &[Rational] {
        assert_eq!(self.dims.len(), 2, "row() needs a matrix");
        let n = self.dims[1];
        &self.values[i * n..(i + 1) * n]
    }
}

/// The structure constant together with a permutation pair that attains it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kappa {
    pub value: usize,
    /// Zero-based order of `p`: position `i` holds `p[sigma[i]]`.
    pub sigma: Vec<usize>,
    pub pi: Vec<usize>,
    /// The shared interior prefix sums of `sigma p` and `pi q`.
    pub common_prefix_sums: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KappaBudget {
    pub max_axis: usize,
}

impl Default for KappaBudget {
    fn default() -> Self {
        KappaBudget { max_axis: 8 }
    }
}

pub fn kappa(p: &Distribution, q: &Distribution) -> Result<Kappa, ModelError> {
    kappa_with_budget(p, q, KappaBudget::default())
}

fn subset_sums(d: &Distribution) -> Vec<Rational> {
    let m = d.len();
    let mut sums = vec![Rational::zero(); 1 << m];
    for mask in 1usize..(1 << m) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = &sums[mask & (mask - 1)] + d.get(low);
    }
    sums
}

fn order_from_chain(chain: &[usize], len: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(len);
    let mut seen = 0usize;
    for &mask in chain.iter().chain(std::iter::once(&((1 << len) - 1))) {
        for i in 0..len {
            if mask & (1 << i) != 0 && seen & (1 << i) == 0 {
                order.push(i);
            }
        }
        seen |= mask;
    }
    order
}

/// Structure constant of a pair of marginals.
///
/// A common interior prefix value of `sigma p` and `pi q` is a pair of
/// subsets `(S, T)` with equal mass; a permutation pair realises exactly the
/// chains `S_1 < S_2 < ...` (strict inclusion in both coordinates). The
/// constant is one plus the longest such chain, found by a longest-path pass
/// over the balanced subset pairs.
pub fn kappa_with_budget(
    p: &Distribution,
    q: &Distribution,
    budget: KappaBudget,
) -> Result<Kappa, ModelError> {
    let (m, n) = (p.len(), q.len());
    if m > budget.max_axis || n > budget.max_axis {
        return Err(ModelError::TooLarge {
            m,
            n,
            limit: budget.max_axis,
        });
    }
    let p_sums = subset_sums(p);
    let q_sums = subset_sums(q);
    let mut by_value: HashMap<&Rational, Vec<usize>> = HashMap::new();
    for (mask, s) in q_sums.iter().enumerate().take((1 << n) - 1).skip(1) {
        by_value.entry(s).or_default().push(mask);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (s_mask, s) in p_sums.iter().enumerate().take((1 << m) - 1).skip(1) {
        if let Some(ts) = by_value.get(s) {
            pairs.extend(ts.iter().map(|&t| (s_mask, t)));
        }
    }
    // Strict inclusion implies strictly larger popcount, so sorting by it
    // gives a topological order.
    pairs.sort_by_key(|&(s, t)| (s.count_ones(), t.count_ones(), s, t));
    let mut depth = vec![1usize; pairs.len()];
    let mut parent = vec![usize::MAX; pairs.len()];
    for j in 0..pairs.len() {
        let (sj, tj) = pairs[j];
        for i in 0..j {
            let (si, ti) = pairs[i];
            let inside = si & sj == si && ti & tj == ti && si != sj && ti != tj;
            if inside && depth[i] + 1 > depth[j] {
                depth[j] = depth[i] + 1;
                parent[j] = i;
            }
        }
    }
    let best = (0..pairs.len()).max_by_key(|&j| (depth[j], std::cmp::Reverse(j)));
    let mut chain_p = Vec::new();
    let mut chain_q = Vec::new();
    let mut cursor = best;
    while let Some(j) = cursor {
        chain_p.push(pairs[j].0);
        chain_q.push(pairs[j].1);
        cursor = (parent[j] != usize::MAX).then_some(parent[j]);
    }
    chain_p.reverse();
    chain_q.reverse();
    Ok(Kappa {
        value: chain_p.len() + 1,
        sigma: order_from_chain(&chain_p, m),
        pi: order_from_chain(&chain_q, n),
        common_prefix_sums: chain_p.iter().map(|&s| p_sums[s].clone()).collect(),
    })
}

/// Relative position of two vectors in the majorization preorder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MajorizationOrder {
    /// Sorted vectors coincide.
    Equal,
    /// `x` is strictly majorized by `y`.
    StrictlyBelow,
    /// `y` is strictly majorized by `x`.
    StrictlyAbove,
    Incomparable,
}

/// Compares descending-sorted prefix sums of `x` and `y`.
pub fn majorizes(x: &[Rational], y: &[Rational]) -> Result<MajorizationOrder, ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch(x.len(), y.len()));
    }
    let (sx, sy): (Rational, Rational) = (x.iter().sum(), y.iter().sum());
    if sx != sy {
        return Err(ModelError::SumMismatch(sx, sy));
    }
    let sorted_desc = |v: &[Rational]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.cmp(a));
        v
    };
    let (xs, ys) = (sorted_desc(x), sorted_desc(y));
    let (mut fx, mut fy) = (Rational::zero(), Rational::zero());
    let (mut below, mut above) = (false, false);
    for (a, b) in xs.iter().zip(&ys) {
        fx += a;
        fy += b;
        match fx.cmp(&fy) {
            std::cmp::Ordering::Less => below = true,
            std::cmp::Ordering::Greater => above = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(match (below, above) {
        (false, false) => MajorizationOrder::Equal,
        (true, false) => MajorizationOrder::StrictlyBelow,
        (false, true) => MajorizationOrder::StrictlyAbove,
        (true, true) => MajorizationOrder::Incomparable,
    })
}
