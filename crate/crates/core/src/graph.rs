//! The cell graph of a product lattice: circuits, forests, trees, completeness
//! and the isolated/passable/turning partition of a matrix support.
//!
//! Cells are zero-based multi-indices. Two cells are adjacent when they lie
//! on a common line (d = 2) or hyperplane (d >= 3). For matrices a circuit is
//! a cycle of the bipartite row/column incidence graph. For d >= 3 a support
//! is a forest when it can be emptied by repeatedly removing a cell that is
//! alone on one of its hyperplanes; for d = 2 this is the same notion.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::arith::Rational;
use crate::model::Coupling;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("OutOfBounds: cell {cell:?} outside dims {dims:?}")]
    OutOfBounds { cell: Vec<usize>, dims: Vec<usize> },
    #[error("NotForest: the support contains a circuit")]
    NotForest,
    #[error("NotTwoMarginal: operation needs exactly two marginals, got {0}")]
    NotTwoMarginal(usize),
}

/// A set of lattice cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportSet {
    dims: Vec<usize>,
    cells: BTreeSet<Vec<usize>>,
}

impl SupportSet {
    pub fn new(
        dims: Vec<usize>,
        cells: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let cells: BTreeSet<Vec<usize>> = cells.into_iter().collect();
        for cell in &cells {
            if cell.len() != dims.len() || cell.iter().zip(&dims).any(|(&c, &m)| c >= m) {
                return Err(GraphError::OutOfBounds {
                    cell: cell.clone(),
                    dims,
                });
            }
        }
        Ok(SupportSet { dims, cells })
    }

    /// The nonzero cells of a coupling.
    pub fn of(coupling: &Coupling) -> Self {
        SupportSet {
            dims: coupling.dims().to_vec(),
            cells: coupling.support_cells().into_iter().collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cells(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.cells.iter()
    }

    pub fn contains(&self, cell: &[usize]) -> bool {
        self.cells.contains(cell)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Offset of axis `t` in the list of all axis-coordinate nodes.
    fn node_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.dims.len());
        let mut acc = 0;
        for &m in &self.dims {
            offsets.push(acc);
            acc += m;
        }
        offsets
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Whether the cells can be removed one by one, each alone on some hyperplane
/// of the remaining set at the time of removal.
pub(crate) fn peelable(dims: &[usize], cells: &[Vec<usize>]) -> bool {
    let mut counts: Vec<Vec<usize>> = dims.iter().map(|&m| vec![0; m]).collect();
    for cell in cells {
        for (t, &c) in cell.iter().enumerate() {
            counts[t][c] += 1;
        }
    }
    let mut alive = vec![true; cells.len()];
    let mut remaining = cells.len();
    loop {
        let leaf = (0..cells.len())
            .find(|&k| alive[k] && cells[k].iter().enumerate().any(|(t, &c)| counts[t][c] == 1));
        let Some(k) = leaf else { break };
        alive[k] = false;
        remaining -= 1;
        for (t, &c) in cells[k].iter().enumerate() {
            counts[t][c] -= 1;
        }
    }
    remaining == 0
}

/// Whether the support contains a circuit.
pub fn has_circuit(v: &SupportSet) -> bool {
    if v.dims.len() != 2 {
        let cells: Vec<Vec<usize>> = v.cells.iter().cloned().collect();
        return !peelable(&v.dims, &cells);
    }
    let mut uf = UnionFind::new(v.dims[0] + v.dims[1]);
    v.cells.iter().any(|c| !uf.union(c[0], v.dims[0] + c[1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub is_forest: bool,
    pub is_tree: bool,
    pub is_complete: bool,
    pub component_count: usize,
}

/// Number of classes of cells under "shares a line/hyperplane", transitively.
pub fn component_count(v: &SupportSet) -> usize {
    let offsets = v.node_offsets();
    let mut uf = UnionFind::new(v.dims.iter().sum());
    for cell in &v.cells {
        for t in 1..cell.len() {
            uf.union(offsets[0] + cell[0], offsets[t] + cell[t]);
        }
    }
    let roots: BTreeSet<usize> = v.cells.iter().map(|c| uf.find(offsets[0] + c[0])).collect();
    roots.len()
}

/// Whether every coordinate of every axis carries a cell.
pub fn is_complete(v: &SupportSet) -> bool {
    v.dims.iter().enumerate().all(|(t, &m)| {
        let used: BTreeSet<usize> = v.cells.iter().map(|c| c[t]).collect();
        used.len() == m
    })
}

pub fn classify(v: &SupportSet) -> Classification {
    let is_forest = !has_circuit(v);
    let component_count = component_count(v);
    Classification {
        is_forest,
        is_tree: is_forest && component_count == 1,
        is_complete: is_complete(v),
        component_count,
    }
}

/// The cardinality a complete forest with `k` components must have:
/// `m + n - k` for matrices, `sum m_t - k (d - 1)` in general.
pub fn forest_cardinality(dims: &[usize], k: usize) -> usize {
    dims.iter().sum::<usize>() - k * (dims.len() - 1)
}

/// For a forest, whether completeness and the cardinality identity agree.
///
/// For matrices the two are equivalent for every forest. In three or more
/// dimensions the identity can fail for complete forests; callers get the
/// raw comparison.
pub fn forest_cardinality_check(v: &SupportSet) -> Result<bool, GraphError> {
    let c = classify(v);
    if !c.is_forest {
        return Err(GraphError::NotForest);
    }
    let identity = v.len() == forest_cardinality(&v.dims, c.component_count);
    Ok(identity == c.is_complete)
}

/// The isolated (V1), passable (V2, split by row/column) and turning (V3)
/// cells of a matrix support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexPartition {
    pub isolated: Vec<(usize, usize)>,
    pub row_passable: Vec<(usize, usize)>,
    pub column_passable: Vec<(usize, usize)>,
    pub turning: Vec<(usize, usize)>,
}

impl VertexPartition {
    pub fn passable(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.row_passable.iter().chain(&self.column_passable)
    }
}

/// Partitions the support of a matrix by comparing each value with its row
/// and column totals.
pub fn vertex_partition(p: &Coupling) -> Result<VertexPartition, GraphError> {
    let dims = p.dims();
    if dims.len() != 2 {
        return Err(GraphError::NotTwoMarginal(dims.len()));
    }
    let (m, n) = (dims[0], dims[1]);
    let row_sums: Vec<Rational> = (0..m).map(|i| p.row(i).iter().sum()).collect();
    let col_sums: Vec<Rational> = (0..n).map(|j| (0..m).map(|i| &p.row(i)[j]).sum()).collect();
    let mut out = VertexPartition::default();
    for i in 0..m {
        for j in 0..n {
            let v = &p.row(i)[j];
            if !v.is_positive() {
                continue;
            }
            match (&row_sums[i] == v, &col_sums[j] == v) {
                (true, true) => out.isolated.push((i, j)),
                (true, false) => out.row_passable.push((i, j)),
                (false, true) => out.column_passable.push((i, j)),
                (false, false) => out.turning.push((i, j)),
            }
        }
    }
    Ok(out)
}
