//! Reconstruction of the coupling consistent with a tree by leaf peeling.
//!
//! A cell that is alone on some line (or hyperplane) of the remaining set must
//! carry that line's residual mass. Assigning it and subtracting it from every
//! line through it leaves a smaller tree, so the values are forced one cell at
//! a time. This is independent of the linear-solve path and serves as its
//! oracle.

use thiserror::Error;

use crate::arith::Rational;
use crate::graph::{classify, SupportSet};
use crate::model::{cell_index, Coupling, Distribution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeelError {
    #[error("NotATree: the cell set is not a spanning tree of the lattice")]
    NotATree,
    #[error("Infeasible: cell {cell:?} would receive {value}")]
    Infeasible { cell: Vec<usize>, value: Rational },
    #[error("ShapeMismatch: cells live in {cells:?}, marginals in {marginals:?}")]
    ShapeMismatch {
        cells: Vec<usize>,
        marginals: Vec<usize>,
    },
}

/// One forced assignment: `cell` was alone on hyperplane `(axis, cell[axis])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelStep {
    pub cell: Vec<usize>,
    pub axis: usize,
    pub value: Rational,
}

/// Residual masses and assignments during peeling.
#[derive(Clone, Debug)]
pub struct PeelState {
    remaining: Vec<Vec<usize>>,
    residual: Vec<Vec<Rational>>,
    counts: Vec<Vec<usize>>,
    steps: Vec<PeelStep>,
}

impl PeelState {
    fn new(tree: &SupportSet, marginals: &[Distribution]) -> Self {
        let remaining: Vec<Vec<usize>> = tree.cells().cloned().collect();
        let mut counts: Vec<Vec<usize>> = marginals.iter().map(|d| vec![0; d.len()]).collect();
        for cell in &remaining {
            for (t, &c) in cell.iter().enumerate() {
                counts[t][c] += 1;
            }
        }
        PeelState {
            remaining,
            residual: marginals.iter().map(|d| d.weights().to_vec()).collect(),
            counts,
            steps: Vec::new(),
        }
    }

    /// Remaining cells that are alone on some hyperplane, with that axis.
    pub fn peelable(&self) -> Vec<(usize, usize)> {
        self.remaining
            .iter()
            .enumerate()
            .filter_map(|(k, cell)| {
                cell.iter()
                    .enumerate()
                    .position(|(t, &c)| self.counts[t][c] == 1)
                    .map(|t| (k, t))
            })
            .collect()
    }

    fn assign(&mut self, k: usize, axis: usize) -> Result<(), PeelError> {
        let cell = self.remaining.remove(k);
        let value = self.residual[axis][cell[axis]].clone();
        if value.is_negative() {
            return Err(PeelError::Infeasible { cell, value });
        }
        for (t, &c) in cell.iter().enumerate() {
            self.counts[t][c] -= 1;
            self.residual[t][c] -= &value;
        }
        self.steps.push(PeelStep { cell, axis, value });
        Ok(())
    }

    pub fn steps(&self) -> &[PeelStep] {
        &self.steps
    }
}

/// Peels with a caller-chosen order: `choose` picks an index into the list of
/// currently peelable `(cell position, axis)` pairs.
pub fn peel_with(
    tree: &SupportSet,
    marginals: &[Distribution],
    mut choose: impl FnMut(&PeelState, &[(usize, usize)]) -> usize,
) -> Result<(Coupling, Vec<PeelStep>), PeelError> {
    let dims: Vec<usize> = marginals.iter().map(Distribution::len).collect();
    if tree.dims() != dims.as_slice() {
        return Err(PeelError::ShapeMismatch {
            cells: tree.dims().to_vec(),
            marginals: dims,
        });
    }
    let expected = dims.iter().sum::<usize>() + 1 - dims.len();
    if tree.len() != expected || !classify(tree).is_tree {
        return Err(PeelError::NotATree);
    }
    let mut state = PeelState::new(tree, marginals);
    while !state.remaining.is_empty() {
        let options = state.peelable();
        if options.is_empty() {
            return Err(PeelError::NotATree);
        }
        let (k, axis) = options[choose(&state, &options)];
        state.assign(k, axis)?;
    }
    // The last assignment fixes one hyperplane; the others must close too.
    if let Some((t, c)) = state
        .residual
        .iter()
        .enumerate()
        .find_map(|(t, r)| r.iter().position(|v| !v.is_zero()).map(|c| (t, c)))
    {
        let mut cell = vec![0; dims.len()];
        cell[t] = c;
        return Err(PeelError::Infeasible {
            cell,
            value: state.residual[t][c].clone(),
        });
    }
    let mut values = vec![Rational::zero(); dims.iter().product()];
    for step in &state.steps {
        values[cell_index(&step.cell, &dims)] = step.value.clone();
    }
    Ok((
        Coupling::from_trusted(values, marginals.to_vec()),
        state.steps,
    ))
}

/// The unique coupling supported inside `tree`, peeling the lexicographically
/// smallest available cell first.
pub fn peel_coupling(tree: &SupportSet, marginals: &[Distribution]) -> Result<Coupling, PeelError> {
    peel_with(tree, marginals, |_, _| 0).map(|(c, _)| c)
}
