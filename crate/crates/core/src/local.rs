//! Entropy-reducing local moves on matrix couplings, the local-optimality
//! verifier, and the greedy coupling.

use serde::Serialize;
use thiserror::Error;

use crate::arith::Rational;
use crate::entropy::EntropyFunctional;
use crate::graph::{classify, SupportSet};
use crate::model::{Coupling, Distribution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("NotTwoMarginal: operation needs exactly two marginals, got {0}")]
    NotTwoMarginal(usize),
    #[error("StepCap: no fixed point after {0} moves")]
    StepCap(usize),
}

/// A 2x2 block `[[a11, a12], [a21, a22]]`.
pub type Block = [[Rational; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransformKind {
    Lemma1,
    Lemma2,
    Lemma2xN,
}

/// A move applied to a coupling. `rows` and `cols` index the affected
/// submatrix in the order the move was stated in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformStep {
    pub kind: TransformKind,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Mass moved between cells.
    pub b: Rational,
}

/// Relabelings of a 2x2 block: row swap, column swap, transpose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Relabel {
    pub swap_rows: bool,
    pub swap_cols: bool,
    pub transpose: bool,
}

impl Relabel {
    const ALL: [Relabel; 8] = {
        let mut all = [Relabel {
            swap_rows: false,
            swap_cols: false,
            transpose: false,
        }; 8];
        let mut k = 0;
        while k < 8 {
            all[k] = Relabel {
                swap_rows: k & 2 != 0,
                swap_cols: k & 4 != 0,
                transpose: k & 1 != 0,
            };
            k += 1;
        }
        all
    };

    fn apply(&self, a: &Block) -> Block {
        let mut out = a.clone();
        if self.swap_rows {
            out.swap(0, 1);
        }
        if self.swap_cols {
            out[0].swap(0, 1);
            out[1].swap(0, 1);
        }
        if self.transpose {
            let t = out[0][1].clone();
            out[0][1] = out[1][0].clone();
            out[1][0] = t;
        }
        out
    }

    fn undo(&self, a: &Block) -> Block {
        let mut out = a.clone();
        if self.transpose {
            let t = out[0][1].clone();
            out[0][1] = out[1][0].clone();
            out[1][0] = t;
        }
        if self.swap_cols {
            out[0].swap(0, 1);
            out[1].swap(0, 1);
        }
        if self.swap_rows {
            out.swap(0, 1);
        }
        out
    }
}

/// Moves `b = a12 ∧ a21` onto the diagonal.
fn shift_to_diagonal(a: &Block) -> (Block, Rational) {
    let b = a[0][1].clone().min(a[1][0].clone());
    let out = [
        [&a[0][0] + &b, &a[0][1] - &b],
        [&a[1][0] - &b, &a[1][1] + &b],
    ];
    (out, b)
}

/// Lemma-1 move: when the diagonal holds the largest entry, shift the smaller
/// off-diagonal entry onto it; otherwise the same with columns swapped.
pub fn lemma1_transform(a: &Block) -> Option<(Block, Rational, Relabel)> {
    let dominant =
        |x: &Block| x[0][0].clone().max(x[1][1].clone()) >= x[0][1].clone().max(x[1][0].clone());
    [
        Relabel::ALL[0],
        Relabel {
            swap_rows: false,
            swap_cols: true,
            transpose: false,
        },
    ]
    .into_iter()
    .find(|r| dominant(&r.apply(a)))
    .map(|r| {
        let (moved, b) = shift_to_diagonal(&r.apply(a));
        (r.undo(&moved), b, r)
    })
}

/// Lemma-2 move: under the first relabeling with row-1 sum >= row-2 sum,
/// column-1 sum >= column-2 sum and row-1 sum >= column-1 sum, shift
/// `a12 ∧ a21` onto the diagonal.
pub fn lemma2_transform(a: &Block) -> Option<(Block, Rational, Relabel)> {
    let applies = |x: &Block| {
        let (r1, r2) = (&x[0][0] + &x[0][1], &x[1][0] + &x[1][1]);
        let (c1, c2) = (&x[0][0] + &x[1][0], &x[0][1] + &x[1][1]);
        r1 >= r2 && c1 >= c2 && r1 >= c1
    };
    Relabel::ALL
        .into_iter()
        .find(|r| applies(&r.apply(a)))
        .map(|r| {
            let (moved, b) = shift_to_diagonal(&r.apply(a));
            (r.undo(&moved), b, r)
        })
}

/// The 2xn move. `a` has two rows; one of them may be positive in a single
/// column `j0` only. When `sum_{k != j0} a_1k <= a_2j0 <= sum_k a_1k` (with
/// row 1 the other row), row 1 collapses onto `j0` and row 2 takes over its
/// other entries. Returns the new block and the row index that was lone.
pub fn lemma_2xn_transform(a: &[Vec<Rational>; 2]) -> Option<([Vec<Rational>; 2], usize)> {
    let n = a[0].len();
    if n < 2 || a[1].len() != n {
        return None;
    }
    for lone in [1, 0] {
        let full = 1 - lone;
        let positive: Vec<usize> = (0..n).filter(|&k| a[lone][k].is_positive()).collect();
        let [j0] = positive[..] else { continue };
        let total: Rational = a[full].iter().sum();
        let rest = &total - &a[full][j0];
        let pivot = &a[lone][j0];
        if rest <= *pivot && *pivot <= total {
            let mut out = [vec![Rational::zero(); n], vec![Rational::zero(); n]];
            out[full][j0] = total;
            out[lone][j0] = pivot - &rest;
            for k in (0..n).filter(|&k| k != j0) {
                out[lone][k] = a[full][k].clone();
            }
            return Some((out, lone));
        }
    }
    None
}

fn two_marginal(p: &Coupling) -> Result<(usize, usize), LocalError> {
    match p.dims() {
        [m, n] => Ok((*m, *n)),
        dims => Err(LocalError::NotTwoMarginal(dims.len())),
    }
}

fn shannon_of(values: &[Rational]) -> f64 {
    let v: Vec<f64> = values.iter().map(Rational::to_f64).collect();
    EntropyFunctional::shannon()
        .evaluate_values(&v)
        .expect("finite for probabilities")
}

/// Margin below which an entropy change counts as no change.
const STRICT_MARGIN: f64 = 1e-12;

struct Matrix {
    m: usize,
    n: usize,
    v: Vec<Rational>,
}

impl Matrix {
    fn at(&self, i: usize, j: usize) -> &Rational {
        &self.v[i * self.n + j]
    }

    fn block(&self, i: [usize; 2], j: [usize; 2]) -> Block {
        [
            [self.at(i[0], j[0]).clone(), self.at(i[0], j[1]).clone()],
            [self.at(i[1], j[0]).clone(), self.at(i[1], j[1]).clone()],
        ]
    }

    fn put_block(&mut self, i: [usize; 2], j: [usize; 2], b: &Block) {
        for (r, &ii) in i.iter().enumerate() {
            for (c, &jj) in j.iter().enumerate() {
                self.v[ii * self.n + jj] = b[r][c].clone();
            }
        }
    }

    fn block_entropy_drops(before: &Block, after: &Block) -> bool {
        let flat = |b: &Block| b.iter().flatten().cloned().collect::<Vec<_>>();
        shannon_of(&flat(after)) < shannon_of(&flat(before)) - STRICT_MARGIN
    }

    /// First strict move in the fixed scan order, applied in place.
    fn improve_once(&mut self) -> Option<TransformStep> {
        let pairs = |k: usize| (0..k).flat_map(move |a| (a + 1..k).map(move |b| [a, b]));
        for rows in pairs(self.m) {
            for cols in pairs(self.n) {
                let a = self.block(rows, cols);
                if let Some((moved, b, _)) = lemma1_transform(&a) {
                    if b.is_positive() {
                        self.put_block(rows, cols, &moved);
                        return Some(TransformStep {
                            kind: TransformKind::Lemma1,
                            rows: rows.to_vec(),
                            cols: cols.to_vec(),
                            b,
                        });
                    }
                }
            }
        }
        for rows in pairs(self.m) {
            for cols in pairs(self.n) {
                let a = self.block(rows, cols);
                if let Some((moved, b, _)) = lemma2_transform(&a) {
                    if Self::block_entropy_drops(&a, &moved) {
                        self.put_block(rows, cols, &moved);
                        return Some(TransformStep {
                            kind: TransformKind::Lemma2,
                            rows: rows.to_vec(),
                            cols: cols.to_vec(),
                            b,
                        });
                    }
                }
            }
        }
        self.improve_2xn(false).or_else(|| self.improve_2xn(true))
    }

    fn transposed(&self) -> Matrix {
        let v = (0..self.n)
            .flat_map(|j| (0..self.m).map(move |i| (i, j)))
            .map(|(i, j)| self.at(i, j).clone())
            .collect();
        Matrix {
            m: self.n,
            n: self.m,
            v,
        }
    }

    /// 2xn moves between row pairs (or column pairs when `transpose`), over
    /// every column set made of the lone entry's column and a subset of the
    /// columns where only the full row is positive.
    fn improve_2xn(&mut self, transpose: bool) -> Option<TransformStep> {
        let mut work = if transpose {
            self.transposed()
        } else {
            Matrix {
                m: self.m,
                n: self.n,
                v: self.v.clone(),
            }
        };
        for lone in 0..work.m {
            for full in (0..work.m).filter(|&r| r != lone) {
                let lone_cols: Vec<usize> = (0..work.n)
                    .filter(|&k| work.at(lone, k).is_positive())
                    .collect();
                for &j0 in &lone_cols {
                    let free: Vec<usize> = (0..work.n)
                        .filter(|&k| {
                            k != j0
                                && work.at(full, k).is_positive()
                                && !work.at(lone, k).is_positive()
                        })
                        .collect();
                    for mask in 1u32..(1 << free.len()) {
                        let mut cols = vec![j0];
                        cols.extend(
                            free.iter()
                                .enumerate()
                                .filter(|(b, _)| mask & (1 << b) != 0)
                                .map(|(_, &k)| k),
                        );
                        let a = [
                            cols.iter()
                                .map(|&k| work.at(full, k).clone())
                                .collect::<Vec<_>>(),
                            cols.iter()
                                .map(|&k| work.at(lone, k).clone())
                                .collect::<Vec<_>>(),
                        ];
                        let Some((moved, 1)) = lemma_2xn_transform(&a) else {
                            continue;
                        };
                        let before: Vec<Rational> = a.iter().flatten().cloned().collect();
                        let after: Vec<Rational> = moved.iter().flatten().cloned().collect();
                        if shannon_of(&after) >= shannon_of(&before) - STRICT_MARGIN {
                            continue;
                        }
                        for (c, &k) in cols.iter().enumerate() {
                            work.v[full * work.n + k] = moved[0][c].clone();
                            work.v[lone * work.n + k] = moved[1][c].clone();
                        }
                        *self = if transpose { work.transposed() } else { work };
                        let b = &a[1][0] - &moved[1][0];
                        let (rows, cols) = if transpose {
                            (cols, vec![full, lone])
                        } else {
                            (vec![full, lone], cols)
                        };
                        return Some(TransformStep {
                            kind: TransformKind::Lemma2xN,
                            rows,
                            cols,
                            b,
                        });
                    }
                }
            }
        }
        None
    }
}

/// Applies strict moves in a fixed scan order until none applies.
pub fn local_optimize(p: &Coupling) -> Result<(Coupling, Vec<TransformStep>), LocalError> {
    local_optimize_with_cap(p, 10_000)
}

pub fn local_optimize_with_cap(
    p: &Coupling,
    cap: usize,
) -> Result<(Coupling, Vec<TransformStep>), LocalError> {
    let (m, n) = two_marginal(p)?;
    let mut work = Matrix {
        m,
        n,
        v: p.values().to_vec(),
    };
    let mut steps = Vec::new();
    while let Some(step) = work.improve_once() {
        steps.push(step);
        if steps.len() >= cap {
            return Err(LocalError::StepCap(cap));
        }
    }
    Ok((
        Coupling::from_trusted(work.v, p.marginals().to_vec()),
        steps,
    ))
}

/// Greedy coupling: repeatedly match the largest residual row and column
/// masses (smallest index on ties).
pub fn greedy_coupling(p: &Distribution, q: &Distribution) -> Coupling {
    let (m, n) = (p.len(), q.len());
    let mut rows = p.weights().to_vec();
    let mut cols = q.weights().to_vec();
    let mut values = vec![Rational::zero(); m * n];
    let argmax =
        |v: &[Rational]| (0..v.len()).fold(0, |best, k| if v[k] > v[best] { k } else { best });
    while rows.iter().any(Rational::is_positive) {
        let (i, j) = (argmax(&rows), argmax(&cols));
        let mass = rows[i].clone().min(cols[j].clone());
        values[i * n + j] += &mass;
        rows[i] -= &mass;
        cols[j] -= &mass;
    }
    Coupling::from_trusted(values, vec![p.clone(), q.clone()])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Human-readable counterexample when the check fails.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalOptimalityReport {
    pub checks: Vec<Check>,
}

impl LocalOptimalityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks the dichotomy on every 2x2 submatrix `[[a_1j0, a_1k], [a_2j0, 0]]`
/// with the first row positive: either `a_2j0 >= a_1j0 + a_1k`, or
/// `a_1j0 <= a_1k` and `a_1k >= a_1j0 + a_2j0`. Wider column sets are not
/// checked: a minimizer can violate the same condition on three columns.
fn dichotomy(v: &Matrix, label: (&str, &str)) -> Option<String> {
    for full in 0..v.m {
        for lone in (0..v.m).filter(|&r| r != full) {
            for j0 in
                (0..v.n).filter(|&j| v.at(full, j).is_positive() && v.at(lone, j).is_positive())
            {
                for k in (0..v.n)
                    .filter(|&k| v.at(full, k).is_positive() && !v.at(lone, k).is_positive())
                {
                    let (head, pivot, other) = (v.at(full, j0), v.at(lone, j0), v.at(full, k));
                    let absorbs = *pivot >= head + other;
                    let ladder = head <= other && *other >= head + pivot;
                    if !(absorbs || ladder) {
                        return Some(format!(
                            "{} {} vs {} {} on {}s [{}, {}]",
                            label.0,
                            full + 1,
                            label.0,
                            lone + 1,
                            label.1,
                            j0 + 1,
                            k + 1
                        ));
                    }
                }
            }
        }
    }
    None
}

/// Structural checks every local optimum satisfies: complete forest support
/// (a tree when `kappa = 1`), the dichotomy on rows and on columns, and
/// `m + n - kappa <= |V| <= m + n - 1`.
pub fn verify_local_optimal(
    p: &Coupling,
    kappa: usize,
) -> Result<LocalOptimalityReport, LocalError> {
    let (m, n) = two_marginal(p)?;
    let support = SupportSet::of(p);
    let class = classify(&support);
    let structure_ok = class.is_forest && class.is_complete && (kappa != 1 || class.is_tree);
    let structure = Check {
        name: "complete-forest",
        passed: structure_ok,
        witness: (!structure_ok).then(|| {
            format!(
                "forest={} complete={} components={} kappa={kappa}",
                class.is_forest, class.is_complete, class.component_count
            )
        }),
    };
    let matrix = Matrix {
        m,
        n,
        v: p.values().to_vec(),
    };
    let rows = dichotomy(&matrix, ("row", "column"));
    let cols = dichotomy(&matrix.transposed(), ("column", "row"));
    let size = support.len();
    let low = (m + n).saturating_sub(kappa);
    let size_ok = low <= size && size < m + n;
    Ok(LocalOptimalityReport {
        checks: vec![
            structure,
            Check {
                name: "row-dichotomy",
                passed: rows.is_none(),
                witness: rows,
            },
            Check {
                name: "column-dichotomy",
                passed: cols.is_none(),
                witness: cols,
            },
            Check {
                name: "support-size",
                passed: size_ok,
                witness: (!size_ok).then(|| format!("|V| = {size} outside [{low}, {}]", m + n - 1)),
            },
        ],
    })
}
