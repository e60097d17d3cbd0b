//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mec_core::{classify, Distribution, Rational, SupportSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dist(lits: &[&str]) -> Distribution {
    Distribution::parse(lits).unwrap()
}

/// A random distribution with small integer weights over a common total.
pub fn random_dist(rng: &mut ChaCha8Rng, len: usize, max_weight: i64) -> Distribution {
    let w: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=max_weight)).collect();
    let total: i64 = w.iter().sum();
    Distribution::new(w.iter().map(|&x| Rational::new(x, total)).collect()).unwrap()
}

/// Every zero-based cell of the lattice, row-major.
pub fn all_cells(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut cells = vec![vec![]];
    for &m in dims {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                (0..m).map(move |x| {
                    let mut next = c.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    cells
}

/// Every `k`-subset of `0..n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Subsets of size `sum m - d + 1` that the graph layer classifies as trees.
pub fn spanning_trees(dims: &[usize]) -> Vec<SupportSet> {
    let cells = all_cells(dims);
    let size = dims.iter().sum::<usize>() + 1 - dims.len();
    combinations(cells.len(), size)
        .into_iter()
        .map(|pick| SupportSet::new(dims.to_vec(), pick.iter().map(|&k| cells[k].clone())).unwrap())
        .filter(|s| classify(s).is_tree)
        .collect()
}

/// Rank and unique solution (if the columns are independent and the system
/// is consistent) of a dense rational system, by Gauss-Jordan elimination.
pub fn gauss_jordan(
    mut a: Vec<Vec<Rational>>,
    mut b: Vec<Rational>,
) -> (usize, Option<Vec<Rational>>) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        b[r] = &b[r] * &inv;
        for i in (0..rows).filter(|&i| i != r) {
            let f = a[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..cols {
                let d = &f * &a[r][j];
                a[i][j] = &a[i][j] - &d;
            }
            let d = &f * &b[r];
            b[i] = &b[i] - &d;
        }
        pivots.push(c);
        r += 1;
    }
    let consistent = b[r..].iter().all(Rational::is_zero);
    if r < cols || !consistent {
        return (r, None);
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    (r, Some(x))
}

/// Vertices of the two-marginal transportation polytope: every basis of the
/// full row-and-column constraint system with a nonnegative solution.
pub fn brute_force_vertices(p: &Distribution, q: &Distribution) -> BTreeSet<Vec<Rational>> {
    let (m, n) = (p.len(), q.len());
    let mut rhs: Vec<Rational> = p.weights().to_vec();
    rhs.extend(q.weights().iter().cloned());
    let mut out = BTreeSet::new();
    for basis in combinations(m * n, m + n - 1) {
        let a: Vec<Vec<Rational>> = (0..m + n)
            .map(|row| {
                basis
                    .iter()
                    .map(|&cell| {
                        let hit = if row < m {
                            cell / n == row
                        } else {
                            cell % n == row - m
                        };
                        if hit {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let (_, Some(x)) = gauss_jordan(a, rhs.clone()) else {
            continue;
        };
        if x.iter().any(Rational::is_negative) {
            continue;
        }
        let mut dense = vec![Rational::zero(); m * n];
        for (&cell, v) in basis.iter().zip(x) {
            dense[cell] = v;
        }
        out.insert(dense);
    }
    out
}

/// Structure constant straight from its definition: the best number of
/// shared proper prefix sums over all permutation pairs, plus one.
pub fn kappa_brute(p: &Distribution, q: &Distribution) -> usize {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        perms(n - 1)
            .into_iter()
            .flat_map(|rest| {
                (0..n).map(move |pos| {
                    let mut v = rest.clone();
                    v.insert(pos, n - 1);
                    v
                })
            })
            .collect()
    }
    let prefixes = |d: &Distribution, order: &[usize]| -> BTreeSet<Rational> {
        let mut acc = Rational::zero();
        order[..order.len() - 1]
            .iter()
            .map(|&i| {
                acc = &acc + d.get(i);
                acc.clone()
            })
            .collect()
    };
    let ps: Vec<BTreeSet<Rational>> = perms(p.len()).iter().map(|o| prefixes(p, o)).collect();
    let qs: Vec<BTreeSet<Rational>> = perms(q.len()).iter().map(|o| prefixes(q, o)).collect();
    1 + ps
        .iter()
        .flat_map(|a| qs.iter().map(move |b| a.intersection(b).count()))
        .max()
        .unwrap()
}
